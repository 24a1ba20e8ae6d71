"""Compressed state store and the amplitude-aware adaptive compression loop.

The state vector never exists in decompressed form as a whole.  For each gate,
every stride (or stride pair, for targets above the stride bits) the gate
touches is decompressed, normalized, updated, and recompressed by walking an
error-bound ladder from lossless upward until the stride's compression ratio
reaches the threshold.

Normalization is global and lazy.  Stored stride ``j`` decodes to ``D_j``; the
logical amplitudes are ``pending_scale * stride_scale[j] * D_j``.  Strides a
gate skips are never decompressed, only their scale is updated.
"""

from __future__ import annotations

import hashlib
import math
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import codec
from .circuits import CircuitProgram
from .codec import CompressedBlock
from .gates import GateOp, apply_to_group, stride_groups
from .metrics import GateRecord, RunSummary, summarize, summary_gain
from .state import AMPLITUDE_BYTES, StateGeometry, flush_tiny

DEFAULT_LADDER_BOUNDS = (0.0, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3)


@dataclass(frozen=True)
class ErrorBoundLadder:
    bounds: tuple[float, ...] = DEFAULT_LADDER_BOUNDS

    def __post_init__(self):
        b = tuple(float(x) for x in self.bounds)
        if not b:
            raise ValueError("error-bound ladder is empty")
        if b[0] != 0.0:
            raise ValueError(f"first ladder level must be 0 (lossless), got {b[0]}")
        if not all(math.isfinite(x) for x in b):
            raise ValueError("ladder bounds must be finite")
        if any(lo >= hi for lo, hi in zip(b, b[1:])):
            raise ValueError(f"ladder bounds must be strictly increasing: {b}")
        object.__setattr__(self, "bounds", b)

    @classmethod
    def parse(cls, text: str) -> ErrorBoundLadder:
        try:
            return cls(tuple(float(t) for t in text.split(",") if t.strip()))
        except ValueError as exc:
            raise ValueError(f"bad ladder {text!r}: {exc}") from None

    def fingerprint(self) -> bytes:
        return hashlib.sha256(struct.pack(f"<{len(self.bounds)}d", *self.bounds)).digest()[:8]

    def __iter__(self):
        return iter(self.bounds)

    def __len__(self):
        return len(self.bounds)


DEFAULT_LADDER = ErrorBoundLadder()
LOSSLESS_ONLY = ErrorBoundLadder((0.0,))


def check_theta(theta: float) -> float:
    theta = float(theta)
    if not theta >= 1:
        raise ValueError(f"ratio threshold must be >= 1, got {theta}")
    return theta


@dataclass
class StrideCompressReport:
    stride_index: int
    chosen_delta: float
    ratio: float
    bytes_in: int
    bytes_out: int
    threshold_met: bool


def _encode_plane(x: np.ndarray, delta: float) -> tuple[CompressedBlock, np.ndarray]:
    if delta == 0:
        return codec.compress_lossless(x), x
    return codec.compress_lossy_with_recon(x, delta)


def compress_stride_adaptive(amps: np.ndarray, ladder: ErrorBoundLadder, theta: float, stride_index: int = 0):
    """Compress one stride with the smallest ladder bound whose ratio reaches ``theta``.

    Returns ``((re_block, im_block), report, reconstruction)``.  When no level
    reaches the threshold the last (largest-bound) attempt is kept and the
    report says ``threshold_met=False``.
    """
    theta = check_theta(theta)
    re = np.ascontiguousarray(amps.real)
    im = np.ascontiguousarray(amps.imag)
    bytes_in = AMPLITUDE_BYTES * amps.size
    for delta in ladder.bounds:
        re_block, re_rec = _encode_plane(re, delta)
        im_block, im_rec = _encode_plane(im, delta)
        bytes_out = re_block.nbytes + im_block.nbytes
        ratio = bytes_in / bytes_out
        if ratio >= theta:
            break
    report = StrideCompressReport(stride_index, delta, ratio, bytes_in, bytes_out, ratio >= theta)
    if delta == 0:
        recon = amps
    else:
        recon = re_rec + 1j * im_rec
    return (re_block, im_block), report, recon


def _plane_pair(amps: np.ndarray) -> tuple[CompressedBlock, CompressedBlock]:
    return (codec.compress_lossless(np.ascontiguousarray(amps.real)),
            codec.compress_lossless(np.ascontiguousarray(amps.imag)))


class CompressedState:
    """Resident representation: one (real, imaginary) block pair per stride."""

    def __init__(self, geometry: StateGeometry, blocks, stride_scale, stride_sumsq,
                 pending_scale: float = 1.0, gates_applied: int = 0, collapsed: bool = False):
        if len(blocks) != geometry.n_strides:
            raise ValueError(f"expected {geometry.n_strides} strides, got {len(blocks)}")
        for re, im in blocks:
            if re.scalar_count != geometry.stride_len or im.scalar_count != geometry.stride_len:
                raise ValueError("block scalar count does not match the stride length")
        self.geometry = geometry
        self.blocks = list(blocks)
        self.stride_scale = np.asarray(stride_scale, dtype=np.float64).copy()
        self.stride_sumsq = np.asarray(stride_sumsq, dtype=np.float64).copy()
        self.pending_scale = float(pending_scale)
        self.gates_applied = gates_applied
        self.collapsed = collapsed

    @property
    def sum_sq(self) -> float:
        """Norm squared of the stored data with stride scales applied (before renormalization)."""
        return float(np.sum(self.stride_scale ** 2 * self.stride_sumsq))

    def norm_sq(self) -> float:
        """Norm squared of the logical state, from the per-stride accounting."""
        return self.pending_scale ** 2 * self.sum_sq

    def decompress_stride(self, j: int) -> np.ndarray:
        re, im = self.blocks[j]
        out = codec.decompress(re).astype(np.complex128)
        out.imag = codec.decompress(im)
        return out

    def stride_amplitudes(self, j: int) -> np.ndarray:
        return self.decompress_stride(j) * (self.pending_scale * self.stride_scale[j])

    def to_dense(self) -> np.ndarray:
        """Full logical state vector.  Only sensible at desk scale."""
        return np.concatenate([self.stride_amplitudes(j) for j in range(self.geometry.n_strides)])

    def stride_nbytes(self) -> np.ndarray:
        return np.array([re.nbytes + im.nbytes for re, im in self.blocks], dtype=np.int64)

    @property
    def nbytes(self) -> int:
        return int(self.stride_nbytes().sum())

    def stride_ratios(self) -> np.ndarray:
        return AMPLITUDE_BYTES * self.geometry.stride_len / self.stride_nbytes()

    @property
    def min_ratio(self) -> float:
        return float(self.stride_ratios().min())

    @property
    def ratio(self) -> float:
        return self.geometry.raw_bytes / self.nbytes


def init_basis_state(geometry: StateGeometry, basis_index: int = 0) -> CompressedState:
    """Computational basis state ``e_{basis_index}``, stored losslessly."""
    j_hot, offset = geometry.locate(basis_index)
    zeros = _plane_pair(np.zeros(geometry.stride_len, dtype=np.complex128))
    hot = np.zeros(geometry.stride_len, dtype=np.complex128)
    hot[offset] = 1.0
    blocks = [zeros] * geometry.n_strides
    blocks[j_hot] = _plane_pair(hot)
    sumsq = np.zeros(geometry.n_strides)
    sumsq[j_hot] = 1.0
    return CompressedState(geometry, blocks, np.ones(geometry.n_strides), sumsq)


def from_amplitudes(amplitudes: np.ndarray, geometry: StateGeometry) -> CompressedState:
    """Losslessly store an arbitrary (normalized or not) dense vector."""
    amps = np.array(amplitudes, dtype=np.complex128).reshape(geometry.n_strides, geometry.stride_len)
    blocks = [_plane_pair(flush_tiny(s.copy())) for s in amps]
    sumsq = np.array([np.vdot(s, s).real for s in amps])
    total = float(sumsq.sum())
    if total == 0:
        raise ValueError("cannot store a zero vector as a quantum state")
    return CompressedState(geometry, blocks, np.ones(geometry.n_strides), sumsq, 1.0 / math.sqrt(total))


def apply_gate(state: CompressedState, gate: GateOp, ladder: ErrorBoundLadder = DEFAULT_LADDER,
               theta: float = 1.0, executor: ThreadPoolExecutor | None = None) -> list[StrideCompressReport]:
    """Decompress, normalize, update and adaptively recompress every stride the gate touches.

    The state is updated only after every group succeeded.  Returns one report
    per recompressed stride, ordered by stride index.
    """
    theta = check_theta(theta)
    geo = state.geometry
    groups = stride_groups(gate, geo.n_qubits, geo.stride_bits)
    scale = state.pending_scale * state.stride_scale

    def work(group):
        bufs = [state.decompress_stride(j) * scale[j] for j in group]
        apply_to_group(gate, group, bufs, geo.stride_bits)
        out = []
        for j, buf in zip(group, bufs):
            flush_tiny(buf)
            pair, report, recon = compress_stride_adaptive(buf, ladder, theta, j)
            out.append((j, pair, report, float(np.vdot(recon, recon).real)))
        return out

    if executor is None:
        results = [work(grp) for grp in groups]
    else:
        results = list(executor.map(work, groups))

    new_scale = scale.copy()
    new_sumsq = state.stride_sumsq.copy()
    reports = []
    for out in results:
        for j, pair, report, sumsq in out:
            state.blocks[j] = pair
            new_scale[j] = 1.0
            new_sumsq[j] = sumsq
            reports.append(report)
    state.stride_scale = new_scale
    state.stride_sumsq = new_sumsq
    total = state.sum_sq
    if total > 0:
        state.pending_scale = 1.0 / math.sqrt(total)
    else:
        # every amplitude quantized to zero: no direction left to renormalize
        state.pending_scale = 1.0
        state.collapsed = True
    state.gates_applied += 1
    reports.sort(key=lambda r: r.stride_index)
    return reports


@dataclass
class RunMetrics:
    records: list[GateRecord] = field(default_factory=list)
    initial_min_ratio: float = math.inf
    threshold_violations: int = 0
    collapsed_at: int | None = None

    @property
    def overall_min_ratio(self) -> float:
        return min([self.initial_min_ratio] + [r.min_ratio for r in self.records])

    @property
    def elapsed_seconds(self) -> float:
        return sum(r.elapsed_ns for r in self.records) / 1e9

    def summary(self, fidelity: float | None = None, reference_time: float | None = None) -> RunSummary:
        if not self.records:
            return RunSummary(self.overall_min_ratio, summary_gain(self.overall_min_ratio), 0.0,
                              self.threshold_violations, reference_time, None, fidelity)
        s = summarize(self.records, fidelity, reference_time, self.threshold_violations)
        # the initial state counts toward the run minimum too
        s.overall_min_ratio = self.overall_min_ratio
        s.qubit_gain = summary_gain(s.overall_min_ratio)
        return s


def run_program(program: CircuitProgram, ladder: ErrorBoundLadder = DEFAULT_LADDER, theta: float = 1.0,
                geometry: StateGeometry | None = None, initial: int = 0, workers: int = 1,
                state: CompressedState | None = None, stop: int | None = None,
                on_gate=None) -> tuple[CompressedState, RunMetrics]:
    """Run ``program`` gate by gate on a compressed state.

    A fresh basis state ``initial`` is created unless ``state`` is given, in
    which case execution resumes at ``state.gates_applied``.  ``stop`` ends the
    run before that gate index.  ``on_gate(index, state, record)`` is called
    after each gate.
    """
    theta = check_theta(theta)
    if geometry is None:
        geometry = state.geometry if state is not None else StateGeometry.for_qubits(program.n_qubits)
    if geometry.n_qubits != program.n_qubits:
        raise ValueError(f"program has {program.n_qubits} qubits, geometry has {geometry.n_qubits}")
    if state is None:
        state = init_basis_state(geometry, initial)
    elif state.geometry != geometry:
        raise ValueError(f"state geometry {state.geometry} does not match {geometry}")
    metrics = RunMetrics(initial_min_ratio=state.min_ratio)
    end = len(program.gates) if stop is None else min(stop, len(program.gates))
    executor = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        for i in range(state.gates_applied, end):
            gate = program.gates[i]
            before = state.nbytes
            t0 = time.perf_counter_ns()
            try:
                reports = apply_gate(state, gate, ladder, theta, executor)
            except Exception as exc:
                raise RuntimeError(f"gate {i} ({gate.label}) failed: {exc}") from exc
            elapsed = time.perf_counter_ns() - t0
            ratios = state.stride_ratios()
            record = GateRecord(
                gate_index=i,
                gate_label=gate.label,
                stride_count=len(reports),
                min_ratio=float(ratios.min()),
                mean_ratio=float(ratios.mean()),
                max_chosen_delta=max((r.chosen_delta for r in reports), default=0.0),
                bytes_before=before,
                bytes_after=state.nbytes,
                elapsed_ns=elapsed,
                norm_after=state.norm_sq(),
            )
            metrics.records.append(record)
            metrics.threshold_violations += sum(not r.threshold_met for r in reports)
            if state.collapsed and metrics.collapsed_at is None:
                metrics.collapsed_at = i
            if on_gate is not None:
                on_gate(i, state, record)
    finally:
        if executor is not None:
            executor.shutdown()
    return state, metrics


# --------------------------------------------------------------------------
# checkpoints

CKPT_MAGIC = b"QCKP"
CKPT_VERSION = 1
_CKPT_HEADER = struct.Struct("<4sBHH8sdBQQ")
_STRIDE_HEADER = struct.Struct("<dd")


class CheckpointError(ValueError):
    pass


class CheckpointVersionError(CheckpointError):
    pass


class CheckpointTruncatedError(CheckpointError):
    pass


class GeometryMismatchError(CheckpointError):
    pass


class LadderMismatchError(CheckpointError):
    pass


def checkpoint_save(state: CompressedState, path, ladder: ErrorBoundLadder = DEFAULT_LADDER) -> None:
    """Write the compressed blocks verbatim, so loading adds no further loss."""
    geo = state.geometry
    parts = [_CKPT_HEADER.pack(CKPT_MAGIC, CKPT_VERSION, geo.n_qubits, geo.stride_bits, ladder.fingerprint(),
                               state.pending_scale, int(state.collapsed), state.gates_applied, geo.n_strides)]
    for j, (re, im) in enumerate(state.blocks):
        parts.append(_STRIDE_HEADER.pack(state.stride_scale[j], state.stride_sumsq[j]))
        parts.append(re.to_bytes())
        parts.append(im.to_bytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


def checkpoint_load(path, geometry: StateGeometry | None = None,
                    ladder: ErrorBoundLadder | None = None) -> CompressedState:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 5 or data[:4] != CKPT_MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    if data[4] != CKPT_VERSION:
        raise CheckpointVersionError(f"unsupported checkpoint version {data[4]}")
    if len(data) < _CKPT_HEADER.size:
        raise CheckpointTruncatedError("checkpoint header truncated")
    (_, _, n_qubits, stride_bits, fp, pending, collapsed, gates_applied,
     n_strides) = _CKPT_HEADER.unpack_from(data)
    try:
        geo = StateGeometry(n_qubits, stride_bits)
    except ValueError as exc:
        raise GeometryMismatchError(str(exc)) from None
    if geometry is not None and geometry != geo:
        raise GeometryMismatchError(f"checkpoint holds {geo}, expected {geometry}")
    if n_strides != geo.n_strides:
        raise GeometryMismatchError(f"header declares {n_strides} strides, geometry implies {geo.n_strides}")
    if ladder is not None and ladder.fingerprint() != fp:
        raise LadderMismatchError("checkpoint was written with a different error-bound ladder")

    pos = _CKPT_HEADER.size
    blocks, scales, sumsqs = [], [], []
    for _ in range(n_strides):
        if len(data) - pos < _STRIDE_HEADER.size:
            raise CheckpointTruncatedError("checkpoint truncated in stride header")
        scale, sumsq = _STRIDE_HEADER.unpack_from(data, pos)
        pos += _STRIDE_HEADER.size
        pair = []
        for _plane in range(2):
            try:
                block, pos = CompressedBlock.from_bytes(data, pos)
            except codec.TruncatedBlockError as exc:
                raise CheckpointTruncatedError(f"checkpoint truncated: {exc}") from None
            except codec.CodecError as exc:
                raise CheckpointError(f"corrupt block: {exc}") from None
            if block.scalar_count != geo.stride_len:
                raise GeometryMismatchError(
                    f"block holds {block.scalar_count} scalars, geometry implies {geo.stride_len}")
            pair.append(block)
        blocks.append(tuple(pair))
        scales.append(scale)
        sumsqs.append(sumsq)
    if pos != len(data):
        raise CheckpointError(f"{len(data) - pos} trailing bytes after the last stride")
    return CompressedState(geo, blocks, scales, sumsqs, pending, gates_applied, bool(collapsed))
