"""Command-line entry point: ``cqsim simulate | compare | bench | codec``.

Exit status is 0 on success, 1 when the pipeline fails at runtime, and 2 for
usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import codec
from .aalc import DEFAULT_LADDER, ErrorBoundLadder, checkpoint_load, checkpoint_save, check_theta, run_program
from .circuits import CircuitParseError, CircuitProgram, build_grover, build_qft, build_random, parse_circuit
from .metrics import emit_csv, emit_summary_json
from .reference import DEFAULT_MAX_QUBITS, fidelity, run_dense
from .state import StateGeometry


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    circuit: str
    n_qubits: int | None
    theta: float
    ladder: ErrorBoundLadder
    stride_bits: int | None
    marked: int
    iterations: int | None
    initial: int | None
    depth: int
    seed: int | None
    reference_enabled: bool
    out_csv: str | None
    out_json: str | None
    checkpoint: str | None
    checkpoint_at: int | None
    resume: str | None
    workers: int
    max_dense_qubits: int

    @classmethod
    def from_args(cls, args) -> RunConfig:
        try:
            ladder = ErrorBoundLadder.parse(args.ladder)
            theta = check_theta(args.theta)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        return cls(
            circuit=args.circuit, n_qubits=args.qubits, theta=theta, ladder=ladder,
            stride_bits=args.stride_bits, marked=args.marked, iterations=args.iterations,
            initial=args.initial, depth=args.depth, seed=args.seed,
            reference_enabled=getattr(args, "reference", False),
            out_csv=args.csv, out_json=getattr(args, "json", None),
            checkpoint=getattr(args, "checkpoint", None), checkpoint_at=getattr(args, "checkpoint_at", None),
            resume=getattr(args, "resume", None), workers=args.workers, max_dense_qubits=args.max_dense_qubits,
        )

    def program(self) -> CircuitProgram:
        src = self.circuit
        try:
            if src.startswith("builtin:"):
                kind = src.split(":", 1)[1]
                if self.n_qubits is None:
                    raise ConfigError(f"{src} needs --qubits")
                if kind == "qft":
                    return build_qft(self.n_qubits)
                if kind == "grover":
                    return build_grover(self.n_qubits, self.marked, self.iterations)
                if kind == "random":
                    return build_random(self.n_qubits, self.depth, self.seed)
                raise ConfigError(f"unknown builtin circuit {src!r} (qft, grover, random)")
            path = Path(src)
            if not path.is_file():
                raise ConfigError(f"circuit file not found: {src}")
            program = parse_circuit(path.read_text(encoding="utf-8"), path.stem)
        except (CircuitParseError, ValueError) as exc:
            raise ConfigError(f"{src}: {exc}") from None
        if self.n_qubits is not None and self.n_qubits != program.n_qubits:
            raise ConfigError(f"--qubits {self.n_qubits} disagrees with the circuit's {program.n_qubits}")
        return program

    def geometry(self, program: CircuitProgram) -> StateGeometry:
        try:
            return StateGeometry.for_qubits(program.n_qubits, self.stride_bits)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def initial_index(self, program: CircuitProgram) -> int:
        if self.initial is not None:
            value = self.initial
        else:
            # QFT of |0> is a real uniform vector; |1> gives a dense complex output
            value = 1 if self.circuit == "builtin:qft" else 0
        if not 0 <= value < 1 << program.n_qubits:
            raise ConfigError(f"--initial {value} out of range for {program.n_qubits} qubits")
        return value


def _run(cfg: RunConfig, program: CircuitProgram, geometry: StateGeometry, initial: int):
    state = None
    if cfg.resume:
        try:
            state = checkpoint_load(cfg.resume, geometry, cfg.ladder)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot resume from {cfg.resume}: {exc}") from None
    return run_program(program, cfg.ladder, cfg.theta, geometry, initial, cfg.workers,
                       state=state, stop=cfg.checkpoint_at)


def _dense(cfg: RunConfig, program: CircuitProgram, initial: int):
    if program.n_qubits > cfg.max_dense_qubits:
        raise ConfigError(f"{program.n_qubits} qubits exceeds the dense reference guard of {cfg.max_dense_qubits}")
    t0 = time.perf_counter()
    psi = run_dense(program, initial, cfg.max_dense_qubits)
    return psi, time.perf_counter() - t0


def _print_summary(summary, out=sys.stdout):
    for key, value in vars(summary).items():
        if value is not None:
            print(f"{key}: {value}", file=out)


def cmd_simulate(args) -> int:
    cfg = RunConfig.from_args(args)
    program = cfg.program()
    geometry = cfg.geometry(program)
    initial = cfg.initial_index(program)
    if cfg.reference_enabled:
        _dense(cfg, program, initial)  # size guard before the long run
    state, metrics = _run(cfg, program, geometry, initial)
    fid = ref_time = None
    if cfg.reference_enabled:
        psi, ref_time = _dense(cfg, program, initial)
        fid = fidelity(state.to_dense(), psi)
    if cfg.checkpoint:
        checkpoint_save(state, cfg.checkpoint, cfg.ladder)
        print(f"checkpoint: {cfg.checkpoint} (after {state.gates_applied} gates)")
    summary = metrics.summary(fid, ref_time)
    print(f"circuit: {program.name or cfg.circuit} ({program.n_qubits} qubits, {len(program)} gates)")
    _print_summary(summary)
    if metrics.collapsed_at is not None:
        print(f"collapsed_at_gate: {metrics.collapsed_at}")
    if cfg.out_csv:
        emit_csv(metrics.records, cfg.out_csv)
    if cfg.out_json:
        emit_summary_json(summary, cfg.out_json)
    return 0


def compare(cfg: RunConfig, program: CircuitProgram):
    geometry = cfg.geometry(program)
    initial = cfg.initial_index(program)
    psi, ref_time = _dense(cfg, program, initial)
    state, metrics = run_program(program, cfg.ladder, cfg.theta, geometry, initial, cfg.workers)
    fid = fidelity(state.to_dense(), psi)
    return state, metrics, metrics.summary(fid, ref_time), psi


def cmd_compare(args) -> int:
    cfg = RunConfig.from_args(args)
    program = cfg.program()
    state, metrics, summary, psi = compare(cfg, program)
    print(f"circuit: {program.name or cfg.circuit} ({program.n_qubits} qubits, {len(program)} gates)")
    print(f"fidelity: {summary.fidelity!r}")
    print(f"overhead_factor: {summary.overhead_factor!r}")
    print(f"compressed_norm: {math.sqrt(state.norm_sq())!r}")
    print(f"reference_norm: {float(np.linalg.norm(psi))!r}")
    print(f"overall_min_ratio: {summary.overall_min_ratio!r}")
    print(f"threshold_violations: {summary.threshold_violations}")
    if metrics.collapsed_at is not None:
        print(f"collapsed_at_gate: {metrics.collapsed_at}")
    if cfg.out_csv:
        emit_csv(metrics.records, cfg.out_csv)
    if cfg.out_json:
        emit_summary_json(summary, cfg.out_json)
    return 0


def cmd_bench(args) -> int:
    try:
        thetas = [check_theta(float(t)) for t in args.thetas.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --thetas: {exc}") from None
    if not thetas:
        raise ConfigError("--thetas is empty")
    args.csv_rows = None
    cfg = RunConfig.from_args(args)
    program = cfg.program()
    rows = []
    for theta in thetas:
        cfg.theta = theta
        _, _, summary, _ = compare(cfg, program)
        rows.append((theta, summary.overall_min_ratio, summary.fidelity, summary.total_elapsed,
                     summary.threshold_violations))
    out = open(cfg.out_csv, "w", newline="") if cfg.out_csv else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["theta", "min_ratio", "fidelity", "time", "threshold_violations"])
        for row in rows:
            writer.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_codec(args) -> int:
    path = Path(args.input)
    if not path.is_file():
        raise ConfigError(f"input file not found: {args.input}")
    raw = path.read_bytes()
    if len(raw) % 8:
        raise ConfigError(f"{args.input}: size {len(raw)} is not a multiple of 8 bytes")
    if not args.delta >= 0:
        raise ConfigError("--delta must be >= 0")
    x = np.frombuffer(raw, dtype="<f8")
    try:
        block = codec.compress(x, args.delta)
    except ValueError as exc:
        raise ConfigError(f"{args.input}: {exc}") from None
    y = codec.decompress(block.to_bytes())
    max_err = float(np.max(np.abs(y - x))) if x.size else 0.0
    print(f"scalars: {x.size}")
    print(f"compressed_bytes: {block.nbytes}")
    print(f"ratio: {block.ratio!r}")
    print(f"max_error: {max_err!r}")
    if args.output:
        Path(args.output).write_bytes(y.astype("<f8").tobytes())
    return 0


def _add_run_flags(p: argparse.ArgumentParser, with_theta: bool = True) -> None:
    p.add_argument("--circuit", required=True, help="circuit file, builtin:qft, builtin:grover or builtin:random")
    p.add_argument("--qubits", type=int)
    if with_theta:
        p.add_argument("--theta", type=float, default=1.0, help="compression ratio threshold")
    p.add_argument("--ladder", default=",".join(repr(b) for b in DEFAULT_LADDER.bounds),
                   help="comma-separated error bounds, first must be 0")
    p.add_argument("--stride-bits", type=int)
    p.add_argument("--marked", type=int, default=0, help="Grover marked basis index")
    p.add_argument("--iterations", type=int, help="Grover iterations (default round(pi/4 sqrt(2^n)))")
    p.add_argument("--initial", type=int, help="initial basis index (default 1 for builtin:qft, else 0)")
    p.add_argument("--depth", type=int, default=100, help="gate count for builtin:random")
    p.add_argument("--seed", type=int, help="seed for builtin:random")
    p.add_argument("--csv", help="per-gate CSV output")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-dense-qubits", type=int, default=DEFAULT_MAX_QUBITS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cqsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a circuit on the compressed state")
    _add_run_flags(p)
    p.add_argument("--json", help="run summary JSON output")
    p.add_argument("--reference", action="store_true", help="also run the dense oracle and report fidelity")
    p.add_argument("--checkpoint", help="save the compressed state here when the run ends")
    p.add_argument("--checkpoint-at", type=int, help="stop before this gate index (use with --checkpoint)")
    p.add_argument("--resume", help="continue from a saved checkpoint")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="compressed run versus dense reference")
    _add_run_flags(p)
    p.add_argument("--json", help="run summary JSON output")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bench", help="sweep ratio thresholds")
    _add_run_flags(p, with_theta=False)
    p.add_argument("--thetas", required=True, help="comma-separated thresholds, e.g. 4,8,16,32")
    p.set_defaults(func=cmd_bench, theta=1.0)

    p = sub.add_parser("codec", help="round-trip a raw little-endian float64 file")
    p.add_argument("--input", required=True)
    p.add_argument("--delta", type=float, default=0.0, help="error bound; 0 is lossless")
    p.add_argument("--output", help="write the decompressed scalars here")
    p.set_defaults(func=cmd_codec)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"cqsim: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pipeline failure
        print(f"cqsim: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
