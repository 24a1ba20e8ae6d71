"""Gate alphabet and pairwise amplitude updates on strided state vectors.

A single-qubit gate on ``target`` mixes every amplitude pair whose indices
differ only in bit ``target``.  When ``target < stride_bits`` both members of
a pair live in the same stride; otherwise they live in two strides whose
indices differ by ``2**(target - stride_bits)``, and the two buffers are
updated together.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

UNITARY_TOL = 1e-12


class GateKind(str, Enum):
    SINGLE = "single"
    CONTROLLED = "controlled"
    DIAG_PHASE_FLIP = "diag_phase_flip"


@dataclass(frozen=True, eq=False)
class Unitary2x2:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128).reshape(2, 2)
        if not np.all(np.isfinite(m)):
            raise ValueError("unitary entries must be finite")
        err = np.abs(m.conj().T @ m - np.eye(2)).max()
        if err > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary (max |U^dag U - I| = {err:.3g})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_entries(cls, u11, u12, u21, u22) -> Unitary2x2:
        return cls(np.array([[u11, u12], [u21, u22]]))

    def __eq__(self, other):
        return isinstance(other, Unitary2x2) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())

    def __repr__(self):
        return f"Unitary2x2({self.matrix.tolist()})"


_S2 = 1 / math.sqrt(2)
H = Unitary2x2(np.array([[_S2, _S2], [_S2, -_S2]]))
X = Unitary2x2(np.array([[0, 1], [1, 0]]))
Y = Unitary2x2(np.array([[0, -1j], [1j, 0]]))
Z = Unitary2x2(np.array([[1, 0], [0, -1]]))
S = Unitary2x2(np.array([[1, 0], [0, 1j]]))
T = Unitary2x2(np.array([[1, 0], [0, cmath.exp(1j * math.pi / 4)]]))
IDENTITY = Unitary2x2(np.eye(2))

NAMED = {"h": H, "x": X, "y": Y, "z": Z, "s": S, "t": T}


def phase(theta: float) -> Unitary2x2:
    return Unitary2x2(np.array([[1, 0], [0, cmath.exp(1j * theta)]]))


@dataclass(frozen=True)
class GateOp:
    kind: GateKind
    target: int | None = None
    unitary: Unitary2x2 | None = None
    control: int | None = None
    flip_index: int | None = None
    label: str = ""
    params: tuple = field(default=())

    def __post_init__(self):
        if self.kind is GateKind.DIAG_PHASE_FLIP:
            if self.flip_index is None or self.flip_index < 0:
                raise ValueError("diag_phase_flip needs a non-negative flip_index")
            return
        if self.unitary is None or self.target is None or self.target < 0:
            raise ValueError(f"{self.kind.value} gate needs a unitary and a non-negative target")
        if self.kind is GateKind.CONTROLLED:
            if self.control is None or self.control < 0:
                raise ValueError("controlled gate needs a non-negative control")
            if self.control == self.target:
                raise ValueError(f"control equals target ({self.control})")
        elif self.control is not None:
            raise ValueError("single-qubit gate cannot carry a control")

    def qubits(self) -> tuple[int, ...]:
        if self.kind is GateKind.DIAG_PHASE_FLIP:
            return ()
        if self.kind is GateKind.CONTROLLED:
            return (self.control, self.target)
        return (self.target,)

    def validate(self, n_qubits: int) -> None:
        for q in self.qubits():
            if q >= n_qubits:
                raise ValueError(f"qubit {q} out of range for {n_qubits} qubits")
        if self.flip_index is not None and self.flip_index >= 1 << n_qubits:
            raise ValueError(f"flip index {self.flip_index} out of range for {n_qubits} qubits")


def single(name: str, target: int) -> GateOp:
    return GateOp(GateKind.SINGLE, target, NAMED[name], label=name)


def controlled(u: Unitary2x2, control: int, target: int, label: str = "cu", params: tuple = ()) -> GateOp:
    return GateOp(GateKind.CONTROLLED, target, u, control=control, label=label, params=params)


def cx(control: int, target: int) -> GateOp:
    return controlled(X, control, target, "cx")


def cz(control: int, target: int) -> GateOp:
    return controlled(Z, control, target, "cz")


def cphase(theta: float, control: int, target: int) -> GateOp:
    return controlled(phase(theta), control, target, "cp", (float(theta),))


def general(u: Unitary2x2, target: int) -> GateOp:
    return GateOp(GateKind.SINGLE, target, u, label="u")


def phase_flip(index: int) -> GateOp:
    return GateOp(GateKind.DIAG_PHASE_FLIP, flip_index=index, label="flip")


# --------------------------------------------------------------------------
# kernels


def _control_mask(length: int, half: int, control: int) -> np.ndarray:
    idx = np.arange(length).reshape(-1, 2, half)[:, 0, :]
    return ((idx >> control) & 1).astype(bool)


def apply_single_in_stride(amps: np.ndarray, u: Unitary2x2, target: int, control: int | None = None) -> np.ndarray:
    """Update pairs differing in bit ``target`` inside one buffer (in place).

    ``control``, when given, must also be an intra-stride bit; pairs whose
    control bit is 0 are left alone.
    """
    n = amps.size
    if n & (n - 1) or (1 << target) >= n:
        raise ValueError(f"target {target} is not inside a stride of {n} amplitudes")
    if control is not None and (1 << control) >= n:
        raise ValueError(f"control {control} is not inside a stride of {n} amplitudes")
    half = 1 << target
    (u00, u01), (u10, u11) = u.matrix
    v = amps.reshape(-1, 2, half)
    a0 = v[:, 0, :]
    a1 = v[:, 1, :]
    if control is None:
        new0 = u00 * a0 + u01 * a1
        new1 = u10 * a0 + u11 * a1
        v[:, 0, :] = new0
        v[:, 1, :] = new1
    else:
        m = _control_mask(n, half, control)
        b0 = a0[m]
        b1 = a1[m]
        a0[m] = u00 * b0 + u01 * b1
        a1[m] = u10 * b0 + u11 * b1
    return amps


def apply_single_cross_stride(lo: np.ndarray, hi: np.ndarray, u: Unitary2x2, control: int | None = None):
    """Update pairs (lo[i], hi[i]) for two strides differing only in the target bit (in place).

    ``control`` is an intra-stride bit or None; stride-level controls are
    resolved by the caller.
    """
    if lo.size != hi.size:
        raise ValueError("stride buffers differ in length")
    (u00, u01), (u10, u11) = u.matrix
    if control is None:
        new_lo = u00 * lo + u01 * hi
        new_hi = u10 * lo + u11 * hi
        lo[:] = new_lo
        hi[:] = new_hi
    else:
        if (1 << control) >= lo.size:
            raise ValueError(f"control {control} is not inside a stride of {lo.size} amplitudes")
        m = ((np.arange(lo.size) >> control) & 1).astype(bool)
        b0 = lo[m]
        b1 = hi[m]
        lo[m] = u00 * b0 + u01 * b1
        hi[m] = u10 * b0 + u11 * b1
    return lo, hi


def stride_groups(gate: GateOp, n_qubits: int, stride_bits: int) -> list[tuple[int, ...]]:
    """Stride indices a gate must touch, as singletons or (lo, hi) pairs.

    Strides absent from the result are left untouched; this includes strides
    whose stride-level control bit is 0.
    """
    gate.validate(n_qubits)
    n_strides = 1 << (n_qubits - stride_bits)
    if gate.kind is GateKind.DIAG_PHASE_FLIP:
        return [(gate.flip_index >> stride_bits,)]
    t = gate.target
    c = gate.control if gate.kind is GateKind.CONTROLLED else None
    if c is not None and c >= stride_bits:
        cbit = 1 << (c - stride_bits)
        keep = [j for j in range(n_strides) if j & cbit]
    else:
        keep = list(range(n_strides))
    if t < stride_bits:
        return [(j,) for j in keep]
    tbit = 1 << (t - stride_bits)
    return [(j, j | tbit) for j in keep if not j & tbit]


def apply_to_group(gate: GateOp, group: tuple[int, ...], buffers: list[np.ndarray], stride_bits: int) -> None:
    """Apply ``gate`` to the decompressed buffers of one stride group (in place)."""
    if gate.kind is GateKind.DIAG_PHASE_FLIP:
        (j,) = group
        offset = gate.flip_index - (j << stride_bits)
        if not 0 <= offset < buffers[0].size:
            raise ValueError("flip index is not inside this stride")
        buffers[0][offset] = -buffers[0][offset]
        return
    control = gate.control if gate.kind is GateKind.CONTROLLED else None
    if control is not None and control >= stride_bits:
        for j in group:
            if not (j >> (control - stride_bits)) & 1:
                raise ValueError(f"stride {j} has control bit 0; it must be skipped")
        control = None
    if gate.target < stride_bits:
        (j,) = group
        apply_single_in_stride(buffers[0], gate.unitary, gate.target, control)
    else:
        lo, hi = group
        if hi != lo + (1 << (gate.target - stride_bits)) or (lo >> (gate.target - stride_bits)) & 1:
            raise ValueError(f"strides {lo} and {hi} are not a pair for target {gate.target}")
        apply_single_cross_stride(buffers[0], buffers[1], gate.unitary, control)


def apply_gate_strided(strides: list[np.ndarray], gate: GateOp, stride_bits: int) -> list[np.ndarray]:
    """Apply a gate to a fully decompressed strided state (in place)."""
    n_qubits = stride_bits + int(math.log2(len(strides)))
    for group in stride_groups(gate, n_qubits, stride_bits):
        apply_to_group(gate, group, [strides[j] for j in group], stride_bits)
    return strides
