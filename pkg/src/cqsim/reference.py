"""Dense, uncompressed oracle simulator and pure-state fidelity.

Gates are applied by tensor contraction on a ``(2,) * n`` view of the state,
independently of the strided pair kernels in :mod:`cqsim.gates`.
"""

from __future__ import annotations

import numpy as np

from .circuits import CircuitProgram
from .gates import GateKind, GateOp

DEFAULT_MAX_QUBITS = 26


class SizeGuardError(ValueError):
    pass


def basis_state(n_qubits: int, index: int = 0) -> np.ndarray:
    if not 0 <= index < 1 << n_qubits:
        raise ValueError(f"basis index {index} out of range for {n_qubits} qubits")
    psi = np.zeros(1 << n_qubits, dtype=np.complex128)
    psi[index] = 1.0
    return psi


def apply_dense(psi: np.ndarray, gate: GateOp, n_qubits: int) -> np.ndarray:
    if gate.kind is GateKind.DIAG_PHASE_FLIP:
        psi[gate.flip_index] = -psi[gate.flip_index]
        return psi
    # C-order tensor: axis a holds qubit n-1-a
    tensor = psi.reshape((2,) * n_qubits)
    t_axis = n_qubits - 1 - gate.target
    u = gate.unitary.matrix
    if gate.kind is GateKind.CONTROLLED:
        c_axis = n_qubits - 1 - gate.control
        index = [slice(None)] * n_qubits
        index[c_axis] = 1
        sub = tensor[tuple(index)]
        # dropping the control axis shifts later axes down by one
        sub_axis = t_axis - 1 if t_axis > c_axis else t_axis
        out = np.moveaxis(np.tensordot(u, sub, axes=([1], [sub_axis])), 0, sub_axis)
        tensor[tuple(index)] = out
    else:
        out = np.moveaxis(np.tensordot(u, tensor, axes=([1], [t_axis])), 0, t_axis)
        tensor[...] = out
    return psi


def run_dense(program: CircuitProgram, initial: int | np.ndarray = 0,
              max_qubits: int = DEFAULT_MAX_QUBITS) -> np.ndarray:
    """Exact final state of ``program`` started from a basis index or a given vector."""
    n = program.n_qubits
    if n > max_qubits:
        raise SizeGuardError(f"{n} qubits exceeds the dense size guard of {max_qubits}")
    if isinstance(initial, np.ndarray):
        psi = np.array(initial, dtype=np.complex128)
        if psi.size != 1 << n:
            raise ValueError("initial vector has the wrong length")
    else:
        psi = basis_state(n, initial)
    for gate in program.gates:
        apply_dense(psi, gate, n)
    return psi


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Magnitude of the overlap of two pure states, each renormalized first.

    A zero vector has no direction; its fidelity with anything is 0.
    """
    a = np.asarray(a, dtype=np.complex128).reshape(-1)
    b = np.asarray(b, dtype=np.complex128).reshape(-1)
    if a.size != b.size:
        raise ValueError(f"state lengths differ: {a.size} vs {b.size}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(min(abs(np.vdot(a, b)) / (na * nb), 1.0))
