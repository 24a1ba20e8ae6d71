"""Circuit programs, the line-oriented text format, and the QFT / Grover builders."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import gates as g
from .gates import GateKind, GateOp, Unitary2x2


class CircuitParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class CircuitProgram:
    n_qubits: int
    gates: list[GateOp] = field(default_factory=list)
    name: str = ""

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"a program needs at least one qubit, got {self.n_qubits}")
        for i, gate in enumerate(self.gates):
            try:
                gate.validate(self.n_qubits)
            except ValueError as exc:
                raise ValueError(f"gate {i} ({gate.label}): {exc}") from None

    def __len__(self):
        return len(self.gates)

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for gate in self.gates:
            out[gate.label] = out.get(gate.label, 0) + 1
        return out


# --------------------------------------------------------------------------
# text format

_SINGLE = set(g.NAMED)
_ARITY = {**{k: 1 for k in _SINGLE}, "cx": 2, "cz": 2, "cp": 3, "swap": 2, "u": 9, "flip": 1}


def swap(a: int, b: int) -> list[GateOp]:
    """SWAP as three CX gates."""
    return [g.cx(a, b), g.cx(b, a), g.cx(a, b)]


def _int(tok: str, lineno: int, what: str) -> int:
    try:
        value = int(tok)
    except ValueError:
        raise CircuitParseError(lineno, f"{what} must be an integer, got {tok!r}") from None
    if value < 0:
        raise CircuitParseError(lineno, f"{what} must be non-negative, got {value}")
    return value


def _float(tok: str, lineno: int) -> float:
    try:
        value = float(tok)
    except ValueError:
        raise CircuitParseError(lineno, f"expected a number, got {tok!r}") from None
    if not math.isfinite(value):
        raise CircuitParseError(lineno, f"non-finite number {tok!r}")
    return value


def parse_circuit(text: str, name: str = "") -> CircuitProgram:
    n_qubits = None
    ops: list[GateOp] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *args = line.split()
        head = head.lower()
        if n_qubits is None:
            if head != "qubits":
                raise CircuitParseError(lineno, "first instruction must be 'qubits <n>'")
            if len(args) != 1:
                raise CircuitParseError(lineno, "'qubits' takes exactly one argument")
            n_qubits = _int(args[0], lineno, "qubit count")
            if n_qubits < 1:
                raise CircuitParseError(lineno, "qubit count must be at least 1")
            continue
        if head == "qubits":
            raise CircuitParseError(lineno, "duplicate 'qubits' header")
        if head not in _ARITY:
            raise CircuitParseError(lineno, f"unknown instruction {head!r}")
        if len(args) != _ARITY[head]:
            raise CircuitParseError(lineno, f"{head!r} takes {_ARITY[head]} arguments, got {len(args)}")

        if head == "flip":
            index = _int(args[0], lineno, "basis index")
            if index >= 1 << n_qubits:
                raise CircuitParseError(lineno, f"basis index {index} out of range for {n_qubits} qubits")
            ops.append(g.phase_flip(index))
            continue
        nq = 2 if head in ("cx", "cz", "cp", "swap") else 1
        qubits = [_int(a, lineno, "qubit") for a in args[:nq]]
        for q in qubits:
            if q >= n_qubits:
                raise CircuitParseError(lineno, f"qubit {q} out of range for {n_qubits} qubits")
        if nq == 2 and qubits[0] == qubits[1]:
            what = "qubits must differ" if head == "swap" else "control equals target"
            raise CircuitParseError(lineno, f"{what} ({qubits[0]})")
        if head in _SINGLE:
            ops.append(g.single(head, qubits[0]))
        elif head == "cx":
            ops.append(g.cx(*qubits))
        elif head == "cz":
            ops.append(g.cz(*qubits))
        elif head == "cp":
            ops.append(g.cphase(_float(args[2], lineno), *qubits))
        elif head == "swap":
            ops.extend(swap(*qubits))
        elif head == "u":
            v = [_float(a, lineno) for a in args[1:]]
            try:
                u = Unitary2x2.from_entries(complex(v[0], v[1]), complex(v[2], v[3]),
                                            complex(v[4], v[5]), complex(v[6], v[7]))
            except ValueError as exc:
                raise CircuitParseError(lineno, str(exc)) from None
            ops.append(g.general(u, qubits[0]))
    if n_qubits is None:
        raise CircuitParseError(0, "missing 'qubits <n>' header")
    return CircuitProgram(n_qubits, ops, name)


def format_circuit(program: CircuitProgram) -> str:
    """Inverse of :func:`parse_circuit`; floats are written with ``repr`` so they round-trip."""
    lines = [f"qubits {program.n_qubits}"]
    for gate in program.gates:
        if gate.kind is GateKind.DIAG_PHASE_FLIP:
            lines.append(f"flip {gate.flip_index}")
        elif gate.kind is GateKind.SINGLE and gate.label in _SINGLE and gate.unitary == g.NAMED[gate.label]:
            lines.append(f"{gate.label} {gate.target}")
        elif gate.kind is GateKind.SINGLE:
            m = gate.unitary.matrix.reshape(-1)
            nums = " ".join(f"{repr(float(z.real))} {repr(float(z.imag))}" for z in m)
            lines.append(f"u {gate.target} {nums}")
        elif gate.label == "cx" and gate.unitary == g.X:
            lines.append(f"cx {gate.control} {gate.target}")
        elif gate.label == "cz" and gate.unitary == g.Z:
            lines.append(f"cz {gate.control} {gate.target}")
        elif gate.label == "cp" and gate.params:
            lines.append(f"cp {gate.control} {gate.target} {repr(gate.params[0])}")
        else:
            raise ValueError(f"gate {gate.label!r} has no text form")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# builders


def build_qft(n_qubits: int) -> CircuitProgram:
    """Quantum Fourier transform with output ``F[x, y] = exp(2 pi i x y / 2**n) / sqrt(2**n)``.

    The bit-reversal swap network is emitted first; each qubit ``j`` then gets
    ``H(j)`` followed by ``CP(pi / 2**(k - j))`` controlled by every higher
    qubit ``k``.  Same unitary as the swaps-last form, but a basis input stays
    in natural index order throughout, so intermediate states are smooth.
    """
    if n_qubits < 1:
        raise ValueError(f"QFT needs at least one qubit, got {n_qubits}")
    ops: list[GateOp] = []
    for i in range(n_qubits // 2):
        ops.extend(swap(i, n_qubits - 1 - i))
    for j in range(n_qubits):
        ops.append(g.single("h", j))
        for k in range(j + 1, n_qubits):
            ops.append(g.cphase(math.pi / 2 ** (k - j), k, j))
    return CircuitProgram(n_qubits, ops, f"qft{n_qubits}")


def default_grover_iterations(n_qubits: int) -> int:
    return int(math.floor(math.pi / 4 * math.sqrt(2 ** n_qubits) + 0.5))


def hadamard_order(n_qubits: int) -> list[int]:
    """Qubit order for an H layer: upper half descending, then lower half ascending.

    Keeps both the concentrating and the spreading component of a Grover state
    in at most ``2**(n/2)`` contiguous runs at every intermediate step.
    """
    h = n_qubits // 2
    return list(range(n_qubits - 1, h - 1, -1)) + list(range(h))


def build_grover(n_qubits: int, marked: int, iterations: int | None = None) -> CircuitProgram:
    """Grover search for one marked basis state.

    Oracle and diffusion use the phase-flip primitive; the diffusion
    ``H^n . flip(0) . H^n`` is the textbook operator times -1 (global phase).
    """
    if n_qubits < 1:
        raise ValueError(f"Grover needs at least one qubit, got {n_qubits}")
    if not 0 <= marked < 1 << n_qubits:
        raise ValueError(f"marked index {marked} out of range for {n_qubits} qubits")
    if iterations is None:
        iterations = default_grover_iterations(n_qubits)
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    layer = [g.single("h", q) for q in hadamard_order(n_qubits)]
    ops = list(layer)
    for _ in range(iterations):
        ops.append(g.phase_flip(marked))
        ops.extend(layer)
        ops.append(g.phase_flip(0))
        ops.extend(layer)
    return CircuitProgram(n_qubits, ops, f"grover{n_qubits}")


def build_random(n_qubits: int, depth: int, seed: int | None = None) -> CircuitProgram:
    """Random circuit over the full gate alphabet, reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    ops: list[GateOp] = []
    for _ in range(depth):
        kind = rng.integers(4) if n_qubits > 1 else rng.integers(2)
        if kind == 0:
            ops.append(g.single(str(rng.choice(sorted(_SINGLE))), int(rng.integers(n_qubits))))
        elif kind == 1:
            ops.append(g.general(random_unitary(rng), int(rng.integers(n_qubits))))
        elif kind == 2:
            c, t = (int(q) for q in rng.choice(n_qubits, 2, replace=False))
            ops.append(g.cphase(float(rng.uniform(-np.pi, np.pi)), c, t))
        else:
            c, t = (int(q) for q in rng.choice(n_qubits, 2, replace=False))
            ops.append(g.controlled(random_unitary(rng), c, t))
    return CircuitProgram(n_qubits, ops, f"random{n_qubits}x{depth}")


def random_unitary(rng: np.random.Generator) -> Unitary2x2:
    z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return Unitary2x2(q)
