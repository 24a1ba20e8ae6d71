import numpy as np
import pytest

from cqsim.gates import GateKind


def full_matrix(gate, n):
    """2^n x 2^n matrix of a gate, built from Kronecker products (LSB = qubit 0)."""
    dim = 1 << n
    if gate.kind is GateKind.DIAG_PHASE_FLIP:
        m = np.eye(dim, dtype=complex)
        m[gate.flip_index, gate.flip_index] = -1
        return m

    def embed(op, q):
        out = np.array([[1.0 + 0j]])
        for k in reversed(range(n)):
            out = np.kron(out, op if k == q else np.eye(2))
        return out

    u = embed(gate.unitary.matrix, gate.target)
    if gate.kind is GateKind.SINGLE:
        return u
    p1 = embed(np.diag([0, 1]).astype(complex), gate.control)
    return (np.eye(dim) - p1) + p1 @ u


def random_state(n, rng):
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
