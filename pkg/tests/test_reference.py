import numpy as np
import pytest

from cqsim import gates as g
from cqsim.circuits import CircuitProgram, build_random
from cqsim.reference import SizeGuardError, basis_state, fidelity, run_dense

from conftest import full_matrix, random_state


def test_basis_state():
    psi = basis_state(3, 6)
    assert psi[6] == 1 and np.count_nonzero(psi) == 1
    with pytest.raises(ValueError):
        basis_state(3, 8)


def test_run_dense_against_matrix_product():
    n = 4
    prog = build_random(n, 60, seed=5)
    u = np.eye(1 << n, dtype=complex)
    for op in prog.gates:
        u = full_matrix(op, n) @ u
    assert np.max(np.abs(run_dense(prog, 3) - u[:, 3])) < 1e-12


def test_run_dense_from_vector(rng):
    v = random_state(3, rng)
    prog = CircuitProgram(3, [g.single("x", 0)])
    out = run_dense(prog, v)
    assert np.array_equal(out[::2], v[1::2])
    assert not np.shares_memory(out, v)
    with pytest.raises(ValueError):
        run_dense(prog, v[:4])


def test_size_guard():
    with pytest.raises(SizeGuardError):
        run_dense(CircuitProgram(27, []))
    with pytest.raises(SizeGuardError):
        run_dense(CircuitProgram(5, []), max_qubits=4)


def test_fidelity_properties(rng):
    a = random_state(5, rng)
    b = random_state(5, rng)
    assert fidelity(a, a) == pytest.approx(1.0, abs=1e-15)
    assert fidelity(a, np.exp(0.7j) * a) == pytest.approx(1.0, abs=1e-15)
    assert fidelity(a, 3 * a) == pytest.approx(1.0, abs=1e-15)
    assert fidelity(a, b) == pytest.approx(fidelity(b, a))
    assert 0 <= fidelity(a, b) < 1
    assert fidelity(np.eye(4)[0], np.eye(4)[1]) == 0


def test_fidelity_zero_vector_and_shape():
    assert fidelity(np.zeros(4), np.ones(4)) == 0.0
    with pytest.raises(ValueError):
        fidelity(np.ones(4), np.ones(8))
