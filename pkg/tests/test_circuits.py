import math

import numpy as np
import pytest

from cqsim import gates as g
from cqsim.circuits import (
    CircuitParseError,
    CircuitProgram,
    build_grover,
    build_qft,
    build_random,
    default_grover_iterations,
    format_circuit,
    hadamard_order,
    parse_circuit,
)
from cqsim.gates import GateKind
from cqsim.reference import apply_dense, run_dense

from conftest import full_matrix

SAMPLE = """\
# bell pair then some extras
qubits 3
h 0
cx 0 1    # entangle
cp 1 2 0.7853981633974483
swap 0 2
flip 5
u 1 0 0 1 0 1 0 0 0
"""


def test_parse_sample():
    prog = parse_circuit(SAMPLE, "sample")
    assert prog.n_qubits == 3
    labels = [op.label for op in prog.gates]
    assert labels == ["h", "cx", "cp", "cx", "cx", "cx", "flip", "u"]
    assert prog.gates[2].params == (math.pi / 4,)
    assert prog.gates[6].kind is GateKind.DIAG_PHASE_FLIP and prog.gates[6].flip_index == 5
    assert prog.gates[7].unitary == g.X
    assert prog.counts()["cx"] == 4


@pytest.mark.parametrize("text, line, fragment", [
    ("h 0\n", 1, "first instruction"),
    ("qubits 2\nh 2\n", 2, "out of range"),
    ("qubits 2\ncx 1 1\n", 2, "control equals target"),
    ("qubits 2\n\n# c\nfoo 1\n", 4, "unknown instruction"),
    ("qubits 2\ncp 0 1\n", 2, "takes 3 arguments"),
    ("qubits 2\ncp 0 1 abc\n", 2, "expected a number"),
    ("qubits 2\nflip 4\n", 2, "out of range"),
    ("qubits 2\nh -1\n", 2, "non-negative"),
    ("qubits 2\nqubits 3\n", 2, "duplicate"),
    ("qubits 1\nu 0 1 0 1 0 0 0 1 0\n", 2, "unitary"),
    ("qubits 0\n", 1, "at least 1"),
    ("# nothing\n", 0, "missing"),
])
def test_parse_errors(text, line, fragment):
    with pytest.raises(CircuitParseError) as err:
        parse_circuit(text)
    assert err.value.line == line
    assert fragment in str(err.value)


def test_format_round_trip():
    prog = parse_circuit(SAMPLE)
    again = parse_circuit(format_circuit(prog))
    assert again.gates == prog.gates
    qft = build_qft(5)
    assert parse_circuit(format_circuit(qft)).gates == qft.gates


def test_format_refuses_generic_controlled():
    prog = build_random(3, 60, seed=1)
    assert any(op.label == "cu" for op in prog.gates)
    with pytest.raises(ValueError):
        format_circuit(prog)


def test_program_validates_gates():
    with pytest.raises(ValueError, match="gate 0"):
        CircuitProgram(2, [g.single("h", 2)])


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_qft_is_the_dft(n):
    dim = 1 << n
    prog = build_qft(n)
    u = np.eye(dim, dtype=complex)
    for op in prog.gates:
        u = full_matrix(op, n) @ u
    x, y = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    dft = np.exp(2j * np.pi * x * y / dim) / math.sqrt(dim)
    assert np.max(np.abs(u - dft)) < 1e-12


def test_qft_gate_count():
    prog = build_qft(16)
    assert len(prog) == 3 * 8 + 16 + 16 * 15 // 2
    assert prog.counts()["cp"] == 120


def test_qft_of_one_is_phase_ramp():
    n = 6
    psi = run_dense(build_qft(n), 1)
    expect = np.exp(2j * np.pi * np.arange(64) / 64) / 8
    assert np.max(np.abs(psi - expect)) < 1e-13


@pytest.mark.parametrize("n, k", [(2, 2), (3, 2), (4, 3), (10, 25), (16, 201), (30, 25736)])
def test_default_grover_iterations(n, k):
    assert default_grover_iterations(n) == k


def test_hadamard_order_covers_all_qubits():
    assert hadamard_order(16) == list(range(15, 7, -1)) + list(range(8))
    for n in range(1, 9):
        assert sorted(hadamard_order(n)) == list(range(n))


def test_grover_one_iteration_three_qubits():
    psi = run_dense(build_grover(3, 5, 1))
    mags = np.abs(psi) * math.sqrt(8)
    assert mags[5] == pytest.approx(2.5, abs=1e-12)
    assert np.allclose(np.delete(mags, 5), 0.5, atol=1e-12)


def test_grover_two_iterations_three_qubits():
    psi = run_dense(build_grover(3, 5, 2))
    assert abs(psi[5]) ** 2 == pytest.approx(0.9453125, abs=1e-12)


def test_grover_sixteen_finds_marked():
    prog = build_grover(16, 0)
    assert len(prog) == 16 + 201 * 34
    psi = run_dense(build_grover(12, 1234))
    assert abs(psi[1234]) ** 2 > 0.999


def test_grover_rejects():
    with pytest.raises(ValueError):
        build_grover(3, 8)
    with pytest.raises(ValueError):
        build_grover(3, 1, -1)


def test_random_is_seeded():
    a = build_random(5, 50, seed=7)
    b = build_random(5, 50, seed=7)
    assert a.gates == b.gates
    assert build_random(5, 50, seed=8).gates != a.gates


def test_grover_few_distinct_amplitudes_at_layer_boundaries():
    n = 8
    prog = build_grover(n, 77, 4)
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1

    # each iteration is flip + layer + flip + layer, so layers end every n + 1 gates
    boundaries = {n - 1 + k * (n + 1) for k in range(2 * 4 + 1)}
    checked = 0
    for i, op in enumerate(prog.gates):
        apply_dense(psi, op, n)
        if i in boundaries:
            assert np.unique(np.round(psi, 9)).size <= 3, i
            checked += 1
    assert checked == 9
