"""State-vector geometry, indexing convention and memory arithmetic.

Qubit ``k`` is bit ``k`` of the amplitude index (qubit 0 is the least
significant bit).  The vector of ``2**n`` amplitudes is cut into
``2**(n - s)`` contiguous strides of ``2**s`` amplitudes each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

AMPLITUDE_BYTES = 16
MAX_QUBITS = 62
DEFAULT_MAX_STRIDE_BITS = 20
# |re| and |im| below this are stored as exact zeros
ZERO_FLUSH = 1e-300


def indexing_convention(qubit: int, amp_index: int, n_qubits: int | None = None) -> int:
    """Value of ``qubit`` in the basis state ``amp_index`` (LSB = qubit 0)."""
    if qubit < 0 or amp_index < 0:
        raise ValueError("qubit and amplitude index must be non-negative")
    if n_qubits is not None and (qubit >= n_qubits or amp_index >= 1 << n_qubits):
        raise ValueError(f"qubit {qubit} / index {amp_index} out of range for {n_qubits} qubits")
    return (amp_index >> qubit) & 1


def raw_bytes(n_qubits: int) -> int:
    """Uncompressed state-vector size: ``2**(n + 4)`` bytes."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    return 1 << (n_qubits + 4)


def qubit_gain(min_ratio: float) -> int:
    """Extra qubits that fit in the same memory at the given minimum compression ratio."""
    if not min_ratio >= 1:
        raise ValueError(f"compression ratio must be >= 1, got {min_ratio}")
    if math.isinf(min_ratio):
        raise ValueError("compression ratio must be finite")
    gain = math.floor(math.log2(min_ratio))
    # log2 can round up across an exact power of two boundary
    while gain > 0 and 2.0 ** gain > min_ratio:
        gain -= 1
    return gain


def default_stride_bits(n_qubits: int) -> int:
    return min(n_qubits, DEFAULT_MAX_STRIDE_BITS)


@dataclass(frozen=True)
class StateGeometry:
    n_qubits: int
    stride_bits: int

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        if not 0 <= self.stride_bits <= self.n_qubits:
            raise ValueError(f"stride_bits must be in [0, {self.n_qubits}], got {self.stride_bits}")

    @classmethod
    def for_qubits(cls, n_qubits: int, stride_bits: int | None = None) -> StateGeometry:
        if stride_bits is None:
            stride_bits = default_stride_bits(n_qubits)
        return cls(n_qubits, stride_bits)

    @property
    def n_amplitudes(self) -> int:
        return 1 << self.n_qubits

    @property
    def stride_len(self) -> int:
        return 1 << self.stride_bits

    @property
    def n_strides(self) -> int:
        return 1 << (self.n_qubits - self.stride_bits)

    @property
    def raw_bytes(self) -> int:
        return raw_bytes(self.n_qubits)

    def locate(self, amp_index: int) -> tuple[int, int]:
        """(stride index, offset within stride) of a global amplitude index."""
        if not 0 <= amp_index < self.n_amplitudes:
            raise ValueError(f"amplitude index {amp_index} out of range")
        return amp_index >> self.stride_bits, amp_index & (self.stride_len - 1)


@dataclass
class StrideBuffer:
    """Decompressed working copy of one stride."""

    stride_index: int
    amplitudes: np.ndarray

    def global_indices(self) -> np.ndarray:
        n = self.amplitudes.size
        return self.stride_index * n + np.arange(n)


def split_strides(amplitudes: np.ndarray, geometry: StateGeometry) -> list[np.ndarray]:
    """Copy a dense vector into per-stride arrays."""
    amps = np.asarray(amplitudes, dtype=np.complex128)
    if amps.size != geometry.n_amplitudes:
        raise ValueError(f"expected {geometry.n_amplitudes} amplitudes, got {amps.size}")
    return [s.copy() for s in amps.reshape(geometry.n_strides, geometry.stride_len)]


def join_strides(strides) -> np.ndarray:
    return np.concatenate(list(strides))


def flush_tiny(amps: np.ndarray) -> np.ndarray:
    """Replace components below ``ZERO_FLUSH`` in magnitude by +0.0 (in place)."""
    re = amps.real
    im = amps.imag
    re[np.abs(re) < ZERO_FLUSH] = 0.0
    im[np.abs(im) < ZERO_FLUSH] = 0.0
    return amps
