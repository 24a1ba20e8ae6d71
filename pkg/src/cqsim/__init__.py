"""Full state-vector quantum circuit simulation on compressed strides."""

from .aalc import (
    DEFAULT_LADDER,
    LOSSLESS_ONLY,
    CompressedState,
    ErrorBoundLadder,
    RunMetrics,
    StrideCompressReport,
    apply_gate,
    checkpoint_load,
    checkpoint_save,
    compress_stride_adaptive,
    init_basis_state,
    run_program,
)
from .circuits import CircuitProgram, build_grover, build_qft, build_random, format_circuit, parse_circuit
from .codec import CompressedBlock, compress_lossless, compress_lossy, decompress
from .gates import GateKind, GateOp, Unitary2x2
from .metrics import GateRecord, RunSummary, emit_csv, emit_summary_json, summarize
from .reference import fidelity, run_dense
from .state import StateGeometry, StrideBuffer, indexing_convention, qubit_gain, raw_bytes

__version__ = "0.1.0"
