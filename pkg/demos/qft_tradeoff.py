# %% [markdown]
# # QFT: compression ratio against fidelity
#
# The QFT of a basis state is a dense phase ramp, the hard case for any
# compressor.  Sweep the ratio threshold and watch the fidelity.

# %%
import time

import numpy as np

from cqsim import DEFAULT_LADDER, LOSSLESS_ONLY, StateGeometry, build_qft, fidelity, run_dense, run_program
from cqsim.aalc import ErrorBoundLadder

n = 14
prog = build_qft(n)
geo = StateGeometry(n, 10)  # 16 strides
print(prog.name, len(prog), "gates,", geo.n_strides, "strides of", geo.stride_len)

t0 = time.perf_counter()
exact = run_dense(prog, 1)
dense_time = time.perf_counter() - t0

# %% [markdown]
# Threshold sweep with the default ladder.

# %%
print(f"{'theta':>6} {'min ratio':>10} {'gain':>5} {'violations':>10} {'fidelity':>12} {'overhead':>9}")
for theta in (1, 4, 8, 16, 32):
    state, metrics = run_program(prog, DEFAULT_LADDER, theta, geo, initial=1)
    s = metrics.summary(fidelity(state.to_dense(), exact), dense_time)
    print(f"{theta:>6} {s.overall_min_ratio:>10.2f} {s.qubit_gain:>5} {s.threshold_violations:>10} "
          f"{s.fidelity:>12.8f} {s.overhead_factor:>9.1f}")

# %% [markdown]
# Without lossy levels the ratio decays as the circuit fills the state: the
# final gates leave nothing to exploit.

# %%
state, metrics = run_program(prog, LOSSLESS_ONLY, 1, geo, initial=1)
trace = [r.min_ratio for r in metrics.records]
for i in np.linspace(0, len(trace) - 1, 8).astype(int):
    print(f"gate {i:>3} ({metrics.records[i].gate_label:>4})  min ratio {trace[i]:10.3f}")

# %% [markdown]
# A ladder whose only lossy step is far above the amplitude scale quantizes
# the state away entirely.

# %%
cliff = ErrorBoundLadder((0.0, 0.1))
state, metrics = run_program(prog, cliff, 16, geo, initial=1)
print("collapsed at gate", metrics.collapsed_at, "fidelity", fidelity(state.to_dense(), exact))
