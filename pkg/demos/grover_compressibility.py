# %% [markdown]
# # Grover search stays compressible
#
# The Grover state has at most a few distinct amplitude values, so the stride
# codec keeps it tiny for the whole search.

# %%
import numpy as np

from cqsim import DEFAULT_LADDER, StateGeometry, build_grover, fidelity, run_dense, run_program

n, marked = 14, 0
prog = build_grover(n, marked)
print(prog.name, len(prog), "gates")

ratios = []
state, metrics = run_program(prog, DEFAULT_LADDER, 32, StateGeometry.for_qubits(n),
                             on_gate=lambda i, st, rec: ratios.append(rec.min_ratio))

# %%
s = metrics.summary(fidelity(state.to_dense(), run_dense(prog)))
print("min ratio", round(s.overall_min_ratio, 2), "qubit gain", s.qubit_gain, "fidelity", s.fidelity)
print("violations", s.threshold_violations)

probs = np.abs(state.to_dense()) ** 2
print("P(marked) =", probs[marked])

# %% [markdown]
# Ratio over the run: it dips inside each Hadamard layer and recovers at the
# layer boundaries.

# %%
r = np.array(ratios)
per_iter = r[n:].reshape(-1, 2 * n + 2)
print("worst ratio per iteration (first 5):", np.round(per_iter.min(axis=1)[:5], 1))
print("best ratio per iteration  (first 5):", np.round(per_iter.max(axis=1)[:5], 1))

# %% [markdown]
# Memory: raw state versus the largest compressed footprint seen.

# %%
raw = state.geometry.raw_bytes
print(f"raw {raw / 2**20:.2f} MiB, compressed now {state.nbytes / 1024:.1f} KiB")
