# ---
# jupyter:
#   jupytext:
#     formats: py:percent
# ---

# %% [markdown]
# # Quantum-to-classical transition of a 5-step walk
#
# Sweep the per-step dephasing probability, then recover it from a noisy
# "measured" distribution with the least-squares fit.

# %%
import numpy as np

from qwalk import fit_decoherence, l1_distance, uniform_schedule
from qwalk.analysis import model_distribution
from qwalk.lattice import Distribution

sched = uniform_schedule(5)
for q in np.linspace(0, 1, 6):
    d = model_distribution(sched, q).nonzero().as_dict()
    print(f"q={q:.1f}", {j: round(p, 3) for j, p in d.items()})

# %% [markdown]
# Simulated photon counts at q = 0.35, 5000 detections.

# %%
rng = np.random.default_rng(5)
truth = model_distribution(sched, 0.35).nonzero()
counts = rng.multinomial(5000, truth.probabilities)
measured = Distribution(truth.support, counts / counts.sum())
fit = fit_decoherence(measured, sched)
print(fit)
print("L1 distance to fitted model:", l1_distance(measured, model_distribution(sched, fit.q_hat).nonzero()))
