# ---
# jupyter:
#   jupytext:
#     formats: py:percent
# ---

# %% [markdown]
# # Absorbing boundary at position -1
#
# Quantum and classical survival agree through four steps and split at the
# fifth. The quantum walker keeps a finite escape probability, approaching
# 1 - 2/pi; the classical walker is eventually absorbed.

# %%
import math

from qwalk import escape_probability, evolve, sample_trajectories, uniform_schedule

qu = evolve(uniform_schedule(6, absorbers={-1}))
cl = evolve(uniform_schedule(6, q=1.0, absorbers={-1}), mode="density")
for n in range(7):
    print(n, round(qu.remaining[n], 6), round(cl.remaining[n], 6))

# %%
for steps in (10, 100, 1000):
    est = escape_probability(uniform_schedule(1), {-1}, steps)
    print(steps, est.remaining_mass, "last increment", est.last_increment)
print("1 - 2/pi =", 1 - 2 / math.pi)

# %% [markdown]
# Partial dephasing, estimated two ways.

# %%
sched = uniform_schedule(8, q=0.3, absorbers={-1})
exact = evolve(sched, mode="density").remaining[-1]
ens = sample_trajectories(sched, 50_000, seed=2)
print("density:", exact, " trajectories:", 1 - ens.absorbed_fraction[-1])
