# ---
# jupyter:
#   jupytext:
#     formats: py:percent
# ---

# %% [markdown]
# # Ballistic vs. diffusive spreading
#
# A Hadamard walk started in left-circular polarization spreads linearly in
# the number of steps; the fully dephased walk reproduces the binomial random
# walk and spreads as the square root.

# %%
import matplotlib.pyplot as plt
import numpy as np

from qwalk import evolve, spread_stats, spreading_exponent, uniform_schedule

N = 20
quantum = evolve(uniform_schedule(N))
classical = evolve(uniform_schedule(N, q=1.0), mode="density")

# %%
for n in (1, 3, 6):
    print(n, {j: round(p, 4) for j, p in quantum.distributions[n].as_dict().items()})

# %%
sq = [spread_stats(quantum.distributions[n], n) for n in range(1, N + 1)]
sc = [spread_stats(classical.distributions[n], n) for n in range(1, N + 1)]
print("quantum exponent  ", spreading_exponent(sq[1:]))
print("classical exponent", spreading_exponent(sc[1:]))

# %%
steps = np.arange(1, N + 1)
fig, ax = plt.subplots(figsize=(5, 3.5))
ax.loglog(steps, [s.stddev for s in sq], "ko", label="quantum")
ax.loglog(steps, [s.stddev for s in sc], "r^", label="dephased (q=1)")
ax.set_xlabel("steps")
ax.set_ylabel("standard deviation")
ax.legend()
fig.tight_layout()
fig.savefig("spreading.png", dpi=120)
