# ---
# jupyter:
#   jupytext:
#     formats: py:percent
# ---

# %% [markdown]
# # Apparatus model
#
# Visibility of the two-displacer alignment interferometer as a function of
# dephasing, the Gaussian misalignment model, and scaling of component count
# and transmission.

# %%
import numpy as np

from qwalk import (
    CalibrationModel,
    element_count,
    misalignment_to_visibility,
    q_from_visibility,
    survival_probability,
    visibility_from_q,
)

for q in (0.0, 0.25, 0.5, 0.75, 1.0):
    print(f"q={q:.2f}  V={visibility_from_q(q):.4f}")

# %%
model = CalibrationModel()
for angle in np.linspace(0, 10.5, 8):
    v = misalignment_to_visibility(angle, model)
    print(f"{angle:5.2f} deg  V={v:.4f}  q={q_from_visibility(v):.4f}")

# %%
for n in (1, 3, 6, 20, 100):
    print(n, element_count(n), round(survival_probability(n, 0.01), 4))
