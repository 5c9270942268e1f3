"""Courant brackets and the Nijenhuis residual of structure fields on a chart box."""

# %%
import numpy as np

from gcverify import fields as fc
from gcverify import linear as gl

box = np.array([[-1.0, 1.0]] * 4)
rng = np.random.default_rng(1)
pts = rng.uniform(-0.9, 0.9, (20, 4))

# %% [markdown]
# The bracket of the vector field d/dx with the 1-form x dy is the Lie
# derivative, dy.

# %%
s1 = fc.Section(lambda x: np.array([1.0, 0.0]), lambda x: np.zeros(2))
s2 = fc.Section(lambda x: np.zeros(2), lambda x: np.array([0.0, x[0]]))
print("[d/dx, x dy] =", fc.courant_bracket(s1, s2, np.array([0.3, 0.2])))

# %% [markdown]
# Constant-coefficient fields are integrable; so is a B-transform by a closed
# 2-form.  The rotating almost complex structure is not.

# %%
const = fc.constant_field(gl.standard_model(1, 1), box)


def closed_b(x):
    B = np.zeros((4, 4))
    B[0, 1], B[1, 0] = x[2], -x[2]
    B[2, 1], B[1, 2] = x[0], -x[0]
    return B


sheared = fc.b_transformed_field(const, closed_b)
rot = fc.rotating_field(box)
for label, field in [("constant", const), ("closed B", sheared), ("rotating", rot)]:
    r = np.array([fc.nijenhuis_residual(field, x) for x in pts])
    print(f"{label:9s} max residual {r.max():.2e}   min residual {r.min():.2e}")
