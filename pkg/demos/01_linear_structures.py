"""Linear generalized complex structures: build, validate, type, B-transforms, presentations."""

# %%
import numpy as np

from gcverify import linear as gl
from gcverify import subspace as ss

# %% [markdown]
# The model R^{2M} x C^N couples a symplectic block with a complex block.
# Its structure is an 8 x 8 real matrix on V + V* for d = 4.

# %%
Y = gl.standard_model(1, 1)
cert = gl.validate(Y.J)
print("J^2 + I residual:", cert.square_residual)
print("orthogonality residual:", cert.orthogonality_residual)

# %%
L = Y.eigenbundle()
print(gl.check_maximal_isotropic(L))
print("type:", gl.type_of(Y).k, "(complex dimension of the complex factor)")

# %% [markdown]
# A B-field shears the eigenbundle but leaves its projection to V alone,
# so the type cannot change.

# %%
rng = np.random.default_rng(0)
A = rng.standard_normal((4, 4))
B = A - A.T
LB = gl.b_transform(L, B)
same, angle = ss.equal_subspaces(gl.projection_E(LB), gl.projection_E(L))
print("projection unchanged:", same, f"(largest principal angle {angle:.1e})")
print("type after B:", gl.type_of(LB).k)

# %% [markdown]
# Every maximal isotropic subspace is determined by its projection E and a
# 2-form on E.  Extract the pair and rebuild.

# %%
pr = gl.extract_presentation(LB)
print("dim E:", pr.E.dim, " real part dim:", pr.delta.shape[1])
ok, angle = ss.equal_subspaces(pr.rebuild(), LB, 1e-8)
print("round trip recovers L_B:", ok, f"(angle {angle:.1e})")
print("Poisson form on the real part:\n", np.round(pr.omega_form(), 12) + 0.0)
