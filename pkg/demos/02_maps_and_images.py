"""GC maps, induced structures on subspaces and the type jump of an embedding."""

# %%
import numpy as np

from gcverify import linear as gl

# %% [markdown]
# Projections of the product model onto its factors respect both the
# complex and the Poisson data; complex conjugation and an axis scaling do not.

# %%
Y = gl.standard_model(1, 1).eigenbundle()
S = gl.symplectic_model(1).eigenbundle()
C = gl.complex_model(1).eigenbundle()
for label, f, src, tgt in [("pr1", np.eye(4)[:2], Y, S), ("pr2", np.eye(4)[2:], Y, C),
                           ("conjugation", np.diag([1.0, -1.0]), C, C),
                           ("scaling", np.diag([1.0, 2.0]), S, S)]:
    rep = gl.is_gc_map(f, src, tgt)
    print(f"{label:12s} GC map: {rep.is_gc_map!s:5s}  "
          f"E-residual {rep.e_condition.residual:.3g}  Poisson residual {rep.poisson_condition.residual:.3g}")

# %% [markdown]
# Embed R^2 x C into R^2 x C^2 with a symplectic block, a coupling block and
# an injective complex-linear block.  The image is a GC subspace and the type
# jumps by half the codimension.

# %%
rng = np.random.default_rng(3)
f = np.zeros((6, 4))
f[:2, :2] = np.eye(2)
f[:2, 2:] = rng.standard_normal((2, 2))
f[2:4, 2:] = [[0.5, -1.2], [1.2, 0.5]]   # multiplication by 0.5 + 1.2i
f[4:, 2:] = [[2.0, 0.0], [0.0, 2.0]]
src, tgt = gl.standard_model(1, 1), gl.standard_model(1, 2)
img = gl.image_structure(f, src.eigenbundle(), tgt.eigenbundle())
print("GC map:", img.gc_map.is_gc_map, " GC subspace:", img.induced.is_gc_subspace)
print("type source:", img.type_source, " image:", img.type_image, " target:", gl.type_of(tgt).k)
print("jump:", img.jump, " formula holds:", img.jump_formula_holds)
