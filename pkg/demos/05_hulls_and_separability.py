"""Grid hulls relative to a finite family, and the two separability modes."""

# %%
import numpy as np

from gcverify import fields as fc
from gcverify import stein as st
from gcverify.expr import parse

c01 = fc.ModelChart(0, 1)
grid = st.Grid(np.array([[-2.0, 2.0], [-2.0, 2.0]]), 0.05)

# %% [markdown]
# The hull of the unit circle under z, ..., z^4 fills the closed disc.

# %%
circle = st.SampledCompact(st.circle_samples(200), "circle")
mono = st.monomial_family(c01, 4)
h = st.o_hull(circle, mono, grid)
print(f"{h.size} grid points, Hausdorff distance to the unit disc "
      f"{st.hausdorff_to_disc(h.compact.points):.3f}")
print(h.note)
print("idempotent:", st.hull_idempotence_check(circle, mono, grid).idempotent)

# %% [markdown]
# Hulls are relative to the family.  For the circle of radius 1/2 about 1/2,
# the function z alone only sees the disc |z| <= 1; adding z - 1/2 cuts the
# hull down to the small disc.

# %%
shifted = st.SampledCompact(st.circle_samples(200, 0.5, center=(0.5, 0.0)))
for names in (["z"], ["z", "z - 1/2"]):
    fam = st.FunctionFamily.of(gh=[(n, parse(n.replace("1/2", "0.5"), c01)) for n in names])
    h = st.o_hull(shifted, fam, grid)
    d = st.hausdorff_to_disc(h.compact.points, 0.5, (0.5, 0.0))
    print(f"family {names}: {h.size} grid points, distance to the small disc {d:.3f}")

# %% [markdown]
# On R^2 x C, functions of z alone cannot tell two points on one leaf apart;
# admitting the coordinate Poisson map does.

# %%
c11 = fc.ModelChart(1, 1)
fam = st.coordinate_family(c11)
pair = (np.array([0.0, 0.0, 0.2, 0.3]), np.array([1.0, 0.0, 0.2, 0.3]))
for mode in (st.GH_ONLY, st.WITH_POISSON):
    v, = st.separability_probe([pair], fam, mode)
    print(f"{mode:22s} separated: {v.separated!s:5s} witness: {v.witness}")
