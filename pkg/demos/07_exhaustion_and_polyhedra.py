"""Building a strictly psh exhaustion from disc levels, and covering a shell by a polyhedron."""

# %%
import numpy as np

from gcverify import fields as fc
from gcverify import stein as st

c01 = fc.ModelChart(0, 1)

# %% [markdown]
# Level j asks for a sum of powers below 2^-j on the disc K_j and above j on
# the ring outside U_j.  The search raises powers until both hold.

# %%
levels, r, u = st.disc_exhaustion_levels(c01, j_max=3)
res = st.exhaustion_build(levels, c01)
print("powers:", res.powers)
print("inner sums:", np.round(res.inner_sums, 4), " outer sums:", np.round(res.outer_sums, 2))
print("strictly psh on the samples:", res.psh.is_strict,
      f"(min Levi eigenvalue {res.psh.min_eig.min():.3f})")

# %% [markdown]
# A polyhedron containing the disc of radius 1/2 whose closure misses the
# circle of radius 1.2.

# %%
K = st.SampledCompact(st.disc_samples(0.5, 0.05))
g = st.Grid(np.array([[-1.3, 1.3], [-1.3, 1.3]]), 0.05)
pts = g.points
ring = pts[g.shell(np.hypot(pts[:, 0], pts[:, 1]) <= 1.2)]
out = st.polyhedron_search(K, ring, st.monomial_family(c01, 4))
print("found:", out.success, " order:", out.spec.order,
      " functions:", [m.name for m in out.spec.functions], " scales:", np.round(out.spec.scales, 3))
print("all of K inside:", bool(np.all(st.polyhedron_membership(out.spec, K.points))))
