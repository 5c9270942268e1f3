"""Rank tests for GH regularity and the random reduction of a regular tuple."""

# %%
import numpy as np

from gcverify import fields as fc
from gcverify import stein as st
from gcverify.expr import parse

c11 = fc.ModelChart(1, 1)
pr1 = lambda x: x[:2]

# %%
for text, z in [("z", 0.3), ("z**2", 0.0), ("z**2", 1.0)]:
    rep = st.regularity_probe(c11.point([0.1, 0.2], [z]), [pr1], [parse(text, c11)], c11)
    print(f"(pr1; {text}) at z = {z}: real rank {rep.real.rank}/4, "
          f"complex rank {rep.complex.rank}/1, regular: {rep.regular}")

# %% [markdown]
# Three functions on C, regular along a circle, reduce to two by subtracting a
# small random multiple of the last one.

# %%
c01 = fc.ModelChart(0, 1)
K = st.SampledCompact(st.circle_samples(20))
gs = [parse(t, c01) for t in ("z", "z**2", "z**3")]
rep = st.reduce_regular_tuple([], gs, K, c01, seed=42, trials=5)
print("success:", rep.success, " trials:", rep.trials_used, " c =", np.round(rep.c, 4))
print("reduced tuple regular on K:",
      all(st.regularity_probe(x, [], rep.functions, c01).regular for x in K.points))
