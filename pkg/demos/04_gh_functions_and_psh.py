"""Expressions, GH functions, Poisson maps and the leafwise Levi form."""

# %%
import numpy as np

from gcverify import fields as fc
from gcverify.expr import expression_eval, parse

chart = fc.ModelChart(1, 1)   # coordinates (p1, p2, x, y), z = x + iy
pts = np.random.default_rng(2).uniform(-0.9, 0.9, (10, 4))

# %% [markdown]
# Expressions carry exact Wirtinger derivatives when they are polynomial.

# %%
e = parse("z**3 - 2*z + conj(z)*p1", chart)
print(expression_eval(e, chart.point([0.5, 0.0], [1 + 1j])))

# %% [markdown]
# A GH function is holomorphic in z and constant along the symplectic leaves.

# %%
for text in ["z**3 - 2*z", "conj(z)", "z*p2", "z*conj(z)"]:
    rep = fc.gh_check_model(parse(text, chart), chart, pts)
    print(f"{text:12s} GH: {rep.is_gh!s:5s}  d/dzbar {rep.max_zbar:.2e}  leaf {rep.max_leaf:.2e}  "
          f"d_L agrees: {rep.agrees}")

# %%
print("pr1 Poisson residual:", fc.poisson_map_check(lambda x: x[:2], chart, pts).residual)
print("(p1, 2 p2) Poisson residual:",
      fc.poisson_map_check(lambda x: np.array([x[0], 2 * x[1]]), chart, pts).residual)

# %% [markdown]
# Leafwise plurisubharmonicity: constant on leaves and a nonnegative Levi form.

# %%
c01 = fc.ModelChart(0, 1)
s01 = np.random.default_rng(3).uniform(-0.9, 0.9, (10, 2))
for label, fn, ch, s in [("|z|^2", lambda x: x[0] ** 2 + x[1] ** 2, c01, s01),
                         ("Re z^2", lambda x: x[0] ** 2 - x[1] ** 2, c01, s01),
                         ("|z|^2 + p1", lambda x: x[2] ** 2 + x[3] ** 2 + x[0], chart, pts)]:
    print(f"{label:11s} {fc.l_psh_check(fn, ch, s).classify()}")
