"""Sampled probes of the separability, convexity and regularity conditions.

Every set-valued claim here is about finite point sets: grids, sample
lists, boundary shells.  Hulls and polyhedra are always relative to the
supplied finite family of functions, so a computed hull is an outer
approximation of the true one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import directed_hausdorff

from . import fields as fc
from .fields import ModelChart

HULL_TOL = 1e-9
SEPARATION_TOL = 1e-6
RANK_TOL = 1e-6
POWER_CAP = 64


# ---------------------------------------------------------------------------
# families, compacts, grids


@dataclass
class Member:
    name: str
    fn: Callable
    verified: bool | None = None
    residual: float | None = None


@dataclass
class FunctionFamily:
    """Candidate GH functions (complex) and GH maps to ``(R², ω0)`` (real pairs)."""

    gh_functions: list[Member] = field(default_factory=list)
    poisson_maps: list[Member] = field(default_factory=list)

    @classmethod
    def of(cls, gh=None, poisson=None) -> "FunctionFamily":
        def members(src):
            if src is None:
                return []
            items = src.items() if isinstance(src, dict) else src
            out = []
            for item in items:
                if isinstance(item, Member):
                    out.append(item)
                else:
                    name, fn = item
                    out.append(Member(name, fn))
            return out
        return cls(members(gh), members(poisson))

    def register(self, chart: ModelChart, samples, tol: float = fc.FIELD_TOL,
                 fd_step: float | None = None, box=None) -> "FunctionFamily":
        """Tag each member as verified or not by the field-calculus checks."""
        for m in self.gh_functions:
            rep = fc.gh_check_model(m.fn, chart, samples, tol, fd_step, box)
            m.verified, m.residual = rep.is_gh, max(rep.max_zbar, rep.max_leaf)
        for m in self.poisson_maps:
            rep = fc.poisson_map_check(m.fn, chart, samples, tol, fd_step, box)
            m.verified, m.residual = rep.is_poisson, rep.residual
        return self

    def names(self) -> list[str]:
        return [m.name for m in self.gh_functions] + [m.name for m in self.poisson_maps]

    def restrict(self, names: Sequence[str]) -> "FunctionFamily":
        keep = set(names)
        return FunctionFamily([m for m in self.gh_functions if m.name in keep],
                              [m for m in self.poisson_maps if m.name in keep])


@dataclass
class SampledCompact:
    points: np.ndarray
    label: str = "K"

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))

    def __len__(self):
        return self.points.shape[0]

    def inside(self, box) -> bool:
        box = np.asarray(box, dtype=float)
        return bool(np.all((self.points >= box[:, 0]) & (self.points <= box[:, 1])))


@dataclass(frozen=True)
class Grid:
    """Regular lattice over a box; ``points`` are in C order of ``shape``."""

    box: np.ndarray
    step: float

    def __post_init__(self):
        object.__setattr__(self, "box", np.asarray(self.box, dtype=float).reshape(-1, 2))
        if self.step <= 0:
            raise ValueError("grid step must be positive")

    @property
    def axes(self) -> list[np.ndarray]:
        out = []
        for lo, hi in self.box:
            n = int(math.floor((hi - lo) / self.step + 1e-9)) + 1
            out.append(lo + self.step * np.arange(n))
        return out

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.axes)

    @property
    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    def shell(self, mask) -> np.ndarray:
        """Boolean mask of points in ``mask`` with a lattice neighbour outside it."""
        m = np.asarray(mask, dtype=bool).reshape(self.shape)
        edge = np.zeros_like(m)
        for ax in range(m.ndim):
            pad = [(1, 1) if i == ax else (0, 0) for i in range(m.ndim)]
            mp = np.pad(m, pad, constant_values=False)
            lo = np.take(mp, range(0, m.shape[ax]), axis=ax)
            hi = np.take(mp, range(2, m.shape[ax] + 2), axis=ax)
            edge |= m & (~lo | ~hi)
        return edge.reshape(-1)


def circle_samples(n: int, radius: float = 1.0, center=(0.0, 0.0), phase: float = 0.0) -> np.ndarray:
    t = phase + 2 * np.pi * np.arange(n) / n
    return np.stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)], axis=1)


def disc_samples(radius: float, step: float, center=(0.0, 0.0), closed: bool = True) -> np.ndarray:
    g = Grid(np.array([[center[0] - radius, center[0] + radius],
                       [center[1] - radius, center[1] + radius]]), step)
    pts = g.points
    r = np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1])
    keep = r <= radius + 1e-12 if closed else r < radius
    return pts[keep]


def monomial_family(chart: ModelChart, max_degree: int, variable: int = 1) -> FunctionFamily:
    """``z_j, z_j², …`` as GH functions (exact expressions)."""
    from .expr import parse
    return FunctionFamily.of(gh=[(f"z{variable}^{m}", parse(f"z{variable}**{m}", chart))
                                 for m in range(1, max_degree + 1)])


def coordinate_family(chart: ModelChart) -> FunctionFamily:
    """All coordinate GH functions ``z_j`` and coordinate GH maps ``(p_{2l-1}, p_{2l})``."""
    from .expr import parse
    gh = [(f"z{j}", parse(f"z{j}", chart)) for j in range(1, chart.N + 1)]
    pm = []
    for l in range(chart.M):
        pm.append((f"pr{l + 1}", _pair_map(2 * l)))
    return FunctionFamily.of(gh=gh, poisson=pm)


def _pair_map(i: int) -> Callable:
    def fn(x):
        x = np.asarray(x, dtype=float)
        return x[..., i: i + 2]
    return fn


def values(fn: Callable, points) -> np.ndarray:
    """Evaluate ``fn`` at each row of ``points`` (vectorised when supported)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if hasattr(fn, "evaluate_points"):
        return np.asarray(fn.evaluate_points(pts))
    return np.asarray([fn(x) for x in pts])


# ---------------------------------------------------------------------------
# hulls


@dataclass
class HullReport:
    compact: SampledCompact
    mask: np.ndarray
    bounds: dict[str, float]
    family: list[str]
    tol: float
    note: str = ("outer approximation: hull relative to the supplied family only; "
                 "more functions give a smaller set")

    @property
    def size(self) -> int:
        return int(self.mask.sum())


def o_hull(K: SampledCompact, family: FunctionFamily, grid: Grid | np.ndarray,
           tol: float = HULL_TOL) -> HullReport:
    """Grid points ``p`` with ``|f(p)| <= max_K |f| + tol`` for every GH function ``f``."""
    if not family.gh_functions:
        raise ValueError("o_hull needs a nonempty family of GH functions")
    pts = grid.points if isinstance(grid, Grid) else np.atleast_2d(np.asarray(grid, dtype=float))
    mask = np.ones(pts.shape[0], dtype=bool)
    bounds = {}
    for m in family.gh_functions:
        bound = float(np.max(np.abs(values(m.fn, K.points))))
        bounds[m.name] = bound
        mask &= np.abs(values(m.fn, pts)) <= bound + tol
    return HullReport(SampledCompact(pts[mask], f"hull({K.label})"), mask, bounds,
                      [m.name for m in family.gh_functions], tol)


@dataclass
class IdempotenceReport:
    idempotent: bool
    first: int
    second: int
    symmetric_difference: int


def hull_idempotence_check(K: SampledCompact, family: FunctionFamily, grid: Grid | np.ndarray,
                           tol: float = HULL_TOL) -> IdempotenceReport:
    h1 = o_hull(K, family, grid, tol)
    h2 = o_hull(h1.compact, family, grid, tol)
    diff = int(np.sum(h1.mask ^ h2.mask))
    return IdempotenceReport(diff == 0, h1.size, h2.size, diff)


def hausdorff_distance(a, b) -> float:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[0] == 0 or b.shape[0] == 0:
        return math.inf
    return max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])


def hausdorff_to_disc(points, radius: float = 1.0, center=(0.0, 0.0),
                      resolution: float = 0.005) -> float:
    """Hausdorff distance from a planar point set to a closed disc.

    Points-to-disc is exact (radial excess); disc-to-points uses a dense
    sample of the disc including its boundary circle.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 0:
        return math.inf
    r = np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1])
    outward = float(np.max(np.maximum(r - radius, 0.0)))
    n_circ = max(16, int(2 * np.pi * radius / resolution))
    dense = np.vstack([disc_samples(radius, resolution, center),
                       circle_samples(n_circ, radius, center)])
    inward = float(cKDTree(pts).query(dense)[0].max())
    return max(outward, inward)


# ---------------------------------------------------------------------------
# separability


GH_ONLY = "ghfunctions_only"
WITH_POISSON = "include_poisson_maps"


@dataclass
class PairVerdict:
    separated: bool
    witness: str | None
    gap: float
    mode: str


def separability_probe(pairs, family: FunctionFamily, mode: str = GH_ONLY,
                       tol: float = SEPARATION_TOL) -> list[PairVerdict]:
    """For each pair report whether some family member takes values differing by more than ``tol``."""
    if mode not in (GH_ONLY, WITH_POISSON):
        raise ValueError(f"unknown separability mode {mode!r}")
    members = list(family.gh_functions)
    if mode == WITH_POISSON:
        members += family.poisson_maps
    out = []
    for a, b in pairs:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if np.array_equal(a, b):
            raise ValueError("separability pairs must consist of distinct points")
        best, who = 0.0, None
        for m in members:
            gap = float(np.linalg.norm(np.atleast_1d(m.fn(a)) - np.atleast_1d(m.fn(b))))
            if gap > best:
                best, who = gap, m.name
        sep = best > tol
        out.append(PairVerdict(sep, who if sep else None, best, mode))
    return out


# ---------------------------------------------------------------------------
# regularity


@dataclass
class RankInfo:
    rank: int
    target: int
    singular_values: np.ndarray
    threshold: float

    @property
    def gap(self) -> float | None:
        """Ratio of the last kept to the first dropped singular value."""
        s = self.singular_values
        if self.rank == 0 or self.rank >= s.size:
            return None
        return float(s[self.rank - 1] / max(s[self.rank], np.finfo(float).tiny))

    @property
    def ok(self) -> bool:
        return self.rank >= self.target


def numerical_rank(m: np.ndarray, target: int, rank_tol: float = RANK_TOL) -> RankInfo:
    s = np.linalg.svd(m, compute_uv=False) if m.size else np.zeros(0)
    thr = rank_tol * max(1.0, float(s.max(initial=0.0)))
    return RankInfo(int(np.sum(s > thr)), target, s, thr)


@dataclass
class RegularityReport:
    real: RankInfo
    complex: RankInfo

    @property
    def regular(self) -> bool:
        return self.real.ok and self.complex.ok


def _stack_jacobians(x, poisson_maps, gh_functions, chart, h):
    rows, zrows = [], []
    for fn in poisson_maps:
        rows.append(np.real(fc.jacobian(lambda y: np.asarray(fn(y), dtype=float), x, h)))
    for fn in gh_functions:
        g = fc.gradient(lambda y: complex(fn(y)), x, h)
        rows.append(np.vstack([g.real, g.imag]))
        zrows.append(fc.wirtinger(chart, g)[1])
    real = np.vstack(rows) if rows else np.zeros((0, chart.d))
    cplx = np.array(zrows).reshape(len(zrows), chart.N)
    return real, cplx


def regularity_probe(x, poisson_maps: Sequence[Callable], gh_functions: Sequence[Callable],
                     chart: ModelChart, rank_tol: float = RANK_TOL,
                     fd_step: float | None = None, box=None) -> RegularityReport:
    """Real rank of all component Jacobians (target ``dim``) and complex rank of ``[∂g_i/∂z_j]`` (target ``N``).

    Extra functions beyond ``M`` maps and ``N`` functions are allowed; they can
    only raise the ranks.
    """
    if len(poisson_maps) < chart.M or len(gh_functions) < chart.N:
        raise ValueError(f"need at least {chart.M} GH maps and {chart.N} GH functions")
    x = np.asarray(x, dtype=float)
    h = fc.default_step(x) if fd_step is None else fd_step
    fc.check_margin(x, box, h)
    real, cplx = _stack_jacobians(x, poisson_maps, gh_functions, chart, h)
    return RegularityReport(numerical_rank(real, chart.d, rank_tol),
                            numerical_rank(cplx, chart.N, rank_tol))


# ---------------------------------------------------------------------------
# generic reduction


@dataclass
class ReductionReport:
    success: bool
    c: np.ndarray | None
    functions: list[Callable]
    trials_used: int
    seed: int
    mode: int
    input_regular: bool
    message: str = ""


def _reduced(gs, c):
    last = gs[-1]
    return [(lambda x, g=g, cj=cj: complex(g(x)) - cj * complex(last(x))) for g, cj in zip(gs[:-1], c)]


def _injective_on(maps, K: SampledCompact, tol: float) -> bool:
    vals = []
    for x in K.points:
        parts = [np.atleast_1d(np.asarray(m(x))).astype(complex) for m in maps]
        vals.append(np.concatenate(parts))
    vals = np.array(vals)
    for i, j in combinations(range(len(vals)), 2):
        if np.linalg.norm(vals[i] - vals[j]) <= tol:
            return False
    return True


def _regular_on(K, poisson_maps, gs, chart, rank_tol, fd_step, box) -> bool:
    return all(regularity_probe(x, poisson_maps, gs, chart, rank_tol, fd_step, box).regular
               for x in K.points)


def reduce_regular_tuple(poisson_maps: Sequence[Callable], gh_functions: Sequence[Callable],
                         K: SampledCompact, chart: ModelChart, seed: int = 0, trials: int = 5,
                         radius: float = 0.1, mode: int = 1, rank_tol: float = RANK_TOL,
                         fd_step: float | None = None, box=None,
                         injectivity_tol: float = SEPARATION_TOL) -> ReductionReport:
    """Drop one GH function by subtracting ``c_j g_{N+1}`` from the others, ``c`` random and small.

    The first ``c`` (uniform in the complex ball of the given radius) that keeps
    the tuple regular at every sample of ``K`` is accepted.  Mode 2 also
    requires pairwise distinct values on ``K``.  Exhausting the trials gives a
    no-witness report rather than an error.
    """
    if mode not in (1, 2):
        raise ValueError("mode must be 1 or 2")
    if len(poisson_maps) != chart.M:
        raise ValueError(f"expected {chart.M} GH maps, got {len(poisson_maps)}")
    n_out = len(gh_functions) - 1
    k = chart.N
    need = 2 * k if mode == 1 else 2 * k + 1
    if n_out < need:
        raise ValueError(f"reduction to {n_out} functions needs at least {need} (mode {mode})")
    if trials < 1 or radius <= 0:
        raise ValueError("trials must be positive and radius > 0")
    gs = list(gh_functions)
    input_regular = _regular_on(K, poisson_maps, gs, chart, rank_tol, fd_step, box)
    if mode == 2:
        input_regular = input_regular and _injective_on(list(poisson_maps) + gs, K, injectivity_tol)
    rng = np.random.default_rng(seed)
    for t in range(1, trials + 1):
        # uniform in the ball of C^n_out = R^{2 n_out}
        v = rng.standard_normal(2 * n_out)
        v *= radius * rng.random() ** (1.0 / (2 * n_out)) / np.linalg.norm(v)
        c = v[:n_out] + 1j * v[n_out:]
        red = _reduced(gs, c)
        ok = _regular_on(K, poisson_maps, red, chart, rank_tol, fd_step, box)
        if ok and mode == 2:
            ok = _injective_on(list(poisson_maps) + red, K, injectivity_tol)
        if ok:
            return ReductionReport(True, c, red, t, seed, mode, input_regular)
    msg = "no c found; the input tuple is not regular on K" if not input_regular else \
        "no c found within the trial budget"
    return ReductionReport(False, None, [], trials, seed, mode, input_regular, msg)


# ---------------------------------------------------------------------------
# exhaustion functions


@dataclass
class ExhaustionLevel:
    """One level of the construction.

    ``inner`` samples the compact ``K_j``; ``outer`` samples ``K_{j+2}`` minus
    the supplied neighbourhood ``U_j``.
    """

    functions: list[Member]
    inner: np.ndarray
    outer: np.ndarray


@dataclass
class ExhaustionResult:
    success: bool
    powers: list[list[int]]
    f: Callable | None
    failing_level: int | None = None
    message: str = ""
    inner_sums: list[float] = field(default_factory=list)
    outer_sums: list[float] = field(default_factory=list)
    psh: fc.PshReport | None = None
    sublevel: list[dict] = field(default_factory=list)


def _min_power_inner(a: float, budget: float) -> int:
    """Least ``m >= 1`` with ``a^{2m} < budget`` for ``0 <= a < 1``."""
    if a == 0.0:
        return 1
    m = math.ceil(math.log(budget) / (2 * math.log(a)))
    m = max(1, m)
    while a ** (2 * m) >= budget:
        m += 1
    return m


def _search_level(level: ExhaustionLevel, j: int, cap: int):
    L = len(level.functions)
    if L == 0:
        return None, "empty family"
    budget = 2.0 ** (-j) / L
    inner = np.array([np.abs(values(m.fn, level.inner)) for m in level.functions])
    outer = np.array([np.abs(values(m.fn, level.outer)) for m in level.functions]) \
        if len(level.outer) else np.zeros((L, 0))
    powers = []
    for l in range(L):
        a = float(inner[l].max(initial=0.0))
        if a >= 1.0:
            return None, f"|{level.functions[l].name}| = {a:.6g} >= 1 on K_{j}"
        m = _min_power_inner(a, budget)
        if m > cap:
            return None, f"{level.functions[l].name} needs power {m} > {cap} on K_{j}"
        powers.append(m)
    powers = np.array(powers)
    for _ in range(cap + 1):
        s = np.sum(outer ** (2 * powers[:, None]), axis=0) if outer.size else np.zeros(0)
        bad = np.nonzero(s <= j)[0]
        if bad.size == 0:
            return powers, ""
        raised = False
        for i in bad:
            l = int(np.argmax(outer[:, i]))
            v = outer[l, i]
            if v <= 1.0:
                return None, f"no function exceeds 1 at outer sample {i} of level {j}"
            need = max(int(powers[l]) + 1, math.floor(math.log(j) / (2 * math.log(v))) + 1)
            if need > cap:
                return None, f"{level.functions[l].name} needs power {need} > {cap} off U_{j}"
            if need > powers[l]:
                powers[l] = need
                raised = True
        if not raised:
            break
    return None, f"power search did not converge on level {j}"


def exhaustion_build(levels: Sequence[ExhaustionLevel], chart: ModelChart,
                     cap: int = POWER_CAP, psh_samples=None, strict_threshold: float = fc.STRICT_THRESHOLD,
                     tol: float = fc.FIELD_TOL, sublevel_checks=(), grid=None,
                     fd_step: float | None = None, fd_step2: float | None = None) -> ExhaustionResult:
    """Find powers so ``f = Σ_j Σ_l |g_jl|^{2 m_jl} − 1`` meets the level bounds, then certify it.

    Level ``j`` (1-based) needs the sum below ``2^{-j}`` on ``K_j`` and above
    ``j`` off ``U_j``.  Certification: strict L-psh at ``psh_samples`` (all
    inner samples by default) and, for each ``(c, region)`` in
    ``sublevel_checks``, every grid point with ``f < c`` satisfies ``region``.
    """
    all_powers = []
    for j, level in enumerate(levels, start=1):
        p, msg = _search_level(level, j, cap)
        if p is None:
            return ExhaustionResult(False, all_powers, None, j, msg)
        all_powers.append([int(v) for v in p])

    terms = [(m.fn, 2 * pw) for level, ps in zip(levels, all_powers)
             for m, pw in zip(level.functions, ps)]

    def f(x):
        return sum(abs(complex(g(x))) ** e for g, e in terms) - 1.0

    res = ExhaustionResult(True, all_powers, f)
    for j, (level, ps) in enumerate(zip(levels, all_powers), start=1):
        lv = [(m.fn, 2 * pw) for m, pw in zip(level.functions, ps)]
        part = lambda pts: sum(np.abs(values(g, pts)) ** e for g, e in lv)
        res.inner_sums.append(float(np.max(part(level.inner))))
        res.outer_sums.append(float(np.min(part(level.outer))) if len(level.outer) else math.inf)

    pts = np.vstack([lv.inner for lv in levels]) if psh_samples is None else psh_samples
    res.psh = fc.l_psh_check(f, chart, pts, tol, strict_threshold, fd_step, fd_step2)
    if not res.psh.is_strict:
        res.success = False
        res.message = f"f is not strictly L-psh on the samples (min eigenvalue {res.psh.min_eig.min():.3g})"
    if sublevel_checks:
        if grid is None:
            raise ValueError("sublevel checks need a grid")
        gp = grid.points if isinstance(grid, Grid) else np.atleast_2d(grid)
        fv = np.array([f(x) for x in gp])
        for c, region in sublevel_checks:
            below = gp[fv < c]
            inside = np.array([bool(region(x)) for x in below], dtype=bool)
            ok = bool(np.all(inside))
            res.sublevel.append({"c": float(c), "points": int(below.shape[0]), "contained": ok})
            if not ok:
                res.success = False
                res.message = f"sublevel set f < {c} leaves its region"
    return res


@dataclass
class ConvexityLevel:
    level: int
    hull_points: int
    excess: float
    convex: bool


def convexity_precheck(compacts: Sequence[np.ndarray], family: FunctionFamily, grid: Grid,
                       slack: float | None = None, tol: float = HULL_TOL) -> list[ConvexityLevel]:
    """Optional check that each ``K_j`` is hull-convex at grid scale.

    ``excess`` is the largest distance from a hull grid point to the samples
    of ``K_j``; the level counts as convex when it is at most ``slack``
    (default: one grid step).
    """
    slack = grid.step if slack is None else slack
    out = []
    for j, pts in enumerate(compacts, start=1):
        K = SampledCompact(pts, f"K_{j}")
        h = o_hull(K, family, grid, tol)
        excess = directed_hausdorff(h.compact.points, K.points)[0] if h.size else 0.0
        out.append(ConvexityLevel(j, h.size, float(excess), bool(excess <= slack)))
    return out


def disc_exhaustion_levels(chart: ModelChart, j_max: int = 3, step: float = 0.02,
                           include_base: bool = True) -> tuple[list[ExhaustionLevel], list[float], list[float]]:
    """Disc fixture on ``C``: ``K_j`` = closed disc of radius ``1 − 1/(j+1)``.

    Level ``j`` uses ``z/s_j`` and ``z²/s_j²`` with ``s_j`` halfway between
    the radii of ``K_j`` and ``K_{j+1}``; ``U_j`` is the open disc of radius
    ``r_{j+1}``.  Level 1 also carries ``z/2``, whose unit power keeps the
    Levi form positive at the origin.  Returns the levels, the radii of
    ``K_j`` (``j = 1..j_max+2``) and the radii of ``U_j``.
    """
    from .expr import parse
    if chart.M != 0 or chart.N != 1:
        raise ValueError("disc fixture lives on the model (0, 1)")
    r = [1 - 1 / (j + 1) for j in range(1, j_max + 3)]
    u = [r[j] for j in range(1, j_max + 1)]
    levels = []
    for j in range(1, j_max + 1):
        s = 0.5 * (r[j - 1] + r[j])
        fam = [Member(f"z/{s:.6g}", parse(f"z/{s!r}", chart)),
               Member(f"z^2/{s:.6g}^2", parse(f"z**2/{s * s!r}", chart))]
        if include_base and j == 1:
            fam.insert(0, Member("z/2", parse("z/2", chart)))
        inner = disc_samples(r[j - 1], step)
        ring = disc_samples(r[j + 1], step)
        outer = ring[np.hypot(ring[:, 0], ring[:, 1]) >= u[j - 1]]
        levels.append(ExhaustionLevel(fam, inner, outer))
    return levels, r, u


# ---------------------------------------------------------------------------
# polyhedra


@dataclass
class PolyhedronSpec:
    """``{x : |g_j(x) / s_j| < 1 for all j}``; ``order`` is the number of functions."""

    functions: list[Member]
    scales: list[float]

    def __post_init__(self):
        if len(self.scales) != len(self.functions):
            raise ValueError("one scale per function")
        if any(s <= 0 for s in self.scales):
            raise ValueError("scales must be positive")

    @classmethod
    def of(cls, functions: Sequence[Member]) -> "PolyhedronSpec":
        return cls(list(functions), [1.0] * len(functions))

    @property
    def order(self) -> int:
        return len(self.functions)

    def moduli(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if not self.functions:
            return np.zeros((0, pts.shape[0]))
        return np.array([np.abs(values(m.fn, pts)) / s for m, s in zip(self.functions, self.scales)])


def polyhedron_membership(P: PolyhedronSpec, points, tol: float = HULL_TOL) -> np.ndarray:
    mod = P.moduli(points)
    if mod.shape[0] == 0:
        return np.ones(mod.shape[1], dtype=bool)
    return np.all(mod < 1 - tol, axis=0)


@dataclass
class PolyhedronSearch:
    success: bool
    spec: PolyhedronSpec | None
    covered: int
    shell_size: int
    uncovered_point: np.ndarray | None = None
    message: str = ""


def polyhedron_search(K: SampledCompact, shell, candidates: FunctionFamily,
                      margin: float = 0.01, tol: float = HULL_TOL) -> PolyhedronSearch:
    """Greedy cover of the shell by rescaled candidates ``g/s``, ``s = (1 + margin) max_K |g|``.

    A shell point is covered when ``|g/s| > 1 + tol`` there; previously
    selected functions are tried first, otherwise the candidate with the
    largest ratio is added.
    """
    shell = np.atleast_2d(np.asarray(shell, dtype=float))
    cands = []
    for m in candidates.gh_functions:
        top = float(np.max(np.abs(values(m.fn, K.points))))
        if top > 0:
            cands.append((m, top * (1 + margin), np.abs(values(m.fn, shell))))
    if not cands:
        return PolyhedronSearch(False, None, 0, shell.shape[0],
                                shell[0] if shell.shape[0] else None, "no usable candidates")
    chosen: list[int] = []
    for i in range(shell.shape[0]):
        if any(cands[c][2][i] / cands[c][1] > 1 + tol for c in chosen):
            continue
        ratios = [v[i] / s for _, s, v in cands]
        best = int(np.argmax(ratios))
        if ratios[best] <= 1 + tol:
            return PolyhedronSearch(False, None, i, shell.shape[0], shell[i],
                                    f"shell point {shell[i].tolist()} is not covered")
        chosen.append(best)
    spec = PolyhedronSpec([cands[c][0] for c in chosen], [cands[c][1] for c in chosen])
    return PolyhedronSearch(True, spec, shell.shape[0], shell.shape[0])
