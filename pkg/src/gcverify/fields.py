"""Pointwise differential checks for structures given as fields on a box in ``R^d``.

All derivatives are central differences.  The first-derivative step defaults
to ``1e-5 * (1 + |x|_inf)``; second derivatives (Levi forms) use
``1e-4 * (1 + |x|_inf)`` since their rounding error scales like ``eps / h²``.
Sample points closer than ``2 h`` to the box boundary are rejected.
"""

from __future__ import annotations

import threading
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import linear as gl
from .subspace import DEFAULT_TOL

FIELD_TOL = 1e-6
STRICT_THRESHOLD = 1e-6


class MarginError(ValueError):
    """Sample point too close to the box boundary for the stencil."""


def default_step(x) -> float:
    return 1e-5 * (1.0 + float(np.max(np.abs(x), initial=0.0)))


def default_step2(x) -> float:
    return 1e-4 * (1.0 + float(np.max(np.abs(x), initial=0.0)))


def check_margin(x, box, h: float):
    if box is None:
        return
    box = np.asarray(box, dtype=float)
    x = np.asarray(x, dtype=float)
    lo, hi = box[:, 0], box[:, 1]
    if np.any(x - lo < 2 * h) or np.any(hi - x < 2 * h):
        raise MarginError(f"point {x} is within 2*fd_step={2 * h:.3g} of the box boundary")


def jacobian(fn: Callable, x, h: float) -> np.ndarray:
    """``J[k, j] = ∂_j fn_k(x)``; works for real or complex outputs."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        cols.append((np.asarray(fn(x + e)) - np.asarray(fn(x - e))) / (2 * h))
    return np.stack([np.atleast_1d(c) for c in cols], axis=-1)


def gradient(f: Callable, x, h: float) -> np.ndarray:
    return jacobian(lambda y: np.atleast_1d(f(y)), x, h)[0]


def hessian(f: Callable, x, h: float) -> np.ndarray:
    """Second partials via the 4-point mixed stencil (symmetric by construction)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    H = np.zeros((n, n), dtype=complex)
    eye = np.eye(n) * h
    for a in range(n):
        for b in range(a, n):
            v = (f(x + eye[a] + eye[b]) - f(x + eye[a] - eye[b])
                 - f(x - eye[a] + eye[b]) + f(x - eye[a] - eye[b])) / (4 * h * h)
            H[a, b] = H[b, a] = v
    return H


# ---------------------------------------------------------------------------
# charts and fields


@dataclass(frozen=True)
class ModelChart:
    """Coordinates ``(p_1..p_{2M}, z_1..z_N)`` on ``R^{2M} × C^N``.

    Real coordinate vectors have length ``2M + 2N``; ``z_m`` is built from
    the consecutive pair ``x[2M + 2m - 2] + i x[2M + 2m - 1]``.
    """

    M: int
    N: int

    @property
    def d(self) -> int:
        return 2 * self.M + 2 * self.N

    def p(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float)[..., : 2 * self.M]

    def z(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)[..., 2 * self.M:]
        return x[..., 0::2] + 1j * x[..., 1::2]

    def point(self, p=(), z=()) -> np.ndarray:
        p = np.asarray(p, dtype=float).reshape(-1)
        z = np.asarray(z, dtype=complex).reshape(-1)
        if p.size != 2 * self.M or z.size != self.N:
            raise ValueError("wrong number of p or z coordinates")
        zz = np.empty(2 * self.N)
        zz[0::2], zz[1::2] = z.real, z.imag
        return np.concatenate([p, zz])

    def function(self, fn: Callable) -> Callable:
        """Wrap ``fn(p, z)`` as a function of the real coordinate vector."""
        return lambda x: fn(self.p(x), self.z(x))

    def structure(self, tol: float = DEFAULT_TOL) -> gl.LinearGCStructure:
        return gl.standard_model(self.M, self.N, tol)

    def p_indices(self) -> range:
        return range(2 * self.M)


@dataclass(frozen=True)
class Section:
    """A section ``A + ξ`` of ``TX + T*X`` given by two evaluators ``x ↦ R^d``."""

    vector: Callable
    covector: Callable


@dataclass(eq=False)
class StructureField:
    """A field ``x ↦ J(x)`` on a box in ``R^d`` (``J(x)`` is ``2d × 2d``).

    Validity of ``J(x)`` is certified lazily and cached per point.
    """

    J_at: Callable
    d: int
    box: np.ndarray | None = None
    fd_step: float | None = None
    tol: float = DEFAULT_TOL
    _cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        if self.d % 2:
            raise ValueError("d must be even")
        if self.box is not None:
            self.box = np.asarray(self.box, dtype=float).reshape(self.d, 2)

    def step(self, x) -> float:
        return self.fd_step if self.fd_step is not None else default_step(x)

    def J(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        key = x.tobytes()
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        Jx = np.asarray(self.J_at(x), dtype=float)
        cert = gl.validate(Jx, self.tol)
        if not cert.valid:
            raise gl.InvalidStructure(f"J(x) invalid at {x}: {cert}")
        with self._lock:
            if len(self._cache) > 4096:
                self._cache.clear()
            self._cache[key] = Jx
        return Jx

    def jet(self, x):
        """``J(x)`` and ``dJ[j] = ∂_j J(x)`` by central differences."""
        h = self.step(x)
        check_margin(x, self.box, h)
        x = np.asarray(x, dtype=float)
        Jx = self.J(x)
        dJ = np.empty((self.d,) + Jx.shape)
        for j in range(self.d):
            e = np.zeros(self.d)
            e[j] = h
            dJ[j] = (self.J_at(x + e) - self.J_at(x - e)) / (2 * h)
        return Jx, dJ


def constant_field(structure: gl.LinearGCStructure, box=None, **kw) -> StructureField:
    J = structure.J
    return StructureField(lambda x: J, structure.d, box, tol=structure.tol, **kw)


def almost_complex_field(jc_at: Callable, d: int, box=None, **kw) -> StructureField:
    """GC field ``diag(−J(x), J(x)ᵀ)`` of an almost complex structure field."""
    return StructureField(lambda x: gl.from_complex_structure(jc_at(x)), d, box, **kw)


def rotating_field(box=None, **kw) -> StructureField:
    """Almost complex ``J0 ⊕ J0`` on ``R^4`` conjugated by a rotation of angle ``x1`` in the ``(x2, x3)`` plane.

    Not integrable: its Nijenhuis tensor is nonzero at generic points.
    """
    Jstd = np.kron(np.eye(2), gl.J0)

    def jc(x):
        c, s = np.cos(x[0]), np.sin(x[0])
        R = np.eye(4)
        R[1:3, 1:3] = [[c, -s], [s, c]]
        return R @ Jstd @ R.T

    return almost_complex_field(jc, 4, box, **kw)


def exterior_derivative_residual(B_at: Callable, x, h: float | None = None) -> float:
    """Max of ``|∂_i B_jk + ∂_j B_ki + ∂_k B_ij|`` at ``x``."""
    x = np.asarray(x, dtype=float)
    h = default_step(x) if h is None else h
    d = x.size
    dB = np.empty((d, d, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        dB[i] = (np.asarray(B_at(x + e)) - np.asarray(B_at(x - e))) / (2 * h)
    cyc = dB + dB.transpose(1, 2, 0) + dB.transpose(2, 0, 1)
    return float(np.max(np.abs(cyc)))


def b_transformed_field(base: StructureField, B_at: Callable, probe=None) -> StructureField:
    """Field ``e^{-B(x)} J(x) e^{B(x)}``.

    Closedness of ``B`` is checked at ``probe`` (default: box centre) and only
    warned about, never enforced.
    """
    if probe is None and base.box is not None:
        probe = base.box.mean(axis=1)
    if probe is not None:
        res = exterior_derivative_residual(B_at, probe)
        if res > FIELD_TOL:
            warnings.warn(f"B is not closed (|dB| ≈ {res:.3g}); integrability may be lost",
                          stacklevel=2)

    def J(x):
        B = np.asarray(B_at(x), dtype=float)
        return gl.b_field(-B) @ base.J_at(x) @ gl.b_field(B)

    return StructureField(J, base.d, base.box, base.fd_step, base.tol)


# ---------------------------------------------------------------------------
# Courant bracket


def _bracket_from_jets(a1, da1, x1, dx1, a2, da2, x2, dx2):
    """Courant bracket from values and Jacobians (``D[k, j] = ∂_j (·)_k``)."""
    lie = da2 @ a1 - da1 @ a2
    lie_a1_x2 = dx2 @ a1 + da1.T @ x2
    lie_a2_x1 = dx1 @ a2 + da2.T @ x1
    # d(ι_{A1}ξ2 − ι_{A2}ξ1) by the product rule
    dh = (da1.T @ x2 + dx2.T @ a1) - (da2.T @ x1 + dx1.T @ a2)
    return lie, lie_a1_x2 - lie_a2_x1 - 0.5 * dh


def courant_bracket(s1: Section, s2: Section, x, fd_step: float | None = None, box=None):
    """Courant bracket ``[s1, s2]`` at ``x``: returns ``(vector, covector)``."""
    x = np.asarray(x, dtype=float)
    h = default_step(x) if fd_step is None else fd_step
    check_margin(x, box, h)
    jets = []
    for s in (s1, s2):
        for fn in (s.vector, s.covector):
            jets.append(np.asarray(fn(x), dtype=float))
            jets.append(jacobian(fn, x, h))
    return _bracket_from_jets(*jets)


def _nijenhuis_matrix(Jx, dJ, frame):
    """``N(C, D)`` for constant frame columns, from ``J`` and its jet; shape ``(n, n, 2d)``."""
    d = Jx.shape[0] // 2
    n = frame.shape[1]
    # sections JC: value J C, jacobian [∂_j J C]_k
    JF = Jx @ frame
    dJF = np.einsum("jab,bc->caj", dJ, frame)  # (c, a, j)
    zero_jac = np.zeros((2 * d, d))

    def split(val, jac):
        return val[:d], jac[:d], val[d:], jac[d:]

    N = np.zeros((n, n, 2 * d))
    for c in range(n):
        JC = split(JF[:, c], dJF[c])
        C = split(frame[:, c], zero_jac)
        for e in range(n):
            JD = split(JF[:, e], dJF[e])
            D = split(frame[:, e], zero_jac)
            t1 = np.concatenate(_bracket_from_jets(*JC, *JD))
            t2 = Jx @ np.concatenate(_bracket_from_jets(*JC, *D))
            t3 = Jx @ np.concatenate(_bracket_from_jets(*C, *JD))
            t4 = np.concatenate(_bracket_from_jets(*C, *D))
            N[c, e] = t1 - t2 - t3 - t4
    return N


def nijenhuis_tensor(field: StructureField, x, frame=None) -> np.ndarray:
    Jx, dJ = field.jet(x)
    frame = np.eye(2 * field.d) if frame is None else np.asarray(frame, dtype=float)
    return _nijenhuis_matrix(Jx, dJ, frame)


def nijenhuis_residual(field: StructureField, x, frame=None) -> float:
    """Max norm of ``N(C, D)`` over pairs of constant frame sections (coordinate frame by default)."""
    N = nijenhuis_tensor(field, x, frame)
    return float(np.max(np.linalg.norm(N, axis=-1)))


# ---------------------------------------------------------------------------
# functions


def d_L_function(f: Callable, field: StructureField, x) -> np.ndarray:
    """``(d_L f)(A_i) = ρ(A_i) f`` on the computed orthonormal basis of ``L_x``."""
    x = np.asarray(x, dtype=float)
    h = field.step(x)
    check_margin(x, field.box, h)
    L = gl.eigenbundle(field.J(x), field.tol)
    grad = gradient(lambda y: complex(f(y)), x, h)
    return gl.rho(L.basis).T @ grad


def _samples(samples) -> np.ndarray:
    s = np.atleast_2d(np.asarray(samples, dtype=float))
    return s


@dataclass
class GHReport:
    zbar: np.ndarray           # per sample: max_j |∂f/∂z̄_j|
    leaf: np.ndarray           # per sample: max_l |∂f/∂p_l|
    d_L: np.ndarray            # per sample: |d_L f|
    tol: float

    @property
    def is_gh(self) -> bool:
        return bool(np.all(self.zbar < self.tol) and np.all(self.leaf < self.tol))

    @property
    def d_L_verdict(self) -> bool:
        return bool(np.all(self.d_L < 10 * self.tol))

    @property
    def agrees(self) -> bool:
        return self.is_gh == self.d_L_verdict

    @property
    def max_zbar(self) -> float:
        return float(self.zbar.max(initial=0.0))

    @property
    def max_leaf(self) -> float:
        return float(self.leaf.max(initial=0.0))


def wirtinger(chart: ModelChart, grad: np.ndarray):
    """Split a complex gradient into ``∂/∂p``, ``∂/∂z`` and ``∂/∂z̄`` parts."""
    gp = grad[: 2 * chart.M]
    gx = grad[2 * chart.M:: 2]
    gy = grad[2 * chart.M + 1:: 2]
    return gp, 0.5 * (gx - 1j * gy), 0.5 * (gx + 1j * gy)


def gh_check_model(f: Callable, chart: ModelChart, samples, tol: float = FIELD_TOL,
                   fd_step: float | None = None, box=None) -> GHReport:
    """Coordinate GH test ``∂f/∂z̄ = ∂f/∂p = 0``, cross-checked against ``d_L f``."""
    pts = _samples(samples)
    field_ = constant_field(chart.structure(), box, fd_step=fd_step)
    zb, lf, dl = [], [], []
    for x in pts:
        h = default_step(x) if fd_step is None else fd_step
        check_margin(x, box, h)
        g = gradient(lambda y: complex(f(y)), x, h)
        gp, _, gzb = wirtinger(chart, g)
        zb.append(np.max(np.abs(gzb), initial=0.0))
        lf.append(np.max(np.abs(gp), initial=0.0))
        dl.append(np.linalg.norm(d_L_function(f, field_, x)))
    return GHReport(np.array(zb), np.array(lf), np.array(dl), tol)


POISSON_2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
"""Bivector matrix of ``(R^2, ω0^{-1})``: ``{p1, p2} = 1``."""


def model_bivector(chart: ModelChart) -> np.ndarray:
    """``ω0^{-1} ⊕ 0`` on ``R^{2M} × C^N``."""
    pi = np.zeros((chart.d, chart.d))
    pi[: 2 * chart.M, : 2 * chart.M] = np.kron(np.eye(chart.M), POISSON_2)
    return pi


@dataclass
class PoissonReport:
    residuals: np.ndarray
    tol: float

    @property
    def residual(self) -> float:
        return float(self.residuals.max(initial=0.0))

    @property
    def is_poisson(self) -> bool:
        return self.residual < self.tol


def poisson_map_check(f: Callable, chart: ModelChart, samples, tol: float = FIELD_TOL,
                      fd_step: float | None = None, box=None) -> PoissonReport:
    """Max-entry residual of ``Df π Dfᵀ − π_target`` for ``f`` into ``(R^2, ω0^{-1})``."""
    pi = model_bivector(chart)
    res = []
    for x in _samples(samples):
        h = default_step(x) if fd_step is None else fd_step
        check_margin(x, box, h)
        Df = np.real(jacobian(lambda y: np.asarray(f(y), dtype=float), x, h))
        res.append(np.max(np.abs(Df @ pi @ Df.T - POISSON_2)))
    return PoissonReport(np.array(res), tol)


def levi_matrix(f: Callable, chart: ModelChart, x, h: float | None = None) -> np.ndarray:
    """``H_ij = ∂²f/∂z_i∂z̄_j`` from real second partials."""
    x = np.asarray(x, dtype=float)
    h = default_step2(x) if h is None else h
    Hr = hessian(lambda y: complex(f(y)), x, h)
    o = 2 * chart.M
    xs = slice(o, None, 2)
    ys = slice(o + 1, None, 2)
    hxx, hyy = Hr[xs, xs], Hr[ys, ys]
    hxy, hyx = Hr[xs, ys], Hr[ys, xs]
    return 0.25 * (hxx + hyy + 1j * (hxy - hyx))


@dataclass
class PshReport:
    leaf: np.ndarray
    min_eig: np.ndarray
    hermitian_residual: np.ndarray
    tol: float
    strict_threshold: float

    @property
    def leaf_residual(self) -> float:
        return float(self.leaf.max(initial=0.0))

    @property
    def leafwise_constant(self) -> bool:
        return self.leaf_residual < self.tol

    @property
    def is_psh(self) -> bool:
        return self.leafwise_constant and bool(np.all(self.min_eig >= -self.tol))

    @property
    def is_strict(self) -> bool:
        return self.leafwise_constant and bool(np.all(self.min_eig > self.strict_threshold))

    def classify(self) -> str:
        if not self.leafwise_constant:
            return "leaf-fail"
        if self.is_strict:
            return "strict"
        if self.is_psh:
            return "non-strict"
        return "negative"


def l_psh_check(f: Callable, chart: ModelChart, samples, tol: float = FIELD_TOL,
                strict_threshold: float = STRICT_THRESHOLD, fd_step: float | None = None,
                fd_step2: float | None = None, box=None) -> PshReport:
    """Leafwise constancy and Levi-form eigenvalues of a real function on a model chart."""
    leaf, eig, herm = [], [], []
    for x in _samples(samples):
        h = default_step(x) if fd_step is None else fd_step
        h2 = default_step2(x) if fd_step2 is None else fd_step2
        check_margin(x, box, max(h, h2))
        val = complex(f(x))
        if abs(val.imag) > tol * max(1.0, abs(val)):
            raise ValueError(f"f is not real-valued at {x}")
        g = gradient(lambda y: complex(f(y)), x, h)
        leaf.append(np.max(np.abs(g[: 2 * chart.M]), initial=0.0))
        H = levi_matrix(f, chart, x, h2)
        herm.append(np.max(np.abs(H - H.conj().T), initial=0.0))
        Hs = 0.5 * (H + H.conj().T)
        eig.append(np.linalg.eigvalsh(Hs).min() if chart.N else 0.0)
    return PshReport(np.array(leaf), np.array(eig), np.array(herm), tol, strict_threshold)
