"""Tolerance-aware complex subspaces.

Every subspace is stored as an orthonormal basis (columns) of ``C^n``.
Orthonormality is with respect to the Hermitian product; geometric pairings
built on top of this module (e.g. the split pairing on ``V + V*``) are
bilinear and must use plain transposes, never conjugate transposes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

DEFAULT_TOL = 1e-9


class DimensionError(ValueError):
    """Raised when operands live in incompatible ambient spaces."""


@dataclass(frozen=True)
class RankDecision:
    """How a numerical rank was decided.

    ``kept`` is the smallest retained (relative) singular/pivot value and
    ``discarded`` the largest dropped one; either is ``None`` if empty.
    """

    rank: int
    kept: float | None = None
    discarded: float | None = None

    @property
    def gap(self) -> float | None:
        if self.kept is None or self.discarded is None:
            return None
        return self.kept / max(self.discarded, np.finfo(float).tiny)


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of ``C^n`` given by an orthonormal basis.

    Zero-dimensional subspaces are valid values (basis of shape ``(n, 0)``).
    Instances are immutable; the basis array is made read-only.
    """

    basis: np.ndarray
    tol: float = DEFAULT_TOL
    decision: RankDecision | None = field(default=None, compare=False)

    def __post_init__(self):
        b = np.array(self.basis, dtype=complex, copy=True)
        if b.ndim != 2:
            raise DimensionError("basis must be a 2-d array")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def residual(self, vectors) -> float:
        """Largest distance of the given unit-normalised columns from the subspace."""
        v = np.atleast_2d(np.asarray(vectors, dtype=complex))
        if v.shape[0] != self.ambient_dim:
            v = v.T
        if v.shape[1] == 0:
            return 0.0
        norms = np.linalg.norm(v, axis=0)
        norms[norms == 0] = 1.0
        v = v / norms
        r = v - self.basis @ (self.basis.conj().T @ v)
        return float(np.max(np.linalg.norm(r, axis=0)))

    def contains(self, other: "Subspace") -> tuple[bool, float]:
        """Whether ``other`` lies inside ``self``; residual is the largest principal angle."""
        _check_same_ambient(self, other)
        if other.dim == 0:
            return True, 0.0
        r = other.basis - self.basis @ (self.basis.conj().T @ other.basis)
        s = np.linalg.norm(r, 2)
        angle = float(np.arcsin(min(1.0, s)))
        return angle < max(self.tol, other.tol), angle

    def is_real(self) -> bool:
        return equal_subspaces(self, conjugate(self), self.tol)[0]

    def real_basis(self) -> np.ndarray:
        """Orthonormal real basis of a conjugation-stable subspace."""
        if not self.is_real():
            raise ValueError("subspace is not stable under conjugation")
        cols = np.hstack([self.basis.real, self.basis.imag])
        return span(cols, self.tol).basis.real

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


def _as_matrix(columns) -> np.ndarray:
    a = np.asarray(columns, dtype=complex)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise DimensionError("expected a matrix of column vectors")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _check_same_ambient(a: Subspace, b: Subspace):
    if a.ambient_dim != b.ambient_dim:
        raise DimensionError(
            f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}")


def zero(n: int, tol: float = DEFAULT_TOL) -> Subspace:
    return Subspace(np.zeros((n, 0), dtype=complex), tol, RankDecision(0))


def full(n: int, tol: float = DEFAULT_TOL) -> Subspace:
    return Subspace(np.eye(n, dtype=complex), tol, RankDecision(n, 1.0))


def span(columns, tol: float = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of the column space.

    Rank is decided by column-pivoted QR with threshold ``tol`` relative to the
    largest column norm; the pivot order fixes the returned basis.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = _as_matrix(columns)
    n, m = a.shape
    if m == 0 or n == 0:
        return zero(n, tol)
    q, r, _ = sla.qr(a, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    top = diag[0] if diag.size else 0.0
    if top == 0.0:
        return zero(n, tol)
    rel = diag / top
    rank = int(np.sum(rel > tol))
    decision = RankDecision(
        rank,
        float(rel[rank - 1]) if rank > 0 else None,
        float(rel[rank]) if rank < rel.size else None,
    )
    return Subspace(q[:, :rank], tol, decision)


def _null_space(m: np.ndarray, threshold: float, tol: float) -> Subspace:
    """Right kernel of ``m``: singular values ``<= threshold`` count as zero."""
    n = m.shape[1]
    if m.shape[0] == 0:
        return full(n, tol)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    svals = np.zeros(n)
    svals[: s.size] = s
    mask = svals <= threshold
    ker = vh.conj().T[:, mask]
    kept = svals[~mask]
    dropped = svals[mask]
    decision = RankDecision(
        int(mask.sum()),
        float(dropped.max()) if dropped.size else None,
        float(kept.min()) if kept.size else None,
    )
    return Subspace(ker, tol, decision)


def kernel(matrix, tol: float = DEFAULT_TOL) -> Subspace:
    """Kernel with singular-value threshold ``tol * max(1, s_max)``."""
    m = _as_matrix(matrix)
    smax = np.linalg.norm(m, 2) if m.size else 0.0
    return _null_space(m, tol * max(1.0, smax), tol)


def intersect(a: Subspace, b: Subspace) -> Subspace:
    """``a ∩ b`` as the common kernel of the two complementary projectors."""
    _check_same_ambient(a, b)
    tol = max(a.tol, b.tol)
    n = a.ambient_dim
    eye = np.eye(n)
    stacked = np.vstack([eye - a.projector(), eye - b.projector()])
    ker = _null_space(stacked, tol, tol)
    # re-orthonormalise via span so the basis convention matches span()
    out = span(ker.basis, tol) if ker.dim else zero(n, tol)
    return Subspace(out.basis, tol, ker.decision)


def subspace_sum(a: Subspace, b: Subspace) -> Subspace:
    _check_same_ambient(a, b)
    tol = max(a.tol, b.tol)
    return span(np.hstack([a.basis, b.basis]), tol)


def conjugate(a: Subspace) -> Subspace:
    return Subspace(a.basis.conj(), a.tol, a.decision)


def annihilator(a: Subspace) -> Subspace:
    """Covectors ``α`` with ``αᵀ v = 0`` for all ``v`` in ``a`` (bilinear, no conjugation)."""
    if a.dim == 0:
        return full(a.ambient_dim, a.tol)
    return _null_space(a.basis.T, a.tol, a.tol)


def apply(matrix, a: Subspace) -> Subspace:
    m = _as_matrix(matrix)
    if m.shape[1] != a.ambient_dim:
        raise DimensionError(f"map has {m.shape[1]} columns, subspace lives in C^{a.ambient_dim}")
    if a.dim == 0:
        return zero(m.shape[0], a.tol)
    return span(m @ a.basis, a.tol)


def preimage(matrix, a: Subspace) -> Subspace:
    """``{x : M x ∈ a}``."""
    m = _as_matrix(matrix)
    if m.shape[0] != a.ambient_dim:
        raise DimensionError(f"map has {m.shape[0]} rows, subspace lives in C^{a.ambient_dim}")
    comp = np.eye(a.ambient_dim) - a.projector()
    return kernel(comp @ m, a.tol)


def principal_angles(a: Subspace, b: Subspace) -> np.ndarray:
    _check_same_ambient(a, b)
    if a.dim == 0 or b.dim == 0:
        return np.zeros(0)
    return sla.subspace_angles(a.basis, b.basis)


def equal_subspaces(a: Subspace, b: Subspace, tol: float | None = None) -> tuple[bool, float]:
    """Equality up to ``tol`` in the largest principal angle.

    Returns ``(verdict, largest_angle)``; differing dimensions give ``pi/2``.
    """
    _check_same_ambient(a, b)
    tol = max(a.tol, b.tol) if tol is None else tol
    if a.dim != b.dim:
        return False, float(np.pi / 2)
    if a.dim == 0:
        return True, 0.0
    angle = float(np.max(principal_angles(a, b)))
    return angle < tol, angle
