"""Linear generalized complex structures on a real vector space ``V = R^d``.

Coordinates on ``V + V*`` put the ``d`` vector slots first and the ``d``
covector slots last.  The complexification ``V ⊗ C`` is modelled by complex
coordinate vectors and conjugation is entrywise.

The split pairing ``<A + ξ, B + η> = (ξ(B) + η(A)) / 2`` has matrix
``G = ½ [[0, I], [I, 0]]`` and is extended *bilinearly* to complex vectors:
isotropy tests use ``xᵀ G y``.  Hermitian products only appear inside
:mod:`gcverify.subspace` for orthonormalisation.

Two-forms and σ are stored as bilinear-form matrices: ``σ(u, v) = uᵀ S v``
and the covector ``σ(u) = σ(u, ·)`` has components ``Sᵀ u``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import subspace as ss
from .subspace import DEFAULT_TOL, Subspace

J0 = np.array([[0.0, -1.0], [1.0, 0.0]])
"""Standard complex structure on ``R^2 = C`` in coordinates ``(x, y)``, ``z = x + iy``."""

OMEGA0 = np.array([[0.0, -1.0], [1.0, 0.0]])
"""Matrix ``W`` of ``A ↦ ι_A ω0`` for ``ω0 = dp1 ∧ dp2`` (so ``ι_{∂1} ω0 = dp2``)."""


class InvalidStructure(ValueError):
    """A matrix or subspace fails one of the structural checks."""


def pairing_matrix(d: int) -> np.ndarray:
    z = np.zeros((d, d))
    i = np.eye(d)
    return 0.5 * np.block([[z, i], [i, z]])


def isotropy_residual(sub: Subspace) -> float:
    d = sub.ambient_dim // 2
    if sub.dim == 0:
        return 0.0
    b = sub.basis
    return float(np.linalg.norm(b.T @ pairing_matrix(d) @ b, 2))


def rho(vectors: np.ndarray) -> np.ndarray:
    """Vector part of columns in ``V + V*``."""
    d = vectors.shape[0] // 2
    return vectors[:d]


def rho_star(vectors: np.ndarray) -> np.ndarray:
    d = vectors.shape[0] // 2
    return vectors[d:]


# ---------------------------------------------------------------------------
# structures


@dataclass(frozen=True)
class Certificate:
    square_residual: float
    orthogonality_residual: float
    tol: float

    @property
    def valid(self) -> bool:
        return self.square_residual < self.tol and self.orthogonality_residual < self.tol


def validate(J, tol: float = DEFAULT_TOL) -> Certificate:
    """Residuals of ``J² + I`` and ``Jᵀ G J − G`` (spectral norms).

    Never raises on an invalid structure; inspect ``Certificate.valid``.
    """
    J = np.asarray(J)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        raise ValueError("J must be square")
    if J.shape[0] % 2:
        raise ValueError("J must act on V + V*, an even-dimensional space")
    if np.iscomplexobj(J):
        if np.max(np.abs(J.imag), initial=0.0) > tol:
            raise ValueError("J must be real")
        J = J.real
    d = J.shape[0] // 2
    g = pairing_matrix(d)
    sq = float(np.linalg.norm(J @ J + np.eye(2 * d), 2))
    orth = float(np.linalg.norm(J.T @ g @ J - g, 2))
    return Certificate(sq, orth, tol)


@dataclass(frozen=True, eq=False)
class LinearGCStructure:
    """A validated automorphism ``J`` of ``V + V*``."""

    J: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        J = np.array(self.J, dtype=float, copy=True)
        cert = validate(J, self.tol)
        if not cert.valid:
            raise InvalidStructure(
                f"not a linear GC structure: |J²+I|={cert.square_residual:.3g}, "
                f"|JᵀGJ-G|={cert.orthogonality_residual:.3g}")
        J.setflags(write=False)
        object.__setattr__(self, "J", J)

    @property
    def d(self) -> int:
        return self.J.shape[0] // 2

    def certificate(self) -> Certificate:
        return validate(self.J, self.tol)

    def eigenbundle(self) -> Subspace:
        return eigenbundle(self.J, self.tol)


def from_complex_structure(jc) -> np.ndarray:
    """``diag(−J, Jᵀ)`` for a complex structure ``J`` on ``V``."""
    jc = np.asarray(jc, dtype=float)
    d = jc.shape[0]
    z = np.zeros((d, d))
    return np.block([[-jc, z], [z, jc.T]])


def from_symplectic(w) -> np.ndarray:
    """``[[0, −W⁻¹], [W, 0]]`` where ``W`` is the matrix of ``A ↦ ι_A ω``."""
    w = np.asarray(w, dtype=float)
    return np.block([[np.zeros_like(w), -np.linalg.inv(w)], [w, np.zeros_like(w)]])


def complex_model(n: int, tol: float = DEFAULT_TOL) -> LinearGCStructure:
    """``C^n`` with its standard complex structure."""
    return LinearGCStructure(from_complex_structure(np.kron(np.eye(n), J0)), tol)


def symplectic_model(m: int, tol: float = DEFAULT_TOL) -> LinearGCStructure:
    """``(R^{2m}, ω0)``."""
    return LinearGCStructure(from_symplectic(np.kron(np.eye(m), OMEGA0)), tol)


def product_structure(a: LinearGCStructure, b: LinearGCStructure) -> LinearGCStructure:
    """Product structure on ``V1 × V2``, coordinates ``(V1, V2, V1*, V2*)``."""
    d1, d2 = a.d, b.d
    big = np.zeros((2 * (d1 + d2),) * 2)
    big[: 2 * d1, : 2 * d1] = a.J
    big[2 * d1:, 2 * d1:] = b.J
    # (V1, V1*, V2, V2*) -> (V1, V2, V1*, V2*)
    order = np.r_[0:d1, 2 * d1: 2 * d1 + d2, d1: 2 * d1, 2 * d1 + d2: 2 * (d1 + d2)]
    return LinearGCStructure(big[np.ix_(order, order)], max(a.tol, b.tol))


def standard_model(M: int, N: int, tol: float = DEFAULT_TOL) -> LinearGCStructure:
    """``R^{2M} × C^N`` with the product of ``ω0`` and the standard complex structure."""
    if M < 0 or N < 0 or M + N == 0:
        raise ValueError("need M, N >= 0, not both zero")
    if M == 0:
        return complex_model(N, tol)
    if N == 0:
        return symplectic_model(M, tol)
    return product_structure(symplectic_model(M, tol), complex_model(N, tol))


def b_field(B) -> np.ndarray:
    """The shear ``e^B = [[I, 0], [B, I]]``."""
    B = np.asarray(B, dtype=float)
    d = B.shape[0]
    return np.block([[np.eye(d), np.zeros((d, d))], [B, np.eye(d)]])


def _check_b(B, tol):
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError("B must be square")
    if np.max(np.abs(B + B.T), initial=0.0) > tol:
        raise ValueError("B must be antisymmetric")
    return B


def b_transform_structure(s: LinearGCStructure, B) -> LinearGCStructure:
    """``e^{-B} J e^{B}``; its +i-eigenspace is :func:`b_transform` of ``L``."""
    B = _check_b(B, s.tol)
    return LinearGCStructure(b_field(-B) @ s.J @ b_field(B), s.tol)


# ---------------------------------------------------------------------------
# eigenbundle, type, B-transform


def eigenbundle(J, tol: float = DEFAULT_TOL) -> Subspace:
    """+i-eigenspace ``L`` as the range of ``(I − iJ)/2``."""
    J = J.J if isinstance(J, LinearGCStructure) else np.asarray(J, dtype=float)
    d = J.shape[0] // 2
    proj = 0.5 * (np.eye(2 * d) - 1j * J)
    L = ss.span(proj, tol)
    if L.dim != d:
        raise InvalidStructure(f"eigenprojector has rank {L.dim}, expected {d}")
    return L


def check_maximal_isotropic(L: Subspace) -> dict:
    """Isotropy residual, dimension and transversality ``L ∩ conj(L) = 0``."""
    d = L.ambient_dim // 2
    iso = isotropy_residual(L)
    cap = ss.intersect(L, ss.conjugate(L))
    return {
        "dim": L.dim,
        "maximal": L.dim == d,
        "isotropy_residual": iso,
        "isotropic": iso < L.tol,
        "transversal": cap.dim == 0,
        "valid": L.dim == d and iso < L.tol and cap.dim == 0,
    }


@dataclass(frozen=True)
class TypeInfo:
    k: int
    E: Subspace
    delta: np.ndarray  # real orthonormal basis of Δ, shape (d, d - 2k)


def projection_E(L: Subspace) -> Subspace:
    return ss.span(rho(L.basis), L.tol)


def real_form_of_intersection(E: Subspace) -> np.ndarray:
    """Real orthonormal basis of ``Δ`` with ``E ∩ conj(E) = Δ ⊗ C``."""
    cap = ss.intersect(E, ss.conjugate(E))
    if cap.dim == 0:
        return np.zeros((E.ambient_dim, 0))
    cols = np.hstack([cap.basis.real, cap.basis.imag])
    basis = ss.span(cols, E.tol).basis.real
    if basis.shape[1] != cap.dim:
        raise InvalidStructure("E ∩ conj(E) has no real form of the right dimension")
    return basis


def type_of(L) -> TypeInfo:
    """Type ``k = codim_C ρ(L)`` together with ``E = ρ(L)`` and ``Δ``."""
    if isinstance(L, LinearGCStructure):
        L = L.eigenbundle()
    d = L.ambient_dim // 2
    E = projection_E(L)
    delta = real_form_of_intersection(E)
    k = d - E.dim
    if delta.shape[1] != d - 2 * k:
        raise InvalidStructure(
            f"dim Δ = {delta.shape[1]} inconsistent with type {k} on R^{d}")
    return TypeInfo(k, E, delta)


def b_transform(L: Subspace, B, tol: float | None = None) -> Subspace:
    """``L_B = {A + ξ − B(A, ·)}`` with ``B(A, ·) = B @ A``, i.e. ``e^{-B} L``."""
    tol = L.tol if tol is None else tol
    B = _check_b(B, tol)
    return ss.apply(b_field(-B), L)


# ---------------------------------------------------------------------------
# (E, σ) presentations


def isotropic_from(E_basis: np.ndarray, S: np.ndarray, tol: float = DEFAULT_TOL,
                   extension=None) -> Subspace:
    """``L(E, σ) = {A + ξ : A ∈ E, ξ|_E = σ(A)}``.

    ``E_basis`` must have orthonormal columns; ``S[a, b] = σ(e_a, e_b)``.
    Off ``E`` the covector is zero-extended unless ``extension`` is given:
    its columns, with their restriction to ``E`` removed, are added to the
    ``ξ``.  The result does not depend on the extension.
    """
    q = np.asarray(E_basis, dtype=complex)
    d, m = q.shape
    S = np.asarray(S, dtype=complex).reshape(m, m)
    # ξ_a = conj(Q) S[a, :] gives ξ_aᵀ Q = S[a, :] because QᴴQ = I
    xi = q.conj() @ S.T
    if extension is not None:
        ext = np.asarray(extension, dtype=complex)
        # keep only the part vanishing on E, so ξ|_E = σ(A) is untouched
        xi = xi + ext - q.conj() @ (q.T @ ext)
    ann = ss.annihilator(Subspace(q, tol)).basis if m else np.eye(d, dtype=complex)
    top = np.hstack([q, np.zeros((d, ann.shape[1]), dtype=complex)])
    bottom = np.hstack([xi, ann])
    return ss.span(np.vstack([top, bottom]), tol)


@dataclass(frozen=True, eq=False)
class IsotropicPresentation:
    """``L = L(E, σ)`` plus the derived ``Δ``, ``Ω_Δ`` and Poisson structure ``P``.

    ``sigma`` is expressed on the orthonormal basis ``E.basis`` and
    ``omega_delta`` on the real orthonormal basis ``delta``.
    """

    L: Subspace
    E: Subspace
    sigma: np.ndarray
    delta: np.ndarray
    omega_delta: np.ndarray
    poisson: Subspace
    sigma_residual: float
    antisymmetry_residual: float

    @property
    def d(self) -> int:
        return self.L.ambient_dim // 2

    @property
    def k(self) -> int:
        return self.d - self.E.dim

    def rebuild(self) -> Subspace:
        return isotropic_from(self.E.basis, self.sigma, self.L.tol)

    def omega_form(self) -> np.ndarray:
        """``Ω_Δ`` as a ``d × d`` bilinear form on ``V`` (zero off ``Δ``); independent of the basis of ``Δ``."""
        D = self.delta
        return D @ self.omega_delta @ D.T

    def sigma_on(self, u, v) -> complex:
        """Evaluate ``σ(u, v)`` for vectors ``u, v ∈ E``."""
        q = self.E.basis
        cu = q.conj().T @ np.asarray(u, dtype=complex)
        cv = q.conj().T @ np.asarray(v, dtype=complex)
        return complex(cu @ self.sigma @ cv)


def poisson_structure(delta: np.ndarray, omega: np.ndarray, d: int,
                      tol: float = DEFAULT_TOL, extension=None) -> Subspace:
    """``P = L(Δ ⊗ C, Ω_Δ)``; ``Δ = 0`` gives ``0 + V* ⊗ C``."""
    if delta.shape[1] == 0:
        return Subspace(np.vstack([np.zeros((d, d)), np.eye(d)]), tol)
    return isotropic_from(delta, omega, tol, extension)


def extract_presentation(L, tol: float | None = None) -> IsotropicPresentation:
    if isinstance(L, LinearGCStructure):
        L = L.eigenbundle()
    tol = L.tol if tol is None else tol
    d = L.ambient_dim // 2
    info = check_maximal_isotropic(L)
    if not info["valid"]:
        raise InvalidStructure(f"L is not a valid GC eigenspace: {info}")
    E = projection_E(L)
    q = E.basis
    A = rho(L.basis)
    Xi = rho_star(L.basis)
    # σ(a_i, q_j) = ξ_i(q_j): Cᵀ S = R with C = Qᴴ A, R = Ξᵀ Q
    C = q.conj().T @ A
    R = Xi.T @ q
    S, *_ = np.linalg.lstsq(C.T, R, rcond=None)
    sigma_res = float(np.linalg.norm(C.T @ S - R, 2))
    anti_res = float(np.linalg.norm(S + S.T, 2))
    if sigma_res > tol * 10 or anti_res > tol * 10:
        raise InvalidStructure(
            f"σ system inconsistent (residual {sigma_res:.3g}, antisymmetry {anti_res:.3g})")
    S = 0.5 * (S - S.T)
    delta = real_form_of_intersection(E)
    k = d - E.dim
    if delta.shape[1] != d - 2 * k:
        raise InvalidStructure("dim Δ does not match the type")
    if delta.shape[1]:
        c = q.conj().T @ delta
        omega = (c.T @ S @ c).imag
        omega = 0.5 * (omega - omega.T)
        smin = np.linalg.svd(omega, compute_uv=False).min()
        if smin < tol * max(1.0, np.abs(omega).max()):
            raise InvalidStructure("Ω_Δ is degenerate on Δ")
    else:
        omega = np.zeros((0, 0))
    P = poisson_structure(delta, omega, d, tol)
    return IsotropicPresentation(L, E, S, delta, omega, P, sigma_res, anti_res)


# ---------------------------------------------------------------------------
# maps


def dirac_pushforward(f, P: Subspace) -> Subspace:
    """``f⋆P = {f(A) + η : A + fᵀη ∈ P}`` for real ``f: V → W``."""
    f = np.asarray(f, dtype=float)
    w, v = f.shape
    if P.ambient_dim != 2 * v:
        raise ss.DimensionError(f"P lives in C^{P.ambient_dim}, map source has dim {v}")
    # T: V + W* -> V + V*, (A, η) -> (A, fᵀη)
    T = np.block([[np.eye(v), np.zeros((v, w))], [np.zeros((v, v)), f.T]])
    S = ss.preimage(T, P)
    # U: V + W* -> W + W*, (A, η) -> (fA, η)
    U = np.block([[f, np.zeros((w, w))], [np.zeros((w, v)), np.eye(w)]])
    return ss.apply(U, S)


@dataclass(frozen=True)
class Verdict:
    ok: bool
    residual: float


@dataclass(frozen=True)
class GCMapReport:
    e_condition: Verdict
    poisson_condition: Verdict

    @property
    def is_gc_map(self) -> bool:
        return self.e_condition.ok and self.poisson_condition.ok


def _presentation(x) -> IsotropicPresentation:
    if isinstance(x, IsotropicPresentation):
        return x
    return extract_presentation(x)


def is_gc_map(f, source, target) -> GCMapReport:
    """Both conditions: ``f(E_V) ⊆ E_W`` and ``f⋆P_V = P_W`` (residuals are angles)."""
    src, tgt = _presentation(source), _presentation(target)
    f = np.asarray(f, dtype=float)
    if f.shape != (tgt.d, src.d):
        raise ss.DimensionError(f"map shape {f.shape} != ({tgt.d}, {src.d})")
    image_e = ss.apply(f, src.E)
    e_ok, e_res = tgt.E.contains(image_e)
    pushed = dirac_pushforward(f, src.poisson)
    p_ok, p_res = ss.equal_subspaces(pushed, tgt.poisson)
    return GCMapReport(Verdict(e_ok, e_res), Verdict(p_ok, p_res))


def _real_basis(V_prime, tol) -> np.ndarray:
    if isinstance(V_prime, Subspace):
        if not V_prime.is_real():
            raise ValueError("V' must be a real subspace")
        return V_prime.real_basis()
    m = np.asarray(V_prime)
    if np.iscomplexobj(m):
        sub = ss.span(m, tol)
        if not sub.is_real():
            raise ValueError("V' must be a real subspace")
        return sub.real_basis()
    return ss.span(m.astype(float), tol).basis.real


@dataclass(frozen=True)
class InducedStructure:
    L: Subspace               # in coordinates of the real orthonormal basis below
    basis: np.ndarray         # real orthonormal basis of V'
    is_gc_subspace: bool
    maximal: bool


def induced_subspace_structure(V_prime, L: Subspace) -> InducedStructure:
    """Structure ``L_{V'}`` induced on a real subspace ``V' ⊂ V``.

    ``L_{V'} = {ρ(v) + ρ*(v)|_{V'} : v ∈ L ∩ (V' + V*)}``, expressed in the
    coordinates given by the returned real orthonormal basis of ``V'``.
    """
    d = L.ambient_dim // 2
    vb = _real_basis(V_prime, L.tol)
    if vb.shape[0] != d:
        raise ss.DimensionError("V' must live in V")
    m = vb.shape[1]
    ambient = np.block([[vb, np.zeros((d, d))], [np.zeros((d, m)), np.eye(d)]])
    cap = ss.intersect(L, ss.span(ambient, L.tol))
    restrict = np.block([[vb.T, np.zeros((m, d))], [np.zeros((m, d)), vb.T]])
    Lp = ss.apply(restrict, cap)
    transversal = ss.intersect(Lp, ss.conjugate(Lp)).dim == 0
    return InducedStructure(Lp, vb, transversal, Lp.dim == m)


def transport(L: Subspace, iso) -> Subspace:
    """Push ``L`` forward along a linear isomorphism ``V → V'`` (vectors by ``iso``, covectors by ``iso^{-T}``)."""
    iso = np.asarray(iso, dtype=float)
    inv_t = np.linalg.inv(iso).T
    z = np.zeros_like(iso)
    return ss.apply(np.block([[iso, z], [z, inv_t]]), L)


@dataclass(frozen=True)
class ImageStructure:
    induced: InducedStructure
    gc_map: GCMapReport
    type_source: int
    type_target: int
    type_image: int | None
    dim_source: int
    dim_target: int
    same_projection: bool | None

    @property
    def jump(self) -> int:
        return self.type_target - self.type_source

    @property
    def jump_formula_holds(self) -> bool:
        return 2 * self.jump == self.dim_target - self.dim_source

    @property
    def ok(self) -> bool:
        """GC map whose image is a GC subspace and whose type jump matches."""
        return self.gc_map.is_gc_map and self.induced.is_gc_subspace and self.jump_formula_holds


def image_structure(f, L_V, L_W) -> ImageStructure:
    """Induced structure on ``f(V) ⊂ W`` and the type-jump check for an injective ``f``.

    Also compares the structure induced on ``f(V)`` with ``L_V`` transported by
    ``f``: equal type and equal ``ρ`` (they agree up to a B-transform, which is
    not searched for).
    """
    if isinstance(L_V, LinearGCStructure):
        L_V = L_V.eigenbundle()
    if isinstance(L_W, LinearGCStructure):
        L_W = L_W.eigenbundle()
    f = np.asarray(f, dtype=float)
    dv, dw = L_V.ambient_dim // 2, L_W.ambient_dim // 2
    if f.shape != (dw, dv):
        raise ss.DimensionError(f"map shape {f.shape} != ({dw}, {dv})")
    if ss.span(f, L_V.tol).dim != dv:
        raise ValueError("f is not injective")
    report = is_gc_map(f, L_V, L_W)
    induced = induced_subspace_structure(ss.span(f, L_V.tol), L_W)
    tv, tw = type_of(L_V).k, type_of(L_W).k
    t_img = same = None
    if induced.is_gc_subspace:
        t_img = type_of(induced.L).k
        moved = transport(L_V, induced.basis.T @ f)
        same = ss.equal_subspaces(projection_E(moved), projection_E(induced.L))[0]
    return ImageStructure(induced, report, tv, tw, t_img, dv, dw, same)
