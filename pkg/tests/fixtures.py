"""Constructed linear maps between standard models."""

from __future__ import annotations

import numpy as np
import sympy as sp
from scipy.linalg import expm

from gcverify import linear as gl


def realify(h: np.ndarray) -> np.ndarray:
    """Real matrix of a complex-linear map in the ``(x1, y1, x2, y2, ...)`` ordering."""
    h = np.asarray(h, dtype=complex)
    out = np.zeros((2 * h.shape[0], 2 * h.shape[1]))
    for i in range(h.shape[0]):
        for j in range(h.shape[1]):
            a, b = h[i, j].real, h[i, j].imag
            out[2 * i: 2 * i + 2, 2 * j: 2 * j + 2] = [[a, -b], [b, a]]
    return out


def random_symplectic(m: int, rng) -> np.ndarray:
    """``expm(W H)`` with ``H`` symmetric preserves the form with matrix ``W``."""
    W = np.kron(np.eye(m), gl.OMEGA0)
    H = rng.standard_normal((2 * m, 2 * m)) * 0.5
    return expm(W @ (H + H.T))


def embedding(M: int, N1: int, N2: int, rng, coupling: bool = True) -> np.ndarray:
    """``(p, z) ↦ (S p + C z, h z)`` from ``standard_model(M, N1)`` into ``standard_model(M, N2)``."""
    S = random_symplectic(M, rng) if M else np.zeros((0, 0))
    while True:
        h = rng.standard_normal((N2, N1)) + 1j * rng.standard_normal((N2, N1))
        if N1 == 0 or np.linalg.matrix_rank(h) == N1:
            break
    C = rng.standard_normal((2 * M, 2 * N1)) if coupling else np.zeros((2 * M, 2 * N1))
    top = np.hstack([S, C])
    bottom = np.hstack([np.zeros((2 * N2, 2 * M)), realify(h)])
    return np.vstack([top, bottom])


GH_EMBEDDING_SHAPES = [(0, 1, 1), (0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 1, 1),
                       (1, 1, 2), (1, 0, 1), (2, 1, 2), (1, 2, 3), (2, 0, 2)]


def gh_embeddings(seed: int = 0):
    """Ten injective GC maps ``(f, source, target)`` between standard models."""
    rng = np.random.default_rng(seed)
    out = []
    for M, N1, N2 in GH_EMBEDDING_SHAPES:
        f = embedding(M, N1, N2, rng)
        out.append((f, gl.standard_model(M, N1), gl.standard_model(M, N2)))
    return out


def non_examples():
    """Five injective maps that are not GC embeddings, with labels."""
    c_into_y11 = np.array([[0, 0], [0, 0], [1, 0], [0, 1]], dtype=float)
    s1_into_s2 = np.array([[1, 0], [0, 1], [0, 0], [0, 0]], dtype=float)
    conj_into_c2 = np.array([[1, 0], [0, -1], [0, 0], [0, 0]], dtype=float)
    scaled = np.eye(6)[:, :4].copy()
    scaled[:2, :2] = np.diag([1.0, 2.0])
    p_to_z = np.eye(6)[:, :4].copy()
    p_to_z[2, 0] = 1.0  # Re z picks up p1
    return [
        ("C into R2 x C", c_into_y11, gl.complex_model(1), gl.standard_model(1, 1)),
        ("R2 into R4 symplectic", s1_into_s2, gl.symplectic_model(1), gl.symplectic_model(2)),
        ("conjugation into C2", conj_into_c2, gl.complex_model(1), gl.complex_model(2)),
        ("scaled symplectic part", scaled, gl.standard_model(1, 1), gl.standard_model(1, 2)),
        ("p into z coupling", p_to_z, gl.standard_model(1, 1), gl.standard_model(1, 2)),
    ]


def random_b(d: int, rng, scale: float = 1.0) -> np.ndarray:
    A = rng.standard_normal((d, d)) * scale
    return A - A.T


def fixture_models():
    """Complex, symplectic and product models used across the suites."""
    models = {f"C{n}": gl.complex_model(n) for n in (1, 2, 3)}
    models.update({f"S{m}": gl.symplectic_model(m) for m in (1, 2)})
    for M, N in [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1)]:
        models[f"Y{M}{N}"] = gl.standard_model(M, N)
    models["CxS"] = gl.product_structure(gl.complex_model(1), gl.symplectic_model(1))
    return models


# -- GH corpus on the model (1, 1): coordinates (p1, p2, x, y), z = x + iy

P1, P2, XX, YY = sp.symbols("p1 p2 x y", real=True)
Z = XX + sp.I * YY

CORPUS = {
    "z^3-2z": Z ** 3 - 2 * Z,
    "conj z": sp.conjugate(Z),
    "|z|^2": Z * sp.conjugate(Z),
    "exp z": sp.exp(Z),
    "p1": P1 + 0 * Z,
    "z p2": Z * P2,
    "1/(z-3)": 1 / (Z - 3),
    "sin z": sp.sin(Z),
    "re z": XX + 0 * P1,
    "z^2+5": Z ** 2 + 5,
    "p1^2+p2^2": P1 ** 2 + P2 ** 2,
    "|z|^2+z": Z * sp.conjugate(Z) + Z,
}


def corpus_function(expr):
    fn = sp.lambdify([P1, P2, XX, YY], expr, "numpy")
    return lambda v: complex(fn(*v))


def exact_gh_residuals(expr, pts):
    """Max of ``|∂f/∂z̄|`` and of the leaf derivatives over ``pts``, from symbolic derivatives."""
    dzb = sp.Rational(1, 2) * (sp.diff(expr, XX) + sp.I * sp.diff(expr, YY))
    f_zb = corpus_function(dzb)
    f_p1, f_p2 = corpus_function(sp.diff(expr, P1)), corpus_function(sp.diff(expr, P2))
    zb = max(abs(f_zb(x)) for x in pts)
    lf = max(max(abs(f_p1(x)), abs(f_p2(x))) for x in pts)
    return zb, lf
