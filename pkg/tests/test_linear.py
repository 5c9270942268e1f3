import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gcverify import linear as gl
from gcverify import subspace as ss
from fixtures import fixture_models, gh_embeddings, non_examples, random_b
from oracles import exact_type


MODELS = fixture_models()


# -- validate / eigenbundle --------------------------------------------------

def test_complex_model_on_r2_exact_form():
    J = gl.complex_model(1).J
    expected = np.block([[-gl.J0, np.zeros((2, 2))], [np.zeros((2, 2)), gl.J0.T]])
    assert np.array_equal(J, expected)
    cert = gl.validate(J)
    assert cert.valid and cert.square_residual == 0 and cert.orthogonality_residual == 0


def test_symplectic_model_valid():
    assert gl.validate(gl.symplectic_model(1).J).valid


def test_identity_is_invalid_not_an_exception():
    cert = gl.validate(np.eye(4))
    assert not cert.valid and cert.square_residual == pytest.approx(2.0)
    with pytest.raises(gl.InvalidStructure):
        gl.LinearGCStructure(np.eye(4))


def test_odd_and_non_square_rejected():
    with pytest.raises(ValueError):
        gl.validate(np.eye(3))
    with pytest.raises(ValueError):
        gl.validate(np.zeros((2, 4)))


def test_eigenbundle_rank_defect_is_invalid_structure():
    with pytest.raises(gl.InvalidStructure):
        gl.eigenbundle(np.eye(4))


@pytest.mark.parametrize("name", sorted(MODELS))
def test_eigenbundle_properties(name):
    s = MODELS[name]
    L = s.eigenbundle()
    info = gl.check_maximal_isotropic(L)
    assert info["valid"] and L.dim == s.d
    assert gl.isotropy_residual(L) < 1e-12
    P = 0.5 * (np.eye(2 * s.d) - 1j * s.J)
    assert np.allclose(P @ P, P) and np.allclose(s.J @ P, 1j * P)


def test_complex_eigenbundle_is_t01_plus_dual_t10():
    L = gl.complex_model(1).eigenbundle()
    # z = x + iy: ∂/∂z̄ ∝ (1, i) and dz ∝ (1, i) as a covector
    expected = ss.span(np.array([[1, 0], [1j, 0], [0, 1], [0, 1j]]))
    assert ss.equal_subspaces(L, expected)[0]


def test_symplectic_eigenbundle_is_graph_of_minus_i_omega():
    L = gl.symplectic_model(1).eigenbundle()
    A = np.eye(2)
    expected = ss.span(np.vstack([A, -1j * gl.OMEGA0 @ A]))
    assert ss.equal_subspaces(L, expected)[0]


# -- type --------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(MODELS))
def test_type_matches_exact_oracle(name):
    s = MODELS[name]
    t = gl.type_of(s)
    assert t.k == exact_type(s.J)
    assert 0 <= t.k <= s.d // 2
    assert t.delta.shape[1] == s.d - 2 * t.k


@pytest.mark.parametrize("n", [1, 2, 3])
def test_type_complex_and_symplectic(n):
    assert gl.type_of(gl.complex_model(n)).k == n
    assert gl.type_of(gl.symplectic_model(n)).k == 0


@pytest.mark.parametrize("a,b", [("C1", "S1"), ("S1", "S2"), ("C1", "C2"), ("Y11", "C2"), ("Y21", "Y12")])
def test_type_additive_over_products(a, b):
    p = gl.product_structure(MODELS[a], MODELS[b])
    assert gl.validate(p.J).valid
    assert gl.type_of(p).k == gl.type_of(MODELS[a]).k + gl.type_of(MODELS[b]).k


def test_complex_times_symplectic_is_8x8_type_1():
    p = MODELS["CxS"]
    assert p.J.shape == (8, 8) and gl.type_of(p).k == 1


@pytest.mark.parametrize("M,N", [(0, 1), (1, 0), (1, 1), (2, 3)])
def test_standard_model_type(M, N):
    assert gl.type_of(gl.standard_model(M, N)).k == N


def test_standard_model_rejects_empty():
    with pytest.raises(ValueError):
        gl.standard_model(0, 0)


# -- B-transforms --------------------------------------------------------------

def test_zero_b_is_identity():
    L = MODELS["Y11"].eigenbundle()
    assert ss.equal_subspaces(gl.b_transform(L, np.zeros((4, 4))), L)[0]


def test_b_must_be_antisymmetric():
    with pytest.raises(ValueError):
        gl.b_transform(MODELS["Y11"].eigenbundle(), np.eye(4))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(sorted(MODELS)), st.integers(0, 2 ** 31 - 1))
def test_b_transform_invariants(name, seed):
    s = MODELS[name]
    B = random_b(s.d, np.random.default_rng(seed))
    L = s.eigenbundle()
    LB = gl.b_transform(L, B)
    assert gl.check_maximal_isotropic(LB)["valid"]
    assert gl.type_of(LB).k == gl.type_of(L).k
    ok, ang = ss.equal_subspaces(gl.projection_E(LB), gl.projection_E(L))
    assert ok and ang < 1e-9
    # structure-level transform has L_B as its eigenspace, and −B undoes B
    assert ss.equal_subspaces(gl.b_transform_structure(s, B).eigenbundle(), LB, 1e-8)[0]
    assert ss.equal_subspaces(gl.b_transform(LB, -B), L, 1e-8)[0]


# -- presentations ----------------------------------------------------------

@pytest.mark.parametrize("name", sorted(MODELS))
def test_presentation_roundtrip(name):
    pr = gl.extract_presentation(MODELS[name].eigenbundle())
    ok, ang = ss.equal_subspaces(pr.rebuild(), pr.L, 1e-8)
    assert ok, ang
    assert np.allclose(pr.sigma, -pr.sigma.T)
    assert pr.poisson.dim == pr.d
    assert gl.isotropy_residual(pr.poisson) < 1e-12


@pytest.mark.parametrize("seed", range(20))
def test_presentation_roundtrip_random_b(seed):
    rng = np.random.default_rng(seed)
    name = sorted(MODELS)[seed % len(MODELS)]
    s = MODELS[name]
    L = gl.b_transform(s.eigenbundle(), random_b(s.d, rng))
    pr = gl.extract_presentation(L)
    assert ss.equal_subspaces(pr.rebuild(), L, 1e-8)[0]


def test_complex_presentation_has_zero_delta():
    pr = gl.extract_presentation(gl.complex_model(1).eigenbundle())
    assert pr.delta.shape == (2, 0) and pr.k == 1
    zero_plus_dual = ss.span(np.vstack([np.zeros((2, 2)), np.eye(2)]))
    assert ss.equal_subspaces(pr.poisson, zero_plus_dual)[0]


def test_product_presentation_delta_is_symplectic_factor():
    pr = gl.extract_presentation(MODELS["Y11"].eigenbundle())
    assert ss.equal_subspaces(ss.span(pr.delta), ss.span(np.eye(4)[:, :2]))[0]
    # the basis-free form is the same in every model carrying a symplectic plane
    sym = gl.extract_presentation(gl.symplectic_model(1).eigenbundle()).omega_form()
    assert np.allclose(pr.omega_form()[:2, :2], sym)
    assert np.allclose(pr.omega_form()[2:, :], 0)
    # literal construction: Im σ on Δ is −ω0 (ω0(e1, e2) = 1)
    assert np.allclose(sym, -gl.OMEGA0.T)


def test_poisson_structure_is_extension_independent():
    pr = gl.extract_presentation(MODELS["Y21"].eigenbundle())
    rng = np.random.default_rng(3)
    ext = rng.standard_normal((pr.d, pr.delta.shape[1]))
    other = gl.poisson_structure(pr.delta, pr.omega_delta, pr.d, extension=ext)
    assert ss.equal_subspaces(other, pr.poisson, 1e-8)[0]


def test_sigma_on_is_antisymmetric():
    pr = gl.extract_presentation(MODELS["S1"].eigenbundle())
    u, v = pr.E.basis[:, 0], pr.E.basis[:, 1]
    assert pr.sigma_on(u, v) == pytest.approx(-pr.sigma_on(v, u))


def test_random_sigma_gives_isotropic_subspace():
    rng = np.random.default_rng(5)
    q = ss.span(rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))).basis
    S = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    L = gl.isotropic_from(q, S - S.T)
    assert L.dim == 4 and gl.isotropy_residual(L) < 1e-12


# -- pushforward and GC maps ------------------------------------------------

def test_pushforward_identity():
    P = gl.extract_presentation(MODELS["Y11"].eigenbundle()).poisson
    assert ss.equal_subspaces(gl.dirac_pushforward(np.eye(4), P), P)[0]


def test_pushforward_zero_poisson_by_surjection():
    P = ss.span(np.vstack([np.zeros((3, 3)), np.eye(3)]))
    f = np.array([[1.0, 2.0, 0.0], [0.0, 1.0, 1.0]])
    expected = ss.span(np.vstack([np.zeros((2, 2)), np.eye(2)]))
    assert ss.equal_subspaces(gl.dirac_pushforward(f, P), expected)[0]


def test_pushforward_by_swap_permutes_graph():
    P = gl.extract_presentation(MODELS["S1"].eigenbundle()).poisson
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    moved = ss.apply(np.block([[swap, np.zeros((2, 2))], [np.zeros((2, 2)), swap]]), P)
    assert ss.equal_subspaces(gl.dirac_pushforward(swap, P), moved)[0]


@pytest.mark.parametrize("seed", range(5))
def test_pushforward_composition(seed):
    rng = np.random.default_rng(seed)
    P = gl.extract_presentation(MODELS["Y21"].eigenbundle()).poisson
    f = rng.standard_normal((4, 6))
    g = rng.standard_normal((3, 4))
    lhs = gl.dirac_pushforward(g @ f, P)
    rhs = gl.dirac_pushforward(g, gl.dirac_pushforward(f, P))
    assert ss.equal_subspaces(lhs, rhs, 1e-8)[0]


def test_projections_are_gc_maps():
    Y = MODELS["Y11"].eigenbundle()
    pr1 = np.eye(4)[:2]
    pr2 = np.eye(4)[2:]
    assert gl.is_gc_map(pr1, Y, gl.symplectic_model(1).eigenbundle()).is_gc_map
    assert gl.is_gc_map(pr2, Y, gl.complex_model(1).eigenbundle()).is_gc_map


def test_conjugation_fails_e_condition():
    C = gl.complex_model(1).eigenbundle()
    rep = gl.is_gc_map(np.diag([1.0, -1.0]), C, C)
    assert not rep.e_condition.ok and rep.e_condition.residual > 1e-3


def test_scaling_fails_poisson_condition():
    S = gl.symplectic_model(1).eigenbundle()
    rep = gl.is_gc_map(np.diag([1.0, 2.0]), S, S)
    assert rep.e_condition.ok
    assert not rep.poisson_condition.ok and rep.poisson_condition.residual > 1e-3


@pytest.mark.parametrize("name", sorted(MODELS))
def test_identity_is_gc_map(name):
    L = MODELS[name].eigenbundle()
    assert gl.is_gc_map(np.eye(MODELS[name].d), L, L).is_gc_map


def test_gc_map_shape_checked():
    with pytest.raises(ss.DimensionError):
        gl.is_gc_map(np.eye(3), MODELS["Y11"].eigenbundle(), MODELS["Y11"].eigenbundle())


# -- subspaces and images ---------------------------------------------------

def test_induced_on_whole_space():
    L = MODELS["C2"].eigenbundle()
    ind = gl.induced_subspace_structure(np.eye(4), L)
    assert ind.is_gc_subspace and ss.equal_subspaces(ind.L, L)[0]


def test_complex_line_in_c2_is_gc_subspace():
    ind = gl.induced_subspace_structure(np.eye(4)[:, :2], MODELS["C2"].eigenbundle())
    assert ind.is_gc_subspace and ind.maximal


def test_real_line_in_c_is_not_gc_subspace():
    ind = gl.induced_subspace_structure(np.array([[1.0], [0.0]]), MODELS["C1"].eigenbundle())
    assert not ind.is_gc_subspace
    assert ind.maximal  # dim L_V' = dim V' regardless
    assert ind.L.is_real()


def test_non_real_subspace_rejected():
    with pytest.raises(ValueError):
        gl.induced_subspace_structure(ss.span([[1], [1j]]), MODELS["C1"].eigenbundle())


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(sorted(MODELS)), st.integers(0, 2 ** 31 - 1))
def test_induced_structure_always_maximal(name, seed):
    s = MODELS[name]
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, s.d + 1))
    ind = gl.induced_subspace_structure(rng.standard_normal((s.d, k)), s.eigenbundle())
    assert ind.L.dim == k
    assert gl.isotropy_residual(ind.L) < 1e-9


def test_identity_image_has_zero_jump():
    L = MODELS["Y12"].eigenbundle()
    rep = gl.image_structure(np.eye(6), L, L)
    assert rep.ok and rep.jump == 0


@pytest.mark.parametrize("idx", range(10))
def test_gh_embeddings_satisfy_jump_formula(idx):
    f, src, tgt = gh_embeddings()[idx]
    rep = gl.image_structure(f, src.eigenbundle(), tgt.eigenbundle())
    assert rep.gc_map.is_gc_map and rep.induced.is_gc_subspace
    assert 2 * rep.jump == tgt.d - src.d
    assert rep.type_image == rep.type_source and rep.same_projection


@pytest.mark.parametrize("idx", range(5))
def test_non_examples_fail(idx):
    name, f, src, tgt = non_examples()[idx]
    rep = gl.image_structure(f, src.eigenbundle(), tgt.eigenbundle())
    assert not (rep.gc_map.is_gc_map and rep.induced.is_gc_subspace), name
    assert not rep.ok


def test_image_requires_injective():
    L = MODELS["C1"].eigenbundle()
    with pytest.raises(ValueError):
        gl.image_structure(np.zeros((4, 2)), L, MODELS["C2"].eigenbundle())
