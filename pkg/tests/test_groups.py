import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sublorentz import (
    AbelianGroup,
    CarnotAlgebra,
    CarnotGroup,
    EuclideanMetric,
    HyperbolicPlane,
    InvalidPointError,
    LeftInvariantQuadratic,
    LobachevskyMetric,
    UnsupportedStepError,
    bch_log_product,
    exp_step,
    first_layer_projection,
    format_structure_constants,
    group_inv,
    group_mul,
    heisenberg_algebra,
    minkowski_area_algebra,
    parse_structure_constants,
    riemannian_norm,
)
from sublorentz.groups import bch_jacobians, left_translation_jacobian


def filiform4():
    return CarnotAlgebra.from_brackets(
        (2, 1, 1, 1), {(0, 1): {2: 1.0}, (0, 2): {3: 1.0}, (0, 3): {4: 1.0}})


ALGEBRAS = [heisenberg_algebra(), minkowski_area_algebra(2), filiform4()]


# ---------------------------------------------------------------------------
# Carnot algebra construction
# ---------------------------------------------------------------------------


def test_heisenberg_layers():
    alg = heisenberg_algebra()
    assert alg.layer_dims == (2, 1)
    assert alg.step == 2
    assert np.allclose(alg.bracket([1, 0, 0], [0, 1, 0]), [0, 0, 1])


def test_grading_violation_rejected():
    # [e0, e1] landing back in layer 1 breaks the grading
    with pytest.raises(ValueError, match="grading"):
        CarnotAlgebra.from_brackets((2, 1), {(0, 1): {0: 1.0}})


def test_jacobi_violation_rejected():
    # step-3 table with [e0,e1]=e2, [e0,e2]=e3, [e1,e2]=e3: Jacobi forces
    # the cyclic sum [e0,[e1,e2]] + [e1,[e2,e0]] + [e2,[e0,e1]] = -e4... != 0
    with pytest.raises(ValueError, match="Jacobi"):
        CarnotAlgebra.from_brackets(
            (2, 1, 1, 1), {(0, 1): {2: 1.0}, (0, 2): {3: 1.0}, (0, 3): {4: 1.0},
                           (1, 2): {3: 1.0}})


def test_non_generating_first_layer_rejected():
    # second layer never reached from the first
    with pytest.raises(ValueError, match="span"):
        CarnotAlgebra((2, 1), np.zeros((3, 3, 3)))


def test_structure_constants_round_trip():
    alg = minkowski_area_algebra(2)
    text = format_structure_constants(alg)
    again = parse_structure_constants(text)
    assert again.layer_dims == alg.layer_dims
    assert np.allclose(again.table, alg.table)


def test_structure_file_parse_errors():
    with pytest.raises(ValueError, match="header"):
        parse_structure_constants("0 1 2 1.0\n")
    with pytest.raises(ValueError, match="duplicate"):
        parse_structure_constants("layers: 2 1\n0 1 2 1.0\n0 1 2 1.0\n")
    with pytest.raises(ValueError, match="mirror"):
        parse_structure_constants("layers: 2 1\n0 1 2 1.0\n1 0 2 1.0\n")
    with pytest.raises(ValueError, match="out of range"):
        parse_structure_constants("layers: 2 1\n0 1 7 1.0\n")


def test_structure_file_comments_and_mirror():
    alg = parse_structure_constants(
        "# heisenberg\nlayers: 2 1\n0 1 2 1.0  # the only bracket\n")
    assert np.allclose(alg.table, heisenberg_algebra().table)


# ---------------------------------------------------------------------------
# BCH product
# ---------------------------------------------------------------------------


def test_bch_heisenberg_half_term():
    alg = heisenberg_algebra()
    z = bch_log_product(alg, [1, 0, 0], [0, 1, 0])
    assert np.allclose(z, [1.0, 1.0, 0.5])


def test_bch_commuting_elements():
    alg = heisenberg_algebra()
    a, b = np.array([1.0, 0, 2.0]), np.array([2.0, 0, 5.0])  # parallel e0 parts
    assert np.allclose(bch_log_product(alg, a, b), a + b)


def test_bch_inverse():
    alg = filiform4()
    a = np.array([0.3, -1.2, 0.7, 0.1, -2.0])
    assert np.allclose(bch_log_product(alg, a, -a), 0.0, atol=1e-14)


def test_bch_step_cap():
    fil5 = CarnotAlgebra.from_brackets(
        (2, 1, 1, 1, 1),
        {(0, 1): {2: 1.0}, (0, 2): {3: 1.0}, (0, 3): {4: 1.0}, (0, 4): {5: 1.0}})
    with pytest.raises(UnsupportedStepError):
        bch_log_product(fil5, np.zeros(6), np.zeros(6))


@pytest.mark.parametrize("alg", ALGEBRAS, ids=lambda a: str(a.layer_dims))
def test_bch_associativity_bulk(alg, rng):
    for _ in range(1000):
        a, b, c = rng.normal(size=(3, alg.dim))
        lhs = bch_log_product(alg, bch_log_product(alg, a, b), c)
        rhs = bch_log_product(alg, a, bch_log_product(alg, b, c))
        assert np.abs(lhs - rhs).max() <= 1e-10


def test_step2_bch_is_half_bracket(rng):
    alg = minkowski_area_algebra(3)
    for _ in range(500):
        a, b = rng.normal(size=(2, alg.dim))
        z = bch_log_product(alg, a, b)
        assert np.abs(z - (a + b) - 0.5 * alg.bracket(a, b)).max() <= 1e-14


def test_first_layer_of_bch_is_additive(rng):
    for alg in ALGEBRAS:
        m1 = alg.layer_dims[0]
        for _ in range(300):
            a, b = rng.normal(size=(2, alg.dim))
            z = bch_log_product(alg, a, b)
            assert np.abs(z[:m1] - a[:m1] - b[:m1]).max() <= 1e-14


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3),
       st.floats(-3, 3))
def test_bch_one_parameter_subgroup_hypothesis(coords, t):
    alg = heisenberg_algebra()
    a = np.array(coords)
    # exp(a) exp(t a) = exp((1 + t) a): brackets of parallel vectors vanish
    assert np.allclose(bch_log_product(alg, a, t * a), (1 + t) * a, atol=1e-12)


def test_bch_jacobians_match_finite_differences(rng):
    for alg in ALGEBRAS:
        a, b = rng.normal(size=(2, alg.dim))
        Da, Db = bch_jacobians(alg, a, b)
        eps = 1e-6
        for i in range(alg.dim):
            d = np.zeros(alg.dim)
            d[i] = eps
            col_a = (bch_log_product(alg, a + d, b)
                     - bch_log_product(alg, a - d, b)) / (2 * eps)
            col_b = (bch_log_product(alg, a, b + d)
                     - bch_log_product(alg, a, b - d)) / (2 * eps)
            assert np.abs(Da[:, i] - col_a).max() <= 1e-8
            assert np.abs(Db[:, i] - col_b).max() <= 1e-8


# ---------------------------------------------------------------------------
# group operations
# ---------------------------------------------------------------------------


def test_hyperbolic_identity_and_product():
    hyp = HyperbolicPlane()
    assert np.allclose(group_mul(hyp, [0, 1], [0.7, 2.2]), [0.7, 2.2])
    assert np.allclose(group_mul(hyp, [1, 2], [3, 4]), [7, 8])


def test_hyperbolic_inverse():
    hyp = HyperbolicPlane()
    assert np.allclose(group_inv(hyp, [1, 2]), [-0.5, 0.5])
    p = np.array([0.3, 1.7])
    assert np.allclose(group_mul(hyp, p, group_inv(hyp, p)), [0, 1], atol=1e-12)


def test_hyperbolic_invalid_point():
    hyp = HyperbolicPlane()
    with pytest.raises(InvalidPointError):
        group_mul(hyp, [0, -1], [0, 1])


def test_abelian_and_carnot_inverse(heis, rng):
    assert np.allclose(group_inv(AbelianGroup(3), [1, 2, 3]), [-1, -2, -3])
    p = rng.normal(size=3)
    assert np.allclose(group_mul(heis, p, group_inv(heis, p)), 0.0, atol=1e-12)


@pytest.mark.parametrize("model", [AbelianGroup(3), HyperbolicPlane(),
                                   CarnotGroup(heisenberg_algebra())],
                         ids=["abelian", "hyperbolic", "carnot"])
def test_associativity_random_triples(model, rng):
    for _ in range(50):
        if isinstance(model, HyperbolicPlane):
            pts = np.column_stack([rng.normal(size=3),
                                   np.exp(rng.normal(size=3))])
        else:
            pts = rng.normal(size=(3, model.point_dim))
        p, q, r = pts
        lhs = group_mul(model, group_mul(model, p, q), r)
        rhs = group_mul(model, p, group_mul(model, q, r))
        assert np.abs(lhs - rhs).max() <= 1e-10


def test_exp_step_hyperbolic_examples():
    hyp = HyperbolicPlane()
    assert np.allclose(exp_step(hyp, [0, 1], [0, 1], np.log(2.0)), [0, 2])
    assert np.allclose(exp_step(hyp, [0, 1], [1, 0], 1.0), [1, 1])


def test_exp_step_abelian_example():
    assert np.allclose(exp_step(AbelianGroup(2), [0, 0], [5, 3], 1.0), [5, 3])


def test_exp_step_composition(heis, rng):
    models = [AbelianGroup(2), HyperbolicPlane(), heis]
    for model in models:
        for _ in range(30):
            u = rng.normal(size=model.point_dim)
            p = model.identity() if not isinstance(model, HyperbolicPlane) \
                else np.array([rng.normal(), np.exp(rng.normal())])
            h = float(rng.uniform(0.05, 0.8))
            assert np.allclose(exp_step(model, exp_step(model, p, u, h), u, h),
                               exp_step(model, p, u, 2 * h), atol=1e-12)


def test_hyperbolic_exp_matches_numerical_flow(rng):
    # midpoint integration of the left-invariant flow p' = dL_p(u)
    hyp = HyperbolicPlane()
    for _ in range(10):
        u = rng.normal(size=2)
        p = np.array([0.0, 1.0])
        n, h = 10_000, 1e-4
        for _ in range(n):
            k1 = p[1] * u
            mid = p + 0.5 * h * k1
            p = p + h * mid[1] * u
        exact = exp_step(hyp, [0, 1], u, n * h)
        assert np.abs(p - exact).max() <= 1e-6


# ---------------------------------------------------------------------------
# metrics and projections
# ---------------------------------------------------------------------------


def test_lobachevsky_norm_examples():
    hyp = HyperbolicPlane()
    metric = LobachevskyMetric()
    assert riemannian_norm(metric, hyp, [0, 2], [2, 0]) == pytest.approx(1.0)
    assert riemannian_norm(metric, hyp, [0, 1], [1, 0]) == pytest.approx(1.0)


def test_norm_scaling(rng):
    metric = LobachevskyMetric()
    hyp = HyperbolicPlane()
    for _ in range(100):
        v = rng.normal(size=2)
        lam = rng.uniform(0.1, 10)
        p = np.array([rng.normal(), np.exp(rng.normal())])
        assert riemannian_norm(metric, hyp, p, lam * v) == pytest.approx(
            lam * riemannian_norm(metric, hyp, p, v))


def test_left_invariant_quadratic_is_left_invariant(heis, rng):
    from sublorentz.groups import left_translate_tangent
    metric = LeftInvariantQuadratic(np.diag([1.0, 2.0, 3.0]))
    u = rng.normal(size=3)
    ref = riemannian_norm(metric, heis, heis.identity(), u)
    for _ in range(20):
        p = rng.normal(size=3)
        v = left_translate_tangent(heis, p, u)
        assert riemannian_norm(metric, heis, p, v) == pytest.approx(ref, abs=1e-12)


def test_left_invariant_quadratic_rejects_indefinite():
    with pytest.raises(ValueError):
        LeftInvariantQuadratic([[1.0, 0.0], [0.0, -1.0]])


def test_euclidean_norm(plane):
    assert riemannian_norm(EuclideanMetric(), plane, [0, 0], [3, 4]) == 5.0


def test_first_layer_projection_examples():
    alg = heisenberg_algebra()
    assert np.allclose(first_layer_projection(alg, [1, 1, 0.5]), [1, 1, 0])
    assert np.allclose(first_layer_projection(alg, [2, -1, 0]), [2, -1, 0])
    assert np.allclose(first_layer_projection(alg, [0, 0, 3]), [0, 0, 0])


def test_left_translation_jacobian_matches_flow(rng):
    # chart velocity of t -> exp(xi) exp(t u) at t = 0
    for alg in ALGEBRAS:
        xi, u = rng.normal(size=(2, alg.dim))
        F = left_translation_jacobian(alg, xi)
        eps = 1e-6
        fd = (bch_log_product(alg, xi, eps * u)
              - bch_log_product(alg, xi, -eps * u)) / (2 * eps)
        assert np.abs(F @ u - fd).max() <= 1e-8
