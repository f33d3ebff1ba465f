import numpy as np
import pytest

from sublorentz import (
    AbelianGroup,
    CarnotGroup,
    HyperbolicPlane,
    LeftInvariantForm,
    LorentzCone,
    LorentzSqrt,
    NEG_INF,
    NotExactError,
    PolyhedralCone,
    ProblemInstance,
    SolveOptions,
    SolveStatus,
    WrongModelError,
    abelian_closed_form,
    abelianized_upper_bound,
    admissibility_check,
    check_hyperbolicity_desk,
    heisenberg_algebra,
    potential,
    reachability_sample,
    solve_longest,
    solve_longest_reparametrized,
)
from sublorentz.solver import _endpoint_residual_and_jacobians

MINK = [[1.0, 0.0], [0.0, -1.0]]


def make_prob(model, cone, nu, x0, x1, n=40):
    return ProblemInstance(model, cone, nu, x0, x1, segments=n)


# ---------------------------------------------------------------------------
# problem construction
# ---------------------------------------------------------------------------


def test_instance_requires_pointed_cone(plane, mink_nu):
    line = PolyhedralCone([[1, 0], [-1, 0], [0, 1]])
    with pytest.raises(ValueError, match="pointed"):
        make_prob(plane, line, mink_nu, np.zeros(2), [1.0, 0.0])


def test_instance_dim_checks(heis, mink_cone, mink_nu):
    with pytest.raises(ValueError):
        ProblemInstance(heis, LorentzCone(np.diag([1.0, -1, -1]), [1, 0, 0]),
                        mink_nu, np.zeros(3), np.ones(3))
    with pytest.raises(ValueError, match="segment"):
        ProblemInstance(heis, mink_cone, mink_nu, np.zeros(3),
                        [1.0, 0, 0], segments=0)


# ---------------------------------------------------------------------------
# solves
# ---------------------------------------------------------------------------


def test_minkowski_solve_matches_oracle(plane, mink_cone, mink_nu, light_opts):
    prob = make_prob(plane, mink_cone, mink_nu, np.zeros(2), [5.0, 3.0], n=50)
    rep = solve_longest(prob, light_opts)
    assert rep.status == SolveStatus.SOLVED
    assert rep.objective == pytest.approx(4.0, rel=1e-3)
    assert rep.endpoint_residual <= light_opts.tol
    assert admissibility_check(mink_cone, rep.control).ok
    assert rep.trajectory is not None
    assert np.allclose(rep.trajectory.endpoint, [5.0, 3.0], atol=1e-5)


def test_minkowski_spacelike_no_admissible_path(plane, mink_cone, mink_nu):
    rep = solve_longest(make_prob(plane, mink_cone, mink_nu,
                                  np.zeros(2), [5.0, 7.0]))
    assert rep.status == SolveStatus.NO_ADMISSIBLE_PATH
    assert rep.objective == NEG_INF
    assert rep.control is None


def test_heisenberg_first_layer_target_attains_bound(heis, mink_cone, mink_nu,
                                                     light_opts):
    prob = make_prob(heis, mink_cone, mink_nu, np.zeros(3), [3.0, 0.0, 0.0], n=50)
    rep = solve_longest(prob, light_opts)
    assert rep.status == SolveStatus.SOLVED
    assert rep.objective == pytest.approx(3.0, rel=1e-3)
    assert abelianized_upper_bound(prob) == pytest.approx(3.0)


def test_heisenberg_spacelike_first_layer(heis, mink_cone, mink_nu):
    rep = solve_longest(make_prob(heis, mink_cone, mink_nu,
                                  np.zeros(3), [1.0, 2.0, 0.1]))
    assert rep.status == SolveStatus.NO_ADMISSIBLE_PATH


def test_solved_reports_are_feasible(heis, mink_cone, mink_nu, light_opts):
    ends = reachability_sample(heis, mink_cone, np.zeros(3), 5, seed=11,
                               interior=True)
    for e in ends:
        prob = make_prob(heis, mink_cone, mink_nu, np.zeros(3), e)
        rep = solve_longest(prob, light_opts)
        assert rep.status == SolveStatus.SOLVED
        assert rep.endpoint_residual <= light_opts.tol
        assert admissibility_check(mink_cone, rep.control).ok
        # jensen dominance against the first-layer bound
        assert rep.objective <= abelianized_upper_bound(prob) + 1e-9


def test_bound_dominance_holds_even_unsolved(heis, mink_cone, mink_nu):
    # boundary-hugging endpoints may not converge under a tiny budget, but
    # the first-layer polish keeps the Jensen bound valid for every report
    ends = reachability_sample(heis, mink_cone, np.zeros(3), 6, seed=11)
    tiny = SolveOptions(restarts=1, max_iter=8, inner_iter=15)
    for e in ends:
        prob = make_prob(heis, mink_cone, mink_nu, np.zeros(3), e)
        rep = solve_longest(prob, tiny)
        assert rep.objective <= abelianized_upper_bound(prob) + 1e-9


def test_best_so_far_history_monotone(heis, mink_cone, mink_nu, light_opts):
    ends = reachability_sample(heis, mink_cone, np.zeros(3), 3, seed=2)
    for e in ends:
        rep = solve_longest(make_prob(heis, mink_cone, mink_nu, np.zeros(3), e),
                            light_opts)
        best = np.maximum.accumulate(rep.history)
        assert np.all(np.diff(best) >= -1e-12)


def test_hyperbolic_solve(light_opts):
    hyp = HyperbolicPlane()
    cone = LorentzCone([[-4.0, 0.0], [0.0, 1.0]], [0.0, 1.0])
    nu = LorentzSqrt([[-4.0, 0.0], [0.0, 1.0]])
    prob = make_prob(hyp, cone, nu, [0.0, 1.0], [0.3, 2.0], n=40)
    rep = solve_longest(prob, light_opts)
    assert rep.status == SolveStatus.SOLVED
    # constant-control lower bound: log(x1) = (alpha, beta) is admissible
    alpha, beta = hyp.log([0.3, 2.0])
    assert rep.objective >= np.sqrt(beta ** 2 - 4 * alpha ** 2) - 1e-6


# ---------------------------------------------------------------------------
# oracles and bounds
# ---------------------------------------------------------------------------


def test_abelian_closed_form_examples(plane, mink_cone, mink_nu):
    assert abelian_closed_form(plane, mink_nu, mink_cone,
                               np.zeros(2), [5.0, 3.0]) == pytest.approx(4.0)
    assert abelian_closed_form(plane, mink_nu, mink_cone,
                               np.zeros(2), [1.0, 1.0]) == pytest.approx(0.0)
    assert abelian_closed_form(plane, mink_nu, mink_cone,
                               np.zeros(2), [1.0, 2.0]) == NEG_INF


def test_abelian_closed_form_rejects_other_models(heis, mink_cone, mink_nu):
    with pytest.raises(WrongModelError):
        abelian_closed_form(heis, mink_nu, mink_cone, np.zeros(3), np.zeros(3))


def test_closed_form_dominates_two_segment_paths(plane, mink_cone, mink_nu, rng):
    # brute force: no split path beats the straight one
    target = np.array([5.0, 3.0])
    oracle = abelian_closed_form(plane, mink_nu, mink_cone, np.zeros(2), target)
    found = 0
    while found < 200:
        mid = mink_cone.sample(1, rng)[0]
        rest = target - mid
        if not mink_cone.contains(rest):
            continue
        found += 1
        split = mink_nu.value_on_cone(mid) + mink_nu.value_on_cone(rest)
        assert split <= oracle + 1e-9


def test_abelianized_upper_bound_examples(heis, mink_cone, mink_nu):
    for c in (0.0, 7.0):
        prob = make_prob(heis, mink_cone, mink_nu, np.zeros(3), [5.0, 3.0, c])
        assert abelianized_upper_bound(prob) == pytest.approx(4.0)
    spacelike = make_prob(heis, mink_cone, mink_nu, np.zeros(3), [1.0, 2.0, 0.0])
    assert abelianized_upper_bound(spacelike) == NEG_INF
    with pytest.raises(WrongModelError):
        abelianized_upper_bound(make_prob(AbelianGroup(2), mink_cone, mink_nu,
                                          np.zeros(2), [1.0, 0.0]))


def test_oracle_agreement_random_endpoints(plane, mink_cone, mink_nu,
                                           light_opts, rng):
    for _ in range(20):
        x1 = mink_cone.sample(1, rng, relative_interior=True)[0]
        x1 = x1 + np.array([0.5, 0.0])
        prob = make_prob(plane, mink_cone, mink_nu, np.zeros(2), x1, n=50)
        rep = solve_longest(prob, light_opts)
        oracle = abelian_closed_form(plane, mink_nu, mink_cone, np.zeros(2), x1)
        assert rep.objective == pytest.approx(oracle, rel=1e-3)


# ---------------------------------------------------------------------------
# endpoint gradients
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("case", ["abelian", "heisenberg", "hyperbolic"])
def test_endpoint_jacobian_matches_fd(case, rng):
    if case == "abelian":
        model, x0, x1 = AbelianGroup(2), np.zeros(2), np.array([5.0, 3.0])
    elif case == "heisenberg":
        model = CarnotGroup(heisenberg_algebra())
        x0, x1 = np.zeros(3), np.array([2.0, 0.5, 0.3])
    else:
        model = HyperbolicPlane()
        x0, x1 = np.array([0.0, 1.0]), np.array([0.3, 2.0])
    u = rng.normal(size=(7, 2)) * 0.4 + np.array([1.2, 0.0])
    rho, J, _ = _endpoint_residual_and_jacobians(model, x0, x1, u, 1.0)
    h = 1e-6
    for k in range(u.shape[0]):
        for j in range(2):
            d = np.zeros_like(u)
            d[k, j] = h
            rp, _, _ = _endpoint_residual_and_jacobians(model, x0, x1, u + d, 1.0)
            rm, _, _ = _endpoint_residual_and_jacobians(model, x0, x1, u - d, 1.0)
            fd = (rp - rm) / (2 * h)
            scale = max(1.0, np.abs(fd).max())
            assert np.abs(J[k][:, j] - fd).max() <= 1e-5 * scale


# ---------------------------------------------------------------------------
# reachability sampling
# ---------------------------------------------------------------------------


def test_reachability_abelian_stays_in_shifted_cone(plane, mink_cone):
    x0 = np.array([1.0, -2.0])
    cloud = reachability_sample(plane, mink_cone, x0, 200, seed=4)
    for p in cloud:
        assert mink_cone.contains(p - x0, tol=1e-7)


def test_reachability_carnot_first_layer_in_cone(heis, mink_cone):
    cloud = reachability_sample(heis, mink_cone, np.zeros(3), 200, seed=4)
    for p in cloud:
        assert mink_cone.contains(p[:2], tol=1e-7)


def test_reachability_potential_increases(heis, mink_cone):
    form = LeftInvariantForm([1.0, 0.0, 0.0], heis)
    x0 = np.array([0.5, 0.2, 0.0])
    cloud = reachability_sample(heis, mink_cone, x0, 200, seed=9)
    t0 = potential(form, x0)
    assert all(potential(form, p) >= t0 - 1e-12 for p in cloud)


def test_reachability_deterministic(heis, mink_cone):
    a = reachability_sample(heis, mink_cone, np.zeros(3), 50, seed=123)
    b = reachability_sample(heis, mink_cone, np.zeros(3), 50, seed=123)
    assert np.array_equal(a, b)


# ---------------------------------------------------------------------------
# desk-scale hyperbolicity diagnostics
# ---------------------------------------------------------------------------


def test_minkowski_diamond_radius(plane, mink_cone, mink_nu):
    prob = make_prob(plane, mink_cone, mink_nu, np.zeros(2), [5.0, 3.0], n=10)
    form = LeftInvariantForm([1.0, 0.0], plane)
    rep = check_hyperbolicity_desk(prob, form, n_samples=300, seed=0)
    assert rep.passed
    assert rep.radius == pytest.approx(5 * np.sqrt(2), rel=1e-9)
    assert rep.monotonicity_violations == 0
    assert rep.stalled_positive_length_paths == 0
    assert rep.max_inband_arclength <= rep.radius * (1 + 1e-9)


def test_heisenberg_potential_band(heis, mink_cone, mink_nu):
    # potential T = xi_0, so the in-band cloud has first coordinate <= gap
    prob = make_prob(heis, mink_cone, mink_nu, np.zeros(3), [3.0, 0.0, 0.0])
    form = LeftInvariantForm([1.0, 0.0, 0.0], heis)
    rep = check_hyperbolicity_desk(prob, form, n_samples=300, seed=1)
    assert rep.passed
    assert rep.potential_gap == pytest.approx(3.0)
    cloud = reachability_sample(heis, mink_cone, np.zeros(3), 300, seed=1)
    in_band = cloud[cloud[:, 0] <= 3.0]
    assert np.all(in_band[:, 0] <= rep.potential_gap + 1e-12)


def test_hyperbolicity_requires_exact_form(plane, mink_cone, mink_nu, heis):
    from sublorentz import HyperbolicAB
    hyp = HyperbolicPlane()
    cone = LorentzCone([[-4.0, 0.0], [0.0, 1.0]], [0.0, 1.0])
    prob = make_prob(hyp, cone, LorentzSqrt([[-4.0, 0.0], [0.0, 1.0]]),
                     [0.0, 1.0], [0.3, 2.0])
    with pytest.raises(NotExactError):
        check_hyperbolicity_desk(prob, HyperbolicAB(1.0, 1.0), n_samples=10)


# ---------------------------------------------------------------------------
# reparametrized solves
# ---------------------------------------------------------------------------


def test_reparametrized_solve_matches_minkowski(plane, mink_cone, mink_nu,
                                                light_opts):
    prob = make_prob(plane, mink_cone, mink_nu, np.zeros(2), [5.0, 3.0], n=50)
    form = LeftInvariantForm([1.0, 0.0], plane)
    rt = solve_longest(prob, light_opts)
    rs = solve_longest_reparametrized(prob, form, light_opts)
    assert rs.status == SolveStatus.SOLVED
    assert rs.objective == pytest.approx(rt.objective, rel=1e-3)
    assert rs.trajectory.horizon == pytest.approx(5.0)  # s1 = T(x1)


def test_reparametrized_solve_heisenberg(heis, mink_cone, mink_nu, light_opts):
    ends = reachability_sample(heis, mink_cone, np.zeros(3), 2, seed=21,
                               interior=True)
    form = LeftInvariantForm([1.0, 0.0, 0.0], heis)
    for e in ends:
        prob = make_prob(heis, mink_cone, mink_nu, np.zeros(3), e)
        rt = solve_longest(prob, light_opts)
        rs = solve_longest_reparametrized(prob, form, light_opts)
        assert rs.status == SolveStatus.SOLVED
        assert rs.objective == pytest.approx(rt.objective, rel=1e-3)


def test_reparametrized_solve_rejects_negative_gap(plane, mink_cone, mink_nu,
                                                   light_opts):
    prob = make_prob(plane, mink_cone, mink_nu, [5.0, 3.0], np.zeros(2))
    form = LeftInvariantForm([1.0, 0.0], plane)
    rep = solve_longest_reparametrized(prob, form, light_opts)
    assert rep.status == SolveStatus.NO_ADMISSIBLE_PATH
