"""Longest-path optimization by direct transcription.

The length functional sum_k h nu(u_k) is maximized over cone-valued
piecewise-constant controls subject to the endpoint constraint, enforced by
an augmented Lagrangian on the group-log residual.  Inner updates are
projected (sub)gradient ascent with exact cone projection; restarts combine
the abelianized constant control with seeded random admissible controls.

The problem is non-convex on non-abelian groups; the solver certifies
feasibility and delivers bound-consistent local maximizers, not global
optimality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from .cones import NEG_INF, Antinorm, Cone, antinorm_eval
from .dynamics import ControlSignal, Trajectory, integrate
from .errors import WrongModelError
from .groups import (
    AbelianGroup,
    CarnotGroup,
    GroupModel,
    HyperbolicPlane,
    bch_jacobians,
    bch_log_product,
    embed_control,
    natural_metric,
    riemannian_norm,
)
from .timeform import TimeForm, UnitTimeSection, potential, section_sup_norm


class SolveStatus(Enum):
    SOLVED = "solved"
    NO_ADMISSIBLE_PATH = "no_admissible_path"
    MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class SolveOptions:
    tol: float = 1e-6
    max_iter: int = 500
    restarts: int = 8
    seed: int = 0
    inner_iter: int = 60
    penalty0: float = 10.0


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Fixed-endpoint longest-path problem on the unit time horizon."""

    model: GroupModel
    cone: Cone
    nu: Antinorm
    x0: np.ndarray
    x1: np.ndarray
    segments: int = 50

    def __post_init__(self):
        object.__setattr__(self, "x0", self.model.validate_point(self.x0))
        object.__setattr__(self, "x1", self.model.validate_point(self.x1))
        if self.segments < 1:
            raise ValueError("need at least one segment")
        if self.cone.dim != self.control_dim:
            raise ValueError(f"cone dim {self.cone.dim} does not match the "
                             f"control space dim {self.control_dim}")
        if not self.cone.is_pointed():
            raise ValueError("cone must be pointed")

    @property
    def control_dim(self) -> int:
        if isinstance(self.model, CarnotGroup):
            return self.model.control_dim
        return self.model.point_dim


@dataclass
class SolveReport:
    status: SolveStatus
    objective: float
    control: Optional[ControlSignal]
    trajectory: Optional[Trajectory]
    endpoint_residual: float
    iterations: int
    history: List[float] = field(default_factory=list)

    def summary(self) -> str:
        return (f"{self.status.value}: objective {self.objective:.9g}, "
                f"residual {self.endpoint_residual:.3g}, "
                f"{self.iterations} outer iteration(s)")


# ---------------------------------------------------------------------------
# Endpoint maps and their analytic Jacobians
# ---------------------------------------------------------------------------


def _displacement_log(model: GroupModel, x0, x1) -> np.ndarray:
    """log(x0^{-1} x1) in chart coordinates."""
    return model.log(model.multiply(model.inverse(x0), x1))


def _hyperbolic_log_jacobian(w: np.ndarray) -> np.ndarray:
    """d log / d point at w = (x, y) on the hyperbolic plane."""
    x, y = w
    t = y - 1.0
    if abs(t) < 1e-5:
        ratio = 1.0 - t / 2.0 + t * t / 3.0 - t ** 3 / 4.0
        dratio = -0.5 + 2.0 * t / 3.0 - 0.75 * t * t
    else:
        ratio = np.log(y) / t
        dratio = ((t / y) - np.log(y)) / (t * t)
    return np.array([[ratio, x * dratio], [0.0, 1.0 / y]])


def _endpoint_residual_and_jacobians(model: GroupModel, x0, x1,
                                     u: np.ndarray, horizon: float
                                     ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Residual rho = log(endpoint^{-1} x1) plus d rho / d u_k, analytically.

    Returns (rho, J, endpoint) with J of shape (N, res_dim, control_dim).
    Step-2 Carnot groups take a closed-form vectorized route; higher steps
    chain the exact BCH Jacobians segment by segment.
    """
    n_seg, m = u.shape
    h = horizon / n_seg

    if isinstance(model, AbelianGroup):
        endpoint = x0 + h * u.sum(axis=0)
        rho = x1 - endpoint
        J = np.broadcast_to(-h * np.eye(m), (n_seg, m, m)).copy()
        return rho, J, endpoint

    if isinstance(model, HyperbolicPlane):
        pts = np.empty((n_seg + 1, 2))
        pts[0] = x0
        d_prev = []  # per segment: (d p_{k+1} / d p_k, d p_{k+1} / d u_k)
        for k in range(n_seg):
            alpha, beta = u[k]
            y = pts[k][1]
            if abs(beta) < 1e-12:
                X, Y = h * alpha, 1.0
                dXa, dXb, dYb = h, alpha * h * h / 2.0, h
            else:
                ebt = np.exp(h * beta)
                X = (alpha / beta) * (ebt - 1.0)
                Y = ebt
                dXa = (ebt - 1.0) / beta
                dXb = alpha * (h * ebt * beta - (ebt - 1.0)) / (beta * beta)
                dYb = h * ebt
            pts[k + 1] = [pts[k][0] + y * X, y * Y]
            Dp = np.array([[1.0, X], [0.0, Y]])
            Du = y * np.array([[dXa, dXb], [0.0, dYb]])
            d_prev.append((Dp, Du))
        endpoint = pts[-1]
        ex, ey = endpoint
        w = np.array([(x1[0] - ex) / ey, x1[1] / ey])
        rho = model.log(w)
        dw_dE = np.array([[-1.0 / ey, -(x1[0] - ex) / ey ** 2],
                          [0.0, -x1[1] / ey ** 2]])
        drho_dE = _hyperbolic_log_jacobian(w) @ dw_dE
        J = np.empty((n_seg, 2, 2))
        S = drho_dE
        for k in range(n_seg - 1, -1, -1):
            Dp, Du = d_prev[k]
            J[k] = S @ Du
            S = S @ Dp
        return rho, J, endpoint

    if isinstance(model, CarnotGroup):
        alg = model.algebra
        n = alg.dim
        m1 = alg.layer_dims[0]
        if alg.step == 2:
            m2 = n - m1
            xi0 = np.asarray(x0, dtype=float)
            eta = np.asarray(x1, dtype=float)
            csum = np.cumsum(u, axis=0)
            before = np.vstack([np.zeros(m1), csum[:-1]]) * h  # sum h u_j, j < k
            P = xi0[:m1][None, :] + before
            first = xi0[:m1] + h * csum[-1]
            # bracket of first-layer vectors, landing in the second layer
            T12 = alg.table[:m1, :m1, m1:]
            second = xi0[m1:] + 0.5 * h * np.einsum("ijk,ti,tj->k", T12, P, u)
            xiE = np.concatenate([first, second])
            # rho = bch(-xiE, eta) at step 2
            rho = eta - xiE - 0.5 * alg.bracket(xiE, eta)
            after = (csum[-1][None, :] - csum) * h  # sum h u_l, l > k
            # d xiE / d u_k: first layer h I; second layer (h/2) [P_k - after_k, .]
            W = P - after
            DxiE = np.zeros((n_seg, n, m1))
            DxiE[:, :m1, :] = h * np.eye(m1)
            DxiE[:, m1:, :] = 0.5 * h * np.einsum("ijk,ti->tkj", T12, W)
            drho_dxi = -np.eye(n) + 0.5 * alg.ad(eta)
            J = np.einsum("ab,tbc->tac", drho_dxi, DxiE)
            return rho, J, xiE
        # generic step <= 4: chain the BCH Jacobians
        xi = np.asarray(x0, dtype=float)
        Ms: List[np.ndarray] = []
        Ks: List[np.ndarray] = []
        emb = np.zeros((n, m1))
        emb[:m1, :] = np.eye(m1)
        for k in range(n_seg):
            step_vec = h * alg.embed_first_layer(u[k])
            Da, Db = bch_jacobians(alg, xi, step_vec)
            Ms.append(Da)
            Ks.append(Db @ (h * emb))
            xi = bch_log_product(alg, xi, step_vec)
        endpoint = xi
        eta = np.asarray(x1, dtype=float)
        rho = bch_log_product(alg, -endpoint, eta)
        Dval, _ = bch_jacobians(alg, -endpoint, eta)
        drho_dxi = -Dval
        J = np.empty((n_seg, n, m1))
        S = drho_dxi
        for k in range(n_seg - 1, -1, -1):
            J[k] = S @ Ks[k]
            S = S @ Ms[k]
        return rho, J, endpoint

    raise TypeError(f"unsupported model {model!r}")


def _first_layer_target(model: GroupModel, x0, x1) -> Optional[np.ndarray]:
    """Control-average forced by the endpoints, when the model pins one down."""
    if isinstance(model, AbelianGroup):
        return _displacement_log(model, x0, x1)
    if isinstance(model, CarnotGroup):
        m1 = model.algebra.layer_dims[0]
        return _displacement_log(model, x0, x1)[:m1]
    return None


# ---------------------------------------------------------------------------
# The augmented-Lagrangian core
# ---------------------------------------------------------------------------


@dataclass
class _RunResult:
    u: np.ndarray
    objective: float
    residual: float
    outer_iters: int
    history: List[float]


def _objective(nu: Antinorm, u: np.ndarray, h: float) -> float:
    return float(h * nu.values_on_cone(u).sum())


def _polish_average(model: GroupModel, cone: Cone, x0, x1,
                    u: np.ndarray, horizon: float) -> np.ndarray:
    """Shift all segments by a constant so the control average exactly matches
    the displacement the endpoints force (abelian and Carnot first layer).

    Keeps the superadditivity bound sharp in reports; reverted when the shift
    would push a segment out of the cone.
    """
    target = _first_layer_target(model, x0, x1)
    if target is None:
        return u
    h = horizon / u.shape[0]
    shift = (target - h * u.sum(axis=0)) / horizon
    if np.linalg.norm(shift) == 0.0:
        return u
    shifted = u + shift
    if all(cone.contains(row, 1e-9) for row in shifted):
        return shifted
    return u


def _augmented_lagrangian_run(model: GroupModel, cone: Cone, nu: Antinorm,
                              x0, x1, u0: np.ndarray, horizon: float,
                              opts: SolveOptions,
                              retraction=None,
                              gradient_projector: Optional[np.ndarray] = None
                              ) -> _RunResult:
    n_seg = u0.shape[0]
    h = horizon / n_seg
    project = retraction if retraction is not None else cone.project_batch
    axis = cone.interior_direction()

    u = project(u0.copy())
    lam = None
    mu = opts.penalty0
    prev_res = np.inf
    history: List[float] = []
    alpha = 1.0

    def phi_and_parts(uu):
        # wild line-search trials can overflow the exponential maps; such
        # points are rejected, never fatal
        try:
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                rho, J, _ = _endpoint_residual_and_jacobians(model, x0, x1, uu,
                                                             horizon)
        except (ValueError, FloatingPointError):
            return -np.inf, None, None
        if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(J))):
            return -np.inf, None, None
        if lam is None:
            pen = 0.5 * mu * rho @ rho
        else:
            pen = lam @ rho + 0.5 * mu * rho @ rho
        return _objective(nu, uu, h) - pen, rho, J

    def gradient(uu, rho, J, eps):
        # supergradient of the length term, nudged off the cone boundary,
        # minus the augmented-Lagrangian pull toward the endpoint
        scale = np.maximum(np.linalg.norm(uu, axis=1, keepdims=True), 0.1)
        grad_nu = h * nu.grads_on_cone(uu + eps * scale * axis)
        mult = (mu * rho) if lam is None else (lam + mu * rho)
        g = grad_nu - np.einsum("tab,a->tb", J, mult)
        if gradient_projector is not None:
            # constrained runs ascend in the feasible slice's tangent space,
            # keeping the step compatible with the retraction
            g = g @ gradient_projector.T
        return g

    outer = 0
    for outer in range(1, opts.max_iter + 1):
        eps = 0.1 / outer
        alpha = max(alpha, 1e-2)
        phi, rho, J = phi_and_parts(u)
        if rho is None:
            break
        # projected ascent with spectral (Barzilai-Borwein) steps and a
        # short nonmonotone line search; the best iterate is kept
        best = (phi, u, rho, J)
        u_prev = g_prev = None
        phi_recent = [phi]
        for _ in range(opts.inner_iter):
            grad = gradient(u, rho, J, eps)
            if np.linalg.norm(grad) < 1e-14:
                break
            if g_prev is not None:
                s = (u - u_prev).ravel()
                y = (grad - g_prev).ravel()
                sy = s @ y
                if sy < -1e-18:
                    alpha = min(max((s @ s) / (-sy), 1e-10), 1e4)
            accepted = False
            step = alpha
            ref = min(phi_recent[-5:])
            for _ in range(40):
                trial = project(u + step * grad)
                phi_t, rho_t, J_t = phi_and_parts(trial)
                if rho_t is not None and phi_t > ref + 1e-14:
                    u_prev, g_prev = u, grad
                    u, phi, rho, J = trial, phi_t, rho_t, J_t
                    phi_recent.append(phi)
                    if phi > best[0]:
                        best = (phi, u, rho, J)
                    accepted = True
                    break
                step *= 0.5
                if step < 1e-16:
                    break
            if not accepted:
                break
        phi, u, rho, J = best
        res = float(np.linalg.norm(rho))
        history.append(_objective(nu, u, h))
        if res <= opts.tol:
            polished = _polish_average(model, cone, x0, x1, u, horizon)
            rho_p, _, _ = _endpoint_residual_and_jacobians(model, x0, x1, polished, horizon)
            if np.linalg.norm(rho_p) <= opts.tol:
                u = polished
                res = float(np.linalg.norm(rho_p))
            # converged when the objective stalls between outer iterations
            if len(history) >= 2 and abs(history[-1] - history[-2]) <= \
                    1e-9 * max(1.0, abs(history[-1])):
                break
        lam = mu * rho if lam is None else lam + mu * rho
        if res > 0.25 * prev_res:
            mu = min(mu * 2.0, 1e12)
        prev_res = res

    u = _polish_average(model, cone, x0, x1, u, horizon)
    rho, _, _ = _endpoint_residual_and_jacobians(model, x0, x1, u, horizon)
    return _RunResult(u=u, objective=_objective(nu, u, h),
                      residual=float(np.linalg.norm(rho)),
                      outer_iters=outer, history=history)


def _starting_controls(prob: ProblemInstance, horizon: float,
                       opts: SolveOptions,
                       unit_tau: Optional[TimeForm] = None) -> List[np.ndarray]:
    """Abelianized constant control first, then seeded random admissible ones."""
    rng = np.random.default_rng(opts.seed)
    n_seg, m = prob.segments, prob.control_dim
    starts: List[np.ndarray] = []
    target = _first_layer_target(prob.model, prob.x0, prob.x1)
    if target is None:
        target = _displacement_log(prob.model, prob.x0, prob.x1)
    base = np.tile(target / horizon, (n_seg, 1))
    starts.append(base)
    while len(starts) < max(1, opts.restarts):
        jitter = prob.cone.sample(n_seg, rng)
        mix = rng.uniform(0.2, 0.8)
        cand = mix * base + (1 - mix) * jitter * (
            np.linalg.norm(target) / max(np.linalg.norm(jitter, axis=1).mean(), 1e-9))
        starts.append(cand)
    if unit_tau is not None:
        def normalize(u):
            out = prob.cone.project_batch(u)
            for i, row in enumerate(out):
                t = unit_tau.value_at_identity(embed_control(prob.model, row))
                if t <= 1e-12:
                    row = prob.cone.interior_direction()
                    t = unit_tau.value_at_identity(embed_control(prob.model, row))
                out[i] = row / t
            return out
        starts = [normalize(s) for s in starts]
    return starts


def _report_from_runs(prob: ProblemInstance, runs: List[_RunResult],
                      horizon: float, opts: SolveOptions) -> SolveReport:
    feasible = [r for r in runs if r.residual <= opts.tol]
    pool = feasible if feasible else runs
    # highest objective, then lowest residual, then lowest restart index
    best_idx = min(range(len(pool)),
                   key=lambda i: (-pool[i].objective, pool[i].residual, i))
    best = pool[best_idx]
    control = ControlSignal(best.u)
    traj = integrate(prob.model, prob.x0, control, horizon=horizon,
                     nu=prob.nu, cone=prob.cone)
    status = SolveStatus.SOLVED if feasible else SolveStatus.MAX_ITERATIONS
    return SolveReport(status=status, objective=best.objective, control=control,
                       trajectory=traj, endpoint_residual=best.residual,
                       iterations=best.outer_iters, history=best.history)


def solve_longest(prob: ProblemInstance, opts: Optional[SolveOptions] = None
                  ) -> SolveReport:
    """Maximize the sub-Lorentzian length between the fixed endpoints.

    Returns NO_ADMISSIBLE_PATH with objective -inf when the displacement
    certificate rules every admissible path out (the control average is
    forced outside the cone); MAX_ITERATIONS when no restart reaches the
    endpoint tolerance.
    """
    opts = opts or SolveOptions()
    target = _first_layer_target(prob.model, prob.x0, prob.x1)
    if target is not None and np.linalg.norm(target) > 0 \
            and not prob.cone.contains(target, 1e-9):
        return SolveReport(status=SolveStatus.NO_ADMISSIBLE_PATH, objective=NEG_INF,
                           control=None, trajectory=None,
                           endpoint_residual=np.inf, iterations=0)
    runs = [_augmented_lagrangian_run(prob.model, prob.cone, prob.nu,
                                      prob.x0, prob.x1, u0, 1.0, opts)
            for u0 in _starting_controls(prob, 1.0, opts)]
    return _report_from_runs(prob, runs, 1.0, opts)


def solve_longest_reparametrized(prob: ProblemInstance, form: TimeForm,
                                 opts: Optional[SolveOptions] = None
                                 ) -> SolveReport:
    """Solve the fixed-horizon unit-tau-speed formulation of the same problem.

    The horizon s1 = T(x1) - T(x0) is forced by the potential of the exact
    form; controls are retracted onto the unit-time slice of the cone.
    Objectives agree with solve_longest up to discretization.
    """
    opts = opts or SolveOptions()
    s1 = potential(form, prob.x1) - potential(form, prob.x0)
    if s1 <= 1e-12:
        same = np.allclose(prob.x0, prob.x1, atol=1e-12)
        return SolveReport(
            status=SolveStatus.SOLVED if same else SolveStatus.NO_ADMISSIBLE_PATH,
            objective=0.0 if same else NEG_INF, control=None, trajectory=None,
            endpoint_residual=0.0 if same else np.inf, iterations=0)
    target = _first_layer_target(prob.model, prob.x0, prob.x1)
    if target is not None and np.linalg.norm(target) > 0 \
            and not prob.cone.contains(target, 1e-9):
        return SolveReport(status=SolveStatus.NO_ADMISSIBLE_PATH, objective=NEG_INF,
                           control=None, trajectory=None,
                           endpoint_residual=np.inf, iterations=0)

    def retract(U: np.ndarray) -> np.ndarray:
        out = prob.cone.project_batch(U)
        for i, row in enumerate(out):
            t = form.value_at_identity(embed_control(prob.model, row))
            if t <= 1e-12:
                row = prob.cone.interior_direction()
                t = form.value_at_identity(embed_control(prob.model, row))
            out[i] = row / t
        return out

    # tau in control coordinates; ascent happens in its kernel
    basis = np.eye(prob.control_dim)
    tau_c = np.array([form.value_at_identity(embed_control(prob.model, b))
                      for b in basis])
    projector = np.eye(prob.control_dim) - np.outer(tau_c, tau_c) / (tau_c @ tau_c)

    runs = [_augmented_lagrangian_run(prob.model, prob.cone, prob.nu,
                                      prob.x0, prob.x1, u0, s1, opts,
                                      retraction=retract,
                                      gradient_projector=projector)
            for u0 in _starting_controls(prob, s1, opts, unit_tau=form)]
    return _report_from_runs(prob, runs, s1, opts)


# ---------------------------------------------------------------------------
# Oracles and bounds
# ---------------------------------------------------------------------------


def abelian_closed_form(model: GroupModel, nu: Antinorm, cone: Cone,
                        x0, x1) -> float:
    """Exact distance on abelian models: nu of the displacement.

    Superadditivity plus homogeneity force every admissible path's length
    below nu(x1 - x0), and the straight segment attains it.
    """
    if not isinstance(model, AbelianGroup):
        raise WrongModelError("closed form requires an abelian model")
    delta = model.validate_point(x1) - model.validate_point(x0)
    return antinorm_eval(nu, cone, delta)


def abelianized_upper_bound(prob: ProblemInstance) -> float:
    """nu of the first-layer displacement: an upper bound for every admissible
    control (their average is exactly that displacement), -inf when the
    displacement leaves the cone (no admissible path at all)."""
    if not isinstance(prob.model, CarnotGroup):
        raise WrongModelError("the first-layer bound requires a Carnot model")
    disp = _displacement_log(prob.model, prob.x0, prob.x1)
    m1 = prob.model.algebra.layer_dims[0]
    return antinorm_eval(prob.nu, prob.cone, disp[:m1])


def reachability_sample(model: GroupModel, cone: Cone, x0, n_samples: int,
                        seed: int = 0, max_segments: int = 8,
                        interior: bool = False,
                        return_trajectories: bool = False):
    """Endpoints of random admissible piecewise-constant controls from x0.

    Segment counts are uniform on 1..max_segments and magnitudes log-uniform;
    deterministic given the seed.  ``interior`` restricts the controls to the
    cone's relative interior (endpoints stay away from the causal boundary).
    """
    rng = np.random.default_rng(seed)
    x0 = model.validate_point(x0)
    pts = np.empty((n_samples, model.point_dim))
    trajs = []
    for i in range(n_samples):
        n_seg = int(rng.integers(1, max_segments + 1))
        controls = ControlSignal(cone.sample(n_seg, rng,
                                             relative_interior=interior))
        traj = integrate(model, x0, controls)
        pts[i] = traj.endpoint
        if return_trajectories:
            trajs.append(traj)
    return (pts, trajs) if return_trajectories else pts


# ---------------------------------------------------------------------------
# Desk-scale global-hyperbolicity diagnostics
# ---------------------------------------------------------------------------


@dataclass
class HyperbolicityReport:
    """Sampled evidence for the compact-diamond and no-closed-path conditions."""

    passed: bool
    n_paths: int
    radius: float
    potential_gap: float
    max_inband_arclength: float
    monotonicity_violations: int
    stalled_positive_length_paths: int
    radius_violations: int

    def summary(self) -> str:
        verdict = "consistent" if self.passed else "INCONSISTENT"
        return (f"hyperbolicity evidence {verdict} over {self.n_paths} paths: "
                f"radius {self.radius:.6g}, max in-band arc length "
                f"{self.max_inband_arclength:.6g}, "
                f"{self.monotonicity_violations} monotonicity violation(s)")


def check_hyperbolicity_desk(prob: ProblemInstance, form: TimeForm,
                             n_samples: int = 200, seed: int = 0
                             ) -> HyperbolicityReport:
    """Sample admissible paths from x0 and check the exact-form consequences:
    the potential increases strictly along positive-length paths, and paths
    inside the potential band of the endpoints stay within the arc-length
    radius (unit-slice sup norm) * (potential gap).

    Raises NotExactError when the form has no potential.
    """
    t0 = potential(form, prob.x0)
    t1 = potential(form, prob.x1)
    gap = t1 - t0
    metric = natural_metric(prob.model)
    sup_u = section_sup_norm(UnitTimeSection(prob.cone, form, prob.x0), metric,
                             samples=2048, seed=seed)
    radius = sup_u * max(gap, 0.0)

    rng = np.random.default_rng(seed)
    ident = prob.model.identity()
    mono_bad = 0
    stalled = 0
    radius_bad = 0
    max_arc = 0.0
    for _ in range(n_samples):
        n_seg = int(rng.integers(1, 9))
        controls = prob.cone.sample(n_seg, rng)
        traj = integrate(prob.model, prob.x0, ControlSignal(controls),
                         nu=prob.nu, cone=prob.cone)
        pots = np.array([potential(form, p) for p in traj.points])
        scale = 1.0 + np.abs(pots).max()
        if np.any(np.diff(pots) < -1e-9 * scale):
            mono_bad += 1
        length = traj.z[-1] if traj.z is not None else 0.0
        if length > 1e-9 and pots[-1] - pots[0] <= 1e-12 * scale:
            stalled += 1
        h = np.diff(traj.times)
        speeds = np.array([riemannian_norm(metric, prob.model, ident,
                                           embed_control(prob.model, row))
                           for row in controls])
        arcs = np.concatenate([[0.0], np.cumsum(h * speeds)])
        in_band = pots <= t1 + 1e-9 * scale
        if np.any(in_band):
            arc_in = float(arcs[in_band].max())
            max_arc = max(max_arc, arc_in)
            if arc_in > radius * (1.0 + 1e-9) + 1e-12:
                radius_bad += 1
    return HyperbolicityReport(
        passed=(mono_bad == 0 and stalled == 0 and radius_bad == 0),
        n_paths=n_samples, radius=radius, potential_gap=gap,
        max_inband_arclength=max_arc, monotonicity_violations=mono_bad,
        stalled_positive_length_paths=stalled, radius_violations=radius_bad)
