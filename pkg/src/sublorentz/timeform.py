"""Causal time forms: evaluation, closedness and exactness checks, the
potential, the growth condition, and the unit-time reparametrization.

All shipped forms are left-invariant; the hyperbolic family is also kept in
its explicit coordinate shape (a dx + b dy)/y, which is closed exactly when
a = 0.  Exactness is decided structurally: the models are simply connected,
so a closed form always has a potential.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cones import Cone, LinearImageCone, LorentzCone, PolyhedralCone, as_vector
from .dynamics import Trajectory
from .errors import (
    InvalidPointError,
    NotExactError,
    StalledParameterError,
    UnboundedSectionError,
)
from .groups import (
    AbelianGroup,
    CarnotGroup,
    GroupModel,
    HyperbolicPlane,
    RiemannianMetric,
    embed_control,
    left_translate_tangent,
    pullback_tangent,
    riemannian_norm,
)

#: headroom used when suggesting a rescaling of tau for the growth condition
GROWTH_EPS = 0.05

#: tau rates below this stall the new parameter
STALL_TOL = 1e-10


class TimeForm:
    """A 1-form splitting the causal cone field into past and future."""

    model: GroupModel

    def value(self, p, v) -> float:
        """tau_p(v) for a chart tangent vector v at p."""
        raise NotImplementedError

    def value_at_identity(self, u) -> float:
        raise NotImplementedError


class LeftInvariantForm(TimeForm):
    """Spread of a covector at the identity by left translations."""

    def __init__(self, tau0, model: GroupModel) -> None:
        self.tau0 = as_vector(tau0, model.point_dim, "tau0")
        self.model = model

    def __repr__(self) -> str:
        return f"LeftInvariantForm(tau0={self.tau0.tolist()}, model={self.model!r})"

    def value(self, p, v) -> float:
        return float(self.tau0 @ pullback_tangent(self.model, p, v))

    def value_at_identity(self, u) -> float:
        return float(self.tau0 @ as_vector(u, self.model.point_dim))


class HyperbolicAB(TimeForm):
    """The family (a dx + b dy)/y on the hyperbolic plane."""

    def __init__(self, a: float, b: float) -> None:
        self.a = float(a)
        self.b = float(b)
        self.model = HyperbolicPlane()

    def __repr__(self) -> str:
        return f"HyperbolicAB(a={self.a}, b={self.b})"

    def value(self, p, v) -> float:
        p = self.model.validate_point(p)
        v = as_vector(v, 2)
        return (self.a * v[0] + self.b * v[1]) / p[1]

    def value_at_identity(self, u) -> float:
        u = as_vector(u, 2)
        return self.a * u[0] + self.b * u[1]


def evaluate(form: TimeForm, p, v) -> float:
    return form.value(p, v)


def exterior_derivative_fd(form: TimeForm, p, v, w, h: float = 1e-3) -> float:
    """Central finite-difference d(tau)_p(v, w) on constant chart fields.

    Commuting coordinate fields make d(tau)(v, w) = d_v tau(w) - d_w tau(v);
    the approximation error is O(h^2).
    """
    p = form.model.validate_point(p)
    v = as_vector(v, form.model.point_dim)
    w = as_vector(w, form.model.point_dim)
    if isinstance(form.model, HyperbolicPlane):
        for q in (p + h * v, p - h * v, p + h * w, p - h * w):
            if q[1] <= 0.0:
                raise InvalidPointError(f"stencil leaves y > 0 at {q}")
    d_v = (form.value(p + h * v, w) - form.value(p - h * v, w)) / (2.0 * h)
    d_w = (form.value(p + h * w, v) - form.value(p - h * w, v)) / (2.0 * h)
    return d_v - d_w


def potential(form: TimeForm, p) -> float:
    """The function T with dT = tau, normalized to T(identity) = 0.

    Raises NotExactError when the form is not exact on the model: hyperbolic
    forms with a != 0, or Carnot covectors not vanishing on [g, g].
    """
    if isinstance(form, HyperbolicAB):
        if form.a != 0.0:
            raise NotExactError(f"(a dx + b dy)/y with a = {form.a} != 0 is not closed")
        p = form.model.validate_point(p)
        return float(form.b * np.log(p[1]))
    if isinstance(form, LeftInvariantForm):
        model = form.model
        if isinstance(model, AbelianGroup):
            return float(form.tau0 @ model.validate_point(p))
        if isinstance(model, HyperbolicPlane):
            if form.tau0[0] != 0.0:
                raise NotExactError("left-invariant hyperbolic form with a != 0 "
                                    "is not closed")
            p = model.validate_point(p)
            return float(form.tau0[1] * np.log(p[1]))
        if isinstance(model, CarnotGroup):
            m1 = model.algebra.layer_dims[0]
            if np.any(form.tau0[m1:] != 0.0):
                raise NotExactError("covector does not vanish on [g, g]; the "
                                    "left-invariant spread is not closed")
            return float(form.tau0 @ model.validate_point(p))
    raise TypeError(f"unsupported form {form!r}")


def is_exact(form: TimeForm) -> bool:
    try:
        potential(form, form.model.identity())
    except NotExactError:
        return False
    return True


# ---------------------------------------------------------------------------
# Growth condition diagnostics
# ---------------------------------------------------------------------------


@dataclass
class GrowthReport:
    """Sampled supremum of |xi| / tau(xi) over identity cone directions.

    In the invariant setting a finite ratio rho certifies the sublinear
    growth condition globally once tau is multiplied by rho * (1 + eps).
    """

    passed: bool
    rho: float
    tau_scale: float
    offending_direction: Optional[np.ndarray] = None

    def summary(self) -> str:
        if not self.passed:
            return (f"growth condition FAILS: tau vanishes on cone direction "
                    f"{self.offending_direction}")
        return (f"growth ratio rho = {self.rho:.6g}; "
                f"scale tau by {self.tau_scale:.6g} for a unit bound")


def _extreme_directions(cone: Cone, samples: int, rng) -> np.ndarray:
    """Directions spanning the cone's extreme rays (exact for polyhedral,
    sampled boundary for quadratic cones)."""
    if isinstance(cone, PolyhedralCone):
        return cone._unit.copy()
    if isinstance(cone, LorentzCone):
        return cone.boundary_directions(samples, rng)
    if isinstance(cone, LinearImageCone):
        dirs = _extreme_directions(cone.base, samples, rng) @ cone.map.T
        return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    raise TypeError(f"unsupported cone {cone!r}")


def check_growth_condition(form: TimeForm, cone: Cone, metric: RiemannianMetric,
                           samples: int = 2048, seed: int = 0) -> GrowthReport:
    """Check tau > 0 on the cone minus the origin and bound |xi| / tau(xi).

    Everything is evaluated at the identity; left invariance transports the
    bound to every point, giving the distance-weighted inequality globally.
    """
    rng = np.random.default_rng(seed)
    model = form.model
    ident = model.identity()
    dirs = _extreme_directions(cone, samples, rng)
    inner = cone.sample(samples, rng)
    norms = np.linalg.norm(inner, axis=1, keepdims=True)
    dirs = np.vstack([dirs, inner[norms[:, 0] > 0] / norms[norms[:, 0] > 0]])

    rho = 0.0
    for d in dirs:
        full = embed_control(model, d)
        tau_d = form.value_at_identity(full)
        nrm = riemannian_norm(metric, model, ident, full)
        if tau_d <= 1e-12 * nrm:
            return GrowthReport(passed=False, rho=np.inf, tau_scale=np.inf,
                                offending_direction=d)
        rho = max(rho, nrm / tau_d)
    return GrowthReport(passed=True, rho=rho, tau_scale=rho * (1.0 + GROWTH_EPS))


# ---------------------------------------------------------------------------
# Unit-time sections
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class UnitTimeSection:
    """The slice U = {xi in cone at base : tau(xi) = 1}."""

    cone: Cone
    form: TimeForm
    base: np.ndarray

    @property
    def model(self) -> GroupModel:
        return self.form.model


def section_sup_norm(section: UnitTimeSection, metric: RiemannianMetric,
                     samples: int = 2048, seed: int = 0) -> float:
    """Supremum of the metric norm over the unit-time slice at the base point.

    The slice is a compact convex body whose extreme points sit on extreme
    rays of the cone, so the norm maximum is taken there: exact vertex
    enumeration for polyhedral cones, sampled boundary for quadratic ones.
    Raises UnboundedSectionError when tau fails to be positive on some ray.
    """
    rng = np.random.default_rng(seed)
    model = section.model
    base = model.validate_point(section.base)
    dirs = _extreme_directions(section.cone, samples, rng)
    if len(dirs) == 0:
        return 0.0
    best = 0.0
    for d in dirs:
        full = embed_control(model, d)
        tau_d = section.form.value_at_identity(full)
        if tau_d <= 1e-12:
            raise UnboundedSectionError(
                f"tau is not positive on the extreme direction {d.tolist()}; "
                "the unit-time slice is unbounded")
        vertex = full / tau_d
        chart = left_translate_tangent(model, base, vertex)
        best = max(best, riemannian_norm(metric, model, base, chart))
    return best


# ---------------------------------------------------------------------------
# Reparametrization by accumulated tau-time
# ---------------------------------------------------------------------------


def _segment_tau_rates(traj: Trajectory, form: TimeForm, subsamples: int = 64
                       ) -> np.ndarray:
    """Average tau(velocity) per segment.

    With the generating control available the rate is exact: tau is
    left-invariant, so tau(velocity) = tau_identity(u_k) throughout the
    segment.  Hyperbolic coordinate forms are integrated by a composite
    midpoint rule along the exact segment curve; control-free trajectories
    fall back to chord differences at chart midpoints.
    """
    n = len(traj.times) - 1
    h = np.diff(traj.times)
    rates = np.empty(n)
    model = traj.model
    if traj.control is not None:
        u = traj.control.values
        for k in range(n):
            uk = u[k]
            if isinstance(model, CarnotGroup) and uk.shape[0] == model.control_dim:
                uk = model.algebra.embed_first_layer(uk)
            if isinstance(form, LeftInvariantForm):
                rates[k] = form.value_at_identity(uk)
            else:
                # composite midpoint along the exact one-parameter segment
                sub = (np.arange(subsamples) + 0.5) / subsamples
                acc = 0.0
                for s in sub:
                    q = model.exp_step(traj.points[k], uk, s * h[k])
                    acc += form.value(q, left_translate_tangent(model, q, uk))
                rates[k] = acc / subsamples
    else:
        for k in range(n):
            mid = 0.5 * (traj.points[k] + traj.points[k + 1])
            vel = (traj.points[k + 1] - traj.points[k]) / h[k]
            rates[k] = form.value(mid, vel)
    return rates


def reparametrize(traj: Trajectory, form: TimeForm) -> Trajectory:
    """Re-grid the path by s(t) = integral of tau(velocity).

    The result runs over [0, s1] with unit tau-speed; raises
    StalledParameterError when tau(velocity) < 1e-10 on a segment.
    """
    rates = _segment_tau_rates(traj, form)
    if np.any(rates < STALL_TOL):
        k = int(np.argmin(rates))
        raise StalledParameterError(
            f"tau(velocity) = {rates[k]:.3g} on segment {k}; "
            "the new parameter stalls")
    h = np.diff(traj.times)
    s = np.concatenate([[0.0], np.cumsum(h * rates)])
    return Trajectory(model=traj.model, times=s, points=traj.points.copy(),
                      z=None if traj.z is None else traj.z.copy(), control=None)


def tau_duration(traj: Trajectory, form: TimeForm) -> float:
    """Total tau-time of the path: the integral of tau along it."""
    h = np.diff(traj.times)
    return float(np.sum(h * _segment_tau_rates(traj, form)))
