"""Computable group models: abelian R^n, the hyperbolic plane R x R_+, and
Carnot groups in exponential coordinates.

Carnot group elements are stored as Lie-algebra vectors (log coordinates);
products go through the Baker-Campbell-Hausdorff series, which terminates
at the nilpotency step and is hardcoded through step 4.
"""

from __future__ import annotations

from typing import Dict, Optional, Tuple

import numpy as np

from .cones import as_vector
from .errors import InvalidPointError, UnsupportedStepError

MAX_STEP = 4


# ---------------------------------------------------------------------------
# Carnot algebras
# ---------------------------------------------------------------------------


class CarnotAlgebra:
    """Stratified nilpotent Lie algebra g = g_1 + ... + g_s with g_1 generating.

    ``table[i, j, k]`` is the e_k-component of [e_i, e_j] in a basis ordered
    layer by layer.  Antisymmetry, grading, the Jacobi identity, and the
    generating property of g_1 are validated eagerly.
    """

    def __init__(self, layer_dims: Tuple[int, ...], table: np.ndarray) -> None:
        layer_dims = tuple(int(d) for d in layer_dims)
        if len(layer_dims) == 0 or any(d < 1 for d in layer_dims):
            raise ValueError("layer dims must be positive (top layer nonzero)")
        n = sum(layer_dims)
        table = np.asarray(table, dtype=float)
        if table.shape != (n, n, n):
            raise ValueError(f"structure table must be {(n, n, n)}, got {table.shape}")
        self.layer_dims = layer_dims
        self.step = len(layer_dims)
        self.dim = n
        self.table = table
        self.layer_of = np.concatenate(
            [np.full(d, ell + 1) for ell, d in enumerate(layer_dims)])
        self._validate()

    # -- construction helpers ------------------------------------------------

    @classmethod
    def from_brackets(cls, layer_dims, brackets: Dict[Tuple[int, int], Dict[int, float]]
                      ) -> "CarnotAlgebra":
        """Build from sparse entries {(i, j): {k: coeff}} meaning
        [e_i, e_j] = sum_k coeff * e_k; the (j, i) mirror is filled in."""
        n = sum(layer_dims)
        table = np.zeros((n, n, n))
        for (i, j), comps in brackets.items():
            for k, c in comps.items():
                table[i, j, k] += c
                table[j, i, k] -= c
        return cls(tuple(layer_dims), table)

    def _validate(self) -> None:
        t = self.table
        if not np.allclose(t, -np.transpose(t, (1, 0, 2)), atol=1e-12):
            raise ValueError("structure table is not antisymmetric")
        lo = self.layer_of
        for i in range(self.dim):
            for j in range(self.dim):
                nz = np.nonzero(np.abs(t[i, j]) > 1e-15)[0]
                if len(nz) and np.any(lo[nz] != lo[i] + lo[j]):
                    raise ValueError(
                        f"grading violated: [e_{i}, e_{j}] leaves layer {lo[i] + lo[j]}")
        # Jacobi on basis triples: [ei,[ej,ek]] + cyclic = 0
        jac = (np.einsum("jkm,iml->ijkl", t, t)
               + np.einsum("kim,jml->ijkl", t, t)
               + np.einsum("ijm,kml->ijkl", t, t))
        worst = np.max(np.abs(jac))
        if worst > 1e-12:
            raise ValueError(f"Jacobi identity fails on basis triples (max {worst:.3g})")
        # g_1 must generate: [g_1, g_i] spans g_{i+1}
        start = np.concatenate([[0], np.cumsum(self.layer_dims)])
        for ell in range(1, self.step):
            rows = []
            for i in range(self.layer_dims[0]):
                for j in range(start[ell - 1], start[ell]):
                    rows.append(t[i, j, start[ell]:start[ell + 1]])
            rank = np.linalg.matrix_rank(np.array(rows), tol=1e-10)
            if rank < self.layer_dims[ell]:
                raise ValueError(f"[g_1, g_{ell}] does not span g_{ell + 1}")

    # -- algebra operations ----------------------------------------------------

    def bracket(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.einsum("ijk,i,j->k", self.table, a, b)

    def ad(self, a: np.ndarray) -> np.ndarray:
        """Matrix of ad_a = [a, .]."""
        return np.einsum("ijk,i->kj", self.table, a)

    def first_layer_slice(self) -> slice:
        return slice(0, self.layer_dims[0])

    def embed_first_layer(self, u: np.ndarray) -> np.ndarray:
        m1 = self.layer_dims[0]
        out = np.zeros(self.dim)
        out[:m1] = as_vector(u, m1, "first-layer control")
        return out


def first_layer_projection(algebra: CarnotAlgebra, xi) -> np.ndarray:
    """Projection onto g_1 along [g, g] (zero out layers >= 2)."""
    xi = as_vector(xi, algebra.dim)
    out = np.zeros_like(xi)
    m1 = algebra.layer_dims[0]
    out[:m1] = xi[:m1]
    return out


# BCH series through total order 4; exact on algebras of step <= 4.
def bch_log_product(algebra: CarnotAlgebra, a, b) -> np.ndarray:
    """log(exp(a) exp(b)) for g-vectors a, b."""
    if algebra.step > MAX_STEP:
        raise UnsupportedStepError(f"BCH truncation covers step <= {MAX_STEP}, "
                                   f"algebra has step {algebra.step}")
    a = as_vector(a, algebra.dim)
    b = as_vector(b, algebra.dim)
    br = algebra.bracket
    ab = br(a, b)
    z = a + b + 0.5 * ab
    if algebra.step >= 3:
        aab = br(a, ab)
        bab = br(b, ab)
        z += (aab - bab) / 12.0
        if algebra.step >= 4:
            z -= br(b, aab) / 24.0
    return z


def bch_jacobians(algebra: CarnotAlgebra, a, b) -> Tuple[np.ndarray, np.ndarray]:
    """Matrices (D_a bch, D_b bch) at (a, b); exact for step <= 4.

    Derived term by term from the order-4 series; the ad-nilpotency of the
    grading makes every product below finite.
    """
    if algebra.step > MAX_STEP:
        raise UnsupportedStepError(f"step {algebra.step} > {MAX_STEP}")
    a = as_vector(a, algebra.dim)
    b = as_vector(b, algebra.dim)
    n = algebra.dim
    I = np.eye(n)
    A = algebra.ad(a)
    B = algebra.ad(b)
    ab = algebra.bracket(a, b)
    Da = I - 0.5 * B
    Db = I + 0.5 * A
    if algebra.step >= 3:
        ad_ab = algebra.ad(ab)
        Da += (-ad_ab - A @ B + B @ B) / 12.0
        Db += (A @ A + ad_ab - B @ A) / 12.0
        if algebra.step >= 4:
            aab = algebra.bracket(a, ab)
            Da += (B @ ad_ab + B @ A @ B) / 24.0
            Db += (algebra.ad(aab) - B @ A @ A) / 24.0
    return Da, Db


def left_translation_jacobian(algebra: CarnotAlgebra, xi) -> np.ndarray:
    """Chart matrix of d(L_p) at the identity, p = exp(xi): the chart velocity
    of t -> p exp(t u) at t = 0 is this matrix applied to u."""
    if algebra.step > MAX_STEP:
        raise UnsupportedStepError(f"step {algebra.step} > {MAX_STEP}")
    xi = as_vector(xi, algebra.dim)
    A = algebra.ad(xi)
    return np.eye(algebra.dim) + 0.5 * A + (A @ A) / 12.0


# ---------------------------------------------------------------------------
# Group models
# ---------------------------------------------------------------------------


class GroupModel:
    """Base class: a group with identity, product, inverse, exponential flow
    and a global chart (points are coordinate vectors)."""

    point_dim: int
    control_dim: int

    def identity(self) -> np.ndarray:
        raise NotImplementedError

    def validate_point(self, p) -> np.ndarray:
        return as_vector(p, self.point_dim, "point")

    def multiply(self, p, q) -> np.ndarray:
        raise NotImplementedError

    def inverse(self, p) -> np.ndarray:
        raise NotImplementedError

    def exp_step(self, p, u, h: float) -> np.ndarray:
        """p . exp(h u), u a tangent vector at the identity."""
        raise NotImplementedError

    def log(self, p) -> np.ndarray:
        """Inverse of exp at the identity (group logarithm in the chart)."""
        raise NotImplementedError


class AbelianGroup(GroupModel):
    """R^n under addition."""

    def __init__(self, dim: int) -> None:
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = int(dim)
        self.point_dim = self.dim
        self.control_dim = self.dim

    def __repr__(self) -> str:
        return f"AbelianGroup(dim={self.dim})"

    def identity(self):
        return np.zeros(self.dim)

    def multiply(self, p, q):
        return self.validate_point(p) + self.validate_point(q)

    def inverse(self, p):
        return -self.validate_point(p)

    def exp_step(self, p, u, h):
        return self.validate_point(p) + h * as_vector(u, self.dim)

    def log(self, p):
        return self.validate_point(p)


class HyperbolicPlane(GroupModel):
    """The semidirect product R x R_+ with (x1,y1).(x2,y2) = (x1+y1x2, y1y2),
    a model of the Lobachevsky plane; points (x, y) require y > 0."""

    point_dim = 2
    control_dim = 2

    def __repr__(self) -> str:
        return "HyperbolicPlane()"

    def identity(self):
        return np.array([0.0, 1.0])

    def validate_point(self, p):
        p = as_vector(p, 2, "point")
        if p[1] <= 0.0:
            raise InvalidPointError(f"hyperbolic point needs y > 0, got y = {p[1]}")
        return p

    def multiply(self, p, q):
        p = self.validate_point(p)
        q = self.validate_point(q)
        return np.array([p[0] + p[1] * q[0], p[1] * q[1]])

    def inverse(self, p):
        p = self.validate_point(p)
        return np.array([-p[0] / p[1], 1.0 / p[1]])

    def exp(self, u, t: float = 1.0) -> np.ndarray:
        """One-parameter subgroup exp(t(alpha, beta)) through the identity."""
        alpha, beta = as_vector(u, 2)
        if abs(beta) < 1e-300:
            return np.array([t * alpha, 1.0])
        ebt = np.exp(t * beta)
        return np.array([(alpha / beta) * (ebt - 1.0), ebt])

    def exp_step(self, p, u, h):
        return self.multiply(p, self.exp(u, h))

    def log(self, p):
        p = self.validate_point(p)
        x, y = p
        beta = np.log(y)
        w = y - 1.0
        if abs(w) < 1e-8:
            # log(1+w)/w = 1 - w/2 + w^2/3 - ...
            ratio = 1.0 - w / 2.0 + w * w / 3.0
        else:
            ratio = beta / w
        return np.array([x * ratio, beta])


class CarnotGroup(GroupModel):
    """Carnot group in exponential coordinates over a stratified algebra."""

    def __init__(self, algebra: CarnotAlgebra) -> None:
        self.algebra = algebra
        self.point_dim = algebra.dim
        self.control_dim = algebra.layer_dims[0]

    def __repr__(self) -> str:
        return f"CarnotGroup(layers={self.algebra.layer_dims})"

    def identity(self):
        return np.zeros(self.point_dim)

    def multiply(self, p, q):
        return bch_log_product(self.algebra,
                               self.validate_point(p), self.validate_point(q))

    def inverse(self, p):
        return -self.validate_point(p)

    def exp_step(self, p, u, h):
        u = as_vector(u)
        if u.shape[0] == self.algebra.layer_dims[0]:
            u = self.algebra.embed_first_layer(u)
        return bch_log_product(self.algebra, self.validate_point(p), h * u)

    def log(self, p):
        return self.validate_point(p)


def embed_control(model: GroupModel, u) -> np.ndarray:
    """Lift a control-space vector to a full identity tangent vector
    (first-layer Carnot controls gain zero components on [g, g])."""
    u = as_vector(u, name="control")
    if isinstance(model, CarnotGroup) and u.shape[0] == model.control_dim:
        return model.algebra.embed_first_layer(u)
    return as_vector(u, model.point_dim, "control")


def left_translate_tangent(model: GroupModel, p, u) -> np.ndarray:
    """Chart components at p of the left-translate of the identity tangent u."""
    p = model.validate_point(p)
    u = as_vector(u, model.point_dim, "tangent vector")
    if isinstance(model, AbelianGroup):
        return u.copy()
    if isinstance(model, HyperbolicPlane):
        return p[1] * u
    if isinstance(model, CarnotGroup):
        return left_translation_jacobian(model.algebra, p) @ u
    raise TypeError(f"unsupported model {model!r}")


def pullback_tangent(model: GroupModel, p, v) -> np.ndarray:
    """Identity tangent whose left-translate at p has chart components v."""
    p = model.validate_point(p)
    v = as_vector(v, model.point_dim, "tangent vector")
    if isinstance(model, AbelianGroup):
        return v.copy()
    if isinstance(model, HyperbolicPlane):
        return v / p[1]
    if isinstance(model, CarnotGroup):
        return np.linalg.solve(left_translation_jacobian(model.algebra, p), v)
    raise TypeError(f"unsupported model {model!r}")


def group_mul(model: GroupModel, p, q) -> np.ndarray:
    return model.multiply(p, q)


def group_inv(model: GroupModel, p) -> np.ndarray:
    return model.inverse(p)


def exp_step(model: GroupModel, p, u, h: float) -> np.ndarray:
    return model.exp_step(p, u, h)


# ---------------------------------------------------------------------------
# Riemannian norms
# ---------------------------------------------------------------------------


class RiemannianMetric:
    pass


class EuclideanMetric(RiemannianMetric):
    def __repr__(self):
        return "EuclideanMetric()"


class LobachevskyMetric(RiemannianMetric):
    """(dx^2 + dy^2)/y^2 on the hyperbolic plane (left-invariant)."""

    def __repr__(self):
        return "LobachevskyMetric()"


class LeftInvariantQuadratic(RiemannianMetric):
    """Left-invariant metric from a positive-definite form at the identity."""

    def __init__(self, form) -> None:
        Q = np.asarray(form, dtype=float)
        if np.any(np.linalg.eigvalsh(0.5 * (Q + Q.T)) <= 0):
            raise ValueError("form at identity must be positive definite")
        self.form = 0.5 * (Q + Q.T)

    def __repr__(self):
        return f"LeftInvariantQuadratic(dim={self.form.shape[0]})"


def riemannian_norm(metric: RiemannianMetric, model: GroupModel, p, v) -> float:
    """Norm of the chart tangent vector v at the point p."""
    v = as_vector(v, model.point_dim, "tangent vector")
    p = model.validate_point(p)
    if isinstance(metric, EuclideanMetric):
        return float(np.linalg.norm(v))
    if isinstance(metric, LobachevskyMetric):
        if not isinstance(model, HyperbolicPlane):
            raise ValueError("Lobachevsky metric lives on the hyperbolic plane")
        return float(np.linalg.norm(v) / p[1])
    if isinstance(metric, LeftInvariantQuadratic):
        if isinstance(model, AbelianGroup):
            w = v
        elif isinstance(model, HyperbolicPlane):
            w = v / p[1]
        elif isinstance(model, CarnotGroup):
            w = np.linalg.solve(left_translation_jacobian(model.algebra, p), v)
        else:
            raise TypeError(f"unsupported model {model!r}")
        return float(np.sqrt(w @ metric.form @ w))
    raise TypeError(f"unsupported metric {metric!r}")


def natural_metric(model: GroupModel) -> RiemannianMetric:
    """The model's invariant reference metric used for diagnostics."""
    if isinstance(model, HyperbolicPlane):
        return LobachevskyMetric()
    return EuclideanMetric()


# ---------------------------------------------------------------------------
# Stock algebras and the structure-constant file format
# ---------------------------------------------------------------------------


def minkowski_area_algebra(r: int) -> CarnotAlgebra:
    """Step-2 algebra with first layer R^{1+r} (time e_0, space e_1..e_r) and
    second layer spanned by y_1..y_r with [a, b]_i = a_0 b_i - b_0 a_i; the
    second-layer coordinates integrate oriented areas in the (e_0, e_i) planes.
    """
    if r < 1:
        raise ValueError("need at least one spatial coordinate")
    brackets = {(0, i): {r + i: 1.0} for i in range(1, r + 1)}
    return CarnotAlgebra.from_brackets((r + 1, r), brackets)


def heisenberg_algebra() -> CarnotAlgebra:
    """The 3-dimensional Heisenberg algebra: [e_0, e_1] = y."""
    return minkowski_area_algebra(1)


def parse_structure_constants(text: str) -> CarnotAlgebra:
    """Parse the textual structure-constant format.

    First non-comment line: ``layers: d1 d2 ... ds``.  Each following line
    ``i j k coeff`` declares the e_k-component of [e_i, e_j] (0-based basis
    indices); the antisymmetric mirror is implied and giving both orders
    with inconsistent coefficients is an error.
    """
    layer_dims: Optional[Tuple[int, ...]] = None
    entries: Dict[Tuple[int, int, int], float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if layer_dims is None:
            if not line.startswith("layers:"):
                raise ValueError(f"line {lineno}: expected 'layers: d1 d2 ...' header")
            layer_dims = tuple(int(tok) for tok in line[len("layers:"):].split())
            if not layer_dims:
                raise ValueError(f"line {lineno}: empty layer list")
            continue
        toks = line.split()
        if len(toks) != 4:
            raise ValueError(f"line {lineno}: expected 'i j k coeff', got {line!r}")
        i, j, k = (int(t) for t in toks[:3])
        coeff = float(toks[3])
        n = sum(layer_dims)
        if not (0 <= i < n and 0 <= j < n and 0 <= k < n):
            raise ValueError(f"line {lineno}: basis index out of range (dim {n})")
        if (i, j, k) in entries:
            raise ValueError(f"line {lineno}: duplicate entry for [e_{i}, e_{j}] -> e_{k}")
        if (j, i, k) in entries and entries[(j, i, k)] != -coeff:
            raise ValueError(f"line {lineno}: conflicts with mirror entry [e_{j}, e_{i}]")
        entries[(i, j, k)] = coeff
    if layer_dims is None:
        raise ValueError("missing 'layers:' header")
    n = sum(layer_dims)
    table = np.zeros((n, n, n))
    for (i, j, k), coeff in entries.items():
        table[i, j, k] = coeff
        if (j, i, k) not in entries:
            table[j, i, k] = -coeff
    return CarnotAlgebra(layer_dims, table)


def load_structure_constants(path) -> CarnotAlgebra:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_structure_constants(fh.read())


def format_structure_constants(algebra: CarnotAlgebra) -> str:
    lines = ["layers: " + " ".join(str(d) for d in algebra.layer_dims)]
    n = algebra.dim
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                c = algebra.table[i, j, k]
                if c != 0.0:
                    lines.append(f"{i} {j} {k} {c:.17g}")
    return "\n".join(lines) + "\n"
