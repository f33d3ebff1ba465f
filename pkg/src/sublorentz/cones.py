"""Closed convex cones, antinorms on them, and strictly positive time covectors.

Three cone representations are supported: finitely generated (polyhedral),
one nappe of a quadratic cone of signature (1, r) (Lorentz), and an
invertible linear image of another cone.  An antinorm is a positively
homogeneous, superadditive functional that is nonnegative on its cone and
-inf off it; -inf is represented by the IEEE float('-inf'), for which
arithmetic is total.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog, nnls

from .errors import DimensionMismatchError, NotPointedError

NEG_INF = float("-inf")

#: default relative membership tolerance (the paper-exact sets need a band)
DEFAULT_TOL = 1e-9


def as_vector(x, dim: Optional[int] = None, name: str = "vector") -> np.ndarray:
    """Validate and convert to a finite 1-d float array."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatchError(f"{name} must be 1-d, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries: {v}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatchError(f"{name} has dim {v.shape[0]}, expected {dim}")
    return v


# ---------------------------------------------------------------------------
# Cones
# ---------------------------------------------------------------------------


class Cone:
    """Base class: a closed convex cone in R^dim with apex at the origin."""

    dim: int

    def contains(self, v, tol: float = DEFAULT_TOL) -> bool:
        raise NotImplementedError

    def is_pointed(self) -> bool:
        raise NotImplementedError

    def project(self, v) -> np.ndarray:
        """Projection onto the cone (Euclidean, or Euclidean in the cone's
        natural diagonalizing coordinates for quadratic cones)."""
        raise NotImplementedError

    def project_batch(self, V: np.ndarray) -> np.ndarray:
        return np.array([self.project(v) for v in V])

    def interior_direction(self) -> np.ndarray:
        """A unit vector in the relative interior (requires pointedness)."""
        raise NotImplementedError

    def sample(self, n: int, rng: np.random.Generator,
               boundary_fraction: float = 0.25,
               relative_interior: bool = False) -> np.ndarray:
        """Draw n cone points, (n, dim). Deterministic given the rng state."""
        raise NotImplementedError


class PolyhedralCone(Cone):
    """Cone generated by nonnegative combinations of a finite generator set."""

    def __init__(self, generators: Sequence) -> None:
        G = np.atleast_2d(np.asarray(generators, dtype=float))
        if G.ndim != 2 or G.shape[0] == 0:
            raise ValueError("need a nonempty generator list")
        if not np.all(np.isfinite(G)):
            raise ValueError("generators must be finite")
        self.generators = G            # rows are generators
        self.dim = G.shape[1]
        norms = np.linalg.norm(G, axis=1)
        self._nonzero = G[norms > 0]
        self._unit = (self._nonzero / np.linalg.norm(self._nonzero, axis=1, keepdims=True)
                      if len(self._nonzero) else np.zeros((0, self.dim)))

    def __repr__(self) -> str:
        return f"PolyhedralCone({self.generators.tolist()})"

    def contains(self, v, tol: float = DEFAULT_TOL) -> bool:
        v = as_vector(v, self.dim)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return True
        if len(self._nonzero) == 0:
            return False
        # distance to the cone via nonnegative least squares on coefficients
        _, residual = nnls(self._nonzero.T, v)
        return residual <= tol * nv

    def is_pointed(self) -> bool:
        # not pointed <=> some convex combination of unit generators is 0:
        # minimize t s.t. |G^T nu|_inf <= t, sum nu = 1, nu >= 0
        U = self._unit
        if len(U) == 0:
            return True
        k, d = U.shape
        c = np.zeros(k + 1)
        c[-1] = 1.0
        A_ub = np.block([[U.T, -np.ones((d, 1))], [-U.T, -np.ones((d, 1))]])
        b_ub = np.zeros(2 * d)
        A_eq = np.zeros((1, k + 1))
        A_eq[0, :k] = 1.0
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                      bounds=[(0, None)] * k + [(0, None)], method="highs")
        if not res.success:
            raise RuntimeError(f"pointedness LP failed: {res.message}")
        return res.fun > 1e-9

    def project(self, v) -> np.ndarray:
        v = as_vector(v, self.dim)
        if len(self._nonzero) == 0:
            return np.zeros(self.dim)
        lam, _ = nnls(self._nonzero.T, v)
        return self._nonzero.T @ lam

    def interior_direction(self) -> np.ndarray:
        if len(self._unit) == 0:
            raise ValueError("trivial cone has no interior direction")
        d = self._unit.sum(axis=0)
        n = np.linalg.norm(d)
        if n < 1e-12:
            raise NotPointedError("generator average vanishes; cone not pointed")
        return d / n

    def sample(self, n, rng, boundary_fraction=0.25, relative_interior=False):
        k = len(self._nonzero)
        if k == 0:
            return np.zeros((n, self.dim))
        lam = rng.exponential(1.0, size=(n, k))
        if relative_interior:
            lam += 0.05
        else:
            on_boundary = rng.random(n) < boundary_fraction
            if k > 1:
                mask = rng.random((n, k)) < 0.5
                mask[np.arange(n), rng.integers(0, k, n)] = False  # keep one
                lam[on_boundary] = np.where(mask[on_boundary], 0.0, lam[on_boundary])
        scale = 10.0 ** rng.uniform(-1.0, 1.0, size=(n, 1))
        return (lam * scale) @ self._nonzero


class LorentzCone(Cone):
    """One nappe of {v : v^T A v >= 0} for a symmetric form A of signature (1, r).

    The nappe is the connected component on which ``nappe_selector`` is
    positive; the selector must be strictly positive on the whole nappe
    minus the origin.
    """

    def __init__(self, form, nappe_selector) -> None:
        A = np.asarray(form, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("form must be a square matrix")
        if not np.allclose(A, A.T, atol=1e-12):
            raise ValueError("form must be symmetric")
        self.form = 0.5 * (A + A.T)
        self.dim = A.shape[0]
        self.nappe_selector = as_vector(nappe_selector, self.dim, "nappe_selector")

        w, U = np.linalg.eigh(self.form)
        if np.sum(w > 1e-12) != 1 or np.sum(w < -1e-12) != self.dim - 1:
            raise ValueError(f"form must have signature (1, {self.dim - 1}), eigenvalues {w}")
        i0 = int(np.argmax(w))
        axis = U[:, i0]
        s = float(self.nappe_selector @ axis)
        if abs(s) < 1e-12:
            raise ValueError("nappe_selector vanishes on the timelike axis")
        axis = axis if s > 0 else -axis
        # diagonalizing coordinates b = W v with cone {b0 >= |b_1..r|}
        rest = [i for i in range(self.dim) if i != i0]
        W = np.empty((self.dim, self.dim))
        W[0] = np.sqrt(w[i0]) * axis
        for row, i in enumerate(rest, start=1):
            W[row] = np.sqrt(-w[i]) * U[:, i]
        self._W = W
        self._Winv = np.linalg.inv(W)
        self._axis = self._Winv[:, 0] / np.linalg.norm(self._Winv[:, 0])
        self._form_scale = float(np.max(np.abs(w)))
        cb = self._Winv.T @ self.nappe_selector
        if cb[0] <= np.linalg.norm(cb[1:]) * (1 + 1e-12):
            raise ValueError("nappe_selector is not strictly positive on the nappe")

    def __repr__(self) -> str:
        return f"LorentzCone(dim={self.dim})"

    def quadratic(self, v) -> float:
        v = as_vector(v, self.dim)
        return float(v @ self.form @ v)

    def contains(self, v, tol: float = DEFAULT_TOL) -> bool:
        v = as_vector(v, self.dim)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return True
        q = self.quadratic(v)
        sel = float(self.nappe_selector @ v)
        return (q >= -tol * self._form_scale * nv * nv
                and sel >= -tol * np.linalg.norm(self.nappe_selector) * nv)

    def is_pointed(self) -> bool:
        # a single nappe of a signature-(1, r) cone never contains a line
        return True

    def project(self, v) -> np.ndarray:
        b = self._W @ as_vector(v, self.dim)
        t, x = b[0], b[1:]
        nx = np.linalg.norm(x)
        if t >= nx:
            pass
        elif t <= -nx:
            b = np.zeros_like(b)
        else:
            a = 0.5 * (t + nx)
            b = np.concatenate(([a], a * x / nx if nx > 0 else x))
        return self._Winv @ b

    def project_batch(self, V: np.ndarray) -> np.ndarray:
        B = V @ self._W.T
        t, X = B[:, 0], B[:, 1:]
        nx = np.linalg.norm(X, axis=1)
        out = B.copy()
        zero = t <= -nx
        out[zero] = 0.0
        mid = (~zero) & (t < nx)
        a = 0.5 * (t[mid] + nx[mid])
        out[mid, 0] = a
        out[mid, 1:] = (a / nx[mid])[:, None] * X[mid]
        return out @ self._Winv.T

    def interior_direction(self) -> np.ndarray:
        return self._axis.copy()

    def boundary_directions(self, n: int, rng: Optional[np.random.Generator] = None
                            ) -> np.ndarray:
        """Lightlike unit vectors on the nappe boundary ((n, dim) or fewer)."""
        r = self.dim - 1
        if r == 1:
            dirs = np.array([[1.0, 1.0], [1.0, -1.0]])
        else:
            rng = rng or np.random.default_rng(0)
            phi = rng.standard_normal((n, r))
            phi /= np.linalg.norm(phi, axis=1, keepdims=True)
            dirs = np.hstack([np.ones((n, 1)), phi])
        V = dirs @ self._Winv.T
        return V / np.linalg.norm(V, axis=1, keepdims=True)

    def sample(self, n, rng, boundary_fraction=0.25, relative_interior=False):
        r = self.dim - 1
        phi = rng.standard_normal((n, r))
        norms = np.linalg.norm(phi, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        phi /= norms
        rho = rng.random(n)
        if relative_interior:
            rho *= 0.95
        else:
            rho[rng.random(n) < boundary_fraction] = 1.0
        mag = 10.0 ** rng.uniform(-1.0, 1.0, n)
        b = np.hstack([mag[:, None], (mag * rho)[:, None] * phi])
        return b @ self._Winv.T


class LinearImageCone(Cone):
    """Image of a base cone under an invertible linear map."""

    def __init__(self, base: Cone, map_matrix) -> None:
        M = np.asarray(map_matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] != base.dim:
            raise ValueError("map must be square and match the base cone dim")
        if abs(np.linalg.det(M)) < 1e-12:
            raise ValueError("map must be invertible")
        self.base = base
        self.map = M
        self._Minv = np.linalg.inv(M)
        self.dim = base.dim

    def __repr__(self) -> str:
        return f"LinearImageCone(base={self.base!r})"

    def contains(self, v, tol: float = DEFAULT_TOL) -> bool:
        return self.base.contains(self._Minv @ as_vector(v, self.dim), tol)

    def is_pointed(self) -> bool:
        return self.base.is_pointed()

    def project(self, v) -> np.ndarray:
        return self.map @ self.base.project(self._Minv @ as_vector(v, self.dim))

    def interior_direction(self) -> np.ndarray:
        d = self.map @ self.base.interior_direction()
        return d / np.linalg.norm(d)

    def sample(self, n, rng, boundary_fraction=0.25, relative_interior=False):
        return self.base.sample(n, rng, boundary_fraction, relative_interior) @ self.map.T


def cone_contains(cone: Cone, v, tol: float = DEFAULT_TOL) -> bool:
    """Whether v lies within relative tolerance tol of the cone."""
    return cone.contains(v, tol)


def is_pointed(cone: Cone) -> bool:
    """Whether cone ∩ (-cone) = {0}."""
    return cone.is_pointed()


# ---------------------------------------------------------------------------
# Time covectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeCovector:
    """A covector strictly positive on the cone minus the origin.

    ``margin`` is min tau(g)/|tau| over unit generators (polyhedral: exact;
    quadratic cones: minimum over sampled lightlike boundary directions).
    """

    components: np.ndarray
    margin: float

    def __call__(self, v) -> float:
        return float(self.components @ np.asarray(v, dtype=float))


def _margin_on(cone: Cone, tau: np.ndarray) -> float:
    ntau = np.linalg.norm(tau)
    if isinstance(cone, PolyhedralCone):
        vals = cone._unit @ tau
        return float(vals.min() / ntau) if len(vals) else np.inf
    if isinstance(cone, LorentzCone):
        dirs = cone.boundary_directions(512)
        return float((dirs @ tau).min() / ntau)
    if isinstance(cone, LinearImageCone):
        return _margin_on(cone.base, cone.map.T @ tau)
    raise TypeError(f"unsupported cone {cone!r}")


def find_time_covector(cone: Cone) -> TimeCovector:
    """A covector tau with tau(xi) > 0 on the cone minus the origin.

    Polyhedral cones: interior point of the polar cone, found by maximizing
    the minimum margin over normalized generators (LP).  Raises
    NotPointedError when no such covector exists.
    """
    if isinstance(cone, LorentzCone):
        tau = cone._W[0].copy()
        return TimeCovector(tau, _margin_on(cone, tau))
    if isinstance(cone, LinearImageCone):
        inner = find_time_covector(cone.base)
        tau = cone._Minv.T @ inner.components
        return TimeCovector(tau, _margin_on(cone, tau))
    if not isinstance(cone, PolyhedralCone):
        raise TypeError(f"unsupported cone {cone!r}")

    U = cone._unit
    if len(U) == 0:
        raise NotPointedError("trivial cone: polar interior is empty only for lines; "
                              "no generators to separate")
    k, d = U.shape
    # maximize m s.t. U tau >= m, |tau|_inf <= 1
    c = np.zeros(d + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-U, np.ones((k, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(k),
                  bounds=[(-1, 1)] * d + [(0, None)], method="highs")
    if not res.success:
        raise RuntimeError(f"time covector LP failed: {res.message}")
    m = -res.fun
    if m <= 1e-9:
        raise NotPointedError("cone contains a line; polar cone has empty interior")
    tau = res.x[:d]
    return TimeCovector(tau, _margin_on(cone, tau))


# ---------------------------------------------------------------------------
# Antinorms
# ---------------------------------------------------------------------------


class Antinorm:
    """Length functional on a cone: homogeneous, superadditive, >= 0 there."""

    def value_on_cone(self, v: np.ndarray) -> float:
        """Value assuming v lies in the paired cone."""
        raise NotImplementedError

    def values_on_cone(self, V: np.ndarray) -> np.ndarray:
        return np.array([self.value_on_cone(v) for v in V])

    def grad_on_cone(self, v: np.ndarray) -> np.ndarray:
        """A (super)gradient at a relative-interior point."""
        raise NotImplementedError

    def grads_on_cone(self, V: np.ndarray) -> np.ndarray:
        return np.array([self.grad_on_cone(v) for v in V])


class LorentzSqrt(Antinorm):
    """nu(v) = sqrt(v^T A v) for a signature-(1, r) form A, the relativistic
    proper-time density."""

    def __init__(self, form) -> None:
        A = np.asarray(form, dtype=float)
        self.form = 0.5 * (A + A.T)
        self.dim = A.shape[0]

    def value_on_cone(self, v):
        # einsum keeps the arithmetic identical to the batched path (the BLAS
        # dot may use FMA, breaking exact cancellation on the light cone)
        q = float(np.einsum("i,ij,j->", v, self.form, v))
        return float(np.sqrt(max(q, 0.0)))

    def values_on_cone(self, V):
        q = np.einsum("ij,jk,ik->i", V, self.form, V)
        return np.sqrt(np.maximum(q, 0.0))

    def grad_on_cone(self, v):
        val = self.value_on_cone(v)
        if val <= 0.0:
            raise ValueError("gradient undefined on the lightlike boundary")
        return (self.form @ v) / val

    def grads_on_cone(self, V):
        vals = self.values_on_cone(V)
        out = np.zeros_like(V)
        ok = vals > 0.0
        out[ok] = (V[ok] @ self.form) / vals[ok, None]
        return out


class MinOfLinear(Antinorm):
    """nu(v) = min_i c_i(v) over a finite covector family (concave, polyhedral)."""

    def __init__(self, family) -> None:
        C = np.atleast_2d(np.asarray(family, dtype=float))
        if C.shape[0] == 0:
            raise ValueError("need a nonempty covector family")
        self.family = C
        self.dim = C.shape[1]
        self._scale = float(np.max(np.abs(C))) or 1.0

    def value_on_cone(self, v):
        val = float((self.family @ v).min())
        # boundary rounding can push an exactly-zero minimum slightly negative
        if -1e-12 * self._scale * (1.0 + np.linalg.norm(v)) <= val < 0.0:
            return 0.0
        return val

    def values_on_cone(self, V):
        vals = (V @ self.family.T).min(axis=1)
        band = 1e-12 * self._scale * (1.0 + np.linalg.norm(V, axis=1))
        return np.where((vals < 0.0) & (vals >= -band), 0.0, vals)

    def grad_on_cone(self, v):
        vals = self.family @ v
        m = vals.min()
        active = self.family[vals <= m + 1e-12 * self._scale * (1.0 + np.linalg.norm(v))]
        return active.mean(axis=0)

    def grads_on_cone(self, V):
        vals = V @ self.family.T
        band = 1e-12 * self._scale * (1.0 + np.linalg.norm(V, axis=1))
        active = vals <= vals.min(axis=1, keepdims=True) + band[:, None]
        weights = active / active.sum(axis=1, keepdims=True)
        return weights @ self.family


class ZeroAntinorm(Antinorm):
    """Identically zero on the cone (still -inf off it)."""

    def value_on_cone(self, v):
        return 0.0

    def values_on_cone(self, V):
        return np.zeros(len(V))

    def grad_on_cone(self, v):
        return np.zeros_like(np.asarray(v, dtype=float))


def antinorm_eval(nu: Antinorm, cone: Cone, v, tol: float = DEFAULT_TOL) -> float:
    """nu(v) on the cone, float('-inf') off it."""
    v = as_vector(v, cone.dim)
    if not cone.contains(v, tol):
        return NEG_INF
    return nu.value_on_cone(v)


# ---------------------------------------------------------------------------
# Axiom checking
# ---------------------------------------------------------------------------


@dataclass
class AxiomCheckReport:
    """Sampled verification of the antinorm axioms on a cone."""

    passed: bool
    samples: int
    homogeneity_failures: int = 0
    superadditivity_failures: int = 0
    nonnegativity_failures: int = 0
    positivity_failures: int = 0
    identically_zero: bool = False
    counterexample: Optional[dict] = field(default=None, repr=False)

    def summary(self) -> str:
        if self.passed:
            return (f"antinorm axioms hold on {self.samples} sampled pairs"
                    + (" (identically zero)" if self.identically_zero else ""))
        kinds = [(self.homogeneity_failures, "homogeneity"),
                 (self.superadditivity_failures, "superadditivity"),
                 (self.nonnegativity_failures, "nonnegativity"),
                 (self.positivity_failures, "interior positivity")]
        worst = ", ".join(f"{n} {k}" for n, k in kinds if n)
        lines = [f"antinorm axioms FAILED ({worst})"]
        if self.counterexample:
            lines.append(f"  first counterexample: {self.counterexample}")
        return "\n".join(lines)


def _values(nu, V: np.ndarray) -> np.ndarray:
    if hasattr(nu, "values_on_cone"):
        return np.asarray(nu.values_on_cone(V), dtype=float)
    return np.array([nu.value_on_cone(v) for v in V])


def check_antinorm_axioms(nu, cone: Cone, sample_count: int = 10_000,
                          seed: int = 0) -> AxiomCheckReport:
    """Sample-level check of homogeneity, superadditivity, nonnegativity on
    the cone, and strict positivity on its relative interior (the latter only
    when nu is not identically zero there).

    Upper semicontinuity is not decidable from samples and is not checked.
    Failures are report content, never exceptions.

    Pairs are drawn from the closed cone without the sampler's exact-boundary
    atom: square-root antinorms are conditioned like sqrt(eps) right on the
    light cone, where no evaluation can resolve the axioms to 1e-9.
    """
    rng = np.random.default_rng(seed)
    a = cone.sample(sample_count, rng, boundary_fraction=0.0)
    b = cone.sample(sample_count, rng, boundary_fraction=0.0)
    lam = 10.0 ** rng.uniform(-1.0, 1.0, sample_count)

    va, vb = _values(nu, a), _values(nu, b)
    vsum = _values(nu, a + b)
    vlam = _values(nu, lam[:, None] * a)

    rep = AxiomCheckReport(passed=True, samples=sample_count)

    def fail(kind, payload):
        rep.passed = False
        if rep.counterexample is None:
            rep.counterexample = {"axiom": kind, **payload}

    hom_err = np.abs(vlam - lam * va)
    hom_bad = hom_err > 1e-9 * np.maximum(1.0, np.abs(lam * va))
    rep.homogeneity_failures = int(hom_bad.sum())
    if rep.homogeneity_failures:
        i = int(np.argmax(hom_bad))
        fail("homogeneity", {"xi": a[i].tolist(), "lambda": float(lam[i]),
                             "nu(lambda xi)": float(vlam[i]),
                             "lambda nu(xi)": float(lam[i] * va[i])})

    sup_bad = vsum < va + vb - 1e-9
    rep.superadditivity_failures = int(sup_bad.sum())
    if rep.superadditivity_failures:
        i = int(np.argmax(sup_bad))
        fail("superadditivity", {"xi": a[i].tolist(), "zeta": b[i].tolist(),
                                 "nu(xi+zeta)": float(vsum[i]),
                                 "nu(xi)+nu(zeta)": float(va[i] + vb[i])})

    scale = 1.0 + np.linalg.norm(a, axis=1)
    neg_bad = va < -1e-12 * scale
    rep.nonnegativity_failures = int(neg_bad.sum())
    if rep.nonnegativity_failures:
        i = int(np.argmax(neg_bad))
        fail("nonnegativity", {"xi": a[i].tolist(), "nu(xi)": float(va[i])})

    # nu > 0 on the relative interior unless identically zero on the cone
    rep.identically_zero = bool(np.all(np.abs(va) <= 1e-12 * scale))
    if not rep.identically_zero:
        ri = cone.sample(min(sample_count, 1000), rng, relative_interior=True)
        vri = _values(nu, ri)
        pos_bad = vri <= 0.0
        rep.positivity_failures = int(pos_bad.sum())
        if rep.positivity_failures:
            i = int(np.argmax(pos_bad))
            fail("interior positivity", {"xi": ri[i].tolist(), "nu(xi)": float(vri[i])})

    return rep
