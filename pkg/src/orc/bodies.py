"""Reference convex bodies and functions with exact closed-form oracles.

These serve two roles: ground truth for the randomized reductions, and
independent brute-force oracles for the acceptance suite.  Every body
carries a certified sandwich B(x0, r) <= K <= B(x0, R), verified at
construction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import (EVAL, INSIDE_DILATED, MEM, OPT, OUTSIDE_ERODED, SEP, VAL,
                   VIOL, GradAnswer, MembershipAnswer, OptimizationAnswer,
                   ProblemGeometry, SeparationAnswer, ValidityAnswer,
                   ViolationAnswer, check_precision)
from .geometry import HalfSpace, as_vector, unit

_FEAS_TOL = 1e-9


class UnsupportedVariant(TypeError):
    pass


# ---------------------------------------------------------------------------
# bodies

class BodySpec:
    """Common surface: exact containment, support, geometry, kernel codes."""

    geometry: ProblemGeometry

    @property
    def dim(self) -> int:
        return self.geometry.n

    def kernel_args(self):
        """(code, M, v, s) encoding for the compiled membership kernels."""
        raise UnsupportedVariant(type(self).__name__)

    def contains(self, y: np.ndarray) -> bool:
        code, M, v, s = self.kernel_args()
        return bool(kernels.inside(code, np.asarray(y, dtype=np.float64), M, v, s))

    def support(self, c: np.ndarray) -> tuple[float, np.ndarray]:
        """Exact support value max_{x in K} <c, x> and a maximizer."""
        raise UnsupportedVariant(type(self).__name__)

    def radial_scale(self, u: np.ndarray) -> float:
        """Largest t with geometry.center + t*u in K (u a unit vector)."""
        raise UnsupportedVariant(type(self).__name__)

    def signed_distance(self, y: np.ndarray) -> float:
        """Signed l2 distance to the boundary (negative inside).

        Exact for all variants except HPolytope outside points, where an
        exact projection is computed by face enumeration (small n only).
        """
        raise UnsupportedVariant(type(self).__name__)


@dataclass(frozen=True)
class Ball(BodySpec):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "geometry", ProblemGeometry(
            self.center.size, self.radius, self.radius, self.center))

    def kernel_args(self):
        return kernels.BALL, kernels._EMPTY_M, self.center, self.radius

    def support(self, c):
        c = as_vector(c)
        return float(c @ self.center) + self.radius * float(np.linalg.norm(c)), \
            self.center + self.radius * unit(c)

    def radial_scale(self, u):
        return self.radius

    def signed_distance(self, y):
        return float(np.linalg.norm(as_vector(y) - self.center)) - self.radius


@dataclass(frozen=True)
class BoxBody(BodySpec):
    """l-infinity ball: center +/- radius per coordinate."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        n = self.center.size
        object.__setattr__(self, "geometry", ProblemGeometry(
            n, self.radius, self.radius * math.sqrt(n), self.center))

    def kernel_args(self):
        return kernels.BOX, kernels._EMPTY_M, self.center, self.radius

    def support(self, c):
        c = as_vector(c)
        sgn = np.where(c >= 0.0, 1.0, -1.0)
        arg = self.center + self.radius * sgn
        return float(c @ arg), arg

    def radial_scale(self, u):
        return self.radius / float(np.max(np.abs(u)))

    def signed_distance(self, y):
        q = np.abs(as_vector(y) - self.center) - self.radius
        outside = np.linalg.norm(np.maximum(q, 0.0))
        return float(outside + min(np.max(q), 0.0))


@dataclass(frozen=True)
class Simplex(BodySpec):
    """{x >= 0, sum x <= scale} in the given dimension.

    The certified inner ball sits at the Chebyshev center t*(1,...,1)
    with t = scale/(n + sqrt(n)).
    """

    dim_: int
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        n, s = self.dim_, self.scale
        t = s / (n + math.sqrt(n))
        x0 = np.full(n, t)
        verts = [np.zeros(n)] + [s * e for e in np.eye(n)]
        R = max(float(np.linalg.norm(v - x0)) for v in verts)
        object.__setattr__(self, "geometry", ProblemGeometry(n, t, R, x0))

    def kernel_args(self):
        return kernels.SIMPLEX, kernels._EMPTY_M, kernels._EMPTY_V, self.scale

    def support(self, c):
        c = as_vector(c)
        i = int(np.argmax(c))
        if c[i] <= 0.0:
            return 0.0, np.zeros(self.dim)
        arg = np.zeros(self.dim)
        arg[i] = self.scale
        return self.scale * float(c[i]), arg

    def radial_scale(self, u):
        u = as_vector(u)
        x0 = self.geometry.center
        t = math.inf
        su = float(np.sum(u))
        if su > 0.0:
            t = (self.scale - float(np.sum(x0))) / su
        for i in range(self.dim):
            if u[i] < 0.0:
                t = min(t, -x0[i] / u[i])
        return t

    def signed_distance(self, y):
        y = as_vector(y)
        if self.contains(y):
            return -min(float(np.min(y)),
                        (self.scale - float(np.sum(y))) / math.sqrt(self.dim))
        return float(np.linalg.norm(y - _project_simplex(y, self.scale)))


class HPolytope(BodySpec):
    """Intersection of halfspaces {<a_i, x> <= b_i} with unit-norm rows.

    Requires an interior point; the inner radius is certified from the
    facet slacks there and the outer radius from full vertex
    enumeration, so the facet count must keep C(m, n) manageable.
    """

    MAX_SUBSETS = 1 << 20

    def __init__(self, A, b, interior_point):
        A = np.asarray(A, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != b.size:
            raise ValueError("A must be m x n with matching b")
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms <= 0):
            raise ValueError("zero facet normal")
        self.A = A / norms[:, None]
        self.b = b / norms
        x0 = as_vector(interior_point)
        slack = self.b - self.A @ x0
        r = float(np.min(slack))
        if r <= 0:
            raise ValueError("interior point is not strictly feasible")
        if math.comb(A.shape[0], A.shape[1]) > self.MAX_SUBSETS:
            raise ValueError("too many facets for vertex enumeration")
        self.vertices = _enumerate_vertices(self.A, self.b)
        if self.vertices.shape[0] == 0:
            raise ValueError("polytope appears empty or unbounded")
        R = float(np.max(np.linalg.norm(self.vertices - x0, axis=1)))
        self.geometry = ProblemGeometry(A.shape[1], r, R, x0)

    def kernel_args(self):
        return kernels.HPOLY, self.A, self.b, 0.0

    def support(self, c):
        c = as_vector(c)
        vals = self.vertices @ c
        i = int(np.argmax(vals))
        return float(vals[i]), self.vertices[i]

    def radial_scale(self, u):
        u = as_vector(u)
        x0 = self.geometry.center
        num = self.b - self.A @ x0
        den = self.A @ u
        pos = den > 0
        return float(np.min(num[pos] / den[pos]))

    def signed_distance(self, y):
        y = as_vector(y)
        viol = self.A @ y - self.b
        if np.max(viol) <= 0:
            return float(np.max(viol))
        return float(np.linalg.norm(y - _project_polytope(self.A, self.b, y)))


@dataclass(frozen=True)
class Ellipsoid(BodySpec):
    """{x : (x - center)^T shape^-1 (x - center) <= 1}, shape PD."""

    center: np.ndarray
    shape: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        S = np.asarray(self.shape, dtype=np.float64)
        S = 0.5 * (S + S.T)
        eigs = np.linalg.eigvalsh(S)
        if eigs[0] <= 0:
            raise ValueError("shape matrix must be positive definite")
        object.__setattr__(self, "shape", S)
        object.__setattr__(self, "_inv", np.linalg.inv(S))
        object.__setattr__(self, "geometry", ProblemGeometry(
            self.center.size, math.sqrt(eigs[0]), math.sqrt(eigs[-1]), self.center))

    def kernel_args(self):
        return kernels.ELLIPSOID, self._inv, self.center, 0.0

    def support(self, c):
        c = as_vector(c)
        Sc = self.shape @ c
        w = math.sqrt(float(c @ Sc))
        if w == 0.0:
            return float(c @ self.center), self.center.copy()
        return float(c @ self.center) + w, self.center + Sc / w

    def radial_scale(self, u):
        u = as_vector(u)
        return 1.0 / math.sqrt(float(u @ (self._inv @ u)))


class Intersection(BodySpec):
    """Conjunction of bodies; inner ball certified by the caller."""

    def __init__(self, parts: list[BodySpec], inner_center, inner_radius: float):
        if not parts:
            raise ValueError("need at least one part")
        x0 = as_vector(inner_center)
        for p in parts:
            if p.dim != x0.size:
                raise ValueError("dimension mismatch among parts")
        self.parts = list(parts)
        R = min(float(np.linalg.norm(p.geometry.center - x0)) + p.geometry.R
                for p in parts)
        self.geometry = ProblemGeometry(x0.size, inner_radius, R, x0)

    def contains(self, y):
        return all(p.contains(y) for p in self.parts)

    def radial_scale(self, u):
        return min(_radial_from(p, self.geometry.center, u) for p in self.parts)


def _radial_from(body: BodySpec, x0: np.ndarray, u: np.ndarray) -> float:
    """max t with x0 + t*u in body, by bisection against exact containment."""
    if np.array_equal(x0, body.geometry.center):
        return body.radial_scale(u)
    lo, hi = 0.0, (body.geometry.R + float(np.linalg.norm(x0 - body.geometry.center)))
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if body.contains(x0 + mid * u):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _enumerate_vertices(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    m, n = A.shape
    out = []
    for idx in itertools.combinations(range(m), n):
        sub = A[list(idx)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        v = np.linalg.solve(sub, b[list(idx)])
        if np.all(A @ v <= b + _FEAS_TOL):
            out.append(v)
    if not out:
        return np.zeros((0, n))
    return np.unique(np.round(np.array(out), 12), axis=0)


def _project_simplex(y: np.ndarray, s: float) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum x <= s}."""
    p = np.maximum(y, 0.0)
    if np.sum(p) <= s:
        return p
    # project onto {x >= 0, sum x = s} (sorted-threshold algorithm)
    n = y.size
    u_srt = np.sort(y)[::-1]
    css = np.cumsum(u_srt) - s
    ks = np.arange(1, n + 1)
    cond = u_srt - css / ks > 0
    k = int(ks[cond][-1])
    tau = css[k - 1] / k
    return np.maximum(y - tau, 0.0)


def _project_polytope(A: np.ndarray, b: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Exact Euclidean projection by enumerating faces (test utility)."""
    m, n = A.shape
    best, best_d = None, math.inf
    for k in range(1, n + 1):
        for idx in itertools.combinations(range(m), k):
            sub, bs = A[list(idx)], b[list(idx)]
            # project y onto the affine subspace {sub x = bs}
            G = sub @ sub.T
            try:
                lam = np.linalg.solve(G, sub @ y - bs)
            except np.linalg.LinAlgError:
                continue
            p = y - sub.T @ lam
            if np.all(A @ p <= b + _FEAS_TOL):
                d = float(np.linalg.norm(y - p))
                if d < best_d:
                    best, best_d = p, d
    if best is None:
        raise RuntimeError("projection enumeration failed")
    return best


# ---------------------------------------------------------------------------
# exact oracles over bodies

def exact_membership(spec: BodySpec, y, delta: float) -> MembershipAnswer:
    """Answer by exact containment: always a valid MEM answer at any delta."""
    check_precision(delta)
    return INSIDE_DILATED if spec.contains(as_vector(y)) else OUTSIDE_ERODED


class ExactMembership:
    """Callable MEM oracle for a reference body, with a bisection fast path."""

    kind = MEM

    def __init__(self, spec: BodySpec):
        self.spec = spec
        try:
            self._kargs = spec.kernel_args()
        except UnsupportedVariant:
            self._kargs = None

    def __call__(self, y, delta):
        return exact_membership(self.spec, y, delta)

    def alpha_bisect(self, d, x, hi, iters, delta):
        """Run the full membership bisection for max{a : d + a*x in K}."""
        if self._kargs is not None:
            code, M, v, s = self._kargs
            return float(kernels.bisect_alpha(code, d, x, M, v, s, hi, iters))
        lo = 0.0
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            if self.spec.contains(d + mid * x):
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def exact_support(spec: BodySpec, c) -> tuple[float, np.ndarray]:
    return spec.support(c)


def brute_force_lp(spec: HPolytope, c) -> tuple[float, np.ndarray]:
    """Independent LP oracle: re-enumerates facet-subset intersections.

    Deliberately does not reuse the vertices cached at construction;
    this is the second route of the dual-route support check.
    """
    if not isinstance(spec, HPolytope):
        raise UnsupportedVariant("brute_force_lp needs an HPolytope")
    A, b = spec.A, spec.b
    m, n = A.shape
    if n > 4 or m > 32:
        raise ValueError("brute_force_lp is restricted to n <= 4, m <= 32")
    c = as_vector(c)
    best_val, best_vert = -math.inf, None
    for idx in itertools.combinations(range(m), n):
        sub = A[list(idx)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        v = np.linalg.solve(sub, b[list(idx)])
        if np.all(A @ v <= b + _FEAS_TOL):
            val = float(c @ v)
            if val > best_val:
                best_val, best_vert = val, v
    if best_vert is None:
        raise ValueError("polytope is empty or unbounded")
    return best_val, best_vert


# ---------------------------------------------------------------------------
# functions

class FuncSpec:
    """Convex function with exact evaluation and a chosen subgradient."""

    def value(self, y: np.ndarray) -> float:
        raise NotImplementedError

    def grad(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def linf_lipschitz(self, center: np.ndarray, radius: float) -> float:
        """Upper bound on ||grad f||_inf over B_inf(center, radius)."""
        raise UnsupportedVariant(type(self).__name__)


@dataclass(frozen=True)
class Linear(FuncSpec):
    a: np.ndarray
    b: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "a", as_vector(self.a))

    def value(self, y):
        return float(self.a @ as_vector(y)) + self.b

    def grad(self, y):
        return self.a.copy()

    def linf_lipschitz(self, center, radius):
        return float(np.max(np.abs(self.a)))


@dataclass(frozen=True)
class Quadratic(FuncSpec):
    """x^T A x + b^T x + c with A positive semidefinite."""

    A: np.ndarray
    b: np.ndarray | None = None
    c: float = 0.0

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64)
        A = 0.5 * (A + A.T)
        if np.linalg.eigvalsh(A)[0] < -1e-12:
            raise ValueError("quadratic form must be convex")
        object.__setattr__(self, "A", A)
        b = np.zeros(A.shape[0]) if self.b is None else as_vector(self.b)
        object.__setattr__(self, "b", b)

    def value(self, y):
        y = as_vector(y)
        return float(y @ (self.A @ y) + self.b @ y) + self.c

    def grad(self, y):
        return 2.0 * (self.A @ as_vector(y)) + self.b

    def linf_lipschitz(self, center, radius):
        g0 = np.abs(2.0 * (self.A @ as_vector(center)) + self.b)
        spread = radius * np.sum(np.abs(2.0 * self.A), axis=1)
        return float(np.max(g0 + spread))


@dataclass(frozen=True)
class DistanceToBall(FuncSpec):
    """max(0, ||x - center|| - radius): distance to a norm ball."""

    center: np.ndarray
    radius: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        if self.radius < 0:
            raise ValueError("radius must be >= 0")

    def value(self, y):
        return max(0.0, float(np.linalg.norm(as_vector(y) - self.center)) - self.radius)

    def grad(self, y):
        q = as_vector(y) - self.center
        nrm = float(np.linalg.norm(q))
        if nrm <= self.radius or nrm == 0.0:
            return np.zeros(self.center.size)
        return q / nrm

    def linf_lipschitz(self, center, radius):
        return 1.0


@dataclass(frozen=True)
class MaxOfLinear(FuncSpec):
    """max_i (<a_i, x> + b_i); subgradient ties break to the lowest index."""

    terms: tuple

    def __post_init__(self):
        terms = tuple((as_vector(a), float(b)) for a, b in self.terms)
        if not terms:
            raise ValueError("need at least one term")
        object.__setattr__(self, "terms", terms)

    def value(self, y):
        y = as_vector(y)
        return max(float(a @ y) + b for a, b in self.terms)

    def grad(self, y):
        y = as_vector(y)
        vals = [float(a @ y) + b for a, b in self.terms]
        return self.terms[int(np.argmax(vals))][0].copy()

    def linf_lipschitz(self, center, radius):
        return max(float(np.max(np.abs(a))) for a, _ in self.terms)


@dataclass(frozen=True)
class Indicator(FuncSpec):
    body: BodySpec

    def value(self, y):
        return 0.0 if self.body.contains(as_vector(y)) else math.inf

    def grad(self, y):
        if not self.body.contains(as_vector(y)):
            raise ValueError("indicator subgradient undefined outside the body")
        return np.zeros(self.body.dim)


def exact_eval(spec: FuncSpec, y) -> float:
    return spec.value(as_vector(y))


def exact_grad(spec: FuncSpec, y) -> GradAnswer:
    y = as_vector(y)
    return GradAnswer(spec.value(y), spec.grad(y))


class ExactEval:
    """Callable EVAL oracle with zero additive error."""

    kind = EVAL

    def __init__(self, spec: FuncSpec):
        self.spec = spec

    def __call__(self, y, delta):
        return self.spec.value(as_vector(y))


# ---------------------------------------------------------------------------
# exact set oracles (analytic SEP/OPT/VIOL/VAL for the test ground truth)

def separating_normal(spec: BodySpec, y: np.ndarray) -> np.ndarray:
    """A unit c with sup_{x in K} <c, x> <= <c, y>, for y outside K."""
    y = as_vector(y)
    if isinstance(spec, Ball):
        return unit(y - spec.center)
    if isinstance(spec, BoxBody):
        q = y - spec.center
        return unit(q - np.clip(q, -spec.radius, spec.radius))
    if isinstance(spec, Simplex):
        return unit(y - _project_simplex(y, spec.scale))
    if isinstance(spec, HPolytope):
        # most-violated facet normal; valid for any dimension
        return spec.A[int(np.argmax(spec.A @ y - spec.b))].copy()
    if isinstance(spec, Ellipsoid):
        return unit(spec._inv @ (y - spec.center))
    if isinstance(spec, Intersection):
        for part in spec.parts:
            if not part.contains(y):
                return separating_normal(part, y)
    raise UnsupportedVariant(type(spec).__name__)


class ExactSeparation:
    kind = SEP

    def __init__(self, spec: BodySpec):
        self.spec = spec

    def __call__(self, y, delta):
        y = as_vector(y)
        if self.spec.contains(y):
            return SeparationAnswer()
        return SeparationAnswer(HalfSpace(separating_normal(self.spec, y), y, 0.0))


class ExactOptimization:
    kind = OPT

    def __init__(self, spec: BodySpec):
        self.spec = spec

    def __call__(self, c, delta):
        c = as_vector(c)
        if not np.any(c):
            # <0, y> = 0 everywhere; any point of the body maximizes
            return OptimizationAnswer(self.spec.geometry.center.copy())
        _, arg = self.spec.support(c)
        return OptimizationAnswer(arg)


class ExactViolation:
    kind = VIOL

    def __init__(self, spec: BodySpec):
        self.spec = spec

    def __call__(self, c, gamma, delta):
        c = as_vector(c)
        if not np.any(c):
            center = self.spec.geometry.center.copy()
            return ViolationAnswer(center) if 0.0 >= gamma else ViolationAnswer(None)
        val, arg = self.spec.support(c)
        return ViolationAnswer(arg) if val >= gamma else ViolationAnswer(None)


class ExactValidity:
    kind = VAL

    def __init__(self, spec: BodySpec):
        self.spec = spec

    def __call__(self, c, gamma, delta):
        c = as_vector(c)
        val = 0.0 if not np.any(c) else self.spec.support(c)[0]
        return ValidityAnswer.SOME_ABOVE if val >= gamma else ValidityAnswer.ALL_BELOW


def random_hpolytope(n: int, rng, extra_facets: int = 3,
                     jitter: float = 0.15) -> HPolytope:
    """A bounded random polytope containing the origin in its interior.

    Starts from the facet normals of a regular simplex (whose n+1 outward
    normals positively span R^n, guaranteeing boundedness), perturbs them,
    and adds a few extra random facets.  All offsets are >= 0.6 so the unit
    directions keep a ball of radius 0.6 around the origin inside the body.
    """
    gen = rng.generator() if hasattr(rng, "generator") else rng
    ones = np.ones((n + 1, 1))
    # orthonormal basis of the hyperplane { u : sum(u) = 0 } in R^{n+1}
    q, _ = np.linalg.qr(np.hstack([ones, np.eye(n + 1)[:, :n]]))
    basis = q[:, 1:n + 1]
    normals = (np.eye(n + 1) - 1.0 / (n + 1)) @ basis
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    normals = normals + jitter * gen.standard_normal(normals.shape)
    if extra_facets > 0:
        extra = gen.standard_normal((extra_facets, n))
        normals = np.vstack([normals, extra])
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    offsets = gen.uniform(0.6, 1.3, size=normals.shape[0])
    return HPolytope(normals, offsets, interior_point=np.zeros(n))


class FlipNoise:
    """Membership oracle that flips the wrapped answer with probability p."""

    kind = MEM

    def __init__(self, mem, p: float, rng):
        if not 0.0 <= p < 0.5:
            raise ValueError("flip probability must lie in [0, 0.5)")
        self.mem = mem
        self.p = p
        self._gen = rng.generator() if hasattr(rng, "generator") else rng

    def __call__(self, y, delta):
        answer = self.mem(y, delta)
        if self._gen.random() < self.p:
            return (MembershipAnswer.OUTSIDE_ERODED
                    if answer is MembershipAnswer.INSIDE_DILATED
                    else MembershipAnswer.INSIDE_DILATED)
        return answer
