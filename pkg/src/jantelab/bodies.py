"""Convex opinion spaces: membership, boundary distance, sampling, cap volumes.

A body is a closed convex subset of R^d with non-empty interior. Four
variants are supported: the full space, axis-aligned boxes, Euclidean
balls, and intersections of half-spaces. Boundary membership uses
closed-set semantics throughout (``<=`` comparisons); the simulated
process almost surely never lands exactly on a boundary, so ties here
are measure-zero and resolved conservatively.

Distances to the complement of the full space are reported as ``inf``;
callers must guard before using the value in arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc

from .errors import AttemptsExhausted, DimensionMismatch, UnboundedBody

__all__ = [
    "Ball",
    "Box",
    "ConvexBody",
    "FullSpace",
    "HalfspacePolytope",
    "ShellCheck",
    "UniformGeometryData",
    "ball_cap_volume",
    "ball_intersection_volume",
    "sample_ball",
    "sample_in_body_cap",
    "shell_volume_check",
    "uniform_geometry_constants",
    "unit_ball_volume",
]


def unit_ball_volume(d: int) -> float:
    """Volume of the unit ball in R^d, with the convention V(0) = 1."""
    if d < 0:
        raise ValueError(f"dimension must be >= 0, got {d}")
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def ball_cap_volume(d: int, rho: float, h: float) -> float:
    """Volume of a spherical cap of height h cut from a d-ball of radius rho.

    h is measured from the cap's flat face to the sphere along the axis;
    h <= 0 gives 0 and h >= 2*rho gives the whole ball.
    """
    if h <= 0.0:
        return 0.0
    if h >= 2.0 * rho:
        return unit_ball_volume(d) * rho**d
    if h > rho:
        return unit_ball_volume(d) * rho**d - ball_cap_volume(d, rho, 2.0 * rho - h)
    x = (2.0 * rho * h - h * h) / (rho * rho)
    return 0.5 * unit_ball_volume(d) * rho**d * float(betainc((d + 1) / 2.0, 0.5, x))


def ball_intersection_volume(d: int, r1: float, r2: float, t: float) -> float:
    """Volume of the intersection of two d-balls with radii r1, r2 and center distance t."""
    if t >= r1 + r2:
        return 0.0
    if t + r1 <= r2:
        return unit_ball_volume(d) * r1**d
    if t + r2 <= r1:
        return unit_ball_volume(d) * r2**d
    # heights of the two caps cut by the radical hyperplane
    h1 = r1 - (t * t + r1 * r1 - r2 * r2) / (2.0 * t)
    h2 = r2 - (t * t + r2 * r2 - r1 * r1) / (2.0 * t)
    return ball_cap_volume(d, r1, h1) + ball_cap_volume(d, r2, h2)


def _as_point(z, d: int) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or z.shape[0] != d:
        raise DimensionMismatch(f"expected a point of dimension {d}, got shape {z.shape}")
    return z


class ConvexBody:
    """Common interface for the body variants."""

    d: int

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def distance_to_complement_many(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, z) -> bool:
        """True iff z lies in the (closed) body."""
        z = _as_point(z, self.d)
        return bool(self.contains_many(z[None, :])[0])

    def distance_to_complement(self, z) -> float:
        """Distance from z to the complement of the body; 0 outside, inf for the full space."""
        z = np.asarray(z, dtype=float)
        if z.shape != (self.d,):
            raise DimensionMismatch(f"expected a point of dimension {self.d}, got shape {z.shape}")
        return float(self.distance_to_complement_many(z[None, :])[0])

    def is_bounded(self) -> bool:
        raise NotImplementedError

    def sample_uniform(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n points uniform on the body; raises UnboundedBody when that has no meaning."""
        raise UnboundedBody(f"cannot sample uniformly on {type(self).__name__}")

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class FullSpace(ConvexBody):
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")

    def contains_many(self, pts):
        return np.ones(len(pts), dtype=bool)

    def distance_to_complement_many(self, pts):
        return np.full(len(pts), np.inf)

    def is_bounded(self):
        return False

    def describe(self):
        return {"kind": "fullspace", "d": self.d}


@dataclass(frozen=True, eq=False)
class Box(ConvexBody):
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise ValueError("lower/upper must be 1-d arrays of equal length")
        if not np.all(lo < hi):
            raise ValueError("box needs lower[k] < upper[k] in every coordinate")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def d(self):
        return self.lower.shape[0]

    def contains_many(self, pts):
        return np.logical_and(pts >= self.lower, pts <= self.upper).all(axis=1)

    def distance_to_complement_many(self, pts):
        slack = np.minimum(pts - self.lower, self.upper - pts)
        return np.maximum(slack.min(axis=1), 0.0)

    def is_bounded(self):
        return True

    def sample_uniform(self, rng, n):
        return rng.uniform(self.lower, self.upper, size=(n, self.d))

    def min_side(self) -> float:
        return float(np.min(self.upper - self.lower))

    def describe(self):
        return {"kind": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}


@dataclass(frozen=True, eq=False)
class Ball(ConvexBody):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        if c.ndim != 1:
            raise ValueError("center must be a 1-d array")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "center", c)

    @property
    def d(self):
        return self.center.shape[0]

    def contains_many(self, pts):
        return ((pts - self.center) ** 2).sum(axis=1) <= self.radius**2

    def distance_to_complement_many(self, pts):
        dist = np.sqrt(((pts - self.center) ** 2).sum(axis=1))
        return np.maximum(self.radius - dist, 0.0)

    def is_bounded(self):
        return True

    def sample_uniform(self, rng, n):
        return self.center + sample_ball(rng, self.d, n) * self.radius

    def describe(self):
        return {"kind": "ball", "center": self.center.tolist(), "radius": self.radius}


class HalfspacePolytope(ConvexBody):
    """Intersection of half-spaces {z : u_i . z <= h_i} with unit normals u_i.

    An interior witness point is required; it certifies a non-empty
    interior and anchors the boundary sampling used for the approximate
    uniform-geometry constant.
    """

    def __init__(self, normals, offsets, interior_witness):
        U = np.asarray(normals, dtype=float)
        h = np.asarray(offsets, dtype=float)
        w = np.asarray(interior_witness, dtype=float)
        if U.ndim != 2 or h.ndim != 1 or U.shape[0] != h.shape[0]:
            raise ValueError("need normals (n,d) and offsets (n,)")
        if U.shape[0] < 1:
            raise ValueError("need at least one facet (use FullSpace otherwise)")
        norms = np.sqrt((U**2).sum(axis=1))
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError("facet normals must be unit vectors (within 1e-12)")
        if w.shape != (U.shape[1],):
            raise DimensionMismatch("witness dimension does not match normals")
        if not np.all(U @ w < h):
            raise ValueError("interior witness must strictly satisfy every facet inequality")
        self.normals = U
        self.offsets = h
        self.interior_witness = w
        self._bounded: bool | None = None
        self._bbox: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def d(self):
        return self.normals.shape[1]

    def contains_many(self, pts):
        return (pts @ self.normals.T <= self.offsets).all(axis=1)

    def distance_to_complement_many(self, pts):
        slack = self.offsets - pts @ self.normals.T
        return np.maximum(slack.min(axis=1), 0.0)

    def bounding_box(self):
        """Axis-aligned bounding box via 2d linear programs; None when unbounded."""
        if self._bbox is not None or self._bounded is False:
            return self._bbox
        from scipy.optimize import linprog

        d = self.d
        lo = np.empty(d)
        hi = np.empty(d)
        for k in range(d):
            for sign, out in ((1.0, lo), (-1.0, hi)):
                c = np.zeros(d)
                c[k] = sign
                res = linprog(c, A_ub=self.normals, b_ub=self.offsets,
                              bounds=[(None, None)] * d, method="highs")
                if res.status == 3:  # unbounded
                    self._bounded = False
                    return None
                if not res.success:
                    raise ValueError(f"bounding-box LP failed: {res.message}")
                out[k] = sign * res.fun
        self._bounded = True
        self._bbox = (lo, hi)
        return self._bbox

    def is_bounded(self):
        if self._bounded is None:
            self.bounding_box()
        return bool(self._bounded)

    def sample_uniform(self, rng, n, max_attempts: int = 1_000_000):
        bbox = self.bounding_box()
        if bbox is None:
            raise UnboundedBody("polytope is unbounded; uniform sampling undefined")
        lo, hi = bbox
        out = np.empty((n, self.d))
        got = 0
        for _ in range(max_attempts):
            need = n - got
            cand = rng.uniform(lo, hi, size=(max(need * 2, 64), self.d))
            cand = cand[self.contains_many(cand)][:need]
            out[got:got + len(cand)] = cand
            got += len(cand)
            if got == n:
                return out
        raise AttemptsExhausted("polytope rejection sampling exhausted")

    def boundary_sample(self, rng, n):
        """n boundary points, found by ray casting from the witness."""
        w = self.interior_witness
        pts = []
        while len(pts) < n:
            u = rng.standard_normal(self.d)
            u /= np.linalg.norm(u)
            du = self.normals @ u
            pos = du > 1e-300
            if not pos.any():
                continue  # unbounded direction
            t = np.min((self.offsets[pos] - self.normals[pos] @ w) / du[pos])
            pts.append(w + t * u)
        return np.array(pts)

    def describe(self):
        return {
            "kind": "polytope",
            "normals": self.normals.tolist(),
            "offsets": self.offsets.tolist(),
            "interior_witness": self.interior_witness.tolist(),
        }


def sample_ball(rng: np.random.Generator, d: int, n: int) -> np.ndarray:
    """n points uniform in the unit d-ball (direction x radius = U^(1/d))."""
    dirs = rng.standard_normal((n, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    rad = rng.random(n) ** (1.0 / d)
    return dirs * rad[:, None]


def sample_in_body_cap(rng, body: ConvexBody, center, radius: float,
                       max_attempts: int = 100_000) -> np.ndarray:
    """One point uniform on body ∩ B(center, radius), by rejection from the ball.

    Requires center inside the body, which bounds the acceptance
    probability away from zero; exhausting ``max_attempts`` therefore
    signals numerically degenerate geometry rather than bad luck.
    """
    center = _as_point(center, body.d)
    if radius <= 0:
        raise ValueError("radius must be positive")
    chunk = 32
    attempts = 0
    while attempts < max_attempts:
        k = min(chunk, max_attempts - attempts)
        cand = center + sample_ball(rng, body.d, k) * radius
        ok = body.contains_many(cand)
        hit = np.flatnonzero(ok)
        if hit.size:
            return cand[hit[0]]
        attempts += k
    raise AttemptsExhausted(
        f"no sample in body∩ball after {max_attempts} attempts (center {center}, radius {radius})"
    )


@dataclass(frozen=True)
class UniformGeometryData:
    """Uniform-geometry constants: r0, b(r0) = inf cap volume, c = b/(V(d) r0^d)."""

    r0: float
    b_r0: float
    c: float
    approximate: bool = False


def default_r0(body: ConvexBody) -> float:
    """A valid r0 for the body: bounds only require some choice, not a canonical one."""
    if isinstance(body, FullSpace):
        return 1.0
    if isinstance(body, Box):
        return min(1.0, 0.5 * body.min_side())
    if isinstance(body, Ball):
        return min(1.0, 0.5 * body.radius)
    if isinstance(body, HalfspacePolytope):
        if body.is_bounded():
            lo, hi = body.bounding_box()
            return min(1.0, 0.5 * float(np.min(hi - lo)))
        return 1.0
    raise TypeError(f"unknown body {type(body).__name__}")


def uniform_geometry_constants(body: ConvexBody, r0: float | None = None,
                               n_boundary: int = 64, n_mc: int = 4096) -> UniformGeometryData:
    """Compute (r0, b(r0), c) for the body.

    Analytic for the full space (c = 1), boxes with r0 at most the
    shortest side (worst point is a corner, c = 2^-d) and balls (worst
    point is on the boundary sphere). Other cases are estimated by
    minimizing Monte Carlo cap volumes over a boundary sample and
    flagged approximate. The MC path uses a fixed internal seed so the
    report is reproducible.
    """
    if r0 is None:
        r0 = default_r0(body)
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    vball = unit_ball_volume(body.d) * r0**body.d

    if isinstance(body, FullSpace):
        return UniformGeometryData(r0, vball, 1.0)
    if isinstance(body, Box) and r0 <= body.min_side():
        b = vball * 2.0**-body.d
        return UniformGeometryData(r0, b, 2.0**-body.d)
    if isinstance(body, Ball):
        b = ball_intersection_volume(body.d, body.radius, r0, body.radius)
        return UniformGeometryData(r0, b, b / vball)

    # MC over a boundary sample (polytopes, or boxes with oversized r0)
    rng = np.random.default_rng(0)
    if isinstance(body, Box):
        corners = np.array(np.meshgrid(*zip(body.lower, body.upper))).reshape(body.d, -1).T
        sample = corners
    else:
        sample = body.boundary_sample(rng, n_boundary)
    best = np.inf
    for x in sample:
        cand = x + sample_ball(rng, body.d, n_mc) * r0
        frac = float(body.contains_many(cand).mean())
        best = min(best, frac * vball)
    return UniformGeometryData(r0, best, best / vball, approximate=True)


@dataclass(frozen=True)
class ShellCheck:
    """MC volume of a ball ∩ body ∩ inner-shell region against the two analytic bounds."""

    mc_volume: float
    mc_se: float
    easy_bound: float
    sharp_bound: float
    n_samples: int
    violation: bool = field(default=False)

    @property
    def bound(self) -> float:
        return min(self.easy_bound, self.sharp_bound)


def shell_volume_check(rng, body: ConvexBody, y, R: float, r: float,
                       n_samples: int = 20_000) -> ShellCheck:
    """Estimate λ(B(y,R) ∩ body ∩ {dist to complement < r}) and compare with bounds.

    The easy bound is 2 r d sqrt(d) V(d-1) R^(d-1); the sharp one is
    V(d) (R^d - (R-r)^d). A violation is flagged only beyond four
    standard errors of the estimate.
    """
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    y = _as_point(y, body.d)
    d = body.d
    cand = y + sample_ball(rng, d, n_samples) * R
    inside = body.contains_many(cand)
    shell = np.zeros(n_samples, dtype=bool)
    if inside.any():
        shell[inside] = body.distance_to_complement_many(cand[inside]) < r
    p = shell.mean()
    vol_ball = unit_ball_volume(d) * R**d
    est = p * vol_ball
    se = math.sqrt(max(p * (1 - p), 1.0 / n_samples) / n_samples) * vol_ball
    easy = 2.0 * r * d * math.sqrt(d) * unit_ball_volume(d - 1) * R ** (d - 1)
    sharp = unit_ball_volume(d) * (R**d - (R - r) ** d)
    return ShellCheck(
        mc_volume=float(est),
        mc_se=float(se),
        easy_bound=easy,
        sharp_bound=sharp,
        n_samples=n_samples,
        violation=bool(est > min(easy, sharp) + 4.0 * se),
    )
