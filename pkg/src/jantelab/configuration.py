"""Point configurations and their geometric functionals.

A configuration is an ordered collection of M >= 2 distinct points in
R^d, each carrying an integer arrival label. Labels -(M-1)..0 mark the
initial points; the point arriving at step n carries label n. The order
and labels give the points stable identities for removal bookkeeping;
set-style equality is available through :func:`hausdorff_distance`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bodies import ConvexBody
from .errors import DegenerateConfiguration, DimensionMismatch

__all__ = [
    "BoundaryDistances",
    "Configuration",
    "Functionals",
    "check_functional_inequalities",
    "distance_to_boundary",
    "functionals",
    "hausdorff_distance",
    "pairwise_inertia",
    "rescale_recenter",
]

# Relative cutoff under which two points count as coincident.
DISTINCTNESS_TOL = 1e-14


def pairwise_inertia(points: np.ndarray) -> float:
    """Sum of squared pairwise distances (robust for shrunken configurations)."""
    diff = points[:, None, :] - points[None, :, :]
    return 0.5 * float((diff**2).sum())


def _min_gap(points: np.ndarray) -> float:
    diff = points[:, None, :] - points[None, :, :]
    d2 = (diff**2).sum(-1)
    np.fill_diagonal(d2, np.inf)
    return float(np.sqrt(d2.min()))


def _diameter(points: np.ndarray) -> float:
    diff = points[:, None, :] - points[None, :, :]
    return float(np.sqrt((diff**2).sum(-1).max()))


@dataclass(frozen=True, eq=False)
class Configuration:
    """M labeled points in R^d, pairwise distinct."""

    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] < 1:
            raise DegenerateConfiguration(f"need an (M>=2, d>=1) point array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise DegenerateConfiguration("points must be finite")
        labels = np.array(self.labels, dtype=np.int64)
        if labels.shape != (pts.shape[0],):
            raise DegenerateConfiguration("need one label per point")
        if len(np.unique(labels)) != len(labels):
            raise DegenerateConfiguration("arrival labels must be distinct")
        gap = _min_gap(pts)
        if gap < DISTINCTNESS_TOL * max(1.0, _diameter(pts)):
            raise DegenerateConfiguration(f"points too close to distinguish (min gap {gap:g})")
        pts.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_points(cls, points, labels=None) -> "Configuration":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[0] == 1 and pts.shape[1] > 1 and np.asarray(points).ndim == 1:
            pts = pts.T
        m = pts.shape[0]
        if labels is None:
            labels = np.arange(-(m - 1), 1)
        return cls(pts, np.asarray(labels))

    @property
    def M(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def translated(self, v) -> "Configuration":
        return Configuration(self.points + np.asarray(v, dtype=float), self.labels)

    def scaled(self, s: float) -> "Configuration":
        return Configuration(self.points * float(s), self.labels)

    def inside(self, body: ConvexBody) -> bool:
        if body.d != self.d:
            raise DimensionMismatch(f"body is {body.d}-dimensional, configuration is {self.d}")
        return bool(body.contains_many(self.points).all())


@dataclass(frozen=True)
class Functionals:
    """The geometric functionals of a configuration.

    mu     center of mass
    sigma  coordinate sum (M * mu)
    F      moment of inertia: sum over pairs of squared distances
    A      max distance from a point to mu
    D      diameter
    d_min  smallest inter-point distance
    h      log(sqrt(F) / d_min), the spread-to-packing imbalance
    """

    mu: np.ndarray
    sigma: np.ndarray
    F: float
    A: float
    D: float
    d_min: float
    h: float


def functionals(X: Configuration, cross_check: bool = False) -> Functionals:
    """All functionals of X; F uses the pairwise-sum formula.

    With cross_check=True the moment formula M * sum ||x - mu||^2 is
    verified against the pairwise sum to relative 1e-10.
    """
    pts = X.points
    m = X.M
    mu = pts.mean(axis=0)
    sigma = pts.sum(axis=0)
    F = pairwise_inertia(pts)
    d_min = _min_gap(pts)
    if d_min == 0.0:
        raise DegenerateConfiguration("coincident points")
    A = float(np.sqrt(((pts - mu) ** 2).sum(-1).max()))
    D = _diameter(pts)
    if cross_check:
        F_moment = m * float(((pts - mu) ** 2).sum())
        if abs(F - F_moment) > 1e-10 * max(F, F_moment):
            raise AssertionError(f"inertia formulas disagree: {F} vs {F_moment}")
    h = 0.5 * np.log(F) - np.log(d_min)
    return Functionals(mu=mu, sigma=sigma, F=F, A=A, D=D, d_min=d_min, h=float(h))


@dataclass(frozen=True)
class InequalityReport:
    """Relative slack of each chained functional inequality (negative = violated)."""

    slacks: dict
    worst: float

    @property
    def ok(self) -> bool:
        return self.worst > -1e-9


def check_functional_inequalities(X: Configuration) -> InequalityReport:
    """Evaluate the six standing inequalities linking A, D, F and d_min."""
    f = functionals(X)
    m = X.M
    scale_len = max(f.D, 1e-300)
    scale_sq = max(f.F, m * m * f.A * f.A, 1e-300)
    slacks = {
        "A_vs_D_lower": (f.D - m / (m - 1) * f.A) / scale_len,
        "A_vs_D_upper": (2 * f.A - f.D) / scale_len,
        "F_vs_dmin": (f.F - m * (m - 1) / 2 * f.d_min**2) / scale_sq,
        "F_vs_D": (m * (m - 1) / 2 * f.D**2 - f.F) / scale_sq,
        "F_vs_A_lower": (f.F - m * m / (m - 1) * f.A**2) / scale_sq,
        "F_vs_A_upper": (m * m * f.A**2 - f.F) / scale_sq,
    }
    return InequalityReport(slacks=slacks, worst=min(slacks.values()))


def rescale_recenter(X: Configuration) -> Configuration:
    """The configuration moved to mean zero and scaled to unit moment of inertia."""
    f = functionals(X)
    if not f.F > 0:
        raise DegenerateConfiguration("zero moment of inertia")
    return Configuration((X.points - f.mu) / np.sqrt(f.F), X.labels)


def hausdorff_distance(X, Y) -> float:
    """Hausdorff distance between two finite point sets (0 iff equal as sets)."""
    a = X.points if isinstance(X, Configuration) else np.atleast_2d(np.asarray(X, dtype=float))
    b = Y.points if isinstance(Y, Configuration) else np.atleast_2d(np.asarray(Y, dtype=float))
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch("point sets live in different dimensions")
    cross = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1))
    return float(max(cross.min(axis=1).max(), cross.min(axis=0).max()))


@dataclass(frozen=True)
class BoundaryDistances:
    """d_B: distance of the whole set to the body's complement.

    d_B_interior restricts the minimum to points strictly inside the
    body; it is inf when every point sits on the boundary.
    """

    d_B: float
    d_B_interior: float


def distance_to_boundary(X: Configuration, body: ConvexBody) -> BoundaryDistances:
    if not X.inside(body):
        raise ValueError("configuration must lie inside the body")
    dist = body.distance_to_complement_many(X.points)
    interior = dist[dist > 0]
    return BoundaryDistances(
        d_B=float(dist.min()),
        d_B_interior=float(interior.min()) if interior.size else np.inf,
    )
