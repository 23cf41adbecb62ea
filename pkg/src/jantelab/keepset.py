"""Keep-set geometry: membership, ball decomposition, removal selection.

For a configuration X of M points, the keep set is the region of
arrival locations that displace some existing point. It equals the body
intersected with a union of M open balls, one per point x_j: center
(sigma - x_j)/(M-1) (the mean of the others) and radius
M/(M-1) * ||x_j - mu||. The union is sandwiched between the ball of
radius A around the mean (inside) and the ball of radius
(M+1)/(M-1) * A (outside), which is what makes rejection sampling from
the outer cap exact and uniformly efficient as the configuration
shrinks.

Strict inequalities are evaluated as plain ``<`` on doubles: the
decision boundary has measure zero. Near-ties are surfaced through
flags, never perturbed; ties break toward the smallest index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bodies import ConvexBody, sample_ball, sample_in_body_cap, unit_ball_volume
from .configuration import Configuration, pairwise_inertia
from .errors import AttemptsExhausted

__all__ = [
    "DropForms",
    "KeepBalls",
    "RemovalOutcome",
    "inertia_drop_forms",
    "keep_balls",
    "keep_contains",
    "keep_volume",
    "removal_choice",
    "sample_keep",
]

# Relative gap between the two largest removal distances below which a
# step is flagged as a near-tie.
NEAR_TIE_TOL = 1e-12


@dataclass(frozen=True)
class BallSpec:
    center: np.ndarray
    radius: float

    def contains(self, z) -> bool:
        z = np.asarray(z, dtype=float)
        return float(((z - self.center) ** 2).sum()) < self.radius**2


@dataclass(frozen=True)
class KeepBalls:
    """Ball decomposition of the keep set plus its sandwich balls.

    balls[j] is the component ball of point j; every component sits
    inside ``outer`` and ``inner`` sits inside the component of the
    point farthest from the mean (tangent at that point). The
    leave-one-out balls share the component centers but use the smaller
    radius M/(M+1) * A, and each lies fully inside the keep set.
    """

    balls: tuple
    outer: BallSpec
    inner: BallSpec
    leave_one_out: tuple


def _centers_radii(points: np.ndarray):
    m = points.shape[0]
    mu = points.mean(axis=0)
    centers = (m * mu - points) / (m - 1)
    radii = m / (m - 1) * np.sqrt(((points - mu) ** 2).sum(-1))
    return mu, centers, radii


def keep_balls(X: Configuration) -> KeepBalls:
    """Closed-form ball decomposition and sandwich balls of the keep set."""
    m = X.M
    mu, centers, radii = _centers_radii(X.points)
    a = float(np.sqrt(((X.points - mu) ** 2).sum(-1).max()))
    return KeepBalls(
        balls=tuple(BallSpec(c, float(r)) for c, r in zip(centers, radii)),
        outer=BallSpec(mu, (m + 1) / (m - 1) * a),
        inner=BallSpec(mu, a),
        leave_one_out=tuple(BallSpec(c, m / (m + 1) * a) for c in centers),
    )


def _in_union(points: np.ndarray, z: np.ndarray) -> bool:
    m = points.shape[0]
    mu = points.mean(axis=0)
    d2 = ((z - (m * mu - points) / (m - 1)) ** 2).sum(-1)
    r2 = (m / (m - 1)) ** 2 * ((points - mu) ** 2).sum(-1)
    return bool((d2 < r2).any())


def keep_contains(X: Configuration, body: ConvexBody, z, debug_cross_check: bool = False) -> bool:
    """True iff z can join the configuration (z in body, z not in X, z in the ball union).

    The production test is the leave-one-out-center inequality; with
    debug_cross_check the direct farthest-point definition and the two
    other equivalent inequality forms are evaluated as well and any
    disagreement raises.
    """
    z = np.asarray(z, dtype=float)
    pts = X.points
    if not body.contains(z):
        return False
    if (pts == z).all(axis=1).any():
        return False
    result = _in_union(pts, z)
    if debug_cross_check:
        m = X.M
        sigma = pts.sum(axis=0)
        muplus = (z + sigma) / (m + 1)
        direct = ((z - muplus) ** 2).sum() < ((pts - muplus) ** 2).sum(-1).max()
        form1 = (
            ((m * z - sigma) ** 2).sum()
            < (((m + 1) * pts - z - sigma) ** 2).sum(-1).max()
        )
        # per-j comparison: sum_{i != j} |z - x_i|^2 < sum_{i != j} |x_j - x_i|^2
        swap2 = ((z - pts) ** 2).sum(-1)
        tot = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1).sum(1)
        form2 = bool(((swap2.sum() - swap2) < tot).any())
        agree = {bool(direct), bool(form1), form2, result}
        if len(agree) != 1:
            raise AssertionError(
                f"keep membership forms disagree at z={z}: direct={direct} "
                f"form1={form1} form2={form2} union={result}"
            )
    return result


@dataclass(frozen=True)
class RemovalOutcome:
    """Which point leaves when z arrives; index None means z itself is farthest."""

    index: int | None
    near_tie: bool
    margin: float

    @property
    def is_incoming_extreme(self) -> bool:
        return self.index is None


def _removal_choice(pts: np.ndarray, z: np.ndarray, tie_tol: float) -> RemovalOutcome:
    m = pts.shape[0]
    muplus = (z + pts.sum(axis=0)) / (m + 1)
    d2 = np.empty(m + 1)
    d2[:m] = ((pts - muplus) ** 2).sum(-1)
    d2[m] = ((z - muplus) ** 2).sum()
    order = np.sort(d2)
    top, second = np.sqrt(order[-1]), np.sqrt(order[-2])
    all_pts = np.vstack([pts, z[None, :]])
    diam = np.sqrt(((all_pts[:, None, :] - all_pts[None, :, :]) ** 2).sum(-1).max())
    j = int(d2.argmax())  # argmax takes the first maximum: smallest index wins ties
    return RemovalOutcome(
        index=None if j == m else j,
        near_tie=bool(top - second < tie_tol * diam),
        margin=float(top - second),
    )


def removal_choice(X: Configuration, z, tie_tol: float = NEAR_TIE_TOL) -> RemovalOutcome:
    """Index of the point of X u {z} farthest from the augmented mean.

    Ties break toward the smallest index; the incoming point counts
    last. A near-tie is flagged when the two largest distances differ
    by less than tie_tol times the diameter of X u {z}.
    """
    return _removal_choice(X.points, np.asarray(z, dtype=float), tie_tol)


@dataclass(frozen=True)
class DropForms:
    """The inertia drop F(X) - F({z} u X \\ {x_j}) computed three ways."""

    raw: float
    augmented_mean_form: float
    leave_one_out_form: float

    def max_relative_spread(self) -> float:
        vals = (self.raw, self.augmented_mean_form, self.leave_one_out_form)
        scale = max(abs(v) for v in vals)
        if scale == 0.0:
            return 0.0
        return (max(vals) - min(vals)) / scale


def inertia_drop_forms(X: Configuration, z, j: int) -> DropForms:
    """Raw inertia difference next to its two closed forms."""
    z = np.asarray(z, dtype=float)
    pts = X.points
    m = X.M
    swapped = pts.copy()
    swapped[j] = z
    raw = pairwise_inertia(pts) - pairwise_inertia(swapped)
    sigma = pts.sum(axis=0)
    muplus = (z + sigma) / (m + 1)
    f1 = (m + 1) * (((pts[j] - muplus) ** 2).sum() - ((z - muplus) ** 2).sum())
    cj = (sigma - pts[j]) / (m - 1)
    f2 = (m - 1) * (((pts[j] - cj) ** 2).sum() - ((z - cj) ** 2).sum())
    return DropForms(raw=float(raw), augmented_mean_form=float(f1), leave_one_out_form=float(f2))


def _sample_keep(rng: np.random.Generator, pts: np.ndarray, body: ConvexBody,
                 max_attempts: int) -> np.ndarray:
    m = pts.shape[0]
    mu = pts.mean(axis=0)
    a = float(np.sqrt(((pts - mu) ** 2).sum(-1).max()))
    radius = (m + 1) / (m - 1) * a
    for _ in range(max_attempts):
        z = sample_in_body_cap(rng, body, mu, radius, max_attempts=max_attempts)
        if not (pts == z).all(axis=1).any() and _in_union(pts, z):
            return z
    raise AttemptsExhausted(f"no keep-set sample after {max_attempts} proposals")


def sample_keep(rng: np.random.Generator, X: Configuration, body: ConvexBody,
                max_attempts: int = 100_000) -> np.ndarray:
    """One point uniform on the keep set of X within the body.

    Proposes uniformly on body ∩ outer sandwich ball and accepts on keep
    membership, which is exact in law and keeps the acceptance rate
    bounded below as the configuration shrinks.
    """
    return _sample_keep(rng, X.points, body, max_attempts)


def keep_volume(rng: np.random.Generator, X: Configuration, body: ConvexBody,
                n_samples: int = 100_000) -> tuple[float, float]:
    """Monte Carlo (estimate, standard error) of the keep set's volume.

    Samples the outer sandwich ball, which contains the keep set, so a
    plain hit fraction rescaled by the ball volume is unbiased.
    """
    pts = X.points
    m = X.M
    mu = pts.mean(axis=0)
    a = float(np.sqrt(((pts - mu) ** 2).sum(-1).max()))
    radius = (m + 1) / (m - 1) * a
    cand = mu + sample_ball(rng, X.d, n_samples) * radius
    ok = body.contains_many(cand)
    if ok.any():
        sub = cand[ok]
        mu_, centers, radii = _centers_radii(pts)
        d2 = ((sub[:, None, :] - centers[None, :, :]) ** 2).sum(-1)
        ok[np.flatnonzero(ok)] = (d2 < radii**2).any(axis=1)
    p = ok.mean()
    vol = unit_ball_volume(X.d) * radius**X.d
    se = np.sqrt(max(p * (1 - p), 1.0 / n_samples) / n_samples) * vol
    return float(p * vol), float(se)
