"""Synchronous vectorized ensembles of core-chain runs.

Every run in the ensemble advances one step per sweep, with all the
per-run geometry batched into (runs, M, d) arrays. One generator drives
the whole ensemble, so results are a deterministic function of the
master seed and the ensemble parameters (they do not depend on worker
counts because there are none here). Use :mod:`jantelab.process` when
per-run replayable streams are needed.

Full-space ensembles are recentered to mean zero after every step, with
offsets accumulated per run; this is lawful by translation equivariance
and is what keeps hundred-step runs numerically exact while the
configuration shrinks through forty orders of magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bodies import ConvexBody, FullSpace
from .configuration import Configuration
from .errors import AttemptsExhausted, JanteError
from .keepset import NEAR_TIE_TOL

__all__ = ["EnsembleResult", "IncrementEnsemble", "run_increment_ensemble", "run_limit_ensemble"]

_MAX_REJECTION_ROUNDS = 100_000


def _pair_inertia_many(pts: np.ndarray) -> np.ndarray:
    diff = pts[:, :, None, :] - pts[:, None, :, :]
    return 0.5 * (diff**2).sum(axis=(1, 2, 3))


def _diameter_many(pts: np.ndarray) -> np.ndarray:
    diff = pts[:, :, None, :] - pts[:, None, :, :]
    return np.sqrt((diff**2).sum(-1).max(axis=(1, 2)))


def _step_many(pts: np.ndarray, labels: np.ndarray, step_no: int,
               rng: np.random.Generator, body: ConvexBody) -> int:
    """One synchronous arrival for every run in pts (in place); returns near-tie count."""
    r, m, d = pts.shape
    mu = pts.mean(axis=1)
    dev2 = ((pts - mu[:, None, :]) ** 2).sum(-1)
    radius_out = (m + 1) / (m - 1) * np.sqrt(dev2.max(axis=1))
    centers = (m * mu[:, None, :] - pts) / (m - 1)
    radii2 = (m / (m - 1)) ** 2 * dev2

    z = np.empty((r, d))
    pending = np.ones(r, dtype=bool)
    fullspace = isinstance(body, FullSpace)
    rounds = 0
    while pending.any():
        rounds += 1
        if rounds > _MAX_REJECTION_ROUNDS:
            raise AttemptsExhausted("keep-set rejection sampling stalled")
        k = int(pending.sum())
        dirs = rng.standard_normal((k, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        rad = radius_out[pending] * rng.random(k) ** (1.0 / d)
        cand = mu[pending] + dirs * rad[:, None]
        ok = np.ones(k, dtype=bool)
        if not fullspace:
            ok &= body.contains_many(cand)
        dist2 = ((cand[:, None, :] - centers[pending]) ** 2).sum(-1)
        ok &= (dist2 < radii2[pending]).any(axis=1)
        idx = np.flatnonzero(pending)[ok]
        z[idx] = cand[ok]
        pending[idx] = False

    mu_plus = (m * mu + z) / (m + 1)
    d2 = np.empty((r, m + 1))
    d2[:, :m] = ((pts - mu_plus[:, None, :]) ** 2).sum(-1)
    d2[:, m] = ((z - mu_plus) ** 2).sum(-1)
    j = d2.argmax(axis=1)
    if (j == m).any():
        raise JanteError("arrival classified as extreme despite keep membership "
                         "(floating-point degeneracy)")

    top2 = np.sqrt(np.partition(d2, m - 1, axis=1)[:, m - 1:])
    gap = top2[:, 1] - top2[:, 0]
    all_pts = np.concatenate([pts, z[:, None, :]], axis=1)
    near = int((gap < NEAR_TIE_TOL * _diameter_many(all_pts)).sum())

    rows = np.arange(r)
    pts[rows, j] = z
    labels[rows, j] = step_no
    return near


def _recenter(pts: np.ndarray, offsets: np.ndarray) -> None:
    mu = pts.mean(axis=1)
    offsets += mu
    pts -= mu[:, None, :]


@dataclass
class EnsembleResult:
    """Per-run outcomes of a vectorized ensemble.

    tau is -1 where exodus was not reached before stopping. anchor_mu /
    anchor_F hold the state snapshot at the requested anchor step (None
    when not requested).
    """

    tau: np.ndarray
    n_final: np.ndarray
    xi: np.ndarray
    F_final: np.ndarray
    near_ties: int
    anchor_mu: np.ndarray | None = None
    anchor_F: np.ndarray | None = None

    @property
    def all_exodus(self) -> bool:
        return bool((self.tau > 0).all())


def _initial_arrays(initial: Configuration, n_runs: int):
    pts = np.repeat(initial.points[None, :, :], n_runs, axis=0).copy()
    labels = np.repeat(initial.labels[None, :], n_runs, axis=0).copy()
    return pts, labels


@dataclass
class IncrementEnsemble:
    """Step-indexed functionals of an ensemble: column n is the state after step n.

    F is the moment of inertia, A the max distance from the mean, D the
    diameter, d_min the smallest gap; d_interior is the distance of the
    interior points to the body's complement (inf columns on the full
    space). With rescale_every set, the F columns are block-local and
    only scale-free ratios remain meaningful across blocks.
    """

    F: np.ndarray
    A: np.ndarray
    D: np.ndarray
    d_min: np.ndarray
    d_interior: np.ndarray
    near_ties: int

    @property
    def h(self) -> np.ndarray:
        return 0.5 * np.log(self.F) - np.log(self.d_min)


def _functional_row(pts: np.ndarray, body: ConvexBody, out, col: int) -> None:
    r, m, _ = pts.shape
    diff = pts[:, :, None, :] - pts[:, None, :, :]
    d2 = (diff**2).sum(-1)
    out.F[:, col] = 0.5 * d2.sum(axis=(1, 2))
    out.D[:, col] = np.sqrt(d2.max(axis=(1, 2)))
    io = np.arange(m)
    d2[:, io, io] = np.inf
    out.d_min[:, col] = np.sqrt(d2.min(axis=(1, 2)))
    mu = pts.mean(axis=1)
    out.A[:, col] = np.sqrt(((pts - mu[:, None, :]) ** 2).sum(-1).max(axis=1))
    if isinstance(body, FullSpace):
        out.d_interior[:, col] = np.inf
    else:
        dist = body.distance_to_complement_many(pts.reshape(-1, pts.shape[2])).reshape(r, m)
        interior = np.where(dist > 0, dist, np.inf)
        out.d_interior[:, col] = interior.min(axis=1)


def run_increment_ensemble(body: ConvexBody, initial: Configuration, n_runs: int,
                           n_steps: int, seed: int,
                           rescale_every: int | None = None) -> IncrementEnsemble:
    """Advance n_runs copies for n_steps, recording functionals after every step.

    Meant for drift statistics: column differences of log F (or of h)
    pool into conditional-increment samples. rescale_every renormalizes
    the configurations to unit inertia periodically, which is lawful
    only on the full space and keeps arbitrarily long runs in floating
    point range.
    """
    if not initial.inside(body):
        raise ValueError("initial configuration must lie inside the body")
    fullspace = isinstance(body, FullSpace)
    if rescale_every is not None and not fullspace:
        raise ValueError("rescaling is only lawful on the full space")
    rng = np.random.default_rng(seed)
    pts, labels = _initial_arrays(initial, n_runs)
    offsets = np.zeros((n_runs, initial.d))
    shape = (n_runs, n_steps + 1)
    out = IncrementEnsemble(F=np.empty(shape), A=np.empty(shape), D=np.empty(shape),
                            d_min=np.empty(shape), d_interior=np.empty(shape), near_ties=0)
    _functional_row(pts, body, out, 0)
    for n in range(1, n_steps + 1):
        out.near_ties += _step_many(pts, labels, n, rng, body)
        if fullspace:
            _recenter(pts, offsets)
        if rescale_every is not None and n % rescale_every == 0:
            pts /= np.sqrt(_pair_inertia_many(pts))[:, None, None]
        _functional_row(pts, body, out, n)
    return out


def run_limit_ensemble(body: ConvexBody, initial: Configuration, n_runs: int, seed: int,
                       target_D: float | None = None, max_steps: int = 100_000,
                       require_exodus: bool = False,
                       anchor_step: int | None = None) -> EnsembleResult:
    """Run n_runs copies to their stop condition and estimate each limit point.

    A run finishes when its diameter reaches target_D, or (with
    require_exodus) when no initial point remains; whichever enabled
    condition fires first. xi is the final mean plus any accumulated
    recentering offset.
    """
    if not initial.inside(body):
        raise ValueError("initial configuration must lie inside the body")
    if target_D is None and not require_exodus:
        raise ValueError("need target_D and/or require_exodus")
    rng = np.random.default_rng(seed)
    pts, labels = _initial_arrays(initial, n_runs)
    offsets = np.zeros((n_runs, initial.d))
    fullspace = isinstance(body, FullSpace)
    tau = np.full(n_runs, -1, dtype=np.int64)
    n_final = np.full(n_runs, 0, dtype=np.int64)
    alive = np.ones(n_runs, dtype=bool)
    anchor_mu = anchor_F = None
    ties = 0
    n = 0
    while alive.any() and n < max_steps:
        n += 1
        idx = np.flatnonzero(alive)
        sub = pts[idx]
        sub_labels = labels[idx]
        ties += _step_many(sub, sub_labels, n, rng, body)
        if fullspace:
            sub_off = offsets[idx]
            _recenter(sub, sub_off)
            offsets[idx] = sub_off
        pts[idx] = sub
        labels[idx] = sub_labels

        newly_exodus = ~(sub_labels <= 0).any(axis=1) & (tau[idx] < 0)
        tau[idx[newly_exodus]] = n
        done = np.zeros(len(idx), dtype=bool)
        if require_exodus:
            done |= tau[idx] > 0
        if target_D is not None:
            done |= _diameter_many(sub) <= target_D
        n_final[idx[done]] = n
        alive[idx[done]] = False

        if anchor_step is not None and n == anchor_step:
            anchor_mu = pts.mean(axis=1) + offsets
            anchor_F = _pair_inertia_many(pts)
    n_final[alive] = n
    return EnsembleResult(
        tau=tau,
        n_final=n_final,
        xi=pts.mean(axis=1) + offsets,
        F_final=_pair_inertia_many(pts),
        near_ties=ties,
        anchor_mu=anchor_mu,
        anchor_F=anchor_F,
    )
