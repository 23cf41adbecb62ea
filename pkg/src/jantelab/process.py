"""The chains: original replace-the-farthest process, its core time change,
and the scale-free variant, with full trajectory bookkeeping.

A chain step samples an arrival uniformly on the keep set of the
current configuration, removes the point of configuration-plus-arrival
farthest from the augmented mean, and records the removed point's
arrival label. The moment of inertia strictly decreases at every step,
which is asserted.

Long runs on the full space are recentered whenever the mean drifts
more than 1e3 * sqrt(F) from the origin; the accumulated offset keeps
the limit estimate exact while avoiding catastrophic cancellation. The
chain's law is unchanged because the transition rule is translation
equivariant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bodies import ConvexBody, FullSpace
from .configuration import Configuration, pairwise_inertia
from .errors import DimensionMismatch, JanteError, PointNotInKeep
from .keepset import NEAR_TIE_TOL, _in_union, _removal_choice, _sample_keep

__all__ = [
    "ChainState",
    "OriginalChainState",
    "OriginalStepRecord",
    "RemovalSequence",
    "StepRecord",
    "StopRule",
    "TrajectoryRecord",
    "removal_sequence",
    "run_trajectory",
    "start_chain",
    "start_original_chain",
    "step_jante",
    "step_jante_with_point",
    "step_original",
]

RECENTER_RATIO = 1e3


@dataclass
class StopRule:
    """When to stop a run. max_steps is always finite; the others are optional.

    target_D / target_F are absolute thresholds on the configuration's
    diameter / moment of inertia; require_exodus stops once no initial
    point remains.
    """

    max_steps: int = 100_000
    target_D: float | None = None
    target_F: float | None = None
    require_exodus: bool = False

    def resolved(self, initial_diameter: float) -> "StopRule":
        """Apply the default diameter target when no other bound was requested."""
        if self.target_D is None and self.target_F is None and not self.require_exodus:
            return StopRule(self.max_steps, 1e-12 * initial_diameter, None, False)
        return self


@dataclass(frozen=True)
class StepRecord:
    n: int
    added: np.ndarray
    removed: np.ndarray
    alpha: int
    F_after: float
    near_tie: bool


@dataclass
class ChainState:
    """Mutable working state of one core chain run."""

    body: ConvexBody
    points: np.ndarray
    labels: np.ndarray
    step: int = 0
    F: float = 0.0
    cumulative_offset: np.ndarray | None = None
    recenter: bool = False

    @property
    def M(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def next_arrival_label(self) -> int:
        return self.step + 1

    @property
    def original_remaining(self) -> int:
        return int((self.labels <= 0).sum())

    def configuration(self) -> Configuration:
        return Configuration(self.points.copy(), self.labels.copy())

    def mean(self) -> np.ndarray:
        mu = self.points.mean(axis=0)
        if self.cumulative_offset is not None:
            mu = mu + self.cumulative_offset
        return mu


def start_chain(body: ConvexBody, initial: Configuration, recenter: bool = False) -> ChainState:
    if body.d != initial.d:
        raise DimensionMismatch(f"body d={body.d} but initial configuration d={initial.d}")
    if not initial.inside(body):
        raise ValueError("initial configuration must lie inside the body")
    if recenter and not isinstance(body, FullSpace):
        raise ValueError("recentering is only lawful on the full space")
    return ChainState(
        body=body,
        points=initial.points.copy(),
        labels=initial.labels.copy(),
        F=pairwise_inertia(initial.points),
        cumulative_offset=np.zeros(initial.d) if recenter else None,
        recenter=recenter,
    )


def _apply_arrival(state: ChainState, y: np.ndarray, near_tie: bool, j: int) -> StepRecord:
    n = state.step + 1
    removed = state.points[j].copy()
    alpha = int(state.labels[j])
    state.points[j] = y
    state.labels[j] = n
    f_after = pairwise_inertia(state.points)
    if not f_after < state.F:
        raise JanteError(
            f"moment of inertia failed to decrease at step {n} "
            f"({state.F} -> {f_after}); configuration is numerically degenerate"
        )
    state.step = n
    if state.recenter:
        mu = state.points.mean(axis=0)
        if float((mu**2).sum()) > (RECENTER_RATIO**2) * f_after:
            state.cumulative_offset += mu
            state.points -= mu
            f_after = pairwise_inertia(state.points)
    state.F = f_after
    return StepRecord(n=n, added=np.array(y), removed=removed, alpha=alpha,
                      F_after=state.F, near_tie=near_tie)


def step_jante(state: ChainState, rng: np.random.Generator,
               max_attempts: int = 100_000) -> StepRecord:
    """Advance the core chain by one arrival sampled from the keep set."""
    y = _sample_keep(rng, state.points, state.body, max_attempts)
    out = _removal_choice(state.points, y, NEAR_TIE_TOL)
    if out.is_incoming_extreme:
        raise JanteError("arrival classified as extreme despite keep membership "
                         "(floating-point degeneracy)")
    return _apply_arrival(state, y, out.near_tie, out.index)


def step_jante_with_point(state: ChainState, y) -> StepRecord:
    """Advance the chain with a caller-supplied arrival (deterministic replay)."""
    y = np.asarray(y, dtype=float)
    if y.shape != (state.d,):
        raise DimensionMismatch(f"arrival must have dimension {state.d}")
    if not state.body.contains(y) or (state.points == y).all(axis=1).any() \
            or not _in_union(state.points, y):
        raise PointNotInKeep(f"replayed arrival {y} is outside the keep set")
    out = _removal_choice(state.points, y, NEAR_TIE_TOL)
    if out.is_incoming_extreme:
        raise PointNotInKeep(f"replayed arrival {y} would itself be removed")
    return _apply_arrival(state, y, out.near_tie, out.index)


@dataclass(frozen=True)
class RemovalSequence:
    """Exodus time and the removal labels alpha(1..tau); tau None if not reached."""

    tau: int | None
    alphas: tuple


@dataclass
class TrajectoryRecord:
    initial: Configuration
    steps: list
    tau: int | None
    n_final: int
    F_final: float
    xi_hat: np.ndarray
    stop_reason: str
    near_tie_count: int
    seed: int | None = None
    final_points: np.ndarray = field(default=None, repr=False)


def removal_sequence(record: TrajectoryRecord) -> RemovalSequence:
    """Removal labels of a recorded run, truncated at the exodus time."""
    if not record.steps:
        raise ValueError("trajectory was run without step recording")
    alphas = [s.alpha for s in record.steps]
    if record.tau is None:
        return RemovalSequence(None, tuple(alphas))
    return RemovalSequence(record.tau, tuple(alphas[: record.tau]))


def run_trajectory(body: ConvexBody, initial: Configuration, stop: StopRule,
                   seed: int | None = None, rng: np.random.Generator | None = None,
                   recenter: bool = False, record_steps: bool = True) -> TrajectoryRecord:
    """Run one chain until the stop rule fires.

    The limit estimate xi_hat is the mean of the final configuration
    (plus the accumulated recentering offset); with the default
    diameter target its error is of the order of the final diameter.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    state = start_chain(body, initial, recenter=recenter)
    stop = stop.resolved(_diameter_of(state.points))
    steps: list[StepRecord] = []
    tau = None
    ties = 0
    reason = "max_steps"
    n = 0
    while n < stop.max_steps:
        rec = step_jante(state, rng)
        n = rec.n
        ties += int(rec.near_tie)
        if record_steps:
            steps.append(rec)
        if tau is None and state.original_remaining == 0:
            tau = n
        if stop.require_exodus and tau is not None:
            reason = "exodus"
            break
        if stop.target_F is not None and state.F <= stop.target_F:
            reason = "target_F"
            break
        if stop.target_D is not None and _diameter_of(state.points) <= stop.target_D:
            reason = "target_D"
            break
    return TrajectoryRecord(
        initial=initial,
        steps=steps,
        tau=tau,
        n_final=n,
        F_final=state.F,
        xi_hat=state.mean(),
        stop_reason=reason,
        near_tie_count=ties,
        seed=seed,
        final_points=state.points.copy(),
    )


def _diameter_of(points: np.ndarray) -> float:
    diff = points[:, None, :] - points[None, :, :]
    return float(np.sqrt((diff**2).sum(-1).max()))


# ---------------------------------------------------------------------------
# The original N-point process (replace the farthest with a uniform draw).


@dataclass(frozen=True)
class OriginalStepRecord:
    t: int
    added: np.ndarray
    replaced_index: int
    core_changed: bool
    near_tie: bool


@dataclass
class OriginalChainState:
    """N points; the core is everything except the current farthest point."""

    body: ConvexBody
    points: np.ndarray
    step: int = 0

    @property
    def N(self) -> int:
        return self.points.shape[0]

    def farthest_index(self) -> int:
        mu = self.points.mean(axis=0)
        return int(((self.points - mu) ** 2).sum(-1).argmax())

    def core(self) -> np.ndarray:
        return np.delete(self.points, self.farthest_index(), axis=0)


def start_original_chain(body: ConvexBody, initial_points) -> OriginalChainState:
    pts = np.array(initial_points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise ValueError("the original process needs N >= 3 points")
    if not body.is_bounded():
        raise JanteError("uniform arrivals need a bounded body")
    if not body.contains_many(pts).all():
        raise ValueError("initial points must lie inside the body")
    return OriginalChainState(body=body, points=pts)


def step_original(state: OriginalChainState, rng: np.random.Generator) -> OriginalStepRecord:
    """Replace the farthest-from-mean point with a uniform draw on the body.

    The core (all points but the farthest) changes exactly when the
    draw lands in its keep set; the subsequence of core-changing steps
    is the core chain in law.
    """
    j = state.farthest_index()
    core = np.delete(state.points, j, axis=0)
    zeta = state.body.sample_uniform(rng, 1)[0]
    # classification against the pre-arrival core decides whether the core moves
    out = _removal_choice(core, zeta, NEAR_TIE_TOL)
    state.points[j] = zeta
    state.step += 1
    return OriginalStepRecord(t=state.step, added=zeta, replaced_index=j,
                              core_changed=not out.is_incoming_extreme,
                              near_tie=out.near_tie)
