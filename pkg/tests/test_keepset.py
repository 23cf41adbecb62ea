import math

import numpy as np
import pytest

from jantelab import (
    Box,
    Configuration,
    FullSpace,
    functionals,
    inertia_drop_forms,
    keep_balls,
    keep_contains,
    keep_volume,
    removal_choice,
    sample_keep,
)
from jantelab.bodies import sample_ball
from jantelab.configuration import pairwise_inertia

from conftest import points_inside, random_body, random_configuration

PAIR = Configuration.from_points([[-1.0], [1.0]])
TRIANGLE = Configuration.from_points([[0.0, 0.0], [10.0, 0.0], [4.0, 6.0]])
FS1, FS2 = FullSpace(1), FullSpace(2)


def brute_force_keep(points, z):
    """Direct farthest-point definition: independent oracle for membership."""
    if any(np.array_equal(p, z) for p in points):
        return False
    aug = np.vstack([points, z[None, :]])
    mu = aug.mean(axis=0)
    return np.linalg.norm(z - mu) < max(np.linalg.norm(p - mu) for p in points)


def test_keep_balls_pair():
    kb = keep_balls(PAIR)
    centers = sorted(float(b.center[0]) for b in kb.balls)
    assert centers == pytest.approx([-1.0, 1.0])
    assert all(b.radius == pytest.approx(2.0) for b in kb.balls)
    assert float(kb.outer.center[0]) == pytest.approx(0.0)
    assert kb.outer.radius == pytest.approx(3.0)
    assert kb.inner.radius == pytest.approx(1.0)


def test_keep_balls_triangle():
    kb = keep_balls(TRIANGLE)
    expected = [((7.0, 3.0), math.sqrt(232.0) / 2.0),
                ((2.0, 3.0), math.sqrt(292.0) / 2.0),
                ((5.0, 0.0), math.sqrt(148.0) / 2.0)]
    for ball, (center, radius) in zip(kb.balls, expected):
        assert ball.center == pytest.approx(center)
        assert ball.radius == pytest.approx(radius)


def test_keep_balls_triangle_against_brute_force(rng):
    # random scan of the plane: the ball union must match the farthest-point
    # definition (aligned grids can land exactly on the measure-zero boundary)
    kb = keep_balls(TRIANGLE)
    for _ in range(4000):
        z = rng.uniform([-5.0, -7.0], [15.0, 10.0])
        via_balls = any(b.contains(z) for b in kb.balls)
        assert via_balls == brute_force_keep(TRIANGLE.points, z)


def test_keep_balls_translation_equivariance(rng):
    v = np.array([3.25, -1.5])
    kb0 = keep_balls(TRIANGLE)
    kb1 = keep_balls(TRIANGLE.translated(v))
    for b0, b1 in zip(kb0.balls, kb1.balls):
        assert b1.center == pytest.approx(b0.center + v)
        assert b1.radius == pytest.approx(b0.radius)


def test_sandwich_ball_invariants(rng):
    # inner tangent inside the farthest point's ball; every ball inside outer
    for _ in range(100):
        X = random_configuration(rng, int(rng.integers(1, 4)), int(rng.integers(2, 7)))
        kb = keep_balls(X)
        f = functionals(X)
        far = int(np.argmax(np.linalg.norm(X.points - f.mu, axis=1)))
        big = kb.balls[far]
        gap = np.linalg.norm(big.center - kb.inner.center)
        assert gap <= big.radius - kb.inner.radius + 1e-9 * f.A
        for b in kb.balls:
            gap = np.linalg.norm(b.center - kb.outer.center)
            assert gap <= kb.outer.radius - b.radius + 1e-9 * f.A


def test_keep_contains_examples():
    assert keep_contains(PAIR, FS1, np.array([2.5]), debug_cross_check=True)
    assert not keep_contains(PAIR, FS1, np.array([3.2]), debug_cross_check=True)
    # the mean always enters
    assert keep_contains(TRIANGLE, FS2, functionals(TRIANGLE).mu, debug_cross_check=True)
    # membership requires being inside the body
    assert not keep_contains(PAIR, Box(np.zeros(1), np.ones(1)), np.array([2.5]))
    # existing points never count
    assert not keep_contains(PAIR, FS1, np.array([1.0]))


def test_removal_choice_pair():
    out = removal_choice(PAIR, np.array([0.5]))
    assert out.index == 0 and PAIR.points[out.index][0] == -1.0
    assert not out.near_tie
    out = removal_choice(PAIR, np.array([3.2]))
    assert out.is_incoming_extreme


def test_removal_choice_triangle():
    out = removal_choice(TRIANGLE, np.array([5.0, 1.0]))
    assert out.index == 1  # the point (10, 0)
    # hand-computed distances from the augmented mean (4.75, 1.75)
    mu_plus = np.array([4.75, 1.75])
    dists = np.linalg.norm(np.vstack([TRIANGLE.points, [[5.0, 1.0]]]) - mu_plus, axis=1)
    assert dists == pytest.approx([5.0621, 5.5340, 4.3157, 0.7906], abs=1e-4)


def test_inertia_drop_pair_example():
    forms = inertia_drop_forms(PAIR, np.array([0.5]), 0)
    assert forms.raw == pytest.approx(3.75)
    assert forms.augmented_mean_form == pytest.approx(3.75)
    assert forms.leave_one_out_form == pytest.approx(3.75)


def test_inertia_drop_vanishes_for_self_replacement():
    for eps in (1e-3, 1e-6, 1e-9):
        forms = inertia_drop_forms(PAIR, np.array([-1.0 + eps]), 0)
        assert abs(forms.raw) <= 8 * eps


def test_inertia_drop_forms_agree_bulk(rng):
    # 10^4 random (X, z, j): all three computations agree to 1e-9 relative
    for _ in range(10_000):
        d = int(rng.integers(1, 4))
        m = int(rng.integers(2, 7))
        X = random_configuration(rng, d, m)
        z = rng.standard_normal(d) * 2.0
        j = int(rng.integers(m))
        assert inertia_drop_forms(X, z, j).max_relative_spread() < 1e-9


def test_membership_criteria_equivalent(rng):
    # keep membership == removal is not the arrival == some swap lowers F
    for _ in range(2000):
        d = int(rng.integers(1, 4))
        m = int(rng.integers(2, 7))
        X = random_configuration(rng, d, m)
        f = functionals(X)
        z = f.mu + 3.0 * f.A * rng.uniform(-1, 1, d)
        member = keep_contains(X, FullSpace(d), z, debug_cross_check=True)
        out = removal_choice(X, z)
        assert member == (not out.is_incoming_extreme)
        drops = [inertia_drop_forms(X, z, j).raw > 0 for j in range(m)]
        assert member == any(drops)
        if member:
            # the removal choice minimizes the post-swap inertia over j
            post = [pairwise_inertia(np.vstack([np.delete(X.points, j, axis=0), z[None]]))
                    for j in range(m)]
            assert post[out.index] == pytest.approx(min(post), rel=1e-12)


def test_keep_scale_translation_equivariance(rng):
    for _ in range(200):
        d = int(rng.integers(1, 4))
        X = random_configuration(rng, d, int(rng.integers(2, 7)))
        z = rng.standard_normal(d) * 2.0
        v = rng.standard_normal(d)
        s = float(rng.uniform(0.1, 10.0))
        base = keep_contains(X, FullSpace(d), z)
        assert keep_contains(X.translated(v), FullSpace(d), z + v) == base
        assert keep_contains(X.scaled(s), FullSpace(d), s * z) == base


def test_good_decrease_bound(rng):
    # arrivals near the mean force a definite inertia drop
    alpha = 0.5
    for _ in range(500):
        d = int(rng.integers(1, 4))
        m = int(rng.integers(2, 7))
        X = random_configuration(rng, d, m)
        f = functionals(X)
        z = f.mu + sample_ball(rng, d, 1)[0] * alpha * f.A
        out = removal_choice(X, z)
        assert not out.is_incoming_extreme
        drop = inertia_drop_forms(X, z, out.index).raw
        bound = (1 - alpha) * ((m - 1) * alpha + m + 1) * f.A**2
        assert drop >= bound - 1e-9 * f.F
        assert drop > (1 - alpha) / m * f.F - 1e-9 * f.F


def test_sample_keep_validity(rng):
    for _ in range(40):
        d = int(rng.integers(1, 3))
        body = random_body(rng, d)
        X = Configuration.from_points(points_inside(rng, body, int(rng.integers(2, 5))))
        z = sample_keep(rng, X, body)
        assert keep_contains(X, body, z, debug_cross_check=True)


def test_sample_keep_pair_lands_in_union(rng):
    zs = np.array([sample_keep(rng, PAIR, FS1) for _ in range(3000)])
    assert (np.abs(zs) < 3.0).all()
    assert not np.isin(zs, [-1.0, 1.0]).any()


def test_sample_keep_acceptance_lower_bound(rng):
    # box [0,1]^2, M=3: acceptance of outer-cap proposals >= ((M-1)/(M+1))^d * c
    body = Box(np.zeros(2), np.ones(2))
    X = Configuration.from_points([[0.3, 0.3], [0.6, 0.4], [0.45, 0.62]])
    f = functionals(X)
    n = 100_000
    accepted = 0
    total = 0
    while total < n:
        cand = f.mu + sample_ball(rng, 2, n) * 2.0 * f.A
        inside = body.contains_many(cand)
        for z in cand[inside][: n - total]:
            accepted += keep_contains(X, body, z)
        total += int(inside.sum())
    bound = (2.0 / 4.0) ** 2 * 0.25  # = 1/64, loose
    rate = accepted / total
    assert rate >= bound


def test_keep_volume_pair(rng):
    est, se = keep_volume(rng, PAIR, FS1, n_samples=200_000)
    assert est == pytest.approx(6.0, abs=4 * se)  # the union is (-3, 3)
    assert est >= 2.0 - 4 * se  # at least the inner ball


def test_keep_volume_scaling(rng):
    est1, se1 = keep_volume(rng, TRIANGLE, FS2, n_samples=100_000)
    est2, se2 = keep_volume(rng, TRIANGLE.scaled(2.0), FS2, n_samples=100_000)
    assert est2 == pytest.approx(4.0 * est1, abs=4 * (4 * se1 + se2))


def test_leave_one_out_balls_inside_keep(rng):
    for _ in range(50):
        d = int(rng.integers(1, 4))
        X = random_configuration(rng, d, int(rng.integers(2, 7)))
        kb = keep_balls(X)
        for ball in kb.leave_one_out:
            zs = ball.center + sample_ball(rng, d, 50) * ball.radius
            for z in zs:
                assert keep_contains(X, FullSpace(d), z)
