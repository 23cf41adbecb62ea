"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines. Sizes and tolerances are fixed here, not tuned at runtime; all
bound checks are one-sided with the stated standard-error slack.
"""

import json
import math
import time

import numpy as np
import pytest
from scipy.stats import chi2 as chi2_dist

from jantelab import Box, Configuration, FullSpace
from jantelab.analysis import atom_scan, compute_constants, tightness_coverage, two_step_region
from jantelab.bodies import sample_ball, shell_volume_check, unit_ball_volume
from jantelab.cli import main
from jantelab.ensemble import run_increment_ensemble, run_limit_ensemble
from jantelab.keepset import inertia_drop_forms
from jantelab.process import start_chain, step_jante_with_point

from conftest import random_body, random_configuration

PAIR = Configuration.from_points([[-1.0], [1.0]])


def report(number: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {number:>2} {name}: {status}{suffix}")


# -------------------------------------------------------------------- 1


def _batch_membership_forms(rng, d, m, n):
    """Vectorized evaluation of the three keep-membership criteria on
    random (X, z); returns (direct, balls, swap, near_tie_flags)."""
    pts = rng.standard_normal((n, m, d))
    mu = pts.mean(axis=1)
    a = np.sqrt(((pts - mu[:, None, :]) ** 2).sum(-1).max(axis=1))
    dirs = rng.standard_normal((n, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    z = mu + dirs * (3.2 * a * rng.random(n) ** (1.0 / d))[:, None]

    # direct farthest-point definition
    mu_plus = (z + pts.sum(axis=1)) / (m + 1)
    dz2 = ((z - mu_plus) ** 2).sum(-1)
    dx2 = ((pts - mu_plus[:, None, :]) ** 2).sum(-1)
    direct = dz2 < dx2.max(axis=1)

    # union of the component balls
    centers = (m * mu[:, None, :] - pts) / (m - 1)
    radii2 = (m / (m - 1)) ** 2 * ((pts - mu[:, None, :]) ** 2).sum(-1)
    balls = (((z[:, None, :] - centers) ** 2).sum(-1) < radii2).any(axis=1)

    # some swap strictly lowers the raw moment of inertia
    diff = pts[:, :, None, :] - pts[:, None, :, :]
    pair2 = (diff**2).sum(-1)
    f_x = 0.5 * pair2.sum(axis=(1, 2))
    swap = np.zeros(n, dtype=bool)
    for j in range(m):
        swapped = pts.copy()
        swapped[:, j, :] = z
        sdiff = swapped[:, :, None, :] - swapped[:, None, :, :]
        f_j = 0.5 * (sdiff**2).sum(axis=(1, 2, 3))
        swap |= f_j < f_x

    # near-tie: the decisive distances almost equal, relative to the diameter
    aug = np.concatenate([pts, z[:, None, :]], axis=1)
    adiff = aug[:, :, None, :] - aug[:, None, :, :]
    diam = np.sqrt((adiff**2).sum(-1).max(axis=(1, 2)))
    margin = np.abs(np.sqrt(dz2) - np.sqrt(dx2.max(axis=1)))
    near = margin < 1e-12 * diam
    return direct, balls, swap, near


def test_criterion_1_keep_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    combos = [(d, m) for d in (1, 2, 3) for m in (2, 3, 4, 5, 6)]
    per = math.ceil(100_000 / len(combos))
    mismatches = 0
    near_ties = 0
    total = 0
    for d, m in combos:
        direct, balls, swap, near = _batch_membership_forms(rng, d, m, per)
        agree = (direct == balls) & (balls == swap)
        mismatches += int((~agree & ~near).sum())
        near_ties += int(near.sum())
        total += per
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and near_ties / total < 1e-6 and elapsed < 30.0
    report(1, "keep membership equivalence", ok,
           f"{total} instances, {mismatches} mismatches, "
           f"{near_ties} near-ties, {elapsed:.1f}s")
    assert mismatches == 0
    assert near_ties / total < 1e-6
    assert elapsed < 30.0


# -------------------------------------------------------------------- 2


def test_criterion_2_inertia_identity():
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(10_000):
        d = int(rng.integers(1, 4))
        m = int(rng.integers(2, 7))
        X = random_configuration(rng, d, m)
        z = rng.standard_normal(d) * 2.0
        j = int(rng.integers(m))
        worst = max(worst, inertia_drop_forms(X, z, j).max_relative_spread())
    ok = worst < 1e-9
    report(2, "inertia-drop closed forms", ok, f"max relative spread {worst:.2e}")
    assert ok


# -------------------------------------------------------------------- 3


def test_criterion_3_sandwich_inclusions():
    rng = np.random.default_rng(103)
    violations = 0
    checked = 0

    def direct_keep(pts, z):
        mu_plus = (z + pts.sum(axis=0)) / (pts.shape[0] + 1)
        return ((z - mu_plus) ** 2).sum() < ((pts - mu_plus) ** 2).sum(-1).max()

    while checked < 100_000:
        d = int(rng.integers(1, 4))
        m = int(rng.integers(2, 7))
        body = random_body(rng, d)
        X = None
        for _ in range(200):
            cand = random_configuration(rng, d, m, scale=0.3)
            if body.contains_many(cand.points).all():
                X = cand
                break
        if X is None:
            continue
        pts = X.points
        mu = pts.mean(axis=0)
        a = float(np.sqrt(((pts - mu) ** 2).sum(-1).max()))
        centers = (m * mu - pts) / (m - 1)

        # inner ball inside the keep set
        zs = mu + sample_ball(rng, d, 40) * a
        zs = zs[body.contains_many(zs)]
        for z in zs:
            violations += not direct_keep(pts, z)
            checked += 1
        # leave-one-out balls inside the keep set
        for c in centers:
            zs = c + sample_ball(rng, d, 8) * (m / (m + 1)) * a
            zs = zs[body.contains_many(zs)]
            for z in zs:
                violations += not direct_keep(pts, z)
                checked += 1
        # the keep set inside the outer ball
        zs = mu + sample_ball(rng, d, 40) * 5.0 * a
        zs = zs[body.contains_many(zs)]
        for z in zs:
            if direct_keep(pts, z):
                violations += np.linalg.norm(z - mu) >= (m + 1) / (m - 1) * a
                checked += 1
    ok = violations == 0
    report(3, "sandwich ball inclusions", ok, f"{checked} points, {violations} violations")
    assert ok


# ----------------------------------------------------------------- 4, 5


DRIFT_GRID = [(1, 2), (1, 3), (1, 5), (2, 2), (2, 3), (2, 5)]


@pytest.fixture(scope="module")
def drift_ensembles():
    out = {}
    for i, (d, m) in enumerate(DRIFT_GRID):
        rng = np.random.default_rng(200 + i)
        init = random_configuration(rng, d, m)
        out[(d, m)] = run_increment_ensemble(FullSpace(d), init, 2500, 40, seed=300 + i)
    return out


def test_criterion_4_log_inertia_drift(drift_ensembles):
    t0 = time.perf_counter()
    ok_all = True
    details = []
    for d, m in DRIFT_GRID:
        inc = np.diff(np.log(drift_ensembles[(d, m)].F), axis=1).ravel()
        bound = -(4.0**-d) / (4 * m)
        se = inc.std(ddof=1) / math.sqrt(inc.size)
        ok = inc.mean() <= bound + 3 * se and inc.size >= 100_000
        ok_all &= ok
        details.append(f"d={d},M={m}: {inc.mean():.3f}<={bound:.4f}")
    elapsed = time.perf_counter() - t0
    ok_all &= elapsed < 120.0
    report(4, "log-inertia drift bound", ok_all, "; ".join(details))
    assert ok_all


def test_criterion_5_decrease_probability(drift_ensembles):
    ok_all = True
    details = []
    for d, m in DRIFT_GRID:
        F = drift_ensembles[(d, m)].F
        hits = (F[:, 1:] / F[:, :-1] < 1.0 - 1.0 / (4 * m)).ravel()
        p = hits.mean()
        se = math.sqrt(p * (1 - p) / hits.size)
        ok = p >= 4.0**-d - 3 * se
        ok_all &= ok
        details.append(f"d={d},M={m}: {p:.3f}>={4.0 ** -d:.4f}")
    report(5, "definite-decrease probability", ok_all, "; ".join(details))
    assert ok_all


# -------------------------------------------------------------------- 6


def test_criterion_6_exodus():
    ok_all = True
    details = []
    for i, (d, m) in enumerate([(1, 2), (1, 3), (1, 4), (2, 2), (2, 3), (2, 4)]):
        rng = np.random.default_rng(400 + i)
        init = random_configuration(rng, d, m)
        lim = run_limit_ensemble(FullSpace(d), init, 100_000, seed=500 + i,
                                 require_exodus=True, max_steps=100_000)
        ok = lim.all_exodus
        detail = f"d={d},M={m}: finite"
        if m == 2:
            tau = lim.tau
            mean = tau.mean()
            shifted = tau - 1
            edges = np.arange(1, 15)
            observed = np.array([(shifted == k).sum() for k in edges]
                                + [(shifted >= 15).sum()], dtype=float)
            probs = np.array([0.5**k for k in edges] + [0.5**14])
            expected = probs / probs.sum() * observed.sum()
            chi2 = float(((observed - expected) ** 2 / expected).sum())
            p = float(chi2_dist.sf(chi2, df=len(observed) - 1))
            ok &= p > 0.001 and abs(mean - 3.0) <= 0.02
            detail += f", mean {mean:.3f}, chi2 p {p:.3f}"
        ok_all &= ok
        details.append(detail)
    report(6, "exodus times", ok_all, "; ".join(details))
    assert ok_all


# -------------------------------------------------------------------- 7


def test_criterion_7_limit_continuity():
    ok_all = True
    details = []
    cases = [
        ("box", Box(np.zeros(1), np.ones(1)),
         Configuration.from_points([[0.15], [0.5], [0.85]]), 600),
        ("fullspace", FullSpace(1),
         Configuration.from_points([[0.0], [0.4], [1.0]]), 601),
    ]
    for name, body, init, seed in cases:
        diam = init.points.max() - init.points.min()
        lim = run_limit_ensemble(body, init, 10_000, seed=seed,
                                 target_D=1e-12 * diam, max_steps=5000)
        scan = atom_scan(lim.xi, probes=init.points)
        fracs = scan.probe_fractions()[:4]  # decades 1e-1 .. 1e-4
        strict = all(a > b for a, b in zip(fracs, fracs[1:]))
        ok = scan.exact_collisions == 0 and strict
        # negative control: a corrupted ensemble must light up
        corrupted = lim.xi.copy()
        corrupted[:500] = corrupted[500:1000]
        control = atom_scan(corrupted)
        ok &= control.exact_collisions > 0
        ok_all &= ok
        details.append(f"{name}: collisions {scan.exact_collisions}, "
                       f"probe decades {['%.4f' % f for f in fracs]}")
    report(7, "limit-point continuity scan", ok_all, "; ".join(details))
    assert ok_all


# -------------------------------------------------------------------- 8


def test_criterion_8_two_step_region_oracle():
    rng = np.random.default_rng(108)
    disagreements = 0
    flagged = 0
    for _ in range(10_000):
        z1 = float(rng.uniform(-3.0, 3.0))
        state = start_chain(FullSpace(1), PAIR)
        r1 = step_jante_with_point(state, np.array([z1]))
        lo, hi = float(state.points.min()), float(state.points.max())
        gap = hi - lo
        z2 = float(rng.uniform(lo - gap, hi + gap))  # uniform on the keep interval
        r2 = step_jante_with_point(state, np.array([z2]))
        if r1.near_tie or r2.near_tie:
            flagged += 1
            continue
        replayed = (2, (-1, 0)) if (r1.alpha, r2.alpha) == (-1, 0) else None
        disagreements += two_step_region(z1, z2) != replayed
    ok = disagreements == 0
    report(8, "two-step removal-region oracle", ok,
           f"{disagreements} disagreements, {flagged} near-ties")
    assert ok


# -------------------------------------------------------------------- 9


def test_criterion_9_tightness_coverage():
    lim = run_limit_ensemble(FullSpace(1), PAIR, 10_000, seed=109,
                             target_D=1e-10, max_steps=5000, anchor_step=5)
    rep = tightness_coverage(lim.xi, lim.anchor_mu, lim.anchor_F, d=1, M=2, eps=0.5)
    coeff_ok = abs(rep.radius_coeff - 12.29) < 0.005
    ok = rep.coverage >= 0.5 and coeff_ok
    report(9, "limit confinement coverage", ok,
           f"coverage {rep.coverage:.4f} with radius coeff {rep.radius_coeff:.2f}")
    assert ok


# ------------------------------------------------------------------- 10


def test_criterion_10_volume_bounds_mc():
    rng = np.random.default_rng(110)
    shell_viol = 0
    ratio_viol = 0
    for _ in range(100):
        d = int(rng.integers(1, 4))
        body = random_body(rng, d, bounded_only=True)
        from conftest import points_inside

        x = points_inside(rng, body, 1)[0]
        # shell volume against both analytic bounds
        big_r = float(rng.uniform(0.2, 1.5))
        small_r = float(rng.uniform(0.05, 0.95)) * big_r
        y = x + rng.standard_normal(d) * 0.3
        chk = shell_volume_check(rng, body, y, big_r, small_r, n_samples=20_000)
        shell_viol += chk.violation
        # cap-volume ratio comparison
        r2 = float(rng.uniform(0.3, 1.5))
        r1 = float(rng.uniform(0.1, 0.9)) * r2
        n = 20_000
        f1 = body.contains_many(x + sample_ball(rng, d, n) * r1).mean()
        f2 = body.contains_many(x + sample_ball(rng, d, n) * r2).mean()
        v1 = f1 * unit_ball_volume(d) * r1**d
        v2 = f2 * unit_ball_volume(d) * r2**d
        se = (v1 / v2) * math.sqrt(max(1 - f1, 1e-6) / (f1 * n)
                                   + max(1 - f2, 1e-6) / (f2 * n))
        ratio_viol += (v1 / v2) < (r1 / r2) ** d - 4 * se
    ok = shell_viol == 0 and ratio_viol == 0
    report(10, "isoperimetric and ratio MC bounds", ok,
           f"shell violations {shell_viol}, ratio violations {ratio_viol}")
    assert ok


# ------------------------------------------------------------------- 11


def test_criterion_11_worker_determinism(tmp_path):
    cfg = {
        "d": 1, "M": 2,
        "body": {"kind": "fullspace", "d": 1},
        "initial": {"points": [[-1.0], [1.0]]},
        "seed": 777,
        "n_runs": 60,
        "stop": {"require_exodus": True},
    }
    outputs = []
    for workers in (1, 3):
        cfg["workers"] = workers
        cfg["out_dir"] = str(tmp_path / f"w{workers}")
        path = tmp_path / f"cfg{workers}.json"
        path.write_text(json.dumps(cfg))
        assert main(["ensemble", "--config", str(path)]) == 0
        outputs.append((tmp_path / f"w{workers}" / "ensemble.csv").read_bytes())
    ok = outputs[0] == outputs[1]
    report(11, "worker-count determinism", ok,
           f"{len(outputs[0])} bytes, byte-identical: {ok}")
    assert ok
