import numpy as np
import pytest

from jantelab import Ball, Box, Configuration, FullSpace, HalfspacePolytope


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_configuration(rng, d, m, scale=1.0, offset=0.0):
    """Generic configuration with no structure; rejection keeps it non-degenerate."""
    while True:
        pts = offset + scale * rng.standard_normal((m, d))
        try:
            return Configuration.from_points(pts)
        except Exception:
            continue


def random_body(rng, d, bounded_only=False):
    kinds = ["box", "ball", "polytope"] + ([] if bounded_only else ["fullspace"])
    kind = kinds[rng.integers(len(kinds))]
    if kind == "fullspace":
        return FullSpace(d)
    if kind == "box":
        lo = rng.uniform(-2, 0, d)
        return Box(lo, lo + rng.uniform(0.5, 3.0, d))
    if kind == "ball":
        return Ball(rng.uniform(-1, 1, d), rng.uniform(0.5, 2.0))
    # simplex-like polytope around a witness
    k = d + 1 + int(rng.integers(0, 3))
    normals = rng.standard_normal((k, d))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    witness = rng.uniform(-0.5, 0.5, d)
    offsets = normals @ witness + rng.uniform(0.3, 1.5, k)
    return HalfspacePolytope(normals, offsets, witness)


def points_inside(rng, body, m, max_tries=10000):
    """m distinct points inside the body, near its witness/center region."""
    if isinstance(body, FullSpace):
        return rng.standard_normal((m, body.d))
    if isinstance(body, Box):
        return rng.uniform(body.lower, body.upper, size=(m, body.d))
    if isinstance(body, Ball):
        from jantelab.bodies import sample_ball
        return body.center + sample_ball(rng, body.d, m) * body.radius
    out = []
    for _ in range(max_tries):
        cand = body.interior_witness + 0.3 * rng.standard_normal(body.d)
        if body.contains(cand):
            out.append(cand)
            if len(out) == m:
                return np.array(out)
    raise RuntimeError("could not place points inside the body")
