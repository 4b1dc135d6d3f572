import math

import numpy as np
import pytest
from scipy.spatial import cKDTree
from hypothesis import given, settings
from hypothesis import strategies as st

from ridgekit.config import DEFAULT
from ridgekit.errors import NotInteriorPoint
from ridgekit.geometry import builtin, get_domain
from ridgekit.projection import distance, distances, is_skeleton_point, project, projection_rows, skeleton_flags, usc_probe
from ridgekit.verify import random_interior


def test_distance_examples(specs):
    assert distance(specs["disc"], (0.5, 0.0)) == pytest.approx(0.5, abs=1e-12)
    assert distance(specs["disc_halfplane"], (1.0, 1.0)) == pytest.approx(1.0, abs=1e-9)
    assert distance(specs["ellipse"], (0.0, 0.0)) == pytest.approx(1.0, abs=1e-9)


def test_disc_distance_closed_form(specs, rng):
    r = np.sqrt(rng.uniform(0, 0.95**2, 500))
    th = rng.uniform(0, 2 * np.pi, 500)
    xs = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    assert np.allclose(distances(specs["disc"], xs), 1 - r, atol=1e-9)


def test_disc_center_projects_everywhere(specs):
    res = project(specs["disc"], (0.0, 0.0))
    assert not res.is_singleton
    assert res.n_clusters >= 8
    ang = np.sort([math.atan2(s.point[1], s.point[0]) for s in res.projections])
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
    assert gaps.max() < np.pi / 2


def test_ellipse_two_projections(specs):
    res = project(specs["ellipse"], (1.4, 0.0))
    assert not res.is_singleton and res.n_clusters == 2
    (a, b) = [s.point for s in res.projections]
    assert a[1] * b[1] < 0
    assert a[0] == pytest.approx(b[0], abs=1e-6) and a[1] == pytest.approx(-b[1], abs=1e-6)


def test_halfplane_projection_and_skeleton(specs):
    res = project(specs["disc_halfplane"], (1.0, 1.0))
    assert res.is_singleton
    assert np.allclose(res.projections[0].point, [1.0, 0.0], atol=1e-6)
    assert is_skeleton_point(specs["disc_halfplane"], (0.0, 0.5))
    assert is_skeleton_point(specs["disc"], (0.0, 0.0))
    assert not is_skeleton_point(specs["disc"], (0.5, 0.0))


def test_outside_points_rejected(specs):
    with pytest.raises(NotInteriorPoint):
        project(specs["disc"], (1.2, 0.0))
    with pytest.raises(NotInteriorPoint):
        distances(specs["disc_halfplane"], [[0.0, 0.5], [2.0, -1.0]])


@pytest.mark.parametrize("name", ["disc", "ellipse", "disc_halfplane", "graph_power", "parabola", "polyline"])
def test_realization_and_open_ball(specs, name, rng):
    spec = specs[name]
    dom = get_domain(spec)
    xs = random_interior(spec, 40, rng, DEFAULT)
    for x in xs:
        res = project(spec, x)
        for s in res.projections:
            assert not dom.inside_many(s.point[None])[0] or abs(dom.implicit(s.point[None])[0]) < 1e-9
            assert abs(np.linalg.norm(s.point - x) - res.distance) <= DEFAULT.eps_proj
    # no dense sample strictly inside the ball of radius d - eps
    xs = random_interior(spec, 1000, rng, DEFAULT)
    d = distances(spec, xs)
    nearest, _ = cKDTree(dom.dense_points).query(xs)
    assert np.all(nearest >= d - DEFAULT.eps_proj)


@pytest.mark.parametrize("name", ["disc", "ellipse", "parabola"])
def test_multi_projection_soundness(specs, name, rng):
    spec = specs[name]
    xs = random_interior(spec, 3000, rng, DEFAULT)
    d, multi, _ = skeleton_flags(spec, xs)
    hits = xs[multi][:20]
    for x in hits:
        res = project(spec, x)
        if res.continuum:
            continue
        dists = [np.linalg.norm(s.point - x) for s in res.projections]
        assert len(dists) >= 2
        assert max(dists) - min(dists) <= 2 * DEFAULT.eps_proj


@settings(max_examples=60, deadline=None)
@given(
    st.floats(-0.95, 0.95),
    st.floats(-0.95, 0.95),
    st.floats(-0.3, 0.3),
    st.floats(-0.3, 0.3),
)
def test_distance_is_lipschitz(x0, y0, dx, dy):
    spec = builtin("ellipse")
    p, q = np.array([x0 * 1.9, y0 * 0.9]), np.array([x0 * 1.9 + dx, y0 * 0.9 + dy])
    dom = get_domain(spec)
    if not dom.inside_many(np.stack([p, q])).all():
        return
    dp, dq = distances(spec, np.stack([p, q]))
    assert abs(dp - dq) <= np.linalg.norm(p - q) + 1e-9


def test_lipschitz_on_random_pairs(specs, rng):
    for name in ("disc_halfplane", "polyline", "graph_power"):
        xs = random_interior(specs[name], 1000, rng, DEFAULT)
        d = distances(specs[name], xs)
        i, j = rng.integers(0, len(xs), (2, 5000))
        gap = np.abs(d[i] - d[j]) - np.linalg.norm(xs[i] - xs[j], axis=1)
        assert gap.max() <= 1e-9


def test_usc_examples(specs):
    rep = usc_probe(specs["disc"], (0.5, 0.0), [0.1, 0.01, 0.001], 0.05)
    assert rep.passed and rep.monotone
    # radial projection: the deviation is the chord to y/|y|, about r/|x| here
    assert rep.deviations[0] == pytest.approx(0.2, rel=0.05)
    rep = usc_probe(specs["disc"], (0.0, 0.0), [0.1, 0.01], 0.05)
    assert rep.passed and max(rep.deviations) < 1e-3


def test_usc_ellipse_endpoint(specs):
    # near the evolute cusp the foot point moves like r**(1/3)
    rep = usc_probe(specs["ellipse"], (1.5, 0.0), [0.1, 0.01, 0.001, 1e-4], 0.05)
    brute = [0.4708, 0.1945, 0.0881, 0.0409]
    assert np.allclose(rep.deviations, brute, rtol=0.02)
    assert rep.monotone and rep.passed


def test_usc_rejects_bad_radii(specs):
    with pytest.raises(ValueError):
        usc_probe(specs["disc"], (0.5, 0.0), [0.3], 0.05)
    with pytest.raises(ValueError):
        usc_probe(specs["disc"], (0.5, 0.0), [0.01, 0.1], 0.05)


def test_projection_rows_pad(specs):
    xs = [(0.5, 0.0), (0.0, 0.0)]
    res = [project(specs["disc"], x) for x in xs]
    header, rows = projection_rows(xs, res)
    assert header[:4] == ["x", "y", "d", "n_clusters"]
    assert all(len(r) == len(header) for r in rows)
    assert rows[0][3] == 1 and rows[0][6] == ""
