import json
import math

import numpy as np
import pytest

from ridgekit.errors import DegenerateBoundary, InvalidDomain, QueryOutsideClipBox
from ridgekit.geometry import BUILTIN_NAMES, DomainSpec, builtin, get_domain, inside, local_frame, sample_boundary


def test_inside_examples(specs):
    assert inside(specs["disc"], (0.5, 0.0))
    assert not inside(specs["disc"], (1.0, 0.0))
    assert inside(specs["disc_halfplane"], (1.0, 1.0))
    assert not inside(specs["disc_halfplane"], (1.0, -0.5))
    assert inside(specs["disc_halfplane"], (0.0, -0.5))


def test_inside_outside_query_box(specs):
    with pytest.raises(QueryOutsideClipBox):
        inside(specs["disc"], (1.6, 0.0))
    # the margin band is excluded too
    with pytest.raises(QueryOutsideClipBox):
        inside(specs["disc_halfplane"], (3.8, 1.0))


def test_inside_matches_implicit(rng):
    for name, f in [
        ("disc", lambda p: p[:, 0] ** 2 + p[:, 1] ** 2 - 1),
        ("ellipse", lambda p: (p[:, 0] / 2) ** 2 + p[:, 1] ** 2 - 1),
    ]:
        dom = get_domain(builtin(name))
        b = dom.query_box
        p = rng.uniform(b[:2], b[2:], size=(10_000, 2))
        p = p[np.abs(f(p)) > 1e-9]
        assert np.array_equal(dom.inside_many(p), f(p) < 0)


def test_polyline_winding(specs):
    dom = get_domain(specs["polyline"])
    pts = np.array([[-0.5, -0.5], [0.5, 0.5], [0.5, -0.5], [-0.5, 0.5], [1.1, 0.0]])
    assert dom.inside_many(pts).tolist() == [True, False, True, True, False]


def test_disc_samples():
    ss = sample_boundary(builtin("disc"), 0.01)
    assert 600 <= len(ss) <= 660
    for s in ss[::37]:
        assert abs(np.linalg.norm(s.point) - 1) < 1e-12
        assert np.allclose(s.inner_normal, -s.point, atol=1e-12)


def test_halfplane_samples_avoid_upper_arc():
    dom = get_domain(builtin("disc_halfplane"))
    ss = dom.samples(0.01)
    P = ss.points
    on_rays = (np.abs(P[:, 1]) < 1e-12) & (np.abs(P[:, 0]) >= 1 - 1e-12)
    on_lower = (np.abs(np.hypot(P[:, 0], P[:, 1]) - 1) < 1e-12) & (P[:, 1] <= 1e-12)
    assert np.all(on_rays | on_lower)
    # on the boundary up to rounding
    assert np.all(np.abs(dom.implicit(P)) < 1e-12)


def test_graph_power_normals():
    dom = get_domain(builtin("graph_power", p=1.5))
    ss = dom.samples(0.01)
    x = ss.points[:, 0]
    assert np.allclose(ss.points[:, 1], np.abs(x) ** 1.5, atol=1e-12)
    fp = 1.5 * np.sign(x) * np.abs(x) ** 0.5
    n = np.stack([-fp, np.ones_like(fp)], axis=1) / np.sqrt(1 + fp**2)[:, None]
    assert np.allclose(ss.normals, n, atol=1e-9)


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_sample_spacing_and_normal_probe(name):
    dom = get_domain(builtin(name))
    sp = 0.02
    ss = dom.samples(sp)
    assert np.allclose(np.linalg.norm(ss.normals, axis=1), 1.0, atol=1e-12)
    # consecutive spacing within each run of the chain
    step = np.linalg.norm(np.diff(ss.points, axis=0), axis=1)
    # corners appear twice (one sample per one-sided normal)
    dup = ss.corner[1:] & ss.corner[:-1] & (step < 1e-9)
    joined = (step < 4 * sp) & ~dup
    assert np.all(step[joined] <= 2 * sp + 1e-12)
    assert np.all(step[joined] >= sp / 2 - 1e-12)
    # two-sided probe
    t = 1e-4
    ok = dom.in_query_box(ss.points + t * ss.normals) & dom.in_query_box(ss.points - t * ss.normals)
    P, N = ss.points[ok], ss.normals[ok]
    smooth = ~ss.corner[ok]
    assert dom.inside_many(P[smooth] + t * N[smooth]).all()
    assert not dom.inside_many(P[smooth] - t * N[smooth]).any()
    # at a convex corner a one-sided normal runs along the other edge; probe the bisector
    for i in np.nonzero(ss.corner)[0][:8]:
        f = local_frame(dom, ss.sample(int(i)))
        q = f.origin + t * f.axis
        if dom.in_query_box(q[None])[0]:
            assert dom.inside_many(q[None])[0]


def test_sampling_refinement_halves_hausdorff(rng):
    dom = get_domain(builtin("ellipse"))
    th = rng.uniform(0, 2 * np.pi, 100)
    truth = np.stack([2 * np.cos(th), np.sin(th)], axis=1)

    def haus(sp):
        P = dom.samples(sp).points
        return np.max(np.min(np.linalg.norm(truth[:, None] - P[None], axis=2), axis=1))

    a, b = haus(0.04), haus(0.02)
    assert b <= a / 2 * 1.25


def test_local_frame_examples(specs):
    dom = get_domain(specs["disc"])
    s = dom.samples_near((1.0, 0.0))[0]
    f = local_frame(dom, s)
    assert np.allclose(f.origin, [1, 0]) and np.allclose(f.axis, [-1, 0]) and f.graph_representable
    dom = get_domain(specs["ellipse"])
    f = local_frame(dom, dom.samples_near((2.0, 0.0))[0])
    assert np.allclose(f.axis, [-1, 0], atol=1e-12)
    dom = get_domain(specs["disc_halfplane"])
    ss = dom.samples_near((1.0, 0.0))
    assert len(ss) == 2 and all(s.corner for s in ss)
    f = local_frame(dom, ss[0])
    assert not f.graph_representable
    bis = np.array([-1.0, 1.0]) / math.sqrt(2)
    assert np.allclose(f.axis, bis, atol=1e-9)


def test_spec_json_round_trip(specs):
    for spec in specs.values():
        again = DomainSpec.from_json(spec.to_json())
        assert again == spec
        assert json.loads(again.to_json()) == json.loads(spec.to_json())


def test_invalid_specs():
    with pytest.raises(InvalidDomain):
        builtin("triangle")
    with pytest.raises(InvalidDomain):
        builtin("ellipse", c=1)
    with pytest.raises(InvalidDomain):
        DomainSpec("disc", {}, (0, 0, 0, 1))
    with pytest.raises(InvalidDomain):
        DomainSpec.from_dict({"params": {}})
    with pytest.raises(InvalidDomain):
        get_domain(builtin("graph_power", p=1.0))


def test_degenerate_polyline():
    spec = DomainSpec("polyline", {"vertices": [[0, 0], [1, 0], [1, 0], [0, 1]]}, (-1, -1, 2, 2), 0.1)
    with pytest.raises(DegenerateBoundary):
        get_domain(spec)


def test_parametric_domain_matches_disc():
    spec = DomainSpec(
        "parametric",
        {"pieces": [{"type": "arc", "radius": 1.0, "start": 0.0, "end": math.pi}, {"type": "arc", "radius": 1.0, "start": math.pi, "end": 2 * math.pi}]},
        (-1.5, -1.5, 1.5, 1.5),
        0.25,
    )
    dom = get_domain(spec)
    assert dom.inside_many(np.array([[0.3, 0.2], [1.1, 0.0]])).tolist() == [True, False]
