import math

import numpy as np
import pytest

from ridgekit.curvature import (
    Radius,
    default_locality,
    is_touching_ball,
    rho,
    rho_from_curvature,
    rho_point,
    rho_star,
    rho_star_point,
)
from ridgekit.errors import EnvelopeRadiusBelowSampling, NotC2At
from ridgekit.geometry import builtin, get_domain

ENV = [0.4, 0.2, 0.1]


def at(spec, x):
    return get_domain(spec).samples_near(x)


def test_radius_ordering():
    assert Radius(math.inf) > Radius(1e9)
    assert Radius(0.5) < Radius(1.0)
    assert str(Radius(math.inf)) == "inf"
    assert Radius(math.inf).to_dict()["value"] == "inf"


def test_touching_ball_examples(specs):
    xi = at(specs["disc"], (1.0, 0.0))[0]
    assert is_touching_ball(specs["disc"], xi, 1.0, 0.5)
    assert is_touching_ball(specs["disc"], xi, 1.0, 2.0)
    assert not is_touching_ball(specs["disc"], xi, 1.01, 0.5)
    xi = at(specs["disc_halfplane"], (2.0, 0.0))[0]
    assert is_touching_ball(specs["disc_halfplane"], xi, 10.0, 0.5)
    with pytest.raises(ValueError):
        is_touching_ball(specs["disc"], xi, -1.0, 0.5)


def test_disc_rho_is_one(specs, rng):
    dom = get_domain(specs["disc"])
    ss = dom.samples(0.05)
    for i in rng.choice(len(ss), 10, replace=False):
        r = rho(specs["disc"], ss.sample(int(i)))
        assert r.value == pytest.approx(1.0, abs=1e-6)


def test_halfplane_corner_rho(specs):
    ss = at(specs["disc_halfplane"], (1.0, 0.0))
    assert len(ss) == 2
    vals = sorted(float(rho(specs["disc_halfplane"], s)) for s in ss)
    # the circle-side normal admits the unit disc, the flat-side normal only half-plane balls
    assert vals[0] == pytest.approx(1.0, abs=1e-2)
    assert rho_point(specs["disc_halfplane"], (1.0, 0.0)).value == max(vals)


def test_graph_power_rho_zero(specs):
    r = rho(specs["graph_power"], at(specs["graph_power"], (0.0, 0.0))[0])
    assert r.value == 0.0


def test_flat_ray_unbounded(specs):
    r = rho(specs["disc_halfplane"], at(specs["disc_halfplane"], (3.0, 0.0))[0])
    assert r.unbounded


def test_curvature_examples(specs):
    e = specs["ellipse"]
    assert float(rho_from_curvature(e, at(e, (2.0, 0.0))[0])) == pytest.approx(0.5, rel=1e-9)
    assert float(rho_from_curvature(e, at(e, (0.0, 1.0))[0])) == pytest.approx(4.0, rel=1e-9)
    assert rho_from_curvature(specs["disc_halfplane"], at(specs["disc_halfplane"], (3.0, 0.0))[0]).unbounded
    with pytest.raises(NotC2At):
        rho_from_curvature(specs["disc_halfplane"], at(specs["disc_halfplane"], (1.0, 0.0))[0])
    p = specs["parabola"]
    with pytest.raises(NotC2At):
        rho_from_curvature(p, at(p, (0.0, 0.0))[0])
    dom = get_domain(p)
    sides = sorted(float(rho_from_curvature(p, dom.sample_at(k, 0.0), one_sided=True)) for k in (0, 1))
    assert sides == pytest.approx([1.0, 2.0], rel=1e-9)


def test_touching_radius_matches_curvature_on_ellipse(specs, rng):
    e = specs["ellipse"]
    ss = get_domain(e).samples(0.01)
    for i in rng.choice(len(ss), 40, replace=False):
        s = ss.sample(int(i))
        want = float(rho_from_curvature(e, s))
        assert abs(float(rho(e, s)) - want) / want <= 0.01


def test_rho_star_examples(specs):
    r = rho_star(specs["disc"], at(specs["disc"], (0.0, 1.0))[0], ENV)
    assert all(v == pytest.approx(1.0, abs=1e-6) for _, v in r.trace)
    r = rho_star_point(specs["disc_halfplane"], (1.0, 0.0), ENV)
    assert r.value == pytest.approx(1.0, abs=0.05)
    r = rho_star_point(specs["parabola"], (0.0, 0.0), ENV)
    assert r.value == pytest.approx(1.0, abs=0.05)
    r = rho_star_point(specs["ellipse"], (2.0, 0.0))
    assert r.value == pytest.approx(0.5, abs=1e-3)


def test_envelope_errors(specs):
    xi = at(specs["disc"], (1.0, 0.0))[0]
    with pytest.raises(EnvelopeRadiusBelowSampling):
        rho_star(specs["disc"], xi, [0.1, 0.001])
    with pytest.raises(ValueError):
        rho_star(specs["disc"], xi, [0.1, 0.2])
    with pytest.raises(ValueError):
        rho_star(specs["disc"], xi, [])


@pytest.mark.parametrize("name", ["ellipse", "parabola", "disc_halfplane"])
def test_envelope_trace_nondecreasing(specs, name, rng):
    dom = get_domain(specs[name])
    ss = dom.samples(0.05)
    for i in rng.choice(len(ss), 12, replace=False):
        r = rho_star(specs[name], ss.sample(int(i)), ENV)
        vals = [v for _, v in r.trace]
        assert all(b >= a - 2 * r.uncertainty - 1e-12 for a, b in zip(vals, vals[1:]))
        assert r.value <= float(rho(specs[name], ss.sample(int(i)))) + 1e-9


@pytest.mark.parametrize("name", ["disc", "ellipse", "graph_power", "parabola"])
def test_bracket_soundness(specs, name, rng):
    spec = specs[name]
    dom = get_domain(spec)
    ss = dom.samples(0.05)
    for i in rng.choice(len(ss), 6, replace=False):
        s = ss.sample(int(i))
        r = rho(spec, s)
        if r.unbounded or r.value == 0.0:
            continue
        ell = default_locality(dom)
        lo, hi = r.value - 2 * r.uncertainty, r.value + 2 * r.uncertainty
        assert is_touching_ball(spec, s, lo, min(lo, ell))
        assert not is_touching_ball(spec, s, hi, min(hi, ell))


@pytest.mark.parametrize("name,x", [("ellipse", (2.0, 0.0)), ("ellipse", (0.0, 1.0)), ("parabola", (0.0, 0.0)), ("parabola", (0.6, 0.18))])
def test_envelope_is_lower_semicontinuous(specs, name, x):
    spec = specs[name]
    dom = get_domain(spec)
    for xi in dom.samples_near(x):
        r = rho_star(spec, xi)
        vals = [v for _, v in r.trace]
        tol = 2 * abs(vals[-1] - vals[-2]) + 2 * r.uncertainty + 1e-9
        pc = dom.pieces[xi.param[0]]
        for k in range(1, 6):
            t = np.clip(xi.param[1] + 0.02 * 2.0**-k, pc.t0, pc.t1)
            eta = dom.sample_at(xi.param[0], float(t))
            assert r.value <= rho_star(spec, eta).value + tol


def test_power_graph_reach_shrinks():
    spec = builtin("graph_power", p=1.5)
    assert rho_point(spec, (0.0, 0.0)).value == 0.0
    assert rho_star_point(spec, (0.0, 0.0)).value == 0.0
