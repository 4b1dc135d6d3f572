import numpy as np
import pytest

from ridgekit.cutlocus import Grid, detect_skeleton
from ridgekit.eikonal import CellState, _march, error_report, solve, upwind_gradient_norm
from ridgekit.errors import GridTooCoarse
from ridgekit.geometry import DomainSpec, get_domain
from ridgekit.projection import distances

H = 1 / 64


@pytest.fixture(scope="module")
def fields(specs):
    return {name: solve(specs[name], H) for name in ("disc", "ellipse", "disc_halfplane")}


def value_at(f, x, y):
    g = f.grid
    i = int(round(x / g.h)) - g.i0
    j = int(round(y / g.h)) - g.j0
    return f.values[j, i]


def test_disc_center(fields):
    assert value_at(fields["disc"], 0.0, 0.0) == pytest.approx(1.0, abs=3 * H)


def test_every_interior_cell_accepted(fields):
    for f in fields.values():
        assert np.all((f.state == CellState.Accepted) == f.inside)
        assert np.all(np.isnan(f.values[~f.inside]))
        assert np.nanmin(f.values) >= 0


def test_monotone_acceptance(fields):
    for f in fields.values():
        assert f.monotone_violations == 0
        acc = f.accepted_values()
        assert np.all(np.diff(acc) >= -1e-12)


def test_boundary_cells_small(fields):
    f = fields["disc"]
    assert np.all(f.values[f.initialized & (np.hypot(*np.moveaxis(f.grid.centers(), -1, 0)) < 1.2)] <= H)


@pytest.mark.parametrize("name", ["disc", "ellipse", "disc_halfplane"])
def test_far_error_first_order(specs, fields, name):
    st = error_report(fields[name], specs[name])
    assert st.far_max <= 2 * H
    assert st.residual_median_far <= 0.05
    assert st.min_u >= 0
    assert st.n_near > 0 and st.n_far > st.n_near


def test_error_stats_json(specs, fields):
    st = error_report(fields["disc"], specs["disc"])
    d = st.to_dict()
    assert d["h"] == H and d["monotone_violations"] == 0
    assert '"far_max"' in st.to_json()


def test_comparison_with_distance(specs, fields):
    f = fields["ellipse"]
    mask = detect_skeleton(specs["ellipse"], H)
    C = f.grid.centers()
    d = distances(specs["ellipse"], C[f.inside])
    u = f.values[f.inside]
    near = mask.closure()[f.inside]
    assert np.all(u[~near] >= d[~near] - 2 * H)
    assert np.all(u[~near] <= d[~near] + 2 * H)


def test_convergence_on_disc(specs, fields):
    e64 = error_report(fields["disc"], specs["disc"]).far_max
    e128 = error_report(solve(specs["disc"], H / 2), specs["disc"]).far_max
    assert 0.4 <= e128 / e64 <= 0.7


def test_strip_is_one_dimensional():
    W, T = 4.0, 0.5
    spec = DomainSpec("polyline", {"vertices": [[0, 0], [W, 0], [W, T], [0, T]]}, (-0.25, -0.25, W + 0.25, T + 0.25), 0.0)
    f = solve(spec, H)
    C = f.grid.centers()
    x, y = C[..., 0], C[..., 1]
    mid = f.inside & (x > T) & (x < W - T)
    assert np.abs(f.values[mid] - np.minimum(y, T - y)[mid]).max() <= H


def test_residual(fields):
    r = np.abs(upwind_gradient_norm(fields["disc"]) - 1)
    assert np.nanmedian(r[fields["disc"].inside]) <= 0.05


def test_field_is_immutable(fields):
    f = fields["disc"]
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0
    with pytest.raises(AttributeError):
        f.monotone_violations = 3


def test_exports(fields):
    f = fields["disc"]
    header, rows = f.rows()
    assert header == ["x", "y", "u", "state"]
    assert len(rows) == f.grid.nx * f.grid.ny
    assert {r[3] for r in rows} == {"Accepted", "Exterior"}
    raw = f.to_pgm()
    head = f"P5\n{f.grid.nx} {f.grid.ny}\n255\n".encode()
    assert raw.startswith(head) and len(raw) == len(head) + f.grid.nx * f.grid.ny


def test_grid_too_coarse(specs):
    with pytest.raises(GridTooCoarse):
        solve(specs["disc"], 0.25)


def test_march_leaves_unreached_cells_far():
    # two pockets separated by an exterior wall; only the left one is seeded
    u = np.full((8, 9), np.inf)
    state = np.zeros((8, 9), dtype=np.int8)
    state[:, 4] = CellState.Exterior
    fixed = np.zeros((8, 9), dtype=bool)
    fixed[0, 0] = True
    u[0, 0] = 0.0
    order, bad = _march(u, state, fixed, 1.0, 1e-12)
    assert bad == 0
    assert np.all(state[:, :4] == CellState.Accepted)
    assert np.all(state[:, 5:] == CellState.Far)
    assert len(order) == 32
    assert u[0, 3] == pytest.approx(3.0)


def test_grid_matches_skeleton_grid(specs, fields):
    g = Grid.over(get_domain(specs["disc"]), H)
    assert g == fields["disc"].grid
