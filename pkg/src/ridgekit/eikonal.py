"""First-order fast marching for |grad u| = 1 with u = 0 on the boundary."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import ndimage

from .config import DEFAULT, Tolerances
from .cutlocus import Grid, SkeletonMask, detect_skeleton
from .errors import DisconnectedInterior
from .geometry import get_domain
from .projection import minimizers


class CellState(enum.IntEnum):
    Far = 0
    Narrow = 1
    Accepted = 2
    Exterior = 3


# -- binary min-heap with lazy deletion ------------------------------------

@njit(cache=True)
def _push(hv, hi, n, v, i):
    k = n
    hv[k] = v
    hi[k] = i
    while k > 0:
        p = (k - 1) // 2
        if hv[p] <= hv[k]:
            break
        hv[p], hv[k] = hv[k], hv[p]
        hi[p], hi[k] = hi[k], hi[p]
        k = p
    return n + 1


@njit(cache=True)
def _pop(hv, hi, n):
    v = hv[0]
    i = hi[0]
    n -= 1
    hv[0] = hv[n]
    hi[0] = hi[n]
    k = 0
    while True:
        a = 2 * k + 1
        if a >= n:
            break
        b = a + 1
        c = b if b < n and hv[b] < hv[a] else a
        if hv[k] <= hv[c]:
            break
        hv[c], hv[k] = hv[k], hv[c]
        hi[c], hi[k] = hi[k], hi[c]
        k = c
    return v, i, n


@njit(cache=True)
def _update(u, state, j, i, h):
    ny, nx = u.shape
    a = np.inf
    if i > 0 and state[j, i - 1] == 2:
        a = u[j, i - 1]
    if i + 1 < nx and state[j, i + 1] == 2 and u[j, i + 1] < a:
        a = u[j, i + 1]
    b = np.inf
    if j > 0 and state[j - 1, i] == 2:
        b = u[j - 1, i]
    if j + 1 < ny and state[j + 1, i] == 2 and u[j + 1, i] < b:
        b = u[j + 1, i]
    if a > b:
        a, b = b, a
    if b == np.inf or b - a >= h:
        return a + h
    disc = 2.0 * h * h - (b - a) * (b - a)
    if disc < 0.0:
        return a + h
    return 0.5 * (a + b + math.sqrt(disc))


@njit(cache=True)
def _march(u, state, fixed, h, slack):
    """March from the fixed cells; returns (acceptance order, monotonicity violations)."""
    ny, nx = u.shape
    cap = 5 * ny * nx + 1
    hv = np.empty(cap)
    hi = np.empty(cap, dtype=np.int64)
    n = 0
    for j in range(ny):
        for i in range(nx):
            if fixed[j, i]:
                state[j, i] = 1
                n = _push(hv, hi, n, u[j, i], j * nx + i)
    order = np.empty(ny * nx, dtype=np.int64)
    m = 0
    last = -np.inf
    bad = 0
    dj = (0, 0, -1, 1)
    di = (-1, 1, 0, 0)
    while n > 0:
        v, c, n = _pop(hv, hi, n)
        j = c // nx
        i = c % nx
        if state[j, i] == 2 or v > u[j, i]:
            continue
        state[j, i] = 2
        if v < last - slack:
            bad += 1
        if v > last:
            last = v
        order[m] = c
        m += 1
        for k in range(4):
            jj = j + dj[k]
            ii = i + di[k]
            if jj < 0 or jj >= ny or ii < 0 or ii >= nx:
                continue
            s = state[jj, ii]
            if s == 2 or s == 3 or fixed[jj, ii]:
                continue
            w = _update(u, state, jj, ii, h)
            if w < u[jj, ii]:
                u[jj, ii] = w
                state[jj, ii] = 1
                n = _push(hv, hi, n, w, jj * nx + ii)
    return order[:m], bad


# -- field ------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarField:
    """Values on a regular grid of cell centers; nan on Exterior cells."""

    grid: Grid
    values: np.ndarray  # (ny, nx)
    state: np.ndarray  # (ny, nx) CellState codes
    initialized: np.ndarray  # (ny, nx) cells set from the exact distance
    order: np.ndarray = field(repr=False)  # flat cell indices in acceptance order
    monotone_violations: int = 0

    def __post_init__(self):
        for a in (self.values, self.state, self.initialized, self.order):
            a.setflags(write=False)

    @property
    def inside(self) -> np.ndarray:
        return self.state != CellState.Exterior

    def accepted_values(self) -> np.ndarray:
        return self.values.ravel()[self.order]

    def rows(self):
        C = self.grid.centers()
        names = [s.name for s in CellState]
        out = []
        for j in range(self.grid.ny):
            for i in range(self.grid.nx):
                v = self.values[j, i]
                out.append([C[j, i, 0], C[j, i, 1], "" if math.isnan(v) else v, names[self.state[j, i]]])
        return ["x", "y", "u", "state"], out

    def to_pgm(self) -> bytes:
        """Grey-scale heat map: 0 exterior, 1..255 from u = 0 to max u (top row = max y)."""
        v = self.values
        top = np.nanmax(v) if np.any(self.inside) else 1.0
        img = np.zeros(v.shape, dtype=np.uint8)
        if top > 0:
            img[self.inside] = (1 + np.round(254 * np.clip(v[self.inside] / top, 0, 1))).astype(np.uint8)
        head = f"P5\n{self.grid.nx} {self.grid.ny}\n255\n".encode()
        return head + img[::-1].tobytes()


def solve(spec, h: float, tol: Tolerances = DEFAULT) -> ScalarField:
    """Fast marching on the grid of spacing ``h`` over the query box.

    Interior cells within one cell of the boundary take the exact distance.
    So do cells on the outer ring of the grid, where the clipped domain
    continues past the box and the front would otherwise be missing data.
    """
    dom = get_domain(spec, tol)
    grid = Grid.over(dom, h)
    C = grid.centers()
    inside = dom.inside_many(C.reshape(-1, 2)).reshape(grid.shape)
    ring = np.zeros(grid.shape, dtype=bool)
    ring[[0, -1], :] = True
    ring[:, [0, -1]] = True
    # candidates for the exact band from the sampled distance (within one spacing of d)
    rough = np.full(grid.shape, np.inf)
    rough[inside] = dom.boundary_distance_rough(C[inside])
    maybe = inside & ((rough <= h + 4 * dom.dense_spacing) | ring)
    u = np.full(grid.shape, np.inf)
    if maybe.any():
        u[maybe] = minimizers(dom, C[maybe], cap=8).d
    fixed = maybe & ((u <= h) | ring)
    u[maybe & ~fixed] = np.inf
    state = np.where(inside, CellState.Far, CellState.Exterior).astype(np.int8)
    order, bad = _march(u, state, fixed, float(h), 1e-12 * max(1.0, dom.diameter))
    if np.any(state == CellState.Far):
        n = int(np.sum(state == CellState.Far))
        raise DisconnectedInterior(f"{n} interior cells not reached by the marching front")
    u[~inside] = np.nan
    return ScalarField(grid, u, state, fixed, order, int(bad))


def upwind_gradient_norm(f: ScalarField) -> np.ndarray:
    """Godunov upwind |grad u|_h at interior cells (nan where a neighbor is missing)."""
    u = f.values
    h = f.grid.h
    pad = np.pad(u, 1, constant_values=np.nan)
    c = pad[1:-1, 1:-1]
    gx = np.maximum(np.maximum(c - pad[1:-1, :-2], c - pad[1:-1, 2:]), 0.0) / h
    gy = np.maximum(np.maximum(c - pad[:-2, 1:-1], c - pad[2:, 1:-1]), 0.0) / h
    return np.sqrt(gx * gx + gy * gy)


@dataclass
class ErrorStats:
    h: float
    near_max: float
    near_mean: float
    far_max: float
    far_mean: float
    n_near: int
    n_far: int
    residual_median: float
    residual_max: float
    residual_median_far: float
    min_u: float
    monotone_violations: int
    argmax_far: list

    def to_dict(self):
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in self.__dict__.items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def error_report(f: ScalarField, spec, tol: Tolerances = DEFAULT, mask: SkeletonMask | None = None, near: float = 3.0) -> ErrorStats:
    """|u - d| split at ``near`` cells from the detected skeleton, plus upwind residuals."""
    dom = get_domain(spec, tol)
    g = f.grid
    if mask is None:
        mask = detect_skeleton(dom, g.h, tol)
    inside = f.inside
    C = g.centers()
    d = np.full(g.shape, np.nan)
    d[inside] = minimizers(dom, C[inside], cap=8).d
    err = np.abs(f.values - d)
    if mask.flags.any():
        dist = ndimage.distance_transform_edt(~mask.flags) * g.h
    else:
        dist = np.full(g.shape, np.inf)
    close = inside & (dist <= near * g.h + 1e-12)
    far = inside & ~close
    res = np.abs(upwind_gradient_norm(f) - 1.0)
    ok = np.isfinite(res) & inside

    def stat(a, fn):
        return float(fn(a)) if a.size else math.nan

    am = []
    if far.any():
        k = np.nanargmax(np.where(far, err, -1.0))
        am = [float(C.reshape(-1, 2)[k, 0]), float(C.reshape(-1, 2)[k, 1])]
    return ErrorStats(
        g.h,
        stat(err[close], np.max),
        stat(err[close], np.mean),
        stat(err[far], np.max),
        stat(err[far], np.mean),
        int(close.sum()),
        int(far.sum()),
        stat(res[ok], np.median),
        stat(res[ok], np.max),
        stat(res[ok & far], np.median),
        stat(f.values[inside], np.min),
        f.monotone_violations,
        am,
    )
