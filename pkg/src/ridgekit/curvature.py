"""Radius of inner curvature from locally inner touching balls, and its envelope.

A ball of radius r tangent at xi with center xi + r*n contains the boundary
point eta strictly iff 2r<eta - xi, n> - |eta - xi|^2 > 0, i.e. iff r exceeds
the threshold |eta - xi|^2 / (2<eta - xi, n>).  The touching test is therefore
a minimum of thresholds over the boundary points near xi.  Near xi the dense
chain is supplemented by points at geometrically shrinking arc offsets, whose
offsets are integrated from the derivatives so no cancellation occurs.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import total_ordering

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import EnvelopeRadiusBelowSampling, NotC2At
from .geometry import BoundarySample, Domain, as_point, get_domain

_GL_U, _GL_W = np.polynomial.legendre.leggauss(10)
_GL_U = 0.5 * (_GL_U + 1.0)
_GL_W = 0.5 * _GL_W
_GRADED = 24  # halvings of the locality for the near-xi probe points


@total_ordering
@dataclass(frozen=True)
class Radius:
    """A nonnegative radius; ``math.inf`` encodes the unbounded value."""

    value: float
    uncertainty: float = 0.0
    indeterminate: bool = False
    locality_sensitive: bool = False
    trace: tuple = field(default=(), compare=False)  # envelope stages (radius, value)

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.value)

    def __float__(self):
        return float(self.value)

    def __eq__(self, other):
        return float(self) == float(other)

    def __lt__(self, other):
        return float(self) < float(other)

    def __hash__(self):
        return hash(self.value)

    def __str__(self):
        return "inf" if self.unbounded else f"{self.value:.12g}"

    def to_dict(self):
        out = {
            "value": "inf" if self.unbounded else self.value,
            "uncertainty": self.uncertainty,
            "indeterminate": self.indeterminate,
            "locality_sensitive": self.locality_sensitive,
        }
        if self.trace:
            out["trace"] = [{"radius": r, "value": "inf" if math.isinf(v) else v} for r, v in self.trace]
        return out


# -- neighbor thresholds -------------------------------------------------

def _taylor(pc, tb, delta, n):
    """Offset eta - p(tb) and its normal component for eta = p(tb + delta).

    Uses p(tb+D) - p(tb) = D * int p'(tb + uD) du and the integral remainder
    D^2 * int (1-u) p''(tb + uD) du for the part normal to p'(tb).
    Returns (diff, q2) where q2 excludes the first-order term D<p'(tb), n>.
    """
    tt = tb[:, None, None] + delta[:, :, None] * _GL_U
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        v1 = pc.d1(tt)
        v2 = pc.d2(tt)
        diff = delta[..., None] * np.einsum("rkgc,g->rkc", v1, _GL_W)
        nn = n[:, None, None, :]
        q2 = delta**2 * np.einsum("rkg,g->rk", np.sum(v2 * nn, axis=-1), _GL_W * (1.0 - _GL_U))
    zero = delta == 0
    diff[zero] = 0.0
    q2[zero] = 0.0
    return diff, q2


def _graded(dom: Domain, piece, t, pts, nrm, ell):
    """Probe points at arc offsets +-ell * 2**-k on the piece of xi (and across a joint)."""
    M = len(t)
    k = 2.0 ** -np.arange(_GRADED)
    diffs = np.zeros((M, 2 * _GRADED, 2))
    qs = np.zeros((M, 2 * _GRADED))
    for p in np.unique(piece):
        rows = np.nonzero(piece == p)[0]
        pc = dom.pieces[p]
        tr = t[rows]
        speed = np.linalg.norm(pc.d1(tr), axis=-1)
        span = abs(pc.t1 - pc.t0)
        for side, col in ((1, 0), (-1, _GRADED)):
            lim = (pc.t1 - tr) if side > 0 else (pc.t0 - tr)
            delta = side * ell[rows, None] * k / speed[:, None]
            delta = np.minimum(delta, lim[:, None]) if side > 0 else np.maximum(delta, lim[:, None])
            d, q = _taylor(pc, tr, delta, nrm[rows])
            diffs[rows, col:col + _GRADED] = d
            qs[rows, col:col + _GRADED] = q
            # xi at the end of its piece on this side: continue on the neighbor
            other = dom.next_piece[p] if side > 0 else dom.prev_piece[p]
            at_end = np.abs(lim) <= 1e-12 * span
            if other < 0 or not at_end.any():
                continue
            sub = rows[at_end]
            po = dom.pieces[other]
            te = po.t0 if side > 0 else po.t1
            tb = np.full(len(sub), te)
            sp = float(np.linalg.norm(po.d1(te)))
            lim_o = (po.t1 - te) if side > 0 else (po.t0 - te)
            delta = side * ell[sub, None] * k / sp
            delta = np.minimum(delta, lim_o) if side > 0 else np.maximum(delta, lim_o)
            d, q = _taylor(po, tb, delta, nrm[sub])
            gap = po.point(te) - pts[sub]
            d = d + gap[:, None, :]
            corner = dom.corner_after[p] if side > 0 else dom.corner_after[other]
            if corner:
                # first-order terms vanish analytically across a C1 joint; keep them only at corners
                q = q + np.einsum("rc,rc->r", gap, nrm[sub])[:, None] + delta * (nrm[sub] @ po.d1(te))[:, None]
            diffs[sub, col:col + _GRADED] = d
            qs[sub, col:col + _GRADED] = q
    return diffs, qs


def _thresholds(dom: Domain, piece, t, pts, nrm, ell, tol: Tolerances):
    """Per row: distances to the probe boundary points (sorted) and the running
    minimum of their ball-radius thresholds."""
    M = len(t)
    lists = dom.dense_tree.query_ball_point(pts, ell)
    width = max((len(v) for v in lists), default=0)
    idx = np.full((M, max(width, 1)), -1, dtype=np.int64)
    for i, v in enumerate(lists):
        idx[i, : len(v)] = v
    dd = dom.dense_points[np.maximum(idx, 0)] - pts[:, None, :]
    # a dense sample within eps_bd of xi is xi itself
    valid = (idx >= 0) & (np.einsum("rkc,rkc->rk", dd, dd) > dom.eps_bd**2)
    dq = np.einsum("rkc,rc->rk", dd, nrm)
    # normal components this small are dominated by rounding in the subtraction;
    # the graded points resolve that range near xi
    floor = 4e-8 * (1.0 + np.abs(pts).max(axis=1))
    valid &= ~((dq > 0) & (dq < floor[:, None]))
    gd, gq = _graded(dom, piece, t, pts, nrm, ell)
    diff = np.concatenate([dd, gd], axis=1)
    q = np.concatenate([dq, gq], axis=1)
    ok = np.concatenate([valid, np.ones(gq.shape, dtype=bool)], axis=1)
    s = np.einsum("rkc,rkc->rk", diff, diff)
    dist = np.sqrt(s)
    ok &= (dist > 0) & (dist <= ell[:, None])
    with np.errstate(divide="ignore", invalid="ignore"):
        thr = np.where(q > 0, s * (1.0 + tol.touch_rel) / (2.0 * q), np.inf)
    thr = np.where(ok, thr, np.inf)
    dist = np.where(ok, dist, np.inf)
    order = np.argsort(dist, axis=1, kind="stable")
    dist = np.take_along_axis(dist, order, axis=1)
    thr = np.minimum.accumulate(np.take_along_axis(thr, order, axis=1), axis=1)
    return dist, thr


def _touch(dom: Domain, pts, nrm, dist, prefmin, r, loc):
    """Vectorized touching test for radii ``r`` with localities ``loc``."""
    cnt = np.sum(dist <= loc[:, None], axis=1)
    pm = np.where(cnt > 0, prefmin[np.arange(len(r)), np.maximum(cnt - 1, 0)], np.inf)
    clear = r <= pm
    probe = pts + 0.5 * np.minimum(r, loc)[:, None] * nrm
    inside = dom.inside_many(probe)
    return clear & inside, clear & ~inside


def default_locality(dom: Domain) -> float:
    return dom.tol.locality_samples * dom.dense_spacing


def rho_limits(dom: Domain):
    return 2.0 * dom.dense_spacing, 4.0 * dom.diameter


def _bisect(dom: Domain, piece, t, pts, nrm, ell_max):
    tol = dom.tol
    M = len(t)
    ell = np.full(M, ell_max)
    dist, prefmin = _thresholds(dom, piece, t, pts, nrm, ell, tol)
    r_min, r_max = rho_limits(dom)
    lo = np.full(M, r_min)
    hi = np.full(M, r_max)
    at_max, _ = _touch(dom, pts, nrm, dist, prefmin, hi, np.minimum(hi, ell))
    at_min, indet = _touch(dom, pts, nrm, dist, prefmin, lo, np.minimum(lo, ell))
    for _ in range(tol.rho_halvings):
        mid = 0.5 * (lo + hi)
        ok, bad = _touch(dom, pts, nrm, dist, prefmin, mid, np.minimum(mid, ell))
        indet |= bad
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    value = np.where(at_max, np.inf, np.where(at_min, 0.5 * (lo + hi), 0.0))
    unc = np.where(at_max, 0.0, np.where(at_min, 0.5 * (hi - lo), r_min))
    return value, unc, indet


def rho_batch(dom: Domain, piece, t, pts, nrm, locality: float | None = None, check_locality: bool = False):
    """rho for many (piece, t, point, normal) rows.

    Returns (value, uncertainty, indeterminate, locality_sensitive).
    """
    piece = np.asarray(piece, dtype=np.int64)
    t = np.asarray(t, dtype=float)
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    nrm = np.atleast_2d(np.asarray(nrm, dtype=float))
    ell = default_locality(dom) if locality is None else float(locality)
    out = np.empty(len(t))
    unc = np.empty(len(t))
    indet = np.zeros(len(t), dtype=bool)
    chunk = 4096
    for a in range(0, len(t), chunk):
        sl = slice(a, a + chunk)
        out[sl], unc[sl], indet[sl] = _bisect(dom, piece[sl], t[sl], pts[sl], nrm[sl], ell)
    sensitive = np.zeros(len(t), dtype=bool)
    if check_locality:
        half, uh, _, _ = rho_batch(dom, piece, t, pts, nrm, ell / 2)
        both_inf = np.isinf(out) & np.isinf(half)
        with np.errstate(invalid="ignore"):
            gap = np.abs(out - half)
        sensitive = ~both_inf & ~(gap <= np.maximum(4 * (unc + uh), 1e-3 * np.minimum(out, half)))
    return out, unc, indet, sensitive


# -- public operations ---------------------------------------------------

def is_touching_ball(spec, xi: BoundarySample, r: float, locality: float, tol: Tolerances = DEFAULT) -> bool:
    """Whether B_r(xi + r n) is a locally inner touching ball within ``locality`` of xi.

    If no boundary point is inside the ball but the probe point inside the
    ball is not in the domain, sampling is too coarse to decide; the answer
    is then False and a warning is issued.
    """
    if not (r > 0 and locality > 0):
        raise ValueError("r and locality must be positive")
    dom = get_domain(spec, tol)
    pts = np.asarray(xi.point, dtype=float)[None, :]
    nrm = np.asarray(xi.inner_normal, dtype=float)[None, :]
    piece = np.array([xi.param[0]])
    t = np.array([xi.param[1]])
    dist, prefmin = _thresholds(dom, piece, t, pts, nrm, np.array([float(locality)]), dom.tol)
    ok, indet = _touch(dom, pts, nrm, dist, prefmin, np.array([float(r)]), np.array([float(locality)]))
    if indet[0]:
        warnings.warn("touching-ball test indeterminate: boundary sampling too coarse", RuntimeWarning, stacklevel=2)
    return bool(ok[0])


def rho(spec, xi: BoundarySample, tol: Tolerances = DEFAULT, locality: float | None = None) -> Radius:
    """Radius of inner curvature at xi along the sample's own inner normal."""
    dom = get_domain(spec, tol)
    v, u, ind, sens = rho_batch(dom, [xi.param[0]], [xi.param[1]], [xi.point], [xi.inner_normal], locality, check_locality=True)
    if ind[0]:
        warnings.warn("rho bisection met indeterminate touching tests", RuntimeWarning, stacklevel=2)
    return Radius(float(v[0]), float(u[0]), bool(ind[0]), bool(sens[0]))


def rho_point(spec, x, tol: Tolerances = DEFAULT) -> Radius:
    """rho at a boundary point; at a corner, the max over the one-sided normals."""
    dom = get_domain(spec, tol)
    return max(rho(dom, s, tol) for s in dom.samples_near(as_point(x), radius=1e3 * dom.eps_bd + 1e-12))


def curvature_radius(dom: Domain, piece: int, t) -> np.ndarray:
    """1/max(0, kappa) on one piece; kappa > 0 when the boundary bends toward the domain."""
    kappa = dom.orientation * dom.pieces[piece].signed_curvature(np.asarray(t, dtype=float))
    with np.errstate(divide="ignore"):
        return np.where(kappa > 0, 1.0 / np.maximum(kappa, 1e-300), np.inf)


def rho_from_curvature(spec, xi: BoundarySample, tol: Tolerances = DEFAULT, one_sided: bool = False) -> Radius:
    """Classical radius of curvature; refuses corners and piece joints.

    With ``one_sided`` a joint is allowed and the curvature of the sample's
    own piece is used.
    """
    dom = get_domain(spec, tol)
    piece, t = xi.param
    is_c, other = dom.joint_corner(piece, t)
    if is_c or (other >= 0 and other != piece and not one_sided):
        raise NotC2At(f"boundary is not C2 at {tuple(float(v) for v in xi.point)} (piece joint)")
    return Radius(float(curvature_radius(dom, piece, t)))


# -- lower semicontinuous envelope ----------------------------------------

@dataclass
class RhoTable:
    samples: object  # SampleSet
    value: np.ndarray
    uncertainty: np.ndarray

    def __post_init__(self):
        from scipy.spatial import cKDTree

        self.tree = cKDTree(self.samples.points)


def rho_table(dom: Domain) -> RhoTable:
    """rho on boundary samples at ``rho_table_spacing`` around the query box (cached)."""
    cached = dom.__dict__.get("_rho_table")
    if cached is not None:
        return cached
    tol = dom.tol
    ss = dom.samples(tol.rho_table_spacing, clip=False)
    pad = max(tol.env_radii) + tol.rho_table_spacing
    b = dom.query_box
    keep = (
        (ss.points[:, 0] >= b[0] - pad)
        & (ss.points[:, 0] <= b[2] + pad)
        & (ss.points[:, 1] >= b[1] - pad)
        & (ss.points[:, 1] <= b[3] + pad)
    )
    ss = type(ss)(ss.points[keep], ss.normals[keep], ss.piece[keep], ss.t[keep], ss.spacing, ss.corner[keep], ss.arc[keep])
    v, u, _, _ = rho_batch(dom, ss.piece, ss.t, ss.points, ss.normals)
    table = RhoTable(ss, v, u)
    dom.__dict__["_rho_table"] = table
    return table


def _check_env(dom: Domain, env_radii):
    env = [float(r) for r in env_radii]
    if not env:
        raise ValueError("env_radii must be nonempty")
    if any(b >= a for a, b in zip(env, env[1:])):
        raise ValueError("env_radii must be decreasing")
    floor = 2.0 * dom.tol.rho_table_spacing
    if env[-1] < floor:
        raise EnvelopeRadiusBelowSampling(f"envelope radius {env[-1]} is below twice the sample spacing ({floor})")
    return env


def rho_star(spec, xi: BoundarySample, env_radii=None, tol: Tolerances = DEFAULT) -> Radius:
    """Lower semicontinuous envelope of rho at xi.

    For each radius the infimum of rho over the table samples within that
    radius and xi itself is recorded; the value at the smallest radius is
    returned with the whole schedule in ``trace``.
    """
    dom = get_domain(spec, tol)
    env = _check_env(dom, env_radii if env_radii is not None else dom.tol.env_radii)
    own = rho(dom, xi, tol)
    tab = rho_table(dom)
    p = np.asarray(xi.point, dtype=float)
    trace = []
    best_u = own.uncertainty
    for r in env:
        idx = tab.tree.query_ball_point(p, r)
        val, u = own.value, own.uncertainty
        if idx:
            idx = np.asarray(idx)
            j = idx[np.argmin(tab.value[idx])]
            if tab.value[j] < val:
                val, u = float(tab.value[j]), float(tab.uncertainty[j])
        trace.append((r, val))
        best_u = u
    return Radius(trace[-1][1], best_u, own.indeterminate, own.locality_sensitive, tuple(trace))


def rho_star_point(spec, x, env_radii=None, tol: Tolerances = DEFAULT) -> Radius:
    dom = get_domain(spec, tol)
    return min(rho_star(dom, s, env_radii, tol) for s in dom.samples_near(as_point(x), radius=1e3 * dom.eps_bd + 1e-12))


def rho_star_batch(dom: Domain, piece, t, pts, nrm, env_radius: float | None = None):
    """rho_star at the smallest envelope radius for many boundary points.

    Returns (value, uncertainty).
    """
    r = _check_env(dom, [env_radius if env_radius is not None else min(dom.tol.env_radii)])[0]
    own, own_u, _, _ = rho_batch(dom, piece, t, pts, nrm)
    tab = rho_table(dom)
    pts = np.atleast_2d(pts)
    k = min(len(tab.value), max(8, int(4 * r / tab.samples.spacing) + 8))
    dd, ii = tab.tree.query(pts, k=k, distance_upper_bound=r)
    ok = np.isfinite(dd)
    vals = np.where(ok, tab.value[np.minimum(ii, len(tab.value) - 1)], np.inf)
    j = np.argmin(vals, axis=1)
    tv = vals[np.arange(len(pts)), j]
    tu = tab.uncertainty[np.minimum(ii[np.arange(len(pts)), j], len(tab.value) - 1)]
    use_tab = tv < own
    return np.where(use_tab, tv, own), np.where(use_tab, tu, own_u)


def rho_rows(dom: Domain, table: RhoTable, star: np.ndarray):
    """Rows for the rho CSV: arc_param, x, y, rho, rho_uncertainty, rho_star."""
    header = ["arc_param", "x", "y", "rho", "rho_uncertainty", "rho_star"]
    ss = table.samples
    rows = []
    for i in range(len(ss)):
        rows.append([ss.arc[i], ss.points[i, 0], ss.points[i, 1], table.value[i], table.uncertainty[i], star[i]])
    return header, rows


def table_envelope(dom: Domain, table: RhoTable | None = None, env_radius: float | None = None) -> np.ndarray:
    """rho_star at every table sample (minimum of the table within the radius)."""
    table = table if table is not None else rho_table(dom)
    r = _check_env(dom, [env_radius if env_radius is not None else min(dom.tol.env_radii)])[0]
    out = table.value.copy()
    for i, nb in enumerate(table.tree.query_ball_point(table.samples.points, r)):
        out[i] = np.min(table.value[nb])
    return out
