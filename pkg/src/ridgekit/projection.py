"""Distance function, metric projection and skeleton membership."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .config import DEFAULT, Tolerances
from .errors import NotInteriorPoint
from .geometry import BoundarySample, Domain, as_point, get_domain


@dataclass
class Minimizers:
    """Refined local minimizers of |xi - x| for a batch of query points.

    Rows are candidates; ``query`` maps each row to its query index.  Only
    candidates within the admission slack passed to :func:`minimizers` are
    present.
    """

    xs: np.ndarray
    query: np.ndarray
    piece: np.ndarray
    t: np.ndarray
    points: np.ndarray
    dist: np.ndarray
    d: np.ndarray  # per query: global minimum
    leader: np.ndarray  # per query: row index of the global minimizer
    overflow: np.ndarray  # per query: candidate cap hit (continuum of minimizers)

    def admitted(self, tau_rel: float) -> np.ndarray:
        dq = self.d[self.query]
        return self.dist <= dq * (1.0 + tau_rel) + 1e-15


def minimizers(dom: Domain, xs, slack=None, cap: int = 64) -> Minimizers:
    """All local minimizers of the boundary distance within ``slack`` of the minimum."""
    xs = np.ascontiguousarray(np.atleast_2d(np.asarray(xs, dtype=float)))
    n = len(xs)
    if slack is None:
        slack = 2.0 * dom.dense_spacing
    slack = np.broadcast_to(np.asarray(slack, dtype=float), (n,)).copy()
    cand = np.full((n, cap), -1, dtype=np.int64)
    count = np.zeros(n, dtype=np.int64)
    dmin = np.zeros(n)
    _kernels.local_minima(
        dom.dense_points,
        dom.dense_prev,
        dom.dense_next,
        *dom.block_tree,
        xs,
        slack,
        cap,
        cand,
        count,
        dmin,
    )
    qq, kk = np.nonzero(cand >= 0)
    idx = cand[qq, kk]
    # the two sample intervals adjacent to each discrete minimum
    left = dom.dense_prev[idx]
    starts = np.concatenate([left[left >= 0], idx[dom.dense_next[idx] >= 0]])
    q_iv = np.concatenate([qq[left >= 0], qq[dom.dense_next[idx] >= 0]])
    # lone samples (single-sample chains) fall back to the sample itself
    lone = (left < 0) & (dom.dense_next[idx] < 0)
    piece = dom.dense_piece[starts]
    ta = dom.dense_t[starts]
    tb = dom.iv_tb[starts]
    if lone.any():
        piece = np.concatenate([piece, dom.dense_piece[idx[lone]]])
        ta = np.concatenate([ta, dom.dense_t[idx[lone]]])
        tb = np.concatenate([tb, dom.dense_t[idx[lone]]])
        q_iv = np.concatenate([q_iv, qq[lone]])
    t_star = np.empty(len(piece))
    pts = np.empty((len(piece), 2))
    for p in np.unique(piece):
        m = piece == p
        pc = dom.pieces[p]
        t_star[m] = pc.minimize(xs[q_iv[m]], ta[m], tb[m], dom.tol.newton_iters)
        pts[m] = pc.point(t_star[m])
    dist = np.linalg.norm(pts - xs[q_iv], axis=1)
    order = np.lexsort((dist, q_iv))
    q_iv, piece, t_star, pts, dist = q_iv[order], piece[order], t_star[order], pts[order], dist[order]
    first = np.searchsorted(q_iv, np.arange(n))
    d = dist[np.minimum(first, len(dist) - 1)]
    return Minimizers(xs, q_iv, piece, t_star, pts, dist, d, first, count > cap)


def _multi_flags(mz: Minimizers, dom: Domain, tol: Tolerances):
    """Per query: more than one cluster of admitted global minimizers."""
    adm = mz.admitted(tol.tau_rel)
    sep = np.linalg.norm(mz.points - mz.points[mz.leader[mz.query]], axis=1)
    far = adm & (sep > tol.cluster_merge * dom.dense_spacing)
    multi = np.zeros(len(mz.xs), dtype=bool)
    np.logical_or.at(multi, mz.query, far)
    return multi | mz.overflow


@dataclass
class ProjectionResult:
    distance: float
    projections: list[BoundarySample]
    is_singleton: bool
    cluster_gap: float
    minimizers: np.ndarray = field(repr=False)  # every admitted minimizer point
    continuum: bool = False

    @property
    def n_clusters(self) -> int:
        return len(self.projections)

    def distance_to_set(self, pts) -> np.ndarray:
        """Distance from each point to the projection set."""
        pts = np.atleast_2d(pts)
        diff = pts[:, None, :] - self.minimizers[None, :, :]
        return np.min(np.linalg.norm(diff, axis=2), axis=1)


def _check_interior(dom: Domain, xs):
    ok = dom.in_query_box(xs) & dom.inside_many(xs)
    if not ok.all():
        bad = np.atleast_2d(xs)[~ok][0]
        raise NotInteriorPoint(f"{tuple(float(v) for v in bad)} is not an interior point of the query region")


def _cluster(points, merge, cap):
    """Greedy leader clustering; ``points`` must be sorted closest first."""
    leaders: list[int] = []
    for i, p in enumerate(points):
        if all(np.linalg.norm(p - points[j]) > merge for j in leaders):
            leaders.append(i)
            if len(leaders) >= cap:
                break
    return leaders


def project(spec, x, tol: Tolerances = DEFAULT) -> ProjectionResult:
    """Every global minimizer of |xi - x| over the boundary, clustered."""
    dom = get_domain(spec, tol)
    p = as_point(x)
    _check_interior(dom, p[None, :])
    mz = minimizers(dom, p[None, :], cap=512)
    adm = mz.admitted(tol.tau_rel)
    pts, pcs, ts = mz.points[adm], mz.piece[adm], mz.t[adm]
    merge = tol.cluster_merge * dom.dense_spacing
    if mz.overflow[0]:
        # continuum of minimizers: take every dense sample on the sphere and
        # spread the representatives evenly along the chain
        dd = np.linalg.norm(dom.dense_points - p, axis=1)
        on = np.nonzero(dd <= mz.d[0] * (1.0 + tol.tau_rel) + 1e-15)[0]
        pts, pcs, ts = dom.dense_points[on], dom.dense_piece[on], dom.dense_t[on]
        spread = np.unique(np.linspace(0, len(on) - 1, tol.max_clusters).astype(int))
        leaders = [int(spread[k]) for k in _cluster(pts[spread], merge, tol.max_clusters)]
    else:
        leaders = _cluster(pts, merge, tol.max_clusters)
    samples = [dom.sample_at(int(pcs[j]), float(ts[j])) for j in leaders]
    # sort representatives along the boundary for stable output
    order = sorted(range(len(leaders)), key=lambda k: (pcs[leaders[k]], ts[leaders[k]]))
    samples = [samples[k] for k in order]
    if len(leaders) > 1:
        L = pts[leaders]
        dd = np.linalg.norm(L[:, None] - L[None, :], axis=2)
        gap = float(dd[np.triu_indices(len(L), 1)].min())
    else:
        gap = 0.0
    return ProjectionResult(
        float(mz.d[0]),
        samples,
        len(leaders) == 1 and not mz.overflow[0],
        gap,
        pts,
        bool(mz.overflow[0]),
    )


def distance(spec, x, tol: Tolerances = DEFAULT) -> float:
    return project(spec, x, tol).distance


def distances(spec, xs, tol: Tolerances = DEFAULT, check: bool = True) -> np.ndarray:
    """Vectorized distance function for interior points."""
    dom = get_domain(spec, tol)
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if check:
        _check_interior(dom, xs)
    return minimizers(dom, xs, cap=8).d


def is_skeleton_point(spec, x, tol: Tolerances = DEFAULT) -> bool:
    return not project(spec, x, tol).is_singleton


def skeleton_flags(spec, xs, tol: Tolerances = DEFAULT):
    """Vectorized: (distance, multi-projection flag, nearest boundary point)."""
    dom = get_domain(spec, tol)
    mz = minimizers(dom, xs)
    multi = _multi_flags(mz, dom, tol)
    return mz.d, multi, mz.points[mz.leader]


@dataclass
class UscReport:
    radii: list[float]
    deviations: list[float]
    epsilon: float
    passed: bool
    monotone: bool

    def to_dict(self):
        return {
            "radii": self.radii,
            "deviations": self.deviations,
            "epsilon": self.epsilon,
            "pass": self.passed,
            "monotone": self.monotone,
        }


def usc_probe(spec, x, radii, eps: float, tol: Tolerances = DEFAULT, n_dirs: int = 64) -> UscReport:
    """Check that projections of nearby points stay close to pi(x).

    For each radius, the one-sided deviation sup over probe points y of
    sup over pi(y) of the distance to pi(x) is reported.
    """
    dom = get_domain(spec, tol)
    x = as_point(x)
    base = project(dom, x, tol)
    radii = [float(r) for r in radii]
    if any(r >= base.distance / 2 for r in radii):
        raise ValueError("probe radii must be below d(x)/2")
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise ValueError("probe radii must be decreasing")
    ang = 2 * np.pi * np.arange(n_dirs) / n_dirs
    devs = []
    for r in radii:
        ys = x + r * np.stack([np.cos(ang), np.sin(ang)], axis=1)
        mz = minimizers(dom, ys)
        adm = mz.admitted(tol.tau_rel)
        dev = base.distance_to_set(mz.points[adm])
        devs.append(float(dev.max()))
    slack = 1e-12
    monotone = all(b <= a + slack for a, b in zip(devs, devs[1:]))
    return UscReport(radii, devs, eps, devs[-1] < eps, monotone)


def projection_rows(xs, results: list[ProjectionResult]):
    """Rows for the projection CSV: x, y, d, n_clusters, proj_x_i, proj_y_i."""
    width = max((r.n_clusters for r in results), default=1)
    header = ["x", "y", "d", "n_clusters"]
    for i in range(width):
        header += [f"proj_x_{i}", f"proj_y_{i}"]
    rows = []
    for x, r in zip(xs, results):
        row = [x[0], x[1], r.distance, r.n_clusters]
        for s in r.projections:
            row += [s.point[0], s.point[1]]
        row += [""] * (len(header) - len(row))
        rows.append(row)
    return header, rows
