"""Planar domains: declarative specs, boundary pieces, membership and sampling."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from . import _kernels
from .config import DEFAULT, Tolerances
from .errors import DegenerateBoundary, InvalidDomain, QueryOutsideClipBox
from .pieces import ConicArc, CubicBezier, Piece, Segment, parabola, power_graph

BUILTIN_NAMES = (
    "disc",
    "ellipse",
    "disc_halfplane",
    "graph_power",
    "graph_piecewise_parabola",
    "polyline",
)
UNBOUNDED_KINDS = ("disc_halfplane", "graph_power", "graph_piecewise_parabola")
KINDS = BUILTIN_NAMES + ("parametric",)

_DEFAULT_PARAMS = {
    "disc": {"R": 1.0},
    "ellipse": {"a": 2.0, "b": 1.0},
    "disc_halfplane": {},
    "graph_power": {"p": 1.5},
    "graph_piecewise_parabola": {"c_left": 0.25, "c_right": 0.5},
    # an L-shaped hexagon
    "polyline": {"vertices": [[-1, -1], [1, -1], [1, 0], [0, 0], [0, 1], [-1, 1]]},
}


class Point(NamedTuple):
    x: float
    y: float


def as_point(x) -> np.ndarray:
    p = np.asarray(x, dtype=float).reshape(2)
    if not np.all(np.isfinite(p)):
        raise ValueError(f"non-finite point {x!r}")
    return p


@dataclass(frozen=True, eq=False)
class DomainSpec:
    """An open planar domain plus the axis-aligned box that clips it.

    ``orientation=-1`` selects the complement of the natural side (the
    exterior of a closed curve, the region below a graph).
    """

    kind: str
    params: dict = field(default_factory=dict)
    clip_box: tuple = (-4.0, -4.0, 4.0, 4.0)
    margin: float = 0.5
    orientation: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidDomain(f"unknown domain kind {self.kind!r}")
        x0, y0, x1, y1 = self.clip_box
        if not (x1 > x0 and y1 > y0):
            raise InvalidDomain("clip_box must have positive area")
        if self.margin < 0 or 2 * self.margin >= min(x1 - x0, y1 - y0):
            raise InvalidDomain("margin must be nonnegative and leave a nonempty box")
        if self.orientation not in (1, -1):
            raise InvalidDomain("orientation must be +1 or -1")

    def key(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def __eq__(self, other):
        return isinstance(other, DomainSpec) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": json.loads(json.dumps(self.params)),
            "clip_box": [float(v) for v in self.clip_box],
            "margin": float(self.margin),
            "orientation": int(self.orientation),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "DomainSpec":
        try:
            kind = data["kind"]
        except (KeyError, TypeError) as exc:
            raise InvalidDomain("domain JSON needs a 'kind'") from exc
        if kind in BUILTIN_NAMES:
            base = builtin(kind, **data.get("params", {}))
            clip = tuple(float(v) for v in data.get("clip_box", base.clip_box))
            margin = float(data.get("margin", base.margin))
            return cls(kind, dict(base.params), clip, margin, int(data.get("orientation", 1)))
        if "clip_box" not in data:
            raise InvalidDomain("parametric domains need an explicit clip_box")
        return cls(
            kind,
            dict(data.get("params", {})),
            tuple(float(v) for v in data["clip_box"]),
            float(data.get("margin", 0.0)),
            int(data.get("orientation", 1)),
        )

    @classmethod
    def from_json(cls, text: str) -> "DomainSpec":
        return cls.from_dict(json.loads(text))


def builtin(name: str, **params) -> DomainSpec:
    """Fully populated spec for a builtin domain, with default clip box."""
    if name not in BUILTIN_NAMES:
        raise InvalidDomain(f"unknown builtin {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    merged = dict(_DEFAULT_PARAMS[name])
    unknown = set(params) - set(merged)
    if unknown:
        raise InvalidDomain(f"unknown parameters for {name}: {sorted(unknown)}")
    merged.update({k: (float(v) if k != "vertices" else v) for k, v in params.items()})
    if name in UNBOUNDED_KINDS:
        return DomainSpec(name, merged, (-4.0, -4.0, 4.0, 4.0), 0.5)
    if name == "disc":
        R = merged["R"]
        bbox = (-R, -R, R, R)
    elif name == "ellipse":
        a, b = merged["a"], merged["b"]
        bbox = (-a, -b, a, b)
    else:
        v = np.asarray(merged["vertices"], dtype=float)
        bbox = (*v.min(axis=0), *v.max(axis=0))
    return DomainSpec(name, merged, _pad(bbox, 0.5), 0.25)


def _pad(bbox, w):
    x0, y0, x1, y1 = bbox
    return (float(x0 - w), float(y0 - w), float(x1 + w), float(y1 + w))


@dataclass
class BoundarySample:
    point: np.ndarray
    inner_normal: np.ndarray
    param: tuple  # (piece index, parameter value)
    arc_spacing: float
    corner: bool = False

    def to_dict(self):
        return {
            "x": float(self.point[0]),
            "y": float(self.point[1]),
            "nx": float(self.inner_normal[0]),
            "ny": float(self.inner_normal[1]),
            "piece": int(self.param[0]),
            "t": float(self.param[1]),
        }


@dataclass
class SampleSet:
    """Array form of a list of boundary samples."""

    points: np.ndarray
    normals: np.ndarray
    piece: np.ndarray
    t: np.ndarray
    spacing: float
    corner: np.ndarray
    arc: np.ndarray  # cumulative arc parameter along the chains

    def __len__(self):
        return len(self.points)

    def sample(self, i: int) -> BoundarySample:
        return BoundarySample(
            self.points[i].copy(),
            self.normals[i].copy(),
            (int(self.piece[i]), float(self.t[i])),
            self.spacing,
            bool(self.corner[i]),
        )

    def to_list(self):
        return [self.sample(i) for i in range(len(self))]


class Domain:
    """A DomainSpec compiled to boundary pieces and a dense sample chain."""

    def __init__(self, spec: DomainSpec, tol: Tolerances = DEFAULT):
        self.spec = spec
        self.tol = tol
        x0, y0, x1, y1 = spec.clip_box
        self.clip = np.array(spec.clip_box, dtype=float)
        m = spec.margin
        self.query_box = np.array([x0 + m, y0 + m, x1 - m, y1 - m])
        self.diameter = math.hypot(x1 - x0, y1 - y0)
        self.eps_bd = tol.eps_bd_rel * self.diameter
        self.orientation = spec.orientation
        self.unbounded = spec.kind in UNBOUNDED_KINDS
        # unbounded pieces are truncated to the clip box padded by half its size
        pad = 0.5 * max(x1 - x0, y1 - y0)
        self.extent = np.array([x0 - pad, y0 - pad, x1 + pad, y1 + pad])
        self.pieces: list[Piece] = []
        self.chains: list[tuple[int, int, bool]] = []  # (first piece, end piece, closed)
        self._build_pieces()
        for i, pc in enumerate(self.pieces):
            if pc.length() <= 0:
                raise DegenerateBoundary(f"piece {i} has zero length")
        self._link_pieces()
        self.dense_spacing = tol.dense_spacing_rel * self.diameter
        self._build_dense()

    # -- construction -------------------------------------------------
    def _build_pieces(self):
        kind, prm = self.spec.kind, self.spec.params
        ex = self.extent
        if kind == "disc":
            R = float(prm.get("R", 1.0))
            self._add_chain([ConicArc(R, R, 0.0, 2 * math.pi)], closed=True)
        elif kind == "ellipse":
            a, b = float(prm.get("a", 2.0)), float(prm.get("b", 1.0))
            self._add_chain([ConicArc(a, b, 0.0, 2 * math.pi)], closed=True)
        elif kind == "disc_halfplane":
            L = max(abs(ex[0]), abs(ex[2]))
            self._add_chain(
                [
                    Segment((-L, 0.0), (-1.0, 0.0)),
                    ConicArc(1.0, 1.0, math.pi, 2 * math.pi),
                    Segment((1.0, 0.0), (L, 0.0)),
                ],
                closed=False,
            )
        elif kind == "graph_power":
            p = float(prm.get("p", 1.5))
            if p <= 1:
                raise InvalidDomain("graph_power needs p > 1 for a C1 boundary")
            xm = min(max(abs(ex[0]), abs(ex[2])), ex[3] ** (1.0 / p))
            self._add_chain(power_graph(p, xm), closed=False)
        elif kind == "graph_piecewise_parabola":
            cl, cr = float(prm.get("c_left", 0.25)), float(prm.get("c_right", 0.5))
            if cl <= 0 or cr <= 0:
                raise InvalidDomain("parabola coefficients must be positive")
            xl = min(abs(ex[0]), math.sqrt(ex[3] / cl))
            xr = min(abs(ex[2]), math.sqrt(ex[3] / cr))
            self._add_chain([parabola(cl, -xl, 0.0), parabola(cr, 0.0, xr)], closed=False)
        elif kind == "polyline":
            v = np.asarray(prm["vertices"], dtype=float)
            if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
                raise InvalidDomain("polyline needs at least three [x, y] vertices")
            if np.allclose(v[0], v[-1]):
                v = v[:-1]
            area = 0.5 * np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
            if area < 0:
                v = v[::-1]
            self._add_chain([Segment(v[i], v[(i + 1) % len(v)]) for i in range(len(v))], closed=True)
        elif kind == "parametric":
            loops = prm.get("loops") or [prm.get("pieces", [])]
            for loop in loops:
                self._add_chain([_piece_from_dict(d) for d in loop], closed=True)
        else:  # pragma: no cover - guarded by DomainSpec
            raise InvalidDomain(kind)
        if not self.pieces:
            raise DegenerateBoundary("domain has no boundary pieces")

    def _add_chain(self, pieces, closed):
        start = len(self.pieces)
        self.pieces.extend(pieces)
        self.chains.append((start, len(self.pieces), closed))
        for i in range(start, len(self.pieces) - 1):
            gap = np.linalg.norm(self.pieces[i].point(self.pieces[i].t1) - self.pieces[i + 1].point(self.pieces[i + 1].t0))
            if gap > 1e-9 * max(1.0, self.diameter):
                raise InvalidDomain(f"pieces {i} and {i + 1} do not join (gap {gap:.3g})")
        if closed:
            a, b = self.pieces[-1], self.pieces[start]
            if np.linalg.norm(a.point(a.t1) - b.point(b.t0)) > 1e-9 * max(1.0, self.diameter):
                raise InvalidDomain("closed loop does not close")

    def _link_pieces(self):
        n = len(self.pieces)
        self.prev_piece = [-1] * n
        self.next_piece = [-1] * n
        for s, e, closed in self.chains:
            for i in range(s, e):
                if i + 1 < e:
                    self.next_piece[i] = i + 1
                    self.prev_piece[i + 1] = i
            if closed:
                self.next_piece[e - 1] = s
                self.prev_piece[s] = e - 1
        # corner flag at the *end* of each piece
        self.corner_after = [False] * n
        for i in range(n):
            j = self.next_piece[i]
            if j < 0:
                continue
            ta = self.pieces[i].tangent(self.pieces[i].t1)
            tb = self.pieces[j].tangent(self.pieces[j].t0)
            ang = math.atan2(ta[0] * tb[1] - ta[1] * tb[0], float(ta @ tb))
            self.corner_after[i] = abs(ang) > self.tol.corner_angle

    def _build_dense(self):
        pts, pid, ts = [], [], []
        prev_idx, next_idx = [], []
        for s, e, closed in self.chains:
            base = len(ts)
            for i in range(s, e):
                tt = self.pieces[i].params_at_spacing(self.dense_spacing)
                if i < e - 1 or closed:
                    tt = tt[:-1]  # joint kept once, as the start of the next piece
                ts.extend(tt)
                pid.extend([i] * len(tt))
                pts.append(self.pieces[i].point(tt))
            n = len(ts) - base
            idx = np.arange(n)
            pv = idx - 1 + base
            nx = idx + 1 + base
            if closed:
                pv[0] = base + n - 1
                nx[-1] = base
            else:
                pv[0] = -1
                nx[-1] = -1
            prev_idx.append(pv)
            next_idx.append(nx)
        self.dense_points = np.ascontiguousarray(np.concatenate(pts, axis=0))
        self.dense_piece = np.asarray(pid, dtype=np.int64)
        self.dense_t = np.asarray(ts, dtype=float)
        self.dense_prev = np.concatenate(prev_idx).astype(np.int64)
        self.dense_next = np.concatenate(next_idx).astype(np.int64)
        # interval starting at sample k lies on piece(k) over [t_k, t_end_k]
        k = np.arange(len(self.dense_t))
        nxt = self.dense_next
        same = (nxt >= 0) & (self.dense_piece[np.maximum(nxt, 0)] == self.dense_piece) & (nxt > k)
        t1 = np.array([pc.t1 for pc in self.pieces])[self.dense_piece]
        self.iv_tb = np.where(same, self.dense_t[np.maximum(nxt, 0)], t1)
        # spatial blocks of consecutive samples
        B = 32
        M = len(self.dense_t)
        starts = np.arange(0, M, B)
        ends = np.minimum(starts + B, M)
        cen = np.empty((len(starts), 2))
        rad = np.empty(len(starts))
        for j, (a, b) in enumerate(zip(starts, ends)):
            blk = self.dense_points[a:b]
            c = 0.5 * (blk.min(axis=0) + blk.max(axis=0))
            cen[j] = c
            rad[j] = np.max(np.linalg.norm(blk - c, axis=1)) * (1 + 1e-12) + 1e-15
        self.block_start = starts.astype(np.int64)
        self.block_end = ends.astype(np.int64)
        self.block_center = cen
        self.block_radius = rad
        SB = 16
        nb = len(starts)
        s_start = np.arange(0, nb, SB)
        s_end = np.minimum(s_start + SB, nb)
        scen = np.empty((len(s_start), 2))
        srad = np.empty(len(s_start))
        for j, (a, b) in enumerate(zip(s_start, s_end)):
            blk = self.dense_points[starts[a]:ends[b - 1]]
            c = 0.5 * (blk.min(axis=0) + blk.max(axis=0))
            scen[j] = c
            srad[j] = np.max(np.linalg.norm(blk - c, axis=1)) * (1 + 1e-12) + 1e-15
        self.block_tree = (
            self.block_start,
            self.block_end,
            self.block_center,
            self.block_radius,
            s_start.astype(np.int64),
            s_end.astype(np.int64),
            scen,
            srad,
        )
        # polygonization for the winding-number test of closed chains
        loops = [(s, e) for s, e, closed in self.chains if closed]
        if self.spec.kind in ("polyline", "parametric"):
            verts, ls, le = [], [], []
            count = 0
            for s, e in loops:
                if self.spec.kind == "polyline":
                    v = np.array([self.pieces[i].a for i in range(s, e)])
                else:
                    mask = (self.dense_piece >= s) & (self.dense_piece < e)
                    v = self.dense_points[mask]
                verts.append(v)
                ls.append(count)
                count += len(v)
                le.append(count)
            self.poly_verts = np.ascontiguousarray(np.concatenate(verts))
            self.poly_start = np.asarray(ls, dtype=np.int64)
            self.poly_end = np.asarray(le, dtype=np.int64)

    @cached_property
    def dense_tree(self) -> cKDTree:
        return cKDTree(self.dense_points)

    # -- queries ------------------------------------------------------
    def in_query_box(self, xs) -> np.ndarray:
        xs = np.atleast_2d(xs)
        b = self.query_box
        return (xs[:, 0] >= b[0]) & (xs[:, 0] <= b[2]) & (xs[:, 1] >= b[1]) & (xs[:, 1] <= b[3])

    def implicit(self, xs) -> np.ndarray:
        """Natural-side implicit function: negative on the natural side."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        x, y = xs[:, 0], xs[:, 1]
        kind, prm = self.spec.kind, self.spec.params
        if kind == "disc":
            R = float(prm.get("R", 1.0))
            return x * x + y * y - R * R
        if kind == "ellipse":
            a, b = float(prm.get("a", 2.0)), float(prm.get("b", 1.0))
            return (x / a) ** 2 + (y / b) ** 2 - 1.0
        if kind == "disc_halfplane":
            return np.minimum(-y, x * x + y * y - 1.0)
        if kind == "graph_power":
            return np.abs(x) ** float(prm.get("p", 1.5)) - y
        if kind == "graph_piecewise_parabola":
            c = np.where(x < 0, float(prm.get("c_left", 0.25)), float(prm.get("c_right", 0.5)))
            return c * x * x - y
        w = _kernels.winding_numbers(self.poly_verts, self.poly_start, self.poly_end, np.ascontiguousarray(xs))
        near = self.boundary_distance_rough(xs) <= self.eps_bd
        return np.where(near, 0.0, np.where(w != 0, -1.0, 1.0))

    def boundary_distance_rough(self, xs) -> np.ndarray:
        """Distance to the boundary; exact for polylines, sampled otherwise."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if self.spec.kind == "polyline":
            out = np.full(len(xs), np.inf)
            for pc in self.pieces:
                t = pc.minimize(xs, 0.0, 1.0)
                out = np.minimum(out, np.linalg.norm(pc.point(t) - xs, axis=1))
            return out
        return _kernels.nearest_sample_distance(self.dense_points, *self.block_tree, np.ascontiguousarray(xs))

    def inside_many(self, xs) -> np.ndarray:
        phi = self.implicit(xs)
        return phi < 0 if self.orientation > 0 else phi > 0

    def inner_normal(self, piece: int, t) -> np.ndarray:
        return self.orientation * self.pieces[piece].left_normal(t)

    def point(self, piece: int, t) -> np.ndarray:
        return self.pieces[piece].point(t)

    def joint_corner(self, piece: int, t: float):
        """One-sided data at (piece, t): (is_corner, other_piece or -1)."""
        pc = self.pieces[piece]
        span = abs(pc.t1 - pc.t0)
        if abs(t - pc.t1) <= 1e-12 * span and self.next_piece[piece] >= 0:
            return self.corner_after[piece], self.next_piece[piece]
        if abs(t - pc.t0) <= 1e-12 * span and self.prev_piece[piece] >= 0:
            q = self.prev_piece[piece]
            return self.corner_after[q], q
        return False, -1

    def samples(self, target_spacing: float, clip: bool = True) -> SampleSet:
        """Boundary samples at roughly ``target_spacing`` arc length.

        Corners are emitted twice, once with each one-sided inner normal.
        """
        if not target_spacing > 0 or target_spacing >= self.diameter:
            raise ValueError("target_spacing must be positive and below the clip box diameter")
        pts, nrm, pid, ts, corner, arc = [], [], [], [], [], []
        arc0 = 0.0
        for s, e, closed in self.chains:
            for i in range(s, e):
                pc = self.pieces[i]
                tt = pc.params_at_spacing(target_spacing)
                tab_t, tab_s = pc.arc_table()
                aa = arc0 + np.interp(tt, tab_t, tab_s)
                is_c = np.zeros(len(tt), dtype=bool)
                # the start joint is emitted by the previous piece unless it is a corner
                has_prev = self.prev_piece[i] >= 0
                if has_prev and not self.corner_after[self.prev_piece[i]]:
                    tt, aa, is_c = tt[1:], aa[1:], is_c[1:]
                elif has_prev:
                    is_c[0] = True
                if self.next_piece[i] >= 0 and self.corner_after[i]:
                    is_c[-1] = True
                pts.append(pc.point(tt))
                nrm.append(self.inner_normal(i, tt))
                pid.append(np.full(len(tt), i))
                ts.append(tt)
                corner.append(is_c)
                arc.append(aa)
                arc0 += tab_s[-1]
        ss = SampleSet(
            np.concatenate(pts),
            np.concatenate(nrm),
            np.concatenate(pid),
            np.concatenate(ts),
            float(target_spacing),
            np.concatenate(corner),
            np.concatenate(arc),
        )
        if clip:
            keep = self.in_query_box(ss.points)
            ss = SampleSet(ss.points[keep], ss.normals[keep], ss.piece[keep], ss.t[keep], ss.spacing, ss.corner[keep], ss.arc[keep])
        return ss

    def sample_at(self, piece: int, t: float, spacing: float | None = None) -> BoundarySample:
        is_c, _ = self.joint_corner(piece, t)
        return BoundarySample(
            self.point(piece, t),
            self.inner_normal(piece, t),
            (int(piece), float(t)),
            float(spacing if spacing is not None else self.dense_spacing),
            bool(is_c),
        )

    def samples_near(self, x, radius: float | None = None, spacing: float | None = None):
        """Boundary samples located at (or nearest to) the point ``x``.

        Corners give one sample per one-sided normal.
        """
        x = as_point(x)
        d = np.linalg.norm(self.dense_points - x, axis=1)
        k = int(np.argmin(d))
        cands = []
        for j in (self.dense_prev[k], k):
            if j < 0:
                continue
            pc = self.pieces[self.dense_piece[j]]
            t = pc.minimize(x[None, :], [self.dense_t[j]], [self.iv_tb[j]])[0]
            cands.append((float(np.linalg.norm(pc.point(t) - x)), int(self.dense_piece[j]), float(t)))
        best = min(cands)
        if radius is not None and best[0] > radius:
            raise ValueError(f"no boundary point within {radius} of {tuple(x)}")
        piece, t = best[1], best[2]
        out = [self.sample_at(piece, t, spacing)]
        is_c, other = self.joint_corner(piece, t)
        if is_c:
            po = self.pieces[other]
            t_other = po.t0 if other == self.next_piece[piece] else po.t1
            out.append(self.sample_at(other, t_other, spacing))
        return out


@lru_cache(maxsize=32)
def _cached_domain(key: str, tol: Tolerances) -> Domain:
    return Domain(DomainSpec.from_dict(json.loads(key)), tol)


def get_domain(spec, tol: Tolerances = DEFAULT) -> Domain:
    """Compile (or fetch the cached compilation of) a spec."""
    if isinstance(spec, Domain):
        return spec
    if isinstance(spec, str):
        spec = builtin(spec)
    return _cached_domain(spec.key(), tol)


def _piece_from_dict(d: dict) -> Piece:
    typ = d.get("type")
    if typ == "segment":
        return Segment(d["a"], d["b"])
    if typ == "arc":
        r = float(d["radius"])
        start, end = float(d["start"]), float(d["end"])
        c = d.get("center", (0.0, 0.0))
        if end >= start:
            return ConicArc(r, r, start, end, c)
        # clockwise: reflect the parameter
        return ConicArc(r, -r, -start, -end, c)
    if typ == "bezier":
        return CubicBezier(d["points"])
    raise InvalidDomain(f"unknown parametric piece type {typ!r}")


# -- public operations ---------------------------------------------------

def inside(spec, x, tol: Tolerances = DEFAULT) -> bool:
    """Membership in the open domain; the query must lie in the clip box minus margin."""
    dom = get_domain(spec, tol)
    p = as_point(x)
    if not dom.in_query_box(p)[0]:
        raise QueryOutsideClipBox(f"{tuple(p)} is outside the query box {tuple(dom.query_box)}")
    return bool(dom.inside_many(p[None, :])[0])


def sample_boundary(spec, target_spacing: float, tol: Tolerances = DEFAULT) -> list[BoundarySample]:
    return get_domain(spec, tol).samples(target_spacing).to_list()


@dataclass
class LocalFrame:
    origin: np.ndarray
    axis: np.ndarray
    graph_representable: bool

    def __iter__(self):
        return iter((self.origin, self.axis))


def local_frame(spec, xi: BoundarySample, tol: Tolerances = DEFAULT) -> LocalFrame:
    """Frame at a boundary sample: origin at the sample, axis along the inner normal.

    At a corner the axis bisects the two one-sided inner normals and the
    boundary is flagged as not representable as a zero-slope C1 graph.
    """
    dom = get_domain(spec, tol)
    piece, t = xi.param
    is_c, other = dom.joint_corner(piece, t)
    origin = np.asarray(xi.point, dtype=float)
    if not is_c:
        return LocalFrame(origin, dom.inner_normal(piece, t), True)
    po = dom.pieces[other]
    t_other = po.t0 if other == dom.next_piece[piece] else po.t1
    n1 = dom.inner_normal(piece, t)
    n2 = dom.inner_normal(other, t_other)
    s = n1 + n2
    nrm = np.linalg.norm(s)
    axis = s / nrm if nrm > 1e-12 else n1
    return LocalFrame(origin, axis, False)
