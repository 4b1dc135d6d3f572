"""Parametric boundary pieces.

Every piece is traversed with increasing parameter and keeps the domain on
its left, so the inner normal is the tangent rotated by +90 degrees (times the
domain orientation).  All evaluators are vectorized over parameter arrays.
"""
from __future__ import annotations

import numpy as np


class Piece:
    t0: float
    t1: float

    def point(self, t):
        raise NotImplementedError

    def d1(self, t):
        raise NotImplementedError

    def d2(self, t):
        raise NotImplementedError

    def tangent(self, t):
        v = self.d1(np.asarray(t, dtype=float))
        return v / np.linalg.norm(v, axis=-1, keepdims=True)

    def left_normal(self, t):
        tg = self.tangent(t)
        return np.stack([-tg[..., 1], tg[..., 0]], axis=-1)

    def signed_curvature(self, t):
        """Curvature, positive when the curve turns left (toward the domain)."""
        t = np.asarray(t, dtype=float)
        a = self.d1(t)
        b = self.d2(t)
        cross = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
        return cross / np.linalg.norm(a, axis=-1) ** 3

    def arc_table(self, n: int = 8192):
        t = np.linspace(self.t0, self.t1, n + 1)
        p = self.point(t)
        s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(p, axis=0), axis=1))])
        return t, s

    def length(self) -> float:
        return float(self.arc_table()[1][-1])

    def params_at_spacing(self, spacing: float):
        """Parameters at (nearly) uniform arc length, both ends included."""
        t, s = self.arc_table()
        n = max(1, int(np.ceil(s[-1] / spacing - 1e-9)))
        targets = np.linspace(0.0, s[-1], n + 1)
        out = np.interp(targets, s, t)
        out[0], out[-1] = self.t0, self.t1
        return out

    def minimize(self, xs, ta, tb, iters: int = 30):
        """Local minimizer of |p(t) - x| on [ta, tb] for each row.

        Safeguarded Newton on the stationarity condition <p(t) - x, p'(t)> = 0
        with a bisection fallback; endpoints win when there is no sign change.
        """
        xs = np.asarray(xs, dtype=float)
        ta = np.asarray(ta, dtype=float)
        tb = np.asarray(tb, dtype=float)

        def g(t):
            return np.einsum("ij,ij->i", self.point(t) - xs, self.d1(t))

        ga, gb = g(ta), g(tb)
        bracketed = (ga < 0) & (gb > 0)
        t = np.where(bracketed, 0.5 * (ta + tb), ta)
        act = np.nonzero(bracketed)[0]
        lo, hi, x = ta[act], tb[act], xs[act]
        ta_ = t[act]
        for _ in range(iters):
            if len(act) == 0:
                break
            p = self.point(ta_)
            v = self.d1(ta_)
            gt = np.einsum("ij,ij->i", p - x, v)
            with np.errstate(invalid="ignore", divide="ignore"):
                dg = np.einsum("ij,ij->i", v, v) + np.einsum("ij,ij->i", p - x, self.d2(ta_))
                step = ta_ - gt / dg
            neg = gt < 0
            lo = np.where(neg, ta_, lo)
            hi = np.where(neg, hi, ta_)
            ok = np.isfinite(step) & (dg > 0) & (step > lo) & (step < hi)
            new = np.where(gt == 0, ta_, np.where(ok, step, 0.5 * (lo + hi)))
            done = np.abs(new - ta_) <= 4e-16 * np.maximum(1.0, np.abs(new))
            t[act] = new
            keep = ~done
            act, lo, hi, x, ta_ = act[keep], lo[keep], hi[keep], x[keep], new[keep]
        da = np.linalg.norm(self.point(ta) - xs, axis=1)
        db = np.linalg.norm(self.point(tb) - xs, axis=1)
        t_end = np.where(da <= db, ta, tb)
        return np.where(bracketed, t, t_end)


class Segment(Piece):
    def __init__(self, a, b):
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.t0, self.t1 = 0.0, 1.0

    def point(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        return self.a + t * (self.b - self.a)

    def d1(self, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(self.b - self.a, t.shape + (2,)).copy()

    def d2(self, t):
        t = np.asarray(t, dtype=float)
        return np.zeros(t.shape + (2,))

    def arc_table(self, n: int = 2):
        t = np.array([0.0, 1.0])
        return t, np.array([0.0, float(np.linalg.norm(self.b - self.a))])

    def minimize(self, xs, ta, tb, iters: int = 30):
        ab = self.b - self.a
        t = (np.asarray(xs, dtype=float) - self.a) @ ab / (ab @ ab)
        return np.clip(t, ta, tb)


class ConicArc(Piece):
    """``center + (a cos t, b sin t)``; a negative ``b`` runs clockwise."""

    def __init__(self, a, b, t0, t1, center=(0.0, 0.0)):
        self.a, self.b = float(a), float(b)
        self.t0, self.t1 = float(t0), float(t1)
        self.center = np.asarray(center, dtype=float)

    def point(self, t):
        t = np.asarray(t, dtype=float)
        return self.center + np.stack([self.a * np.cos(t), self.b * np.sin(t)], axis=-1)

    def d1(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([-self.a * np.sin(t), self.b * np.cos(t)], axis=-1)

    def d2(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([-self.a * np.cos(t), -self.b * np.sin(t)], axis=-1)


class Graph(Piece):
    """``(t, f(t))`` for t in [t0, t1]."""

    def __init__(self, f, f1, f2, t0, t1):
        self.f, self.f1, self.f2 = f, f1, f2
        self.t0, self.t1 = float(t0), float(t1)

    def point(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([t, self.f(t)], axis=-1)

    def d1(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([np.ones_like(t), self.f1(t)], axis=-1)

    def d2(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([np.zeros_like(t), self.f2(t)], axis=-1)


class CubicBezier(Piece):
    def __init__(self, ctrl):
        self.ctrl = np.asarray(ctrl, dtype=float).reshape(4, 2)
        self.t0, self.t1 = 0.0, 1.0

    def point(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        p0, p1, p2, p3 = self.ctrl
        s = 1.0 - t
        return s**3 * p0 + 3 * s**2 * t * p1 + 3 * s * t**2 * p2 + t**3 * p3

    def d1(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        p0, p1, p2, p3 = self.ctrl
        s = 1.0 - t
        return 3 * s**2 * (p1 - p0) + 6 * s * t * (p2 - p1) + 3 * t**2 * (p3 - p2)

    def d2(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        p0, p1, p2, p3 = self.ctrl
        return 6 * (1.0 - t) * (p2 - 2 * p1 + p0) + 6 * t * (p3 - 2 * p2 + p1)


def power_graph(p: float, x_max: float):
    """Two pieces of ``y = |x|**p`` joined at the origin."""

    def f(t):
        return np.abs(t) ** p

    def f1(t):
        return p * np.sign(t) * np.abs(t) ** (p - 1)

    def f2(t):
        with np.errstate(divide="ignore"):
            return p * (p - 1) * np.abs(t) ** (p - 2)

    return [Graph(f, f1, f2, -x_max, 0.0), Graph(f, f1, f2, 0.0, x_max)]


def parabola(c: float, t0: float, t1: float):
    return Graph(
        lambda t: c * np.asarray(t) ** 2,
        lambda t: 2 * c * np.asarray(t),
        lambda t: np.full_like(np.asarray(t, dtype=float), 2 * c),
        t0,
        t1,
    )
