"""Numerical tolerances shared by all modules.

Every field can be overridden from the command line with ``--tol KEY=VAL``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # "lies on the boundary", relative to the clip box diameter
    eps_bd_rel: float = 1e-9
    # agreement of |xi - x| with d(x) for returned projections (absolute)
    eps_proj: float = 1e-6
    # relative slack admitting a local minimizer as a global one
    tau_rel: float = 1e-7
    # dense boundary sampling, relative to the clip box diameter
    dense_spacing_rel: float = 2.5e-5
    # projections closer than this many dense spacings are one cluster
    cluster_merge: float = 3.0
    # max clusters reported for a continuum of minimizers
    max_clusters: int = 64
    # touching-ball neighborhood, in dense spacings
    locality_samples: float = 16.0
    # relative depth below which a sample counts as on the ball's sphere
    touch_rel: float = 1e-9
    # bisection halvings for rho
    rho_halvings: int = 40
    # spacing of the boundary samples carrying the rho table (rho_star)
    rho_table_spacing: float = 0.005
    # envelope schedule for rho_star (decreasing)
    env_radii: tuple = (0.1, 0.05, 0.025)
    # angle gap flagging a corner (rad)
    corner_angle: float = 1e-6
    # Newton iterations for projection refinement
    newton_iters: int = 30
    # non-spreading diagnostic: witnesses this far apart (deg) mean FAIL
    spread_angle_deg: float = 5.0
    # theorem tolerance factor on h (tol_theorem = max(2u, factor*h))
    theorem_h_factor: float = 4.0

    def replace(self, **changes) -> "Tolerances":
        return dataclasses.replace(self, **changes)

    def with_overrides(self, pairs) -> "Tolerances":
        """Apply ``KEY=VAL`` strings, coercing to the field's type."""
        fields = {f.name: f for f in dataclasses.fields(self)}
        changes = {}
        for item in pairs:
            key, _, raw = item.partition("=")
            key = key.strip()
            if key not in fields or not raw:
                raise ValueError(f"unknown tolerance override {item!r}")
            current = getattr(self, key)
            if isinstance(current, tuple):
                changes[key] = tuple(float(v) for v in raw.split(","))
            elif isinstance(current, int):
                changes[key] = int(raw)
            else:
                changes[key] = float(raw)
        return self.replace(**changes)


DEFAULT = Tolerances()
