"""Exception types raised by ridgekit."""


class RidgekitError(Exception):
    """Base class; carries a short machine-readable ``code``."""

    code = "error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class QueryOutsideClipBox(RidgekitError):
    code = "query_outside_clip_box"


class DegenerateBoundary(RidgekitError):
    code = "degenerate_boundary"


class NotInteriorPoint(RidgekitError):
    code = "not_interior_point"


class NotC2At(RidgekitError):
    code = "not_c2_at"


class EnvelopeRadiusBelowSampling(RidgekitError):
    code = "envelope_radius_below_sampling"


class GridTooCoarse(RidgekitError):
    code = "grid_too_coarse"


class DisconnectedInterior(RidgekitError):
    code = "disconnected_interior"


class InvalidDomain(RidgekitError):
    code = "invalid_domain"
