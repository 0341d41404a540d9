"""Frozen default surface and sample points.

The default surface is the seed-1 member of the random family: dense
coefficients in [-3, 3], the origin pinned to the surface as a common
fixed point of all three involutions.  The default sample point was
chosen by scanning the 72 rational points of coordinate height at most
4: it has all-nonzero coordinates (points with a zero coordinate tend to
sit on special fibers) and its whole word-length-2 orbit has positive
parabolic pairing in all three genus-one fibrations, so no boundary
direction degenerates and the total height is finite.
"""

from __future__ import annotations

from .wehler import ProjPoint, SurfacePoint, WehlerSurface, origin_point, random_surface

DEFAULT_SEED = 1


def default_surface() -> WehlerSurface:
    return random_surface(DEFAULT_SEED)


def default_point() -> SurfacePoint:
    """A generic point: infinite orbit, no torsion fiber through depth 2."""
    return SurfacePoint(ProjPoint(1, 1), ProjPoint(1, 1), ProjPoint(1, 2))


def default_periodic_point() -> SurfacePoint:
    """The pinned origin, fixed by all three involutions."""
    return origin_point()
