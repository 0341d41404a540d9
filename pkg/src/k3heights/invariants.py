"""Orbit invariants built from boundary heights.

The star set of a point P is the region of the boundary cone where
h^can(alpha; P) <= 1.  Heights are degree-1 homogeneous in alpha, so in
diagonal coordinates the set is star-shaped: along the mass-1 ray at
angle theta it extends to radius 1 / h^can(alpha(theta); P).  The total
height integrates h^can(alpha(theta); P)^-(rho-2) d(theta) against the
rotation-invariant measure of the diagonal circle; for the rank-3 Wehler
lattice rho - 2 = 1 and the integrand is exactly the star radius.  Both
the total height and the star volume are invariants of the full orbit
of P, which invariance_report checks word by word.

Samples are independent and may be evaluated concurrently; reductions
always sum in theta-grid order, so results do not depend on the worker
count.  Non-converged samples are never dropped or interpolated inside
the integrals: they enter as computed and the result is flagged when
more than 5 percent of the grid failed to converge.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .errors import InputError
from .heights import DEFAULT_TOL, HeightValue, canonical_boundary_height
from .hyperbolic import (
    DEFAULT_MAX_LETTERS,
    DEFAULT_RAY_BITS,
    BoundaryPoint,
    diagonalize_form,
    exact_ray,
)
from .lattice import reduced_words, wehler_lattice, word_str
from .wehler import SurfacePoint, WehlerSurface, guard_bits_default

DEFAULT_SAMPLES = 720
STAR_TOL = 1e-3
FLAG_FRACTION = 0.05
TWO_PI = 2.0 * math.pi

HeightFn = Callable[[float, tuple], HeightValue]


@dataclass(frozen=True)
class StarSample:
    """One boundary direction of a star-set scan.

    alpha is the mass-normalized class at angle theta, radius the star
    extent 1 / height.value (inf when the height vanishes or worse).
    """

    theta: float
    alpha: tuple
    height: HeightValue
    radius: float

    def to_json(self) -> dict:
        return {
            "theta": self.theta,
            "alpha": list(self.alpha),
            "height": self.height.to_json(),
            "radius": self.radius,
        }


@dataclass(frozen=True)
class TotalHeightResult:
    """Quadrature value with its error estimate and convergence census."""

    value: float
    error: float
    n_samples: int
    n_nonconverged: int
    flagged: bool

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "error": self.error,
            "n_samples": self.n_samples,
            "n_nonconverged": self.n_nonconverged,
            "flagged": self.flagged,
        }


@dataclass(frozen=True)
class InvarianceRow:
    word: tuple
    point: SurfacePoint
    total: TotalHeightResult


@dataclass(frozen=True)
class InvarianceReport:
    rows: tuple
    max_relative_deviation: float

    def to_json(self) -> dict:
        return {
            "rows": [
                {
                    "word": word_str(r.word),
                    "point": r.point.to_json(),
                    "total": r.total.to_json(),
                }
                for r in self.rows
            ],
            "max_relative_deviation": self.max_relative_deviation,
        }


def _mass_unit_target(theta: float, bits: int = DEFAULT_RAY_BITS):
    """The mass-1 boundary class at angle theta, as (BoundaryPoint, floats).

    exact_ray is pair-normalized; dividing by its exact mass in the same
    diagonalizing basis puts the represented class on the mass-1 circle
    to within the basis precision.
    """
    v = exact_ray(theta, bits)
    T = diagonalize_form(bits=bits)
    n = len(v)
    c0 = tuple(T[i][0] for i in range(n))
    lat = wehler_lattice()
    m = lat.pair(v, c0)
    if m <= 0:
        raise InputError("boundary ray has nonpositive mass")
    s = 1 / Fraction(m)
    alpha = tuple(float(s * x) for x in v)
    return BoundaryPoint("irrational", v, s), alpha


def star_set(
    surface: WehlerSurface,
    point: SurfacePoint,
    n_samples: int = DEFAULT_SAMPLES,
    tol: float = STAR_TOL,
    max_letters: int = DEFAULT_MAX_LETTERS,
    guard_bits: Optional[int] = None,
    cache=None,
    height_fn: Optional[HeightFn] = None,
    workers: int = 1,
) -> list:
    """Evaluate h^can at mass-1 classes on an even theta grid.

    height_fn replaces the height computation when given (synthetic
    grids for quadrature tests); otherwise each sample runs
    canonical_boundary_height, whose cusp recognition routes rational
    directions through the parabolic pairing.  Failures never drop a
    sample: the HeightValue arrives non-converged and the radius column
    is still emitted (inf where the value is not positive).
    """
    if n_samples < 16:
        raise InputError(f"n_samples must be at least 16, got {n_samples}")
    if guard_bits is None:
        guard_bits = guard_bits_default()
    thetas = [TWO_PI * k / n_samples for k in range(n_samples)]
    # reduction consumes roughly 4 bits of null defect per letter, so deep
    # scans need rays built beyond the default precision
    ray_bits = max(DEFAULT_RAY_BITS, 4 * max_letters + 64)

    def one(theta: float) -> StarSample:
        bp, alpha = _mass_unit_target(theta, ray_bits)
        if height_fn is not None:
            hv = height_fn(theta, alpha)
        else:
            hv = canonical_boundary_height(
                surface,
                bp,
                point,
                tol=tol,
                max_letters=max_letters,
                guard_bits=guard_bits,
                cache=cache,
            )
        radius = 1.0 / hv.value if hv.value > 0.0 else math.inf
        return StarSample(theta, alpha, hv, radius)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(one, thetas))
    else:
        samples = [one(t) for t in thetas]
    return samples


def _census(samples: Sequence[StarSample]):
    n = len(samples)
    bad = sum(1 for s in samples if not s.height.converged)
    return n, bad, bad > FLAG_FRACTION * n


def _height_error_term(samples: Sequence[StarSample], dtheta: float) -> float:
    # d(1/h) = dh / h^2 propagated through unit quadrature weights
    total = 0.0
    for s in samples:
        if s.height.value > 0.0 and math.isfinite(s.height.error_bound):
            total += s.height.error_bound / s.height.value**2
    return total * dtheta


def _second_difference_error(f: Sequence[float], dtheta: float) -> float:
    n = len(f)
    acc = 0.0
    for k in range(n):
        acc += abs(f[(k + 1) % n] - 2.0 * f[k] + f[k - 1])
    return acc * dtheta / 12.0


def total_height(
    surface: WehlerSurface,
    point: SurfacePoint,
    n_samples: int = DEFAULT_SAMPLES,
    tol: float = STAR_TOL,
    max_letters: int = DEFAULT_MAX_LETTERS,
    guard_bits: Optional[int] = None,
    cache=None,
    height_fn: Optional[HeightFn] = None,
    workers: int = 1,
    samples: Optional[Sequence[StarSample]] = None,
) -> TotalHeightResult:
    """Trapezoid quadrature of 1/h^can over the boundary circle.

    On the periodic grid every trapezoid weight is equal, so the value
    is dtheta * sum(radius).  The quadrature error is measured by a
    Richardson comparison against the half-resolution grid (second
    differences when the grid is odd) and added to the propagated height
    errors.  Pass precomputed samples to share one scan between the
    invariants.
    """
    if samples is None:
        samples = star_set(
            surface, point, n_samples, tol, max_letters, guard_bits, cache,
            height_fn, workers,
        )
    n = len(samples)
    dtheta = TWO_PI / n
    f = [s.radius for s in samples]
    if any(not math.isfinite(x) for x in f):
        n_s, bad, _ = _census(samples)
        return TotalHeightResult(math.inf, math.inf, n_s, bad, True)
    value = dtheta * sum(f)
    if n % 2 == 0:
        half = (2.0 * dtheta) * sum(f[k] for k in range(0, n, 2))
        qerr = abs(value - half) / 3.0
    else:
        qerr = _second_difference_error(f, dtheta)
    n_s, bad, flagged = _census(samples)
    return TotalHeightResult(value, qerr + _height_error_term(samples, dtheta), n_s, bad, flagged)


def star_volume(
    surface: WehlerSurface,
    point: SurfacePoint,
    n_samples: int = DEFAULT_SAMPLES,
    tol: float = STAR_TOL,
    max_letters: int = DEFAULT_MAX_LETTERS,
    guard_bits: Optional[int] = None,
    cache=None,
    height_fn: Optional[HeightFn] = None,
    workers: int = 1,
    samples: Optional[Sequence[StarSample]] = None,
) -> TotalHeightResult:
    """Volume of the star set as the radial integral in diagonal coordinates.

    For rank 3 the radial factor r^(rho-3) is constant and the angular
    integrand collapses to the star radius, the same family total_height
    integrates; this implementation is an independent quadrature path
    (composite Simpson) so the two can cross-check each other.
    """
    if samples is None:
        samples = star_set(
            surface, point, n_samples, tol, max_letters, guard_bits, cache,
            height_fn, workers,
        )
    n = len(samples)
    dtheta = TWO_PI / n
    f = [s.radius for s in samples]
    if any(not math.isfinite(x) for x in f):
        n_s, bad, _ = _census(samples)
        return TotalHeightResult(math.inf, math.inf, n_s, bad, True)
    if n % 2 == 0:
        even = sum(f[k] for k in range(0, n, 2))
        odd = sum(f[k] for k in range(1, n, 2))
        value = (dtheta / 3.0) * (2.0 * even + 4.0 * odd)
    else:
        # odd periodic grid: 1/3-rule panels across n-3 intervals plus a
        # closing 3/8 panel through the wraparound
        body = f[0] + f[n - 3] + sum(
            (4.0 if k % 2 else 2.0) * f[k] for k in range(1, n - 3)
        )
        value = (dtheta / 3.0) * body
        value += (3.0 * dtheta / 8.0) * (f[n - 3] + 3.0 * f[n - 2] + 3.0 * f[n - 1] + f[0])
    trap = dtheta * sum(f)
    qerr = abs(value - trap)
    n_s, bad, flagged = _census(samples)
    return TotalHeightResult(value, qerr + _height_error_term(samples, dtheta), n_s, bad, flagged)


def invariance_report(
    surface: WehlerSurface,
    point: SurfacePoint,
    depth: int,
    n_samples: int = DEFAULT_SAMPLES,
    tol: float = STAR_TOL,
    max_letters: int = DEFAULT_MAX_LETTERS,
    guard_bits: Optional[int] = None,
    cache=None,
    height_fn: Optional[HeightFn] = None,
    workers: int = 1,
) -> InvarianceReport:
    """Total heights over the word-length <= depth orbit of the point.

    The deviation is measured relative to the base point's value; exact
    invariance is the orbit-invariance theorem, so the spread reflects
    quadrature and truncation error only.
    """
    if depth < 0 or depth > 4:
        raise InputError(f"depth must be between 0 and 4, got {depth}")
    rows = []
    for word in reduced_words(depth):
        moved = surface.apply_word(word, point)
        tot = total_height(
            surface, moved, n_samples, tol, max_letters, guard_bits, cache,
            height_fn, workers,
        )
        rows.append(InvarianceRow(word, moved, tot))
    base = rows[0].total.value
    if base == 0.0 or not math.isfinite(base):
        dev = math.inf
    else:
        dev = max(abs(r.total.value - base) / abs(base) for r in rows)
    return InvarianceReport(tuple(rows), dev)


def radius_jump_profile(samples: Sequence[StarSample]):
    """(max, median) of adjacent radius jumps over converged pairs.

    The continuity check for star-set scans: on a converged grid the
    maximum jump should stay within an order of magnitude of the median
    jump, otherwise the radius function has an unresolved discontinuity.
    """
    jumps = []
    n = len(samples)
    for k in range(n):
        a, b = samples[k], samples[(k + 1) % n]
        if a.height.converged and b.height.converged:
            if math.isfinite(a.radius) and math.isfinite(b.radius):
                jumps.append(abs(b.radius - a.radius))
    if not jumps:
        return math.nan, math.nan
    jumps.sort()
    mid = len(jumps) // 2
    if len(jumps) % 2:
        med = jumps[mid]
    else:
        med = 0.5 * (jumps[mid - 1] + jumps[mid])
    return jumps[-1], med


def write_star_csv(samples: Sequence[StarSample], path) -> None:
    """CSV with columns theta,alpha0,alpha1,alpha2,height,err,converged,radius.

    All reals use 17 significant digits; reruns with identical inputs
    produce byte-identical files.
    """
    import io

    def fmt(x: float) -> str:
        return format(x, ".17g")

    own = isinstance(path, (str, bytes)) or hasattr(path, "__fspath__")
    fh = open(path, "w", encoding="ascii", newline="\n") if own else path
    try:
        fh.write("theta,alpha0,alpha1,alpha2,height,err,converged,radius\n")
        for s in samples:
            row = [
                fmt(s.theta),
                fmt(s.alpha[0]),
                fmt(s.alpha[1]),
                fmt(s.alpha[2]),
                fmt(s.height.value),
                fmt(s.height.error_bound),
                "true" if s.height.converged else "false",
                fmt(s.radius),
            ]
            fh.write(",".join(row) + "\n")
    finally:
        if own:
            fh.close()
