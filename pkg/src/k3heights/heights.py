"""Canonical heights on the boundary of the ample cone.

For a boundary class alpha and a rational point P the canonical height is

    h^can(alpha; P) = <L, alpha> * lim_n  h_L(p_n) / <L, L_n>

where the word (i_1, i_2, ...) codes the ray of alpha, p_n is the point
after the first n letters, L_n = word_matrix(i_1..i_n) @ L, and h_L is the
naive height summed over the three factors.  The limit is linear in alpha,
so heights of arbitrary boundary classes follow from the pair-normalized
representative; all normalization is done in exact arithmetic, which makes
the computed value exactly scaling-equivariant.

At a cusp E the same value is computed without coding: a translation-type
parabolic g fixing E has quadratically growing heights
h_L(g^n P) = a n^2 + O(n) and

    h^can(E; P) = vcan(g; P) / ||g||^2_NS,    vcan = 2 a / <L, E>,

with ||g||^2_NS = -<xi, xi> the translation norm.  The two routes agree in
the limit along the boundary, which the acceptance suite checks by walking
angles into a cusp.

Stop rule for the coded limit: the run stops once 10 * |increment| < tol
for three consecutive letters; the reported error bound is ten times the
last increment, so converged results always satisfy error_bound <= tol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import InputError, NonConvergence, NonParabolicInput
from .hyperbolic import (
    BoundaryPoint,
    CUSPS,
    code_boundary_ray,
    DEFAULT_MAX_LETTERS,
)
from .lattice import (
    classify_isometry,
    mat_mul,
    mat_vec,
    mat_identity,
    ns_norm_sq,
    wehler_generator,
    word_matrix,
)
from .wehler import (
    SurfacePoint,
    WehlerSurface,
    basis_height,
    guard_bits_default,
    iter_orbit,
    _state_bits,
)

DEFAULT_TOL = 1e-4
DEFAULT_VCAN_CAP = 256
DEFAULT_POWER_CAP = 24
STAGNATION_RUN = 3
POWER_STAGNATION_RUN = 2


@dataclass(frozen=True)
class HeightValue:
    """A computed height with its a-posteriori error estimate.

    converged implies error_bound <= the tolerance the computation ran
    with; n_steps counts letters (or word applications) consumed.
    """

    value: float
    error_bound: float
    n_steps: int
    converged: bool

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "error_bound": self.error_bound,
            "n_steps": self.n_steps,
            "converged": self.converged,
        }

    @classmethod
    def from_json(cls, data: dict) -> "HeightValue":
        return cls(
            float(data["value"]),
            float(data["error_bound"]),
            int(data["n_steps"]),
            bool(data["converged"]),
        )


def _ample_pair_exact(lat, v):
    return lat.pair(tuple(Fraction(x) for x in lat.ample), v)


def canonical_boundary_height(
    surface: WehlerSurface,
    alpha,
    point: SurfacePoint,
    tol: float = DEFAULT_TOL,
    max_letters: int = DEFAULT_MAX_LETTERS,
    guard_bits: Optional[int] = None,
    cache=None,
) -> HeightValue:
    """h^can(alpha; point) for a boundary class alpha.

    alpha may be a BoundaryPoint or any exact-rational (or float) vector on
    the null cone with positive mass.  Cusp classes use the parabolic
    route; irrational rays use the coded limit with the stagnation stop
    rule.  The input is pair-normalized exactly before computing, so the
    result scales exactly with alpha.
    """
    surface.require_contains(point)
    if guard_bits is None:
        guard_bits = guard_bits_default()
    bp = alpha if isinstance(alpha, BoundaryPoint) else BoundaryPoint.from_vector(alpha)
    if bp.kind == "cusp":
        return rational_boundary_height(
            surface, bp, point, tol=tol, guard_bits=guard_bits, cache=cache
        )
    lat = surface.lattice
    d = _ample_pair_exact(lat, bp.vector)
    if d <= 0:
        raise InputError("boundary class must have positive mass")
    stotal = Fraction(bp.scale) * d
    vn = tuple(Fraction(x) / d for x in bp.vector)
    coded = code_boundary_ray(BoundaryPoint("irrational", vn), max_letters=max_letters)
    if coded.word.terminated in ("cusp", "exact_cusp"):
        inner = rational_boundary_height(
            surface, coded.boundary, point, tol=tol, guard_bits=guard_bits, cache=cache
        )
        return HeightValue(
            float(stotal) * inner.value,
            abs(float(stotal)) * inner.error_bound,
            inner.n_steps,
            inner.converged,
        )
    if coded.word.terminated == "interior" and not coded.word.letters:
        raise InputError(
            "alpha reduced into the chamber interior: not a boundary ray at "
            "the working precision"
        )
    # a nonempty word that ends interior has consumed the input's precision;
    # the letters so far are the coding of the ray as given
    letters = coded.word.letters
    sf = float(stotal)
    state = point.state()
    Pn = mat_identity(lat.rank)
    den0 = lat.pair(lat.ample, lat.ample)
    vals = [sf * basis_height(state) / float(den0)]
    streak = 0
    converged = False
    err = math.inf
    n_done = 0
    for n, state in iter_orbit(surface, letters, state, cache, point.key()):
        n_done = n
        Pn = mat_mul(Pn, wehler_generator(letters[n - 1]))
        den = lat.pair(lat.ample, mat_vec(Pn, lat.ample))
        vals.append(sf * basis_height(state) / float(den))
        delta = vals[-1] - vals[-2]
        # Geometric tails need a few increments of headroom; inside a
        # parabolic excursion the tail is ~C/n with increments ~C/n^2,
        # so n * |delta| is the honest scale there.
        err = max(10.0, float(n)) * abs(delta)
        if err < tol:
            streak += 1
        else:
            streak = 0
        if streak >= STAGNATION_RUN and n >= STAGNATION_RUN:
            converged = True
            break
        if _state_bits(state) > guard_bits:
            break
    return HeightValue(vals[-1], err, n_done, converged)


def _require_translation(surface: WehlerSurface, g_word: Sequence[int]):
    M = word_matrix(g_word)
    cls = classify_isometry(surface.lattice, M)
    if cls.kind != "parabolic" or cls.xi is None:
        raise NonParabolicInput(
            f"word {tuple(g_word)} is {cls.kind}, not a translation-type parabolic"
        )
    return M, cls


def vcan_pairing(
    surface: WehlerSurface,
    g_word: Sequence[int],
    point: SurfacePoint,
    tol: float = DEFAULT_TOL,
    n_cap: int = DEFAULT_VCAN_CAP,
    guard_bits: Optional[int] = None,
    cache=None,
) -> HeightValue:
    """The parabolic height pairing vcan(g; point) = 2 a / <L, E>.

    a is the quadratic coefficient of n -> h_L(g^n point), fitted by least
    squares over the window [n/2, n]; n doubles from 16 up to n_cap until
    successive estimates differ by at most tol.  The reported error bound
    is the difference of the last two estimates (or the in-window split
    difference before the first doubling).
    """
    surface.require_contains(point)
    if guard_bits is None:
        guard_bits = guard_bits_default()
    g_word = tuple(g_word)
    _, cls = _require_translation(surface, g_word)
    deg = surface.lattice.pair(surface.lattice.ample, cls.E)
    if deg <= 0:
        raise NonParabolicInput("parabolic class pairs nonpositively with L")
    heights = [basis_height(point.state())]
    n = 16
    n = min(n, n_cap)
    est_prev = None
    value = math.inf
    err = math.inf
    used = 0
    it = iter_orbit(surface, g_word * n_cap, point.state(), cache, point.key())
    guard_hit = False
    while True:
        target_letters = n * len(g_word)
        while used < target_letters and not guard_hit:
            try:
                k, state = next(it)
            except StopIteration:
                guard_hit = True
                break
            used = k
            if k % len(g_word) == 0:
                heights.append(basis_height(state))
            if _state_bits(state) > guard_bits:
                guard_hit = True
        m = len(heights) - 1
        if m < 8:
            raise NonConvergence(
                f"integer guard stopped the parabolic orbit after {m} steps; "
                "not enough data to fit the quadratic growth"
            )
        lo = m // 2
        xs = np.arange(lo, m + 1, dtype=float)
        ys = np.array(heights[lo:], dtype=float)
        a_hat = float(np.polyfit(xs, ys, 2)[0])
        value = 2.0 * a_hat / float(deg)
        if est_prev is None:
            mid = (lo + m) // 2
            a1 = float(np.polyfit(np.arange(lo, mid + 1, dtype=float),
                                  np.array(heights[lo:mid + 1], dtype=float), 2)[0])
            a2 = float(np.polyfit(np.arange(mid, m + 1, dtype=float),
                                  np.array(heights[mid:], dtype=float), 2)[0])
            err = abs(a1 - a2) * 2.0 / float(deg)
        else:
            err = abs(value - est_prev)
        if err <= tol or guard_hit or m >= n_cap:
            break
        est_prev = value
        n = min(2 * n, n_cap)
    return HeightValue(value, err, len(heights) - 1, err <= tol)


def eta_h_telescoped(
    surface: WehlerSurface,
    g_word: Sequence[int],
    point: SurfacePoint,
    cls0: Optional[Sequence] = None,
    tol: float = DEFAULT_TOL,
    n_cap: int = DEFAULT_VCAN_CAP,
    guard_bits: Optional[int] = None,
    cache=None,
) -> HeightValue:
    """Slope of n -> basis_height(g^n point, cls0) for a parabolic word g.

    cls0 defaults to the translation class xi of g; classes pairing to
    zero with the fixed cusp grow linearly and the slope for xi equals
    vcan(g; point).  Same windowing and stop rule as vcan_pairing, with a
    linear fit.
    """
    surface.require_contains(point)
    if guard_bits is None:
        guard_bits = guard_bits_default()
    g_word = tuple(g_word)
    _, cls = _require_translation(surface, g_word)
    if cls0 is None:
        cls0 = cls.xi
    cls0 = tuple(float(x) for x in cls0)
    heights = [basis_height(point.state(), cls0)]
    n = min(16, n_cap)
    est_prev = None
    value = math.inf
    err = math.inf
    used = 0
    it = iter_orbit(surface, g_word * n_cap, point.state(), cache, point.key())
    guard_hit = False
    while True:
        target_letters = n * len(g_word)
        while used < target_letters and not guard_hit:
            try:
                k, state = next(it)
            except StopIteration:
                guard_hit = True
                break
            used = k
            if k % len(g_word) == 0:
                heights.append(basis_height(state, cls0))
            if _state_bits(state) > guard_bits:
                guard_hit = True
        m = len(heights) - 1
        if m < 8:
            raise NonConvergence(
                f"integer guard stopped the parabolic orbit after {m} steps; "
                "not enough data to fit the linear growth"
            )
        lo = m // 2
        xs = np.arange(lo, m + 1, dtype=float)
        ys = np.array(heights[lo:], dtype=float)
        value = float(np.polyfit(xs, ys, 1)[0])
        if est_prev is None:
            mid = (lo + m) // 2
            s1 = float(np.polyfit(np.arange(lo, mid + 1, dtype=float),
                                  np.array(heights[lo:mid + 1], dtype=float), 1)[0])
            s2 = float(np.polyfit(np.arange(mid, m + 1, dtype=float),
                                  np.array(heights[mid:], dtype=float), 1)[0])
            err = abs(s1 - s2)
        else:
            err = abs(value - est_prev)
        if err <= tol or guard_hit or m >= n_cap:
            break
        est_prev = value
        n = min(2 * n, n_cap)
    return HeightValue(value, err, len(heights) - 1, err <= tol)


def rational_boundary_height(
    surface: WehlerSurface,
    cusp,
    point: SurfacePoint,
    tol: float = DEFAULT_TOL,
    n_cap: int = DEFAULT_VCAN_CAP,
    guard_bits: Optional[int] = None,
    cache=None,
) -> HeightValue:
    """h^can at a cusp class, via the parabolic route.

    The cusp class E is reduced exactly to a chamber cusp h_i by a word u;
    equivariance moves the point instead: h^can(E; P) = h^can(h_i; u P).
    At h_i the product of the other two involutions is a translation g0
    fixing h_i, and h^can(h_i; Q) = vcan(g0; Q) / ||g0||^2_NS.  The scale
    of the cusp multiplies linearly.
    """
    surface.require_contains(point)
    bp = cusp if isinstance(cusp, BoundaryPoint) else BoundaryPoint.cusp(cusp)
    if bp.kind != "cusp":
        raise InputError("rational_boundary_height needs a cusp class")
    coded = code_boundary_ray(bp)
    letters = coded.word.letters
    idx = _chamber_cusp_index(coded.final_vector)
    moved = surface.apply_word(letters, point) if letters else point
    g0 = tuple(j for j in (1, 2, 3) if j - 1 != idx)
    inner = vcan_pairing(
        surface, g0, moved, tol=tol, n_cap=n_cap, guard_bits=guard_bits, cache=cache
    )
    norm = ns_norm_sq(surface.lattice, word_matrix(g0))
    s = float(Fraction(bp.scale))
    return HeightValue(
        s * inner.value / float(norm),
        abs(s) * inner.error_bound / float(norm),
        inner.n_steps,
        inner.converged,
    )


def _chamber_cusp_index(w: Sequence) -> int:
    nz = [i for i, x in enumerate(w) if x != 0]
    if len(nz) != 1:
        raise NonConvergence(f"cusp reduction ended at {tuple(w)}, not a chamber cusp")
    return nz[0]


def hyperbolic_canonical_height(
    surface: WehlerSurface,
    g_word: Sequence[int],
    point: SurfacePoint,
    tol: float = DEFAULT_TOL,
    n_cap: int = DEFAULT_POWER_CAP,
    guard_bits: Optional[int] = None,
    cache=None,
) -> tuple:
    """(h^+, h^-) for a hyperbolic word g at a point.

    h^+ = lim lambda^-n basis_height(g^n P, alpha_+) and h^- is the same
    along g^-1 with the contracted ray alpha_-.  Periodic orbits give an
    exact zero.  Increments of the scaled heights contract by lambda^-2
    per application, so two consecutive increments below tol/10 certify
    convergence here (the boundary-coding rule asks for three).
    """
    surface.require_contains(point)
    if guard_bits is None:
        guard_bits = guard_bits_default()
    g_word = tuple(g_word)
    cls = classify_isometry(surface.lattice, word_matrix(g_word))
    if cls.kind != "hyperbolic":
        raise InputError(f"word {g_word} is {cls.kind}, not hyperbolic")
    h_plus = _power_limit(
        surface, g_word, point, cls.lam, cls.alpha_plus, tol, n_cap, guard_bits, cache
    )
    h_minus = _power_limit(
        surface,
        tuple(reversed(g_word)),
        point,
        cls.lam,
        cls.alpha_minus,
        tol,
        n_cap,
        guard_bits,
        cache,
    )
    return h_plus, h_minus


def _power_limit(
    surface: WehlerSurface,
    g_word: tuple,
    point: SurfacePoint,
    lam: float,
    ray: Sequence[float],
    tol: float,
    n_cap: int,
    guard_bits: int,
    cache,
) -> HeightValue:
    state = point.state()
    seen = {state}
    vals = [basis_height(state, ray)]
    streak = 0
    converged = False
    err = math.inf
    applications = 0
    scale = 1.0
    for k, st in iter_orbit(surface, g_word * n_cap, state, cache, point.key()):
        if k % len(g_word) != 0:
            continue
        applications = k // len(g_word)
        if st in seen:
            return HeightValue(0.0, 0.0, applications, True)
        seen.add(st)
        scale /= lam
        vals.append(scale * basis_height(st, ray))
        delta = vals[-1] - vals[-2]
        err = 10.0 * abs(delta)
        if err < tol:
            streak += 1
        else:
            streak = 0
        if streak >= POWER_STAGNATION_RUN and applications >= POWER_STAGNATION_RUN:
            converged = True
            break
        if _state_bits(st) > guard_bits:
            break
    return HeightValue(vals[-1], err, applications, converged)


def finite_fiber_order(
    surface: WehlerSurface,
    g_word: Sequence[int],
    point: SurfacePoint,
    max_n: int = 64,
) -> Optional[int]:
    """Smallest k >= 1 with g^k(point) = point, or None up to max_n."""
    surface.require_contains(point)
    g_word = tuple(g_word)
    if not g_word:
        raise InputError("empty word has no orbit")
    start = point.state()
    for k, st in iter_orbit(surface, g_word * max_n, start):
        if k % len(g_word) == 0 and st == start:
            return k // len(g_word)
    return None
