"""Named property suites behind the verify command.

Each suite re-checks the identities its module is built on, against the
shipped generator matrices and the given surface, and reports one named
Check per property.  A failing check never aborts the suite: every
property is evaluated and reported, and the caller decides (the CLI
exits 3 naming the first failure).

The lattice suite accepts an injected lattice so that a deliberately
broken Gram matrix demonstrably trips the isometry checks; the heights
and invariants suites accept the surface and point to audit.
"""

from __future__ import annotations

import io
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .defaults import default_point, default_surface
from .errors import InputError
from .heights import (
    HeightValue,
    canonical_boundary_height,
    hyperbolic_canonical_height,
    rational_boundary_height,
    vcan_pairing,
)
from .hyperbolic import (
    CUSPS,
    BoundaryPoint,
    angle_of,
    code_boundary_ray,
    diagonalize_form,
    exact_ray,
    op_norm,
)
from .invariants import (
    radius_jump_profile,
    star_set,
    total_height,
    star_volume,
    write_star_csv,
)
from .lattice import (
    WEHLER_WALLS,
    GramLattice,
    Hyperbolic,
    Parabolic,
    classify_isometry,
    exp_parabolic,
    is_isometry,
    mat_identity,
    mat_mul,
    mat_vec,
    ns_norm_sq,
    parabolic_xi,
    wehler_generator,
    wehler_lattice,
    word_matrix,
)
from .wehler import SurfacePoint, WehlerSurface, basis_height, state_heights

SUITE_NAMES = ("lattice", "hyperbolic", "wehler", "heights", "invariants")


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str
    seconds: float

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
            "seconds": round(self.seconds, 3),
        }


class _Suite:
    def __init__(self):
        self.checks: list = []

    def run(self, name: str, fn: Callable[[], str]) -> None:
        t0 = time.time()
        try:
            detail = fn()
            self.checks.append(Check(name, True, detail, time.time() - t0))
        except Exception as e:  # report, never abort the suite
            self.checks.append(Check(name, False, f"{type(e).__name__}: {e}", time.time() - t0))


def _assert(cond: bool, msg: str) -> None:
    if not cond:
        raise AssertionError(msg)


def suite_lattice(lattice: Optional[GramLattice] = None) -> list:
    lat = lattice if lattice is not None else wehler_lattice()
    s = _Suite()

    def generator_isometry() -> str:
        for i in (1, 2, 3):
            _assert(
                is_isometry(lat, wehler_generator(i)),
                f"generator {i} does not preserve the form",
            )
        return "all three generators preserve the pairing exactly"

    def involution_squared() -> str:
        I = mat_identity(3)
        for i in (1, 2, 3):
            M = wehler_generator(i)
            _assert(mat_mul(M, M) == I, f"generator {i} squared is not the identity")
        return "generators square to the identity exactly"

    def chamber_pairings() -> str:
        for i in range(3):
            for j in range(3):
                p = lat.pair(CUSPS[i], WEHLER_WALLS[j])
                if i == j:
                    _assert(p > 0, f"cusp {i+1} not on the positive side of its wall")
                else:
                    _assert(p == 0, f"cusp {i+1} not on wall {j+1}")
        return "cusps lie on their two walls, strictly inside the third"

    def exp_parabolic_roundtrip() -> str:
        M = word_matrix((1, 2))
        cls = classify_isometry(lat, M)
        _assert(isinstance(cls, Parabolic), "word 1,2 did not classify parabolic")
        E, xi = parabolic_xi(lat, M)
        _assert(exp_parabolic(lat, E, xi) == M, "exp/log round trip broke")
        _assert(ns_norm_sq(lat, M) == 4, "translation norm of word 1,2 is not 4")
        return "exp_parabolic(parabolic_xi) reproduces the matrix exactly"

    def hyperbolic_root() -> str:
        cls = classify_isometry(lat, word_matrix((1, 2, 3)))
        _assert(isinstance(cls, Hyperbolic), "word 1,2,3 did not classify hyperbolic")
        res = cls.lam * cls.lam - 18.0 * cls.lam + 1.0
        _assert(abs(res) < 1e-9 * cls.lam**2, f"lambda residual {res}")
        return f"lambda = {cls.lam!r} satisfies t^2 - 18 t + 1"

    s.run("generator-isometry", generator_isometry)
    s.run("involution-squared", involution_squared)
    s.run("chamber-pairings", chamber_pairings)
    s.run("exp-parabolic-roundtrip", exp_parabolic_roundtrip)
    s.run("hyperbolic-root", hyperbolic_root)
    return s.checks


def suite_hyperbolic() -> list:
    lat = wehler_lattice()
    s = _Suite()

    def diagonal_form() -> str:
        T = diagonalize_form(lat)
        n = lat.rank
        cols = [tuple(T[i][j] for i in range(n)) for j in range(n)]
        for a in range(n):
            for b in range(n):
                want = 1.0 if a == b == 0 else (-1.0 if a == b else 0.0)
                got = lat.pair_float(cols[a], cols[b])
                _assert(abs(got - want) < 1e-12, f"T^t G T [{a}][{b}] = {got}")
        return "T^t G T = diag(1, -1, -1) to 1e-12"

    def cusp_angles() -> str:
        want = (0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0)
        for i in range(3):
            got = angle_of(CUSPS[i])
            _assert(abs(got - want[i]) < 1e-12, f"cusp {i+1} at angle {got}")
        return "cusps sit at 0, 2pi/3, 4pi/3"

    def exact_ray_defect() -> str:
        v = exact_ray(0.7)
        Lf = tuple(Fraction(x) for x in lat.ample)
        _assert(lat.pair(Lf, v) == 1, "exact ray is not pair-normalized")
        defect = abs(float(lat.pair(v, v)))
        _assert(defect < 2.0**-200, f"null defect {defect}")
        return "exact ray pair-normalized with null defect below 2^-200"

    def coding_conjugation() -> str:
        v = exact_ray(0.7)
        coded = code_boundary_ray(v, max_letters=25)
        M = word_matrix(coded.word.letters)
        _assert(
            mat_vec(M, coded.final_vector) == tuple(v),
            "letters do not conjugate the reduced vector back to the input",
        )
        return f"{len(coded.word.letters)} letters replay to the input ray exactly"

    def cusp_reduction() -> str:
        E = mat_vec(word_matrix((3, 2, 1)), CUSPS[0])
        coded = code_boundary_ray(BoundaryPoint.cusp(E))
        _assert(coded.word.terminated == "exact_cusp", "image cusp not reduced exactly")
        _assert(
            tuple(coded.boundary.class_vector()) == tuple(Fraction(x) for x in E),
            "reduced cusp does not reproduce the class",
        )
        return f"image cusp {tuple(int(x) for x in E)} reduced in {len(coded.word.letters)} letters"

    def reflection_displacement() -> str:
        got = op_norm(wehler_generator(1))
        _assert(abs(got - 3.0) < 1e-12, f"op norm of generator 1 is {got}")
        return "generator displacement exp d(w0, s1 w0) = 3"

    s.run("diagonal-form", diagonal_form)
    s.run("cusp-angles", cusp_angles)
    s.run("exact-ray-defect", exact_ray_defect)
    s.run("coding-conjugation", coding_conjugation)
    s.run("cusp-reduction", cusp_reduction)
    s.run("reflection-displacement", reflection_displacement)
    return s.checks


def suite_wehler(surface: Optional[WehlerSurface] = None, point: Optional[SurfacePoint] = None) -> list:
    S = surface if surface is not None else default_surface()
    P = point if point is not None else default_point()
    s = _Suite()

    def on_surface() -> str:
        _assert(S.contains(P), "the sample point is not on the surface")
        return "sample point satisfies the form exactly"

    def involution_involutive() -> str:
        for i in (1, 2, 3):
            Q = S.involution(i, P)
            _assert(S.contains(Q), f"involution {i} left the surface")
            _assert(S.involution(i, Q) == P, f"involution {i} applied twice moved the point")
        return "involutions are involutions on the sample point"

    def fiber_membership() -> str:
        for i in (1, 2, 3):
            A, B, C = S.fiber_coefficients(i, P)
            t0, t1 = P.factor(i - 1).a, P.factor(i - 1).b
            val = A * t0 * t0 + B * t0 * t1 + C * t1 * t1
            _assert(val == 0, f"fiber polynomial nonzero along axis {i}")
        return "point lies on its own fiber in all three projections"

    def height_accounting() -> str:
        hs = state_heights(P.state())
        _assert(abs(basis_height(P) - sum(hs)) < 1e-12, "basis height mismatch")
        return "basis height equals the sum of coordinate heights"

    def word_replay() -> str:
        Q = S.apply_word((1, 2, 3), P)
        R = S.involution(3, S.involution(2, S.involution(1, P)))
        _assert(Q == R, "apply_word disagrees with nested involutions")
        return "apply_word composes left to right"

    s.run("on-surface", on_surface)
    s.run("involution-involutive", involution_involutive)
    s.run("fiber-membership", fiber_membership)
    s.run("height-accounting", height_accounting)
    s.run("word-replay", word_replay)
    return s.checks


def suite_heights(
    surface: Optional[WehlerSurface] = None,
    point: Optional[SurfacePoint] = None,
    tol: float = 1e-3,
) -> list:
    S = surface if surface is not None else default_surface()
    P = point if point is not None else default_point()
    s = _Suite()

    def linearity() -> str:
        v = exact_ray(0.8)
        h1 = canonical_boundary_height(S, v, P, tol=tol)
        h2 = canonical_boundary_height(S, tuple(2 * x for x in v), P, tol=tol)
        # the absolute stop rule may truncate the two runs at different
        # depths, so the comparison carries both error bounds
        gap = abs(h2.value - 2.0 * h1.value)
        budget = 2.0 * h1.error_bound + h2.error_bound + 1e-12
        _assert(gap <= budget, f"linearity gap {gap} over budget {budget}")
        return f"h(2 alpha) = 2 h(alpha) within {gap:.2e}"

    def vcan_scaling() -> str:
        g = (1, 2)
        v1 = vcan_pairing(S, g, P, tol=1e-2, n_cap=32)
        v2 = vcan_pairing(S, g + g, P, tol=1e-2, n_cap=32)
        rel = abs(v2.value - 4.0 * v1.value) / abs(4.0 * v1.value)
        _assert(rel < 0.05, f"vcan(g^2)/4 vcan(g) off by {rel:.3%}")
        _assert(v1.value > -tol, "vcan negative")
        return f"vcan(g^2) = 4 vcan(g) within {rel:.3%}"

    def equivariance() -> str:
        v = exact_ray(0.8)
        h1 = canonical_boundary_height(S, v, P, tol=tol)
        moved = S.involution(1, P)
        pulled = mat_vec(wehler_generator(1), v)
        h2 = canonical_boundary_height(S, pulled, moved, tol=tol)
        gap = abs(h1.value - h2.value)
        budget = 2.0 * (h1.error_bound + h2.error_bound) + 1e-12
        _assert(gap <= budget, f"equivariance gap {gap} over budget {budget}")
        return f"pullback/pushforward agree within {gap:.2e}"

    def cusp_gluing() -> str:
        rat = rational_boundary_height(S, BoundaryPoint.cusp_index(1), P, tol=1e-3)
        near = canonical_boundary_height(
            S, exact_ray(0.01), P, tol=1e-9, max_letters=250, guard_bits=400_000
        )
        # the cusp class h1 has ample pairing 4, the coded ray pairing 1
        rel = abs(4.0 * near.value - rat.value) / abs(rat.value)
        _assert(rel < 0.2, f"gluing mismatch {rel:.3%}")
        return f"coded ray at 0.01 matches the cusp value within {rel:.3%}"

    def power_limit() -> str:
        hp, hm = hyperbolic_canonical_height(S, (1, 2, 3), P, tol=tol)
        _assert(hp.value > 0.0, "expanded-ray height not positive")
        _assert(hm.value > 0.0, "contracted-ray height not positive")
        return f"h+ = {hp.value!r}, h- = {hm.value!r}"

    s.run("linearity", linearity)
    s.run("vcan-scaling", vcan_scaling)
    s.run("equivariance", equivariance)
    s.run("cusp-gluing", cusp_gluing)
    s.run("power-limit", power_limit)
    return s.checks


def suite_invariants(
    surface: Optional[WehlerSurface] = None,
    point: Optional[SurfacePoint] = None,
    tol: float = 1e-2,
) -> list:
    S = surface if surface is not None else default_surface()
    P = point if point is not None else default_point()
    s = _Suite()

    def synthetic_circle() -> str:
        const = lambda th, a: HeightValue(1.0, 0.0, 0, True)
        t = total_height(S, P, n_samples=32, height_fn=const)
        v = star_volume(S, P, n_samples=32, height_fn=const)
        _assert(abs(t.value - 2.0 * math.pi) < 1e-12, f"total {t.value}")
        _assert(abs(v.value - 2.0 * math.pi) < 1e-12, f"volume {v.value}")
        return "unit heights integrate to 2 pi on both quadrature paths"

    def homogeneity() -> str:
        lam = 3.0
        scaled = lambda th, a: HeightValue(lam, 0.0, 0, True)
        t = total_height(S, P, n_samples=32, height_fn=scaled)
        _assert(abs(t.value - 2.0 * math.pi / lam) < 1e-12, f"total {t.value}")
        return "scaling heights by 3 scales the total by 1/3"

    def csv_determinism() -> str:
        samples = star_set(S, P, n_samples=16, height_fn=lambda th, a: HeightValue(1.0, 0.0, 0, True))
        bufs = []
        for _ in range(2):
            buf = io.StringIO()
            write_star_csv(samples, buf)
            bufs.append(buf.getvalue())
        _assert(bufs[0] == bufs[1], "CSV not byte-stable")
        _assert(bufs[0].count("\n") == 17, "row count off")
        return "two writes produce byte-identical CSV"

    def star_scan() -> str:
        samples = star_set(S, P, n_samples=24, tol=tol)
        for smp in samples:
            if smp.height.converged:
                _assert(smp.radius > 0.0, f"nonpositive radius at theta {smp.theta}")
        mx, med = radius_jump_profile(samples)
        _assert(math.isfinite(mx), "no converged pairs in the scan")
        _assert(mx <= 10.0 * med, f"radius jump {mx} over 10x median {med}")
        t = total_height(S, P, samples=samples)
        _assert(math.isfinite(t.value) and t.value > 0.0, f"total {t.value}")
        return f"24-sample scan positive and continuous (max jump {mx:.3f}, median {med:.3f})"

    s.run("synthetic-circle", synthetic_circle)
    s.run("homogeneity", homogeneity)
    s.run("csv-determinism", csv_determinism)
    s.run("star-scan", star_scan)
    return s.checks


def run_suites(
    names: Sequence[str],
    surface: Optional[WehlerSurface] = None,
    point: Optional[SurfacePoint] = None,
    lattice: Optional[GramLattice] = None,
    tol: float = 1e-3,
) -> dict:
    """Run the named suites; returns {suite: [Check, ...]} in given order."""
    runners = {
        "lattice": lambda: suite_lattice(lattice),
        "hyperbolic": suite_hyperbolic,
        "wehler": lambda: suite_wehler(surface, point),
        "heights": lambda: suite_heights(surface, point, tol),
        "invariants": lambda: suite_invariants(surface, point),
    }
    out = {}
    for name in names:
        if name not in runners:
            raise InputError(f"unknown verify suite {name!r}; pick from {', '.join(SUITE_NAMES)} or all")
        out[name] = runners[name]()
    return out


def report_json(results: dict) -> dict:
    return {
        "suites": {
            name: [c.to_json() for c in checks] for name, checks in results.items()
        },
        "passed": all(c.passed for checks in results.values() for c in checks),
    }


def first_failure(results: dict):
    for name, checks in results.items():
        for c in checks:
            if not c.passed:
                return name, c
    return None
