"""Command-line front end.

Subcommands: surface check, point find, orbit, height, vcan, starset,
total-height, verify.  Every command is a deterministic function of the
configuration and its inputs.  Exit codes: 0 success, 1 input error
(diagnostic names the offending field), 2 result computed but not
converged (the partial result is still printed), 3 verification failure
(the failing property is named on stderr).

Point specs are either a JSON file ({"x": ["a","b"], ...}) or an inline
"a:b,c:d,e:f".  Alpha specs: "cusp:<i>" the i-th chamber cusp class,
"theta:<radians>" the exact boundary ray at that angle, and
"irr:v0,v1,v2" the boundary ray at the angle of the given class (its
radial projection to the boundary circle).  All reals are printed with
17 significant digits; exact rationals print as "p/q".
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from .cache import OrbitCache
from .defaults import default_point, default_surface
from .errors import InputError, K3HeightsError, NonConvergence, VerificationFailure
from .heights import (
    DEFAULT_VCAN_CAP,
    canonical_boundary_height,
    vcan_pairing,
)
from .hyperbolic import BoundaryPoint, angle_of
from .invariants import invariance_report, star_set, total_height, write_star_csv
from .lattice import parse_word, word_str
from .verify import SUITE_NAMES, first_failure, report_json, run_suites
from .wehler import (
    ProjPoint,
    SurfacePoint,
    WehlerSurface,
    basis_height,
    guard_bits_default,
    random_surface,
)


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration shared by all commands."""

    surface_path: Optional[str]
    tol: float
    max_letters: int
    guard_bits: int
    samples: int
    seed: Optional[int]
    cache_dir: Optional[str]

    def __post_init__(self):
        if not self.tol > 0:
            raise InputError(f"--tol must be positive, got {self.tol}")
        if self.max_letters < 1:
            raise InputError(f"--max-letters must be at least 1, got {self.max_letters}")
        if self.samples < 16:
            raise InputError(f"--samples must be at least 16, got {self.samples}")
        if self.guard_bits < 1:
            raise InputError(f"--guard-bits must be positive, got {self.guard_bits}")


def _fmt_real(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def dumps17(obj, indent: int = 0) -> str:
    """JSON text with every real at 17 significant digits."""
    pad = " " * indent
    inner = " " * (indent + 2)
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, float):
        return _fmt_real(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = [f"{inner}{json.dumps(str(k))}: {dumps17(v, indent + 2)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(rows) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            return "[]"
        rows = [f"{inner}{dumps17(v, indent + 2)}" for v in seq]
        return "[\n" + ",\n".join(rows) + f"\n{pad}]"
    raise InputError(f"cannot serialize {type(obj).__name__}")


def _emit(obj) -> None:
    sys.stdout.write(dumps17(obj) + "\n")


def _load_surface(cfg: RunConfig) -> WehlerSurface:
    if cfg.surface_path is not None:
        try:
            with open(cfg.surface_path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as e:
            raise InputError(f"--surface: cannot read {cfg.surface_path}: {e}")
        except json.JSONDecodeError as e:
            raise InputError(f"--surface: {cfg.surface_path} is not valid JSON: {e}")
        return WehlerSurface.from_json(data)
    if cfg.seed is not None:
        return random_surface(cfg.seed)
    return default_surface()


def _parse_point(spec: Optional[str]) -> SurfacePoint:
    if spec is None:
        return default_point()
    if spec.endswith(".json") or os.path.exists(spec):
        try:
            with open(spec, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as e:
            raise InputError(f"--point: cannot read {spec}: {e}")
        except json.JSONDecodeError as e:
            raise InputError(f"--point: {spec} is not valid JSON: {e}")
        return SurfacePoint.from_json(data)
    parts = spec.split(",")
    if len(parts) != 3:
        raise InputError(f"--point: inline form needs x,y,z as a:b pairs, got {spec!r}")
    pairs = []
    for part in parts:
        ab = part.split(":")
        if len(ab) != 2:
            raise InputError(f"--point: bad projective pair {part!r}")
        try:
            pairs.append(ProjPoint(int(ab[0]), int(ab[1])))
        except ValueError:
            raise InputError(f"--point: non-integer entry in {part!r}")
    return SurfacePoint(*pairs)


def _parse_alpha(spec: str) -> BoundaryPoint:
    kind, sep, rest = spec.partition(":")
    if not sep:
        raise InputError(f"--alpha: expected cusp:<i>, theta:<radians> or irr:v0,v1,v2, got {spec!r}")
    if kind == "cusp":
        try:
            return BoundaryPoint.cusp_index(int(rest))
        except ValueError:
            raise InputError(f"--alpha: cusp index must be an integer, got {rest!r}")
    if kind == "theta":
        try:
            theta = float(rest)
        except ValueError:
            raise InputError(f"--alpha: theta must be a real number, got {rest!r}")
        return BoundaryPoint.from_angle(theta)
    if kind == "irr":
        comps = rest.split(",")
        if len(comps) != 3:
            raise InputError(f"--alpha: irr needs three components, got {rest!r}")
        try:
            v = tuple(float(c) for c in comps)
        except ValueError:
            raise InputError(f"--alpha: non-numeric component in {rest!r}")
        return BoundaryPoint.from_angle(angle_of(v))
    raise InputError(f"--alpha: unknown kind {kind!r}")


def _parse_word_arg(spec: str):
    try:
        return parse_word(spec)
    except K3HeightsError:
        raise InputError(f"--word: expected comma-separated letters in 1..3, got {spec!r}")


def _make_cache(cfg: RunConfig, surface: WehlerSurface) -> Optional[OrbitCache]:
    if cfg.cache_dir is None:
        return None
    return OrbitCache(surface.hash_hex, cache_dir=cfg.cache_dir)


def _alpha_summary(bp: BoundaryPoint) -> dict:
    # exact ray coordinates are hundreds of digits; echo the angle instead
    if bp.kind == "cusp":
        return bp.to_json()
    return {"kind": "irrational", "theta": bp.theta, "scale": str(bp.scale)}


def cmd_surface_check(cfg: RunConfig, args) -> int:
    S = _load_surface(cfg)
    from .wehler import origin_point

    nonzero = sum(
        1
        for a in range(3)
        for b in range(3)
        for c in range(3)
        if S.coeff(a, b, c) != 0
    )
    _emit(
        {
            "hash": S.hash_hex,
            "nonzero_coefficients": nonzero,
            "origin_on_surface": S.contains(origin_point()),
        }
    )
    return 0


def cmd_point_find(cfg: RunConfig, args) -> int:
    S = _load_surface(cfg)
    if args.fixed is not None:
        pts = S.find_fixed_points(args.fixed, args.bound)
    else:
        pts = S.find_points(args.bound, limit=args.limit)
    _emit(
        [
            {"point": p.to_json(), "height": basis_height(p)}
            for p in pts
        ]
    )
    return 0


def cmd_orbit(cfg: RunConfig, args) -> int:
    S = _load_surface(cfg)
    P = _parse_point(args.point)
    word = _parse_word_arg(args.word) * args.repeat
    res = S.orbit(word, P, guard_bits=cfg.guard_bits)
    _emit(
        {
            "word": word_str(word),
            "points": [p.to_json() for p in res.points],
            "heights": [basis_height(p) for p in res.points],
            "period": list(res.period) if res.period else None,
            "truncated": res.truncated,
            "reason": res.reason,
        }
    )
    return 0


def cmd_height(cfg: RunConfig, args) -> int:
    S = _load_surface(cfg)
    P = _parse_point(args.point)
    bp = _parse_alpha(args.alpha)
    cache = _make_cache(cfg, S)
    hv = canonical_boundary_height(
        S,
        bp,
        P,
        tol=cfg.tol,
        max_letters=cfg.max_letters,
        guard_bits=cfg.guard_bits,
        cache=cache,
    )
    _emit({"alpha": _alpha_summary(bp), "point": P.to_json(), "height": hv.to_json()})
    return 0 if hv.converged else 2


def cmd_vcan(cfg: RunConfig, args) -> int:
    S = _load_surface(cfg)
    P = _parse_point(args.point)
    word = _parse_word_arg(args.word)
    hv = vcan_pairing(
        S, word, P, tol=cfg.tol, n_cap=args.n_cap, guard_bits=cfg.guard_bits
    )
    _emit({"word": word_str(word), "point": P.to_json(), "vcan": hv.to_json()})
    return 0 if hv.converged else 2


def cmd_starset(cfg: RunConfig, args) -> int:
    S = _load_surface(cfg)
    P = _parse_point(args.point)
    cache = _make_cache(cfg, S)
    samples = star_set(
        S,
        P,
        n_samples=cfg.samples,
        tol=cfg.tol,
        max_letters=cfg.max_letters,
        guard_bits=cfg.guard_bits,
        cache=cache,
        workers=args.workers,
    )
    write_star_csv(samples, args.out)
    bad = sum(1 for s in samples if not s.height.converged)
    _emit({"out": args.out, "samples": len(samples), "nonconverged": bad})
    return 0 if bad == 0 else 2


def cmd_total_height(cfg: RunConfig, args) -> int:
    S = _load_surface(cfg)
    P = _parse_point(args.point)
    cache = _make_cache(cfg, S)
    if args.depth > 0:
        rep = invariance_report(
            S,
            P,
            args.depth,
            n_samples=cfg.samples,
            tol=cfg.tol,
            max_letters=cfg.max_letters,
            guard_bits=cfg.guard_bits,
            cache=cache,
            workers=args.workers,
        )
        _emit(rep.to_json())
        return 0 if all(not r.total.flagged for r in rep.rows) else 2
    tot = total_height(
        S,
        P,
        n_samples=cfg.samples,
        tol=cfg.tol,
        max_letters=cfg.max_letters,
        guard_bits=cfg.guard_bits,
        cache=cache,
        workers=args.workers,
    )
    _emit(tot.to_json())
    return 0 if not tot.flagged else 2


def cmd_verify(cfg: RunConfig, args) -> int:
    S = _load_surface(cfg)
    P = _parse_point(args.point)
    names = SUITE_NAMES if args.suite == "all" else (args.suite,)
    results = run_suites(names, surface=S, point=P, tol=cfg.tol)
    _emit(report_json(results))
    failure = first_failure(results)
    if failure is not None:
        suite, check = failure
        sys.stderr.write(f"verification failed: {suite}.{check.name}: {check.detail}\n")
        return 3
    return 0


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--surface", metavar="FILE", default=None, help="surface JSON file (default: built-in seed surface)")
    common.add_argument("--seed", type=int, default=None, help="generate the surface from this seed instead of a file")
    common.add_argument("--tol", type=float, default=1e-4, help="height convergence tolerance (default 1e-4)")
    common.add_argument("--max-letters", type=int, default=60, help="boundary coding depth cap (default 60)")
    common.add_argument("--guard-bits", type=int, default=None, help="coordinate bit guard (default K3H_GUARD_BITS or 200000)")
    common.add_argument("--samples", type=int, default=720, help="boundary grid size (default 720)")
    common.add_argument("--cache-dir", default=None, help="persist orbit segments under this directory")

    ap = argparse.ArgumentParser(prog="k3h", description="canonical heights on the boundary of the ample cone")
    sub = ap.add_subparsers(dest="command", required=True)

    p_surface = sub.add_parser("surface", help="surface file operations")
    surface_sub = p_surface.add_subparsers(dest="surface_command", required=True)
    p_check = surface_sub.add_parser("check", parents=[common], help="validate a surface and print its summary")
    p_check.set_defaults(fn=cmd_surface_check)

    p_point = sub.add_parser("point", help="point search")
    point_sub = p_point.add_subparsers(dest="point_command", required=True)
    p_find = point_sub.add_parser("find", parents=[common], help="enumerate rational points by coordinate height")
    p_find.add_argument("--bound", type=int, required=True, help="coordinate height bound")
    p_find.add_argument("--limit", type=int, default=None, help="stop after this many points")
    p_find.add_argument("--fixed", type=int, default=None, choices=(1, 2, 3), help="search the fixed locus of this involution instead")
    p_find.set_defaults(fn=cmd_point_find)

    p_orbit = sub.add_parser("orbit", parents=[common], help="iterate a word on a point")
    p_orbit.add_argument("--word", required=True, help="comma-separated letters, e.g. 1,2,3")
    p_orbit.add_argument("--point", default=None, help="point spec (JSON file or a:b,c:d,e:f)")
    p_orbit.add_argument("--repeat", type=int, default=1, help="apply the word this many times")
    p_orbit.set_defaults(fn=cmd_orbit)

    p_height = sub.add_parser("height", parents=[common], help="canonical boundary height")
    p_height.add_argument("--alpha", required=True, help="boundary class: cusp:<i>, theta:<radians>, irr:v0,v1,v2")
    p_height.add_argument("--point", default=None, help="point spec (JSON file or a:b,c:d,e:f)")
    p_height.set_defaults(fn=cmd_height)

    p_vcan = sub.add_parser("vcan", parents=[common], help="parabolic height pairing of a word")
    p_vcan.add_argument("--word", required=True, help="parabolic word, e.g. 1,2")
    p_vcan.add_argument("--point", default=None, help="point spec")
    p_vcan.add_argument("--n-cap", type=int, default=DEFAULT_VCAN_CAP, help=f"orbit length cap (default {DEFAULT_VCAN_CAP})")
    p_vcan.set_defaults(fn=cmd_vcan)

    p_star = sub.add_parser("starset", parents=[common], help="star-set scan to CSV")
    p_star.add_argument("--point", default=None, help="point spec")
    p_star.add_argument("--out", required=True, help="CSV output path")
    p_star.add_argument("--workers", type=int, default=1, help="concurrent sample evaluators")
    p_star.set_defaults(fn=cmd_starset)

    p_total = sub.add_parser("total-height", parents=[common], help="total height, optionally over an orbit")
    p_total.add_argument("--point", default=None, help="point spec")
    p_total.add_argument("--depth", type=int, default=0, help="orbit word length for the invariance report (default 0)")
    p_total.add_argument("--workers", type=int, default=1, help="concurrent sample evaluators")
    p_total.set_defaults(fn=cmd_total_height)

    p_verify = sub.add_parser("verify", parents=[common], help="run the property suites")
    p_verify.add_argument("--suite", default="all", choices=SUITE_NAMES + ("all",), help="which suite to run (default all)")
    p_verify.add_argument("--point", default=None, help="point spec for the surface-dependent suites")
    p_verify.set_defaults(fn=cmd_verify)
    return ap


def _config_from_args(args) -> RunConfig:
    guard = args.guard_bits if args.guard_bits is not None else guard_bits_default()
    return RunConfig(
        surface_path=args.surface,
        tol=args.tol,
        max_letters=args.max_letters,
        guard_bits=guard,
        samples=args.samples,
        seed=args.seed,
        cache_dir=args.cache_dir,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return args.fn(cfg, args)
    except VerificationFailure as e:
        sys.stderr.write(f"verification failure: {e}\n")
        return 3
    except NonConvergence as e:
        sys.stderr.write(f"did not converge: {e}\n")
        return 2
    except InputError as e:
        sys.stderr.write(f"error: {e}\n")
        return 1
    except K3HeightsError as e:
        sys.stderr.write(f"error: {e}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
