"""Wehler (2,2,2) surfaces in P1 x P1 x P1 over Q and their three involutions.

A surface is the zero set of a form sum_{a,b,c} K[a][b][c] *
x0^a x1^(2-a) y0^b y1^(2-b) z0^c z1^(2-c).  Each projection forgetting one
factor is a double cover, and swapping the sheets gives an involution
sigma_i computed exactly by a projective Vieta step.  The induced pullback
action on the hyperplane classes h1, h2, h3 is the wall reflection
wehler_generator(i) from the lattice module: applying letters of a word to
a point left to right matches word_matrix of the same word.

All point arithmetic is exact over Z; floats appear only in logarithmic
heights.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

from . import _kernel
from ._ints import as_int, gcd as _gcd, log_int
from .errors import DegenerateFiber, InputError
from .lattice import GramLattice, wehler_generator, wehler_lattice

DEFAULT_GUARD_BITS = 200_000
DEFAULT_COEFF_BOUND = 3


def guard_bits_default() -> int:
    """Integer-size guard for orbits, overridable via K3H_GUARD_BITS."""
    import os

    raw = os.environ.get("K3H_GUARD_BITS")
    if raw is None:
        return DEFAULT_GUARD_BITS
    try:
        val = int(raw)
    except ValueError:
        raise InputError(f"K3H_GUARD_BITS must be an integer, got {raw!r}")
    if val <= 0:
        raise InputError("K3H_GUARD_BITS must be positive")
    return val


@dataclass(frozen=True)
class ProjPoint:
    """Point of P1(Q) as a primitive integer pair [a : b].

    Normalized so gcd(a, b) = 1 and b > 0, or b = 0 and a = 1.
    """

    a: int
    b: int

    def __post_init__(self) -> None:
        a, b = _kernel.normalize_pair(as_int(self.a), as_int(self.b))
        object.__setattr__(self, "a", int(a))
        object.__setattr__(self, "b", int(b))

    @property
    def weil_height(self) -> float:
        """log max(|a|, |b|)."""
        return log_int(max(abs(self.a), abs(self.b)))

    def to_json(self) -> list:
        return [str(self.a), str(self.b)]

    @classmethod
    def from_json(cls, data: Sequence) -> "ProjPoint":
        if len(data) != 2:
            raise InputError(f"projective point needs 2 entries, got {len(data)}")
        return cls(int(data[0]), int(data[1]))

    def __str__(self) -> str:
        return f"[{self.a}:{self.b}]"


@dataclass(frozen=True)
class SurfacePoint:
    """Rational point of P1 x P1 x P1."""

    x: ProjPoint
    y: ProjPoint
    z: ProjPoint

    def coords(self) -> tuple:
        return (self.x.a, self.x.b, self.y.a, self.y.b, self.z.a, self.z.b)

    def factor(self, axis: int) -> ProjPoint:
        return (self.x, self.y, self.z)[axis]

    def to_json(self) -> dict:
        return {"x": self.x.to_json(), "y": self.y.to_json(), "z": self.z.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "SurfacePoint":
        try:
            return cls(
                ProjPoint.from_json(data["x"]),
                ProjPoint.from_json(data["y"]),
                ProjPoint.from_json(data["z"]),
            )
        except KeyError as exc:
            raise InputError(f"point JSON is missing field {exc}")

    @classmethod
    def from_state(cls, state: Sequence) -> "SurfacePoint":
        return cls(
            ProjPoint(int(state[0]), int(state[1])),
            ProjPoint(int(state[2]), int(state[3])),
            ProjPoint(int(state[4]), int(state[5])),
        )

    def state(self) -> tuple:
        """Coordinates as backend integers, for the step kernel."""
        return tuple(as_int(c) for c in self.coords())

    def key(self) -> str:
        return ",".join(str(c) for c in self.coords())

    def __str__(self) -> str:
        return f"({self.x}, {self.y}, {self.z})"


def state_heights(state: Sequence) -> tuple:
    """Per-factor Weil heights (h(x), h(y), h(z)) of a raw state."""
    return (
        log_int(max(abs(state[0]), abs(state[1]))),
        log_int(max(abs(state[2]), abs(state[3]))),
        log_int(max(abs(state[4]), abs(state[5]))),
    )


def basis_height(point, cls: Sequence = (1, 1, 1)) -> float:
    """Height sum cls_i * h(factor i) for a class in h-coordinates.

    `point` may be a SurfacePoint or a raw 6-tuple state.
    """
    state = point.state() if isinstance(point, SurfacePoint) else point
    hx, hy, hz = state_heights(state)
    return float(cls[0]) * hx + float(cls[1]) * hy + float(cls[2]) * hz


def _nested_to_fractions(coeffs) -> tuple:
    rows = []
    if len(coeffs) != 3:
        raise InputError("coefficient array must be 3x3x3")
    for a in range(3):
        if len(coeffs[a]) != 3:
            raise InputError("coefficient array must be 3x3x3")
        row = []
        for b in range(3):
            if len(coeffs[a][b]) != 3:
                raise InputError("coefficient array must be 3x3x3")
            entry = []
            for c in range(3):
                v = coeffs[a][b][c]
                try:
                    entry.append(Fraction(v))
                except (ValueError, TypeError, ZeroDivisionError):
                    raise InputError(f"bad coefficient at ({a},{b},{c}): {v!r}")
            row.append(tuple(entry))
        rows.append(tuple(row))
    return tuple(rows)


@dataclass(frozen=True)
class WehlerSurface:
    """A (2,2,2) surface with exact rational coefficients.

    Internally the form is cleared to a primitive integer model (common
    denominator, content divided out, first nonzero coefficient positive);
    the zero set is unchanged and all point operations use that model.
    """

    coeffs: tuple
    _flat: tuple = field(init=False, repr=False, compare=False)
    _flat_backend: tuple = field(init=False, repr=False, compare=False)
    hash_hex: str = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        coeffs = _nested_to_fractions(self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        denom = 1
        for a in range(3):
            for b in range(3):
                for c in range(3):
                    q = coeffs[a][b][c].denominator
                    denom = denom * q // _gcd(denom, q)
        flat = [
            int(coeffs[a][b][c] * denom)
            for a in range(3)
            for b in range(3)
            for c in range(3)
        ]
        content = 0
        for v in flat:
            content = _gcd(content, v)
        if content == 0:
            raise InputError("the zero form does not define a surface")
        flat = [v // content for v in flat]
        lead = next(v for v in flat if v != 0)
        if lead < 0:
            flat = [-v for v in flat]
        object.__setattr__(self, "_flat", tuple(int(v) for v in flat))
        object.__setattr__(self, "_flat_backend", tuple(as_int(v) for v in flat))
        digest = hashlib.sha256(",".join(str(v) for v in flat).encode()).hexdigest()
        object.__setattr__(self, "hash_hex", digest)

    @property
    def lattice(self) -> GramLattice:
        return wehler_lattice()

    def coeff(self, a: int, b: int, c: int) -> int:
        """Coefficient of x0^a x1^(2-a) y0^b y1^(2-b) z0^c z1^(2-c) in the
        integer model."""
        return self._flat[9 * a + 3 * b + c]

    def to_json(self) -> dict:
        return {
            "coeffs": [
                [[str(self.coeff(a, b, c)) for c in range(3)] for b in range(3)]
                for a in range(3)
            ]
        }

    @classmethod
    def from_json(cls, data: dict) -> "WehlerSurface":
        if "coeffs" not in data:
            raise InputError("surface JSON needs a 'coeffs' field")
        return cls(data["coeffs"])

    def form_value(self, point: SurfacePoint):
        return _kernel.eval_form(self._flat_backend, *point.state())

    def contains(self, point: SurfacePoint) -> bool:
        return self.form_value(point) == 0

    def require_contains(self, point: SurfacePoint) -> None:
        if not self.contains(point):
            raise InputError(f"point {point} is not on the surface")

    def fiber_coefficients(self, i: int, point: SurfacePoint) -> tuple:
        """(A, B, C) of the fiber quadratic met by sigma_i at `point`."""
        axis = _check_letter(i)
        s = point.state()
        u, v = _base_pairs(s, axis)
        A, B, C = _kernel.fiber_coeffs(self._flat_backend, axis, *u, *v)
        return int(A), int(B), int(C)

    def ns_action(self, i: int) -> tuple:
        """Pullback of sigma_i on NS in the h-basis (column convention)."""
        return wehler_generator(i)

    def involution(self, i: int, point: SurfacePoint) -> SurfacePoint:
        """sigma_i(point), exactly."""
        axis = _check_letter(i)
        self.require_contains(point)
        state = _kernel.step(self._flat_backend, axis, *point.state())
        if state is None:
            raise DegenerateFiber(axis, _base_str(point.state(), axis))
        return SurfacePoint.from_state(state)

    def apply_word(self, word: Sequence, point: SurfacePoint) -> SurfacePoint:
        """Apply the letters of `word` to `point`, left to right."""
        res = self.orbit(word, point, detect_period=False)
        if res.truncated:
            raise InputError(
                f"orbit exceeded the integer guard after {len(res.points) - 1} letters"
            )
        return res.points[-1]

    def orbit(
        self,
        word: Sequence,
        point: SurfacePoint,
        guard_bits: Optional[int] = None,
        cache=None,
        detect_period: bool = True,
    ) -> "OrbitResult":
        self.require_contains(point)
        states, period, truncated, reason = orbit_states(
            self,
            tuple(word),
            point.state(),
            guard_bits=guard_bits,
            cache=cache,
            detect_period=detect_period,
            point_key=point.key(),
        )
        return OrbitResult(
            points=[SurfacePoint.from_state(s) for s in states],
            period=period,
            truncated=truncated,
            reason=reason,
        )

    def find_points(self, bound: int, limit: Optional[int] = None) -> list:
        """Rational points with x and y coordinates at most `bound`.

        Enumerates primitive pairs for the first two factors and solves the
        z fiber exactly; fibers that vanish identically are skipped.  The
        result is sorted by basis height, then coordinates.
        """
        if bound < 1:
            raise InputError("search bound must be at least 1")
        K = self._flat_backend
        found = set()
        for x0, x1 in _primitive_pairs(bound):
            for y0, y1 in _primitive_pairs(bound):
                A, B, C = _kernel.fiber_coeffs(
                    K, 2, as_int(x0), as_int(x1), as_int(y0), as_int(y1)
                )
                for z0, z1 in _quadratic_roots(A, B, C):
                    found.add(
                        SurfacePoint(
                            ProjPoint(x0, x1), ProjPoint(y0, y1), ProjPoint(z0, z1)
                        )
                    )
        out = sorted(found, key=lambda p: (basis_height(p), p.coords()))
        if limit is not None:
            out = out[:limit]
        return out

    def find_fixed_points(self, i: int, bound: int) -> list:
        """Points fixed by sigma_i with base coordinates at most `bound`.

        These sit where the fiber quadratic has a double root.
        """
        axis = _check_letter(i)
        found = set()
        for u0, u1 in _primitive_pairs(bound):
            for v0, v1 in _primitive_pairs(bound):
                A, B, C = _kernel.fiber_coeffs(
                    self._flat_backend, axis, as_int(u0), as_int(u1), as_int(v0), as_int(v1)
                )
                t = _double_root(A, B, C)
                if t is None:
                    continue
                pair = [None, None, None]
                pair[axis] = ProjPoint(t[0], t[1])
                rest = [j for j in range(3) if j != axis]
                pair[rest[0]] = ProjPoint(u0, u1)
                pair[rest[1]] = ProjPoint(v0, v1)
                found.add(SurfacePoint(pair[0], pair[1], pair[2]))
        return sorted(found, key=lambda p: (basis_height(p), p.coords()))


@dataclass
class OrbitResult:
    """Points p_0, .., p_m visited while applying a word letter by letter.

    `period` is (entry, length) when p_{entry+length} = p_{entry} was hit;
    `truncated` means the integer guard stopped the run early.  `reason` is
    one of "completed", "periodic", "guard".
    """

    points: list
    period: Optional[tuple]
    truncated: bool
    reason: str

    def to_json(self) -> dict:
        return {
            "points": [p.to_json() for p in self.points],
            "period": list(self.period) if self.period else None,
            "truncated": self.truncated,
            "reason": self.reason,
        }


def iter_orbit(
    surface: WehlerSurface,
    letters: Sequence[int],
    state: tuple,
    cache=None,
    point_key: Optional[str] = None,
) -> Iterator[tuple]:
    """Lazily yield (n, state) after each letter of the word.

    Cached prefixes are replayed verbatim, so values never depend on the
    cache being present.  The caller owns guard and period bookkeeping.
    """
    for letter in letters:
        _check_letter(letter)
    K = surface._flat_backend
    use_cache = cache is not None and point_key is not None
    cached = cache.prefix_states(point_key, letters) if use_cache else []
    for n, letter in enumerate(letters, start=1):
        if n <= len(cached):
            state = cached[n - 1]
        else:
            prev = state
            state = _kernel.step(K, letter - 1, *prev)
            if state is None:
                raise DegenerateFiber(letter - 1, _base_str(prev, letter - 1))
            if use_cache:
                cache.store(point_key, letters[:n], state)
        yield n, state


def orbit_states(
    surface: WehlerSurface,
    letters: tuple,
    state: tuple,
    guard_bits: Optional[int] = None,
    cache=None,
    detect_period: bool = True,
    point_key: Optional[str] = None,
):
    """Raw orbit loop on backend-integer states.

    Returns (states, period, truncated, reason) with states[0] the input.
    """
    if guard_bits is None:
        guard_bits = guard_bits_default()
    states = [state]
    seen = {state: 0} if detect_period else None
    truncated = False
    reason = "completed"
    for n, nxt in iter_orbit(surface, tuple(letters), state, cache, point_key):
        if detect_period and nxt in seen:
            return states, (seen[nxt], n - seen[nxt]), False, "periodic"
        states.append(nxt)
        if detect_period:
            seen[nxt] = n
        if n < len(letters) and _state_bits(nxt) > guard_bits:
            truncated = True
            reason = "guard"
            break
    return states, None, truncated, reason


def random_surface(
    seed: int, coeff_bound: int = DEFAULT_COEFF_BOUND, fix_origin: bool = True
) -> WehlerSurface:
    """Surface with small random integer coefficients, reproducible by seed.

    With fix_origin (default) the coefficients of x1^2 y1^2 z1^2 and of the
    three monomials x0 x1 y1^2 z1^2, x1^2 y0 y1 z1^2, x1^2 y1^2 z0 z1 are
    forced to zero and the squares x0^2 y1^2 z1^2 etc. are kept nonzero.
    Then P0 = ([0:1], [0:1], [0:1]) lies on the surface and every fiber
    through it has a double root there, so all three involutions fix P0.
    """
    rng = random.Random(seed)
    coeffs = [
        [[rng.randint(-coeff_bound, coeff_bound) for _ in range(3)] for _ in range(3)]
        for _ in range(3)
    ]
    if fix_origin:
        coeffs[0][0][0] = 0
        coeffs[1][0][0] = 0
        coeffs[0][1][0] = 0
        coeffs[0][0][1] = 0
        for a, b, c in ((2, 0, 0), (0, 2, 0), (0, 0, 2)):
            while coeffs[a][b][c] == 0:
                coeffs[a][b][c] = rng.randint(-coeff_bound, coeff_bound)
    return WehlerSurface(coeffs)


def origin_point() -> SurfacePoint:
    """([0:1], [0:1], [0:1]); on every fix_origin random surface."""
    return SurfacePoint(ProjPoint(0, 1), ProjPoint(0, 1), ProjPoint(0, 1))


def _check_letter(i) -> int:
    if i not in (1, 2, 3):
        raise InputError(f"involution index must be 1, 2 or 3, got {i!r}")
    return i - 1


def _base_pairs(state: Sequence, axis: int) -> tuple:
    pairs = ((state[0], state[1]), (state[2], state[3]), (state[4], state[5]))
    rest = [pairs[j] for j in range(3) if j != axis]
    return rest[0], rest[1]


def _base_str(state: Sequence, axis: int) -> str:
    u, v = _base_pairs(state, axis)
    return f"[{u[0]}:{u[1]}] x [{v[0]}:{v[1]}]"


def _state_bits(state: Sequence) -> int:
    return max(abs(c).bit_length() for c in state)


def _primitive_pairs(bound: int) -> Iterator[tuple]:
    yield (1, 0)
    for b in range(1, bound + 1):
        for a in range(-bound, bound + 1):
            if _gcd(a, b) == 1:
                yield (a, b)


def _quadratic_roots(A, B, C) -> list:
    """Rational roots of A t0^2 + B t0 t1 + C t1^2 as normalized pairs.

    An identically zero quadratic yields no roots here (the whole fiber is
    on the surface and cannot be enumerated).
    """
    if A == 0:
        if B == 0:
            if C == 0:
                return []
            return [(1, 0)]
        return [(1, 0), _kernel.normalize_pair(-C, B)]
    disc = B * B - 4 * A * C
    if disc < 0:
        return []
    s = math.isqrt(disc)
    if s * s != disc:
        return []
    r1 = _kernel.normalize_pair(-B + s, 2 * A)
    if s == 0:
        return [r1]
    return [r1, _kernel.normalize_pair(-B - s, 2 * A)]


def _double_root(A, B, C) -> Optional[tuple]:
    if A == 0:
        if B == 0 and C != 0:
            return (1, 0)
        return None
    disc = B * B - 4 * A * C
    if disc != 0:
        return None
    return _kernel.normalize_pair(-B, 2 * A)
