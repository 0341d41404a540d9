"""The hyperbolic plane of a rank-3 lattice and its boundary coding.

Diagonal coordinates: columns of T are (w0, b1, b2) with T^t G T =
diag(1, -1, -1), where w0 is the normalized ample ray, b1 the normalized
component of h1 orthogonal to the ample ray and b2 the normalized component
of h2 orthogonal to both.  A class v has diagonal coordinates
x = (x0, x1, x2) with mass(v) = x0, and boundary rays are parametrized by
the angle of (x1, x2).  For the Wehler lattice the three cusps h1, h2, h3
sit at angles 0, 2pi/3, 4pi/3.

The chamber is the set pairing >= 0 against all three walls; reduction
repeatedly reflects in the wall of most negative pairing (ties to the
smallest index), which strictly decreases mass.  The letter sequence of a
reduction is the coding of the target ray.  The reduction loop is exact
rational arithmetic throughout; rays from angles are built at `bits`
binary digits (default 240) and converted to exact fractions, so the
coding is reproducible and the depth is limited only by that precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from ._ints import HAVE_GMP
from .errors import InputError, NonConvergence
from .lattice import (
    GramLattice,
    WEHLER_WALLS,
    mat_vec,
    parse_word,
    wehler_generator,
    wehler_lattice,
    word_matrix,
    word_str,
)

DEFAULT_RAY_BITS = 240
DEFAULT_MAX_LETTERS = 60
CUSP_ANGLE_TOL = 1e-9
CUSP_HEIGHT_BOUND = 10**6
EXCURSION_MIN_LEN = 4
TWO_PI = 2.0 * math.pi

CUSPS = ((1, 0, 0), (0, 1, 0), (0, 0, 1))

_diag_cache: dict = {}


def _exact_orthogonal_basis(lat: GramLattice):
    """Gram-Schmidt of (L, h1, h2, ...) over Q.

    Returns (vectors, norms): u0 = L with <u0, u0> = norms[0] > 0 and
    spacelike u_i with -<u_i, u_i> = norms[i] > 0.
    """
    n = lat.rank
    basis = [tuple(Fraction(1 if i == j else 0) for j in range(n)) for i in range(n)]
    vecs = [tuple(Fraction(x) for x in lat.ample)]
    signs = [1]
    for e in basis:
        if len(vecs) == n:
            break
        v = list(e)
        for u, sgn in zip(vecs, signs):
            c = Fraction(lat.pair(e, u), lat.pair(u, u))
            v = [x - c * y for x, y in zip(v, u)]
        if any(x != 0 for x in v):
            vecs.append(tuple(v))
            signs.append(-1)
    if len(vecs) != n:
        raise InputError("basis failed to span the lattice")
    norms = [sgn * lat.pair(u, u) for u, sgn in zip(vecs, signs)]
    if any(q <= 0 for q in norms):
        raise InputError("form is not of signature (1, rank-1)")
    return vecs, norms


def _sqrt_fraction(q: Fraction, bits: Optional[int]):
    if bits is None:
        return math.sqrt(float(q))
    if not HAVE_GMP:
        return Fraction(math.sqrt(float(q)))
    import gmpy2

    ctx = gmpy2.context(precision=bits)
    root = ctx.sqrt(gmpy2.mpq(q.numerator, q.denominator))
    return Fraction(*root.as_integer_ratio())


def diagonalize_form(lat: Optional[GramLattice] = None, bits: Optional[int] = None):
    """T with T^t G T = diag(1, -1, ..., -1), columns (w0, b1, ...).

    With bits=None the entries are floats; otherwise exact fractions
    approximating the real matrix to `bits` binary digits.
    """
    if lat is None:
        lat = wehler_lattice()
    key = (lat, bits)
    if key in _diag_cache:
        return _diag_cache[key]
    vecs, norms = _exact_orthogonal_basis(lat)
    cols = []
    for u, q in zip(vecs, norms):
        r = _sqrt_fraction(q, bits)
        if bits is None:
            cols.append(tuple(float(x) / r for x in u))
        else:
            cols.append(tuple(Fraction(x) / r for x in u))
    T = tuple(tuple(cols[j][i] for j in range(len(cols))) for i in range(lat.rank))
    _diag_cache[key] = T
    return T


def to_diag(v: Sequence, lat: Optional[GramLattice] = None) -> tuple:
    """Diagonal coordinates x of v: x0 the mass, (x1, x2) the space part."""
    if lat is None:
        lat = wehler_lattice()
    T = diagonalize_form(lat)
    n = lat.rank
    cols = [tuple(T[i][j] for i in range(n)) for j in range(n)]
    x = [lat.pair_float(v, cols[0])]
    for j in range(1, n):
        x.append(-lat.pair_float(v, cols[j]))
    return tuple(x)


def from_diag(x: Sequence, lat: Optional[GramLattice] = None) -> tuple:
    if lat is None:
        lat = wehler_lattice()
    T = diagonalize_form(lat)
    n = lat.rank
    return tuple(sum(T[i][j] * float(x[j]) for j in range(n)) for i in range(n))


def angle_of(v: Sequence, lat: Optional[GramLattice] = None) -> float:
    """Boundary angle of the ray through v, in [0, 2pi)."""
    x = to_diag(v, lat)
    if x[1] == 0.0 and x[2] == 0.0:
        raise InputError("the ample ray has no boundary angle")
    return math.atan2(x[2], x[1]) % TWO_PI


def angular_distance(u: Sequence, v: Sequence, lat: Optional[GramLattice] = None) -> float:
    """|angle(u) - angle(v)| folded into [0, pi]."""
    d = abs(angle_of(u, lat) - angle_of(v, lat)) % TWO_PI
    return min(d, TWO_PI - d)


def null_ray(theta: float, lat: Optional[GramLattice] = None) -> tuple:
    """Float boundary ray at angle theta, mass 1."""
    return from_diag((1.0, math.cos(theta), math.sin(theta)), lat)


def exact_ray(theta: float, bits: int = DEFAULT_RAY_BITS, lat: Optional[GramLattice] = None) -> tuple:
    """Exact-fraction ray at angle theta, built at `bits` binary digits.

    The result is pair-normalized: <L, v> = 1.  Its defect from the null
    cone is of size 2^-bits and invariant under the reduction loop, which
    is what bounds the usable coding depth.
    """
    if lat is None:
        lat = wehler_lattice()
    if not HAVE_GMP:
        v = null_ray(theta, lat)
        vf = tuple(Fraction(x) for x in v)
    else:
        import gmpy2

        ctx = gmpy2.context(precision=bits)
        th = gmpy2.mpfr(theta, bits)
        x = (1, Fraction(*ctx.cos(th).as_integer_ratio()), Fraction(*ctx.sin(th).as_integer_ratio()))
        T = diagonalize_form(lat, bits=bits)
        n = lat.rank
        vf = tuple(sum(T[i][j] * x[j] for j in range(n)) for i in range(n))
    d = lat.pair(tuple(Fraction(x) for x in lat.ample), vf)
    if d <= 0:
        raise InputError("ray has nonpositive mass")
    return tuple(x / d for x in vf)


@dataclass(frozen=True)
class BoundaryPoint:
    """A point of the boundary circle: a cusp class or an irrational ray.

    Cusp: vector is the primitive integral null class E and the point
    stands for scale * E.  Irrational: vector is an exact rational ray
    pair-normalized to <L, v> = 1, with scale carrying the original
    magnitude, so the point always stands for scale * vector.
    """

    kind: str
    vector: tuple
    scale: object = 1

    def __post_init__(self):
        if self.kind not in ("cusp", "irrational"):
            raise InputError(f"boundary point kind must be cusp or irrational: {self.kind!r}")

    @classmethod
    def cusp_index(cls, i: int) -> "BoundaryPoint":
        if i not in (1, 2, 3):
            raise InputError(f"cusp index must be 1, 2 or 3, got {i!r}")
        return cls("cusp", CUSPS[i - 1], 1)

    @classmethod
    def cusp(cls, E: Sequence, scale=1, lat: Optional[GramLattice] = None) -> "BoundaryPoint":
        if lat is None:
            lat = wehler_lattice()
        Ef = [Fraction(x) for x in E]
        if lat.pair(Ef, Ef) != 0:
            raise InputError(f"cusp class {tuple(E)} is not null")
        from .lattice import _primitivize

        prim = _primitivize(tuple(Ef))
        if lat.pair(lat.ample, prim) < 0:
            prim = tuple(-x for x in prim)
        ratio = next(Fraction(a) / b for a, b in zip(Ef, prim) if b != 0)
        return cls("cusp", prim, Fraction(scale) * ratio)

    @classmethod
    def from_angle(cls, theta: float, bits: int = DEFAULT_RAY_BITS) -> "BoundaryPoint":
        return cls("irrational", exact_ray(theta, bits))

    @classmethod
    def from_vector(
        cls, v: Sequence, cusp_height_bound: int = CUSP_HEIGHT_BOUND
    ) -> "BoundaryPoint":
        """Classify a rational (or float) vector on or near the null cone.

        Exactly-null vectors proportional to an integral class of height at
        most `cusp_height_bound` become cusps; everything else is treated
        as an irrational direction.
        """
        lat = wehler_lattice()
        vf = tuple(Fraction(x) for x in v)
        d = lat.pair(tuple(Fraction(x) for x in lat.ample), vf)
        if d <= 0:
            raise InputError("boundary vector must have positive mass")
        if lat.pair(vf, vf) == 0:
            from .lattice import _primitivize

            prim = _primitivize(vf)
            if lat.pair(lat.ample, prim) < 0:
                prim = tuple(-x for x in prim)
            if max(abs(int(x)) for x in prim) <= cusp_height_bound:
                ratio = next(Fraction(a) / b for a, b in zip(vf, prim) if b != 0)
                return cls("cusp", prim, ratio)
        return cls("irrational", tuple(x / d for x in vf), d)

    @property
    def theta(self) -> float:
        return angle_of(self.vector)

    def class_vector(self) -> tuple:
        """The represented class: scale * vector for cusps."""
        if self.kind == "cusp":
            return tuple(Fraction(self.scale) * x for x in self.vector)
        return self.vector

    def to_json(self) -> dict:
        if self.kind == "cusp":
            return {
                "kind": "cusp",
                "E": [int(x) for x in self.vector],
                "scale": str(Fraction(self.scale)),
            }
        return {
            "kind": "irrational",
            "dir": [str(Fraction(x)) for x in self.vector],
            "scale": str(Fraction(self.scale)),
        }

    @classmethod
    def from_json(cls, data: dict) -> "BoundaryPoint":
        kind = data.get("kind")
        if kind == "cusp":
            return cls.cusp(
                [int(x) for x in data["E"]], Fraction(str(data.get("scale", "1")))
            )
        if kind == "irrational":
            return cls(
                "irrational",
                tuple(Fraction(s) for s in data["dir"]),
                Fraction(str(data.get("scale", "1"))),
            )
        raise InputError(f"unknown boundary point kind {kind!r}")


@dataclass(frozen=True)
class GeneratorWord:
    """A word in the three involutions with its termination status.

    terminated is one of "cusp" (angular cusp detection fired),
    "exact_cusp" (reduction hit a cusp class exactly), "interior" (the
    vector reduced into the open chamber: the input was not a boundary
    ray at the working precision), "max_letters".  Excursions are the
    maximal two-letter alternating runs of length >= 4, recorded as
    (start, length, (i, j)).
    """

    letters: tuple
    terminated: str
    excursions: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(self.letters))
        object.__setattr__(self, "excursions", annotate_excursions(self.letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return word_str(self.letters)

    @classmethod
    def from_str(cls, text: str, terminated: str = "max_letters") -> "GeneratorWord":
        return cls(parse_word(text), terminated)

    def to_json(self) -> dict:
        return {
            "letters": word_str(self.letters),
            "terminated": self.terminated,
            "excursions": [
                {"start": s, "length": n, "pair": list(p)} for s, n, p in self.excursions
            ],
        }


def annotate_excursions(letters: Sequence[int], min_len: int = EXCURSION_MIN_LEN) -> tuple:
    """Maximal alternating two-letter runs of length >= min_len."""
    out = []
    n = len(letters)
    s = 0
    while s + 1 < n:
        if letters[s] == letters[s + 1]:
            s += 1
            continue
        e = s + 1
        while e + 1 < n and letters[e + 1] == letters[e - 1]:
            e += 1
        if e - s + 1 >= min_len:
            out.append((s, e - s + 1, (letters[s], letters[s + 1])))
        s = e
    return tuple(out)


@dataclass(frozen=True)
class CodedRay:
    """Result of coding a boundary ray: the word, the classified target,
    and the exact reduced vector the loop stopped on."""

    word: GeneratorWord
    boundary: BoundaryPoint
    final_vector: tuple


def _wall_pairings(lat: GramLattice, v: Sequence) -> list:
    return [lat.pair(v, m) for m in WEHLER_WALLS]


def reduce_to_chamber(v: Sequence, max_letters: int = 1000):
    """Exact chamber reduction of a rational class of positive mass.

    Returns (w, letters) with w = sigma_{letters[-1]} ... sigma_{letters[0]} v
    in the chamber, so v = word_matrix(letters) @ w.  Raises NonConvergence
    if max_letters reflections do not reach the chamber.
    """
    lat = wehler_lattice()
    w = tuple(Fraction(x) for x in v)
    if lat.pair(tuple(Fraction(x) for x in lat.ample), w) <= 0:
        raise InputError("chamber reduction needs a class of positive mass")
    letters = []
    for _ in range(max_letters):
        pairings = _wall_pairings(lat, w)
        worst = min(range(3), key=lambda i: (pairings[i], i))
        if pairings[worst] >= 0:
            w = tuple(int(x) if x.denominator == 1 else x for x in w)
            return w, tuple(letters)
        w = mat_vec(wehler_generator(worst + 1), w)
        letters.append(worst + 1)
    raise NonConvergence(f"no chamber reduction within {max_letters} reflections")


def code_boundary_ray(
    target,
    max_letters: int = DEFAULT_MAX_LETTERS,
    cusp_tol: float = CUSP_ANGLE_TOL,
    cusp_height_bound: int = CUSP_HEIGHT_BOUND,
) -> CodedRay:
    """Code a boundary ray as a word in the reflection generators.

    `target` is a BoundaryPoint, an angle's exact ray, or any sequence of
    rationals/floats with positive mass.  Exact cusp classes are reduced
    exactly.  Inexact rays are reduced until either the angular distance of
    the running vector to one of the chamber cusps drops below cusp_tol
    (and the implied cusp class word_matrix(letters) @ h_i has coordinates
    at most cusp_height_bound: terminated "cusp"), or max_letters is
    reached, or the vector lands in the chamber ("exact_cusp" on a cusp,
    "interior" otherwise: the input was not a boundary ray at the working
    precision).
    """
    lat = wehler_lattice()
    if isinstance(target, BoundaryPoint):
        if target.kind == "cusp":
            w, letters = reduce_to_chamber(target.vector, max_letters=max(max_letters, 1000))
            cusp_i = _exact_cusp_index(w)
            if cusp_i is None:
                raise NonConvergence("cusp class failed to reduce to a chamber cusp")
            return CodedRay(
                word=GeneratorWord(letters, "exact_cusp"),
                boundary=target,
                final_vector=w,
            )
        vec = target.vector
    else:
        vec = tuple(Fraction(x) for x in target)
    w = tuple(Fraction(x) for x in vec)
    pt = lat.pair(tuple(Fraction(x) for x in lat.ample), w)
    if pt <= 0:
        raise InputError("boundary coding needs a ray of positive mass")
    cusp_angles = [angle_of(c) for c in CUSPS]
    letters: list = []
    terminated = "max_letters"
    while True:
        theta_w = angle_of(w)
        for i in range(3):
            d = abs(theta_w - cusp_angles[i]) % TWO_PI
            if min(d, TWO_PI - d) < cusp_tol:
                E = mat_vec(word_matrix(letters), CUSPS[i])
                if max(abs(int(x)) for x in E) <= cusp_height_bound:
                    # scale matched through the ample pairing so the cusp
                    # stands for the same class as the input ray
                    pe = lat.pair(tuple(Fraction(x) for x in lat.ample), E)
                    return CodedRay(
                        word=GeneratorWord(tuple(letters), "cusp"),
                        boundary=BoundaryPoint.cusp(E, scale=Fraction(pt) / pe),
                        final_vector=w,
                    )
        if len(letters) >= max_letters:
            terminated = "max_letters"
            break
        pairings = _wall_pairings(lat, w)
        worst = min(range(3), key=lambda i: (pairings[i], i))
        if pairings[worst] >= 0:
            cusp_i = _exact_cusp_index(w)
            terminated = "exact_cusp" if cusp_i is not None else "interior"
            break
        w = mat_vec(wehler_generator(worst + 1), w)
        letters.append(worst + 1)
    word = GeneratorWord(tuple(letters), terminated)
    if terminated == "exact_cusp":
        ci = _exact_cusp_index(w)
        E = mat_vec(word_matrix(letters), CUSPS[ci])
        boundary = BoundaryPoint.cusp(E, scale=w[ci])
    else:
        boundary = BoundaryPoint("irrational", tuple(Fraction(x) for x in vec))
    return CodedRay(word=word, boundary=boundary, final_vector=tuple(w))


def _exact_cusp_index(w: Sequence) -> Optional[int]:
    nz = [i for i, x in enumerate(w) if x != 0]
    if len(nz) == 1 and w[nz[0]] > 0:
        return nz[0]
    return None


@dataclass(frozen=True)
class DisplacementFit:
    """Per-letter displacements along the coded geodesic and a linear fit.

    lams[k] is the parameter advance of step k; delta is the mean advance
    (t_N - t_0) / N and c0 the largest deviation |t_k - t_0 - k delta|.
    """

    lams: tuple
    delta: float
    c0: float


def displacement_sequence(letters: Sequence[int], target=None) -> DisplacementFit:
    """Project the word path onto the target geodesic and difference it.

    The path points are q_k = word_matrix(letters[:k]) @ w0; they track the
    geodesic from w0 toward the coded ray.  Without an explicit target the
    deepest path point is pushed to the null cone and used as the ideal
    endpoint.
    """
    lat = wehler_lattice()
    letters = tuple(letters)
    if not letters:
        raise InputError("displacement sequence needs a nonempty word")
    n = lat.rank
    w0 = tuple(x / lat.sqrt_ll for x in map(float, lat.ample))
    path = [w0]
    M = None
    for k, letter in enumerate(letters):
        M = word_matrix(letters[: k + 1])
        path.append(tuple(map(float, mat_vec(M, lat.ample))))
    path = [tuple(x / lat.sqrt_ll for x in p) for p in path]
    if target is None:
        x = to_diag(path[-1], lat)
        r = math.hypot(x[1], x[2])
        alpha = from_diag((r, x[1], x[2]), lat)
    elif isinstance(target, BoundaryPoint):
        alpha = tuple(map(float, target.vector))
    else:
        alpha = tuple(map(float, target))
    ab = lat.pair_float(alpha, w0)
    if ab <= 0:
        raise InputError("geodesic endpoint must pair positively with the basepoint")
    u = tuple(a / ab - b for a, b in zip(alpha, w0))
    ts = []
    for p in path:
        pb = lat.pair_float(p, w0)
        pu = lat.pair_float(p, u)
        ratio = max(-1.0 + 1e-15, min(1.0 - 1e-15, -pu / pb))
        ts.append(math.atanh(ratio))
    lams = tuple(b - a for a, b in zip(ts, ts[1:]))
    delta = (ts[-1] - ts[0]) / len(lams)
    c0 = max(abs(t - ts[0] - k * delta) for k, t in enumerate(ts))
    return DisplacementFit(lams=lams, delta=delta, c0=c0)


def hyp_distance(u: Sequence, v: Sequence, lat: Optional[GramLattice] = None) -> float:
    """Hyperbolic distance between the rays of two timelike classes."""
    if lat is None:
        lat = wehler_lattice()
    uu = lat.pair_float(u, u)
    vv = lat.pair_float(v, v)
    uv = lat.pair_float(u, v)
    if uu <= 0 or vv <= 0 or uv <= 0:
        raise InputError("hyperbolic distance needs timelike classes in the same cone")
    return math.acosh(max(1.0, uv / math.sqrt(uu * vv)))


def op_norm(M, lat: Optional[GramLattice] = None) -> float:
    """exp of the displacement of the basepoint: exp d(w0, M w0)."""
    if lat is None:
        lat = wehler_lattice()
    return math.exp(hyp_distance(lat.ample, mat_vec(M, lat.ample), lat))


def horoball_depth(v: Sequence, E: Sequence, c: Optional[float] = None,
                   lat: Optional[GramLattice] = None) -> float:
    """Depth of the unit timelike ray of v inside the horoball at E.

    The horoball is <w, E> <= c with w the unit representative; depth
    log(c / <v_unit, E>) is positive inside.  Default c = 0.05 <w0, E>.
    """
    if lat is None:
        lat = wehler_lattice()
    vv = lat.pair_float(v, v)
    if vv <= 0:
        raise InputError("horoball depth needs a timelike class")
    mass0 = lat.pair_float(lat.ample, E) / lat.sqrt_ll
    if mass0 <= 0:
        raise InputError("cusp class must have positive mass")
    if c is None:
        c = 0.05 * mass0
    val = lat.pair_float(v, E) / math.sqrt(vv)
    return math.log(c / val)
