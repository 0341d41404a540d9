"""Rank-rho hyperbolic lattices of signature (1, rho-1) and their isometries.

Conventions used across the package:

* Classes in the fixed basis (h1, ..., h_rho) are column vectors of exact
  numbers (int or Fraction); an isometry acts as ``v -> M @ v``.
* The pairing is ``<u, v> = u^T G v`` with G the Gram matrix.
* The basepoint is the normalized ample ray ``w0 = L / sqrt(<L, L>)`` with
  ``L = (1, ..., 1)``; the mass of a class is ``<w0, v>``.
* For a word in the generating involutions the associated matrix is the
  product of generator matrices in word order.  Points are acted on
  left-to-right (first letter first), so the word matrix is the pullback of
  the word map; every telescoping formula in `heights` relies on this.

All lattice arithmetic is exact; floats appear only in spectral data
(hyperbolic eigenvalues and eigenrays) and in mass/distance values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .errors import InputError, NoIntegralFixedNullVector, NonParabolicInput, NotIsometry

Number = Union[int, Fraction]
Vector = tuple
Matrix = tuple

WEHLER_GRAM = ((0, 2, 2), (2, 0, 2), (2, 2, 0))

# Chamber wall normals for the Wehler lattice, signs fixed so the basepoint
# pairs positively with each; the associated reflections generate the
# involution action on the Neron-Severi group.
WEHLER_WALLS = ((-1, 1, 1), (1, -1, 1), (1, 1, -1))

SPECTRAL_TOL = 1e-9
DEFAULT_FINITE_ORDER_BOUND = 24


# ---------------------------------------------------------------------------
# exact matrix/vector helpers (small dense, int or Fraction entries)

def mat_vec(M: Matrix, v: Sequence[Number]) -> Vector:
    return tuple(sum(row[j] * v[j] for j in range(len(v))) for row in M)


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    n = len(A)
    return tuple(
        tuple(sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n))
        for i in range(n)
    )


def mat_identity(n: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def mat_pow(M: Matrix, k: int) -> Matrix:
    if k < 0:
        raise InputError("negative matrix power not supported here")
    R = mat_identity(len(M))
    base = M
    while k:
        if k & 1:
            R = mat_mul(R, base)
        base = mat_mul(base, base)
        k >>= 1
    return R


def mat_transpose(M: Matrix) -> Matrix:
    n = len(M)
    return tuple(tuple(M[j][i] for j in range(n)) for i in range(n))


def vec_scale(v: Sequence[Number], c: Number) -> Vector:
    return tuple(c * x for x in v)


def vec_add(u: Sequence[Number], v: Sequence[Number]) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u: Sequence[Number], v: Sequence[Number]) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def _primitivize(v: Sequence[Fraction]) -> Vector:
    """Scale a rational vector to a primitive integer vector (gcd 1)."""
    fr = [Fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = math.gcd(g, abs(x))
    if g == 0:
        raise InputError("zero vector cannot be primitivized")
    return tuple(x // g for x in ints)


def _rational_kernel(M: Matrix) -> list:
    """Exact kernel basis of a square rational matrix (list of tuples)."""
    n = len(M)
    A = [[Fraction(M[i][j]) for j in range(n)] for i in range(n)]
    pivots = []
    row = 0
    for col in range(n):
        p = None
        for r in range(row, n):
            if A[r][col] != 0:
                p = r
                break
        if p is None:
            continue
        A[row], A[p] = A[p], A[row]
        inv = 1 / A[row][col]
        A[row] = [x * inv for x in A[row]]
        for r in range(n):
            if r != row and A[r][col] != 0:
                c = A[r][col]
                A[r] = [a - c * b for a, b in zip(A[r], A[row])]
        pivots.append(col)
        row += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -A[r][fc]
        basis.append(tuple(v))
    return basis


# ---------------------------------------------------------------------------
# the lattice

@dataclass(frozen=True)
class GramLattice:
    """An integral lattice of signature (1, rho-1) with a fixed ample ray.

    `gram` is a symmetric integer matrix.  Construction verifies the
    signature numerically (the Gram data itself stays exact).
    """

    gram: Matrix

    def __post_init__(self):
        G = self.gram
        n = len(G)
        if any(len(row) != n for row in G):
            raise InputError("gram matrix must be square")
        if any(G[i][j] != G[j][i] for i in range(n) for j in range(n)):
            raise InputError("gram matrix must be symmetric")
        eig = np.linalg.eigvalsh(np.array(G, dtype=float))
        pos = int(np.sum(eig > 1e-9))
        neg = int(np.sum(eig < -1e-9))
        if pos != 1 or neg != n - 1:
            raise InputError(f"signature must be (1, {n - 1}); eigenvalues {eig}")
        L = (1,) * n
        if self.pair(L, L) <= 0:
            raise InputError("the all-ones class must have positive self-pairing")

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def ample(self) -> Vector:
        """The integral ample class L = (1, ..., 1)."""
        return (1,) * self.rank

    def pair(self, u: Sequence[Number], v: Sequence[Number]) -> Number:
        """Exact intersection pairing u^T G v (int/Fraction arithmetic)."""
        G = self.gram
        n = self.rank
        return sum(u[i] * sum(G[i][j] * v[j] for j in range(n)) for i in range(n))

    def pair_float(self, u, v) -> float:
        return float(np.asarray(u, dtype=float) @ np.asarray(self.gram, dtype=float) @ np.asarray(v, dtype=float))

    @property
    def sqrt_ll(self) -> float:
        """sqrt(<L, L>), the normalization of the basepoint."""
        return math.sqrt(float(self.pair(self.ample, self.ample)))

    def basepoint(self) -> tuple:
        c = 1.0 / self.sqrt_ll
        return tuple(c for _ in range(self.rank))

    def mass(self, v) -> float:
        """<w0, v>: pairing with the normalized basepoint; exact until the
        final division by sqrt(<L, L>)."""
        if all(isinstance(x, (int, Fraction)) for x in v):
            return float(self.pair(self.ample, v)) / self.sqrt_ll
        return self.pair_float(self.ample, v) / self.sqrt_ll

    def mass_pair(self, v) -> Number:
        """The exact part of the mass: <L, v> (mass = this / sqrt(<L,L>))."""
        return self.pair(self.ample, v)

    def to_json(self) -> dict:
        return {"rank": self.rank, "gram": [list(row) for row in self.gram]}

    @staticmethod
    def from_json(data: dict) -> "GramLattice":
        try:
            gram = tuple(tuple(int(x) for x in row) for row in data["gram"])
            if int(data.get("rank", len(gram))) != len(gram):
                raise InputError("rank field disagrees with gram size")
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed lattice JSON: {exc}") from exc
        return GramLattice(gram)


_WEHLER = None


def wehler_lattice() -> GramLattice:
    global _WEHLER
    if _WEHLER is None:
        _WEHLER = GramLattice(WEHLER_GRAM)
    return _WEHLER


def wall_reflection(lat: GramLattice, m: Sequence[int]) -> Matrix:
    """Reflection in the hyperplane orthogonal to m: v -> v - 2<v,m>/<m,m> m."""
    mm = lat.pair(m, m)
    if mm >= 0:
        raise InputError("wall normal must have negative self-pairing")
    n = lat.rank
    gm = [sum(lat.gram[i][j] * m[j] for j in range(n)) for i in range(n)]
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            val = Fraction(-2 * gm[j] * m[i], mm) + (1 if i == j else 0)
            row.append(int(val) if val.denominator == 1 else val)
        rows.append(tuple(row))
    return tuple(rows)


def wehler_generator(i: int) -> Matrix:
    """NS matrix of the i-th involution (i in 1..3): fixes h_j (j != i) and
    sends h_i -> -h_i + 2 h_j + 2 h_k."""
    if i not in (1, 2, 3):
        raise InputError("generator index must be 1, 2 or 3")
    return wall_reflection(wehler_lattice(), WEHLER_WALLS[i - 1])


def word_matrix(word: Sequence[int], lat: Optional[GramLattice] = None) -> Matrix:
    """Product of generator matrices in word order (pullback of the word map)."""
    M = mat_identity(3 if lat is None else lat.rank)
    for letter in word:
        M = mat_mul(M, wehler_generator(letter))
    return M


def parse_word(text: str) -> tuple:
    """Word from its comma-separated form, e.g. "1,2,1,3" -> (1, 2, 1, 3)."""
    text = text.strip()
    if not text:
        return ()
    letters = []
    for piece in text.split(","):
        piece = piece.strip()
        if piece not in ("1", "2", "3"):
            raise InputError(f"word letters must be 1, 2 or 3, got {piece!r}")
        letters.append(int(piece))
    return tuple(letters)


def word_str(word: Sequence[int]) -> str:
    return ",".join(str(letter) for letter in word)


def reduce_word(word: Sequence[int]) -> tuple:
    """Delete adjacent equal letters (each generator is an involution)."""
    out = []
    for letter in word:
        if out and out[-1] == letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def reduced_words(max_len: int) -> list:
    """All reduced words of length 0..max_len in lexicographic order."""
    out = [()]
    layer = [()]
    for _ in range(max_len):
        nxt = []
        for w in layer:
            for letter in (1, 2, 3):
                if w and w[-1] == letter:
                    continue
                nxt.append(w + (letter,))
        out.extend(nxt)
        layer = nxt
    return out


# ---------------------------------------------------------------------------
# classification

@dataclass(frozen=True)
class FiniteOrder:
    order: int

    kind = "finite"


@dataclass(frozen=True)
class Parabolic:
    """Infinite order, spectral radius 1.

    `E` is the primitive integral fixed null vector, oriented so <w0, E> > 0.
    `xi` is the exact rational translation class in E-perp (canonical
    representative mod E: the first nonzero coordinate of E is zeroed out),
    or None when the isometry is not translation-type on E-perp/E.
    """

    E: Vector
    xi: Optional[Vector]

    kind = "parabolic"


@dataclass(frozen=True)
class Hyperbolic:
    """Spectral radius lambda > 1 with expanded/contracted null rays.

    alpha_plus / alpha_minus are mass-normalized float rays with
    M alpha_{+-} = lambda^{+-1} alpha_{+-}.
    """

    lam: float
    alpha_plus: tuple
    alpha_minus: tuple

    kind = "hyperbolic"


def is_isometry(lat: GramLattice, M: Matrix) -> bool:
    return mat_mul(mat_mul(mat_transpose(M), lat.gram), M) == tuple(
        tuple(row) for row in lat.gram
    )


def gram_pair(lat: GramLattice, u, v):
    """Spec-level name for the exact pairing."""
    return lat.pair(u, v)


def _canonical_mod_E(xi: Sequence[Fraction], E: Sequence[int]) -> Vector:
    """Reduce xi mod E deterministically: zero the first nonzero E-coordinate."""
    piv = next(i for i, x in enumerate(E) if x != 0)
    c = Fraction(xi[piv], E[piv])
    out = tuple(Fraction(x) - c * e for x, e in zip(xi, E))
    return tuple(int(x) if x.denominator == 1 else x for x in out)


def _translation_class(lat: GramLattice, M: Matrix, E: Vector) -> Optional[Vector]:
    """Extract xi with M v - v == <v, E> xi (mod E) for all v, or None."""
    n = lat.rank
    j = None
    for k in range(n):
        if lat.pair(tuple(1 if i == k else 0 for i in range(n)), E) != 0:
            j = k
            break
    if j is None:
        return None
    ek = tuple(1 if i == j else 0 for i in range(n))
    d = lat.pair(ek, E)
    v = tuple(Fraction(x, d) for x in ek)
    xi = vec_sub(mat_vec(M, v), v)
    # verify the defining identity on the whole basis, exactly
    for k in range(n):
        w = tuple(1 if i == k else 0 for i in range(n))
        lhs = vec_sub(mat_vec(M, w), w)
        rhs = vec_scale(xi, lat.pair(w, E))
        diff = vec_sub(lhs, rhs)
        # diff must be a rational multiple of E
        ratios = set()
        for a, e in zip(diff, E):
            if e == 0:
                if a != 0:
                    return None
            else:
                ratios.add(Fraction(a, e))
        if len(ratios) > 1:
            return None
    return _canonical_mod_E(xi, E)


def char_poly_coeffs(M: Matrix) -> tuple:
    """Exact (c2, c1, c0) with char(t) = t^3 - c2 t^2 + c1 t - c0.

    Rank 3 only; c2 is the trace, c1 the sum of principal 2x2 minors, c0
    the determinant.
    """
    if len(M) != 3:
        raise InputError("characteristic polynomial helper is rank-3 only")
    c2 = M[0][0] + M[1][1] + M[2][2]
    c1 = (
        (M[0][0] * M[1][1] - M[0][1] * M[1][0])
        + (M[0][0] * M[2][2] - M[0][2] * M[2][0])
        + (M[1][1] * M[2][2] - M[1][2] * M[2][1])
    )
    c0 = (
        M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
        - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
        + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0])
    )
    return c2, c1, c0


def classify_isometry(
    lat: GramLattice, M: Matrix, finite_order_bound: int = DEFAULT_FINITE_ORDER_BOUND
):
    """Trichotomy: FiniteOrder | Parabolic | Hyperbolic.

    Every branch decision is exact: the isometry property, finite order up
    to the bound, and the spectral type read off the characteristic
    polynomial.  For a signature (1, 2) isometry char(t) splits as
    (t - d)(t^2 - s t + c) with d = +-1 a rational root; the isometry is
    hyperbolic exactly when c = 1 and |s| > 2, and then
    lambda = (s + sgn(s) sqrt(s^2 - 4)) / 2.  Floats enter only in the
    hyperbolic eigen-rays.
    """
    M = tuple(tuple(row) for row in M)
    if not is_isometry(lat, M):
        raise NotIsometry(f"matrix does not preserve the form: {M}")
    ident = mat_identity(lat.rank)
    P = M
    for k in range(1, finite_order_bound + 1):
        if P == ident:
            return FiniteOrder(order=k)
        P = mat_mul(P, M)
    c2, c1, c0 = char_poly_coeffs(M)

    def p(t):
        return ((t - c2) * t + c1) * t - c0

    for d in (1, -1):
        if p(d) != 0:
            continue
        # char(t) = (t - d)(t^2 - s t + c)
        s = c2 - d
        c = d * c0
        if c == 1 and (s > 2 or s < -2):
            return _classify_hyperbolic(lat, M, s)
    if p(1) == 0 or p(-1) == 0:
        return _classify_parabolic(lat, M)
    raise NotIsometry(
        "characteristic polynomial has no +-1 root; matrix is not an "
        "isometry of a signature (1, 2) form"
    )


def _mass_normalize_float(lat: GramLattice, v: np.ndarray) -> tuple:
    m = lat.pair_float(lat.ample, v) / lat.sqrt_ll
    if m == 0:
        raise NoIntegralFixedNullVector("eigenray has zero mass")
    return tuple(float(x) for x in (v / m))


def _kernel_ray_float(B: np.ndarray) -> np.ndarray:
    """Kernel direction of a rank-2 3x3 matrix via the largest row cross."""
    best = None
    best_norm = -1.0
    for i in range(3):
        for j in range(i + 1, 3):
            w = np.cross(B[i], B[j])
            nw = float(np.linalg.norm(w))
            if nw > best_norm:
                best_norm = nw
                best = w
    if best is None or best_norm == 0.0:
        raise NoIntegralFixedNullVector("eigenray computation degenerated")
    return best


def _classify_hyperbolic(lat: GramLattice, M: Matrix, s) -> Hyperbolic:
    sf = float(s)
    root = math.sqrt(sf * sf - 4.0)
    lam = (sf + root) / 2.0 if sf > 0 else (sf - root) / 2.0
    A = np.array([[float(x) for x in row] for row in M])
    ident = np.eye(3)
    a_plus = _mass_normalize_float(lat, _kernel_ray_float(A - lam * ident))
    a_minus = _mass_normalize_float(lat, _kernel_ray_float(A - (1.0 / lam) * ident))
    for ray, scale in ((a_plus, lam), (a_minus, 1.0 / lam)):
        img = A @ np.asarray(ray)
        if not np.allclose(img, scale * np.asarray(ray), rtol=1e-9, atol=1e-9):
            raise NoIntegralFixedNullVector("hyperbolic eigenray failed to verify")
    return Hyperbolic(lam=lam, alpha_plus=a_plus, alpha_minus=a_minus)


def _null_eigenvector(lat: GramLattice, M: Matrix, sign: int) -> Optional[Vector]:
    """Primitive integral null E with M E = sign * E, if one exists."""
    diff = tuple(
        tuple(M[i][j] - (sign if i == j else 0) for j in range(lat.rank))
        for i in range(lat.rank)
    )
    kernel = _rational_kernel(diff)
    for cand in kernel:
        if lat.pair(cand, cand) == 0:
            return _primitivize(cand)
    if len(kernel) >= 2:
        # rational null vector inside a 2-dim eigenspace: solve the
        # restricted quadratic q(a u + v) = 0 exactly
        u, v = kernel[0], kernel[1]
        quu, quv, qvv = lat.pair(u, u), lat.pair(u, v), lat.pair(v, v)
        disc = quv * quv - quu * qvv
        if quu == 0:
            return _primitivize(u)
        if disc >= 0:
            r = _fraction_sqrt(Fraction(disc))
            if r is not None:
                a = (-quv + r) / quu
                return _primitivize(
                    vec_add(vec_scale(u, a), tuple(Fraction(x) for x in v))
                )
    return None


def _classify_parabolic(lat: GramLattice, M: Matrix) -> Parabolic:
    E = _null_eigenvector(lat, M, 1)
    translation = E is not None
    if E is None:
        # quasi-unipotent case: the invariant null ray carries eigenvalue -1
        E = _null_eigenvector(lat, M, -1)
    if E is None:
        raise NoIntegralFixedNullVector(
            "spectral radius 1 of infinite order but no integral invariant "
            "null ray"
        )
    if lat.pair(lat.ample, E) < 0:
        E = tuple(-x for x in E)
    xi = _translation_class(lat, M, E) if translation else None
    return Parabolic(E=E, xi=xi)


def _fraction_sqrt(x: Fraction) -> Optional[Fraction]:
    if x < 0:
        return None
    pn = math.isqrt(x.numerator)
    pd = math.isqrt(x.denominator)
    if pn * pn == x.numerator and pd * pd == x.denominator:
        return Fraction(pn, pd)
    return None


def parabolic_xi(lat: GramLattice, M: Matrix):
    """(E, xi) of a translation-type parabolic isometry.

    xi is exact, lies in E-perp, and is reduced mod E to the canonical
    representative; <xi, xi> < 0 always (a genuine translation length).
    """
    cls = classify_isometry(lat, M)
    if cls.kind != "parabolic" or cls.xi is None:
        raise NonParabolicInput(f"classification is {cls}")
    return cls.E, cls.xi


def ns_norm_sq(lat: GramLattice, M: Matrix):
    """The translation norm ||M||^2_NS = -<xi, xi> > 0."""
    _, xi = parabolic_xi(lat, M)
    val = -lat.pair(xi, xi)
    return int(val) if isinstance(val, Fraction) and val.denominator == 1 else val


def exp_parabolic(lat: GramLattice, E: Sequence[int], xi: Sequence[Number]) -> Matrix:
    """Translation-type parabolic from its data: I + n + n^2/2 where
    n(v) = <v,E> xi - <v,xi> E.  Exact; round-trips with parabolic_xi."""
    if lat.pair(E, E) != 0:
        raise NonParabolicInput("E must be a null vector")
    if lat.pair(xi, E) != 0:
        raise NonParabolicInput("xi must pair to zero with E")
    n = lat.rank
    G = lat.gram
    gE = [sum(G[i][j] * E[j] for j in range(n)) for i in range(n)]
    gxi = [sum(Fraction(G[i][j]) * xi[j] for j in range(n)) for i in range(n)]
    N = tuple(
        tuple(Fraction(xi[i]) * gE[j] - Fraction(E[i]) * gxi[j] for j in range(n))
        for i in range(n)
    )
    N2 = mat_mul(N, N)
    ident = mat_identity(n)
    M = tuple(
        tuple(ident[i][j] + N[i][j] + Fraction(N2[i][j], 2) for j in range(n))
        for i in range(n)
    )
    M = tuple(
        tuple(int(x) if Fraction(x).denominator == 1 else x for x in row) for row in M
    )
    if not is_isometry(lat, M):
        raise NotIsometry("exp_parabolic produced a non-isometry (bad E/xi input)")
    return M


@dataclass
class Isometry:
    """A lattice isometry with cached classification."""

    lattice: GramLattice
    mat: Matrix
    _cls: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.mat = tuple(tuple(row) for row in self.mat)
        if not is_isometry(self.lattice, self.mat):
            raise NotIsometry("matrix does not preserve the form")

    @staticmethod
    def from_word(word: Sequence[int]) -> "Isometry":
        return Isometry(wehler_lattice(), word_matrix(word))

    @property
    def classification(self):
        if self._cls is None:
            self._cls = classify_isometry(self.lattice, self.mat)
        return self._cls

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return Isometry(self.lattice, mat_mul(self.mat, other.mat))

    def power(self, k: int) -> "Isometry":
        return Isometry(self.lattice, mat_pow(self.mat, k))

    def apply(self, v):
        return mat_vec(self.mat, v)
