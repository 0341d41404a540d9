"""Pure-Python kernel: exact projective Vieta steps on a (2,2,2) form.

The compiled twin in _core.pyx implements the same functions with identical
semantics; orbit code must work unchanged against either.  Coefficients
arrive as a flat 27-tuple K with K[9a+3b+c] multiplying
x0^a x1^(2-a) y0^b y1^(2-b) z0^c z1^(2-c); all values are exact integers
(int or gmpy2.mpz).
"""

from .._ints import gcd as _gcd


def monomials(u0, u1):
    # (u0^e * u1^(2-e) for e = 0, 1, 2)
    return (u1 * u1, u0 * u1, u0 * u0)


def fiber_coeffs(K, axis, u0, u1, v0, v1):
    """Quadratic coefficients (A, B, C) along `axis` (0, 1 or 2).

    (u, v) are the remaining coordinate pairs in increasing-axis order:
    axis 0 -> (y, z), axis 1 -> (x, z), axis 2 -> (x, y).
    A multiplies t0^2, B multiplies t0*t1, C multiplies t1^2.
    """
    um = monomials(u0, u1)
    vm = monomials(v0, v1)
    q = [0, 0, 0]
    if axis == 0:
        for a in range(3):
            s = 0
            base = 9 * a
            for b in range(3):
                for c in range(3):
                    k = K[base + 3 * b + c]
                    if k:
                        s += k * um[b] * vm[c]
            q[a] = s
    elif axis == 1:
        for b in range(3):
            s = 0
            for a in range(3):
                for c in range(3):
                    k = K[9 * a + 3 * b + c]
                    if k:
                        s += k * um[a] * vm[c]
            q[b] = s
    else:
        for c in range(3):
            s = 0
            for a in range(3):
                for b in range(3):
                    k = K[9 * a + 3 * b + c]
                    if k:
                        s += k * um[a] * vm[b]
            q[c] = s
    return q[2], q[1], q[0]


def normalize_pair(a, b):
    """Reduce to gcd 1 with b > 0, or b == 0 and a > 0."""
    if a == 0 and b == 0:
        raise ValueError("zero projective pair")
    g = _gcd(a, b)
    a //= g
    b //= g
    if b < 0 or (b == 0 and a < 0):
        a = -a
        b = -b
    return a, b


def vieta_conjugate(A, B, C, t0, t1):
    """Other root of A t0^2 + B t0 t1 + C t1^2 given the root (t0, t1).

    Returns an unnormalized pair, or None when A = B = C = 0 (degenerate
    fiber).  Raises ValueError if (t0, t1) is not a root at all.
    """
    if A == 0 and B == 0 and C == 0:
        return None
    if t1 != 0 and A != 0:
        return (-B * t1 - A * t0, A * t1)
    if A == 0:
        if t1 == 0:
            # the finite root [-C : B]; if B = 0 too the fiber is a double
            # root at infinity and the point is fixed
            if B == 0:
                return (1, 0)
            return (-C, B)
        return (1, 0)
    # A != 0 and t1 == 0: infinity is not on this fiber
    raise ValueError("point is not on the fiber")


def step(K, axis, x0, x1, y0, y1, z0, z1):
    """One involution step: replace the `axis` coordinate by its conjugate.

    Returns the new normalized 6-tuple, or None for a degenerate fiber.
    """
    if axis == 0:
        A, B, C = fiber_coeffs(K, 0, y0, y1, z0, z1)
        r = vieta_conjugate(A, B, C, x0, x1)
        if r is None:
            return None
        n0, n1 = normalize_pair(r[0], r[1])
        return (n0, n1, y0, y1, z0, z1)
    if axis == 1:
        A, B, C = fiber_coeffs(K, 1, x0, x1, z0, z1)
        r = vieta_conjugate(A, B, C, y0, y1)
        if r is None:
            return None
        n0, n1 = normalize_pair(r[0], r[1])
        return (x0, x1, n0, n1, z0, z1)
    A, B, C = fiber_coeffs(K, 2, x0, x1, y0, y1)
    r = vieta_conjugate(A, B, C, z0, z1)
    if r is None:
        return None
    n0, n1 = normalize_pair(r[0], r[1])
    return (x0, x1, y0, y1, n0, n1)


def eval_form(K, x0, x1, y0, y1, z0, z1):
    """Exact value of the (2,2,2) form at the given coordinates."""
    A, B, C = fiber_coeffs(K, 0, y0, y1, z0, z1)
    return A * x0 * x0 + B * x0 * x1 + C * x1 * x1
