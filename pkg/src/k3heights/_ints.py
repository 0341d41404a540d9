"""Integer backend selection.

All arithmetic in the package is exact.  Coordinates inside the hot orbit
loops use gmpy2.mpz when available (subquadratic multiplication and gcd
matter once coordinates reach 10^4..10^5 bits); plain Python int otherwise.
Values are identical either way — only speed differs.  Set K3H_NO_GMP=1 to
force plain int.
"""

import math
import os

try:
    if os.environ.get("K3H_NO_GMP") == "1":
        raise ImportError
    import gmpy2 as _g

    mpz = _g.mpz
    gcd = _g.gcd

    def log_int(n) -> float:
        """log of a positive integer, safe for values far above float range."""
        k = n.bit_length() - 53
        if k > 0:
            return math.log(int(n >> k)) + k * _LOG2
        return math.log(int(n))

    HAVE_GMP = True
except ImportError:
    mpz = int
    gcd = math.gcd

    def log_int(n) -> float:
        k = n.bit_length() - 53
        if k > 0:
            return math.log(n >> k) + k * _LOG2
        return math.log(n)

    HAVE_GMP = False

_LOG2 = math.log(2)


def as_int(x) -> int:
    """Convert a backend integer back to plain int (serialization boundary)."""
    return int(x)
