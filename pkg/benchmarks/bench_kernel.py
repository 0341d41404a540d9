"""Vieta-step kernel benchmark: pure vs compiled, int vs gmp.

Iterates the standard three-letter word on the default point until the
coordinates reach each bit tier, then times a single involution step on
that state for every backend/integer-type combination.  Run as

    python3 benchmarks/bench_kernel.py [--tiers 1000,10000,100000]
"""

from __future__ import annotations

import argparse
import time

from k3heights._kernel import _pure
from k3heights.defaults import default_point, default_surface

try:
    from k3heights._kernel import _core
except ImportError:
    _core = None

try:
    from gmpy2 import mpz
except ImportError:
    mpz = None


def state_bits(state) -> int:
    return max(int(x).bit_length() for x in state)


def states_at_tiers(K, tiers):
    """First orbit state at or above each bit tier, word 1,2,3 cycled."""
    state = tuple(int(c) for c in default_point().coords())
    out = {}
    axis = 0
    while len(out) < len(tiers):
        nxt = _pure.step(K, axis % 3, *state)
        if nxt is None:
            raise RuntimeError("degenerate fiber during warmup")
        state = nxt
        axis += 1
        bits = state_bits(state)
        for t in tiers:
            if t not in out and bits >= t:
                out[t] = state
    return out


def time_step(step_fn, K, state, repeat: int = 5, min_seconds: float = 0.05) -> float:
    """Best-of-`repeat` seconds for one step, inner loop sized by runtime."""
    loops = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(loops):
            step_fn(K, 0, *state)
        dt = time.perf_counter() - t0
        if dt >= min_seconds or loops >= 1 << 20:
            break
        loops *= 2
    best = dt / loops
    for _ in range(repeat - 1):
        t0 = time.perf_counter()
        for _ in range(loops):
            step_fn(K, 0, *state)
        best = min(best, (time.perf_counter() - t0) / loops)
    return best


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--tiers", default="1000,10000,100000")
    args = ap.parse_args()
    tiers = [int(t) for t in args.tiers.split(",")]

    S = default_surface()
    K_int = tuple(
        int(S.coeff(a, b, c)) for a in range(3) for b in range(3) for c in range(3)
    )
    states = states_at_tiers(K_int, tiers)

    backends = [("pure", _pure.step)]
    if _core is not None:
        backends.append(("compiled", _core.step))
    kinds = [("int", int)]
    if mpz is not None:
        kinds.append(("mpz", mpz))

    header = f"{'bits':>8}  {'ints':>6}  " + "  ".join(f"{name:>12}" for name, _ in backends)
    for kind_name, conv in kinds:
        print(f"\ninteger type: {kind_name}")
        print(header)
        for t in tiers:
            st = states[t]
            K = tuple(conv(c) for c in K_int)
            stc = tuple(conv(c) for c in st)
            row = [f"{state_bits(st):>8}", f"{kind_name:>6}"]
            base = None
            for name, fn in backends:
                sec = time_step(fn, K, stc)
                cell = f"{sec*1e3:9.3f} ms"
                if base is None:
                    base = sec
                else:
                    cell += f" ({base/sec:4.2f}x)"
                row.append(f"{cell:>12}")
            print("  ".join(row))


if __name__ == "__main__":
    main()
