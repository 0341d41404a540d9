"""Kernel backend selection.

K3H_KERNEL=auto (default) prefers the compiled extension and falls back to
pure Python; =compiled requires the extension; =pure forces the fallback.
"""

import os

_choice = os.environ.get("K3H_KERNEL", "auto")
if _choice not in ("auto", "compiled", "pure"):
    raise ImportError(f"K3H_KERNEL must be auto, compiled or pure, got {_choice!r}")

_impl = None
if _choice in ("auto", "compiled"):
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        if _choice == "compiled":
            raise ImportError(
                "K3H_KERNEL=compiled but the k3heights._kernel._core extension "
                "is not built; reinstall without K3H_NO_EXT=1"
            )
if _impl is None:
    from . import _pure as _impl
    BACKEND = "pure"

monomials = _impl.monomials
fiber_coeffs = _impl.fiber_coeffs
normalize_pair = _impl.normalize_pair
vieta_conjugate = _impl.vieta_conjugate
step = _impl.step
eval_form = _impl.eval_form

__all__ = [
    "BACKEND",
    "monomials",
    "fiber_coeffs",
    "normalize_pair",
    "vieta_conjugate",
    "step",
    "eval_form",
]
