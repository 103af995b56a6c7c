"""Hot-kernel backend selection.

The compiled extension is preferred when importable; otherwise (or when the
``CARDIOSEP_PURE`` environment variable is set to a truthy value) the NumPy
fallback is used. ``BACKEND`` names the active implementation so runs can
record it. Both backends are deterministic; they may differ from each other
by ordinary floating-point rounding.
"""

import os

_PURE = os.environ.get("CARDIOSEP_PURE", "").strip().lower() in {"1", "true", "yes"}

if _PURE:
    from . import fallback as _impl

    BACKEND = "numpy"
else:
    try:
        from . import _accel as _impl

        BACKEND = "cython"
    except ImportError:
        from . import fallback as _impl

        BACKEND = "numpy"

ratio_pow = _impl.ratio_pow
mul_pow = _impl.mul_pow
alpha_div_sum = _impl.alpha_div_sum
acf_all_lags = _impl.acf_all_lags

__all__ = ["BACKEND", "ratio_pow", "mul_pow", "alpha_div_sum", "acf_all_lags"]
