"""NumPy implementations of the hot kernels.

Mirror of ``cardiosep.kernels._accel``; used when the compiled extension is
unavailable or when ``CARDIOSEP_PURE=1`` forces the pure path.
"""

import numpy as np


def ratio_pow(y, yhat, alpha, floor):
    """Elementwise (y / max(yhat, floor)) ** alpha."""
    r = y / np.maximum(yhat, floor)
    np.power(r, alpha, out=r)
    return r


def mul_pow(base, q, exponent, floor):
    """Elementwise max(base * q ** exponent, floor)."""
    out = np.power(q, exponent)
    np.multiply(base, out, out=out)
    np.maximum(out, floor, out=out)
    return out


def alpha_div_sum(y, yhat, alpha, floor):
    """Sum of y**a * yhat**(1-a) - a*y + (a-1)*yhat over entries, / (a*(a-1)).

    Both inputs are floored before evaluation. Valid away from the a=0 and
    a=1 singularities; the caller handles those limits.
    """
    yf = np.maximum(y, floor)
    zf = np.maximum(yhat, floor)
    terms = yf**alpha * zf ** (1.0 - alpha) - alpha * yf + (alpha - 1.0) * zf
    return float(terms.sum() / (alpha * (alpha - 1.0)))


def acf_all_lags(x):
    """Biased autocorrelation (1/T) * sum_t x[t] * x[t+p] for p = 0..T.

    The lag-T entry is an empty sum and therefore 0. No mean removal.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    t_len = x.size
    r = np.correlate(x, x, mode="full")[t_len - 1 :] / t_len
    return np.concatenate([r, [0.0]])
