"""Alpha-divergence NMF, a Euclidean baseline, and the multilayer loop.

The model is Y ~ A1 A2 ... AL X with every factor nonnegative. Updates are
multiplicative: each entry is rescaled by a nonnegative ratio raised to 1/a,
so nonnegativity is preserved without projection. All ratios are computed
against the full layer product, which makes the single-layer case coincide
exactly with the plain two-factor updates.
"""

from __future__ import annotations

import dataclasses
import logging

import numpy as np

from . import kernels
from .errors import NumericsError
from .signal_io import affine_shift, resolve_offset

logger = logging.getLogger(__name__)

# Entrywise floor applied after every update and to any matrix that appears
# in a denominator; the ratio updates are undefined at zero.
EPS_FLOOR = 1e-12

# Half-width of the guard interval around the divergence's removable
# singularities at a = 0 and a = 1.
ALPHA_EPS = 1e-6


def _check_nonneg(name: str, a: np.ndarray) -> None:
    if a.size and np.min(a) < 0:
        raise NumericsError(f"{name} contains negative entries (min {np.min(a):g})")
    if not np.all(np.isfinite(a)):
        raise NumericsError(f"{name} contains non-finite entries")


def _effective_alpha(alpha: float) -> float:
    """Nudge a off the a = 0 singularity of the update exponent 1/a."""
    if abs(alpha) < ALPHA_EPS:
        return ALPHA_EPS
    return float(alpha)


def alpha_divergence(y: np.ndarray, yhat: np.ndarray, alpha: float) -> float:
    """Divergence between nonnegative matrices; 0 iff they are equal.

    For a outside the guard interval this is
    ``sum(y**a * yhat**(1-a) - a*y + (a-1)*yhat) / (a*(a-1))``; at a -> 1 and
    a -> 0 the analytic limits (the two Kullback-Leibler directions) are used
    because the prefactor is singular there. Entries below EPS_FLOOR are
    floored before evaluation.
    """
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if y.shape != yhat.shape:
        raise ValueError(f"shape mismatch: {y.shape} vs {yhat.shape}")
    _check_nonneg("Y", y)
    _check_nonneg("model", yhat)
    if abs(alpha - 1.0) < ALPHA_EPS:
        yf = np.maximum(y, EPS_FLOOR)
        zf = np.maximum(yhat, EPS_FLOOR)
        return float(np.sum(yf * np.log(yf / zf) - yf + zf))
    if abs(alpha) < ALPHA_EPS:
        yf = np.maximum(y, EPS_FLOOR)
        zf = np.maximum(yhat, EPS_FLOOR)
        return float(np.sum(zf * np.log(zf / yf) - zf + yf))
    return float(kernels.alpha_div_sum(y, yhat, float(alpha), EPS_FLOOR))


def update_X_alpha(
    y: np.ndarray, a: np.ndarray, x: np.ndarray, alpha: float
) -> np.ndarray:
    """One multiplicative update of the source matrix X for Y ~ AX."""
    col_weight = a.sum(axis=0)
    if np.any(col_weight <= 0):
        raise NumericsError("mixing matrix has a zero column")
    ahat = _effective_alpha(alpha)
    yhat = a @ x
    ratio = kernels.ratio_pow(y, yhat, ahat, EPS_FLOOR)
    q = (a.T @ ratio) / col_weight[:, None]
    return kernels.mul_pow(x, q, 1.0 / ahat, EPS_FLOOR)


def update_A_alpha(
    y: np.ndarray, a: np.ndarray, x: np.ndarray, alpha: float
) -> np.ndarray:
    """One multiplicative update of the mixing matrix A for Y ~ AX."""
    row_weight = x.sum(axis=1)
    if np.any(row_weight <= 0):
        raise NumericsError("source matrix has a zero row")
    ahat = _effective_alpha(alpha)
    yhat = a @ x
    ratio = kernels.ratio_pow(y, yhat, ahat, EPS_FLOOR)
    q = (ratio @ x.T) / row_weight[None, :]
    return kernels.mul_pow(a, q, 1.0 / ahat, EPS_FLOOR)


@dataclasses.dataclass
class LayerStack:
    """Ordered mixing layers A1..AL and the shared source matrix X."""

    layers: list[np.ndarray]
    X: np.ndarray

    def __post_init__(self):
        if not self.layers:
            raise ValueError("a layer stack needs at least one layer")
        for left, right in zip(self.layers, self.layers[1:]):
            if left.shape[1] != right.shape[0]:
                raise ValueError("adjacent layers have incompatible shapes")
        if self.layers[-1].shape[1] != self.X.shape[0]:
            raise ValueError("last layer and X have incompatible shapes")

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def composite(self) -> np.ndarray:
        """Product A1 @ ... @ AL (the first layer itself when L = 1)."""
        comp = self.layers[0]
        for a in self.layers[1:]:
            comp = comp @ a
        return comp

    def reconstruction(self) -> np.ndarray:
        return self.composite() @ self.X

    def copy(self) -> "LayerStack":
        return LayerStack([a.copy() for a in self.layers], self.X.copy())


def update_layer(
    y: np.ndarray, stack: LayerStack, layer_index: int, alpha: float
) -> np.ndarray:
    """One multiplicative update of layer ``layer_index``.

    The ratio Y / (A1..AL X) always uses the full product. Square stacks use
    the source rows of X as weights directly; when a later layer has fewer
    rows than Y (a tall first layer), the ratio is first back-projected
    through the preceding layers, normalized by their column sums so that an
    exact fit remains a fixed point.
    """
    if not 0 <= layer_index < stack.n_layers:
        raise ValueError(f"layer index {layer_index} out of range")
    row_weight = stack.X.sum(axis=1)
    if np.any(row_weight <= 0):
        raise NumericsError("source matrix has a zero row")
    ahat = _effective_alpha(alpha)
    a_l = stack.layers[layer_index]
    yhat = stack.composite() @ stack.X
    ratio = kernels.ratio_pow(y, yhat, ahat, EPS_FLOOR)
    if a_l.shape[0] != y.shape[0]:
        prefix = stack.layers[0]
        for a in stack.layers[1:layer_index]:
            prefix = prefix @ a
        ratio = (prefix.T @ ratio) / prefix.sum(axis=0)[:, None]
    q = (ratio @ stack.X.T) / row_weight[None, :]
    return kernels.mul_pow(a_l, q, 1.0 / ahat, EPS_FLOOR)


def update_X_multilayer(y: np.ndarray, stack: LayerStack, alpha: float) -> np.ndarray:
    """Update X against the composite mixing matrix A1..AL."""
    return update_X_alpha(y, stack.composite(), stack.X, alpha)


def normalize_stack(stack: LayerStack) -> LayerStack:
    """Rescale every layer to unit column sums, pushing the scale rightward.

    The compensating factors ride into the next layer and finally into X, so
    the product A1..AL X is preserved up to rounding. Columns stuck at the
    floor cannot be meaningfully normalized; they are left alone and logged.
    """
    layers = [a.copy() for a in stack.layers]
    x = stack.X.copy()
    for i, a in enumerate(layers):
        sums = a.sum(axis=0)
        dead = sums <= a.shape[0] * EPS_FLOOR
        if np.any(dead):
            logger.warning(
                "normalize_stack: layer %d has %d floored-out column(s), "
                "left unnormalized",
                i,
                int(dead.sum()),
            )
        scale = np.where(dead, 1.0, sums)
        a /= scale[None, :]
        if i + 1 < len(layers):
            layers[i + 1] = layers[i + 1] * scale[:, None]
        else:
            x *= scale[:, None]
    return LayerStack(layers, x)


@dataclasses.dataclass
class FitTrace:
    """Per-sweep cost values of one factorization run."""

    costs: np.ndarray
    stop_reason: str
    kind: str = "alpha_divergence"

    def __post_init__(self):
        self.costs = np.asarray(self.costs, dtype=np.float64)

    @property
    def iterations(self) -> int:
        return self.costs.size


@dataclasses.dataclass
class PassParams:
    """Hyperparameters of one factorization pass."""

    lambda1: float = 1.0
    lambda2: float | str = "auto"
    alpha: float = 0.5
    layers: int = 1

    def __post_init__(self):
        if self.lambda1 <= 0:
            raise ValueError("lambda1 must be positive")
        if self.layers < 1:
            raise ValueError("at least one layer is required")


@dataclasses.dataclass
class IterationControls:
    max_iter: int = 500
    rel_tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.max_iter < 0:
            raise ValueError("max_iter must be nonnegative")
        if self.rel_tol < 0:
            raise ValueError("rel_tol must be nonnegative")


def init_stack(
    n_rows: int, n_sources: int, n_layers: int, n_cols: int, rng: np.random.Generator
) -> LayerStack:
    """Strictly positive uniform(0.1, 1) start: layers in order, then X."""
    shapes = [(n_rows, n_sources)] + [(n_sources, n_sources)] * (n_layers - 1)
    layers = [rng.uniform(0.1, 1.0, size=s) for s in shapes]
    x = rng.uniform(0.1, 1.0, size=(n_sources, n_cols))
    return LayerStack(layers, x)


def _converged(prev: float | None, cost: float, rel_tol: float) -> bool:
    if prev is None:
        return False
    return abs(prev - cost) <= rel_tol * max(abs(prev), 1e-30)


def run_plnmf_pass(
    y: np.ndarray,
    params: PassParams,
    ctrl: IterationControls,
    n_sources: int = 2,
    sweep_hook=None,
) -> tuple[LayerStack, FitTrace, tuple[float, float]]:
    """One affine-shifted multilayer factorization pass.

    Each outer sweep updates every layer in order, refreshing X and
    renormalizing after each layer update, then records the divergence of
    the full model. Stops when the relative cost change drops below
    ``ctrl.rel_tol`` or after ``ctrl.max_iter`` sweeps.

    ``sweep_hook(sweep, stack, cost)``, when given, is called after each
    sweep; it must treat the stack as read-only (it exists so a caller can
    observe the fit without perturbing the trajectory).

    Returns the stack, the trace, and the resolved shift ``(lam1, lam2)``.
    """
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    lam2 = resolve_offset(y, params.lambda1, params.lambda2)
    ys = affine_shift(y, params.lambda1, lam2)
    rng = np.random.default_rng(ctrl.seed)
    stack = init_stack(ys.shape[0], n_sources, params.layers, ys.shape[1], rng)
    costs: list[float] = []
    stop_reason = "max_iter"
    prev: float | None = None
    for sweep in range(ctrl.max_iter):
        for layer in range(params.layers):
            stack.layers[layer] = update_layer(ys, stack, layer, params.alpha)
            stack.X = update_X_multilayer(ys, stack, params.alpha)
            stack = normalize_stack(stack)
        cost = alpha_divergence(ys, stack.reconstruction(), params.alpha)
        costs.append(cost)
        if sweep_hook is not None:
            sweep_hook(sweep, stack, cost)
        if _converged(prev, cost, ctrl.rel_tol):
            stop_reason = "converged"
            break
        prev = cost
    trace = FitTrace(np.asarray(costs), stop_reason, kind="alpha_divergence")
    return stack, trace, (params.lambda1, lam2)


def standard_nmf(
    y: np.ndarray, rank: int, ctrl: IterationControls
) -> tuple[np.ndarray, np.ndarray, FitTrace]:
    """Euclidean multiplicative-update baseline for Y ~ AX.

    Uses the classic paired updates that keep the squared Frobenius error
    nonincreasing. Same init scheme and stopping rule as the alpha passes.
    """
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    _check_nonneg("Y", y)
    m, t = y.shape
    if not 1 <= rank <= min(m, t):
        raise ValueError(f"rank {rank} out of range for a {m}x{t} matrix")
    rng = np.random.default_rng(ctrl.seed)
    a = rng.uniform(0.1, 1.0, size=(m, rank))
    x = rng.uniform(0.1, 1.0, size=(rank, t))
    costs: list[float] = []
    stop_reason = "max_iter"
    prev: float | None = None
    for _ in range(ctrl.max_iter):
        a *= (y @ x.T) / np.maximum(a @ (x @ x.T), EPS_FLOOR)
        np.maximum(a, EPS_FLOOR, out=a)
        x *= (a.T @ y) / np.maximum((a.T @ a) @ x, EPS_FLOOR)
        np.maximum(x, EPS_FLOOR, out=x)
        diff = y - a @ x
        cost = float(np.sum(diff * diff))
        costs.append(cost)
        if _converged(prev, cost, ctrl.rel_tol):
            stop_reason = "converged"
            break
        prev = cost
    return a, x, FitTrace(np.asarray(costs), stop_reason, kind="frobenius")
