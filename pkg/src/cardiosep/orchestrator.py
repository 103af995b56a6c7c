"""End-to-end separation pipelines.

Every method runs the factorization twice, once with the cardiac
hyperparameters and once with the respiratory ones; the first pass
contributes the shortest-period row as the heart estimate and the second
the longest-period row as the lung estimate. The advisor-driven variant
additionally extracts features at a fixed sweep cadence, asks a backend for
new dominant-frequency targets, and accepts a proposal only when the
frequency-penalized cost does not increase.

The penalty term never modifies the multiplicative updates (the estimated
dominant frequency is an argmax over the spectrum, piecewise constant in
X); it is the acceptance objective for target updates and the reported
penalized cost.
"""

from __future__ import annotations

import dataclasses
import logging

import numpy as np

from .advisor import (
    AdvisorSuggestion,
    HttpAdvisorConfig,
    build_prompt,
    heuristic_advise,
    http_advise,
)
from .errors import AdvisorTransportError
from .nmf import (
    FitTrace,
    IterationControls,
    LayerStack,
    PassParams,
    run_plnmf_pass,
    standard_nmf,
)
from .periodicity import assign_sources
from .signal_io import Signal, affine_shift, invert_affine, resolve_offset
from .spectral import extract_features, fundamental_frequency

logger = logging.getLogger(__name__)

METHODS = ("standard", "alpha", "plnmf", "lingonmf")
ADVISOR_MODES = ("heuristic", "http", "off")

DEFAULT_HEART_BAND = (20.0, 200.0)
DEFAULT_LUNG_BAND = (100.0, 1200.0)


@dataclasses.dataclass
class SeparationConfig:
    """All hyperparameters of one separation job."""

    heart_params: PassParams = dataclasses.field(
        default_factory=lambda: PassParams(alpha=0.5, layers=2)
    )
    lung_params: PassParams = dataclasses.field(
        default_factory=lambda: PassParams(alpha=0.5, layers=1)
    )
    lambda_f: float = 0.01
    f_f_targets: tuple[float, float] = (50.0, 50.0)
    f_bands: tuple[tuple[float, float], tuple[float, float]] = (
        DEFAULT_HEART_BAND,
        DEFAULT_LUNG_BAND,
    )
    max_iter: int = 500
    rel_tol: float = 1e-6
    feedback_every: int = 25
    max_feedback_rounds: int = 10
    seed: int = 0
    advisor_mode: str = "heuristic"
    advisor_fallback: bool = True

    def __post_init__(self):
        if self.lambda_f < 0:
            raise ValueError("lambda_f must be nonnegative")
        if self.feedback_every < 1:
            raise ValueError("feedback cadence must be at least 1 sweep")
        if self.max_feedback_rounds < 0:
            raise ValueError("feedback round budget must be nonnegative")
        if self.advisor_mode not in ADVISOR_MODES:
            raise ValueError(f"unknown advisor mode {self.advisor_mode!r}")
        for lo, hi in self.f_bands:
            if not 0 <= lo < hi:
                raise ValueError(f"invalid frequency band [{lo}, {hi}]")
        if any(t <= 0 for t in self.f_f_targets):
            raise ValueError("frequency targets must be positive")


@dataclasses.dataclass
class FeedbackRound:
    """Record of one advisor exchange."""

    pass_name: str
    sweep: int
    base_cost: float
    f_hat: tuple[float, float]
    targets_before: tuple[float, float]
    candidate: tuple[float, float]
    accepted: bool
    d_incumbent: float
    d_candidate: float
    backend_id: str
    fallback_used: bool
    prompt_text: str
    response_text: str


@dataclasses.dataclass
class SeparationResult:
    """Separated signals plus everything needed to audit the run."""

    heart: Signal
    lung: Signal
    stacks: dict[str, LayerStack]
    traces: dict[str, FitTrace]
    shifts: dict[str, tuple[float, float]]
    penalized_cost_history: list[float]
    advisor_transcript: list[FeedbackRound]
    final_f_f: tuple[float, float]
    method: str


def penalized_cost(
    base_cost: float,
    f_hat,
    f_target,
    lambda_f: float,
) -> float:
    """base + lambda_f * squared distance between observed and target
    dominant frequencies."""
    f_hat = np.asarray(f_hat, dtype=np.float64)
    f_target = np.asarray(f_target, dtype=np.float64)
    if f_hat.shape != f_target.shape:
        raise ValueError(
            f"frequency vectors disagree: {f_hat.shape} vs {f_target.shape}"
        )
    return float(base_cost + lambda_f * np.sum((f_hat - f_target) ** 2))


def _clamped_bands(cfg: SeparationConfig, sample_rate: int):
    nyquist = sample_rate / 2.0
    bands = []
    for lo, hi in cfg.f_bands:
        hi_eff = min(hi, nyquist)
        if lo >= hi_eff:
            raise ValueError(
                f"band [{lo}, {hi}] has no room below Nyquist {nyquist} Hz"
            )
        if hi_eff < hi:
            logger.info("band [%g, %g] clamped to Nyquist %g Hz", lo, hi, nyquist)
        bands.append((lo, hi_eff))
    return tuple(bands)


def _validate_mixtures(y: np.ndarray) -> np.ndarray:
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    if y.shape[0] < 2:
        raise ValueError("separation needs at least two mixture rows")
    return y


def _pass_list(cfg: SeparationConfig):
    return (("heart", cfg.heart_params), ("lung", cfg.lung_params))


class _FeedbackLoop:
    """Per-job advisor state threaded through both passes."""

    def __init__(self, cfg, sample_rate, bands, http_config):
        self.cfg = cfg
        self.sample_rate = sample_rate
        self.bands = bands
        self.http_config = http_config
        self.targets = list(cfg.f_f_targets)
        self.history: list[float] = []
        self.transcript: list[FeedbackRound] = []

    def _query(self, prompt, features) -> tuple[AdvisorSuggestion, str, bool]:
        if self.cfg.advisor_mode == "heuristic":
            return heuristic_advise(features, self.targets, self.bands), "", False
        try:
            config = self.http_config or HttpAdvisorConfig.from_env()
            suggestion, raw = http_advise(
                prompt, config, max_hz=self.sample_rate / 2.0
            )
            return suggestion, raw, False
        except AdvisorTransportError:
            if not self.cfg.advisor_fallback:
                raise
            logger.warning("advisor transport failed; using heuristic fallback")
            return heuristic_advise(features, self.targets, self.bands), "", True

    def run_round(self, pass_name, sweep, base_cost, rows) -> None:
        assign = assign_sources(rows, self.sample_rate, self.bands)
        order = (assign.heart_index, assign.lung_index)
        signals = [Signal(rows[i], self.sample_rate) for i in order]
        f_hat = tuple(
            fundamental_frequency(sig, band[0], band[1])
            for sig, band in zip(signals, self.bands)
        )
        features = [
            extract_features(sig, band) for sig, band in zip(signals, self.bands)
        ]
        prompt = build_prompt(features, self.targets)
        suggestion, raw, fallback_used = self._query(prompt, features)
        nyquist = self.sample_rate / 2.0
        candidate = []
        for current, proposed in zip(self.targets, suggestion.suggested_f_f):
            usable = proposed is not None and 0 < proposed < nyquist
            candidate.append(float(proposed) if usable else current)
        d_incumbent = penalized_cost(base_cost, f_hat, self.targets, self.cfg.lambda_f)
        d_candidate = penalized_cost(base_cost, f_hat, candidate, self.cfg.lambda_f)
        accepted = d_candidate <= d_incumbent
        before = tuple(self.targets)
        if accepted:
            self.targets[:] = candidate
        self.history.append(d_candidate if accepted else d_incumbent)
        self.transcript.append(
            FeedbackRound(
                pass_name=pass_name,
                sweep=sweep,
                base_cost=base_cost,
                f_hat=f_hat,
                targets_before=before,
                candidate=tuple(candidate),
                accepted=accepted,
                d_incumbent=d_incumbent,
                d_candidate=d_candidate,
                backend_id=suggestion.backend_id,
                fallback_used=fallback_used,
                prompt_text=prompt.text,
                response_text=raw or suggestion.diagnosis_note,
            )
        )


def run_lingonmf(
    y: np.ndarray,
    sample_rate: int,
    cfg: SeparationConfig,
    http_config: HttpAdvisorConfig | None = None,
) -> SeparationResult:
    """Advisor-in-the-loop separation.

    Factorization sweeps are identical to the plain multilayer pipeline;
    every ``feedback_every`` sweeps (up to the round budget per pass) the
    current rows are de-shifted, featurized, and sent to the advisor, and
    the proposed targets are kept only if the penalized cost at the current
    fit does not increase. Targets persist from the heart pass into the
    lung pass.
    """
    y = _validate_mixtures(y)
    bands = _clamped_bands(cfg, sample_rate)
    loop = _FeedbackLoop(cfg, sample_rate, bands, http_config)
    stacks: dict[str, LayerStack] = {}
    traces: dict[str, FitTrace] = {}
    shifts: dict[str, tuple[float, float]] = {}
    picked: dict[str, np.ndarray] = {}
    for pass_index, (pass_name, params) in enumerate(_pass_list(cfg), start=1):
        ctrl = IterationControls(cfg.max_iter, cfg.rel_tol, seed=cfg.seed + pass_index)
        lam2 = resolve_offset(y, params.lambda1, params.lambda2)
        fixed = dataclasses.replace(params, lambda2=lam2)
        rounds_at_start = len(loop.transcript)

        def hook(sweep, stack, cost, _name=pass_name, _lam=(fixed.lambda1, lam2), _base=rounds_at_start):
            if cfg.advisor_mode == "off":
                return
            if (sweep + 1) % cfg.feedback_every != 0:
                return
            if len(loop.transcript) - _base >= cfg.max_feedback_rounds:
                return
            rows = invert_affine(stack.X, _lam[0], _lam[1])
            loop.run_round(_name, sweep, cost, rows)

        stack, trace, shift = run_plnmf_pass(y, fixed, ctrl, 2, sweep_hook=hook)
        rows = invert_affine(stack.X, shift[0], shift[1])
        assign = assign_sources(rows, sample_rate, bands)
        index = assign.heart_index if pass_name == "heart" else assign.lung_index
        picked[pass_name] = rows[index]
        stacks[pass_name] = stack
        traces[pass_name] = trace
        shifts[pass_name] = shift
    return SeparationResult(
        heart=Signal(picked["heart"], sample_rate),
        lung=Signal(picked["lung"], sample_rate),
        stacks=stacks,
        traces=traces,
        shifts=shifts,
        penalized_cost_history=loop.history,
        advisor_transcript=loop.transcript,
        final_f_f=tuple(loop.targets),
        method="lingonmf",
    )


def run_baseline(
    y: np.ndarray,
    sample_rate: int,
    method: str,
    cfg: SeparationConfig,
    http_config: HttpAdvisorConfig | None = None,
) -> SeparationResult:
    """Run one of the comparison pipelines with no advisor involvement.

    "plnmf" is the multilayer pipeline as configured, "alpha" the same with
    a single layer, and "standard" the Euclidean baseline; "lingonmf"
    delegates to the advisor loop.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if method == "lingonmf":
        return run_lingonmf(y, sample_rate, cfg, http_config)
    y = _validate_mixtures(y)
    bands = _clamped_bands(cfg, sample_rate)
    stacks: dict[str, LayerStack] = {}
    traces: dict[str, FitTrace] = {}
    shifts: dict[str, tuple[float, float]] = {}
    picked: dict[str, np.ndarray] = {}
    for pass_index, (pass_name, params) in enumerate(_pass_list(cfg), start=1):
        ctrl = IterationControls(cfg.max_iter, cfg.rel_tol, seed=cfg.seed + pass_index)
        if method == "standard":
            lam2 = resolve_offset(y, params.lambda1, params.lambda2)
            ys = affine_shift(y, params.lambda1, lam2)
            a, x, trace = standard_nmf(ys, 2, ctrl)
            stack = LayerStack([a], x)
            shift = (params.lambda1, lam2)
        else:
            run_params = params
            if method == "alpha":
                run_params = dataclasses.replace(params, layers=1)
            stack, trace, shift = run_plnmf_pass(y, run_params, ctrl, 2)
        rows = invert_affine(stack.X, shift[0], shift[1])
        assign = assign_sources(rows, sample_rate, bands)
        index = assign.heart_index if pass_name == "heart" else assign.lung_index
        picked[pass_name] = rows[index]
        stacks[pass_name] = stack
        traces[pass_name] = trace
        shifts[pass_name] = shift
    return SeparationResult(
        heart=Signal(picked["heart"], sample_rate),
        lung=Signal(picked["lung"], sample_rate),
        stacks=stacks,
        traces=traces,
        shifts=shifts,
        penalized_cost_history=[],
        advisor_transcript=[],
        final_f_f=tuple(cfg.f_f_targets),
        method=method,
    )
