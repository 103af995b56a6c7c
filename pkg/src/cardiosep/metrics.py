"""Separation quality metrics and the hyperparameter sweep harnesses.

The distortion decomposition is the time-invariant projection variant:
the estimate is split into its projection onto the target reference, the
remaining projection onto the span of all references (interference), and
the out-of-span residual (artifacts). The three parts are orthogonal and
sum to the estimate exactly.
"""

from __future__ import annotations

import csv
import dataclasses
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .errors import NumericsError
from .orchestrator import SeparationConfig, SeparationResult, run_baseline
from .signal_io import MixtureSet, synth_mixtures

# dB values are clamped here so that perfect or empty components stay
# finite in CSV output while remaining unmistakably sentinel values.
CLAMP_DB = 300.0

CSV_HEADER = (
    "method",
    "alpha",
    "layers",
    "lambda_f",
    "M",
    "source",
    "sdr_db",
    "sir_db",
    "sar_db",
    "snr_db",
)


def _db_ratio(numerator: float, denominator: float) -> float:
    if denominator <= 0.0:
        return CLAMP_DB if numerator > 0.0 else -CLAMP_DB
    if numerator <= 0.0:
        return -CLAMP_DB
    return float(np.clip(10.0 * np.log10(numerator / denominator), -CLAMP_DB, CLAMP_DB))


def bss_decompose(
    estimate: np.ndarray, references: np.ndarray, target_index: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split an estimate into target, interference, and artifact parts.

    Returns (s_target, e_interf, e_artif) with
    estimate = s_target + e_interf + e_artif and pairwise orthogonality.
    """
    estimate = np.asarray(estimate, dtype=np.float64).ravel()
    references = np.atleast_2d(np.asarray(references, dtype=np.float64))
    n_refs, t_len = references.shape
    if estimate.size != t_len:
        raise ValueError("estimate and references must have equal length")
    if not 0 <= target_index < n_refs:
        raise ValueError(f"target index {target_index} out of range")
    energies = np.sum(references**2, axis=1)
    if np.any(energies == 0.0):
        raise NumericsError("a reference source has zero energy")
    gram = references @ references.T
    if np.linalg.matrix_rank(gram) < n_refs:
        raise NumericsError("reference sources are collinear")
    coeffs = np.linalg.solve(gram, references @ estimate)
    projection = references.T @ coeffs
    target = references[target_index]
    s_target = (np.dot(estimate, target) / energies[target_index]) * target
    e_interf = projection - s_target
    e_artif = estimate - projection
    return s_target, e_interf, e_artif


def sdr(s_target: np.ndarray, e_interf: np.ndarray, e_artif: np.ndarray) -> float:
    """Signal-to-distortion ratio in dB."""
    return _db_ratio(np.sum(s_target**2), np.sum((e_interf + e_artif) ** 2))


def sir(s_target: np.ndarray, e_interf: np.ndarray, e_artif: np.ndarray) -> float:
    """Signal-to-interference ratio in dB."""
    return _db_ratio(np.sum(s_target**2), np.sum(e_interf**2))


def sar(s_target: np.ndarray, e_interf: np.ndarray, e_artif: np.ndarray) -> float:
    """Signal-to-artifact ratio in dB."""
    return _db_ratio(np.sum((s_target + e_interf) ** 2), np.sum(e_artif**2))


def snr(
    reference: np.ndarray, estimate: np.ndarray, scale_invariant: bool = True
) -> float:
    """Reconstruction SNR in dB, optionally after optimal rescaling.

    Factorization output scale is arbitrary, so the scale-invariant form
    (rescale the estimate by <s, s_hat> / ||s_hat||^2 first) is the default.
    """
    reference = np.asarray(reference, dtype=np.float64).ravel()
    estimate = np.asarray(estimate, dtype=np.float64).ravel()
    if reference.size != estimate.size:
        raise ValueError("reference and estimate must have equal length")
    ref_energy = np.sum(reference**2)
    if ref_energy == 0.0:
        raise NumericsError("reference signal has zero energy")
    if scale_invariant:
        est_energy = np.sum(estimate**2)
        if est_energy > 0.0:
            estimate = estimate * (np.dot(reference, estimate) / est_energy)
    return _db_ratio(ref_energy, np.sum((reference - estimate) ** 2))


@dataclasses.dataclass
class MetricReport:
    """One metric row; optional fields fill the sweep CSV columns."""

    source: str
    sdr_db: float
    sir_db: float
    sar_db: float
    snr_db: float
    method: str = ""
    alpha: float | None = None
    layers: int | None = None
    lambda_f: float | None = None
    n_mixtures: int | None = None

    def csv_row(self) -> list[str]:
        def fmt(v):
            return "" if v is None else repr(v) if isinstance(v, float) else str(v)

        return [
            self.method,
            fmt(self.alpha),
            fmt(self.layers),
            fmt(self.lambda_f),
            fmt(self.n_mixtures),
            self.source,
            repr(self.sdr_db),
            repr(self.sir_db),
            repr(self.sar_db),
            repr(self.snr_db),
        ]


def evaluate_estimates(
    estimates: np.ndarray,
    references: np.ndarray,
    source_names: tuple[str, ...] = ("heart", "lung"),
    scale_invariant: bool = True,
    **labels,
) -> list[MetricReport]:
    """Score estimate row i against reference row i for each source."""
    estimates = np.atleast_2d(np.asarray(estimates, dtype=np.float64))
    references = np.atleast_2d(np.asarray(references, dtype=np.float64))
    if estimates.shape != references.shape:
        raise ValueError("estimates and references must have matching shapes")
    reports = []
    for i, name in enumerate(source_names[: estimates.shape[0]]):
        parts = bss_decompose(estimates[i], references, i)
        reports.append(
            MetricReport(
                source=name,
                sdr_db=sdr(*parts),
                sir_db=sir(*parts),
                sar_db=sar(*parts),
                snr_db=snr(references[i], estimates[i], scale_invariant),
                **labels,
            )
        )
    return reports


def evaluate_result(
    result: SeparationResult, mixture_set: MixtureSet, **labels
) -> list[MetricReport]:
    """Score a separation against its case's ground truth (heart row 0,
    lung row 1)."""
    if mixture_set.sources is None:
        raise ValueError("mixture set carries no ground-truth sources")
    estimates = np.vstack([result.heart.samples, result.lung.samples])
    return evaluate_estimates(
        estimates, mixture_set.sources, method=result.method, **labels
    )


def write_metrics_csv(reports: list[MetricReport], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for report in reports:
            writer.writerow(report.csv_row())


# ---------------------------------------------------------------------------
# Sweep harnesses
# ---------------------------------------------------------------------------


@dataclasses.dataclass
class SweepResult:
    """Aggregated rows (one per cell and source) plus per-case detail."""

    aggregate: list[MetricReport]
    per_case: list[dict]
    best_lambda_f: float | None = None


def _mean_reports(per_case_rows: list[dict], **labels) -> list[MetricReport]:
    reports = []
    for name in ("heart", "lung"):
        rows = [r for r in per_case_rows if r["source"] == name]
        reports.append(
            MetricReport(
                source=name,
                sdr_db=float(np.mean([r["sdr_db"] for r in rows])),
                sir_db=float(np.mean([r["sir_db"] for r in rows])),
                sar_db=float(np.mean([r["sar_db"] for r in rows])),
                snr_db=float(np.mean([r["snr_db"] for r in rows])),
                **labels,
            )
        )
    return reports


def _case_rows(reports: list[MetricReport], case_index: int, **extra) -> list[dict]:
    rows = []
    for report in reports:
        row = dataclasses.asdict(report)
        row["case"] = case_index
        row.update(extra)
        rows.append(row)
    return rows


def _run_alpha_layer_cell(job):
    alpha, layers, cfg, dataset, method = job
    cell_cfg = dataclasses.replace(
        cfg,
        heart_params=dataclasses.replace(cfg.heart_params, alpha=alpha, layers=layers),
        lung_params=dataclasses.replace(cfg.lung_params, alpha=alpha, layers=layers),
    )
    rows = []
    for i, case in enumerate(dataset):
        result = run_baseline(case.mixtures, case.sample_rate, method, cell_cfg)
        reports = evaluate_result(
            result, case, alpha=alpha, layers=layers, lambda_f=cell_cfg.lambda_f
        )
        rows.extend(_case_rows(reports, i, alpha=alpha, layers=layers))
    return rows


def _map_jobs(worker, jobs, n_workers):
    if n_workers <= 1:
        return [worker(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(worker, jobs))


def sweep_alpha_layers(
    dataset: list[MixtureSet],
    alphas,
    layer_counts,
    cfg: SeparationConfig,
    method: str = "plnmf",
    jobs: int = 1,
) -> SweepResult:
    """Grid over divergence order and layer count, averaged over the
    dataset."""
    grid = [(float(a), int(l)) for a in alphas for l in layer_counts]
    job_list = [(a, l, cfg, dataset, method) for a, l in grid]
    results = _map_jobs(_run_alpha_layer_cell, job_list, jobs)
    aggregate: list[MetricReport] = []
    per_case: list[dict] = []
    for (a, l), rows in zip(grid, results):
        per_case.extend(rows)
        aggregate.extend(
            _mean_reports(rows, method=method, alpha=a, layers=l, lambda_f=cfg.lambda_f)
        )
    return SweepResult(aggregate, per_case)


def _run_lambda_cell(job):
    lam, cfg, dataset = job
    cell_cfg = dataclasses.replace(cfg, lambda_f=lam)
    rows = []
    for i, case in enumerate(dataset):
        result = run_baseline(case.mixtures, case.sample_rate, "lingonmf", cell_cfg)
        reports = evaluate_result(result, case, lambda_f=lam)
        rows.extend(_case_rows(reports, i, lambda_f=lam))
    return rows


def sweep_lambda_f(
    dataset: list[MixtureSet],
    lambda_values,
    cfg: SeparationConfig,
    jobs: int = 1,
) -> SweepResult:
    """Sweep the penalty weight; always includes 0 and reports the argmax.

    The winner maximizes the mean of the averaged heart and lung SNR, ties
    resolving to the smallest weight.
    """
    values = sorted({0.0} | {float(v) for v in lambda_values})
    results = _map_jobs(_run_lambda_cell, [(v, cfg, dataset) for v in values], jobs)
    aggregate: list[MetricReport] = []
    per_case: list[dict] = []
    scores: list[tuple[float, float]] = []
    for lam, rows in zip(values, results):
        per_case.extend(rows)
        means = _mean_reports(rows, method="lingonmf", lambda_f=lam)
        aggregate.extend(means)
        scores.append((lam, float(np.mean([m.snr_db for m in means]))))
    best = max(scores, key=lambda pair: (pair[1], -pair[0]))[0]
    return SweepResult(aggregate, per_case, best_lambda_f=best)


def _run_mixture_cell(job):
    m, sources, sample_rate, cfg, method, noise_db = job
    rng = np.random.default_rng(cfg.seed + 7919 * m)
    mixing = rng.uniform(0.1, 1.0, size=(m, sources.shape[0]))
    case = synth_mixtures(
        sources, mixing, noise_db=noise_db, seed=cfg.seed + m, sample_rate=sample_rate
    )
    result = run_baseline(case.mixtures, case.sample_rate, method, cfg)
    reports = evaluate_result(result, case, n_mixtures=m)
    return _case_rows(reports, 0, n_mixtures=m)


def sweep_num_mixtures(
    sources: np.ndarray,
    sample_rate: int,
    m_values,
    cfg: SeparationConfig,
    method: str = "plnmf",
    noise_db: float | None = None,
    jobs: int = 1,
) -> SweepResult:
    """Remix one source pair through seeded random M x N mixings and score
    each mixture count."""
    sources = np.atleast_2d(np.asarray(sources, dtype=np.float64))
    values = [int(m) for m in m_values]
    if any(m < 2 for m in values):
        raise ValueError("mixture counts must be at least 2")
    job_list = [(m, sources, sample_rate, cfg, method, noise_db) for m in values]
    results = _map_jobs(_run_mixture_cell, job_list, jobs)
    aggregate: list[MetricReport] = []
    per_case: list[dict] = []
    for m, rows in zip(values, results):
        per_case.extend(rows)
        aggregate.extend(_mean_reports(rows, method=method, n_mixtures=m))
    return SweepResult(aggregate, per_case)
