"""Command-line interface: separate, synth, features, evaluate, sweep.

Configuration precedence is flags, then ADVISOR_* environment variables,
then the JSON config file, then built-in defaults. Every invocation writes
a manifest that records the resolved configuration, the input hashes, and
the seed, which is enough to replay the run exactly.

Exit codes: 0 success, 1 usage, 2 file I/O or format, 3 numeric failure,
4 advisor failure with fallback disabled.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .advisor import HttpAdvisorConfig
from .errors import (
    AdvisorTransportError,
    CardiosepError,
    DataFormatError,
    NumericsError,
    UsageError,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .metrics import (
    MetricReport,
    evaluate_estimates,
    sweep_alpha_layers,
    sweep_lambda_f,
    sweep_num_mixtures,
    write_metrics_csv,
)
from .nmf import PassParams
from .orchestrator import METHODS, SeparationConfig, run_baseline
from .signal_io import (
    Signal,
    load_matrix_csv,
    make_heart_lung_case,
    make_synthetic_dataset,
    read_wav,
    read_wav_matrix,
    save_matrix_csv,
    synth_mixtures,
    write_wav,
    write_wav_matrix,
)
from .spectral import extract_features

logger = logging.getLogger(__name__)

DEFAULT_SAMPLE_RATE = 4000

CONFIG_DEFAULTS = {
    "heart_lambda1": 1.0,
    "heart_lambda2": "auto",
    "heart_alpha": 0.5,
    "heart_layers": 2,
    "lung_lambda1": 1.0,
    "lung_lambda2": "auto",
    "lung_alpha": 0.5,
    "lung_layers": 1,
    "lambda_f": 0.01,
    "f_init": [50.0, 50.0],
    "bands": [[20.0, 200.0], [100.0, 1200.0]],
    "max_iter": 500,
    "tol": 1e-6,
    "feedback_every": 25,
    "max_feedback_rounds": 10,
    "seed": 0,
    "advisor_mode": "heuristic",
    "advisor_endpoint": "",
    "advisor_api_key": "",
    "advisor_timeout_s": 30.0,
    "advisor_model": "llama-2-7b-chat",
    "advisor_fallback": True,
    "sample_rate": DEFAULT_SAMPLE_RATE,
    "jobs": 1,
}


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as exceptions (exit code 1)."""

    def error(self, message):
        raise UsageError(message)


def _parse_pair(text: str, name: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"{name} expects two comma-separated values, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise UsageError(f"cannot parse {name} value {text!r}") from exc


def _parse_bands(text: str) -> list[list[float]]:
    bands = []
    for chunk in text.split(","):
        lohi = chunk.split("-")
        if len(lohi) != 2:
            raise UsageError(f"band {chunk!r} must look like LO-HI")
        try:
            bands.append([float(lohi[0]), float(lohi[1])])
        except ValueError as exc:
            raise UsageError(f"cannot parse band {chunk!r}") from exc
    if len(bands) != 2:
        raise UsageError("expected exactly two bands, e.g. 20-200,100-1200")
    return bands


def _parse_lambda2(text: str):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError as exc:
        raise UsageError(f"--lambda2 expects a number or 'auto', got {text!r}") from exc


def _parse_float_list(text: str, name: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v != ""]
    except ValueError as exc:
        raise UsageError(f"cannot parse {name} list {text!r}") from exc


def _parse_int_list(text: str, name: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v != ""]
    except ValueError as exc:
        raise UsageError(f"cannot parse {name} list {text!r}") from exc


def _parse_mixing(text: str) -> np.ndarray:
    try:
        rows = [[float(v) for v in row.split(",")] for row in text.split(";")]
        return np.asarray(rows, dtype=np.float64)
    except ValueError as exc:
        raise UsageError(f"cannot parse mixing matrix {text!r}") from exc


def _load_config_file(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise DataFormatError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"config file {path} is not valid JSON: {exc}") from exc
    unknown = set(data) - set(CONFIG_DEFAULTS)
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return data


def _resolve_settings(args) -> dict:
    """Merge defaults, config file, ADVISOR_* environment, and flags."""
    settings = dict(CONFIG_DEFAULTS)
    if getattr(args, "config", None):
        settings.update(_load_config_file(args.config))
    env = os.environ
    if env.get("ADVISOR_MODE"):
        settings["advisor_mode"] = env["ADVISOR_MODE"]
    if env.get("ADVISOR_ENDPOINT"):
        settings["advisor_endpoint"] = env["ADVISOR_ENDPOINT"]
    if env.get("ADVISOR_API_KEY"):
        settings["advisor_api_key"] = env["ADVISOR_API_KEY"]
    if env.get("ADVISOR_TIMEOUT_S"):
        settings["advisor_timeout_s"] = float(env["ADVISOR_TIMEOUT_S"])
    if getattr(args, "alpha", None) is not None:
        settings["heart_alpha"] = settings["lung_alpha"] = args.alpha
    if getattr(args, "layers", None) is not None:
        settings["heart_layers"] = settings["lung_layers"] = args.layers
    if getattr(args, "lambda1", None) is not None:
        settings["heart_lambda1"] = settings["lung_lambda1"] = args.lambda1
    if getattr(args, "lambda2", None) is not None:
        value = _parse_lambda2(args.lambda2)
        settings["heart_lambda2"] = settings["lung_lambda2"] = value
    if getattr(args, "lambda_f", None) is not None:
        settings["lambda_f"] = args.lambda_f
    if getattr(args, "f_init", None) is not None:
        settings["f_init"] = list(_parse_pair(args.f_init, "--f-init"))
    if getattr(args, "bands", None) is not None:
        settings["bands"] = _parse_bands(args.bands)
    if getattr(args, "advisor", None) is not None:
        settings["advisor_mode"] = args.advisor
    if getattr(args, "seed", None) is not None:
        settings["seed"] = args.seed
    if getattr(args, "max_iter", None) is not None:
        settings["max_iter"] = args.max_iter
    if getattr(args, "tol", None) is not None:
        settings["tol"] = args.tol
    if getattr(args, "feedback_every", None) is not None:
        settings["feedback_every"] = args.feedback_every
    if getattr(args, "jobs", None) is not None:
        settings["jobs"] = args.jobs
    if getattr(args, "rate", None) is not None:
        settings["sample_rate"] = args.rate
    return settings


def _separation_config(settings: dict) -> SeparationConfig:
    try:
        return SeparationConfig(
            heart_params=PassParams(
                lambda1=settings["heart_lambda1"],
                lambda2=settings["heart_lambda2"],
                alpha=settings["heart_alpha"],
                layers=int(settings["heart_layers"]),
            ),
            lung_params=PassParams(
                lambda1=settings["lung_lambda1"],
                lambda2=settings["lung_lambda2"],
                alpha=settings["lung_alpha"],
                layers=int(settings["lung_layers"]),
            ),
            lambda_f=settings["lambda_f"],
            f_f_targets=tuple(settings["f_init"]),
            f_bands=tuple(tuple(b) for b in settings["bands"]),
            max_iter=int(settings["max_iter"]),
            rel_tol=settings["tol"],
            feedback_every=int(settings["feedback_every"]),
            max_feedback_rounds=int(settings["max_feedback_rounds"]),
            seed=int(settings["seed"]),
            advisor_mode=settings["advisor_mode"],
            advisor_fallback=bool(settings["advisor_fallback"]),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _http_config(settings: dict) -> HttpAdvisorConfig | None:
    if settings["advisor_mode"] != "http":
        return None
    if not settings["advisor_endpoint"]:
        return None  # resolved from the environment at call time
    return HttpAdvisorConfig(
        endpoint=settings["advisor_endpoint"],
        api_key=settings["advisor_api_key"] or None,
        timeout_s=settings["advisor_timeout_s"],
        model=settings["advisor_model"],
    )


def _resolve_outdir(arg) -> Path:
    if arg:
        out = Path(arg)
    else:
        stamp = time.strftime("%Y%m%d-%H%M%S")
        out = Path(f"out-{stamp}")
        suffix = 0
        while out.exists():
            suffix += 1
            out = Path(f"out-{stamp}-{suffix}")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(outdir: Path, command: str, settings: dict, inputs, outputs):
    manifest = {
        "toolkit_version": __version__,
        "command": command,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "kernel_backend": KERNEL_BACKEND,
        "seed": settings.get("seed"),
        "config": settings,
        "inputs": [
            {"path": str(p), "sha256": _sha256(p), "bytes": os.path.getsize(p)}
            for p in inputs
        ],
        "outputs": sorted(str(o) for o in outputs),
    }
    path = outdir / "manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _load_mixture_inputs(paths, settings) -> tuple[np.ndarray, int]:
    rows = []
    rates = []
    for path in paths:
        suffix = Path(path).suffix.lower()
        if suffix == ".csv":
            rows.append(load_matrix_csv(path))
        elif suffix == ".wav":
            matrix, rate = read_wav_matrix(path)
            rows.append(matrix)
            rates.append(rate)
        else:
            raise UsageError(f"unsupported input type {suffix!r} for {path}")
    if len({r.shape[1] for r in rows}) > 1:
        raise UsageError("all mixture inputs must have the same sample count")
    if rates and len(set(rates)) > 1:
        raise UsageError("WAV inputs disagree on the sample rate")
    matrix = np.vstack(rows)
    rate = rates[0] if rates else int(settings["sample_rate"])
    if matrix.shape[0] < 2:
        raise UsageError(
            "separation needs at least two mixture rows "
            "(a multi-channel WAV, several mono WAVs, or a CSV matrix)"
        )
    return matrix, rate


def _load_signal(path) -> Signal | np.ndarray:
    suffix = Path(path).suffix.lower()
    if suffix == ".wav":
        return read_wav(path)
    if suffix == ".csv":
        matrix = load_matrix_csv(path)
        return matrix
    raise UsageError(f"unsupported input type {suffix!r} for {path}")


def _write_cost_trace(result, path) -> None:
    penalized = {
        (r.pass_name, r.sweep): (r.d_candidate if r.accepted else r.d_incumbent)
        for r in result.advisor_transcript
    }
    with open(path, "w", newline="") as fh:
        fh.write("pass,sweep,cost,penalized_cost\n")
        for pass_name in ("heart", "lung"):
            trace = result.traces[pass_name]
            for sweep, cost in enumerate(trace.costs):
                extra = penalized.get((pass_name, sweep))
                tail = repr(extra) if extra is not None else ""
                fh.write(f"{pass_name},{sweep},{cost!r},{tail}\n")


def _write_transcript(result, path) -> None:
    with open(path, "w") as fh:
        if not result.advisor_transcript:
            fh.write("# no advisor exchanges\n")
        for entry in result.advisor_transcript:
            stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
            fh.write(
                f"[{stamp}] pass={entry.pass_name} sweep={entry.sweep} "
                f"backend={entry.backend_id} accepted={entry.accepted} "
                f"fallback={entry.fallback_used}\n"
            )
            fh.write(f"targets_before: {entry.targets_before}\n")
            fh.write(f"candidate: {entry.candidate}\n")
            fh.write(f"f_hat: {entry.f_hat}\n")
            fh.write(
                f"d_incumbent: {entry.d_incumbent!r} "
                f"d_candidate: {entry.d_candidate!r}\n"
            )
            fh.write("--- prompt ---\n")
            fh.write(entry.prompt_text + "\n")
            fh.write("--- response ---\n")
            fh.write((entry.response_text or "(none)") + "\n")
            fh.write("===\n")


def cmd_separate(args) -> int:
    settings = _resolve_settings(args)
    cfg = _separation_config(settings)
    http_config = _http_config(settings)
    matrix, rate = _load_mixture_inputs(args.inputs, settings)
    settings["sample_rate"] = rate
    outdir = _resolve_outdir(args.output)
    result = run_baseline(matrix, rate, args.method, cfg, http_config)
    write_wav(result.heart, outdir / "heart.wav")
    write_wav(result.lung, outdir / "lung.wav")
    _write_cost_trace(result, outdir / "cost_trace.csv")
    _write_transcript(result, outdir / "transcript.log")
    outputs = ["heart.wav", "lung.wav", "cost_trace.csv", "transcript.log"]
    _write_manifest(outdir, "separate", settings, args.inputs, outputs)
    print(f"separated {len(args.inputs)} input(s) into {outdir}")
    print(
        f"method={result.method} final targets: "
        f"heart {result.final_f_f[0]:.2f} Hz, lung {result.final_f_f[1]:.2f} Hz"
    )
    return 0


def cmd_synth(args) -> int:
    settings = _resolve_settings(args)
    rate = int(settings["sample_rate"])
    seed = int(settings["seed"])
    if args.sources:
        signals = [read_wav(p) for p in args.sources]
        if len({s.sample_rate for s in signals}) > 1:
            raise UsageError("source WAVs disagree on the sample rate")
        if len({len(s) for s in signals}) > 1:
            raise UsageError("source WAVs disagree on the sample count")
        rate = signals[0].sample_rate
        sources = np.vstack([s.samples for s in signals])
        mixing = (
            _parse_mixing(args.mixing) if args.mixing else np.eye(sources.shape[0])
        )
        case = synth_mixtures(
            sources, mixing, noise_db=args.noise_db, seed=seed, sample_rate=rate
        )
    elif args.preset:
        mixing = _parse_mixing(args.mixing) if args.mixing else None
        case = make_heart_lung_case(
            sample_rate=rate,
            duration=args.duration,
            seed=seed,
            mixing=mixing,
            noise_db=args.noise_db,
        )
    else:
        raise UsageError("provide --sources WAV files or --preset heart-lung")
    outdir = _resolve_outdir(args.output)
    write_wav_matrix(case.mixtures, case.sample_rate, outdir / "mixture.wav")
    save_matrix_csv(case.mixtures, outdir / "mixture.csv")
    save_matrix_csv(case.sources, outdir / "sources.csv")
    save_matrix_csv(case.mixing, outdir / "mixing.csv")
    outputs = ["mixture.wav", "mixture.csv", "sources.csv", "mixing.csv"]
    _write_manifest(outdir, "synth", settings, args.sources or [], outputs)
    print(
        f"wrote {case.n_mixtures}x{case.n_samples} mixtures at "
        f"{case.sample_rate} Hz to {outdir}"
    )
    return 0


def _feature_block(name: str, fv) -> str:
    lines = [
        f"File: {name}",
        f"- Spectral centroid: {fv.spectral_centroid:.2f} Hz",
        f"- Root mean square energy: {fv.rms_energy:.2f}",
        f"- Zero-crossing rate: {fv.zero_crossing_rate:.2f}",
        f"- Variance: {fv.variance:.2f}",
        f"- Mean frequency: {fv.mean_frequency:.2f} Hz",
        f"- Maximum amplitude: {fv.max_amplitude:.2f}",
        f"- Fundamental frequency: {fv.fundamental_frequency:.2f} Hz",
    ]
    return "\n".join(lines)


def cmd_features(args) -> int:
    settings = _resolve_settings(args)
    band = None
    if args.band:
        lo, hi = args.band.split("-")
        band = (float(lo), float(hi))
    records = []
    for path in args.inputs:
        signal = _load_signal(path)
        if not isinstance(signal, Signal):
            raise UsageError(f"features expects WAV input, got {path}")
        fv = extract_features(signal, band)
        records.append((path, fv))
    outdir = _resolve_outdir(args.output)
    outputs = []
    if args.json:
        payload = [
            {"file": str(p), **dataclasses.asdict(fv)} for p, fv in records
        ]
        text = json.dumps(payload, indent=2, sort_keys=True)
        outputs.append("features.json")
        (outdir / "features.json").write_text(text + "\n")
    else:
        text = "\n\n".join(_feature_block(str(p), fv) for p, fv in records)
        outputs.append("features.txt")
        (outdir / "features.txt").write_text(text + "\n")
    print(text)
    _write_manifest(outdir, "features", settings, args.inputs, outputs)
    return 0


def _as_rows(value) -> np.ndarray:
    if isinstance(value, Signal):
        return value.samples[None, :]
    return np.atleast_2d(value)


def cmd_evaluate(args) -> int:
    settings = _resolve_settings(args)
    estimates = np.vstack([_as_rows(_load_signal(p)) for p in args.estimates])
    references = np.vstack([_as_rows(_load_signal(p)) for p in args.references])
    if estimates.shape != references.shape:
        raise UsageError(
            f"estimates {estimates.shape} and references {references.shape} "
            "must have matching shapes"
        )
    names = ("heart", "lung") if estimates.shape[0] == 2 else tuple(
        f"source{i + 1}" for i in range(estimates.shape[0])
    )
    reports = evaluate_estimates(
        estimates,
        references,
        source_names=names,
        scale_invariant=not args.no_scale_invariant,
        method=args.method,
    )
    outdir = _resolve_outdir(args.output)
    write_metrics_csv(reports, outdir / "metrics.csv")
    for report in reports:
        print(
            f"{report.source}: SDR {report.sdr_db:.2f} dB, "
            f"SIR {report.sir_db:.2f} dB, SAR {report.sar_db:.2f} dB, "
            f"SNR {report.snr_db:.2f} dB"
        )
    _write_manifest(
        outdir,
        "evaluate",
        settings,
        list(args.estimates) + list(args.references),
        ["metrics.csv"],
    )
    return 0


def cmd_sweep(args) -> int:
    settings = _resolve_settings(args)
    cfg = _separation_config(settings)
    jobs = int(settings["jobs"])
    dataset = make_synthetic_dataset(
        n_cases=args.cases,
        sample_rate=int(settings["sample_rate"]),
        duration=args.duration,
        seed=int(settings["seed"]),
        noise_db=args.noise_db,
    )
    if args.kind == "alpha-layers":
        alphas = _parse_float_list(args.alphas, "--alphas")
        layer_counts = _parse_int_list(args.layer_counts, "--layer-counts")
        sweep = sweep_alpha_layers(dataset, alphas, layer_counts, cfg, jobs=jobs)
    elif args.kind == "lambda-f":
        values = _parse_float_list(args.lambda_f_values, "--lambda-f-values")
        sweep = sweep_lambda_f(dataset, values, cfg, jobs=jobs)
        print(f"best lambda_f by averaged SNR: {sweep.best_lambda_f}")
    elif args.kind == "mixtures":
        m_values = _parse_int_list(args.m_values, "--m-values")
        case = dataset[0]
        sweep = sweep_num_mixtures(
            case.sources,
            case.sample_rate,
            m_values,
            cfg,
            noise_db=args.noise_db,
            jobs=jobs,
        )
    else:  # pragma: no cover - argparse choices guard this
        raise UsageError(f"unknown sweep kind {args.kind!r}")
    outdir = _resolve_outdir(args.output)
    write_metrics_csv(sweep.aggregate, outdir / "sweep.csv")
    for report in sweep.aggregate:
        label = f"alpha={report.alpha} L={report.layers}"
        if args.kind == "lambda-f":
            label = f"lambda_f={report.lambda_f}"
        if args.kind == "mixtures":
            label = f"M={report.n_mixtures}"
        print(f"{label} {report.source}: SNR {report.snr_db:.2f} dB")
    _write_manifest(outdir, "sweep", settings, [], ["sweep.csv"])
    return 0


def _add_config_flags(sub):
    sub.add_argument("--config", help="JSON config file with flat keys")
    sub.add_argument("--alpha", type=float, help="divergence order for both passes")
    sub.add_argument("--layers", type=int, help="layer count for both passes")
    sub.add_argument("--lambda1", type=float, help="affine shift scale")
    sub.add_argument("--lambda2", help="affine shift offset or 'auto'")
    sub.add_argument("--lambda-f", dest="lambda_f", type=float,
                     help="frequency penalty weight")
    sub.add_argument("--f-init", dest="f_init",
                     help="initial frequency targets, e.g. 50,50")
    sub.add_argument("--bands", help="frequency bands, e.g. 20-200,100-1200")
    sub.add_argument("--advisor", choices=["heuristic", "http", "off"])
    sub.add_argument("--seed", type=int)
    sub.add_argument("--max-iter", dest="max_iter", type=int)
    sub.add_argument("--tol", type=float)
    sub.add_argument("--feedback-every", dest="feedback_every", type=int)
    sub.add_argument("--jobs", type=int)
    sub.add_argument("--rate", type=int, help="sample rate for CSV inputs")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cardiosep", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command")

    sep = subs.add_parser("separate", help="separate heart and lung estimates")
    sep.add_argument("-i", "--input", dest="inputs", action="append", required=True,
                     help="mixture WAV or CSV (repeatable)")
    sep.add_argument("-o", "--output", help="output directory")
    sep.add_argument("--method", choices=list(METHODS), default="lingonmf")
    _add_config_flags(sep)
    sep.set_defaults(func=cmd_separate)

    syn = subs.add_parser("synth", help="synthesize mixtures with ground truth")
    syn.add_argument("-o", "--output", help="output directory")
    syn.add_argument("--sources", nargs="+", help="source WAV files to mix")
    syn.add_argument("--preset", choices=["heart-lung"],
                     help="generate the bundled synthetic source pair")
    syn.add_argument("--mixing", help="matrix rows 'a,b;c,d' (default identity)")
    syn.add_argument("--noise-db", dest="noise_db", type=float,
                     help="additive white noise SNR in dB")
    syn.add_argument("--duration", type=float, default=12.0)
    _add_config_flags(syn)
    syn.set_defaults(func=cmd_synth)

    feat = subs.add_parser("features", help="print waveform/spectral features")
    feat.add_argument("-i", "--input", dest="inputs", action="append",
                      required=True, help="WAV file (repeatable)")
    feat.add_argument("-o", "--output", help="output directory")
    feat.add_argument("--band", help="dominant-frequency search band LO-HI")
    feat.add_argument("--json", action="store_true")
    _add_config_flags(feat)
    feat.set_defaults(func=cmd_features)

    ev = subs.add_parser("evaluate", help="score estimates against references")
    ev.add_argument("--estimates", nargs="+", required=True)
    ev.add_argument("--references", nargs="+", required=True)
    ev.add_argument("--method", default="external", help="method label for the CSV")
    ev.add_argument("--no-scale-invariant", action="store_true",
                    help="disable optimal rescaling in the SNR")
    ev.add_argument("-o", "--output", help="output directory")
    _add_config_flags(ev)
    ev.set_defaults(func=cmd_evaluate)

    sw = subs.add_parser("sweep", help="run a hyperparameter sweep harness")
    sw.add_argument("--kind", required=True,
                    choices=["alpha-layers", "lambda-f", "mixtures"])
    sw.add_argument("--cases", type=int, default=5,
                    help="synthetic cases per cell")
    sw.add_argument("--duration", type=float, default=10.0)
    sw.add_argument("--noise-db", dest="noise_db", type=float)
    sw.add_argument("--alphas", default="-1,0,0.5,1,2,10")
    sw.add_argument("--layer-counts", dest="layer_counts", default="1,2,3,4")
    sw.add_argument("--lambda-f-values", dest="lambda_f_values",
                    default="0,0.001,0.01,0.1")
    sw.add_argument("--m-values", dest="m_values", default="2,3,5,7")
    sw.add_argument("-o", "--output", help="output directory")
    _add_config_flags(sw)
    sw.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_help()
            return 1
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataFormatError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    except AdvisorTransportError as exc:
        print(f"advisor error: {exc}", file=sys.stderr)
        return 4
    except (NumericsError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except CardiosepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
