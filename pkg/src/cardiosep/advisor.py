"""Prompt construction, suggestion parsing, and the advisor backends.

Two interchangeable backends propose new dominant-frequency targets for the
penalized cost: a deterministic damped-tracking heuristic that works
offline, and a chat-completion web service speaking the common JSON wire
format. Replies are only trusted when they follow the machine-readable
contract ``heart_f0: <number> Hz`` / ``lung_f0: <number> Hz``; anything
else is kept verbatim as a free-text note.
"""

from __future__ import annotations

import dataclasses
import os
import re

import requests

from .errors import AdvisorTransportError
from .spectral import FeatureVector

PROMPT_HEADER = (
    "Analyze the given sound features and provide a possible diagnosis or "
    "observation. Based on the given features, what are better values for "
    "separation parameters to improve sound separation?"
)

RESPONSE_CONTRACT = (
    "Answer with one line per source in exactly this form, then any "
    "observations:\n"
    "heart_f0: <number> Hz\n"
    "lung_f0: <number> Hz"
)

_FEATURE_LINES = (
    ("Spectral centroid", "spectral_centroid", "Hz"),
    ("Root mean square energy", "rms_energy", ""),
    ("Zero-crossing rate", "zero_crossing_rate", ""),
    ("Variance", "variance", ""),
    ("Mean frequency", "mean_frequency", "Hz"),
    ("Maximum amplitude", "max_amplitude", ""),
    ("Fundamental frequency", "fundamental_frequency", "Hz"),
)

_SOURCE_NAMES = ("heart", "lung")

_F0_PATTERNS = {
    name: re.compile(
        rf"^\s*(?:[-*]\s*)?{name}_f0\s*:\s*([-+]?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)\s*hz\b",
        re.IGNORECASE | re.MULTILINE,
    )
    for name in _SOURCE_NAMES
}


@dataclasses.dataclass
class AdvisorPrompt:
    """Deterministic prompt text plus the data it was rendered from."""

    text: str
    features: list[FeatureVector]
    current_targets: list[float]


@dataclasses.dataclass
class AdvisorSuggestion:
    """Parsed advisor output; a None frequency means "no usable suggestion"."""

    heart_f0: float | None
    lung_f0: float | None
    diagnosis_note: str
    backend_id: str

    @property
    def suggested_f_f(self) -> list[float | None]:
        return [self.heart_f0, self.lung_f0]


def build_prompt(
    features: list[FeatureVector], targets: list[float]
) -> AdvisorPrompt:
    """Render the instruction header plus one labeled block per source.

    Values are fixed at two decimals and the ordering never varies, so
    identical inputs produce byte-identical text.
    """
    if not features:
        raise ValueError("at least one source feature set is required")
    if len(features) != len(targets):
        raise ValueError("need one current target per source")
    blocks = [PROMPT_HEADER, ""]
    for i, (fv, target) in enumerate(zip(features, targets)):
        name = _SOURCE_NAMES[i] if i < len(_SOURCE_NAMES) else f"source{i + 1}"
        blocks.append(f"Source {i + 1} ({name}):")
        for label, attr, unit in _FEATURE_LINES:
            value = getattr(fv, attr)
            suffix = f" {unit}" if unit else ""
            blocks.append(f"- {label}: {value:.2f}{suffix}")
        blocks.append(f"- Current target frequency: {target:.2f} Hz")
        blocks.append("")
    blocks.append(RESPONSE_CONTRACT)
    return AdvisorPrompt("\n".join(blocks), list(features), list(targets))


def parse_response(
    text: str, max_hz: float | None = None, backend_id: str = "unparsed"
) -> AdvisorSuggestion:
    """Extract the contract lines from advisor output; never raises.

    The first match per field wins; nonpositive values (or values at or
    above ``max_hz`` when given) are dropped. Whatever is not a contract
    line is preserved as the diagnosis note.
    """
    text = text if isinstance(text, str) else str(text)
    found: dict[str, float | None] = {}
    spans: list[tuple[int, int]] = []
    for name, pattern in _F0_PATTERNS.items():
        match = pattern.search(text)
        value = None
        if match:
            spans.append(match.span())
            try:
                candidate = float(match.group(1))
            except ValueError:
                candidate = None
            if candidate is not None and candidate > 0:
                if max_hz is None or candidate < max_hz:
                    value = candidate
        found[name] = value
    note = text
    for start, end in sorted(spans, reverse=True):
        note = note[:start] + note[end:]
    return AdvisorSuggestion(
        heart_f0=found["heart"],
        lung_f0=found["lung"],
        diagnosis_note=note.strip(),
        backend_id=backend_id,
    )


def _damped_step(observed: float, target: float, band: tuple[float, float]) -> float:
    delta = observed - target
    step = min(abs(delta), 0.5 * target)
    moved = target + (step if delta >= 0 else -step)
    return float(min(max(moved, band[0]), band[1]))


def heuristic_advise(
    features: list[FeatureVector],
    targets: list[float],
    bands: list[tuple[float, float]],
) -> AdvisorSuggestion:
    """Deterministic stand-in backend: track each source's observed dominant
    frequency, moving at most 50% of the current target per round and
    clamping into the configured band.
    """
    if not (len(features) == len(targets) == len(bands)):
        raise ValueError("features, targets, and bands must align")
    suggested = [
        _damped_step(fv.fundamental_frequency, target, band)
        for fv, target, band in zip(features, targets, bands)
    ]
    heart = suggested[0] if len(suggested) > 0 else None
    lung = suggested[1] if len(suggested) > 1 else None
    return AdvisorSuggestion(heart, lung, diagnosis_note="", backend_id="heuristic")


@dataclasses.dataclass
class HttpAdvisorConfig:
    """Endpoint and generation settings for the chat-completion backend."""

    endpoint: str
    api_key: str | None = None
    timeout_s: float = 30.0
    model: str = "llama-2-7b-chat"
    temperature: float = 0.6
    top_p: float = 0.9
    max_tokens: int = 512

    @classmethod
    def from_env(cls, env: dict | None = None) -> "HttpAdvisorConfig":
        env = os.environ if env is None else env
        endpoint = env.get("ADVISOR_ENDPOINT", "")
        if not endpoint:
            raise AdvisorTransportError(
                "ADVISOR_ENDPOINT is not set but the http advisor was requested"
            )
        return cls(
            endpoint=endpoint,
            api_key=env.get("ADVISOR_API_KEY") or None,
            timeout_s=float(env.get("ADVISOR_TIMEOUT_S", "30")),
        )


def http_advise(
    prompt: AdvisorPrompt,
    config: HttpAdvisorConfig,
    max_hz: float | None = None,
) -> tuple[AdvisorSuggestion, str]:
    """POST the prompt as a single user message and parse the first choice.

    Returns the parsed suggestion and the raw response text (for the
    transcript). Any transport or schema problem raises
    AdvisorTransportError.
    """
    payload = {
        "model": config.model,
        "messages": [{"role": "user", "content": prompt.text}],
        "temperature": config.temperature,
        "top_p": config.top_p,
        "max_tokens": config.max_tokens,
    }
    headers = {"Content-Type": "application/json"}
    if config.api_key:
        headers["Authorization"] = f"Bearer {config.api_key}"
    try:
        response = requests.post(
            config.endpoint, json=payload, headers=headers, timeout=config.timeout_s
        )
    except requests.RequestException as exc:
        raise AdvisorTransportError(f"advisor request failed: {exc}") from exc
    if not 200 <= response.status_code < 300:
        raise AdvisorTransportError(
            f"advisor endpoint returned HTTP {response.status_code}"
        )
    try:
        text = response.json()["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise AdvisorTransportError(
            f"advisor response does not follow the chat-completion shape: {exc}"
        ) from exc
    suggestion = parse_response(
        text, max_hz=max_hz, backend_id=f"http:{config.model}"
    )
    return suggestion, text
