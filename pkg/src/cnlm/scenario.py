"""Scenario files: JSON documents bundling converter, penalty, reference and load."""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .converter import ConverterConfig
from .deadtime import LoadModel
from .modulation import PenaltyConfig
from .signals import ReferenceSpec

SCHEMA_VERSION = 1

_SECTIONS = {
    "converter": {"voltages", "dead_time_ns", "control_step_ns"},
    "penalty": {"method", "alpha", "beta", "o_norm", "p_exponent", "q_mode", "min_interval_us"},
    "reference": {"kind", "amplitude_V", "fundamental_hz", "sigma_s", "center_s", "duration_s", "path"},
    "load": {"inductance_H", "series_resistance_ohm", "initial_current_A"},
}
_TOP_LEVEL = {"schema_version", "label", *_SECTIONS}


class ScenarioError(ValueError):
    """Invalid or unreadable scenario file."""


@dataclass(frozen=True)
class Scenario:
    converter: ConverterConfig
    penalty: PenaltyConfig = field(default_factory=PenaltyConfig)
    reference: ReferenceSpec = field(default_factory=ReferenceSpec)
    load: LoadModel = field(default_factory=LoadModel)
    label: str = "scenario"
    name: str = "scenario"

    def with_penalty(self, **changes) -> "Scenario":
        return replace(self, penalty=replace(self.penalty, **changes))


def bundled_scenarios() -> list[str]:
    root = resources.files("cnlm") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def resolve_scenario_path(name_or_path: str | Path) -> Path:
    """Map a bundled scenario name to its file; other values are taken as paths."""
    p = Path(name_or_path)
    if p.exists() or p.suffix:
        return p
    candidate = resources.files("cnlm") / "scenarios" / f"{name_or_path}.json"
    if candidate.is_file():
        return Path(str(candidate))
    return p


def _key_line(text: str, *keys: str) -> int | None:
    """1-based line of the last key in `keys`, searched after the earlier ones."""
    pos = 0
    for key in keys:
        m = re.compile(r'"%s"\s*:' % re.escape(key)).search(text, pos)
        if m is None:
            return None
        pos = m.start()
    return text.count("\n", 0, pos) + 1


def _fail(text: str, source: str, msg: str, *keys: str):
    line = _key_line(text, *keys) if keys else None
    where = f"{source}:{line}" if line else source
    raise ScenarioError(f"{where}: {msg}")


def _number(text, source, section, data, key, default=None, *, positive=False, allow_none=False):
    if key not in data:
        if default is None and not allow_none:
            _fail(text, source, f"missing required key '{section}.{key}'", section)
        return default
    value = data[key]
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        _fail(text, source, f"'{section}.{key}' must be a finite number, got {value!r}", section, key)
    if positive and value <= 0:
        _fail(text, source, f"'{section}.{key}' must be positive, got {value!r}", section, key)
    return value


def parse_scenario(text: str, source: str = "<scenario>", name: str = "scenario") -> Scenario:
    """Build a :class:`Scenario` from JSON text; errors name the offending line."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ScenarioError(f"{source}:1: scenario must be a JSON object")
    for key in doc:
        if key not in _TOP_LEVEL:
            _fail(text, source, f"unknown top-level key '{key}'", key)
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        _fail(text, source, f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})",
              "schema_version")
    sections = {}
    for sec, allowed in _SECTIONS.items():
        data = doc.get(sec, {})
        if not isinstance(data, dict):
            _fail(text, source, f"'{sec}' must be an object", sec)
        for key in data:
            if key not in allowed:
                _fail(text, source, f"unknown key '{sec}.{key}'", sec, key)
        sections[sec] = data
    if "converter" not in doc:
        _fail(text, source, "missing required section 'converter'")

    conv = sections["converter"]
    volts = conv.get("voltages")
    if (not isinstance(volts, list) or not volts
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in volts)):
        _fail(text, source, "'converter.voltages' must be a non-empty array of numbers",
              "converter", "voltages")
    step_ns = _number(text, source, "converter", conv, "control_step_ns", 200.0, positive=True)
    dead_ns = _number(text, source, "converter", conv, "dead_time_ns", 100.0)
    try:
        converter = ConverterConfig(tuple(volts), dead_time=dead_ns / 1e9, control_step=step_ns / 1e9)
    except ScenarioError:
        raise
    except ValueError as exc:
        _fail(text, source, f"converter: {exc}", "converter")

    pen = sections["penalty"]
    method = pen.get("method", "cnlm")
    if method not in ("nlm", "cnlm"):
        _fail(text, source, f"'penalty.method' must be 'nlm' or 'cnlm', got {method!r}", "penalty", "method")
    alpha = pen.get("alpha", 0.0)
    if isinstance(alpha, list):
        if len(alpha) != converter.n_modules:
            _fail(text, source, f"'penalty.alpha' has {len(alpha)} entries for "
                  f"{converter.n_modules} modules", "penalty", "alpha")
        alpha = tuple(alpha)
    floor_us = _number(text, source, "penalty", pen, "min_interval_us", None, allow_none=True)
    floor_steps = None
    if floor_us is not None:
        if floor_us < 0:
            _fail(text, source, "'penalty.min_interval_us' must be non-negative", "penalty", "min_interval_us")
        # round up to whole steps; the epsilon absorbs 20/0.2 = 100.00000000000001
        floor_steps = int(math.ceil(floor_us * 1e-6 / converter.control_step - 1e-9))
    if pen.get("q_mode", "simplified") not in ("simplified", "precise"):
        _fail(text, source, f"'penalty.q_mode' must be 'simplified' or 'precise', got {pen['q_mode']!r}",
              "penalty", "q_mode")
    if method == "nlm":
        if any(k in pen for k in ("alpha", "beta", "min_interval_us")):
            _fail(text, source, "penalty weights are not allowed with method 'nlm'", "penalty", "method")
        penalty = PenaltyConfig()
    else:
        try:
            penalty = PenaltyConfig(
                alpha=alpha,
                beta=_number(text, source, "penalty", pen, "beta", 0.0),
                o_norm=_number(text, source, "penalty", pen, "o_norm", 1),
                p_exponent=_number(text, source, "penalty", pen, "p_exponent", 1.0),
                q_mode=pen.get("q_mode", "simplified"),
                min_interval_steps=floor_steps,
            )
        except ScenarioError:
            raise
        except (ValueError, TypeError) as exc:
            _fail(text, source, f"penalty: {exc}", "penalty")

    ref = sections["reference"]
    path = ref.get("path")
    if path is not None and not Path(path).is_absolute() and source not in ("<scenario>",):
        path = str(Path(source).parent / path)
    try:
        reference = ReferenceSpec(
            kind=ref.get("kind", "gaussian_polyphasic"),
            amplitude=_number(text, source, "reference", ref, "amplitude_V", converter.max_output),
            fundamental_hz=_number(text, source, "reference", ref, "fundamental_hz", 10e3),
            sigma_s=_number(text, source, "reference", ref, "sigma_s", 80e-6),
            center_s=_number(text, source, "reference", ref, "center_s", None, allow_none=True),
            duration_s=_number(text, source, "reference", ref, "duration_s", 600e-6, positive=True),
            path=path,
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        _fail(text, source, f"reference: {exc}", "reference")

    ld = sections["load"]
    try:
        load = LoadModel(
            inductance=_number(text, source, "load", ld, "inductance_H", 14e-6, positive=True),
            series_resistance=_number(text, source, "load", ld, "series_resistance_ohm", 0.0),
            initial_current=_number(text, source, "load", ld, "initial_current_A", 0.0),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        _fail(text, source, f"load: {exc}", "load")

    label = doc.get("label") or ("NLM" if penalty.is_plain_nlm else name)
    return Scenario(converter, penalty, reference, load, str(label), name)


def load_scenario(name_or_path: str | Path) -> Scenario:
    path = resolve_scenario_path(name_or_path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{name_or_path}: cannot read scenario ({exc.strerror or exc})") from None
    return parse_scenario(text, str(path), path.stem)


def scenario_to_dict(sc: Scenario) -> dict:
    """Inverse of :func:`parse_scenario` (up to float formatting)."""
    conv, pen, ref, ld = sc.converter, sc.penalty, sc.reference, sc.load
    penalty: dict = {"method": "cnlm", "alpha": list(pen.alpha) if isinstance(pen.alpha, tuple) else pen.alpha,
                     "beta": pen.beta, "o_norm": pen.o_norm, "p_exponent": pen.p_exponent,
                     "q_mode": pen.q_mode}
    if pen.min_interval_steps is not None:
        penalty["min_interval_us"] = round(pen.min_interval_steps * conv.control_step * 1e6, 9)
    reference = {"kind": ref.kind, "amplitude_V": ref.amplitude, "fundamental_hz": ref.fundamental_hz,
                 "sigma_s": ref.sigma_s, "center_s": ref.center_s, "duration_s": ref.duration_s}
    if ref.path:
        reference["path"] = ref.path
    return {
        "schema_version": SCHEMA_VERSION,
        "label": sc.label,
        "converter": {"voltages": list(conv.voltages), "dead_time_ns": round(conv.dead_time * 1e9, 6),
                      "control_step_ns": round(conv.control_step * 1e9, 6)},
        "penalty": penalty,
        "reference": reference,
        "load": {"inductance_H": ld.inductance, "series_resistance_ohm": ld.series_resistance,
                 "initial_current_A": ld.initial_current},
    }
