"""Scenario configuration: strict JSON parsing with field-level diagnostics.

Unknown keys are rejected everywhere; matrix entries are numbers or
[re, im] pairs.  All validation failures raise ConfigError naming the
offending field (CLI exit code 2).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .matrix_engine import is_hermitian

MODELS = ("free_oscillator", "damped_oscillator", "custom")
METHODS = ("spectral", "balakrishnan", "subordination")
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class TimesSpec:
    start: float
    stop: float
    steps: int

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class OutputSpec:
    series_path: str = "series.csv"
    report_path: str = "report.json"
    format: str = "csv"


@dataclass(frozen=True)
class QuadSpec:
    theta: float = math.pi
    n_nodes: int = 400


@dataclass(frozen=True)
class ScenarioConfig:
    model: str
    alphas: tuple[float, ...]
    method: str
    times: TimesSpec
    truncation: int
    params: dict
    quad: QuadSpec
    outputs: OutputSpec
    tolerances: dict = field(default_factory=dict)


def _expect(mapping: dict, context: str, allowed: set[str]) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"{context}: unknown key(s) {sorted(unknown)}")


def _number(value, context: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{context}: expected a number, got {value!r}")
    return float(value)


def _entry(value, context: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        return complex(value[0], value[1])
    raise ConfigError(f"{context}: matrix entries must be numbers or [re, im] pairs")


def _matrix(value, context: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{context}: expected a non-empty list of rows")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != len(value):
            raise ConfigError(f"{context}: row {i} does not make the matrix square")
        rows.append([_entry(v, f"{context}[{i}]") for v in row])
    return np.array(rows, dtype=complex)


def _parse_times(raw, context: str = "times") -> TimesSpec:
    if not isinstance(raw, dict):
        raise ConfigError(f"{context}: expected an object with start/stop/steps")
    _expect(raw, context, {"start", "stop", "steps"})
    try:
        start = _number(raw["start"], f"{context}.start")
        stop = _number(raw["stop"], f"{context}.stop")
        steps = raw["steps"]
    except KeyError as exc:
        raise ConfigError(f"{context}: missing key {exc.args[0]!r}") from None
    if not isinstance(steps, int) or steps < 2:
        raise ConfigError(f"{context}.steps: must be an integer >= 2")
    if start < 0:
        raise ConfigError(f"{context}.start: must be >= 0")
    if stop <= start:
        raise ConfigError(f"{context}.stop: must exceed start")
    return TimesSpec(start, stop, steps)


def _parse_alphas(raw) -> tuple[float, ...]:
    values = raw if isinstance(raw, list) else [raw]
    if not values:
        raise ConfigError("alpha: need at least one value")
    out = []
    for v in values:
        a = _number(v, "alpha")
        if not 0.0 < a <= 1.0:
            raise ConfigError(f"alpha out of (0, 1]: {a}")
        out.append(a)
    return tuple(out)


def _parse_free_params(raw: dict) -> dict:
    _expect(raw, "params", {"m", "omega", "hbar"})
    params = {
        "m": _number(raw.get("m", 1.0), "params.m"),
        "omega": _number(raw.get("omega", 1.0), "params.omega"),
        "hbar": _number(raw.get("hbar", 1.0), "params.hbar"),
    }
    for key, v in params.items():
        if v <= 0:
            raise ConfigError(f"params.{key}: must be positive")
    return params


def _parse_damped_params(raw: dict) -> dict:
    _expect(raw, "params", {"m", "omega", "mu", "hbar", "coeffs"})
    params = _parse_free_params({k: raw[k] for k in ("m", "omega", "hbar") if k in raw})
    params["mu"] = _number(raw.get("mu", 0.0), "params.mu")
    coeffs_raw = raw.get("coeffs")
    if not isinstance(coeffs_raw, list) or not coeffs_raw:
        raise ConfigError("params.coeffs: need a non-empty list of {a, b} pairs")
    coeffs = []
    for i, pair in enumerate(coeffs_raw):
        if not isinstance(pair, dict):
            raise ConfigError(f"params.coeffs[{i}]: expected an object with 'a' and 'b'")
        _expect(pair, f"params.coeffs[{i}]", {"a", "b"})
        if "a" not in pair or "b" not in pair:
            raise ConfigError(f"params.coeffs[{i}]: both 'a' and 'b' are required")
        coeffs.append((_entry(pair["a"], f"params.coeffs[{i}].a"),
                       _entry(pair["b"], f"params.coeffs[{i}].b")))
    params["coeffs"] = tuple(coeffs)
    return params


def _parse_custom_params(raw: dict) -> dict:
    _expect(raw, "params", {"hamiltonian", "lindblad_ops", "observable", "state", "hbar"})
    if "hamiltonian" not in raw:
        raise ConfigError("params.hamiltonian: required for the custom model")
    h = _matrix(raw["hamiltonian"], "params.hamiltonian")
    if not is_hermitian(h, rtol=1e-10):
        raise ConfigError("params.hamiltonian: violates the self-adjointness invariant")
    n = h.shape[0]
    ops = []
    for i, op in enumerate(raw.get("lindblad_ops", [])):
        mat = _matrix(op, f"params.lindblad_ops[{i}]")
        if mat.shape[0] != n:
            raise ConfigError(f"params.lindblad_ops[{i}]: dimension {mat.shape[0]} != {n}")
        ops.append(mat)
    if "observable" not in raw:
        raise ConfigError("params.observable: required for the custom model")
    obs = _matrix(raw["observable"], "params.observable")
    if obs.shape[0] != n:
        raise ConfigError(f"params.observable: dimension {obs.shape[0]} != {n}")
    state = None
    if "state" in raw:
        state = _matrix(raw["state"], "params.state")
        if state.shape[0] != n:
            raise ConfigError(f"params.state: dimension {state.shape[0]} != {n}")
    hbar = _number(raw.get("hbar", 1.0), "params.hbar")
    if hbar <= 0:
        raise ConfigError("params.hbar: must be positive")
    return {"hamiltonian": h, "lindblad_ops": tuple(ops), "observable": obs,
            "state": state, "hbar": hbar}


def _parse_quad(raw) -> QuadSpec:
    if raw is None:
        return QuadSpec()
    if not isinstance(raw, dict):
        raise ConfigError("quad: expected an object")
    _expect(raw, "quad", {"theta", "n_nodes"})
    theta = _number(raw.get("theta", math.pi), "quad.theta")
    if not math.pi / 2 <= theta <= math.pi + 1e-12:
        raise ConfigError(f"quad.theta out of [pi/2, pi]: {theta}")
    n_nodes = raw.get("n_nodes", 400)
    if not isinstance(n_nodes, int) or n_nodes < 8:
        raise ConfigError("quad.n_nodes: must be an integer >= 8")
    return QuadSpec(theta, n_nodes)


def _parse_outputs(raw) -> OutputSpec:
    if raw is None:
        return OutputSpec()
    if not isinstance(raw, dict):
        raise ConfigError("outputs: expected an object")
    _expect(raw, "outputs", {"series_path", "report_path", "format"})
    fmt = raw.get("format", "csv")
    if fmt not in FORMATS:
        raise ConfigError(f"outputs.format: must be one of {FORMATS}")
    return OutputSpec(
        series_path=str(raw.get("series_path", "series." + fmt)),
        report_path=str(raw.get("report_path", "report.json")),
        format=fmt,
    )


def parse_config(source: str) -> ScenarioConfig:
    """Parse and fully validate a JSON scenario description."""
    try:
        raw = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: line {exc.lineno}, column {exc.colno}: {exc.msg}")
    if not isinstance(raw, dict):
        raise ConfigError("top level: expected a JSON object")
    _expect(raw, "top level", {"model", "params", "alpha", "method", "times",
                               "truncation", "quad", "outputs", "tolerances"})

    model = raw.get("model")
    if model not in MODELS:
        raise ConfigError(f"model: must be one of {MODELS}, got {model!r}")
    method = raw.get("method", "spectral")
    if method not in METHODS:
        raise ConfigError(f"method: must be one of {METHODS}, got {method!r}")
    if "alpha" not in raw:
        raise ConfigError("alpha: required")
    if "times" not in raw:
        raise ConfigError("times: required")
    alphas = _parse_alphas(raw["alpha"])
    times = _parse_times(raw["times"])

    truncation = raw.get("truncation", 24)
    if not isinstance(truncation, int) or truncation < 2:
        raise ConfigError("truncation: must be an integer >= 2")

    params_raw = raw.get("params", {})
    if not isinstance(params_raw, dict):
        raise ConfigError("params: expected an object")
    if model == "free_oscillator":
        params = _parse_free_params(params_raw)
    elif model == "damped_oscillator":
        params = _parse_damped_params(params_raw)
    else:
        params = _parse_custom_params(params_raw)

    tolerances = raw.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise ConfigError("tolerances: expected an object")
    for key, val in tolerances.items():
        tol = _number(val, f"tolerances.{key}")
        if tol <= 0:
            raise ConfigError(f"tolerances.{key}: must be positive")

    return ScenarioConfig(
        model=model,
        alphas=alphas,
        method=method,
        times=times,
        truncation=truncation,
        params=params,
        quad=_parse_quad(raw.get("quad")),
        outputs=_parse_outputs(raw.get("outputs")),
        tolerances={k: float(v) for k, v in tolerances.items()},
    )


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
