"""Run configuration: parsing, validation, normalized dumps and initial
data construction.

Configs are JSON documents with four sections (space, model, noise,
run).  Unknown keys are rejected, every default is filled in, and the
normalized dump round-trips losslessly through the parser.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, ValidationError
from .integrate import ModelParams
from .noise import NoiseConfig
from .spectral import SpaceConfig, SpectralField

_INITIAL_KINDS = ("constant", "bump")


@dataclass(frozen=True)
class InitialData:
    """Initial field profile: a constant, optionally plus one eigenmode."""

    kind: str = "constant"
    value: float = 1.0
    amplitude: float = 0.0
    mode: int = 1

    def __post_init__(self):
        v = []
        if self.kind not in _INITIAL_KINDS:
            v.append(f"initial kind must be one of {_INITIAL_KINDS}, got {self.kind!r}")
        if self.kind == "bump" and self.mode < 1:
            v.append(f"bump mode must be >= 1, got {self.mode}")
        if v:
            raise ValidationError(v)

    def build(self, space: SpaceConfig) -> SpectralField:
        coeffs = np.zeros(space.total_modes)
        coeffs[0] = self.value
        if self.kind == "bump":
            if self.mode >= space.total_modes:
                raise ValidationError(
                    [f"bump mode {self.mode} out of range for "
                     f"{space.total_modes} modes"]
                )
            coeffs[self.mode] = self.amplitude
        return SpectralField(coeffs, space)


@dataclass(frozen=True)
class RunConfig:
    """Everything one invocation needs, serializable and hashable."""

    space: SpaceConfig = field(default_factory=SpaceConfig)
    model: ModelParams = field(default_factory=ModelParams)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    paths: int = 100
    T: float = 0.5
    dt: float = 1e-3
    kappa: float = 1e6
    kappa_schedule: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0)
    u0: InitialData = field(default_factory=lambda: InitialData("constant", 1.0))
    v0: InitialData = field(default_factory=lambda: InitialData("constant", 1.0))
    tol: float = 1e-8
    max_iter: int = 20
    m_power: int = 1
    field_dumps: bool = False

    def __post_init__(self):
        v = []
        if self.paths < 1:
            v.append(f"paths must be >= 1, got {self.paths}")
        if self.T <= 0 or self.dt <= 0:
            v.append(f"T and dt must be > 0, got T={self.T}, dt={self.dt}")
        if self.kappa <= 0:
            v.append(f"kappa must be > 0, got {self.kappa}")
        ks = self.kappa_schedule
        if len(ks) == 0 or any(b <= a for a, b in zip(ks, ks[1:])):
            v.append("kappa_schedule must be non-empty and strictly increasing")
        if self.tol <= 0:
            v.append(f"tol must be > 0, got {self.tol}")
        if self.max_iter < 1:
            v.append(f"max_iter must be >= 1, got {self.max_iter}")
        if self.m_power < 1:
            v.append(f"m_power must be >= 1, got {self.m_power}")
        if v:
            raise ValidationError(v)


_SECTIONS = {
    "space": SpaceConfig,
    "model": ModelParams,
    "noise": NoiseConfig,
    "u0": InitialData,
    "v0": InitialData,
}
_RUN_KEYS = {
    f.name: f for f in dataclasses.fields(RunConfig)
    if f.name not in _SECTIONS
}


def _build_section(cls, data: dict, where: str, violations: list[str]):
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - allowed
    if unknown:
        violations.append(f"unknown keys in {where}: {', '.join(sorted(unknown))}")
        data = {k: v for k, v in data.items() if k in allowed}
    try:
        return cls(**data)
    except ValidationError as err:
        violations.extend(f"{where}: {msg}" for msg in err.violations)
    except TypeError as err:
        violations.append(f"{where}: {err}")
    return None


def config_from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ParseError("configuration document must be a JSON object")
    violations: list[str] = []
    known = set(_SECTIONS) | set(_RUN_KEYS)
    unknown = set(doc) - known
    if unknown:
        violations.append(f"unknown top-level keys: {', '.join(sorted(unknown))}")
    kwargs = {}
    for name, cls in _SECTIONS.items():
        section = doc.get(name, {})
        if not isinstance(section, dict):
            violations.append(f"section {name!r} must be an object")
            continue
        built = _build_section(cls, section, name, violations)
        if built is not None:
            kwargs[name] = built
    for name in _RUN_KEYS:
        if name in doc:
            value = doc[name]
            if name == "kappa_schedule":
                value = tuple(float(x) for x in value)
            kwargs[name] = value
    # validate run-level constraints even when a section failed, so the
    # error lists every violation at once
    try:
        probe = {k: v for k, v in kwargs.items() if k in _SECTIONS or k in _RUN_KEYS}
        built = RunConfig(**probe)
        if not violations:
            return built
    except ValidationError as err:
        violations.extend(err.violations)
    except TypeError as err:
        violations.append(str(err))
    raise ValidationError(violations)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON configuration document.

    Raises ParseError with line context for malformed JSON and
    ValidationError listing every violated constraint otherwise.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"line {err.lineno}, column {err.colno}: {err.msg}") from err
    return config_from_dict(doc)


def config_to_dict(cfg: RunConfig) -> dict:
    out: dict = {}
    for name, _cls in _SECTIONS.items():
        out[name] = dataclasses.asdict(getattr(cfg, name))
    for name in _RUN_KEYS:
        value = getattr(cfg, name)
        if name == "kappa_schedule":
            value = list(value)
        out[name] = value
    return out


def dump_config(cfg: RunConfig) -> str:
    """Normalized dump: every effective value, sorted keys."""
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True)


def apply_overrides(doc: dict, overrides: list[str]) -> dict:
    """Apply repeatable ``section.key=value`` overrides to a raw document."""
    out = json.loads(json.dumps(doc))
    for item in overrides:
        if "=" not in item:
            raise ParseError(f"override {item!r} is not of the form key=value")
        path, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        keys = path.strip().split(".")
        target = out
        for k in keys[:-1]:
            target = target.setdefault(k, {})
            if not isinstance(target, dict):
                raise ParseError(f"override path {path!r} crosses a non-object value")
        target[keys[-1]] = value
    return out
