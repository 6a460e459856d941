"""Scenario configuration: ``key = value`` text files with ``#`` comments."""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Union

from .connectivity import GroupConfig
from .protocol import DelayModel, ProtocolConfig
from .workload import WorkloadConfig

__all__ = ["Variant", "ScenarioConfig", "ConfigError", "parse_config", "parse_config_text"]

log = logging.getLogger(__name__)

MAX_DISCONNECTION = 0.95


class ConfigError(ValueError):
    pass


class Variant(enum.Enum):
    STANDARD_2PC = "Standard2PC"
    ADHOC_ONLY = "AdhocOnly"
    ADHOC_DAALG = "AdhocPlusDAAlg"

    @classmethod
    def parse(cls, text: str) -> "Variant":
        for v in cls:
            if v.value.lower() == text.strip().lower():
                return v
        raise ValueError(f"unknown variant {text!r}; expected one of {[v.value for v in cls]}")


@dataclass(frozen=True)
class ScenarioConfig:
    variant: Variant = Variant.ADHOC_DAALG
    seed: int = 1
    horizon: float = 36000.0
    et: float = 5.0
    ct: float = 2.4
    disconnection_rate: float = 0.5
    adhoc_levels: tuple[float, ...] = (0.5,)
    write_fraction: float = 0.5
    mean_off: float = 6.0  # calibrated: Ct knee sweep over {2..6}
    adhoc_mean_off: float = 4.0
    mean_interarrival: float = 30.0
    n_mh: int = 20
    n_fh: int = 10
    wired_delay: tuple[float, float] = (0.01, 0.03)
    wireless_delay: tuple[float, float] = (0.2, 1.0)
    adhoc_delay: tuple[float, float] = (0.4, 2.0)
    mh_exec: tuple[float, float] = (0.3, 0.7)
    fh_exec: tuple[float, float] = (0.1, 0.3)
    init_window: float = 5.0
    fh_abort_prob: float = 0.0
    replications: int = 1

    def __post_init__(self):
        _validate(self)

    @property
    def adhoc_enabled(self) -> bool:
        return self.variant is not Variant.STANDARD_2PC

    @property
    def daalg_enabled(self) -> bool:
        return self.variant is Variant.ADHOC_DAALG

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def groups(self) -> GroupConfig:
        return GroupConfig(tuple(self.adhoc_levels))

    def workload(self) -> WorkloadConfig:
        return WorkloadConfig(
            horizon=self.horizon,
            mean_interarrival=self.mean_interarrival,
            write_fraction=self.write_fraction,
            n_mh=self.n_mh,
            n_fh=self.n_fh,
            mh_exec=self.mh_exec,
            fh_exec=self.fh_exec,
        )

    def protocol(self) -> ProtocolConfig:
        return ProtocolConfig(
            et=self.et,
            ct=self.ct,
            adhoc_enabled=self.adhoc_enabled,
            daalg_enabled=self.daalg_enabled,
            init_window=self.init_window,
            fh_abort_prob=self.fh_abort_prob,
            delays=DelayModel(self.wired_delay, self.wireless_delay, self.adhoc_delay),
        )

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {_format(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"


def _format(value) -> str:
    if isinstance(value, Variant):
        return value.value
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, float):
        return "unlimited" if math.isinf(value) else repr(value)
    return str(value)


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _validate(c: ScenarioConfig) -> None:
    _check(c.horizon >= 0, f"horizon must be >= 0, got {c.horizon}")
    _check(c.et > 0, f"et must be positive or unlimited, got {c.et}")
    _check(0 <= c.ct < math.inf, f"ct must be a non-negative number, got {c.ct}")
    _check(
        0.0 <= c.disconnection_rate <= MAX_DISCONNECTION,
        f"disconnection_rate must be in [0, {MAX_DISCONNECTION}], got {c.disconnection_rate}",
    )
    _check(0.0 <= c.write_fraction <= 1.0, f"write_fraction must be in [0, 1], got {c.write_fraction}")
    _check(1 <= len(c.adhoc_levels) <= 3, f"1 to 3 ad-hoc groups required, got {len(c.adhoc_levels)}")
    for lv in c.adhoc_levels:
        _check(0.0 <= lv <= 1.0, f"adhoc level {lv} outside [0, 1]")
    _check(c.mean_off > 0 and c.adhoc_mean_off > 0, "mean off durations must be positive")
    _check(c.mean_interarrival > 0, "mean_interarrival must be positive")
    _check(c.n_mh >= 5, f"n_mh must be at least 5, got {c.n_mh}")
    _check(c.n_fh >= 5, f"n_fh must be at least 5, got {c.n_fh}")
    for name in ("wired_delay", "wireless_delay", "adhoc_delay", "mh_exec", "fh_exec"):
        pair = getattr(c, name)
        _check(len(pair) == 2, f"{name} needs two values lo, hi")
        _check(0 <= pair[0] < pair[1], f"{name} must satisfy 0 <= lo < hi, got {pair}")
    _check(c.init_window >= 0, "init_window must be >= 0")
    _check(0.0 <= c.fh_abort_prob <= 1.0, "fh_abort_prob must be in [0, 1]")
    _check(c.replications >= 1, "replications must be >= 1")


def _parse_float(text: str) -> float:
    if text.strip().lower() in ("unlimited", "inf"):
        return math.inf
    return float(text)


def _parse_list(text: str) -> tuple[float, ...]:
    parts = [p for p in text.replace("|", ",").split(",") if p.strip()]
    return tuple(float(p) for p in parts)


_FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}


def _convert(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    if key == "variant":
        return Variant.parse(raw)
    if kind == "int":
        return int(raw)
    if kind == "float":
        return _parse_float(raw)
    return _parse_list(raw)


def parse_config_text(text: str, source: str = "<config>") -> ScenarioConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {body!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: key {key!r} given twice")
        try:
            values[key] = _convert(key, raw)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
    variant = values.get("variant", ScenarioConfig.variant)
    if variant is Variant.STANDARD_2PC and "adhoc_levels" in values:
        log.warning("%s: adhoc_levels ignored for variant Standard2PC", source)
    try:
        return ScenarioConfig(**values)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def parse_config(path: Union[str, Path]) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror or exc}") from None
    return parse_config_text(text, str(path))
