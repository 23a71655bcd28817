"""Engine configuration: a versioned TOML file mapped onto dataclasses.

Unknown sections or keys are rejected by name so typos fail fast at
startup instead of silently running with defaults.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import tomli

from .simulator import LatencyModel, QosMode

CONFIG_VERSION = 1


class ConfigError(Exception):
    """Invalid configuration; the message names the offending key."""


@dataclass
class TriggerSettings:
    closer_extras: str = ""
    multi_line_enabled: bool = True
    allow_module_scope: bool = False


@dataclass
class ScopeSettings:
    tab_width: int = 1
    indent_unit: int = 4
    extra_header_keywords: list[str] = field(default_factory=list)


@dataclass
class GenerationSettings:
    single_max_tokens: int = 25
    multi_max_tokens: int = 120
    prefix_window: int = 6000
    suffix_window: int = 2000


@dataclass
class BackendSettings:
    type: str = "mock"  # "mock" | "http"
    corpus_path: str = ""
    fallback: bool = False
    chunk_size: int = 8
    endpoint: str = ""
    timeout_ms: float = 10_000.0


@dataclass
class ServerSettings:
    single_timeout_ms: float = 1000.0
    multi_timeout_ms: float = 2800.0
    realign: bool = True


@dataclass
class CacheSettings:
    max_entries: int = 512
    ttl_s: float = 300.0


@dataclass
class TelemetrySettings:
    sink_path: str = ""


@dataclass
class LatencySettings:
    first_token_ms: float = 210.0
    per_token_ms: float = 6.3
    batch_knee: int = 8
    batch_penalty: float = 0.10
    scale: float = 1.0  # replay-side multiplier on end-to-end latency

    def model(self) -> LatencyModel:
        return LatencyModel(
            first_token_ms=self.first_token_ms,
            per_token_ms=self.per_token_ms,
            batch_knee=self.batch_knee,
            batch_penalty=self.batch_penalty,
        )


@dataclass
class ReplaySettings:
    pause_median_ms: float = 180.0
    pause_sigma: float = 0.8
    think_pause_ms: float = 1500.0
    dwell_threshold_ms: float = 750.0
    accept_dwell_median_ms: float = 800.0
    accept_dwell_sigma: float = 0.4


@dataclass
class SimSettings:
    workers: int = 2
    max_batch_size: int = 16
    qos_mode: str = "fifo"
    gestation_single_ms: float = 0.0
    gestation_multi_ms: float = 2000.0
    weight_single: float = 1.0
    weight_multi: float = 2.0
    streaming_cancel: bool = True
    request_count: int = 10_000
    arrival_rate_per_s: float = 42.0
    multi_fraction: float = 0.16
    single_deadline_ms: float = 3500.0
    multi_deadline_ms: float = 3500.0

    def qos(self) -> QosMode:
        try:
            return QosMode(self.qos_mode)
        except ValueError:
            raise ConfigError(f"invalid value for sim.qos_mode: {self.qos_mode!r}") from None


@dataclass
class EngineConfig:
    version: int = CONFIG_VERSION
    language_family: str = "indent"
    trigger: TriggerSettings = field(default_factory=TriggerSettings)
    scope: ScopeSettings = field(default_factory=ScopeSettings)
    generation: GenerationSettings = field(default_factory=GenerationSettings)
    backend: BackendSettings = field(default_factory=BackendSettings)
    server: ServerSettings = field(default_factory=ServerSettings)
    cache: CacheSettings = field(default_factory=CacheSettings)
    telemetry: TelemetrySettings = field(default_factory=TelemetrySettings)
    latency: LatencySettings = field(default_factory=LatencySettings)
    replay: ReplaySettings = field(default_factory=ReplaySettings)
    sim: SimSettings = field(default_factory=SimSettings)


_SECTIONS = {
    "trigger": TriggerSettings,
    "scope": ScopeSettings,
    "generation": GenerationSettings,
    "backend": BackendSettings,
    "server": ServerSettings,
    "cache": CacheSettings,
    "telemetry": TelemetrySettings,
    "latency": LatencySettings,
    "replay": ReplaySettings,
    "sim": SimSettings,
}

_TOP_LEVEL_KEYS = {"version", "language_family"}


def load_config(path: str) -> EngineConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomli.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from None
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> EngineConfig:
    config = EngineConfig()
    for key, value in raw.items():
        if key in _TOP_LEVEL_KEYS:
            setattr(config, key, value)
            continue
        section_type = _SECTIONS.get(key)
        if section_type is None:
            raise ConfigError(f"unknown config section: {key}")
        if not isinstance(value, dict):
            raise ConfigError(f"config section {key} must be a table")
        setattr(config, key, _build_section(section_type, key, value))
    if config.version != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version: {config.version}")
    return config


def _build_section(section_type, section_name: str, values: dict):
    known = {f.name: f for f in dataclasses.fields(section_type)}
    kwargs = {}
    for key, value in values.items():
        if key not in known:
            raise ConfigError(f"unknown config key: {section_name}.{key}")
        kwargs[key] = _coerce(section_name, key, known[key].type, value)
    return section_type(**kwargs)


def _coerce(section: str, key: str, annotation, value):
    wanted = str(annotation)
    if "bool" in wanted:
        if not isinstance(value, bool):
            raise ConfigError(f"config key {section}.{key} must be a boolean")
        return value
    if "float" in wanted and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if "int" in wanted:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"config key {section}.{key} must be an integer")
        return value
    if "list" in wanted:
        if not isinstance(value, list):
            raise ConfigError(f"config key {section}.{key} must be a list")
        return list(value)
    if "str" in wanted:
        if not isinstance(value, str):
            raise ConfigError(f"config key {section}.{key} must be a string")
        return value
    raise ConfigError(f"config key {section}.{key} has unsupported type")
