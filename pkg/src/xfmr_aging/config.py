"""
Run configuration.

A config file is YAML with these optional sections (all keys optional;
defaults in brackets)::

    seed: 0
    transformer:          # TransformerParams fields [934 A transformer]
      loss_ratio_R: 7.43
    thermal:
      mode: literal       # literal | carry
      start: warm         # warm | cold
    data:
      input: path/to/hourly.csv     # or
      synthetic: {}                 # SyntheticProfile fields, or a path to a YAML file of them
      hours: 8760
    preprocess:           # BadDataPolicy fields
      z_threshold: 4.0
      max_bad_fraction: 0.10
    split: {test_fraction: 0.30, k: 5}
    anfis: {clusters: 20, epochs: 25, learning_rate: 0.01, fuzzifier: 2.0, standardize: true}
    mlp:   {epochs: 500, learning_rate: 0.01, hidden: 2}
    rbf:   {max_neurons: 2000, goal_factor: 1.4, mse_goal: null}
    sweep: {c_min: 2, c_max: 30, threshold: 0.02}
    output: {dir: out, figures: true, timing: false}

Precedence: command-line flags, then the ``XFMR_SEED`` environment
variable (seed only), then the file, then the defaults.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

import yaml

from .dataset import BadDataPolicy, SplitSpec, SyntheticProfile
from .errors import XfmrAgingError
from .thermal import ROUTING_MODES, START_MODES, TransformerParams

SEED_ENV = "XFMR_SEED"


class ConfigError(XfmrAgingError, ValueError):
    """Invalid or contradictory configuration."""


@dataclass(frozen=True)
class AnfisSettings:
    clusters: int = 20
    epochs: int = 25
    learning_rate: float = 1e-2
    fuzzifier: float = 2.0
    standardize: bool = True


@dataclass(frozen=True)
class MlpSettings:
    epochs: int = 500
    learning_rate: float = 1e-2
    hidden: int = 2


@dataclass(frozen=True)
class RbfSettings:
    max_neurons: int = 2000
    goal_factor: float = 1.4
    mse_goal: float | None = None


@dataclass(frozen=True)
class SweepSettings:
    c_min: int = 2
    c_max: int = 30
    threshold: float = 0.02


@dataclass(frozen=True)
class RunConfig:
    params: TransformerParams = TransformerParams()
    input_csv: Path | None = None
    synthetic: SyntheticProfile | None = None
    hours: int = 8760
    mode: str = "literal"
    start: str = "warm"
    policy: BadDataPolicy = BadDataPolicy()
    split: SplitSpec = SplitSpec()
    anfis: AnfisSettings = AnfisSettings()
    mlp: MlpSettings = MlpSettings()
    rbf: RbfSettings = RbfSettings()
    sweep: SweepSettings = SweepSettings()
    out_dir: Path = Path("out")
    figures: bool = True
    timing: bool = False
    seed: int = 0

    def __post_init__(self):
        if (self.input_csv is None) == (self.synthetic is None):
            raise ConfigError("exactly one data source is required: an input CSV or a synthetic profile")
        if self.mode not in ROUTING_MODES:
            raise ConfigError(f"thermal mode must be one of {ROUTING_MODES}, got {self.mode!r}")
        if self.start not in START_MODES:
            raise ConfigError(f"thermal start must be one of {START_MODES}, got {self.start!r}")
        if self.hours < 24:
            raise ConfigError(f"hours must be >= 24, got {self.hours}")

    def describe(self) -> dict:
        """Flat, deterministic summary for report files."""
        source = str(self.input_csv) if self.input_csv is not None else "synthetic"
        return {"source": source, "hours": self.hours, "mode": self.mode, "start": self.start, "seed": self.seed}


def read_yaml(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def _section(data: dict, name: str) -> dict:
    value = data.get(name) or {}
    if not isinstance(value, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    return dict(value)


def _settings(cls, values: dict, section: str):
    unknown = set(values) - {f.name for f in fields(cls)}
    if unknown:
        raise ConfigError(f"unknown key(s) in {section!r}: {sorted(unknown)}")
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {section!r} settings: {exc}") from exc


def _seed_from_env(environ) -> int | None:
    raw = environ.get(SEED_ENV)
    if raw in (None, ""):
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc


def _synthetic_profile(source) -> SyntheticProfile:
    if source is True or source in ("default", "", None):
        return SyntheticProfile()
    if isinstance(source, (str, Path)):
        mapping = read_yaml(source)
        mapping = mapping.get("synthetic", mapping) if isinstance(mapping.get("synthetic"), dict) else mapping
        return SyntheticProfile.from_mapping(mapping)
    if isinstance(source, dict):
        return SyntheticProfile.from_mapping(source)
    raise ConfigError(f"cannot interpret synthetic profile {source!r}")


def build_config(file_data: dict | None = None, overrides: dict | None = None, environ=None) -> RunConfig:
    """Merge file contents, environment and flag overrides into a :class:`RunConfig`.

    ``overrides`` uses dotted keys mirroring the file layout, e.g.
    ``{"anfis.clusters": 10, "data.input": "x.csv", "seed": 3}``; ``None``
    values are ignored.
    """
    data = {k: (dict(v) if isinstance(v, dict) else v) for k, v in (file_data or {}).items()}
    environ = os.environ if environ is None else environ
    unknown = set(data) - {
        "seed", "transformer", "thermal", "data", "preprocess", "split", "anfis", "mlp", "rbf", "sweep", "output"
    }
    if unknown:
        raise ConfigError(f"unknown config section(s): {sorted(unknown)}")

    env_seed = _seed_from_env(environ)
    if env_seed is not None:
        data["seed"] = env_seed
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if "." in key:
            section, name = key.split(".", 1)
            data.setdefault(section, {})
            if data[section] is None:
                data[section] = {}
            data[section][name] = value
        else:
            data[key] = value

    data_section = _section(data, "data")
    # a flag choosing one source must displace the other one coming from the file
    chosen = (overrides or {})
    if chosen.get("data.input") is not None:
        data_section.pop("synthetic", None)
    elif chosen.get("data.synthetic") is not None:
        data_section.pop("input", None)
    if "input" in data_section and "synthetic" in data_section:
        raise ConfigError("data section names both an input CSV and a synthetic profile")
    if "input" not in data_section and "synthetic" not in data_section:
        data_section["synthetic"] = "default"

    try:
        seed = int(data.get("seed", 0))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"seed must be an integer, got {data.get('seed')!r}") from exc

    transformer = _section(data, "transformer")
    params_file = transformer.pop("file", None)
    if params_file is not None:
        loaded = read_yaml(params_file)
        loaded = loaded.get("transformer", loaded)
        transformer = {**loaded, **transformer}
    try:
        params = TransformerParams.from_mapping(transformer)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid transformer parameters: {exc}") from exc

    thermal_cfg = _section(data, "thermal")
    policy_cfg = _section(data, "preprocess")
    for key in ("temp_bounds", "load_bounds"):
        if key in policy_cfg:
            policy_cfg[key] = tuple(float(v) for v in policy_cfg[key])
    split_cfg = _section(data, "split")
    split_cfg["seed"] = seed
    output = _section(data, "output")
    unknown_out = set(output) - {"dir", "figures", "timing"}
    if unknown_out:
        raise ConfigError(f"unknown key(s) in 'output': {sorted(unknown_out)}")

    try:
        synthetic = None if "synthetic" not in data_section else _synthetic_profile(data_section["synthetic"])
        return RunConfig(
            params=params,
            input_csv=Path(data_section["input"]) if "input" in data_section else None,
            synthetic=synthetic,
            hours=int(data_section.get("hours", 8760)),
            mode=thermal_cfg.get("mode", "literal"),
            start=thermal_cfg.get("start", "warm"),
            policy=_settings(BadDataPolicy, policy_cfg, "preprocess"),
            split=_settings(SplitSpec, split_cfg, "split"),
            anfis=_settings(AnfisSettings, _section(data, "anfis"), "anfis"),
            mlp=_settings(MlpSettings, _section(data, "mlp"), "mlp"),
            rbf=_settings(RbfSettings, _section(data, "rbf"), "rbf"),
            sweep=_settings(SweepSettings, _section(data, "sweep"), "sweep"),
            out_dir=Path(output.get("dir", "out")),
            figures=bool(output.get("figures", True)),
            timing=bool(output.get("timing", False)),
            seed=seed,
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path=None, overrides=None, environ=None) -> RunConfig:
    return build_config(read_yaml(path) if path else {}, overrides, environ)

