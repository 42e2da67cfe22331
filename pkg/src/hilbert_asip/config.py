"""Provide experiment configuration.

Values resolve with precedence command-line flags > config file > defaults. Config
files are flat JSON objects whose keys are ``ExperimentConfig`` field names; threshold
overrides use the ``SuiteThresholds`` field names directly.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .base_model import DomainError, TimeSeriesModel
from .blocking import BlockPlan, build_plan, default_cstar
from .far import NOISE_LAWS, make_far
from .harness import DEFAULT_MAX_CELLS
from .markov import load_chain

_logger = logging.getLogger(__name__)


class ConfigError(DomainError):
    """Raise when a configuration file or value is invalid."""


@dataclass(frozen=True)
class SuiteThresholds:
    """Pass thresholds shared by the Monte Carlo suites."""

    ks_pvalue: float = 0.01
    slope_margin: float = 0.1
    slope_floor: float = 0.3
    gaussian_slope_margin: float = 0.05
    trend_margin: float = 0.05
    se_band: float = 3.0
    mean_band: float = 5.0
    growth_factor: float = 2.0


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment parameters."""

    model: str = "far"
    chain: Path | None = None
    D: int = 8  # noqa: N815
    c: float = 0.5
    delta: float = 2.0
    noise: str = "gaussian"
    n: int = 8192
    R: int = 2000  # noqa: N815
    seed: int = 1729
    alpha1: float = 0.5
    cstar: float | str = 1.0
    pprime: float = 3.0
    p: float = 4.0
    epsilon: float = 0.05
    output_dir: Path | None = None
    workers: int = -1
    m_lo: int = 6
    m_hi: int = 12
    merl_samples: int = 100_000
    merl_lags: int = 20
    max_batch_cells: int = DEFAULT_MAX_CELLS
    silent: bool = True
    thresholds: SuiteThresholds = field(default_factory=SuiteThresholds)

    def __post_init__(self) -> None:
        """Validate value ranges."""
        if self.model not in {"far", "markov"}:
            msg = f"model must be 'far' or 'markov', got '{self.model}'"
            raise ConfigError(msg)
        if self.model == "markov" and self.chain is None:
            msg = "markov model requires a chain file"
            raise ConfigError(msg)
        if self.noise not in NOISE_LAWS:
            msg = f"noise must be one of {NOISE_LAWS}, got '{self.noise}'"
            raise ConfigError(msg)
        if self.n < 1 or self.R < 1:
            msg = "n and R must be at least 1"
            raise ConfigError(msg)
        if self.seed < 0:
            msg = "seed must be non-negative"
            raise ConfigError(msg)
        if not 0 < self.alpha1 < 1:
            msg = f"alpha1 must lie in (0, 1), got {self.alpha1}"
            raise ConfigError(msg)
        if isinstance(self.cstar, str):
            if self.cstar != "auto":
                msg = f"cstar must be a positive number or 'auto', got '{self.cstar}'"
                raise ConfigError(msg)
        elif self.cstar <= 0:
            msg = f"cstar must be positive, got {self.cstar}"
            raise ConfigError(msg)
        if self.p <= 2:
            msg = "p must exceed 2"
            raise ConfigError(msg)
        if not 2 < self.pprime < self.p:
            msg = f"pprime must lie in (2, p), got {self.pprime}"
            raise ConfigError(msg)
        if self.epsilon <= 0:
            msg = "epsilon must be positive"
            raise ConfigError(msg)
        if self.workers == 0:
            msg = "workers must be non-zero"
            raise ConfigError(msg)
        if not 1 <= self.m_lo <= self.m_hi:
            msg = f"Need 1 <= m_lo <= m_hi, got {self.m_lo}, {self.m_hi}"
            raise ConfigError(msg)

    def to_dict(self) -> dict:
        """Get JSON form."""
        return asdict(self)


_FIELD_TYPES = {
    "chain": Path,
    "output_dir": Path,
}
_THRESHOLD_NAMES = {f.name for f in fields(SuiteThresholds)}
_CONFIG_NAMES = {f.name for f in fields(ExperimentConfig)} - {"thresholds"}


def _coerce(name: str, value: Any) -> Any:  # noqa: ANN401
    if value is None:
        return None
    if name in _FIELD_TYPES:
        return _FIELD_TYPES[name](value)
    return value


def load_config_file(path: Path) -> dict:
    """Read a flat JSON config file.

    :param path: config file
    :return: key-value mapping
    :raise ConfigError: if the file is not a JSON object
    """
    try:
        with path.open() as f:
            values = json.load(f)
    except json.JSONDecodeError as e:
        msg = f"Config file {path} is not valid JSON: {e}"
        raise ConfigError(msg) from e
    if not isinstance(values, dict):
        msg = f"Config file {path} must hold a flat JSON object"
        raise ConfigError(msg)
    return values


def resolve_config(
    config_file: Path | None = None, overrides: dict | None = None
) -> ExperimentConfig:
    """Resolve a config from defaults, an optional file, and flag overrides.

    Overrides whose value is ``None`` are treated as unset.

    :param config_file: optional flat JSON config
    :param overrides: flag values
    :return: validated config
    :raise ConfigError: on unknown keys or invalid values
    """
    values: dict = {}
    if config_file is not None:
        values.update(load_config_file(config_file))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})

    unknown = set(values) - _CONFIG_NAMES - _THRESHOLD_NAMES
    if unknown:
        msg = f"Unknown config keys: {sorted(unknown)}"
        raise ConfigError(msg)
    thresholds = replace(
        SuiteThresholds(), **{k: float(v) for k, v in values.items() if k in _THRESHOLD_NAMES}
    )
    settings = {k: _coerce(k, v) for k, v in values.items() if k in _CONFIG_NAMES}
    if settings.get("chain") is not None and "model" not in settings:
        settings["model"] = "markov"
    try:
        config = ExperimentConfig(**settings, thresholds=thresholds)
    except TypeError as e:
        msg = f"Invalid config value: {e}"
        raise ConfigError(msg) from e
    _logger.debug("Resolved config: %s", config)
    return config


def build_model(config: ExperimentConfig, noise: str | None = None) -> TimeSeriesModel:
    """Construct the configured model.

    :param config: resolved config
    :param noise: override the FAR noise law
    :return: FAR model or finite chain
    """
    if config.model == "markov":
        return load_chain(config.chain)
    return make_far(config.D, config.c, config.delta, noise or config.noise)


def resolve_cstar(config: ExperimentConfig, model: TimeSeriesModel) -> float:
    """Get the small-block constant, resolving ``"auto"`` from the model's mixing rate."""
    if config.cstar != "auto":
        return float(config.cstar)
    beta = model.mixing_rate()
    if not math.isfinite(beta):
        msg = "cstar 'auto' needs a model with a finite mixing rate"
        raise ConfigError(msg)
    cstar = default_cstar(config.alpha1, config.pprime, beta)
    _logger.info("Resolved cstar 'auto' to %s", cstar)
    return cstar


def build_plans(config: ExperimentConfig, cstar: float) -> list[BlockPlan]:
    """Build one plan per level in ``[m_lo, m_hi]``."""
    return [build_plan(m, config.alpha1, cstar) for m in range(config.m_lo, config.m_hi + 1)]
