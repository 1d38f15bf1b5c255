"""Experiment configuration: one YAML file drives every run.

Loading validates all cross-field invariants up front and raises
:class:`ConfigError` naming the offending dotted field. A loaded config
re-serializes to a value-identical document (the round-trip contract the
harness relies on for provenance).
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .analysis import optimal_epsilon
from .campaign import HandoverScenario
from .env import FailureCurve, NeighborCellSet, ServingTraceParams, ThresholdGrid
from .errors import ConfigError
from .threshold import SearchConfig

__all__ = ["ExperimentConfig", "load_config", "default_config"]

_EXPERIMENTS = ("threshold", "handover", "sweep")
_REWARD_MODES = ("outcome", "indicator")


def _get(d: dict, path: str, required=True, default=None):
    node = d
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            if required:
                raise ConfigError(f"{path}: missing required field")
            return default
        node = node[part]
    return node


def _require_number(d, path, lo=None, hi=None, integer=False):
    value = _get(d, path)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(f"{path}: must be >= {lo}, got {value!r}")
    if hi is not None and value > hi:
        raise ConfigError(f"{path}: must be <= {hi}, got {value!r}")
    return int(value) if integer else float(value)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, normalized experiment configuration."""

    data: dict

    # -- construction -----------------------------------------------------
    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        data = copy.deepcopy(raw)
        cfg = cls(data)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        d = self.data
        experiment = _get(d, "experiment")
        if experiment not in _EXPERIMENTS:
            raise ConfigError(f"experiment: must be one of {_EXPERIMENTS}, got {experiment!r}")

        knots = _get(d, "env.curve_knots")
        if not isinstance(knots, list) or len(knots) < 2:
            raise ConfigError("env.curve_knots: need a list of at least 2 [signal, prob] pairs")
        try:
            self.curve()
        except ValueError as exc:
            raise ConfigError(f"env.curve_knots: {exc}") from exc

        j = _require_number(d, "env.grid.j", lo=1, integer=True)
        z_min = _require_number(d, "env.grid.z_min")
        z_max = _require_number(d, "env.grid.z_max")
        if j >= 2 and z_max <= z_min:
            raise ConfigError("env.grid.z_max: must exceed env.grid.z_min")

        means = _get(d, "env.cells.signal_means")
        hws = _get(d, "env.cells.signal_half_widths")
        if not isinstance(means, list) or not means:
            raise ConfigError("env.cells.signal_means: need a nonempty list")
        if not isinstance(hws, list) or len(hws) != len(means):
            raise ConfigError("env.cells.signal_half_widths: must match signal_means in length")
        try:
            self.cells()
        except ValueError as exc:
            raise ConfigError(f"env.cells: {exc}") from exc

        for field, kw in (
            ("y_start", {}),
            ("y_start_half_width", dict(lo=0)),
            ("drift_per_step", dict(lo=0)),
            ("noise_half_width", dict(lo=0)),
            ("c", dict(lo=0)),
        ):
            _require_number(d, f"env.serving.{field}", **kw)
        _require_number(d, "env.serving.max_steps", lo=1, integer=True)
        try:
            serving = self.serving()
        except ValueError as exc:
            raise ConfigError(f"env.serving: {exc}") from exc
        if serving.max_steps < len(means):
            raise ConfigError("env.serving.max_steps: must be at least the number of cells")

        tolerance = _require_number(d, "algo.failure_tolerance", lo=0.0, hi=1.0)
        del tolerance
        eps = _get(d, "algo.epsilon")
        if eps != "auto":
            if isinstance(eps, bool) or not isinstance(eps, (int, float)):
                raise ConfigError(f"algo.epsilon: expected a number or 'auto', got {eps!r}")
            if not 0.0 < float(eps) <= 1.0:
                raise ConfigError(f"algo.epsilon: must lie in (0, 1], got {eps!r}")
        else:
            delta = _get(d, "algo.delta", required=False)
            if delta is None:
                raise ConfigError(
                    "algo.delta: required when algo.epsilon is 'auto' "
                    "(no reliable gap estimate can be read off a grid with tied rates)"
                )
            if isinstance(delta, bool) or not isinstance(delta, (int, float)) or delta <= 0:
                raise ConfigError(f"algo.delta: must be a positive number, got {delta!r}")
        _require_number(d, "algo.m_hat")
        _require_number(d, "algo.c", lo=0.0)
        _require_number(d, "algo.ucb_alpha", lo=0.0)
        _require_number(d, "algo.prior.alpha", lo=0.0)
        _require_number(d, "algo.prior.beta", lo=0.0)
        reward_mode = _get(d, "algo.reward_mode")
        if reward_mode not in _REWARD_MODES:
            raise ConfigError(f"algo.reward_mode: must be one of {_REWARD_MODES}, got {reward_mode!r}")

        _require_number(d, "run.t", lo=1, integer=True)
        _require_number(d, "run.trials", lo=1, integer=True)
        _require_number(d, "run.base_seed", lo=0, integer=True)
        _require_number(d, "run.n_jobs", lo=0, integer=True)
        if not isinstance(_get(d, "run.out_dir"), str):
            raise ConfigError("run.out_dir: expected a string path")
        for flag in ("run.write_per_round", "run.write_per_user"):
            if not isinstance(_get(d, flag), bool):
                raise ConfigError(f"{flag}: expected true/false")

        if experiment == "sweep":
            self._validate_sweep()

        # Cross-checks that need built objects.
        if experiment in ("threshold", "sweep"):
            try:
                self.search_config()
            except (ValueError, ConfigError) as exc:
                raise ConfigError(f"algo: invalid search setup: {exc}") from exc

    def _validate_sweep(self) -> None:
        d = self.data
        inner = _get(d, "sweep.experiment")
        if inner not in ("threshold", "handover"):
            raise ConfigError("sweep.experiment: must be 'threshold' or 'handover'")
        params = _get(d, "sweep.parameters")
        if not isinstance(params, list) or not params:
            raise ConfigError("sweep.parameters: need a nonempty list of {key, values} entries")
        for i, p in enumerate(params):
            if not isinstance(p, dict) or "key" not in p or "values" not in p:
                raise ConfigError(f"sweep.parameters[{i}]: need 'key' and 'values'")
            if not isinstance(p["values"], list) or not p["values"]:
                raise ConfigError(f"sweep.parameters[{i}].values: need a nonempty list")

    # -- typed accessors ---------------------------------------------------
    @property
    def experiment(self) -> str:
        return self.data["experiment"]

    @property
    def t(self) -> int:
        return int(self.data["run"]["t"])

    @property
    def trials(self) -> int:
        return int(self.data["run"]["trials"])

    @property
    def base_seed(self) -> int:
        return int(self.data["run"]["base_seed"])

    @property
    def out_dir(self) -> Path:
        return Path(self.data["run"]["out_dir"])

    @property
    def n_jobs(self) -> int:
        return int(self.data["run"]["n_jobs"])

    @property
    def success_threshold(self) -> float:
        return 1.0 - float(self.data["algo"]["failure_tolerance"])

    def curve(self) -> FailureCurve:
        return FailureCurve(self.data["env"]["curve_knots"])

    def grid(self) -> ThresholdGrid:
        g = self.data["env"]["grid"]
        return ThresholdGrid.linspace_from_curve(
            self.curve(), int(g["j"]), float(g["z_min"]), float(g["z_max"])
        )

    def cells(self) -> NeighborCellSet:
        c = self.data["env"]["cells"]
        return NeighborCellSet.calibrated(
            self.curve(), c["signal_means"], c["signal_half_widths"]
        )

    def serving(self) -> ServingTraceParams:
        s = self.data["env"]["serving"]
        return ServingTraceParams(
            y_start=float(s["y_start"]),
            drift_per_step=float(s["drift_per_step"]),
            noise_half_width=float(s["noise_half_width"]),
            c=float(s["c"]),
            max_steps=int(s["max_steps"]),
            y_start_half_width=float(s["y_start_half_width"]),
        )

    def resolved_epsilon(self) -> float:
        eps = self.data["algo"]["epsilon"]
        if eps != "auto":
            return float(eps)
        delta = float(self.data["algo"]["delta"])
        j = int(self.data["env"]["grid"]["j"])
        return optimal_epsilon(j, self.t, delta)

    def search_config(self) -> SearchConfig:
        return SearchConfig(
            J=int(self.data["env"]["grid"]["j"]),
            T=self.t,
            R=self.success_threshold,
            epsilon=self.resolved_epsilon(),
        )

    def scenario(self) -> HandoverScenario:
        a = self.data["algo"]
        return HandoverScenario(
            curve=self.curve(),
            cells=self.cells(),
            serving=self.serving(),
            m_hat=float(a["m_hat"]),
            c=float(a["c"]),
            ucb_alpha=float(a["ucb_alpha"]),
            prior_alpha=float(a["prior"]["alpha"]),
            prior_beta=float(a["prior"]["beta"]),
            reward_mode=a["reward_mode"],
        )

    # -- serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        return copy.deepcopy(self.data)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.data, sort_keys=False)

    def save(self, path) -> None:
        Path(path).write_text(self.to_yaml())

    def with_overrides(self, overrides: dict) -> "ExperimentConfig":
        """New config with dotted-key overrides applied (sweep machinery)."""
        data = self.to_dict()
        for key, value in overrides.items():
            node = data
            parts = key.split(".")
            for part in parts[:-1]:
                if part not in node or not isinstance(node[part], dict):
                    raise ConfigError(f"{key}: unknown config field")
                node = node[part]
            if parts[-1] not in node:
                raise ConfigError(f"{key}: unknown config field")
            node[parts[-1]] = value
        return ExperimentConfig.from_dict(data)


def load_config(path) -> ExperimentConfig:
    """Load and validate a YAML experiment config."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"could not parse {p}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{p}: top level must be a mapping")
    return ExperimentConfig.from_dict(raw)


def default_config() -> ExperimentConfig:
    """The bundled, calibrated default setup."""
    text = resources.files("batt.data").joinpath("default.yaml").read_text()
    return ExperimentConfig.from_dict(yaml.safe_load(text))
