"""Run configuration: one JSON document controlling a full run."""
from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from .features import LinearHyper
from .promp import BasisConfig, ConfigError
from .scenario import ScenarioConfig, ScenarioConfigError

SEED_ENV = "OPINION_POOL_SEED"


class RunConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    basis: BasisConfig = field(default_factory=BasisConfig)
    linear: LinearHyper = field(default_factory=LinearHyper)
    train_fraction: float = 0.75
    gaze_window: int = 900
    response_points: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.scenario.seed != self.seed:
            object.__setattr__(self, "scenario", dataclasses.replace(self.scenario, seed=self.seed))
        if not 0 < self.train_fraction < 1:
            raise RunConfigError("train_fraction must lie strictly between 0 and 1")
        if self.gaze_window < 1 or self.response_points < 2:
            raise RunConfigError("gaze_window must be >= 1 and response_points >= 2")
        if self.linear.epochs < 1 or self.linear.learning_rate <= 0 or self.linear.l2 < 0:
            raise RunConfigError("invalid classifier hyperparameters")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "train_fraction": self.train_fraction,
            "gaze_window": self.gaze_window,
            "response_points": self.response_points,
            "basis": dataclasses.asdict(self.basis),
            "linear": dataclasses.asdict(self.linear),
            "scenario": self.scenario.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping, seed_override: Optional[int] = None) -> "RunConfig":
        if not isinstance(data, Mapping):
            raise RunConfigError("run config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise RunConfigError(f"unknown run config keys {sorted(unknown)}")
        if "seed" not in data and seed_override is None:
            raise RunConfigError("run config must set a seed")
        seed = int(data["seed"]) if seed_override is None else int(seed_override)
        try:
            scenario = dict(data.get("scenario", {}))
            scenario["seed"] = seed
            return cls(
                scenario=ScenarioConfig.from_dict(scenario),
                basis=BasisConfig(**data.get("basis", {})),
                linear=LinearHyper(**data.get("linear", {})),
                train_fraction=float(data.get("train_fraction", 0.75)),
                gaze_window=int(data.get("gaze_window", 900)),
                response_points=int(data.get("response_points", 50)),
                seed=seed,
            )
        except (TypeError, ConfigError, ScenarioConfigError) as exc:
            raise RunConfigError(str(exc)) from None


def env_seed() -> Optional[int]:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise RunConfigError(f"{SEED_ENV}={raw!r} is not an integer") from None


def load_run_config(path) -> RunConfig:
    """Read a run config file; ``OPINION_POOL_SEED`` overrides its seed."""
    p = Path(path)
    if not p.is_file():
        raise RunConfigError(f"config file {p} not found")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise RunConfigError(f"{p}: invalid JSON ({exc})") from None
    return RunConfig.from_dict(data, seed_override=env_seed())
