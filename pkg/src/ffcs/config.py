"""Experiment configuration schema.

One pydantic model family serves three masters: YAML config files on disk,
the service request bodies, and the CLI.  Unknown keys are rejected
(`extra="forbid"`) because a silently ignored key would invalidate a sweep.
"""

from __future__ import annotations

from typing import Annotated, Literal, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field

from .decoder import DEFAULT_CANDIDATE_CAP


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", protected_namespaces=())


class SiConfig(_Strict):
    model: Literal["si"] = "si"
    pmf: list[float]


class StmConfig(_Strict):
    model: Literal["stm"] = "stm"
    order: int = 1
    kernel: list[list[float]]
    initial: list[float] | None = None


class GseConfig(_Strict):
    model_config = ConfigDict(extra="forbid", protected_namespaces=(), populate_by_name=True)
    model: Literal["gse"] = "gse"
    lam: float = Field(alias="lambda")
    jitter: float = 1e-10
    positions_file: str | None = None
    position_seed: int = 0


SourceConfig = Annotated[Union[SiConfig, StmConfig, GseConfig], Field(discriminator="model")]


class ScenarioConfig(_Strict):
    """One experiment configuration.

    sensing_noise: symmetric crossover probability, or a full q x q
    transition table; 0 means no sensing noise.  comm_noise: Pr(u != 0)
    spread uniformly over nonzero symbols, or an explicit pmf over GF(q);
    0 means no communication noise.
    """

    n: int
    m: int
    q: int
    gamma: float
    source: SourceConfig
    sensing_noise: float | list[list[float]] = 0.0
    comm_noise: float | list[float] = 0.0
    seed: int = 0
    trials: int = 100
    a_override: Literal["identity"] | None = None
    candidate_cap: int = DEFAULT_CANDIDATE_CAP
    threads: int = 1


def load_config(path: str) -> ScenarioConfig:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    return ScenarioConfig.model_validate(raw)


def dump_config(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(cfg.model_dump(by_alias=True, exclude_none=True), sort_keys=False)


def load_positions(path: str) -> np.ndarray:
    """Sensor positions from a two-column text/CSV file."""
    pos = np.loadtxt(path, delimiter=",") if path.endswith(".csv") else np.loadtxt(path)
    return np.atleast_2d(pos)
