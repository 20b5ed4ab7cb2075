"""Request/response models of the HTTP service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict

from ..config import ScenarioConfig


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", protected_namespaces=())


class BoundsResponse(_Strict):
    regime: str
    rate_theta: float
    rate_joint: float
    h_u: float
    log2_q: float
    necessary_ratio: float | None
    sufficient_ratio: float | None
    gamma: float
    gamma_min: float | None
    gamma_ok: bool | None
    alpha_star: float | None
    alpha_at_boundary: bool | None
    feasible_noise: bool
    feasible_joint: bool
    deterministic_given_x: bool | None
    exponent: float | None


class SimulateResponse(_Strict):
    regime: str
    pe: float
    ci_low: float
    ci_high: float
    errors: int
    trials: int
    mean_tie_count: float
    mean_work: float


class PhaseRequest(_Strict):
    scenario: ScenarioConfig
    n_list: list[int]
    ratio_list: list[float]


class TableResponse(_Strict):
    """Any tabular result: header plus the exact CSV text the CLI writes."""

    columns: list[str]
    csv: str


class FiguresRequest(_Strict):
    kind: Literal["fig2", "fig3", "fig4"]
    grid: list[float] | None = None
    q_list: list[int] | None = None


class VerifyRequest(_Strict):
    samples: int | None = None
    count: int | None = None
    mc_draws: int | None = None
    cesaro_seeds: int | None = None
    seed: int | None = None


class VerifyResponse(_Strict):
    suite: str
    passed: bool
    summary: str
    columns: list[str]
    csv: str
