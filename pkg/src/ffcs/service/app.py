"""HTTP service exposing the lab: bounds, simulation, sweeps, figures,
and the verification suites.  The CLI is a thin client of these endpoints;
long-running sweeps run synchronously (batch semantics, no job queue).
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import harness
from ..bounds import BoundError
from ..config import ScenarioConfig
from ..decoder import SearchSpaceError
from .models import (BoundsResponse, FiguresRequest, PhaseRequest,
                     SimulateResponse, TableResponse, VerifyRequest,
                     VerifyResponse)

app = FastAPI(title="ffcs", description="finite-field compressed sensing lab")


def _scenario(cfg: ScenarioConfig) -> harness.Scenario:
    try:
        return harness.build_scenario(cfg)
    except (ValueError, OSError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/bounds", response_model=BoundsResponse)
def bounds(cfg: ScenarioConfig) -> BoundsResponse:
    sc = _scenario(cfg)
    try:
        rep = harness.scenario_bounds(sc)
    except BoundError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return BoundsResponse(
        regime=rep.regime, rate_theta=rep.rate_theta, rate_joint=rep.rate_joint,
        h_u=rep.h_u, log2_q=rep.log2_q, necessary_ratio=rep.necessary_ratio,
        sufficient_ratio=rep.sufficient_ratio, gamma=sc.gamma,
        gamma_min=rep.gamma_min, gamma_ok=rep.gamma_ok, alpha_star=rep.alpha_star,
        alpha_at_boundary=rep.alpha_at_boundary, feasible_noise=rep.feasible_noise,
        feasible_joint=rep.feasible_joint,
        deterministic_given_x=rep.deterministic_given_x, exponent=rep.exponent,
    )


@app.post("/simulate", response_model=SimulateResponse)
def simulate(cfg: ScenarioConfig) -> SimulateResponse:
    sc = _scenario(cfg)
    try:
        est = harness.estimate_pe(sc)
    except SearchSpaceError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return SimulateResponse(
        regime=sc.regime, pe=est.pe, ci_low=est.ci_low, ci_high=est.ci_high,
        errors=est.errors, trials=est.trials,
        mean_tie_count=est.mean_tie_count, mean_work=est.mean_work,
    )


@app.post("/phase", response_model=TableResponse)
def phase(req: PhaseRequest) -> TableResponse:
    sc = _scenario(req.scenario)
    sweep = harness.phase_sweep(sc, req.n_list, req.ratio_list)
    header = sweep.header()
    return TableResponse(columns=header, csv=harness.csv_text(header, sweep.rows()))


@app.post("/figures", response_model=TableResponse)
def figures(req: FiguresRequest) -> TableResponse:
    from ..bounds import figure_curves

    header, rows = figure_curves(req.kind, grid=req.grid, q_list=req.q_list)
    return TableResponse(columns=header, csv=harness.csv_text(header, rows))


def _verify_response(report) -> VerifyResponse:
    return VerifyResponse(suite=report.suite, passed=report.passed,
                          summary=report.summary, columns=report.header,
                          csv=report.to_csv())


@app.post("/verify/lemma2", response_model=VerifyResponse)
def verify_lemma2(req: VerifyRequest) -> VerifyResponse:
    kwargs = {}
    if req.samples is not None:
        kwargs["samples"] = req.samples
    if req.seed is not None:
        kwargs["master_seed"] = req.seed
    return _verify_response(harness.verify_lemma2(**kwargs))


@app.post("/verify/decoders", response_model=VerifyResponse)
def verify_decoders(req: VerifyRequest) -> VerifyResponse:
    kwargs = {}
    if req.count is not None:
        kwargs["count"] = req.count
    if req.seed is not None:
        kwargs["master_seed"] = req.seed
    return _verify_response(harness.verify_decoder_equivalence(**kwargs))


@app.post("/verify/appendixB", response_model=VerifyResponse)
def verify_appendix_b(req: VerifyRequest) -> VerifyResponse:
    kwargs = {}
    if req.mc_draws is not None:
        kwargs["mc_draws"] = req.mc_draws
    if req.cesaro_seeds is not None:
        kwargs["cesaro_seeds"] = req.cesaro_seeds
    if req.seed is not None:
        kwargs["master_seed"] = req.seed
    return _verify_response(harness.verify_appendix_b(**kwargs))
