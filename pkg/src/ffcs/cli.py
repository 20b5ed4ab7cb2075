"""Command-line client of the lab service.

Every subcommand talks to the HTTP API.  By default the app is mounted
in-process (no server or network involved, results stay byte-reproducible);
pass --server to target a running instance instead.

Exit codes: 0 success, 1 failed verification, 2 usage or request error.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys

import httpx
import yaml

from .config import ScenarioConfig, load_config


class ServiceClient:
    def __init__(self, server: str | None = None):
        self.server = server

    def post(self, path: str, payload: dict) -> httpx.Response:
        if self.server:
            with httpx.Client(base_url=self.server, timeout=None) as client:
                return client.post(path, json=payload)
        from .service.app import app

        async def _run():
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(transport=transport,
                                         base_url="http://ffcs.local",
                                         timeout=None) as client:
                return await client.post(path, json=payload)

        return asyncio.run(_run())


def _fail(resp: httpx.Response):
    try:
        detail = resp.json().get("detail", resp.text)
    except Exception:
        detail = resp.text
    print(f"error ({resp.status_code}): {detail}", file=sys.stderr)
    sys.exit(2)


def _scenario_payload(args) -> dict:
    cfg = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.threads is not None:
        overrides["threads"] = args.threads
    if overrides:
        cfg = cfg.model_copy(update=overrides)
    return cfg.model_dump(by_alias=True)


def _write_out(path: str | None, text: str):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def cmd_bounds(args) -> int:
    resp = ServiceClient(args.server).post("/bounds", _scenario_payload(args))
    if resp.status_code != 200:
        _fail(resp)
    data = resp.json()
    for key in ("regime", "rate_theta", "rate_joint", "h_u", "log2_q",
                "necessary_ratio", "sufficient_ratio", "gamma", "gamma_min",
                "gamma_ok", "alpha_star", "feasible_noise", "feasible_joint",
                "deterministic_given_x", "exponent"):
        print(f"{key}: {data[key]}")
    if args.out:
        _write_out(args.out, json.dumps(data, indent=2) + "\n")
    return 0


def cmd_simulate(args) -> int:
    resp = ServiceClient(args.server).post("/simulate", _scenario_payload(args))
    if resp.status_code != 200:
        _fail(resp)
    d = resp.json()
    print(f"regime={d['regime']} pe={d['pe']:.6g} "
          f"ci95=[{d['ci_low']:.6g}, {d['ci_high']:.6g}] "
          f"errors={d['errors']}/{d['trials']} "
          f"mean_ties={d['mean_tie_count']:.3g} mean_work={d['mean_work']:.6g}")
    if args.out:
        header = ["regime", "pe", "ci_low", "ci_high", "errors", "trials",
                  "mean_tie_count", "mean_work"]
        row = ",".join(str(d[k]) for k in header)
        _write_out(args.out, ",".join(header) + "\n" + row + "\n")
    return 0


def cmd_phase(args) -> int:
    with open(args.config) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict) or "scenario" not in raw:
        print("phase config must have keys: scenario, n_list, ratio_list",
              file=sys.stderr)
        return 2
    scenario = ScenarioConfig.model_validate(raw["scenario"])
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.threads is not None:
        overrides["threads"] = args.threads
    if overrides:
        scenario = scenario.model_copy(update=overrides)
    payload = {
        "scenario": scenario.model_dump(by_alias=True),
        "n_list": raw.get("n_list", []),
        "ratio_list": raw.get("ratio_list", []),
    }
    resp = ServiceClient(args.server).post("/phase", payload)
    if resp.status_code != 200:
        _fail(resp)
    _write_out(args.out, resp.json()["csv"])
    return 0


def cmd_figures(args) -> int:
    payload = {"kind": args.kind}
    resp = ServiceClient(args.server).post("/figures", payload)
    if resp.status_code != 200:
        _fail(resp)
    _write_out(args.out, resp.json()["csv"])
    return 0


def cmd_verify(args) -> int:
    path = {"lemma2": "/verify/lemma2", "decoders": "/verify/decoders",
            "appendixB": "/verify/appendixB"}[args.suite]
    payload = {}
    if args.samples is not None:
        payload["samples"] = args.samples
    if args.count is not None:
        payload["count"] = args.count
    if args.mc_draws is not None:
        payload["mc_draws"] = args.mc_draws
    if args.seed is not None:
        payload["seed"] = args.seed
    resp = ServiceClient(args.server).post(path, payload)
    if resp.status_code != 200:
        _fail(resp)
    d = resp.json()
    print(f"suite={d['suite']} passed={d['passed']}")
    print(d["summary"])
    if args.out:
        _write_out(args.out, d["csv"])
    return 0 if d["passed"] else 1


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ffcs",
        description="finite-field compressed sensing lab (thin client)",
    )
    parser.add_argument("--server", help="base URL of a running service; "
                                         "default runs the app in-process")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--trials", type=int, help="override the trial count")
    parser.add_argument("--threads", type=int, help="worker threads for trials")
    parser.add_argument("--out", help="output file path")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="threshold report for a scenario config")
    p.add_argument("config")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", help="Monte Carlo error-rate estimate")
    p.add_argument("config")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("phase", help="(N, M/N) sweep with bound overlays")
    p.add_argument("config", help="YAML with keys scenario, n_list, ratio_list")
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("figures", help="emit threshold figure data as CSV")
    p.add_argument("--kind", required=True, choices=["fig2", "fig3", "fig4"])
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=["lemma2", "decoders", "appendixB"])
    p.add_argument("--samples", type=int, help="Monte Carlo samples per point (lemma2)")
    p.add_argument("--count", type=int, help="scenario count (decoders)")
    p.add_argument("--mc-draws", type=int, help="Gaussian draws (appendixB)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except httpx.HTTPError as exc:
        print(f"request failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
