"""Monte Carlo harness: scenario assembly, seeded error-rate estimation,
phase sweeps with bound overlays, figure emission, and the verification
suites that cross-check every closed form against brute force.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import bounds as bnd
from .channel import CommNoise, MatrixLaw, SensingChannel, measure
from .config import (GseConfig, ScenarioConfig, SiConfig, StmConfig,
                     load_positions)
from .decoder import (DEFAULT_CANDIDATE_CAP, ArgmaxTracker, DecodeResult,
                      SearchSpaceError, decode, decode_max_q_prob, decode_nc,
                      run_trial)
from .entropy import entropy_bits
from .gf import GF
from .seeding import derive_seed
from .sources import (GaussianFieldSource, SiSource, StmSource,
                      conditional_entropy_bound, epsilon_rho)

WILSON_Z = 1.959963984540054  # two-sided 95%


@dataclass
class Scenario:
    """Fully assembled experiment configuration (concrete objects, not schema)."""

    n: int
    m: int
    field: GF
    gamma: float
    source: object
    sensing: SensingChannel
    comm: CommNoise
    master_seed: int = 0
    trials: int = 100
    a_override: str | None = None
    candidate_cap: int = DEFAULT_CANDIDATE_CAP
    threads: int = 1

    @property
    def regime(self) -> str:
        if self.sensing.is_identity:
            return "WN" if self.comm.is_zero else "NC"
        return "NS" if self.comm.is_zero else "NCS"

    @property
    def matrix_law(self) -> MatrixLaw:
        return MatrixLaw(self.field.q, self.gamma, self.m, self.n)

    def trial_seed(self, t: int) -> int:
        return derive_seed(self.master_seed, t)


def build_scenario(cfg: ScenarioConfig) -> Scenario:
    field = GF(cfg.q)
    src_cfg = cfg.source
    if isinstance(src_cfg, SiConfig):
        source = SiSource(cfg.q, src_cfg.pmf)
    elif isinstance(src_cfg, StmConfig):
        source = StmSource(cfg.q, src_cfg.kernel, order=src_cfg.order, initial=src_cfg.initial)
    elif isinstance(src_cfg, GseConfig):
        positions = load_positions(src_cfg.positions_file) if src_cfg.positions_file else None
        source = GaussianFieldSource(src_cfg.lam, cfg.n, jitter=src_cfg.jitter,
                                     positions=positions, position_seed=src_cfg.position_seed)
    else:  # pragma: no cover - pydantic enforces the union
        raise TypeError(f"unknown source config {type(src_cfg)}")
    if isinstance(cfg.sensing_noise, (int, float)):
        sensing = SensingChannel.symmetric(cfg.q, float(cfg.sensing_noise))
    else:
        sensing = SensingChannel(cfg.q, cfg.sensing_noise)
    if isinstance(cfg.comm_noise, (int, float)):
        comm = CommNoise.worst_case(cfg.q, float(cfg.comm_noise))
    else:
        comm = CommNoise(cfg.q, cfg.comm_noise)
    return Scenario(
        n=cfg.n, m=cfg.m, field=field, gamma=cfg.gamma, source=source,
        sensing=sensing, comm=comm, master_seed=cfg.seed, trials=cfg.trials,
        a_override=cfg.a_override, candidate_cap=cfg.candidate_cap,
        threads=cfg.threads,
    )


def scenario_config(sc: Scenario) -> ScenarioConfig:
    """Inverse of build_scenario, for config round-trips."""
    src = sc.source
    if isinstance(src, SiSource):
        source_cfg = SiConfig(pmf=[float(p) for p in src.pmf])
    elif isinstance(src, StmSource):
        source_cfg = StmConfig(order=src.order,
                               kernel=[[float(v) for v in row] for row in src.kernel],
                               initial=None if src.stationary else
                               [float(v) for v in src.initial])
    elif isinstance(src, GaussianFieldSource):
        source_cfg = GseConfig(lam=src.lam, jitter=src.jitter,
                               position_seed=src.position_seed)
    else:
        raise TypeError(f"unknown source type {type(src)}")
    sensing = 0.0 if sc.sensing.is_identity else [[float(v) for v in row]
                                                  for row in sc.sensing.table]
    comm = 0.0 if sc.comm.is_zero else [float(v) for v in sc.comm.pmf]
    return ScenarioConfig(
        n=sc.n, m=sc.m, q=sc.field.q, gamma=sc.gamma, source=source_cfg,
        sensing_noise=sensing, comm_noise=comm, seed=sc.master_seed,
        trials=sc.trials, a_override=sc.a_override,
        candidate_cap=sc.candidate_cap, threads=sc.threads,
    )


def scenario_bounds(sc: Scenario, ratio: float | None = None) -> bnd.BoundReport:
    """Thresholds for a scenario, with the error exponent when it applies."""
    rate_theta = sc.source.entropy_rate().rate_theta
    marginal = sc.source.marginal()
    if sc.sensing.is_identity:
        rate_joint = rate_theta
        rate_x = rate_theta if isinstance(sc.source, SiSource) else None
    else:
        rate_joint = rate_theta + sc.sensing.conditional_entropy(marginal)
        rate_x = (entropy_bits(sc.sensing.output_marginal(marginal))
                  if isinstance(sc.source, SiSource) else None)
    inputs = bnd.BoundInputs(
        rate_theta=rate_theta, h_u=sc.comm.entropy_bits(), q=sc.field.q,
        regime=sc.regime, rate_joint=rate_joint, rate_x=rate_x, gamma=sc.gamma,
    )
    p_theta = sc.source.pmf if isinstance(sc.source, SiSource) else None
    use_ratio = ratio if ratio is not None else (sc.m / sc.n if sc.n else None)
    want_exponent = (sc.regime in ("WN", "NC") and sc.field.q <= 4
                     and p_theta is not None and use_ratio)
    return bnd.bound_report(
        inputs, n=sc.n,
        p_theta=p_theta if want_exponent else None,
        p_u=sc.comm.pmf if want_exponent else None,
        ratio=use_ratio if want_exponent else None,
    )


# -- error-rate estimation ----------------------------------------------------


def wilson_interval(errors: int, trials: int, z: float = WILSON_Z):
    """Wilson 95% score interval; behaves sanely at 0 and 1."""
    if trials == 0:
        return 0.0, 1.0
    p = errors / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass
class PeEstimate:
    pe: float
    ci_low: float
    ci_high: float
    errors: int
    trials: int
    mean_tie_count: float
    mean_work: float


def estimate_pe(sc: Scenario) -> PeEstimate:
    """Empirical error probability over sc.trials seeded trials.

    Trial t runs from seed derive(master_seed, t), so the estimate does not
    depend on execution order or the number of worker threads.
    """
    if sc.trials < 1:
        raise ValueError("trial count must be >= 1")

    def one(t: int):
        return run_trial(sc, sc.trial_seed(t))

    if sc.threads > 1:
        with ThreadPoolExecutor(max_workers=sc.threads) as pool:
            outcomes = list(pool.map(one, range(sc.trials)))
    else:
        outcomes = [one(t) for t in range(sc.trials)]
    errors = sum(1 for err, _ in outcomes if err)
    ties = float(np.mean([r.tie_count for _, r in outcomes]))
    work = float(np.mean([r.work for _, r in outcomes]))
    lo, hi = wilson_interval(errors, sc.trials)
    return PeEstimate(pe=errors / sc.trials, ci_low=lo, ci_high=hi,
                      errors=errors, trials=sc.trials,
                      mean_tie_count=ties, mean_work=work)


@dataclass
class SweepCell:
    n: int
    ratio: float
    m: int
    estimate: PeEstimate | None
    skipped: bool = False
    reason: str = ""


@dataclass
class SweepResult:
    cells: list[SweepCell]
    necessary_ratio: float | None
    sufficient_ratio: float | None

    def header(self):
        return ["n", "ratio", "m", "pe", "ci_low", "ci_high", "errors", "trials",
                "mean_tie_count", "mean_work", "necessary_ratio", "sufficient_ratio",
                "skipped"]

    def rows(self):
        out = []
        for c in self.cells:
            e = c.estimate
            out.append([
                c.n, c.ratio, c.m,
                e.pe if e else "", e.ci_low if e else "", e.ci_high if e else "",
                e.errors if e else "", e.trials if e else "",
                e.mean_tie_count if e else "", e.mean_work if e else "",
                self.necessary_ratio if self.necessary_ratio is not None else "",
                self.sufficient_ratio if self.sufficient_ratio is not None else "",
                int(c.skipped),
            ])
        return out


def phase_sweep(base: Scenario, n_list, ratio_list) -> SweepResult:
    """Grid of error-rate estimates over (N, M/N) with bound overlays.

    M is the nearest integer to ratio * N.  Cells whose decode would exceed
    the candidate cap are skipped and marked, not silently dropped.
    """
    report = scenario_bounds(base)
    cells = []
    for n, ratio in itertools.product(n_list, ratio_list):
        m = int(round(ratio * n))
        sc = replace(base, n=n, m=m)
        try:
            est = estimate_pe(sc)
            cells.append(SweepCell(n=n, ratio=ratio, m=m, estimate=est))
        except SearchSpaceError as exc:
            cells.append(SweepCell(n=n, ratio=ratio, m=m, estimate=None,
                                   skipped=True, reason=str(exc)))
    return SweepResult(cells=cells, necessary_ratio=report.necessary_ratio,
                       sufficient_ratio=report.sufficient_ratio)


# -- CSV ----------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def emit_figures(kind: str, out_path: str, grid=None, q_list=None) -> str:
    header, rows = bnd.figure_curves(kind, grid=grid, q_list=q_list)
    text = csv_text(header, rows)
    with open(out_path, "w", newline="") as fh:
        fh.write(text)
    return out_path


# -- verification suites --------------------------------------------------------


@dataclass
class VerifyReport:
    suite: str
    passed: bool
    header: list
    rows: list
    summary: str = ""

    def to_csv(self) -> str:
        return csv_text(self.header, self.rows)


# default grid: gamma in {0.1, 0.3, 0.5} plus the uniform point 1 - 1/q,
# d2 in {0, 1, M} (deduplicated when M = 1)
LEMMA2_GRID = {
    "gamma": (0.1, 0.3, 0.5),
    "q": (2, 4),
    "m": (1, 3, 5),
    "d1": (1, 2, 5),
}


def _lemma2_points(grid=None):
    g = dict(LEMMA2_GRID)
    if grid:
        g.update(grid)
    pts = []
    for q in g["q"]:
        gammas = list(g["gamma"]) + [1.0 - 1.0 / q]
        for gamma, m, d1 in itertools.product(gammas, g["m"], g["d1"]):
            for d2 in sorted({0, 1, m}):
                pts.append((q, gamma, m, d1, d2))
    return pts


def collision_mc(q: int, gamma: float, m: int, d1: int, d2: int,
                 samples: int, seed: int) -> float:
    """Monte Carlo estimate of the syndrome collision probability.

    Samples only the m x d1 submatrix that multiplies the nonzero entries
    of the difference vector (all ones, without loss of generality: the
    matrix law is symmetric across nonzero symbols).  The target syndrome
    has d2 leading nonzero entries.
    """
    field = GF(q)
    law_pmf = MatrixLaw(q, gamma, m, d1).pmf()
    cdf = np.cumsum(law_pmf)
    rng = np.random.Generator(np.random.PCG64(seed))
    s = np.zeros(m, dtype=np.int64)
    s[:d2] = 1
    hits = 0
    chunk = max(1, min(samples, 200_000 // max(1, m * d1) * 64))
    done = 0
    while done < samples:
        b = min(chunk, samples - done)
        u = rng.random((b, m, d1))
        entries = np.minimum(np.searchsorted(cdf, u.ravel(), side="right"), q - 1)
        entries = entries.astype(np.int64).reshape(b, m, d1)
        if field.is_prime_field:
            rows = entries.sum(axis=2) % q
        else:
            rows = np.bitwise_xor.reduce(entries, axis=2)
        hits += int(np.all(rows == s[None, :], axis=1).sum())
        done += b
    return hits / samples


def verify_lemma2(samples: int = 100_000, master_seed: int = 0x1E44A2,
                  grid=None, z_max: float = 4.0) -> VerifyReport:
    """Closed-form collision probability vs Monte Carlo on the full default grid.

    Fails if any |z| exceeds z_max, or if a uniform-matrix point deviates
    from q^-m beyond float roundoff.
    """
    rows = []
    passed = True
    for idx, (q, gamma, m, d1, d2) in enumerate(_lemma2_points(grid)):
        f = bnd.f_collision(bnd.FParams(d1=d1, d2=d2, gamma=gamma, q=q, m=m))
        est = collision_mc(q, gamma, m, d1, d2, samples, derive_seed(master_seed, idx))
        sigma = math.sqrt(f * (1.0 - f) / samples)
        z = (est - f) / sigma if sigma > 0 else 0.0
        ok = abs(z) <= z_max
        uniform = abs(gamma - (1.0 - 1.0 / q)) < 1e-12
        if uniform and abs(f - q**-m) > 1e-14:
            ok = False
        passed &= ok
        rows.append([q, gamma, m, d1, d2, f, est, z, int(ok)])
    header = ["q", "gamma", "m", "d1", "d2", "closed_form", "mc_estimate", "z", "ok"]
    return VerifyReport(suite="lemma2", passed=passed, header=header, rows=rows,
                        summary=f"{len(rows)} grid points, all |z| <= {z_max}: {passed}")


def decode_naive(sc: Scenario, y, A) -> DecodeResult:
    """Per-candidate exhaustive scan, one vector at a time.

    Independent of the optimized enumeration and batching machinery (same
    scoring arithmetic, so exact ties agree); the reference decoder for the
    equivalence suite.
    """
    y = np.asarray(y, dtype=np.int64)
    tracker = ArgmaxTracker()
    for cand in itertools.product(range(sc.field.q), repeat=sc.n):
        vec = np.array(cand, dtype=np.int64)
        res = sc.field.sub_arr(y, sc.field.matvec(A, vec))
        score = sc.source.log_prob(vec) + float(sc.comm.log_prob_batch(res[None, :])[0])
        tracker.update(np.array([score]), vec[None, :])
    return tracker.result(sc.regime)


def _random_equivalence_scenario(seed: int) -> Scenario:
    rng = np.random.Generator(np.random.PCG64(seed))
    q = int(rng.choice([2, 3]))
    n = int(rng.integers(2, 7))
    m = int(rng.integers(1, 7))
    gamma = float(rng.uniform(0.05, 1.0 - 1.0 / q))
    p0 = float(rng.uniform(0.5, 0.95))
    rest = rng.random(q - 1)
    pmf = np.concatenate([[p0], (1.0 - p0) * rest / rest.sum()])
    source = SiSource(q, pmf)
    if rng.random() < 0.5:
        comm = CommNoise.zero(q)
    else:
        comm = CommNoise.worst_case(q, float(rng.uniform(0.01, 0.3)))
    return Scenario(n=n, m=m, field=GF(q), gamma=gamma, source=source,
                    sensing=SensingChannel.identity(q), comm=comm,
                    master_seed=seed, trials=1)


def verify_decoder_equivalence(count: int = 100, master_seed: int = 0xDEC0DE) -> VerifyReport:
    """Random WN/NC instances decoded three ways must agree exactly.

    Compares the regime decoder (coset-restricted in the noiseless case),
    the joint maximum-probability decoder, and the naive per-candidate
    scan, under the shared lexicographic tie-break.
    """
    rows = []
    passed = True
    for k in range(count):
        sc = _random_equivalence_scenario(derive_seed(master_seed, k))
        seed = derive_seed(master_seed, k, 1)
        theta = sc.source.sample(sc.n, derive_seed(seed, 0))
        A = sc.matrix_law.sample(derive_seed(seed, 2))
        u = (np.zeros(sc.m, dtype=np.int64) if sc.comm.is_zero
             else sc.comm.sample(sc.m, derive_seed(seed, 3)))
        y = measure(sc.field, A, theta, u)
        r_map = decode_nc(sc, y, A)
        r_mqp = decode_max_q_prob(sc, y, A)
        r_naive = decode_naive(sc, y, A)
        ok = (np.array_equal(r_map.estimate, r_mqp.estimate)
              and np.array_equal(r_map.estimate, r_naive.estimate)
              and r_map.tie_count == r_mqp.tie_count == r_naive.tie_count)
        passed &= ok
        rows.append([k, seed, sc.field.q, sc.n, sc.m, sc.regime,
                     "".join(map(str, r_map.estimate)),
                     "".join(map(str, r_mqp.estimate)),
                     "".join(map(str, r_naive.estimate)), int(ok)])
    header = ["case", "seed", "q", "n", "m", "regime", "map", "max_q_prob", "naive", "ok"]
    return VerifyReport(suite="decoders", passed=passed, header=header, rows=rows,
                        summary=f"{count} scenarios, 0 mismatches: {passed}")


def verify_appendix_b(mc_draws: int = 1_000_000, rho: float = 0.9,
                      entropy_tol: float = 0.02, lam: float = 10.0,
                      cesaro_sizes=(16, 64, 256), cesaro_seeds: int = 20,
                      master_seed: int = 0xAB) -> VerifyReport:
    """Gaussian-field checks: the pair-mismatch closed form against Monte
    Carlo, the conditional-entropy bound against a plug-in estimate, its
    monotonicity in the correlation, and the densification (entropy rate
    non-increasing in deployment size)."""
    rows = []
    passed = True
    rng = np.random.Generator(np.random.PCG64(derive_seed(master_seed, 1)))
    z1 = rng.standard_normal(mc_draws)
    z2 = rho * z1 + math.sqrt(1.0 - rho * rho) * rng.standard_normal(mc_draws)
    mismatch = (z1 < 0) != (z2 < 0)
    p_hat = float(mismatch.mean())
    p_true = 2.0 * epsilon_rho(rho)
    sigma = math.sqrt(p_true * (1.0 - p_true) / mc_draws)
    ok = abs(p_hat - p_true) <= 3.0 * sigma
    passed &= ok
    rows.append(["epsilon_mc", rho, p_true / 2.0, p_hat / 2.0,
                 abs(p_hat - p_true) / sigma, int(ok)])

    b1 = (z1 >= 0).astype(np.int64)
    b2 = (z2 >= 0).astype(np.int64)
    counts = np.bincount(b1 * 2 + b2, minlength=4).astype(np.float64)
    joint = counts / counts.sum()
    h_cond = entropy_bits(joint) - entropy_bits(joint.reshape(2, 2).sum(axis=1))
    h_true = conditional_entropy_bound(rho)
    ok = abs(h_cond - h_true) <= entropy_tol
    passed &= ok
    rows.append(["cond_entropy", rho, h_true, h_cond, abs(h_cond - h_true), int(ok)])

    grid = [round(0.1 * k, 1) for k in range(10)] + [0.99]
    vals = [conditional_entropy_bound(r) for r in grid]
    ok = all(vals[i] > vals[i + 1] for i in range(len(vals) - 1))
    passed &= ok
    rows.append(["monotone_grid", 0.0, vals[0], vals[-1], len(grid), int(ok)])

    means = []
    for n in cesaro_sizes:
        ests = []
        for s in range(cesaro_seeds):
            src = GaussianFieldSource(lam, n, position_seed=derive_seed(master_seed, 2, s, n))
            rep = src.entropy_rate(seed=derive_seed(master_seed, 3, s, n))
            ests.append(rep.rate_theta)
        means.append(float(np.mean(ests)))
    ok = all(means[i] >= means[i + 1] for i in range(len(means) - 1))
    passed &= ok
    rows.append(["cesaro", lam, means[0], means[-1],
                 " ".join(f"{v:.4f}" for v in means), int(ok)])

    header = ["check", "param", "expected", "observed", "detail", "ok"]
    return VerifyReport(suite="appendixB", passed=passed, header=header, rows=rows,
                        summary=f"all Appendix-B checks passed: {passed}")


def overlap_diagnostic(source, channel: SensingChannel, n: int, eps: float,
                       n_pairs: int = 200, seed: int = 0) -> float:
    """Empirical probability that a sensed output of one typical vector is
    conditionally typical for a different typical vector.

    Small values support the disjointness condition that makes the
    sensing-noise achievability argument work; there is no exact verifier
    for general sources.
    """
    marginal = source.marginal()
    h_cond = channel.conditional_entropy(marginal)
    rate = source.entropy_rate().rate_theta
    hits = 0
    done = 0
    attempt = 0
    while done < n_pairs and attempt < 50 * n_pairs:
        s1 = derive_seed(seed, attempt, 1)
        s2 = derive_seed(seed, attempt, 2)
        attempt += 1
        theta = source.sample(n, s1)
        phi = source.sample(n, s2)
        if np.array_equal(theta, phi):
            continue
        if abs(-source.log_prob(theta) / n - rate) > eps:
            continue
        if abs(-source.log_prob(phi) / n - rate) > eps:
            continue
        x = channel.apply(theta, derive_seed(seed, attempt, 3))
        lp = float(channel.log_table[phi, x].sum())
        if abs(-lp / n - h_cond) <= eps:
            hits += 1
        done += 1
    if done == 0:
        raise RuntimeError("no typical pairs found; increase eps or n")
    return hits / done
