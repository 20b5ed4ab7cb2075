"""Closed-form theory layer: collision probabilities, error-probability
upper bounds, necessary/sufficient compression-ratio thresholds, the
sparsity lower bound, and the error exponent for the communication-noise
regime.

Thresholds are reported in their asymptotic form (all proof-slack
constants at zero); the finite-slack variants accept explicit eps/xi.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .entropy import entropy_bits, h2, kl_bits

REGIMES = ("WN", "NC", "NS", "NCS")


class BoundError(ValueError):
    pass


class InfeasibleError(BoundError):
    """Preconditions of a bound are violated (e.g. gamma too small)."""


@dataclass
class FParams:
    """Arguments of the syndrome collision probability.

    d1: Hamming weight of the candidate difference vector (1..N);
    d2: Hamming weight of the syndrome (0..M); m: number of measurements.
    """

    d1: int
    d2: int
    gamma: float
    q: int
    m: int

    def __post_init__(self):
        if self.d1 < 1:
            raise BoundError("d1 must be >= 1")
        if not 0 <= self.d2 <= self.m:
            raise BoundError("d2 must lie in [0, m]")
        if not 0.0 < self.gamma <= 1.0 - 1.0 / self.q + 1e-15:
            raise BoundError("gamma must satisfy 0 < gamma <= 1 - 1/q")
        if self.q < 2:
            raise BoundError("q must be >= 2")


def f_collision(p: FParams) -> float:
    """Pr{A mu = s} for an iid sparse matrix, a weight-d1 mu, a weight-d2 s.

    Equals q^-m for the dense uniform matrix (gamma = 1 - 1/q); otherwise
    non-increasing in d2 at fixed d1, and non-increasing in d1 at d2 = 0.
    """
    qinv = 1.0 / p.q
    beta = (1.0 - p.gamma / (1.0 - qinv)) ** p.d1
    zero_row = qinv + beta * (1.0 - qinv)   # Pr{<row, mu> = 0}
    nonzero_row = qinv - beta * qinv        # Pr{<row, mu> = given nonzero symbol}
    return zero_row ** (p.m - p.d2) * nonzero_row**p.d2


@dataclass
class BoundInputs:
    """Entropy-side inputs of the threshold formulas (all in bits)."""

    rate_theta: float
    h_u: float
    q: int
    regime: str
    rate_joint: float | None = None
    rate_x: float | None = None
    gamma: float | None = None

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise BoundError(f"regime must be one of {REGIMES}")
        if self.rate_joint is None:
            self.rate_joint = self.rate_theta
        log2q = math.log2(self.q)
        if not 0.0 <= self.rate_theta <= self.rate_joint + 1e-12:
            raise BoundError("need 0 <= rate_theta <= rate_joint")
        if self.rate_joint > log2q + self.rate_theta + 1e-12:
            raise BoundError("rate_joint cannot exceed log2(q) + rate_theta")
        if not 0.0 <= self.h_u <= log2q + 1e-12:
            raise BoundError("need 0 <= H(p_u) <= log2(q)")

    @property
    def log2q(self) -> float:
        return math.log2(self.q)


def nc_exponents(inputs: BoundInputs, n: int, m: int, alpha: float, eps: float = 0.0):
    """Exponents (E1, E2) of the two terms of the no-sensing-noise bound."""
    if not 0.0 < alpha < 0.5:
        raise BoundError("alpha must lie in (0, 0.5)")
    if inputs.gamma is None:
        raise BoundError("gamma is required for the upper bound")
    ratio = m / n
    q, gamma = inputs.q, inputs.gamma
    e1 = (
        -ratio * (inputs.h_u + math.log2(1.0 - gamma) + eps)
        - h2(alpha)
        - alpha * math.log2(q - 1)
        - math.log2(alpha * n) / n
    )
    beta = (1.0 - gamma / (1.0 - 1.0 / q)) ** math.ceil(alpha * n)
    e2 = (
        -inputs.rate_theta
        - ratio * (inputs.h_u + math.log2(1.0 / q + beta * (1.0 - 1.0 / q)) + eps)
        - eps
    )
    return e1, e2


def upper_bound_nc(inputs: BoundInputs, n: int, m: int, alpha: float, eps: float = 0.0):
    """(P1, P2) of the WN/NC error-probability bound P_e <= P1 + P2 + 2 eps."""
    e1, e2 = nc_exponents(inputs, n, m, alpha, eps)
    def _exp2(x):
        return float("inf") if x > 1023 else float(2.0**x)
    return _exp2(-n * e1), _exp2(-n * e2)


def select_alpha(inputs: BoundInputs, n: int, eps: float = 0.0, xi: float = 0.0,
                 tol: float = 1e-10) -> float:
    """Largest alpha in (0, 0.5) keeping the sparse-term ratio constraint
    below the entropy-term ratio constraint at block length n.

    The left side grows monotonically in alpha and drops to -inf as
    alpha -> 0, so bisection always lands on the boundary when one exists.
    """
    if inputs.regime not in ("WN", "NC"):
        raise BoundError("alpha selection applies to the no-sensing-noise regimes")
    if inputs.gamma is None:
        raise BoundError("gamma is required to select alpha")
    d1 = math.log2(1.0 / (1.0 - inputs.gamma)) - inputs.h_u - eps
    if d1 <= 0.0:
        raise InfeasibleError(
            f"gamma={inputs.gamma} too small: log2(1/(1-gamma)) must exceed H(p_u)={inputs.h_u}"
        )
    denom = inputs.log2q - inputs.h_u - xi
    if denom <= 0.0:
        raise InfeasibleError("communication noise entropy reaches log2(q)")
    target = d1 * (inputs.rate_theta + eps) / denom

    def g(a: float) -> float:
        return h2(a) + a * math.log2(inputs.q - 1) + math.log2(a * n) / n

    hi = 0.5 - 1e-12
    if g(hi) <= target:
        return hi
    lo = 0.25
    while g(lo) > target:
        lo /= 2.0
        if lo < 1e-300:
            raise InfeasibleError("no feasible alpha found")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) <= target:
            lo = mid
        else:
            hi = mid
    return lo


def necessary_ratio(inputs: BoundInputs) -> float | None:
    """Asymptotic necessary M/N threshold, or None when no finite ratio helps.

    None cases: uniformly distributed communication noise (NC/NCS), or a
    degenerate measurement process (rate_x = 0), where the ratio constraint
    disappears entirely.
    """
    log2q = inputs.log2q
    if inputs.rate_x is not None and inputs.rate_x == 0.0:
        return None
    if inputs.regime == "WN":
        return inputs.rate_theta / log2q
    if inputs.regime == "NC":
        if log2q - inputs.h_u <= 0.0:
            return None
        return inputs.rate_theta / (log2q - inputs.h_u)
    if inputs.regime == "NS":
        return inputs.rate_joint / log2q
    if log2q - inputs.h_u <= 0.0:
        return None
    return inputs.rate_joint / (log2q - inputs.h_u)


def sufficient_ratio(inputs: BoundInputs):
    """Asymptotic sufficient M/N threshold with the sparsity lower bound.

    Returns (ratio, gamma_min) or None when the regime's feasibility
    conditions fail (uniform noise, or joint rate above log2 q in the
    sensing-noise regimes).
    """
    log2q = inputs.log2q
    if inputs.regime in ("NC", "NCS") and log2q - inputs.h_u <= 0.0:
        return None
    if inputs.regime in ("NS", "NCS") and inputs.rate_joint > log2q + 1e-12:
        return None
    if inputs.regime == "WN":
        return inputs.rate_theta / log2q, 0.0
    if inputs.regime == "NC":
        return inputs.rate_theta / (log2q - inputs.h_u), 1.0 - 2.0 ** (-inputs.h_u)
    if inputs.regime == "NS":
        return inputs.rate_joint / log2q, 0.0
    return inputs.rate_joint / (log2q - inputs.h_u), 1.0 - 2.0 ** (-inputs.h_u)


@dataclass
class BoundReport:
    """All threshold quantities for one configuration."""

    regime: str
    rate_theta: float
    rate_joint: float
    h_u: float
    log2_q: float
    necessary_ratio: float | None
    sufficient_ratio: float | None
    gamma_min: float | None
    gamma_ok: bool | None
    alpha_star: float | None
    alpha_at_boundary: bool | None
    feasible_noise: bool
    feasible_joint: bool
    deterministic_given_x: bool | None
    exponent: float | None = None


def bound_report(inputs: BoundInputs, n: int | None = None,
                 p_theta=None, p_u=None, ratio: float | None = None) -> BoundReport:
    """Assemble every threshold quantity for one configuration.

    alpha selection needs a block length n; the error exponent additionally
    needs the explicit pmfs and a target ratio (WN/NC with q <= 4 only).
    """
    nec = necessary_ratio(inputs)
    suff = sufficient_ratio(inputs)
    s_ratio, gamma_min = (suff if suff is not None else (None, None))
    gamma_ok = None
    if gamma_min is not None and inputs.gamma is not None:
        gamma_ok = inputs.gamma > gamma_min
    alpha_star = None
    alpha_boundary = None
    if n is not None and inputs.regime in ("WN", "NC") and inputs.gamma is not None:
        try:
            alpha_star = select_alpha(inputs, n)
            alpha_boundary = alpha_star < 1e-3 or alpha_star > 0.5 - 1e-9
        except InfeasibleError:
            alpha_star = None
    exponent = None
    if p_theta is not None and p_u is not None and ratio is not None \
            and inputs.regime in ("WN", "NC") and inputs.q <= 4:
        exponent = error_exponent_nc(p_theta, p_u, inputs.q, ratio)
    det_flag = None
    if inputs.rate_x is not None:
        det_flag = abs(inputs.rate_joint - inputs.rate_x) <= 1e-9
    return BoundReport(
        regime=inputs.regime,
        rate_theta=inputs.rate_theta,
        rate_joint=inputs.rate_joint,
        h_u=inputs.h_u,
        log2_q=inputs.log2q,
        necessary_ratio=nec,
        sufficient_ratio=s_ratio,
        gamma_min=gamma_min,
        gamma_ok=gamma_ok,
        alpha_star=alpha_star,
        alpha_at_boundary=alpha_boundary,
        feasible_noise=inputs.h_u < inputs.log2q,
        feasible_joint=inputs.rate_joint <= inputs.log2q + 1e-12,
        deterministic_given_x=det_flag,
        exponent=exponent,
    )


# -- error exponent ---------------------------------------------------------

_GRID_CACHE: dict[tuple[int, float], np.ndarray] = {}


def _simplex_grid(q: int, step: float) -> np.ndarray:
    key = (q, step)
    if key not in _GRID_CACHE:
        k = round(1.0 / step)
        rows = [np.array(c, dtype=np.float64) / k
                for c in itertools.product(range(k + 1), repeat=q - 1)
                if sum(c) <= k]
        grid = np.array([np.concatenate([[1.0 - r.sum()], r]) for r in rows])
        _GRID_CACHE[key] = grid
    return _GRID_CACHE[key]


def _e0_objective(p, qv, p_theta, p_u, log2q, ratio):
    slack = ratio * log2q - entropy_bits(p) - ratio * entropy_bits(qv)
    return kl_bits(p, p_theta) + ratio * kl_bits(qv, p_u) + max(0.0, slack)


def error_exponent_nc(p_theta, p_u, q: int, ratio: float,
                      coarse: float = 0.02, refine_step: float = 1e-4) -> float:
    """Error exponent of the communication-noise regime at compression ratio M/N.

    Minimizes D(p||p_theta) + (M/N) D(q||p_u) + |(M/N) log2 Q - H(p) - (M/N) H(q)|+
    over the two probability simplices by block-coordinate grid descent
    followed by a pattern search down to `refine_step`.  Zero exactly when
    the ratio is at or below the achievable threshold.
    """
    if q > 4:
        raise BoundError("exponent minimization supports q <= 4 only")
    if ratio <= 0:
        raise BoundError("ratio must be > 0")
    p_theta = np.asarray(p_theta, dtype=np.float64)
    p_u = np.asarray(p_u, dtype=np.float64)
    log2q = math.log2(q)

    grid = _simplex_grid(q, coarse)
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.where(grid > 0, np.log2(np.where(grid > 0, grid, 1.0)), 0.0)
    grid_H = -(grid * lg).sum(axis=1)
    def _grid_kl(target):
        ok = np.all((grid <= 0) | (target[None, :] > 0), axis=1)
        ratio_term = np.where((grid > 0) & (target[None, :] > 0),
                              grid * (lg - np.log2(np.where(target[None, :] > 0,
                                                            target[None, :], 1.0))), 0.0)
        kl = ratio_term.sum(axis=1)
        return np.where(ok, kl, np.inf)
    kl_theta = _grid_kl(p_theta)
    kl_u = _grid_kl(p_u)

    def _block_descent(p, qv):
        best = _e0_objective(p, qv, p_theta, p_u, log2q, ratio)
        for _ in range(100):
            c = ratio * log2q - ratio * entropy_bits(qv)
            obj_p = kl_theta + ratio * kl_bits(qv, p_u) + np.maximum(0.0, c - grid_H)
            i = int(np.argmin(obj_p))
            if obj_p[i] < best - 1e-15:
                best, p = float(obj_p[i]), grid[i]
            c2 = ratio * log2q - entropy_bits(p)
            obj_q = kl_bits(p, p_theta) + ratio * kl_u + np.maximum(0.0, c2 - ratio * grid_H)
            j = int(np.argmin(obj_q))
            if obj_q[j] < best - 1e-15:
                best, qv = float(obj_q[j]), grid[j]
            else:
                break
        return best, p, qv

    candidates = [(p_theta.copy(), p_u.copy()), (np.full(q, 1.0 / q), np.full(q, 1.0 / q))]
    best, bp, bq = math.inf, None, None
    for p0, q0 in candidates:
        val, p, qv = _block_descent(p0, q0)
        if val < best:
            best, bp, bq = val, p, qv

    # pattern search over sum-preserving moves e_i - e_j in either block
    moves = [(i, j) for i in range(q) for j in range(q) if i != j]
    step = coarse
    rounds = 0
    while step > refine_step and rounds < 10_000:
        improved = False
        for block in (0, 1):
            base = bp if block == 0 else bq
            for i, j in moves:
                if base[j] < step:
                    continue
                cand = base.copy()
                cand[i] += step
                cand[j] -= step
                val = (_e0_objective(cand, bq, p_theta, p_u, log2q, ratio) if block == 0
                       else _e0_objective(bp, cand, p_theta, p_u, log2q, ratio))
                if val < best - 1e-15:
                    best = val
                    if block == 0:
                        bp = cand
                    else:
                        bq = cand
                    improved = True
        if not improved:
            step /= 2.0
        rounds += 1
    if rounds >= 10_000:
        warnings.warn("exponent refinement hit its iteration cap; returning best value found")
    return max(best, 0.0)


# -- entropy wiring and figure data ------------------------------------------


def worst_case_noise_entropy(q: int, p_nonzero: float) -> float:
    """Entropy of the maximum-entropy noise pmf with the given Pr(u != 0)."""
    return h2(p_nonzero) + p_nonzero * math.log2(q - 1)


def joint_entropy_rate(source, channel) -> float:
    """H(theta, x) per symbol for a memoryless sensing channel.

    Chain rule with a per-symbol conditional term: the sensing noise acts
    independently per coordinate, so H(x | theta) is the stationary-marginal
    average of the channel row entropies.
    """
    rate = source.entropy_rate().rate_theta
    return rate + channel.conditional_entropy(source.marginal())


FIG2_DEFAULT_Q = (2, 4, 16, 256)
FIG3_CROSSOVERS = (0.01, 0.05, 0.1, 0.2)
FIG4_SENSING = (0.0, 0.01, 0.05, 0.1)
FIG4_COMM_P = 0.1


def figure_curves(kind: str, grid=None, q_list=None):
    """Tabulate the threshold figures as (header, rows).

    fig2: sparsity lower bound vs Pr(u != 0), one column per field size.
    fig3: optimum compression ratio vs normalized entropy rate, per
          (field size, crossover probability), plus the noiseless line.
    fig4: same x-axis with sensing noise at fixed Pr(u != 0) = 0.1, one
          column per (field size, sensing error level).
    Noise pmfs are the worst-case ones (nonzero mass spread uniformly);
    sensing channels are symmetric.
    """
    q_list = list(q_list) if q_list is not None else list(FIG2_DEFAULT_Q)
    if kind == "fig2":
        if grid is None:
            grid = sorted(set(np.logspace(-5, -1, 41)) | {5e-4})
        header = ["p_err"] + [f"gamma_min_q{q}" for q in q_list]
        rows = []
        for p in grid:
            row = [float(p)]
            for q in q_list:
                row.append(1.0 - 2.0 ** (-worst_case_noise_entropy(q, p)))
            rows.append(row)
        return header, rows
    if kind == "fig3":
        if grid is None:
            grid = np.linspace(0.0, 1.0, 101)
        header = ["entropy_ratio", "noiseless"]
        combos = [(q, pe) for q in q_list for pe in FIG3_CROSSOVERS]
        header += [f"ratio_q{q}_pe{pe:g}" for q, pe in combos]
        rows = []
        for x in grid:
            row = [float(x), float(x)]
            for q, pe in combos:
                log2q = math.log2(q)
                row.append(x * log2q / (log2q - worst_case_noise_entropy(q, pe)))
            rows.append(row)
        return header, rows
    if kind == "fig4":
        if grid is None:
            grid = np.linspace(0.0, 1.0, 101)
        combos = [(q, s) for q in q_list for s in FIG4_SENSING]
        header = ["entropy_ratio"] + [f"ratio_q{q}_ps{s:g}" for q, s in combos]
        rows = []
        for x in grid:
            row = [float(x)]
            for q, s in combos:
                log2q = math.log2(q)
                h_sense = h2(s) + s * math.log2(q - 1)
                denom = log2q - worst_case_noise_entropy(q, FIG4_COMM_P)
                row.append((x * log2q + h_sense) / denom)
            rows.append(row)
        return header, rows
    raise BoundError(f"unknown figure kind {kind!r}")
