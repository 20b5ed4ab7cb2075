"""Source models: iid, stationary Markov, and a quantized Gaussian field.

Each source samples length-n realizations over GF(q) from an explicit seed
(sampling is a pure function of (spec, n, seed)) and reports its entropy
rate, exactly where a closed form exists and by a plug-in estimate for the
Gaussian-field construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entropy import entropy_bits, h2, log2_pmf
from .gf import digits_to_index, index_to_digits
from .seeding import derive_seed

PMF_TOL = 1e-12
STATIONARY_TOL = 1e-12
STATIONARY_CAP = 100_000
MAX_EXACT_STATES = 4096


class SourceError(ValueError):
    pass


class NonErgodicError(SourceError):
    """Power iteration on the state chain failed to converge."""


@dataclass
class EntropyReport:
    """Entropy rate of a source in bits/symbol."""

    rate_theta: float
    method: str  # "exact" | "estimated"
    estimator_params: dict | None = None
    ci_halfwidth: float | None = None


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _validate_pmf(pmf, length, what):
    p = np.asarray(pmf, dtype=np.float64)
    if p.shape != (length,):
        raise SourceError(f"{what} must have length {length}, got shape {p.shape}")
    if p.min() < 0 or abs(p.sum() - 1.0) > PMF_TOL:
        raise SourceError(f"{what} must be a probability vector (sum within {PMF_TOL})")
    return p


def sample_pmf(pmf, n, seed) -> np.ndarray:
    """n iid draws by inverse CDF over symbols 0..q-1 (in that order)."""
    cdf = np.cumsum(np.asarray(pmf, dtype=np.float64))
    u = _rng(seed).random(n)
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1).astype(np.int64)


class SiSource:
    """Memoryless source: iid symbols with a fixed pmf over GF(q).

    The sparsity-inducing case of the theory has pmf[0] > 0.5; any valid
    pmf is accepted here since the bound and figure grids sweep entropy
    rates all the way up to the uniform source.
    """

    model = "si"

    def __init__(self, q: int, pmf):
        self.q = int(q)
        self.pmf = _validate_pmf(pmf, self.q, "pmf")
        self._log_pmf = log2_pmf(self.pmf)

    @property
    def is_sparsity_inducing(self) -> bool:
        return self.pmf[0] > 0.5

    def sample(self, n: int, seed: int) -> np.ndarray:
        if n < 1:
            raise SourceError("sample length must be >= 1")
        return sample_pmf(self.pmf, n, seed)

    def entropy_rate(self) -> EntropyReport:
        return EntropyReport(rate_theta=entropy_bits(self.pmf), method="exact")

    def marginal(self) -> np.ndarray:
        return self.pmf.copy()

    def log_prob(self, vec) -> float:
        return float(self.log_prob_batch(np.asarray(vec, dtype=np.int64)[None, :])[0])

    def log_prob_batch(self, mat) -> np.ndarray:
        return self._log_pmf[np.asarray(mat, dtype=np.int64)].sum(axis=1)


class StmSource:
    """Stationary Markov source of order r over GF(q).

    States are the r-grams (theta_1..theta_r) encoded base-q with the
    earliest symbol as the most significant digit.  `kernel` is the
    (q^r, q) row-stochastic table of next-symbol probabilities; `initial`
    defaults to the stationary distribution of the induced state chain.
    """

    model = "stm"

    def __init__(self, q: int, kernel, order: int = 1, initial=None):
        self.q = int(q)
        self.order = int(order)
        if self.order < 1:
            raise SourceError("Markov order must be >= 1")
        n_states = self.q ** self.order
        kernel = np.asarray(kernel, dtype=np.float64)
        if kernel.shape != (n_states, self.q):
            raise SourceError(f"kernel must be ({n_states}, {self.q}), got {kernel.shape}")
        if kernel.min() < 0 or np.abs(kernel.sum(axis=1) - 1.0).max() > PMF_TOL:
            raise SourceError("kernel rows must each sum to 1")
        self.kernel = kernel
        self.n_states = n_states
        self._log_kernel = log2_pmf(kernel)
        if initial is None:
            if n_states > MAX_EXACT_STATES:
                raise SourceError(
                    f"state space {n_states} exceeds the exact-rate cap {MAX_EXACT_STATES}; "
                    "supply an explicit initial distribution"
                )
            self.initial = self.stationary_state_dist()
            self.stationary = True
        else:
            self.initial = _validate_pmf(initial, n_states, "initial")
            if n_states <= MAX_EXACT_STATES:
                resid = np.abs(self._step(self.initial) - self.initial).max()
                self.stationary = resid <= 1e-9
            else:
                self.stationary = False
        self._log_initial = log2_pmf(self.initial)

    def _step(self, pi: np.ndarray) -> np.ndarray:
        """One application of the state chain: pi'(s') = sum_s pi(s) kernel[s, a]."""
        contrib = pi[:, None] * self.kernel
        states = np.arange(self.n_states, dtype=np.int64)
        targets = (states[:, None] * self.q + np.arange(self.q)) % self.n_states
        out = np.zeros(self.n_states)
        np.add.at(out, targets.ravel(), contrib.ravel())
        return out

    def stationary_state_dist(self) -> np.ndarray:
        pi = np.full(self.n_states, 1.0 / self.n_states)
        for _ in range(STATIONARY_CAP):
            nxt = self._step(pi)
            if np.abs(nxt - pi).max() <= STATIONARY_TOL:
                return nxt
            pi = nxt
        raise NonErgodicError(
            f"state chain did not converge within {STATIONARY_CAP} iterations"
        )

    def sample(self, n: int, seed: int) -> np.ndarray:
        if n < self.order:
            raise SourceError(f"sample length must be >= order ({self.order})")
        rng = _rng(seed)
        out = np.empty(n, dtype=np.int64)
        init_cdf = np.cumsum(self.initial)
        s = int(min(np.searchsorted(init_cdf, rng.random(), side="right"), self.n_states - 1))
        out[: self.order] = index_to_digits(np.array([s]), self.q, self.order)[0]
        cdf = np.cumsum(self.kernel, axis=1)
        u = rng.random(n - self.order)
        mod = self.n_states
        for t in range(self.order, n):
            row = cdf[s]
            a = int(min(np.searchsorted(row, u[t - self.order], side="right"), self.q - 1))
            out[t] = a
            s = (s * self.q + a) % mod
        return out

    def entropy_rate(self) -> EntropyReport:
        if self.n_states > MAX_EXACT_STATES:
            raise SourceError(
                f"state space {self.n_states} exceeds the exact-rate cap; estimate instead"
            )
        pi = self.stationary_state_dist()
        rate = float(sum(pi[s] * entropy_bits(self.kernel[s]) for s in range(self.n_states)))
        return EntropyReport(rate_theta=rate, method="exact")

    def marginal(self) -> np.ndarray:
        """Stationary single-symbol distribution (marginal of the last state digit)."""
        pi = self.stationary_state_dist()
        out = np.zeros(self.q)
        states = np.arange(self.n_states, dtype=np.int64)
        np.add.at(out, states % self.q, pi)
        return out

    def _state_codes(self, x: np.ndarray) -> np.ndarray:
        """Rolling r-gram codes of a 1-D symbol array."""
        n, r = x.size, self.order
        codes = np.zeros(n - r + 1, dtype=np.int64)
        for j in range(r):
            codes = codes * self.q + x[j : n - r + 1 + j]
        return codes

    def log_prob(self, vec) -> float:
        x = np.asarray(vec, dtype=np.int64)
        if x.size <= 64:  # match the batched accumulation exactly
            return float(self.log_prob_batch(x[None, :])[0])
        codes = self._state_codes(x)
        lp = self._log_initial[codes[0]]
        return float(lp + self._log_kernel[codes[:-1], x[self.order :]].sum())

    def log_prob_batch(self, mat) -> np.ndarray:
        X = np.asarray(mat, dtype=np.int64)
        s = digits_to_index(X[:, : self.order], self.q)
        lp = self._log_initial[s]
        mod = self.n_states
        for t in range(self.order, X.shape[1]):
            lp = lp + self._log_kernel[s, X[:, t]]
            s = (s * self.q + X[:, t]) % mod
        return lp


def disk_positions(n: int, seed: int) -> np.ndarray:
    """n points uniform on the unit disk (radius = sqrt(U) in polar form)."""
    rng = _rng(seed)
    r = np.sqrt(rng.random(n))
    phi = 2.0 * np.pi * rng.random(n)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def _nearest_neighbor_order(pos: np.ndarray) -> np.ndarray:
    """Greedy nearest-neighbour chain starting at the point closest to the origin.

    Consecutive indices end up spatially close, so finite-context entropy
    estimators on the index sequence can see the densification effect that
    drives the rate of the field down as n grows.
    """
    n = pos.shape[0]
    d2 = ((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=2)
    order = np.empty(n, dtype=np.int64)
    visited = np.zeros(n, dtype=bool)
    cur = int(np.argmin((pos**2).sum(axis=1)))
    for i in range(n):
        order[i] = cur
        visited[cur] = True
        if i + 1 < n:
            cand = np.where(visited, np.inf, d2[cur])
            cur = int(np.argmin(cand))
    return order


class GaussianFieldSource:
    """Binary source from a correlated Gaussian field on the unit disk.

    Sensor i holds a zero-mean unit-variance Gaussian with covariance
    exp(-lambda * d_ij^2); the symbol is the sign bit (0 for negative).
    The marginal of every symbol is Bernoulli(1/2) by symmetry, while the
    entropy *rate* falls toward zero as the deployment gets denser.
    """

    model = "gse"
    q = 2

    def __init__(self, lam: float, n_sensors: int, jitter: float = 1e-10,
                 positions=None, position_seed: int = 0):
        if lam <= 0:
            raise SourceError("correlation decay constant must be > 0")
        self.lam = float(lam)
        self.n_sensors = int(n_sensors)
        self.jitter = float(jitter)
        self.position_seed = int(position_seed)
        if positions is None:
            pos = disk_positions(self.n_sensors, derive_seed(self.position_seed, 0x705))
        else:
            pos = np.asarray(positions, dtype=np.float64)
            if pos.shape != (self.n_sensors, 2):
                raise SourceError(f"positions must be ({self.n_sensors}, 2)")
        self.positions = pos[_nearest_neighbor_order(pos)]
        d2 = ((self.positions[:, None, :] - self.positions[None, :, :]) ** 2).sum(axis=2)
        self.covariance = np.exp(-self.lam * d2)
        self._chol, self.jitter_used = self._factor()

    def _factor(self):
        jit = self.jitter
        while jit <= 1e-6:
            try:
                L = np.linalg.cholesky(self.covariance + jit * np.eye(self.n_sensors))
                return L, jit
            except np.linalg.LinAlgError:
                jit *= 10.0
        raise SourceError(
            f"covariance not positive definite even with jitter {jit / 10.0:g}"
        )

    def sample(self, n: int | None = None, seed: int = 0) -> np.ndarray:
        if n is not None and n != self.n_sensors:
            raise SourceError(
                f"sample length {n} != n_sensors {self.n_sensors}; "
                "build a source with the desired deployment size"
            )
        omega = self._chol @ _rng(seed).standard_normal(self.n_sensors)
        return (omega >= 0).astype(np.int64)

    def marginal(self) -> np.ndarray:
        """Each symbol is Bernoulli(1/2) by the sign symmetry of the field."""
        return np.array([0.5, 0.5])

    def entropy_rate(self, context_len: int = 4, min_transitions: int = 100_000,
                     seed: int = 0) -> EntropyReport:
        """Plug-in conditional entropy H(next | previous context_len symbols).

        Pools transition counts over independent field realizations (fixed
        positions, fresh Gaussian draws).  Consistent for the finite-context
        approximation only; the residual context bias is not corrected.
        """
        L = int(context_len)
        if L < 1 or L >= self.n_sensors:
            raise SourceError("context length must be in [1, n_sensors)")
        per_real = self.n_sensors - L
        n_real = max(1, math.ceil(min_transitions / per_real))
        n_blocks = min(10, n_real)
        block_sizes = [n_real // n_blocks + (1 if b < n_real % n_blocks else 0)
                       for b in range(n_blocks)]
        counts = np.zeros(2 ** (L + 1), dtype=np.int64)
        block_rates = []
        r = 0
        for bs in block_sizes:
            block = np.zeros(2 ** (L + 1), dtype=np.int64)
            for _ in range(bs):
                x = self.sample(seed=derive_seed(seed, 0x65, r))
                block += transition_counts(x, L, 2)
                r += 1
            counts += block
            block_rates.append(conditional_entropy_from_counts(block, 2))
        rate = conditional_entropy_from_counts(counts, 2)
        ci = None
        if n_blocks > 1:
            ci = 1.96 * float(np.std(block_rates, ddof=1)) / math.sqrt(n_blocks)
        return EntropyReport(
            rate_theta=rate,
            method="estimated",
            estimator_params={"context_len": L, "realizations": n_real,
                              "transitions": n_real * per_real},
            ci_halfwidth=ci,
        )


def transition_counts(x: np.ndarray, context_len: int, q: int) -> np.ndarray:
    """Counts of (context, next) pairs, flattened to length q^(context_len+1)."""
    x = np.asarray(x, dtype=np.int64)
    n, L = x.size, context_len
    codes = np.zeros(n - L, dtype=np.int64)
    for j in range(L):
        codes = codes * q + x[j : n - L + j]
    joint = codes * q + x[L:]
    return np.bincount(joint, minlength=q ** (L + 1))


def conditional_entropy_from_counts(joint_counts: np.ndarray, q: int) -> float:
    """Plug-in H(next | context) = H(context, next) - H(context)."""
    total = joint_counts.sum()
    if total == 0:
        return 0.0
    joint = joint_counts / total
    ctx = joint.reshape(-1, q).sum(axis=1)
    return entropy_bits(joint) - entropy_bits(ctx)


def epsilon_rho(rho: float) -> float:
    """Mismatch probability of a quantized equicorrelated Gaussian pair.

    Pr(sign difference) = 2 * epsilon_rho(rho) for correlation rho.
    """
    if not 0.0 <= rho < 1.0:
        raise SourceError(f"correlation must lie in [0, 1), got {rho}")
    return 0.25 - math.atan(rho / math.sqrt(1.0 - rho * rho)) / (2.0 * math.pi)


def conditional_entropy_bound(rho: float) -> float:
    """H(sign bit | neighbouring sign bit) at correlation rho, in bits."""
    return h2(2.0 * epsilon_rho(rho))
