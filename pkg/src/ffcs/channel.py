"""Sensing noise, communication noise, and the sparse random matrix law.

The four noise regimes are compositions, not separate code paths: an
identity sensing channel and a point-mass-at-zero communication noise
recover the noiseless cases.
"""

from __future__ import annotations

import numpy as np

from .entropy import entropy_bits, log2_pmf
from .gf import GF, FieldError

PMF_TOL = 1e-12


class ChannelError(ValueError):
    pass


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


class SensingChannel:
    """Per-symbol measurement noise: row theta of `table` is p(x | theta)."""

    def __init__(self, q: int, table):
        self.q = int(q)
        t = np.asarray(table, dtype=np.float64)
        if t.shape != (self.q, self.q):
            raise ChannelError(f"transition table must be ({self.q}, {self.q})")
        if t.min() < 0 or np.abs(t.sum(axis=1) - 1.0).max() > PMF_TOL:
            raise ChannelError("transition table rows must each sum to 1")
        self.table = t
        self._cdf = np.cumsum(t, axis=1)
        self.log_table = log2_pmf(t)

    @classmethod
    def symmetric(cls, q: int, flip_prob: float) -> "SensingChannel":
        """Pr(x != theta) = flip_prob, spread uniformly over the other symbols."""
        if not 0.0 <= flip_prob <= 1.0:
            raise ChannelError("flip probability must be in [0, 1]")
        t = np.full((q, q), flip_prob / (q - 1) if q > 1 else 0.0)
        np.fill_diagonal(t, 1.0 - flip_prob)
        return cls(q, t)

    @classmethod
    def identity(cls, q: int) -> "SensingChannel":
        return cls.symmetric(q, 0.0)

    @property
    def is_identity(self) -> bool:
        return bool(np.array_equal(self.table, np.eye(self.q)))

    def apply(self, theta, seed: int) -> np.ndarray:
        """Draw x_n independently from row theta_n; inverse CDF per symbol."""
        theta = np.asarray(theta, dtype=np.int64)
        if theta.size and (theta.min() < 0 or theta.max() >= self.q):
            raise ChannelError(f"symbols out of range for GF({self.q})")
        u = _rng(seed).random(theta.size)
        rows = self._cdf[theta]
        x = (rows <= u[:, None]).sum(axis=1)
        return np.minimum(x, self.q - 1).astype(np.int64)

    def conditional_entropy(self, marginal) -> float:
        """H(x | theta) in bits under the given symbol marginal."""
        pi = np.asarray(marginal, dtype=np.float64)
        return float(sum(pi[s] * entropy_bits(self.table[s]) for s in range(self.q)))

    def output_marginal(self, marginal) -> np.ndarray:
        return np.asarray(marginal, dtype=np.float64) @ self.table


def apply_sensing(channel: SensingChannel, theta, seed: int) -> np.ndarray:
    return channel.apply(theta, seed)


class CommNoise:
    """iid additive noise on the measurements, one pmf over GF(q)."""

    def __init__(self, q: int, pmf):
        self.q = int(q)
        p = np.asarray(pmf, dtype=np.float64)
        if p.shape != (self.q,):
            raise ChannelError(f"noise pmf must have length {self.q}")
        if p.min() < 0 or abs(p.sum() - 1.0) > PMF_TOL:
            raise ChannelError("noise pmf must be a probability vector")
        self.pmf = p
        self._cdf = np.cumsum(p)
        self.log_pmf = log2_pmf(p)

    @classmethod
    def worst_case(cls, q: int, p_nonzero: float) -> "CommNoise":
        """Fixed Pr(u != 0) spread uniformly over the nonzero symbols.

        Among all noise pmfs with that error probability this one has the
        largest entropy, i.e. it is the worst for compression efficiency.
        """
        if not 0.0 <= p_nonzero <= 1.0:
            raise ChannelError("Pr(u != 0) must be in [0, 1]")
        p = np.full(q, p_nonzero / (q - 1) if q > 1 else 0.0)
        p[0] = 1.0 - p_nonzero
        return cls(q, p)

    @classmethod
    def zero(cls, q: int) -> "CommNoise":
        return cls.worst_case(q, 0.0)

    @property
    def is_zero(self) -> bool:
        return self.pmf[0] == 1.0

    def sample(self, m: int, seed: int) -> np.ndarray:
        u = _rng(seed).random(m)
        return np.minimum(np.searchsorted(self._cdf, u, side="right"), self.q - 1).astype(np.int64)

    def entropy_bits(self) -> float:
        return entropy_bits(self.pmf)

    def log_prob_batch(self, residuals) -> np.ndarray:
        """log2 p_u^M(rows); rows are residual vectors y - A theta."""
        r = np.asarray(residuals, dtype=np.int64)
        if r.shape[1] == 0:
            return np.zeros(r.shape[0])
        return self.log_pmf[r].sum(axis=1)


def noise_entropy(noise: CommNoise) -> float:
    """Shannon entropy of the communication noise pmf, in bits."""
    return noise.entropy_bits()


class MatrixLaw:
    """iid sensing-matrix law: Pr(0) = 1 - gamma, each nonzero symbol gamma/(q-1).

    gamma = 1 - 1/q makes every symbol equiprobable (the dense uniform
    matrix); smaller gamma gives a sparse matrix.  gamma must satisfy
    0 < gamma <= 1 - 1/q.
    """

    def __init__(self, q: int, gamma: float, rows: int, cols: int):
        self.q = int(q)
        limit = 1.0 - 1.0 / self.q
        if not 0.0 < gamma <= limit + 1e-15:
            raise ChannelError(
                f"sparsity factor must satisfy 0 < gamma <= 1 - 1/q = {limit:.6g}, got {gamma}"
            )
        self.gamma = float(gamma)
        self.rows = int(rows)
        self.cols = int(cols)
        if self.rows < 0 or self.cols < 1:
            raise ChannelError("matrix dimensions must be M >= 0, N >= 1")

    def pmf(self) -> np.ndarray:
        p = np.full(self.q, self.gamma / (self.q - 1))
        p[0] = 1.0 - self.gamma
        return p

    def sample(self, seed: int) -> np.ndarray:
        cdf = np.cumsum(self.pmf())
        u = _rng(seed).random((self.rows, self.cols))
        return np.minimum(np.searchsorted(cdf, u.ravel(), side="right"),
                          self.q - 1).astype(np.int64).reshape(self.rows, self.cols)


def sample_matrix(law: MatrixLaw, seed: int) -> np.ndarray:
    return law.sample(seed)


def measure(field: GF, A, x, u) -> np.ndarray:
    """y = A x + u over GF(q); u may be the all-zero vector."""
    A = np.asarray(A, dtype=np.int64)
    x = np.asarray(x, dtype=np.int64)
    u = np.asarray(u, dtype=np.int64)
    if u.shape != (A.shape[0],):
        raise FieldError(f"noise length {u.shape} does not match {A.shape[0]} measurements")
    return field.add_arr(field.matvec(A, x), u)
