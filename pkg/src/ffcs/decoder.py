"""Exact MAP decoding of the source vector from (y, A) in all noise regimes.

All scores are unnormalized log2-posteriors.  Ties are broken toward the
lexicographically smallest candidate so that every decoder variant is
deterministic and directly comparable.  Candidate enumeration is capped
(default 2^22) to keep desk-scale runs fast.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import measure
from .gf import digits_to_index
from .seeding import derive_seed

DEFAULT_CANDIDATE_CAP = 1 << 22
BATCH = 4096


class SearchSpaceError(RuntimeError):
    """Candidate enumeration would exceed the configured cap."""


@dataclass
class PosteriorScore:
    log2_score: float
    feasible: bool


@dataclass
class DecodeResult:
    estimate: np.ndarray
    score: PosteriorScore
    tie_count: int
    regime: str
    work: int


class ArgmaxTracker:
    """Running argmax with exact-score tie counting and lexicographic tie-break.

    The selected vector is invariant under adding any constant to every
    score (only comparisons are used), which is what makes unnormalized
    log-posteriors a safe comparison currency.
    """

    def __init__(self):
        self.best = -np.inf
        self.vec = None
        self.tie_count = 0
        self.work = 0

    def update(self, scores: np.ndarray, batch: np.ndarray):
        self.work += scores.size
        if scores.size == 0:
            return
        m = float(scores.max())
        if self.vec is None or m > self.best:
            idx = np.flatnonzero(scores == m)
            self.best = m
            self.tie_count = int(idx.size)
            self.vec = np.array(min(map(tuple, batch[idx])), dtype=np.int64)
        elif m == self.best:
            idx = np.flatnonzero(scores == m)
            self.tie_count += int(idx.size)
            cand = min(map(tuple, batch[idx]))
            if cand < tuple(self.vec):
                self.vec = np.array(cand, dtype=np.int64)

    def result(self, regime: str) -> DecodeResult:
        feasible = self.vec is not None and bool(np.isfinite(self.best))
        return DecodeResult(
            estimate=self.vec,
            score=PosteriorScore(self.best, feasible),
            tie_count=self.tie_count,
            regime=regime,
            work=self.work,
        )


def _cap(scenario) -> int:
    return int(getattr(scenario, "candidate_cap", DEFAULT_CANDIDATE_CAP))


def _check_instance(scenario, y, A):
    y = np.asarray(y, dtype=np.int64)
    A = np.asarray(A, dtype=np.int64)
    if A.shape != (scenario.m, scenario.n) or y.shape != (scenario.m,):
        raise ValueError(f"instance shapes {A.shape}/{y.shape} do not match scenario "
                         f"({scenario.m}, {scenario.n})")
    return y, A


def decode_nc(scenario, y, A) -> DecodeResult:
    """MAP estimate without sensing noise: argmax log p(theta) + log p_u(y - A theta).

    With point-mass communication noise (the noiseless sub-case) every
    candidate off the solution set of A theta = y scores -inf, so the
    search runs over the affine solution set only.
    """
    y, A = _check_instance(scenario, y, A)
    field, source, comm = scenario.field, scenario.source, scenario.comm
    q, n = field.q, scenario.n
    tracker = ArgmaxTracker()
    if comm.is_zero:
        particular, basis = field.solve_affine(A, y)
        if particular is None:
            return DecodeResult(
                estimate=np.zeros(n, dtype=np.int64),
                score=PosteriorScore(-np.inf, False),
                tie_count=q**n,
                regime=scenario.regime,
                work=0,
            )
        if q ** len(basis) > _cap(scenario):
            raise SearchSpaceError(
                f"solution set of size {q}^{len(basis)} exceeds the cap {_cap(scenario)}"
            )
        for batch in field.affine_batches(particular, basis, BATCH):
            tracker.update(source.log_prob_batch(batch), batch)
    else:
        if q**n > _cap(scenario):
            raise SearchSpaceError(f"{q}^{n} candidates exceed the cap {_cap(scenario)}")
        for batch in field.all_vector_batches(n, BATCH):
            res = field.sub_arr(y[None, :], field.matvec_many(A, batch))
            scores = source.log_prob_batch(batch) + comm.log_prob_batch(res)
            tracker.update(scores, batch)
    return tracker.result(scenario.regime)


def decode_max_q_prob(scenario, y, A) -> DecodeResult:
    """Joint maximizer of p(phi) p(v) subject to A phi + v = y.

    The constraint pins v = y - A phi, so the scan runs over phi alone;
    in the noiseless sub-case p(v) is an indicator of v = 0.  Equivalent
    to decode_nc by construction, which the verification suite checks on
    random instances.
    """
    y, A = _check_instance(scenario, y, A)
    field, source, comm = scenario.field, scenario.source, scenario.comm
    q, n = field.q, scenario.n
    if q**n > _cap(scenario):
        raise SearchSpaceError(f"{q}^{n} candidates exceed the cap {_cap(scenario)}")
    tracker = ArgmaxTracker()
    for batch in field.all_vector_batches(n, BATCH):
        v = field.sub_arr(y[None, :], field.matvec_many(A, batch))
        tracker.update(source.log_prob_batch(batch) + comm.log_prob_batch(v), batch)
    return tracker.result(scenario.regime)


def decode_ncs(scenario, y, A) -> DecodeResult:
    """MAP estimate with sensing noise:

        argmax_theta  p(theta) * sum_z p(z | theta) w(z),

    where w(z) = p_u(y - A z) (or the indicator of A z = y when the
    communication noise is zero, in which case the inner sum is restricted
    to the affine solution set).  w is computed once and reused across all
    candidates; the per-coordinate channel is applied as a sequence of
    tensor contractions with running renormalization, so the sum never
    leaves a numerically safe scale.
    """
    y, A = _check_instance(scenario, y, A)
    field, source, comm = scenario.field, scenario.source, scenario.comm
    sensing = scenario.sensing
    q, n = field.q, scenario.n
    total = q**n
    if total > _cap(scenario):
        raise SearchSpaceError(f"{q}^{n} candidates exceed the cap {_cap(scenario)}")

    offset = 0.0
    if comm.is_zero:
        w = np.zeros(total)
        particular, basis = field.solve_affine(A, y)
        if particular is not None:
            for Z in field.affine_batches(particular, basis, BATCH):
                w[digits_to_index(Z, q)] = 1.0
    else:
        wlog = np.empty(total)
        start = 0
        for Z in field.all_vector_batches(n, BATCH):
            res = field.sub_arr(y[None, :], field.matvec_many(A, Z))
            wlog[start : start + Z.shape[0]] = comm.log_prob_batch(res)
            start += Z.shape[0]
        m0 = float(wlog.max())
        if np.isfinite(m0):
            offset = m0
            w = np.exp2(wlog - m0)
        else:
            w = np.zeros(total)

    S = w.reshape((q,) * n)
    for _ in range(n):
        S = np.tensordot(sensing.table, S, axes=([1], [S.ndim - 1]))
        m = float(S.max())
        if m > 0.0:
            S = S / m
            offset += np.log2(m)
        else:
            break
    with np.errstate(divide="ignore"):
        sens_scores = np.log2(S.reshape(-1)) + offset

    tracker = ArgmaxTracker()
    start = 0
    for batch in field.all_vector_batches(n, BATCH):
        scores = source.log_prob_batch(batch) + sens_scores[start : start + batch.shape[0]]
        tracker.update(scores, batch)
        start += batch.shape[0]
    return tracker.result(scenario.regime)


def decode(scenario, y, A) -> DecodeResult:
    """Dispatch on the regime: sensing noise present -> marginalizing decoder."""
    if scenario.sensing.is_identity:
        return decode_nc(scenario, y, A)
    return decode_ncs(scenario, y, A)


def run_trial(scenario, seed: int):
    """One seeded end-to-end trial: sample, measure, decode, compare.

    Streams 0..3 of the seed drive the source, sensing noise, matrix, and
    communication noise draws, so the outcome is a pure function of
    (scenario, seed) independent of execution order.
    """
    field = scenario.field
    theta = scenario.source.sample(scenario.n, derive_seed(seed, 0))
    if scenario.sensing.is_identity:
        x = theta
    else:
        x = scenario.sensing.apply(theta, derive_seed(seed, 1))
    if scenario.a_override == "identity":
        if scenario.m != scenario.n:
            raise ValueError("identity matrix override requires M = N")
        A = np.eye(scenario.n, dtype=np.int64)
    else:
        A = scenario.matrix_law.sample(derive_seed(seed, 2))
    if scenario.comm.is_zero:
        u = np.zeros(scenario.m, dtype=np.int64)
    else:
        u = scenario.comm.sample(scenario.m, derive_seed(seed, 3))
    y = measure(field, A, x, u)
    result = decode(scenario, y, A)
    error = not np.array_equal(result.estimate, theta)
    return error, result
