"""Exact MAP decoders: spec examples, oracles, regime degeneration."""

import itertools
import math

import numpy as np
import pytest

from ffcs.channel import CommNoise, SensingChannel
from ffcs.decoder import (ArgmaxTracker, SearchSpaceError, decode,
                          decode_max_q_prob, decode_nc, decode_ncs, run_trial)
from ffcs.gf import GF
from ffcs.harness import Scenario, decode_naive
from ffcs.seeding import derive_seed
from ffcs.sources import SiSource, StmSource


def wn_scenario(n, m, q=2, pmf=(0.9, 0.1), gamma=0.5, **kw):
    return Scenario(n=n, m=m, field=GF(q), gamma=gamma, source=SiSource(q, list(pmf)),
                    sensing=SensingChannel.identity(q), comm=CommNoise.zero(q), **kw)


def test_wn_identity_matrix_returns_y():
    sc = wn_scenario(3, 3)
    y = np.array([1, 0, 1], dtype=np.int64)
    r = decode_nc(sc, y, np.eye(3, dtype=np.int64))
    assert np.array_equal(r.estimate, y)
    assert r.tie_count == 1 and r.score.feasible


def test_wn_prior_breaks_coset_tie():
    # A theta = y leaves two candidates {(1,0),(1,1)} with priors 0.09 vs 0.01
    sc = wn_scenario(2, 1)
    r = decode_nc(sc, np.array([1]), np.array([[1, 0]]))
    assert np.array_equal(r.estimate, [1, 0])
    assert r.score.log2_score == pytest.approx(math.log2(0.09), abs=1e-12)
    assert r.work == 2


def test_nc_single_symbol_example():
    # scores p(0)p_u(0) = 0.81 vs p(1)p_u(1) = 0.01
    sc = Scenario(n=1, m=1, field=GF(2), gamma=0.5, source=SiSource(2, [0.9, 0.1]),
                  sensing=SensingChannel.identity(2), comm=CommNoise.worst_case(2, 0.1))
    r = decode_nc(sc, np.array([0]), np.array([[1]]))
    assert np.array_equal(r.estimate, [0])
    assert 2.0**r.score.log2_score == pytest.approx(0.81, abs=1e-12)


def test_wn_infeasible_system_flagged():
    sc = wn_scenario(1, 2)
    r = decode_nc(sc, np.array([0, 1]), np.array([[1], [1]]))
    assert not r.score.feasible
    assert np.array_equal(r.estimate, [0])


def test_coset_decode_matches_naive_exhaustive():
    # coset optimization vs full scan over all q^n candidates
    for k in range(12):
        seed = derive_seed(0xC05E7, k)
        rng = np.random.Generator(np.random.PCG64(seed))
        q = int(rng.choice([2, 3]))
        n = int(rng.integers(3, 7))
        m = int(rng.integers(1, n + 1))
        sc = wn_scenario(n, m, q=q, pmf=[0.7] + [0.3 / (q - 1)] * (q - 1))
        theta = sc.source.sample(n, derive_seed(seed, 0))
        A = sc.matrix_law.sample(derive_seed(seed, 2))
        y = sc.field.matvec(A, theta)
        fast = decode_nc(sc, y, A)
        slow = decode_naive(sc, y, A)
        assert np.array_equal(fast.estimate, slow.estimate)
        assert fast.tie_count == slow.tie_count
        assert fast.score.log2_score == slow.score.log2_score


def test_max_q_prob_equals_map_on_random_instances():
    for k in range(25):
        seed = derive_seed(0xE0, k)
        rng = np.random.Generator(np.random.PCG64(seed))
        q = int(rng.choice([2, 3]))
        n = int(rng.integers(2, 7))
        m = int(rng.integers(1, 7))
        comm = CommNoise.zero(q) if rng.random() < 0.5 else \
            CommNoise.worst_case(q, float(rng.uniform(0.01, 0.3)))
        sc = Scenario(n=n, m=m, field=GF(q), gamma=0.4,
                      source=SiSource(q, [0.6] + [0.4 / (q - 1)] * (q - 1)),
                      sensing=SensingChannel.identity(q), comm=comm)
        theta = sc.source.sample(n, derive_seed(seed, 0))
        A = sc.matrix_law.sample(derive_seed(seed, 2))
        u = np.zeros(m, dtype=np.int64) if comm.is_zero else comm.sample(m, derive_seed(seed, 3))
        y = sc.field.add_arr(sc.field.matvec(A, theta), u)
        a = decode_nc(sc, y, A)
        b = decode_max_q_prob(sc, y, A)
        assert np.array_equal(a.estimate, b.estimate)
        assert a.tie_count == b.tie_count


def test_nc_uniform_noise_ties_all_feasible():
    # uniform noise makes the noise term constant: with a uniform prior every
    # candidate is co-maximal and the lexicographic minimum (zeros) wins
    q = 2
    sc = Scenario(n=3, m=2, field=GF(q), gamma=0.5,
                  source=SiSource(q, [0.5, 0.5]),
                  sensing=SensingChannel.identity(q),
                  comm=CommNoise(q, [0.5, 0.5]))
    A = np.array([[1, 0, 1], [0, 1, 1]], dtype=np.int64)
    r = decode_nc(sc, np.array([1, 0]), A)
    assert r.tie_count == 8
    assert np.array_equal(r.estimate, [0, 0, 0])


def _ncs_brute_force(sc, y, A):
    """Literal marginalization: sum over all z of p(theta) p(z|theta) p_u(y-Az)."""
    f, q, n = sc.field, sc.field.q, sc.n
    best, best_vec, ties = -np.inf, None, 0
    for cand in itertools.product(range(q), repeat=n):
        theta = np.array(cand, dtype=np.int64)
        total = 0.0
        for zc in itertools.product(range(q), repeat=n):
            z = np.array(zc, dtype=np.int64)
            res = f.sub_arr(y, f.matvec(A, z))
            pz = float(np.prod([sc.sensing.table[theta[i], z[i]] for i in range(n)]))
            pu = float(np.prod(sc.comm.pmf[res])) if res.size else 1.0
            total += pz * pu
        score = sc.source.log_prob(theta) + (math.log2(total) if total > 0 else -np.inf)
        if score > best + 1e-12:
            best, best_vec, ties = score, theta, 1
        elif abs(score - best) <= 1e-12:
            ties += 1
    return best_vec, best, ties


def test_ncs_spec_example_and_brute_force():
    sc = Scenario(n=2, m=2, field=GF(2), gamma=0.5, source=SiSource(2, [0.9, 0.1]),
                  sensing=SensingChannel.symmetric(2, 0.1), comm=CommNoise.zero(2))
    y = np.array([0, 0], dtype=np.int64)
    A = np.eye(2, dtype=np.int64)
    r = decode_ncs(sc, y, A)
    assert np.array_equal(r.estimate, [0, 0])
    vec, score, _ = _ncs_brute_force(sc, y, A)
    assert np.array_equal(r.estimate, vec)
    assert r.score.log2_score == pytest.approx(score, abs=1e-9)


@pytest.mark.parametrize("comm_p", [0.0, 0.15])
def test_ncs_matches_brute_force_random(comm_p):
    for k in range(6):
        seed = derive_seed(0xB0B, k)
        rng = np.random.Generator(np.random.PCG64(seed))
        q, n, m = 2, int(rng.integers(2, 5)), int(rng.integers(1, 4))
        comm = CommNoise.zero(q) if comm_p == 0 else CommNoise.worst_case(q, comm_p)
        sc = Scenario(n=n, m=m, field=GF(q), gamma=0.5,
                      source=SiSource(q, [0.8, 0.2]),
                      sensing=SensingChannel.symmetric(q, 0.1), comm=comm)
        theta = sc.source.sample(n, derive_seed(seed, 0))
        x = sc.sensing.apply(theta, derive_seed(seed, 1))
        A = sc.matrix_law.sample(derive_seed(seed, 2))
        u = np.zeros(m, dtype=np.int64) if comm.is_zero else comm.sample(m, derive_seed(seed, 3))
        y = sc.field.add_arr(sc.field.matvec(A, x), u)
        r = decode_ncs(sc, y, A)
        vec, score, _ = _ncs_brute_force(sc, y, A)
        assert np.array_equal(r.estimate, vec)
        assert r.score.log2_score == pytest.approx(score, abs=1e-9)


def test_ncs_identity_channel_degenerates_to_nc():
    for k in range(8):
        seed = derive_seed(0xDE6, k)
        rng = np.random.Generator(np.random.PCG64(seed))
        q = int(rng.choice([2, 3]))
        n, m = int(rng.integers(2, 6)), int(rng.integers(1, 5))
        comm = CommNoise.zero(q) if rng.random() < 0.5 else CommNoise.worst_case(q, 0.1)
        sc = Scenario(n=n, m=m, field=GF(q), gamma=0.4,
                      source=SiSource(q, [0.7] + [0.3 / (q - 1)] * (q - 1)),
                      sensing=SensingChannel.identity(q), comm=comm)
        theta = sc.source.sample(n, derive_seed(seed, 0))
        A = sc.matrix_law.sample(derive_seed(seed, 2))
        u = np.zeros(m, dtype=np.int64) if comm.is_zero else comm.sample(m, derive_seed(seed, 3))
        y = sc.field.add_arr(sc.field.matvec(A, theta), u)
        assert np.array_equal(decode_ncs(sc, y, A).estimate,
                              decode_nc(sc, y, A).estimate)


def test_ncs_score_is_subprobability_of_prior():
    sc = Scenario(n=3, m=2, field=GF(2), gamma=0.5, source=SiSource(2, [0.8, 0.2]),
                  sensing=SensingChannel.symmetric(2, 0.2),
                  comm=CommNoise.worst_case(2, 0.1))
    theta = sc.source.sample(3, 1)
    x = sc.sensing.apply(theta, 2)
    A = sc.matrix_law.sample(3)
    u = sc.comm.sample(2, 4)
    y = sc.field.add_arr(sc.field.matvec(A, x), u)
    r = decode_ncs(sc, y, A)
    assert r.score.log2_score <= sc.source.log_prob(r.estimate) + 1e-9


def test_stm_prior_decoding():
    # Markov prior: candidate with the likelier transition pattern wins the coset
    src = StmSource(2, [[0.95, 0.05], [0.4, 0.6]])
    sc = Scenario(n=3, m=1, field=GF(2), gamma=0.5, source=src,
                  sensing=SensingChannel.identity(2), comm=CommNoise.zero(2))
    A = np.array([[1, 1, 1]], dtype=np.int64)
    r = decode_nc(sc, np.array([0]), A)
    coset = [v for v in itertools.product(range(2), repeat=3) if sum(v) % 2 == 0]
    want = max(coset, key=lambda v: (src.log_prob(np.array(v)), tuple(-x for x in v)))
    assert tuple(r.estimate) == want


def test_argmax_tracker_offset_invariance():
    rng = np.random.Generator(np.random.PCG64(8))
    scores = rng.random(64)
    batch = rng.integers(0, 3, size=(64, 5))
    a, b = ArgmaxTracker(), ArgmaxTracker()
    a.update(scores, batch)
    b.update(scores + 17.5, batch)  # positive rescaling of the posterior
    assert np.array_equal(a.vec, b.vec)
    assert a.tie_count == b.tie_count


def test_m_zero_prior_maximizer():
    sc = wn_scenario(4, 0, pmf=(0.89, 0.11))
    A = np.zeros((0, 4), dtype=np.int64)
    y = np.zeros(0, dtype=np.int64)
    r = decode_nc(sc, y, A)
    assert r.work == 16  # all q^n candidates examined
    assert np.array_equal(r.estimate, [0, 0, 0, 0])


def test_search_space_cap():
    sc = wn_scenario(8, 0, candidate_cap=100)
    with pytest.raises(SearchSpaceError):
        decode_nc(sc, np.zeros(0, dtype=np.int64), np.zeros((0, 8), dtype=np.int64))


def test_run_trial_deterministic():
    sc = Scenario(n=6, m=4, field=GF(2), gamma=0.5, source=SiSource(2, [0.89, 0.11]),
                  sensing=SensingChannel.symmetric(2, 0.05),
                  comm=CommNoise.worst_case(2, 0.1))
    e1, r1 = run_trial(sc, 99)
    e2, r2 = run_trial(sc, 99)
    assert e1 == e2
    assert np.array_equal(r1.estimate, r2.estimate)
    assert r1.score.log2_score == r2.score.log2_score


def test_regime_dispatch():
    sc_ns = Scenario(n=3, m=2, field=GF(2), gamma=0.5, source=SiSource(2, [0.8, 0.2]),
                     sensing=SensingChannel.symmetric(2, 0.1), comm=CommNoise.zero(2))
    assert sc_ns.regime == "NS"
    _, r = run_trial(sc_ns, 5)
    assert r.regime == "NS"
    sc_wn = wn_scenario(3, 2)
    assert sc_wn.regime == "WN"
    _, r = run_trial(sc_wn, 5)
    assert r.regime == "WN"


def test_error_rate_non_increasing_in_m():
    # WN at N=12: more measurements shrink the coset, fixed-seed averages
    rates = []
    for m in (2, 6, 10):
        sc = wn_scenario(12, m, pmf=(0.89, 0.11), master_seed=314, trials=200)
        errs = sum(run_trial(sc, sc.trial_seed(t))[0] for t in range(200))
        rates.append(errs / 200)
    assert rates[0] >= rates[1] >= rates[2]
