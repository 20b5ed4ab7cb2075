"""Source models and their entropy rates."""

import math

import numpy as np
import pytest

from ffcs.sources import (GaussianFieldSource, NonErgodicError, SiSource,
                          SourceError, StmSource, conditional_entropy_bound,
                          disk_positions, epsilon_rho, transition_counts,
                          conditional_entropy_from_counts)

H2_01 = 0.4689955935892812  # binary entropy at 0.1


def test_si_degenerate_pmf_all_zeros():
    src = SiSource(4, [1.0, 0.0, 0.0, 0.0])
    assert np.all(src.sample(50, seed=1) == 0)


def test_si_empirical_frequency():
    # binomial 3 sigma at n=1e5 is ~0.003, spec tolerance 0.01
    src = SiSource(2, [0.89, 0.11])
    x = src.sample(100_000, seed=7)
    assert abs(x.mean() - 0.11) < 0.01


@pytest.mark.parametrize("q", [2, 3, 4, 8])
def test_si_uniform_rate_exact(q):
    rep = SiSource(q, [1.0 / q] * q).entropy_rate()
    assert rep.method == "exact"
    assert rep.rate_theta == pytest.approx(math.log2(q), abs=1e-12)


def test_si_deterministic_rate_zero():
    assert SiSource(2, [1.0, 0.0]).entropy_rate().rate_theta == 0.0


def test_si_invalid_pmf():
    with pytest.raises(SourceError):
        SiSource(2, [0.6, 0.5])
    with pytest.raises(SourceError):
        SiSource(2, [1.2, -0.2])


def test_si_sampling_deterministic():
    src = SiSource(3, [0.6, 0.3, 0.1])
    assert np.array_equal(src.sample(1000, seed=5), src.sample(1000, seed=5))


def test_stm_absorbing_dynamics_constant_vector():
    # stay-with-probability-1 kernel: whatever the start, the path is constant
    src = StmSource(2, [[1.0, 0.0], [0.0, 1.0]], initial=[0.5, 0.5])
    x = src.sample(40, seed=3)
    assert np.all(x == x[0])


def test_stm_symmetric_flip_rate():
    src = StmSource(2, [[0.9, 0.1], [0.1, 0.9]])
    rep = src.entropy_rate()
    assert rep.method == "exact"
    assert rep.rate_theta == pytest.approx(H2_01, abs=1e-9)
    # stationary distribution is uniform by symmetry
    assert np.allclose(src.stationary_state_dist(), [0.5, 0.5], atol=1e-10)


def test_stm_order2_rate_matches_plugin():
    # order-2 kernel over GF(2): next symbol repeats the majority of the state
    kernel = np.array([
        [0.85, 0.15],   # state 00
        [0.55, 0.45],   # state 01
        [0.45, 0.55],   # state 10
        [0.15, 0.85],   # state 11
    ])
    src = StmSource(2, kernel, order=2)
    x = src.sample(1_000_000, seed=11)
    counts = transition_counts(x, 2, 2)
    plug_in = conditional_entropy_from_counts(counts, 2)
    assert abs(plug_in - src.entropy_rate().rate_theta) < 0.01


def test_stm_sampler_matches_analytic_rate():
    src = StmSource(2, [[0.9, 0.1], [0.1, 0.9]])
    x = src.sample(1_000_000, seed=2)
    plug_in = conditional_entropy_from_counts(transition_counts(x, 1, 2), 2)
    assert abs(plug_in - H2_01) < 0.01


def test_stm_nonergodic_flagged():
    # states 0 and 1 swap forever, state 2 drains into the cycle: the
    # state-occupancy sequence oscillates and never converges
    kernel = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]
    with pytest.raises(NonErgodicError):
        StmSource(3, kernel)


def test_stm_log_prob_consistency():
    src = StmSource(2, [[0.9, 0.1], [0.2, 0.8]])
    x = src.sample(12, seed=9)
    # direct chain-rule evaluation
    lp = math.log2(src.initial[x[0]])
    for t in range(1, 12):
        lp += math.log2(src.kernel[x[t - 1], x[t]])
    assert src.log_prob(x) == pytest.approx(lp, abs=1e-12)
    assert src.log_prob_batch(x[None, :])[0] == pytest.approx(lp, abs=1e-12)


def test_stm_kernel_validation():
    with pytest.raises(SourceError):
        StmSource(2, [[0.9, 0.2], [0.1, 0.9]])


def test_epsilon_rho_values():
    assert epsilon_rho(0.0) == pytest.approx(0.25, abs=1e-15)
    assert epsilon_rho(math.sqrt(2) / 2) == pytest.approx(0.125, abs=1e-12)
    with pytest.raises(SourceError):
        epsilon_rho(1.0)
    with pytest.raises(SourceError):
        epsilon_rho(-0.1)


def test_conditional_entropy_bound_endpoints():
    assert conditional_entropy_bound(0.0) == pytest.approx(1.0, abs=1e-12)
    assert conditional_entropy_bound(0.999999) < 1e-2


def test_conditional_entropy_bound_strictly_decreasing():
    grid = [0.1 * k for k in range(10)] + [0.99]
    vals = [conditional_entropy_bound(r) for r in grid]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_gaussian_field_marginal_is_fair():
    src = GaussianFieldSource(5.0, 64)
    ones = sum(src.sample(seed=s).mean() for s in range(200)) / 200
    # 3 sigma of the mean of 200*64 fair bits is ~0.013
    assert abs(ones - 0.5) < 0.02


def test_gaussian_field_independence_limit():
    # lambda so large that off-diagonal correlation is numerically zero
    src = GaussianFieldSource(1e6, 32)
    agree = []
    for s in range(300):
        x = src.sample(seed=s)
        agree.append((x[:-1] == x[1:]).mean())
    assert abs(np.mean(agree) - 0.5) < 0.02


def test_gaussian_field_pair_agreement_matches_closed_form():
    # two sensors at a chosen distance: Pr(equal) = 1 - 2 eps(rho)
    d = 0.3
    lam = 4.0
    rho = math.exp(-lam * d * d)
    src = GaussianFieldSource(lam, 2, positions=np.array([[0.0, 0.0], [d, 0.0]]))
    draws = 200_000
    L = src._chol
    rng = np.random.Generator(np.random.PCG64(123))
    z = rng.standard_normal((draws, 2))
    omega = z @ L.T
    bits = omega >= 0
    p_eq = (bits[:, 0] == bits[:, 1]).mean()
    expect = 1.0 - 2.0 * epsilon_rho(rho)
    sigma = math.sqrt(expect * (1 - expect) / draws)
    assert abs(p_eq - expect) <= 3 * sigma


def test_gaussian_field_positions_reproducible():
    a = GaussianFieldSource(3.0, 16, position_seed=4)
    b = GaussianFieldSource(3.0, 16, positions=a.positions)
    assert np.allclose(a.covariance, b.covariance)
    assert np.array_equal(a.sample(seed=9), b.sample(seed=9))


def test_gaussian_field_rejects_wrong_length():
    src = GaussianFieldSource(3.0, 16)
    with pytest.raises(SourceError):
        src.sample(8, seed=0)


def test_gaussian_field_entropy_report_fields():
    src = GaussianFieldSource(10.0, 32)
    rep = src.entropy_rate(min_transitions=20_000, seed=1)
    assert rep.method == "estimated"
    assert 0.0 <= rep.rate_theta <= 1.0
    assert rep.ci_halfwidth is not None and rep.ci_halfwidth >= 0
    assert rep.estimator_params["transitions"] >= 20_000


def test_disk_positions_inside_unit_disk():
    pos = disk_positions(500, seed=0)
    assert np.all((pos**2).sum(axis=1) <= 1.0 + 1e-12)
