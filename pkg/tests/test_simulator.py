import math

import numpy as np
import pytest
from scipy import stats as sps

from gwtheta.analytics import composed_pgf, composite_constants
from gwtheta.errors import DomainError
from gwtheta.harness import scenario_model
from gwtheta.series import pmf_from_theta_pgf
from gwtheta.simulator import (DELTA, replicate_rng, run_ensemble,
                               sample_heavy_tail_index,
                               sample_heavy_tail_log, sample_offspring,
                               sample_zn_direct, simulate_trajectory)


def test_replicate_rng_deterministic_and_distinct():
    a = replicate_rng(42, 0).random(4)
    b = replicate_rng(42, 0).random(4)
    c = replicate_rng(42, 1).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_sample_offspring_chi_square():
    # geometric offspring law; inverse-transform draws vs exact pmf
    pmf = pmf_from_theta_pgf(1.0, 1.0, 1.0, 1.0)
    rng = replicate_rng(7, 0)
    n = 20000
    draws = [sample_offspring(pmf, rng) for _ in range(n)]
    counts = np.bincount(draws, minlength=12)[:12]
    probs = np.array([2.0 ** -(j + 1) for j in range(12)])
    obs = np.append(counts, n - counts.sum())
    exp = np.append(probs, 1 - probs.sum()) * n
    chi2 = ((obs - exp) ** 2 / exp).sum()
    assert chi2 < sps.chi2.ppf(0.999, df=12)


def test_defective_draws_hit_delta():
    model = scenario_model("Ex9i")
    from gwtheta.series import step_pmf
    pmf = step_pmf(model, 1)
    rng = replicate_rng(3, 0)
    draws = [sample_offspring(pmf, rng) for _ in range(5000)]
    frac = sum(1 for d in draws if d == DELTA) / len(draws)
    assert frac == pytest.approx(pmf.defect_mass, abs=0.02)
    assert frac > 0.0


def test_heavy_tail_index_sampler_matches_tail():
    # law with pgf 1 - (1-s)^a: P(Y > j) = Gamma(j+1-a)/(Gamma(j+1)Gamma(1-a))
    a = 0.5
    rng = replicate_rng(11, 0)
    u = rng.random(40000)
    draws = np.array([sample_heavy_tail_index(float(v), a) for v in u])
    for j in (1, 4, 16):
        target = math.exp(math.lgamma(j + 1 - a) - math.lgamma(j + 1)
                          - math.lgamma(1 - a))
        assert (draws > j).mean() == pytest.approx(target, abs=0.01)


def test_heavy_tail_log_sampler_consistent_with_index():
    a = 0.2
    for u in (0.9, 0.5, 0.2, 0.05):
        idx = sample_heavy_tail_index(u, a)
        lg = sample_heavy_tail_log(u, a)
        assert lg == pytest.approx(math.log(idx), abs=1e-6)


def test_heavy_tail_log_sampler_extreme_tail():
    # u close enough to 1 that the draw exceeds any integer range
    a = 1 / 2001
    lg = sample_heavy_tail_log(1.0 - 1e-9, a)
    assert lg > 1e4
    assert math.isfinite(lg)


def test_trajectory_deterministic_and_absorbing():
    model = scenario_model("Ex3")
    t1 = simulate_trajectory(model, 50, seed=123)
    t2 = simulate_trajectory(model, 50, seed=123)
    assert t1.states == t2.states
    if t1.tau0 is not None:
        # zero is absorbing
        assert all(s == 0 for s in t1.states[t1.tau0:])
        assert t1.tau == t1.tau0


def test_trajectory_delta_absorbing():
    model = scenario_model("Ex9i")
    hit = None
    for seed in range(40):
        t = simulate_trajectory(model, 30, seed=seed)
        if t.tau_delta is not None:
            hit = t
            break
    assert hit is not None
    assert all(s == DELTA for s in hit.states[hit.tau_delta:])


def test_direct_sampler_matches_extinction_probability():
    model = scenario_model("Ex3")
    n, reps = 12, 4000
    zero = sum(1 for k in range(reps)
               if sample_zn_direct(model, n, seed=k) == 0)
    assert zero / reps == pytest.approx(composed_pgf(model, n, 0.0),
                                        abs=0.03)


def test_run_ensemble_modes_agree():
    model = scenario_model("Ex1")
    n = 6
    direct = run_ensemble(model, n, 4000, base_seed=5, mode="direct")
    gen = run_ensemble(model, n, 4000, base_seed=6, mode="generational")
    exact = composed_pgf(model, n, 0.5)
    for stats in (direct, gen):
        (s, est, se) = stats.empirical_pgf[5]
        assert s == 0.5
        assert est == pytest.approx(exact, abs=5 * max(se, 1e-3))


def test_run_ensemble_reproducible_across_workers():
    model = scenario_model("Ex1")
    a = run_ensemble(model, 5, 9000, base_seed=77, workers=1)
    b = run_ensemble(model, 5, 9000, base_seed=77, workers=3)
    assert a.zero_freq == b.zero_freq
    assert a.empirical_pgf == b.empirical_pgf


def test_run_ensemble_scaled_samples():
    from gwtheta.analytics import limit_constants, limit_law
    model = scenario_model("Ex1")
    law = limit_law(model, limit_constants(model, 10 ** 4))
    n = 50
    stats = run_ensemble(model, n, 3000, base_seed=9, mode="direct",
                         scaling=law)
    w = stats.scaled_samples
    assert len(w) == 3000
    cc = composite_constants(model, n)
    # scaled value is A_n^{1/theta} Z_n, so entries are multiples of A_n
    nz = w[w > 0]
    assert np.all(np.abs(nz / cc.A - np.round(nz / cc.A)) < 1e-9)


def test_run_ensemble_validates_arguments():
    model = scenario_model("Ex1")
    with pytest.raises(DomainError):
        run_ensemble(model, 5, 0, base_seed=1)
    with pytest.raises(DomainError):
        run_ensemble(model, 5, 10, base_seed=1, mode="bogus")


def test_ensemble_frequencies_sum_to_one():
    model = scenario_model("Ex9i")
    stats = run_ensemble(model, 15, 2000, base_seed=21)
    total = (stats.zero_freq[0] + stats.delta_freq[0]
             + stats.survival_freq[0])
    assert total == pytest.approx(1.0, abs=1e-12)
    assert stats.delta_freq[0] > 0.0
