import math

import numpy as np
import pytest

from bellkcbs.errors import DomainError
from bellkcbs.inequalities import CHSH_LABELS, KCBS_LABELS, quantum_correlators
from bellkcbs.quantum import QuantumModel
from bellkcbs.scenario import check_no_signalling
from bellkcbs.shotnoise import (
    CountTable,
    estimate_from_counts,
    measured_tables,
    sample_counts,
    simulate_experiment,
)

PSI5 = QuantumModel(0.351)


def test_deterministic_table_puts_everything_in_one_cell():
    t = np.zeros((2, 2))
    t[1, 0] = 1.0
    c = sample_counts(t, 5500, seed=1)
    assert c.counts[1, 0] == 5500 and c.total == 5500


def test_sampling_is_seeded():
    t = measured_tables(PSI5)[(0, 1)]
    assert np.array_equal(sample_counts(t, 5500, 7).counts, sample_counts(t, 5500, 7).counts)
    assert not np.array_equal(sample_counts(t, 5500, 7).counts, sample_counts(t, 5500, 8).counts)


def test_sampling_rejects_bad_input():
    with pytest.raises(DomainError):
        sample_counts(np.full((2, 2), 0.3), 100, 0)
    with pytest.raises(DomainError):
        sample_counts(np.full((2, 2), 0.25), 0, 0)
    with pytest.raises(DomainError):
        CountTable((0, 1), np.array([[1, -1], [0, 0]]))


def test_frequencies_inside_binomial_bands():
    p = measured_tables(PSI5)[(1, (2, 3))]
    n = 5500
    band = 5 * np.sqrt(p * (1 - p) / n)
    for seed in range(1000):
        freq = sample_counts(p, n, seed).counts / n
        assert np.all(np.abs(freq - p) <= band + 1e-12)


def _counts(model, n, seed):
    return [sample_counts(t, n, [seed, i], ctx) for i, (ctx, t) in enumerate(measured_tables(model).items())]


def test_large_n_recovers_exact_correlators():
    est = estimate_from_counts(_counts(PSI5, 10**8, 3), n_resamples=50)
    exact = quantum_correlators(PSI5)
    for label in CHSH_LABELS + KCBS_LABELS:
        assert est.correlators.get(label) == pytest.approx(exact.get(label), abs=1e-3)


def test_deterministic_counts_have_zero_sigma():
    t = np.zeros((2, 2))
    t[1, 1] = 5500
    est = estimate_from_counts([CountTable(c, t) for c in [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]], n_resamples=20)
    assert all(s == 0 for s in est.sigma.values())
    assert est.distance == 0 and est.distance_sigma == 0


def test_zero_total_rejected():
    with pytest.raises(DomainError):
        estimate_from_counts([CountTable((0, 1), np.zeros((2, 2)))])


def test_correlator_sigma_follows_multinomial_law():
    est = estimate_from_counts(_counts(PSI5, 5500, 11))
    for label, s in est.sigma.items():
        e = est.correlators.get(label)
        assert s == pytest.approx(math.sqrt((1 - e * e) / 5500), rel=0.15)
    assert 0.008 <= np.mean(list(est.sigma.values())) <= 0.012


def test_bootstrap_sigma_converges():
    a = estimate_from_counts(_counts(PSI5, 5500, 2), n_resamples=1000, seed=5).sigma
    b = estimate_from_counts(_counts(PSI5, 5500, 2), n_resamples=2000, seed=5).sigma
    for label in a:
        assert abs(b[label] / a[label] - 1) < 0.10


def test_estimated_behavior_is_normalized_and_nearly_no_signalling():
    est = estimate_from_counts(_counts(PSI5, 5500, 4), n_resamples=10)
    assert est.behavior.normalization_error < 1e-12
    # five binomial sigmas at n=5500 with p near 1/2
    assert check_no_signalling(est.behavior, 5 * math.sqrt(0.25 / 5500) * math.sqrt(2)).ok


def test_simulation_report_at_psi5():
    r = simulate_experiment(PSI5, 5500, seed=1)
    assert 0.044 / 1.5 <= r.sigma_alpha <= 0.044 * 1.5
    assert 0.053 / 1.5 <= r.sigma_beta <= 0.053 * 1.5
    # linear sums, not quadrature
    assert r.sigma_alpha == pytest.approx(sum(r.sigma[k] for k in CHSH_LABELS))
    assert r.sigma_alpha_quadrature < r.sigma_alpha
    assert 0 <= r.distance < 2e-3
    assert r.as_dict()["n_per_setting"] == 5500


def test_simulation_is_reproducible():
    assert simulate_experiment(PSI5, 2000, seed=9, n_resamples=50) == simulate_experiment(PSI5, 2000, seed=9, n_resamples=50)


def test_alpha_estimate_unbiased():
    runs = [simulate_experiment(PSI5, 5500, seed=s, n_resamples=100) for s in range(200)]
    mean = np.mean([r.alpha for r in runs])
    sigma = np.mean([r.sigma_alpha for r in runs])
    assert abs(mean - 2.1622) <= 3 * sigma / math.sqrt(200)


def test_simulation_rejects_nonpositive_counts():
    with pytest.raises(DomainError):
        simulate_experiment(PSI5, 0)
