import numpy as np
import pytest

from depolsim.measurement import (
    DEFAULT_SETTINGS,
    SETTING_PAIRS,
    MeasurementRecord,
    probabilities,
    projector,
    sample_counts,
)
from depolsim.polarization import JONES_H, density_from_jones, density_from_stokes
from _helpers import random_density


def test_projector_examples():
    assert np.abs(projector("h") - np.array([[1, 0], [0, 0]])).max() < 1e-15
    assert abs(projector("m")[0, 0].real - 0.5) < 1e-15
    assert np.abs(projector("h") + projector("v") - np.eye(2)).max() < 1e-15
    with pytest.raises(ValueError, match="label"):
        projector("x")


def test_projectors_match_jones_outer_products():
    from depolsim.polarization import JONES_STATES

    for label, jones in JONES_STATES.items():
        assert np.abs(projector(label) - density_from_jones(jones)).max() < 1e-15


def test_probabilities_examples():
    assert np.allclose(probabilities(np.eye(2) / 2), 0.5 * np.ones(6), atol=1e-15)
    p = probabilities(density_from_jones(JONES_H))
    assert np.allclose(p, [1.0, 0.0, 0.5, 0.5, 0.5, 0.5], atol=1e-15)
    s = np.ones(3) / np.sqrt(3)
    p = probabilities(density_from_stokes(s))
    assert abs(p[0] - (1 + 1 / np.sqrt(3)) / 2) < 1e-12


def test_complementary_pairs_sum_to_one():
    rng = np.random.default_rng(0)
    for _ in range(100):
        p = dict(zip(DEFAULT_SETTINGS, probabilities(random_density(rng))))
        for plus, minus in SETTING_PAIRS:
            assert abs(p[plus] + p[minus] - 1.0) < 1e-12


def test_sample_counts_is_deterministic():
    rng = np.random.default_rng(1)
    rho = random_density(rng)
    a = sample_counts(rho, 5000, seed=123)
    b = sample_counts(rho, 5000, seed=123)
    assert np.array_equal(a.counts, b.counts)
    assert a.to_json() == b.to_json()
    c = sample_counts(rho, 5000, seed=124)
    assert not np.array_equal(a.counts, c.counts)


def test_exact_mode_rounds_expected_counts():
    rho = density_from_jones(JONES_H)
    rec = sample_counts(rho, 1000, seed=0, exact=True)
    assert list(rec.counts) == [1000, 0, 500, 500, 500, 500]


def test_poisson_mean_tracks_probabilities():
    rho = density_from_stokes([0.3, -0.5, 0.2])
    p = probabilities(rho)
    shots = 1000
    n_seeds = 1000
    totals = np.zeros(6)
    for seed in range(n_seeds):
        totals += sample_counts(rho, shots, seed=seed).counts
    mean = totals / (n_seeds * shots)
    sigma = np.sqrt(p / shots / n_seeds)
    assert np.all(np.abs(mean - p) < 3 * sigma + 1e-12)


def test_poisson_variance_matches_mean():
    rho = np.eye(2) / 2
    shots = 400
    n_seeds = 2000
    samples = np.array([sample_counts(rho, shots, seed=s).counts for s in range(n_seeds)])
    mean = samples.mean(axis=0)
    var = samples.var(axis=0, ddof=1)
    # var(sample variance)/n gives sigma ~ mean * sqrt(2/n) for Poisson
    sigma = mean * np.sqrt(2.0 / n_seeds)
    assert np.all(np.abs(var - mean) < 3 * sigma)


def test_record_validation_and_json():
    rec = MeasurementRecord(("h", "v"), np.array([3, 4]), shots=10, seed=7)
    assert rec.count("v") == 4
    back = MeasurementRecord.from_json(rec.to_json())
    assert back.settings == rec.settings
    assert np.array_equal(back.counts, rec.counts)
    assert (back.shots, back.seed) == (rec.shots, rec.seed)
    with pytest.raises(ValueError, match="per setting"):
        MeasurementRecord(("h",), np.array([1, 2]), shots=10, seed=0)
    with pytest.raises(ValueError, match="non-negative"):
        MeasurementRecord(("h",), np.array([-1]), shots=10, seed=0)
    with pytest.raises(ValueError, match="shots"):
        sample_counts(np.eye(2) / 2, 0, seed=0)
