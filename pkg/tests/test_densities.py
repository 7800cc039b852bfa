import numpy as np
import pytest

from latlab.densities import DensitySpec, sample_t
from latlab.errors import BadDensity


def test_window_support():
    rho = DensitySpec.parse("window:0.5")
    t = sample_t(rho, 1000.0, 10_000, seed=1)
    assert t.min() >= 500.0 and t.max() <= 1000.0


def test_uniform_mean():
    t = sample_t(DensitySpec(), 1.0, 200_000, seed=2)
    assert abs(t.mean() - 0.5) <= 3 * (1 / np.sqrt(12)) / np.sqrt(200_000)


def test_step_masses():
    rho = DensitySpec.parse("steps:0.3@0-0.5;0.7@0.5-1")
    assert rho.mass(0, 0.5) == pytest.approx(0.3)
    assert rho.mass(0.25, 0.75) == pytest.approx(0.5)
    t = sample_t(rho, 1.0, 100_000, seed=3)
    assert np.mean(t < 0.5) == pytest.approx(0.3, abs=0.005)


def test_gap_between_steps_has_no_mass():
    rho = DensitySpec.parse("steps:0.5@0-0.2;0.5@0.6-0.9")
    t = sample_t(rho, 1.0, 50_000, seed=4, scheme="stratified")
    assert not np.any((t > 0.2) & (t < 0.6))
    assert t.max() <= 0.9


def test_stratified_exactly_one_per_stratum():
    t = sample_t(DensitySpec(), 1.0, 1000, seed=5, scheme="stratified")
    assert np.array_equal(np.floor(t * 1000), np.arange(1000))


def test_round_trip_text():
    for text in ("uniform", "window:0.25", "steps:0.3@0.0-0.5;0.7@0.5-1.0"):
        rho = DensitySpec.parse(text)
        assert DensitySpec.parse(str(rho)) == rho


def test_deterministic():
    rho = DensitySpec.parse("window:0.5")
    assert np.array_equal(sample_t(rho, 10.0, 5000, 9), sample_t(rho, 10.0, 5000, 9))
    assert not np.array_equal(sample_t(rho, 10.0, 5000, 9), sample_t(rho, 10.0, 5000, 10))


@pytest.mark.parametrize(
    "text",
    ["window:0", "window:1.5", "steps:0.5@0-0.5", "steps:0.5@0-0.6;0.5@0.5-1", "steps:1@0.5-0.2", "gauss", "steps:x@0-1"],
)
def test_bad_density(text):
    with pytest.raises(BadDensity):
        DensitySpec.parse(text)


def test_bad_scheme():
    with pytest.raises(ValueError):
        sample_t(DensitySpec(), 1.0, 10, 0, scheme="sobol")
