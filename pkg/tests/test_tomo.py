import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biphoton.states import DensityMatrix, bell_density, concurrence, maximally_mixed
from biphoton.tomo import (ProjectionSet, Projector, TomographyError, _mean_std, _poisson,
                           linear_reconstruct, mc_error, simulate_counts)
from conftest import random_density


@pytest.fixture(scope="module")
def ps():
    return ProjectionSet.standard()


def test_standard_set_is_complete(ps):
    assert np.linalg.cond(ps.gram()) < 100


def test_incomplete_set_rejected():
    lin = (Projector(0), Projector(90), Projector(45), Projector(135))
    with pytest.raises(TomographyError):
        ProjectionSet(tuple((a, b) for a in lin for b in lin))


def test_expected_counts_bell(ps):
    cr = simulate_counts(bell_density(), ps, 1000, seed=1)
    # HH and VV each see half the pairs, HV and VH none
    assert cr.expected[0] == pytest.approx(500)
    assert cr.expected[5] == pytest.approx(500)
    assert cr.expected[1] == pytest.approx(0, abs=1e-9)
    assert cr.counts[1] == 0


def test_zero_noise_round_trip(ps, rng):
    for _ in range(20):
        rho = DensityMatrix(random_density(rng))
        cr = simulate_counts(rho, ps, 1_000_000, seed=0)
        rec = linear_reconstruct(cr, ps, use_expected=True)
        assert np.max(np.abs(rec.m - rho.m)) < 1e-12


def test_counts_are_reproducible(ps):
    a = simulate_counts(bell_density(), ps, 10_000, seed=42, angle_jitter_deg=0.5)
    b = simulate_counts(bell_density(), ps, 10_000, seed=42, angle_jitter_deg=0.5)
    c = simulate_counts(bell_density(), ps, 10_000, seed=43, angle_jitter_deg=0.5)
    assert np.array_equal(a.counts, b.counts)
    assert not np.array_equal(a.counts, c.counts)


def test_invalid_inputs(ps):
    with pytest.raises(TomographyError):
        simulate_counts(bell_density(), ps, 0)
    with pytest.raises(TomographyError):
        simulate_counts(bell_density(), ps, 10, angle_jitter_deg=-1)
    with pytest.raises(TomographyError):
        mc_error(bell_density(), ps, 100, trials=1)


def test_low_counts_force_psd_projection(ps):
    # a pure state measured with very few pairs almost always reconstructs
    # with a negative eigenvalue
    flagged = []
    for seed in range(10):
        cr = simulate_counts(bell_density(), ps, 20, seed=seed)
        rec = linear_reconstruct(cr, ps)
        flagged.append(cr.projected)
        assert np.linalg.eigvalsh(rec.m).min() > -1e-12
    assert any(flagged)


def test_mixed_state_not_projected_at_high_counts(ps):
    cr = simulate_counts(maximally_mixed(), ps, 1_000_000, seed=3)
    linear_reconstruct(cr, ps)
    assert not cr.projected


@pytest.mark.parametrize("mean", [0.5, 4.0, 25.0, 200.0])
def test_poisson_moments(mean):
    rng = np.random.Generator(np.random.PCG64(7))
    x = np.array([_poisson(rng, mean) for _ in range(20000)])
    assert x.mean() == pytest.approx(mean, rel=0.05, abs=0.02)
    assert x.var() == pytest.approx(mean, rel=0.08, abs=0.03)


def test_poisson_zero_mean():
    assert _poisson(np.random.Generator(np.random.PCG64(0)), 0.0) == 0


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=40))
def test_mean_std_order_independent(xs):
    a = _mean_std(xs)
    b = _mean_std(list(reversed(xs)))
    assert a == b


def test_mc_error_reproducible(ps):
    a = mc_error(bell_density(), ps, 10_000, trials=5, seed=11, with_chsh=False)
    b = mc_error(bell_density(), ps, 10_000, trials=5, seed=11, with_chsh=False)
    assert np.array_equal(a.concurrences, b.concurrences)
    assert math.isnan(a.s_mean)


def test_concurrence_error_scales_as_inverse_sqrt_n(ps):
    stds = []
    for N in (1_000, 100_000):
        stds.append(mc_error(bell_density(), ps, N, trials=60, seed=5, with_chsh=False).concurrence_std)
    ratio = stds[0] / stds[1]
    assert 10 / 1.5 < ratio < 10 * 1.5


def test_jitter_degrades_bell(ps):
    clean = mc_error(bell_density(), ps, 1_000_000, trials=10, seed=2, with_chsh=False)
    shaky = mc_error(bell_density(), ps, 1_000_000, trials=10, seed=2, angle_jitter_deg=3.0,
                     with_chsh=False)
    assert shaky.concurrence_mean < clean.concurrence_mean
    assert concurrence(bell_density()) == pytest.approx(1.0)
