import math

import numpy as np
import pytest

from cbwcs.channel import (FadingLaw, MultipathChannel, NoiseSpec, Tap, TimeVaryingSpec,
                           add_awgn, apply_multipath, channel_from_fading, delay_in_samples,
                           draw_frame_gamma, energy_per_bit, noise_sigma)
from cbwcs.errors import InvalidInputError
from cbwcs.waveform import SampledSignal


def impulse(n=200, at=10):
    x = np.zeros(n)
    x[at] = 1.0
    return SampledSignal(x)


def test_channel_invariants():
    with pytest.raises(InvalidInputError):
        MultipathChannel(())
    with pytest.raises(InvalidInputError):
        MultipathChannel.from_pairs([(1.0, 0.5)])
    with pytest.raises(InvalidInputError):
        MultipathChannel.from_pairs([(1.0, 0.0), (0.5, 1.0), (0.2, 1.0)])
    with pytest.raises(InvalidInputError):
        MultipathChannel.from_pairs([(0.0, 0.0)])
    with pytest.raises(InvalidInputError):
        MultipathChannel.from_pairs([(1.0, 0.0), (math.inf, 1.0)])
    ch = MultipathChannel.from_pairs([(1.0, 0.0), (0.5, 1.0)])
    assert ch.L == 2
    np.testing.assert_array_equal(ch.alphas, [1.0, 0.5])


def test_fading_law():
    assert channel_from_fading(1, FadingLaw(3.0)).taps == (Tap(1.0, 0.0),)
    ch = channel_from_fading(2, FadingLaw(0.6))
    assert ch.alphas[1] == pytest.approx(math.exp(-0.6))
    assert ch.alphas[1] == pytest.approx(0.5488, abs=1e-4)
    far = channel_from_fading(3, FadingLaw(200.0))
    assert np.all(far.alphas[1:] < 1e-80)
    with pytest.raises(InvalidInputError):
        channel_from_fading(2, FadingLaw(0.6), delays=[0.0, 0.0])
    with pytest.raises(InvalidInputError):
        FadingLaw(0.0)


def test_identity_channel():
    x = SampledSignal(np.random.default_rng(0).standard_normal(64))
    out = apply_multipath(x, MultipathChannel.from_pairs([(1.0, 0.0)]))
    np.testing.assert_array_equal(out.samples, x.samples)


def test_impulse_probe_recovers_taps():
    ch = MultipathChannel.from_pairs([(1.0, 0.0), (0.5488, 1.0), (-0.2, 2.25)])
    y = apply_multipath(impulse(), ch).samples
    nz = np.flatnonzero(y)
    np.testing.assert_array_equal(nz, [10, 26, 46])
    np.testing.assert_allclose(y[nz], [1.0, 0.5488, -0.2])


def test_multipath_linearity():
    rng = np.random.default_rng(1)
    a, b = rng.standard_normal(100), rng.standard_normal(100)
    ch = channel_from_fading(2, FadingLaw(0.6))
    lhs = apply_multipath(SampledSignal(2 * a - b), ch).samples
    rhs = 2 * apply_multipath(SampledSignal(a), ch).samples - apply_multipath(SampledSignal(b), ch).samples
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)
    double = apply_multipath(SampledSignal(a), ch.scaled(2.0)).samples
    np.testing.assert_allclose(double, 2 * apply_multipath(SampledSignal(a), ch).samples)


def test_off_grid_delay_names_tap():
    ch = MultipathChannel.from_pairs([(1.0, 0.0), (0.5, 0.03)])
    with pytest.raises(InvalidInputError, match="tap 1"):
        apply_multipath(impulse(), ch)
    assert delay_in_samples(0.25, 1.0, 16) == 4


def test_noise_free_is_identity():
    x = SampledSignal(np.ones(10))
    assert add_awgn(x, NoiseSpec(), 1.0, np.random.default_rng(0)) is x


def test_noise_is_seeded():
    x = SampledSignal(np.zeros(50))
    a = add_awgn(x, NoiseSpec(3.0), 1.0, np.random.default_rng(9)).samples
    b = add_awgn(x, NoiseSpec(3.0), 1.0, np.random.default_rng(9)).samples
    np.testing.assert_array_equal(a, b)


def test_noise_variance_at_10db():
    n = 10 ** 6
    x = SampledSignal(np.zeros(n))
    out = add_awgn(x, NoiseSpec(10.0), 1.0, np.random.default_rng(2)).samples
    sigma2 = (1.0 / 10.0) * (16 / 2)
    assert noise_sigma(NoiseSpec(10.0), 1.0, 1.0, 16) ** 2 == pytest.approx(sigma2)
    assert np.var(out) == pytest.approx(sigma2, rel=0.02)
    assert len(out) == n


def test_energy_per_bit():
    x = SampledSignal(np.ones(32))
    assert energy_per_bit(x, 2) == pytest.approx(1.0)


def test_noise_spec_validation():
    assert NoiseSpec().noise_free
    with pytest.raises(InvalidInputError):
        NoiseSpec(math.nan)


def test_frame_gamma_draws():
    assert draw_frame_gamma(TimeVaryingSpec(0.6, 0.6), np.random.default_rng(0)) == 0.6
    rng = np.random.default_rng(5)
    g = np.array([draw_frame_gamma(TimeVaryingSpec(), rng) for _ in range(100_000)])
    assert g.min() >= 0.3 and g.max() <= 0.9
    assert abs(g.mean() - 0.6) < 0.01
    with pytest.raises(InvalidInputError):
        TimeVaryingSpec(0.9, 0.3)
