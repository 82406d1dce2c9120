import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cbwcs.errors import InvalidInputError
from cbwcs.waveform import (CsfParams, SampledSignal, SymbolWindow, basis_pulse,
                            calibrate_decision_index, decision_offset_profile, extract_windows,
                            matched_filter, pulse_samples, synthesize_baseband, window_matrix)

LN2 = math.log(2.0)
CONT = CsfParams()
PRINTED = CsfParams(pulse_form="printed")


def pulse_by_hand(t, f=1.0, beta=LN2, sign=+1):
    w = 2 * math.pi * f
    osc = math.cos(w * t) - beta / w * math.sin(w * t)
    if t < 0:
        return (1 - math.exp(-beta / f)) * math.exp(beta * t) * osc
    if t < 1 / f:
        return 1 - math.exp(sign * beta * (t - 1 / f)) * osc
    return 0.0


def test_params_derive_omega():
    p = CsfParams(f=2.5)
    assert p.omega == 2 * math.pi * 2.5
    with pytest.raises(InvalidInputError):
        CsfParams(f=0)
    with pytest.raises(InvalidInputError):
        CsfParams(beta=-1)
    with pytest.raises(InvalidInputError):
        CsfParams(pulse_form="other")


def test_pulse_zero_after_one_period():
    t = np.linspace(1.0, 5.0, 1001)
    assert np.all(basis_pulse(t, CONT) == 0.0)
    assert basis_pulse(2.0, PRINTED) == 0.0


def test_pulse_continuous_at_period_end():
    for p in (CONT, PRINTED):
        assert abs(basis_pulse(1 - 1e-6, p)) < 1e-4


def test_printed_pulse_at_origin_is_minus_one():
    assert basis_pulse(0.0, PRINTED) == pytest.approx(1 - math.exp(LN2), abs=1e-12)
    assert basis_pulse(0.0, PRINTED) == pytest.approx(-1.0, abs=1e-12)


def test_continuous_pulse_has_no_jump_at_origin():
    left = basis_pulse(-1e-9, CONT)
    assert basis_pulse(0.0, CONT) == pytest.approx(left, abs=1e-6)
    assert left == pytest.approx(0.5, abs=1e-6)


def test_pulse_before_origin():
    assert basis_pulse(-1.0, CONT) == pytest.approx(0.25, abs=1e-12)
    assert basis_pulse(-1.0, PRINTED) == pytest.approx(0.25, abs=1e-12)


@given(st.floats(-8, 3, allow_nan=False))
def test_pulse_matches_hand_evaluation(t):
    assert basis_pulse(t, CONT) == pytest.approx(pulse_by_hand(t), abs=1e-12)
    assert basis_pulse(t, PRINTED) == pytest.approx(pulse_by_hand(t, sign=-1), abs=1e-12)


def test_pulse_vectorised_shape():
    t = np.linspace(-2, 2, 7).reshape(7, 1)
    assert basis_pulse(t, CONT).shape == (7, 1)


def test_synthesis_single_symbol_equals_pulse():
    sig = synthesize_baseband([1.0], CONT)
    pulse, j0 = pulse_samples(CONT)
    seg = sig.samples[sig.origin_offset + j0:sig.origin_offset + j0 + pulse.size]
    np.testing.assert_allclose(seg, pulse, atol=1e-12)


def test_synthesis_two_symbols_against_double_sum():
    s = np.array([1.0, 1.0])
    sig = synthesize_baseband(s, CONT)
    dt = 1 / 16
    for k in range(0, len(sig), 7):
        t = (k - sig.origin_offset) * dt
        want = sum(sn * pulse_by_hand(t - n) if t - n >= -8 else 0.0 for n, sn in enumerate(s))
        assert sig.samples[k] == pytest.approx(want, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.sampled_from([-1.0, 1.0]), min_size=1, max_size=40))
def test_synthesis_is_odd(symbols):
    a = synthesize_baseband(symbols, CONT).samples
    b = synthesize_baseband([-x for x in symbols], CONT).samples
    np.testing.assert_allclose(a + b, 0.0, atol=1e-12)


def test_synthesis_length_and_errors():
    sig = synthesize_baseband(np.ones(5), CONT, guard_symbols=10)
    assert len(sig) % 16 == 0 and len(sig) == (5 + 20) * 16
    with pytest.raises(InvalidInputError):
        synthesize_baseband([], CONT)
    with pytest.raises(InvalidInputError):
        synthesize_baseband([1, 0, 1], CONT)
    with pytest.raises(InvalidInputError):
        synthesize_baseband([1], CONT, guard_symbols=3)


def test_matched_filter_zero_and_linearity():
    rng = np.random.default_rng(3)
    z = SampledSignal(np.zeros(400))
    assert np.all(matched_filter(z, CONT).samples == 0)
    r1, r2 = rng.standard_normal(400), rng.standard_normal(400)
    a, b = 1.7, -0.3
    lhs = matched_filter(SampledSignal(a * r1 + b * r2), CONT).samples
    rhs = (a * matched_filter(SampledSignal(r1), CONT).samples
           + b * matched_filter(SampledSignal(r2), CONT).samples)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_matched_filter_peak_is_pulse_energy():
    # direct correlation at zero lag is dt * sum p^2
    sig = synthesize_baseband([1.0], CONT, guard_symbols=12)
    y = matched_filter(sig, CONT)
    pulse, _ = pulse_samples(CONT)
    assert y.samples[y.origin_offset] == pytest.approx(np.dot(pulse, pulse) / 16, rel=1e-12)
    assert y.origin_offset == sig.origin_offset


def test_windows_partition_stream():
    s = np.random.default_rng(0).choice([-1.0, 1.0], 30)
    y = matched_filter(synthesize_baseband(s, CONT), CONT)
    w = extract_windows(y, 30)
    assert len(w) == 30 and all(len(x.values) == 16 for x in w)
    start = y.origin_offset - 7
    np.testing.assert_array_equal(np.concatenate([x.values for x in w]), y.samples[start:start + 480])
    assert extract_windows(y, 0) == []
    with pytest.raises(InvalidInputError):
        window_matrix(y, 1000)


def test_symbol_window_validation():
    assert SymbolWindow(np.arange(16.0)).y_max == 7.0
    with pytest.raises(InvalidInputError):
        SymbolWindow(np.zeros(16), decision_index=17)


def test_decision_index_calibration_is_eight():
    assert calibrate_decision_index(CONT) == 8


@pytest.mark.parametrize("seed", range(5))
def test_decision_index_independent_of_content(seed):
    assert calibrate_decision_index(CONT, seed=seed) == 8


def test_per_symbol_peaks_concentrate_at_decision_index():
    # neighbour ISI moves the magnitude peak for a minority of symbols only
    _, peaks = decision_offset_profile(CONT, n_symbols=1000)
    assert np.argmax(peaks) == 7
    assert peaks[7] / peaks.sum() > 0.9


def test_single_path_decision_sign_matches_symbol():
    s = np.random.default_rng(1).choice([-1.0, 1.0], 2000)
    y = matched_filter(synthesize_baseband(s, CONT), CONT)
    dec = window_matrix(y, s.size)[:, 7]
    assert np.mean(np.sign(dec) == s) > 0.99
