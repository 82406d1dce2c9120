"""Multipath propagation, exponential tap fading and AWGN."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError
from .waveform import SampledSignal

NOISE_FREE = "noise-free"


@dataclass(frozen=True)
class Tap:
    alpha: float
    tau: float  # in units of 1/f


@dataclass(frozen=True)
class MultipathChannel:
    taps: tuple[Tap, ...]

    def __post_init__(self):
        taps = tuple(self.taps)
        object.__setattr__(self, "taps", taps)
        if not taps:
            raise InvalidInputError("a channel needs at least one tap")
        if taps[0].tau != 0:
            raise InvalidInputError("first tap must have zero delay")
        for a, b in zip(taps, taps[1:]):
            if not b.tau > a.tau:
                raise InvalidInputError(
                    f"tap delays must be strictly increasing, got {a.tau} then {b.tau}"
                )
        if not all(math.isfinite(t.alpha) for t in taps):
            raise InvalidInputError("tap gains must be finite")
        if not taps[0].alpha > 0:
            raise InvalidInputError("reference tap gain must be positive")

    @classmethod
    def from_pairs(cls, pairs) -> "MultipathChannel":
        return cls(tuple(Tap(float(a), float(t)) for a, t in pairs))

    @property
    def L(self) -> int:
        return len(self.taps)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([t.alpha for t in self.taps])

    @property
    def taus(self) -> np.ndarray:
        return np.array([t.tau for t in self.taps])

    def scaled(self, factor: float) -> "MultipathChannel":
        return MultipathChannel(tuple(Tap(t.alpha * factor, t.tau) for t in self.taps))


@dataclass(frozen=True)
class FadingLaw:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise InvalidInputError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class NoiseSpec:
    ebn0_db: float | str = NOISE_FREE

    def __post_init__(self):
        if self.ebn0_db != NOISE_FREE and not math.isfinite(float(self.ebn0_db)):
            raise InvalidInputError(f"ebn0_db must be finite or {NOISE_FREE!r}")

    @property
    def noise_free(self) -> bool:
        return self.ebn0_db == NOISE_FREE


@dataclass(frozen=True)
class TimeVaryingSpec:
    gamma_low: float = 0.3
    gamma_high: float = 0.9

    def __post_init__(self):
        if not 0 < self.gamma_low <= self.gamma_high:
            raise InvalidInputError("need 0 < gamma_low <= gamma_high")


def default_delays(L: int) -> list[float]:
    """One symbol period per extra path."""
    return [float(l) for l in range(L)]


def channel_from_fading(L: int, law: FadingLaw, delays: Sequence[float] | None = None) -> MultipathChannel:
    if L < 1:
        raise InvalidInputError("L must be >= 1")
    delays = default_delays(L) if delays is None else list(delays)
    if len(delays) != L:
        raise InvalidInputError(f"expected {L} delays, got {len(delays)}")
    gains = [math.exp(-law.gamma * tau) if tau else 1.0 for tau in delays]
    return MultipathChannel.from_pairs(zip(gains, delays))


def delay_in_samples(tau: float, f: float, oversampling: int, atol: float = 1e-9) -> int:
    shift = tau * f * oversampling
    k = round(shift)
    if abs(shift - k) > atol:
        raise InvalidInputError(f"delay {tau} is not on the {oversampling}x sample grid")
    return int(k)


def apply_multipath(signal: SampledSignal, channel: MultipathChannel, f: float = 1.0) -> SampledSignal:
    """``out[k] = sum_l alpha_l * in[k - d_l]`` with integer sample delays."""
    x = signal.samples
    out = np.zeros_like(x)
    for idx, tap in enumerate(channel.taps):
        try:
            d = delay_in_samples(tap.tau, f, signal.oversampling)
        except InvalidInputError as exc:
            raise InvalidInputError(f"tap {idx}: {exc}") from None
        if d >= x.size:
            continue
        out[d:] += tap.alpha * x[:x.size - d]
    return signal.with_samples(out)


def energy_per_bit(signal: SampledSignal, n_bits: int, f: float = 1.0) -> float:
    dt = 1.0 / (f * signal.oversampling)
    return float(np.dot(signal.samples, signal.samples) * dt / n_bits)


def noise_sigma(spec: NoiseSpec, eb: float, f: float, oversampling: int) -> float:
    """Per-sample noise standard deviation for the requested Eb/N0."""
    if spec.noise_free:
        return 0.0
    n0 = eb / 10.0 ** (float(spec.ebn0_db) / 10.0)
    return math.sqrt(n0 * f * oversampling / 2.0)


def add_awgn(signal: SampledSignal, spec: NoiseSpec, energy_per_bit: float,
             rng: np.random.Generator, f: float = 1.0) -> SampledSignal:
    if spec.noise_free:
        return signal
    if not energy_per_bit > 0:
        raise InvalidInputError("energy_per_bit must be positive")
    sigma = noise_sigma(spec, energy_per_bit, f, signal.oversampling)
    return signal.with_samples(signal.samples + sigma * rng.standard_normal(len(signal)))


def draw_frame_gamma(spec: TimeVaryingSpec, rng: np.random.Generator) -> float:
    if spec.gamma_low == spec.gamma_high:
        return float(spec.gamma_low)
    return float(rng.uniform(spec.gamma_low, spec.gamma_high))
