"""Closed-form ISI coefficients and decoding thresholds.

``I[l, i]`` is the contribution of symbol ``n+i`` arriving over path ``l`` to
the matched-filter decision sample of symbol ``n``. The optimal threshold is
the sum of these contributions over the (truncated) neighbourhood, weighted by
the neighbour symbols.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import MultipathChannel, delay_in_samples
from .errors import InvalidInputError
from .waveform import (DEFAULT_OVERSAMPLING, TAIL_SYMBOLS, CsfParams, matched_filter,
                       synthesize_baseband)


@dataclass(frozen=True)
class IsiConstants:
    A: float
    B: float

    @classmethod
    def for_params(cls, params: CsfParams) -> "IsiConstants":
        w, b, f = params.omega, params.beta, params.f
        A = (w * w - 3 * b * b) * f / (4 * b * (w * w + b * b))
        B = (3 * w * w - b * b) * f / (4 * w * (w * w + b * b))
        return cls(A, B)


@dataclass(frozen=True)
class ThresholdConfig:
    past_depth: int = 3
    future_depth: int = 3

    def __post_init__(self):
        if self.past_depth < 0 or self.future_depth < 0:
            raise InvalidInputError("depths must be non-negative")
        if self.past_depth + self.future_depth < 1:
            raise InvalidInputError("past_depth + future_depth must be >= 1")


def lag_response(lag, params: CsfParams, trig_angle=None):
    """Two-branch closed form evaluated at ``|lag|`` (unit path gain).

    ``trig_angle`` overrides the angle fed to cos/sin; by default it is
    ``omega*|lag|``. Vectorised over ``lag``.
    """
    f, beta, omega = params.f, params.beta, params.omega
    k = IsiConstants.for_params(params)
    x = np.abs(np.asarray(lag, dtype=float))
    ang = omega * x if trig_angle is None else np.broadcast_to(trig_angle, x.shape)
    cos, sin = np.cos(ang), np.sin(ang)
    em, ep = math.exp(-beta / f), math.exp(beta / f)
    C = np.exp(-beta * x)
    far = C * (2 - em - ep) * (k.A * cos + k.B * sin)
    near = (k.A * (C * (2 - em) - em / C) * cos
            + k.B * (C * (2 - em) + em / C) * sin
            + 1 - x * f)
    # tie at |lag| == 1/f goes to the first branch
    out = np.where(x * f >= 1.0, far, near)
    return float(out) if out.ndim == 0 else out


def isi_coefficient(l: int, i: int, channel: MultipathChannel, params: CsfParams,
                    trig: str = "lag") -> float:
    """ISI coefficient of symbol offset ``i`` over path ``l``.

    ``trig="lag"`` takes the oscillatory terms at ``omega*|tau_l + i/f|``;
    ``trig="delay"`` takes them at ``omega*tau_l`` exactly as the formula is
    usually printed. The two agree whenever ``tau_l + i/f >= 0``; for negative
    lags only the ``lag`` form equals the matched-filter response.
    """
    if i == 0:
        raise InvalidInputError("symbol offset i must be non-zero")
    if not 0 <= l < channel.L:
        raise InvalidInputError(f"path index {l} outside 0..{channel.L - 1}")
    tap = channel.taps[l]
    lag = tap.tau + i / params.f
    if trig == "lag":
        angle = None
    elif trig == "delay":
        angle = params.omega * tap.tau
    else:
        raise InvalidInputError(f"unknown trig mode {trig!r}")
    return tap.alpha * lag_response(lag, params, angle)


@dataclass(frozen=True)
class IsiTable:
    """Coefficients ``coef[l, i + P]`` for i in [-P, F]; the i = 0 column is 0."""

    coef: np.ndarray
    past_depth: int
    future_depth: int

    def entry(self, l: int, i: int) -> float:
        if i == 0 or not -self.past_depth <= i <= self.future_depth:
            raise KeyError((l, i))
        return float(self.coef[l, i + self.past_depth])

    @property
    def L(self) -> int:
        return self.coef.shape[0]

    @property
    def past(self) -> np.ndarray:
        """``past[k-1] = sum_l I[l, -k]`` for k = 1..P."""
        P = self.past_depth
        return self.coef[:, :P].sum(axis=0)[::-1].copy()

    @property
    def future(self) -> np.ndarray:
        """``future[k-1] = sum_l I[l, k]`` for k = 1..F."""
        P = self.past_depth
        return self.coef[:, P + 1:].sum(axis=0).copy()

    def kernel(self) -> np.ndarray:
        """Path-summed coefficients over i = -P..F (zero at i = 0)."""
        return self.coef.sum(axis=0)


def build_isi_table(channel: MultipathChannel, params: CsfParams,
                    config: ThresholdConfig = ThresholdConfig()) -> IsiTable:
    P, F = config.past_depth, config.future_depth
    offsets = np.arange(-P, F + 1)
    coef = np.zeros((channel.L, offsets.size))
    nz = offsets != 0
    for l, tap in enumerate(channel.taps):
        coef[l, nz] = tap.alpha * lag_response(tap.tau + offsets[nz] / params.f, params)
    coef.setflags(write=False)
    return IsiTable(coef, P, F)


def decision_response(channel: MultipathChannel, params: CsfParams, span: int) -> np.ndarray:
    """Symbol-spaced response at the decision sample, offsets -span..span,
    including the i = 0 (own-symbol) term."""
    offsets = np.arange(-span, span + 1)
    h = np.zeros(offsets.size)
    for tap in channel.taps:
        h += tap.alpha * lag_response(tap.tau + offsets / params.f, params)
    return h


def _check_len(name, values, n):
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size != n:
        raise InvalidInputError(f"{name} needs exactly {n} symbols, got {arr.size}")
    return arr


def optimal_threshold(past, future, table: IsiTable) -> float:
    """``past`` is s[n-P]..s[n-1], ``future`` is s[n+1]..s[n+F]."""
    p = _check_len("past", past, table.past_depth)
    q = _check_len("future", future, table.future_depth)
    return float(np.dot(p[::-1], table.past) + np.dot(q, table.future))


def suboptimal_threshold(past, table: IsiTable) -> float:
    p = _check_len("past", past, table.past_depth)
    return float(np.dot(p[::-1], table.past))


def one_future_threshold(past, fut1, table: IsiTable) -> float:
    p = _check_len("past", past, table.past_depth)
    if table.future_depth < 1:
        raise InvalidInputError("table has no future coefficients")
    return float(np.dot(p[::-1], table.past) + float(fut1) * table.future[0])


def genie_thresholds(symbols, table: IsiTable) -> np.ndarray:
    """Optimal thresholds from the true neighbours; out-of-frame symbols are 0."""
    s = np.asarray(symbols, dtype=float).ravel()
    P, F = table.past_depth, table.future_depth
    padded = np.concatenate([np.zeros(P), s, np.zeros(F)])
    k = table.kernel()
    # theta[n] = sum_{i=-P..F} s[n+i] k[i+P]
    out = np.zeros(s.size)
    for j in range(P + F + 1):
        if k[j] != 0.0:
            out += k[j] * padded[j:j + s.size]
    return out


def simulated_isi(tau: float, i: int, params: CsfParams,
                  oversampling: int = DEFAULT_OVERSAMPLING) -> float:
    """Contribution of a lone +1 symbol through a unit path at delay ``tau``
    to the decision sample ``i`` symbols earlier, measured on the sampled
    waveform after the matched filter."""
    guard = TAIL_SYMBOLS + abs(int(i)) + int(np.ceil(tau * params.f)) + 2
    x = synthesize_baseband(np.ones(1), params, oversampling, guard)
    d = delay_in_samples(tau, params.f, oversampling)
    r = np.zeros(len(x))
    r[d:] = x.samples[:len(x) - d]
    y = matched_filter(x.with_samples(r), params)
    return float(y.samples[y.origin_offset - int(i) * oversampling])


def closed_form_check(params: CsfParams, taus=(0.0, 0.25, 0.5, 1.0), span: int = 4,
                      oversampling: int = DEFAULT_OVERSAMPLING):
    """Compare the closed-form lag response with :func:`simulated_isi`.

    The closed form is scaled once so that it agrees with the simulation at
    (tau = 0, i = 1). Returns ``(scale, rows)`` with rows
    ``(tau, i, closed, simulated, abs_error)``.
    """
    def closed(tau, i):
        return float(lag_response(tau + i / params.f, params))

    scale = simulated_isi(0.0, 1, params, oversampling) / closed(0.0, 1)
    rows = []
    for tau in taus:
        for i in range(-span, span + 1):
            if i == 0:
                continue
            c = scale * closed(tau, i)
            s = simulated_isi(tau, i, params, oversampling)
            rows.append((tau, i, c, s, abs(c - s)))
    return scale, rows
