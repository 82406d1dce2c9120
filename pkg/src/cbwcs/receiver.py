"""Detection pipelines and least-squares channel estimation.

Five detectors share the matched-filter windows of a frame:

* ``zero``        sign of the decision sample
* ``suboptimal``  decision feedback against the past-ISI threshold
* ``method1``     scalar ESN predicts the next decision sample, whose sign is
                  combined with the decoded past into a threshold
* ``method2``     16-input ESN maps each window straight to a threshold
* ``mmse``        symbol-spaced linear MMSE equaliser, then sign
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from . import esn, kernels
from .channel import MultipathChannel, Tap
from .errors import (DesignFailedError, EstimationFailedError, InvalidInputError,
                     MisconfigurationError)
from .threshold import IsiTable, decision_response
from .waveform import CsfParams, SampledSignal, SymbolWindow

METHODS = ("zero", "suboptimal", "method1", "method2", "mmse")
PRUNE_FRACTION = 0.05


@dataclass(frozen=True)
class DetectionMethod:
    tag: str

    def __post_init__(self):
        if self.tag not in METHODS:
            raise InvalidInputError(f"unknown detection method {self.tag!r}; expected one of {METHODS}")


def decode_symbol(window: SymbolWindow | float, theta: float) -> float:
    """Sign of ``y_max - theta``; an exact tie decodes as +1."""
    y = window.y_max if isinstance(window, SymbolWindow) else float(window)
    return 1.0 if y >= theta else -1.0


# -- channel estimation ----------------------------------------------------

@dataclass(frozen=True)
class ChannelEstimate:
    """Surviving LS taps as ``(alpha_hat, tau_hat)`` with tau in symbol periods."""

    taps: tuple[tuple[float, float], ...]
    residual: float
    noise_variance: float = 0.0     # mean squared residual per sample
    dense: np.ndarray | None = None

    def to_channel(self) -> MultipathChannel:
        if not self.taps or self.taps[0][1] != 0.0 or self.taps[0][0] <= 0:
            raise EstimationFailedError(
                f"estimate has no positive reference tap at zero delay: {self.taps}")
        return MultipathChannel(tuple(Tap(a, t) for a, t in self.taps))


def ls_channel_estimate(pilot_waveform: SampledSignal, received: SampledSignal,
                        max_delay: int, rows: slice | None = None, f: float = 1.0,
                        prune: float = PRUNE_FRACTION, tap_spacing: int = 1) -> ChannelEstimate:
    """Fit taps ``h[d]`` for d = 0, spacing, ... <= max_delay with ``received ~ pilot * h``.

    ``rows`` restricts the fit to samples where only pilot symbols contribute.
    Taps below ``prune * max|h|`` are zeroed. The pulse is smooth on the
    sample grid, so with ``tap_spacing = 1`` the normal equations are badly
    conditioned and noise is amplified by orders of magnitude; a coarser
    delay grid keeps the estimate usable at low SNR.
    """
    x = pilot_waveform.samples
    r = received.samples
    if x.size != r.size:
        raise InvalidInputError("pilot waveform and received signal must share a grid")
    if max_delay < 0:
        raise InvalidInputError("max_delay must be non-negative")
    if tap_spacing < 1:
        raise InvalidInputError("tap_spacing must be >= 1")
    lo, hi, _ = (rows or slice(None)).indices(r.size)
    lo = max(lo, max_delay)
    if hi - lo <= max_delay:
        raise EstimationFailedError("not enough pilot samples for the requested span")
    k = np.arange(lo, hi)
    delays = np.arange(0, max_delay + 1, tap_spacing)
    X = x[k[:, None] - delays[None, :]]
    y = r[lo:hi]
    G = X.T @ X
    try:
        factor = scipy.linalg.cho_factor(G)
    except np.linalg.LinAlgError:
        raise EstimationFailedError("pilot matrix is rank deficient") from None
    if np.linalg.cond(G) > 1e12:
        raise EstimationFailedError("pilot matrix is rank deficient")
    h = scipy.linalg.cho_solve(factor, X.T @ y)
    err = y - X @ h
    resid = float(np.linalg.norm(err) / max(np.linalg.norm(y), 1e-300))
    peak = np.max(np.abs(h))
    keep = np.abs(h) >= prune * peak
    ns = pilot_waveform.oversampling
    taps = tuple((float(h[j]), float(delays[j]) / (f * ns)) for j in np.flatnonzero(keep))
    return ChannelEstimate(taps, resid, float(np.mean(err ** 2)), h)


# -- MMSE equaliser ----------------------------------------------------------

@dataclass(frozen=True)
class EqualizerTaps:
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float).ravel()
        if c.size % 2 == 0:
            raise InvalidInputError("equaliser length must be odd")
        object.__setattr__(self, "coefficients", c)

    @property
    def length(self) -> int:
        return self.coefficients.size

    def apply(self, y: np.ndarray) -> np.ndarray:
        """``z[n] = sum_j c[j] y[n + j - center]`` with zero padding."""
        c = self.coefficients
        half = c.size // 2
        return np.convolve(np.asarray(y, dtype=float), c[::-1], mode="full")[half:half + len(y)]


def symbol_response(channel: MultipathChannel | ChannelEstimate, params: CsfParams,
                    span: int = 8) -> np.ndarray:
    """Decision-sample response to ``s[n+i]`` for i = -span..span."""
    if isinstance(channel, ChannelEstimate):
        channel = channel.to_channel()
    return decision_response(channel, params, span)


def mmse_equalizer_design(response, noise_variance: float, n_taps: int = 15,
                          params: CsfParams | None = None) -> EqualizerTaps:
    """Linear MMSE FIR for a symbol-spaced response.

    ``response`` is an odd-length array centred on offset 0 whose entry at
    offset ``i`` multiplies ``s[n+i]`` in the decision sample ``y[n]``. A
    :class:`ChannelEstimate` or channel is converted with
    :func:`symbol_response` first.
    Solves ``(H H^T + sigma^2 I) w = H e_0`` where row ``k`` of ``H`` maps the
    symbols onto ``y[n + k - center]``.
    """
    if isinstance(response, (ChannelEstimate, MultipathChannel)):
        response = symbol_response(response, params or CsfParams(), span=n_taps // 2 + 1)
    h = np.asarray(response, dtype=float).ravel()
    if h.size % 2 == 0:
        raise InvalidInputError("response must have odd length (centred)")
    if n_taps < 1 or n_taps % 2 == 0:
        raise InvalidInputError("n_taps must be odd and positive")
    if noise_variance < 0:
        raise InvalidInputError("noise_variance must be non-negative")
    hspan = h.size // 2
    wspan = n_taps // 2
    sspan = hspan + wspan
    # y[n+k] = sum_i h[i] s[n+k+i]  ->  column m = k + i (symbol offset)
    H = np.zeros((n_taps, 2 * sspan + 1))
    for row, k in enumerate(range(-wspan, wspan + 1)):
        for i in range(-hspan, hspan + 1):
            H[row, k + i + sspan] = h[i + hspan]
    target = H[:, sspan]
    G = H @ H.T + noise_variance * np.eye(n_taps)
    try:
        w = scipy.linalg.solve(G, target, assume_a="sym")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning):
        raise DesignFailedError("MMSE design matrix is singular") from None
    if not np.all(np.isfinite(w)) or np.linalg.cond(G) > 1e14:
        raise DesignFailedError("MMSE design matrix is singular")
    return EqualizerTaps(w)


# -- per-method contexts -----------------------------------------------------

@dataclass(frozen=True)
class SuboptimalContext:
    table: IsiTable
    history: np.ndarray     # P symbols before the first window, oldest first


@dataclass(frozen=True)
class Method1Context:
    """Scalar ESN plus what the threshold step needs.

    ``warmup`` windows (e.g. the frame pilot) are observed before the first
    decoded window so the reservoir starts in step with the stream. ``gain``
    is the AGC factor applied to samples before they reach the reservoir.
    """

    weights: esn.EsnWeights
    table: IsiTable
    history: np.ndarray
    gain: float = 1.0
    warmup: np.ndarray | None = None
    horizon: int = 8


@dataclass(frozen=True)
class Method2Context:
    """Trained 16-input ESN and its state just before the first window."""

    weights: esn.EsnWeights
    state: esn.EsnState
    gain: float = 1.0


@dataclass(frozen=True)
class MmseContext:
    taps: EqualizerTaps


_CONTEXT_TYPES = {
    "suboptimal": SuboptimalContext,
    "method1": Method1Context,
    "method2": Method2Context,
    "mmse": MmseContext,
}


def _as_matrix(windows) -> tuple[np.ndarray, int]:
    if isinstance(windows, np.ndarray):
        return np.ascontiguousarray(windows, dtype=float), None
    windows = list(windows)
    if not windows:
        return np.zeros((0, 0)), None
    di = windows[0].decision_index
    return np.ascontiguousarray(np.vstack([w.values for w in windows])), di


def detect_frame(windows: Sequence[SymbolWindow] | np.ndarray, method: DetectionMethod | str,
                 context=None, decision_index: int = 8) -> np.ndarray:
    """Decode a run of symbol windows with one detection method.

    ``windows`` is a list of :class:`SymbolWindow` or an ``(n, Ns)`` array.
    """
    tag = method.tag if isinstance(method, DetectionMethod) else DetectionMethod(method).tag
    mat, di = _as_matrix(windows)
    if di is not None:
        decision_index = di
    n = mat.shape[0]
    if n == 0:
        return np.zeros(0)
    expected = _CONTEXT_TYPES.get(tag)
    if expected is not None and not isinstance(context, expected):
        raise MisconfigurationError(
            f"method {tag!r} needs a {expected.__name__}, got {type(context).__name__}")
    y = np.ascontiguousarray(mat[:, decision_index - 1])

    if tag == "zero":
        return np.where(y >= 0.0, 1.0, -1.0)

    if tag == "suboptimal":
        ctx = context
        hist = _check_history(ctx.history, ctx.table.past_depth)
        return kernels.feedback_decode(y, np.ascontiguousarray(ctx.table.past), hist)

    if tag == "method1":
        ctx = context
        if ctx.weights.K != 1 or not ctx.weights.trained:
            raise MisconfigurationError("method1 needs a trained single-input ESN")
        if ctx.table.future_depth < 1:
            raise MisconfigurationError("method1 table needs future_depth >= 1")
        hist = _check_history(ctx.history, ctx.table.past_depth)
        blocks = [mat] if ctx.warmup is None else [np.asarray(ctx.warmup, dtype=float), mat]
        first = 0 if ctx.warmup is None else blocks[0].shape[0]
        stream = np.ascontiguousarray(np.vstack(blocks).ravel() * ctx.gain)
        dec, _ = kernels.method1_decode(
            *ctx.weights.kernel_args(), ctx.weights.w_out, stream, mat.shape[1],
            decision_index, first, hist, np.ascontiguousarray(ctx.table.past * ctx.gain),
            float(ctx.table.future[0] * ctx.gain), ctx.horizon)
        return dec

    if tag == "method2":
        ctx = context
        thetas, _ = esn.predict_sequence(ctx.weights, mat * ctx.gain, ctx.state)
        return np.where(y * ctx.gain >= thetas, 1.0, -1.0)

    # mmse
    z = context.taps.apply(y)
    return np.where(z >= 0.0, 1.0, -1.0)


def _check_history(history, P):
    h = np.asarray(history, dtype=float).ravel()
    if h.size != P:
        raise MisconfigurationError(f"decision history needs {P} symbols, got {h.size}")
    return np.ascontiguousarray(h)
