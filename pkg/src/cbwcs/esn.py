"""Echo state network for decoding-threshold prediction.

Fixed random input, reservoir and feedback weights; only the linear readout
over ``[r; u]`` is trained, by ridge regression on teacher-forced states.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy.linalg

from . import kernels
from .errors import InvalidInputError, NotTrainedError, SingularMatrixError

WEIGHTS_FORMAT_VERSION = 1
PATTERN_BITS = 7
WASHOUT_SYMBOLS = 100


@dataclass(frozen=True)
class EsnConfig:
    N: int = 112
    K: int = 16
    sparsity: float = 0.02
    rho: float = 0.9
    ridge: float = 1e-6
    n_max: int = 996
    n0: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.N < 1 or self.K < 1:
            raise InvalidInputError("N and K must be positive")
        if not 0 < self.rho < 1:
            raise InvalidInputError("rho must lie in (0, 1)")
        if not 0 < self.sparsity <= 1:
            raise InvalidInputError("sparsity must lie in (0, 1]")
        if not 0 <= self.n0 < self.n_max:
            raise InvalidInputError("need 0 <= n0 < n_max")
        if not 0 <= self.ridge < 1:
            raise InvalidInputError("ridge must lie in [0, 1)")


@dataclass(frozen=True, eq=False)
class EsnWeights:
    w_in: np.ndarray        # (N, K)
    W: np.ndarray           # (N, N)
    w_fb: np.ndarray        # (N,)
    w_out: np.ndarray | None = None   # (N + K,)
    seed: int | None = None
    ridge: float | None = None
    _csr: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for name in ("w_in", "W", "w_fb"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.w_out is not None:
            out = np.ascontiguousarray(self.w_out, dtype=float).ravel()
            out.setflags(write=False)
            object.__setattr__(self, "w_out", out)
        if self._csr is None:
            rows, cols = np.nonzero(self.W)
            indptr = np.searchsorted(rows, np.arange(self.N + 1)).astype(np.int64)
            object.__setattr__(self, "_csr", (
                indptr, cols.astype(np.int64), np.ascontiguousarray(self.W[rows, cols])))

    @property
    def N(self) -> int:
        return self.w_in.shape[0]

    @property
    def K(self) -> int:
        return self.w_in.shape[1]

    @property
    def trained(self) -> bool:
        return self.w_out is not None

    def with_readout(self, w_out: np.ndarray, ridge: float | None = None) -> "EsnWeights":
        w_out = np.asarray(w_out, dtype=float).ravel()
        if w_out.size != self.N + self.K:
            raise InvalidInputError(f"readout needs {self.N + self.K} weights, got {w_out.size}")
        return replace(self, w_out=w_out, ridge=self.ridge if ridge is None else ridge)

    def kernel_args(self):
        indptr, indices, data = self._csr
        return self.w_in, indptr, indices, data, self.w_fb


@dataclass(frozen=True, eq=False)
class EsnState:
    r: np.ndarray
    last_output: float = 0.0

    @classmethod
    def zeros(cls, n: int) -> "EsnState":
        return cls(np.zeros(n), 0.0)


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """Row ``n`` of ``inputs`` is u(n); ``teachers[n]`` is its target."""

    inputs: np.ndarray
    teachers: np.ndarray

    def __post_init__(self):
        u = np.ascontiguousarray(self.inputs, dtype=float)
        t = np.ascontiguousarray(self.teachers, dtype=float).ravel()
        if u.ndim != 2 or u.shape[0] != t.size:
            raise InvalidInputError(f"inputs {u.shape} and teachers {t.shape} disagree")
        object.__setattr__(self, "inputs", u)
        object.__setattr__(self, "teachers", t)

    def __len__(self):
        return self.teachers.size


def spectral_radius(W: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(W))))


def init_weights(config: EsnConfig, rng: np.random.Generator | None = None) -> EsnWeights:
    """Uniform [-1, 1] weights; the reservoir is sparsified then rescaled to
    spectral radius ``rho``."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    N, K = config.N, config.K
    w_in = rng.uniform(-1.0, 1.0, size=(N, K))
    w_fb = rng.uniform(-1.0, 1.0, size=N)
    while True:
        W1 = rng.uniform(-1.0, 1.0, size=(N, N))
        W1 *= rng.random(size=(N, N)) < config.sparsity
        lam = spectral_radius(W1)
        if lam > 0:
            break
    W = (config.rho / lam) * W1
    return EsnWeights(w_in, W, w_fb, seed=config.seed)


def _check_vec(name, v, n):
    arr = np.asarray(v, dtype=float).ravel()
    if arr.size != n:
        raise InvalidInputError(f"{name} has {arr.size} entries, expected {n}")
    return arr


def update_state(state: EsnState, u, theta_prev: float, weights: EsnWeights) -> EsnState:
    r = _check_vec("state", state.r, weights.N)
    u = _check_vec("input", u, weights.K)
    r_new = np.tanh(weights.w_in @ u + weights.W @ r + weights.w_fb * float(theta_prev))
    return EsnState(r_new, float(theta_prev))


def teacher_states(weights: EsnWeights, training: TrainingSet,
                   r0: np.ndarray | None = None, theta0: float = 0.0) -> np.ndarray:
    """All teacher-forced states, shape (n, N); row n is r(n)."""
    if training.inputs.shape[1] != weights.K:
        raise InvalidInputError(f"inputs have {training.inputs.shape[1]} columns, ESN has K={weights.K}")
    r0 = np.zeros(weights.N) if r0 is None else _check_vec("r0", r0, weights.N)
    return kernels.esn_teacher_states(*weights.kernel_args(), training.inputs,
                                      training.teachers, r0, float(theta0))


def harvest_states(weights: EsnWeights, training: TrainingSet, washout: int,
                   r0: np.ndarray | None = None):
    """Collect ``R`` ((N+K) x (n - washout), states stacked over inputs) and
    the matching teacher row ``T``. Starts from r(0) = r0 (default 0) with
    theta(0) = 0."""
    if not 0 <= washout < len(training):
        raise InvalidInputError(f"washout {washout} must be below training length {len(training)}")
    states = teacher_states(weights, training, r0)
    R = np.vstack([states[washout:].T, training.inputs[washout:].T])
    return R, training.teachers[washout:].copy()


def train_readout(R: np.ndarray, T: np.ndarray, ridge: float) -> np.ndarray:
    """Ridge solution ``T R^T (R R^T + ridge I)^-1`` via a Cholesky solve."""
    R = np.asarray(R, dtype=float)
    T = np.asarray(T, dtype=float).ravel()
    if R.ndim != 2 or R.shape[1] == 0 or R.shape[1] != T.size:
        raise InvalidInputError(f"R {R.shape} and T {T.shape} are incompatible")
    G = R @ R.T
    G[np.diag_indices_from(G)] += ridge
    try:
        factor = scipy.linalg.cho_factor(G, check_finite=True)
    except np.linalg.LinAlgError:
        raise SingularMatrixError(
            "R R^T + ridge*I is singular; use a positive ridge regulariser"
        ) from None
    if ridge == 0 and np.linalg.cond(G) > 1e14:
        raise SingularMatrixError(
            "R R^T is numerically singular; use a positive ridge regulariser")
    return scipy.linalg.cho_solve(factor, R @ T)


def fit(weights: EsnWeights, training: TrainingSet, washout: int, ridge: float) -> EsnWeights:
    R, T = harvest_states(weights, training, washout)
    return weights.with_readout(train_readout(R, T, ridge), ridge)


def predict_threshold(state: EsnState, u, weights: EsnWeights):
    """One prediction step: update with the previous prediction as feedback,
    then read out over ``[r; u]``."""
    if not weights.trained:
        raise NotTrainedError("readout weights have not been trained")
    u = _check_vec("input", u, weights.K)
    new = update_state(state, u, state.last_output, weights)
    theta = float(weights.w_out @ np.concatenate([new.r, u]))
    return theta, EsnState(new.r, theta)


def predict_sequence(weights: EsnWeights, inputs: np.ndarray, state: EsnState | None = None):
    """Vectorised ``predict_threshold`` over rows of ``inputs``.

    Returns ``(thetas, final_state)``.
    """
    if not weights.trained:
        raise NotTrainedError("readout weights have not been trained")
    inputs = np.ascontiguousarray(inputs, dtype=float)
    if inputs.ndim != 2 or inputs.shape[1] != weights.K:
        raise InvalidInputError(f"inputs must be (n, {weights.K})")
    state = EsnState.zeros(weights.N) if state is None else state
    out, r = kernels.esn_predict(*weights.kernel_args(), weights.w_out, inputs,
                                 np.asarray(state.r, dtype=float), float(state.last_output))
    last = float(out[-1]) if out.size else state.last_output
    return out, EsnState(np.asarray(r), last)


def pattern_blocks(bits: int = PATTERN_BITS) -> np.ndarray:
    """All ``bits``-bit words in counting order as bipolar rows (MSB first)."""
    words = np.arange(2 ** bits)
    shifts = np.arange(bits - 1, -1, -1)
    return np.where((words[:, None] >> shifts) & 1, 1.0, -1.0)


def de_bruijn_bits(order: int = PATTERN_BITS) -> np.ndarray:
    """Binary De Bruijn sequence B(2, order) as bipolar symbols."""
    a = [0] * (2 * order)
    seq: list[int] = []

    def db(t, p):
        if t > order:
            if order % p == 0:
                seq.extend(a[1:p + 1])
        else:
            a[t] = a[t - p]
            db(t + 1, p)
            for j in range(a[t - p] + 1, 2):
                a[t] = j
                db(t + 1, t)

    db(1, 1)
    return np.where(np.array(seq) == 1, 1.0, -1.0)


def build_training_symbols(rng: np.random.Generator, de_bruijn: bool = False,
                           washout: int = WASHOUT_SYMBOLS, bits: int = PATTERN_BITS) -> np.ndarray:
    """Washout prefix of random symbols followed by every ``bits``-bit pattern.

    The default layout is 128 seven-symbol blocks in counting order (896
    symbols, 996 in total). ``de_bruijn=True`` swaps the blocks for a
    De Bruijn sequence, which visits every 7-symbol window once in 128 symbols.
    """
    prefix = rng.choice([-1.0, 1.0], size=washout)
    body = de_bruijn_bits(bits) if de_bruijn else pattern_blocks(bits).ravel()
    return np.concatenate([prefix, body])


def save_weights(weights: EsnWeights, path) -> None:
    """Write an ``.npz`` container tagged with ``WEIGHTS_FORMAT_VERSION``."""
    payload = {
        "format_version": np.array(WEIGHTS_FORMAT_VERSION),
        "dims": np.array([weights.N, weights.K]),
        "w_in": weights.w_in,
        "W": weights.W,
        "w_fb": weights.w_fb,
        "seed": np.array(-1 if weights.seed is None else weights.seed),
        "ridge": np.array(np.nan if weights.ridge is None else weights.ridge),
    }
    if weights.w_out is not None:
        payload["w_out"] = weights.w_out
    buf = io.BytesIO()
    np.savez(buf, **payload)
    Path(path).write_bytes(buf.getvalue())


def load_weights(path) -> EsnWeights:
    with np.load(Path(path), allow_pickle=False) as z:
        version = int(z["format_version"])
        if version != WEIGHTS_FORMAT_VERSION:
            raise InvalidInputError(f"unsupported weights format version {version}")
        N, K = (int(v) for v in z["dims"])
        seed = int(z["seed"])
        ridge = float(z["ridge"])
        weights = EsnWeights(
            z["w_in"], z["W"], z["w_fb"],
            w_out=z["w_out"] if "w_out" in z.files else None,
            seed=None if seed < 0 else seed,
            ridge=None if np.isnan(ridge) else ridge,
        )
    if (weights.N, weights.K) != (N, K):
        raise InvalidInputError("weights container dimensions are inconsistent")
    return weights


__all__ = [
    "EsnConfig", "EsnWeights", "EsnState", "TrainingSet", "init_weights", "update_state",
    "harvest_states", "train_readout", "fit", "predict_threshold", "predict_sequence",
    "build_training_symbols", "pattern_blocks", "de_bruijn_bits", "save_weights",
    "load_weights", "spectral_radius", "teacher_states",
]
