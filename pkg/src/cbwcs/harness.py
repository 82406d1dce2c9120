"""Monte Carlo BER experiments: frame assembly, per-SNR receivers, CSV output.

Every random draw comes from ``SeedSequence([master_seed, stream, index,
purpose])`` so a frame can be replayed on its own. Within a frame the
transmitted bits, channel and a unit-variance noise vector are drawn once;
each Eb/N0 point only rescales that noise, and every method decodes the same
received samples.
"""

from __future__ import annotations

import csv
import dataclasses
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from . import esn
from .channel import (NOISE_FREE, FadingLaw, MultipathChannel, NoiseSpec, TimeVaryingSpec,
                      apply_multipath, channel_from_fading, draw_frame_gamma, energy_per_bit,
                      noise_sigma)
from .errors import CbwcsError, ExperimentError, InvalidInputError, MisconfigurationError
from .receiver import (METHODS, Method1Context, Method2Context, MmseContext,
                       SuboptimalContext, detect_frame, ls_channel_estimate,
                       mmse_equalizer_design, symbol_response)
from .threshold import ThresholdConfig, build_isi_table, genie_thresholds
from .waveform import (DEFAULT_DECISION_INDEX, DEFAULT_OVERSAMPLING, TAIL_SYMBOLS, CsfParams,
                       SampledSignal, matched_filter, pulse_samples, synthesize_baseband,
                       window_matrix)

SCENARIOS = ("single-path", "multipath-known", "multipath-estimated", "time-varying")
RETRAIN_MODES = ("auto", "frame", "global")
CSV_HEADER = ("method", "ebn0_db", "bits", "errors", "ber")

# seed-sequence coordinates
_STREAM_FRAME, _STREAM_GLOBAL, _STREAM_RESERVOIR = 0, 1, 2
_PILOT, _DATA, _CHANNEL, _NOISE = 1, 2, 3, 4
_RES2, _RES1 = 10, 11


def _rng(master_seed: int, stream: int, index: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, stream, index, purpose]))


@dataclass(frozen=True)
class FrameLayout:
    total_bits: int = 2048
    pilot_bits: int = 996
    data_bits: int = 1052

    def __post_init__(self):
        if self.pilot_bits + self.data_bits != self.total_bits:
            raise InvalidInputError("pilot_bits + data_bits must equal total_bits")
        if self.pilot_bits < 1 or self.data_bits < 1:
            raise InvalidInputError("pilot and data sections must be non-empty")


def _grid_value(v):
    if isinstance(v, str):
        if v != NOISE_FREE:
            raise MisconfigurationError(f"grid entry {v!r} is neither a number nor {NOISE_FREE!r}")
        return v
    v = float(v)
    if not math.isfinite(v):
        raise MisconfigurationError("grid entries must be finite")
    return v


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything a BER run depends on. Field names double as config keys."""

    scenario: str = "multipath-known"
    L: int = 2
    gamma: float = 0.6
    delays: tuple[float, ...] | None = None
    gamma_low: float = 0.3
    gamma_high: float = 0.9
    known_channel: bool = False          # time-varying / estimated: use the true channel
    ebn0_grid: tuple = tuple(float(v) for v in range(0, 15, 2))
    methods: tuple[str, ...] = METHODS
    frames: int = 200
    master_seed: int = 0
    pilot_bits: int = 996
    data_bits: int = 1052
    past_depth: int = 4
    teacher_depth: int = 3
    esn_neurons: int = 112
    esn_sparsity: float = 0.02
    esn_rho: float = 0.9
    ridge: float = 1e-6
    washout: int = 100
    input_rms: float = 0.3
    de_bruijn: bool = False
    retrain: str = "auto"
    method1_neurons: int = 80
    method1_train_symbols: int = 484
    method1_washout: int = 100
    method1_horizon: int = 8
    method1_input_rms: float = 0.3
    mmse_taps: int = 15
    ls_max_delay: int = 48
    ls_prune: float = 0.05
    ls_tap_spacing: int = 4
    pulse_form: str = "continuous"
    oversampling: int = DEFAULT_OVERSAMPLING
    decision_index: int = DEFAULT_DECISION_INDEX
    workers: int = 1

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise MisconfigurationError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if self.retrain not in RETRAIN_MODES:
            raise MisconfigurationError(f"retrain must be one of {RETRAIN_MODES}")
        if self.frames < 1:
            raise MisconfigurationError("frames must be >= 1")
        if self.workers < 1:
            raise MisconfigurationError("workers must be >= 1")
        grid = tuple(_grid_value(v) for v in self.ebn0_grid)
        if not grid:
            raise MisconfigurationError("ebn0_grid must not be empty")
        if len(set(grid)) != len(grid):
            raise MisconfigurationError("ebn0_grid has duplicate points")
        object.__setattr__(self, "ebn0_grid", grid)
        methods = tuple(self.methods)
        if not methods:
            raise MisconfigurationError("methods must not be empty")
        for m in methods:
            if m not in METHODS:
                raise MisconfigurationError(f"unknown method {m!r}; expected one of {METHODS}")
        object.__setattr__(self, "methods", methods)
        if self.delays is not None:
            object.__setattr__(self, "delays", tuple(float(d) for d in self.delays))
            if len(self.delays) != self.L:
                raise MisconfigurationError(f"delays has {len(self.delays)} entries but L = {self.L}")
        if self.scenario == "single-path" and self.L != 1:
            object.__setattr__(self, "L", 1)
            object.__setattr__(self, "delays", None)
        if self.scenario == "time-varying":
            TimeVaryingSpec(self.gamma_low, self.gamma_high)
        else:
            FadingLaw(self.gamma)
        FrameLayout(self.pilot_bits + self.data_bits, self.pilot_bits, self.data_bits)
        if self.washout >= self.pilot_bits - self.teacher_depth:
            raise MisconfigurationError("washout leaves no pilot symbols to train on")
        if not 0 < self.method1_washout < self.method1_train_symbols <= self.pilot_bits:
            raise MisconfigurationError("need 0 < method1_washout < method1_train_symbols <= pilot_bits")
        if self.past_depth < 1 or self.teacher_depth < 1:
            raise MisconfigurationError("threshold depths must be >= 1")
        if self.mmse_taps < 1 or self.mmse_taps % 2 == 0:
            raise MisconfigurationError("mmse_taps must be odd")
        if not 1 <= self.decision_index <= self.oversampling:
            raise MisconfigurationError("decision_index must lie in 1..oversampling")
        CsfParams(pulse_form=self.pulse_form)

    @property
    def layout(self) -> FrameLayout:
        return FrameLayout(self.pilot_bits + self.data_bits, self.pilot_bits, self.data_bits)

    @property
    def estimated(self) -> bool:
        """Does the receiver work from an LS channel estimate?"""
        if self.known_channel:
            return False
        return self.scenario in ("multipath-estimated", "time-varying")

    @property
    def global_training(self) -> bool:
        if self.retrain != "auto":
            return self.retrain == "global"
        return self.scenario in ("single-path", "multipath-known")

    def replace(self, **changes) -> "ExperimentSpec":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class BerRecord:
    method: str
    ebn0_db: float
    bits_total: int
    bit_errors: int
    ber: float = field(default=None)

    def __post_init__(self):
        if self.bits_total < 0 or not 0 <= self.bit_errors <= max(self.bits_total, 0):
            raise InvalidInputError("need 0 <= bit_errors <= bits_total")
        ber = self.bit_errors / self.bits_total if self.bits_total else 0.0
        if self.ber is None:
            object.__setattr__(self, "ber", ber)
        elif self.ber != ber:
            raise InvalidInputError(f"ber {self.ber} != {self.bit_errors}/{self.bits_total}")


# -- frame construction -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class _Frame:
    symbols: np.ndarray
    channel: MultipathChannel
    clean: SampledSignal           # after multipath, before noise
    pilot_only: SampledSignal      # pilot symbols alone, same grid
    noise: np.ndarray              # unit-variance draw, scaled per SNR
    eb: float


def _channel_for(spec: ExperimentSpec, stream: int, index: int) -> MultipathChannel:
    if spec.scenario == "single-path":
        return MultipathChannel.from_pairs([(1.0, 0.0)])
    if spec.scenario == "time-varying":
        gamma = draw_frame_gamma(TimeVaryingSpec(spec.gamma_low, spec.gamma_high),
                                 _rng(spec.master_seed, stream, index, _CHANNEL))
    else:
        gamma = spec.gamma
    return channel_from_fading(spec.L, FadingLaw(gamma), spec.delays)


def _pilot_symbols(spec: ExperimentSpec, rng: np.random.Generator) -> np.ndarray:
    pilot = esn.build_training_symbols(rng, spec.de_bruijn, spec.washout)
    if pilot.size >= spec.pilot_bits:
        return pilot[:spec.pilot_bits]
    return np.concatenate([pilot, rng.choice([-1.0, 1.0], size=spec.pilot_bits - pilot.size)])


def build_frame(spec: ExperimentSpec, index: int, stream: int = _STREAM_FRAME) -> _Frame:
    params = CsfParams(pulse_form=spec.pulse_form)
    seed = spec.master_seed
    pilot = _pilot_symbols(spec, _rng(seed, stream, index, _PILOT))
    data = _rng(seed, stream, index, _DATA).choice([-1.0, 1.0], size=spec.data_bits)
    symbols = np.concatenate([pilot, data])
    channel = _channel_for(spec, stream, index)
    guard = TAIL_SYMBOLS + 2
    tx = synthesize_baseband(symbols, params, spec.oversampling, guard)
    clean = apply_multipath(tx, channel, params.f)
    pilot_tx = synthesize_baseband(pilot, params, spec.oversampling, guard).samples
    pilot_only = tx.with_samples(np.concatenate([pilot_tx, np.zeros(len(tx) - pilot_tx.size)]))
    noise = _rng(seed, stream, index, _NOISE).standard_normal(len(tx))
    eb = energy_per_bit(tx, symbols.size, params.f)
    return _Frame(symbols, channel, clean, pilot_only, noise, eb)


# -- receivers ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class _Observation:
    """Matched-filter windows of one frame at one SNR plus receiver-side
    channel knowledge."""

    windows: np.ndarray
    channel: MultipathChannel
    noise_var: float               # per-sample noise variance seen by the receiver


def _observe(spec: ExperimentSpec, frame: _Frame, point) -> _Observation:
    params = CsfParams(pulse_form=spec.pulse_form)
    sigma = noise_sigma(NoiseSpec(point), frame.eb, params.f, spec.oversampling)
    received = frame.clean.with_samples(frame.clean.samples + sigma * frame.noise)
    y = matched_filter(received, params)
    windows = window_matrix(y, frame.symbols.size, spec.decision_index)
    channel, noise_var = frame.channel, sigma ** 2
    if spec.estimated:
        ns = spec.oversampling
        # only pilot pulses reach these samples (data precursors start TAIL_SYMBOLS early)
        stop = received.origin_offset + (spec.pilot_bits - TAIL_SYMBOLS) * ns
        est = ls_channel_estimate(frame.pilot_only, received, spec.ls_max_delay,
                                  rows=slice(0, stop), f=params.f, prune=spec.ls_prune,
                                  tap_spacing=spec.ls_tap_spacing)
        channel, noise_var = est.to_channel(), est.noise_variance
    return _Observation(windows, channel, noise_var)


def _gain(windows: np.ndarray, target: float) -> float:
    rms = float(np.sqrt(np.mean(windows ** 2)))
    return target / rms if rms > 0 else 1.0


def _reservoirs(spec: ExperimentSpec):
    w2 = esn.init_weights(
        esn.EsnConfig(N=spec.esn_neurons, K=spec.oversampling, sparsity=spec.esn_sparsity,
                      rho=spec.esn_rho, ridge=spec.ridge, seed=spec.master_seed),
        _rng(spec.master_seed, _STREAM_RESERVOIR, 0, _RES2))
    w1 = esn.init_weights(
        esn.EsnConfig(N=spec.method1_neurons, K=1, sparsity=spec.esn_sparsity,
                      rho=spec.esn_rho, ridge=spec.ridge, seed=spec.master_seed),
        _rng(spec.master_seed, _STREAM_RESERVOIR, 0, _RES1))
    return w2, w1


def _method2_training(spec, obs: _Observation, pilot: np.ndarray, gain: float) -> esn.TrainingSet:
    params = CsfParams(pulse_form=spec.pulse_form)
    table = build_isi_table(obs.channel, params, ThresholdConfig(spec.teacher_depth, spec.teacher_depth))
    # the last few pilot teachers would need data symbols, so they are left out
    n = spec.pilot_bits - spec.teacher_depth
    teachers = genie_thresholds(pilot, table)[:n]
    return esn.TrainingSet(obs.windows[:n] * gain, teachers * gain)


def _train_method2(spec, reservoir, obs, pilot) -> esn.EsnWeights:
    gain = _gain(obs.windows[:spec.pilot_bits], spec.input_rms)
    return esn.fit(reservoir, _method2_training(spec, obs, pilot, gain), spec.washout, spec.ridge)


def _train_method1(spec, reservoir, obs) -> esn.EsnWeights:
    gain = _gain(obs.windows[:spec.pilot_bits], spec.method1_input_rms)
    n = spec.method1_train_symbols * spec.oversampling
    stream = obs.windows.ravel()[:n + 1] * gain
    training = esn.TrainingSet(stream[:-1, None], stream[1:])
    return esn.fit(reservoir, training, spec.method1_washout * spec.oversampling, spec.ridge)


def _decode(spec, method, obs: _Observation, symbols, trained) -> np.ndarray:
    params = CsfParams(pulse_form=spec.pulse_form)
    P = spec.pilot_bits
    pilot = symbols[:P]
    data_windows = obs.windows[P:]
    history = pilot[-spec.past_depth:]
    if method == "zero":
        return detect_frame(data_windows, "zero", decision_index=spec.decision_index)
    if method == "suboptimal":
        table = build_isi_table(obs.channel, params, ThresholdConfig(spec.past_depth, 1))
        return detect_frame(data_windows, "suboptimal", SuboptimalContext(table, history),
                            spec.decision_index)
    if method == "method1":
        table = build_isi_table(obs.channel, params, ThresholdConfig(spec.past_depth, 1))
        ctx = Method1Context(trained["method1"], table, history,
                             _gain(obs.windows[:P], spec.method1_input_rms),
                             obs.windows[:P], spec.method1_horizon)
        return detect_frame(data_windows, "method1", ctx, spec.decision_index)
    if method == "method2":
        weights = trained["method2"]
        gain = _gain(obs.windows[:P], spec.input_rms)
        training = _method2_training(spec, obs, pilot, gain)
        # teacher-force through the pilot to line the reservoir up with this frame
        states = esn.teacher_states(weights, training)
        state = esn.EsnState(states[-1], float(training.teachers[-1]))
        n = len(training)
        dec = detect_frame(obs.windows[n:], "method2", Method2Context(weights, state, gain),
                           spec.decision_index)
        return dec[P - n:]
    if method == "mmse":
        pulse, _ = pulse_samples(params, spec.oversampling)
        dt = 1.0 / (params.f * spec.oversampling)
        noise_dec = obs.noise_var * dt * dt * float(np.dot(pulse, pulse))
        response = symbol_response(obs.channel, params, span=spec.mmse_taps // 2 + 1)
        taps = mmse_equalizer_design(response, noise_dec, spec.mmse_taps)
        return detect_frame(obs.windows, "mmse", MmseContext(taps), spec.decision_index)[P:]
    raise MisconfigurationError(f"unknown method {method!r}")


def _train(spec, reservoirs, obs, pilot, methods) -> dict:
    w2, w1 = reservoirs
    out = {}
    if "method2" in methods:
        out["method2"] = _train_method2(spec, w2, obs, pilot)
    if "method1" in methods:
        out["method1"] = _train_method1(spec, w1, obs)
    return out


def global_readouts(spec: ExperimentSpec, reservoirs=None) -> dict:
    """Readouts trained once per grid point on a dedicated training frame."""
    reservoirs = reservoirs or _reservoirs(spec)
    frame = build_frame(spec, 0, _STREAM_GLOBAL)
    out = {}
    for point in spec.ebn0_grid:
        try:
            obs = _observe(spec, frame, point)
            out[point] = _train(spec, reservoirs, obs, frame.symbols[:spec.pilot_bits], spec.methods)
        except CbwcsError as exc:
            raise ExperimentError(f"global training at {point} dB: {exc}", None, point) from exc
    return out


def run_frame(spec: ExperimentSpec, index: int, reservoirs=None, readouts=None) -> np.ndarray:
    """Bit errors for one frame, shape (len(methods), len(ebn0_grid))."""
    reservoirs = reservoirs or _reservoirs(spec)
    if spec.global_training and readouts is None:
        readouts = global_readouts(spec, reservoirs)
    frame = build_frame(spec, index)
    data = frame.symbols[spec.pilot_bits:]
    errors = np.zeros((len(spec.methods), len(spec.ebn0_grid)), dtype=np.int64)
    for j, point in enumerate(spec.ebn0_grid):
        try:
            obs = _observe(spec, frame, point)
            trained = (readouts[point] if spec.global_training
                       else _train(spec, reservoirs, obs, frame.symbols[:spec.pilot_bits], spec.methods))
            for i, method in enumerate(spec.methods):
                decoded = _decode(spec, method, obs, frame.symbols, trained)
                errors[i, j] = int(np.count_nonzero(decoded != data))
        except ExperimentError:
            raise
        except CbwcsError as exc:
            raise ExperimentError(f"frame {index} at {point} dB: {exc}", index, point) from exc
    return errors


def _run_chunk(args):
    spec, indices, reservoirs, readouts = args
    return [run_frame(spec, i, reservoirs, readouts) for i in indices]


def run_experiment(spec: ExperimentSpec, workers: int | None = None) -> list[BerRecord]:
    """Aggregate BER records over ``spec.frames`` frames.

    Frames are split into contiguous chunks across ``workers`` processes; the
    integer error counts are summed, so the result does not depend on the
    worker count.
    """
    workers = spec.workers if workers is None else workers
    reservoirs = _reservoirs(spec)
    readouts = global_readouts(spec, reservoirs) if spec.global_training else None
    indices = list(range(spec.frames))
    if workers <= 1 or spec.frames == 1:
        per_frame = _run_chunk((spec, indices, reservoirs, readouts))
    else:
        chunks = [indices[k::workers] for k in range(workers)]
        chunks = [c for c in chunks if c]
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            results = pool.map(_run_chunk, [(spec, c, reservoirs, readouts) for c in chunks])
            per_frame = [e for part in results for e in part]
    total = np.sum(per_frame, axis=0)
    bits = spec.frames * spec.data_bits
    return [BerRecord(m, _grid_float(p), bits, int(total[i, j]))
            for i, m in enumerate(spec.methods) for j, p in enumerate(spec.ebn0_grid)]


def _grid_float(point) -> float:
    return math.inf if point == NOISE_FREE else float(point)


# -- output -----------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(x, ".17g")


def _sorted(records: Iterable[BerRecord]) -> list[BerRecord]:
    return sorted(records, key=lambda r: (r.method, r.ebn0_db))


def format_csv(records: Iterable[BerRecord]) -> str:
    lines = [",".join(CSV_HEADER)]
    for r in _sorted(records):
        lines.append(f"{r.method},{_fmt(r.ebn0_db)},{r.bits_total},{r.bit_errors},{_fmt(r.ber)}")
    return "\n".join(lines) + "\n"


def emit_csv(records: Iterable[BerRecord], path) -> None:
    path = Path(path)
    try:
        path.write_text(format_csv(records), encoding="ascii")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def parse_csv(text: str) -> list[BerRecord]:
    rows = list(csv.reader(text.splitlines()))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise InvalidInputError(f"expected header {','.join(CSV_HEADER)}")
    return [BerRecord(m, float(e), int(b), int(n), float(ber)) for m, e, b, n, ber in rows[1:]]


def read_csv(path) -> list[BerRecord]:
    return parse_csv(Path(path).read_text(encoding="ascii"))


def emit_plot_data(records: Iterable[BerRecord], directory) -> list[Path]:
    """One whitespace-separated ``ebn0_db ber`` file per method."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    by_method: dict[str, list[BerRecord]] = {}
    for r in _sorted(records):
        by_method.setdefault(r.method, []).append(r)
    paths = []
    for method, rows in by_method.items():
        p = directory / f"{method}.dat"
        p.write_text("# ebn0_db ber\n" + "".join(f"{_fmt(r.ebn0_db)} {_fmt(r.ber)}\n" for r in rows))
        paths.append(p)
    return paths


# -- config ---------------------------------------------------------------------

_TUPLE_FIELDS = {"delays", "ebn0_grid", "methods"}


def spec_from_mapping(values: dict) -> ExperimentSpec:
    names = {f.name for f in dataclasses.fields(ExperimentSpec)}
    unknown = sorted(set(values) - names)
    if unknown:
        raise MisconfigurationError(f"unknown config keys: {', '.join(unknown)}")
    kwargs = {}
    for key, value in values.items():
        if key in _TUPLE_FIELDS and value is not None:
            if isinstance(value, (str, int, float)):
                value = [value]
            value = tuple(value)
        kwargs[key] = value
    try:
        return ExperimentSpec(**kwargs)
    except TypeError as exc:
        raise MisconfigurationError(str(exc)) from None


def load_config(path) -> ExperimentSpec:
    """Read a TOML file whose top-level keys are :class:`ExperimentSpec` fields."""
    try:
        import tomllib
    except ModuleNotFoundError:     # Python < 3.11
        import tomli as tomllib
    with open(path, "rb") as fh:
        try:
            values = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise MisconfigurationError(f"{path}: {exc}") from None
    nested = [k for k, v in values.items() if isinstance(v, dict)]
    if nested:
        raise MisconfigurationError(f"unknown config tables: {', '.join(nested)}")
    return spec_from_mapping(values)


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)


__all__ = [
    "SCENARIOS", "FrameLayout", "ExperimentSpec", "BerRecord", "build_frame", "run_frame",
    "run_experiment", "global_readouts", "format_csv", "emit_csv", "parse_csv", "read_csv",
    "emit_plot_data", "spec_from_mapping", "load_config",
]
