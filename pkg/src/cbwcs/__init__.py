"""Chaotic baseband link simulator with ESN-based decoding thresholds."""

from .kernels import BACKEND
from .waveform import CsfParams, SampledSignal, SymbolWindow
from .channel import MultipathChannel, Tap, NoiseSpec, FadingLaw, TimeVaryingSpec
from .threshold import IsiTable, ThresholdConfig, build_isi_table
from .esn import EsnConfig, EsnWeights, EsnState
from .receiver import DetectionMethod, detect_frame
from .harness import ExperimentSpec, BerRecord, run_experiment
from .complexity import CostParams, FlopCount

__all__ = [
    "BACKEND", "CsfParams", "SampledSignal", "SymbolWindow", "MultipathChannel", "Tap",
    "NoiseSpec", "FadingLaw", "TimeVaryingSpec", "IsiTable", "ThresholdConfig",
    "build_isi_table", "EsnConfig", "EsnWeights", "EsnState", "DetectionMethod",
    "detect_frame", "ExperimentSpec", "BerRecord", "run_experiment", "CostParams", "FlopCount",
]
