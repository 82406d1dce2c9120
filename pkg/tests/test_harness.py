import math
from pathlib import Path

import numpy as np
import pytest

from cbwcs import harness
from cbwcs.errors import ExperimentError, InvalidInputError, MisconfigurationError
from cbwcs.harness import BerRecord, ExperimentSpec, FrameLayout

DATA = Path(__file__).parent / "data"
SMALL = dict(frames=2, ebn0_grid=(4.0, 10.0))


def test_frame_layout():
    assert FrameLayout() == FrameLayout(2048, 996, 1052)
    with pytest.raises(InvalidInputError):
        FrameLayout(2048, 996, 1000)


def test_spec_validation():
    with pytest.raises(MisconfigurationError):
        ExperimentSpec(scenario="rayleigh")
    with pytest.raises(MisconfigurationError):
        ExperimentSpec(frames=0)
    with pytest.raises(MisconfigurationError):
        ExperimentSpec(ebn0_grid=())
    with pytest.raises(MisconfigurationError):
        ExperimentSpec(ebn0_grid=(1.0, 1.0))
    with pytest.raises(MisconfigurationError):
        ExperimentSpec(ebn0_grid=("loud",))
    with pytest.raises(MisconfigurationError):
        ExperimentSpec(methods=("zero", "viterbi"))
    with pytest.raises(MisconfigurationError):
        ExperimentSpec(L=3, delays=(0.0, 1.0))
    with pytest.raises(MisconfigurationError):
        ExperimentSpec(retrain="sometimes")
    assert ExperimentSpec(scenario="single-path").L == 1


def test_modes():
    assert ExperimentSpec().global_training and not ExperimentSpec().estimated
    tv = ExperimentSpec(scenario="time-varying")
    assert tv.estimated and not tv.global_training
    assert not tv.replace(known_channel=True).estimated
    assert ExperimentSpec(retrain="frame").global_training is False


def test_ber_record():
    r = BerRecord("zero", 2.0, 1000, 10)
    assert r.ber == 0.01
    with pytest.raises(InvalidInputError):
        BerRecord("zero", 2.0, 10, 11)
    with pytest.raises(InvalidInputError):
        BerRecord("zero", 2.0, 100, 1, ber=0.5)


def test_frame_is_replayable():
    spec = ExperimentSpec()
    a, b = harness.build_frame(spec, 3), harness.build_frame(spec, 3)
    np.testing.assert_array_equal(a.symbols, b.symbols)
    np.testing.assert_array_equal(a.noise, b.noise)
    c = harness.build_frame(spec, 4)
    assert not np.array_equal(a.symbols[996:], c.symbols[996:])
    np.testing.assert_array_equal(a.symbols[100:996], c.symbols[100:996])


def test_single_path_noise_free_method2():
    spec = ExperimentSpec(scenario="single-path", ebn0_grid=("noise-free",), frames=1,
                          methods=("method2",))
    (rec,) = harness.run_experiment(spec)
    assert rec.bits_total == 1052
    assert rec.bit_errors == 0       # bring-up regression value
    assert rec.ebn0_db == math.inf


def test_experiment_is_deterministic_and_frame_additive():
    spec = ExperimentSpec(**SMALL)
    first = harness.run_experiment(spec)
    assert harness.format_csv(first) == harness.format_csv(harness.run_experiment(spec))
    per_frame = sum(harness.run_frame(spec, k) for k in range(spec.frames))
    counts = {(r.method, r.ebn0_db): r.bit_errors for r in first}
    for i, m in enumerate(spec.methods):
        for j, p in enumerate(spec.ebn0_grid):
            assert counts[(m, p)] == per_frame[i, j]


def test_worker_count_does_not_change_output():
    spec = ExperimentSpec(scenario="time-varying", frames=3, ebn0_grid=(6.0,),
                          methods=("zero", "suboptimal", "method2"))
    one = harness.format_csv(harness.run_experiment(spec, workers=1))
    assert one == harness.format_csv(harness.run_experiment(spec, workers=2))


def test_errors_are_annotated():
    # an LS span longer than the pilot cannot be estimated
    spec = ExperimentSpec(scenario="multipath-estimated", frames=1, ebn0_grid=(5.0,),
                          methods=("zero",), pilot_bits=110, data_bits=10, washout=50,
                          method1_train_symbols=100, method1_washout=50, ls_max_delay=5000)
    with pytest.raises(ExperimentError, match="frame 0 at 5.0 dB") as info:
        harness.run_experiment(spec)
    assert info.value.frame == 0 and info.value.ebn0_db == 5.0


def test_csv_golden_file():
    records = [BerRecord("zero", 2.0, 1052, 37), BerRecord("method2", 0.0, 2104, 301),
               BerRecord("zero", 0.0, 1052, 100)]
    assert harness.format_csv(records) == (DATA / "golden_three_records.csv").read_text()


def test_csv_round_trip_and_header_only(tmp_path):
    records = [BerRecord("mmse", 0.5, 3, 1), BerRecord("zero", math.inf, 7, 0),
               BerRecord("method1", -2.0, 9, 4)]
    path = tmp_path / "out.csv"
    harness.emit_csv(records, path)
    assert harness.read_csv(path) == sorted(records, key=lambda r: (r.method, r.ebn0_db))
    harness.emit_csv([], path)
    assert path.read_text() == "method,ebn0_db,bits,errors,ber\n"
    with pytest.raises(OSError, match="missing"):
        harness.emit_csv(records, tmp_path / "missing" / "x.csv")
    with pytest.raises(InvalidInputError):
        harness.parse_csv("a,b\n")


def test_csv_uses_17_significant_digits():
    text = harness.format_csv([BerRecord("zero", 0.0, 3, 1)])
    assert text.splitlines()[1] == "zero,0,3,1,0.33333333333333331"


def test_plot_data(tmp_path):
    records = [BerRecord("zero", 2.0, 10, 1), BerRecord("zero", 0.0, 10, 2), BerRecord("mmse", 0.0, 10, 3)]
    paths = harness.emit_plot_data(records, tmp_path / "plots")
    assert sorted(p.name for p in paths) == ["mmse.dat", "zero.dat"]
    assert (tmp_path / "plots" / "zero.dat").read_text() == "# ebn0_db ber\n0 0.20000000000000001\n2 0.10000000000000001\n"


def test_config_loading(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('scenario = "time-varying"\nframes = 5\nebn0_grid = [0, 4, "noise-free"]\n'
                   'methods = ["zero", "method2"]\n')
    spec = harness.load_config(cfg)
    assert spec.scenario == "time-varying" and spec.frames == 5
    assert spec.ebn0_grid == (0.0, 4.0, "noise-free") and spec.methods == ("zero", "method2")


@pytest.mark.parametrize("body,msg", [
    ("bogus = 1\n", "unknown config keys: bogus"),
    ("[extra]\nframes = 2\n", "unknown config tables: extra"),
    ("frames = \n", "run.toml"),
    ("scenario = \"nowhere\"\n", "scenario"),
])
def test_config_errors(tmp_path, body, msg):
    cfg = tmp_path / "run.toml"
    cfg.write_text(body)
    with pytest.raises(MisconfigurationError, match=msg):
        harness.load_config(cfg)


def test_spec_from_mapping_scalars():
    spec = harness.spec_from_mapping({"methods": "zero", "ebn0_grid": 3})
    assert spec.methods == ("zero",) and spec.ebn0_grid == (3.0,)
