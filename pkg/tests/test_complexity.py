import random
from fractions import Fraction

import pytest

from cbwcs import complexity as cx
from cbwcs.complexity import CostParams, FlopCount
from cbwcs.errors import CostConsistencyError, InvalidInputError, UnsupportedParametersError


def test_method2_table_values():
    frame = cx.method2_frame_cost()
    assert (frame.products, frame.summations) == (48330624, 47628425)
    ps, ss = cx.per_symbol_average(frame, 1152)
    assert ps == pytest.approx(41953.667, abs=1e-3)
    assert ss == pytest.approx(41344.119, abs=1e-3)


def test_method1_table_values():
    frame = cx.method1_frame_cost()
    ps, ss = cx.per_symbol_average(frame, 540)
    assert ps == pytest.approx(223780.759, abs=1e-3)
    assert ss == pytest.approx(220206.133, abs=1e-3)


def test_path_count_is_recovered_from_the_average():
    assert cx.solve_path_count(223780.759) == pytest.approx(2.0, abs=1e-3)


def test_zero_paths_drop_threshold_cost():
    p = CostParams(80, 1, 484, 100, 540, L=0)
    assert cx.method1_breakdown(p).threshold == FlopCount(0, 0)
    full, bare = cx.method1_frame_cost(), cx.method1_frame_cost(p)
    assert full.products - bare.products == 540 * 5 * 2
    assert full.summations - bare.summations == 540 * 4 * 2


def test_per_symbol_helpers():
    assert cx.per_symbol_average(FlopCount(1152, 1152), 1152) == (1, 1)
    assert cx.per_symbol_exact(FlopCount(3, 7), 2) == (Fraction(3, 2), Fraction(7, 2))
    with pytest.raises(InvalidInputError):
        cx.per_symbol_average(FlopCount(1, 1), 0)


def test_amortisation():
    a = cx.per_symbol_average(cx.method2_frame_cost(), 1152)
    doubled = CostParams(112, 16, 996, 100, 2304)
    b = cx.per_symbol_average(cx.method2_frame_cost(doubled), 2304)
    assert b[0] < a[0] and b[1] < a[1]


def test_specialised_columns_reject_other_widths():
    with pytest.raises(UnsupportedParametersError):
        cx.method2_frame_cost(CostParams(112, 8, 996, 100, 1152))
    with pytest.raises(UnsupportedParametersError):
        cx.method1_frame_cost(CostParams(80, 2, 484, 100, 540))


def test_params_validation():
    with pytest.raises(InvalidInputError):
        CostParams(0, 16, 996, 100, 1152)
    with pytest.raises(InvalidInputError):
        CostParams(112, 16, 100, 100, 1152)
    with pytest.raises(InvalidInputError):
        FlopCount(-1, 0)


def test_row_identities_over_random_tuples():
    rng = random.Random(0)
    for _ in range(100):
        n_max = rng.randint(2, 3000)
        p2 = CostParams(rng.randint(1, 300), 16, n_max, rng.randint(0, n_max - 1), rng.randint(1, 5000))
        p1 = CostParams(rng.randint(1, 300), 1, n_max, rng.randint(0, n_max - 1), rng.randint(1, 5000),
                        rng.randint(1, 32), rng.randint(0, 8), rng.randint(0, 5))
        assert cx.method2_breakdown(p2).total == cx.method2_frame_cost(p2)
        assert cx.method1_breakdown(p1).total == cx.method1_frame_cost(p1)


def test_method2_cheaper_per_symbol():
    (m1, *_, p1, s1), (m2, *_, p2, s2) = cx.cost_table()
    assert (m1, m2) == ("method1", "method2")
    assert p2 < p1 and s2 < s1


def test_general_forms_against_columns():
    # everything matches except the method-2 training summations
    report = cx.consistency_report()
    assert [(m.method, m.row, m.kind) for m in report] == [("method2", "training", "summations")]
    (m,) = report
    assert (m.table, m.general) == (31093769, 31060745)
    with pytest.raises(CostConsistencyError, match="method2 training summations"):
        cx.check_consistency()


def test_general_forms_random_tuples():
    rng = random.Random(1)
    for _ in range(100):
        n_max = rng.randint(2, 2000)
        n0 = rng.randint(0, n_max - 1)
        p1 = CostParams(rng.randint(1, 200), 1, n_max, n0, rng.randint(1, 3000), rng.randint(1, 32),
                        rng.randint(0, 8), rng.randint(0, 5))
        assert cx.general_sample_breakdown(p1).total == cx.method1_breakdown(p1).total
        p2 = CostParams(rng.randint(1, 200), 16, n_max, n0, rng.randint(1, 3000))
        g, t = cx.general_direct_breakdown(p2), cx.method2_breakdown(p2)
        assert g.training.products == t.training.products
        assert g.prediction == t.prediction


def test_formatting():
    rows = cx.cost_table()
    csv_text = cx.format_csv(rows)
    assert csv_text.splitlines()[1] == "method1,120841610,118911312,223780.759,220206.133"
    assert csv_text.splitlines()[2] == "method2,48330624,47628425,41953.667,41344.119"
    text = cx.format_text(rows)
    assert "41953.667" in text and "48,330,624" in text
