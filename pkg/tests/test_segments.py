import math

import numpy as np
import pytest

from ladderlab.ladder import EULER_GAMMA, phi1_iter_ext, reverse_point
from ladderlab.segments import (delta_set, gap_scale, iterated_segment, matrix_rows, segment,
                                segment_matrix, segment_metrics, window_requirement)


def test_window_requirement_formula():
    T = 1e5
    g = (1 - EULER_GAMMA) * T / math.log(T)
    lo, hi = window_requirement(T, 2)
    assert hi == pytest.approx(T + 3 * g, rel=1e-15)
    lo0, hi0 = window_requirement(T, 0)
    assert hi0 == T and lo0 == pytest.approx(T * (1 - (1 - EULER_GAMMA) / math.log(T)))
    with pytest.raises(ValueError):
        window_requirement(5.0, 1)


def test_window_sufficient_for_k3(ladder_1e5):
    for q in range(4):
        reverse_point(ladder_1e5, 1e5, q)
        reverse_point(ladder_1e5, 1e5 + 1 / math.log(1e5), q)


def test_base_case_q0(ladder_1e4):
    s = segment(ladder_1e4, 1e4, 2, 0)
    assert s.lo == 1e4 and s.hi == pytest.approx(1e4 + math.log(1e4) ** -2, rel=1e-16)


def test_segment_endpoints_map_back(ladder_1e5):
    T = 1e5
    s = segment(ladder_1e5, T, 1, 1)
    assert s.lo < s.hi
    lo = phi1_iter_ext(ladder_1e5, np.array([s.lo_ext]), 1)[0]
    hi = phi1_iter_ext(ladder_1e5, np.array([s.hi_ext]), 1)[0]
    assert abs(float(lo) / T - 1) <= 1e-8
    assert abs(float(hi) / (T + 1 / math.log(T)) - 1) <= 1e-8
    assert s.length / (T / math.log(T)) <= 0.01


def test_delta_set_k1(ladder_1e4):
    ds = delta_set(ladder_1e4, 1e4, 1, 1)
    assert len(ds.components) == 1 and ds.is_ordered()


@pytest.mark.parametrize("T", [1e4, 1e5])
def test_matrix_structure(ladders, T):
    rows = segment_matrix(ladders[T], T, 3)
    m = segment_metrics(rows, T)
    assert m["ordered"] and m["row_monotone"]
    assert m["max_width_ratio"] <= 0.01
    assert all(0.2 <= g <= 2.0 for g in m["gap_ratios"])
    # the gap from the base segment is measured, not asserted against a band
    assert all(g > 0 for g in m["first_gap_ratios"])
    for ds in rows:
        for a, b in zip(ds.components, ds.components[1:]):
            assert a.hi < b.lo


def test_matrix_rows_json_fields(ladder_1e4):
    rows = matrix_rows(segment_matrix(ladder_1e4, 1e4, 2))
    assert len(rows) == 4
    assert set(rows[0]) == {"p", "q", "lo", "hi", "base_len", "gap_prev"}
    assert all(r["gap_prev"] > 0 for r in rows)


def test_gap_scale():
    assert gap_scale(1e5) == pytest.approx((1 - EULER_GAMMA) * 1e5 / math.log(1e5))


def test_iterated_segment_general_length(ladder_1e4):
    s = iterated_segment(ladder_1e4, 1e4, 0.3, 2)
    assert s.p is None and s.q == 2 and s.base_len == 0.3
    assert s.level(0) == (1e4, pytest.approx(1e4 + 0.3))


def test_segment_rejects_small_T(ladder_1e4):
    with pytest.raises(ValueError):
        segment(ladder_1e4, 2.0, 1, 1)
