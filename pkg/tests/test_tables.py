import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracdelay import TimeFunctionTable, l2_window_norm, sup_norm_bound
from fracdelay.errors import EmptyTable, WindowOutOfRange
from fracdelay.tables import as_table


def table(times, values, interp="linear", sup=None):
    return TimeFunctionTable(np.asarray(times, float),
                             np.asarray(values, float), interp, sup)


def test_const_table_holds_left_value_and_extends():
    tbl = table([0.0, 1.0], [[[1.0]], [[2.0]]], "const")
    assert tbl(0.5)[0, 0] == 1.0
    assert tbl(1.0)[0, 0] == 2.0
    assert tbl(100.0)[0, 0] == 2.0


def test_linear_table_interpolates_and_bounds_domain():
    tbl = table([0.0, 1.0], [[[0.0]], [[2.0]]], "linear")
    assert tbl(0.25)[0, 0] == pytest.approx(0.5)
    with pytest.raises(WindowOutOfRange):
        tbl(1.5)


def test_sup_norm_bound_constant():
    assert sup_norm_bound(as_table(np.array([[-1.0]]))) == 1.0


def test_sup_norm_bound_max_of_samples():
    tbl = table([0.0, 1.0], [np.eye(2), 2 * np.eye(2)], "const")
    assert sup_norm_bound(tbl, 2) == 2.0


def test_sup_norm_bound_declared_wins():
    tbl = table([0.0, 1.0], [np.eye(2), 2 * np.eye(2)], "const", sup=3.0)
    assert sup_norm_bound(tbl) == 3.0


def test_declared_bound_below_samples_rejected():
    with pytest.raises(ValueError):
        table([0.0], [2 * np.eye(2)], "const", sup=1.0)


def test_empty_table_rejected():
    with pytest.raises(EmptyTable):
        TimeFunctionTable(np.array([]), np.array([]), "const")


def test_l2_window_zero_function():
    tbl = table([0.0], [[[0.0]]], "const")
    assert l2_window_norm(tbl, 0.0, 5.0) == 0.0


def test_l2_window_constant():
    tbl = table([0.0], [3.0 * np.eye(2)], "const")
    delta = 2.5
    assert l2_window_norm(tbl, 0.0, delta) == pytest.approx(
        3.0 * np.sqrt(delta), rel=1e-14)


def test_l2_window_linear_ramp():
    # M(t) = t on [0, 1]: integral of t^2 is 1/3
    tbl = table([0.0, 1.0], [[[0.0]], [[1.0]]], "linear")
    assert l2_window_norm(tbl, 0.0, 1.0) == pytest.approx(
        np.sqrt(1.0 / 3.0), rel=1e-14)


def test_l2_window_out_of_range():
    tbl = table([0.0, 1.0], [[[0.0]], [[1.0]]], "linear")
    with pytest.raises(WindowOutOfRange):
        l2_window_norm(tbl, 0.5, 1.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5), st.lists(st.floats(-3, 3), min_size=2, max_size=6))
def test_l2_window_homogeneity(c, vals):
    times = np.linspace(0.0, 1.0, len(vals))
    tbl = table(times, [[[v]] for v in vals], "linear")
    scaled = table(times, [[[c * v]] for v in vals], "linear")
    base = l2_window_norm(tbl, 0.0, 1.0)
    assert l2_window_norm(scaled, 0.0, 1.0) == pytest.approx(
        abs(c) * base, rel=1e-10, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=3, max_size=6),
       st.lists(st.floats(-3, 3), min_size=3, max_size=6))
def test_l2_window_subadditive(a_vals, b_vals):
    m = min(len(a_vals), len(b_vals))
    times = np.linspace(0.0, 1.0, m)
    ta = table(times, [[[v]] for v in a_vals[:m]], "linear")
    tb = table(times, [[[v]] for v in b_vals[:m]], "linear")
    tsum = table(times, [[[x + y]] for x, y in zip(a_vals[:m], b_vals[:m])],
                 "linear")
    lhs = l2_window_norm(tsum, 0.0, 1.0)
    rhs = l2_window_norm(ta, 0.0, 1.0) + l2_window_norm(tb, 0.0, 1.0)
    assert lhs <= rhs + 1e-10


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.1, 3), min_size=1, max_size=5),
       st.floats(0.1, 3))
def test_sup_norm_monotone_in_samples(vals, extra):
    times = np.arange(len(vals), dtype=float)
    tbl = table(times, [[[v]] for v in vals], "const")
    more = table(np.append(times, times[-1] + 1.0),
                 [[[v]] for v in vals] + [[[extra]]], "const")
    assert sup_norm_bound(more) >= sup_norm_bound(tbl)
