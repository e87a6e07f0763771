"""Product scales: partial deltas, double integrals, Darboux sums, kernels."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tscale import (DomainError, GridFn1, GridFn2, KernelOracle, RectPartition,
                    TimeScale2D, cauchy_integral, darboux_sums, double_integral,
                    explicit_scale, integer_segment, mixed_partial,
                    partial_delta, q_grid, running_double_integral,
                    running_integral)


def zz(n1=3, n2=3):
    return TimeScale2D(integer_segment(0, n1), integer_segment(0, n2))


def product_fn(domain, fn):
    return GridFn2.from_function(domain, fn)


def test_partial_delta_of_product():
    d = zz()
    f = product_fn(d, lambda a, b: a * b)
    d1 = partial_delta(f, 1)
    # ((t1+1) t2 - t1 t2) / 1 = t2
    expect = np.broadcast_to(d.scale2.points, (3, 4))
    assert np.array_equal(d1.values, expect)
    d2 = partial_delta(f, 2)
    assert np.array_equal(d2.values, np.broadcast_to(d.scale1.points[:, None], (4, 3)))


def test_partial_delta_rejects_other_axes():
    d = zz()
    f = GridFn2.constant(d, 1.0)
    with pytest.raises(DomainError, match="axis must be 1 or 2"):
        partial_delta(f, 3)


def test_mixed_partial_of_quadratic():
    d = zz()
    f = product_fn(d, lambda a, b: a * a * b)
    m = mixed_partial(f)
    # delta_1 gives (2 t1 + 1) t2, then delta_2 strips t2
    expect = (2.0 * d.scale1.points[:-1] + 1.0)[:, None] * np.ones(3)
    assert np.array_equal(m.values, expect)


def test_mixed_partial_commutes():
    d = TimeScale2D(explicit_scale([0.0, 0.7, 1.0, 2.5]),
                    explicit_scale([0.0, 1.0, 1.25, 3.0]))
    f = product_fn(d, lambda a, b: math.sin(a) * math.exp(0.3 * b) + a * a)
    one_two = partial_delta(partial_delta(f, 1), 2)
    two_one = partial_delta(partial_delta(f, 2), 1)
    assert np.allclose(one_two.values, two_one.values, rtol=1e-12, atol=1e-12)


def test_double_integral_of_constant_is_the_area():
    d = zz()
    f = GridFn2.constant(d, 1.0)
    assert double_integral(f, (0, 2, 0, 3)) == 6.0
    assert double_integral(f, (0, 3, 0, 3)) == 9.0
    assert double_integral(f, (1, 1, 0, 3)) == 0.0


def test_double_integral_left_endpoint_rule():
    d = zz()
    f = product_fn(d, lambda a, b: a + b)
    # sum over i,j in {0,1}: (i + j) = 0 + 1 + 1 + 2
    assert double_integral(f, (0, 2, 0, 2)) == 4.0


def test_double_integral_validates_the_rectangle():
    d = zz()
    f = GridFn2.constant(d, 1.0)
    with pytest.raises(DomainError):
        double_integral(f, (2, 1, 0, 3))
    with pytest.raises(DomainError):
        double_integral(f, (0, 4, 0, 3))


def test_double_integral_matches_iterated_integrals():
    d = TimeScale2D(q_grid(2.0, 3), explicit_scale([0.0, 0.5, 2.0, 3.0]))
    f = product_fn(d, lambda a, b: a * b + 1.0)
    whole = double_integral(f, (0, 3, 0, 3))
    rows = GridFn1(d.scale1, np.array([
        cauchy_integral(GridFn1(d.scale2, f.values[i]), 0, 3)
        for i in range(4)]))
    iterated = cauchy_integral(rows, 0, 3)
    assert math.isclose(whole, iterated, rel_tol=1e-13)
    cols = GridFn1(d.scale2, np.array([
        cauchy_integral(GridFn1(d.scale1, f.values[:, j]), 0, 3)
        for j in range(4)]))
    swapped = cauchy_integral(cols, 0, 3)
    assert math.isclose(whole, swapped, rel_tol=1e-12)


def test_running_integral_accumulates_from_the_origin():
    d = zz()
    f = GridFn2.constant(d, 1.0)
    r1 = running_integral(f, 1)
    assert np.array_equal(r1.values, np.broadcast_to(d.scale1.points[:, None], (4, 4)))
    r2 = running_integral(f, 2)
    assert np.array_equal(r2.values, np.broadcast_to(d.scale2.points, (4, 4)))
    rr = running_double_integral(f)
    assert np.array_equal(rr.values, np.outer(d.scale1.points, d.scale2.points))
    assert rr.values[0, 3] == 0.0 and rr.values[3, 0] == 0.0


def test_running_double_integral_matches_rectangles():
    d = TimeScale2D(explicit_scale([0.0, 0.5, 2.0]), q_grid(2.0, 2))
    f = product_fn(d, lambda a, b: a + 2.0 * b)
    rr = running_double_integral(f)
    for i in range(3):
        for j in range(3):
            assert math.isclose(rr.values[i, j], double_integral(f, (0, i, 0, j)),
                                rel_tol=1e-13, abs_tol=1e-13)


def test_darboux_single_cell_brackets_the_integral():
    d = zz(2, 2)
    f = product_fn(d, lambda a, b: a + b)
    part = RectPartition((0, 2), (0, 2))
    upper, lower = darboux_sums(f, part)
    assert upper == 8.0   # sup over {0,1}^2 is 2, weight 4
    assert lower == 0.0


def test_darboux_finest_partition_is_exact():
    d = TimeScale2D(explicit_scale([0.0, 0.5, 2.0, 2.5]), q_grid(2.0, 3))
    f = product_fn(d, lambda a, b: math.cos(a) * b + 2.0)
    part = RectPartition.finest(d)
    upper, lower = darboux_sums(f, part)
    ref = double_integral(f, (0, 3, 0, 3))
    assert math.isclose(upper, ref, rel_tol=1e-13)
    assert math.isclose(lower, ref, rel_tol=1e-13)


def test_darboux_refinement_tightens_both_sums():
    d = zz(5, 5)
    rng = np.random.Generator(np.random.PCG64(5))
    f = GridFn2(d, rng.uniform(0.0, 4.0, d.shape))
    coarse = RectPartition((0, 5), (0, 2, 5))
    fine = coarse.refine(RectPartition((0, 3, 5), (0, 1, 2, 4, 5)))
    u_c, l_c = darboux_sums(f, coarse)
    u_f, l_f = darboux_sums(f, fine)
    ref = double_integral(f, (0, 5, 0, 5))
    assert l_c <= l_f <= ref <= u_f <= u_c


def test_rect_partition_validates_cuts():
    d = zz()
    f = GridFn2.constant(d, 1.0)
    with pytest.raises(DomainError):
        RectPartition((0,), (0, 3))
    with pytest.raises(DomainError):
        RectPartition((0, 0, 3), (0, 3))
    with pytest.raises(DomainError):
        darboux_sums(f, RectPartition((0, 2), (0, 3)))  # must span to the last index


def test_kernel_oracle_table_and_pointwise_agree():
    d = zz(2, 2)
    ko = KernelOracle.from_point_function(
        d, lambda t1, t2, s1, s2: t1 + 2.0 * t2 + 3.0 * s1 + 4.0 * s2)
    table = ko.table()
    assert table is not None
    assert table.shape == (3, 3, 3, 3)
    assert ko.eval(2, 1, 0, 2) == 2.0 + 2.0 + 0.0 + 8.0
    assert table[2, 1, 0, 2] == ko.eval(2, 1, 0, 2)
    same = KernelOracle.from_table(d, table)
    assert same.eval(1, 1, 1, 1) == ko.eval(1, 1, 1, 1)


def test_kernel_oracle_validates_table_shape():
    d = zz(2, 2)
    with pytest.raises(DomainError):
        KernelOracle.from_table(d, np.zeros((3, 3, 3)))


def test_kernel_oracle_constant():
    d = zz(2, 2)
    ko = KernelOracle.constant(d, 2.5)
    assert ko.eval(0, 0, 2, 2) == 2.5


@st.composite
def small_domain(draw):
    def axis():
        ticks = draw(st.lists(st.integers(0, 60), min_size=2, max_size=7,
                              unique=True))
        return explicit_scale(np.array(sorted(ticks)) / 4.0)
    return TimeScale2D(axis(), axis())


@settings(max_examples=50, deadline=None)
@given(small_domain(), st.integers(0, 2 ** 31 - 1))
def test_darboux_always_brackets(domain, seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    f = GridFn2(domain, rng.uniform(-3.0, 3.0, domain.shape))
    n1, n2 = domain.shape
    part = RectPartition((0, n1 - 1), (0, n2 - 1))
    upper, lower = darboux_sums(f, part)
    ref = double_integral(f, (0, n1 - 1, 0, n2 - 1))
    slack = 1e-12 * (1.0 + abs(ref))
    assert lower <= ref + slack
    assert ref <= upper + slack


@settings(max_examples=50, deadline=None)
@given(small_domain())
def test_fubini_for_running_integrals(domain):
    f = GridFn2.from_function(domain, lambda a, b: math.sin(a + 0.5 * b) + 1.5)
    one_then_two = running_integral(running_integral(f, 2), 1)
    two_then_one = running_integral(running_integral(f, 1), 2)
    tol = 1e-12 * (1.0 + np.abs(one_then_two.values).max())
    assert np.abs(one_then_two.values - two_then_one.values).max() <= tol
