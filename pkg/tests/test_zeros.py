"""Argument-principle counting, zero location, and the Jensen identity."""

import math

import numpy as np
import pytest

from zeroratio.constants import ClassParams
from zeroratio.factors import ZeroSet
from zeroratio.models import EntireModel
from zeroratio.report import PASS, PASS_UNMET
from zeroratio.zeros import (
    AnalyticFn,
    count_bound_check,
    count_zeros,
    jensen_check,
    locate_zeros,
)


def poly_fn(*roots):
    """Monic polynomial with the given roots, vectorized."""
    roots = np.asarray(roots, dtype=complex)

    def evaluate(z):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for r in roots:
            out = out * (z - r)
        return out

    return AnalyticFn(evaluator=evaluate, label="poly")


# ---------------------------------------------------------------------------
# counting
# ---------------------------------------------------------------------------


def test_count_simple_roots():
    fn = poly_fn(0.5, -0.3 + 0.4j, 2.0)
    res = count_zeros(fn, radius=1.0)
    assert res.count == 2
    assert res.reliable


def test_count_includes_multiplicity():
    fn = poly_fn(0.25j, 0.25j, 0.25j, -0.6)
    res = count_zeros(fn, radius=1.0)
    assert res.count == 4


def test_count_respects_center():
    fn = poly_fn(3.0, 3.5, -10.0)
    assert count_zeros(fn, center=3.2, radius=0.7).count == 2
    assert count_zeros(fn, center=0j, radius=1.0).count == 0


def test_count_zero_on_contour_nudges():
    # a root exactly on the circle: the deterministic outward nudge makes the
    # count land on the inclusive side, reproducibly
    fn = poly_fn(1.0)
    res = count_zeros(fn, radius=1.0)
    assert res.count == 1
    assert count_zeros(fn, radius=1.0).count == 1


def test_count_random_products_property():
    rng = np.random.default_rng(2024)
    for trial in range(30):
        n = int(rng.integers(1, 9))
        roots = rng.uniform(0.1, 2.0, n) * np.exp(1j * rng.uniform(0, 2 * math.pi, n))
        radius = 1.0
        # keep roots off the contour so the ground truth is unambiguous
        roots = roots[np.abs(np.abs(roots) - radius) > 1e-3]
        if len(roots) == 0:
            continue
        fn = poly_fn(*roots)
        expected = int(np.sum(np.abs(roots) < radius))
        assert count_zeros(fn, radius=radius).count == expected, f"trial {trial}"


def test_count_on_entire_model():
    zs = ZeroSet.from_points([5.0, 7.0j, -6.0, 11.0], [1, 2, 1, 1])
    model = EntireModel(genus=2, zeros=zs)
    res = count_zeros(model.as_analytic_fn(), radius=8.0)
    assert res.count == 4  # 5, 7j (double), -6


# ---------------------------------------------------------------------------
# location
# ---------------------------------------------------------------------------


def test_locate_simple_roots():
    roots = [0.4 + 0.1j, -0.5 - 0.2j, 0.7j]
    fn = poly_fn(*roots)
    zs = locate_zeros(fn, radius=1.0)
    assert zs.total_multiplicity == 3
    found = sorted(zs.locations(), key=lambda z: (z.real, z.imag))
    expect = sorted(roots, key=lambda z: (z.real, z.imag))
    for a, b in zip(found, expect):
        assert abs(a - b) < 1e-9


def test_locate_reports_multiplicity():
    fn = poly_fn(0.3, 0.3)
    zs = locate_zeros(fn, radius=1.0)
    assert zs.total_multiplicity == 2
    assert any(m == 2 and abs(loc - 0.3) < 1e-6 for loc, m in zs)


def test_locate_then_reevaluate_is_small():
    rng = np.random.default_rng(5)
    roots = 0.8 * rng.uniform(0.2, 1.0, 6) * np.exp(1j * rng.uniform(0, 2 * math.pi, 6))
    fn = poly_fn(*roots)
    zs = locate_zeros(fn, radius=1.0)
    assert zs.total_multiplicity == len(roots)
    vals = np.abs(fn(zs.locations()))
    # local scale: product of distances to the other roots is O(1) here
    assert np.max(vals) < 1e-8


def test_locate_on_entire_model_matches_prescription():
    zs_in = ZeroSet.from_points([2.0 + 1.0j, -1.5 + 2.5j], [1, 1])
    model = EntireModel(genus=1, zeros=zs_in)
    zs_out = locate_zeros(model.as_analytic_fn(), radius=4.0)
    assert zs_out.total_multiplicity == 2
    for loc, _ in zs_in:
        assert min(abs(loc - f) for f, _ in zs_out) < 1e-8


# ---------------------------------------------------------------------------
# Jensen identity
# ---------------------------------------------------------------------------


def test_jensen_zero_free_function():
    fn = poly_fn(2.0)  # z - 2, rescaled below to keep f(0) = 1

    def norm(z):
        return fn(z) / fn(np.zeros(1))[0]

    lhs, rhs = jensen_check(AnalyticFn(evaluator=norm), 1.0)
    assert lhs == pytest.approx(0.0, abs=1e-10)
    assert rhs == pytest.approx(0.0, abs=1e-12)


def test_jensen_single_zero_hand_value():
    # f(z) = 1 - z/a with |a| = 2: at radius 5 the identity gives ln(5/2)
    a = 2.0 * np.exp(0.3j)

    def evaluate(z):
        return 1.0 - np.asarray(z, dtype=complex) / a

    lhs, rhs = jensen_check(AnalyticFn(evaluator=evaluate), 5.0)
    assert rhs == pytest.approx(math.log(5.0 / 2.0), rel=1e-12)
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(lhs)))


def test_jensen_identity_on_products():
    rng = np.random.default_rng(77)
    for trial in range(10):
        n = int(rng.integers(1, 7))
        roots = rng.uniform(0.3, 6.0, n) * np.exp(1j * rng.uniform(0, 2 * math.pi, n))
        roots = roots[np.abs(np.abs(roots) - 2.0) > 1e-2]
        if len(roots) == 0:
            continue
        model = EntireModel(genus=1, zeros=ZeroSet.from_points(roots))
        lhs, rhs = jensen_check(model.as_analytic_fn(), 2.0)
        assert abs(lhs - rhs) <= 1e-8 * (1.0 + abs(lhs)), f"trial {trial}"


# ---------------------------------------------------------------------------
# the count bound
# ---------------------------------------------------------------------------


def test_count_bound_check_pass_path():
    params = ClassParams(C0=2.0, C1=1.0, rho=1.0, sigma=0.5, mu=1.0, r0=1.0)
    zs = ZeroSet.from_points([3.0, -4.0j, 5.0])
    model = EntireModel(genus=1, zeros=zs)
    report = count_bound_check(model.as_analytic_fn(), params, 6.0)
    assert report.verdict == PASS
    assert report.observed == 3
    assert report.bound == pytest.approx(params.count_rate() * 6.0)


def test_count_bound_check_precondition_path():
    # r below the activation radius: verdict must not be a hard pass/fail
    params = ClassParams(C0=200.0, C1=1.0, rho=1.0, sigma=0.01, mu=1.0, r0=1.0)
    zs = ZeroSet.from_points([0.5])
    model = EntireModel(genus=1, zeros=zs)
    report = count_bound_check(model.as_analytic_fn(), params, 2.0)
    unmet = [p for p in report.preconditions if not p.satisfied]
    assert unmet, "expected the activation-radius precondition to be unmet"
    assert report.verdict == PASS_UNMET
