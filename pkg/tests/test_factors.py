"""Primary factors, tail products, and the small inequalities they rest on.

Property loops are plain seeded numpy draws; every bound asserted here is an
exact inequality from the chain, so the expected violation count is zero.
"""

import math

import mpmath
import numpy as np
import pytest

from zeroratio.constants import ParameterError
from zeroratio.factors import (
    DomainError,
    TailProductSpec,
    ZeroSet,
    cexpm1,
    exp_minus_one_bound_check,
    guard_radius,
    log_primary_factor,
    log_primary_factor_full,
    log_primary_factor_grid,
    log_tail_product,
    log_tail_product_grid,
    primary_factor,
    primary_factor_grid,
    tail_power_sum,
    tail_product,
)


# ---------------------------------------------------------------------------
# primary factor spot values
# ---------------------------------------------------------------------------


def test_primary_factor_at_zero_is_one():
    for p in (1, 2, 3, 7):
        assert primary_factor(0.0, p) == 1.0 + 0.0j


def test_primary_factor_vanishes_at_one():
    assert primary_factor(1.0, 1) == pytest.approx(0.0, abs=1e-15)


def test_primary_factor_spot_value():
    # E_1(0.5) = (1 - 0.5) * exp(0.5)
    assert primary_factor(0.5, 1) == pytest.approx(0.5 * math.exp(0.5), rel=1e-15)


def test_log_primary_factor_spot_value():
    # ln E_2(0.5) = ln(0.5) + 0.5 + 0.125
    expected = math.log(0.5) + 0.5 + 0.125
    got = log_primary_factor(0.5, 2)
    assert got.real == pytest.approx(expected, rel=1e-13)
    assert got.imag == pytest.approx(0.0, abs=1e-15)
    assert abs(got) <= 0.5**3


def test_log_bound_holds_just_past_guard():
    # at xi = 0.6 the genus-1 series domain has ended, but the closed-form
    # logarithm still satisfies |ln E_1(0.6)| <= 0.6^2
    value = log_primary_factor_full(np.array([0.6 + 0j]), 1)[0]
    assert abs(value) <= 0.36


def test_log_primary_factor_rejects_outside_guard():
    with pytest.raises(DomainError):
        log_primary_factor(0.9, 1)
    with pytest.raises(DomainError):
        log_primary_factor_grid(np.array([0.1, 0.95 + 0j]), 1)


def test_guard_radius_values():
    assert guard_radius(1) == pytest.approx(0.5)
    assert guard_radius(3) == pytest.approx(0.75)


def test_log_primary_factor_against_mpmath():
    """Independent series evaluation at 40 digits."""
    mpmath.mp.dps = 40
    rng = np.random.default_rng(4)
    for p in (1, 2, 5):
        for _ in range(25):
            r = rng.uniform(0.05, guard_radius(p) * 0.999)
            theta = rng.uniform(0, 2 * math.pi)
            xi = complex(r * math.cos(theta), r * math.sin(theta))
            xim = mpmath.mpc(xi.real, xi.imag)
            oracle = mpmath.log(1 - xim) + sum(xim**k / k for k in range(1, p + 1))
            mine = log_primary_factor(xi, p)
            assert abs(mine - complex(oracle)) <= 1e-14 * max(abs(mine), 1e-30)


# ---------------------------------------------------------------------------
# the seeded log-bound property
# ---------------------------------------------------------------------------


def test_log_bound_and_series_consistency_property():
    """|ln E_p| <= |xi|^(p+1) inside the guard disk, and the two evaluation
    routes agree, over a few thousand seeded draws."""
    rng = np.random.default_rng(20240817)
    violations = 0
    worst_rel = 0.0
    for p in (1, 2, 3, 5):
        cap = guard_radius(p)
        radii = cap * np.sqrt(rng.uniform(0.0, 1.0, 500))
        angles = rng.uniform(0.0, 2.0 * math.pi, 500)
        xi = radii * np.exp(1j * angles)
        logs = log_primary_factor_grid(xi, p)
        if np.any(np.abs(logs) > np.abs(xi) ** (p + 1) * (1 + 1e-13)):
            violations += 1
        closed = primary_factor_grid(xi, 1.0, p)
        rel = np.abs(np.exp(logs) - closed) / np.maximum(np.abs(closed), 1e-300)
        worst_rel = max(worst_rel, float(rel.max()))
    assert violations == 0
    assert worst_rel <= 1e-12


def test_full_plane_log_matches_grid_inside_guard():
    rng = np.random.default_rng(7)
    for p in (1, 2, 4):
        xi = guard_radius(p) * 0.9 * rng.uniform(0.1, 1.0, 64) * np.exp(
            1j * rng.uniform(0, 2 * math.pi, 64)
        )
        inside = log_primary_factor_grid(xi, p)
        full = log_primary_factor_full(xi, p)
        assert np.max(np.abs(inside - full)) <= 1e-14


def test_full_plane_log_outside_guard():
    # moduli kept small enough that exp of the partial sum stays in range
    rng = np.random.default_rng(8)
    for p in (1, 3):
        xi = rng.uniform(1.2, 8.0, 64) * np.exp(1j * rng.uniform(0, 2 * math.pi, 64))
        logs = log_primary_factor_full(xi, p)
        direct = primary_factor_grid(xi, 1.0, p)
        assert np.max(np.abs(np.exp(logs) - direct) / np.abs(direct)) <= 1e-11


def test_full_plane_log_is_minus_inf_at_zero_location():
    logs = log_primary_factor_full(np.array([1.0 + 0j]), 2)
    assert logs[0].real == -math.inf


def test_scalar_and_vector_paths_agree():
    pts = np.array([0.1 + 0.2j, -0.3j, 0.45])
    for p in (1, 2):
        vec = log_primary_factor_grid(pts, p)
        for i, xi in enumerate(pts):
            assert log_primary_factor(complex(xi), p) == pytest.approx(vec[i], rel=1e-14)


# ---------------------------------------------------------------------------
# exp(w) - 1
# ---------------------------------------------------------------------------


def test_exp_minus_one_bound_spot_values():
    lhs, rhs = exp_minus_one_bound_check(0.0)
    assert (lhs, rhs) == (0.0, 0.0)
    lhs, rhs = exp_minus_one_bound_check(1.0)
    assert lhs == pytest.approx(math.e - 1.0)
    assert rhs == pytest.approx(math.e)
    lhs, rhs = exp_minus_one_bound_check(1j * math.pi)
    assert lhs == pytest.approx(2.0)
    assert rhs == pytest.approx(math.pi * math.exp(math.pi))


def test_exp_minus_one_bound_property():
    rng = np.random.default_rng(99)
    w = rng.uniform(-5, 5, 10_000) * np.exp(1j * rng.uniform(0, 2 * math.pi, 10_000))
    w = w[np.abs(w) <= 5.0]
    lhs = np.abs(cexpm1(w))
    rhs = np.abs(w) * np.exp(np.abs(w))
    assert np.all(lhs <= rhs * (1 + 1e-13))


def test_cexpm1_small_argument_accuracy():
    mpmath.mp.dps = 40
    for w in (1e-12 + 1e-13j, -3e-9j, 1e-15, 0.1 + 0.2j):
        oracle = complex(mpmath.expm1(mpmath.mpc(w.real if hasattr(w, "real") else w, getattr(w, "imag", 0.0))))
        mine = complex(cexpm1(np.array([w]))[0])
        assert abs(mine - oracle) <= 1e-15 * max(abs(oracle), 1e-300) + 1e-300


# ---------------------------------------------------------------------------
# zero sets
# ---------------------------------------------------------------------------


def test_zeroset_csv_round_trip(tmp_path):
    zs = ZeroSet.from_points([1 + 2j, -3.5j, 4.0], [1, 2, 1])
    path = tmp_path / "zeros.csv"
    zs.to_csv(path)
    back = ZeroSet.from_csv(path)
    assert back.entries == zs.entries


def test_zeroset_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,y,m\n1,2,1\n")
    with pytest.raises(ParameterError):
        ZeroSet.from_csv(path)


def test_zeroset_restrict_merge_count():
    zs = ZeroSet.from_points([1.0, 2.0, 3.0, 4.0])
    inner = zs.restrict(max_modulus=2.5)
    outer = zs.restrict(min_modulus=2.5)
    assert len(inner) == 2 and len(outer) == 2
    assert inner.merged_with(outer).total_multiplicity == 4
    assert zs.count_within(3.5) == 3
    assert zs.min_modulus() == pytest.approx(1.0)
    assert zs.max_modulus() == pytest.approx(4.0)


# ---------------------------------------------------------------------------
# tail products
# ---------------------------------------------------------------------------


def test_tail_product_empty_set_is_one():
    spec = TailProductSpec(zeros=ZeroSet.from_points([]), genus=1, cutoff=2.0)
    assert tail_product(spec, 0.5 + 0.5j) == 1.0 + 0.0j


def test_tail_product_single_zero_spot_value():
    spec = TailProductSpec(zeros=ZeroSet.from_points([10.0]), genus=1, cutoff=10.0)
    expected = 0.9 * math.exp(0.1)
    assert tail_product(spec, 1.0) == pytest.approx(expected, rel=1e-14)
    assert tail_product(spec, 0.0) == 1.0 + 0.0j


def test_tail_power_sum_hand_value():
    spec = TailProductSpec(zeros=ZeroSet.from_points([10.0, 20.0j]), genus=1, cutoff=10.0)
    assert tail_power_sum(spec) == pytest.approx(1.0 / 100.0 + 1.0 / 400.0, rel=1e-15)


def test_tail_power_sum_zeta_comparison():
    # z_n = R*n, genus 2: the sum is R^-3 * sum n^-3 <= R^-3 * zeta(3)
    R = 50.0
    zeros = ZeroSet.from_points([R * n for n in range(1, 400)])
    spec = TailProductSpec(zeros=zeros, genus=2, cutoff=R)
    value = tail_power_sum(spec)
    zeta3 = float(mpmath.zeta(3))
    partial = sum((R * n) ** -3 for n in range(1, 400))
    assert value == pytest.approx(partial, rel=1e-13)
    assert value < zeta3 / R**3


def test_tail_product_log_additivity():
    rng = np.random.default_rng(13)
    locs1 = 20.0 * rng.uniform(1.0, 3.0, 8) * np.exp(1j * rng.uniform(0, 2 * math.pi, 8))
    locs2 = 20.0 * rng.uniform(1.0, 3.0, 5) * np.exp(1j * rng.uniform(0, 2 * math.pi, 5))
    s1 = ZeroSet.from_points(locs1)
    s2 = ZeroSet.from_points(locs2)
    z = 3.0 - 2.0j
    p1 = tail_product(TailProductSpec(s1, 2, 20.0), z)
    p2 = tail_product(TailProductSpec(s2, 2, 20.0), z)
    both = tail_product(TailProductSpec(s1.merged_with(s2), 2, 20.0), z)
    assert both == pytest.approx(p1 * p2, rel=1e-12)


def test_tail_product_scale_covariance():
    """Scaling the zeros by lambda and the point by lambda leaves the product
    unchanged (each ratio z/z_n is invariant)."""
    rng = np.random.default_rng(17)
    locs = 30.0 * rng.uniform(1.0, 2.5, 10) * np.exp(1j * rng.uniform(0, 2 * math.pi, 10))
    lam = 2.0
    z = 4.0 + 1.0j
    base = tail_product(TailProductSpec(ZeroSet.from_points(locs), 2, 30.0), z)
    scaled = tail_product(
        TailProductSpec(ZeroSet.from_points(lam * locs), 2, lam * 30.0), lam * z
    )
    assert scaled == pytest.approx(base, rel=1e-13)


def test_tail_product_grid_matches_pointwise():
    rng = np.random.default_rng(23)
    locs = 25.0 * rng.uniform(1.0, 2.0, 12) * np.exp(1j * rng.uniform(0, 2 * math.pi, 12))
    spec = TailProductSpec(ZeroSet.from_points(locs), 2, 25.0)
    pts = 3.0 * rng.uniform(0.1, 1.0, 40) * np.exp(1j * rng.uniform(0, 2 * math.pi, 40))
    grid_vals = log_tail_product_grid(spec, pts)
    for i, z in enumerate(pts):
        assert log_tail_product(spec, complex(z)) == pytest.approx(grid_vals[i], rel=1e-13)


def test_tail_product_respects_multiplicity():
    z = 2.0 + 1.0j
    single = TailProductSpec(ZeroSet.from_points([40.0], [2]), 1, 40.0)
    double = TailProductSpec(ZeroSet.from_points([40.0, 40.0]), 1, 40.0)
    assert tail_product(single, z) == pytest.approx(tail_product(double, z), rel=1e-15)


def test_tail_product_guard_violation_raises():
    spec = TailProductSpec(ZeroSet.from_points([10.0]), 1, 10.0)
    with pytest.raises(DomainError):
        log_tail_product(spec, 9.0)  # ratio 0.9 > 1/2 guard for genus 1


def test_large_set_block_evaluation_consistency():
    """Block-partitioned accumulation must be independent of the block size."""
    rng = np.random.default_rng(31)
    n = 20_000
    locs = 100.0 * (1.0 + rng.pareto(3.0, n)) * np.exp(1j * rng.uniform(0, 2 * math.pi, n))
    spec = TailProductSpec(ZeroSet.from_points(locs), 2, 100.0)
    pts = np.array([1.0 + 1.0j, -3.0 + 0.5j, 5.0j])
    a = log_tail_product_grid(spec, pts, block=64)
    b = log_tail_product_grid(spec, pts, block=4096)
    assert np.max(np.abs(a - b)) <= 1e-13 * max(1.0, float(np.max(np.abs(a))))
