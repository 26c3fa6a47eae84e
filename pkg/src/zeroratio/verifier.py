"""Numerical certification of every inequality in the ratio-bound chain.

Each check_* function samples one inequality of the proof on a grid or
segment, measures its preconditions instead of assuming them, and returns a
VerificationReport whose verdict can only be "fail" when every measured
precondition actually held.  Sampled suprema are taken twice, on the base
grid and on a refinement with doubled resolution, and the report carries a
grid-convergence precondition requiring the two to agree within 1%.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from .constants import (
    ClassParams,
    ParameterError,
    constant_Ap,
    constant_C2,
    derive_constants,
    threshold_r2,
    thresholds_r3_r4_r5,
    vandermonde_cofactors,
)
from .factors import TailProductSpec, ZeroSet, cexpm1, log_tail_product_grid
from .grids import DiskGrid, segment_points
from .models import PairBuild, count_compliance
from .report import Precondition, VerificationReport, precondition
from .zeros import EvaluationError

# relative magnitude below which a denominator sample counts as a zero hit
_DENOM_FLOOR = 1e-10

# agreement demanded between base and doubled grids, relative
_REFINE_TOL = 1e-2


# ---------------------------------------------------------------------------
# evaluation plumbing
# ---------------------------------------------------------------------------


def map_blocks(
    evaluate: Callable[[np.ndarray], np.ndarray],
    points: np.ndarray,
    threads: int | None = None,
    block: int = 8192,
) -> np.ndarray:
    """Apply a vectorized evaluator over fixed-size blocks of points.

    Blocks are dispatched to a thread pool but reassembled in input order, so
    the result is bit-identical for every thread count.
    """
    points = np.asarray(points)
    if len(points) <= block:
        return np.asarray(evaluate(points))
    chunks = [points[i : i + block] for i in range(0, len(points), block)]
    workers = threads if threads and threads > 0 else (os.cpu_count() or 1)
    if workers == 1:
        parts = [np.asarray(evaluate(c)) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: np.asarray(evaluate(c)), chunks))
    return np.concatenate(parts)


def default_disk_grid(radius: float, seed: int = 0, rings: int = 64, spokes: int = 256, interior: int = 1000) -> DiskGrid:
    return DiskGrid(center=0j, radius=radius, rings=rings, spokes=spokes, interior=interior, seed=seed)


def _grid_for(radius: float, grid: DiskGrid | None, seed: int = 0) -> DiskGrid:
    if grid is None:
        return default_disk_grid(radius, seed=seed)
    if abs(grid.radius - radius) <= 1e-12 * max(radius, 1.0):
        return grid
    return grid.scaled(radius)


def _refined_sup(
    magnitude: Callable[[np.ndarray], np.ndarray],
    grid: DiskGrid,
    threads: int | None,
) -> tuple[float, float, DiskGrid, list[tuple[float, float]]]:
    """Sampled sup on the grid and its doubled refinement, plus ring profile.

    Returns (sup_base, sup_refined, refined_grid, profile) where profile
    pairs each refined ring radius with the ring's own maximum.
    """
    base_vals = map_blocks(magnitude, grid.points(), threads)
    fine = grid.refined()
    fine_vals = map_blocks(magnitude, fine.points(), threads)
    profile = fine.ring_profile(fine_vals)
    return (
        float(np.max(base_vals, initial=0.0)),
        float(np.max(fine_vals, initial=0.0)),
        fine,
        profile,
    )


def _converged(sup_base: float, sup_fine: float) -> Precondition:
    scale = max(abs(sup_fine), abs(sup_base))
    change = abs(sup_fine - sup_base) / scale if scale > 0.0 else 0.0
    return precondition("grid sup converged", change <= _REFINE_TOL, _REFINE_TOL, change)


def _compliance_precondition(name: str, zeros: ZeroSet, params: ClassParams) -> Precondition:
    comp = count_compliance(zeros, params)
    return precondition(name, comp.ok, comp.worst_bound, float(comp.worst_count))


def _poly_delta(build: PairBuild, z: np.ndarray) -> np.ndarray:
    return build.psi2.poly_value(z) - build.psi1.poly_value(z)


def _tail_log_ratio(build: PairBuild, z: np.ndarray) -> np.ndarray:
    """log of Pi_1/Pi_2 at the given points (tail products over modulus >= R)."""
    la = log_tail_product_grid(build.tail_spec_a(), z)
    lb = log_tail_product_grid(build.tail_spec_b(), z)
    return la - lb


def _ratio_minus_one(build: PairBuild, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(psi2/psi1 - 1) by honest pointwise division.

    Returns (values, keep_mask); points where |psi1| collapses below
    _DENOM_FLOOR of its grid maximum are masked out rather than evaluated.
    """
    v1 = np.asarray(build.psi1.evaluate(z))
    v2 = np.asarray(build.psi2.evaluate(z))
    scale = float(np.max(np.abs(v1), initial=0.0))
    if scale == 0.0:
        raise EvaluationError("psi1 vanishes on the whole grid")
    keep = np.abs(v1) > _DENOM_FLOOR * scale
    out = np.zeros_like(v1)
    out[keep] = (v2[keep] - v1[keep]) / v1[keep]
    return out, keep


def _segment_envelope(model, angle: float, radii: np.ndarray, mu: float) -> float:
    """Smallest C with |model - 1| <= C r^(-mu) at the given ray radii."""
    vals = np.asarray(model.evaluate(radii * np.exp(1j * angle)))
    return float(np.max(np.abs(vals - 1.0) * radii**mu, initial=0.0))


def _ray_nodes(r: float, p: int, count: int) -> np.ndarray:
    """Radii covering [r, (p+1)r] densely, always containing the nodes k*r."""
    nodes = r * np.arange(1, p + 2, dtype=float)
    pts = segment_points(r, (p + 1) * r, count, include=nodes)
    return np.real(pts)


# ---------------------------------------------------------------------------
# tail-product smallness
# ---------------------------------------------------------------------------


def check_lemma2(
    zeros: ZeroSet,
    R: float,
    a: float,
    p: int,
    delta: float,
    params: ClassParams,
    grid: DiskGrid | None = None,
    threads: int | None = None,
) -> VerificationReport:
    """Tail-product deviation |Pi(R, z) - 1| against 2*C2*a^(p+1)*R^(-mu).

    The supremum is sampled over the disk B(0, a*R^(1-delta)).  Preconditions
    measured: the activation radius R >= r2, compliance of the zero counts
    with the class rate, and grid-refinement stability of the supremum.
    """
    if len(zeros) and zeros.min_modulus() < R:
        raise ParameterError(
            f"tail zero at modulus {zeros.min_modulus():.6g} lies inside R = {R:.6g}"
        )
    radius = a * R ** (1.0 - delta)
    disk = _grid_for(radius, grid)
    tail = TailProductSpec(zeros=zeros, genus=p, cutoff=R)

    def magnitude(pts):
        return np.abs(cexpm1(log_tail_product_grid(tail, pts)))

    sup_base, sup_fine, fine, profile = _refined_sup(magnitude, disk, threads)
    C2 = constant_C2(p, params.sigma, params.rho)
    bound = 2.0 * C2 * a ** (p + 1) * R ** (-params.mu)
    r2 = threshold_r2(a, p, delta, params)
    return VerificationReport(
        check="tail-product-smallness",
        bound=bound,
        observed=sup_fine,
        samples=fine.size,
        preconditions=[
            precondition("R >= r2", R >= r2, r2, R),
            _compliance_precondition("zero counts within class rate", zeros, params),
            _converged(sup_base, sup_fine),
        ],
        details={
            "R": R,
            "a": a,
            "p": p,
            "delta": delta,
            "disk_radius": radius,
            "zero_count": int(zeros.total_multiplicity),
            "sup_base": sup_base,
            "sup_refined": sup_fine,
            "C2": C2,
            "profile": [(r, bound, v) for r, v in profile],
        },
    )


# ---------------------------------------------------------------------------
# segment-to-disk amplification for polynomial exponents
# ---------------------------------------------------------------------------


def check_lemma3(
    coeffs: Sequence[complex],
    r: float,
    mu: float,
    grid: DiskGrid | None = None,
    segment_samples: int = 2048,
    threads: int | None = None,
) -> VerificationReport:
    """Disk bound |e^g - 1| <= 2*eps*A_p from segment smallness of e^g - 1.

    eps is measured as the smallest constant with |e^g(z) - 1| <= eps*(z/r)^(-mu)
    on the segment [r, (p+1)r]; the preconditions eps <= 1/2 and
    eps*A_p <= 1/4 are measured, never assumed.  The report's details carry
    the Cramer reconstruction of the coefficients from the p+1 node samples
    and the per-coefficient amplification bounds.
    """
    coeffs = tuple(complex(c) for c in coeffs)
    p = len(coeffs) - 1
    if p < 1:
        raise ParameterError("the amplification bound needs a polynomial of degree >= 1")
    if r <= 0:
        raise ParameterError("segment base radius must be positive")
    table = vandermonde_cofactors(p)
    Ap = constant_Ap(p, mu, table)

    def g(z):
        acc = np.zeros_like(np.asarray(z, dtype=complex))
        for c in reversed(coeffs):
            acc = acc * z + c
        return acc

    radii = _ray_nodes(r, p, segment_samples)
    seg_h = np.abs(cexpm1(g(radii.astype(complex))))
    C1_meas = float(np.max(seg_h * radii**mu))
    eps = C1_meas * r**-mu

    disk = _grid_for(r, grid)

    def magnitude(pts):
        return np.abs(cexpm1(g(pts)))

    sup_base, sup_fine, fine, profile = _refined_sup(magnitude, disk, threads)
    bound = 2.0 * eps * Ap

    # exact Cramer reconstruction from the node samples g(kr)
    nodes = r * np.arange(1, p + 2, dtype=float)
    zeta = g(nodes.astype(complex))
    recon = []
    coeff_rows = []
    for j in range(1, p + 2):
        acc = 0.0 + 0.0j
        for k in range(1, p + 2):
            acc += zeta[k - 1] * table.cofactors[k - 1][j - 1]
        a_rec = acc / (table.det * r ** (j - 1))
        recon.append(a_rec)
        weight = table.row_weighted_column_sum(j, mu)
        coeff_bound = eps * (1.0 + eps) * r ** (-(j - 1)) * weight
        coeff_rows.append(
            {
                "j": j,
                "magnitude": abs(coeffs[j - 1]),
                "bound": coeff_bound,
                "ok": bool(abs(coeffs[j - 1]) <= coeff_bound * (1.0 + 1e-12)),
            }
        )
    scale = max(max(abs(c) for c in coeffs), 1e-300)
    recon_err = max(abs(a - b) for a, b in zip(recon, coeffs)) / scale

    return VerificationReport(
        check="segment-to-disk-amplification",
        bound=bound,
        observed=sup_fine,
        samples=fine.size + len(radii),
        preconditions=[
            precondition("eps <= 1/2", eps <= 0.5, 0.5, eps),
            precondition("eps*Ap <= 1/4", eps * Ap <= 0.25, 0.25, eps * Ap),
            _converged(sup_base, sup_fine),
        ],
        details={
            "p": p,
            "r": r,
            "mu": mu,
            "Ap": Ap,
            "eps": eps,
            "measured_C1": C1_meas,
            "sup_base": sup_base,
            "sup_refined": sup_fine,
            "reconstruction_max_error": recon_err,
            "coefficient_bounds": coeff_rows,
            "cramer_ok": bool(all(row["ok"] for row in coeff_rows)),
            "profile": [(rr, bound, v) for rr, v in profile],
        },
    )


# ---------------------------------------------------------------------------
# the exact decomposition identity
# ---------------------------------------------------------------------------


def check_decomposition(
    build: PairBuild,
    grid: DiskGrid | None = None,
    threads: int | None = None,
) -> VerificationReport:
    """Pointwise identity test of the exponent-difference decomposition.

    e^(g2-g1) - 1 must equal (psi2/psi1 - 1)*Pi1/Pi2 + (Pi1/Pi2 - 1) exactly;
    the check evaluates both sides independently (full products on the left
    path, honest division on the right) and reports the largest discrepancy
    against a 1e-10 floor scaled by the magnitudes involved.  Near-zero
    denominators are excluded with the count reported.
    """
    spec = build.spec
    radius = (build.p + 1) * spec.R ** (1.0 - spec.delta)
    disk = _grid_for(radius, grid)
    pts = disk.points()

    ratio_m1, keep = _ratio_minus_one(build, pts)
    log_ratio = map_blocks(lambda z: _tail_log_ratio(build, z), pts, threads)
    pi_ratio = np.exp(log_ratio)
    pi_m1 = cexpm1(log_ratio)
    lhs = cexpm1(_poly_delta(build, pts))

    rhs = ratio_m1 * pi_ratio + pi_m1
    disc = np.abs(lhs - rhs)[keep]
    mags = np.abs(ratio_m1 * pi_ratio) + np.abs(pi_m1)
    observed = float(np.max(disc, initial=0.0))
    bound = 1e-10 * (1.0 + float(np.max(mags[keep], initial=0.0)))
    excluded = int(np.sum(~keep))
    return VerificationReport(
        check="decomposition-identity",
        bound=bound,
        observed=observed,
        samples=int(np.sum(keep)),
        preconditions=[
            precondition("denominator nonvanishing at all samples", excluded == 0, 0.0, float(excluded)),
        ],
        details={
            "R": spec.R,
            "disk_radius": radius,
            "excluded_points": excluded,
            "max_magnitude": float(np.max(mags[keep], initial=0.0)),
        },
    )


# ---------------------------------------------------------------------------
# the five chained bounds on the way to the theorem
# ---------------------------------------------------------------------------


def check_step5_bounds(
    build: PairBuild,
    grid: DiskGrid | None = None,
    threads: int | None = None,
    segment_samples: int = 1024,
) -> list[VerificationReport]:
    """The chain of intermediate bounds, one report each.

    ray-ratio-smallness   sup over the ray segment of |psi2/psi1 - 1| vs (2+3*eta)*eta
    tail-ratio-magnitude  sup over B(0,(p+1)R^(1-delta)) of |Pi1/Pi2| vs 1+3*eta2
    tail-ratio-deviation  same disk, |Pi1/Pi2 - 1| vs 3*eta2
    eta-smallness         eta = C1/R^(mu(1-delta)) vs 1/3
    exponent-difference   sup over B(0,R^(1-delta)) of |e^(g2-g1) - 1| vs 18*Ap*eta

    The exponent-difference disk is B(0, R^(1-delta)), the disk on which the
    segment-to-disk amplification with base radius R^(1-delta) concludes.
    """
    spec = build.spec
    params = spec.params
    R, delta, p = spec.R, spec.delta, build.p
    a = float(p + 1)
    table = vandermonde_cofactors(p)
    Ap = constant_Ap(p, params.mu, table)
    C2 = constant_C2(p, params.sigma, params.rho)
    C3 = 2.0 * C2 * (p + 1) ** (p + 1)
    exponent = params.mu * (1.0 - delta)
    eta = params.C1 / R**exponent
    eta2 = C3 / R**params.mu
    r2 = threshold_r2(a, p, delta, params)
    r3, r4, r5 = thresholds_r3_r4_r5(p, delta, params, table)
    base_r = R ** (1.0 - delta)

    comp_a = _compliance_precondition("psi1 zero counts within class rate",
                                      spec.shared.merged_with(spec.outer_a), params)
    comp_b = _compliance_precondition("psi2 zero counts within class rate",
                                      spec.shared.merged_with(spec.outer_b), params)

    # -- ray segment ---------------------------------------------------------
    radii = _ray_nodes(base_r, p, segment_samples)
    radii_fine = _ray_nodes(base_r, p, 2 * segment_samples)
    direction = np.exp(1j * spec.ray_angle)
    env1 = _segment_envelope(build.psi1, spec.ray_angle, radii_fine, params.mu)
    env2 = _segment_envelope(build.psi2, spec.ray_angle, radii_fine, params.mu)

    def seg_sup(rr):
        vals, keep = _ratio_minus_one(build, rr * direction)
        return float(np.max(np.abs(vals[keep]), initial=0.0))

    seg_base, seg_fine = seg_sup(radii), seg_sup(radii_fine)
    report_b = VerificationReport(
        check="ray-ratio-smallness",
        bound=(2.0 + 3.0 * eta) * eta,
        observed=seg_fine,
        samples=len(radii_fine),
        preconditions=[
            precondition("eta <= 1/3", eta <= 1.0 / 3.0, 1.0 / 3.0, eta),
            precondition("segment start >= r0", base_r >= params.r0, params.r0, base_r),
            precondition("measured ray envelope psi1 <= C1", env1 <= params.C1, params.C1, env1),
            precondition("measured ray envelope psi2 <= C1", env2 <= params.C1, params.C1, env2),
            _converged(seg_base, seg_fine),
        ],
        details={"eta": eta, "segment": [base_r, (p + 1) * base_r],
                 "ray_angle": spec.ray_angle},
    )

    # -- tail-product ratio on the wide disk ----------------------------------
    wide = _grid_for(a * base_r, grid)

    def ratio_mag(pts):
        return np.abs(np.exp(_tail_log_ratio(build, pts)))

    def ratio_dev(pts):
        return np.abs(cexpm1(_tail_log_ratio(build, pts)))

    mag_base, mag_fine, fine_grid, _ = _refined_sup(ratio_mag, wide, threads)
    dev_base, dev_fine, _g, dev_profile = _refined_sup(ratio_dev, wide, threads)
    shared_pre = [
        precondition("R >= r2", R >= r2, r2, R),
        precondition("eta2 <= 1/3", eta2 <= 1.0 / 3.0, 1.0 / 3.0, eta2),
        comp_a,
        comp_b,
    ]
    report_pi = VerificationReport(
        check="tail-ratio-magnitude",
        bound=1.0 + 3.0 * eta2,
        observed=mag_fine,
        samples=fine_grid.size,
        preconditions=shared_pre + [_converged(mag_base, mag_fine)],
        details={"eta2": eta2, "disk_radius": a * base_r, "C3": C3},
    )
    report_c = VerificationReport(
        check="tail-ratio-deviation",
        bound=3.0 * eta2,
        observed=dev_fine,
        samples=fine_grid.size,
        preconditions=shared_pre + [_converged(dev_base, dev_fine)],
        details={
            "eta2": eta2,
            "disk_radius": a * base_r,
            "profile": [(rr, 3.0 * eta2, v) for rr, v in dev_profile],
        },
    )

    report_eta = VerificationReport(
        check="eta-smallness",
        bound=1.0 / 3.0,
        observed=eta,
        samples=0,
        preconditions=[],
        details={"C1": params.C1, "exponent": exponent, "R": R},
    )

    # -- exponent difference on the small disk --------------------------------
    small = _grid_for(base_r, grid)

    def delta_mag(pts):
        return np.abs(cexpm1(_poly_delta(build, pts)))

    d_base, d_fine, d_grid, d_profile = _refined_sup(delta_mag, small, threads)
    seg_delta = float(np.max(np.abs(cexpm1(_poly_delta(build, radii_fine * direction))), initial=0.0))
    report_d = VerificationReport(
        check="exponent-difference",
        bound=18.0 * Ap * eta,
        observed=d_fine,
        samples=d_grid.size,
        preconditions=[
            precondition("eta2 <= 1/3", eta2 <= 1.0 / 3.0, 1.0 / 3.0, eta2),
            precondition("9*Ap*eta <= 1/4", 9.0 * Ap * eta <= 0.25, 0.25, 9.0 * Ap * eta),
            precondition("eta2 <= eta", eta2 <= eta, eta, eta2),
            precondition("measured ray envelope psi1 <= C1", env1 <= params.C1, params.C1, env1),
            precondition("measured ray envelope psi2 <= C1", env2 <= params.C1, params.C1, env2),
            _converged(d_base, d_fine),
        ],
        details={
            "Ap": Ap,
            "eta": eta,
            "disk_radius": base_r,
            "segment_observed": seg_delta,
            "segment_bound": 9.0 * eta,
            "thresholds": {"r3": r3, "r4": r4, "r5": r5},
            "profile": [(rr, 18.0 * Ap * eta, v) for rr, v in d_profile],
        },
    )
    return [report_b, report_pi, report_c, report_eta, report_d]


# ---------------------------------------------------------------------------
# the final ratio bound
# ---------------------------------------------------------------------------


def check_theorem(
    build: PairBuild,
    eps: float = 1.0,
    grid: DiskGrid | None = None,
    threads: int | None = None,
) -> list[VerificationReport]:
    """Final bound sup over B(0, R^(1-delta)) of |psi2/psi1 - 1|, both forms.

    The constant form compares against 20*Ap*C1/R^(mu(1-delta)) and carries
    the activation preconditions R >= r1..r5; the accuracy form compares
    against eps/R^(mu(1-delta)) and requires R >= R0(eps).  Both reuse the
    same sampled supremum with a refinement-stability precondition.
    """
    spec = build.spec
    params = spec.params
    R, delta = spec.R, spec.delta
    derived = derive_constants(params, delta, eps=eps, p_override=build.p)
    radius = R ** (1.0 - delta)
    disk = _grid_for(radius, grid)

    excluded_counts: list[int] = []

    def magnitude(pts):
        vals, keep = _ratio_minus_one(build, pts)
        excluded_counts.append(int(np.sum(~keep)))
        return np.abs(vals)

    sup_base, sup_fine, fine_grid, profile = _refined_sup(magnitude, disk, threads)
    excluded_total = sum(excluded_counts)
    converged = _converged(sup_base, sup_fine)
    meas = build.measured
    ray_pre = [
        precondition("measured ray envelope psi1 <= C1",
                     meas.envelope_C1_a <= params.C1, params.C1, meas.envelope_C1_a),
        precondition("measured ray envelope psi2 <= C1",
                     meas.envelope_C1_b <= params.C1, params.C1, meas.envelope_C1_b),
    ]
    comp_pre = [
        precondition("psi1 zero counts within class rate",
                     meas.compliance_a.ok, meas.compliance_a.worst_bound,
                     float(meas.compliance_a.worst_count)),
        precondition("psi2 zero counts within class rate",
                     meas.compliance_b.ok, meas.compliance_b.worst_bound,
                     float(meas.compliance_b.worst_count)),
    ]
    details = {
        "R": R,
        "delta": delta,
        "p": build.p,
        "Ap": derived.Ap,
        "exponent": derived.exponent,
        "disk_radius": radius,
        "sup_base": sup_base,
        "sup_refined": sup_fine,
        "excluded_points": excluded_total,
    }
    constant_bound = derived.ratio_bound(R)
    report_const = VerificationReport(
        check="ratio-bound-constant-form",
        bound=constant_bound,
        observed=sup_fine,
        samples=fine_grid.size,
        preconditions=[
            precondition("R >= max(r1..r5)", R >= derived.max_small_radius,
                         derived.max_small_radius, R),
            converged,
        ] + ray_pre + comp_pre,
        details=dict(details, profile=[(rr, constant_bound, v) for rr, v in profile]),
    )
    eps_bound = derived.eps_bound(R)
    report_eps = VerificationReport(
        check="ratio-bound-accuracy-form",
        bound=eps_bound,
        observed=sup_fine,
        samples=fine_grid.size,
        preconditions=[
            precondition("R >= R0(eps)", R >= derived.R0, derived.R0, R),
            converged,
        ],
        details=dict(details, eps=eps, R0=derived.R0,
                     profile=[(rr, eps_bound, v) for rr, v in profile]),
    )
    return [report_const, report_eps]


# ---------------------------------------------------------------------------
# difference bound on the real segment
# ---------------------------------------------------------------------------


def check_remark5(
    build: PairBuild,
    eps: float = 1.0,
    samples: int = 4096,
) -> VerificationReport:
    """|psi2 - psi1| on [-R^(1-delta), R^(1-delta)] against the ratio bound
    times the measured sup of |psi1| there.

    The exponent in the bound is mu*(1-delta), following the ratio bound the
    chain actually establishes.
    """
    spec = build.spec
    R, delta = spec.R, spec.delta
    derived = derive_constants(spec.params, delta, eps=eps, p_override=build.p)
    half = R ** (1.0 - delta)

    def sups(n):
        xs = segment_points(-half + 0j, half + 0j, n)
        v1 = np.asarray(build.psi1.evaluate(xs))
        v2 = np.asarray(build.psi2.evaluate(xs))
        return float(np.max(np.abs(v2 - v1))), float(np.max(np.abs(v1)))

    diff_base, _ = sups(samples)
    diff_fine, sup_psi1 = sups(2 * samples)
    bound = derived.eps_bound(R) * sup_psi1
    return VerificationReport(
        check="difference-on-real-segment",
        bound=bound,
        observed=diff_fine,
        samples=2 * samples,
        preconditions=[
            precondition("R >= R0(eps)", R >= derived.R0, derived.R0, R),
            _converged(diff_base, diff_fine),
        ],
        details={
            "segment_half_length": half,
            "sup_psi1": sup_psi1,
            "eps": eps,
            "exponent": derived.exponent,
            "ratio_bound": derived.eps_bound(R),
        },
    )
