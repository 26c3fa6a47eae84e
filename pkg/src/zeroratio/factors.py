"""Primary factors and truncated canonical products.

The building block is the genus-p primary factor

    E_p(xi) = (1 - xi) * exp(xi + xi^2/2 + ... + xi^p/p)

whose logarithm, for |xi| < 1, is the tail series -sum_{k>p} xi^k / k.  On
the guard disk |xi| <= p/(p+1) the log obeys |log E_p(xi)| <= |xi|^(p+1),
which is what every tail estimate in the package rests on.  Products over
zero sets are always accumulated in log form with compensated summation and
exponentiated once, so the tiny quantity (product - 1) never suffers
cancellation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .constants import ParameterError


class DomainError(ValueError):
    """Raised when an argument leaves the validity region of a bound."""


# ---------------------------------------------------------------------------
# zero sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroSet:
    """A finite multiset of nonzero complex numbers with multiplicities.

    Entries are (location, multiplicity) pairs kept sorted by modulus
    ascending.  The origin is excluded by construction; put origin zeros into
    a model's explicit origin order instead.
    """

    entries: tuple[tuple[complex, int], ...]

    def __post_init__(self):
        normalized = []
        for loc, mult in self.entries:
            loc = complex(loc)
            if loc == 0:
                raise ParameterError("zero sets must not contain the origin")
            if not isinstance(mult, int) or isinstance(mult, bool) or mult < 1:
                raise ParameterError(f"multiplicity must be a positive integer, got {mult!r}")
            normalized.append((loc, mult))
        normalized.sort(key=lambda e: (abs(e[0]), e[0].real, e[0].imag))
        object.__setattr__(self, "entries", tuple(normalized))

    @classmethod
    def from_points(cls, points: Iterable[complex], multiplicities: Iterable[int] | None = None) -> "ZeroSet":
        pts = [complex(p) for p in points]
        if multiplicities is None:
            mults = [1] * len(pts)
        else:
            mults = [int(m) for m in multiplicities]
            if len(mults) != len(pts):
                raise ParameterError("points and multiplicities must have equal length")
        return cls(tuple(zip(pts, mults)))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.entries)

    def locations(self) -> np.ndarray:
        return np.array([loc for loc, _ in self.entries], dtype=complex)

    def multiplicities(self) -> np.ndarray:
        return np.array([m for _, m in self.entries], dtype=int)

    def moduli(self) -> np.ndarray:
        return np.abs(self.locations()) if self.entries else np.zeros(0)

    def count_within(self, r: float) -> int:
        """Number of zeros with modulus <= r, counted with multiplicity."""
        return int(sum(m for loc, m in self.entries if abs(loc) <= r))

    def min_modulus(self) -> float:
        return abs(self.entries[0][0]) if self.entries else math.inf

    def max_modulus(self) -> float:
        return abs(self.entries[-1][0]) if self.entries else 0.0

    def restrict(self, min_modulus: float = 0.0, max_modulus: float = math.inf) -> "ZeroSet":
        return ZeroSet(
            tuple(e for e in self.entries if min_modulus <= abs(e[0]) <= max_modulus)
        )

    def merged_with(self, other: "ZeroSet") -> "ZeroSet":
        return ZeroSet(self.entries + other.entries)

    # -- CSV interchange: header re,im,mult ---------------------------------

    def to_csv(self, path) -> None:
        lines = ["re,im,mult"]
        for loc, mult in self.entries:
            lines.append(f"{loc.real!r},{loc.imag!r},{mult}")
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path) -> "ZeroSet":
        entries: list[tuple[complex, int]] = []
        with open(path) as fh:
            header = fh.readline().strip().lower()
            if header.replace(" ", "") != "re,im,mult":
                raise ParameterError(f"expected header 're,im,mult', got {header!r}")
            for lineno, line in enumerate(fh, start=2):
                line = line.strip()
                if not line:
                    continue
                parts = line.split(",")
                if len(parts) != 3:
                    raise ParameterError(f"line {lineno}: expected three fields")
                entries.append((complex(float(parts[0]), float(parts[1])), int(parts[2])))
        return cls(tuple(entries))


# ---------------------------------------------------------------------------
# primary factors
# ---------------------------------------------------------------------------


def guard_radius(p: int) -> float:
    """Radius p/(p+1) of the disk on which |log E_p(xi)| <= |xi|^(p+1) is used."""
    if p < 0:
        raise ParameterError("genus must be nonnegative")
    return p / (p + 1.0)


# Relative slack admitted at the guard circle itself.
_GUARD_SLACK = 1.0 + 1e-12


def log_primary_factor(xi: complex, p: int) -> complex:
    """log E_p(xi) = -sum_{k >= p+1} xi^k / k for |xi| <= p/(p+1).

    Summed term by term until the geometric remainder bound
    |xi|^(K+1) / ((K+1)(1 - |xi|)) drops below 1e-18 relative to the leading
    term, so no cancellation with the explicit log ever occurs.
    """
    if p < 0:
        raise ParameterError("genus must be nonnegative")
    xi = complex(xi)
    radius = guard_radius(p)
    mag = abs(xi)
    if mag == 0.0:
        return 0.0 + 0.0j
    if mag > radius * _GUARD_SLACK:
        raise DomainError(
            f"|xi| = {mag:.6g} outside the genus-{p} guard radius {radius:.6g}"
        )
    total = 0.0 + 0.0j
    comp = 0.0 + 0.0j
    power = xi ** (p + 1)
    leading = abs(power) / (p + 1)
    k = p + 1
    while True:
        term = power / k
        # Kahan step
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        power *= xi
        k += 1
        remainder = abs(power) / (k * (1.0 - mag))
        if remainder <= 1e-18 * max(leading, abs(total)):
            break
        if k > 100000:  # unreachable for mag <= 20/21, pure safety stop
            raise ArithmeticError("primary-factor series failed to converge")
    return -total


def primary_factor(xi: complex, p: int) -> complex:
    """The genus-p primary factor E_p(xi), valid for all xi.

    Inside the guard disk it exponentiates the tail series (fully accurate
    even when E_p is within 1e-16 of 1); outside it multiplies the explicit
    form (1 - xi) * exp(xi + ... + xi^p/p).
    """
    xi = complex(xi)
    if p == 0:
        return 1.0 - xi
    if abs(xi) <= guard_radius(p):
        return cmath.exp(log_primary_factor(xi, p))
    partial = 0.0 + 0.0j
    power = 1.0 + 0.0j
    for k in range(1, p + 1):
        power *= xi
        partial += power / k
    return (1.0 - xi) * cmath.exp(partial)


def log_primary_factor_grid(xi: np.ndarray, p: int) -> np.ndarray:
    """Vectorized log E_p over an array, series inside a split radius, explicit
    log1p form outside.

    The split radius shrinks the explicit branch to where the cancellation
    between log1p(-xi) and the partial sum stays below ~1e-13 relative; the
    series branch uses a fixed term count chosen from the split radius.
    """
    if p < 1:
        raise ParameterError("vectorized path requires genus >= 1")
    xi = np.asarray(xi, dtype=complex)
    mag = np.abs(xi)
    radius = guard_radius(p)
    if np.any(mag > radius * _GUARD_SLACK):
        worst = float(mag.max())
        raise DomainError(
            f"|xi| = {worst:.6g} outside the genus-{p} guard radius {radius:.6g}"
        )
    # The explicit branch subtracts the degree-p partial sum from log1p(-xi),
    # losing ~(p+1)(p+2)*eps*|xi| absolutely against a result of size
    # |xi|^(p+1)/(p+1).  Choosing the split so that split^p covers that loss
    # keeps the branch boundary agreement at the few-1e-13 level for genus
    # up to ~12 (drifting toward 1e-11 at genus 20, where the guard disk
    # leaves no room to push the split further out).
    s_req = (3.3e-3 * (p + 1) * (p + 2)) ** (1.0 / p)
    split = min(0.90 * radius, max(0.25, s_req))
    out = np.zeros_like(xi)

    small = mag <= split
    if np.any(small):
        xs = xi[small]
        # term count from the geometric remainder of the tail series at the split
        terms = 8
        while (
            split**terms * (p + 1) / ((p + terms + 1) * (1.0 - split)) > 1e-19
            and terms < 4000
        ):
            terms += 4
        acc = np.zeros_like(xs)
        for k in range(p + terms, p, -1):  # Horner in xi on 1/k coefficients
            acc = acc * xs + 1.0 / k
        out[small] = -(xs ** (p + 1)) * acc
    large = ~small
    if np.any(large):
        xl = xi[large]
        partial = np.zeros_like(xl)
        power = np.ones_like(xl)
        for k in range(1, p + 1):
            power = power * xl
            partial = partial + power / k
        out[large] = np.log1p(-xl) + partial
    return out


def log_primary_factor_full(xi: np.ndarray, p: int) -> np.ndarray:
    """log E_p over an array with no domain restriction.

    Delegates to the guarded series/explicit split inside the guard disk;
    beyond it the explicit log1p(-xi) + partial-sum form carries no
    cancellation risk because |log E_p| is of order one there.  The real
    part is -inf exactly at xi = 1.
    """
    xi = np.asarray(xi, dtype=complex)
    if p == 0:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log1p(-xi)
    out = np.empty_like(xi)
    inside = np.abs(xi) <= guard_radius(p)
    if np.any(inside):
        out[inside] = log_primary_factor_grid(xi[inside], p)
    far = ~inside
    if np.any(far):
        xl = xi[far]
        partial = np.zeros_like(xl)
        power = np.ones_like(xl)
        for k in range(1, p + 1):
            power = power * xl
            partial = partial + power / k
        with np.errstate(divide="ignore", invalid="ignore"):
            out[far] = np.log1p(-xl) + partial
    return out


def primary_factor_grid(z: np.ndarray, location: complex, p: int) -> np.ndarray:
    """E_p(z / location) over an array, explicit form, valid for any ratio."""
    z = np.asarray(z, dtype=complex)
    xi = z / location
    if p == 0:
        return 1.0 - xi
    partial = np.zeros_like(xi)
    power = np.ones_like(xi)
    for k in range(1, p + 1):
        power = power * xi
        partial = partial + power / k
    return (1.0 - xi) * np.exp(partial)


# ---------------------------------------------------------------------------
# complex expm1 and the e^w - 1 bound
# ---------------------------------------------------------------------------


def cexpm1(w):
    """e^w - 1 for complex w (scalar or array), accurate for tiny |w|.

    Splits into expm1(x)*cos(y) - 2*sin(y/2)^2 + i*exp(x)*sin(y) for
    w = x + iy, which avoids the cancellation of exp(w) - 1.
    """
    w = np.asarray(w, dtype=complex)
    x = w.real
    y = w.imag
    real = np.expm1(x) * np.cos(y) - 2.0 * np.sin(y / 2.0) ** 2
    imag = np.exp(x) * np.sin(y)
    out = real + 1j * imag
    if out.ndim == 0:
        return complex(out)
    return out


def exp_minus_one_bound_check(w: complex) -> tuple[float, float]:
    """Return (|e^w - 1|, |w| * e^|w|); the first never exceeds the second."""
    w = complex(w)
    mag = abs(w)
    return abs(cexpm1(w)), mag * math.exp(mag)


# ---------------------------------------------------------------------------
# truncated tail products
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TailProductSpec:
    """A genus-p product over zeros at or beyond a cutoff radius.

    `neglected_bound` optionally records an analytic estimate of the log-mass
    of zeros the finite set leaves out (for models that stand in for a
    function with infinitely many zeros); it is carried through evaluation as
    an error budget, never silently applied.
    """

    zeros: ZeroSet
    genus: int
    cutoff: float
    neglected_bound: float = 0.0

    def __post_init__(self):
        if self.genus < 1:
            raise ParameterError("tail products need genus >= 1")
        if self.cutoff <= 0:
            raise ParameterError("cutoff must be positive")
        if self.zeros.entries and self.zeros.min_modulus() < self.cutoff * (1 - 1e-12):
            raise ParameterError(
                f"zero of modulus {self.zeros.min_modulus():.6g} below cutoff {self.cutoff:.6g}"
            )


def tail_power_sum(spec: TailProductSpec) -> float:
    """sum of mult * |z_n|^-(genus+1) over the tail zeros, compensated."""
    k = spec.genus + 1
    return math.fsum(m * abs(loc) ** (-k) for loc, m in spec.zeros)


def log_tail_product(spec: TailProductSpec, z: complex) -> complex:
    """Compensated sum of mult * log E_p(z / z_n) over the tail zeros.

    Raises DomainError if any ratio z / z_n leaves the guard disk.
    """
    z = complex(z)
    total = 0.0 + 0.0j
    comp = 0.0 + 0.0j
    for loc, mult in spec.zeros:
        term = mult * log_primary_factor(z / loc, spec.genus)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def tail_product(spec: TailProductSpec, z: complex) -> complex:
    """The tail product at a single point, via the compensated log sum."""
    return cmath.exp(log_tail_product(spec, z))


def log_tail_product_grid(spec: TailProductSpec, z: np.ndarray, block: int = 256) -> np.ndarray:
    """Vectorized log tail product over an array of points.

    Zeros are consumed in fixed-order blocks with a compensated accumulator
    across blocks, so results are deterministic and the rounding stays at the
    few-ulp level even for thousands of factors.
    """
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    total = np.zeros_like(flat)
    comp = np.zeros_like(flat)
    entries = spec.zeros.entries
    for start in range(0, len(entries), block):
        chunk = entries[start : start + block]
        locs = np.array([loc for loc, _ in chunk], dtype=complex)
        mults = np.array([m for _, m in chunk], dtype=float)
        ratios = flat[:, None] / locs[None, :]
        logs = log_primary_factor_grid(ratios, spec.genus)
        term = logs @ mults
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total.reshape(z.shape)


def tail_product_grid(spec: TailProductSpec, z: np.ndarray) -> np.ndarray:
    return np.exp(log_tail_product_grid(spec, z))


def tail_log_bound(spec: TailProductSpec, z_modulus: float) -> float:
    """Analytic bound |log product| <= |z|^(p+1) * sum |z_n|^-(p+1) + budget."""
    k = spec.genus + 1
    return z_modulus**k * tail_power_sum(spec) + spec.neglected_bound
