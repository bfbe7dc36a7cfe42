"""Closed-form results: diagonal-cover probabilities for Y-only rounds,
their large-d normal approximation, and lifetime asymptotics of the unbiased
dynamics.

A single round of Y measurements erases the logical pair only when every
qubit of one of the two lattice diagonals (2d-1 qubits each, one shared
qubit, 4d-3 in the union) is measured.  Summing the binomial weight of all
measurement patterns containing a full diagonal gives the failure rate; the
survival rate is its complement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "YFailureInput",
    "y_fail_probability",
    "y_fail_probability_exact",
    "y_success_probability",
    "y_fail_normal_approx",
    "lifetime_ps0",
    "lifetime_ps1",
]


@dataclass(frozen=True)
class YFailureInput:
    """Distance and per-qubit Y-measurement probability."""

    d: int
    p_y: float

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"distance must be >= 2, got {self.d}")
        if not 0.0 <= self.p_y <= 1.0:
            raise ValueError(f"p_y must be in [0, 1], got {self.p_y}")

    @property
    def n_qubits(self) -> int:
        return self.d * self.d + (self.d - 1) * (self.d - 1)


def _coefficient(k: int, n: int, d: int) -> int:
    """Number of k-subsets of the n qubits containing at least one full
    diagonal: 2 C(n-(2d-1), k-(2d-1)), minus the double-counted patterns
    containing both diagonals once k >= 4d-3."""
    single, union = 2 * d - 1, 4 * d - 3
    c = 2 * math.comb(n - single, k - single)
    if k >= union:
        c -= math.comb(n - union, k - union)
    return c


def y_fail_probability(d: int, p_y: float) -> float:
    """Probability that one round of Y measurements at rate p_y covers a
    full diagonal.  Log-domain evaluation with compensated summation; the
    result is accurate to better than 1e-12 relative error for d <= 15."""
    inp = YFailureInput(d, p_y)
    n = inp.n_qubits
    if p_y == 0.0:
        return 0.0
    if p_y == 1.0:
        return 1.0
    lp, lq = math.log(p_y), math.log1p(-p_y)
    terms = []
    for k in range(2 * d - 1, n + 1):
        c = _coefficient(k, n, d)
        if c == 0:
            continue
        terms.append(math.log(c) + k * lp + (n - k) * lq)
    top = max(terms)
    return math.exp(top) * math.fsum(math.exp(t - top) for t in terms)


def y_fail_probability_exact(d: int, p_y: Fraction) -> Fraction:
    """Exact rational evaluation of the same sum (used by the oracle tests)."""
    p = Fraction(p_y)
    if not 0 <= p <= 1:
        raise ValueError(f"p_y must be in [0, 1], got {p_y}")
    n = d * d + (d - 1) * (d - 1)
    q = 1 - p
    total = Fraction(0)
    for k in range(2 * d - 1, n + 1):
        total += _coefficient(k, n, d) * p**k * q ** (n - k)
    return total


def y_success_probability(d: int, p_y: float) -> float:
    """Probability that the logical pair survives one Y-only round."""
    return 1.0 - y_fail_probability(d, p_y)


def _normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def y_fail_normal_approx(d: int, p_y: float) -> float:
    """Two-Gaussian approximation of the diagonal-cover probability.

    Each shifted binomial sum is replaced by the Gaussian mass over its
    support, giving 2 p^(2d-1) G1 - p^(4d-3) G2.  Both G factors approach 1
    as d grows, so the approximation tends to 0 for p_y < 1 and to 1 at
    p_y = 1 (those endpoint limits are returned directly).  Requires d >= 3:
    at d = 2 the second binomial has zero variance.
    """
    inp = YFailureInput(d, p_y)
    n = inp.n_qubits
    n1 = n - (2 * d - 1)
    n2 = n - (4 * d - 3)
    if p_y == 0.0:
        return 0.0
    if p_y == 1.0:
        return 1.0
    if n1 <= 0 or n2 <= 0:
        raise ValueError(f"degenerate shifted binomial at d={d}")
    p = p_y

    def gauss_mass(m):
        mu = m * p
        sigma = math.sqrt(m * p * (1.0 - p))
        return _normal_cdf((m + 0.5 - mu) / sigma) - _normal_cdf((-0.5 - mu) / sigma)

    return 2.0 * p ** (2 * d - 1) * gauss_mass(n1) - p ** (4 * d - 3) * gauss_mass(n2)


def lifetime_ps0(d: int, p_m: float) -> float:
    """Lifetime without stabilizer rounds: -log(n) / log(1 - p_m), the time
    until every one of the n = d^2 + (d-1)^2 qubits has been measured."""
    if d < 2:
        raise ValueError(f"distance must be >= 2, got {d}")
    if not 0.0 < p_m < 1.0:
        raise ValueError(f"p_m must be strictly inside (0, 1), got {p_m}")
    n = d * d + (d - 1) * (d - 1)
    return -math.log(n) / math.log1p(-p_m)


def lifetime_ps1(d: int, p_y: float, exponent: int | None = None) -> float:
    """Lifetime with full stabilizer restoration: p_y ** -(4d - 2).

    The per-round killing configuration has probability p_y^(4d-2), so the
    survival probability after t rounds is (1 - p_y^(4d-2))^t and the
    lifetime is the inverse of the per-round rate; a lifetime must grow with
    d, hence the inverse power (the direct power would shrink).  The
    exponent is overridable: the geometric diagonal count would suggest
    2d-1 per diagonal, while the default 4d-2 is the literature value.
    """
    if d < 2:
        raise ValueError(f"distance must be >= 2, got {d}")
    if not 0.0 < p_y <= 1.0:
        raise ValueError(f"p_y must be in (0, 1], got {p_y}")
    if exponent is None:
        exponent = 4 * d - 2
    return p_y ** (-exponent)
