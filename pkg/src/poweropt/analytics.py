"""Gaussian primitives and the zero-coupon bond price.

The truncated bivariate expectation here is the single identity behind
every closed-form price in the engine: for unit normals W1, W2 with
correlation rho and any reals a, b, c, d, k,

    E[exp(c W1 + d W2) 1{a W1 + b W2 >= k}]
        = exp((c^2 + d^2 + 2 rho c d) / 2)
          * N((a c + b d + rho (a d + b c) - k) / sqrt(a^2 + b^2 + 2 rho a b))

Unconstrained expectations are recovered by pushing k far into the left
tail; the normal CDF saturates exactly to 0/1 there, so no special case
is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .termstructure import MarketModel, VarianceBundle, variance_bundle

__all__ = [
    "std_normal_cdf",
    "BivariateSpec",
    "truncated_bivariate_expectation",
    "bond_price",
]

_SQRT2 = math.sqrt(2.0)


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF via the complementary error function.

    Accurate to ~1e-16 absolute over the whole line and saturating to
    exactly 0.0 / 1.0 in the far tails.
    """
    return 0.5 * math.erfc(-x / _SQRT2)


@dataclass(frozen=True)
class BivariateSpec:
    """Inputs of the truncated bivariate expectation.

    The indicator direction (a, b) must be nondegenerate under the
    correlation: a^2 + b^2 + 2 rho a b > 0.
    """

    a: float
    b: float
    c: float
    d: float
    k: float
    rho: float

    def __post_init__(self) -> None:
        if not -1.0 <= self.rho <= 1.0:
            raise DomainError(f"correlation {self.rho} outside [-1, 1]")
        if self.direction_var <= 0.0:
            raise DomainError("degenerate indicator direction: a^2+b^2+2*rho*a*b <= 0")

    @property
    def direction_var(self) -> float:
        return self.a**2 + self.b**2 + 2.0 * self.rho * self.a * self.b


def truncated_bivariate_expectation(spec: BivariateSpec) -> float:
    """E[exp(c W1 + d W2) 1{a W1 + b W2 >= k}] for correlated unit normals."""
    a, b, c, d, k, rho = spec.a, spec.b, spec.c, spec.d, spec.k, spec.rho
    growth = math.exp(0.5 * (c * c + d * d + 2.0 * rho * c * d))
    shift = a * c + b * d + rho * (a * d + b * c)
    return growth * std_normal_cdf((shift - k) / math.sqrt(spec.direction_var))


def bond_price_from_bundle(bundle: VarianceBundle) -> float:
    """Zero-coupon bond from precomputed integrals: exp(-mean_int_r + var_x / 2)."""
    return math.exp(-bundle.mean_int_r + 0.5 * bundle.var_x)


def bond_price(model: MarketModel, t: float, T: float, r_t: float) -> float:
    """Price at t of the zero-coupon bond paying 1 at T.

    The integrated short rate is Gaussian with mean mean_int_r and
    variance var_x, so P(t, T) = exp(-mean_int_r + var_x / 2).  Always
    positive, with P(T, T) = 1, and log-affine in r_t with slope
    -m_factor(t, T).
    """
    if t > T:
        raise DomainError(f"bond_price requires t <= T, got t={t}, T={T}")
    if t == T:
        return 1.0
    return bond_price_from_bundle(variance_bundle(model, t, T, r_t))
