"""Time-dependent model coefficients and the deterministic integrals they feed.

All coefficients of the joint rate/asset model are piecewise-constant
functions on one shared time grid.  That choice makes the mean-reversion
kernel

    m(u, v) = integral_u^v exp(-integral_u^s alpha) ds

available in closed form segment by segment, so the only numerical
integration left anywhere in the closed-form pricers is the quadrature of
smooth exponential integrands (handled per segment with Gauss-Legendre
nodes, exact far beyond desk accuracy for this integrand class).

Derived quantities collected in :class:`VarianceBundle`:

    mean_int_r   conditional mean of integral_t^T r(s) ds given r_t
    int_q        integral_t^T q(s) ds
    var_x        variance of the integrated rate noise over [t, T]
    var_y        variance of the integrated asset log-noise over [t, T]
    rho_eff      correlation between the two integrated noises
    total_var    variance of their sum

These are the same numbers for every measure construction the pricing
formulas use (risk-neutral, real-world plus measure change, and both
forward-measure variants): the defining integrands coincide.

All types are immutable after construction and every operation is a pure
function of its inputs, so everything here can be shared freely across
threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError

__all__ = [
    "TimeGrid",
    "PiecewiseFn",
    "MarketModel",
    "VarianceBundle",
    "lambda_integral",
    "m_factor",
    "variance_bundle",
]


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing knots over [0, horizon], starting at 0."""

    knots: np.ndarray

    def __post_init__(self) -> None:
        knots = np.asarray(self.knots, dtype=float)
        object.__setattr__(self, "knots", knots)
        if knots.ndim != 1 or knots.size < 2:
            raise DomainError("time grid needs at least 2 knots")
        if knots[0] != 0.0:
            raise DomainError("time grid must start at 0")
        if not np.all(np.diff(knots) > 0.0):
            raise DomainError("time grid knots must be strictly increasing")

    @property
    def horizon(self) -> float:
        return float(self.knots[-1])

    @property
    def n_segments(self) -> int:
        return self.knots.size - 1

    def segment_index(self, t: float) -> int:
        """Index of the right-open segment containing t; horizon maps to the last one."""
        if t < 0.0 or t > self.horizon:
            raise DomainError(f"time {t} outside grid [0, {self.horizon}]")
        idx = int(np.searchsorted(self.knots, t, side="right")) - 1
        return min(idx, self.n_segments - 1)


@dataclass(frozen=True)
class PiecewiseFn:
    """Right-open piecewise-constant function on a :class:`TimeGrid`.

    Evaluation is total on [0, horizon]; the horizon itself takes the last
    segment's value (integrals are unaffected by that convention).
    """

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != (self.grid.n_segments,):
            raise DomainError(
                f"expected {self.grid.n_segments} segment values, got {values.shape}"
            )

    def __call__(self, t: float) -> float:
        return float(self.values[self.grid.segment_index(t)])

    def sample(self, times: np.ndarray) -> np.ndarray:
        """Vectorized evaluation (same right-open convention as __call__)."""
        times = np.asarray(times, dtype=float)
        if times.size and (times.min() < 0.0 or times.max() > self.grid.horizon):
            raise DomainError("sample times outside grid")
        idx = np.searchsorted(self.grid.knots, times, side="right") - 1
        return self.values[np.clip(idx, 0, self.grid.n_segments - 1)]

    def integral(self, t0: float, t1: float) -> float:
        """Exact integral over [t0, t1] (sum of clipped segment widths)."""
        if t0 > t1:
            raise DomainError(f"integral bounds reversed: {t0} > {t1}")
        if t0 < 0.0 or t1 > self.grid.horizon:
            raise DomainError("integral bounds outside grid")
        knots = self.grid.knots
        widths = np.minimum(knots[1:], t1) - np.maximum(knots[:-1], t0)
        return float(np.dot(self.values, np.clip(widths, 0.0, None)))


@dataclass(frozen=True)
class MarketModel:
    """All model coefficients on a common grid.

    alpha, beta, sigma_r parameterize the extended Vasicek short rate
    dr = (beta - alpha r) dt + sigma_r dZ; mu, q, sigma_s and the
    log-price mean-reversion constant c parameterize the exponential
    Ornstein-Uhlenbeck asset; rho is the instantaneous Brownian
    correlation between the two driving motions.
    """

    alpha: PiecewiseFn
    beta: PiecewiseFn
    sigma_r: PiecewiseFn
    mu: PiecewiseFn
    q: PiecewiseFn
    sigma_s: PiecewiseFn
    rho: PiecewiseFn
    c: float = 0.0

    def __post_init__(self) -> None:
        knots = self.grid.knots
        for name in ("beta", "sigma_r", "mu", "q", "sigma_s", "rho"):
            fn: PiecewiseFn = getattr(self, name)
            if not np.array_equal(fn.grid.knots, knots):
                raise DomainError(f"coefficient {name} not on the shared time grid")
        if np.any(np.abs(self.rho.values) > 1.0):
            raise DomainError("instantaneous correlation must satisfy |rho| <= 1")
        for name in ("sigma_r", "sigma_s", "q"):
            if np.any(getattr(self, name).values < 0.0):
                raise DomainError(f"{name} must be nonnegative")

    @property
    def grid(self) -> TimeGrid:
        return self.alpha.grid

    @property
    def horizon(self) -> float:
        return self.grid.horizon

    @classmethod
    def from_segments(
        cls,
        knots,
        *,
        alpha=0.0,
        beta=0.0,
        sigma_r=0.0,
        mu=0.0,
        q=0.0,
        sigma_s=0.0,
        rho=0.0,
        c: float = 0.0,
    ) -> "MarketModel":
        """Build a model from knots plus per-coefficient scalars or arrays.

        Scalars are broadcast to every segment; arrays must have one value
        per segment.
        """
        grid = TimeGrid(np.asarray(knots, dtype=float))

        def pw(v) -> PiecewiseFn:
            arr = np.asarray(v, dtype=float)
            if arr.ndim == 0:
                arr = np.full(grid.n_segments, float(arr))
            return PiecewiseFn(grid, arr)

        return cls(
            alpha=pw(alpha), beta=pw(beta), sigma_r=pw(sigma_r), mu=pw(mu),
            q=pw(q), sigma_s=pw(sigma_s), rho=pw(rho), c=float(c),
        )

    @classmethod
    def constant(cls, horizon: float, **coeffs) -> "MarketModel":
        """Single-segment model with constant coefficients on [0, horizon]."""
        return cls.from_segments([0.0, float(horizon)], **coeffs)


@dataclass(frozen=True)
class VarianceBundle:
    """Derived deterministic quantities consumed by every pricing formula."""

    mean_int_r: float
    int_q: float
    var_x: float
    var_y: float
    rho_eff: float
    total_var: float = field(init=False)

    def __post_init__(self) -> None:
        total = (
            self.var_x
            + self.var_y
            + 2.0 * self.rho_eff * math.sqrt(self.var_x) * math.sqrt(self.var_y)
        )
        object.__setattr__(self, "total_var", total)
        if self.var_x < 0.0 or self.var_y < 0.0 or self.total_var < 0.0:
            raise DomainError("variances must be nonnegative")

    @property
    def sigma_x(self) -> float:
        return math.sqrt(self.var_x)

    @property
    def sigma_y(self) -> float:
        return math.sqrt(self.var_y)


def lambda_integral(model: MarketModel, t: float) -> float:
    """Cumulative mean-reversion integral of alpha over [0, t]."""
    return model.alpha.integral(0.0, t)


def _segment_m(a: float, width: float) -> float:
    """integral_0^width exp(-a s) ds, stable for small a*width."""
    if a == 0.0:
        return width
    return -math.expm1(-a * width) / a


def m_factor(model: MarketModel, u: float, v: float) -> float:
    """Mean-reversion kernel m(u, v) = integral_u^v exp(-integral_u^s alpha) ds.

    Exact for the piecewise-constant alpha: each segment contributes its
    closed-form antiderivative, scaled by the decay accumulated since u.
    """
    if u > v:
        raise DomainError(f"m_factor requires u <= v, got u={u}, v={v}")
    if u < 0.0 or v > model.horizon:
        raise DomainError("m_factor bounds outside grid")
    knots = model.grid.knots
    alphas = model.alpha.values
    total = 0.0
    decay = 1.0  # exp(lambda(u) - lambda(segment start))
    lo = u
    i = model.grid.segment_index(u)
    while lo < v:
        hi = min(float(knots[i + 1]), v)
        a = float(alphas[i])
        width = hi - lo
        total += decay * _segment_m(a, width)
        decay *= math.exp(-a * width)
        lo = hi
        i += 1
    return total


@dataclass(frozen=True)
class _Piece:
    """One grid segment clipped to [t, T], with m(right end, T) precomputed."""

    lo: float
    hi: float
    alpha: float
    beta: float
    sigma_r: float
    q: float
    sigma_s: float
    rho: float
    m_right: float


def _pieces(model: MarketModel, t: float, T: float) -> list[_Piece]:
    knots = model.grid.knots
    bounds = [t] + [float(k) for k in knots if t < k < T] + [T]
    raw = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        i = model.grid.segment_index(lo)
        raw.append((lo, hi, i))
    pieces: list[_Piece] = []
    m_right = 0.0
    for lo, hi, i in reversed(raw):
        a = float(model.alpha.values[i])
        pieces.append(
            _Piece(
                lo=lo, hi=hi, alpha=a,
                beta=float(model.beta.values[i]),
                sigma_r=float(model.sigma_r.values[i]),
                q=float(model.q.values[i]),
                sigma_s=float(model.sigma_s.values[i]),
                rho=float(model.rho.values[i]),
                m_right=m_right,
            )
        )
        m_right = _segment_m(a, hi - lo) + math.exp(-a * (hi - lo)) * m_right
    pieces.reverse()
    return pieces


@lru_cache(maxsize=32)
def _gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def variance_bundle(
    model: MarketModel, t: float, T: float, r_t: float, quad_order: int = 8
) -> VarianceBundle:
    """All derived quantities over [t, T] given the short rate r_t at t.

    Integrals of piecewise-constant integrands are exact segment sums; the
    integrals involving the smooth kernel m(u, T) use per-piece
    Gauss-Legendre quadrature of the given order.  When either integrated
    noise is degenerate the effective correlation is reported as 0 (every
    use of it in the pricing formulas is multiplied by sigma_x * sigma_y,
    so the choice is value-neutral and avoids NaN).
    """
    if t >= T:
        raise DomainError(f"variance_bundle requires t < T, got t={t}, T={T}")
    if t < 0.0 or T > model.horizon:
        raise DomainError("variance_bundle bounds outside grid")
    if quad_order < 2:
        raise DomainError("quad_order must be at least 2")

    nodes, weights = _gauss_legendre(quad_order)
    var_x = 0.0
    var_y = 0.0
    int_q = 0.0
    rho_num = 0.0
    int_beta_m = 0.0
    for p in _pieces(model, t, T):
        width = p.hi - p.lo
        u = 0.5 * width * (nodes + 1.0) + p.lo
        half_w = 0.5 * width * weights
        delta = p.hi - u
        if p.alpha == 0.0:
            m_vals = delta + p.m_right
        else:
            decay = np.exp(-p.alpha * delta)
            m_vals = -np.expm1(-p.alpha * delta) / p.alpha + decay * p.m_right
        var_x += p.sigma_r**2 * float(np.dot(half_w, m_vals**2))
        int_beta_m += p.beta * float(np.dot(half_w, m_vals))
        rho_num += p.rho * p.sigma_r * p.sigma_s * float(np.dot(half_w, m_vals))
        var_y += p.sigma_s**2 * width
        int_q += p.q * width

    var_x = max(var_x, 0.0)
    sigma_xy = math.sqrt(var_x) * math.sqrt(var_y)
    if sigma_xy > 0.0:
        rho_eff = min(1.0, max(-1.0, rho_num / sigma_xy))
    else:
        rho_eff = 0.0
    mean_int_r = r_t * m_factor(model, t, T) + int_beta_m
    return VarianceBundle(
        mean_int_r=mean_int_r, int_q=int_q, var_x=var_x, var_y=var_y, rho_eff=rho_eff
    )
