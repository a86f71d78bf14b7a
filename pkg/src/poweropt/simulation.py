"""Joint simulation of the asset and the short rate, with Monte Carlo pricing.

Two simulation measures are supported:

    risk-neutral   asset drift (r - q); used to validate the closed-form
                   prices by discounted-payoff averaging;
    real-world     asset drift (mu - q - c ln S) plus per-path likelihood
                   weights from the two-factor measure change, so that
                   weighted discounted payoffs again estimate the
                   risk-neutral price.

The default scheme advances ln S (exact exponential map back to S keeps
paths positive); a strong order-1.0 stochastic Runge-Kutta step on S
itself is available for path exports that follow the reference
simulation style.

Randomness is counter-based: paths are partitioned into fixed-size
blocks and block i draws from an independent Philox stream keyed by
(seed, i).  A path's increments therefore depend only on the seed, its
absolute index and the step count - identical whether blocks run
serially or in parallel, and stable under changes of the total path
count.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DomainError, UnsupportedConfigurationError
from .termstructure import MarketModel

__all__ = [
    "Scheme",
    "SimConfig",
    "PathSet",
    "McEstimate",
    "simulate_q",
    "simulate_realworld_weighted",
    "mc_price",
    "paths_to_csv",
    "export_paths",
    "asset_noise_integral",
    "figure1_market",
]

_BLOCK = 4096
_MASK64 = (1 << 64) - 1


class Scheme(str, Enum):
    LOG_EULER = "log_euler"
    STRONG_RK = "strong_rk"


@dataclass(frozen=True)
class SimConfig:
    n_paths: int
    n_steps: int
    seed: int
    scheme: Scheme = Scheme.LOG_EULER

    def __post_init__(self) -> None:
        if self.n_paths < 1:
            raise DomainError("n_paths must be at least 1")
        if self.n_steps < 1:
            raise DomainError("n_steps must be at least 1")


@dataclass(frozen=True)
class PathSet:
    """Simulated joint trajectories on a uniform step grid over [t, T].

    int_r holds the per-path trapezoid accumulation of the short rate;
    weights, when present, are the real-world likelihood ratios.
    """

    times: np.ndarray
    s_paths: np.ndarray
    r_paths: np.ndarray
    int_r: np.ndarray
    weights: np.ndarray | None = None

    @property
    def n_paths(self) -> int:
        return self.s_paths.shape[0]


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_paths: int


def _block_rng(seed: int, block: int) -> np.random.Generator:
    key = np.array([seed & _MASK64, block], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _simulate(
    model: MarketModel,
    t: float,
    T: float,
    r_t: float,
    s_t: float,
    cfg: SimConfig,
    real_world: bool,
) -> PathSet:
    if t < 0.0 or t >= T or T > model.horizon:
        raise DomainError(f"need 0 <= t < T <= horizon, got t={t}, T={T}")
    if s_t <= 0.0:
        raise DomainError(f"spot must be positive, got {s_t}")

    n_paths, n_steps = cfg.n_paths, cfg.n_steps
    dt = (T - t) / n_steps
    sqdt = math.sqrt(dt)
    times = np.linspace(t, T, n_steps + 1)
    lefts = times[:-1]

    alpha = model.alpha.sample(lefts)
    beta = model.beta.sample(lefts)
    sigma_r = model.sigma_r.sample(lefts)
    q = model.q.sample(lefts)
    sigma_s = model.sigma_s.sample(lefts)
    rho = model.rho.sample(lefts)
    mu = model.mu.sample(lefts)
    ortho = np.sqrt(np.clip(1.0 - rho**2, 0.0, None))
    c = model.c

    if real_world:
        # The two-factor measure change needs theta well defined everywhere.
        if np.max(np.abs(model.rho.values)) > 1.0 - 1e-9:
            raise UnsupportedConfigurationError(
                "real-world simulation requires |rho| bounded away from 1"
            )
        if np.min(model.sigma_s.values) <= 0.0:
            raise DomainError(
                "real-world simulation requires sigma_s > 0 on the whole grid"
            )

    s_paths = np.empty((n_paths, n_steps + 1))
    r_paths = np.empty((n_paths, n_steps + 1))
    int_r = np.empty(n_paths)
    weights = np.empty(n_paths) if real_world else None

    log_s0 = math.log(s_t)
    n_blocks = (n_paths + _BLOCK - 1) // _BLOCK
    for block in range(n_blocks):
        lo = block * _BLOCK
        nb = min(_BLOCK, n_paths - lo)
        rng = _block_rng(cfg.seed, block)
        # Full-width draw keeps path lo+j independent of the total path count.
        z = rng.standard_normal((n_steps, 2, _BLOCK))

        x = np.full(nb, log_s0)
        s = np.full(nb, s_t) if cfg.scheme is Scheme.STRONG_RK else None
        r = np.full(nb, r_t)
        acc_r = np.zeros(nb)
        log_w = np.zeros(nb) if real_world else None
        sb = s_paths[lo : lo + nb]
        rb = r_paths[lo : lo + nb]
        sb[:, 0] = s_t
        rb[:, 0] = r_t

        for k in range(n_steps):
            dB = sqdt * z[k, 0, :nb]
            dBp = sqdt * z[k, 1, :nb]
            ss, qk, rh, ok = sigma_s[k], q[k], rho[k], ortho[k]

            if real_world:
                theta1 = (mu[k] - c * x - r) / ss
                theta2 = -rh / ok * theta1
                log_w -= (
                    theta1 * dB + theta2 * dBp + 0.5 * (theta1**2 + theta2**2) * dt
                )
                rate_drift = mu[k] - qk - c * x
            else:
                rate_drift = r - qk

            if cfg.scheme is Scheme.LOG_EULER:
                x = x + (rate_drift - 0.5 * ss**2) * dt + ss * dB
                sb[:, k + 1] = x
            else:
                drift = rate_drift * s
                diffusion = ss * s
                support = s + drift * dt + diffusion * sqdt
                s = (
                    s
                    + drift * dt
                    + diffusion * dB
                    + (ss * support - diffusion) * (dB**2 - dt) / (2.0 * sqdt)
                )
                sb[:, k + 1] = s
                x = None  # real-world theta needs ln S; refreshed below

            r_new = r + (beta[k] - alpha[k] * r) * dt + sigma_r[k] * (rh * dB + ok * dBp)
            acc_r += 0.5 * dt * (r + r_new)
            r = r_new
            rb[:, k + 1] = r

            if cfg.scheme is Scheme.STRONG_RK:
                if np.any(s <= 0.0):
                    raise DomainError(
                        "strong Runge-Kutta step crossed zero; use the log-Euler "
                        "scheme or more steps"
                    )
                if real_world:
                    x = np.log(s)

        if cfg.scheme is Scheme.LOG_EULER:
            np.exp(sb[:, 1:], out=sb[:, 1:])
        int_r[lo : lo + nb] = acc_r
        if real_world:
            weights[lo : lo + nb] = np.exp(log_w)

    return PathSet(times=times, s_paths=s_paths, r_paths=r_paths, int_r=int_r,
                   weights=weights)


def simulate_q(
    model: MarketModel, t: float, T: float, r_t: float, s_t: float, cfg: SimConfig
) -> PathSet:
    """Simulate the joint dynamics under the risk-neutral measure."""
    return _simulate(model, t, T, r_t, s_t, cfg, real_world=False)


def simulate_realworld_weighted(
    model: MarketModel, t: float, T: float, r_t: float, s_t: float, cfg: SimConfig
) -> PathSet:
    """Simulate under the real-world drift, with per-path likelihood weights.

    The weights accumulate the exponential martingale of the market price
    of risk pair (theta1, theta2) against the driving increments, so the
    weight sample mean estimates 1 and weighted discounted payoffs
    estimate risk-neutral prices.
    """
    return _simulate(model, t, T, r_t, s_t, cfg, real_world=True)


def _payoff(s_terminal: np.ndarray, spec) -> np.ndarray:
    powered = s_terminal**spec.n
    k_eff = spec.effective_strike()
    if spec.side.value == "call":
        return np.maximum(powered - k_eff, 0.0)
    return np.maximum(k_eff - powered, 0.0)


def mc_price(paths: PathSet, spec) -> McEstimate:
    """Weighted discounted-payoff estimate of the option price.

    Weights default to 1 for risk-neutral path sets; the standard error
    is the sample standard deviation over sqrt(n_paths).
    """
    if paths.n_paths < 1:
        raise DomainError("empty path set")
    values = np.exp(-paths.int_r) * _payoff(paths.s_paths[:, -1], spec)
    if paths.weights is not None:
        values = paths.weights * values
    mean = float(np.mean(values))
    if paths.n_paths > 1:
        se = float(np.std(values, ddof=1) / math.sqrt(paths.n_paths))
    else:
        se = 0.0
    return McEstimate(mean=mean, std_error=se, n_paths=paths.n_paths)


def asset_noise_integral(paths: PathSet, model: MarketModel) -> np.ndarray:
    """Per-path integral of sigma_s against the asset Brownian motion.

    Reconstructed from the stored trajectories by removing the log-Euler
    drift, which recovers the accumulated diffusion increments exactly up
    to float rounding.  Only meaningful for log-Euler path sets.
    """
    lefts = paths.times[:-1]
    dt = np.diff(paths.times)
    drift = (
        paths.r_paths[:, :-1]
        - model.q.sample(lefts)
        - 0.5 * model.sigma_s.sample(lefts) ** 2
    ) @ dt
    return np.log(paths.s_paths[:, -1] / paths.s_paths[:, 0]) - drift


def paths_to_csv(paths: PathSet) -> str:
    """Asset paths as CSV text: one row per step, one column per path.

    Values carry 17 significant digits so a fixed seed renders
    byte-identical output.
    """
    header = "time," + ",".join(f"path_{i}" for i in range(paths.n_paths))
    lines = [header]
    for k, tk in enumerate(paths.times):
        row = ",".join(f"{v:.17g}" for v in paths.s_paths[:, k])
        lines.append(f"{tk:.17g},{row}")
    return "\n".join(lines) + "\n"


def export_paths(paths: PathSet, destination: str | os.PathLike) -> Path:
    """Write the asset paths to a CSV file, creating parent directories."""
    dest = Path(destination)
    if dest.parent and not dest.parent.exists():
        dest.parent.mkdir(parents=True, exist_ok=True)
    dest.write_text(paths_to_csv(paths))
    return dest


def figure1_market(c: float, horizon: float = 100.0) -> MarketModel:
    """Reference single-asset market for the path-export comparison.

    Drift 0.005, no dividend, volatility 0.006, unit spot, log-price
    mean-reversion c (0 gives geometric Brownian motion); the rate block
    is identically zero so only the asset dynamics matter.
    """
    return MarketModel.constant(
        horizon, mu=0.005, q=0.0, sigma_s=0.006, alpha=0.0, beta=0.0,
        sigma_r=0.0, rho=0.0, c=c,
    )
