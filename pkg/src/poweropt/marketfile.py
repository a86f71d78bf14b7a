"""Market specification documents: one YAML file determines a pricing run.

Layout::

    grid:
      knots: [0.0, 1.0]          # shared time grid, starts at 0
    coefficients:                # one value per grid segment
      alpha:   [0.1]
      beta:    [0.005]
      sigma_r: [0.01]
      mu:      [0.08]
      q:       [0.01]
      sigma_s: [0.2]
      rho:     [0.3]
    c: 0.0                       # log-price mean-reversion constant
    state:   {t: 0.0, T: 1.0, r_t: 0.03, s_t: 100.0}
    option:  {n: 2.0, strike: 9000.0, variant: power_strike, side: call}
    sim:     {paths: 200000, steps: 512, seed: 1, scheme: log_euler}   # optional

The same pydantic document doubles as the request body of the HTTP
service, so a file and an API call validate identically.
"""

from __future__ import annotations

from pathlib import Path

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import MarketFileError
from .pricing import OptionSide, OptionSpec, PayoffVariant
from .simulation import Scheme, SimConfig
from .termstructure import MarketModel

__all__ = [
    "MarketSpecDocument",
    "load_document",
    "parse_document",
    "dump_document",
]

_DEFAULT_PATHS = 200_000
_DEFAULT_STEPS = 512


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridBlock(_Block):
    knots: list[float] = Field(min_length=2)

    @model_validator(mode="after")
    def _check(self) -> "GridBlock":
        if self.knots[0] != 0.0:
            raise ValueError("knots must start at 0")
        if any(b <= a for a, b in zip(self.knots, self.knots[1:])):
            raise ValueError("knots must be strictly increasing")
        return self


class CoefficientBlock(_Block):
    alpha: list[float]
    beta: list[float]
    sigma_r: list[float]
    mu: list[float]
    q: list[float]
    sigma_s: list[float]
    rho: list[float]


class StateBlock(_Block):
    t: float = Field(ge=0.0)
    T: float
    r_t: float
    s_t: float = Field(gt=0.0)


class OptionBlock(_Block):
    n: float = Field(gt=0.0)
    strike: float = Field(gt=0.0)
    variant: PayoffVariant = PayoffVariant.POWER_STRIKE
    side: OptionSide = OptionSide.CALL


class SimBlock(_Block):
    paths: int = Field(default=_DEFAULT_PATHS, ge=1)
    steps: int = Field(default=_DEFAULT_STEPS, ge=1)
    seed: int = 0
    scheme: Scheme = Scheme.LOG_EULER


class MarketSpecDocument(_Block):
    grid: GridBlock
    coefficients: CoefficientBlock
    c: float = 0.0
    state: StateBlock
    option: OptionBlock
    sim: SimBlock | None = None

    @model_validator(mode="after")
    def _semantics(self) -> "MarketSpecDocument":
        n_segments = len(self.grid.knots) - 1
        for name in ("alpha", "beta", "sigma_r", "mu", "q", "sigma_s", "rho"):
            values = getattr(self.coefficients, name)
            if len(values) != n_segments:
                raise ValueError(
                    f"coefficients.{name}: expected {n_segments} values "
                    f"(one per grid segment), got {len(values)}"
                )
        if any(abs(v) > 1.0 for v in self.coefficients.rho):
            raise ValueError("coefficients.rho: values must lie in [-1, 1]")
        for name in ("sigma_r", "sigma_s", "q"):
            if any(v < 0.0 for v in getattr(self.coefficients, name)):
                raise ValueError(f"coefficients.{name}: values must be nonnegative")
        horizon = self.grid.knots[-1]
        if not self.state.t <= self.state.T <= horizon:
            raise ValueError(
                f"state: need t <= T <= horizon, got t={self.state.t}, "
                f"T={self.state.T}, horizon={horizon}"
            )
        return self

    def to_market_model(self) -> MarketModel:
        return MarketModel.from_segments(
            self.grid.knots,
            alpha=self.coefficients.alpha,
            beta=self.coefficients.beta,
            sigma_r=self.coefficients.sigma_r,
            mu=self.coefficients.mu,
            q=self.coefficients.q,
            sigma_s=self.coefficients.sigma_s,
            rho=self.coefficients.rho,
            c=self.c,
        )

    def to_option_spec(self) -> OptionSpec:
        return OptionSpec(
            n=self.option.n,
            strike=self.option.strike,
            maturity=self.state.T,
            variant=self.option.variant,
            side=self.option.side,
        )

    def to_sim_config(self) -> SimConfig:
        sim = self.sim if self.sim is not None else SimBlock()
        return SimConfig(
            n_paths=sim.paths, n_steps=sim.steps, seed=sim.seed, scheme=sim.scheme
        )


def parse_document(text: str, source: str = "<string>") -> MarketSpecDocument:
    """Parse and validate a document from YAML text.

    Syntax errors are reported with the YAML line; semantic errors with
    the offending field path.
    """
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise MarketFileError(f"{source}: YAML parse error: {exc}") from exc
    if not isinstance(raw, dict):
        raise MarketFileError(f"{source}: expected a mapping at top level")
    try:
        return MarketSpecDocument.model_validate(raw)
    except ValidationError as exc:
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or '<document>'}: {err['msg']}"
            for err in exc.errors()
        )
        raise MarketFileError(f"{source}: {details}") from exc


def load_document(path: str | Path) -> MarketSpecDocument:
    """Load a market specification document from a YAML file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise MarketFileError(f"cannot read market file {path}: {exc}") from exc
    return parse_document(text, source=str(path))


def dump_document(document: MarketSpecDocument) -> str:
    """Canonical YAML rendering; re-parsing yields an identical document."""
    return yaml.safe_dump(
        document.model_dump(mode="json", exclude_none=True), sort_keys=False
    )
