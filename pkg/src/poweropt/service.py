"""HTTP service exposing the pricing engine.

Endpoints take a full market specification document (the same schema the
YAML files use) so one request body determines a run:

    POST /price      closed-form prices, one or both evaluation routes
    POST /bond       zero-coupon bond price and its inputs
    POST /validate   Monte Carlo vs closed form, parity, measure-change checks
    POST /simulate   CSV path exports (document-driven or the reference figure)
    GET  /health     liveness probe

Domain errors from the numerical core map to 400 with error_class
"domain"; malformed documents are rejected by schema validation (422).
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .analytics import bond_price
from .errors import DomainError
from .marketfile import MarketSpecDocument
from .pricing import (
    OptionSide,
    OptionSpec,
    PriceResult,
    PricingMethod,
    parity_residual,
    parity_terms,
    price_option,
)
from .simulation import (
    McEstimate,
    Scheme,
    SimConfig,
    figure1_market,
    mc_price,
    paths_to_csv,
    simulate_q,
    simulate_realworld_weighted,
)
from .termstructure import variance_bundle

FIGURE1_HORIZON = 100.0
FIGURE1_STEPS = 10_000
FIGURE1_SEED = 7

app = FastAPI(title="poweropt", version=__version__)


@app.exception_handler(DomainError)
async def _domain_error(request: Request, exc: DomainError) -> JSONResponse:
    return JSONResponse(
        status_code=400, content={"error_class": "domain", "detail": str(exc)}
    )


@app.exception_handler(ArithmeticError)
async def _arithmetic_error(request: Request, exc: ArithmeticError) -> JSONResponse:
    return JSONResponse(
        status_code=500, content={"error_class": "internal", "detail": str(exc)}
    )


def _sentinel(x: float) -> float | str:
    """Non-finite d1/d2 sentinels travel as strings; JSON has no infinity."""
    return x if math.isfinite(x) else str(x)


class BundleOut(BaseModel):
    mean_int_r: float
    int_q: float
    var_x: float
    var_y: float
    rho_eff: float
    total_var: float


class PriceLeg(BaseModel):
    method: PricingMethod
    price: float
    term_a: float
    term_b: float
    d1: float | str
    d2: float | str


class PriceRequest(BaseModel):
    document: MarketSpecDocument
    method: str = Field(default="both", pattern="^(martingale|forward|both)$")


class PriceResponse(BaseModel):
    legs: list[PriceLeg]
    bundle: BundleOut
    gap: float | None = None
    gap_relative: float | None = None
    parity_residual: float


def _leg(result: PriceResult) -> PriceLeg:
    return PriceLeg(
        method=result.method,
        price=result.price,
        term_a=result.term_a,
        term_b=result.term_b,
        d1=_sentinel(result.d1),
        d2=_sentinel(result.d2),
    )


@app.post("/price", response_model=PriceResponse)
def price_endpoint(req: PriceRequest) -> PriceResponse:
    model = req.document.to_market_model()
    spec = req.document.to_option_spec()
    state = req.document.state
    methods = {
        "martingale": [PricingMethod.MARTINGALE],
        "forward": [PricingMethod.FORWARD_MEASURE],
        "both": [PricingMethod.MARTINGALE, PricingMethod.FORWARD_MEASURE],
    }[req.method]

    results = [
        price_option(model, spec, m, state.t, state.r_t, state.s_t) for m in methods
    ]
    gap = gap_rel = None
    if len(results) == 2:
        gap = results[0].price - results[1].price
        gap_rel = gap / max(abs(results[0].price), abs(results[1].price), 1e-300)
    residual = parity_residual(model, spec, methods[0], state.t, state.r_t, state.s_t)
    b = results[0].bundle
    return PriceResponse(
        legs=[_leg(r) for r in results],
        bundle=BundleOut(
            mean_int_r=b.mean_int_r, int_q=b.int_q, var_x=b.var_x, var_y=b.var_y,
            rho_eff=b.rho_eff, total_var=b.total_var,
        ),
        gap=gap,
        gap_relative=gap_rel,
        parity_residual=residual,
    )


class BondRequest(BaseModel):
    document: MarketSpecDocument


class BondResponse(BaseModel):
    price: float
    mean_int_r: float
    var_x: float


@app.post("/bond", response_model=BondResponse)
def bond_endpoint(req: BondRequest) -> BondResponse:
    model = req.document.to_market_model()
    state = req.document.state
    if state.t == state.T:
        return BondResponse(price=1.0, mean_int_r=0.0, var_x=0.0)
    bundle = variance_bundle(model, state.t, state.T, state.r_t)
    return BondResponse(
        price=bond_price(model, state.t, state.T, state.r_t),
        mean_int_r=bundle.mean_int_r,
        var_x=bundle.var_x,
    )


class ValidateRequest(BaseModel):
    document: MarketSpecDocument
    paths: int | None = Field(default=None, ge=2)
    steps: int | None = Field(default=None, ge=1)
    seed: int | None = None


class CheckOut(BaseModel):
    label: str
    reference: float
    estimate: float
    std_error: float
    z: float | str
    threshold: float
    passed: bool


class ValidateResponse(BaseModel):
    checks: list[CheckOut]
    parity_residual: float
    parity_tolerance: float
    parity_passed: bool
    girsanov_skipped: str | None = None
    passed: bool
    n_paths: int
    n_steps: int
    seed: int


def _check(label: str, reference: float, estimate, threshold: float) -> CheckOut:
    """z-score an estimate against its reference.

    A zero standard error means every sampled value coincided (a
    deterministic limit, or a payoff below Monte Carlo resolution); the
    comparison then falls back to an absolute tolerance.
    """
    if estimate.std_error > 0.0:
        z = (estimate.mean - reference) / estimate.std_error
        passed = abs(z) <= threshold
    else:
        passed = abs(estimate.mean - reference) <= 1e-9 * max(1.0, abs(reference))
        z = 0.0 if passed else math.inf
    return CheckOut(
        label=label, reference=reference, estimate=estimate.mean,
        std_error=estimate.std_error, z=_sentinel(z), threshold=threshold,
        passed=passed,
    )


@app.post("/validate", response_model=ValidateResponse)
def validate_endpoint(req: ValidateRequest) -> ValidateResponse:
    doc = req.document
    model = doc.to_market_model()
    spec = doc.to_option_spec()
    state = doc.state
    base = doc.to_sim_config()
    cfg = SimConfig(
        n_paths=req.paths if req.paths is not None else base.n_paths,
        n_steps=req.steps if req.steps is not None else base.n_steps,
        seed=req.seed if req.seed is not None else base.seed,
        scheme=base.scheme,
    )

    closed = price_option(
        model, spec, PricingMethod.MARTINGALE, state.t, state.r_t, state.s_t
    )
    paths = simulate_q(model, state.t, state.T, state.r_t, state.s_t, cfg)
    checks = [_check("option_mc_vs_closed_form", closed.price, mc_price(paths, spec), 3.0)]

    discounts = np.exp(-paths.int_r)
    bond_est = McEstimate(
        mean=float(discounts.mean()),
        std_error=float(discounts.std(ddof=1) / math.sqrt(paths.n_paths)),
        n_paths=paths.n_paths,
    )
    checks.append(
        _check(
            "bond_mc_vs_closed_form",
            bond_price(model, state.t, state.T, state.r_t),
            bond_est,
            3.0,
        )
    )

    girsanov_skipped = None
    try:
        weighted = simulate_realworld_weighted(
            model, state.t, state.T, state.r_t, state.s_t, cfg
        )
    except DomainError as exc:
        girsanov_skipped = str(exc)
    else:
        checks.append(
            _check("girsanov_weighted_price", closed.price, mc_price(weighted, spec), 3.0)
        )
        w = weighted.weights
        weight_est = McEstimate(
            mean=float(w.mean()),
            std_error=float(w.std(ddof=1) / math.sqrt(w.size)),
            n_paths=w.size,
        )
        checks.append(_check("girsanov_weight_mean", 1.0, weight_est, 5.0))

    residual = parity_residual(
        model, spec, PricingMethod.MARTINGALE, state.t, state.r_t, state.s_t
    )
    a_full, b_full = parity_terms(
        model, spec, PricingMethod.MARTINGALE, state.t, state.r_t, state.s_t
    )
    parity_tol = 1e-12 * max(1.0, abs(a_full), abs(b_full))
    parity_ok = abs(residual) <= parity_tol

    return ValidateResponse(
        checks=checks,
        parity_residual=residual,
        parity_tolerance=parity_tol,
        parity_passed=parity_ok,
        girsanov_skipped=girsanov_skipped,
        passed=parity_ok and all(c.passed for c in checks),
        n_paths=cfg.n_paths,
        n_steps=cfg.n_steps,
        seed=cfg.seed,
    )


class SimulateRequest(BaseModel):
    document: MarketSpecDocument | None = None
    figure1: bool = False
    figure1_horizon: float = FIGURE1_HORIZON
    figure1_steps: int = Field(default=FIGURE1_STEPS, ge=1)
    figure1_seed: int = FIGURE1_SEED


class FileOut(BaseModel):
    name: str
    content: str


class SimulateResponse(BaseModel):
    files: list[FileOut]


@app.post("/simulate", response_model=SimulateResponse)
def simulate_endpoint(req: SimulateRequest) -> SimulateResponse:
    if req.figure1:
        cfg = SimConfig(
            n_paths=1, n_steps=req.figure1_steps, seed=req.figure1_seed,
            scheme=Scheme.STRONG_RK,
        )
        files = []
        for name, c in (("gbm.csv", 0.0), ("expou.csv", 0.01)):
            market = figure1_market(c, horizon=req.figure1_horizon)
            paths = simulate_realworld_weighted(
                market, 0.0, req.figure1_horizon, 0.0, 1.0, cfg
            )
            files.append(FileOut(name=name, content=paths_to_csv(paths)))
        return SimulateResponse(files=files)

    if req.document is None:
        raise DomainError("simulate needs a document unless figure1 is requested")
    doc = req.document
    model = doc.to_market_model()
    state = doc.state
    paths = simulate_q(
        model, state.t, state.T, state.r_t, state.s_t, doc.to_sim_config()
    )
    return SimulateResponse(files=[FileOut(name="paths.csv", content=paths_to_csv(paths))])


class HealthResponse(BaseModel):
    status: str
    version: str


@app.get("/health", response_model=HealthResponse)
def health_endpoint() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)
