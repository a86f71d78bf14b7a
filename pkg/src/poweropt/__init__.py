"""European power option pricing engine.

Extended Vasicek short rate, exponential Ornstein-Uhlenbeck asset with
continuous dividend, time-dependent Brownian correlation.  Closed-form
prices for both power payoff conventions via two equivalent evaluation
routes, with a Monte Carlo engine and measure-change validators.
"""

__version__ = "0.1.0"

from .analytics import (
    BivariateSpec,
    bond_price,
    std_normal_cdf,
    truncated_bivariate_expectation,
)
from .errors import DomainError, MarketFileError, UnsupportedConfigurationError
from .marketfile import MarketSpecDocument, dump_document, load_document, parse_document
from .pricing import (
    OptionSide,
    OptionSpec,
    PayoffVariant,
    PriceResult,
    PricingMethod,
    cross_method_gap,
    parity_residual,
    parity_terms,
    price_option,
)
from .simulation import (
    McEstimate,
    PathSet,
    Scheme,
    SimConfig,
    asset_noise_integral,
    export_paths,
    figure1_market,
    mc_price,
    paths_to_csv,
    simulate_q,
    simulate_realworld_weighted,
)
from .termstructure import (
    MarketModel,
    PiecewiseFn,
    TimeGrid,
    VarianceBundle,
    lambda_integral,
    m_factor,
    variance_bundle,
)

__all__ = [
    "__version__",
    "BivariateSpec",
    "DomainError",
    "MarketFileError",
    "MarketModel",
    "MarketSpecDocument",
    "McEstimate",
    "OptionSide",
    "OptionSpec",
    "PathSet",
    "PayoffVariant",
    "PiecewiseFn",
    "PriceResult",
    "PricingMethod",
    "Scheme",
    "SimConfig",
    "TimeGrid",
    "UnsupportedConfigurationError",
    "VarianceBundle",
    "asset_noise_integral",
    "bond_price",
    "cross_method_gap",
    "dump_document",
    "export_paths",
    "figure1_market",
    "lambda_integral",
    "load_document",
    "m_factor",
    "mc_price",
    "parse_document",
    "parity_residual",
    "parity_terms",
    "paths_to_csv",
    "price_option",
    "simulate_q",
    "simulate_realworld_weighted",
    "std_normal_cdf",
    "truncated_bivariate_expectation",
    "variance_bundle",
]
