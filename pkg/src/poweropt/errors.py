"""Exception classes shared across the pricing engine.

The CLI maps these onto its exit-code classes: market-file problems are
reported as parse/semantic errors, everything raised from the numerical
core as domain errors.
"""


class DomainError(ValueError):
    """Inputs are outside the mathematical domain of an operation."""


class UnsupportedConfigurationError(DomainError):
    """A configuration the engine deliberately does not simulate.

    Raised e.g. for |rho| indistinguishable from 1 in the real-world
    measure change, where the two-factor Girsanov construction degenerates.
    """


class MarketFileError(ValueError):
    """A market specification document failed to parse or validate."""
