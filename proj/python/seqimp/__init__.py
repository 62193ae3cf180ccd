"""Sequence-impedance modelling and stability analysis of a grid-tied VSC."""

from ._seqimp import (
    ConfigError,
    InfeasibleOperatingPoint,
    SearchDomainError,
    SingularMatrixError,
    config_keys,
    load_admittance,
    loop_impedance,
    marginal_pll,
    measure,
    nyquist,
    passivity_crossings,
    run_command,
    simulate,
    verify,
)

__all__ = [
    "ConfigError",
    "InfeasibleOperatingPoint",
    "SearchDomainError",
    "SingularMatrixError",
    "config_keys",
    "load_admittance",
    "loop_impedance",
    "marginal_pll",
    "measure",
    "nyquist",
    "passivity_crossings",
    "run_command",
    "simulate",
    "verify",
]
