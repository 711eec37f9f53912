"""Uniformized approximations of inhomogeneous Markov jump processes."""

from ._mjpapprox import (
    CapacityError,
    DegenerateMargin,
    DimensionError,
    DomainError,
    ErlangMixture,
    InvalidInput,
    Model,
    MphProfiles,
    NumericalError,
    PreconditionError,
    QSequence,
    SchemaError,
    TransitionResult,
    alpha_recursion,
    hazard_fit,
    iph_weights,
    mat_exp,
    mph_density,
    mph_mean,
    mph_simulate,
    oracle_density,
    product_integral,
    rate_experiment,
    ruin_curve,
    ruin_mc,
    transition_series,
)

__all__ = [name for name in dir() if not name.startswith("_")]
