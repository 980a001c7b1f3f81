"""Seasonal ARIMA: exact likelihood, estimation, simulation, forecasting."""

from .estimation import FitOptions, SarimaFit, aic, coefficient_tests, fit, from_params, refit_frozen, z_test
from .forecasting import ForecastResult, forecast, level_prediction, one_step_levels
from .model import (
    SarimaOrder,
    check_admissible,
    concentrated_loglik,
    loglik,
    run_filter,
    simulate,
    state_space,
)

__all__ = [
    "FitOptions",
    "ForecastResult",
    "SarimaFit",
    "SarimaOrder",
    "aic",
    "check_admissible",
    "coefficient_tests",
    "concentrated_loglik",
    "fit",
    "forecast",
    "from_params",
    "level_prediction",
    "loglik",
    "one_step_levels",
    "refit_frozen",
    "run_filter",
    "simulate",
    "state_space",
    "z_test",
]
