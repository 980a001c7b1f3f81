"""Seasonal ARIMA (Box-Jenkins) modelling toolkit."""

from .core import SplitSeries, TimeSeries, from_csv, split
from .correlogram import Correlogram, acf, candidate_grid, correlogram, pacf
from .sarima import (
    FitOptions,
    ForecastResult,
    SarimaFit,
    SarimaOrder,
    coefficient_tests,
    fit,
    forecast,
    loglik,
    simulate,
)
from .stattests import TestReport, adf_test, ljung_box, shapiro_wilk
from .transform import (
    TransformRecord,
    boxcox,
    difference,
    estimate_lambda,
    inverse_boxcox,
    undifference,
)

__version__ = "0.1.0"

__all__ = [
    "Correlogram",
    "FitOptions",
    "ForecastResult",
    "SarimaFit",
    "SarimaOrder",
    "SplitSeries",
    "TestReport",
    "TimeSeries",
    "TransformRecord",
    "acf",
    "adf_test",
    "boxcox",
    "candidate_grid",
    "coefficient_tests",
    "correlogram",
    "difference",
    "estimate_lambda",
    "fit",
    "forecast",
    "from_csv",
    "inverse_boxcox",
    "ljung_box",
    "loglik",
    "pacf",
    "shapiro_wilk",
    "simulate",
    "split",
    "undifference",
]
