"""
Residual processing: per-tag residuals, tag weights, the p-powered weighted mean error, EWMA smoothing and the
99th percentile threshold.

The transform order is fixed: weight and power per tag, average over tags, then smooth the scalar series, then
threshold. The threshold is fitted on the same fully processed series that detection runs on.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from forecastad.data.frame import TimeSeriesFrame
from forecastad.exceptions import InsufficientDataError, ParameterError, ShapeMismatchError
from forecastad.utils import percentile

logger = logging.getLogger(__name__)

EPSILON_FLOOR = 1e-8
THRESHOLD_PERCENTILE = 99.0

# S x m matrix of absolute forecast errors, E_ti = |forecast_ti - actual_ti|.
ResidualMatrix = np.ndarray


@dataclass(frozen=True)
class ErrorConfig:
    """
    :param power: p, residuals are raised to this power before averaging over tags.
    :param half_life: EWMA half-life in timepoints; None disables smoothing.
    :param use_weights: Weight tags by predictability (see `tag_weights`); uniform weights otherwise.
    """

    power: float = 6.0
    half_life: int | None = None
    use_weights: bool = True
    epsilon_floor: float = EPSILON_FLOOR

    def __post_init__(self):
        if not self.power >= 1:
            raise ParameterError('detector.power', self.power, 'must be >= 1')
        if self.half_life is not None and self.half_life < 1:
            raise ParameterError('detector.half_life', self.half_life, 'must be >= 1')
        if not 0 < self.epsilon_floor < 0.5:
            raise ParameterError('detector.epsilon_floor', self.epsilon_floor, 'must be in (0, 0.5)')

    def serialize(self) -> dict:
        return {
            'power': self.power,
            'half_life': self.half_life,
            'use_weights': self.use_weights,
            'epsilon_floor': self.epsilon_floor,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'ErrorConfig':
        return cls(
            float(data.get('power', 6.0)),
            data.get('half_life'),
            bool(data.get('use_weights', True)),
            float(data.get('epsilon_floor', EPSILON_FLOOR)),
        )


def residuals(actual: TimeSeriesFrame | np.ndarray, forecast: np.ndarray) -> ResidualMatrix:
    actual = np.asarray(actual.values if isinstance(actual, TimeSeriesFrame) else actual, dtype=np.float64)
    forecast = np.asarray(forecast, dtype=np.float64)
    if actual.shape != forecast.shape:
        raise ShapeMismatchError('forecast', actual.shape, forecast.shape)
    return np.abs(forecast - actual)


def _span(values: np.ndarray, span: tuple[int, int] | None) -> np.ndarray:
    return values if span is None else values[span[0] : span[1]]


def tag_weights(
    train_residuals: ResidualMatrix, span: tuple[int, int] | None = None, floor: float = EPSILON_FLOOR
) -> np.ndarray:
    """
    Per-tag weights from training residuals: tags whose 99th percentile error is small relative to the largest
    error overall weigh more.

    eps_i = P99(E_i), E = max(max E, floor), eps^_i = clip(eps_i / E, floor, 1 - floor), w^_i = -ln eps^_i,
    w_i = w^_i / sum w^. The upper clip keeps every weight strictly positive; a matrix whose tags all share one
    percentile (including all zeros) yields uniform weights.
    """
    values = _span(np.asarray(train_residuals, dtype=np.float64), span)
    if values.ndim != 2 or values.shape[0] == 0:
        raise InsufficientDataError('tag_weights', 1, values.shape[0] if values.ndim else 0)
    eps = percentile(values, THRESHOLD_PERCENTILE, axis=0)
    largest = max(float(values.max()), floor)
    normalised = np.clip(eps / largest, floor, 1.0 - floor)
    raw = -np.log(normalised)
    weights = raw / raw.sum()
    logger.debug('tag_weights: eps %s, weights %s', eps, weights)
    return weights


def error_series(
    residual_matrix: ResidualMatrix, weights: np.ndarray | None = None, power: float = 1.0
) -> np.ndarray:
    """M_t = (1 / m) * sum_i w_i * E_ti ** p; uniform w_i = 1 when no weights are given."""
    values = np.asarray(residual_matrix, dtype=np.float64)
    n_tags = values.shape[1]
    w = np.ones(n_tags) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != (n_tags,):
        raise ShapeMismatchError('tag weights', (n_tags,), w.shape)
    powered = values if power == 1 else values**power
    return (powered * w).sum(axis=1) / n_tags


def ewma_alpha(half_life: float) -> float:
    """Smoothing factor whose impulse response halves every `half_life` steps."""
    if half_life < 1:
        raise ParameterError('half_life', half_life, 'must be >= 1')
    return 1.0 - math.exp(math.log(0.5) / half_life)


def ewma(series: np.ndarray, half_life: float) -> np.ndarray:
    """M'_0 = 0, M'_t = alpha * M_t + (1 - alpha) * M'_{t-1}."""
    alpha = ewma_alpha(half_life)
    series = np.asarray(series, dtype=np.float64)
    if series.size == 0:
        return series.copy()
    seeded = pd.Series(np.concatenate(([0.0], series[1:])))
    return seeded.ewm(alpha=alpha, adjust=False).mean().to_numpy()


def process(residual_matrix: ResidualMatrix, weights: np.ndarray | None, config: ErrorConfig) -> np.ndarray:
    """The full transform chain: weighted p-powered mean error, then EWMA when a half-life is set."""
    series = error_series(residual_matrix, weights if config.use_weights else None, config.power)
    if config.half_life is not None:
        series = ewma(series, config.half_life)
    return series


def fit_threshold(train_series: np.ndarray, span: tuple[int, int] | None = None) -> float:
    """T = 99th percentile (linear interpolation) of the training series over the forecast span."""
    values = _span(np.asarray(train_series, dtype=np.float64), span)
    if values.size == 0:
        raise InsufficientDataError('fit_threshold', 1, 0)
    return float(percentile(values, THRESHOLD_PERCENTILE))
