import logging
from dataclasses import dataclass

import numpy as np

from forecastad.exceptions import InsufficientDataError, ParameterError, ShapeMismatchError
from .frame import TimeSeriesFrame

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ScalingStats:
    """Per-tag mean and population standard deviation. Zero-variance tags carry std = 1."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=np.float64)
        std = np.array(self.std, dtype=np.float64)
        if mean.shape != std.shape or mean.ndim != 1:
            raise ShapeMismatchError('scaling statistics', mean.shape, std.shape)
        if not np.all(std > 0):
            raise ParameterError('scaling std', std.tolist(), 'must be strictly positive for every tag')
        mean.setflags(write=False)
        std.setflags(write=False)
        object.__setattr__(self, 'mean', mean)
        object.__setattr__(self, 'std', std)

    @property
    def n_tags(self) -> int:
        return self.mean.shape[0]

    def transform(self, values: np.ndarray) -> np.ndarray:
        self._check(values)
        return (values - self.mean) / self.std

    def inverse(self, values: np.ndarray) -> np.ndarray:
        self._check(values)
        return values * self.std + self.mean

    def _check(self, values: np.ndarray):
        if values.shape[-1] != self.n_tags:
            raise ShapeMismatchError('scaled values', f'(..., {self.n_tags})', values.shape)

    def to_dict(self) -> dict:
        return {'mean': self.mean.tolist(), 'std': self.std.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> 'ScalingStats':
        return cls(np.asarray(data['mean'], dtype=np.float64), np.asarray(data['std'], dtype=np.float64))


def fit_scaler(frame: TimeSeriesFrame) -> ScalingStats:
    """Fit on normal-operation (training) data only; the same statistics are reused for test data."""
    if frame.n_points == 0:
        raise InsufficientDataError('fit_scaler', 1, 0)
    mean = frame.values.mean(axis=0)
    std = frame.values.std(axis=0)
    constant = std == 0
    if constant.any():
        logger.warning(
            'fit_scaler: zero-variance tag(s) %s pass through centred with std = 1',
            [name for name, flag in zip(frame.tag_names, constant, strict=True) if flag],
        )
    return ScalingStats(mean, np.where(constant, 1.0, std))


def apply_scaler(frame: TimeSeriesFrame, stats: ScalingStats) -> TimeSeriesFrame:
    return frame.with_values(stats.transform(frame.values))
