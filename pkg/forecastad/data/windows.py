import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from forecastad.exceptions import ParameterError, SeriesTooShortError

if TYPE_CHECKING:
    from .frame import TimeSeriesFrame

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WindowSpec:
    """
    Geometry of input/forecast windows.

    :param input_len: L, timepoints fed to the forecaster.
    :param horizon: h, gap between the end of the input window and the forecast window.
    :param forecast_len: L~, timepoints forecast per window; also the stride between windows.
    """

    input_len: int
    horizon: int
    forecast_len: int

    def __post_init__(self):
        if self.input_len < 1:
            raise ParameterError('input_len', self.input_len, 'must be >= 1')
        if self.horizon < 0:
            raise ParameterError('horizon', self.horizon, 'must be >= 0')
        if self.forecast_len < 1:
            raise ParameterError('forecast_len', self.forecast_len, 'must be >= 1')

    def __str__(self):
        return f'(L={self.input_len}, h={self.horizon}, L~={self.forecast_len})'

    @property
    def offset(self) -> int:
        """First timepoint that receives a forecast (L + h)."""
        return self.input_len + self.horizon

    @property
    def min_points(self) -> int:
        return self.input_len + self.horizon + self.forecast_len

    def count(self, n_points: int) -> int:
        """K = floor((S - L - h) / L~), never negative."""
        return max((n_points - self.offset) // self.forecast_len, 0)

    def forecast_span(self, n_points: int) -> tuple[int, int]:
        """[L + h, L + h + K * L~): the timepoints covered by forecast windows."""
        return self.offset, self.offset + self.count(n_points) * self.forecast_len

    def serialize(self) -> dict:
        return {'input_len': self.input_len, 'horizon': self.horizon, 'forecast_len': self.forecast_len}


@dataclass(frozen=True)
class WindowPair:
    k: int
    input_range: range
    target_range: range


def make_windows(frame: 'TimeSeriesFrame | int', spec: WindowSpec) -> list[WindowPair]:
    """All K window pairs of a frame (or a series length); target ranges tile [L + h, L + h + K * L~)."""
    n_points = frame if isinstance(frame, int) else frame.n_points
    n_windows = spec.count(n_points)
    if n_windows < 1:
        raise SeriesTooShortError(n_points, spec.min_points, spec)
    pairs = []
    for k in range(n_windows):
        start = k * spec.forecast_len
        target_start = spec.offset + start
        pairs.append(
            WindowPair(k, range(start, start + spec.input_len), range(target_start, target_start + spec.forecast_len))
        )
    logger.debug('make_windows: %s window pair(s) for %s timepoints %s', n_windows, n_points, spec)
    return pairs


class WindowDataset:
    """
    Flattened (input, target) pairs gathered lazily from a scaled value matrix.

    Inputs are row-major (L, m) windows flattened to L * m features, targets (L~, m) flattened to L~ * m.
    Batches are gathered by fancy indexing, so memory stays at one batch instead of K windows.
    """

    def __init__(self, values: np.ndarray, spec: WindowSpec, indices=None):
        self.values = np.asarray(values, dtype=np.float64)
        self.spec = spec
        n_windows = spec.count(self.values.shape[0])
        if n_windows < 1:
            raise SeriesTooShortError(self.values.shape[0], spec.min_points, spec)
        self.indices = np.arange(n_windows) if indices is None else np.asarray(indices, dtype=np.int64)
        self._input_offsets = np.arange(spec.input_len)
        self._target_offsets = spec.offset + np.arange(spec.forecast_len)

    def __len__(self) -> int:
        return self.indices.shape[0]

    @property
    def n_tags(self) -> int:
        return self.values.shape[1]

    @property
    def input_dims(self) -> tuple[int, int]:
        return self.spec.input_len, self.n_tags

    @property
    def output_dims(self) -> tuple[int, int]:
        return self.spec.forecast_len, self.n_tags

    def batch(self, positions) -> tuple[np.ndarray, np.ndarray]:
        """Inputs and targets for the windows at the given positions of this dataset."""
        starts = self.indices[np.asarray(positions, dtype=np.int64)] * self.spec.forecast_len
        inputs = self.values[starts[:, None] + self._input_offsets]
        targets = self.values[starts[:, None] + self._target_offsets]
        return inputs.reshape(len(starts), -1), targets.reshape(len(starts), -1)

    def split(self, holdout: float) -> tuple['WindowDataset', 'WindowDataset | None']:
        """Split off the trailing fraction of windows as a holdout set (time order is kept)."""
        if not 0 <= holdout < 1:
            raise ParameterError('holdout', holdout, 'must be in [0, 1)')
        n_holdout = int(round(len(self) * holdout))
        if n_holdout == 0 or n_holdout == len(self):
            return self, None
        head, tail = self.indices[:-n_holdout], self.indices[-n_holdout:]
        return WindowDataset(self.values, self.spec, head), WindowDataset(self.values, self.spec, tail)
