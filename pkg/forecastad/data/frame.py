import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from forecastad.exceptions import (
    CsvParseError,
    CsvReadError,
    FrameInvariantError,
    InsufficientDataError,
    ParameterError,
    SchemaError,
)
from forecastad.utils import true_runs

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AttackInterval:
    """Labelled anomaly extent. Both bounds are inclusive timepoint indices."""

    start: int
    end: int
    targets: tuple[str, ...] = ()

    def __post_init__(self):
        if self.start > self.end:
            raise FrameInvariantError(f'attack interval starts after it ends: ({self.start}, {self.end})')
        object.__setattr__(self, 'targets', tuple(self.targets))

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def serialize(self) -> dict:
        return {'start': self.start, 'end': self.end, 'targets': list(self.targets)}


@dataclass(frozen=True, eq=False)
class TimeSeriesFrame:
    """
    S timepoints x m tags on a strictly increasing time axis (seconds).

    Arrays are copied and frozen on construction, so a frame can be shared read-only between workers.
    `labels` is an optional 0/1 flag per timepoint, `attack_intervals` the labelled extents with their targets.
    """

    timestamps: np.ndarray
    values: np.ndarray
    tag_names: tuple[str, ...]
    labels: np.ndarray | None = None
    attack_intervals: tuple[AttackInterval, ...] = field(default=())

    def __post_init__(self):
        timestamps = np.array(self.timestamps, dtype=np.float64)
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise FrameInvariantError(f'values must be a 2-d matrix, got {values.ndim} dimension(s)')
        n_points, n_tags = values.shape
        if timestamps.shape != (n_points,):
            raise FrameInvariantError(f'{timestamps.shape[0]} timestamps for {n_points} rows')
        if len(self.tag_names) != n_tags:
            raise FrameInvariantError(f'{len(self.tag_names)} tag names for {n_tags} columns')
        if n_points > 1 and not np.all(np.diff(timestamps) > 0):
            raise FrameInvariantError('timestamps must be strictly increasing')
        if not np.all(np.isfinite(values)):
            raise FrameInvariantError('values must be finite')

        labels = None
        if self.labels is not None:
            labels = np.array(self.labels, dtype=np.int8)
            if labels.shape != (n_points,):
                raise FrameInvariantError(f'{labels.shape[0]} labels for {n_points} rows')
        for interval in self.attack_intervals:
            if not 0 <= interval.start <= interval.end < n_points:
                raise FrameInvariantError(f'attack interval {interval} outside [0, {n_points})')

        for array in (timestamps, values, labels):
            if array is not None:
                array.setflags(write=False)
        object.__setattr__(self, 'timestamps', timestamps)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, 'tag_names', tuple(self.tag_names))
        object.__setattr__(self, 'attack_intervals', tuple(self.attack_intervals))

    @property
    def n_points(self) -> int:
        return self.values.shape[0]

    @property
    def n_tags(self) -> int:
        return self.values.shape[1]

    @property
    def step(self) -> float | None:
        """Grid spacing in seconds, or None if the time axis is not uniform."""
        if self.n_points < 2:
            return None
        deltas = np.diff(self.timestamps)
        return float(deltas[0]) if np.allclose(deltas, deltas[0], rtol=0, atol=1e-9) else None

    def with_values(self, values) -> 'TimeSeriesFrame':
        return TimeSeriesFrame(self.timestamps, values, self.tag_names, self.labels, self.attack_intervals)

    def trim_head(self, n: int) -> 'TimeSeriesFrame':
        """Drop the first n timepoints (plant warm-up). Attack intervals are clipped and re-indexed."""
        if n < 0:
            raise ParameterError('head_trim', n, 'must be >= 0')
        if n == 0:
            return self
        intervals = []
        for interval in self.attack_intervals:
            if interval.end < n:
                continue
            intervals.append(AttackInterval(max(interval.start, n) - n, interval.end - n, interval.targets))
        return TimeSeriesFrame(
            self.timestamps[n:],
            self.values[n:],
            self.tag_names,
            None if self.labels is None else self.labels[n:],
            tuple(intervals),
        )

    def label_mask(self) -> np.ndarray:
        """Per-timepoint anomaly membership; labels win, otherwise derived from the attack intervals."""
        if self.labels is not None:
            return self.labels.astype(bool)
        mask = np.zeros(self.n_points, dtype=bool)
        for interval in self.attack_intervals:
            mask[interval.start : interval.end + 1] = True
        return mask


@dataclass(frozen=True)
class CsvSchema:
    """
    Column mapping for tag CSV files.

    :param timestamp_column: Column holding integer/float seconds or date-time strings.
    :param label_column: Optional "Normal/Attack" style column.
    :param tag_columns: Tag columns in model order. None means every remaining column.
    :param attack_label: Label value (case and whitespace insensitive) that marks an attack.
    :param normal_label: Label value that marks normal operation.
    :param dayfirst: Parse date-time strings day first (SWaT exports use dd/mm/yyyy).
    """

    timestamp_column: str = 'Timestamp'
    label_column: str | None = 'Normal/Attack'
    tag_columns: tuple[str, ...] | None = None
    attack_label: str = 'Attack'
    normal_label: str = 'Normal'
    dayfirst: bool = False


def _normalise_label(value) -> str:
    return ''.join(str(value).split()).lower()


def _parse_timestamps(path, column: pd.Series, dayfirst: bool) -> np.ndarray:
    numeric = pd.to_numeric(column, errors='coerce')
    if not numeric.isna().any():
        return numeric.to_numpy(dtype=np.float64)
    try:
        parsed = pd.to_datetime(column.astype(str).str.strip(), dayfirst=dayfirst, format='mixed')
    except (ValueError, TypeError) as e:
        row = int(np.flatnonzero(numeric.isna().to_numpy())[0])
        raise CsvParseError(path, str(column.name), row, column.iloc[row]) from e
    return parsed.astype('int64').to_numpy() / 1e9


def _intervals_from_labels(labels: np.ndarray) -> tuple[AttackInterval, ...]:
    return tuple(AttackInterval(start, end) for start, end in true_runs(labels))


def load_csv(path, schema: CsvSchema | None = None) -> TimeSeriesFrame:
    """
    Read a SWaT-style tag file: header row, one timestamp column, one column per tag, optional label column.
    Rows are kept in file order; contiguous attack labels become attack intervals (without targets,
    use load_attacks() for target tags).
    """
    schema = schema or CsvSchema()
    try:
        df = pd.read_csv(path, encoding='utf-8', skipinitialspace=True)
    except UnicodeDecodeError as e:
        raise CsvReadError(path, f'not UTF-8 encoded (byte {e.start})') from e
    except pd.errors.EmptyDataError as e:
        raise CsvReadError(path, 'file is empty') from e
    except pd.errors.ParserError as e:
        raise CsvReadError(path, str(e).strip()) from e
    df.columns = [str(c).strip() for c in df.columns]

    label_column = schema.label_column if schema.label_column in df.columns else None
    if schema.label_column and label_column is None:
        logger.debug('load_csv: %s has no label column %r, loading without labels', path, schema.label_column)

    if schema.tag_columns is None:
        tag_columns = [c for c in df.columns if c not in (schema.timestamp_column, label_column)]
    else:
        tag_columns = list(schema.tag_columns)
    missing = [c for c in [schema.timestamp_column, *tag_columns] if c not in df.columns]
    if missing:
        raise SchemaError(path, missing)
    if len(df) < 2:
        raise InsufficientDataError(str(path), 2, len(df))

    values = np.empty((len(df), len(tag_columns)), dtype=np.float64)
    for i, column in enumerate(tag_columns):
        parsed = pd.to_numeric(df[column], errors='coerce')
        bad = np.flatnonzero(parsed.isna().to_numpy() | ~np.isfinite(parsed.to_numpy(dtype=np.float64)))
        if bad.size:
            raise CsvParseError(path, column, int(bad[0]), df[column].iloc[bad[0]])
        values[:, i] = parsed.to_numpy(dtype=np.float64)

    timestamps = _parse_timestamps(path, df[schema.timestamp_column], schema.dayfirst)

    labels = None
    intervals: tuple[AttackInterval, ...] = ()
    if label_column is not None:
        normalised = df[label_column].map(_normalise_label)
        attack, normal = _normalise_label(schema.attack_label), _normalise_label(schema.normal_label)
        unknown = np.flatnonzero(~normalised.isin([attack, normal]).to_numpy())
        if unknown.size:
            raise CsvParseError(path, label_column, int(unknown[0]), df[label_column].iloc[unknown[0]])
        labels = (normalised == attack).to_numpy(dtype=np.int8)
        intervals = _intervals_from_labels(labels)

    logger.info('load_csv: %s: %s timepoints, %s tags, %s attack interval(s)', path, len(df), len(tag_columns),
                len(intervals))
    return TimeSeriesFrame(timestamps, values, tuple(tag_columns), labels, intervals)


def save_csv(frame: TimeSeriesFrame, path, schema: CsvSchema | None = None, float_format: str = '%.10g'):
    """Write a frame in the layout load_csv() reads. Timestamps are written as seconds."""
    schema = schema or CsvSchema()
    df = pd.DataFrame(frame.values, columns=list(frame.tag_names))
    timestamps = frame.timestamps
    if np.all(timestamps == np.round(timestamps)):
        timestamps = timestamps.astype(np.int64)
    df.insert(0, schema.timestamp_column, timestamps)
    if frame.labels is not None and schema.label_column:
        df[schema.label_column] = np.where(frame.labels.astype(bool), schema.attack_label, schema.normal_label)
    df.to_csv(path, index=False, float_format=float_format, lineterminator='\n')


def save_attacks(path, intervals, tag_names=None):
    document = {'attacks': [interval.serialize() for interval in intervals]}
    if tag_names is not None:
        document['tag_names'] = list(tag_names)
    with open(path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(document, f, sort_keys=False)


def load_attacks(path) -> tuple[AttackInterval, ...]:
    with open(path, 'r', encoding='utf-8') as f:
        document = yaml.safe_load(f) or {}
    return tuple(
        AttackInterval(int(item['start']), int(item['end']), tuple(item.get('targets', ())))
        for item in document.get('attacks', [])
    )


def with_attacks(frame: TimeSeriesFrame, intervals) -> TimeSeriesFrame:
    """Replace the frame's attack intervals (e.g. with a sidecar that knows the targets)."""
    return TimeSeriesFrame(frame.timestamps, frame.values, frame.tag_names, frame.labels, tuple(intervals))


def resample_uniform(frame: TimeSeriesFrame, step: float) -> TimeSeriesFrame:
    """
    Re-interpolate every tag onto an arithmetic grid t0, t0 + step, ... that spans the input range.
    Values are linearly interpolated per tag; labels and attack intervals follow the nearest input timepoint.
    """
    if step <= 0:
        raise ParameterError('step', step, 'must be > 0')
    if frame.n_points < 2:
        raise InsufficientDataError('resample_uniform', 2, frame.n_points)

    t0, t_end = frame.timestamps[0], frame.timestamps[-1]
    n_grid = int(np.floor((t_end - t0) / step + 1e-9)) + 1
    grid = t0 + step * np.arange(n_grid, dtype=np.float64)

    if n_grid == frame.n_points and np.array_equal(grid, frame.timestamps):
        logger.debug('resample_uniform: input is already on a %s s grid', step)
        return frame

    values = np.column_stack([np.interp(grid, frame.timestamps, frame.values[:, i]) for i in range(frame.n_tags)])

    # nearest input index per grid point, ties go to the earlier timepoint
    right = np.clip(np.searchsorted(frame.timestamps, grid, side='left'), 1, frame.n_points - 1)
    left = right - 1
    nearest = np.where(grid - frame.timestamps[left] <= frame.timestamps[right] - grid, left, right)

    labels = None if frame.labels is None else frame.labels[nearest]
    intervals = []
    for interval in frame.attack_intervals:
        positions = np.flatnonzero((nearest >= interval.start) & (nearest <= interval.end))
        if positions.size:
            intervals.append(AttackInterval(int(positions[0]), int(positions[-1]), interval.targets))

    logger.debug('resample_uniform: %s -> %s timepoints (step %s s)', frame.n_points, n_grid, step)
    return TimeSeriesFrame(grid, values, frame.tag_names, labels, tuple(intervals))
