from dataclasses import dataclass, field

import numpy as np

from forecastad.data.frame import TimeSeriesFrame
from forecastad.exceptions import ParameterError
from forecastad.utils import true_runs


@dataclass(frozen=True)
class GroundTruth:
    """Labeled anomaly windows (inclusive bounds) over a series of `n_points` timepoints, sorted and disjoint."""

    n_points: int
    windows: tuple[tuple[int, int], ...]
    targets: tuple[tuple[str, ...], ...] = field(default=())

    def __post_init__(self):
        windows = tuple((int(start), int(end)) for start, end in self.windows)
        object.__setattr__(self, 'windows', windows)
        if self.targets and len(self.targets) != len(windows):
            raise ParameterError('targets', len(self.targets), f'one entry per window ({len(windows)})')
        previous_end = -1
        for start, end in windows:
            if not 0 <= start <= end < self.n_points:
                raise ParameterError('window', (start, end), f'must satisfy 0 <= start <= end < {self.n_points}')
            if start <= previous_end:
                raise ParameterError('window', (start, end), 'windows must be sorted and non-overlapping')
            previous_end = end

    def __len__(self):
        return len(self.windows)

    def membership(self) -> np.ndarray:
        mask = np.zeros(self.n_points, dtype=bool)
        for start, end in self.windows:
            mask[start : end + 1] = True
        return mask

    def window_of(self, t: int) -> int | None:
        for i, (start, end) in enumerate(self.windows):
            if start <= t <= end:
                return i
            if start > t:
                break
        return None

    def shifted(self, offset: int, n_points: int | None = None) -> 'GroundTruth':
        return GroundTruth(
            self.n_points + offset if n_points is None else n_points,
            tuple((start + offset, end + offset) for start, end in self.windows),
            self.targets,
        )

    @classmethod
    def from_frame(cls, frame: TimeSeriesFrame) -> 'GroundTruth':
        intervals = sorted(frame.attack_intervals, key=lambda interval: interval.start)
        if intervals:
            return cls(
                frame.n_points,
                tuple((interval.start, interval.end) for interval in intervals),
                tuple(tuple(interval.targets) for interval in intervals),
            )
        if frame.labels is not None:
            return cls.from_flags(frame.labels)
        return cls(frame.n_points, ())

    @classmethod
    def from_flags(cls, flags) -> 'GroundTruth':
        flags = np.asarray(flags, dtype=bool)
        return cls(flags.shape[0], tuple(true_runs(flags)))


@dataclass(frozen=True)
class DetectionSet:
    """Strictly increasing detection timepoints within [0, n_points)."""

    n_points: int
    times: tuple[int, ...]

    def __post_init__(self):
        times = tuple(int(t) for t in self.times)
        object.__setattr__(self, 'times', times)
        if times and not (0 <= times[0] and times[-1] < self.n_points):
            raise ParameterError('detections', times, f'must lie in [0, {self.n_points})')
        if any(b <= a for a, b in zip(times, times[1:], strict=False)):
            raise ParameterError('detections', times, 'must be strictly increasing')

    def __len__(self):
        return len(self.times)

    @classmethod
    def from_flags(cls, flags, truth: GroundTruth | None = None) -> 'DetectionSet':
        """
        Rising edges of the flag series, plus the start of every truth window entered while the flag is already
        raised (an event that began before an attack is still credited inside it).
        """
        flags = np.asarray(flags, dtype=bool)
        times = {start for start, _ in true_runs(flags)}
        if truth is not None:
            times.update(start for start, _ in truth.windows if flags[start])
        return cls(flags.shape[0], tuple(sorted(times)))
