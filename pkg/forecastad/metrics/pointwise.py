import logging
from dataclasses import dataclass

import numpy as np

from forecastad.exceptions import ShapeMismatchError
from .truth import DetectionSet, GroundTruth

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PointwiseScore:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def precision(self) -> float:
        """1 when nothing was flagged."""
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 1.0

    @property
    def recall(self) -> float:
        """1 when nothing is anomalous."""
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 1.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0

    @property
    def coverage(self) -> float:
        """Anomalous-time coverage: the flagged fraction of labeled anomalous timepoints."""
        return self.recall


def pointwise_confusion(truth: GroundTruth, flags) -> PointwiseScore:
    flags = np.asarray(flags, dtype=bool)
    if flags.shape != (truth.n_points,):
        raise ShapeMismatchError('flags', (truth.n_points,), flags.shape)
    actual = truth.membership()
    return PointwiseScore(
        int(np.sum(flags & actual)),
        int(np.sum(flags & ~actual)),
        int(np.sum(~flags & actual)),
        int(np.sum(~flags & ~actual)),
    )


@dataclass(frozen=True)
class WindowDelay:
    window: int
    start: int
    end: int
    detected_at: int | None
    delay_s: float | None
    ratio: float | None

    @property
    def detected(self) -> bool:
        return self.detected_at is not None


@dataclass(frozen=True)
class DelaySummary:
    windows: tuple[WindowDelay, ...]

    @property
    def detected(self) -> int:
        return sum(1 for window in self.windows if window.detected)

    @property
    def missed(self) -> int:
        return len(self.windows) - self.detected

    @property
    def no_detections(self) -> bool:
        return self.detected == 0

    @property
    def ratios(self) -> list[float]:
        return [window.ratio for window in self.windows if window.detected]

    @property
    def mean_delay_s(self) -> float | None:
        delays = [window.delay_s for window in self.windows if window.detected]
        return float(np.mean(delays)) if delays else None

    @property
    def mean_ratio(self) -> float | None:
        return float(np.mean(self.ratios)) if self.ratios else None


def detection_delay(truth: GroundTruth, detections: DetectionSet, step: float = 1.0) -> DelaySummary:
    """
    Delay of the first detection inside each window, in seconds and as a fraction of the window length.
    Missed windows carry None and stay out of the means.
    """
    delays = []
    times = np.asarray(detections.times, dtype=np.int64)
    for i, (start, end) in enumerate(truth.windows):
        inside = times[(times >= start) & (times <= end)]
        if inside.size == 0:
            delays.append(WindowDelay(i, start, end, None, None, None))
            continue
        first = int(inside[0])
        delays.append(WindowDelay(i, start, end, first, (first - start) * step, (first - start) / (end - start + 1)))
    summary = DelaySummary(tuple(delays))
    logger.debug('detection_delay: %s of %s window(s) detected', summary.detected, len(delays))
    return summary


def window_counts(truth: GroundTruth, detections: DetectionSet) -> tuple[int, int, int]:
    """Window-level (tp, fp, fn): detected windows, detections outside every window, missed windows."""
    hit = set()
    fp = 0
    for t in detections.times:
        window = truth.window_of(t)
        if window is None:
            fp += 1
        else:
            hit.add(window)
    return len(hit), fp, len(truth.windows) - len(hit)
