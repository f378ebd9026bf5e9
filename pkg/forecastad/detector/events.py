import logging
from collections.abc import Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from forecastad.exceptions import ParameterError
from forecastad.utils import subprocess_group, true_runs
from .errors import ErrorConfig, ResidualMatrix, fit_threshold, process, tag_weights

logger = logging.getLogger(__name__)

DEFAULT_TOP_K = 2


@dataclass(frozen=True)
class SuspectTag:
    index: int
    name: str
    score: float
    group: str = ''
    # Largest residual of the tag during the event, in the tag's original units.
    peak_residual: float | None = None

    def serialize(self) -> dict:
        return {
            'index': self.index,
            'name': self.name,
            'score': self.score,
            'group': self.group,
            'peak_residual': self.peak_residual,
        }


@dataclass(frozen=True)
class AnomalyEvent:
    """Maximal run [start, end] (inclusive timepoint indices) of M_t >= T."""

    start: int
    end: int
    peak: float
    peak_time: int
    suspects: tuple[SuspectTag, ...] = field(default=())

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def contains(self, t: int) -> bool:
        return self.start <= t <= self.end

    def serialize(self) -> dict:
        return {
            'start': self.start,
            'end': self.end,
            'peak': self.peak,
            'peak_time': self.peak_time,
            'suspects': [suspect.serialize() for suspect in self.suspects],
        }


def detect(series: np.ndarray, threshold: float) -> list[AnomalyEvent]:
    series = np.asarray(series, dtype=np.float64)
    if not np.isfinite(threshold):
        raise ParameterError('threshold', threshold, 'must be finite')
    events = []
    for start, end in true_runs(series >= threshold):
        segment = series[start : end + 1]
        peak_offset = int(np.argmax(segment))
        events.append(AnomalyEvent(start, end, float(segment[peak_offset]), start + peak_offset))
    logger.debug('detect: %s event(s) at threshold %.6g', len(events), threshold)
    return events


def diagnose(
    residual_matrix: ResidualMatrix,
    events: Sequence[AnomalyEvent],
    top_k: int = DEFAULT_TOP_K,
    weights: np.ndarray | None = None,
    power: float = 1.0,
    tag_names: Sequence[str] | None = None,
    scale: np.ndarray | None = None,
) -> list[AnomalyEvent]:
    """
    Rank tags per event by max_t w_i * E_ti ** p over the event, the contribution that drove detection.
    Ties go to the lower tag index. `scale` (the training std per tag) turns peak residuals back into tag units.
    """
    if top_k < 1:
        raise ParameterError('top_k', top_k, 'must be >= 1')
    values = np.asarray(residual_matrix, dtype=np.float64)
    n_tags = values.shape[1]
    names = list(tag_names) if tag_names is not None else [str(i) for i in range(n_tags)]
    w = np.ones(n_tags) if weights is None else np.asarray(weights, dtype=np.float64)
    diagnosed = []
    for event in events:
        window = values[event.start : event.end + 1]
        scores = (window**power * w).max(axis=0)
        peaks = window.max(axis=0)
        order = sorted(range(n_tags), key=lambda i: (-scores[i], i))[:top_k]
        suspects = tuple(
            SuspectTag(
                i,
                names[i],
                float(scores[i]),
                subprocess_group(names[i]),
                float(peaks[i] * scale[i]) if scale is not None else None,
            )
            for i in order
        )
        diagnosed.append(replace(event, suspects=suspects))
    return diagnosed


@dataclass
class DetectionResult:
    series: np.ndarray
    threshold: float
    events: list[AnomalyEvent]

    @property
    def flags(self) -> np.ndarray:
        return self.series >= self.threshold


class Detector:
    """
    Error config, tag weights and threshold fitted together on training residuals and applied to new residuals.
    """

    def __init__(
        self,
        config: ErrorConfig,
        weights: np.ndarray | None = None,
        threshold: float | None = None,
        top_k: int = DEFAULT_TOP_K,
    ):
        self.config = config
        self.weights = None if weights is None else np.asarray(weights, dtype=np.float64)
        self.threshold = threshold
        self.top_k = top_k

    def __repr__(self):
        return f'<Detector p={self.config.power:g} H={self.config.half_life} T={self.threshold}>'

    @property
    def fitted(self) -> bool:
        return self.threshold is not None and (self.weights is not None or not self.config.use_weights)

    def fit(self, train_residuals: ResidualMatrix, span: tuple[int, int] | None = None) -> 'Detector':
        """Weights (when enabled) and threshold from training residuals, restricted to the forecast span."""
        if self.config.use_weights and self.weights is None:
            self.weights = tag_weights(train_residuals, span, self.config.epsilon_floor)
        self.fit_threshold(train_residuals, span)
        logger.info('Detector.fit: threshold %.6g', self.threshold)
        return self

    def fit_threshold(self, train_residuals: ResidualMatrix, span: tuple[int, int] | None = None) -> float:
        self.threshold = fit_threshold(self.series(train_residuals), span)
        return self.threshold

    def series(self, residual_matrix: ResidualMatrix) -> np.ndarray:
        return process(residual_matrix, self.weights, self.config)

    def run(
        self,
        residual_matrix: ResidualMatrix,
        tag_names: Sequence[str] | None = None,
        scale: np.ndarray | None = None,
    ) -> DetectionResult:
        if self.threshold is None:
            raise ParameterError('threshold', None, 'fit the detector before running it')
        series = self.series(residual_matrix)
        events = diagnose(
            residual_matrix,
            detect(series, self.threshold),
            self.top_k,
            self.weights if self.config.use_weights else None,
            self.config.power,
            tag_names,
            scale,
        )
        logger.info('Detector.run: %s event(s) over %s timepoints', len(events), series.shape[0])
        return DetectionResult(series, self.threshold, events)
