"""
Numenta Anomaly Benchmark style scoring with labeled attack intervals as the scoring windows.

Per window the earliest detection inside it scores A_TP * sigma(y), y = (i - end - 1) / n for a window of n
timepoints, so a detection at the window start earns A_TP * sigma(-1) and later ones less. Later detections in the
same window earn nothing. A detection after a window scores A_FP * sigma((i - end) / n) against the nearest
preceding window, which decays towards -A_FP; one before the first window costs the full -A_FP. A missed window
costs -A_FN. The raw sum is normalised so the empty detection set scores 0 and one detection at every window start
scores 100.
"""

import logging
import math
from dataclasses import dataclass

from forecastad.exceptions import ParameterError
from .truth import DetectionSet, GroundTruth

logger = logging.getLogger(__name__)


def scaled_sigmoid(y: float) -> float:
    """2 / (1 + e^(5y)) - 1, clamped to -1 beyond y = 3."""
    if y > 3.0:
        return -1.0
    return 2.0 / (1.0 + math.exp(5.0 * y)) - 1.0


@dataclass(frozen=True)
class NabProfile:
    """Weights of the standard profile by default."""

    tp: float = 1.0
    fp: float = 0.11
    fn: float = 1.0

    def __post_init__(self):
        if not self.tp > 0:
            raise ParameterError('metrics.nab.tp', self.tp, 'must be > 0')
        for name in ('fp', 'fn'):
            if getattr(self, name) < 0:
                raise ParameterError(f'metrics.nab.{name}', getattr(self, name), 'must be >= 0')

    def serialize(self) -> dict:
        return {'tp': self.tp, 'fp': self.fp, 'fn': self.fn}


STANDARD_PROFILE = NabProfile()


def _window_terms(truth: GroundTruth, detections: DetectionSet, profile: NabProfile) -> list[float]:
    terms = []
    first_hit: dict[int, int] = {}
    false_positives = []
    for t in detections.times:
        window = truth.window_of(t)
        if window is None:
            false_positives.append(t)
        elif window not in first_hit:
            first_hit[window] = t

    for i, (start, end) in enumerate(truth.windows):
        if i in first_hit:
            length = end - start + 1
            terms.append(profile.tp * scaled_sigmoid((first_hit[i] - end - 1) / length))
        else:
            terms.append(-profile.fn)

    for t in false_positives:
        preceding = [(start, end) for start, end in truth.windows if end < t]
        if not preceding:
            terms.append(-profile.fp)
            continue
        start, end = preceding[-1]
        terms.append(profile.fp * scaled_sigmoid((t - end) / (end - start + 1)))
    return terms


def raw_nab_score(truth: GroundTruth, detections: DetectionSet, profile: NabProfile = STANDARD_PROFILE) -> float:
    return math.fsum(_window_terms(truth, detections, profile))


def nab_score(truth: GroundTruth, detections: DetectionSet, profile: NabProfile = STANDARD_PROFILE) -> float:
    """
    Normalised score: 100 * (raw - null) / (perfect - null). The null and perfect references are summed from the
    same per-window terms, so both anchors are exact. Without windows the one-window normaliser is used.
    """
    raw = raw_nab_score(truth, detections, profile)
    perfect = DetectionSet(truth.n_points, tuple(start for start, _ in truth.windows))
    null = DetectionSet(truth.n_points, ())
    if not truth.windows:
        return 0.0 if not detections.times else 100.0 * raw / (profile.tp * scaled_sigmoid(-1.0))
    perfect_raw = raw_nab_score(truth, perfect, profile)
    null_raw = raw_nab_score(truth, null, profile)
    score = 100.0 * (raw - null_raw) / (perfect_raw - null_raw)
    logger.debug('nab_score: raw %.6g, null %.6g, perfect %.6g -> %.6g', raw, null_raw, perfect_raw, score)
    return score
