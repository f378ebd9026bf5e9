import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from .nab import STANDARD_PROFILE, NabProfile, nab_score
from .pointwise import DelaySummary, PointwiseScore, detection_delay, pointwise_confusion, window_counts
from .truth import DetectionSet, GroundTruth

logger = logging.getLogger(__name__)

SCORE_COLUMNS = ['nab', 'precision', 'recall', 'f1', 'tp', 'fp', 'fn', 'mean_delay_s', 'mean_delay_ratio']


@dataclass(frozen=True)
class ScoreReport:
    """
    NAB score, pointwise precision/recall/F1 and window-level counts of one detector output.

    `tp`, `fp` and `fn` are window-level; pointwise counts live in `pointwise`.
    """

    nab: float
    pointwise: PointwiseScore
    tp: int
    fp: int
    fn: int
    delays: DelaySummary
    profile: NabProfile = STANDARD_PROFILE

    @property
    def precision(self) -> float:
        return self.pointwise.precision

    @property
    def recall(self) -> float:
        return self.pointwise.recall

    @property
    def f1(self) -> float:
        return self.pointwise.f1

    @property
    def coverage(self) -> float:
        return self.pointwise.coverage

    @property
    def window_recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 1.0

    def row(self) -> dict:
        return {
            'nab': self.nab,
            'precision': self.precision,
            'recall': self.recall,
            'f1': self.f1,
            'tp': self.tp,
            'fp': self.fp,
            'fn': self.fn,
            'mean_delay_s': self.delays.mean_delay_s,
            'mean_delay_ratio': self.delays.mean_ratio,
        }

    def serialize(self) -> dict:
        return {
            **self.row(),
            'anomalous_time_coverage': self.coverage,
            'window_recall': self.window_recall,
            'no_detections': self.delays.no_detections,
            'pointwise': {
                'tp': self.pointwise.tp,
                'fp': self.pointwise.fp,
                'fn': self.pointwise.fn,
                'tn': self.pointwise.tn,
            },
            'profile': self.profile.serialize(),
            'delays': [
                {
                    'window': window.window,
                    'start': window.start,
                    'end': window.end,
                    'detected_at': window.detected_at,
                    'delay_s': window.delay_s,
                    'ratio': window.ratio,
                }
                for window in self.delays.windows
            ],
        }


def score(
    truth: GroundTruth,
    flags,
    profile: NabProfile = STANDARD_PROFILE,
    step: float = 1.0,
    detections: DetectionSet | None = None,
) -> ScoreReport:
    """Score a per-timepoint flag series; detections default to `DetectionSet.from_flags(flags, truth)`."""
    flags = np.asarray(flags, dtype=bool)
    detections = DetectionSet.from_flags(flags, truth) if detections is None else detections
    tp, fp, fn = window_counts(truth, detections)
    report = ScoreReport(
        nab_score(truth, detections, profile),
        pointwise_confusion(truth, flags),
        tp,
        fp,
        fn,
        detection_delay(truth, detections, step),
        profile,
    )
    logger.info('score: NAB %.3f, F1 %.3f, %s/%s window(s) detected', report.nab, report.f1, tp, len(truth))
    return report


def attack_table(
    truth: GroundTruth,
    flags,
    report: ScoreReport,
    events: Sequence[tuple[int, int, Sequence[str]]] = (),
) -> pd.DataFrame:
    """
    One row per labeled attack: targets, tags diagnosed by the events overlapping it, first-detection delay and
    the pointwise recall inside the attack.
    """
    flags = np.asarray(flags, dtype=bool)
    rows = []
    for window in report.delays.windows:
        start, end = window.start, window.end
        tags = []
        for event_start, event_end, event_tags in events:
            if event_start <= end and event_end >= start:
                tags.extend(tag for tag in event_tags if tag and tag not in tags)
        rows.append(
            {
                'attack': window.window + 1,
                'start': start,
                'end': end,
                'targets': ' '.join(truth.targets[window.window]) if truth.targets else '',
                'detected': window.detected,
                'detected_tags': ' '.join(tags),
                'delay_s': window.delay_s,
                'pointwise_recall': float(flags[start : end + 1].mean()),
            }
        )
    return pd.DataFrame(
        rows,
        columns=['attack', 'start', 'end', 'targets', 'detected', 'detected_tags', 'delay_s', 'pointwise_recall'],
    )


def write_score_report(
    directory,
    report: ScoreReport,
    table: pd.DataFrame | None = None,
    float_format: str = '%.10g',
) -> list[Path]:
    directory = Path(directory)
    paths = [directory / 'score.yaml', directory / 'score.csv']
    with open(paths[0], 'w', encoding='utf-8') as f:
        yaml.safe_dump(report.serialize(), f, sort_keys=False)
    pd.DataFrame([report.row()], columns=SCORE_COLUMNS).to_csv(paths[1], index=False, float_format=float_format)
    if table is not None:
        paths.append(directory / 'attacks_table.csv')
        table.to_csv(paths[-1], index=False, float_format=float_format)
    return paths
