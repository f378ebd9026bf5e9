from .nab import STANDARD_PROFILE, NabProfile, nab_score, raw_nab_score, scaled_sigmoid
from .pointwise import DelaySummary, PointwiseScore, WindowDelay, detection_delay, pointwise_confusion, window_counts
from .report import ScoreReport, attack_table, score, write_score_report
from .truth import DetectionSet, GroundTruth

__all__ = [
    'STANDARD_PROFILE',
    'DelaySummary',
    'DetectionSet',
    'GroundTruth',
    'NabProfile',
    'PointwiseScore',
    'ScoreReport',
    'WindowDelay',
    'attack_table',
    'detection_delay',
    'nab_score',
    'pointwise_confusion',
    'raw_nab_score',
    'scaled_sigmoid',
    'score',
    'window_counts',
    'write_score_report',
]
