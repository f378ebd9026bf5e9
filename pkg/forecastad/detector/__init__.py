from .errors import (
    ErrorConfig,
    ResidualMatrix,
    error_series,
    ewma,
    ewma_alpha,
    fit_threshold,
    process,
    residuals,
    tag_weights,
)
from .events import AnomalyEvent, DetectionResult, Detector, SuspectTag, detect, diagnose
from .report import write_detection_report

__all__ = [
    'AnomalyEvent',
    'DetectionResult',
    'Detector',
    'ErrorConfig',
    'ResidualMatrix',
    'SuspectTag',
    'detect',
    'diagnose',
    'error_series',
    'ewma',
    'ewma_alpha',
    'fit_threshold',
    'process',
    'residuals',
    'tag_weights',
    'write_detection_report',
]
