"""Detection report files: one row per event, one row per timepoint, optional SVG of the error curve."""

import logging
from collections.abc import Sequence
from pathlib import Path

import matplotlib as mpl
import numpy as np
import pandas as pd
from matplotlib.figure import Figure

from forecastad.data.frame import AttackInterval
from .events import AnomalyEvent, DetectionResult

logger = logging.getLogger(__name__)

EVENTS_FILE = 'events.csv'
TIMELINE_FILE = 'timeline.csv'
SVG_FILE = 'error_curve.svg'


def events_frame(events: Sequence[AnomalyEvent], top_k: int, timestamps: np.ndarray | None = None) -> pd.DataFrame:
    columns = ['event', 'start', 'end', 'duration', 'peak', 'peak_time']
    if timestamps is not None:
        columns += ['start_timestamp', 'end_timestamp']
    for k in range(1, top_k + 1):
        columns += [f'tag_{k}', f'score_{k}', f'group_{k}', f'residual_{k}']

    step = float(timestamps[1] - timestamps[0]) if timestamps is not None and len(timestamps) > 1 else 1.0
    rows = []
    for n, event in enumerate(events):
        row = {
            'event': n,
            'start': event.start,
            'end': event.end,
            'duration': event.length * step,
            'peak': event.peak,
            'peak_time': event.peak_time,
        }
        if timestamps is not None:
            row['start_timestamp'] = timestamps[event.start]
            row['end_timestamp'] = timestamps[event.end]
        for k, suspect in enumerate(event.suspects[:top_k], start=1):
            row[f'tag_{k}'] = suspect.name
            row[f'score_{k}'] = suspect.score
            row[f'group_{k}'] = suspect.group
            row[f'residual_{k}'] = suspect.peak_residual
        rows.append(row)
    return pd.DataFrame(rows, columns=columns)


def timeline_frame(result: DetectionResult, timestamps: np.ndarray | None = None) -> pd.DataFrame:
    n_points = result.series.shape[0]
    frame = pd.DataFrame({'t': np.arange(n_points)})
    if timestamps is not None:
        frame['timestamp'] = timestamps
    frame['error'] = result.series
    frame['threshold'] = result.threshold
    frame['flag'] = result.flags.astype(np.int8)
    return frame


def render_svg(
    path,
    result: DetectionResult,
    timestamps: np.ndarray | None = None,
    attacks: Sequence[AttackInterval] = (),
) -> Path:
    """Error curve with the threshold and shaded attack intervals. Output bytes are stable for equal inputs."""
    path = Path(path)
    x = np.arange(result.series.shape[0]) if timestamps is None else np.asarray(timestamps)
    with mpl.rc_context({'svg.hashsalt': 'forecastad', 'svg.fonttype': 'none'}):
        figure = Figure(figsize=(10, 3.5))
        ax = figure.add_subplot()
        for interval in attacks:
            ax.axvspan(x[interval.start], x[interval.end], color='tab:red', alpha=0.15, linewidth=0)
        ax.plot(x, result.series, linewidth=0.8, label='error')
        ax.axhline(result.threshold, color='black', linestyle='--', linewidth=0.8, label='threshold')
        ax.set_xlabel('time (s)' if timestamps is not None else 'timepoint')
        ax.set_ylabel('processed error')
        ax.legend(loc='upper right')
        figure.tight_layout()
        figure.savefig(path, format='svg', metadata={'Date': None})
    return path


def write_detection_report(
    directory,
    result: DetectionResult,
    top_k: int,
    timestamps: np.ndarray | None = None,
    attacks: Sequence[AttackInterval] = (),
    svg: bool = False,
    float_format: str = '%.10g',
) -> list[Path]:
    directory = Path(directory)
    paths = [directory / EVENTS_FILE, directory / TIMELINE_FILE]
    events_frame(result.events, top_k, timestamps).to_csv(paths[0], index=False, float_format=float_format)
    timeline_frame(result, timestamps).to_csv(paths[1], index=False, float_format=float_format)
    if svg:
        paths.append(render_svg(directory / SVG_FILE, result, timestamps, attacks))
    logger.debug('write_detection_report: %s', [str(p) for p in paths])
    return paths


def read_events(path) -> list[tuple[int, int, tuple[str, ...]]]:
    """(start, end, suspect tags) per event of a detection report's events CSV."""
    frame = pd.read_csv(path, keep_default_na=False)
    tag_columns = [c for c in frame.columns if c.startswith('tag_')]
    return [
        (int(row['start']), int(row['end']), tuple(str(row[c]) for c in tag_columns if str(row[c])))
        for row in frame.to_dict('records')
    ]


def read_flags(path) -> np.ndarray:
    return pd.read_csv(path)['flag'].to_numpy(dtype=bool)
