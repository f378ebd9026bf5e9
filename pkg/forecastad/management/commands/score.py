import logging
from pathlib import Path

from forecastad.detector.report import EVENTS_FILE, TIMELINE_FILE, read_events, read_flags
from forecastad.exceptions import ConfigError, ShapeMismatchError
from forecastad.management.base import ForecastADCommand
from forecastad.metrics.report import attack_table, score, write_score_report
from forecastad.metrics.truth import GroundTruth
from forecastad.pipeline import load_frame

logger = logging.getLogger(__name__)


class Command(ForecastADCommand):
    help = (
        'Score a detection report against the labeled test split: score.yaml, score.csv (NAB, precision, recall, '
        'F1, window counts, delays) and attacks_table.csv when the attacks carry target tags.'
    )

    def validate(self, config, options):
        config.require('dataset.test')
        self.report_dir = Path(config.metrics.detections or config.output_dir)
        config.require_directory('metrics.detections', str(self.report_dir))
        for name in (TIMELINE_FILE, EVENTS_FILE):
            if not (self.report_dir / name).is_file():
                raise ConfigError('metrics.detections', f'{self.report_dir / name} is missing; run detect first')
        self.profile = config.metrics.profile()
        self.frame = load_frame(config, 'test')
        self.flags = read_flags(self.report_dir / TIMELINE_FILE)
        if self.flags.shape[0] != self.frame.n_points:
            raise ShapeMismatchError('detection timeline', (self.frame.n_points,), self.flags.shape)

    def run(self, config, options, manifest):
        out = config.output_path
        timeline, events_path = self.report_dir / TIMELINE_FILE, self.report_dir / EVENTS_FILE
        manifest.add_inputs(config.dataset.test, config.dataset.attacks, timeline, events_path)

        frame, flags = self.frame, self.flags
        truth = GroundTruth.from_frame(frame)

        result = score(truth, flags, self.profile, frame.step or 1.0)
        table = attack_table(truth, flags, result, read_events(events_path)) if any(truth.targets) else None
        self.emit(*write_score_report(out, result, table, self.float_format))
        self.report(
            f'NAB {result.nab:.3f}  F1 {result.f1:.3f}  precision {result.precision:.3f}  recall {result.recall:.3f}  '
            f'windows {result.tp}/{len(truth)} detected, {result.fp} false positive(s)',
            options,
        )
