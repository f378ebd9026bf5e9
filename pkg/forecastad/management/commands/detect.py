import logging

from forecastad.detector.report import write_detection_report
from forecastad.management.base import ForecastADCommand
from forecastad.pipeline import THRESHOLD_FILE, DetectorBundle, load_frame

logger = logging.getLogger(__name__)


class Command(ForecastADCommand):
    help = (
        'Run a trained detector bundle on the test split and write events.csv, timeline.csv and optionally '
        'error_curve.svg. A bundle without a threshold gets one fitted from the training split.'
    )

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--svg', action='store_true', default=None, help='Also render the error curve as SVG.')

    def validate(self, config, options):
        config.require('dataset.test')
        self.bundle_dir = config.model.bundle or config.output_dir
        config.require_directory('model.bundle', self.bundle_dir)
        self.bundle = DetectorBundle.load(self.bundle_dir)
        self.train_frame = None
        if not self.bundle.detector.fitted:
            config.require('dataset.train')
            self.train_frame = load_frame(config, 'train')
        self.frame = load_frame(config, 'test')
        self.bundle.check_frame(self.frame)

    def run(self, config, options, manifest):
        out = config.output_path
        bundle = self.bundle
        manifest.add_inputs(config.dataset.test, config.dataset.attacks)

        if not bundle.detector.fitted:
            logger.info('detect: %s has no threshold, fitting it on %s', self.bundle_dir, config.dataset.train)
            manifest.add_inputs(config.dataset.train)
            bundle.fit_detector(self.train_frame)
            self.emit(*bundle.save(self.bundle_dir))

        frame = self.frame
        result = bundle.detect(frame)
        manifest.lap('detect_s')
        svg = options['svg'] if options['svg'] is not None else config.detector.resolved_svg
        self.emit(
            *write_detection_report(
                out,
                result,
                bundle.detector.top_k,
                frame.timestamps,
                frame.attack_intervals,
                svg=svg,
                float_format=self.float_format,
            )
        )
        self.report(
            f'{len(result.events)} event(s), threshold {result.threshold:.6g} ({self.bundle_dir}/{THRESHOLD_FILE})',
            options,
        )
