import logging
from dataclasses import replace

import pandas as pd
import yaml

from forecastad.exceptions import ParameterError, SeriesTooShortError
from forecastad.management.base import ForecastADCommand
from forecastad.pipeline import fit_bundle, load_frame

logger = logging.getLogger(__name__)

HISTORY_FILE = 'loss_history.csv'
SUMMARY_FILE = 'train_summary.yaml'
COMPARISON_FILE = 'horizon_comparison.csv'


class Command(ForecastADCommand):
    help = (
        'Train a forecaster on the training split and write the detector bundle (model, scaler, tag weights, '
        'threshold) with its loss history.'
    )

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            '--compare-horizon',
            type=int,
            metavar='H',
            help='Also train with horizon H on the same data and report both training-split errors.',
        )

    def validate(self, config, options):
        config.require('dataset.train')
        if config.model.genome is not None:
            config.require('model.genome', 'model.template')
        horizon = options.get('compare_horizon')
        if horizon is not None and horizon < 0:
            raise ParameterError('--compare-horizon', horizon, 'must be >= 0')
        self.frame = load_frame(config, 'train')
        specs = [config.window.spec]
        if horizon is not None:
            specs.append(replace(config.window.spec, horizon=horizon))
        for spec in specs:
            if self.frame.n_points < spec.min_points:
                raise SeriesTooShortError(self.frame.n_points, spec.min_points, spec)

    def run(self, config, options, manifest):
        out = config.output_path
        manifest.add_inputs(config.dataset.train, config.model.genome, config.model.template)
        frame = self.frame

        summary = fit_bundle(config, frame)
        manifest.lap('train_s')
        self.emit(*summary.bundle.save(out))
        pd.DataFrame(summary.history.rows(), columns=['epoch', 'train_loss', 'holdout_loss']).to_csv(
            out / HISTORY_FILE, index=False, float_format=self.float_format
        )
        self.emit(out / HISTORY_FILE)

        network = summary.bundle.network
        document = {
            'window': summary.bundle.spec.serialize(),
            'tags': list(frame.tag_names),
            'parameters': network.parameter_count,
            'final_loss': summary.history.final,
            'train_error': summary.train_error,
            'threshold': summary.bundle.detector.threshold,
        }
        rows = [
            {'horizon': config.window.horizon, 'train_error': summary.train_error, 'final_loss': summary.history.final}
        ]

        horizon = options.get('compare_horizon')
        if horizon is not None:
            spec = replace(config.window.spec, horizon=horizon)
            other = fit_bundle(config, frame, spec)
            manifest.lap('compare_s')
            rows.append({'horizon': horizon, 'train_error': other.train_error, 'final_loss': other.history.final})
            pd.DataFrame(rows).to_csv(out / COMPARISON_FILE, index=False, float_format=self.float_format)
            self.emit(out / COMPARISON_FILE)
            document['comparison'] = rows

        with open(out / SUMMARY_FILE, 'w', encoding='utf-8') as f:
            yaml.safe_dump(document, f, sort_keys=False)
        self.emit(out / SUMMARY_FILE)
        self.report(network.summary(), options)
        for row in rows:
            self.report(f'horizon {row["horizon"]}: training-split mean error {row["train_error"]:.6g}', options)
