"""
Glue between a RunConfig and the library: loading splits, training a forecaster, fitting and persisting the
detector bundle, and running detection on new data.

A detector bundle is one directory:

    model.npz        trained forecaster (see forecastad.nn.serialization)
    scaler.json      per-tag mean/std fitted on the training split
    bundle.json      window geometry, tag names, error config, top_k
    weights.json     tag weights by tag name (absent when weighting is off)
    threshold.json   fitted threshold (refitted from the training split when absent)
"""

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from forecastad.conf import RunConfig
from forecastad.data.frame import TimeSeriesFrame, load_attacks, load_csv, resample_uniform, with_attacks
from forecastad.data.scaling import ScalingStats, apply_scaler, fit_scaler
from forecastad.data.windows import WindowDataset, WindowSpec
from forecastad.detector.errors import THRESHOLD_PERCENTILE, ErrorConfig, ResidualMatrix, residuals
from forecastad.detector.events import DetectionResult, Detector
from forecastad.exceptions import ConfigError, DimensionMismatchError, ModelFormatError
from forecastad.nn.layers import Initializer
from forecastad.nn.network import Network, init_network
from forecastad.nn.serialization import load_model, save_model
from forecastad.nn.train import LossHistory, TrainConfig, predict_frame, train
from forecastad.search.genome import Genome
from forecastad.search.template import ArchTemplate
from forecastad.utils import ensure_directory

logger = logging.getLogger(__name__)

MODEL_FILE = 'model.npz'
SCALER_FILE = 'scaler.json'
BUNDLE_FILE = 'bundle.json'
WEIGHTS_FILE = 'weights.json'
THRESHOLD_FILE = 'threshold.json'
BUNDLE_FORMAT_VERSION = 1


def _write_json(path: Path, payload) -> Path:
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write('\n')
    return path


def _read_json(path: Path):
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except (OSError, ValueError) as e:
        raise ModelFormatError(path, f'{type(e).__name__}: {e}') from e


def load_frame(config: RunConfig, split: str) -> TimeSeriesFrame:
    """
    Read the 'train' or 'test' split named by the dataset section, attach the attack sidecar to the test split,
    then resample and trim the head as configured.
    """
    dataset = config.dataset
    frame = load_csv(getattr(dataset, split), dataset.csv_schema())
    if split == 'test' and dataset.attacks is not None:
        frame = with_attacks(frame, load_attacks(dataset.attacks))
    if dataset.resample_step is not None:
        frame = resample_uniform(frame, dataset.resample_step)
    return frame.trim_head(dataset.head_trim)


@dataclass
class DetectorBundle:
    network: Network
    scaler: ScalingStats
    spec: WindowSpec
    tag_names: tuple[str, ...]
    detector: Detector

    def __repr__(self):
        return f'<DetectorBundle {self.spec} over {len(self.tag_names)} tags, {self.detector!r}>'

    def save(self, directory) -> list[Path]:
        directory = ensure_directory(directory)
        paths = [
            save_model(self.network, directory / MODEL_FILE),
            _write_json(directory / SCALER_FILE, self.scaler.to_dict()),
            _write_json(
                directory / BUNDLE_FILE,
                {
                    'format_version': BUNDLE_FORMAT_VERSION,
                    'window': self.spec.serialize(),
                    'tag_names': list(self.tag_names),
                    'error': self.detector.config.serialize(),
                    'top_k': self.detector.top_k,
                },
            ),
        ]
        if self.detector.weights is not None:
            weights = dict(zip(self.tag_names, self.detector.weights.tolist(), strict=True))
            paths.append(_write_json(directory / WEIGHTS_FILE, weights))
        if self.detector.threshold is not None:
            paths.append(self.save_threshold(directory))
        logger.debug('DetectorBundle.save: %s', [str(p) for p in paths])
        return paths

    def save_threshold(self, directory) -> Path:
        payload = {'threshold': self.detector.threshold, 'percentile': THRESHOLD_PERCENTILE}
        return _write_json(Path(directory) / THRESHOLD_FILE, payload)

    @classmethod
    def load(cls, directory) -> 'DetectorBundle':
        directory = Path(directory)
        meta = _read_json(directory / BUNDLE_FILE)
        if not isinstance(meta, dict) or meta.get('format_version') != BUNDLE_FORMAT_VERSION:
            raise ModelFormatError(directory / BUNDLE_FILE, 'not a forecastad detector bundle')
        try:
            spec = WindowSpec(**meta['window'])
            tag_names = tuple(meta['tag_names'])
            error_config = ErrorConfig.from_dict(meta['error'])
            top_k = int(meta['top_k'])
        except (KeyError, TypeError, ValueError) as e:
            raise ModelFormatError(directory / BUNDLE_FILE, f'{type(e).__name__}: {e}') from e
        try:
            scaler = ScalingStats.from_dict(_read_json(directory / SCALER_FILE))
        except (KeyError, TypeError, ValueError) as e:
            raise ModelFormatError(directory / SCALER_FILE, f'{type(e).__name__}: {e}') from e

        n_tags = len(tag_names)
        network = load_model(directory / MODEL_FILE, (spec.input_len, n_tags), (spec.forecast_len, n_tags))

        weights = None
        if (directory / WEIGHTS_FILE).exists():
            by_name = _read_json(directory / WEIGHTS_FILE)
            weights = np.array([by_name[name] for name in tag_names], dtype=np.float64)
        threshold = None
        if (directory / THRESHOLD_FILE).exists():
            threshold = float(_read_json(directory / THRESHOLD_FILE)['threshold'])

        bundle = cls(network, scaler, spec, tag_names, Detector(error_config, weights, threshold, top_k))
        logger.debug('DetectorBundle.load: %r from %s', bundle, directory)
        return bundle

    def check_frame(self, frame: TimeSeriesFrame):
        if frame.tag_names != self.tag_names:
            raise DimensionMismatchError(
                f'frame tags {list(frame.tag_names)} do not match the model tags {list(self.tag_names)}'
            )

    def residual_matrix(self, frame: TimeSeriesFrame) -> ResidualMatrix:
        """Scaled residuals |forecast - actual|; zero before the first forecast window and after the last."""
        self.check_frame(frame)
        scaled = apply_scaler(frame, self.scaler)
        return residuals(scaled, predict_frame(self.network, scaled, self.spec))

    def fit_detector(self, train_frame: TimeSeriesFrame) -> Detector:
        """Weights (when missing) and threshold from the training split over its forecast span."""
        train_residuals = self.residual_matrix(train_frame)
        return self.detector.fit(train_residuals, self.spec.forecast_span(train_frame.n_points))

    def detect(self, frame: TimeSeriesFrame) -> DetectionResult:
        return self.detector.run(self.residual_matrix(frame), self.tag_names, self.scaler.std)


def initial_network(config: RunConfig, input_dims, output_dims) -> tuple[Network, TrainConfig]:
    """Untrained forecaster and its training config, from the explicit layer list or a genome descriptor."""
    train_config = config.train.train_config(config.seed)
    model = config.model
    if model.genome is None:
        layers = model.layer_configs(output_dims)
        network = init_network(layers, input_dims, output_dims, config.seed, Initializer(model.initializer))
        return network, train_config

    template = ArchTemplate.from_yaml(model.template)
    genome = Genome.from_yaml(model.genome)
    problems = genome.violations(template)
    if problems:
        raise ConfigError('model.genome', '; '.join(problems))
    train_config = replace(train_config, optimizer=genome.optimizer_spec(template))
    return genome.materialize(input_dims, output_dims, config.seed), train_config


@dataclass
class TrainSummary:
    bundle: DetectorBundle
    history: LossHistory
    # Mean of the processed error series over the training split's forecast span.
    train_error: float


def fit_bundle(config: RunConfig, train_frame: TimeSeriesFrame, spec: WindowSpec | None = None) -> TrainSummary:
    spec = spec or config.window.spec
    scaler = fit_scaler(train_frame)
    dataset = WindowDataset(apply_scaler(train_frame, scaler).values, spec)
    network, train_config = initial_network(config, dataset.input_dims, dataset.output_dims)
    logger.info('fit_bundle: training %r on %s window(s) %s', network, len(dataset), spec)
    result = train(network, dataset, train_config)

    detector = Detector(config.detector.error_config(spec), top_k=config.detector.resolved_top_k)
    bundle = DetectorBundle(result.network, scaler, spec, train_frame.tag_names, detector)
    train_residuals = bundle.residual_matrix(train_frame)
    span = spec.forecast_span(train_frame.n_points)
    detector.fit(train_residuals, span)
    train_error = float(np.mean(detector.series(train_residuals)[span[0] : span[1]]))
    logger.info('fit_bundle: training-split mean error %.6g, threshold %.6g', train_error, detector.threshold)
    return TrainSummary(bundle, result.history, train_error)
