import logging
import math
from dataclasses import dataclass, field

import numpy as np

from forecastad.data.frame import TimeSeriesFrame
from forecastad.data.windows import WindowDataset, WindowSpec
from forecastad.exceptions import EvaluationError, ParameterError, TrainingDivergedError
from .network import Network, flatten_gradients, forward, loss_and_gradients, mse_loss
from .optim import OptimizerSpec

logger = logging.getLogger(__name__)

PREDICT_BATCH_SIZE = 1024


@dataclass(frozen=True)
class TrainConfig:
    """
    Training budget. The loss is always MSE.

    :param holdout: Trailing fraction of windows kept out of training and scored after every epoch.
    """

    epochs: int = 30
    batch_size: int = 32
    seed: int = 0
    optimizer: OptimizerSpec = field(default_factory=OptimizerSpec)
    holdout: float = 0.0

    def __post_init__(self):
        if self.epochs < 1:
            raise ParameterError('epochs', self.epochs, 'must be >= 1')
        if self.batch_size < 1:
            raise ParameterError('batch_size', self.batch_size, 'must be >= 1')
        if not 0 <= self.holdout < 1:
            raise ParameterError('holdout', self.holdout, 'must be in [0, 1)')

    def serialize(self) -> dict:
        return {
            'epochs': self.epochs,
            'batch_size': self.batch_size,
            'seed': self.seed,
            'optimizer': self.optimizer.serialize(),
            'holdout': self.holdout,
        }


@dataclass
class LossHistory:
    train: list[float] = field(default_factory=list)
    holdout: list[float] = field(default_factory=list)

    @property
    def final(self) -> float:
        return self.train[-1] if self.train else math.inf

    def rows(self) -> list[dict]:
        return [
            {'epoch': i + 1, 'train_loss': loss, 'holdout_loss': self.holdout[i] if self.holdout else ''}
            for i, loss in enumerate(self.train)
        ]


@dataclass
class TrainResult:
    network: Network
    history: LossHistory


def evaluate(network: Network, dataset: WindowDataset, batch_size: int = PREDICT_BATCH_SIZE) -> float:
    """Mean squared error of the network over every window of the dataset (inference mode)."""
    total = 0.0
    for start in range(0, len(dataset), batch_size):
        inputs, targets = dataset.batch(np.arange(start, min(start + batch_size, len(dataset))))
        loss, _ = mse_loss(forward(network, inputs), targets)
        total += loss * inputs.shape[0]
    return total / len(dataset)


def train(network: Network, dataset: WindowDataset, config: TrainConfig) -> TrainResult:
    """
    Mini-batch training on shuffled windows; the last short batch is kept.

    Shuffling and dropout masks draw from one generator seeded with `config.seed`, so a fixed seed reproduces the
    trained parameters bit for bit. The input network is left untouched.
    """
    if len(dataset) < 1:
        raise ParameterError('windows', 0, 'at least one window pair is required')
    if dataset.input_dims != network.input_dims or dataset.output_dims != network.output_dims:
        raise EvaluationError(
            f'windows {dataset.input_dims} -> {dataset.output_dims} do not fit network '
            f'{network.input_dims} -> {network.output_dims}'
        )
    fit_set, holdout_set = dataset.split(config.holdout)
    rng = np.random.default_rng(config.seed)
    optimizer = config.optimizer.build()
    params = network.flat_parameters()
    state = optimizer.start(params)
    history = LossHistory()

    current = network
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(fit_set))
        total = 0.0
        for start in range(0, len(order), config.batch_size):
            inputs, targets = fit_set.batch(order[start : start + config.batch_size])
            loss, grads = loss_and_gradients(current, inputs, targets, rng)
            if not math.isfinite(loss):
                raise TrainingDivergedError(f'non-finite loss {loss}', epoch=epoch)
            try:
                params = optimizer.update(state, params, flatten_gradients(grads))
            except TrainingDivergedError as e:
                raise TrainingDivergedError(str(e), epoch=epoch) from e
            current = current.with_parameters(params)
            total += loss * inputs.shape[0]
        history.train.append(total / len(fit_set))
        if holdout_set is not None:
            history.holdout.append(evaluate(current, holdout_set))
        logger.debug('train: epoch %s/%s, loss %.6g', epoch, config.epochs, history.train[-1])

    if not all(np.all(np.isfinite(array)) for array in params):
        raise TrainingDivergedError('non-finite parameters after the last update', epoch=config.epochs)

    logger.info('train: %s epoch(s) on %s window(s), final loss %.6g', config.epochs, len(fit_set), history.final)
    return TrainResult(current, history)


def predict_frame(network: Network, frame: 'TimeSeriesFrame | np.ndarray', spec: WindowSpec) -> np.ndarray:
    """
    Forecast matrix of the same shape as the (scaled) frame values, S x m.

    Every timepoint of the forecast span [L + h, L + h + K * L~) receives exactly one forecast; the leading L + h
    rows and the trailing rows past the last complete window are copied from the actuals.
    """
    values = np.asarray(frame.values if isinstance(frame, TimeSeriesFrame) else frame, dtype=np.float64)
    n_tags = values.shape[1]
    if network.input_dims != (spec.input_len, n_tags) or network.output_dims != (spec.forecast_len, n_tags):
        raise EvaluationError(
            f'network {network.input_dims} -> {network.output_dims} does not match windows {spec} over {n_tags} tags'
        )
    dataset = WindowDataset(values, spec)
    forecast = values.copy()
    start, end = spec.forecast_span(values.shape[0])
    chunks = []
    for first in range(0, len(dataset), PREDICT_BATCH_SIZE):
        inputs, _ = dataset.batch(np.arange(first, min(first + PREDICT_BATCH_SIZE, len(dataset))))
        chunks.append(forward(network, inputs))
    forecast[start:end] = np.concatenate(chunks).reshape(-1, n_tags)
    return forecast
