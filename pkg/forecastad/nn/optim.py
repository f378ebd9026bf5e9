import enum
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from forecastad.exceptions import ParameterError, TrainingDivergedError

logger = logging.getLogger(__name__)


class OptimizerName(str, enum.Enum):
    ADAM = 'adam'
    SGD = 'sgd'


@dataclass
class AdamState:
    """Bias-corrected Adam moments; `m` and `v` are shaped like the parameters they track."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    learning_rate: float = 1e-3
    beta_1: float = 0.9
    beta_2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0

    @classmethod
    def zeros_like(cls, params: Sequence[np.ndarray], **hyper) -> 'AdamState':
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params], **hyper)


def _check_gradients(params: Sequence[np.ndarray], grads: Sequence[np.ndarray], step: int):
    if len(params) != len(grads):
        raise ValueError(f'{len(grads)} gradients for {len(params)} parameters')
    for i, (param, grad) in enumerate(zip(params, grads, strict=True)):
        if param.shape != grad.shape:
            raise ValueError(f'gradient {i} shaped {grad.shape}, parameter shaped {param.shape}')
        if not np.all(np.isfinite(grad)):
            raise TrainingDivergedError(f'non-finite gradient for parameter {i} at step {step}')


def adam_step(state: AdamState, params: Sequence[np.ndarray], grads: Sequence[np.ndarray]) -> list[np.ndarray]:
    """One Adam update. Mutates `state` (moments, step counter) and returns new parameter arrays."""
    _check_gradients(params, grads, state.step + 1)
    state.step += 1
    t = state.step
    correction_1 = 1.0 - state.beta_1**t
    correction_2 = 1.0 - state.beta_2**t
    updated = []
    for i, (param, grad) in enumerate(zip(params, grads, strict=True)):
        state.m[i] = state.beta_1 * state.m[i] + (1.0 - state.beta_1) * grad
        state.v[i] = state.beta_2 * state.v[i] + (1.0 - state.beta_2) * grad * grad
        m_hat = state.m[i] / correction_1
        v_hat = state.v[i] / correction_2
        updated.append(param - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon))
    return updated


@dataclass
class SgdState:
    velocity: list[np.ndarray]
    step: int = 0


class Adam:
    name = OptimizerName.ADAM

    def __init__(self, learning_rate: float = 1e-3, beta_1: float = 0.9, beta_2: float = 0.999, epsilon: float = 1e-8):
        if learning_rate <= 0:
            raise ParameterError('adam.learning_rate', learning_rate, 'must be > 0')
        for name, value in (('beta_1', beta_1), ('beta_2', beta_2)):
            if not 0 <= value < 1:
                raise ParameterError(f'adam.{name}', value, 'must be in [0, 1)')
        if epsilon <= 0:
            raise ParameterError('adam.epsilon', epsilon, 'must be > 0')
        self.hyper = {'learning_rate': learning_rate, 'beta_1': beta_1, 'beta_2': beta_2, 'epsilon': epsilon}

    def start(self, params: Sequence[np.ndarray]) -> AdamState:
        return AdamState.zeros_like(params, **self.hyper)

    def update(self, state: AdamState, params: Sequence[np.ndarray], grads: Sequence[np.ndarray]) -> list[np.ndarray]:
        return adam_step(state, params, grads)

    def serialize(self) -> dict:
        return {'name': self.name.value, 'params': dict(self.hyper)}


class SGD:
    name = OptimizerName.SGD

    def __init__(self, learning_rate: float = 1e-2, momentum: float = 0.0):
        if learning_rate <= 0:
            raise ParameterError('sgd.learning_rate', learning_rate, 'must be > 0')
        if not 0 <= momentum < 1:
            raise ParameterError('sgd.momentum', momentum, 'must be in [0, 1)')
        self.hyper = {'learning_rate': learning_rate, 'momentum': momentum}

    def start(self, params: Sequence[np.ndarray]) -> SgdState:
        return SgdState([np.zeros_like(p) for p in params])

    def update(self, state: SgdState, params: Sequence[np.ndarray], grads: Sequence[np.ndarray]) -> list[np.ndarray]:
        _check_gradients(params, grads, state.step + 1)
        state.step += 1
        updated = []
        for i, (param, grad) in enumerate(zip(params, grads, strict=True)):
            state.velocity[i] = self.hyper['momentum'] * state.velocity[i] - self.hyper['learning_rate'] * grad
            updated.append(param + state.velocity[i])
        return updated

    def serialize(self) -> dict:
        return {'name': self.name.value, 'params': dict(self.hyper)}


@dataclass(frozen=True)
class OptimizerSpec:
    """Optimizer choice as it appears in configs and genomes."""

    name: OptimizerName = OptimizerName.ADAM
    params: dict = field(default_factory=dict)

    def build(self) -> 'Adam | SGD':
        return make_optimizer(self.name, self.params)

    def serialize(self) -> dict:
        return {'name': OptimizerName(self.name).value, 'params': dict(self.params)}


def make_optimizer(name: str, params: dict | None = None) -> Adam | SGD:
    params = dict(params or {})
    try:
        optimizer_name = OptimizerName(name)
    except ValueError as e:
        raise ParameterError('optimizer', name, f'one of {[o.value for o in OptimizerName]}') from e
    cls = Adam if optimizer_name == OptimizerName.ADAM else SGD
    try:
        optimizer = cls(**params)
    except TypeError as e:
        raise ParameterError(f'{optimizer_name.value} parameters', params, str(e)) from e
    logger.debug('make_optimizer: %s %s', optimizer_name.value, optimizer.hyper)
    return optimizer
