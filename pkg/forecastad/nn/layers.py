import enum
from dataclasses import dataclass

import numpy as np

from forecastad.exceptions import ParameterError


class LayerKind(str, enum.Enum):
    DENSE = 'dense'
    DROPOUT = 'dropout'
    # Recognised in templates so they can be described, rejected when a network is built.
    CONVOLUTIONAL = 'convolutional'
    GRU = 'gru'
    LSTM = 'lstm'

    @property
    def implemented(self) -> bool:
        return self in (LayerKind.DENSE, LayerKind.DROPOUT)


class Activation(str, enum.Enum):
    LINEAR = 'linear'
    RELU = 'relu'
    TANH = 'tanh'
    SIGMOID = 'sigmoid'
    SOFTMAX = 'softmax'

    def forward(self, z: np.ndarray) -> np.ndarray:
        match self:
            case Activation.LINEAR:
                return z
            case Activation.RELU:
                return np.maximum(z, 0.0)
            case Activation.TANH:
                return np.tanh(z)
            case Activation.SIGMOID:
                return 0.5 * (1.0 + np.tanh(0.5 * z))
            case Activation.SOFTMAX:
                shifted = np.exp(z - z.max(axis=-1, keepdims=True))
                return shifted / shifted.sum(axis=-1, keepdims=True)

    def backward(self, z: np.ndarray, a: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """Gradient w.r.t. the pre-activation z, given the activation output a and the upstream gradient."""
        match self:
            case Activation.LINEAR:
                return grad
            case Activation.RELU:
                return grad * (z > 0)
            case Activation.TANH:
                return grad * (1.0 - a * a)
            case Activation.SIGMOID:
                return grad * a * (1.0 - a)
            case Activation.SOFTMAX:
                return a * (grad - (grad * a).sum(axis=-1, keepdims=True))


class Initializer(str, enum.Enum):
    """Fan-based uniform weight initialisers. Biases are always initialised to zero."""

    GLOROT_UNIFORM = 'glorot_uniform'
    HE_UNIFORM = 'he_uniform'
    LECUN_UNIFORM = 'lecun_uniform'

    def limit(self, fan_in: int, fan_out: int) -> float:
        match self:
            case Initializer.GLOROT_UNIFORM:
                return float(np.sqrt(6.0 / (fan_in + fan_out)))
            case Initializer.HE_UNIFORM:
                return float(np.sqrt(6.0 / fan_in))
            case Initializer.LECUN_UNIFORM:
                return float(np.sqrt(3.0 / fan_in))

    def sample(self, fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
        limit = self.limit(fan_in, fan_out)
        return rng.uniform(-limit, limit, size=(fan_in, fan_out))


@dataclass(frozen=True)
class LayerConfig:
    """
    One layer of a dense stack.

    :param kind: Layer type. Only Dense and Dropout can be built.
    :param activation: Applied after the affine map of a Dense layer; ignored by Dropout.
    :param size: Output units for Dense, drop rate in (0, 1) for Dropout.
    """

    kind: LayerKind
    activation: Activation = Activation.LINEAR
    size: float = 1

    def __post_init__(self):
        object.__setattr__(self, 'kind', LayerKind(self.kind))
        object.__setattr__(self, 'activation', Activation(self.activation))
        if self.kind == LayerKind.DROPOUT:
            if not 0 < self.size < 1:
                raise ParameterError('dropout rate', self.size, 'must be strictly inside (0, 1)')
            object.__setattr__(self, 'size', float(self.size))
        else:
            if int(self.size) != self.size or self.size < 1:
                raise ParameterError(f'{self.kind.value} size', self.size, 'must be an integer >= 1')
            object.__setattr__(self, 'size', int(self.size))

    @property
    def units(self) -> int:
        return int(self.size)

    @property
    def rate(self) -> float:
        return float(self.size)

    def serialize(self) -> dict:
        return {'kind': self.kind.value, 'activation': self.activation.value, 'size': self.size}

    @classmethod
    def from_dict(cls, data: dict) -> 'LayerConfig':
        return cls(LayerKind(data['kind']), Activation(data.get('activation', 'linear')), data['size'])
