"""
Architecture templates.

A template bounds the genomes the search may produce: optimizer choices with their parameter grids, weight
initializers, the maximum number of hidden layers, one slot per hidden layer position (the last slot repeats up to
`max_layers`) and the activations allowed for the decoder layer that closes every network. See docs/config.md.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from forecastad.exceptions import ConfigError
from forecastad.nn.layers import Activation, Initializer, LayerKind
from forecastad.nn.optim import OptimizerName
from forecastad.utils import content_digest

logger = logging.getLogger(__name__)

DEFAULT_DROPOUT_RATES = (0.1, 0.2, 0.3, 0.4, 0.5)
VOTE_BITS = 32


def _enum_tuple(enum_cls, values, key: str) -> tuple:
    if isinstance(values, str):
        values = [values]
    if not values:
        raise ConfigError(key, 'at least one value is required')
    try:
        items = tuple(enum_cls(str(value).lower()) for value in values)
    except ValueError as e:
        raise ConfigError(key, f'{e}; allowed: {[item.value for item in enum_cls]}') from e
    if len(set(items)) != len(items):
        raise ConfigError(key, 'values must be unique')
    return items


@dataclass(frozen=True)
class SizeSpec:
    """
    Integer size domain: an inclusive range (`{min, max}`) or a discrete distribution (`{values, weights}`).
    """

    minimum: int | None = None
    maximum: int | None = None
    values: tuple[int, ...] = ()
    weights: tuple[float, ...] = ()

    def __post_init__(self):
        if self.values:
            if any(v < 1 or v >= 2**VOTE_BITS for v in self.values):
                raise ValueError(f'sizes must be in [1, 2**{VOTE_BITS}), got {self.values}')
            weights = self.weights
            if weights and (len(weights) != len(self.values) or min(weights) < 0 or sum(weights) <= 0):
                raise ValueError('weights must be non-negative, not all zero and match values')
        elif self.minimum is None or self.maximum is None or not 1 <= self.minimum <= self.maximum < 2**VOTE_BITS:
            raise ValueError(f'size range [{self.minimum}, {self.maximum}] is empty or out of bounds')

    @property
    def discrete(self) -> bool:
        return bool(self.values)

    def sample(self, rng: np.random.Generator) -> int:
        if not self.discrete:
            return int(rng.integers(self.minimum, self.maximum + 1))
        if self.weights:
            p = np.asarray(self.weights, dtype=np.float64)
            return int(self.values[rng.choice(len(self.values), p=p / p.sum())])
        return int(self.values[rng.integers(len(self.values))])

    def contains(self, value: int) -> bool:
        if self.discrete:
            return value in self.values
        return self.minimum <= value <= self.maximum

    def clamp(self, value: int) -> int:
        """Clamp into the range; for discrete sizes snap to the nearest allowed value (lower on ties)."""
        if not self.discrete:
            return int(min(max(value, self.minimum), self.maximum))
        ordered = sorted(self.values)
        return int(min(ordered, key=lambda v: (abs(v - value), v)))

    def serialize(self) -> dict:
        if self.discrete:
            data = {'values': list(self.values)}
            if self.weights:
                data['weights'] = list(self.weights)
            return data
        return {'min': self.minimum, 'max': self.maximum}

    @classmethod
    def from_value(cls, value, key: str) -> 'SizeSpec':
        try:
            match value:
                case int():
                    return cls(value, value)
                case list() | tuple():
                    return cls(values=tuple(int(v) for v in value))
                case {'values': values, **rest}:
                    weights = tuple(float(w) for w in rest.get('weights', ()))
                    return cls(values=tuple(int(v) for v in values), weights=weights)
                case {'min': minimum, 'max': maximum}:
                    return cls(int(minimum), int(maximum))
        except (TypeError, ValueError) as e:
            raise ConfigError(key, str(e)) from e
        raise ConfigError(key, f'expected an integer, a list, {{min, max}} or {{values, weights}}, got {value!r}')


def _grid(value, key: str) -> tuple[float, ...]:
    """Parameter grid from a scalar, an explicit list or a logarithmic `{min, max, num}` declaration."""
    match value:
        case int() | float():
            grid = (float(value),)
        case list() | tuple():
            grid = tuple(sorted(float(v) for v in value))
        case {'min': minimum, 'max': maximum, **rest}:
            num = int(rest.get('num', 5))
            if not 0 < minimum <= maximum or num < 1:
                raise ConfigError(key, f'log grid needs 0 < min <= max and num >= 1, got {value!r}')
            grid = tuple(float(v) for v in np.geomspace(float(minimum), float(maximum), num))
        case _:
            raise ConfigError(key, f'expected a number, a list or {{min, max, num}}, got {value!r}')
    if not grid:
        raise ConfigError(key, 'grid is empty')
    return grid


@dataclass(frozen=True)
class LayerSlot:
    kinds: tuple[LayerKind, ...]
    activations: tuple[Activation, ...]
    units: SizeSpec
    dropout_rates: tuple[float, ...] = DEFAULT_DROPOUT_RATES

    @property
    def buildable_kinds(self) -> tuple[LayerKind, ...]:
        return tuple(kind for kind in self.kinds if kind.implemented)

    def serialize(self) -> dict:
        return {
            'kinds': [kind.value for kind in self.kinds],
            'activations': [activation.value for activation in self.activations],
            'units': self.units.serialize(),
            'dropout_rates': list(self.dropout_rates),
        }

    @classmethod
    def from_dict(cls, data: dict, key: str) -> 'LayerSlot':
        unknown = set(data) - {'kinds', 'activations', 'units', 'dropout_rates'}
        if unknown:
            raise ConfigError(f'{key}.{sorted(unknown)[0]}', 'unknown key')
        if 'units' not in data:
            raise ConfigError(f'{key}.units', 'missing')
        rates = _grid(data.get('dropout_rates', list(DEFAULT_DROPOUT_RATES)), f'{key}.dropout_rates')
        if not all(0 < rate < 1 for rate in rates):
            raise ConfigError(f'{key}.dropout_rates', f'rates must be strictly inside (0, 1), got {rates}')
        return cls(
            _enum_tuple(LayerKind, data.get('kinds', ['dense']), f'{key}.kinds'),
            _enum_tuple(Activation, data.get('activations', ['linear']), f'{key}.activations'),
            SizeSpec.from_value(data['units'], f'{key}.units'),
            rates,
        )


@dataclass(frozen=True)
class OptimizerChoice:
    name: OptimizerName
    params: tuple[tuple[str, tuple[float, ...]], ...] = ()

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.params)

    def resolve(self, indices) -> dict:
        return {name: grid[index] for (name, grid), index in zip(self.params, indices, strict=True)}

    def serialize(self) -> dict:
        return {'name': self.name.value, 'params': {name: list(grid) for name, grid in self.params}}


@dataclass(frozen=True)
class ArchTemplate:
    max_layers: int
    layers: tuple[LayerSlot, ...]
    optimizers: tuple[OptimizerChoice, ...] = (OptimizerChoice(OptimizerName.ADAM),)
    initializers: tuple[Initializer, ...] = (Initializer.GLOROT_UNIFORM,)
    output_activations: tuple[Activation, ...] = (Activation.LINEAR,)
    digest: str = field(init=False, compare=False)

    def __post_init__(self):
        if self.max_layers < 1:
            raise ConfigError('max_layers', f'must be >= 1, got {self.max_layers}')
        if not self.layers:
            raise ConfigError('layers', 'at least one layer slot is required')
        if not self.optimizers:
            raise ConfigError('optimizers', 'at least one optimizer is required')
        object.__setattr__(self, 'digest', content_digest(self.serialize()))

    def slot(self, index: int) -> LayerSlot:
        return self.layers[min(index, len(self.layers) - 1)]

    def optimizer(self, name) -> OptimizerChoice:
        for choice in self.optimizers:
            if choice.name == OptimizerName(name):
                return choice
        raise KeyError(name)

    def serialize(self) -> dict:
        return {
            'max_layers': self.max_layers,
            'optimizers': [choice.serialize() for choice in self.optimizers],
            'initializers': [initializer.value for initializer in self.initializers],
            'output': {'activations': [activation.value for activation in self.output_activations]},
            'layers': [slot.serialize() for slot in self.layers],
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'ArchTemplate':
        if not isinstance(data, dict):
            raise ConfigError('template', f'expected a mapping, got {type(data).__name__}')
        unknown = set(data) - {'max_layers', 'optimizers', 'initializers', 'output', 'layers'}
        if unknown:
            raise ConfigError(sorted(unknown)[0], 'unknown key')

        optimizers = []
        for i, item in enumerate(data.get('optimizers', [{'name': 'adam'}])):
            item = {'name': item} if isinstance(item, str) else item
            name = _enum_tuple(OptimizerName, [item.get('name')], f'optimizers[{i}].name')[0]
            params = tuple(
                (str(param), _grid(value, f'optimizers[{i}].params.{param}'))
                for param, value in sorted((item.get('params') or {}).items())
            )
            optimizers.append(OptimizerChoice(name, params))

        output = data.get('output') or {}
        slots = data.get('layers')
        if not isinstance(slots, list) or not slots:
            raise ConfigError('layers', 'a non-empty list of layer slots is required')
        try:
            max_layers = int(data.get('max_layers', len(slots)))
        except (TypeError, ValueError) as e:
            raise ConfigError('max_layers', str(e)) from e
        return cls(
            max_layers,
            tuple(LayerSlot.from_dict(slot, f'layers[{i}]') for i, slot in enumerate(slots)),
            tuple(optimizers),
            _enum_tuple(Initializer, data.get('initializers', ['glorot_uniform']), 'initializers'),
            _enum_tuple(Activation, output.get('activations', ['linear']), 'output.activations'),
        )

    @classmethod
    def from_yaml(cls, path) -> 'ArchTemplate':
        path = Path(path)
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = yaml.safe_load(f)
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(str(path), f'cannot read template: {e}') from e
        template = cls.from_dict(data)
        logger.debug('ArchTemplate.from_yaml: %s, digest %s', path, template.digest)
        return template
