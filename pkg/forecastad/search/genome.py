import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import yaml

from forecastad.exceptions import ConfigError
from forecastad.nn.layers import Activation, Initializer, LayerConfig, LayerKind
from forecastad.nn.network import Network, init_network
from forecastad.nn.optim import OptimizerName, OptimizerSpec
from forecastad.utils import content_digest
from .template import ArchTemplate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Gene:
    """
    One hidden layer. `units` and `rate_index` are both always populated so crossover can vote on them whatever
    kind wins; `rate` is the dropout rate `rate_index` selects from the slot grid.
    """

    kind: LayerKind
    activation: Activation
    units: int
    rate_index: int
    rate: float

    def layer_config(self) -> LayerConfig:
        if self.kind == LayerKind.DROPOUT:
            return LayerConfig(LayerKind.DROPOUT, self.activation, self.rate)
        return LayerConfig(self.kind, self.activation, self.units)

    def serialize(self) -> dict:
        return {
            'kind': self.kind.value,
            'activation': self.activation.value,
            'units': self.units,
            'rate_index': self.rate_index,
            'rate': self.rate,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'Gene':
        return cls(
            LayerKind(data['kind']),
            Activation(data['activation']),
            int(data['units']),
            int(data['rate_index']),
            float(data['rate']),
        )


@dataclass(frozen=True)
class Genome:
    """
    A concrete architecture under a template: hidden layer genes, optimizer choice with grid indices, initializer
    and decoder activation. The decoder Dense layer (L~ * m units) is implied and closes every network.
    """

    template: str
    optimizer: OptimizerName
    optimizer_indices: tuple[int, ...]
    initializer: Initializer
    output_activation: Activation
    genes: tuple[Gene, ...]

    @property
    def n_layers(self) -> int:
        return len(self.genes)

    @cached_property
    def id(self) -> str:
        return content_digest(self.serialize())

    def serialize(self) -> dict:
        return {
            'template': self.template,
            'optimizer': {'name': self.optimizer.value, 'indices': list(self.optimizer_indices)},
            'initializer': self.initializer.value,
            'output_activation': self.output_activation.value,
            'layers': [gene.serialize() for gene in self.genes],
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'Genome':
        try:
            return cls(
                str(data['template']),
                OptimizerName(data['optimizer']['name']),
                tuple(int(i) for i in data['optimizer']['indices']),
                Initializer(data['initializer']),
                Activation(data['output_activation']),
                tuple(Gene.from_dict(item) for item in data['layers']),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError('genome', f'invalid genome descriptor: {e!r}') from e

    @classmethod
    def from_yaml(cls, path) -> 'Genome':
        with open(Path(path), 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f)
        return cls.from_dict(data.get('genome', data) if isinstance(data, dict) else data)

    def violations(self, template: ArchTemplate) -> list[str]:
        """Every way this genome breaks the template; empty when it satisfies it."""
        problems = []
        if self.template != template.digest:
            problems.append(f'template digest {self.template} != {template.digest}')
        if not 1 <= self.n_layers <= template.max_layers:
            problems.append(f'{self.n_layers} hidden layer(s), template allows 1..{template.max_layers}')
        try:
            choice = template.optimizer(self.optimizer)
            if len(self.optimizer_indices) != len(choice.params) or any(
                not 0 <= index < len(grid)
                for index, (_, grid) in zip(self.optimizer_indices, choice.params, strict=False)
            ):
                problems.append(f'optimizer indices {self.optimizer_indices} outside the {self.optimizer.value} grid')
        except KeyError:
            problems.append(f'optimizer {self.optimizer.value} not in template')
        if self.initializer not in template.initializers:
            problems.append(f'initializer {self.initializer.value} not in template')
        if self.output_activation not in template.output_activations:
            problems.append(f'output activation {self.output_activation.value} not in template')
        for i, gene in enumerate(self.genes):
            slot = template.slot(i)
            if gene.kind not in slot.buildable_kinds:
                problems.append(f'layer {i}: kind {gene.kind.value} not buildable in slot')
            if gene.activation not in slot.activations:
                problems.append(f'layer {i}: activation {gene.activation.value} not in slot')
            if not slot.units.contains(gene.units):
                problems.append(f'layer {i}: {gene.units} units outside slot sizes')
            if not 0 <= gene.rate_index < len(slot.dropout_rates) or slot.dropout_rates[gene.rate_index] != gene.rate:
                problems.append(f'layer {i}: dropout rate index {gene.rate_index} outside slot grid')
        return problems

    def satisfies(self, template: ArchTemplate) -> bool:
        return not self.violations(template)

    def optimizer_spec(self, template: ArchTemplate) -> OptimizerSpec:
        return OptimizerSpec(self.optimizer, template.optimizer(self.optimizer).resolve(self.optimizer_indices))

    def layer_configs(self, output_dims: tuple[int, int]) -> list[LayerConfig]:
        decoder = LayerConfig(LayerKind.DENSE, self.output_activation, output_dims[0] * output_dims[1])
        return [gene.layer_config() for gene in self.genes] + [decoder]

    def materialize(self, input_dims: tuple[int, int], output_dims: tuple[int, int], seed: int) -> Network:
        return init_network(self.layer_configs(output_dims), input_dims, output_dims, seed, self.initializer)

    def describe(self) -> str:
        layers = ', '.join(
            f'dropout({gene.rate:g})'
            if gene.kind == LayerKind.DROPOUT
            else f'dense({gene.units}, {gene.activation.value})'
            for gene in self.genes
        )
        return f'{self.id}: [{layers}] -> decoder({self.output_activation.value}), {self.optimizer.value}'
