"""
Genetic operators: template-constrained sampling, single-layer mutation, and multi-parent crossover.

Crossover is layer by layer. Categorical fields (kind, activation, optimizer, initializer) take the most frequent
parent value; integer fields (units, dropout-rate and optimizer grid indices) take the per-bit majority of the
parents' unsigned 32 bit representations, then are clamped back into the template.
"""

import logging
from collections import Counter
from collections.abc import Sequence
from dataclasses import replace

import numpy as np

from forecastad.exceptions import InfeasibleTemplateError, ParameterError, TemplateMismatchError
from .genome import Gene, Genome
from .template import VOTE_BITS, ArchTemplate, LayerSlot

logger = logging.getLogger(__name__)

MAX_SAMPLE_ATTEMPTS = 100


def bitwise_vote(values: Sequence[int], rng: np.random.Generator | None = None) -> int:
    """
    Per-bit majority of non-negative integers. With an even number of voters a tied bit is drawn uniformly from
    `rng` (or left unset without one). For three voters this is (a & b) | (a & c) | (b & c).
    """
    if not values:
        raise ParameterError('values', values, 'at least one value is required')
    array = np.asarray(values, dtype=np.int64)
    if np.any(array < 0) or np.any(array >= 2**VOTE_BITS):
        raise ParameterError('values', list(values), f'must be unsigned {VOTE_BITS} bit integers')
    bits = np.arange(VOTE_BITS, dtype=np.int64)
    counts = ((array[:, None] >> bits) & 1).sum(axis=0)
    twice, n = 2 * counts, array.shape[0]
    chosen = twice > n
    ties = twice == n
    if rng is not None and ties.any():
        chosen[ties] = rng.random(int(ties.sum())) < 0.5
    return int((chosen.astype(np.int64) << bits).sum())


def modal_choice(values: Sequence, rng: np.random.Generator | None = None):
    """Most frequent value; ties are broken uniformly at random (or by first occurrence without an rng)."""
    if not values:
        raise ParameterError('values', values, 'at least one value is required')
    counts = Counter(values)
    top = max(counts.values())
    modes = [value for value in counts if counts[value] == top]
    if len(modes) == 1 or rng is None:
        return modes[0]
    return modes[int(rng.integers(len(modes)))]


def _pick(options: Sequence, rng: np.random.Generator):
    return options[int(rng.integers(len(options)))]


def sample_gene(slot: LayerSlot, rng: np.random.Generator) -> Gene:
    """Uniform draw from the slot; the kind may be one the engine cannot build (callers retry)."""
    kind = _pick(slot.kinds, rng)
    activation = _pick(slot.activations, rng)
    units = slot.units.sample(rng)
    rate_index = int(rng.integers(len(slot.dropout_rates)))
    return Gene(kind, activation, units, rate_index, slot.dropout_rates[rate_index])


def _sample_buildable_gene(slot: LayerSlot, rng: np.random.Generator, index: int) -> Gene:
    for _ in range(MAX_SAMPLE_ATTEMPTS):
        gene = sample_gene(slot, rng)
        if gene.kind.implemented:
            return gene
    raise InfeasibleTemplateError(
        MAX_SAMPLE_ATTEMPTS, f'layer slot {index} only produced kinds {[k.value for k in slot.kinds]}'
    )


def sample_genome(template: ArchTemplate, rng: np.random.Generator) -> Genome:
    """
    Uniform draw from the template: layer count in [1, max_layers], then every field of every slot.
    Draws containing layer kinds the engine cannot build are rejected, a bounded number of times.
    """
    for attempt in range(1, MAX_SAMPLE_ATTEMPTS + 1):
        n_layers = int(rng.integers(1, template.max_layers + 1))
        genes = tuple(sample_gene(template.slot(i), rng) for i in range(n_layers))
        choice = _pick(template.optimizers, rng)
        indices = tuple(int(rng.integers(len(grid))) for _, grid in choice.params)
        initializer = _pick(template.initializers, rng)
        output_activation = _pick(template.output_activations, rng)
        if all(gene.kind.implemented for gene in genes):
            genome = Genome(template.digest, choice.name, indices, initializer, output_activation, genes)
            logger.debug('sample_genome: %s after %s attempt(s)', genome.describe(), attempt)
            return genome
    raise InfeasibleTemplateError(MAX_SAMPLE_ATTEMPTS, 'every sampled genome contained an unbuildable layer kind')


def mutate(genome: Genome, template: ArchTemplate, rng: np.random.Generator) -> Genome:
    """Copy of the genome with the full gene of one uniformly chosen hidden layer re-sampled."""
    index = int(rng.integers(genome.n_layers))
    genes = list(genome.genes)
    genes[index] = _sample_buildable_gene(template.slot(index), rng, index)
    return replace(genome, genes=tuple(genes))


def crossover(parents: Sequence[Genome], template: ArchTemplate, rng: np.random.Generator) -> Genome:
    """
    Child of any number of parents under their shared template.

    The child's layer count is the modal parent count; layers are aligned from the front, so positions beyond a
    shorter parent's length have fewer voters.
    """
    if not parents:
        raise ParameterError('parents', 0, 'at least one parent is required')
    digests = {parent.template for parent in parents}
    if digests != {template.digest}:
        raise TemplateMismatchError(f'parent templates {sorted(digests)}, expected {template.digest}')

    optimizer = modal_choice([parent.optimizer for parent in parents], rng)
    grids = template.optimizer(optimizer).params
    voters = [parent.optimizer_indices for parent in parents if parent.optimizer == optimizer]
    optimizer_indices = tuple(
        min(bitwise_vote([indices[j] for indices in voters], rng), len(grid) - 1) for j, (_, grid) in enumerate(grids)
    )
    initializer = modal_choice([parent.initializer for parent in parents], rng)
    output_activation = modal_choice([parent.output_activation for parent in parents], rng)

    n_layers = modal_choice([parent.n_layers for parent in parents], rng)
    genes = []
    for i in range(n_layers):
        slot = template.slot(i)
        layer_genes = [parent.genes[i] for parent in parents if parent.n_layers > i]
        rate_index = min(bitwise_vote([gene.rate_index for gene in layer_genes], rng), len(slot.dropout_rates) - 1)
        genes.append(
            Gene(
                modal_choice([gene.kind for gene in layer_genes], rng),
                modal_choice([gene.activation for gene in layer_genes], rng),
                slot.units.clamp(bitwise_vote([gene.units for gene in layer_genes], rng)),
                rate_index,
                slot.dropout_rates[rate_index],
            )
        )
    return Genome(template.digest, optimizer, optimizer_indices, initializer, output_activation, tuple(genes))
