from .archive import GenomeArchive
from .evolution import EvolutionConfig, EvolutionResult, GenerationRecord, Individual, evaluate_fitness, evolve
from .genome import Gene, Genome
from .operators import bitwise_vote, crossover, modal_choice, mutate, sample_genome
from .template import ArchTemplate, LayerSlot, OptimizerChoice, SizeSpec

__all__ = [
    'ArchTemplate',
    'EvolutionConfig',
    'EvolutionResult',
    'Gene',
    'GenerationRecord',
    'Genome',
    'GenomeArchive',
    'Individual',
    'LayerSlot',
    'OptimizerChoice',
    'SizeSpec',
    'bitwise_vote',
    'crossover',
    'evaluate_fitness',
    'evolve',
    'modal_choice',
    'mutate',
    'sample_genome',
]
