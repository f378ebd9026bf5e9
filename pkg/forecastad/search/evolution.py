import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed

from forecastad.data.windows import WindowDataset
from forecastad.exceptions import ParameterError, TemplateMismatchError, TrainingDivergedError
from forecastad.nn.train import TrainConfig, train
from forecastad.utils import derive_seed
from .archive import Checkpoint, GenomeArchive
from .genome import Genome
from .operators import crossover, mutate, sample_genome
from .template import ArchTemplate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvolutionConfig:
    """
    :param budget: Training budget of one fitness evaluation (epochs, batch size); its seed is replaced per individual.
    :param holdout: Trailing fraction of windows scored for fitness instead of the training loss (0 = training MSE).
    """

    generations: int
    population_size: int = 10
    death_age: int = 3
    parent_count: int = 3
    seed: int = 0
    elitism: bool = True
    budget: TrainConfig = field(default_factory=lambda: TrainConfig(epochs=5))
    holdout: float = 0.0
    n_jobs: int = 1

    def __post_init__(self):
        if self.generations < 1:
            raise ParameterError('search.generations', self.generations, 'must be >= 1')
        if self.population_size < 1:
            raise ParameterError('search.population_size', self.population_size, 'must be >= 1')
        if self.parent_count < 2:
            raise ParameterError('search.parent_count', self.parent_count, 'must be >= 2')
        if self.death_age < 1:
            raise ParameterError('search.death_age', self.death_age, 'must be >= 1')
        if not 0 <= self.holdout < 1:
            raise ParameterError('search.holdout', self.holdout, 'must be in [0, 1)')

    def serialize(self) -> dict:
        return {
            'generations': self.generations,
            'population_size': self.population_size,
            'death_age': self.death_age,
            'parent_count': self.parent_count,
            'seed': self.seed,
            'elitism': self.elitism,
            'epochs': self.budget.epochs,
            'batch_size': self.budget.batch_size,
            'holdout': self.holdout,
        }


@dataclass
class Individual:
    genome: Genome
    age: int = 0
    fitness: float | None = None
    born: int = 0
    seed: int | None = None

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None

    def serialize(self) -> dict:
        return {
            'genome': self.genome.serialize(),
            'age': self.age,
            'fitness': self.fitness,
            'born': self.born,
            'seed': self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'Individual':
        return cls(Genome.from_dict(data['genome']), data['age'], data['fitness'], data['born'], data['seed'])


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    best_fitness: float
    mean_fitness: float
    best_genome_id: str
    population_best: float
    evaluated: int

    def as_row(self) -> dict:
        return dict(self.__dict__)


@dataclass
class EvolutionResult:
    best: Individual
    history: list[GenerationRecord]
    population: list[Individual]


def evaluate_fitness(
    genome: Genome,
    template: ArchTemplate,
    dataset: WindowDataset,
    budget: TrainConfig,
    seed: int,
    holdout: float = 0.0,
) -> float:
    """
    Train the genome from scratch under the budget and return its final-epoch MSE (holdout MSE when a holdout
    fraction is given). Diverging candidates score +inf instead of failing the search.
    """
    config = replace(budget, seed=seed, optimizer=genome.optimizer_spec(template), holdout=holdout)
    network = genome.materialize(dataset.input_dims, dataset.output_dims, seed)
    try:
        with np.errstate(over='ignore', invalid='ignore'):
            result = train(network, dataset, config)
    except TrainingDivergedError as e:
        logger.warning('evaluate_fitness: genome %s diverged: %s', genome.id, e)
        return math.inf
    fitness = result.history.holdout[-1] if result.history.holdout else result.history.final
    return fitness if math.isfinite(fitness) else math.inf


def _rank_probabilities(n: int) -> np.ndarray:
    weights = np.arange(n, 0, -1, dtype=np.float64)
    return weights / weights.sum()


def _turnover(
    population: list[Individual],
    template: ArchTemplate,
    config: EvolutionConfig,
    rng: np.random.Generator,
    generation: int,
) -> list[Individual]:
    """Retire old individuals (sparing the elite), age the survivors and refill with recombined, mutated children."""
    elite = min(population, key=lambda ind: ind.fitness) if config.elitism and population else None
    alive = [ind for ind in population if ind.age < config.death_age or ind is elite]
    for ind in alive:
        ind.age += 1
    n_children = config.population_size - len(alive)
    if n_children <= 0:
        return alive

    if not alive:
        logger.debug('evolve: generation %s left no survivors, refilling with fresh samples', generation)
        return [Individual(sample_genome(template, rng), born=generation + 1) for _ in range(n_children)]

    ranked = sorted(alive, key=lambda ind: ind.fitness)
    probabilities = _rank_probabilities(len(ranked))
    with_replacement = len(ranked) < config.parent_count
    children = []
    for _ in range(n_children):
        picks = rng.choice(len(ranked), size=config.parent_count, replace=with_replacement, p=probabilities)
        child = crossover([ranked[i].genome for i in picks], template, rng)
        children.append(Individual(mutate(child, template, rng), born=generation + 1))
    return alive + children


def evolve(
    template: ArchTemplate,
    dataset: WindowDataset,
    config: EvolutionConfig,
    archive: GenomeArchive | None = None,
    resume: bool = False,
) -> EvolutionResult:
    """
    Age-structured genetic search for the genome with the lowest fitness.

    Every generation: evaluate unevaluated individuals (in parallel, seeds derived from run seed, generation and
    slot), record best and mean fitness, then unless it is the last generation retire individuals that reached the
    death age, age the rest by one and refill the population. The whole run is reproducible from `config.seed`.
    """
    rng = np.random.default_rng(config.seed)
    history: list[GenerationRecord] = []
    best: Individual | None = None
    start = 0

    checkpoint = archive.load_checkpoint() if archive is not None and resume else None
    if checkpoint is not None:
        if checkpoint.template != template.digest:
            raise TemplateMismatchError(f'archive was written for template {checkpoint.template}')
        population = [Individual.from_dict(item) for item in checkpoint.population]
        best = Individual.from_dict(checkpoint.best) if checkpoint.best else None
        history = [GenerationRecord(**record) for record in checkpoint.history]
        rng.bit_generator.state = checkpoint.rng_state
        start = checkpoint.generation + 1
        if not checkpoint.config.get('refilled', True) and start < config.generations:
            population = _turnover(population, template, config, rng, checkpoint.generation)
        logger.info('evolve: resuming %s after generation %s', archive, checkpoint.generation)
    else:
        population = [Individual(sample_genome(template, rng)) for _ in range(config.population_size)]

    for generation in range(start, config.generations):
        pending = [(slot, ind) for slot, ind in enumerate(population) if not ind.evaluated]
        for slot, ind in pending:
            ind.seed = derive_seed(config.seed, generation, slot)
        fitnesses = Parallel(n_jobs=config.n_jobs)(
            delayed(evaluate_fitness)(ind.genome, template, dataset, config.budget, ind.seed, config.holdout)
            for _, ind in pending
        )
        for (_, ind), fitness in zip(pending, fitnesses, strict=True):
            ind.fitness = float(fitness)
            if archive is not None:
                archive.record(ind.genome, ind.fitness, generation, ind.seed)

        leader = min(population, key=lambda ind: ind.fitness)
        if best is None or leader.fitness < best.fitness:
            best = Individual(leader.genome, leader.age, leader.fitness, leader.born, leader.seed)
        finite = [ind.fitness for ind in population if math.isfinite(ind.fitness)]
        record = GenerationRecord(
            generation,
            best.fitness,
            float(np.mean(finite)) if finite else math.inf,
            best.genome.id,
            leader.fitness,
            len(pending),
        )
        history.append(record)
        logger.info(
            'evolve: generation %s/%s, best %.6g (%s), mean %.6g, %s evaluated',
            generation + 1,
            config.generations,
            record.best_fitness,
            record.best_genome_id,
            record.mean_fitness,
            record.evaluated,
        )

        last = generation == config.generations - 1
        if not last:
            population = _turnover(population, template, config, rng, generation)
        if archive is not None:
            archive.write_history([r.as_row() for r in history])
            archive.save_checkpoint(
                Checkpoint(
                    generation=generation,
                    template=template.digest,
                    config={**config.serialize(), 'refilled': not last},
                    population=[ind.serialize() for ind in population],
                    best=best.serialize(),
                    history=[r.as_row() for r in history],
                    rng_state=rng.bit_generator.state,
                )
            )

    if best is None:
        raise ParameterError('search.generations', config.generations, 'nothing left to run in the resumed archive')
    if archive is not None:
        archive.save_best(best.genome, best.fitness)
    return EvolutionResult(best, history, population)
