"""
On-disk record of a search run.

    <directory>/
        genomes/<genome id>.yaml   one descriptor per evaluated genome
        history.csv                generation, best_fitness, mean_fitness, best_genome_id, ...
        checkpoint.json            state after the last completed generation (resume point)
        best_genome.yaml           best-ever genome once the run finishes
"""

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path

import pandas as pd
import yaml

from forecastad.utils import ensure_directory
from .genome import Genome

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ['generation', 'best_fitness', 'mean_fitness', 'best_genome_id', 'population_best', 'evaluated']


@dataclass
class Checkpoint:
    generation: int
    template: str
    config: dict
    population: list[dict]
    best: dict | None
    history: list[dict]
    rng_state: dict


class GenomeArchive:
    def __init__(self, directory):
        self.directory = Path(directory)
        self.genome_dir = self.directory / 'genomes'

    def __repr__(self):
        return f'<GenomeArchive {self.directory}>'

    @property
    def history_path(self) -> Path:
        return self.directory / 'history.csv'

    @property
    def checkpoint_path(self) -> Path:
        return self.directory / 'checkpoint.json'

    @property
    def best_path(self) -> Path:
        return self.directory / 'best_genome.yaml'

    def record(self, genome: Genome, fitness: float, generation: int, seed: int) -> Path:
        ensure_directory(self.genome_dir)
        path = self.genome_dir / f'{genome.id}.yaml'
        document = {
            'id': genome.id,
            'generation': generation,
            'seed': seed,
            'fitness': fitness,
            'genome': genome.serialize(),
        }
        with open(path, 'w', encoding='utf-8') as f:
            yaml.safe_dump(document, f, sort_keys=False)
        return path

    def write_history(self, history: list[dict]):
        ensure_directory(self.directory)
        pd.DataFrame(history, columns=HISTORY_COLUMNS).to_csv(self.history_path, index=False, float_format='%.10g')

    def read_history(self) -> pd.DataFrame:
        return pd.read_csv(self.history_path)

    def save_best(self, genome: Genome, fitness: float) -> Path:
        ensure_directory(self.directory)
        with open(self.best_path, 'w', encoding='utf-8') as f:
            yaml.safe_dump({'id': genome.id, 'fitness': fitness, 'genome': genome.serialize()}, f, sort_keys=False)
        return self.best_path

    def save_checkpoint(self, checkpoint: Checkpoint):
        """Written to a temporary file first, so an interrupted write leaves the previous checkpoint intact."""
        ensure_directory(self.directory)
        tmp = self.checkpoint_path.with_suffix('.json.tmp')
        with open(tmp, 'w', encoding='utf-8') as f:
            json.dump(checkpoint.__dict__, f, sort_keys=True)
        os.replace(tmp, self.checkpoint_path)
        logger.debug('GenomeArchive.save_checkpoint: generation %s -> %s', checkpoint.generation, self.checkpoint_path)

    def load_checkpoint(self) -> Checkpoint | None:
        if not self.checkpoint_path.is_file():
            return None
        with open(self.checkpoint_path, 'r', encoding='utf-8') as f:
            return Checkpoint(**json.load(f))
