import logging
from dataclasses import replace

from forecastad.data.scaling import apply_scaler, fit_scaler
from forecastad.data.windows import WindowDataset
from forecastad.management.base import ForecastADCommand
from forecastad.pipeline import fit_bundle, load_frame
from forecastad.search.archive import GenomeArchive
from forecastad.search.evolution import evolve
from forecastad.search.template import ArchTemplate

logger = logging.getLogger(__name__)


class Command(ForecastADCommand):
    help = (
        'Genetic architecture search over model.template on the training split. Writes one descriptor per '
        'evaluated genome, history.csv, best_genome.yaml and the detector bundle of the retrained best genome.'
    )

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            '--resume',
            action='store_true',
            help='Continue from the checkpoint of an interrupted search in the output directory.',
        )

    def validate(self, config, options):
        config.require('dataset.train', 'model.template')
        self.template = ArchTemplate.from_yaml(config.model.template)
        self.evolution = config.search.evolution_config(config.seed)
        self.frame = load_frame(config, 'train')

    def run(self, config, options, manifest):
        out = config.output_path
        manifest.add_inputs(config.dataset.train, config.model.template)
        frame = self.frame
        dataset = WindowDataset(apply_scaler(frame, fit_scaler(frame)).values, config.window.spec)

        archive = GenomeArchive(out)
        if options['resume'] and not archive.checkpoint_path.exists():
            logger.warning('search: no checkpoint in %s, starting a new search', out)
        result = evolve(self.template, dataset, self.evolution, archive, resume=options['resume'])
        manifest.lap('search_s')
        self.emit(archive.history_path, archive.best_path, archive.checkpoint_path)

        best = replace(config, model=replace(config.model, genome=str(archive.best_path)))
        summary = fit_bundle(best, frame)
        manifest.lap('retrain_s')
        self.emit(*summary.bundle.save(out))

        self.report(f'best genome {result.best.genome.describe()}, fitness {result.best.fitness:.6g}', options)
        self.report(summary.bundle.network.summary(), options)
