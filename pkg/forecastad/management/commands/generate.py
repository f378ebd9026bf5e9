import logging
from dataclasses import replace

from forecastad.data.frame import CsvSchema, save_attacks, save_csv
from forecastad.data.synth import synth_generate
from forecastad.management.base import ForecastADCommand
from forecastad.utils import derive_seed

logger = logging.getLogger(__name__)

TRAIN_SPLIT = 0
TEST_SPLIT = 1


class Command(ForecastADCommand):
    help = (
        'Generate a synthetic plant: train.csv (normal operation), test.csv (with injected attacks and a label '
        'column) and attacks.yaml (attack intervals with their target tags).'
    )

    def validate(self, config, options):
        self.synth = config.dataset.synth_config()
        self.schema = config.dataset.csv_schema()
        if not self.schema.label_column:
            self.schema = replace(self.schema, label_column=CsvSchema.label_column)

    def run(self, config, options, manifest):
        out = config.output_path
        if isinstance(config.dataset.synth, str):
            manifest.add_inputs(config.dataset.synth)
        train_seed, test_seed = derive_seed(config.seed, TRAIN_SPLIT), derive_seed(config.seed, TEST_SPLIT)
        manifest.seeds.update(train=train_seed, test=test_seed)

        train = synth_generate(self.synth, train_seed, inject=False, startup=True)
        test = synth_generate(self.synth, test_seed)
        save_csv(train, out / 'train.csv', self.schema, self.float_format)
        save_csv(test, out / 'test.csv', self.schema, self.float_format)
        save_attacks(out / 'attacks.yaml', test.attack_intervals, test.tag_names)
        manifest.lap('generate_s')
        self.emit(out / 'train.csv', out / 'test.csv', out / 'attacks.yaml')
        logger.info(
            'generate: %s timepoints x %s tags, %s attack(s) in %s',
            self.synth.n_points,
            len(self.synth.tags),
            len(test.attack_intervals),
            out,
        )
