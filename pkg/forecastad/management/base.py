import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from forecastad.conf import RunConfig, get_setting, load_run_config
from forecastad.exceptions import ForecastADConfigError, ForecastADRuntimeError
from forecastad.manifest import RunManifest
from forecastad.utils import ensure_directory

logger = logging.getLogger(__name__)

CONFIG_ERROR_EXIT = 2
RUNTIME_ERROR_EXIT = 3


class ForecastADCommand(BaseCommand):
    """
    Shared flags (--config, --seed, --out, --set, --quiet) and error translation for the forecastad commands.

    Subclasses implement validate(config, options), which reads and checks every input without writing anything,
    and run(config, options, manifest), which writes outputs. The output directory is only created once
    validate() passed. Configuration errors exit with 2, runtime errors with 3.
    """

    requires_system_checks = []
    requires_migrations_checks = False

    def add_arguments(self, parser):
        parser.add_argument('--config', metavar='PATH', help='Run configuration (YAML) or a previous run manifest.')
        parser.add_argument('--seed', type=int, help='Override the run seed.')
        parser.add_argument('--out', metavar='DIR', help='Override output_dir.')
        parser.add_argument(
            '--set',
            action='append',
            default=[],
            dest='overrides',
            metavar='KEY=VALUE',
            help='Override a scalar config key, e.g. --set window.horizon=0. Repeatable.',
        )
        parser.add_argument('--quiet', action='store_true', help='Only log warnings and errors.')

    def handle(self, *args, **options):
        self.outputs: list[Path] = []
        if options['quiet']:
            options['verbosity'] = 0
        package_logger = logging.getLogger('forecastad')
        previous_level = package_logger.level
        if options['verbosity'] == 0:
            package_logger.setLevel(logging.WARNING)
        try:
            config = load_run_config(options['config'], options['overrides'], options['seed'], options['out'])
            self.validate(config, options)
            manifest = RunManifest(self.command_name, config.serialize(), seeds={'seed': config.seed})
            if options['config']:
                manifest.add_inputs(options['config'])
            output_dir = ensure_directory(config.output_path)
            self.run(config, options, manifest)
            manifest.add_outputs(*sorted(self.outputs))
            manifest_path = manifest.write(output_dir)
        except ForecastADConfigError as e:
            logger.debug('%s: configuration error', self.command_name, exc_info=True)
            raise CommandError(str(e), returncode=CONFIG_ERROR_EXIT) from e
        except (ForecastADRuntimeError, OSError) as e:
            logger.debug('%s: runtime error', self.command_name, exc_info=True)
            raise CommandError(str(e), returncode=RUNTIME_ERROR_EXIT) from e
        finally:
            package_logger.setLevel(previous_level)
        self.report(f'{self.command_name}: wrote {len(self.outputs)} file(s) and {manifest_path}', options)

    @property
    def command_name(self) -> str:
        return self.__module__.rsplit('.', 1)[-1]

    @property
    def float_format(self) -> str:
        return get_setting('FLOAT_FORMAT')

    def emit(self, *paths: Path):
        """Register written files; they are digested into the manifest."""
        self.outputs.extend(Path(p) for p in paths)

    def report(self, message: str, options: dict):
        if options['verbosity'] > 0:
            self.stdout.write(message)

    def validate(self, config: RunConfig, options: dict):
        pass

    def run(self, config: RunConfig, options: dict, manifest: RunManifest):
        raise NotImplementedError('subclasses of ForecastADCommand must provide a run() method')
