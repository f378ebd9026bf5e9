"""
Run configuration: one YAML document with the sections seed, output_dir, dataset, window, model, train, detector,
search and metrics. See docs/config.md for every key.

Process-wide defaults live in the Django setting FORECASTAD and are read through get_setting().
"""

import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml
from django.conf import settings
from django.core.exceptions import ValidationError

from forecastad.data.frame import CsvSchema
from forecastad.data.synth import SynthConfig, default_config
from forecastad.data.windows import WindowSpec
from forecastad.detector.errors import ErrorConfig
from forecastad.exceptions import ConfigError, ForecastADConfigError, SynthConfigError
from forecastad.metrics.nab import NabProfile
from forecastad.nn.layers import Activation, Initializer, LayerConfig, LayerKind
from forecastad.nn.optim import OptimizerSpec, make_optimizer
from forecastad.nn.train import TrainConfig
from forecastad.search.evolution import EvolutionConfig
from forecastad.validators import (
    validate_at_least_one,
    validate_at_least_two,
    validate_existing_directory,
    validate_existing_file,
    validate_non_negative,
    validate_positive,
    validate_unit_interval,
)

logger = logging.getLogger(__name__)

DEFAULT_SETTINGS = {
    'N_JOBS': 1,
    'FLOAT_FORMAT': '%.10g',
    'DEFAULT_TOP_K': 2,
    'SVG': False,
}


def get_setting(name: str):
    if name not in DEFAULT_SETTINGS:
        raise KeyError(f'Unknown FORECASTAD setting {name!r}')
    return getattr(settings, 'FORECASTAD', {}).get(name, DEFAULT_SETTINGS[name])


def _check(key: str, value, *validators):
    for validator in validators:
        try:
            validator(value)
        except ValidationError as e:
            raise ConfigError(key, '; '.join(e.messages)) from e
        except TypeError as e:
            raise ConfigError(key, f'unexpected value {value!r} of type {type(value).__name__}') from e


def _build(cls, data, key: str):
    """Instantiate a section dataclass from a mapping, naming the dotted key of anything unknown."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(key, f'expected a mapping, got {type(data).__name__}')
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f'{key}.{unknown[0]}', 'unknown key')
    section = cls(**data)
    section.validate(key)
    return section


@dataclass(frozen=True)
class DatasetSection:
    """
    :param train: CSV with normal operation only.
    :param test: CSV to run detection on.
    :param attacks: Optional YAML sidecar with attack intervals and their target tags for the test split.
    :param synth: Synthetic generator settings (mapping or YAML path); None uses the built-in plant.
    """

    train: str | None = None
    test: str | None = None
    attacks: str | None = None
    synth: dict | str | None = None
    n_points: int = 5000
    head_trim: int = 0
    resample_step: float | None = None
    schema: dict = field(default_factory=dict)

    def validate(self, key: str):
        _check(f'{key}.n_points', self.n_points, validate_at_least_two)
        _check(f'{key}.head_trim', self.head_trim, validate_non_negative)
        if self.resample_step is not None:
            _check(f'{key}.resample_step', self.resample_step, validate_positive)
        self.csv_schema(key)

    def csv_schema(self, key: str = 'dataset') -> CsvSchema:
        if not isinstance(self.schema, dict):
            raise ConfigError(f'{key}.schema', 'expected a mapping')
        unknown = sorted(set(self.schema) - {f.name for f in fields(CsvSchema)})
        if unknown:
            raise ConfigError(f'{key}.schema.{unknown[0]}', 'unknown key')
        schema = dict(self.schema)
        if schema.get('tag_columns') is not None:
            schema['tag_columns'] = tuple(str(c) for c in schema['tag_columns'])
        return CsvSchema(**schema)

    def synth_config(self, key: str = 'dataset.synth') -> SynthConfig:
        data = self.synth
        if data is None:
            return default_config(self.n_points)
        if isinstance(data, str):
            _check(key, data, validate_existing_file)
            with open(data, 'r', encoding='utf-8') as f:
                data = yaml.safe_load(f) or {}
        try:
            return SynthConfig.from_dict(data)
        except SynthConfigError as e:
            raise ConfigError(f'{key}.{e.key}', str(e)) from e


@dataclass(frozen=True)
class WindowSection:
    input_len: int = 50
    horizon: int = 10
    forecast_len: int = 4

    def validate(self, key: str):
        _check(f'{key}.input_len', self.input_len, validate_at_least_one)
        _check(f'{key}.horizon', self.horizon, validate_non_negative)
        _check(f'{key}.forecast_len', self.forecast_len, validate_at_least_one)

    @property
    def spec(self) -> WindowSpec:
        return WindowSpec(self.input_len, self.horizon, self.forecast_len)


def _default_layers() -> list[dict]:
    return [{'kind': 'dense', 'activation': 'relu', 'size': 64}, {'kind': 'dense', 'activation': 'relu', 'size': 64}]


@dataclass(frozen=True)
class ModelSection:
    """
    Hidden layers of the forecaster; the decoder Dense(L~ * m) with `output_activation` is appended.
    `genome` (a search descriptor) replaces `layers` and needs the `template` it was sampled under.
    `bundle` is the trained detector directory that detect reads; it defaults to output_dir.
    """

    layers: list = field(default_factory=_default_layers)
    output_activation: str = 'linear'
    initializer: str = 'glorot_uniform'
    template: str | None = None
    genome: str | None = None
    bundle: str | None = None

    def validate(self, key: str):
        if not isinstance(self.layers, list):
            raise ConfigError(f'{key}.layers', 'expected a list of layers')
        self.hidden_layers(key)
        for name, enum_cls in (('output_activation', Activation), ('initializer', Initializer)):
            try:
                enum_cls(getattr(self, name))
            except ValueError as e:
                raise ConfigError(f'{key}.{name}', f'one of {[item.value for item in enum_cls]}') from e
        if self.genome is not None and self.template is None:
            raise ConfigError(f'{key}.template', 'a genome needs the template it was sampled under')

    def hidden_layers(self, key: str = 'model') -> list[LayerConfig]:
        configs = []
        for i, item in enumerate(self.layers):
            try:
                configs.append(LayerConfig.from_dict(item))
            except (KeyError, TypeError, ValueError) as e:
                raise ConfigError(f'{key}.layers[{i}]', str(e)) from e
        return configs

    def layer_configs(self, output_dims: tuple[int, int]) -> list[LayerConfig]:
        decoder = LayerConfig(LayerKind.DENSE, Activation(self.output_activation), output_dims[0] * output_dims[1])
        return [*self.hidden_layers(), decoder]


def _default_optimizer() -> dict:
    return {'name': 'adam', 'params': {}}


@dataclass(frozen=True)
class TrainSection:
    epochs: int = 30
    batch_size: int = 32
    holdout: float = 0.0
    optimizer: dict = field(default_factory=_default_optimizer)

    def validate(self, key: str):
        _check(f'{key}.epochs', self.epochs, validate_at_least_one)
        _check(f'{key}.batch_size', self.batch_size, validate_at_least_one)
        _check(f'{key}.holdout', self.holdout, validate_unit_interval)
        if not isinstance(self.optimizer, dict) or set(self.optimizer) - {'name', 'params'}:
            raise ConfigError(f'{key}.optimizer', 'expected a mapping with "name" and "params"')
        try:
            make_optimizer(self.optimizer.get('name', 'adam'), self.optimizer.get('params'))
        except ForecastADConfigError as e:
            raise ConfigError(f'{key}.optimizer', str(e)) from e

    def train_config(self, seed: int) -> TrainConfig:
        spec = OptimizerSpec(self.optimizer.get('name', 'adam'), dict(self.optimizer.get('params') or {}))
        return TrainConfig(self.epochs, self.batch_size, seed, spec, self.holdout)


@dataclass(frozen=True)
class DetectorSection:
    """`half_life: auto` smooths with H = L~, null switches smoothing off."""

    power: float = 6.0
    half_life: int | str | None = 'auto'
    use_weights: bool = True
    top_k: int | None = None
    svg: bool | None = None

    def validate(self, key: str):
        _check(f'{key}.power', self.power, validate_positive)
        if self.power < 1:
            raise ConfigError(f'{key}.power', f'must be >= 1, got {self.power}')
        if isinstance(self.half_life, str):
            if self.half_life != 'auto':
                raise ConfigError(f'{key}.half_life', f'expected an integer, "auto" or null, got {self.half_life!r}')
        elif self.half_life is not None:
            _check(f'{key}.half_life', self.half_life, validate_at_least_one)
        if self.top_k is not None:
            _check(f'{key}.top_k', self.top_k, validate_at_least_one)

    def error_config(self, spec: WindowSpec) -> ErrorConfig:
        half_life = spec.forecast_len if self.half_life == 'auto' else self.half_life
        return ErrorConfig(float(self.power), half_life, bool(self.use_weights))

    @property
    def resolved_top_k(self) -> int:
        return self.top_k if self.top_k is not None else get_setting('DEFAULT_TOP_K')

    @property
    def resolved_svg(self) -> bool:
        return self.svg if self.svg is not None else get_setting('SVG')


@dataclass(frozen=True)
class SearchSection:
    generations: int = 3
    population_size: int = 10
    death_age: int = 3
    parent_count: int = 3
    elitism: bool = True
    epochs: int = 5
    batch_size: int = 32
    holdout: float = 0.0
    n_jobs: int | None = None

    def validate(self, key: str):
        for name in ('generations', 'population_size', 'death_age', 'epochs', 'batch_size'):
            _check(f'{key}.{name}', getattr(self, name), validate_at_least_one)
        _check(f'{key}.parent_count', self.parent_count, validate_at_least_two)
        _check(f'{key}.holdout', self.holdout, validate_unit_interval)

    def evolution_config(self, seed: int) -> EvolutionConfig:
        return EvolutionConfig(
            generations=self.generations,
            population_size=self.population_size,
            death_age=self.death_age,
            parent_count=self.parent_count,
            seed=seed,
            elitism=self.elitism,
            budget=TrainConfig(epochs=self.epochs, batch_size=self.batch_size),
            holdout=self.holdout,
            n_jobs=self.n_jobs if self.n_jobs is not None else get_setting('N_JOBS'),
        )


def _default_nab() -> dict:
    return {'tp': 1.0, 'fp': 0.11, 'fn': 1.0}


@dataclass(frozen=True)
class MetricsSection:
    """`detections` is the directory of a detection report; it defaults to output_dir."""

    nab: dict = field(default_factory=_default_nab)
    detections: str | None = None

    def validate(self, key: str):
        if not isinstance(self.nab, dict) or set(self.nab) - {'tp', 'fp', 'fn'}:
            raise ConfigError(f'{key}.nab', 'expected a mapping with tp, fp and fn weights')
        try:
            self.profile()
        except (ForecastADConfigError, TypeError, ValueError) as e:
            raise ConfigError(f'{key}.nab', str(e)) from e

    def profile(self) -> NabProfile:
        return NabProfile(**{name: float(value) for name, value in self.nab.items()})


SECTIONS = {
    'dataset': DatasetSection,
    'window': WindowSection,
    'model': ModelSection,
    'train': TrainSection,
    'detector': DetectorSection,
    'search': SearchSection,
    'metrics': MetricsSection,
}


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    output_dir: str = 'forecastad-run'
    dataset: DatasetSection = field(default_factory=DatasetSection)
    window: WindowSection = field(default_factory=WindowSection)
    model: ModelSection = field(default_factory=ModelSection)
    train: TrainSection = field(default_factory=TrainSection)
    detector: DetectorSection = field(default_factory=DetectorSection)
    search: SearchSection = field(default_factory=SearchSection)
    metrics: MetricsSection = field(default_factory=MetricsSection)

    @classmethod
    def from_dict(cls, data: dict | None) -> 'RunConfig':
        data = data or {}
        if not isinstance(data, dict):
            raise ConfigError('config', f'expected a mapping, got {type(data).__name__}')
        unknown = sorted(set(data) - {'seed', 'output_dir', *SECTIONS})
        if unknown:
            raise ConfigError(unknown[0], 'unknown key')
        seed = data.get('seed', 0)
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError('seed', f'expected a non-negative integer, got {seed!r}')
        output_dir = data.get('output_dir', 'forecastad-run')
        if not isinstance(output_dir, str) or not output_dir:
            raise ConfigError('output_dir', f'expected a directory path, got {output_dir!r}')
        try:
            sections = {name: _build(section, data.get(name), name) for name, section in SECTIONS.items()}
        except TypeError as e:
            raise ConfigError('config', str(e)) from e
        return cls(seed, output_dir, **sections)

    def serialize(self) -> dict:
        return asdict(self)

    @property
    def output_path(self) -> Path:
        return Path(self.output_dir)

    def lookup(self, key: str):
        value = self
        for part in key.split('.'):
            value = getattr(value, part)
        return value

    def require(self, *keys: str):
        """Every named path is set and exists; raises ConfigError naming the first key that is not."""
        for key in keys:
            value = self.lookup(key)
            if value is None:
                raise ConfigError(key, 'required by this command but not set')
            _check(key, value, validate_existing_file)

    def require_directory(self, key: str, value=None):
        value = self.lookup(key) if value is None else value
        _check(key, value, validate_existing_directory)


def parse_override(item: str) -> tuple[list[str], object]:
    """'window.horizon=0' -> (['window', 'horizon'], 0); the value is read as a YAML scalar."""
    key, sep, raw = item.partition('=')
    if not sep or not key.strip():
        raise ConfigError(item, 'overrides are written as dotted.key=value')
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as e:
        raise ConfigError(key.strip(), f'cannot parse value {raw!r}') from e
    return key.strip().split('.'), value


def apply_overrides(data: dict, overrides) -> dict:
    for item in overrides or ():
        path, value = parse_override(item)
        node = data
        for part in path[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError('.'.join(path), f'"{part}" is not a section')
            node = child
        node[path[-1]] = value
    return data


def read_config_document(path) -> dict:
    """
    YAML run configuration, or a run manifest (JSON) whose `config` member is used verbatim.
    """
    _check('--config', str(path), validate_existing_file)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError('--config', f'{path} is not valid YAML: {e}') from e
    if isinstance(data, dict) and 'config' in data and 'toolkit_version' in data:
        logger.debug('read_config_document: %s is a run manifest', path)
        return dict(data['config'])
    return data or {}


def load_run_config(path=None, overrides=(), seed: int | None = None, output_dir: str | None = None) -> RunConfig:
    data = read_config_document(path) if path is not None else {}
    if not isinstance(data, dict):
        raise ConfigError('config', f'expected a mapping, got {type(data).__name__}')
    data = apply_overrides(data, overrides)
    if seed is not None:
        data['seed'] = seed
    if output_dir is not None:
        data['output_dir'] = output_dir
    config = RunConfig.from_dict(data)
    logger.debug('load_run_config: %s', config)
    return config
