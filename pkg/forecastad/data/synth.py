"""
Desk-scale synthetic plant: periodic, constant and drifting tags with injected attacks and an optional start-up
transient at the head of the training recording.

Generator settings are plain YAML (see docs/config.md); `SynthConfig.from_dict` validates them and names the
offending key on error.
"""

import enum
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from forecastad.exceptions import SynthConfigError
from .frame import AttackInterval, TimeSeriesFrame

logger = logging.getLogger(__name__)

# Start-up disturbance: piecewise-constant level shifts, redrawn every segment, in clean-signal standard deviations.
STARTUP_SEGMENT = 20
STARTUP_LEVEL = 0.5


class SignalKind(str, enum.Enum):
    SINE = 'sine'
    CONSTANT = 'constant'
    RANDOM_WALK = 'random_walk'


class PerturbationKind(str, enum.Enum):
    OFFSET = 'offset'
    FREEZE = 'freeze'
    SPIKE = 'spike'


@dataclass(frozen=True)
class TagSignal:
    name: str
    kind: SignalKind = SignalKind.SINE
    period: float = 100.0
    phase: float = 0.0
    amplitude: float = 1.0
    offset: float = 0.0
    noise: float = 0.05


@dataclass(frozen=True)
class Injection:
    """
    Attack on one or more tags over [start, end) (end exclusive, as written in configs).
    `magnitude` is expressed in standard deviations of the clean tag signal.
    """

    start: int
    end: int
    tags: tuple[str, ...]
    kind: PerturbationKind = PerturbationKind.OFFSET
    magnitude: float = 3.0
    spacing: int = 10


@dataclass(frozen=True)
class SynthConfig:
    """
    :param startup: Timepoints of plant start-up at the head of the training recording. The test recording starts
        with the plant already running.
    """

    n_points: int
    tags: tuple[TagSignal, ...]
    injections: tuple[Injection, ...] = field(default=())
    step: float = 1.0
    startup: int = 0

    def __post_init__(self):
        if self.n_points < 2:
            raise SynthConfigError('n_points', f'must be >= 2, got {self.n_points}')
        if self.step <= 0:
            raise SynthConfigError('step', f'must be > 0, got {self.step}')
        if not 0 <= self.startup < self.n_points:
            raise SynthConfigError('startup', f'must be in [0, {self.n_points}), got {self.startup}')
        if not self.tags:
            raise SynthConfigError('tags', 'at least one tag is required')
        names = [tag.name for tag in self.tags]
        if len(set(names)) != len(names):
            raise SynthConfigError('tags', 'tag names must be unique')
        for i, tag in enumerate(self.tags):
            if tag.kind == SignalKind.SINE and tag.period <= 0:
                raise SynthConfigError(f'tags[{i}].period', f'must be > 0, got {tag.period}')
            if tag.noise < 0:
                raise SynthConfigError(f'tags[{i}].noise', f'must be >= 0, got {tag.noise}')

        ordered = sorted(enumerate(self.injections), key=lambda item: item[1].start)
        for i, injection in enumerate(self.injections):
            key = f'injections[{i}]'
            if not 0 <= injection.start < injection.end <= self.n_points:
                raise SynthConfigError(key, f'[{injection.start}, {injection.end}) outside [0, {self.n_points})')
            unknown = [name for name in injection.tags if name not in names]
            if unknown or not injection.tags:
                raise SynthConfigError(f'{key}.tags', f'unknown or empty target tags {unknown or "[]"}')
            if injection.spacing < 1:
                raise SynthConfigError(f'{key}.spacing', f'must be >= 1, got {injection.spacing}')
        for (_, previous), (j, current) in zip(ordered, ordered[1:], strict=False):
            if current.start < previous.end:
                raise SynthConfigError(
                    f'injections[{j}]',
                    f'[{current.start}, {current.end}) overlaps [{previous.start}, {previous.end})',
                )

    @property
    def tag_names(self) -> tuple[str, ...]:
        return tuple(tag.name for tag in self.tags)

    @classmethod
    def from_dict(cls, data: dict) -> 'SynthConfig':
        known = {'n_points', 'tags', 'injections', 'step', 'startup'}
        unknown = set(data) - known
        if unknown:
            raise SynthConfigError(sorted(unknown)[0], 'unknown key')
        try:
            tags = tuple(
                TagSignal(**{**item, 'kind': SignalKind(item.get('kind', 'sine'))}) for item in data.get('tags', [])
            )
            injections = tuple(
                Injection(
                    **{
                        **item,
                        'tags': tuple(item.get('tags', ())),
                        'kind': PerturbationKind(item.get('kind', 'offset')),
                    }
                )
                for item in data.get('injections', [])
            )
        except (TypeError, ValueError) as e:
            raise SynthConfigError('tags/injections', str(e)) from e
        return cls(
            int(data.get('n_points', 0)),
            tags,
            injections,
            float(data.get('step', 1.0)),
            int(data.get('startup', 0)),
        )

    def serialize(self) -> dict:
        return {
            'n_points': self.n_points,
            'step': self.step,
            'startup': self.startup,
            'tags': [{**asdict(tag), 'kind': tag.kind.value} for tag in self.tags],
            'injections': [
                {**asdict(injection), 'tags': list(injection.tags), 'kind': injection.kind.value}
                for injection in self.injections
            ],
        }


def default_config(n_points: int = 5000) -> SynthConfig:
    """
    Eight SWaT-style tags over five subprocesses with six injected attacks of all three kinds. Every tag is
    forecastable in steady state; the training recording opens with a start-up transient.
    """
    tags = (
        TagSignal('FIT101', SignalKind.SINE, period=60, amplitude=1.0, noise=0.05),
        TagSignal('LIT101', SignalKind.SINE, period=300, amplitude=2.0, offset=5.0, noise=0.05),
        TagSignal('MV101', SignalKind.CONSTANT, offset=1.0, noise=0.0),
        TagSignal('P101', SignalKind.SINE, period=120, phase=1.0, amplitude=1.0, noise=0.05),
        TagSignal('AIT201', SignalKind.SINE, period=1000, phase=0.3, amplitude=0.5, offset=7.0, noise=0.02),
        TagSignal('FIT201', SignalKind.SINE, period=90, phase=0.5, amplitude=1.0, noise=0.05),
        TagSignal('LIT301', SignalKind.SINE, period=200, phase=2.0, amplitude=1.5, offset=3.0, noise=0.05),
        TagSignal('PIT501', SignalKind.SINE, period=150, phase=1.5, amplitude=0.5, offset=2.0, noise=0.02),
    )
    scale = n_points / 5000
    spans = [(600, 700), (1300, 1360), (2000, 2150), (2800, 2900), (3500, 3560), (4300, 4420)]
    bounds = [(int(a * scale), int(b * scale)) for a, b in spans]
    injections = (
        Injection(*bounds[0], ('LIT101',), PerturbationKind.OFFSET, magnitude=3.0),
        Injection(*bounds[1], ('FIT101',), PerturbationKind.SPIKE, magnitude=8.0, spacing=4),
        Injection(*bounds[2], ('P101',), PerturbationKind.FREEZE),
        Injection(*bounds[3], ('FIT201',), PerturbationKind.OFFSET, magnitude=-3.0),
        Injection(*bounds[4], ('MV101', 'LIT301'), PerturbationKind.OFFSET, magnitude=2.0),
        Injection(*bounds[5], ('LIT301',), PerturbationKind.FREEZE),
    )
    return SynthConfig(n_points, tags, injections, startup=int(400 * scale))


def _clean_signal(tag: TagSignal, t: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    noise = rng.standard_normal(t.shape[0]) * tag.noise
    match tag.kind:
        case SignalKind.SINE:
            return tag.offset + tag.amplitude * np.sin(2 * np.pi * t / tag.period + tag.phase) + noise
        case SignalKind.CONSTANT:
            return tag.offset + noise
        case SignalKind.RANDOM_WALK:
            return tag.offset + np.cumsum(noise)
        case _:
            raise NotImplementedError(f'Signal kind {tag.kind} not implemented')


def _perturb(column: np.ndarray, injection: Injection, scale: float):
    window = slice(injection.start, injection.end)
    match injection.kind:
        case PerturbationKind.OFFSET:
            column[window] += injection.magnitude * scale
        case PerturbationKind.FREEZE:
            column[window] = column[injection.start]
        case PerturbationKind.SPIKE:
            spikes = np.arange(injection.start, injection.end, injection.spacing)
            signs = np.where(np.arange(spikes.shape[0]) % 2 == 0, 1.0, -1.0)
            column[spikes] += signs * injection.magnitude * scale
        case _:
            raise NotImplementedError(f'Perturbation kind {injection.kind} not implemented')


def _start_up(values: np.ndarray, length: int, rng: np.random.Generator):
    """Level shifts over the first `length` rows. Tags without variance (fixed valves) stay put."""
    scale = values.std(axis=0)
    segments = -(-length // STARTUP_SEGMENT)
    levels = rng.standard_normal((segments, values.shape[1])) * STARTUP_LEVEL * scale
    values[:length] += np.repeat(levels, STARTUP_SEGMENT, axis=0)[:length]


def synth_generate(config: SynthConfig, seed: int, inject: bool = True, startup: bool = False) -> TimeSeriesFrame:
    """
    Deterministic for a fixed seed: every random draw comes from one numpy Generator in tag order.
    With inject=False the same clean plant is produced without attacks; startup=True adds the start-up transient
    of `config.startup` timepoints. The training split uses both.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(config.n_points, dtype=np.float64)
    values = np.column_stack([_clean_signal(tag, t, rng) for tag in config.tags])
    if startup and config.startup:
        _start_up(values, config.startup, rng)

    labels = np.zeros(config.n_points, dtype=np.int8)
    intervals = []
    if inject:
        columns = {name: i for i, name in enumerate(config.tag_names)}
        clean_std = values.std(axis=0)
        for injection in sorted(config.injections, key=lambda item: item.start):
            for name in injection.tags:
                column = values[:, columns[name]]
                _perturb(column, injection, float(clean_std[columns[name]]) or 1.0)
            labels[injection.start : injection.end] = 1
            intervals.append(AttackInterval(injection.start, injection.end - 1, injection.tags))

    logger.debug('synth_generate: seed %s, %s timepoints, %s injection(s)', seed, config.n_points, len(intervals))
    return TimeSeriesFrame(t * config.step, values, config.tag_names, labels, tuple(intervals))
