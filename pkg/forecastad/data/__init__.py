from .frame import (
    AttackInterval,
    CsvSchema,
    TimeSeriesFrame,
    load_attacks,
    load_csv,
    resample_uniform,
    save_attacks,
    save_csv,
    with_attacks,
)
from .scaling import ScalingStats, apply_scaler, fit_scaler
from .synth import SynthConfig, default_config, synth_generate
from .windows import WindowDataset, WindowPair, WindowSpec, make_windows

__all__ = [
    'AttackInterval',
    'CsvSchema',
    'ScalingStats',
    'SynthConfig',
    'TimeSeriesFrame',
    'WindowDataset',
    'WindowPair',
    'WindowSpec',
    'apply_scaler',
    'default_config',
    'fit_scaler',
    'load_attacks',
    'load_csv',
    'make_windows',
    'resample_uniform',
    'save_attacks',
    'save_csv',
    'synth_generate',
    'with_attacks',
]
