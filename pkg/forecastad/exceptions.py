class ForecastADError(Exception):
    """Base class for every error raised by forecastad."""


class ForecastADConfigError(ForecastADError):
    """Errors caused by invalid user input. Management commands exit with code 2 on these."""


class ForecastADRuntimeError(ForecastADError):
    """Errors raised while processing valid input (training, IO). Management commands exit with code 3 on these."""


# --- configuration / validation ------------------------------------------------------------------------------------


class ConfigError(ForecastADConfigError, ValueError):
    """Raised when a run configuration key is missing, unknown or invalid."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f'Invalid configuration at "{key}": {message}')


class ParameterError(ForecastADConfigError, ValueError):
    def __init__(self, name: str, value, expectation: str):
        self.name = name
        self.value = value
        super().__init__(f'Invalid value for {name}: {value!r} ({expectation})')


class SchemaError(ForecastADConfigError, ValueError):
    def __init__(self, path, missing_columns: list[str]):
        self.missing_columns = missing_columns
        super().__init__(f'{path}: missing column(s) {", ".join(repr(c) for c in missing_columns)}')


class SynthConfigError(ForecastADConfigError, ValueError):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f'Invalid synthetic generator setting "{key}": {message}')


class InfeasibleTemplateError(ForecastADConfigError, ValueError):
    def __init__(self, attempts: int, reason: str):
        super().__init__(
            f'Architecture template admits no buildable genome after {attempts} attempts: {reason}. '
            'Make sure every layer slot allows at least one implemented layer kind (dense, dropout).'
        )


class TemplateMismatchError(ForecastADConfigError, ValueError):
    def __init__(self, message: str):
        super().__init__(f'Genomes do not share a template: {message}')


# --- data / runtime ------------------------------------------------------------------------------------------------


class CsvParseError(ForecastADRuntimeError, ValueError):
    def __init__(self, path, column: str, row: int, value):
        self.column = column
        self.row = row
        super().__init__(f'{path}: non-numeric value {value!r} in column {column!r} at data row {row}')


class CsvReadError(ForecastADRuntimeError, ValueError):
    """The file cannot be parsed as a UTF-8 CSV table at all."""

    def __init__(self, path, reason: str):
        self.path = path
        super().__init__(f'{path}: cannot read CSV file: {reason}')


class InsufficientDataError(ForecastADRuntimeError, ValueError):
    def __init__(self, what: str, required: int, available: int):
        super().__init__(f'{what}: at least {required} timepoint(s) required, got {available}')


class SeriesTooShortError(ForecastADRuntimeError, ValueError):
    def __init__(self, n_points: int, minimum: int, spec):
        self.minimum = minimum
        super().__init__(
            f'Series of {n_points} timepoints is too short for windows {spec}: at least {minimum} timepoints needed'
        )


class FrameInvariantError(ForecastADRuntimeError, ValueError):
    def __init__(self, message: str):
        super().__init__(f'Invalid time series frame: {message}')


class ShapeMismatchError(ForecastADRuntimeError, ValueError):
    def __init__(self, what: str, expected, got):
        super().__init__(f'{what}: expected shape {expected}, got {got}')


class DimensionMismatchError(ForecastADRuntimeError, ValueError):
    def __init__(self, message: str, layer_index: int | None = None):
        self.layer_index = layer_index
        prefix = f'Layer {layer_index}: ' if layer_index is not None else ''
        super().__init__(f'{prefix}{message}')


class UnimplementedLayerError(ForecastADRuntimeError, NotImplementedError):
    def __init__(self, kind, layer_index: int | None = None):
        self.kind = kind
        where = f' (layer {layer_index})' if layer_index is not None else ''
        super().__init__(f'Layer kind {kind} is recognised by templates but not implemented{where}')


class EvaluationError(ForecastADRuntimeError, ValueError):
    def __init__(self, message: str):
        super().__init__(f'Network evaluation failed: {message}')


class TrainingDivergedError(ForecastADRuntimeError, ArithmeticError):
    def __init__(self, detail: str, epoch: int | None = None):
        self.epoch = epoch
        where = f' in epoch {epoch}' if epoch is not None else ''
        super().__init__(f'Training diverged{where}: {detail}')


class ModelFormatError(ForecastADRuntimeError, ValueError):
    def __init__(self, path, reason: str):
        super().__init__(f'Cannot load model file {path}: {reason}')
