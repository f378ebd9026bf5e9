"""
Model files.

A model file is a zip archive of `.npy` members (readable with `numpy.load(path, allow_pickle=False)`):

- `header`: UTF-8 JSON as a uint8 array with `magic`, `format_version`, `input_dims`, `output_dims` and `layers`
  (kind, activation, size per layer);
- `param_<j>`: the j-th parameter array in layer order (W0, b0, W1, b1, ...), float64, row-major.

Member timestamps are fixed, so saving the same network twice produces identical bytes.
"""

import json
import logging
import zipfile
from pathlib import Path

import numpy as np

from forecastad.exceptions import DimensionMismatchError, ForecastADError, ModelFormatError
from .layers import LayerConfig, LayerKind
from .network import Network, unflatten

logger = logging.getLogger(__name__)

MAGIC = 'forecastad-model'
MODEL_FORMAT_VERSION = 1
_FIXED_DATE = (1980, 1, 1, 0, 0, 0)
_LOAD_ERRORS = (OSError, EOFError, AttributeError, KeyError, TypeError, ValueError, zipfile.BadZipFile, ForecastADError)


def model_header(network: Network) -> dict:
    return {
        'magic': MAGIC,
        'format_version': MODEL_FORMAT_VERSION,
        'input_dims': list(network.input_dims),
        'output_dims': list(network.output_dims),
        'layers': [layer.serialize() for layer in network.layers],
    }


def save_model(network: Network, path) -> Path:
    path = Path(path)
    header = json.dumps(model_header(network), sort_keys=True).encode('utf-8')
    members = {'header': np.frombuffer(header, dtype=np.uint8)}
    for j, array in enumerate(network.flat_parameters()):
        members[f'param_{j}'] = np.ascontiguousarray(array, dtype=np.float64)

    with zipfile.ZipFile(path, 'w', compression=zipfile.ZIP_STORED) as archive:
        for name, array in members.items():
            info = zipfile.ZipInfo(f'{name}.npy', date_time=_FIXED_DATE)
            with archive.open(info, 'w', force_zip64=True) as handle:
                np.lib.format.write_array(handle, array, allow_pickle=False)
    logger.debug('save_model: %r written to %s', network, path)
    return path


def load_model(path, expected_input_dims=None, expected_output_dims=None) -> Network:
    """
    Read a model file written by `save_model`.

    Corrupt, truncated or foreign files raise ModelFormatError; a model whose window dimensions differ from the
    expected ones raises DimensionMismatchError.
    """
    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as archive:
            header = json.loads(archive['header'].tobytes().decode('utf-8'))
            if not isinstance(header, dict) or header.get('magic') != MAGIC:
                raise ModelFormatError(path, 'not a forecastad model file')
            if header.get('format_version') != MODEL_FORMAT_VERSION:
                raise ModelFormatError(
                    path, f'format version {header.get("format_version")!r}, expected {MODEL_FORMAT_VERSION}'
                )
            layers = [LayerConfig.from_dict(item) for item in header['layers']]
            n_arrays = 2 * sum(1 for layer in layers if layer.kind == LayerKind.DENSE)
            flat = [archive[f'param_{j}'] for j in range(n_arrays)]
            dims = tuple(header['input_dims']), tuple(header['output_dims'])
            network = Network(layers, *dims, unflatten(layers, flat))
    except ModelFormatError:
        raise
    except _LOAD_ERRORS as e:
        raise ModelFormatError(path, f'{type(e).__name__}: {e}') from e

    if expected_input_dims is not None and network.input_dims != tuple(expected_input_dims):
        raise DimensionMismatchError(f'model input window {network.input_dims}, expected {expected_input_dims}')
    if expected_output_dims is not None and network.output_dims != tuple(expected_output_dims):
        raise DimensionMismatchError(f'model output window {network.output_dims}, expected {expected_output_dims}')
    logger.debug('load_model: %r read from %s', network, path)
    return network
