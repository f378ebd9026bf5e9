"""
Dense forecaster: a plain stack of Dense and Dropout layers over flattened windows.

Inputs are (L, m) windows flattened row-major to L * m features; the last Dense layer emits L~ * m values which
reshape to the (L~, m) forecast window. Parameters are stored as (fan_in, fan_out) weight matrices and bias vectors.
"""

import logging
from collections.abc import Sequence

import numpy as np

from forecastad.exceptions import DimensionMismatchError, EvaluationError, UnimplementedLayerError
from .layers import Initializer, LayerConfig, LayerKind

logger = logging.getLogger(__name__)

Parameters = list[tuple[np.ndarray, np.ndarray] | None]


class Network:
    """
    Immutable network: layer configuration plus materialized parameters.

    `params[i]` is `(weight, bias)` for Dense layer i and None for Dropout layers.
    """

    def __init__(
        self,
        layers: Sequence[LayerConfig],
        input_dims: tuple[int, int],
        output_dims: tuple[int, int],
        params: Parameters,
    ):
        self.layers = tuple(layers)
        self.input_dims = (int(input_dims[0]), int(input_dims[1]))
        self.output_dims = (int(output_dims[0]), int(output_dims[1]))
        if len(params) != len(self.layers):
            raise DimensionMismatchError(f'{len(params)} parameter entries for {len(self.layers)} layers')
        check_chain(self.layers, self.input_dims, self.output_dims)

        frozen = []
        width = self.n_inputs
        for i, (layer, entry) in enumerate(zip(self.layers, params, strict=True)):
            if layer.kind == LayerKind.DROPOUT:
                frozen.append(None)
                continue
            weight = np.array(entry[0], dtype=np.float64)
            bias = np.array(entry[1], dtype=np.float64)
            if weight.shape != (width, layer.units) or bias.shape != (layer.units,):
                raise DimensionMismatchError(
                    f'parameters shaped {weight.shape}/{bias.shape}, expected ({width}, {layer.units})',
                    layer_index=i,
                )
            weight.setflags(write=False)
            bias.setflags(write=False)
            frozen.append((weight, bias))
            width = layer.units
        self.params: Parameters = frozen

    def __repr__(self):
        layers = ', '.join(f'{layer.kind.value}({layer.size})' for layer in self.layers)
        return f'<Network {self.input_dims} -> {self.output_dims}: {layers}>'

    @property
    def n_inputs(self) -> int:
        return self.input_dims[0] * self.input_dims[1]

    @property
    def n_outputs(self) -> int:
        return self.output_dims[0] * self.output_dims[1]

    @property
    def parameter_count(self) -> int:
        return sum(weight.size + bias.size for weight, bias in self.dense_params())

    def dense_params(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [entry for entry in self.params if entry is not None]

    def flat_parameters(self) -> list[np.ndarray]:
        """Weights and biases in layer order: [W0, b0, W1, b1, ...]."""
        return [array for entry in self.dense_params() for array in entry]

    def with_parameters(self, flat: Sequence[np.ndarray]) -> 'Network':
        """A new network with the same layers and the given [W0, b0, ...] parameters."""
        return Network(self.layers, self.input_dims, self.output_dims, unflatten(self.layers, flat))

    def summary(self) -> str:
        """Layer table: index, type, activation, output shape and parameter count."""
        n_tags = self.input_dims[1]
        last_dense = max(i for i, layer in enumerate(self.layers) if layer.kind == LayerKind.DENSE)
        rows = [('#', 'Type', 'Activation', 'Output shape', 'Params')]
        width = self.n_inputs
        for i, (layer, entry) in enumerate(zip(self.layers, self.params, strict=True)):
            if layer.kind == LayerKind.DENSE:
                width = layer.units
            if i == last_dense:
                shape = self.output_dims
            elif width % n_tags == 0:
                shape = (n_tags, width // n_tags)
            else:
                shape = (width,)
            count = 0 if entry is None else entry[0].size + entry[1].size
            activation = layer.activation.value if layer.kind == LayerKind.DENSE else f'rate={layer.rate:g}'
            rows.append((str(i), layer.kind.value.capitalize(), activation, str(shape), str(count)))
        rows.append(('', 'Total', '', '', str(self.parameter_count)))
        widths = [max(len(row[c]) for row in rows) for c in range(len(rows[0]))]
        return '\n'.join('  '.join(cell.ljust(w) for cell, w in zip(row, widths, strict=True)).rstrip() for row in rows)


def check_chain(layers: Sequence[LayerConfig], input_dims: tuple[int, int], output_dims: tuple[int, int]):
    """Raise unless every layer is buildable and the Dense widths chain from L * m to L~ * m."""
    for i, layer in enumerate(layers):
        if not layer.kind.implemented:
            raise UnimplementedLayerError(layer.kind.value, layer_index=i)
    dense = [i for i, layer in enumerate(layers) if layer.kind == LayerKind.DENSE]
    if not dense:
        raise DimensionMismatchError('a network needs at least one dense layer')
    n_outputs = output_dims[0] * output_dims[1]
    last = dense[-1]
    if layers[last].units != n_outputs:
        raise DimensionMismatchError(
            f'last dense layer emits {layers[last].units} values, output window {output_dims} needs {n_outputs}',
            layer_index=last,
        )
    if input_dims[1] != output_dims[1]:
        raise DimensionMismatchError(f'input window has {input_dims[1]} tags, output window has {output_dims[1]}')


def unflatten(layers: Sequence[LayerConfig], flat: Sequence[np.ndarray]) -> Parameters:
    params: Parameters = []
    arrays = iter(flat)
    for layer in layers:
        params.append(None if layer.kind == LayerKind.DROPOUT else (next(arrays), next(arrays)))
    return params


def init_network(
    configs: Sequence[LayerConfig],
    input_dims: tuple[int, int],
    output_dims: tuple[int, int],
    seed: int,
    initializer: Initializer | str = Initializer.GLOROT_UNIFORM,
) -> Network:
    """Fan-based uniform weights and zero biases; identical parameter bytes for a fixed seed."""
    configs = tuple(configs)
    check_chain(configs, input_dims, output_dims)
    initializer = Initializer(initializer)
    rng = np.random.default_rng(seed)
    params: Parameters = []
    width = input_dims[0] * input_dims[1]
    for layer in configs:
        if layer.kind == LayerKind.DROPOUT:
            params.append(None)
            continue
        params.append((initializer.sample(width, layer.units, rng), np.zeros(layer.units)))
        width = layer.units
    network = Network(configs, input_dims, output_dims, params)
    logger.debug('init_network: %r, %s parameters, seed %s', network, network.parameter_count, seed)
    return network


def as_batch(network: Network, batch: np.ndarray) -> np.ndarray:
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim == 3:
        batch = batch.reshape(batch.shape[0], -1)
    if batch.ndim != 2 or batch.shape[1] != network.n_inputs:
        raise EvaluationError(f'batch shaped {batch.shape}, expected (batch, {network.n_inputs})')
    return batch


def _run(network: Network, x: np.ndarray, rng: np.random.Generator | None, keep: bool):
    """Forward pass; with an rng Dropout is active (inverted dropout). Returns output and the per-layer cache."""
    cache = []
    for layer, entry in zip(network.layers, network.params, strict=True):
        if layer.kind == LayerKind.DROPOUT:
            if rng is None:
                if keep:
                    cache.append(None)
                continue
            keep_prob = 1.0 - layer.rate
            mask = (rng.random(x.shape) < keep_prob) / keep_prob
            if keep:
                cache.append(mask)
            x = x * mask
            continue
        weight, bias = entry
        z = x @ weight + bias
        a = layer.activation.forward(z)
        if keep:
            cache.append((x, z, a))
        x = a
    return x, cache


def forward(
    network: Network, batch: np.ndarray, train_mode: bool = False, rng: np.random.Generator | None = None
) -> np.ndarray:
    """
    Evaluate the network on a (batch, L * m) array (or (batch, L, m) windows) and return (batch, L~ * m).

    Dropout is only applied in train mode, drawing masks from `rng` (a fresh unseeded generator when omitted).
    """
    x = as_batch(network, batch)
    if train_mode and rng is None:
        rng = np.random.default_rng()
    out, _ = _run(network, x, rng if train_mode else None, keep=False)
    return out


def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean over all elements of the squared difference, and its gradient 2 (pred - target) / count."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise EvaluationError(f'prediction shaped {pred.shape}, target shaped {target.shape}')
    if pred.size == 0:
        raise EvaluationError('empty prediction')
    diff = pred - target
    return float(np.mean(diff * diff)), 2.0 * diff / diff.size


def _backprop(network: Network, cache: list, grad: np.ndarray) -> Parameters:
    grads: Parameters = [None] * len(network.layers)
    for i in range(len(network.layers) - 1, -1, -1):
        layer, entry = network.layers[i], cache[i]
        if layer.kind == LayerKind.DROPOUT:
            if entry is not None:
                grad = grad * entry
            continue
        x, z, a = entry
        dz = layer.activation.backward(z, a, grad)
        grads[i] = (x.T @ dz, dz.sum(axis=0))
        grad = dz @ network.params[i][0].T
    return grads


def loss_and_gradients(
    network: Network, batch: np.ndarray, target: np.ndarray, rng: np.random.Generator | None = None
) -> tuple[float, Parameters]:
    """MSE loss of one batch and its gradient for every Dense weight and bias."""
    x = as_batch(network, batch)
    out, cache = _run(network, x, rng, keep=True)
    loss, grad = mse_loss(out, np.asarray(target, dtype=np.float64).reshape(out.shape[0], -1))
    return loss, _backprop(network, cache, grad)


def backward(
    network: Network,
    batch: np.ndarray,
    target: np.ndarray | None = None,
    upstream: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
) -> Parameters:
    """
    Parameter gradients for one batch, aligned with `network.params` (None for Dropout layers).

    The output gradient is the MSE gradient against `target`, or `upstream` when given. Nothing is retained
    between calls.
    """
    if upstream is None:
        if target is None:
            raise EvaluationError('backward needs a target or an upstream gradient')
        return loss_and_gradients(network, batch, target, rng)[1]
    x = as_batch(network, batch)
    out, cache = _run(network, x, rng, keep=True)
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != out.shape:
        raise EvaluationError(f'upstream gradient shaped {upstream.shape}, expected {out.shape}')
    return _backprop(network, cache, upstream)


def flatten_gradients(grads: Parameters) -> list[np.ndarray]:
    return [array for entry in grads if entry is not None for array in entry]

