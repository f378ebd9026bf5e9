from .layers import Activation, Initializer, LayerConfig, LayerKind
from .network import Network, backward, forward, init_network, loss_and_gradients, mse_loss
from .optim import SGD, Adam, AdamState, OptimizerSpec, adam_step, make_optimizer
from .serialization import load_model, save_model
from .train import LossHistory, TrainConfig, TrainResult, evaluate, predict_frame, train

__all__ = [
    'SGD',
    'Activation',
    'Adam',
    'AdamState',
    'Initializer',
    'LayerConfig',
    'LayerKind',
    'LossHistory',
    'Network',
    'OptimizerSpec',
    'TrainConfig',
    'TrainResult',
    'adam_step',
    'backward',
    'evaluate',
    'forward',
    'init_network',
    'load_model',
    'loss_and_gradients',
    'make_optimizer',
    'mse_loss',
    'predict_frame',
    'save_model',
    'train',
]
