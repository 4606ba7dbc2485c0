"""From-scratch numpy LSTM and 1D-CNN next-symbol predictors."""

from .base import NeuralConfig, NeuralModel, pad_window, softmax
from .cnn import CNNModel
from .lstm import LSTMModel


def make_model(n_symbols: int, config: NeuralConfig) -> NeuralModel:
    if config.arch == "lstm":
        return LSTMModel(n_symbols, config)
    return CNNModel(n_symbols, config)


def nn_forward(model: NeuralModel, window):
    return model.forward(window)


def nn_train_step(model: NeuralModel, window, target: int) -> float:
    return model.train_step(window, target)


def nn_predict(model: NeuralModel, window) -> int:
    return model.predict(window)


__all__ = [
    "CNNModel",
    "LSTMModel",
    "NeuralConfig",
    "NeuralModel",
    "make_model",
    "nn_forward",
    "nn_predict",
    "nn_train_step",
    "pad_window",
    "softmax",
]
