"""Shared machinery for the numpy next-symbol networks: flat parameter
storage, Adam, softmax/cross-entropy and the predict/train contract."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ..errors import NumericalDivergence
from ..model import UNKNOWN

ARCHS = ("lstm", "cnn")


@dataclass(frozen=True)
class NeuralConfig:
    arch: str = "lstm"
    seq_len: int = 5
    hidden: int = 64
    layers: int = 2
    embed: int = 32
    kernel: int = 3
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.arch not in ARCHS:
            raise ValueError(f"arch must be one of {ARCHS}, got {self.arch!r}")
        for name in ("seq_len", "hidden", "layers", "embed", "kernel"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.lr < 0:
            raise ValueError("learning rate must be >= 0")

    def with_(self, **kw) -> "NeuralConfig":
        return replace(self, **kw)


class ParamSet:
    """One flat float64 vector with named, reshaped views into it."""

    def __init__(self, shapes: Sequence[tuple[str, tuple[int, ...]]]):
        sizes = [int(np.prod(shape)) for _, shape in shapes]
        self.flat = np.zeros(sum(sizes))
        self.views: dict[str, np.ndarray] = {}
        self.slices: dict[str, slice] = {}
        offset = 0
        for (name, shape), size in zip(shapes, sizes):
            sl = slice(offset, offset + size)
            self.slices[name] = sl
            self.views[name] = self.flat[sl].reshape(shape)
            offset += size

    def zeros_like(self) -> "ParamSet":
        out = ParamSet.__new__(ParamSet)
        out.flat = np.zeros_like(self.flat)
        out.slices = self.slices
        out.views = {n: out.flat[sl].reshape(self.views[n].shape) for n, sl in self.slices.items()}
        return out

    def __getitem__(self, name: str) -> np.ndarray:
        return self.views[name]

    def __len__(self) -> int:
        return self.flat.size


class Adam:
    def __init__(self, size: int, lr: float, beta1: float, beta2: float, eps: float):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        self.m *= b1
        self.m += (1 - b1) * grad
        self.v *= b2
        self.v += (1 - b2) * grad * grad
        m_hat = self.m / (1 - b1 ** self.t)
        v_hat = self.v / (1 - b2 ** self.t)
        params -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()


def cross_entropy(probs: np.ndarray, target: int) -> float:
    return float(-np.log(max(probs[target], 1e-300)))


def uniform_init(rng: np.random.Generator, arr: np.ndarray, fan_in: int) -> None:
    s = 1.0 / np.sqrt(fan_in)
    arr[...] = rng.uniform(-s, s, size=arr.shape)


def pad_window(window: Sequence[int], k: int) -> np.ndarray:
    """Last ``k`` symbols, left-padded with Unknown."""
    window = list(window)[-k:]
    return np.array([UNKNOWN] * (k - len(window)) + window, dtype=np.intp)


def _argmax(probs: np.ndarray, exclude: int | None) -> int:
    # np.argmax returns the first maximum, i.e. the smaller symbol id
    if exclude is not None and len(probs) > 1:
        probs = probs.copy()
        probs[exclude] = -np.inf
    return int(np.argmax(probs))


class NeuralModel:
    """Base class. Subclasses define ``_build``, ``_forward`` and ``_backward``."""

    def __init__(self, n_symbols: int, config: NeuralConfig):
        if n_symbols < 1:
            raise ValueError("alphabet must contain at least one symbol")
        self.n_symbols = n_symbols
        self.config = config
        self.params = ParamSet(self._shapes())
        self._init_params(np.random.default_rng(config.seed))
        self.grads = self.params.zeros_like()
        self.opt = Adam(len(self.params), config.lr, config.beta1, config.beta2, config.eps)

    # subclass hooks
    def _shapes(self) -> list[tuple[str, tuple[int, ...]]]:
        raise NotImplementedError

    def _init_params(self, rng: np.random.Generator) -> None:
        raise NotImplementedError

    def _forward(self, x: np.ndarray) -> tuple[np.ndarray, object]:
        """Return logits and a cache for ``_backward``."""
        raise NotImplementedError

    def _backward(self, cache: object, dlogits: np.ndarray) -> None:
        """Write parameter gradients into ``self.grads``."""
        raise NotImplementedError

    # public contract
    def forward(self, window: Sequence[int]) -> np.ndarray:
        logits, _ = self._forward(pad_window(window, self.config.seq_len))
        return softmax(logits)

    def predict(self, window: Sequence[int], exclude: int | None = None) -> int:
        return _argmax(self.forward(window), exclude)

    def loss(self, window: Sequence[int], target: int) -> float:
        return cross_entropy(self.forward(window), target)

    def loss_and_grad(self, window: Sequence[int], target: int) -> tuple[float, np.ndarray, np.ndarray]:
        """Loss, probabilities and flat gradient (a view that later calls overwrite)."""
        logits, cache = self._forward(pad_window(window, self.config.seq_len))
        probs = softmax(logits)
        loss = cross_entropy(probs, target)
        if not np.isfinite(loss) or not np.all(np.isfinite(logits)):
            raise NumericalDivergence(f"non-finite loss {loss}")
        dlogits = probs.copy()
        dlogits[target] -= 1.0
        self.grads.flat[:] = 0.0
        self._backward(cache, dlogits)
        return loss, probs, self.grads.flat

    def train_step(self, window: Sequence[int], target: int) -> float:
        loss, _, grad = self.loss_and_grad(window, target)
        self.opt.step(self.params.flat, grad)
        return loss

    def predict_then_update(self, window: Sequence[int], target: int, exclude: int | None = None) -> int:
        """Online step: prediction from the pre-update parameters, then one update.

        Equivalent to ``predict`` followed by ``train_step`` but shares the
        forward pass.
        """
        _, probs, grad = self.loss_and_grad(window, target)
        pred = _argmax(probs, exclude)
        self.opt.step(self.params.flat, grad)
        return pred

    # the harness uses the same names as the Markov predictor
    def update(self, window: Sequence[int], target: int) -> None:
        self.train_step(window, target)
