"""1D convolutional classifier: embedding, stacked same-padded ReLU
convolutions, global max pool over time, linear softmax head."""

from __future__ import annotations

import numpy as np

from .base import NeuralModel, uniform_init


def _im2col(x: np.ndarray, kernel: int) -> np.ndarray:
    """(T, C) -> (T, kernel*C) with zero 'same' padding."""
    T, C = x.shape
    left = (kernel - 1) // 2
    padded = np.zeros((T + kernel - 1, C))
    padded[left:left + T] = x
    return np.concatenate([padded[j:j + T] for j in range(kernel)], axis=1)


def _col2im(dcols: np.ndarray, kernel: int, C: int) -> np.ndarray:
    T = dcols.shape[0]
    left = (kernel - 1) // 2
    dpadded = np.zeros((T + kernel - 1, C))
    for j in range(kernel):
        dpadded[j:j + T] += dcols[:, j * C:(j + 1) * C]
    return dpadded[left:left + T]


class CNNModel(NeuralModel):
    def _shapes(self):
        c = self.config
        shapes = [("embed", (self.n_symbols, c.embed))]
        c_in = c.embed
        for layer in range(c.layers):
            shapes.append((f"K{layer}", (c.kernel * c_in, c.hidden)))
            shapes.append((f"b{layer}", (c.hidden,)))
            c_in = c.hidden
        shapes += [("W_out", (self.n_symbols, c.hidden)), ("b_out", (self.n_symbols,))]
        return shapes

    def _init_params(self, rng):
        c, p = self.config, self.params
        uniform_init(rng, p["embed"], self.n_symbols)
        c_in = c.embed
        for layer in range(c.layers):
            uniform_init(rng, p[f"K{layer}"], c.kernel * c_in)
            c_in = c.hidden
        uniform_init(rng, p["W_out"], c.hidden)

    def _forward(self, x):
        c, p = self.config, self.params
        h = p["embed"][x]
        caches = []
        for layer in range(c.layers):
            cols = _im2col(h, c.kernel)
            pre = cols @ p[f"K{layer}"] + p[f"b{layer}"]
            h = np.maximum(pre, 0.0)
            caches.append((cols, pre))
        idx = np.argmax(h, axis=0)
        pooled = h[idx, np.arange(h.shape[1])]
        logits = p["W_out"] @ pooled + p["b_out"]
        return logits, (x, caches, idx, pooled, h.shape)

    def _backward(self, cache, dlogits):
        c, p, g = self.config, self.params, self.grads
        x, caches, idx, pooled, shape = cache
        g["W_out"][...] = np.outer(dlogits, pooled)
        g["b_out"][...] = dlogits
        dh = np.zeros(shape)
        dh[idx, np.arange(shape[1])] = p["W_out"].T @ dlogits
        for layer in reversed(range(c.layers)):
            cols, pre = caches[layer]
            dpre = dh * (pre > 0)
            g[f"K{layer}"][...] += cols.T @ dpre
            g[f"b{layer}"][...] += dpre.sum(axis=0)
            dcols = dpre @ p[f"K{layer}"].T
            dh = _col2im(dcols, c.kernel, cols.shape[1] // c.kernel)
        np.add.at(g["embed"], x, dh)
