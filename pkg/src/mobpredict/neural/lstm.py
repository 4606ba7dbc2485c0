"""Stacked LSTM over an embedded symbol window, softmax on the last state."""

from __future__ import annotations

import numpy as np

from .base import NeuralModel, uniform_init


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


class LSTMModel(NeuralModel):
    def _shapes(self):
        c = self.config
        shapes = [("embed", (self.n_symbols, c.embed))]
        d_in = c.embed
        for layer in range(c.layers):
            # gate order in rows: input, forget, output, candidate
            shapes.append((f"W{layer}", (4 * c.hidden, d_in + c.hidden)))
            shapes.append((f"b{layer}", (4 * c.hidden,)))
            d_in = c.hidden
        shapes += [("W_out", (self.n_symbols, c.hidden)), ("b_out", (self.n_symbols,))]
        return shapes

    def _init_params(self, rng):
        c, p = self.config, self.params
        uniform_init(rng, p["embed"], self.n_symbols)
        d_in = c.embed
        for layer in range(c.layers):
            uniform_init(rng, p[f"W{layer}"], d_in + c.hidden)
            p[f"b{layer}"][c.hidden:2 * c.hidden] = 1.0
            d_in = c.hidden
        uniform_init(rng, p["W_out"], c.hidden)

    def _forward(self, x):
        c, p = self.config, self.params
        H = c.hidden
        k = len(x)
        inputs = p["embed"][x]  # (k, embed)
        caches = []
        for layer in range(c.layers):
            W, b = p[f"W{layer}"], p[f"b{layer}"]
            d_in = W.shape[1] - H
            # input contributions for all steps at once; only W_h @ h is sequential
            z_all = inputs @ W[:, :d_in].T + b
            W_h = W[:, d_in:]
            h = np.zeros(H)
            cell = np.zeros(H)
            hs = np.zeros((k + 1, H))  # hs[t] is the state entering step t
            gates = np.empty((k, 4 * H))
            cells = np.zeros((k + 1, H))
            tcs = np.empty((k, H))
            for t in range(k):
                z = z_all[t] + W_h @ h
                gate = gates[t]
                gate[:3 * H] = _sigmoid(z[:3 * H])
                gate[3 * H:] = np.tanh(z[3 * H:])
                cell = gate[H:2 * H] * cell + gate[:H] * gate[3 * H:]
                tc = np.tanh(cell)
                h = gate[2 * H:3 * H] * tc
                cells[t + 1] = cell
                tcs[t] = tc
                hs[t + 1] = h
            caches.append((inputs, hs, gates, cells, tcs))
            inputs = hs[1:]
        logits = p["W_out"] @ h + p["b_out"]
        return logits, (x, caches, h)

    def _backward(self, cache, dlogits):
        c, p, g_ = self.config, self.params, self.grads
        H = c.hidden
        x, caches, h_last = cache
        k = len(x)
        g_["W_out"][...] = np.outer(dlogits, h_last)
        g_["b_out"][...] = dlogits
        # gradient w.r.t. the layer outputs at every step
        d_outs = np.zeros((k, H))
        d_outs[-1] = p["W_out"].T @ dlogits
        for layer in reversed(range(c.layers)):
            W = p[f"W{layer}"]
            d_in = W.shape[1] - H
            W_h = W[:, d_in:]
            inputs, hs, gates, cells, tcs = caches[layer]
            i, f, o, g = gates[:, :H], gates[:, H:2 * H], gates[:, 2 * H:3 * H], gates[:, 3 * H:]
            # factors that do not depend on the backward recursion
            di_f = g * i * (1.0 - i)
            df_f = cells[:-1] * f * (1.0 - f)
            do_f = tcs * o * (1.0 - o)
            dg_f = i * (1.0 - g * g)
            dtanh = o * (1.0 - tcs * tcs)
            dz_all = np.empty((k, 4 * H))
            dh_next = np.zeros(H)
            dc_next = np.zeros(H)
            for t in range(k - 1, -1, -1):
                dh = d_outs[t] + dh_next
                dc = dc_next + dh * dtanh[t]
                dz = dz_all[t]
                dz[:H] = dc * di_f[t]
                dz[H:2 * H] = dc * df_f[t]
                dz[2 * H:3 * H] = dh * do_f[t]
                dz[3 * H:] = dc * dg_f[t]
                dh_next = W_h.T @ dz
                dc_next = dc * f[t]
            g_[f"W{layer}"][:, :d_in] += dz_all.T @ inputs
            g_[f"W{layer}"][:, d_in:] += dz_all.T @ hs[:-1]
            g_[f"b{layer}"][...] += dz_all.sum(axis=0)
            d_outs = dz_all @ W[:, :d_in]
        np.add.at(g_["embed"], x, d_outs)
