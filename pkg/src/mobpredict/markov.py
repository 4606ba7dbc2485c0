"""Order-k Markov next-symbol predictor with recursive fallback."""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Sequence, TextIO

from .errors import ColdModel


class MarkovModel:
    """Transition counts for every context order 0..k.

    ``tables[j]`` maps a j-tuple of symbols to a ``{next: count}`` dict;
    ``tables[0][()]`` is the plain symbol frequency.
    """

    def __init__(self, k: int):
        if k < 0:
            raise ValueError("order must be >= 0")
        self.k = k
        self.tables: list[dict[tuple, dict[int, int]]] = [defaultdict(dict) for _ in range(k + 1)]
        self.n_updates = 0

    def update(self, context: Sequence[int], nxt: int) -> None:
        context = tuple(context)
        if len(context) > self.k:
            raise ValueError(f"context longer than model order {self.k}")
        n = len(context)
        for j in range(n + 1):
            row = self.tables[j][context[n - j:]]
            row[nxt] = row.get(nxt, 0) + 1
        self.n_updates += 1

    def predict(self, context: Sequence[int], exclude: int | None = None) -> int:
        """Most frequent successor of the longest seen suffix of ``context``.

        With ``exclude`` set, that symbol is never predicted and contexts
        whose only successor it is fall through to shorter ones.
        """
        context = tuple(context)[-self.k:] if self.k else ()
        n = len(context)
        for j in range(n, -1, -1):
            row = self.tables[j].get(context[n - j:])
            if not row:
                continue
            cands = [s for s in row if s != exclude]
            if cands:
                # highest count, ties to the smaller symbol id
                return min(cands, key=lambda s: (-row[s], s))
        raise ColdModel("model has no usable observations")

    def fit(self, seq: Iterable[int]) -> "MarkovModel":
        """Feed a whole sequence, each symbol conditioned on up to k predecessors."""
        history: list[int] = []
        for s in seq:
            self.update(history[-self.k:] if self.k else (), s)
            history.append(s)
        return self

    def count(self, context: Sequence[int], nxt: int) -> int:
        context = tuple(context)
        row = self.tables[len(context)].get(context)
        return row.get(nxt, 0) if row else 0

    def dump(self, fh: TextIO) -> None:
        for j, table in enumerate(self.tables):
            for ctx in sorted(table):
                for nxt, c in sorted(table[ctx].items()):
                    fh.write(f"{j}\t{' '.join(map(str, ctx))}\t{nxt}\t{c}\n")


def mc_update(model: MarkovModel, context: Sequence[int], nxt: int) -> None:
    model.update(context, nxt)


def mc_predict(model: MarkovModel, context: Sequence[int]) -> int:
    return model.predict(context)
