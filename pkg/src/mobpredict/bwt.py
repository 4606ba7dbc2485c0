"""Suffix arrays and the Burrows-Wheeler transform.

The transform appends a unique sentinel that sorts below every symbol, so
sorting rotations of ``seq + sentinel`` is the same as sorting its
suffixes; the suffix array is built by prefix doubling in O(n log^2 n)
numpy operations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np


def _dense_ranks(seq: Sequence) -> np.ndarray:
    """Map symbols to ranks 1..m preserving order; 0 stays free for the sentinel."""
    if isinstance(seq, str):
        codes = np.frombuffer(seq.encode("utf-32-le"), dtype=np.uint32)
    else:
        codes = np.asarray(seq)
        if codes.dtype == object:
            uniq = sorted(set(seq))
            lookup = {s: i for i, s in enumerate(uniq)}
            codes = np.array([lookup[s] for s in seq], dtype=np.int64)
    _, inv = np.unique(codes, return_inverse=True)
    return inv.astype(np.int64) + 1


def suffix_array(ranks: np.ndarray) -> np.ndarray:
    """Suffix array of an integer sequence by prefix doubling."""
    n = len(ranks)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    rank = np.unique(ranks, return_inverse=True)[1].astype(np.int64)
    k = 1
    while True:
        second = np.full(n, -1, dtype=np.int64)
        if k < n:
            second[: n - k] = rank[k:]
        sa = np.lexsort((second, rank))
        r1, r2 = rank[sa], second[sa]
        new_group = np.empty(n, dtype=bool)
        new_group[0] = True
        new_group[1:] = (r1[1:] != r1[:-1]) | (r2[1:] != r2[:-1])
        new_rank = np.empty(n, dtype=np.int64)
        new_rank[sa] = np.cumsum(new_group) - 1
        rank = new_rank
        if rank[sa[-1]] == n - 1:
            return sa
        k *= 2


@dataclass(frozen=True)
class BwtOutput:
    transformed: Any  # str for str input, otherwise a list
    primary_index: int
    sentinel: Any

    def without_sentinel(self) -> list:
        # the original rotation ends with the sentinel
        t = self.transformed
        return list(t[: self.primary_index]) + list(t[self.primary_index + 1:])


def _last_column(seq: Sequence, sentinel: Any) -> tuple[list, int, np.ndarray]:
    ranks = np.concatenate([_dense_ranks(seq), [0]])
    sa = suffix_array(ranks)
    items = list(seq) + [sentinel]
    last = [items[i - 1] for i in sa]  # i == 0 wraps to the sentinel
    primary = int(np.flatnonzero(sa == 0)[0])
    return last, primary, sa


def bwt_forward(seq: Sequence, sentinel: Any = None) -> BwtOutput:
    """Last column of the sorted rotations of ``seq + sentinel``.

    The sentinel defaults to ``"$"`` for strings and ``-1`` otherwise; it
    must not occur in ``seq`` and always sorts lowest.
    """
    if len(seq) == 0:
        raise ValueError("empty sequence")
    if sentinel is None:
        sentinel = "$" if isinstance(seq, str) else -1
    if sentinel in seq:
        raise ValueError(f"sentinel {sentinel!r} occurs in the input")
    last, primary, _ = _last_column(seq, sentinel)
    transformed = "".join(last) if isinstance(seq, str) else last
    return BwtOutput(transformed, primary, sentinel)


def bwt_inverse(out: BwtOutput):
    last = list(out.transformed)
    n = len(last)
    keys = np.empty(n, dtype=np.int64)
    sentinel_pos = out.primary_index
    body = [s for i, s in enumerate(last) if i != sentinel_pos]
    if body:
        keys[np.arange(n) != sentinel_pos] = _dense_ranks(body)
    keys[sentinel_pos] = 0
    # LF mapping: the j-th row of the first column came from row order[j] of the last
    order = np.argsort(keys, kind="stable")
    lf = np.empty(n, dtype=np.int64)
    lf[order] = np.arange(n)
    # row 0 is the rotation that starts with the sentinel
    res = []
    row = 0
    for _ in range(n - 1):
        res.append(last[row])
        row = lf[row]
    res.reverse()
    return "".join(res) if isinstance(out.transformed, str) else res
