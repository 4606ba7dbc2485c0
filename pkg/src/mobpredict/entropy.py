"""Entropy estimates of location sequences.

* unconditional: Shannon entropy of the visit frequencies, ignoring order;
* Lempel-Ziv: ``n log2 n / sum(L_i)`` where ``L_i`` is the length of the
  shortest substring starting at ``i`` that does not occur in ``seq[:i]``;
* BWT: zeroth-order entropy of the block-sorted sequence, averaged over
  ``ceil(sqrt(n))`` contiguous segments.

All values are in bits per symbol.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Hashable, Iterable, Sequence

import numpy as np

from .bwt import bwt_forward
from .errors import EmptyAfterFilter, SeriesTooShort
from .fano import max_predictability
from .model import DiscreteSeries


def entropy_unconditional(seq: Sequence[Hashable]) -> float:
    if len(seq) == 0:
        raise EmptyAfterFilter("no symbols left to estimate entropy")
    counts = np.fromiter(Counter(seq).values(), dtype=float)
    return _plugin(counts)


def _plugin(counts: np.ndarray) -> float:
    p = counts / counts.sum()
    return float(max(0.0, -(p * np.log2(p)).sum()))


def match_lengths(seq: Sequence[Hashable]) -> list[int]:
    """``L_i`` for every position: 1 + longest prefix of ``seq[i:]`` found
    inside ``seq[:i]``; at the tail this is capped at ``n - i + 1``.

    Runs in linear time with an online suffix automaton of the prefix.
    """
    n = len(seq)
    # automaton of seq[:i]; state 0 is the root
    nxt: list[dict] = [{}]
    link = [-1]
    length = [0]
    last = 0

    out = []
    v, l = 0, 0  # state and length of seq[i:i+l] inside the automaton
    for i in range(n):
        while i + l < n:
            t = nxt[v].get(seq[i + l])
            if t is None:
                break
            v = t
            l += 1
        out.append(l + 1)

        # extend the automaton with seq[i]
        c = seq[i]
        cur = len(length)
        length.append(length[last] + 1)
        link.append(0)
        nxt.append({})
        p = last
        while p != -1 and c not in nxt[p]:
            nxt[p][c] = cur
            p = link[p]
        if p != -1:
            q = nxt[p][c]
            if length[p] + 1 == length[q]:
                link[cur] = q
            else:
                clone = len(length)
                length.append(length[p] + 1)
                link.append(link[q])
                nxt.append(dict(nxt[q]))
                while p != -1 and nxt[p].get(c) == q:
                    nxt[p][c] = clone
                    p = link[p]
                link[q] = clone
                link[cur] = clone
                # the short strings of q moved to the clone
                if v == q and l <= length[clone]:
                    v = clone
        last = cur

        # drop the first character of the current match
        if l > 0:
            l -= 1
            if l == length[link[v]]:
                v = link[v]
    return out


def entropy_lz(seq: Sequence[Hashable]) -> float:
    n = len(seq)
    if n < 2:
        raise SeriesTooShort(f"LZ estimate needs at least 2 symbols, got {n}")
    return n * math.log2(n) / sum(match_lengths(seq))


def entropy_bwt(seq: Sequence[Hashable], n_segments: int | None = None) -> float:
    n = len(seq)
    if n < 4:
        raise SeriesTooShort(f"BWT estimate needs at least 4 symbols, got {n}")
    body = bwt_forward(list(seq), sentinel=_Sentinel()).without_sentinel()
    b = n_segments or math.ceil(math.sqrt(n))
    size = math.ceil(n / b)
    total = 0.0
    for start in range(0, n, size):
        seg = body[start:start + size]
        counts = np.fromiter(Counter(seg).values(), dtype=float)
        total += len(seg) * _plugin(counts)
    return total / n


class _Sentinel:
    """Placeholder that never compares equal to a symbol."""

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return id(self)


@dataclass(frozen=True)
class EntropyReport:
    device: str
    device_class: str
    n_symbols: int
    n_locations: int
    s_unc: float
    s_lz: float
    s_bwt: float
    pi_unc: float
    pi_lz: float
    pi_bwt: float


def entropy_report(
    series: DiscreteSeries,
    keep_unknown: bool = False,
    n_segments: int | None = None,
) -> EntropyReport:
    """All three estimates and their predictability bounds for one series.

    Unknown windows are dropped first (and do not count towards the
    number of locations) unless ``keep_unknown`` is set.
    """
    seq = list(series.symbols) if keep_unknown else series.known_symbols()
    n_loc = len(set(seq))
    s_unc = entropy_unconditional(seq)
    s_lz = entropy_lz(seq)
    s_bwt = entropy_bwt(seq, n_segments)
    return EntropyReport(
        device=series.device,
        device_class=series.device_class.value,
        n_symbols=len(seq),
        n_locations=n_loc,
        s_unc=s_unc,
        s_lz=s_lz,
        s_bwt=s_bwt,
        pi_unc=max_predictability(s_unc, n_loc),
        pi_lz=max_predictability(s_lz, n_loc),
        pi_bwt=max_predictability(s_bwt, n_loc),
    )


ENTROPY_FIELDS = ["device", "class", "n", "N", "s_unc", "s_lz", "s_bwt", "pi_unc", "pi_lz", "pi_bwt"]


def write_entropy_csv(reports: Iterable[EntropyReport], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ENTROPY_FIELDS)
        for r in reports:
            w.writerow([r.device, r.device_class, r.n_symbols, r.n_locations]
                       + [f"{getattr(r, f.name):.6f}" for f in fields(r)[4:]])


def read_entropy_csv(path: Path) -> list[EntropyReport]:
    with open(path, newline="") as fh:
        return [
            EntropyReport(row["device"], row["class"], int(row["n"]), int(row["N"]),
                          *(float(row[k]) for k in ENTROPY_FIELDS[4:]))
            for row in csv.DictReader(fh)
        ]
