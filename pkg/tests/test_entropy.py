import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import markov_source
from mobpredict.entropy import (
    EntropyReport,
    entropy_bwt,
    entropy_lz,
    entropy_report,
    entropy_unconditional,
    match_lengths,
    read_entropy_csv,
    write_entropy_csv,
)
from mobpredict.errors import EmptyAfterFilter, SeriesTooShort
from mobpredict.fano import binary_entropy
from mobpredict.model import DeviceClass, SpatialResolution, make_series
from oracles import match_lengths_naive, plugin_entropy

H09 = binary_entropy(0.9)


def test_unconditional_examples():
    assert entropy_unconditional("AABB") == 1.0
    assert entropy_unconditional("AAAA") == 0.0
    assert entropy_unconditional("AAB") == pytest.approx(0.9183, abs=1e-4)
    with pytest.raises(EmptyAfterFilter):
        entropy_unconditional([])


@given(st.lists(st.integers(0, 6), min_size=1, max_size=50))
def test_unconditional_matches_formula(seq):
    assert entropy_unconditional(seq) == pytest.approx(plugin_entropy(seq), abs=1e-12)


@given(st.lists(st.integers(0, 3), max_size=80))
def test_match_lengths_match_naive_search(seq):
    assert match_lengths(seq) == match_lengths_naive(seq)


def test_match_lengths_small():
    # at i=2 the history is "ab": "ab" is found, "aba" is not, so L = 3;
    # near the end the match runs out of input and L = remaining + 1
    assert match_lengths([1, 2, 1, 2, 1]) == [1, 1, 3, 3, 2]


def test_constant_sequences():
    assert entropy_lz([7] * 10_000) < 0.05
    assert entropy_bwt([7] * 10_000) == 0.0


def test_short_sequences():
    with pytest.raises(SeriesTooShort):
        entropy_lz([1])
    with pytest.raises(SeriesTooShort):
        entropy_bwt([1, 2, 1])


def test_uniform_source(rng):
    seq = rng.integers(0, 4, size=100_000).tolist()
    assert entropy_lz(seq) == pytest.approx(2.0, abs=0.1)
    assert entropy_bwt(seq) == pytest.approx(2.0, abs=0.1)


def test_markov_source(rng):
    seq = markov_source(100_000, 0.9, rng).tolist()
    assert H09 == pytest.approx(0.469, abs=1e-3)
    assert entropy_lz(seq) == pytest.approx(H09, abs=0.05)
    assert entropy_bwt(seq) == pytest.approx(H09, abs=0.05)


def test_bwt_invariant_under_order_preserving_relabel(rng):
    seq = rng.integers(0, 5, size=3000)
    assert entropy_bwt(seq.tolist()) == entropy_bwt((seq * 10 + 3).tolist())


def test_estimators_roughly_invariant_under_any_relabel(rng):
    seq = markov_source(20_000, 0.8, rng, n_states=4)
    perm = np.array([2, 0, 3, 1])
    assert entropy_lz(seq.tolist()) == entropy_lz(perm[seq].tolist())
    assert entropy_bwt(seq.tolist()) == pytest.approx(entropy_bwt(perm[seq].tolist()), abs=0.02)


def test_report_drops_unknown():
    names = ["a", "b", None, "a", "b", None, "a", "b", "a", "b"]
    s = make_series("d", DeviceClass.FLUTE, SpatialResolution.ACCESS_POINT, 900, 0, names)
    r = entropy_report(s)
    assert r.n_symbols == 8 and r.n_locations == 2
    assert r.s_unc == 1.0
    assert 0.5 <= r.pi_unc <= 1.0 and 0.5 <= r.pi_lz <= 1.0 and 0.5 <= r.pi_bwt <= 1.0
    kept = entropy_report(s, keep_unknown=True)
    assert kept.n_symbols == 10 and kept.n_locations == 3


def test_report_bounds(rng):
    seq = rng.integers(1, 6, size=500)
    s = make_series("d", DeviceClass.CELLO, SpatialResolution.ACCESS_POINT, 900, 0, [f"l{x}" for x in seq])
    r = entropy_report(s)
    for v in (r.s_unc, r.s_lz, r.s_bwt):
        assert 0 <= v <= math.log2(max(r.n_locations, 2)) + 0.1
    for p in (r.pi_unc, r.pi_lz, r.pi_bwt):
        assert 1 / r.n_locations <= p <= 1


def test_csv_round_trip(tmp_path):
    r = EntropyReport("d", "flute", 10, 3, 1.5, 1.2, 1.1, 0.5, 0.6, 0.65)
    write_entropy_csv([r], tmp_path / "e.csv")
    assert read_entropy_csv(tmp_path / "e.csv") == [r]
