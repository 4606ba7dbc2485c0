import io
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mobpredict.errors import ColdModel
from mobpredict.markov import MarkovModel, mc_predict, mc_update

A, B, C = 1, 2, 3


def test_single_transition_counts():
    m = MarkovModel(1)
    mc_update(m, [A], B)
    mc_update(m, [A], B)
    assert m.count([A], B) == 2
    assert m.tables[1][(A,)] == {B: 2}
    assert mc_predict(m, [A]) == B


def test_order_two_hand_count():
    m = MarkovModel(2).fit([A, B, A, C, A, B, A, C])
    assert m.count([B, A], C) == 2
    assert m.count([C, A], B) == 1


def test_empty_context_only_touches_order_zero():
    m = MarkovModel(2)
    m.update((), A)
    assert m.tables[0][()] == {A: 1}
    assert not m.tables[1] and not m.tables[2]


def test_alternation():
    m = MarkovModel(1).fit([A, B] * 3)
    assert m.predict([A]) == B


def test_fallback_hand_trace():
    m = MarkovModel(2).fit([A, B, A, C, A, B, A, C])
    assert (C, B) not in m.tables[2]
    assert m.tables[1][(B,)] == {A: 2}
    assert m.predict([C, B]) == A


def test_cold_model():
    with pytest.raises(ColdModel):
        MarkovModel(3).predict([A, B, C])


def test_ties_go_to_smaller_id():
    m = MarkovModel(1)
    m.update([A], C)
    m.update([A], B)
    assert m.predict([A]) == B


def test_exclude_falls_back():
    m = MarkovModel(1)
    m.update([A], 0)
    m.update([B], A)
    assert m.predict([A]) == 0
    # the only successor of A is excluded: order 0 decides among the rest
    assert m.predict([A], exclude=0) == A


def test_dump_format():
    m = MarkovModel(1).fit([A, B])
    buf = io.StringIO()
    m.dump(buf)
    assert buf.getvalue().splitlines() == ["0\t\t1\t1", "0\t\t2\t1", "1\t1\t2\t1"]


@given(st.lists(st.integers(0, 3), max_size=60), st.integers(0, 3))
def test_table_totals(seq, k):
    m = MarkovModel(k).fit(seq)
    for j, table in enumerate(m.tables):
        total = sum(sum(row.values()) for row in table.values())
        # events whose context has at least j symbols
        assert total == sum(1 for i in range(len(seq)) if min(i, k) >= j)
        assert all(c >= 1 for row in table.values() for c in row.values())
    if seq:
        assert Counter(seq) == Counter(m.tables[0][()])


@given(st.lists(st.integers(0, 3), min_size=1, max_size=60), st.integers(1, 3), st.lists(st.integers(0, 3), max_size=3))
def test_predict_matches_brute_force(seq, k, ctx):
    m = MarkovModel(k).fit(seq)
    ctx = tuple(ctx[-k:])
    # brute force: scan every prefix for the longest matching suffix of ctx
    for j in range(len(ctx), -1, -1):
        suffix = ctx[len(ctx) - j:]
        succ = Counter(seq[i] for i in range(len(seq))
                       if min(i, k) >= j and tuple(seq[i - j:i]) == suffix)
        if succ:
            expected = min(succ, key=lambda s: (-succ[s], s))
            break
    assert m.predict(ctx) == expected
