import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horizonsim.core import CommStatus, Communicator, Group, group, group_includes
from horizonsim.horizon import (
    INCLUDED,
    INCLUDES,
    INCOMPARABLE,
    HorizonSet,
    horizon_covering,
    horizon_evict,
    horizon_insert,
    horizon_oracle_minimal,
)


def comms(*groups):
    return [Communicator(i, g) for i, g in enumerate(groups)]


def is_antichain(h):
    entries = list(h)
    return not any(
        group_includes(a.group, b.group)
        for a, b in itertools.permutations(entries, 2)
    )


# The three topology cases


def test_insert_included_leaves_set_unchanged():
    h = HorizonSet([Communicator(0, group(0, 1, 2))])
    assert h.insert(Communicator(1, group(0, 1))) == INCLUDED
    assert h.groups() == {group(0, 1, 2)}


def test_insert_including_replaces_entries():
    h = HorizonSet([Communicator(0, group(0, 1))])
    assert h.insert(Communicator(1, group(0, 1, 2, 3))) == INCLUDES
    assert h.groups() == {group(0, 1, 2, 3)}


def test_insert_overlapping_joins():
    h = HorizonSet([Communicator(0, group(0, 1))])
    assert h.insert(Communicator(1, group(1, 2))) == INCOMPARABLE
    assert h.groups() == {group(0, 1), group(1, 2)}


def test_insert_drops_several_dominated_entries():
    h = HorizonSet(comms(group(0), group(1), group(3, 4)))
    assert h.insert(Communicator(9, group(0, 1, 2))) == INCLUDES
    assert h.groups() == {group(0, 1, 2), group(3, 4)}


def test_duplicate_group_keeps_older_entry():
    h = HorizonSet([Communicator(3, group(0, 1))])
    h.insert(Communicator(8, group(0, 1)))
    assert [c.cid for c in h] == [3]


def test_insert_rejects_dead_communicators():
    with pytest.raises(ValueError):
        HorizonSet().insert(Communicator(0, group(0), CommStatus.REVOKED))


def test_functional_insert_does_not_mutate():
    h = HorizonSet([Communicator(0, group(0, 1))])
    h2 = horizon_insert(h, Communicator(1, group(2)))
    assert h.groups() == {group(0, 1)}
    assert h2.groups() == {group(0, 1), group(2)}


# Covering queries


def test_covering_examples():
    assert horizon_covering(HorizonSet([Communicator(0, group(0, 1, 2, 3))]), group(1, 3)).cid == 0
    assert horizon_covering(HorizonSet([Communicator(0, group(0, 1))]), group(0, 2)) is None
    h = HorizonSet([Communicator(5, group(0, 1, 2)), Communicator(9, group(1, 2, 3))])
    assert horizon_covering(h, group(1, 2)).cid == 5


def _covering_brute(entries, g):
    """Exhaustive reading of the tie-break rule: among covering entries take
    the minimum of (cardinality, CommId)."""
    best = None
    for e in entries:
        if set(g.members) <= set(e.group.members):
            key = (len(e.group.members), e.cid)
            if best is None or key < best[0]:
                best = (key, e)
    return best and best[1]


def test_covering_tie_break_exhaustive():
    subsets = [Group(s) for r in range(1, 5) for s in itertools.combinations(range(4), r)]
    rng = random.Random(7)
    for _ in range(2000):
        h = HorizonSet()
        cids = rng.sample(range(100), 4)
        for cid in cids:
            h.insert(Communicator(cid, rng.choice(subsets)))
        for g in subsets:
            assert h.covering(g) == _covering_brute(list(h), g)


# Eviction


def test_evict():
    assert horizon_evict(HorizonSet([Communicator(1, group(0, 1))]), 1).groups() == set()
    assert horizon_evict(HorizonSet([Communicator(1, group(0, 1))]), 7).groups() == {group(0, 1)}
    h = HorizonSet([Communicator(1, group(0, 1)), Communicator(2, group(2, 3))])
    assert horizon_evict(h, 2).groups() == {group(0, 1)}


# Oracle


@pytest.mark.parametrize("created, expected", [
    ([group(0, 1), group(0, 1, 2)], {group(0, 1, 2)}),
    ([group(0), group(1)], {group(0), group(1)}),
    ([], set()),
])
def test_oracle_minimal(created, expected):
    assert horizon_oracle_minimal(created) == expected


# Properties

subsets5 = st.frozensets(st.integers(0, 4), min_size=1).map(Group.of)


@given(st.lists(subsets5, max_size=12))
def test_insert_matches_oracle_and_is_order_independent(seq):
    h = HorizonSet()
    for i, g in enumerate(seq):
        h.insert(Communicator(i, g))
        assert is_antichain(h)
    assert h.groups() == horizon_oracle_minimal(seq)
    rev = HorizonSet(Communicator(i, g) for i, g in enumerate(reversed(seq)))
    assert rev.groups() == h.groups()


@given(st.lists(subsets5, max_size=10), subsets5)
def test_coverage_matches_history_scan(seq, g):
    h = HorizonSet(Communicator(i, x) for i, x in enumerate(seq))
    assert (h.covering(g) is not None) == any(group_includes(x, g) for x in seq)


@given(st.lists(subsets5, min_size=1, max_size=10), st.data())
def test_reinserting_existing_group_is_idempotent(seq, data):
    h = HorizonSet(Communicator(i, x) for i, x in enumerate(seq))
    before = h.groups()
    g = data.draw(st.sampled_from(sorted(before)))
    h.insert(Communicator(100, g))
    assert h.groups() == before


@settings(max_examples=200)
@given(st.lists(subsets5, max_size=8), subsets5, st.lists(subsets5, max_size=5))
def test_coverage_is_monotone(seq, g, more):
    h = HorizonSet(Communicator(i, x) for i, x in enumerate(seq))
    if h.covering(g) is None:
        return
    for j, x in enumerate(more):
        h.insert(Communicator(100 + j, x))
        assert h.covering(g) is not None


@given(st.lists(subsets5, max_size=10), st.lists(st.integers(0, 12), max_size=5))
def test_antichain_survives_evictions(seq, evictions):
    h = HorizonSet(Communicator(i, x) for i, x in enumerate(seq))
    for cid in evictions:
        h.evict(cid)
        assert is_antichain(h)
