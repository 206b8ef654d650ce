"""Minimal Horizon set: the antichain of maximal communicator groups seen so far.

A Horizon set answers one question for a creation call over group ``g``: is
there an already-created communicator whose group includes ``g``?  If so,
liveness discovery can run over that communicator and the creation cannot
deadlock on a crashed member.

Insertion follows the three topology cases for a new communicator ``c``:

* ``INCLUDED``: c's group is included by an existing entry, nothing changes;
* ``INCLUDES``: c's group includes one or more entries, those are dropped
  and c joins;
* ``INCOMPARABLE``: overlap or disjoint, c joins alongside the others.
"""

from __future__ import annotations

import copy
from typing import Iterable, Iterator

from .core import Communicator, Group, group_includes, is_superset_member

INCLUDED = "included"
INCLUDES = "includes"
INCOMPARABLE = "incomparable"


class HorizonSet:
    def __init__(self, comms: Iterable[Communicator] = ()):
        # cid -> (insertion order, communicator)
        self._entries: dict[int, tuple[int, Communicator]] = {}
        self._clock = 0
        for c in comms:
            self.insert(c)

    def __iter__(self) -> Iterator[Communicator]:
        return (c for _, c in sorted(self._entries.values(), key=lambda e: e[0]))

    def __len__(self):
        return len(self._entries)

    def __contains__(self, cid) -> bool:
        return cid in self._entries

    def __repr__(self):
        return "HorizonSet(" + ", ".join(map(str, self)) + ")"

    def copy(self) -> HorizonSet:
        return copy.deepcopy(self)

    def groups(self) -> set[Group]:
        return {c.group for c in self}

    def insert(self, c: Communicator) -> str:
        """Insert ``c`` keeping the set a minimal antichain; return the case applied."""
        if not c.live:
            raise ValueError(f"only live communicators enter a Horizon set, got {c.status.value}")
        for _, e in self._entries.values():
            # equal groups land here too: the older entry is kept
            if group_includes(e.group, c.group):
                return INCLUDED
        dominated = [cid for cid, (_, e) in self._entries.items() if group_includes(c.group, e.group)]
        for cid in dominated:
            del self._entries[cid]
        self._entries[c.cid] = (self._clock, c)
        self._clock += 1
        return INCLUDES if dominated else INCOMPARABLE

    def covering(self, g: Group) -> Communicator | None:
        """Smallest entry (by group size, then CommId) whose group includes ``g``."""
        best = None
        for _, e in self._entries.values():
            if is_superset_member(e, g):
                if best is None or (len(e.group), e.cid) < (len(best.group), best.cid):
                    best = e
        return best

    def evict(self, cid: int) -> bool:
        """Drop the entry with ``cid``; afterwards coverage may be weaker."""
        return self._entries.pop(cid, None) is not None


def horizon_insert(h: HorizonSet, c: Communicator) -> HorizonSet:
    out = h.copy()
    out.insert(c)
    return out


def horizon_covering(h: HorizonSet, g: Group) -> Communicator | None:
    return h.covering(g)


def horizon_evict(h: HorizonSet, cid: int) -> HorizonSet:
    out = h.copy()
    out.evict(cid)
    return out


def horizon_oracle_minimal(created: Iterable[Group]) -> set[Group]:
    """Brute-force maximal elements of ``created`` under inclusion (test oracle)."""
    created = list(created)
    return {
        a
        for a in created
        if not any(group_includes(b, a) and b != a for b in created)
    }
