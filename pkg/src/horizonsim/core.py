"""Value types shared by the whole package: groups, communicators, process sets.

Groups are canonical (sorted, duplicate free) so that equality and inclusion
are structural comparisons.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping

from .errors import UnknownPset

WORLD = "mpi://WORLD"
SELF = "mpi://SELF"


@dataclass(frozen=True, order=True)
class Group:
    members: tuple[int, ...] = ()

    def __post_init__(self):
        m = self.members
        if any(not isinstance(p, int) or p < 0 for p in m):
            raise ValueError(f"process ids must be non-negative ints: {m!r}")
        if any(a >= b for a, b in zip(m, m[1:])):
            raise ValueError(f"group members must be strictly ascending: {m!r}")

    @classmethod
    def of(cls, ids: Iterable[int]) -> Group:
        return cls(tuple(sorted(set(ids))))

    def __contains__(self, pid) -> bool:
        return pid in self._set

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    @cached_property
    def _set(self) -> frozenset[int]:
        return frozenset(self.members)

    def without(self, ids: Iterable[int]) -> Group:
        drop = set(ids)
        return Group(tuple(p for p in self.members if p not in drop))

    def rank(self, pid: int) -> int:
        return self.members.index(pid)

    def __str__(self):
        return "{" + ",".join(map(str, self.members)) + "}"


def group(*ids: int) -> Group:
    return Group.of(ids)


def group_includes(a: Group, b: Group) -> bool:
    """True iff every member of ``b`` is a member of ``a`` (a ⊇ b)."""
    return a._set >= b._set


def group_intersects(a: Group, b: Group) -> bool:
    return not a._set.isdisjoint(b._set)


class CommStatus(enum.Enum):
    LIVE = "live"
    REVOKED = "revoked"
    FREED = "freed"


_TRANSITIONS = {
    CommStatus.LIVE: {CommStatus.REVOKED, CommStatus.FREED},
    CommStatus.REVOKED: {CommStatus.FREED},
    CommStatus.FREED: set(),
}


@dataclass(frozen=True)
class Communicator:
    cid: int
    group: Group
    status: CommStatus = field(default=CommStatus.LIVE, compare=False)

    def with_status(self, status: CommStatus) -> Communicator:
        if status is self.status:
            return self
        if status not in _TRANSITIONS[self.status]:
            raise ValueError(f"illegal status change {self.status.value} -> {status.value}")
        return replace(self, status=status)

    @property
    def live(self) -> bool:
        return self.status is CommStatus.LIVE

    def __str__(self):
        return f"C#{self.cid}{self.group}"


def is_superset_member(c: Communicator, g: Group) -> bool:
    """Membership test for the superset of ``g``: c's group holds all of g."""
    return group_includes(c.group, g)


class PsetRegistry:
    """Named process sets. The two builtin names are always resolvable."""

    def __init__(self, n: int, bindings: Mapping[str, Group] | None = None):
        if n < 1:
            raise ValueError("process count must be >= 1")
        self.n = n
        self._bindings: dict[str, Group] = {}
        for name, g in (bindings or {}).items():
            self.bind(name, g)

    @property
    def world(self) -> Group:
        return Group(tuple(range(self.n)))

    def bind(self, name: str, g: Group):
        if name in (WORLD, SELF):
            raise ValueError(f"{name} is a builtin process set")
        if not len(g):
            raise ValueError(f"process set {name} is empty")
        if g.members[-1] >= self.n:
            raise ValueError(f"process set {name} names a process outside [0, {self.n})")
        self._bindings[name] = g

    def names(self) -> list[str]:
        return [WORLD, SELF, *self._bindings]

    def __contains__(self, name) -> bool:
        return name in (WORLD, SELF) or name in self._bindings

    def resolve(self, name: str, caller: int) -> Group:
        if name == WORLD:
            return self.world
        if name == SELF:
            return Group((caller,))
        try:
            return self._bindings[name]
        except KeyError:
            raise UnknownPset(name) from None

    def bindings(self) -> dict[str, Group]:
        return dict(self._bindings)


def pset_resolve(reg: PsetRegistry, name: str, caller: int) -> Group:
    return reg.resolve(name, caller)
