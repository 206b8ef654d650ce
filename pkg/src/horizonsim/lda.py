"""Liveness discovery over a covering communicator.

Every member of the target group that is still alive broadcasts its view of
which members are alive, then waits until it holds a view from each member
or a failure notice for it.  The covering communicator is what makes those
notices arrive: a crashed member of the target is also a member of the
covering communicator, so the runtime reports it.

Because a broadcast is a single atomic step and a failure notice travels
behind the crashed process's last messages, every surviving member ends up
with the same collection of views, hence the same verdict.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .core import CommStatus, Communicator, Group, is_superset_member
from .errors import EmptyAliveGroup, Revoked
from .simulator import Simulator, Wait


@dataclass(frozen=True)
class LivenessVerdict:
    target: Group
    alive: Group
    epoch: int


def exchange(sim: Simulator, pid: int, members: Group, tag: tuple, value: Any,
             category: str, scope: Communicator):
    """All-to-all contribution exchange tolerant to crashed members.

    Returns ``{member: value}`` for every member whose contribution arrived,
    the caller included.  Raises :class:`Revoked` if ``scope`` is revoked
    at the caller before the exchange finishes.
    """
    proc = sim.procs[pid]
    others = [m for m in members if m != pid]
    for m in others:
        sim.send(pid, m, tag, value, category)

    def match(msg):
        return msg.tag == tag

    def missing():
        got = {msg.src for msg in proc.mailbox if match(msg)}
        return {m for m in others if m not in got and m not in proc.known_failed}

    def revoked():
        return proc.comms[scope.cid].status is not CommStatus.LIVE

    def ready():
        return revoked() or not missing()

    while not ready():
        yield Wait(tag[0], ready, missing, f"{tag[0]} over {members} via C#{scope.cid}")
    if revoked():
        raise Revoked(scope.cid)
    got = {msg.src: msg.body for msg in proc.take_all(match)}
    got[pid] = value
    return got


def discover_alive(sim: Simulator, pid: int, k: Communicator, g: Group, site: tuple,
                   attempt: int = 0, category: str = "lda"):
    """Agree with the other survivors of ``g`` on which members of ``g`` are alive.

    ``k`` must include ``g``; it only scopes fault visibility, members of
    ``k`` outside ``g`` take no part.  Generator returning a
    :class:`LivenessVerdict`.
    """
    if not is_superset_member(k, g):
        raise ValueError(f"{k} does not cover {g}")
    if pid not in g:
        raise ValueError(f"process {pid} is not in {g}")
    proc = sim.procs[pid]
    view = frozenset(m for m in g if m not in proc.known_failed)
    views = yield from exchange(sim, pid, g, ("lda", site, attempt), view, category, k)
    alive = set(views)
    for v in views.values():
        alive &= v
    if pid not in alive:
        raise EmptyAliveGroup(f"process {pid} excluded itself from {g}")
    return LivenessVerdict(target=g, alive=Group.of(alive), epoch=sim.now)
