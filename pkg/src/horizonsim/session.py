"""Miniature MPI surface executed by simulated processes.

:class:`Mpi` is the per-process runtime.  Local calls are plain methods;
anything that may block is a generator method meant to be driven with
``yield from`` inside a simulator program.

Creation protocol (``MPI_Comm_create_from_group`` and friends): the lowest
member of the group coordinates, every other member sends it ``join``, and
once all joins are in the coordinator picks the CommId and broadcasts
``commit``.  On the unprotected path nobody looks at failures, so a missing
member blocks everyone.  On the protected path the group is first filtered by
liveness discovery over a covering communicator and the rendezvous becomes
failure aware: the coordinator aborts when a member it still waits for is
known dead, members abort when the coordinator is, and everybody retries
discovery with the next attempt number.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass

from .core import CommStatus, Communicator, Group, PsetRegistry
from .errors import DoubleInit, Revoked, SessionClosed
from .lda import discover_alive, exchange
from .simulator import Simulator, Wait


class FtMode(str, enum.Enum):
    NONE = "none"
    NAIVE = "naive"
    HORIZON = "horizon"


@dataclass
class Session:
    sid: int
    open: bool = True


class Mpi:
    def __init__(self, sim: Simulator, pid: int, mode: FtMode, psets: PsetRegistry):
        self.sim = sim
        self.pid = pid
        self.mode = FtMode(mode)
        self.psets = psets
        self.proc = sim.procs[pid]
        self._next_sid = 0
        self._naive_done = False
        self._world_done = False
        self._sites: Counter[tuple] = Counter()

    @property
    def horizon(self):
        return self.proc.horizon

    def _site(self, *key) -> tuple:
        k = self._sites[key]
        self._sites[key] += 1
        return (*key, k)

    def _send(self, dst, tag, body=None, category="workload"):
        self.sim.send(self.pid, dst, tag, body, category)

    def _adopt(self, comm: Communicator):
        self.sim.adopt_comm(self.pid, comm)
        self.sim.horizon_insert(self.pid, comm)

    def _check(self, session: Session):
        if not session.open:
            raise SessionClosed(f"session {session.sid} is closed")

    def _local(self, c: Communicator) -> Communicator:
        return self.proc.comms.get(c.cid, c)

    def _check_live(self, c: Communicator):
        if self.pid not in c.group:
            raise ValueError(f"process {self.pid} is not a member of {c}")
        if self._local(c).status is not CommStatus.LIVE:
            raise Revoked(c.cid)

    # -- session flow ----------------------------------------------------------

    def session_init(self):
        if self.mode is FtMode.NAIVE and not self._naive_done:
            self._naive_done = True
            world = self.psets.world
            site = self._site("create", world.members)
            comm = yield from self._rendezvous(
                site, world, 0, "naive_world_setup", False,
                kind="naive_world", requested=world, covered=False)
            self._adopt(comm)
        s = Session(self._next_sid)
        self._next_sid += 1
        self.proc.sessions[s.sid] = s
        return s

    def session_finalize(self, session: Session):
        # communicators derived from the session stay usable
        self._check(session)
        session.open = False

    def group_from_pset(self, session: Session, name: str) -> Group:
        self._check(session)
        return self.psets.resolve(name, self.pid)

    def comm_create_from_group(self, session: Session, g: Group):
        self._check(session)
        comm = yield from self._create(g, "create")
        return comm

    def horizon_from_group(self, session: Session, g: Group):
        """Declare the intent to communicate within ``g``.

        In Horizon mode a communicator over ``g`` is created and inserted in
        every member's Horizon set; no handle is returned.  Without Horizon
        support the call does nothing.
        """
        self._check(session)
        if self.mode is not FtMode.HORIZON:
            return None
        yield from self._create(g, "horizon")
        return None

    def world_init(self):
        if self._world_done:
            raise DoubleInit(f"process {self.pid} already initialised the world model")
        self._world_done = True
        world = self.psets.world
        site = self._site("create", world.members)
        comm = yield from self._rendezvous(
            site, world, 0, "creation", False, kind="world", requested=world, covered=False)
        self._adopt(comm)
        return comm

    # -- creation machinery ------------------------------------------------------

    def _create(self, g: Group, kind: str):
        if self.pid not in g:
            raise ValueError(f"process {self.pid} is not a member of {g}")
        site = self._site("create", g.members)
        cover = self.horizon.covering(g) if self.mode is not FtMode.NONE else None
        if cover is None:
            comm = yield from self._rendezvous(
                site, g, 0, "creation", False, kind=kind, requested=g, covered=False)
        else:
            comm = yield from self._protected(site, g, cover, "creation", "lda", kind)
        self._adopt(comm)
        return comm

    def _protected(self, site, g: Group, scope: Communicator, category, lda_category, kind):
        attempt = 0
        while True:
            verdict = yield from discover_alive(
                self.sim, self.pid, scope, g, site, attempt, lda_category)
            comm = yield from self._rendezvous(
                site, verdict.alive, attempt, category, True,
                kind=kind, requested=g, covered=True, scope=scope.cid)
            if comm is not None:
                return comm
            attempt += 1

    def _rendezvous(self, site, members: Group, attempt: int, category: str, ft: bool, **info):
        """Coordinator-based creation over ``members``; None means aborted."""
        proc = self.proc
        coord = members.members[0]
        if self.pid == coord:
            others = members.members[1:]
            join = ("join", site, attempt)

            def missing():
                got = {m.src for m in proc.mailbox if m.tag == join}
                return {p for p in others if p not in got}

            def ready():
                miss = missing()
                return not miss or (ft and bool(miss & proc.known_failed))

            while not ready():
                yield Wait(info["kind"], ready, missing, f"{info['kind']} over {members}")
            failed = missing()
            proc.take_all(lambda m: m.tag == join)
            if failed:
                for p in others:
                    self._send(p, ("abort", site, attempt), None, category)
                return None
            cid = self.sim.allocate_cid()
            for p in others:
                self._send(p, ("commit", site, attempt), cid, category)
            self.sim.record_creation(
                cid=cid, members=list(members.members), attempt=attempt,
                kind=info["kind"], requested=list(info["requested"].members),
                covered=info["covered"], scope=info.get("scope"))
            return Communicator(cid, members)

        self._send(coord, ("join", site, attempt), None, category)
        decided = {("commit", site, attempt), ("abort", site, attempt)}

        def answer(m):
            return m.src == coord and m.tag in decided

        def ready():
            return proc.find(answer) is not None or (ft and coord in proc.known_failed)

        while not ready():
            yield Wait(info["kind"], ready, lambda: {coord}, f"{info['kind']} over {members}")
        msg = proc.take(answer)
        if msg is None or msg.tag[0] == "abort":
            return None
        return Communicator(msg.body, members)

    # -- ULFM primitives and workload ---------------------------------------------

    def comm_revoke(self, c: Communicator):
        if self.pid not in c.group:
            raise ValueError(f"process {self.pid} is not a member of {c}")
        if not self.sim.set_comm_status(self.pid, c.cid, CommStatus.REVOKED):
            return
        for p in c.group:
            if p != self.pid:
                self._send(p, ("revoke", c.cid), None, "revoke_agree")

    def comm_free(self, c: Communicator):
        self.sim.set_comm_status(self.pid, c.cid, CommStatus.FREED)

    def comm_shrink(self, c: Communicator):
        self._check_live(c)
        site = self._site("shrink", c.cid)
        comm = yield from self._protected(
            site, c.group, self._local(c), "revoke_agree", "revoke_agree", "shrink")
        self._adopt(comm)
        return comm

    def comm_agree(self, c: Communicator, flag: int) -> int:
        self._check_live(c)
        site = self._site("agree", c.cid)
        got = yield from exchange(
            self.sim, self.pid, c.group, ("agree", site), int(flag), "revoke_agree", self._local(c))
        result = -1
        for v in got.values():
            result &= v
        return result

    def barrier(self, c: Communicator):
        self._check_live(c)
        proc = self.proc
        site = self._site("barrier", c.cid)
        coord = c.group.members[0]

        def revoked():
            return proc.comm_status(c.cid) is not CommStatus.LIVE

        if self.pid == coord:
            others = c.group.members[1:]
            enter = ("enter", site)

            def missing():
                got = {m.src for m in proc.mailbox if m.tag == enter}
                return {p for p in others if p not in got}

            def ready():
                return revoked() or not missing()

            while not ready():
                yield Wait("barrier", ready, missing, f"barrier on C#{c.cid}")
            if revoked():
                raise Revoked(c.cid)
            proc.take_all(lambda m: m.tag == enter)
            for p in others:
                self._send(p, ("release", site), None, "workload")
            return

        self._send(coord, ("enter", site), None, "workload")

        def released(m):
            return m.src == coord and m.tag == ("release", site)

        def ready():
            return revoked() or proc.find(released) is not None

        while not ready():
            yield Wait("barrier", ready, lambda: {coord}, f"barrier on C#{c.cid}")
        if proc.take(released) is None:
            raise Revoked(c.cid)
