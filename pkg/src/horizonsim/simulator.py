"""Deterministic discrete-event engine for crash-stop message-passing processes.

Each simulated process runs a *program*: a generator function that performs
local work directly and yields a :class:`Wait` whenever it needs something
from the outside world (a message, a failure notice).  The scheduler resumes
a blocked process only when its wait condition has become true, so a process
that stays blocked once the event queue drains is deadlocked.

Timing model:

* an event carries ``(at, seq)``; the queue pops the smallest pair;
* messages are delivered at ``now + 1`` (unit latency), which together with
  ``seq`` gives per-pair FIFO order;
* crash directives are queued before the program-start wake-ups, so a crash at
  tick ``t`` precedes every other event at ``t``;
* when a process crashes, each live process that shares a live communicator
  with it receives a failure notice on the channel from the crashed process,
  i.e. after every message the crashed process sent before dying.

The engine itself never draws random numbers.
"""

from __future__ import annotations

import enum
import heapq
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Generator, Iterable, Sequence

from .core import CommStatus, Communicator, Group
from .errors import InvalidScenario, NotQuiescent
from .horizon import HorizonSet

log = logging.getLogger(__name__)

CATEGORIES = ("creation", "lda", "naive_world_setup", "workload", "revoke_agree")


class Status(enum.Enum):
    RUNNING = "running"
    BLOCKED = "blocked"
    CRASHED = "crashed"
    FINISHED = "finished"


class Verdict(enum.Enum):
    COMPLETED = "completed"
    DEADLOCK = "deadlock"
    BUDGET_EXHAUSTED = "budget_exhausted"


class StepOutcome(enum.Enum):
    PROGRESSED = "progressed"
    QUIESCENT = "quiescent"


class EventKind(enum.Enum):
    DELIVER = "deliver"
    CRASH = "crash"
    WAKE = "wake"


@dataclass(frozen=True)
class Message:
    src: int
    dst: int
    tag: tuple
    body: Any = None
    category: str = "workload"


@dataclass(frozen=True)
class FailureNotice:
    """Runtime notification that ``src`` crashed. Not an application message."""

    src: int
    dst: int


@dataclass(frozen=True, order=True)
class Event:
    at: int
    seq: int
    kind: EventKind = field(compare=False)
    target: int = field(compare=False)
    payload: Message | FailureNotice | None = field(default=None, compare=False)


@dataclass
class Wait:
    """What a blocked process is waiting for.

    ``ready`` must be side-effect free: the scheduler may poll it at any time.
    """

    call: str
    ready: Callable[[], bool]
    awaiting: Callable[[], Iterable[int]] = lambda: ()
    detail: str = ""

    def describe(self) -> dict:
        return {"call": self.call, "awaiting": sorted(self.awaiting()), "detail": self.detail}


Program = Callable[["Simulator", int], Generator[Wait, None, Any]]


class ProcessState:
    def __init__(self, pid: int, program: Program):
        self.pid = pid
        self.program = program
        self.status = Status.RUNNING
        self.blocked_on: Wait | None = None
        self.mailbox: list[Message] = []
        self.known_failed: set[int] = set()
        self.horizon = HorizonSet()
        self.comms: dict[int, Communicator] = {}
        self.sessions: dict[int, Any] = {}
        self.outcomes: list[dict] = []
        self.sent = 0
        self.received = 0
        self._gen: Generator | None = None

    @property
    def alive(self) -> bool:
        return self.status is not Status.CRASHED

    def find(self, match: Callable[[Message], bool]) -> Message | None:
        for m in self.mailbox:
            if match(m):
                return m
        return None

    def take(self, match: Callable[[Message], bool]) -> Message | None:
        for i, m in enumerate(self.mailbox):
            if match(m):
                return self.mailbox.pop(i)
        return None

    def take_all(self, match: Callable[[Message], bool]) -> list[Message]:
        hit = [m for m in self.mailbox if match(m)]
        if hit:
            self.mailbox = [m for m in self.mailbox if not match(m)]
        return hit

    def comm_status(self, cid: int) -> CommStatus | None:
        c = self.comms.get(cid)
        return c.status if c is not None else None


@dataclass
class RunReport:
    verdict: Verdict
    n: int
    statuses: dict[int, str]
    deadlocked: list[int]
    blocked: dict[int, dict]
    messages: dict[str, int]
    messages_per_process: float
    max_process_load: int
    creations: list[dict]
    horizon: dict[int, list[list[int]]]
    horizon_log: list[dict]
    outcomes: dict[int, list[dict]]
    ticks: int
    events: int
    mode: str | None = None
    seed: int = 0
    max_events: int = 0
    scenario: str | None = None

    @property
    def total_messages(self) -> int:
        return self.messages["total"]


class Simulator:
    def __init__(
        self,
        n: int,
        programs: Sequence[Program],
        faults: Iterable[tuple[int, int]] = (),
        seed: int = 0,
    ):
        if not isinstance(n, int) or n < 1:
            raise InvalidScenario(f"process count must be >= 1, got {n!r}")
        if len(programs) != n:
            raise InvalidScenario(f"need {n} programs, got {len(programs)}")
        faults = list(faults)
        seen = set()
        for pid, tick in faults:
            if not 0 <= pid < n:
                raise InvalidScenario(f"crash targets unknown process {pid}")
            if tick < 0:
                raise InvalidScenario(f"crash tick must be >= 0, got {tick}")
            if pid in seen:
                raise InvalidScenario(f"process {pid} crashes more than once")
            seen.add(pid)
        self.n = n
        self.seed = seed
        self.faults = tuple(faults)
        self.now = 0
        self.events_dispatched = 0
        self.procs = [ProcessState(pid, prog) for pid, prog in enumerate(programs)]
        self.counters: Counter[str] = Counter({c: 0 for c in CATEGORIES})
        self.creations: list[dict] = []
        self.horizon_log: list[dict] = []
        self.trace: list[tuple] = []
        self._queue: list[Event] = []
        self._seq = 0
        self._next_cid = 0
        # (observer, crashed) pairs already notified
        self._notified: set[tuple[int, int]] = set()
        for pid, tick in self.faults:
            self._push(tick, EventKind.CRASH, pid)
        for pid in range(n):
            self._push(0, EventKind.WAKE, pid)

    # -- queue ---------------------------------------------------------------

    def _push(self, at, kind, target, payload=None):
        heapq.heappush(self._queue, Event(at, self._seq, kind, target, payload))
        self._seq += 1

    def pending(self) -> list[Event]:
        return sorted(self._queue)

    # -- services used by programs ----------------------------------------------

    def send(self, src: int, dst: int, tag: tuple, body=None, category: str = "workload"):
        sender = self.procs[src]
        if not sender.alive:
            raise RuntimeError(f"crashed process {src} cannot send")
        if category not in self.counters:
            raise ValueError(f"unknown message category {category!r}")
        self.counters[category] += 1
        sender.sent += 1
        if not self.procs[dst].alive:
            self.trace.append((self.now, "drop", src, dst, tag))
            return
        self._push(self.now + 1, EventKind.DELIVER, dst, Message(src, dst, tag, body, category))

    def allocate_cid(self) -> int:
        cid = self._next_cid
        self._next_cid += 1
        return cid

    def failure_known(self, observer: int, target: int) -> bool:
        """Target crashed and the observer still shares a live communicator with it."""
        if self.procs[target].alive:
            return False
        return any(c.live and target in c.group for c in self.procs[observer].comms.values())

    def adopt_comm(self, pid: int, comm: Communicator):
        """Record ``comm`` at ``pid``; already-crashed members become noticeable."""
        proc = self.procs[pid]
        proc.comms[comm.cid] = comm
        for m in comm.group:
            if m != pid and not self.procs[m].alive:
                self._notify(pid, m)

    def set_comm_status(self, pid: int, cid: int, status: CommStatus) -> bool:
        proc = self.procs[pid]
        c = proc.comms.get(cid)
        if c is None or c.status is status:
            return False
        proc.comms[cid] = c.with_status(status)
        if proc.horizon.evict(cid):
            self.log_horizon(pid, "evict", cid, status.value)
        return True

    def horizon_insert(self, pid: int, comm: Communicator) -> str:
        case = self.procs[pid].horizon.insert(comm)
        self.log_horizon(pid, "insert", comm.cid, case)
        return case

    def log_horizon(self, pid, action, cid, case):
        self.horizon_log.append({
            "tick": self.now,
            "pid": pid,
            "action": action,
            "cid": cid,
            "case": case,
            "entries": [list(c.group.members) for c in self.procs[pid].horizon],
        })

    def record_creation(self, **info):
        self.creations.append({"tick": self.now, **info})

    def _notify(self, observer: int, crashed: int):
        if (observer, crashed) in self._notified or not self.procs[observer].alive:
            return
        self._notified.add((observer, crashed))
        self._push(self.now + 1, EventKind.DELIVER, observer, FailureNotice(crashed, observer))

    # -- scheduling ------------------------------------------------------------

    def _advance(self, proc: ProcessState):
        if proc._gen is None:
            proc._gen = proc.program(self, proc.pid)
        proc.status = Status.RUNNING
        proc.blocked_on = None
        try:
            wait = next(proc._gen)
        except StopIteration:
            proc.status = Status.FINISHED
            self.trace.append((self.now, "finish", proc.pid))
            return
        if not isinstance(wait, Wait):
            raise TypeError(f"program of process {proc.pid} yielded {wait!r}")
        if wait.ready():
            raise RuntimeError(f"process {proc.pid} yielded a wait that is already satisfied")
        proc.status = Status.BLOCKED
        proc.blocked_on = wait

    def _crash(self, proc: ProcessState):
        if not proc.alive:
            return
        proc.status = Status.CRASHED
        proc.blocked_on = None
        if proc._gen is not None:
            proc._gen.close()
        self.trace.append((self.now, "crash", proc.pid))
        log.debug("t=%d crash %d", self.now, proc.pid)
        for other in self.procs:
            if other.alive and self.failure_known(other.pid, proc.pid):
                self._notify(other.pid, proc.pid)

    def _deliver(self, proc: ProcessState, payload):
        if not proc.alive:
            self.trace.append((self.now, "drop", payload.src, payload.dst))
            return
        if isinstance(payload, FailureNotice):
            proc.known_failed.add(payload.src)
            self.trace.append((self.now, "notice", payload.src, payload.dst))
        else:
            proc.received += 1
            self.trace.append((self.now, "deliver", payload.src, payload.dst, payload.tag))
            if payload.tag[0] == "revoke":
                # revocation is handled by the runtime, not by the program
                self.set_comm_status(proc.pid, payload.tag[1], CommStatus.REVOKED)
            else:
                proc.mailbox.append(payload)
        if proc.status is Status.BLOCKED and proc.blocked_on.ready():
            self._advance(proc)

    def step(self) -> StepOutcome:
        if not self._queue:
            return StepOutcome.QUIESCENT
        ev = heapq.heappop(self._queue)
        self.now = max(self.now, ev.at)
        self.events_dispatched += 1
        proc = self.procs[ev.target]
        if ev.kind is EventKind.CRASH:
            self._crash(proc)
        elif ev.kind is EventKind.WAKE:
            if proc.alive and proc._gen is None:
                self._advance(proc)
        else:
            self._deliver(proc, ev.payload)
        return StepOutcome.PROGRESSED

    def enabled(self) -> list[int]:
        """Processes that could take a step right now (empty at quiescence)."""
        out = []
        for p in self.procs:
            if p.status is Status.RUNNING:
                out.append(p.pid)
            elif p.status is Status.BLOCKED and p.blocked_on.ready():
                out.append(p.pid)
        return out

    def run(self, max_events: int = 1_000_000) -> RunReport:
        if max_events <= 0:
            raise ValueError("max_events must be positive")
        budget_hit = False
        while True:
            if not self._queue:
                break
            if self.events_dispatched >= max_events:
                budget_hit = True
                break
            self.step()
        if not budget_hit:
            stuck = self.enabled()
            assert not stuck, f"quiescent with enabled processes {stuck}"
        report = self.report(budget_hit)
        report.max_events = max_events
        return report

    def report(self, budget_hit: bool = False) -> RunReport:
        blocked = [p.pid for p in self.procs if p.status is Status.BLOCKED]
        if budget_hit:
            verdict = Verdict.BUDGET_EXHAUSTED
        elif blocked:
            verdict = Verdict.DEADLOCK
        else:
            verdict = Verdict.COMPLETED
        messages = {c: self.counters[c] for c in CATEGORIES}
        total = sum(messages.values())
        messages["total"] = total
        return RunReport(
            verdict=verdict,
            n=self.n,
            statuses={p.pid: p.status.value for p in self.procs},
            deadlocked=blocked if verdict is Verdict.DEADLOCK else [],
            blocked={p.pid: p.blocked_on.describe() for p in self.procs if p.status is Status.BLOCKED},
            messages=messages,
            messages_per_process=total / self.n,
            max_process_load=max(p.sent + p.received for p in self.procs),
            creations=list(self.creations),
            horizon={p.pid: [list(c.group.members) for c in sorted(p.horizon, key=lambda c: c.cid)] for p in self.procs},
            horizon_log=list(self.horizon_log),
            outcomes={p.pid: list(p.outcomes) for p in self.procs},
            ticks=self.now,
            events=self.events_dispatched,
            seed=self.seed,
        )


def detect_deadlock(report: RunReport) -> set[int]:
    """Processes blocked at quiescence; an empty set means no deadlock."""
    if report.verdict is Verdict.BUDGET_EXHAUSTED:
        raise NotQuiescent(f"run stopped after {report.events} events without reaching quiescence")
    return set(report.deadlocked)
