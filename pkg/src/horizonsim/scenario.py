"""Scenario plans: the line-oriented text format, workload generators, runner.

Format, one directive per line, ``#`` starts a comment::

    procs 4
    pset app://half 0-1
    crash 2 @ 10
    mode horizon                      # optional, the CLI may override it
    prog * : sinit; gset mpi://WORLD; horizon; create; barrier; fin
    prog 3 : sinit; fin

``prog`` accepts ``*`` (every process without its own line), a single pid or
an id list such as ``0-2,5``.  Calls:

    sinit  fin  gset <pset>  create  horizon  barrier  revoke  shrink
    agree <0|1>  winit

``gset`` picks the group used by the following ``create``/``horizon``;
``create``, ``shrink`` and ``winit`` make the new communicator current and
``barrier``/``revoke``/``shrink``/``agree`` act on the current one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .core import SELF, WORLD, Group, PsetRegistry
from .errors import InvalidScenario, ParseError, Revoked
from .session import FtMode, Mpi
from .simulator import RunReport, Simulator

NULLARY = {"sinit", "fin", "create", "horizon", "barrier", "revoke", "shrink", "winit"}
UNARY = {"gset", "agree"}


@dataclass(frozen=True)
class Call:
    op: str
    arg: str | int | None = None

    def __str__(self):
        return self.op if self.arg is None else f"{self.op} {self.arg}"


@dataclass(frozen=True)
class ScenarioPlan:
    n: int
    psets: dict[str, Group] = field(default_factory=dict)
    faults: tuple[tuple[int, int], ...] = ()
    programs: tuple[tuple[Call, ...], ...] = ()
    mode: FtMode = FtMode.NONE

    def registry(self) -> PsetRegistry:
        return PsetRegistry(self.n, self.psets)


def parse_ids(text: str, line: int | None = None) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        m = re.fullmatch(r"(\d+)(?:-(\d+))?", part)
        if not m:
            raise ParseError(f"bad id list {text!r}", line)
        lo = int(m.group(1))
        hi = int(m.group(2)) if m.group(2) is not None else lo
        if hi < lo:
            raise ParseError(f"empty range {part!r}", line)
        out.extend(range(lo, hi + 1))
    return out


def format_ids(ids) -> str:
    ids = sorted(ids)
    runs, i = [], 0
    while i < len(ids):
        j = i
        while j + 1 < len(ids) and ids[j + 1] == ids[j] + 1:
            j += 1
        runs.append(str(ids[i]) if i == j else f"{ids[i]}-{ids[j]}")
        i = j + 1
    return ",".join(runs)


def _parse_call(text: str, line: int) -> Call:
    words = text.split()
    if not words:
        raise ParseError("empty call", line)
    op, args = words[0], words[1:]
    if op in NULLARY:
        if args:
            raise ParseError(f"{op} takes no argument", line)
        return Call(op)
    if op in UNARY:
        if len(args) != 1:
            raise ParseError(f"{op} takes exactly one argument", line)
        if op == "agree":
            if args[0] not in ("0", "1"):
                raise ParseError(f"agree flag must be 0 or 1, got {args[0]!r}", line)
            return Call(op, int(args[0]))
        return Call(op, args[0])
    raise ParseError(f"unknown call {op!r}", line)


def parse_scenario(text: str) -> ScenarioPlan:
    n = None
    psets: dict[str, tuple[Group, int]] = {}
    faults: list[tuple[int, int, int]] = []
    progs: dict[int, tuple[tuple[Call, ...], int]] = {}
    default: tuple[tuple[Call, ...], int] | None = None
    pending: list[tuple[list[int] | None, tuple[Call, ...], int]] = []
    mode = FtMode.NONE

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stmt = raw.split("#", 1)[0].strip()
        if not stmt:
            continue
        head, _, rest = stmt.partition(" ")
        rest = rest.strip()
        if head == "procs":
            if n is not None:
                raise ParseError("procs given twice", lineno)
            if not re.fullmatch(r"\d+", rest):
                raise ParseError(f"procs needs a count, got {rest!r}", lineno)
            n = int(rest)
            if n < 1:
                raise InvalidScenario("procs must be >= 1", lineno)
        elif head == "pset":
            parts = rest.split()
            if len(parts) != 2:
                raise ParseError("pset needs a name and an id list", lineno)
            name, ids = parts
            if name in (WORLD, SELF):
                raise InvalidScenario(f"{name} is builtin", lineno)
            if name in psets:
                raise InvalidScenario(f"pset {name} defined twice", lineno)
            psets[name] = (Group.of(parse_ids(ids, lineno)), lineno)
        elif head == "crash":
            m = re.fullmatch(r"(\d+)\s*@\s*(\d+)", rest)
            if not m:
                raise ParseError(f"expected 'crash <pid> @ <tick>', got {stmt!r}", lineno)
            faults.append((int(m.group(1)), int(m.group(2)), lineno))
        elif head == "mode":
            try:
                mode = FtMode(rest)
            except ValueError:
                raise ParseError(f"unknown mode {rest!r}", lineno) from None
        elif head == "prog":
            who, sep, body = rest.partition(":")
            if not sep:
                raise ParseError("prog needs ':' before its calls", lineno)
            who = who.strip()
            calls = tuple(_parse_call(c, lineno) for c in body.split(";") if c.strip())
            pending.append((None if who == "*" else parse_ids(who, lineno), calls, lineno))
        else:
            raise ParseError(f"unknown directive {head!r}", lineno)

    if n is None:
        raise ParseError("missing 'procs' directive", 1)
    for name, (g, line) in psets.items():
        if g.members[-1] >= n:
            raise InvalidScenario(f"pset {name} names a process >= {n}", line)
    seen = set()
    for pid, tick, line in faults:
        if pid >= n:
            raise InvalidScenario(f"crash targets process {pid} >= {n}", line)
        if pid in seen:
            raise InvalidScenario(f"process {pid} crashes twice", line)
        seen.add(pid)
    for who, calls, line in pending:
        if who is None:
            if default is not None:
                raise InvalidScenario("'prog *' given twice", line)
            default = (calls, line)
            continue
        for pid in who:
            if pid >= n:
                raise InvalidScenario(f"prog names process {pid} >= {n}", line)
            if pid in progs:
                raise InvalidScenario(f"process {pid} has two programs", line)
            progs[pid] = (calls, line)

    programs = []
    for pid in range(n):
        calls, line = progs.get(pid) or default or ((), 0)
        _check_program(pid, calls, line, n, psets)
        programs.append(calls)

    return ScenarioPlan(
        n=n,
        psets={k: g for k, (g, _) in psets.items()},
        faults=tuple((p, t) for p, t, _ in faults),
        programs=tuple(programs),
        mode=mode,
    )


def _check_program(pid, calls, line, n, psets):
    """Walk one program symbolically and reject calls that could never succeed."""
    sessions = 0
    used_sessions = False
    winit = False
    current_group = None
    have_comm = False
    for call in calls:
        op = call.op
        if op == "sinit":
            sessions += 1
            used_sessions = True
        elif op == "fin":
            if not sessions:
                raise InvalidScenario(f"process {pid}: fin without an open session", line)
            sessions -= 1
        elif op == "gset":
            if call.arg not in psets and call.arg not in (WORLD, SELF):
                raise ParseError(f"undefined pset {call.arg!r}", line)
            if not sessions:
                raise InvalidScenario(f"process {pid}: gset needs an open session", line)
            if call.arg == WORLD:
                current_group = range(n)
            elif call.arg == SELF:
                current_group = (pid,)
            else:
                current_group = psets[call.arg][0]
        elif op in ("create", "horizon"):
            if current_group is None:
                raise ParseError(f"process {pid}: {op} before any gset", line)
            if not sessions:
                raise InvalidScenario(f"process {pid}: {op} needs an open session", line)
            if pid not in current_group:
                raise InvalidScenario(f"process {pid}: {op} over a group it is not part of", line)
            if op == "create":
                have_comm = True
        elif op == "winit":
            if winit:
                raise InvalidScenario(f"process {pid}: winit called twice", line)
            winit = have_comm = True
        elif op in ("barrier", "revoke", "shrink", "agree"):
            if not have_comm:
                raise InvalidScenario(f"process {pid}: {op} without a communicator", line)
    if winit and used_sessions:
        raise InvalidScenario(f"process {pid}: mixes winit with session calls", line)


def format_scenario(plan: ScenarioPlan) -> str:
    lines = [f"procs {plan.n}", f"mode {plan.mode.value}"]
    for name, g in plan.psets.items():
        lines.append(f"pset {name} {format_ids(g.members)}")
    for pid, tick in plan.faults:
        lines.append(f"crash {pid} @ {tick}")
    by_prog: dict[tuple[Call, ...], list[int]] = {}
    for pid, calls in enumerate(plan.programs):
        by_prog.setdefault(calls, []).append(pid)
    for calls, pids in by_prog.items():
        lines.append(f"prog {format_ids(pids)} : " + "; ".join(map(str, calls)))
    return "\n".join(lines) + "\n"


# -- workload generators -----------------------------------------------------------


def gen_ep_like(n: int, groups_of: int) -> ScenarioPlan:
    """Embarrassingly parallel: disjoint groups, each creates one communicator.

    Each group first declares its intent (a no-op without Horizon support),
    then creates, synchronises once and finalises.  Per-process work does not
    depend on ``n``.
    """
    if groups_of < 1 or n < 1 or n % groups_of:
        raise InvalidScenario(f"group size {groups_of} must divide process count {n}")
    psets, programs = {}, []
    for i in range(n // groups_of):
        psets[f"app://ep{i}"] = Group(tuple(range(i * groups_of, (i + 1) * groups_of)))
    for pid in range(n):
        name = f"app://ep{pid // groups_of}"
        programs.append((
            Call("sinit"), Call("gset", name), Call("horizon"),
            Call("create"), Call("barrier"), Call("fin"),
        ))
    return ScenarioPlan(n=n, psets=psets, programs=tuple(programs))


def gen_dt_like(n: int) -> ScenarioPlan:
    """Data traffic: a pipeline of overlapping pairs ``{i, i+1}`` then a gather
    group of the even processes, with a barrier after each creation."""
    if n < 4:
        raise InvalidScenario(f"dt pattern needs at least 4 processes, got {n}")
    psets = {f"app://pair{i}": Group((i, i + 1)) for i in range(n - 1)}
    psets["app://gather"] = Group(tuple(range(0, n, 2)))
    programs = []
    for pid in range(n):
        calls = [Call("sinit")]
        for i in (pid - 1, pid):
            if 0 <= i < n - 1:
                calls += [Call("gset", f"app://pair{i}"), Call("create"), Call("barrier")]
        if pid % 2 == 0:
            calls += [Call("gset", "app://gather"), Call("create"), Call("barrier")]
        calls.append(Call("fin"))
        programs.append(tuple(calls))
    return ScenarioPlan(n=n, psets=psets, programs=tuple(programs))


# -- execution -----------------------------------------------------------------


def make_program(calls, mode: FtMode, registry: PsetRegistry):
    def program(sim: Simulator, pid: int):
        mpi = Mpi(sim, pid, mode, registry)
        out = sim.procs[pid].outcomes
        sessions = []
        grp = None
        comm = None
        for call in calls:
            rec = {"call": str(call), "tick": None}
            try:
                if call.op == "sinit":
                    sessions.append((yield from mpi.session_init()))
                elif call.op == "fin":
                    mpi.session_finalize(sessions.pop())
                elif call.op == "gset":
                    grp = mpi.group_from_pset(sessions[-1], call.arg)
                    rec["group"] = list(grp.members)
                elif call.op == "create":
                    comm = yield from mpi.comm_create_from_group(sessions[-1], grp)
                    rec.update(cid=comm.cid, members=list(comm.group.members))
                elif call.op == "horizon":
                    yield from mpi.horizon_from_group(sessions[-1], grp)
                elif call.op == "winit":
                    comm = yield from mpi.world_init()
                    rec.update(cid=comm.cid, members=list(comm.group.members))
                elif call.op == "barrier":
                    yield from mpi.barrier(comm)
                elif call.op == "revoke":
                    mpi.comm_revoke(comm)
                elif call.op == "shrink":
                    comm = yield from mpi.comm_shrink(comm)
                    rec.update(cid=comm.cid, members=list(comm.group.members))
                elif call.op == "agree":
                    rec["result"] = yield from mpi.comm_agree(comm, call.arg)
            except Revoked as exc:
                rec["error"] = "revoked"
                rec["cid"] = exc.cid
            rec["tick"] = sim.now
            out.append(rec)

    return program


def build_simulator(plan: ScenarioPlan, mode: FtMode | str | None = None, seed: int = 0) -> Simulator:
    mode = FtMode(mode) if mode is not None else plan.mode
    registry = plan.registry()
    programs = [make_program(calls, mode, registry) for calls in plan.programs]
    return Simulator(plan.n, programs, plan.faults, seed=seed)


def run_scenario(plan: ScenarioPlan, mode: FtMode | str | None = None, seed: int = 0,
                 max_events: int = 1_000_000) -> RunReport:
    mode = FtMode(mode) if mode is not None else plan.mode
    sim = build_simulator(plan, mode, seed)
    report = sim.run(max_events)
    report.mode = mode.value
    return report
