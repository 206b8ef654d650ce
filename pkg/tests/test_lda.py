import itertools

import pytest

from horizonsim.core import Group, group
from horizonsim.lda import discover_alive
from horizonsim.simulator import Verdict
from util import run_api


def lda_body(g, revoke_by=None):
    def body(mpi):
        world = yield from mpi.world_init()
        if revoke_by == mpi.pid:
            mpi.comm_revoke(world)
        if mpi.pid not in g:
            return None
        verdict = yield from discover_alive(mpi.sim, mpi.pid, world, g, ("test",))
        return list(verdict.alive.members)
    return body


def verdicts(report, g):
    return {p: o[-1]["value"] for p, o in report.outcomes.items()
            if p in g and o and "value" in o[-1]}


def test_all_alive():
    g = group(1, 2)
    _, report = run_api(4, lda_body(g))
    assert verdicts(report, g) == {1: [1, 2], 2: [1, 2]}


def test_crashed_member_is_excluded():
    g = group(1, 2)
    _, report = run_api(4, lda_body(g), faults=[(2, 2)])
    assert report.verdict is Verdict.COMPLETED
    assert verdicts(report, g) == {1: [1]}


def test_singleton_sends_nothing():
    sim, report = run_api(3, lda_body(group(1)))
    assert verdicts(report, group(1)) == {1: [1]}
    assert report.messages["lda"] == 0


def test_requires_covering_communicator():
    def body(mpi):
        yield from mpi.world_init()
        from horizonsim.core import Communicator
        yield from discover_alive(mpi.sim, mpi.pid, Communicator(99, group(0)), group(0, 1), ("t",))

    _, report = run_api(2, body)
    assert report.outcomes[0] == [{"error": "ValueError"}]


def test_revoked_scope_raises():
    # member 1 never joins discovery, so 0 is still waiting when the revoke lands
    g = group(0, 1)

    def body(mpi):
        world = yield from mpi.world_init()
        if mpi.pid == 1:
            mpi.comm_revoke(world)
            return None
        verdict = yield from discover_alive(mpi.sim, mpi.pid, world, g, ("t",))
        return verdict

    _, report = run_api(2, body)
    assert report.outcomes[0] == [{"error": "Revoked"}]


def lda_body_timed(g):
    def body(mpi):
        world = yield from mpi.world_init()
        if mpi.pid not in g:
            return None
        mpi.proc.outcomes.append({"entered": mpi.sim.now})
        verdict = yield from discover_alive(mpi.sim, mpi.pid, world, g, ("test",))
        return list(verdict.alive.members)
    return body


def first_entry(n, g):
    _, report = run_api(n, lda_body_timed(g))
    return min(o["entered"] for outs in report.outcomes.values() for o in outs if "entered" in o)


def crashed_before_discovery(faults, entry_tick):
    # crash events run before every other event of their tick
    return {p for p, t in faults if t <= entry_tick}


def world_survives(faults):
    # the coordinator of world_init must see the joins (tick 1); others only need to send theirs
    return all(not (p == 0 and t <= 1) for p, t in faults)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_single_crash_every_tick(n):
    """Agreement, soundness, completeness and termination for one crash at any tick."""
    g = Group(tuple(range(n)))
    entry = first_entry(n, g)
    assert entry == 1
    for victim, tick in itertools.product(range(n), range(0, 9)):
        faults = [(victim, tick)]
        if not world_survives(faults) or tick == 0:
            continue
        _, report = run_api(n, lda_body_timed(g), faults=faults)
        assert report.verdict is Verdict.COMPLETED, faults
        got = verdicts(report, g)
        survivors = [p for p in g if p != victim]
        assert set(got) >= set(survivors)
        views = {tuple(got[p]) for p in survivors}
        assert len(views) == 1
        alive = set(views.pop())
        assert alive >= set(survivors)
        assert not alive & crashed_before_discovery(faults, entry)


def test_multi_crash_exhaustive_five_processes():
    g = Group(tuple(range(5)))
    entry = first_entry(5, g)
    for k in (2, 3, 4):
        for victims in itertools.combinations(range(5), k):
            for ticks in itertools.product((1, 2, 3, 4), repeat=k):
                faults = list(zip(victims, ticks))
                if not world_survives(faults):
                    continue
                _, report = run_api(5, lda_body_timed(g), faults=faults)
                assert report.verdict is Verdict.COMPLETED, faults
                survivors = [p for p in g if p not in victims]
                got = verdicts(report, g)
                views = {tuple(got[p]) for p in survivors}
                assert len(views) == 1, faults
                alive = set(views.pop())
                assert alive >= set(survivors)
                assert not alive & crashed_before_discovery(faults, entry)
