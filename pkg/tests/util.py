from horizonsim.core import PsetRegistry
from horizonsim.scenario import parse_scenario, run_scenario
from horizonsim.session import FtMode, Mpi
from horizonsim.simulator import Simulator


def run_api(n, body, mode="none", faults=(), psets=None, max_events=100_000):
    """Run ``body(mpi)`` (a generator function) on every process.

    Whatever ``body`` returns is stored as the process's last outcome under
    ``"value"``; exceptions are stored under ``"error"``.
    """
    reg = PsetRegistry(n, psets or {})

    def program(sim, pid):
        mpi = Mpi(sim, pid, FtMode(mode), reg)
        try:
            value = yield from body(mpi)
        except Exception as exc:  # recorded for the test to inspect
            sim.procs[pid].outcomes.append({"error": type(exc).__name__})
        else:
            sim.procs[pid].outcomes.append({"value": value})

    sim = Simulator(n, [program] * n, faults)
    return sim, sim.run(max_events)


def values(report):
    return {pid: o[-1].get("value") for pid, o in report.outcomes.items() if o}


def run_text(text, mode=None, **kw):
    return run_scenario(parse_scenario(text), mode, **kw)


def results(report, call):
    """pid -> list of outcome records for ``call``."""
    return {pid: [o for o in outs if o["call"].split()[0] == call] for pid, outs in report.outcomes.items()}
