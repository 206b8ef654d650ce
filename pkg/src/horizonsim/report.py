"""Rendering of :class:`RunReport` as a human table or a JSON document."""

from __future__ import annotations

import json

from .simulator import CATEGORIES, RunReport

SCHEMA_VERSION = 1


def report_to_dict(report: RunReport) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "scenario": report.scenario,
        "mode": report.mode,
        "seed": report.seed,
        "max_events": report.max_events,
        "n": report.n,
        "verdict": report.verdict.value,
        "deadlocked": sorted(report.deadlocked),
        "blocked": {str(p): d for p, d in sorted(report.blocked.items())},
        "statuses": {str(p): s for p, s in sorted(report.statuses.items())},
        "messages": dict(report.messages),
        "messages_per_process": report.messages_per_process,
        "max_process_load": report.max_process_load,
        "ticks": report.ticks,
        "events": report.events,
        "creations": report.creations,
        "horizon": {str(p): g for p, g in sorted(report.horizon.items())},
        "horizon_log": report.horizon_log,
        "outcomes": {str(p): o for p, o in sorted(report.outcomes.items())},
    }


def _table(rows, header=None) -> list[str]:
    rows = [list(map(str, r)) for r in rows]
    if header:
        rows.insert(0, list(header))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    out = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    if header:
        out.insert(1, "  ".join("-" * w for w in widths))
    return out


def _human(report: RunReport) -> str:
    lines = _table([
        ("scenario", report.scenario or "-"),
        ("mode", report.mode or "-"),
        ("verdict", report.verdict.value),
        ("deadlocked", ",".join(map(str, sorted(report.deadlocked))) or "-"),
        ("processes", report.n),
        ("ticks", report.ticks),
        ("events", report.events),
        ("messages/process", f"{report.messages_per_process:.4f}"),
        ("max process load", report.max_process_load),
    ])
    lines.append("")
    lines += _table([(c, report.messages[c]) for c in (*CATEGORIES, "total")], ("category", "messages"))
    if report.creations:
        lines.append("")
        lines += _table(
            [(c["cid"], c["kind"], _ids(c["requested"]), "yes" if c["covered"] else "no",
              _ids(c["members"]), c["tick"]) for c in report.creations],
            ("cid", "kind", "requested", "covered", "members", "tick"))
    lines.append("")
    rows = []
    for pid in sorted(report.statuses):
        blocked = report.blocked.get(pid)
        where = f"{blocked['call']} awaiting {_ids(blocked['awaiting'])}" if blocked else ""
        horizon = " ".join(_ids(g) for g in report.horizon[pid]) or "-"
        rows.append((pid, report.statuses[pid], horizon, where))
    lines += _table(rows, ("pid", "status", "horizon", "blocked in"))
    return "\n".join(lines) + "\n"


def _ids(ids) -> str:
    return "{" + ",".join(map(str, ids)) + "}"


def emit_report(report: RunReport, format: str = "human") -> str:
    if format == "machine":
        return json.dumps(report_to_dict(report), separators=(",", ":")) + "\n"
    if format == "human":
        return _human(report)
    raise ValueError(f"unknown report format {format!r}")
