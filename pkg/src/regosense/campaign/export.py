"""Tabular exports of session data.

Every export is a deterministic rendering of the folded session state, so
re-exporting an unchanged session is byte-identical.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

from ..errors import SpecificationError
from ..intrusion import write_curve
from .session import Session

EXPORT_KINDS = ("curves", "measurements", "decisions")


def _fmt(v) -> str:
    if v is None:
        return "not_reached"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


def _write_rows(path: Path, header: Iterable[str], rows: Iterable[Iterable]):
    lines = ["\t".join(header)]
    for row in rows:
        lines.append("\t".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def export(session: Session, what: str, out_dir: Path | str) -> list[Path]:
    """Write the requested view of a session under out_dir."""
    if what not in EXPORT_KINDS:
        raise SpecificationError(
            f"unknown export '{what}'; expected one of {EXPORT_KINDS}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if what == "curves":
        for mid in sorted(session.curves):
            p = out / f"curve_{mid}.txt"
            write_curve(session.curves[mid], p)
            written.append(p)

    elif what == "measurements":
        header = ["curve_id", "location_m", "location_norm", "strength_N_per_m",
                  "gait", "valid", "timestamp", "cost_s", "depth_at_10N_m",
                  "depth_at_20N_m", "depth_at_30N_m", "terminal_force_N"]
        rows = []
        for ev in session.events:
            if ev.kind != "MeasurementAdded":
                continue
            mid = ev.payload["measurement_id"]
            m = next(m for m in session.sampler.measurements if m.curve_id == mid)
            s = session.summaries[mid]
            rows.append([mid, ev.payload["location_m"], m.location, m.strength,
                         m.gait, m.valid, m.timestamp, m.cost_s,
                         s.depth_at_10N, s.depth_at_20N, s.depth_at_30N,
                         s.terminal_force])
        p = out / "measurements.tsv"
        _write_rows(p, header, rows)
        written.append(p)

    else:  # decisions
        header = ["round", "suggested_location", "explore_reward",
                  "verify_reward", "weight", "combined", "outcome",
                  "alternative", "feedback", "stated_objective"]
        rows = []
        for d in session.sampler.decisions:
            s = d.suggestion
            rows.append([d.round_number, s.location, s.explore_reward,
                         s.verify_reward, s.weight, s.combined,
                         d.outcome.value,
                         d.alternative if d.alternative is not None else "-",
                         d.feedback.value, d.stated_objective or "-"])
        p = out / "decisions.tsv"
        _write_rows(p, header, rows)
        written.append(p)

    # lifecycle summary: one row per session-level event, so concluding a
    # session adds exactly one row to an otherwise unchanged export
    lifecycle = [(ev.kind, ev.seq, ev.timestamp) for ev in session.events
                 if ev.kind in ("SessionCreated", "SessionConcluded")]
    p = out / "session.tsv"
    _write_rows(p, ["event", "seq", "timestamp"], lifecycle)
    written.append(p)
    return written
