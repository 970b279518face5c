"""Report rendering: delimited files plus figures next to them.

Every artifact lands in the output directory as ``<log-stem>.<artifact>.<ext>``.
CSV cells hold exact canonical numbers (see :func:`arena.scoring.canon_number`),
so the documented table invariants hold in the files themselves. Figures are
rendered with matplotlib straight to static SVG (or whatever the extension
implies); no display is ever opened.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .analyze import (
    AccuracyRow,
    BreakdownTable,
    CAPABILITIES,
    CpvMatrix,
    ScoreSeries,
    accuracy_table,
    breakdown_table,
    cpv_matrix,
    score_over_time,
)
from .judge import adjudication_report
from .model import EventLog
from .orchestrator import adjudicate_log, finalize, report_to_dict
from .scoring import canon_number

FORMATS = ("csv", "json", "svg")


def _write_json(path: Path, doc) -> None:
    path.write_text(
        json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8"
    )


def _write_csv(path: Path, header: list[str], rows: Iterable[list]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _save_figure(fig, path: Path) -> None:
    kwargs = {"metadata": {"Date": None}} if path.suffix == ".svg" else {}
    fig.savefig(path, **kwargs)
    plt.close(fig)


# -- individual artifacts ---------------------------------------------------


def write_series_csv(path: Path, series: ScoreSeries) -> None:
    rows = [
        [t, team, canon_number(series.by_team[team][i])]
        for i, t in enumerate(series.times)
        for team in sorted(series.by_team)
    ]
    _write_csv(path, ["time", "team", "score"], rows)


def write_series_json(path: Path, series: ScoreSeries) -> None:
    _write_json(
        path,
        {
            "times": list(series.times),
            "teams": {
                team: [canon_number(v) for v in values]
                for team, values in series.by_team.items()
            },
        },
    )


def plot_series(path: Path, series: ScoreSeries) -> None:
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for team in sorted(series.by_team):
        values = [float(v) for v in series.by_team[team]]
        ax.plot(series.times, values, drawstyle="steps-post", label=team)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("score")
    ax.set_title("score over time")
    if series.by_team:
        ax.legend(loc="upper left", fontsize="small")
    fig.tight_layout()
    _save_figure(fig, path)


def write_breakdown_csv(path: Path, table: BreakdownTable) -> None:
    rows = []
    for team in table.teams:
        for cap in CAPABILITIES:
            for lang in ("c", "java", "sum"):
                rows.append([team, cap, lang, canon_number(table.cells[(team, cap, lang)])])
        rows.append([team, "penalty", "total", canon_number(table.penalty[team])])
        rows.append([team, "final", "total", canon_number(table.final[team])])
    _write_csv(path, ["team", "capability", "lang", "points"], rows)


def write_breakdown_json(path: Path, table: BreakdownTable) -> None:
    doc = {
        team: {
            **{
                cap: {
                    lang: canon_number(table.cells[(team, cap, lang)])
                    for lang in ("c", "java", "sum")
                }
                for cap in CAPABILITIES
            },
            "penalty": canon_number(table.penalty[team]),
            "final": canon_number(table.final[team]),
        }
        for team in table.teams
    }
    _write_json(path, doc)


def plot_breakdown(path: Path, table: BreakdownTable) -> None:
    fig, ax = plt.subplots(figsize=(8, 4.5))
    teams = list(table.teams)
    bottoms = [0.0] * len(teams)
    for cap in CAPABILITIES:
        values = [float(table.cells[(t, cap, "sum")]) for t in teams]
        ax.bar(teams, values, bottom=bottoms, label=cap)
        bottoms = [b + v for b, v in zip(bottoms, values)]
    finals = [float(table.final[t]) for t in teams]
    ax.scatter(teams, finals, color="black", zorder=3, label="final")
    ax.set_ylabel("points")
    ax.set_title("score breakdown (pre-penalty stacks, final dots)")
    if teams:
        ax.legend(fontsize="small")
    fig.tight_layout()
    _save_figure(fig, path)


def write_accuracy_csv(path: Path, rows: list[AccuracyRow]) -> None:
    out = []
    for row in rows:
        for cap in CAPABILITIES:
            pct = row.accuracy_pct[cap]
            out.append(
                [
                    row.team,
                    cap,
                    row.counted[cap],
                    row.accurate[cap],
                    "" if pct is None else canon_number(pct),
                ]
            )
        out.append([row.team, "penalty_pct", "", "", canon_number(row.penalty_pct)])
    _write_csv(path, ["team", "capability", "counted", "accurate", "accuracy_pct"], out)


def write_accuracy_json(path: Path, rows: list[AccuracyRow]) -> None:
    doc = {
        row.team: {
            "counted": row.counted,
            "accurate": row.accurate,
            "accuracy_pct": {
                cap: (None if pct is None else canon_number(pct))
                for cap, pct in row.accuracy_pct.items()
            },
            "penalty_pct": canon_number(row.penalty_pct),
        }
        for row in rows
    }
    _write_json(path, doc)


def write_matrix_csv(path: Path, matrix: CpvMatrix) -> None:
    rows = [
        [
            challenge,
            cpv,
            team,
            int(cell.pov_found),
            int(cell.patched),
            int(cell.sarif_assessed),
            int(cell.sarif_correct),
            int(cell.no_log_activity),
        ]
        for challenge, cpv in matrix.rows
        for team in matrix.teams
        for cell in (matrix.cells[(challenge, cpv, team)],)
    ]
    _write_csv(
        path,
        [
            "challenge",
            "cpv",
            "team",
            "pov_found",
            "patched",
            "sarif_assessed",
            "sarif_correct",
            "no_log_activity",
        ],
        rows,
    )


def write_matrix_json(path: Path, matrix: CpvMatrix) -> None:
    doc = {
        f"{challenge}/{cpv}": {
            team: {
                "pov_found": cell.pov_found,
                "patched": cell.patched,
                "sarif_assessed": cell.sarif_assessed,
                "sarif_correct": cell.sarif_correct,
                "no_log_activity": cell.no_log_activity,
            }
            for team in matrix.teams
            for cell in (matrix.cells[(challenge, cpv, team)],)
        }
        for challenge, cpv in matrix.rows
    }
    _write_json(path, doc)


def plot_matrix(path: Path, matrix: CpvMatrix) -> None:
    # 0 silent, 1 nothing, 2 PoV only, 3 PoV+patch.
    fig, ax = plt.subplots(
        figsize=(max(4.0, 1.0 + 0.6 * len(matrix.teams)), max(3.0, 0.8 + 0.3 * len(matrix.rows)))
    )
    grid = []
    for challenge, cpv in matrix.rows:
        line = []
        for team in matrix.teams:
            cell = matrix.cells[(challenge, cpv, team)]
            if cell.no_log_activity:
                line.append(0)
            elif cell.patched:
                line.append(3)
            elif cell.pov_found:
                line.append(2)
            else:
                line.append(1)
        grid.append(line)
    if grid:
        ax.imshow(grid, cmap="viridis", vmin=0, vmax=3, aspect="auto")
        ax.set_xticks(range(len(matrix.teams)), matrix.teams, fontsize="small")
        ax.set_yticks(
            range(len(matrix.rows)),
            [f"{c}/{v}" for c, v in matrix.rows],
            fontsize="small",
        )
    ax.set_title("per-vulnerability outcomes (dark=silent, bright=patched)")
    fig.tight_layout()
    _save_figure(fig, path)


# -- the full report path ---------------------------------------------------


def render(
    log: EventLog,
    log_stem: str,
    out_dir: str | Path,
    formats: Iterable[str] = FORMATS,
    series_sample: str | float = "every-event",
) -> list[Path]:
    """Compute every artifact and write the requested formats.

    Returns the written paths. Raises ValueError for an unknown format.
    """
    formats = list(formats)
    for fmt in formats:
        if fmt not in FORMATS:
            raise ValueError(f"unknown format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = finalize(log)
    series = score_over_time(log, series_sample)
    table = breakdown_table(log)
    accuracy = accuracy_table(log)
    matrix = cpv_matrix(log)
    facts = adjudication_report(adjudicate_log(log).values())

    written: list[Path] = []

    def emit(name: str, fmt: str, writer, *args) -> None:
        path = out / f"{log_stem}.{name}.{fmt}"
        writer(path, *args)
        written.append(path)

    if "json" in formats:
        emit("report", "json", _write_json, report_to_dict(report))
        emit("adjudication", "json", _write_json, facts)
        emit("score_series", "json", write_series_json, series)
        emit("breakdown", "json", write_breakdown_json, table)
        emit("accuracy", "json", write_accuracy_json, accuracy)
        emit("cpv_matrix", "json", write_matrix_json, matrix)
    if "csv" in formats:
        emit("score_series", "csv", write_series_csv, series)
        emit("breakdown", "csv", write_breakdown_csv, table)
        emit("accuracy", "csv", write_accuracy_csv, accuracy)
        emit("cpv_matrix", "csv", write_matrix_csv, matrix)
    if "svg" in formats:
        emit("score_series", "svg", plot_series, series)
        emit("breakdown", "svg", plot_breakdown, table)
        emit("cpv_matrix", "svg", plot_matrix, matrix)
    return written
