"""Replay analytics: everything is recomputed from the event log alone.

The score-over-time series uses prefix replay: the value at time t is the
final-scoring result of the log truncated to events at or before t. Accuracy
multipliers and patch selection are retroactive, so replaying each prefix is
the only semantics that is self-consistent at every sample point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .judge import Classification, PovOutcome
from .model import (
    Bundle,
    Dispatch,
    EventLog,
    Language,
    Patch,
    Pov,
    SarifAssessment,
    Submission,
    Submit,
    event_time,
)
from .orchestrator import adjudicate_log, finalize, log_teams
from .scoring import ScoringReport

F = Fraction

CAPABILITIES = ("pov", "patch", "sarif", "bundle")


def replay_score(log: EventLog) -> ScoringReport:
    """Recompute the scoreboard; identical to final scoring on the same log."""
    return finalize(log)


def _truncate(log: EventLog, t: float) -> EventLog:
    return EventLog(tuple(e for e in log.events if event_time(e) <= t))


@dataclass(frozen=True)
class ScoreSeries:
    """Cumulative team scores sampled over the competition."""

    times: tuple[float, ...]
    by_team: dict[str, tuple[Fraction, ...]]


def score_over_time(log: EventLog, sample: str | float = "every-event") -> ScoreSeries:
    """Sample team totals over log prefixes.

    ``sample`` is ``"every-event"`` (one point per submission event time) or
    a positive number of seconds for a fixed grid. The last sample always
    covers the whole log, so the series ends exactly at the replay totals.
    """
    teams = log_teams(log)
    if not log.events:
        return ScoreSeries((), {t: () for t in teams})
    submit_times = sorted({event_time(e) for e in log.events if isinstance(e, Submit)})
    last = event_time(log.events[-1])
    if sample == "every-event":
        times = submit_times or [last]
        if times[-1] < last:
            times = times + [last]
    else:
        step = float(sample)
        if step <= 0:
            raise ValueError("sampling interval must be positive")
        start = event_time(log.events[0])
        times = []
        t = start
        while t < last:
            times.append(t)
            t += step
        times.append(last)
    series: dict[str, list[Fraction]] = {t: [] for t in teams}
    for t in times:
        totals = finalize(_truncate(log, t)).team_totals()
        for team in teams:
            series[team].append(totals.get(team, F(0)))
    return ScoreSeries(tuple(times), {t: tuple(v) for t, v in series.items()})


@dataclass(frozen=True)
class AccuracyRow:
    team: str
    counted: dict[str, int]          # capability -> accurate + inaccurate
    accurate: dict[str, int]         # capability -> accurate
    accuracy_pct: dict[str, Fraction | None]
    penalty_pct: Fraction


def _capability_of(sub: Submission) -> str:
    if isinstance(sub.body, Pov):
        return "pov"
    if isinstance(sub.body, Patch):
        return "patch"
    if isinstance(sub.body, SarifAssessment):
        return "sarif"
    assert isinstance(sub.body, Bundle)
    return "bundle"


def accuracy_table(log: EventLog) -> list[AccuracyRow]:
    """Counted submissions, per-capability accuracy, and the overall score
    reduction the accuracy multipliers caused, per team."""
    adjudications = adjudicate_log(log)
    report = finalize(log)
    rows = []
    for team in log_teams(log):
        counted = {c: 0 for c in CAPABILITIES}
        accurate = {c: 0 for c in CAPABILITIES}
        for adj in adjudications.values():
            for sub_id, sub in adj.submissions.items():
                if sub.team != team:
                    continue
                cls = adj.classification_of(sub_id)
                if cls is None or cls is Classification.NEUTRAL:
                    continue
                cap = _capability_of(sub)
                counted[cap] += 1
                if cls is Classification.ACCURATE:
                    accurate[cap] += 1
        pct = {
            c: (F(accurate[c] * 100, counted[c]) if counted[c] else None)
            for c in CAPABILITIES
        }
        scores = report.team_scores(team)
        pre = sum((s.pre_penalty for s in scores), F(0))
        final = sum((s.final for s in scores), F(0))
        penalty = F(0) if pre == 0 else (1 - final / pre) * 100
        rows.append(
            AccuracyRow(
                team=team,
                counted=counted,
                accurate=accurate,
                accuracy_pct=pct,
                penalty_pct=penalty,
            )
        )
    return rows


@dataclass(frozen=True)
class BreakdownTable:
    """Pre-penalty capability points split by task language, plus the signed
    penalty the accuracy multipliers applied, per team."""

    teams: tuple[str, ...]
    # (team, capability, lang) -> points; lang in {"c", "java", "sum"}
    cells: dict[tuple[str, str, str], Fraction]
    penalty: dict[str, Fraction]
    final: dict[str, Fraction]


def breakdown_table(log: EventLog) -> BreakdownTable:
    report = finalize(log)
    languages = {}
    for event in log.events:
        if isinstance(event, Dispatch):
            languages[event.task.id] = event.task.language
    teams = tuple(log_teams(log))
    cells: dict[tuple[str, str, str], Fraction] = {}
    penalty: dict[str, Fraction] = {}
    final: dict[str, Fraction] = {}
    for team in teams:
        for cap in CAPABILITIES:
            for lang in ("c", "java", "sum"):
                cells[(team, cap, lang)] = F(0)
        pre_total = F(0)
        final_total = F(0)
        for score in report.team_scores(team):
            lang = "c" if languages[score.challenge] is Language.C else "java"
            for cap, value in (
                ("pov", score.pov_total),
                ("patch", score.patch_total),
                ("sarif", score.sarif_total),
                ("bundle", score.bundle_total),
            ):
                cells[(team, cap, lang)] += value
                cells[(team, cap, "sum")] += value
            pre_total += score.pre_penalty
            final_total += score.final
        penalty[team] = final_total - pre_total
        final[team] = final_total
    return BreakdownTable(teams=teams, cells=cells, penalty=penalty, final=final)


@dataclass(frozen=True)
class CpvCell:
    pov_found: bool = False
    patched: bool = False
    sarif_assessed: bool = False
    sarif_correct: bool = False
    no_log_activity: bool = False


@dataclass(frozen=True)
class CpvMatrix:
    """Outcome flags per team, one row per vulnerability.

    Invalid broadcasts have no vulnerability, so their assessment outcomes
    get extra ``sarif:<broadcast-id>`` rows (the expected verdict there is
    Incorrect; ``sarif_correct`` records whether the team said so).
    """

    teams: tuple[str, ...]
    rows: tuple[tuple[str, str], ...]  # (challenge id, cpv id or sarif:<id>)
    cells: dict[tuple[str, str, str], CpvCell]  # (challenge, row, team)


def cpv_matrix(log: EventLog) -> CpvMatrix:
    """Per-vulnerability outcome flags per team, straight from adjudication."""
    adjudications = adjudicate_log(log)
    teams = tuple(log_teams(log))
    rows: list[tuple[str, str]] = []
    cells: dict[tuple[str, str, str], CpvCell] = {}

    def sarif_flags(adj, team: str, broadcast_id: str | None) -> tuple[bool, bool]:
        if broadcast_id is None or (team, broadcast_id) not in adj.scored_sarif:
            return False, False
        scored_id = adj.scored_sarif[(team, broadcast_id)]
        correct = adj.sarif_facts[scored_id].classification is Classification.ACCURATE
        return True, correct

    for challenge_id in sorted(adjudications):
        adj = adjudications[challenge_id]
        active = {sub.team for sub in adj.submissions.values()}
        valid_broadcast_by_cpv = {
            b.valid_cpv: b.id for b in adj.broadcasts.values() if b.valid_cpv is not None
        }
        for cpv in sorted(adj.task.cpvs, key=lambda c: c.id):
            rows.append((challenge_id, cpv.id))
            for team in teams:
                if team not in active:
                    cells[(challenge_id, cpv.id, team)] = CpvCell(no_log_activity=True)
                    continue
                pov_found = any(
                    v.outcome in (PovOutcome.REPRODUCED, PovOutcome.DUPLICATE)
                    and v.cpv_id == cpv.id
                    and adj.submissions[sid].team == team
                    for sid, v in adj.pov_verdicts.items()
                )
                patched = any(
                    fact.selected
                    and cpv.id in fact.covered
                    and fact.classification is Classification.ACCURATE
                    and adj.submissions[sid].team == team
                    for sid, fact in adj.patch_facts.items()
                )
                assessed, correct = sarif_flags(
                    adj, team, valid_broadcast_by_cpv.get(cpv.id)
                )
                cells[(challenge_id, cpv.id, team)] = CpvCell(
                    pov_found=pov_found,
                    patched=patched,
                    sarif_assessed=assessed,
                    sarif_correct=correct,
                )
        for bid in sorted(adj.broadcasts):
            if adj.broadcasts[bid].valid_cpv is not None:
                continue
            row_id = f"sarif:{bid}"
            rows.append((challenge_id, row_id))
            for team in teams:
                if team not in active:
                    cells[(challenge_id, row_id, team)] = CpvCell(no_log_activity=True)
                    continue
                assessed, correct = sarif_flags(adj, team, bid)
                cells[(challenge_id, row_id, team)] = CpvCell(
                    sarif_assessed=assessed, sarif_correct=correct
                )
    return CpvMatrix(teams=teams, rows=tuple(rows), cells=cells)
