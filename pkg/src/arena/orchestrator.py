"""Competition orchestration: dispatch, intake, and final scoring.

:class:`Arena` holds the live state of one run on a virtual clock: it emits
dispatch and broadcast events when their scheduled times pass, screens every
incoming submission, and appends accepted ones to the event log, which is
the single serialization point. :func:`finalize` replays a finished log
through adjudication and the scoring formulas.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable

from .judge import (
    ChallengeAdjudication,
    Classification,
    adjudicate_challenge,
)
from .logio import body_from_dict, ParseError
from .model import (
    Broadcast,
    Bundle,
    Dispatch,
    Event,
    EventLog,
    Patch,
    Pov,
    SarifAssessment,
    SchemaError,
    ServerError,
    Submission,
    Submit,
    Timestamp,
    event_sort_key,
    validate_log,
)
from .scenario import Scenario
from .scoring import (
    Capability,
    ChallengeScore,
    ScoringReport,
    accuracy_multiplier,
    bundle_points,
    capability_points,
    challenge_score,
    canon_number,
    time_decay,
)


@dataclass(frozen=True)
class Receipt:
    submission_id: str | None
    accepted: bool
    recorded_time: Timestamp
    note: str | None = None


class Arena:
    """Live state of one competition run over a virtual clock."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self._events: list[Event] = []
        self._live_tasks: dict[str, Any] = {}
        self._live_broadcasts: dict[str, Any] = {}
        self._accepted: dict[str, Submission] = {}
        self._auto_id = 0
        self._now: Timestamp = 0.0
        # Scheduled organizer events, consumed in timeline order.
        timeline: list[Event] = [Dispatch(t) for t in scenario.tasks()]
        timeline += [Broadcast(b) for b in scenario.broadcasts()]
        self._timeline = sorted(timeline, key=event_sort_key, reverse=True)

    @property
    def now(self) -> Timestamp:
        return self._now

    def advance_to(self, now: Timestamp) -> None:
        """Emit every scheduled dispatch and broadcast due by ``now``."""
        self._now = max(self._now, now)
        while self._timeline and event_sort_key(self._timeline[-1])[0] <= now:
            event = self._timeline.pop()
            self._events.append(event)
            if isinstance(event, Dispatch):
                self._live_tasks[event.task.id] = event.task
            else:
                self._live_broadcasts[event.broadcast.id] = event.broadcast

    def open_tasks(self, now: Timestamp) -> list[dict[str, Any]]:
        """Status view of tasks whose window contains ``now``."""
        self.advance_to(now)
        return [
            {
                "id": t.id,
                "project": t.project,
                "language": t.language.value,
                "mode": t.mode.value,
                "open_time": t.open_time,
                "deadline": t.deadline,
                "harnesses": list(t.harnesses),
            }
            for t in sorted(self._live_tasks.values(), key=lambda t: t.id)
            if now <= t.deadline
        ]

    def record_server_error(self, team: str, now: Timestamp) -> None:
        self.advance_to(now)
        if now <= self.scenario.end_time:
            self._events.append(ServerError(team=team, time=now))

    def _schema_error(self, team: str, now: Timestamp, note: str) -> Receipt:
        if now <= self.scenario.end_time:
            self._events.append(SchemaError(team=team, time=now))
        return Receipt(None, False, now, note)

    def _reject(self, now: Timestamp, note: str) -> Receipt:
        return Receipt(None, False, now, note)

    def accept_submission(self, payload: bytes | dict[str, Any], now: Timestamp) -> Receipt:
        """Screen one submission request at virtual time ``now``.

        Schema violations become neutral schema-error events; semantically
        invalid requests (unknown ids, past deadline) are rejected without
        entering the log; everything else is appended exactly once.
        """
        self.advance_to(now)
        if now > self.scenario.end_time:
            return self._reject(now, "competition over")
        if isinstance(payload, (bytes, bytearray)):
            try:
                payload = json.loads(payload.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                return self._schema_error("unknown", now, "malformed json")
        if not isinstance(payload, dict):
            return self._schema_error("unknown", now, "request must be a JSON object")
        team = payload.get("team")
        if not isinstance(team, str) or not team:
            return self._schema_error("unknown", now, "missing team")
        challenge_id = payload.get("challenge_id")
        if not isinstance(challenge_id, str):
            return self._schema_error(team, now, "missing challenge_id")
        try:
            body = body_from_dict(payload, line=0)
        except ParseError as exc:
            return self._schema_error(team, now, exc.reason)
        if isinstance(body, Patch):
            eff = body.effect
            if not eff.applies and eff.builds:
                return self._schema_error(team, now, "patch claims to build without applying")
        if isinstance(body, Bundle) and body.present_refs() < 2:
            return self._schema_error(team, now, "bundle needs at least two references")

        if team not in self.scenario.teams:
            return self._reject(now, "unknown team")
        task = self._live_tasks.get(challenge_id)
        if task is None:
            return self._reject(now, "unknown challenge")
        if now > task.deadline:
            return self._reject(now, "past deadline")
        if isinstance(body, Pov) and body.harness not in task.harnesses:
            return self._reject(now, "unknown harness")
        if isinstance(body, SarifAssessment):
            b = self._live_broadcasts.get(body.broadcast_id)
            if b is None or b.challenge_id != challenge_id:
                return self._reject(now, "unknown broadcast")
        if isinstance(body, Bundle):
            note = self._check_bundle_refs(body, team, challenge_id)
            if note is not None:
                return self._reject(now, note)

        sub_id = payload.get("id")
        if sub_id is None:
            self._auto_id += 1
            sub_id = f"s{self._auto_id:06d}"
        elif not isinstance(sub_id, str):
            return self._schema_error(team, now, "id must be a string")
        if sub_id in self._accepted:
            return self._reject(now, "duplicate id")
        sub = Submission(id=sub_id, team=team, challenge_id=challenge_id, time=now, body=body)
        self._accepted[sub_id] = sub
        self._events.append(Submit(sub))
        return Receipt(sub_id, True, now)

    def _check_bundle_refs(self, bundle: Bundle, team: str, challenge_id: str) -> str | None:
        for ref, kind in ((bundle.pov_ref, Pov), (bundle.patch_ref, Patch)):
            if ref is None:
                continue
            sub = self._accepted.get(ref)
            if (
                sub is None
                or sub.team != team
                or sub.challenge_id != challenge_id
                or not isinstance(sub.body, kind)
            ):
                return "unresolvable reference"
        if bundle.sarif_ref is not None:
            b = self._live_broadcasts.get(bundle.sarif_ref)
            if b is None or b.challenge_id != challenge_id:
                return "unresolvable reference"
        return None

    def finish(self) -> EventLog:
        """Advance to the end of the competition and return the frozen log.

        Events arrive in intake order; the frozen log is the canonical total
        order (time, then kind, then id), which a stable sort recovers.
        """
        self.advance_to(self.scenario.end_time)
        ordered = sorted(self._events, key=event_sort_key)
        return validate_log(EventLog(tuple(ordered)))


def run(scenario: Scenario, source: Iterable[tuple[Timestamp, dict[str, Any]]] = ()) -> EventLog:
    """Run a whole competition: dispatch the scenario timeline and interleave
    the submission stream in time order (ties keep the stream's order)."""
    arena = Arena(scenario)
    for when, payload in sorted(source, key=lambda item: item[0]):
        arena.accept_submission(payload, now=when)
    return arena.finish()


def adjudicate_log(log: EventLog) -> dict[str, ChallengeAdjudication]:
    """Adjudicate every challenge in a validated log, keyed by challenge id."""
    validate_log(log)
    tasks = {}
    broadcasts: dict[str, list] = {}
    submissions: dict[str, list[Submission]] = {}
    for event in log.events:
        if isinstance(event, Dispatch):
            tasks[event.task.id] = event.task
            broadcasts.setdefault(event.task.id, [])
            submissions.setdefault(event.task.id, [])
        elif isinstance(event, Broadcast):
            broadcasts[event.broadcast.challenge_id].append(event.broadcast)
        elif isinstance(event, Submit):
            submissions[event.submission.challenge_id].append(event.submission)
    return {
        task_id: adjudicate_challenge(tasks[task_id], broadcasts[task_id], submissions[task_id])
        for task_id in sorted(tasks)
    }


def log_teams(log: EventLog) -> list[str]:
    """Every team that shows up anywhere in the log, sorted."""
    teams = set()
    for event in log.events:
        if isinstance(event, Submit):
            teams.add(event.submission.team)
        elif isinstance(event, (SchemaError, ServerError)):
            teams.add(event.team)
    teams.discard("unknown")
    return sorted(teams)


def _challenge_totals(
    adj: ChallengeAdjudication, team: str
) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    task = adj.task
    zero = Fraction(0)

    def pov_award(sub_id: str) -> Fraction:
        sub = adj.submissions[sub_id]
        tau = time_decay(sub.time, task.open_time, task.deadline)
        return capability_points(Capability.POV, tau)

    def patch_award(sub_id: str) -> Fraction:
        sub = adj.submissions[sub_id]
        tau = time_decay(sub.time, task.open_time, task.deadline)
        return capability_points(Capability.PATCH, tau)

    def sarif_award(sub_id: str) -> Fraction:
        sub = adj.submissions[sub_id]
        fact = adj.sarif_facts[sub_id]
        broadcast = adj.broadcasts[fact.broadcast_id]
        tau = time_decay(sub.time, broadcast.broadcast_time, task.deadline)
        return capability_points(Capability.SARIF, tau)

    pov_total = sum(
        (
            pov_award(sub_id)
            for (t, _), sub_id in sorted(adj.scored_povs.items())
            if t == team
        ),
        zero,
    )
    patch_total = sum(
        (
            patch_award(sub_id)
            for sub_id, fact in sorted(adj.patch_facts.items())
            if fact.selected and adj.submissions[sub_id].team == team
        ),
        zero,
    )
    sarif_total = sum(
        (
            sarif_award(sub_id)
            for (t, _), sub_id in sorted(adj.scored_sarif.items())
            if t == team and adj.sarif_facts[sub_id].classification is Classification.ACCURATE
        ),
        zero,
    )

    bundle_total = zero
    for sub_id, bfact in sorted(adj.bundle_facts.items()):
        sub = adj.submissions[sub_id]
        if sub.team != team:
            continue
        bundle = bfact.bundle
        pov_pts = patch_pts = sarif_pts = None
        if bundle.pov_ref is not None:
            awarded = bundle.pov_ref in set(adj.scored_povs.values())
            pov_pts = pov_award(bundle.pov_ref) if awarded else zero
        if bundle.patch_ref is not None:
            fact = adj.patch_facts.get(bundle.patch_ref)
            patch_pts = patch_award(bundle.patch_ref) if fact is not None and fact.selected else zero
        if bundle.sarif_ref is not None:
            scored_id = adj.scored_sarif.get((team, bundle.sarif_ref))
            if (
                scored_id is not None
                and adj.sarif_facts[scored_id].classification is Classification.ACCURATE
            ):
                sarif_pts = sarif_award(scored_id)
            else:
                sarif_pts = zero
        bundle_total += bundle_points(pov_pts, patch_pts, sarif_pts, bfact.verdict.sign)
    return pov_total, patch_total, sarif_total, bundle_total


def finalize(log: EventLog) -> ScoringReport:
    """Replay a finished log: adjudicate, then score every (team, challenge).

    Deterministic: identical logs produce identical reports.
    """
    adjudications = adjudicate_log(log)
    teams = log_teams(log)
    scores: list[ChallengeScore] = []
    for challenge_id in sorted(adjudications):
        adj = adjudications[challenge_id]
        for team in teams:
            pov, patch, sarif, bundle = _challenge_totals(adj, team)
            am = accuracy_multiplier(*adj.team_counts(team))
            scores.append(
                challenge_score(team, challenge_id, pov, patch, sarif, bundle, am)
            )
    return ScoringReport(tuple(scores))


def report_to_dict(report: ScoringReport) -> dict[str, Any]:
    """Canonical report document; every score rendered exactly."""
    teams: dict[str, Any] = {}
    for score in report.challenge_scores:
        entry = teams.setdefault(score.team, {"challenges": {}, "total": None})
        entry["challenges"][score.challenge] = {
            "pov": canon_number(score.pov_total),
            "patch": canon_number(score.patch_total),
            "sarif": canon_number(score.sarif_total),
            "bundle": canon_number(score.bundle_total),
            "am": canon_number(score.am),
            "final": canon_number(score.final),
        }
    for team, total in report.team_totals().items():
        teams[team]["total"] = canon_number(total)
    return {"schema_version": 1, "teams": teams}


def report_to_bytes(report: ScoringReport) -> bytes:
    return (
        json.dumps(report_to_dict(report), sort_keys=True, separators=(",", ":")) + "\n"
    ).encode("utf-8")
