"""Core entities of the competition.

Everything downstream (adjudication, scoring, simulation, analytics) works
over the immutable types defined here: challenge tasks with their ground-truth
vulnerabilities, static-analysis broadcasts, the four submission kinds, and
the append-only event log that is the sole input to replay scoring.

All types are frozen dataclasses; they are safe to share across threads.
Structural validation lives in :func:`validate_log` rather than in
``__post_init__`` so that malformed inputs surface as structured errors with
event indices instead of construction-time exceptions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

# Seconds since the competition epoch.
Timestamp = float

# Analysis window widths per task mode.
FULL_WINDOW = 43200.0   # 12 h
DELTA_WINDOW = 21600.0  # 6 h


class Mode(enum.Enum):
    FULL = "full"
    DELTA = "delta"


class Language(enum.Enum):
    C = "c"
    JAVA = "java"


class Verdict(enum.Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"


class ArenaError(Exception):
    """Base class for all structured errors raised by this package."""


def deadline_for(mode: Mode, open_time: Timestamp) -> Timestamp:
    """Deadline of an analysis window: open + 12 h (full) or 6 h (delta)."""
    if not math.isfinite(open_time):
        raise ValueError(f"open_time must be finite, got {open_time!r}")
    width = FULL_WINDOW if mode is Mode.FULL else DELTA_WINDOW
    return open_time + width


@dataclass(frozen=True)
class CpvGroundTruth:
    """One injected vulnerability: the oracle's view of what triggers it.

    ``trigger_signatures`` are the crash signatures that count as reproducing
    this vulnerability; ``organizer_povs`` are reference payload signatures
    the organizer holds for patch validation.
    """

    id: str
    trigger_signatures: frozenset[str]
    sanitizer: str = ""
    organizer_povs: frozenset[str] = frozenset()


@dataclass(frozen=True)
class SarifBroadcast:
    """A static-analysis report broadcast for teams to assess.

    ``valid_cpv`` is the ground truth: the vulnerability id the report
    describes, or ``None`` when the report is a false positive.
    """

    id: str
    challenge_id: str
    broadcast_time: Timestamp
    claimed_location: str = ""
    valid_cpv: str | None = None


@dataclass(frozen=True)
class ChallengeTask:
    """One dispatched analysis window over a challenge project."""

    id: str
    project: str
    language: Language
    mode: Mode
    open_time: Timestamp
    deadline: Timestamp
    harnesses: tuple[str, ...]
    cpvs: tuple[CpvGroundTruth, ...] = ()
    sarif_broadcasts: tuple[SarifBroadcast, ...] = ()
    delta_ref: str | None = None

    def cpv(self, cpv_id: str) -> CpvGroundTruth:
        for c in self.cpvs:
            if c.id == cpv_id:
                return c
        raise KeyError(cpv_id)


@dataclass(frozen=True)
class Pov:
    harness: str
    payload_signature: str


@dataclass(frozen=True)
class PatchEffect:
    """Declared outcome of applying a patch, judged by the oracle.

    Real builds are out of scope; a patch states which crash signatures it
    remediates and whether it applies, builds, and passes functional tests.
    """

    applies: bool
    builds: bool
    remediated_signatures: frozenset[str]
    functional_pass: bool


@dataclass(frozen=True)
class Patch:
    effect: PatchEffect


@dataclass(frozen=True)
class SarifAssessment:
    broadcast_id: str
    verdict: Verdict


@dataclass(frozen=True)
class Bundle:
    """Links findings for one vulnerability; at least two refs must be set."""

    pov_ref: str | None = None
    patch_ref: str | None = None
    sarif_ref: str | None = None  # references a broadcast, not a submission

    def present_refs(self) -> int:
        return sum(r is not None for r in (self.pov_ref, self.patch_ref, self.sarif_ref))


Body = Pov | Patch | SarifAssessment | Bundle


@dataclass(frozen=True)
class Submission:
    id: str
    team: str
    challenge_id: str
    time: Timestamp
    body: Body


@dataclass(frozen=True)
class Dispatch:
    task: ChallengeTask


@dataclass(frozen=True)
class Broadcast:
    broadcast: SarifBroadcast


@dataclass(frozen=True)
class Submit:
    submission: Submission


@dataclass(frozen=True)
class SchemaError:
    team: str
    time: Timestamp


@dataclass(frozen=True)
class ServerError:
    team: str
    time: Timestamp


Event = Dispatch | Broadcast | Submit | SchemaError | ServerError


@dataclass(frozen=True)
class EventLog:
    """Append-only, totally ordered record of everything that happened."""

    events: tuple[Event, ...] = ()


def event_time(event: Event) -> Timestamp:
    if isinstance(event, Dispatch):
        return event.task.open_time
    if isinstance(event, Broadcast):
        return event.broadcast.broadcast_time
    if isinstance(event, Submit):
        return event.submission.time
    return event.time


# Equal-timestamp events order by kind, then by id; replay must be
# deterministic even though real telemetry is not.
_KIND_RANK = {Dispatch: 0, Broadcast: 1, Submit: 2, SchemaError: 3, ServerError: 3}


def event_sort_key(event: Event) -> tuple[Timestamp, int, str]:
    if isinstance(event, Dispatch):
        ident = event.task.id
    elif isinstance(event, Broadcast):
        ident = event.broadcast.id
    elif isinstance(event, Submit):
        ident = event.submission.id
    else:
        ident = event.team
    return (event_time(event), _KIND_RANK[type(event)], ident)


class LogInvalid(ArenaError):
    """Base class for event-log invariant violations."""


class OutOfOrder(LogInvalid):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"event {index} breaks the total order")


class UnknownChallenge(LogInvalid):
    def __init__(self, ref_id: str):
        self.ref_id = ref_id
        super().__init__(f"{ref_id!r} references a challenge that was never dispatched")


class MalformedEvent(LogInvalid):
    def __init__(self, index: int, reason: str):
        self.index = index
        self.reason = reason
        super().__init__(f"event {index}: {reason}")


def _check_task(task: ChallengeTask) -> str | None:
    """Return a reason string if the task violates its invariants."""
    for t in (task.open_time, task.deadline):
        if not (math.isfinite(t) and t >= 0):
            return f"task {task.id!r} has a non-finite or negative timestamp"
    width = FULL_WINDOW if task.mode is Mode.FULL else DELTA_WINDOW
    if task.deadline - task.open_time != width:
        return (
            f"task {task.id!r} window is {task.deadline - task.open_time}s, "
            f"expected {width}s for {task.mode.value} mode"
        )
    if task.mode is Mode.DELTA and task.delta_ref is None:
        return f"delta task {task.id!r} is missing delta_ref"
    if task.mode is Mode.FULL and task.delta_ref is not None:
        return f"full task {task.id!r} must not carry delta_ref"
    seen_ids: set[str] = set()
    seen_sigs: set[str] = set()
    for cpv in task.cpvs:
        if cpv.id in seen_ids:
            return f"task {task.id!r} repeats cpv id {cpv.id!r}"
        seen_ids.add(cpv.id)
        if not cpv.trigger_signatures:
            return f"cpv {cpv.id!r} has no trigger signatures"
        overlap = seen_sigs & cpv.trigger_signatures
        if overlap:
            return f"trigger signature {sorted(overlap)[0]!r} appears in two cpvs of task {task.id!r}"
        seen_sigs |= cpv.trigger_signatures
    return None


def _check_submission(sub: Submission) -> str | None:
    if not (math.isfinite(sub.time) and sub.time >= 0):
        return f"submission {sub.id!r} has a non-finite or negative timestamp"
    body = sub.body
    if isinstance(body, Bundle) and body.present_refs() < 2:
        return f"bundle {sub.id!r} must reference at least two findings"
    if isinstance(body, Patch):
        eff = body.effect
        if not eff.applies and eff.builds:
            return f"patch {sub.id!r} claims to build without applying"
    return None


def validate_log(log: EventLog) -> EventLog:
    """Check every event-log invariant; return the log unchanged if they hold.

    Raises :class:`OutOfOrder` at the first ordering violation,
    :class:`UnknownChallenge` for submissions or broadcasts that reference a
    task not dispatched earlier in the log, and :class:`MalformedEvent` for
    structurally invalid events.
    """
    tasks: dict[str, ChallengeTask] = {}
    broadcast_ids: set[str] = set()
    submission_ids: set[str] = set()
    prev_key: tuple[Timestamp, int, str] | None = None
    for i, event in enumerate(log.events):
        t = event_time(event)
        if not (math.isfinite(t) and t >= 0):
            raise MalformedEvent(i, "non-finite or negative timestamp")
        key = event_sort_key(event)
        if prev_key is not None and key < prev_key:
            raise OutOfOrder(i)
        prev_key = key
        if isinstance(event, Dispatch):
            task = event.task
            if task.id in tasks:
                raise MalformedEvent(i, f"task {task.id!r} dispatched twice")
            reason = _check_task(task)
            if reason is not None:
                raise MalformedEvent(i, reason)
            tasks[task.id] = task
        elif isinstance(event, Broadcast):
            b = event.broadcast
            if b.id in broadcast_ids:
                raise MalformedEvent(i, f"broadcast {b.id!r} emitted twice")
            broadcast_ids.add(b.id)
            task = tasks.get(b.challenge_id)
            if task is None:
                raise UnknownChallenge(b.id)
            if not (task.open_time <= b.broadcast_time <= task.deadline):
                raise MalformedEvent(i, f"broadcast {b.id!r} falls outside its task window")
        elif isinstance(event, Submit):
            sub = event.submission
            if sub.id in submission_ids:
                raise MalformedEvent(i, f"submission id {sub.id!r} reused")
            submission_ids.add(sub.id)
            if sub.challenge_id not in tasks:
                raise UnknownChallenge(sub.id)
            reason = _check_submission(sub)
            if reason is not None:
                raise MalformedEvent(i, reason)
    return log
