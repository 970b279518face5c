"""Event-log file format: newline-delimited JSON.

Line 1 is a header ``{"schema_version": 1}``; every following line is one
self-describing event object with a ``"kind"`` field. Set-valued fields are
serialized sorted, so serialization is canonical: ``serialize_log`` output is
byte-identical for equal logs and round-trips exactly through ``parse_log``.
"""

from __future__ import annotations

import json
from typing import Any

from .model import (
    ArenaError,
    Broadcast,
    Bundle,
    ChallengeTask,
    CpvGroundTruth,
    Dispatch,
    Event,
    EventLog,
    Language,
    Mode,
    Patch,
    PatchEffect,
    Pov,
    SarifAssessment,
    SarifBroadcast,
    SchemaError,
    ServerError,
    Submission,
    Submit,
    Verdict,
)

SCHEMA_VERSION = 1


class ParseError(ArenaError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


def _dump(obj: dict[str, Any]) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def broadcast_to_dict(b: SarifBroadcast) -> dict[str, Any]:
    return {
        "id": b.id,
        "challenge_id": b.challenge_id,
        "broadcast_time": b.broadcast_time,
        "claimed_location": b.claimed_location,
        "valid_cpv": b.valid_cpv,
    }


def task_to_dict(task: ChallengeTask) -> dict[str, Any]:
    return {
        "id": task.id,
        "project": task.project,
        "language": task.language.value,
        "mode": task.mode.value,
        "open_time": task.open_time,
        "deadline": task.deadline,
        "harnesses": list(task.harnesses),
        "delta_ref": task.delta_ref,
        "cpvs": [
            {
                "id": c.id,
                "trigger_signatures": sorted(c.trigger_signatures),
                "sanitizer": c.sanitizer,
                "organizer_povs": sorted(c.organizer_povs),
            }
            for c in task.cpvs
        ],
        "sarif_broadcasts": [broadcast_to_dict(b) for b in task.sarif_broadcasts],
    }


def body_to_dict(body: Pov | Patch | SarifAssessment | Bundle) -> dict[str, Any]:
    if isinstance(body, Pov):
        return {"type": "pov", "harness": body.harness, "payload_signature": body.payload_signature}
    if isinstance(body, Patch):
        eff = body.effect
        return {
            "type": "patch",
            "effect": {
                "applies": eff.applies,
                "builds": eff.builds,
                "remediated_signatures": sorted(eff.remediated_signatures),
                "functional_pass": eff.functional_pass,
            },
        }
    if isinstance(body, SarifAssessment):
        return {"type": "sarif", "broadcast_id": body.broadcast_id, "verdict": body.verdict.value}
    return {
        "type": "bundle",
        "pov_ref": body.pov_ref,
        "patch_ref": body.patch_ref,
        "sarif_ref": body.sarif_ref,
    }


def submission_to_dict(sub: Submission) -> dict[str, Any]:
    return {
        "id": sub.id,
        "team": sub.team,
        "challenge_id": sub.challenge_id,
        "time": sub.time,
        "body": body_to_dict(sub.body),
    }


def event_to_dict(event: Event) -> dict[str, Any]:
    if isinstance(event, Dispatch):
        return {"kind": "dispatch", "task": task_to_dict(event.task)}
    if isinstance(event, Broadcast):
        return {"kind": "broadcast", "broadcast": broadcast_to_dict(event.broadcast)}
    if isinstance(event, Submit):
        return {"kind": "submit", "submission": submission_to_dict(event.submission)}
    kind = "schema_error" if isinstance(event, SchemaError) else "server_error"
    return {"kind": kind, "team": event.team, "time": event.time}


def serialize_log(log: EventLog) -> bytes:
    lines = [_dump({"schema_version": SCHEMA_VERSION})]
    lines.extend(_dump(event_to_dict(e)) for e in log.events)
    return ("\n".join(lines) + "\n").encode("utf-8")


def _require(d: dict[str, Any], key: str, line: int) -> Any:
    if key not in d:
        raise ParseError(line, f"missing field {key!r}")
    return d[key]


def _enum(cls: Any, raw: Any, line: int, what: str) -> Any:
    try:
        return cls(raw)
    except ValueError:
        raise ParseError(line, f"unknown {what} {raw!r}") from None


def broadcast_from_dict(d: dict[str, Any], line: int) -> SarifBroadcast:
    return SarifBroadcast(
        id=_require(d, "id", line),
        challenge_id=_require(d, "challenge_id", line),
        broadcast_time=float(_require(d, "broadcast_time", line)),
        claimed_location=d.get("claimed_location", ""),
        valid_cpv=d.get("valid_cpv"),
    )


def task_from_dict(d: dict[str, Any], line: int) -> ChallengeTask:
    cpvs = tuple(
        CpvGroundTruth(
            id=_require(c, "id", line),
            trigger_signatures=frozenset(_require(c, "trigger_signatures", line)),
            sanitizer=c.get("sanitizer", ""),
            organizer_povs=frozenset(c.get("organizer_povs", ())),
        )
        for c in _require(d, "cpvs", line)
    )
    return ChallengeTask(
        id=_require(d, "id", line),
        project=_require(d, "project", line),
        language=_enum(Language, _require(d, "language", line), line, "language"),
        mode=_enum(Mode, _require(d, "mode", line), line, "mode"),
        open_time=float(_require(d, "open_time", line)),
        deadline=float(_require(d, "deadline", line)),
        harnesses=tuple(_require(d, "harnesses", line)),
        cpvs=cpvs,
        sarif_broadcasts=tuple(
            broadcast_from_dict(b, line) for b in d.get("sarif_broadcasts", ())
        ),
        delta_ref=d.get("delta_ref"),
    )


def body_from_dict(d: dict[str, Any], line: int) -> Pov | Patch | SarifAssessment | Bundle:
    btype = _require(d, "type", line)
    if btype == "pov":
        return Pov(
            harness=_require(d, "harness", line),
            payload_signature=_require(d, "payload_signature", line),
        )
    if btype == "patch":
        eff = _require(d, "effect", line)
        return Patch(
            PatchEffect(
                applies=bool(_require(eff, "applies", line)),
                builds=bool(_require(eff, "builds", line)),
                remediated_signatures=frozenset(_require(eff, "remediated_signatures", line)),
                functional_pass=bool(_require(eff, "functional_pass", line)),
            )
        )
    if btype == "sarif":
        return SarifAssessment(
            broadcast_id=_require(d, "broadcast_id", line),
            verdict=_enum(Verdict, _require(d, "verdict", line), line, "verdict"),
        )
    if btype == "bundle":
        return Bundle(
            pov_ref=d.get("pov_ref"),
            patch_ref=d.get("patch_ref"),
            sarif_ref=d.get("sarif_ref"),
        )
    raise ParseError(line, f"unknown submission type {btype!r}")


def submission_from_dict(d: dict[str, Any], line: int) -> Submission:
    return Submission(
        id=_require(d, "id", line),
        team=_require(d, "team", line),
        challenge_id=_require(d, "challenge_id", line),
        time=float(_require(d, "time", line)),
        body=body_from_dict(_require(d, "body", line), line),
    )


def event_from_dict(d: dict[str, Any], line: int) -> Event:
    kind = _require(d, "kind", line)
    if kind == "dispatch":
        return Dispatch(task_from_dict(_require(d, "task", line), line))
    if kind == "broadcast":
        return Broadcast(broadcast_from_dict(_require(d, "broadcast", line), line))
    if kind == "submit":
        return Submit(submission_from_dict(_require(d, "submission", line), line))
    if kind == "schema_error":
        return SchemaError(team=_require(d, "team", line), time=float(_require(d, "time", line)))
    if kind == "server_error":
        return ServerError(team=_require(d, "team", line), time=float(_require(d, "time", line)))
    raise ParseError(line, f"unknown event kind {kind!r}")


def parse_log(data: bytes) -> EventLog:
    """Parse a serialized event log; empty input parses as an empty log."""
    text = data.decode("utf-8")
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines:
        return EventLog()
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(1, f"invalid JSON: {exc.msg}") from None
    if not isinstance(header, dict) or "schema_version" not in header:
        raise ParseError(1, "missing schema_version header")
    if header["schema_version"] != SCHEMA_VERSION:
        raise ParseError(1, f"unsupported schema_version {header['schema_version']!r}")
    events: list[Event] = []
    for line_no, raw in enumerate(lines[1:], start=2):
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(line_no, f"invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise ParseError(line_no, "event record must be a JSON object")
        try:
            events.append(event_from_dict(obj, line_no))
        except (TypeError, ValueError) as exc:
            raise ParseError(line_no, str(exc)) from None
    return EventLog(tuple(events))


def read_log(path: str) -> EventLog:
    with open(path, "rb") as fh:
        return parse_log(fh.read())


def write_log(path: str, log: EventLog) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_log(log))
