"""Scenario files: the timeline a competition run replays.

A scenario is a JSON document listing phases, each with its start time, the
tasks released in it, and the static-analysis broadcasts scheduled during it.
Task deadlines are derived from the mode (12 h full, 6 h delta); a scenario
may state them explicitly, in which case they must match.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

from .model import (
    ArenaError,
    ChallengeTask,
    CpvGroundTruth,
    Language,
    Mode,
    SarifBroadcast,
    _check_task,
    deadline_for,
)


class ScenarioInvalid(ArenaError):
    pass


@dataclass(frozen=True)
class Phase:
    phase_id: str
    start: float
    tasks: tuple[ChallengeTask, ...]
    broadcasts: tuple[SarifBroadcast, ...]


@dataclass(frozen=True)
class Scenario:
    name: str
    teams: tuple[str, ...]
    end_time: float
    phases: tuple[Phase, ...]

    def tasks(self) -> list[ChallengeTask]:
        return [t for p in self.phases for t in p.tasks]

    def broadcasts(self) -> list[SarifBroadcast]:
        return [b for p in self.phases for b in p.broadcasts]

    def task(self, task_id: str) -> ChallengeTask:
        for t in self.tasks():
            if t.id == task_id:
                return t
        raise KeyError(task_id)


def _task_from_dict(d: dict[str, Any]) -> ChallengeTask:
    try:
        mode = Mode(d["mode"])
        language = Language(d["language"])
        open_time = float(d["open_time"])
        deadline = deadline_for(mode, open_time)
        if "deadline" in d and float(d["deadline"]) != deadline:
            raise ScenarioInvalid(
                f"task {d.get('id')!r} states deadline {d['deadline']}, "
                f"expected {deadline} for {mode.value} mode"
            )
        cpvs = tuple(
            CpvGroundTruth(
                id=c["id"],
                trigger_signatures=frozenset(c["trigger_signatures"]),
                sanitizer=c.get("sanitizer", ""),
                organizer_povs=frozenset(c.get("organizer_povs", ())),
            )
            for c in d.get("cpvs", ())
        )
        return ChallengeTask(
            id=d["id"],
            project=d["project"],
            language=language,
            mode=mode,
            open_time=open_time,
            deadline=deadline,
            harnesses=tuple(d.get("harnesses", ())),
            cpvs=cpvs,
            delta_ref=d.get("delta_ref"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioInvalid(f"bad task record: {exc}") from None


def _broadcast_from_dict(d: dict[str, Any]) -> SarifBroadcast:
    try:
        return SarifBroadcast(
            id=d["id"],
            challenge_id=d["challenge_id"],
            broadcast_time=float(d["broadcast_time"]),
            claimed_location=d.get("claimed_location", ""),
            valid_cpv=d.get("valid_cpv"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioInvalid(f"bad broadcast record: {exc}") from None


def scenario_from_dict(d: dict[str, Any]) -> Scenario:
    try:
        name = d["name"]
        teams = tuple(d["teams"])
        end_time = float(d["end_time"])
        raw_phases = d["phases"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioInvalid(f"bad scenario document: {exc}") from None
    if len(set(teams)) != len(teams):
        raise ScenarioInvalid("team ids must be unique")

    phases: list[Phase] = []
    task_by_id: dict[str, ChallengeTask] = {}
    broadcast_ids: set[str] = set()
    prev_start: float | None = None
    for p in raw_phases:
        try:
            phase_id = p["phase_id"]
            start = float(p["start"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioInvalid(f"bad phase record: {exc}") from None
        if prev_start is not None and start <= prev_start:
            raise ScenarioInvalid(f"phase {phase_id!r} does not start after the previous phase")
        prev_start = start
        tasks = tuple(_task_from_dict(t) for t in p.get("tasks", ()))
        broadcasts = tuple(_broadcast_from_dict(b) for b in p.get("broadcasts", ()))
        for task in tasks:
            if task.id in task_by_id:
                raise ScenarioInvalid(f"task {task.id!r} appears twice")
            reason = _check_task(task)
            if reason is not None:
                raise ScenarioInvalid(reason)
            if task.open_time < start:
                raise ScenarioInvalid(f"task {task.id!r} opens before its phase")
            if task.deadline > end_time:
                raise ScenarioInvalid(f"task {task.id!r} deadline exceeds end_time")
            task_by_id[task.id] = task
        phases.append(Phase(phase_id, start, tasks, broadcasts))

    # Attach broadcasts to their tasks and check their windows.
    for i, phase in enumerate(phases):
        attached: dict[str, list[SarifBroadcast]] = {}
        for b in phase.broadcasts:
            if b.id in broadcast_ids:
                raise ScenarioInvalid(f"broadcast {b.id!r} appears twice")
            broadcast_ids.add(b.id)
            task = task_by_id.get(b.challenge_id)
            if task is None:
                raise ScenarioInvalid(f"broadcast {b.id!r} references unknown task")
            if not (task.open_time <= b.broadcast_time <= task.deadline):
                raise ScenarioInvalid(f"broadcast {b.id!r} falls outside its task window")
            if b.valid_cpv is not None and b.valid_cpv not in {c.id for c in task.cpvs}:
                raise ScenarioInvalid(f"broadcast {b.id!r} references unknown cpv")
            attached.setdefault(task.id, []).append(b)
        if attached:
            phases[i] = Phase(
                phase.phase_id,
                phase.start,
                tuple(
                    t if t.id not in attached
                    else ChallengeTask(
                        id=t.id,
                        project=t.project,
                        language=t.language,
                        mode=t.mode,
                        open_time=t.open_time,
                        deadline=t.deadline,
                        harnesses=t.harnesses,
                        cpvs=t.cpvs,
                        sarif_broadcasts=tuple(attached[t.id]),
                        delta_ref=t.delta_ref,
                    )
                    for t in phase.tasks
                ),
                phase.broadcasts,
            )
    return Scenario(name=name, teams=teams, end_time=end_time, phases=tuple(phases))


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioInvalid(f"invalid JSON: {exc}") from None
    return scenario_from_dict(doc)
