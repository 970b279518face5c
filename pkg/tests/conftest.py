from __future__ import annotations

import pytest

from arena.model import (
    ChallengeTask,
    CpvGroundTruth,
    Language,
    Mode,
    SarifBroadcast,
    deadline_for,
)


def make_task(
    task_id: str = "c1",
    mode: Mode = Mode.FULL,
    language: Language = Language.C,
    open_time: float = 0.0,
    cpvs: tuple[CpvGroundTruth, ...] = (),
    harnesses: tuple[str, ...] = ("h1",),
    broadcasts: tuple[SarifBroadcast, ...] = (),
) -> ChallengeTask:
    return ChallengeTask(
        id=task_id,
        project="proj",
        language=language,
        mode=mode,
        open_time=open_time,
        deadline=deadline_for(mode, open_time),
        harnesses=harnesses,
        cpvs=cpvs,
        sarif_broadcasts=broadcasts,
        delta_ref="d0" if mode is Mode.DELTA else None,
    )


def make_cpv(
    cpv_id: str = "v1",
    sigs: tuple[str, ...] = ("sig-v1",),
    organizer: tuple[str, ...] = (),
) -> CpvGroundTruth:
    return CpvGroundTruth(
        id=cpv_id,
        trigger_signatures=frozenset(sigs),
        sanitizer="asan",
        organizer_povs=frozenset(organizer),
    )


@pytest.fixture
def task_two_cpvs() -> ChallengeTask:
    return make_task(
        cpvs=(
            make_cpv("v1", ("sig-v1-a", "sig-v1-b"), organizer=("org-v1",)),
            make_cpv("v2", ("sig-v2",), organizer=("org-v2",)),
        )
    )
