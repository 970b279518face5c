"""Desk-scale competition arena for autonomous vulnerability-analysis agents.

The package splits into:

* :mod:`arena.model` / :mod:`arena.logio` -- domain entities and the
  append-only event-log file format,
* :mod:`arena.judge` / :mod:`arena.cover` -- organizer-side adjudication,
* :mod:`arena.scoring` -- the scoring formulas (exact rational arithmetic),
* :mod:`arena.scenario` / :mod:`arena.orchestrator` / :mod:`arena.service`
  -- timeline dispatch, submission intake, and final scoring,
* :mod:`arena.sim` -- strategy agents generating submission streams,
* :mod:`arena.analyze` / :mod:`arena.render` -- replay analytics and file
  outputs,
* :mod:`arena.cli` -- the ``arena`` command line.
"""

from .model import (
    Broadcast,
    Bundle,
    ChallengeTask,
    CpvGroundTruth,
    Dispatch,
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
    deadline_for,
    validate_log,
)
from .logio import parse_log, read_log, serialize_log, write_log
from .scenario import Scenario, load_scenario, scenario_from_dict
from .orchestrator import Arena, Receipt, finalize, report_to_bytes, run
from .scoring import (
    Capability,
    ChallengeScore,
    ScoringReport,
    accuracy_multiplier,
    bundle_points,
    capability_points,
    challenge_score,
    team_score,
    time_decay,
)

__all__ = [
    "Arena",
    "Broadcast",
    "Bundle",
    "Capability",
    "ChallengeScore",
    "ChallengeTask",
    "CpvGroundTruth",
    "Dispatch",
    "EventLog",
    "Language",
    "Mode",
    "Patch",
    "PatchEffect",
    "Pov",
    "Receipt",
    "SarifAssessment",
    "SarifBroadcast",
    "Scenario",
    "SchemaError",
    "ScoringReport",
    "ServerError",
    "Submission",
    "Submit",
    "Verdict",
    "accuracy_multiplier",
    "bundle_points",
    "capability_points",
    "challenge_score",
    "deadline_for",
    "finalize",
    "load_scenario",
    "parse_log",
    "read_log",
    "report_to_bytes",
    "run",
    "scenario_from_dict",
    "serialize_log",
    "team_score",
    "time_decay",
    "validate_log",
    "write_log",
]
