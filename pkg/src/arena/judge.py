"""Organizer-side adjudication: judging submissions against ground truth.

The pipeline for one challenge runs in a fixed order because later stages
depend on earlier ones:

1. judge each PoV (reproduced / duplicate / not reproduced),
2. pool every reproducing signature across teams plus the organizer's own,
3. judge each patch against the pool,
4. per team, select the minimal covering patch set; only selected patches
   are accurate,
5. judge assessment histories per broadcast (last one is scored),
6. judge bundles (all claimed pairings must be correct).

Everything here is a pure function of the inputs; classifications feed the
accuracy multiplier and the capability scores downstream.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .cover import PatchCandidate, select_minimal_patch_set
from .model import (
    ArenaError,
    Bundle,
    ChallengeTask,
    Patch,
    PatchEffect,
    Pov,
    SarifAssessment,
    SarifBroadcast,
    Submission,
    Verdict,
)


class Classification(enum.Enum):
    ACCURATE = "accurate"
    INACCURATE = "inaccurate"
    NEUTRAL = "neutral"


class PovOutcome(enum.Enum):
    REPRODUCED = "reproduced"
    DUPLICATE = "duplicate"
    NOT_REPRODUCED = "not_reproduced"


class PatchStage(enum.Enum):
    # Failed to apply, build, or remediate any pooled PoV.
    FAILED = "failed_apply_build_or_remediate"
    FUNCTIONAL_FAIL = "functional_fail"
    PASSING = "passing"


class UnknownHarness(ArenaError):
    pass


class UnknownBroadcast(ArenaError):
    pass


class DanglingReference(ArenaError):
    pass


@dataclass(frozen=True)
class PovVerdict:
    outcome: PovOutcome
    cpv_id: str | None
    classification: Classification


def judge_pov(
    sub: Submission, task: ChallengeTask, prior: set[tuple[str, str]]
) -> PovVerdict:
    """Judge one PoV: the first reproduction of a vulnerability by a team is
    accurate, later reproductions are neutral duplicates, and signatures that
    trigger nothing are inaccurate.

    ``prior`` holds (team, cpv) pairs already reproduced before this one.
    """
    body = sub.body
    assert isinstance(body, Pov)
    if body.harness not in task.harnesses:
        raise UnknownHarness(f"harness {body.harness!r} not in task {task.id!r}")
    for cpv in task.cpvs:
        if body.payload_signature in cpv.trigger_signatures:
            if (sub.team, cpv.id) in prior:
                return PovVerdict(PovOutcome.DUPLICATE, cpv.id, Classification.NEUTRAL)
            return PovVerdict(PovOutcome.REPRODUCED, cpv.id, Classification.ACCURATE)
    return PovVerdict(PovOutcome.NOT_REPRODUCED, None, Classification.INACCURATE)


def build_pov_pool(
    task: ChallengeTask, reproducing: Iterable[tuple[str, str]]
) -> dict[str, frozenset[str]]:
    """Validation pool per vulnerability: every reproducing signature any team
    submitted, plus the organizer's reference payloads.

    ``reproducing`` yields (cpv_id, payload_signature) pairs.
    """
    pool: dict[str, set[str]] = {c.id: set(c.organizer_povs) for c in task.cpvs}
    for cpv_id, signature in reproducing:
        pool[cpv_id].add(signature)
    return {cpv_id: frozenset(sigs) for cpv_id, sigs in pool.items()}


def judge_patch(
    effect: PatchEffect, pool: Mapping[str, frozenset[str]]
) -> tuple[PatchStage, frozenset[str]]:
    """Stage a patch against the pooled PoVs.

    A vulnerability counts as covered only when every pooled PoV for it is
    remediated; vulnerabilities with an empty pool are unvalidated and can
    never be covered.
    """
    all_pooled = frozenset().union(*pool.values()) if pool else frozenset()
    if not effect.applies or not effect.builds:
        return PatchStage.FAILED, frozenset()
    if not effect.remediated_signatures & all_pooled:
        return PatchStage.FAILED, frozenset()
    if not effect.functional_pass:
        return PatchStage.FUNCTIONAL_FAIL, frozenset()
    covered = frozenset(
        cpv_id
        for cpv_id, sigs in pool.items()
        if sigs and sigs <= effect.remediated_signatures
    )
    return PatchStage.PASSING, covered


@dataclass(frozen=True)
class SarifJudgment:
    classifications: tuple[Classification, ...]
    scored_index: int | None  # index into the history; None when empty


def judge_sarif(
    history: Sequence[Submission], broadcast: SarifBroadcast
) -> SarifJudgment:
    """Judge one team's assessment history for one broadcast.

    Only the last submission is scored, but every submission keeps its own
    classification: revising a verdict costs time and accuracy.
    """
    classifications = []
    for sub in history:
        body = sub.body
        assert isinstance(body, SarifAssessment)
        if body.broadcast_id != broadcast.id:
            raise UnknownBroadcast(
                f"assessment {sub.id!r} judged against broadcast {broadcast.id!r}"
            )
        claims_valid = body.verdict is Verdict.CORRECT
        is_valid = broadcast.valid_cpv is not None
        match = claims_valid == is_valid
        classifications.append(
            Classification.ACCURATE if match else Classification.INACCURATE
        )
    scored = len(history) - 1 if history else None
    return SarifJudgment(tuple(classifications), scored)


@dataclass(frozen=True)
class BundleVerdict:
    correct_pairings: int
    sign: int
    classification: Classification


def judge_bundle(
    pov_cpvs: frozenset[str] | None,
    patch_cpvs: frozenset[str] | None,
    sarif_cpvs: frozenset[str] | None,
) -> BundleVerdict:
    """Judge one bundle from the vulnerabilities each linked finding concerns.

    Each argument is ``None`` when the bundle omits that finding, otherwise
    the set of vulnerabilities the finding actually addresses per ground
    truth (empty when it addresses none). A pairing is correct when its two
    endpoints share a vulnerability; the bundle is positive only when every
    claimed pairing is correct.
    """
    endpoints = [e for e in (pov_cpvs, patch_cpvs, sarif_cpvs) if e is not None]
    if len(endpoints) < 2:
        raise DanglingReference("bundle resolves to fewer than two findings")
    pairs = [
        (a, b)
        for i, a in enumerate(endpoints)
        for b in endpoints[i + 1 :]
    ]
    correct = sum(1 for a, b in pairs if a & b)
    sign = 1 if correct == len(pairs) else -1
    classification = Classification.ACCURATE if sign == 1 else Classification.INACCURATE
    return BundleVerdict(correct, sign, classification)


@dataclass(frozen=True)
class PatchFact:
    stage: PatchStage
    covered: frozenset[str]
    classification: Classification
    selected: bool


@dataclass(frozen=True)
class SarifFact:
    broadcast_id: str
    classification: Classification
    scored: bool


@dataclass(frozen=True)
class BundleFact:
    verdict: BundleVerdict
    bundle: Bundle


@dataclass
class ChallengeAdjudication:
    """Every verdict for one challenge, keyed by submission id."""

    task: ChallengeTask
    broadcasts: dict[str, SarifBroadcast]
    submissions: dict[str, Submission] = field(default_factory=dict)
    pov_verdicts: dict[str, PovVerdict] = field(default_factory=dict)
    scored_povs: dict[tuple[str, str], str] = field(default_factory=dict)
    pool: dict[str, frozenset[str]] = field(default_factory=dict)
    patch_facts: dict[str, PatchFact] = field(default_factory=dict)
    selection_method: dict[str, str] = field(default_factory=dict)
    sarif_facts: dict[str, SarifFact] = field(default_factory=dict)
    scored_sarif: dict[tuple[str, str], str] = field(default_factory=dict)
    bundle_facts: dict[str, BundleFact] = field(default_factory=dict)
    superseded_bundles: set[str] = field(default_factory=set)
    late: set[str] = field(default_factory=set)

    def classification_of(self, sub_id: str) -> Classification | None:
        """Classification of a counted submission, ``None`` if not counted."""
        if sub_id in self.pov_verdicts:
            return self.pov_verdicts[sub_id].classification
        if sub_id in self.patch_facts:
            return self.patch_facts[sub_id].classification
        if sub_id in self.sarif_facts:
            return self.sarif_facts[sub_id].classification
        if sub_id in self.bundle_facts:
            return self.bundle_facts[sub_id].verdict.classification
        return None

    def team_counts(self, team: str) -> tuple[int, int]:
        """(accurate, inaccurate) counts feeding the accuracy multiplier."""
        accurate = inaccurate = 0
        for sub_id, sub in self.submissions.items():
            if sub.team != team:
                continue
            cls = self.classification_of(sub_id)
            if cls is Classification.ACCURATE:
                accurate += 1
            elif cls is Classification.INACCURATE:
                inaccurate += 1
        return accurate, inaccurate


def _bundle_anchor(bundle: Bundle) -> str:
    for ref in (bundle.pov_ref, bundle.patch_ref, bundle.sarif_ref):
        if ref is not None:
            return ref
    raise DanglingReference("bundle has no references")


def adjudicate_challenge(
    task: ChallengeTask,
    broadcasts: Sequence[SarifBroadcast],
    submissions: Sequence[Submission],
) -> ChallengeAdjudication:
    """Run the full adjudication pipeline for one challenge.

    ``submissions`` must be in log order. Submissions past the deadline are
    not counted (they receive no classification at all); bundles superseded
    by a later bundle for the same anchor finding are free updates and are
    likewise not counted.
    """
    adj = ChallengeAdjudication(task=task, broadcasts={b.id: b for b in broadcasts})
    counted: list[Submission] = []
    for sub in submissions:
        adj.submissions[sub.id] = sub
        if sub.time > task.deadline:
            adj.late.add(sub.id)
        else:
            counted.append(sub)

    # 1. PoVs, in submission order so the first reproduction wins.
    prior: set[tuple[str, str]] = set()
    reproducing: list[tuple[str, str]] = []
    for sub in counted:
        if not isinstance(sub.body, Pov):
            continue
        verdict = judge_pov(sub, task, prior)
        adj.pov_verdicts[sub.id] = verdict
        if verdict.outcome is PovOutcome.REPRODUCED:
            prior.add((sub.team, verdict.cpv_id))
            adj.scored_povs[(sub.team, verdict.cpv_id)] = sub.id
        if verdict.cpv_id is not None:
            reproducing.append((verdict.cpv_id, sub.body.payload_signature))

    # 2. Cross-team validation pool.
    adj.pool = build_pov_pool(task, reproducing)

    # 3. Patch staging against the pool.
    staged: dict[str, tuple[PatchStage, frozenset[str]]] = {}
    for sub in counted:
        if isinstance(sub.body, Patch):
            staged[sub.id] = judge_patch(sub.body.effect, adj.pool)

    # 4. Per-team minimal covering set; only selected patches are accurate.
    teams = sorted({adj.submissions[sid].team for sid in staged})
    for team in teams:
        candidates = [
            PatchCandidate(sid, covered, adj.submissions[sid].time)
            for sid, (stage, covered) in staged.items()
            if adj.submissions[sid].team == team and stage is PatchStage.PASSING and covered
        ]
        selection = select_minimal_patch_set(candidates)
        adj.selection_method[team] = selection.method
        for sid, (stage, covered) in staged.items():
            if adj.submissions[sid].team != team:
                continue
            if stage is PatchStage.FAILED:
                cls = Classification.INACCURATE
            elif stage is PatchStage.FUNCTIONAL_FAIL:
                cls = Classification.NEUTRAL
            elif sid in selection.selected:
                cls = Classification.ACCURATE
            else:
                # Passing but not credited: redundant or covering nothing.
                cls = Classification.INACCURATE
            adj.patch_facts[sid] = PatchFact(
                stage=stage,
                covered=covered,
                classification=cls,
                selected=sid in selection.selected,
            )

    # 5. Assessment histories, last submission scored.
    histories: dict[tuple[str, str], list[Submission]] = {}
    for sub in counted:
        if isinstance(sub.body, SarifAssessment):
            broadcast = adj.broadcasts.get(sub.body.broadcast_id)
            if broadcast is None:
                raise UnknownBroadcast(
                    f"assessment {sub.id!r} references unknown broadcast "
                    f"{sub.body.broadcast_id!r}"
                )
            histories.setdefault((sub.team, broadcast.id), []).append(sub)
    for (team, broadcast_id), history in histories.items():
        judgment = judge_sarif(history, adj.broadcasts[broadcast_id])
        for i, sub in enumerate(history):
            adj.sarif_facts[sub.id] = SarifFact(
                broadcast_id=broadcast_id,
                classification=judgment.classifications[i],
                scored=i == judgment.scored_index,
            )
        adj.scored_sarif[(team, broadcast_id)] = history[judgment.scored_index].id

    # 6. Bundles: free updates, so only the last bundle per anchor counts.
    latest: dict[tuple[str, str], str] = {}
    for sub in counted:
        if isinstance(sub.body, Bundle):
            key = (sub.team, _bundle_anchor(sub.body))
            if key in latest:
                adj.superseded_bundles.add(latest[key])
            latest[key] = sub.id
    for sub_id in latest.values():
        sub = adj.submissions[sub_id]
        bundle = sub.body
        assert isinstance(bundle, Bundle)
        adj.bundle_facts[sub_id] = BundleFact(
            verdict=judge_bundle(*_bundle_endpoints(adj, sub.team, bundle)),
            bundle=bundle,
        )
    return adj


def _resolve_ref(
    adj: ChallengeAdjudication, team: str, ref: str, kind: type
) -> Submission:
    sub = adj.submissions.get(ref)
    if sub is None or sub.team != team or not isinstance(sub.body, kind):
        raise DanglingReference(f"bundle reference {ref!r} does not resolve")
    return sub


def _bundle_endpoints(
    adj: ChallengeAdjudication, team: str, bundle: Bundle
) -> tuple[frozenset[str] | None, frozenset[str] | None, frozenset[str] | None]:
    """Vulnerability sets each linked finding concerns per ground truth.

    A patch endpoint uses its passing cover even when the patch was not
    selected: pairing correctness tracks patch validity, not crediting.
    """
    pov_cpvs = patch_cpvs = sarif_cpvs = None
    if bundle.pov_ref is not None:
        sub = _resolve_ref(adj, team, bundle.pov_ref, Pov)
        verdict = adj.pov_verdicts.get(sub.id)
        cpv = verdict.cpv_id if verdict is not None else None
        pov_cpvs = frozenset({cpv} if cpv is not None else set())
    if bundle.patch_ref is not None:
        sub = _resolve_ref(adj, team, bundle.patch_ref, Patch)
        fact = adj.patch_facts.get(sub.id)
        patch_cpvs = fact.covered if fact is not None else frozenset()
    if bundle.sarif_ref is not None:
        broadcast = adj.broadcasts.get(bundle.sarif_ref)
        if broadcast is None:
            raise DanglingReference(
                f"bundle references unknown broadcast {bundle.sarif_ref!r}"
            )
        sarif_cpvs = frozenset(
            {broadcast.valid_cpv} if broadcast.valid_cpv is not None else set()
        )
    return pov_cpvs, patch_cpvs, sarif_cpvs


def adjudication_report(adjudications: Iterable[ChallengeAdjudication]) -> dict:
    """External report: submission id -> outcome, classification, coverage."""
    report: dict[str, dict] = {}
    for adj in adjudications:
        for sub_id, verdict in adj.pov_verdicts.items():
            report[sub_id] = {
                "kind": "pov",
                "outcome": verdict.outcome.value,
                "cpv": verdict.cpv_id,
                "classification": verdict.classification.value,
            }
        for sub_id, fact in adj.patch_facts.items():
            report[sub_id] = {
                "kind": "patch",
                "stage": fact.stage.value,
                "covered_cpvs": sorted(fact.covered),
                "classification": fact.classification.value,
                "selected": fact.selected,
                "selection_method": adj.selection_method[adj.submissions[sub_id].team],
            }
        for sub_id, fact in adj.sarif_facts.items():
            report[sub_id] = {
                "kind": "sarif",
                "broadcast": fact.broadcast_id,
                "scored": fact.scored,
                "classification": fact.classification.value,
            }
        for sub_id, bfact in adj.bundle_facts.items():
            report[sub_id] = {
                "kind": "bundle",
                "correct_pairings": bfact.verdict.correct_pairings,
                "sign": bfact.verdict.sign,
                "classification": bfact.verdict.classification.value,
            }
        for sub_id in adj.superseded_bundles:
            report[sub_id] = {"kind": "bundle", "superseded": True}
        for sub_id in adj.late:
            report[sub_id] = {"kind": "late", "counted": False}
    return report
