"""Strategy agents: synthetic teams generating submission streams.

Each team is the composition of a stochastic capability profile (what it can
find, how fast, how reliably) and a strategy policy (when and what it
submits). ``simulate`` plans every team's submissions deterministically and
replays them through the orchestrator, so the result is a pure function of
(scenario, profiles, policies, seed).

Randomness discipline: every draw comes from a named stream derived by
hashing ``(seed, label...)``, one independent stream per (team, task, cpv)
context, so adding a team or reordering the planning loop never perturbs
another team's draws.

Agent model, in brief:

* PoVs are submitted as soon as discovered, one per vulnerability (teams
  deduplicate); with probability ``pov_false_rate`` a discovery yields a
  non-reproducing signature instead.
* Patch attempts draw one of four outcomes: a root-cause fix (probability
  ``patch_success``), a shallow fix that only remediates the team's own
  crash signature, a fix that breaks functional tests, or a build failure.
  Teams detect build failures locally and never submit those; the other
  three are submitted in good faith.
* ``incremental`` set calculation attempts each newly discovered PoV once;
  ``recompute`` re-solves over all known PoVs at each trigger, batching
  pending targets into one joint patch and retrying local failures, at the
  risk of superseding earlier narrower patches.
* Without a PoV, a team may still patch undiscovered vulnerabilities after
  its configured delay, optionally gated on its PoV-patch success record so
  far (no-PoV outcomes are unobservable to the team and never enter the
  gate).
* Assessment strategies: PoV-centric teams answer Correct only on a PoV
  match (initially or when one appears later); judge-centric teams answer
  both ways with configured accuracy; candidate-centric teams answer
  immediately (Incorrect when unmatched) and revise to Correct when a
  matching PoV appears.
* Every believed-good patch is bundled with the PoVs it targets, plus the
  matching broadcast when enabled and already assessed Correct.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Iterable, Mapping

from .model import ArenaError, ChallengeTask, EventLog, Submit, Timestamp
from .orchestrator import finalize, run
from .scenario import Scenario


class ConfigInvalid(ArenaError):
    pass


@dataclass(frozen=True)
class Dist:
    """A delay distribution: never, a fixed offset, or exponential."""

    kind: str  # "never" | "fixed" | "exponential"
    value: float = 0.0

    def sample(self, rng: random.Random) -> float | None:
        if self.kind == "never":
            return None
        if self.kind == "fixed":
            return self.value
        return rng.expovariate(1.0 / self.value) if self.value > 0 else 0.0


NEVER = Dist("never")


@dataclass(frozen=True)
class CapabilityProfile:
    """What a synthetic team is able to do, per vulnerability."""

    discovery: Mapping[str, Dist] = field(default_factory=dict)  # cpv id or "*"
    pov_false_rate: float = 0.0
    patch_success: float = 1.0
    patch_latency: Dist = Dist("fixed", 0.0)
    sarif_judge_accuracy: float = 1.0
    availability: float | None = None

    def discovery_for(self, cpv_id: str) -> Dist:
        if cpv_id in self.discovery:
            return self.discovery[cpv_id]
        return self.discovery.get("*", NEVER)


@dataclass(frozen=True)
class PatchMinsetPolicy:
    timing: str = "on_new_pov"  # or "hourly"
    mode: str = "incremental"  # or "recompute"
    submit_delay_minutes: float = 0.0  # 0 = immediate


@dataclass(frozen=True)
class NoPovPatchPolicy:
    delay_kind: str  # "minutes_after_start" | "fraction_of_window" | "before_deadline_minutes"
    delay_value: float
    gate: float | None = None  # minimum believed success rate, None = ungated

    def start_time(self, task: ChallengeTask) -> Timestamp:
        if self.delay_kind == "minutes_after_start":
            t = task.open_time + 60.0 * self.delay_value
        elif self.delay_kind == "fraction_of_window":
            t = task.open_time + self.delay_value * (task.deadline - task.open_time)
        else:
            t = task.deadline - 60.0 * self.delay_value
        return min(max(t, task.open_time), task.deadline)


@dataclass(frozen=True)
class StrategyPolicy:
    # PoV policy is fixed: unique PoVs, submitted as soon as possible.
    patch_minset: PatchMinsetPolicy = PatchMinsetPolicy()
    nopov_patch: NoPovPatchPolicy | None = None
    sarif_policy: str = "pov_centric"  # "llm_judge_centric" | "bug_cand_centric"
    bundle_sarif_pairing: bool = True


def validate_config(profile: CapabilityProfile, policy: StrategyPolicy) -> None:
    for name, p in (
        ("pov_false_rate", profile.pov_false_rate),
        ("patch_success", profile.patch_success),
        ("sarif_judge_accuracy", profile.sarif_judge_accuracy),
    ):
        if not 0.0 <= p <= 1.0:
            raise ConfigInvalid(f"{name} must be within [0, 1], got {p}")
    for dist in (*profile.discovery.values(), profile.patch_latency):
        if dist.kind not in ("never", "fixed", "exponential"):
            raise ConfigInvalid(f"unknown distribution kind {dist.kind!r}")
        if dist.kind != "never" and dist.value < 0:
            raise ConfigInvalid("delays must be non-negative")
    if profile.patch_latency.kind == "never":
        raise ConfigInvalid("patch_latency cannot be 'never'")
    if profile.availability is not None and profile.availability < 0:
        raise ConfigInvalid("availability must be non-negative")
    minset = policy.patch_minset
    if minset.timing not in ("on_new_pov", "hourly"):
        raise ConfigInvalid(f"unknown minset timing {minset.timing!r}")
    if minset.mode not in ("incremental", "recompute"):
        raise ConfigInvalid(f"unknown minset mode {minset.mode!r}")
    if minset.submit_delay_minutes < 0:
        raise ConfigInvalid("submit delay must be non-negative")
    nopov = policy.nopov_patch
    if nopov is not None:
        if nopov.delay_kind not in (
            "minutes_after_start",
            "fraction_of_window",
            "before_deadline_minutes",
        ):
            raise ConfigInvalid(f"unknown no-PoV delay {nopov.delay_kind!r}")
        if nopov.delay_kind == "fraction_of_window" and not 0.0 < nopov.delay_value < 1.0:
            raise ConfigInvalid("fraction_of_window must be in (0, 1)")
        if nopov.delay_kind != "fraction_of_window" and nopov.delay_value < 0:
            raise ConfigInvalid("no-PoV delay must be non-negative")
        if nopov.gate is not None and not 0.0 <= nopov.gate <= 1.0:
            raise ConfigInvalid("gate must be within [0, 1]")
    if policy.sarif_policy not in ("pov_centric", "llm_judge_centric", "bug_cand_centric"):
        raise ConfigInvalid(f"unknown sarif policy {policy.sarif_policy!r}")


def stream(seed: int, *labels: str) -> random.Random:
    """Independent, platform-stable RNG stream named by its labels."""
    digest = hashlib.sha256("|".join((str(seed), *labels)).encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:16], "big"))


# Patch attempt outcomes, drawn in this order once an attempt is not a
# root-cause fix: shallow and functional-failing fixes are submitted in good
# faith, build failures are caught locally and retried under recompute.
# A miss is a no-PoV patch that fixes nothing; without a PoV the team cannot
# tell, so it goes out anyway.
FIX = "fix"
SHALLOW = "shallow"
FUNCTIONAL_FAIL = "functional_fail"
BUILD_FAIL = "build_fail"
MISS = "miss"

# Signature prefix guaranteeing a non-reproducing PoV; scenario signatures
# must not start with it.
FALSE_SIG_PREFIX = "nonreproducing:"


@dataclass
class _PlannedPov:
    key: str  # cpv id, or a junk key for false discoveries
    cpv_id: str | None
    time: float
    signature: str
    sub_id: str


@dataclass
class _PlannedPatch:
    sub_id: str
    time: float
    targets: list[_PlannedPov]
    outcome: str


class _TeamPlanner:
    def __init__(
        self,
        team: str,
        profile: CapabilityProfile,
        policy: StrategyPolicy,
        scenario: Scenario,
        seed: int,
    ):
        self.team = team
        self.profile = profile
        self.policy = policy
        self.scenario = scenario
        self.seed = seed
        self.requests: list[tuple[float, str, dict[str, Any]]] = []
        self._seq = 0
        # (attempt time, believed success) across tasks, for the no-PoV gate.
        self._attempts: list[tuple[float, bool]] = []

    def _next_id(self) -> str:
        self._seq += 1
        return f"{self.team}-{self._seq:05d}"

    def _emit(self, task: ChallengeTask, time: float, body: dict[str, Any]) -> str | None:
        if time > task.deadline:
            return None
        if self.profile.availability is not None and time > self.profile.availability:
            return None
        sub_id = self._next_id()
        payload = {"id": sub_id, "team": self.team, "challenge_id": task.id, **body}
        self.requests.append((time, sub_id, payload))
        return sub_id

    def plan(self) -> list[tuple[float, str, dict[str, Any]]]:
        for task in sorted(self.scenario.tasks(), key=lambda t: (t.open_time, t.id)):
            self._plan_task(task)
        return self.requests

    # -- one task ---------------------------------------------------------

    def _plan_task(self, task: ChallengeTask) -> None:
        if not task.harnesses:
            return  # nothing to submit PoVs through
        povs = self._plan_povs(task)
        patches = self._plan_patches(task, povs)
        patches += self._plan_nopov_patches(task, povs)
        assessments = self._plan_assessments(task, povs)
        self._plan_bundles(task, povs, patches, assessments)

    def _plan_povs(self, task: ChallengeTask) -> list[_PlannedPov]:
        povs: list[_PlannedPov] = []
        harness = task.harnesses[0]
        for cpv in sorted(task.cpvs, key=lambda c: c.id):
            rng = stream(self.seed, "discovery", self.team, task.id, cpv.id)
            offset = self.profile.discovery_for(cpv.id).sample(rng)
            if offset is None:
                continue
            when = task.open_time + offset
            if when > task.deadline:
                continue
            false = rng.random() < self.profile.pov_false_rate
            if false:
                signature = f"{FALSE_SIG_PREFIX}{self.team}:{task.id}:{cpv.id}"
                key, cpv_id = f"false:{cpv.id}", None
            else:
                signature = rng.choice(sorted(cpv.trigger_signatures))
                key, cpv_id = cpv.id, cpv.id
            sub_id = self._emit(
                task, when, {"type": "pov", "harness": harness, "payload_signature": signature}
            )
            if sub_id is not None:
                povs.append(_PlannedPov(key, cpv_id, when, signature, sub_id))
        return sorted(povs, key=lambda p: (p.time, p.sub_id))

    # -- patching ---------------------------------------------------------

    def _patch_triggers(self, task: ChallengeTask, povs: list[_PlannedPov]) -> list[float]:
        if self.policy.patch_minset.timing == "on_new_pov":
            return sorted({p.time for p in povs})
        ticks = []
        t = task.open_time + 3600.0
        while t <= task.deadline:
            ticks.append(t)
            t += 3600.0
        return ticks

    def _attempt_outcome(self, rng: random.Random) -> str:
        if rng.random() < self.profile.patch_success:
            return FIX
        m = rng.random()
        if m < 0.4:
            return SHALLOW
        if m < 0.7:
            return FUNCTIONAL_FAIL
        return BUILD_FAIL

    def _effect_for(self, task: ChallengeTask, targets: list[_PlannedPov], outcome: str) -> dict:
        remediated: set[str] = set()
        if outcome in (FIX, FUNCTIONAL_FAIL):
            for p in targets:
                if p.cpv_id is None:
                    remediated.add(p.signature)
                else:
                    cpv = task.cpv(p.cpv_id)
                    remediated |= cpv.trigger_signatures | cpv.organizer_povs
        else:  # shallow: only the team's own crash signatures
            remediated = {p.signature for p in targets}
        return {
            "applies": True,
            "builds": True,
            "remediated_signatures": sorted(remediated),
            "functional_pass": outcome != FUNCTIONAL_FAIL,
        }

    def _plan_patches(self, task: ChallengeTask, povs: list[_PlannedPov]) -> list[_PlannedPatch]:
        minset = self.policy.patch_minset
        delay = 60.0 * minset.submit_delay_minutes
        submitted: list[_PlannedPatch] = []
        attempted: set[str] = set()  # incremental: one attempt per PoV ever
        believed_done: set[str] = set()  # recompute: retry until believed fixed
        retry_counts: dict[str, int] = {}
        for trigger in self._patch_triggers(task, povs):
            known = [p for p in povs if p.time <= trigger]
            if minset.mode == "incremental":
                batches = [[p] for p in known if p.key not in attempted]
                attempted.update(p.key for p in known)
            else:
                pending = [p for p in known if p.key not in believed_done]
                batches = [pending] if pending else []
            for batch in batches:
                batch_key = "+".join(sorted(p.key for p in batch))
                attempt = retry_counts.get(batch_key, 0)
                retry_counts[batch_key] = attempt + 1
                rng = stream(
                    self.seed, "patch", self.team, task.id, batch_key, str(attempt)
                )
                outcome = self._attempt_outcome(rng)
                latency = self.profile.patch_latency.sample(rng) or 0.0
                believed_good = outcome != BUILD_FAIL
                self._attempts.append((trigger + latency, believed_good))
                if believed_good:
                    believed_done.update(p.key for p in batch)
                if outcome == BUILD_FAIL:
                    continue  # caught locally, never submitted
                when = trigger + latency + delay
                sub_id = self._emit(
                    task, when, {"type": "patch", "effect": self._effect_for(task, batch, outcome)}
                )
                if sub_id is not None:
                    submitted.append(_PlannedPatch(sub_id, when, list(batch), outcome))
        return submitted

    def _believed_rate(self, before: float) -> float | None:
        tried = [ok for when, ok in self._attempts if when <= before]
        if not tried:
            return None
        return sum(tried) / len(tried)

    def _plan_nopov_patches(
        self, task: ChallengeTask, povs: list[_PlannedPov]
    ) -> list[_PlannedPatch]:
        nopov = self.policy.nopov_patch
        if nopov is None:
            return []
        start = nopov.start_time(task)
        if nopov.gate is not None:
            rate = self._believed_rate(start)
            if rate is not None and rate < nopov.gate:
                return []
        found = {p.cpv_id for p in povs if p.cpv_id is not None and p.time <= start}
        submitted: list[_PlannedPatch] = []
        for cpv in sorted(task.cpvs, key=lambda c: c.id):
            if cpv.id in found:
                continue
            rng = stream(self.seed, "nopov", self.team, task.id, cpv.id)
            outcome = FIX if rng.random() < self.profile.patch_success else MISS
            latency = self.profile.patch_latency.sample(rng) or 0.0
            # Not recorded in the attempt history: without a PoV the team
            # never learns how a guess fared, so it cannot inform the gate.
            if outcome == FIX:
                remediated = sorted(cpv.trigger_signatures | cpv.organizer_povs)
            else:
                remediated = []
            effect = {
                "applies": True,
                "builds": True,
                "remediated_signatures": remediated,
                "functional_pass": True,
            }
            when = start + latency
            target = _PlannedPov(f"nopov:{cpv.id}", cpv.id, when, "", "")
            sub_id = self._emit(task, when, {"type": "patch", "effect": effect})
            if sub_id is not None:
                submitted.append(_PlannedPatch(sub_id, when, [target], outcome))
        return submitted

    # -- assessments ------------------------------------------------------

    def _plan_assessments(
        self, task: ChallengeTask, povs: list[_PlannedPov]
    ) -> dict[str, list[tuple[float, str]]]:
        """Emit verdicts per broadcast; returns broadcast id -> [(time, verdict)]."""
        emitted: dict[str, list[tuple[float, str]]] = {}
        style = self.policy.sarif_policy

        def found_at(cpv_id: str | None) -> float | None:
            for p in povs:
                if p.cpv_id is not None and p.cpv_id == cpv_id:
                    return p.time
            return None

        for b in sorted(task.sarif_broadcasts, key=lambda b: (b.broadcast_time, b.id)):
            history: list[tuple[float, str]] = []
            match_time = found_at(b.valid_cpv)
            matched_now = match_time is not None and match_time <= b.broadcast_time
            if style == "pov_centric":
                if matched_now:
                    history.append((b.broadcast_time, "correct"))
                elif match_time is not None:
                    history.append((match_time, "correct"))
            elif style == "llm_judge_centric":
                rng = stream(self.seed, "sarif", self.team, b.id)
                right = rng.random() < self.profile.sarif_judge_accuracy
                truth_correct = b.valid_cpv is not None
                verdict = "correct" if right == truth_correct else "incorrect"
                history.append((b.broadcast_time, verdict))
            else:  # bug_cand_centric
                if matched_now:
                    history.append((b.broadcast_time, "correct"))
                else:
                    history.append((b.broadcast_time, "incorrect"))
                    if match_time is not None:
                        history.append((match_time, "correct"))
            kept = []
            for when, verdict in history:
                sub_id = self._emit(
                    task, when, {"type": "sarif", "broadcast_id": b.id, "verdict": verdict}
                )
                if sub_id is not None:
                    kept.append((when, verdict))
            if kept:
                emitted[b.id] = kept
        return emitted

    # -- bundles ----------------------------------------------------------

    def _plan_bundles(
        self,
        task: ChallengeTask,
        povs: list[_PlannedPov],
        patches: list[_PlannedPatch],
        assessments: dict[str, list[tuple[float, str]]],
    ) -> None:
        pov_by_cpv = {p.cpv_id: p for p in povs if p.cpv_id is not None}
        valid_broadcasts = {
            b.valid_cpv: b
            for b in task.sarif_broadcasts
            if b.valid_cpv is not None
        }

        def correct_assessment_time(cpv_id: str) -> tuple[str, float] | None:
            if not self.policy.bundle_sarif_pairing:
                return None
            b = valid_broadcasts.get(cpv_id)
            if b is None:
                return None
            history = assessments.get(b.id, ())
            if history and history[-1][1] == "correct":
                return b.id, history[-1][0]
            return None

        for patch in sorted(patches, key=lambda p: (p.time, p.sub_id)):
            for target in patch.targets:
                if target.cpv_id is None:
                    continue
                pov = pov_by_cpv.get(target.cpv_id)
                pairing = correct_assessment_time(target.cpv_id)
                if pov is None:
                    # No-PoV patch: can only pair with the broadcast.
                    if pairing is not None:
                        ref, assessed_at = pairing
                        self._emit(
                            task,
                            max(patch.time, assessed_at),
                            {"type": "bundle", "patch_ref": patch.sub_id, "sarif_ref": ref},
                        )
                    continue
                when = max(pov.time, patch.time)
                body = {"type": "bundle", "pov_ref": pov.sub_id, "patch_ref": patch.sub_id}
                if pairing is None:
                    self._emit(task, when, body)
                    continue
                ref, assessed_at = pairing
                if assessed_at <= when:
                    self._emit(task, when, {**body, "sarif_ref": ref})
                else:
                    # Bundle now, then extend with the assessment when it
                    # lands: updates are free until the deadline.
                    self._emit(task, when, body)
                    self._emit(task, assessed_at, {**body, "sarif_ref": ref})


def simulate(
    scenario: Scenario,
    profiles: Mapping[str, CapabilityProfile],
    policies: Mapping[str, StrategyPolicy],
    seed: int,
) -> EventLog:
    """Run the whole competition with synthetic teams; deterministic in all
    arguments."""
    for team in scenario.teams:
        if team not in profiles or team not in policies:
            raise ConfigInvalid(f"missing profile or policy for team {team!r}")
        validate_config(profiles[team], policies[team])
    requests: list[tuple[float, str, dict[str, Any]]] = []
    for team in sorted(scenario.teams):
        planner = _TeamPlanner(team, profiles[team], policies[team], scenario, seed)
        requests.extend(planner.plan())
    requests.sort(key=lambda r: (r[0], r[1]))
    return run(scenario, ((when, payload) for when, _, payload in requests))


@dataclass(frozen=True)
class PolicyOutcome:
    """One row of a policy comparison."""

    label: str
    seeds: tuple[int, ...]
    mean_final: Fraction
    mean_am_penalty: Fraction
    mean_submissions: Fraction


def compare_policies(
    scenario: Scenario,
    profile: CapabilityProfile,
    policies: Iterable[StrategyPolicy],
    seeds: Iterable[int],
    labels: Iterable[str] | None = None,
) -> list[PolicyOutcome]:
    """Score each policy over the seed set with a single agent team.

    Each cell runs a one-team competition on the same scenario timeline, so
    differences between rows are attributable to policy alone.
    """
    policies = list(policies)
    seeds = tuple(seeds)
    names = list(labels) if labels is not None else [f"policy-{i}" for i in range(len(policies))]
    if len(names) != len(policies):
        raise ConfigInvalid("one label per policy required")
    agent = "agent"
    solo = replace(scenario, teams=(agent,))
    rows: list[PolicyOutcome] = []
    for name, policy in zip(names, policies):
        finals: list[Fraction] = []
        penalties: list[Fraction] = []
        counts: list[int] = []
        for seed in seeds:
            log = simulate(solo, {agent: profile}, {agent: policy}, seed)
            report = finalize(log)
            total = report.team_totals().get(agent, Fraction(0))
            pre = sum(
                (s.pre_penalty for s in report.team_scores(agent)), Fraction(0)
            )
            finals.append(total)
            penalties.append(Fraction(0) if pre == 0 else 1 - total / pre)
            counts.append(sum(1 for e in log.events if isinstance(e, Submit)))
        n = len(seeds) if seeds else 1
        rows.append(
            PolicyOutcome(
                label=name,
                seeds=seeds,
                mean_final=sum(finals, Fraction(0)) / n,
                mean_am_penalty=sum(penalties, Fraction(0)) / n,
                mean_submissions=Fraction(sum(counts), n),
            )
        )
    return rows


# -- config files ---------------------------------------------------------


def _dist_from_dict(d: dict[str, Any]) -> Dist:
    kind = d.get("dist")
    if kind == "never":
        return NEVER
    if kind == "fixed":
        return Dist("fixed", float(d.get("offset", 0.0)))
    if kind == "exponential":
        return Dist("exponential", float(d.get("mean", 0.0)))
    raise ConfigInvalid(f"unknown distribution {d!r}")


def profile_from_dict(d: dict[str, Any]) -> CapabilityProfile:
    try:
        discovery = {
            cpv: _dist_from_dict(spec) for cpv, spec in d.get("discovery", {}).items()
        }
        return CapabilityProfile(
            discovery=discovery,
            pov_false_rate=float(d.get("pov_false_rate", 0.0)),
            patch_success=float(d.get("patch_success", 1.0)),
            patch_latency=_dist_from_dict(d.get("patch_latency", {"dist": "fixed"})),
            sarif_judge_accuracy=float(d.get("sarif_judge_accuracy", 1.0)),
            availability=(
                float(d["availability"]) if d.get("availability") is not None else None
            ),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"bad profile: {exc}") from None


def policy_from_dict(d: dict[str, Any]) -> StrategyPolicy:
    try:
        minset_raw = d.get("patch_minset", {})
        submit = minset_raw.get("submit", "immediate")
        if submit == "immediate":
            delay = 0.0
        elif isinstance(submit, dict) and "delayed_minutes" in submit:
            delay = float(submit["delayed_minutes"])
        else:
            raise ConfigInvalid(f"unknown submit timing {submit!r}")
        minset = PatchMinsetPolicy(
            timing=minset_raw.get("timing", "on_new_pov"),
            mode=minset_raw.get("mode", "incremental"),
            submit_delay_minutes=delay,
        )
        nopov_raw = d.get("nopov_patch")
        nopov = None
        if nopov_raw is not None:
            delay_spec = nopov_raw["delay"]
            kind, value = next(iter(delay_spec.items()))
            nopov = NoPovPatchPolicy(
                delay_kind=kind,
                delay_value=float(value),
                gate=(float(nopov_raw["gate"]) if nopov_raw.get("gate") is not None else None),
            )
        return StrategyPolicy(
            patch_minset=minset,
            nopov_patch=nopov,
            sarif_policy=d.get("sarif_policy", "pov_centric"),
            bundle_sarif_pairing=bool(d.get("bundle_sarif_pairing", True)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigInvalid(f"bad policy: {exc}") from None


def load_team_configs(path: str) -> dict[str, tuple[CapabilityProfile, StrategyPolicy]]:
    import json

    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"invalid JSON: {exc}") from None
    teams = doc.get("teams")
    if not isinstance(teams, dict):
        raise ConfigInvalid("team config must contain a 'teams' object")
    configs = {}
    for team, spec in teams.items():
        profile = profile_from_dict(spec.get("profile", {}))
        policy = policy_from_dict(spec.get("policy", {}))
        validate_config(profile, policy)
        configs[team] = (profile, policy)
    return configs
