"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; every tolerance and budget is asserted, nothing is approximate.
"""

from __future__ import annotations

import itertools
import random
import time
from fractions import Fraction
from pathlib import Path

from arena.analyze import accuracy_table, score_over_time
from arena.cover import PatchCandidate, select_minimal_patch_set, selection_key
from arena.judge import Classification, PovOutcome
from arena.model import EventLog, Pov, Submit, event_sort_key
from arena.orchestrator import Arena, adjudicate_log, finalize, report_to_bytes, run
from arena.render import render
from arena.scenario import load_scenario, scenario_from_dict
from arena.scoring import (
    Capability,
    accuracy_multiplier,
    bundle_points,
    capability_points,
    time_decay,
)
from arena.sim import (
    CapabilityProfile,
    Dist,
    NoPovPatchPolicy,
    StrategyPolicy,
    load_team_configs,
    simulate,
)

F = Fraction

ROOT = Path(__file__).resolve().parent.parent
DESK_SCENARIO = ROOT / "scenarios" / "desk10.json"
DESK_TEAMS = ROOT / "scenarios" / "desk10_teams.json"


def test_criterion_1_accuracy_multiplier_checkpoints():
    accuracy_multiplier(1, 1)  # warm-up outside the timed window
    start = time.perf_counter()
    am_90 = accuracy_multiplier(9, 1)
    am_50 = accuracy_multiplier(1, 1)
    am_40 = accuracy_multiplier(2, 3)
    am_100 = accuracy_multiplier(7, 0)
    elapsed = time.perf_counter() - start
    assert round(float(am_90), 4) == 0.9999
    assert am_90 == F(9999, 10000)
    assert am_50 == F(9375, 10000)  # exact, not approximate
    assert am_40 == F(8704, 10000)
    assert am_100 == F(1)
    assert elapsed < 0.001, f"checkpoints took {elapsed * 1000:.3f} ms"
    print("\n[acceptance] criterion 1: PASS  accuracy-multiplier checkpoints "
          f"(0.9999 / 0.9375 / 0.8704 / 1) in {elapsed * 1e6:.0f} us")


def test_criterion_2_decay_endpoints_and_capability_ranges():
    start = time.perf_counter()
    assert time_decay(0.0, 0.0, 43200.0) == F(1)
    assert time_decay(43200.0, 0.0, 43200.0) == F(1, 2)
    ranges = {
        Capability.POV: (F(1), F(2)),
        Capability.PATCH: (F(3), F(6)),
        Capability.SARIF: (F(1, 2), F(1)),
    }
    rng = random.Random(20260809)
    for _ in range(10_000):
        open_time = rng.uniform(0, 100000)
        width = rng.choice((21600.0, 43200.0))
        deadline = open_time + width
        submit = rng.uniform(open_time, deadline)
        tau = time_decay(submit, open_time, deadline)
        kind = rng.choice(list(ranges))
        low, high = ranges[kind]
        points = capability_points(kind, tau)
        assert low <= points <= high, (kind, points)
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"property run took {elapsed:.2f} s"
    print(f"[acceptance] criterion 2: PASS  decay endpoints exact, 10^4 awards "
          f"in range in {elapsed:.2f} s")


def test_criterion_3_bundle_bounds():
    assert bundle_points(F(2), F(6), F(1), +1) == F(7)
    assert bundle_points(F(2), F(6), F(1), -1) == F(-7)
    assert bundle_points(F(2), F(6), None, +1) == F(4)
    rng = random.Random(77)
    for _ in range(10_000):
        pov = F(rng.randint(100, 200), 100) if rng.random() < 0.8 else None
        patch = F(rng.randint(300, 600), 100) if rng.random() < 0.8 else None
        sarif = F(rng.randint(50, 100), 100) if rng.random() < 0.8 else None
        present = [p for p in (pov, patch, sarif) if p is not None]
        if len(present) < 2:
            continue
        score = bundle_points(pov, patch, sarif, rng.choice((1, -1)))
        assert abs(score) <= F(7), score
    print("[acceptance] criterion 3: PASS  bundle maxima +7/-7/+4 and |score| <= 7 "
          "over 10^4 combinations")


def _oracle_best(cands: list[PatchCandidate]) -> tuple:
    """Exhaustive-subset oracle, independent of the production solver."""
    universe = frozenset().union(*(c.covered for c in cands)) if cands else frozenset()
    best_key, best = None, ()
    for r in range(len(cands) + 1):
        for combo in itertools.combinations(cands, r):
            covered = frozenset().union(*(c.covered for c in combo)) if combo else frozenset()
            if not universe <= covered:
                continue
            key = selection_key(combo)
            if best_key is None or key < best_key:
                best_key, best = key, combo
        if best_key is not None and best_key[0] <= r:
            break  # no larger subset can beat a smaller cover
    return best_key, frozenset(c.patch_id for c in best)


def test_criterion_4_minimal_cover_matches_oracle():
    rng = random.Random(4242)
    start = time.perf_counter()
    for trial in range(500):
        n_cpvs = rng.randint(1, 8)
        n_cands = rng.randint(1, 12)
        cpvs = [f"v{i}" for i in range(n_cpvs)]
        cands = []
        for i in range(n_cands):
            covered = frozenset(v for v in cpvs if rng.random() < 0.35) or frozenset(
                {rng.choice(cpvs)}
            )
            cands.append(
                PatchCandidate(f"p{i:02d}", covered, float(rng.randint(0, 4)))
            )
        oracle_key, oracle_sel = _oracle_best(cands)
        got = select_minimal_patch_set(cands)
        got_cands = [c for c in cands if c.patch_id in got.selected]
        got_key = selection_key(got_cands)
        assert (got_key[0], got_key[1]) == (oracle_key[0], oracle_key[1]), (
            f"trial {trial}: size/breadth {got_key[:2]} != oracle {oracle_key[:2]}"
        )
        # The documented tie-break chain is total, so the selection is unique.
        assert got.selected == oracle_sel, f"trial {trial}: tie-break mismatch"
        shuffled = cands[:]
        rng.shuffle(shuffled)
        assert select_minimal_patch_set(shuffled).selected == got.selected
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"500 instances took {elapsed:.1f} s"
    print(f"[acceptance] criterion 4: PASS  500 instances match the exhaustive "
          f"oracle in {elapsed:.1f} s")


def _fuzz_scenario(rng: random.Random) -> dict:
    mode = rng.choice(("full", "delta"))
    n_cpvs = rng.randint(1, 3)
    cpvs = [
        {
            "id": f"v{i}",
            "trigger_signatures": [f"sig-{i}-a"] + (["sig-{}-b".format(i)] if rng.random() < 0.4 else []),
            "organizer_povs": [f"org-{i}"] if rng.random() < 0.7 else [],
        }
        for i in range(n_cpvs)
    ]
    task = {
        "id": "c1",
        "project": "proj",
        "language": rng.choice(("c", "java")),
        "mode": mode,
        "open_time": 0,
        "harnesses": ["h1"],
        "cpvs": cpvs,
    }
    if mode == "delta":
        task["delta_ref"] = "pr-1"
    broadcasts = []
    if rng.random() < 0.6:
        broadcasts.append(
            {
                "id": "b1",
                "challenge_id": "c1",
                "broadcast_time": rng.randint(0, 5000),
                "valid_cpv": rng.choice([None, cpvs[0]["id"]]),
            }
        )
    return {
        "name": "fuzz",
        "teams": ["t1", "t2"],
        "end_time": 50000,
        "phases": [{"phase_id": "P1", "start": 0, "tasks": [task], "broadcasts": broadcasts}],
    }


def _fuzz_log(rng: random.Random) -> tuple[EventLog, set[str]]:
    """Random intake traffic; returns the log and the ids of exact-duplicate
    PoV submissions (same team resubmitting the same signature)."""
    doc = _fuzz_scenario(rng)
    scenario = scenario_from_dict(doc)
    task = scenario.tasks()[0]
    arena = Arena(scenario)
    # Only reproducing PoVs can have neutral duplicates; resubmitting a junk
    # signature is just another inaccurate PoV.
    seen_reproducing: dict[tuple[str, str], str] = {}
    duplicate_ids: set[str] = set()
    accepted_povs: list[str] = []
    accepted_patches: list[str] = []
    all_sigs = sorted({s for c in task.cpvs for s in c.trigger_signatures})
    now = 0.0
    for i in range(rng.randint(5, 15)):
        now += rng.uniform(0, 2000)
        team = rng.choice(("t1", "t2"))
        kind = rng.random()
        sid = f"s{i:03d}"
        if kind < 0.45:
            if rng.random() < 0.3 and seen_reproducing:
                # Exact duplicate: same team, same signature again.
                dteam, payload_sig = sorted(seen_reproducing)[
                    rng.randrange(len(seen_reproducing))
                ]
                team = dteam
            else:
                payload_sig = rng.choice(all_sigs + ["junk-sig"])
            reproducing = payload_sig != "junk-sig"
            is_dup = (team, payload_sig) in seen_reproducing
            receipt = arena.accept_submission(
                {"type": "pov", "id": sid, "team": team, "challenge_id": "c1",
                 "harness": "h1", "payload_signature": payload_sig},
                now,
            )
            if receipt.accepted and reproducing:
                if is_dup:
                    duplicate_ids.add(sid)
                else:
                    seen_reproducing[(team, payload_sig)] = sid
                    accepted_povs.append(sid)
        elif kind < 0.75:
            cpv = task.cpvs[rng.randrange(len(task.cpvs))]
            style = rng.random()
            if style < 0.5:
                remediated = sorted(cpv.trigger_signatures | cpv.organizer_povs)
            elif style < 0.75:
                remediated = sorted(cpv.trigger_signatures)[:1]
            else:
                remediated = []
            applies = rng.random() < 0.9
            effect = {
                "applies": applies,
                "builds": applies and rng.random() < 0.9,
                "remediated_signatures": remediated,
                "functional_pass": rng.random() < 0.8,
            }
            receipt = arena.accept_submission(
                {"type": "patch", "id": sid, "team": team, "challenge_id": "c1",
                 "effect": effect},
                now,
            )
            if receipt.accepted:
                accepted_patches.append(sid)
        elif kind < 0.85 and task.sarif_broadcasts:
            arena.accept_submission(
                {"type": "sarif", "id": sid, "team": team, "challenge_id": "c1",
                 "broadcast_id": "b1",
                 "verdict": rng.choice(("correct", "incorrect"))},
                now,
            )
        elif kind < 0.95 and accepted_povs and accepted_patches:
            arena.accept_submission(
                {"type": "bundle", "id": sid, "team": team, "challenge_id": "c1",
                 "pov_ref": rng.choice(accepted_povs),
                 "patch_ref": rng.choice(accepted_patches)},
                now,
            )
        elif kind < 0.975:
            arena.accept_submission(b"garbage{{{", now)
        else:
            arena.record_server_error(team, now)
    return arena.finish(), duplicate_ids


def test_criterion_5_classification_partition_and_duplicate_neutrality():
    rng = random.Random(55)
    for trial in range(1000):
        log, duplicate_ids = _fuzz_log(rng)
        adj = adjudicate_log(log)["c1"]
        # Partition: every counted submission lands in exactly one fact store
        # with exactly one classification; late ones in none.
        stores = (adj.pov_verdicts, adj.patch_facts, adj.sarif_facts, adj.bundle_facts)
        for sub_id, sub in adj.submissions.items():
            hits = sum(sub_id in s for s in stores)
            if sub_id in adj.late or sub_id in adj.superseded_bundles:
                assert hits == 0
            else:
                assert hits == 1, f"trial {trial}: {sub_id} in {hits} stores"
                assert adj.classification_of(sub_id) is not None
        for dup_id in duplicate_ids:
            if dup_id in adj.late:
                continue
            assert adj.pov_verdicts[dup_id].outcome is PovOutcome.DUPLICATE
            assert adj.pov_verdicts[dup_id].classification is Classification.NEUTRAL
        # Removing exact duplicates must change nothing else.
        if duplicate_ids:
            kept = tuple(
                e
                for e in log.events
                if not (isinstance(e, Submit) and e.submission.id in duplicate_ids)
            )
            adj2 = adjudicate_log(EventLog(kept))["c1"]
            for sub_id in adj2.submissions:
                assert adj2.classification_of(sub_id) == adj.classification_of(sub_id), (
                    f"trial {trial}: {sub_id} reclassified after duplicate removal"
                )
            for team in ("t1", "t2"):
                assert adj2.team_counts(team) == adj.team_counts(team)
    print("[acceptance] criterion 5: PASS  10^3 fuzzed logs: classification is a "
          "partition, duplicates neutral and removable")


def _mini_sim_scenario() -> dict:
    return {
        "name": "repro",
        "teams": ["t1", "t2"],
        "end_time": 120000,
        "phases": [
            {
                "phase_id": "P1",
                "start": 0,
                "tasks": [
                    {
                        "id": "c1", "project": "p1", "language": "c", "mode": "full",
                        "open_time": 0, "harnesses": ["h1"],
                        "cpvs": [
                            {"id": "v1", "trigger_signatures": ["s1"], "organizer_povs": ["o1"]},
                            {"id": "v2", "trigger_signatures": ["s2"], "organizer_povs": ["o2"]},
                        ],
                    },
                    {
                        "id": "c2", "project": "p2", "language": "java", "mode": "delta",
                        "open_time": 1000, "delta_ref": "pr", "harnesses": ["h1"],
                        "cpvs": [
                            {"id": "w1", "trigger_signatures": ["u1"], "organizer_povs": ["q1"]},
                        ],
                    },
                ],
                "broadcasts": [
                    {"id": "b1", "challenge_id": "c1", "broadcast_time": 500, "valid_cpv": "v1"},
                    {"id": "b2", "challenge_id": "c2", "broadcast_time": 2000},
                ],
            }
        ],
    }


def test_criterion_6_replay_determinism():
    scenario = scenario_from_dict(_mini_sim_scenario())
    profiles = {
        "t1": CapabilityProfile(
            discovery={"*": Dist("exponential", 4000.0)},
            pov_false_rate=0.1,
            patch_success=0.7,
            patch_latency=Dist("exponential", 1000.0),
            sarif_judge_accuracy=0.8,
        ),
        "t2": CapabilityProfile(
            discovery={"*": Dist("exponential", 6000.0)},
            patch_success=0.5,
            patch_latency=Dist("fixed", 600.0),
        ),
    }
    policies = {
        "t1": StrategyPolicy(sarif_policy="llm_judge_centric"),
        "t2": StrategyPolicy(sarif_policy="bug_cand_centric"),
    }
    for seed in range(100):
        log_a = simulate(scenario, profiles, policies, seed)
        report_a = report_to_bytes(finalize(log_a))
        log_b = simulate(scenario, profiles, policies, seed)
        report_b = report_to_bytes(finalize(log_b))
        assert report_a == report_b, f"seed {seed}: reports differ"
        series = score_over_time(log_a)
        totals = finalize(log_a).team_totals()
        for team, values in series.by_team.items():
            if values:
                assert values[-1] == totals[team], f"seed {seed}: series mismatch"
    print("[acceptance] criterion 6: PASS  100 seeds byte-identical, series ends "
          "exactly at replay totals")


def test_criterion_7_end_to_end_desk_scale(tmp_path):
    scenario = load_scenario(str(DESK_SCENARIO))
    assert len(scenario.teams) == 7
    tasks = scenario.tasks()
    assert len(tasks) == 10
    assert sum(len(t.cpvs) for t in tasks) == 20
    modes = {t.mode.value for t in tasks}
    langs = {t.language.value for t in tasks}
    assert modes == {"full", "delta"} and langs == {"c", "java"}

    configs = load_team_configs(str(DESK_TEAMS))
    profiles = {t: configs[t][0] for t in scenario.teams}
    policies = {t: configs[t][1] for t in scenario.teams}
    start = time.perf_counter()
    log = simulate(scenario, profiles, policies, seed=42)
    report = finalize(log)
    written = render(log, "desk10", tmp_path, ("csv", "json", "svg"), series_sample=3600.0)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"end-to-end took {elapsed:.1f} s"
    assert report.team_totals()
    names = {p.name for p in written}
    for artifact in ("report.json", "score_series.csv", "score_series.svg",
                     "breakdown.csv", "breakdown.svg", "accuracy.csv",
                     "cpv_matrix.csv", "cpv_matrix.svg", "adjudication.json"):
        assert f"desk10.{artifact}" in names, f"missing desk10.{artifact}"

    # Hand-built two-submission log: one accurate + one inaccurate PoV.
    mini = scenario_from_dict(
        {
            "name": "two", "teams": ["t1"], "end_time": 50000,
            "phases": [{
                "phase_id": "P1", "start": 0,
                "tasks": [{
                    "id": "c1", "project": "p", "language": "c", "mode": "full",
                    "open_time": 0, "harnesses": ["h1"],
                    "cpvs": [{"id": "v1", "trigger_signatures": ["sig"]}],
                }],
                "broadcasts": [],
            }],
        }
    )
    two_log = run(
        mini,
        [
            (0.0, {"type": "pov", "team": "t1", "challenge_id": "c1",
                   "harness": "h1", "payload_signature": "sig"}),
            (10.0, {"type": "pov", "team": "t1", "challenge_id": "c1",
                    "harness": "h1", "payload_signature": "wrong"}),
        ],
    )
    (row,) = accuracy_table(two_log)
    assert row.accuracy_pct["pov"] == F(50)
    assert row.penalty_pct == F(25, 4)  # 6.25%
    print(f"[acceptance] criterion 7: PASS  desk-scale run + all artifacts in "
          f"{elapsed:.1f} s; hand log: 50% accuracy, 6.25% penalty")


def _pov_based(sub, own_reproductions) -> bool:
    """A patch is PoV-based when an earlier own PoV matches what it fixes."""
    remediated = sub.body.effect.remediated_signatures
    return any(
        t <= sub.time and sigs & remediated
        for t, sigs in own_reproductions
    )


def test_criterion_8_policy_conformance():
    scenario = load_scenario(str(DESK_SCENARIO))
    base = dict(
        discovery={"*": Dist("exponential", 5000.0)},
        pov_false_rate=0.0,  # attribution needs true PoVs only
        patch_success=0.6,
        patch_latency=Dist("exponential", 800.0),
        sarif_judge_accuracy=0.8,
    )
    profiles = {
        "team-alpha": CapabilityProfile(**base),
        "team-bravo": CapabilityProfile(**{**base, "availability": 60000.0}),
        "team-charlie": CapabilityProfile(**base),
        "team-delta": CapabilityProfile(**base),
        "team-echo": CapabilityProfile(**base),
        "team-foxtrot": CapabilityProfile(**base),
        "team-golf": CapabilityProfile(**{**base, "availability": 30000.0}),
    }
    policies = {
        "team-alpha": StrategyPolicy(sarif_policy="pov_centric"),
        "team-bravo": StrategyPolicy(sarif_policy="pov_centric"),
        "team-charlie": StrategyPolicy(
            sarif_policy="bug_cand_centric",
            nopov_patch=NoPovPatchPolicy("before_deadline_minutes", 45.0),
        ),
        "team-delta": StrategyPolicy(
            sarif_policy="llm_judge_centric",
            nopov_patch=NoPovPatchPolicy("fraction_of_window", 0.5),
        ),
        "team-echo": StrategyPolicy(sarif_policy="llm_judge_centric"),
        "team-foxtrot": StrategyPolicy(sarif_policy="llm_judge_centric"),
        "team-golf": StrategyPolicy(
            sarif_policy="llm_judge_centric",
            nopov_patch=NoPovPatchPolicy("minutes_after_start", 90.0),
        ),
    }
    pov_centric = {t for t, p in policies.items() if p.sarif_policy == "pov_centric"}

    for seed in (1, 2, 3):
        log = simulate(scenario, profiles, policies, seed)
        tasks = {t.id: t for t in scenario.tasks()}
        subs = [e.submission for e in log.events if isinstance(e, Submit)]

        # (a) PoV-centric teams never submit an Incorrect verdict.
        from arena.model import SarifAssessment, Verdict

        for sub in subs:
            if sub.team in pov_centric and isinstance(sub.body, SarifAssessment):
                assert sub.body.verdict is Verdict.CORRECT, f"seed {seed}: {sub.id}"

        # (b) No no-PoV patch before its delay gate.
        from arena.model import Patch as PatchBody

        reproductions: dict[tuple[str, str], list] = {}
        for sub in subs:
            if isinstance(sub.body, Pov):
                task = tasks[sub.challenge_id]
                for cpv in task.cpvs:
                    if sub.body.payload_signature in cpv.trigger_signatures:
                        reproductions.setdefault((sub.team, sub.challenge_id), []).append(
                            (sub.time, frozenset(cpv.trigger_signatures))
                        )
        for sub in subs:
            if not isinstance(sub.body, PatchBody):
                continue
            own = reproductions.get((sub.team, sub.challenge_id), [])
            if _pov_based(sub, own):
                continue
            nopov = policies[sub.team].nopov_patch
            assert nopov is not None, f"seed {seed}: unexpected no-PoV patch {sub.id}"
            gate_time = nopov.start_time(tasks[sub.challenge_id])
            assert sub.time >= gate_time, f"seed {seed}: {sub.id} before delay gate"

        # (c) availability cutoffs hold.
        for sub in subs:
            cutoff = profiles[sub.team].availability
            if cutoff is not None:
                assert sub.time <= cutoff

    # (d) ASAP dominance: moving any PoV earlier never lowers the team score.
    small = scenario_from_dict(_mini_sim_scenario())
    prof = CapabilityProfile(
        discovery={"*": Dist("exponential", 9000.0)},
        patch_success=0.7,
        patch_latency=Dist("fixed", 500.0),
    )
    profs = {"t1": prof, "t2": prof}
    pols = {"t1": StrategyPolicy(), "t2": StrategyPolicy(sarif_policy="bug_cand_centric")}
    checked = 0
    for seed in (11, 12, 13):
        log = simulate(small, profs, pols, seed)
        baseline = finalize(log).team_totals()
        tasks = {t.id: t for t in small.tasks()}
        for idx, event in enumerate(log.events):
            if not (isinstance(event, Submit) and isinstance(event.submission.body, Pov)):
                continue
            sub = event.submission
            task = tasks[sub.challenge_id]
            earlier = (task.open_time + sub.time) / 2
            if earlier >= sub.time:
                continue
            import dataclasses

            moved = dataclasses.replace(sub, time=earlier)
            events = list(log.events)
            events[idx] = Submit(moved)
            shifted = EventLog(tuple(sorted(events, key=event_sort_key)))
            totals = finalize(shifted).team_totals()
            assert totals[sub.team] >= baseline[sub.team], (
                f"seed {seed}: earlier {sub.id} lowered the score"
            )
            checked += 1
    assert checked > 10
    print(f"[acceptance] criterion 8: PASS  policy predicates hold over 3 seeds; "
          f"ASAP dominance verified on {checked} shifted PoVs")
