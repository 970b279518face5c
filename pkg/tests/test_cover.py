from __future__ import annotations

import itertools
import random

from arena.cover import PatchCandidate, select_minimal_patch_set, selection_key


def brute_force_selection(
    candidates: list[PatchCandidate], universe: frozenset[str] | None = None
) -> frozenset[str]:
    """Independent oracle: enumerate every subset and take the best cover by
    (size, total breadth, sorted submit times, sorted ids)."""
    coverable = frozenset().union(*(c.covered for c in candidates)) if candidates else frozenset()
    target = coverable if universe is None else universe & coverable
    if not target:
        return frozenset()
    best_key = None
    best: tuple[PatchCandidate, ...] = ()
    for r in range(len(candidates) + 1):
        for combo in itertools.combinations(candidates, r):
            covered = frozenset().union(*(c.covered for c in combo)) if combo else frozenset()
            if not target <= covered:
                continue
            key = selection_key(combo)
            if best_key is None or key < best_key:
                best_key = key
                best = combo
    return frozenset(c.patch_id for c in best)


def cand(pid: str, covered: set[str], time: float) -> PatchCandidate:
    return PatchCandidate(pid, frozenset(covered), time)


class TestSelectMinimalPatchSet:
    def test_single_broad_patch_beats_two_narrow(self):
        cands = [
            cand("p1", {"v1"}, 1.0),
            cand("p2", {"v2"}, 2.0),
            cand("p3", {"v1", "v2"}, 3.0),
        ]
        assert select_minimal_patch_set(cands).selected == frozenset({"p3"})

    def test_forced_broad_patch_when_universe_needs_it(self):
        cands = [cand("p1", {"v1"}, 1.0), cand("p3", {"v1", "v2"}, 2.0)]
        assert select_minimal_patch_set(cands).selected == frozenset({"p3"})

    def test_specificity_when_broad_cover_is_unvalidated(self):
        # Same candidates, but v2 is not validated: the narrow patch wins the
        # breadth tie-break even though the broad one was submitted earlier.
        cands = [cand("p1", {"v1"}, 2.0), cand("p3", {"v1", "v2"}, 1.0)]
        selection = select_minimal_patch_set(cands, universe=frozenset({"v1"}))
        assert selection.selected == frozenset({"p1"})

    def test_empty_candidates_empty_selection(self):
        selection = select_minimal_patch_set([])
        assert selection.selected == frozenset()
        assert selection.method == "exact"

    def test_time_tie_break_prefers_earlier(self):
        cands = [cand("late", {"v1"}, 5.0), cand("early", {"v1"}, 1.0)]
        assert select_minimal_patch_set(cands).selected == frozenset({"early"})

    def test_id_tie_break_when_times_equal(self):
        cands = [cand("b", {"v1"}, 1.0), cand("a", {"v1"}, 1.0)]
        assert select_minimal_patch_set(cands).selected == frozenset({"a"})

    def test_matches_oracle_on_random_instances(self):
        rng = random.Random(42)
        for trial in range(120):
            n_cpvs = rng.randint(1, 6)
            n_cands = rng.randint(0, 9)
            cpvs = [f"v{i}" for i in range(n_cpvs)]
            cands = []
            for i in range(n_cands):
                covered = {v for v in cpvs if rng.random() < 0.4}
                if not covered:
                    covered = {rng.choice(cpvs)}
                # Coarse times so ties are common and the deeper tie-breaks
                # actually fire.
                cands.append(cand(f"p{i:02d}", covered, float(rng.randint(0, 3))))
            expected = brute_force_selection(cands)
            got = select_minimal_patch_set(cands)
            assert got.selected == expected, f"trial {trial}: {got.selected} != {expected}"
            assert got.method == "exact"

    def test_matches_oracle_with_explicit_universe(self):
        rng = random.Random(43)
        for _ in range(60):
            cpvs = [f"v{i}" for i in range(5)]
            cands = [
                cand(
                    f"p{i}",
                    {v for v in cpvs if rng.random() < 0.5} or {rng.choice(cpvs)},
                    float(rng.randint(0, 2)),
                )
                for i in range(7)
            ]
            universe = frozenset(v for v in cpvs if rng.random() < 0.6)
            expected = brute_force_selection(cands, universe)
            got = select_minimal_patch_set(cands, universe)
            assert got.selected == expected

    def test_greedy_fallback_is_flagged_and_covers(self):
        rng = random.Random(7)
        cpvs = [f"v{i}" for i in range(10)]
        cands = [
            cand(f"p{i:02d}", {v for v in cpvs if rng.random() < 0.3} or {cpvs[i % 10]}, float(i))
            for i in range(30)
        ]
        selection = select_minimal_patch_set(cands)
        assert selection.method == "greedy"
        covered = frozenset().union(*(c.covered for c in cands if c.patch_id in selection.selected))
        assert frozenset(cpvs) <= covered | frozenset(
            v for v in cpvs if not any(v in c.covered for c in cands)
        )

    def test_deterministic_across_input_orderings(self):
        rng = random.Random(9)
        cands = [
            cand(f"p{i}", {f"v{rng.randint(0, 4)}", f"v{rng.randint(0, 4)}"}, float(rng.randint(0, 2)))
            for i in range(8)
        ]
        baseline = select_minimal_patch_set(cands)
        for _ in range(10):
            shuffled = cands[:]
            rng.shuffle(shuffled)
            assert select_minimal_patch_set(shuffled) == baseline
