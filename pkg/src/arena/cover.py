"""Minimal covering patch set selection.

Given passing patches and the vulnerabilities each one fully remediates,
pick the set that is credited: the smallest number of patches that jointly
cover every validated vulnerability. Ties are broken toward specificity
(smallest total breadth, i.e. patches fixing fewer vulnerabilities win over
broader ones), then toward the earliest sorted submit-time vector, then the
lexicographically smallest sorted id vector, so the selection is a total
order and replay-deterministic.

The target universe defaults to the union of all candidate covers but can be
narrowed to the validated subset; breadth always counts a candidate's full
cover, so a patch that also fixes out-of-universe vulnerabilities loses
specificity ties against a narrower one.

Instances are tiny in practice, so an exact branch-and-bound runs up to
``EXACT_LIMIT`` candidates; beyond that a greedy heuristic takes over and the
selection is flagged so reports can surface the approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

EXACT_LIMIT = 24

SelectionKey = tuple[int, int, tuple[float, ...], tuple[str, ...]]


@dataclass(frozen=True)
class PatchCandidate:
    patch_id: str
    covered: frozenset[str]
    submit_time: float


@dataclass(frozen=True)
class Selection:
    selected: frozenset[str]
    method: str  # "exact" or "greedy"


def selection_key(chosen: Iterable[PatchCandidate]) -> SelectionKey:
    """Total order on covers: size, then breadth, then times, then ids."""
    items = list(chosen)
    return (
        len(items),
        sum(len(c.covered) for c in items),
        tuple(sorted(c.submit_time for c in items)),
        tuple(sorted(c.patch_id for c in items)),
    )


def _exact_best(
    cands: Sequence[PatchCandidate], masks: Sequence[int], full: int
) -> list[PatchCandidate]:
    breadths = [len(c.covered) for c in cands]
    coverers: dict[int, list[int]] = {}
    for e in range(full.bit_length()):
        b = 1 << e
        coverers[b] = [i for i, m in enumerate(masks) if m & b]

    best_key: SelectionKey | None = None
    best: list[int] = []
    seen: set[frozenset[int]] = set()

    def dfs(covered_mask: int, chosen: list[int], breadth: int) -> None:
        nonlocal best_key, best
        state = frozenset(chosen)
        if state in seen:
            return
        seen.add(state)
        if covered_mask == full:
            key = selection_key([cands[i] for i in chosen])
            if best_key is None or key < best_key:
                best_key = key
                best = list(chosen)
            return
        remaining = full & ~covered_mask
        remaining_count = remaining.bit_count()
        max_gain = max((m & remaining).bit_count() for m in masks)
        if max_gain == 0:
            return
        if best_key is not None:
            size_lb = len(chosen) + math.ceil(remaining_count / max_gain)
            breadth_lb = breadth + remaining_count
            # Prune only strictly dominated branches; ties must be explored
            # because the time/id vectors can still win.
            if (size_lb, breadth_lb) > (best_key[0], best_key[1]):
                return
        # Branch on the uncovered vulnerability with the fewest coverers.
        elem = min(
            (1 << e for e in range(full.bit_length()) if remaining & (1 << e)),
            key=lambda b: len(coverers[b]),
        )
        options = sorted(
            coverers[elem],
            key=lambda i: (
                -(masks[i] & remaining).bit_count(),
                breadths[i],
                cands[i].submit_time,
                cands[i].patch_id,
            ),
        )
        for i in options:
            chosen.append(i)
            dfs(covered_mask | masks[i], chosen, breadth + breadths[i])
            chosen.pop()

    dfs(0, [], 0)
    return [cands[i] for i in best]


def _greedy_cover(
    cands: Sequence[PatchCandidate], masks: Sequence[int], full: int
) -> list[PatchCandidate]:
    remaining = full
    pool = list(range(len(cands)))
    chosen: list[PatchCandidate] = []
    while remaining:
        pick = min(
            pool,
            key=lambda i: (
                -(masks[i] & remaining).bit_count(),
                len(cands[i].covered),
                cands[i].submit_time,
                cands[i].patch_id,
            ),
        )
        if not masks[pick] & remaining:
            break
        chosen.append(cands[pick])
        remaining &= ~masks[pick]
        pool.remove(pick)
    return chosen


def select_minimal_patch_set(
    candidates: Iterable[PatchCandidate],
    universe: frozenset[str] | None = None,
) -> Selection:
    """Pick the credited cover of ``universe``.

    ``universe`` defaults to everything the candidates cover; an explicit
    universe is intersected with that, so the target is always coverable.
    An empty candidate set yields an empty selection.
    """
    cands = sorted(candidates, key=lambda c: (c.submit_time, c.patch_id))
    coverable = frozenset().union(*(c.covered for c in cands)) if cands else frozenset()
    target = coverable if universe is None else universe & coverable
    if not target:
        return Selection(frozenset(), "exact")
    order = sorted(target)
    bit = {cpv: 1 << i for i, cpv in enumerate(order)}
    full = (1 << len(order)) - 1
    # Candidates contributing nothing to the universe can never be selected.
    useful = [c for c in cands if c.covered & target]
    masks = [sum(bit[v] for v in c.covered if v in target) for c in useful]
    if len(useful) <= EXACT_LIMIT:
        chosen = _exact_best(useful, masks, full)
        method = "exact"
    else:
        chosen = _greedy_cover(useful, masks, full)
        method = "greedy"
    return Selection(frozenset(c.patch_id for c in chosen), method)
