"""Scoring formulas: time decay, capability weights, accuracy multiplier,
bundle score, challenge score, and team score.

All arithmetic is exact (:class:`fractions.Fraction`), so a scoreboard
computed twice from the same log is identical bit for bit. Timestamps enter
as floats and are converted exactly; every downstream value stays rational.

Two formulas are interpolations documented here once:

* the decay between the fixed endpoints (1.0 immediately, 0.5 at the
  deadline) is linear;
* the bundle magnitude is ``(pov + patch) / 2 + 3 * sarif``, which hits the
  +7 three-way and +4 two-way maxima at full decay and stays within [-7, 7].

Both are isolated behind one function each so they can be swapped if an
official form ever surfaces.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .model import ArenaError, Timestamp

HALF = Fraction(1, 2)


class Capability(enum.Enum):
    POV = "pov"
    PATCH = "patch"
    SARIF = "sarif"


CAPABILITY_WEIGHT = {
    Capability.POV: Fraction(2),
    Capability.PATCH: Fraction(6),
    Capability.SARIF: Fraction(1),
}


class OutOfWindow(ArenaError):
    def __init__(self, submit: Timestamp, open_time: Timestamp, deadline: Timestamp):
        super().__init__(f"submission at {submit} outside window [{open_time}, {deadline}]")


class InsufficientPairings(ArenaError):
    pass


def time_decay(submit: Timestamp, open_time: Timestamp, deadline: Timestamp) -> Fraction:
    """Decay factor in [1/2, 1]: 1 at the window open, 1/2 at the deadline.

    For assessments of a broadcast, pass the broadcast time as ``open_time``.
    """
    if not (open_time <= submit <= deadline):
        raise OutOfWindow(submit, open_time, deadline)
    width = Fraction(deadline) - Fraction(open_time)
    if width == 0:
        return Fraction(1)
    remaining = Fraction(deadline) - Fraction(submit)
    return HALF + HALF * remaining / width


def capability_points(kind: Capability, tau: Fraction) -> Fraction:
    """Points for one accurate, scored submission: weight times decay."""
    return CAPABILITY_WEIGHT[kind] * tau


def accuracy_multiplier(accurate: int, inaccurate: int) -> Fraction:
    """Quartic accuracy penalty: ``1 - (1 - a)^4`` with ``a`` the accurate
    share of counted submissions; 1 when nothing was counted.

    Checkpoints: a=0.9 -> 0.9999, a=0.5 -> 0.9375, a=0.4 -> 0.8704.
    """
    if accurate < 0 or inaccurate < 0:
        raise ValueError("counts must be non-negative")
    counted = accurate + inaccurate
    if counted == 0:
        return Fraction(1)
    a = Fraction(accurate, counted)
    return 1 - (1 - a) ** 4


def bundle_points(
    pov_pts: Fraction | None,
    patch_pts: Fraction | None,
    sarif_pts: Fraction | None,
    sign: int,
) -> Fraction:
    """Score of one bundle from the decayed scores of its linked findings.

    ``sign`` is +1 when every claimed pairing is correct, -1 otherwise.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    present = sum(p is not None for p in (pov_pts, patch_pts, sarif_pts))
    if present < 2:
        raise InsufficientPairings("a bundle needs at least two linked findings")
    magnitude = (
        ((pov_pts or Fraction(0)) + (patch_pts or Fraction(0))) / 2
        + 3 * (sarif_pts or Fraction(0))
    )
    return sign * magnitude


@dataclass(frozen=True)
class ChallengeScore:
    team: str
    challenge: str
    pov_total: Fraction
    patch_total: Fraction
    sarif_total: Fraction
    bundle_total: Fraction
    am: Fraction
    final: Fraction

    @property
    def pre_penalty(self) -> Fraction:
        return self.pov_total + self.patch_total + self.sarif_total + self.bundle_total


def challenge_score(
    team: str,
    challenge: str,
    pov_total: Fraction,
    patch_total: Fraction,
    sarif_total: Fraction,
    bundle_total: Fraction,
    am: Fraction,
) -> ChallengeScore:
    """Final challenge score: accuracy multiplier times the capability sum."""
    final = am * (pov_total + patch_total + sarif_total + bundle_total)
    return ChallengeScore(
        team=team,
        challenge=challenge,
        pov_total=pov_total,
        patch_total=patch_total,
        sarif_total=sarif_total,
        bundle_total=bundle_total,
        am=am,
        final=final,
    )


def team_score(scores: list[ChallengeScore] | tuple[ChallengeScore, ...]) -> Fraction:
    """A team's total: the plain sum of its challenge scores."""
    return sum((s.final for s in scores), Fraction(0))


@dataclass(frozen=True)
class ScoringReport:
    """Per-(team, challenge) scores for one finished log."""

    challenge_scores: tuple[ChallengeScore, ...]

    def teams(self) -> list[str]:
        return sorted({s.team for s in self.challenge_scores})

    def challenges(self) -> list[str]:
        return sorted({s.challenge for s in self.challenge_scores})

    def of(self, team: str, challenge: str) -> ChallengeScore | None:
        for s in self.challenge_scores:
            if s.team == team and s.challenge == challenge:
                return s
        return None

    def team_scores(self, team: str) -> list[ChallengeScore]:
        return [s for s in self.challenge_scores if s.team == team]

    def team_totals(self) -> dict[str, Fraction]:
        totals: dict[str, Fraction] = {t: Fraction(0) for t in self.teams()}
        for s in self.challenge_scores:
            totals[s.team] += s.final
        return totals


def canon_number(value: Fraction) -> str:
    """Canonical exact rendering of a score.

    Integers render bare, fractions with a power-of-ten denominator render as
    exact decimals, everything else as ``numerator/denominator``.
    """
    n, d = value.numerator, value.denominator
    if d == 1:
        return str(n)
    twos = 0
    rest = d
    while rest % 2 == 0:
        rest //= 2
        twos += 1
    fives = 0
    while rest % 5 == 0:
        rest //= 5
        fives += 1
    if rest != 1:
        return f"{n}/{d}"
    k = max(twos, fives)
    scaled = abs(n) * (10**k // d)
    digits = str(scaled).rjust(k + 1, "0")
    whole, frac = digits[:-k], digits[-k:].rstrip("0")
    sign = "-" if n < 0 else ""
    return f"{sign}{whole}.{frac}" if frac else f"{sign}{whole}"


def parse_canon_number(text: str) -> Fraction:
    return Fraction(text)
