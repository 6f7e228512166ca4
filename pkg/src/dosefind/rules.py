"""Stateless decision rules for interval-based dose-finding designs.

The central rule compares the observed DLT rate x/n at the current dose --
and the next-lowest achievable rate (x-1)/n -- against a closed equivalence
interval [p_target - eps_lo, p_target + eps_hi]:

    x/n below the interval                      -> escalate
    x/n inside the interval                     -> stay
    x/n above, (x-1)/n below (rate straddles)   -> stay
    x/n above, (x-1)/n inside or above          -> de-escalate

Dose-boundary special cases (no dose above the top, none below the bottom)
turn the blocked moves into "stay".  The classic 3+3 rule and the
fixed-boundary interval comparison (escalate at or under a low cutoff,
de-escalate at or over a high one) live here too, since they share the same
shape: pure functions of (x, n, dose position).

All rate comparisons are exact rational arithmetic so that boundary cells
(e.g. an observed rate exactly equal to an interval bound) never depend on
floating-point rounding and generated decision tables are bit-stable.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Union

RateLike = Union[int, float, str, Fraction]


def as_fraction(value: RateLike) -> Fraction:
    """Exact rational for a probability given as int, float, str or Fraction.

    Floats are converted through their shortest decimal repr, so
    as_fraction(0.05) is exactly 1/20 and bounds like 0.1 - 0.05 stay on the
    decimal grid instead of picking up binary round-off.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


class Region(Enum):
    """Where a rate sits relative to an equivalence interval."""

    BELOW = "below"
    INSIDE = "inside"
    ABOVE = "above"


class RawDecision(Enum):
    """Rule verdict before dose-boundary or safety adjustments."""

    ESCALATE = "E"
    STAY = "S"
    DEESCALATE = "D"


class Verdict(Enum):
    """Final per-cohort verdict, after boundaries and safety rules."""

    ESCALATE = "E"
    STAY = "S"
    DEESCALATE = "D"
    DEESCALATE_UNACCEPTABLE = "DU"
    TERMINATE = "T"


@dataclass(frozen=True)
class EquivalenceInterval:
    """Closed interval [p_target - eps_lo, p_target + eps_hi] of acceptable
    toxicity rates around the target p_target.

    A zero-width interval (eps_lo == eps_hi == 0) is permitted; it degenerates
    to the single point {p_target}.
    """

    p_target: Fraction
    eps_lo: Fraction
    eps_hi: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "p_target", as_fraction(self.p_target))
        object.__setattr__(self, "eps_lo", as_fraction(self.eps_lo))
        object.__setattr__(self, "eps_hi", as_fraction(self.eps_hi))
        if not 0 < self.p_target < 1:
            raise ValueError(f"p_target must be in (0, 1), got {self.p_target}")
        if self.eps_lo < 0 or self.eps_hi < 0:
            raise ValueError("interval half-widths must be non-negative")
        if self.lower < 0:
            raise ValueError(f"interval lower bound {self.lower} is negative")
        if self.upper > 1:
            raise ValueError(f"interval upper bound {self.upper} exceeds 1")

    @property
    def lower(self) -> Fraction:
        return self.p_target - self.eps_lo

    @property
    def upper(self) -> Fraction:
        return self.p_target + self.eps_hi


@dataclass(frozen=True)
class DoseOutcome:
    """Cumulative outcome at one dose: n_treated patients, n_dlt DLTs."""

    n_treated: int
    n_dlt: int

    def __post_init__(self) -> None:
        if self.n_treated < 0 or self.n_dlt < 0:
            raise ValueError("counts must be non-negative")
        if self.n_dlt > self.n_treated:
            raise ValueError(
                f"n_dlt ({self.n_dlt}) cannot exceed n_treated ({self.n_treated})"
            )


@dataclass(frozen=True)
class DoseIndex:
    """1-based position of the current dose among `total` ascending doses."""

    value: int
    total: int

    def __post_init__(self) -> None:
        if self.total < 1:
            raise ValueError("total doses must be >= 1")
        if not 1 <= self.value <= self.total:
            raise ValueError(f"dose {self.value} outside 1..{self.total}")


@dataclass(frozen=True)
class BoinBoundaries:
    """Fixed escalation/de-escalation cutoffs: escalate at rates <= lambda_e,
    de-escalate at rates >= lambda_d."""

    lambda_e: Fraction
    lambda_d: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "lambda_e", as_fraction(self.lambda_e))
        object.__setattr__(self, "lambda_d", as_fraction(self.lambda_d))
        if not self.lambda_e < self.lambda_d:
            raise ValueError("lambda_e must be strictly below lambda_d")

    @classmethod
    def from_target(cls, p_target: RateLike) -> "BoinBoundaries":
        """Cutoffs 0.05 below/above the target, the calibration used when
        comparing against equal-width interval designs."""
        pt = as_fraction(p_target)
        return cls(pt - Fraction(1, 20), pt + Fraction(1, 20))


@dataclass(frozen=True)
class Decision:
    """A verdict plus the dose the next cohort should receive.

    target_dose is None exactly when the verdict is TERMINATE.  A verdict of
    DEESCALATE_UNACCEPTABLE additionally means the current dose (and every
    dose above it) is permanently excluded from the trial.
    """

    verdict: Verdict
    target_dose: Union[int, None]

    def __post_init__(self) -> None:
        if self.verdict is Verdict.TERMINATE:
            if self.target_dose is not None:
                raise ValueError("TERMINATE carries no target dose")
        else:
            if self.target_dose is None or self.target_dose < 1:
                raise ValueError(f"{self.verdict} requires a target dose >= 1")


def classify_vs_interval(rate: RateLike, ei: EquivalenceInterval) -> Region:
    """Classify a rate against the closed interval.  Both bounds count as
    INSIDE.  Rates below 0 (the formal (x-1)/n at x=0) classify BELOW."""
    r = as_fraction(rate)
    if r < ei.lower:
        return Region.BELOW
    if r > ei.upper:
        return Region.ABOVE
    return Region.INSIDE


def i3p3_raw(outcome: DoseOutcome, ei: EquivalenceInterval) -> RawDecision:
    """The interval rule on the current dose's cumulative (x, n).

    Requires at least one treated patient (no rate exists otherwise).
    """
    n, x = outcome.n_treated, outcome.n_dlt
    if n < 1:
        raise ValueError("no patients treated at this dose; no rate to classify")
    where = classify_vs_interval(Fraction(x, n), ei)
    if where is Region.BELOW:
        return RawDecision.ESCALATE
    if where is Region.INSIDE:
        return RawDecision.STAY
    # x/n is above the interval; the verdict turns on where (x-1)/n falls.
    # When even one fewer DLT would have been below the interval, the 1/n
    # grid is too coarse to tell "too toxic" from "acceptable": stay.
    if classify_vs_interval(Fraction(x - 1, n), ei) is Region.BELOW:
        return RawDecision.STAY
    return RawDecision.DEESCALATE


def apply_dose_boundaries(raw: RawDecision, dose: DoseIndex) -> Decision:
    """Turn a raw verdict into a dose move, clamping at the ends of the
    dose ladder: escalation at the top dose and de-escalation at the bottom
    dose both become stay."""
    d = dose.value
    if raw is RawDecision.ESCALATE:
        if d == dose.total:
            return Decision(Verdict.STAY, d)
        return Decision(Verdict.ESCALATE, d + 1)
    if raw is RawDecision.DEESCALATE:
        if d == 1:
            return Decision(Verdict.STAY, 1)
        return Decision(Verdict.DEESCALATE, d - 1)
    return Decision(Verdict.STAY, d)


def three_plus_three_decision(outcome: DoseOutcome, dose: DoseIndex) -> Decision:
    """Classic 3+3 rule at its two decision points.

    With 3 treated: 0 DLT escalate, 1 DLT stay (enroll three more),
    2+ DLT de-escalate.  With 6 treated: at most 1 DLT escalate, otherwise
    de-escalate.  Trial-level stopping (e.g. the de-escalation target already
    holds six patients) belongs to the conduct layer.
    """
    n, x = outcome.n_treated, outcome.n_dlt
    if n == 3:
        if x == 0:
            raw = RawDecision.ESCALATE
        elif x == 1:
            raw = RawDecision.STAY
        else:
            raw = RawDecision.DEESCALATE
    elif n == 6:
        raw = RawDecision.ESCALATE if x <= 1 else RawDecision.DEESCALATE
    else:
        raise ValueError(
            f"3+3 decisions are defined at 3 or 6 patients per dose, got n={n}"
        )
    return apply_dose_boundaries(raw, dose)


def boin_decision(
    outcome: DoseOutcome, bounds: BoinBoundaries, dose: DoseIndex
) -> Decision:
    """Fixed-boundary comparison: escalate at rate <= lambda_e, de-escalate at
    rate >= lambda_d, stay strictly between.  Ties at a boundary resolve away
    from stay."""
    n, x = outcome.n_treated, outcome.n_dlt
    if n < 1:
        raise ValueError("no patients treated at this dose; no rate to classify")
    rate = Fraction(x, n)
    if rate <= bounds.lambda_e:
        raw = RawDecision.ESCALATE
    elif rate >= bounds.lambda_d:
        raw = RawDecision.DEESCALATE
    else:
        raw = RawDecision.STAY
    return apply_dose_boundaries(raw, dose)
