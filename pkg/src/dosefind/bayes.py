"""Beta-binomial posterior machinery, safety rules, and MTD selection.

Per-dose DLT counts are modeled as Binomial(n_d, p_d) with independent Beta
priors on each p_d.  Two distinct priors appear:

* estimation prior Beta(0.005, 0.005) -- a near-point-mass-free prior whose
  posterior mean (x + 0.005) / (n + 0.01) is essentially the observed rate;
  used for MTD selection.
* safety prior, default Beta(1, 1) -- drives the "unacceptably toxic" veto
  Pr(p > p_target | x, n) > threshold.  The uniform default reproduces the
  unacceptable ("DU") cells of the reference decision tables produced by the
  tables module; pass SafetyConfig(prior=ESTIMATION_PRIOR) for the sharper
  variant.

MTD selection isotonizes posterior means with PAVA (weighted by inverse
posterior variance, i.e. precision, by default) and picks the treated dose
whose isotonized estimate is admissible and closest to the target.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Sequence, Union

from scipy.stats import beta as beta_dist

from .rules import (
    Decision,
    DoseIndex,
    DoseOutcome,
    EquivalenceInterval,
    RateLike,
    RawDecision,
    Verdict,
    apply_dose_boundaries,
    i3p3_raw,
)


@dataclass(frozen=True)
class BetaParams:
    """Parameters of a Beta distribution; both must be positive."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(f"Beta parameters must be positive, got {self}")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    @property
    def variance(self) -> float:
        s = self.alpha + self.beta
        return self.alpha * self.beta / (s * s * (s + 1.0))


#: Prior used for per-dose toxicity estimation (posterior means / variances).
ESTIMATION_PRIOR = BetaParams(0.005, 0.005)

#: Default prior behind the safety veto; see module docstring.
UNIFORM_PRIOR = BetaParams(1.0, 1.0)


@dataclass(frozen=True)
class SafetyConfig:
    """Threshold and prior for the excessive-toxicity veto."""

    threshold: float = 0.95
    prior: BetaParams = field(default_factory=lambda: UNIFORM_PRIOR)

    def __post_init__(self) -> None:
        if not 0 < self.threshold < 1:
            raise ValueError("threshold must be in (0, 1)")


@dataclass(frozen=True)
class DoseEstimate:
    """Per-dose summary entering MTD selection."""

    post_mean: float
    post_var: float
    n_treated: int
    n_dlt: int

    @classmethod
    def from_outcome(cls, outcome: DoseOutcome) -> "DoseEstimate":
        post = posterior(outcome, ESTIMATION_PRIOR)
        return cls(post.mean, post.variance, outcome.n_treated, outcome.n_dlt)


@dataclass(frozen=True)
class IsotonicEstimate:
    """Non-decreasing per-dose toxicity estimates (output of pava)."""

    values: tuple

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if any(b < a for a, b in zip(vals, vals[1:])):
            raise ValueError("isotonic estimates must be non-decreasing")


def posterior(outcome: DoseOutcome, prior: BetaParams) -> BetaParams:
    """Conjugate update: Beta(a + x, b + n - x)."""
    return BetaParams(
        prior.alpha + outcome.n_dlt,
        prior.beta + outcome.n_treated - outcome.n_dlt,
    )


def exceed_probability(post: BetaParams, p_target: RateLike) -> float:
    """Pr(p > p_target) under Beta(post); accurate to ~1e-13 via the
    regularized incomplete beta function."""
    return float(beta_dist.sf(float(p_target), post.alpha, post.beta))


def safety_veto(outcome: DoseOutcome, p_target: RateLike, cfg: SafetyConfig) -> bool:
    """True when the dose's posterior probability of exceeding the target
    crosses the veto threshold."""
    post = posterior(outcome, cfg.prior)
    return exceed_probability(post, p_target) > cfg.threshold


def posterior_mean(outcome: DoseOutcome) -> float:
    """(x + 0.005) / (n + 0.01): posterior mean under the estimation prior."""
    return (outcome.n_dlt + 0.005) / (outcome.n_treated + 0.01)


def pava(
    means: Sequence[float], weights: Sequence[float]
) -> IsotonicEstimate:
    """Weighted least-squares projection onto non-decreasing sequences.

    Standard pool-adjacent-violators: scan left to right keeping a stack of
    blocks; whenever a new block's mean falls below its predecessor's, merge
    them into one block at their weighted mean, and keep merging backwards
    while the violation persists.  Each pooled block ends up at the weighted
    mean of its members, which is both the L2-optimal monotone fit and
    idempotent under re-application.
    """
    if len(means) != len(weights):
        raise ValueError(
            f"means and weights differ in length: {len(means)} vs {len(weights)}"
        )
    if any(not w > 0 for w in weights):
        raise ValueError("weights must be strictly positive")
    # blocks of (pooled mean, total weight, member count)
    blocks: list = []
    for m, w in zip(means, weights):
        blocks.append((float(m), float(w), 1))
        while len(blocks) > 1 and blocks[-2][0] > blocks[-1][0]:
            m2, w2, c2 = blocks.pop()
            m1, w1, c1 = blocks.pop()
            w_tot = w1 + w2
            blocks.append(((m1 * w1 + m2 * w2) / w_tot, w_tot, c1 + c2))
    out: list = []
    for m, _w, count in blocks:
        out.extend([m] * count)
    return IsotonicEstimate(tuple(out))


def estimates_from_outcomes(
    outcomes: Sequence[DoseOutcome],
) -> "list[DoseEstimate]":
    return [DoseEstimate.from_outcome(o) for o in outcomes]


def select_mtd(
    estimates: Sequence[DoseEstimate],
    ei: EquivalenceInterval,
    pava_weights: str = "inverse_variance",
) -> Optional[int]:
    """Pick the MTD from per-dose estimates; None means no selection.

    Posterior means are isotonized with PAVA, then candidacy is restricted to
    doses with at least one treated patient and isotonized estimate at most
    p_target + eps_hi (exact comparison against the rational bound).  Among
    candidates the dose closest to the target wins; on ties, the lowest tied
    dose when the tied estimate exceeds the target, the highest when it does
    not.

    pava_weights selects the weighting: "inverse_variance" (default,
    precision weighting) or "variance" (literal variance weighting).
    """
    if not estimates:
        raise ValueError("at least one dose estimate is required")
    if pava_weights == "inverse_variance":
        weights = [1.0 / e.post_var for e in estimates]
    elif pava_weights == "variance":
        weights = [e.post_var for e in estimates]
    else:
        raise ValueError(f"unknown pava_weights mode: {pava_weights!r}")
    iso = pava([e.post_mean for e in estimates], weights).values
    pt = float(ei.p_target)
    candidates = [
        d
        for d in range(len(estimates))
        if estimates[d].n_treated > 0 and Fraction(iso[d]) <= ei.upper
    ]
    if not candidates:
        return None
    dist = {d: abs(iso[d] - pt) for d in candidates}
    best = min(dist.values())
    tied = [d for d in candidates if dist[d] <= best + 1e-9]
    if len(tied) == 1:
        return tied[0] + 1
    at_or_below = [d for d in tied if iso[d] <= pt]
    if not at_or_below:  # every tied estimate sits above the target
        return min(tied) + 1
    return max(at_or_below) + 1


#: Pseudo-counts the boundary design's companion selector puts on each dose
#: before isotonizing.  A heavier smoother than the estimation prior, per the
#: selector's published convention.
BOUNDARY_SELECTION_PRIOR = BetaParams(0.05, 0.05)


def boin_select_mtd(
    outcomes: Sequence[DoseOutcome],
    ei: EquivalenceInterval,
    safety: Optional[SafetyConfig] = None,
) -> Optional[int]:
    """MTD selection convention paired with the fixed-boundary design.

    Differs from select_mtd in two ways that matter for operating
    characteristics: estimates are smoothed toward 1/2 with Beta(0.05, 0.05)
    pseudo-counts, and there is NO upper cap on the isotonized estimate — the
    tried dose closest to the target wins outright, however toxic it looks,
    unless its own data trip the safety veto (that dose and everything above
    it are then unselectable).  Tie-breaking matches select_mtd.
    """
    if not outcomes:
        raise ValueError("at least one dose outcome is required")
    safety = safety if safety is not None else SafetyConfig()
    means, weights = [], []
    for outcome in outcomes:
        post = posterior(outcome, BOUNDARY_SELECTION_PRIOR)
        means.append(post.mean)
        weights.append(1.0 / post.variance)
    iso = pava(means, weights).values
    ceiling = len(outcomes)  # lowest vetoed dose bounds candidacy from above
    for d, outcome in enumerate(outcomes):
        if outcome.n_treated > 0 and safety_veto(outcome, ei.p_target, safety):
            ceiling = d
            break
    candidates = [d for d in range(ceiling) if outcomes[d].n_treated > 0]
    if not candidates:
        return None
    pt = float(ei.p_target)
    dist = {d: abs(iso[d] - pt) for d in candidates}
    best = min(dist.values())
    tied = [d for d in candidates if dist[d] <= best + 1e-9]
    if len(tied) == 1:
        return tied[0] + 1
    at_or_below = [d for d in tied if iso[d] <= pt]
    if not at_or_below:
        return min(tied) + 1
    return max(at_or_below) + 1


def _safety_adjusted(
    raw: RawDecision,
    outcome: DoseOutcome,
    dose: DoseIndex,
    p_target: RateLike,
    cfg: SafetyConfig,
    neighbor_outcomes: Dict[int, DoseOutcome],
) -> "tuple[Decision, Optional[int]]":
    """Compose a raw interval verdict with the safety rules.

    Returns (decision, excluded_from): excluded_from is the lowest dose index
    now permanently excluded (that dose and everything above it), or None.

    Order matters: the current dose's own veto overrides the raw verdict
    entirely (at dose 1 it terminates the trial; higher up it de-escalates
    and excludes the dose), and only then is an escalation checked against
    the target dose's accumulated data.
    """
    if safety_veto(outcome, p_target, cfg):
        if dose.value == 1:
            return Decision(Verdict.TERMINATE, None), 1
        return (
            Decision(Verdict.DEESCALATE_UNACCEPTABLE, dose.value - 1),
            dose.value,
        )
    decision = apply_dose_boundaries(raw, dose)
    if decision.verdict is Verdict.ESCALATE:
        target_data = neighbor_outcomes.get(decision.target_dose)
        if target_data is not None and safety_veto(target_data, p_target, cfg):
            return Decision(Verdict.STAY, dose.value), decision.target_dose
    return decision, None


def decision_with_safety(
    outcome: DoseOutcome,
    dose: DoseIndex,
    ei: EquivalenceInterval,
    cfg: Optional[SafetyConfig] = None,
    neighbor_outcomes: Optional[Dict[int, DoseOutcome]] = None,
) -> Decision:
    """Full per-cohort decision for the interval rule: the raw verdict, dose
    boundaries, and the safety rules (terminate at dose 1, exclude an
    escalation target, mark the current dose unacceptable)."""
    decision, _ = _safety_adjusted(
        i3p3_raw(outcome, ei),
        outcome,
        dose,
        ei.p_target,
        cfg if cfg is not None else SafetyConfig(),
        neighbor_outcomes or {},
    )
    return decision
