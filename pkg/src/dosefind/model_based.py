"""Model-based comparator designs: a one-parameter power model ("crm") and a
two-parameter logistic model with overdose control ("blrm").

Both posteriors are computed by deterministic grid quadrature rather than
MCMC: the power model uses 2001 uniform points in log(theta) spanning the
prior mean +/- 6 prior standard deviations; the logistic model a 201x201
grid over (log alpha, log beta) spanned the same way per axis.  That makes
recommendations exactly reproducible, testable against refined grids, and
fast enough to sit inside simulation loops.

Conduct conventions shared by both designs:
* trials start at dose 1 (enforced by the conduct layer);
* no skipping on the way up -- the next dose never exceeds
  min(current + 1, highest tried + 1);
* safety rules: terminate when dose 1's own data crosses the veto threshold,
  and never escalate onto a dose whose accumulated data crosses it;
* the power model additionally refuses to escalate straight after a cohort
  whose observed DLT fraction exceeded the target (coherence).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import log_expit, logit

from .bayes import SafetyConfig, safety_veto
from .rules import (
    Decision,
    DoseIndex,
    DoseOutcome,
    RateLike,
    Verdict,
    as_fraction,
)

CRM_GRID_POINTS = 2001
BLRM_GRID_POINTS = 201
_GRID_SD_SPAN = 6.0


@dataclass(frozen=True)
class TrialData:
    """Per-dose cumulative counts across the whole trial."""

    n: Tuple[int, ...]
    y: Tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))
        object.__setattr__(self, "y", tuple(int(v) for v in self.y))
        if len(self.n) != len(self.y):
            raise ValueError("n and y must have the same length")
        if any(yi > ni or yi < 0 or ni < 0 for ni, yi in zip(self.n, self.y)):
            raise ValueError("need 0 <= y_i <= n_i at every dose")

    @property
    def n_doses(self) -> int:
        return len(self.n)

    def outcome(self, dose: int) -> DoseOutcome:
        return DoseOutcome(self.n[dose - 1], self.y[dose - 1])

    def highest_tried(self) -> int:
        tried = [i + 1 for i, ni in enumerate(self.n) if ni > 0]
        return max(tried) if tried else 0


def default_skeleton(
    p_target: RateLike, n_doses: int = 6, anchor: int = 3, half_width: float = 0.05
) -> Tuple[float, ...]:
    """Default prior toxicity guesses for the power model.

    Anchored recursion: the anchor dose sits at the target, and successive
    doses follow log c_{k+1} = log c_k * log(pt + w) / log(pt - w) upward
    (reciprocal ratio downward).  Configuration, not derived from any
    publication; the canonical six-dose targets ship pre-computed in
    data/crm_skeletons.json and are loaded from there.
    """
    pt = float(as_fraction(p_target))
    if n_doses == 6:
        stored = _stored_skeletons().get(str(as_fraction_str(p_target)))
        if stored is not None:
            return tuple(stored)
    if not (0 < pt - half_width and pt + half_width < 1):
        raise ValueError("target too close to 0/1 for the default recursion")
    if not 1 <= anchor <= n_doses:
        raise ValueError("anchor dose outside the ladder")
    up = math.log(pt + half_width) / math.log(pt - half_width)
    vals = [0.0] * n_doses
    vals[anchor - 1] = pt
    lg = math.log(pt)
    for k in range(anchor, n_doses):
        lg *= up
        vals[k] = math.exp(lg)
    lg = math.log(pt)
    for k in range(anchor - 2, -1, -1):
        lg /= up
        vals[k] = math.exp(lg)
    return tuple(vals)


def as_fraction_str(p_target: RateLike) -> str:
    """Canonical short decimal for common targets ("0.1", "0.17", "0.3")."""
    f = as_fraction(p_target)
    s = str(float(f))
    return s


_SKELETON_CACHE: Optional[dict] = None


def _stored_skeletons() -> dict:
    global _SKELETON_CACHE
    if _SKELETON_CACHE is None:
        text = (
            resources.files("dosefind").joinpath("data/crm_skeletons.json").read_text()
        )
        raw = json.loads(text)
        _SKELETON_CACHE = {k: v for k, v in raw.items() if not k.startswith("_")}
    return _SKELETON_CACHE


@dataclass(frozen=True)
class CrmConfig:
    """Power-model configuration: p_i = skeleton_i ** theta with a lognormal
    prior on theta (log theta ~ Normal(mean, var))."""

    skeleton: Tuple[float, ...]
    p_target: Fraction
    log_theta_prior_mean: float = 0.0
    log_theta_prior_var: float = 1.34
    safety: SafetyConfig = field(default_factory=SafetyConfig)

    def __post_init__(self) -> None:
        object.__setattr__(self, "skeleton", tuple(float(c) for c in self.skeleton))
        object.__setattr__(self, "p_target", as_fraction(self.p_target))
        if any(not 0 < c < 1 for c in self.skeleton):
            raise ValueError("skeleton values must lie strictly in (0, 1)")
        if any(b <= a for a, b in zip(self.skeleton, self.skeleton[1:])):
            raise ValueError("skeleton must be strictly increasing")
        if self.log_theta_prior_var <= 0:
            raise ValueError("prior variance must be positive")

    @classmethod
    def default(cls, p_target: RateLike, n_doses: int = 6) -> "CrmConfig":
        return cls(default_skeleton(p_target, n_doses), as_fraction(p_target))


@dataclass(frozen=True)
class BlrmHyper:
    """Bivariate normal prior on (log alpha, log beta)."""

    mu1: float
    mu2: float = 0.0
    sigma1: float = 2.0
    sigma2: float = 1.0
    rho: float = 0.0

    def __post_init__(self) -> None:
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            raise ValueError("prior scales must be positive")
        if not -1 < self.rho < 1:
            raise ValueError("rho must lie strictly inside (-1, 1)")


@dataclass(frozen=True)
class BlrmConfig:
    """Two-parameter logistic configuration:
    logit(p_i) = log(alpha) + beta * log(d_i / d_ref).

    The targeted toxicity interval is (p_target - eps_lo, p_target + eps_hi];
    a dose is admissible only while Pr(p_i > p_target + eps_hi) < p_ewoc.
    Set literal_shifted_interval=True for the shifted variant
    (p_target + eps_lo, p_target + eps_hi] -- not recommended, provided for
    completeness.
    """

    raw_doses: Tuple[float, ...]
    ref_dose: float
    p_target: Fraction
    eps_lo: Fraction = Fraction(1, 20)
    eps_hi: Fraction = Fraction(1, 20)
    hyper: Optional[BlrmHyper] = None
    p_ewoc: float = 0.5
    safety: SafetyConfig = field(default_factory=SafetyConfig)
    literal_shifted_interval: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "raw_doses", tuple(float(d) for d in self.raw_doses))
        object.__setattr__(self, "p_target", as_fraction(self.p_target))
        object.__setattr__(self, "eps_lo", as_fraction(self.eps_lo))
        object.__setattr__(self, "eps_hi", as_fraction(self.eps_hi))
        if any(d <= 0 for d in self.raw_doses) or self.ref_dose <= 0:
            raise ValueError("doses must be positive")
        if any(b <= a for a, b in zip(self.raw_doses, self.raw_doses[1:])):
            raise ValueError("raw doses must be strictly increasing")
        if not 0 < self.p_ewoc <= 1:
            raise ValueError("p_ewoc must be in (0, 1]")
        if self.hyper is None:
            object.__setattr__(
                self, "hyper", BlrmHyper(mu1=float(logit(float(self.p_target))))
            )

    @classmethod
    def default(cls, p_target: RateLike, n_doses: int = 6) -> "BlrmConfig":
        # Raw dose levels 5, 10, ... with the middle dose as reference; only
        # the ratios d_i / d_ref matter to the model.
        raw = tuple(5.0 * (i + 1) for i in range(n_doses))
        ref = raw[math.ceil((n_doses + 1) / 2) - 1]
        return cls(raw, ref, as_fraction(p_target))

    @property
    def interval_bounds(self) -> Tuple[float, float]:
        pt = float(self.p_target)
        lo = pt + float(self.eps_lo) if self.literal_shifted_interval else pt - float(self.eps_lo)
        return lo, pt + float(self.eps_hi)


@dataclass(frozen=True, eq=False)
class GridPosterior:
    """Normalized posterior masses over a deterministic parameter grid.

    axes holds the grid coordinates (one array for the power model's
    log theta; two arrays for the logistic model's log alpha / log beta);
    masses matches the axes' outer shape and sums to 1.
    """

    axes: Tuple[np.ndarray, ...]
    masses: np.ndarray

    def __post_init__(self) -> None:
        total = float(self.masses.sum())
        if not math.isfinite(total) or abs(total - 1.0) > 1e-10:
            raise ValueError(f"posterior masses must sum to 1, got {total}")
        if float(self.masses.min()) < 0:
            raise ValueError("posterior masses must be non-negative")


def _normalize_log_density(logpost: np.ndarray) -> np.ndarray:
    peak = logpost.max()
    if not math.isfinite(peak):
        raise ValueError(
            "grid underflow: posterior vanished everywhere (degenerate hyperparameters)"
        )
    masses = np.exp(logpost - peak)
    total = masses.sum()
    if total <= 0 or not math.isfinite(total):
        raise ValueError(
            "grid underflow: posterior vanished everywhere (degenerate hyperparameters)"
        )
    return masses / total


def _crm_grid(cfg: CrmConfig, n_points: int) -> np.ndarray:
    sd = math.sqrt(cfg.log_theta_prior_var)
    m = cfg.log_theta_prior_mean
    return np.linspace(m - _GRID_SD_SPAN * sd, m + _GRID_SD_SPAN * sd, n_points)


def _crm_log_posterior(
    data: TrialData, cfg: CrmConfig, log_theta: np.ndarray
) -> np.ndarray:
    if data.n_doses != len(cfg.skeleton):
        raise ValueError(
            f"data covers {data.n_doses} doses but skeleton has {len(cfg.skeleton)}"
        )
    theta = np.exp(log_theta)
    logpost = -((log_theta - cfg.log_theta_prior_mean) ** 2) / (
        2.0 * cfg.log_theta_prior_var
    )
    log_c = np.log(np.asarray(cfg.skeleton))
    for i in range(data.n_doses):
        ni, yi = data.n[i], data.y[i]
        if ni == 0:
            continue
        log_p = theta * log_c[i]  # log(c_i ** theta), always < 0
        if yi:
            logpost = logpost + yi * log_p
        if ni - yi:
            logpost = logpost + (ni - yi) * np.log1p(-np.exp(log_p))
    return logpost


def crm_posterior(
    data: TrialData, cfg: CrmConfig, n_points: int = CRM_GRID_POINTS
) -> GridPosterior:
    """Posterior over theta on the deterministic log-theta grid.  With no
    data this is the discretized prior."""
    log_theta = _crm_grid(cfg, n_points)
    masses = _normalize_log_density(_crm_log_posterior(data, cfg, log_theta))
    return GridPosterior((log_theta,), masses)


def crm_theta_mean(post: GridPosterior) -> float:
    (log_theta,) = post.axes
    return float(np.sum(np.exp(log_theta) * post.masses))


def crm_fitted_curve(cfg: CrmConfig, theta_hat: float) -> np.ndarray:
    return np.asarray(cfg.skeleton) ** theta_hat


def crm_recommend(
    data: TrialData,
    current_dose: DoseIndex,
    last_cohort: DoseOutcome,
    cfg: CrmConfig,
    n_points: int = CRM_GRID_POINTS,
) -> Decision:
    """Next-dose decision for the power model.

    Fit theta by posterior mean, aim at the dose whose fitted rate is closest
    to the target (ties to the lower dose), clamp against skipping, refuse
    incoherent escalation after a toxic cohort, and apply the safety rules.
    """
    current = current_dose.value
    if current == 1 and safety_veto(data.outcome(1), cfg.p_target, cfg.safety):
        return Decision(Verdict.TERMINATE, None)
    theta_hat = crm_theta_mean(crm_posterior(data, cfg, n_points))
    fitted = crm_fitted_curve(cfg, theta_hat)
    candidate = int(np.argmin(np.abs(fitted - float(cfg.p_target)))) + 1
    target = min(candidate, current + 1, data.highest_tried() + 1)
    target = max(target, 1)
    if target > current:
        toxic_cohort = (
            last_cohort.n_treated > 0
            and Fraction(last_cohort.n_dlt, last_cohort.n_treated) > cfg.p_target
        )
        if toxic_cohort:
            target = current
        elif safety_veto(data.outcome(target), cfg.p_target, cfg.safety):
            target = current
    if target == current:
        return Decision(Verdict.STAY, current)
    if target > current:
        return Decision(Verdict.ESCALATE, target)
    return Decision(Verdict.DEESCALATE, target)


def _blrm_axes(cfg: BlrmConfig, n_points: int) -> Tuple[np.ndarray, np.ndarray]:
    h = cfg.hyper
    la = np.linspace(
        h.mu1 - _GRID_SD_SPAN * h.sigma1, h.mu1 + _GRID_SD_SPAN * h.sigma1, n_points
    )
    lb = np.linspace(
        h.mu2 - _GRID_SD_SPAN * h.sigma2, h.mu2 + _GRID_SD_SPAN * h.sigma2, n_points
    )
    return la, lb


def _blrm_log_prior(cfg: BlrmConfig, la: np.ndarray, lb: np.ndarray) -> np.ndarray:
    h = cfg.hyper
    u = (la - h.mu1)[:, None] / h.sigma1
    v = (lb - h.mu2)[None, :] / h.sigma2
    return -(u * u - 2.0 * h.rho * u * v + v * v) / (2.0 * (1.0 - h.rho * h.rho))


def _blrm_dose_logits(
    cfg: BlrmConfig, la: np.ndarray, lb: np.ndarray
) -> "list[np.ndarray]":
    """Per-dose logit(p_i) arrays over the (log alpha, log beta) grid."""
    beta = np.exp(lb)[None, :]
    out = []
    for d in cfg.raw_doses:
        offset = math.log(d / cfg.ref_dose)
        out.append(la[:, None] + beta * offset)
    return out


def blrm_posterior(
    data: TrialData, cfg: BlrmConfig, n_points: int = BLRM_GRID_POINTS
) -> GridPosterior:
    """Posterior over (log alpha, log beta) on the deterministic grid."""
    if data.n_doses != len(cfg.raw_doses):
        raise ValueError(
            f"data covers {data.n_doses} doses but config has {len(cfg.raw_doses)}"
        )
    la, lb = _blrm_axes(cfg, n_points)
    logpost = _blrm_log_prior(cfg, la, lb)
    logits = _blrm_dose_logits(cfg, la, lb)
    for i in range(data.n_doses):
        ni, yi = data.n[i], data.y[i]
        if ni == 0:
            continue
        z = logits[i]
        if yi:
            logpost = logpost + yi * log_expit(z)
        if ni - yi:
            logpost = logpost + (ni - yi) * log_expit(-z)
    masses = _normalize_log_density(logpost)
    return GridPosterior((la, lb), masses)


def blrm_interval_masses(
    data: TrialData, cfg: BlrmConfig, n_points: int = BLRM_GRID_POINTS
) -> "tuple[np.ndarray, np.ndarray, np.ndarray]":
    """Per-dose posterior masses (under, target, over) for the toxicity
    interval.  The three columns partition the grid, so each row sums to 1
    up to float summation error."""
    post = blrm_posterior(data, cfg, n_points)
    la, lb = post.axes
    lo, hi = cfg.interval_bounds
    under = np.empty(data.n_doses)
    target = np.empty(data.n_doses)
    over = np.empty(data.n_doses)
    z_hi = logit(hi)
    z_lo = logit(lo) if lo > 0 else -np.inf
    for i, z in enumerate(_blrm_dose_logits(cfg, la, lb)):
        # p > hi  <=>  z > logit(hi); work on the logit scale to avoid
        # constructing the probability array.
        over[i] = post.masses[z > z_hi].sum()
        under[i] = post.masses[z <= z_lo].sum()
        target[i] = post.masses[(z > z_lo) & (z <= z_hi)].sum()
    return under, target, over


def blrm_recommend(
    data: TrialData,
    current_dose: DoseIndex,
    cfg: BlrmConfig,
    n_points: int = BLRM_GRID_POINTS,
) -> Decision:
    """Next-dose decision for the logistic model with overdose control.

    Admissible doses keep Pr(p_i > target upper bound) below p_ewoc; among
    them the dose with the most posterior mass in the target interval wins
    (ties to the lower dose).  All doses inadmissible terminates the trial.
    The no-skip clamp and safety rules match the power model's conduct.
    """
    current = current_dose.value
    if current == 1 and safety_veto(data.outcome(1), cfg.p_target, cfg.safety):
        return Decision(Verdict.TERMINATE, None)
    _under, target_mass, over_mass = blrm_interval_masses(data, cfg, n_points)
    admissible = over_mass < cfg.p_ewoc
    if not bool(admissible.any()):
        return Decision(Verdict.TERMINATE, None)
    masked = np.where(admissible, target_mass, -1.0)
    candidate = int(np.argmax(masked)) + 1
    target = min(candidate, current + 1, data.highest_tried() + 1)
    target = max(target, 1)
    if target > current and safety_veto(
        data.outcome(target), cfg.p_target, cfg.safety
    ):
        target = current
    if target == current:
        return Decision(Verdict.STAY, current)
    if target > current:
        return Decision(Verdict.ESCALATE, target)
    return Decision(Verdict.DEESCALATE, target)
