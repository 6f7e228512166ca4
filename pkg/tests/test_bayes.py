"""Posterior machinery, safety veto, PAVA, and MTD selection.

The exceed-probability tests check the implementation against two
independent oracles (exact rational binomial identity; Gauss-Legendre
quadrature of the raw density).  The PAVA tests check against brute-force
enumeration of block partitions.
"""

from fractions import Fraction

import pytest

from dosefind import (
    BetaParams,
    Decision,
    DoseEstimate,
    DoseIndex,
    DoseOutcome,
    EquivalenceInterval,
    SafetyConfig,
    UNIFORM_PRIOR,
    Verdict,
    boin_select_mtd,
    decision_with_safety,
    estimates_from_outcomes,
    exceed_probability,
    pava,
    posterior,
    posterior_mean,
    safety_veto,
    select_mtd,
)

from oracles import (
    beta_tail_binomial,
    beta_tail_quadrature,
    monotone_fit_brute,
    monotone_grids,
)

PT03 = EquivalenceInterval(Fraction(3, 10), Fraction(1, 20), Fraction(1, 20))
ESTIMATION = BetaParams(0.005, 0.005)


# --------------------------------------------------------------------------
# conjugate posterior


def test_posterior_adds_counts_to_prior():
    post = posterior(DoseOutcome(6, 3), ESTIMATION)
    assert post.alpha == pytest.approx(3.005)
    assert post.beta == pytest.approx(3.005)


def test_posterior_no_data_returns_prior():
    post = posterior(DoseOutcome(0, 0), ESTIMATION)
    assert (post.alpha, post.beta) == (0.005, 0.005)


def test_posterior_all_toxic():
    post = posterior(DoseOutcome(2, 2), ESTIMATION)
    assert post.alpha == pytest.approx(2.005)
    assert post.beta == pytest.approx(0.005)


def test_beta_params_must_be_positive():
    with pytest.raises(ValueError):
        BetaParams(0.0, 1.0)
    with pytest.raises(ValueError):
        BetaParams(1.0, -2.0)


# --------------------------------------------------------------------------
# exceed_probability vs the oracles


def test_exceed_uniform_tail_is_complement():
    assert exceed_probability(BetaParams(1, 1), Fraction(3, 10)) == pytest.approx(
        0.7, abs=1e-12
    )


def test_exceed_matches_rational_oracle_everywhere():
    """All (x <= n <= 15) x target in {0.1, 0.17, 0.3}, uniform-prior
    posteriors: the implementation must sit within 1e-6 of the exact
    rational value (and in practice much closer)."""
    worst = 0.0
    for pt in (Fraction(1, 10), Fraction(17, 100), Fraction(3, 10)):
        for n in range(0, 16):
            for x in range(0, n + 1):
                post = posterior(DoseOutcome(n, x), UNIFORM_PRIOR)
                got = exceed_probability(post, pt)
                want = float(beta_tail_binomial(1 + x, 1 + n - x, pt))
                worst = max(worst, abs(got - want))
    assert worst <= 1e-6


def test_exceed_matches_quadrature_oracle_everywhere():
    worst = 0.0
    for pt in (0.1, 0.17, 0.3):
        for n in range(0, 16):
            for x in range(0, n + 1):
                post = posterior(DoseOutcome(n, x), UNIFORM_PRIOR)
                got = exceed_probability(post, Fraction(str(pt)))
                want = beta_tail_quadrature(post.alpha, post.beta, pt)
                worst = max(worst, abs(got - want))
    assert worst <= 1e-6


def test_two_oracles_agree_with_each_other():
    """Independent routes to the same tail mass: rational identity vs raw
    quadrature."""
    for n in range(0, 16):
        for x in range(0, n + 1):
            exact = float(beta_tail_binomial(1 + x, 1 + n - x, Fraction(3, 10)))
            quad = beta_tail_quadrature(1.0 + x, 1.0 + n - x, 0.3)
            assert abs(exact - quad) <= 1e-9


def test_exceed_near_point_mass_prior_cells():
    # Heavily skewed posteriors keep full accuracy: these two straddle the
    # veto threshold and decide whether a table cell reads D or DU.
    assert exceed_probability(BetaParams(3.005, 0.005), Fraction(3, 10)) > 0.95
    assert exceed_probability(BetaParams(2.005, 1.005), Fraction(3, 10)) <= 0.95


# --------------------------------------------------------------------------
# safety veto


def test_veto_three_of_three():
    assert safety_veto(DoseOutcome(3, 3), Fraction(3, 10), SafetyConfig())


def test_no_veto_without_dlts():
    assert not safety_veto(DoseOutcome(3, 0), Fraction(3, 10), SafetyConfig())


def test_veto_four_of_six():
    assert safety_veto(DoseOutcome(6, 4), Fraction(3, 10), SafetyConfig())


def test_veto_boundary_matches_oracle_exactly():
    """The veto is a strict comparison against 0.95; verify the decision at
    every grid point against the exact rational tail."""
    cfg = SafetyConfig()
    for n in range(1, 16):
        for x in range(0, n + 1):
            exact = beta_tail_binomial(1 + x, 1 + n - x, Fraction(3, 10))
            want = exact > Fraction(19, 20)
            got = safety_veto(DoseOutcome(n, x), Fraction(3, 10), cfg)
            assert got == want, (n, x, float(exact))


def test_safety_config_threshold_bounds():
    with pytest.raises(ValueError):
        SafetyConfig(threshold=1.0)
    with pytest.raises(ValueError):
        SafetyConfig(threshold=0.0)


# --------------------------------------------------------------------------
# posterior mean


def test_posterior_mean_formula():
    assert posterior_mean(DoseOutcome(6, 3)) == pytest.approx(3.005 / 6.01)
    assert posterior_mean(DoseOutcome(0, 0)) == pytest.approx(0.5)
    assert posterior_mean(DoseOutcome(6, 6)) == pytest.approx(6.005 / 6.01)


def test_posterior_mean_strictly_increases_in_x():
    for n in range(1, 16):
        means = [posterior_mean(DoseOutcome(n, x)) for x in range(n + 1)]
        assert all(b > a for a, b in zip(means, means[1:]))


def test_posterior_mean_approaches_observed_rate():
    for n in (10, 100, 1000):
        assert posterior_mean(DoseOutcome(n, n // 2)) == pytest.approx(
            0.5, abs=1.0 / n
        )
    assert abs(posterior_mean(DoseOutcome(1000, 300)) - 0.3) < 1e-3


# --------------------------------------------------------------------------
# PAVA vs brute force


def test_pava_identity_on_monotone_input():
    assert pava([0.1, 0.2, 0.3], [1.0, 5.0, 0.3]).values == (0.1, 0.2, 0.3)


def test_pava_two_point_pools():
    assert pava([0.3, 0.1], [1.0, 1.0]).values == pytest.approx((0.2, 0.2))
    assert pava([0.3, 0.1], [3.0, 1.0]).values == pytest.approx((0.25, 0.25))


def test_pava_matches_brute_force_exhaustively():
    """Every means-vector over a 4-point grid, lengths 1..5, two weight
    patterns: PAVA equals the enumerated least-squares monotone projection."""
    grid = (0.0, 0.3, 0.6, 0.9)
    weight_patterns = {
        "equal": lambda k: [1.0] * k,
        "alternating": lambda k: [(1.0, 2.5)[i % 2] for i in range(k)],
    }
    worst = 0.0
    for length in range(1, 6):
        for means in monotone_grids(length, grid):
            for make in weight_patterns.values():
                weights = make(length)
                got = pava(list(means), weights).values
                want = monotone_fit_brute(list(means), weights)
                worst = max(
                    worst, max(abs(g - w) for g, w in zip(got, want))
                )
    assert worst <= 1e-9


def test_pava_matches_brute_force_on_random_length_6():
    """Seeded random instances, length 6, values on the 0.05 grid."""
    import random

    rng = random.Random(20240817)
    for _ in range(300):
        means = [rng.randrange(0, 21) * 0.05 for _ in range(6)]
        weights = [rng.choice((0.5, 1.0, 2.0, 8.0)) for _ in range(6)]
        got = pava(means, weights).values
        want = monotone_fit_brute(means, weights)
        assert max(abs(g - w) for g, w in zip(got, want)) <= 1e-9


def test_pava_idempotent_and_monotone():
    import random

    rng = random.Random(7)
    for _ in range(200):
        k = rng.randrange(1, 7)
        means = [rng.random() for _ in range(k)]
        weights = [rng.uniform(0.1, 5.0) for _ in range(k)]
        once = pava(means, weights).values
        assert all(b >= a for a, b in zip(once, once[1:]))
        twice = pava(list(once), weights).values
        assert twice == pytest.approx(once, abs=1e-12)


def test_pava_block_preserves_weighted_mean():
    means = [0.5, 0.1, 0.3]
    weights = [2.0, 1.0, 1.0]
    fit = pava(means, weights).values
    # whatever got pooled, total weighted mass is conserved
    assert sum(w * f for w, f in zip(weights, fit)) == pytest.approx(
        sum(w * m for w, m in zip(weights, means))
    )


def test_pava_rejects_bad_input():
    with pytest.raises(ValueError):
        pava([0.1, 0.2], [1.0])
    with pytest.raises(ValueError):
        pava([0.1, 0.2], [1.0, 0.0])


# --------------------------------------------------------------------------
# MTD selection (shared selector)


def _estimate(mean: float, n: int = 3, x: int = 1, var: float = 0.01) -> DoseEstimate:
    return DoseEstimate(post_mean=mean, post_var=var, n_treated=n, n_dlt=x)


def test_select_argmin_with_upper_cap():
    est = [_estimate(0.05), _estimate(0.28), _estimate(0.45)]
    assert select_mtd(est, PT03) == 2


def test_select_tie_at_or_below_target_goes_high():
    est = [_estimate(0.2), _estimate(0.2)]
    assert select_mtd(est, PT03) == 2


def test_select_tie_above_target_goes_low():
    est = [_estimate(0.32), _estimate(0.32)]
    assert select_mtd(est, PT03) == 1


def test_select_none_when_everything_exceeds_cap():
    est = [_estimate(0.40), _estimate(0.55), _estimate(0.80)]
    assert select_mtd(est, PT03) is None


def test_select_never_returns_untried_dose():
    import random

    rng = random.Random(99)
    for _ in range(500):
        est = []
        for _d in range(6):
            n = rng.choice((0, 0, 3, 6, 9))
            x = rng.randrange(0, n + 1) if n else 0
            est.append(DoseEstimate.from_outcome(DoseOutcome(n, x)))
        got = select_mtd(est, PT03)
        if got is not None:
            assert est[got - 1].n_treated > 0


def test_select_requires_at_least_one_estimate():
    with pytest.raises(ValueError):
        select_mtd([], PT03)


def test_select_weight_mode_switch():
    # literal variance weighting is exposed but distinct
    est = [
        DoseEstimate.from_outcome(DoseOutcome(3, 2)),
        DoseEstimate.from_outcome(DoseOutcome(6, 1)),
    ]
    # precision weighting trusts the 6-patient dose and pools near its rate;
    # literal variance weighting trusts the noisy dose and pools too high to
    # clear the selection cap
    assert select_mtd(est, PT03, pava_weights="inverse_variance") == 2
    assert select_mtd(est, PT03, pava_weights="variance") is None
    with pytest.raises(ValueError):
        select_mtd(est, PT03, pava_weights="nonsense")


# --------------------------------------------------------------------------
# boundary-design selection


def test_boundary_select_has_no_upper_cap():
    """A dose whose isotonized estimate exceeds the interval's top is still
    selectable by the boundary design's companion selector, as long as its
    own data don't trip the veto."""
    outcomes = [DoseOutcome(3, 0), DoseOutcome(12, 5)]  # 5/12 ~ 0.417 > 0.35
    assert boin_select_mtd(outcomes, PT03) == 2
    # while the shared selector refuses it and falls back to dose 1
    assert select_mtd(estimates_from_outcomes(outcomes), PT03) == 1


def test_boundary_select_veto_is_a_ceiling():
    """Doses at or above the lowest vetoed dose are unselectable, even when
    closest to the target."""
    outcomes = [
        DoseOutcome(3, 0),
        DoseOutcome(6, 5),  # veto: P(Beta(6,2) > 0.3) > 0.95
        DoseOutcome(3, 1),
    ]
    assert safety_veto(outcomes[1], PT03.p_target, SafetyConfig())
    assert boin_select_mtd(outcomes, PT03) == 1


def test_boundary_select_untried_doses_never_selected():
    outcomes = [DoseOutcome(3, 1), DoseOutcome(0, 0), DoseOutcome(0, 0)]
    assert boin_select_mtd(outcomes, PT03) == 1


def test_boundary_select_none_when_dose_one_vetoed():
    outcomes = [DoseOutcome(3, 3), DoseOutcome(0, 0)]
    assert boin_select_mtd(outcomes, PT03) is None


def test_boundary_select_requires_outcomes():
    with pytest.raises(ValueError):
        boin_select_mtd([], PT03)


def test_boundary_select_closest_wins():
    # isotonized smoothed rates: with 9 patients the pseudo-counts are tiny,
    # so estimates sit essentially at the observed rates
    outcomes = [DoseOutcome(9, 1), DoseOutcome(9, 3), DoseOutcome(9, 6)]
    assert boin_select_mtd(outcomes, PT03) == 2


# --------------------------------------------------------------------------
# full per-cohort decision with safety rules


def test_terminate_when_dose_one_unacceptable():
    decision = decision_with_safety(DoseOutcome(3, 3), DoseIndex(1, 6), PT03)
    assert decision == Decision(Verdict.TERMINATE, None)


def test_rule_two_blocks_escalation_into_vetoed_dose():
    decision = decision_with_safety(
        DoseOutcome(3, 0),
        DoseIndex(2, 6),
        PT03,
        neighbor_outcomes={3: DoseOutcome(3, 3)},
    )
    assert decision == Decision(Verdict.STAY, 2)


def test_escalation_into_untried_dose_is_clean():
    decision = decision_with_safety(
        DoseOutcome(3, 0), DoseIndex(2, 6), PT03, neighbor_outcomes={3: DoseOutcome(0, 0)}
    )
    assert decision == Decision(Verdict.ESCALATE, 3)


def test_current_dose_veto_above_dose_one_is_du():
    decision = decision_with_safety(DoseOutcome(3, 3), DoseIndex(4, 6), PT03)
    assert decision == Decision(Verdict.DEESCALATE_UNACCEPTABLE, 3)


def test_decision_table_reproduction_via_full_decision():
    """Composing the full decision over the (n, x) grid at an interior dose
    reproduces the frozen reference table letters."""
    from oracles import REFERENCE_TABLE

    for (n, x), letter in REFERENCE_TABLE.items():
        decision = decision_with_safety(DoseOutcome(n, x), DoseIndex(3, 6), PT03)
        want = {
            "E": Verdict.ESCALATE,
            "S": Verdict.STAY,
            "D": Verdict.DEESCALATE,
            "DU": Verdict.DEESCALATE_UNACCEPTABLE,
        }[letter]
        assert decision.verdict is want, (n, x, letter, decision)
