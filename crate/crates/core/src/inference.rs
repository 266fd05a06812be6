//! Maximum-likelihood inference of answer quality from position-conditioned
//! vote counts.
//!
//! For one designated answer, the sufficient statistics are four counts: how
//! often it was chosen while ranked first, how many votes were cast while it
//! was ranked first, and the same pair for last place. Given assumed values
//! of the position bias `p` and random-choice rate `r`, the only unknown in
//! the per-vote choice probabilities is the quality gap
//! `q = Pr(guess closer to the designated answer)`. The estimate `q_hat`
//! maximizes the Bernoulli likelihood of the four counts; the designated
//! answer is ranked first when `q_hat > 0.5`.
//!
//! Estimation uses bounded golden-section maximization on a clamped domain
//! rather than solving the stationarity equation: ledgers where the answer
//! was always (or never) chosen push the maximum to the domain edge, which a
//! raw root-find on the derivative mishandles.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::optimize::golden_section_max;

/// Clamp on the search domain for `q_hat`: estimates live in
/// `[Q_EPSILON, 1 - Q_EPSILON]` so every log term stays finite while leaving
/// the estimate effectively unconstrained at realistic vote counts.
pub const Q_EPSILON: f64 = 1e-9;

/// Position-conditioned vote counts for one designated answer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VoteLedger {
    chosen_first: u64,
    shown_first: u64,
    chosen_last: u64,
    shown_last: u64,
}

impl VoteLedger {
    /// Build a ledger from raw counts, rejecting chosen > shown.
    pub fn new(
        chosen_first: u64,
        shown_first: u64,
        chosen_last: u64,
        shown_last: u64,
    ) -> Result<Self> {
        if chosen_first > shown_first || chosen_last > shown_last {
            return Err(Error::InvalidLedger);
        }
        Ok(Self {
            chosen_first,
            shown_first,
            chosen_last,
            shown_last,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Record one vote cast while the designated answer sat at the given
    /// position.
    pub fn record(&mut self, shown_first: bool, chosen: bool) {
        if shown_first {
            self.shown_first += 1;
            self.chosen_first += u64::from(chosen);
        } else {
            self.shown_last += 1;
            self.chosen_last += u64::from(chosen);
        }
    }

    /// The same votes re-counted for the opposing answer: positions swap and
    /// every vote not for this answer was for the other one.
    pub fn complement(&self) -> Self {
        Self {
            chosen_first: self.shown_last - self.chosen_last,
            shown_first: self.shown_last,
            chosen_last: self.shown_first - self.chosen_first,
            shown_last: self.shown_first,
        }
    }

    pub fn chosen_first(&self) -> u64 {
        self.chosen_first
    }

    pub fn shown_first(&self) -> u64 {
        self.shown_first
    }

    pub fn chosen_last(&self) -> u64 {
        self.chosen_last
    }

    pub fn shown_last(&self) -> u64 {
        self.shown_last
    }

    /// Total votes observed in either position.
    pub fn total_shown(&self) -> u64 {
        self.shown_first + self.shown_last
    }
}

/// Per-vote choice probabilities for both answers in both display
/// configurations, given the designated answer's quality gap `q`.
///
/// Within one configuration the two answers' probabilities sum to exactly 1:
/// `chosen_when_first + opponent_chosen_when_last == 1` and symmetrically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalChoiceProbs {
    /// Designated answer chosen, given it is ranked first.
    pub chosen_when_first: f64,
    /// Designated answer chosen, given it is ranked last.
    pub chosen_when_last: f64,
    /// Opposing answer chosen, given the opposing answer is ranked first.
    pub opponent_chosen_when_first: f64,
    /// Opposing answer chosen, given the opposing answer is ranked last.
    pub opponent_chosen_when_last: f64,
}

/// The four conditional choice probabilities as functions of the quality gap.
///
/// The first-place probability carries the position bonus `p`; the last-place
/// probability does not. The opposing answer gets the complementary gap
/// `1 - q`.
pub fn conditional_choice_probs(q: f64, params: &ModelParams) -> ConditionalChoiceProbs {
    debug_assert!((0.0..=1.0).contains(&q), "q = {q} outside [0, 1]");
    let p = params.p();
    let r = params.r();
    let first = |gap: f64| r / 2.0 + (1.0 - r) * (p + (1.0 - p) * gap);
    let last = |gap: f64| r / 2.0 + (1.0 - r) * (1.0 - p) * gap;
    ConditionalChoiceProbs {
        chosen_when_first: first(q),
        chosen_when_last: last(q),
        opponent_chosen_when_first: first(1.0 - q),
        opponent_chosen_when_last: last(1.0 - q),
    }
}

/// Log term `count * ln(prob)` with the empty-count convention `0 * ln 0 = 0`
/// and a negative-infinity sentinel for an impossible observation.
fn log_term(count: u64, prob: f64) -> f64 {
    if count == 0 {
        0.0
    } else if prob <= 0.0 {
        f64::NEG_INFINITY
    } else {
        count as f64 * prob.ln()
    }
}

/// Log-likelihood of a ledger under quality gap `q` and assumed parameters.
pub fn ledger_log_likelihood(ledger: &VoteLedger, q: f64, params: &ModelParams) -> f64 {
    let probs = conditional_choice_probs(q, params);
    log_term(ledger.chosen_first, probs.chosen_when_first)
        + log_term(
            ledger.shown_first - ledger.chosen_first,
            1.0 - probs.chosen_when_first,
        )
        + log_term(ledger.chosen_last, probs.chosen_when_last)
        + log_term(
            ledger.shown_last - ledger.chosen_last,
            1.0 - probs.chosen_when_last,
        )
}

/// Result of quality estimation for one designated answer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityEstimate {
    /// Maximum-likelihood quality gap, clamped to
    /// `[Q_EPSILON, 1 - Q_EPSILON]`.
    pub q_hat: f64,
    pub log_likelihood_at_max: f64,
    /// Whether the designated answer should be ranked first
    /// (`q_hat > 0.5`).
    pub rank_first: bool,
    /// Set when the ledger held no votes; `q_hat` defaults to 0.5 and
    /// callers should fall back to their own order tie-break.
    pub uninformed: bool,
}

/// Maximum-likelihood quality gap from a ledger, by golden-section search to
/// a bracket below 1e-9.
pub fn mle_quality(ledger: &VoteLedger, assumed_params: &ModelParams) -> QualityEstimate {
    if ledger.total_shown() == 0 {
        return QualityEstimate {
            q_hat: 0.5,
            log_likelihood_at_max: 0.0,
            rank_first: false,
            uninformed: true,
        };
    }
    let (q_hat, log_likelihood_at_max) = golden_section_max(
        |q| ledger_log_likelihood(ledger, q, assumed_params),
        Q_EPSILON,
        1.0 - Q_EPSILON,
        1e-9,
    );
    QualityEstimate {
        q_hat,
        log_likelihood_at_max,
        rank_first: q_hat > 0.5,
        uninformed: false,
    }
}

/// Draw a synthetic ledger from the model: binomial counts at the conditional
/// choice probabilities for the given exposure split.
pub fn sample_ledger<R: Rng + ?Sized>(
    q: f64,
    params: &ModelParams,
    shown_first: u64,
    shown_last: u64,
    rng: &mut R,
) -> VoteLedger {
    let probs = conditional_choice_probs(q, params);
    let draw = |n: u64, p: f64, rng: &mut R| {
        if n == 0 {
            0
        } else {
            Binomial::new(n, p.clamp(0.0, 1.0)).unwrap().sample(rng)
        }
    };
    VoteLedger {
        chosen_first: draw(shown_first, probs.chosen_when_first, rng),
        shown_first,
        chosen_last: draw(shown_last, probs.chosen_when_last, rng),
        shown_last,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(p: f64, r: f64) -> ModelParams {
        ModelParams::new(p, r).unwrap()
    }

    #[test]
    fn ledger_construction_checks_counts() {
        assert!(VoteLedger::new(3, 2, 0, 0).is_err());
        assert!(VoteLedger::new(0, 0, 5, 4).is_err());
        assert!(VoteLedger::new(2, 3, 4, 4).is_ok());
    }

    #[test]
    fn ledger_recording_and_complement() {
        let mut ledger = VoteLedger::empty();
        ledger.record(true, true);
        ledger.record(true, false);
        ledger.record(false, true);
        assert_eq!(ledger, VoteLedger::new(1, 2, 1, 1).unwrap());
        // the opposing answer: shown last twice (one vote against it there),
        // shown first once (not chosen)
        assert_eq!(ledger.complement(), VoteLedger::new(0, 1, 1, 2).unwrap());
        assert_eq!(ledger.complement().complement(), ledger);
    }

    #[test]
    fn conditional_probs_flat_when_uninformative() {
        let probs = conditional_choice_probs(0.5, &params(0.0, 0.0));
        for v in [
            probs.chosen_when_first,
            probs.chosen_when_last,
            probs.opponent_chosen_when_first,
            probs.opponent_chosen_when_last,
        ] {
            assert_eq!(v, 0.5);
        }
    }

    #[test]
    fn conditional_probs_position_split() {
        let probs = conditional_choice_probs(0.5, &params(0.2, 0.0));
        assert!((probs.chosen_when_first - 0.6).abs() < 1e-15);
        assert!((probs.chosen_when_last - 0.4).abs() < 1e-15);
    }

    #[test]
    fn conditional_probs_sum_to_one_per_configuration() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let q: f64 = rng.random();
            let pr = params(rng.random(), rng.random());
            let probs = conditional_choice_probs(q, &pr);
            let config_a = probs.chosen_when_first + probs.opponent_chosen_when_last;
            let config_b = probs.chosen_when_last + probs.opponent_chosen_when_first;
            assert!((config_a - 1.0).abs() < 1e-12);
            assert!((config_b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_ledger_likelihood_is_zero() {
        let ledger = VoteLedger::empty();
        assert_eq!(ledger_log_likelihood(&ledger, 0.3, &params(0.2, 0.09)), 0.0);
    }

    #[test]
    fn single_vote_likelihood_is_log_q() {
        let ledger = VoteLedger::new(1, 1, 0, 0).unwrap();
        let pr = params(0.0, 0.0);
        for &q in &[0.1, 0.5, 0.93] {
            assert!((ledger_log_likelihood(&ledger, q, &pr) - q.ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn likelihood_hits_sentinel_at_impossible_observation() {
        // p = 1, r = 0: a vote for the last-ranked answer has probability 0
        let ledger = VoteLedger::new(0, 0, 1, 1).unwrap();
        let ll = ledger_log_likelihood(&ledger, 0.5, &params(1.0, 0.0));
        assert_eq!(ll, f64::NEG_INFINITY);
    }

    #[test]
    fn likelihood_is_concave_in_q() {
        // second differences on a grid, random ledgers with r < 1
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let shown_first = rng.random_range(1..200u64);
            let shown_last = rng.random_range(1..200u64);
            let ledger = VoteLedger::new(
                rng.random_range(0..=shown_first),
                shown_first,
                rng.random_range(0..=shown_last),
                shown_last,
            )
            .unwrap();
            let pr = params(rng.random::<f64>() * 0.9, rng.random::<f64>() * 0.9);
            let h = 1e-3;
            let mut q = 0.05;
            while q < 0.95 {
                let ll = |x: f64| ledger_log_likelihood(&ledger, x, &pr);
                let second = ll(q + h) - 2.0 * ll(q) + ll(q - h);
                assert!(second <= 1e-9, "not concave at q={q}: {second}");
                q += 0.05;
            }
        }
    }

    #[test]
    fn mle_without_position_information_is_pooled_rate() {
        let ledger = VoteLedger::new(30, 50, 20, 50).unwrap();
        let est = mle_quality(&ledger, &params(0.0, 0.0));
        assert!((est.q_hat - 0.5).abs() < 1e-6, "q_hat = {}", est.q_hat);
        assert!(!est.uninformed);
    }

    #[test]
    fn mle_inverts_position_split() {
        // counts exactly at the q = 0.5 conditional probabilities for p = 0.2
        let ledger = VoteLedger::new(60, 100, 40, 100).unwrap();
        let est = mle_quality(&ledger, &params(0.2, 0.0));
        assert!((est.q_hat - 0.5).abs() < 1e-6, "q_hat = {}", est.q_hat);
    }

    #[test]
    fn mle_pooled_rate_with_equal_exposure() {
        // p = 0, r = 0 and all votes in one position: plain Bernoulli MLE
        let ledger = VoteLedger::new(13, 40, 0, 0).unwrap();
        let est = mle_quality(&ledger, &params(0.0, 0.0));
        assert!((est.q_hat - 13.0 / 40.0).abs() < 1e-6);
    }

    #[test]
    fn mle_is_consistent_on_model_data() {
        let truth = params(0.2, 0.09);
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let ledger = sample_ledger(0.7, &truth, 100_000, 100_000, &mut rng);
        let est = mle_quality(&ledger, &truth);
        assert!(
            (est.q_hat - 0.7).abs() < 0.01,
            "q_hat = {} at n = 1e5",
            est.q_hat
        );
        assert!(est.rank_first);
    }

    #[test]
    fn mle_boundary_ledgers_push_to_clamp() {
        // always chosen from both positions
        let ledger = VoteLedger::new(50, 50, 50, 50).unwrap();
        let est = mle_quality(&ledger, &params(0.1, 0.0));
        assert!(est.q_hat > 1.0 - 1e-6);
        assert!(est.rank_first);
        assert!(est.log_likelihood_at_max.is_finite());
    }

    #[test]
    fn empty_ledger_is_uninformed() {
        let est = mle_quality(&VoteLedger::empty(), &params(0.2, 0.09));
        assert!(est.uninformed);
        assert_eq!(est.q_hat, 0.5);
        assert!(!est.rank_first);
        assert_eq!(est.log_likelihood_at_max, 0.0);
    }

    #[test]
    fn swapping_roles_mirrors_the_estimate() {
        let pr = params(0.2, 0.09);
        let mut rng = ChaCha8Rng::seed_from_u64(401);
        for _ in 0..50 {
            let shown_first = rng.random_range(1..500u64);
            let shown_last = rng.random_range(1..500u64);
            let ledger = VoteLedger::new(
                rng.random_range(0..=shown_first),
                shown_first,
                rng.random_range(0..=shown_last),
                shown_last,
            )
            .unwrap();
            let est = mle_quality(&ledger, &pr);
            let mirrored = mle_quality(&ledger.complement(), &pr);
            assert!(
                (est.q_hat - (1.0 - mirrored.q_hat)).abs() < 1e-6,
                "q = {}, mirrored = {}",
                est.q_hat,
                mirrored.q_hat
            );
        }
    }

    #[test]
    fn ranking_is_invariant_under_count_scaling() {
        let pr = params(0.2, 0.09);
        let base = VoteLedger::new(37, 60, 21, 40).unwrap();
        let est = mle_quality(&base, &pr);
        for k in [2u64, 5, 10] {
            let scaled = VoteLedger::new(37 * k, 60 * k, 21 * k, 40 * k).unwrap();
            let scaled_est = mle_quality(&scaled, &pr);
            assert_eq!(est.rank_first, scaled_est.rank_first);
            assert!((est.q_hat - scaled_est.q_hat).abs() < 1e-6);
        }
    }

    #[test]
    fn mismatched_random_rate_barely_degrades_ranking() {
        // ledgers simulated at 500 votes; assuming r = 0 against true
        // r = 0.09 should cost under two percentage points of ranking
        // accuracy
        let truth = params(0.2, 0.09);
        let assumed_wrong = params(0.2, 0.0);
        let q_true = 0.55;
        let replicates = 4000;
        let mut rng = ChaCha8Rng::seed_from_u64(909);
        let mut correct = 0u32;
        let mut correct_wrong = 0u32;
        for _ in 0..replicates {
            let ledger = sample_ledger(q_true, &truth, 250, 250, &mut rng);
            correct += u32::from(mle_quality(&ledger, &truth).rank_first);
            correct_wrong += u32::from(mle_quality(&ledger, &assumed_wrong).rank_first);
        }
        let acc = f64::from(correct) / replicates as f64;
        let acc_wrong = f64::from(correct_wrong) / replicates as f64;
        assert!(
            acc - acc_wrong < 0.02,
            "accuracy {acc} vs mismatched {acc_wrong}"
        );
    }
}
