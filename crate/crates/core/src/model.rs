//! The biased-initial-guess decision model for a choice between two ranked
//! answers.
//!
//! Answers are normalized values (z-scores of log guesses), so a latent
//! initial guess is standard normal and zero is the best possible answer.
//! A voter:
//!
//! 1. with probability `r` picks one of the two answers uniformly at random;
//! 2. otherwise, with probability `p`, picks the first-listed answer;
//! 3. otherwise picks the answer closest to their latent initial guess.
//!
//! Step 3 is captured by `initial_selection_prob`: the probability a standard
//! normal draw falls closer to the first answer than to the last one, which
//! reduces to a normal tail probability at the midpoint of the two values.

use rand::Rng;

use crate::error::{Error, Result};
use crate::special::erfc;

/// The two behavioral parameters of the decision model.
///
/// `p` is the position bias (probability of picking the first-listed answer
/// regardless of content) and `r` is the random-choice rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    p: f64,
    r: f64,
}

impl ModelParams {
    pub fn new(p: f64, r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::InvalidProbability {
                name: "position bias p",
                value: p,
            });
        }
        if !(0.0..=1.0).contains(&r) || !r.is_finite() {
            return Err(Error::InvalidProbability {
                name: "random-choice rate r",
                value: r,
            });
        }
        Ok(Self { p, r })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

/// Two normalized answer values in display order: `first` is shown on top.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnswerPair {
    first: f64,
    last: f64,
}

impl AnswerPair {
    pub fn new(first: f64, last: f64) -> Result<Self> {
        if !first.is_finite() {
            return Err(Error::NonFinite {
                name: "first answer",
                value: first,
            });
        }
        if !last.is_finite() {
            return Err(Error::NonFinite {
                name: "last answer",
                value: last,
            });
        }
        Ok(Self { first, last })
    }

    pub fn first(&self) -> f64 {
        self.first
    }

    pub fn last(&self) -> f64 {
        self.last
    }

    /// The same two answers with their display order reversed.
    pub fn swapped(&self) -> Self {
        Self {
            first: self.last,
            last: self.first,
        }
    }

    /// Whether the first-listed answer is the better one, i.e. the one with
    /// the smaller magnitude (zero being the best possible answer). An exact
    /// tie in magnitude designates the first answer as best.
    pub fn best_is_first(&self) -> bool {
        self.first.abs() <= self.last.abs()
    }
}

/// One observed decision between the two displayed answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChoiceOutcome {
    pub chose_first: bool,
}

/// Probability that a standard-normal initial guess is closer to the
/// first-listed answer than to the last one.
///
/// Equal displayed values return exactly 1/2; the displayed values of a tie
/// are bit-identical, so floating-point equality is the right test. The two
/// ordered branches are complementary normal tail probabilities at the
/// midpoint of the two values, so `s(a, b) + s(b, a) == 1`.
pub fn initial_selection_prob(pair: &AnswerPair) -> f64 {
    if pair.first == pair.last {
        return 0.5;
    }
    let mid = 0.5 * (pair.first + pair.last);
    if pair.first > pair.last {
        // guess must fall above the midpoint to be closer to `first`
        0.5 * erfc(mid / std::f64::consts::SQRT_2)
    } else {
        // guess must fall below the midpoint
        0.5 * erfc(-mid / std::f64::consts::SQRT_2)
    }
}

/// Probability the first-listed answer is chosen.
pub fn choice_prob_first(pair: &AnswerPair, params: &ModelParams) -> f64 {
    let s = initial_selection_prob(pair);
    params.r / 2.0 + (1.0 - params.r) * (params.p + (1.0 - params.p) * s)
}

/// Probability the last-listed answer is chosen.
///
/// This is the complement of [`choice_prob_first`], written directly: the
/// last answer never collects the position bonus, only the random-choice
/// share and its own closeness probability.
pub fn choice_prob_last(pair: &AnswerPair, params: &ModelParams) -> f64 {
    let s_last = initial_selection_prob(&pair.swapped());
    params.r / 2.0 + (1.0 - params.r) * (1.0 - params.p) * s_last
}

/// Probability the designated best answer is chosen, given its position.
///
/// `pair` is the display order; `best_is_first` says which slot holds the
/// best answer (callers normally derive it via [`AnswerPair::best_is_first`]).
/// The probability conditional on the best answer being ranked last sits
/// exactly `p * (1 - r)` below the probability conditional on it being
/// ranked first.
pub fn choose_best_prob(pair: &AnswerPair, params: &ModelParams, best_is_first: bool) -> f64 {
    if best_is_first {
        choice_prob_first(pair, params)
    } else {
        choice_prob_last(pair, params)
    }
}

/// Draw one vote: Bernoulli on [`choice_prob_first`].
pub fn sample_choice<R: Rng + ?Sized>(
    pair: &AnswerPair,
    params: &ModelParams,
    rng: &mut R,
) -> ChoiceOutcome {
    let prob_first = choice_prob_first(pair, params);
    ChoiceOutcome {
        chose_first: rng.random::<f64>() < prob_first,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::normal_cdf;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair(first: f64, last: f64) -> AnswerPair {
        AnswerPair::new(first, last).unwrap()
    }

    fn params(p: f64, r: f64) -> ModelParams {
        ModelParams::new(p, r).unwrap()
    }

    /// Standard normal CDF by Simpson quadrature, independent of `erfc`.
    fn normal_cdf_quadrature(x: f64) -> f64 {
        let lo = -10.0f64;
        if x <= lo {
            return 0.0;
        }
        let n = 4000;
        let h = (x - lo) / n as f64;
        let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut acc = pdf(lo) + pdf(x);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * pdf(lo + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn params_construction_rejects_out_of_range() {
        assert!(ModelParams::new(-0.1, 0.0).is_err());
        assert!(ModelParams::new(0.0, 1.1).is_err());
        assert!(ModelParams::new(f64::NAN, 0.5).is_err());
        assert!(ModelParams::new(0.0, 0.0).is_ok());
        assert!(ModelParams::new(1.0, 1.0).is_ok());
    }

    #[test]
    fn pair_construction_rejects_non_finite() {
        assert!(AnswerPair::new(f64::INFINITY, 0.0).is_err());
        assert!(AnswerPair::new(0.0, f64::NAN).is_err());
    }

    #[test]
    fn equal_answers_split_evenly() {
        assert_eq!(initial_selection_prob(&pair(0.0, 0.0)), 0.5);
        assert_eq!(initial_selection_prob(&pair(1.7, 1.7)), 0.5);
    }

    #[test]
    fn selection_prob_complement() {
        let mut x = -3.0;
        while x <= 3.0 {
            let a = pair(0.0, x);
            let sum = initial_selection_prob(&a) + initial_selection_prob(&a.swapped());
            assert!((sum - 1.0).abs() < 1e-14, "complement broken at x={x}");
            x += 0.173;
        }
    }

    #[test]
    fn selection_prob_matches_quadrature_oracle() {
        // the midpoint tail probability against direct integration of the
        // standard normal density, on a grid of 100 pairs
        for i in 0..10 {
            for j in 0..10 {
                let a1 = -2.5 + 0.55 * i as f64;
                let a2 = -2.5 + 0.55 * j as f64;
                let p = pair(a1, a2);
                let mid = 0.5 * (a1 + a2);
                let oracle = if a1 > a2 {
                    1.0 - normal_cdf_quadrature(mid)
                } else if a1 == a2 {
                    0.5
                } else {
                    normal_cdf_quadrature(mid)
                };
                assert!(
                    (initial_selection_prob(&p) - oracle).abs() < 1e-8,
                    "s({a1},{a2}) = {} vs oracle {}",
                    initial_selection_prob(&p),
                    oracle
                );
            }
        }
    }

    #[test]
    fn selection_prob_near_best_worst_gap() {
        let s = initial_selection_prob(&pair(0.0, 0.637));
        assert!((s - normal_cdf_quadrature(0.3185)).abs() < 1e-8);
        assert!((s - 0.625).abs() < 5e-4);
    }

    #[test]
    fn choice_prob_reference_values() {
        // symmetric and unbiased
        assert_eq!(choice_prob_first(&pair(0.3, 0.3), &params(0.0, 0.0)), 0.5);
        // pure random choice flattens everything
        assert!((choice_prob_first(&pair(-2.0, 1.0), &params(0.7, 1.0)) - 0.5).abs() < 1e-15);
        // hand substitution: r/2 + (1-r)(p + (1-p)/2)
        let got = choice_prob_first(&pair(0.0, 0.0), &params(0.2, 0.09));
        assert!((got - 0.591).abs() < 1e-12);
    }

    #[test]
    fn choose_best_reduces_to_selection_prob_without_bias() {
        for &x in &[0.1, 0.5, 1.3, 2.2] {
            let p = pair(0.0, x);
            assert_eq!(
                choose_best_prob(&p, &params(0.0, 0.0), true),
                initial_selection_prob(&p)
            );
        }
    }

    #[test]
    fn position_gap_identity_on_random_inputs() {
        // P(choose best | best last) = P(choose best | best first) - p(1-r)
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let best = rng.random::<f64>() * 4.0 - 2.0;
            let worst = rng.random::<f64>() * 4.0 - 2.0;
            let pr = params(rng.random::<f64>(), rng.random::<f64>());
            let best_first = choose_best_prob(&pair(best, worst), &pr, true);
            let best_last = choose_best_prob(&pair(worst, best), &pr, false);
            let gap = pr.p() * (1.0 - pr.r());
            assert!(
                (best_last - (best_first - gap)).abs() < 1e-12,
                "identity broken: first={best_first}, last={best_last}, gap={gap}"
            );
        }
    }

    #[test]
    fn critical_configuration_is_a_coin_flip() {
        // worst answer exactly at the stability boundary for p = 0.2: choosing
        // the best answer from last place is a 50/50 event
        let got = choose_best_prob(&pair(0.637, 0.0), &params(0.2, 0.09), false);
        assert!((got - 0.5).abs() < 1e-3);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let p = pair(0.2, -0.4);
        let pr = params(0.13, 0.4);
        let draw = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..64)
                .map(|_| sample_choice(&p, &pr, &mut rng).chose_first)
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
    }

    #[test]
    fn sampling_mean_matches_probability() {
        let p = pair(0.0, 0.0);
        let pr = params(0.2, 0.09);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| sample_choice(&p, &pr, &mut rng).chose_first)
            .count();
        let mean = hits as f64 / n as f64;
        let sigma = (0.591 * (1.0 - 0.591) / n as f64).sqrt();
        assert!(
            (mean - 0.591).abs() < 3.0 * sigma,
            "mean {mean} vs 0.591 +/- {}",
            3.0 * sigma
        );
    }

    #[test]
    fn sampling_mean_under_pure_randomness() {
        let p = pair(-1.3, 0.4);
        let pr = params(0.9, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| sample_choice(&p, &pr, &mut rng).chose_first)
            .count();
        let mean = hits as f64 / n as f64;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * sigma);
    }

    #[test]
    fn selection_prob_agrees_with_normal_cdf_helper() {
        // s(a1, a2) for a1 < a2 is the normal CDF at the midpoint
        let p = pair(-0.8, 1.9);
        assert!((initial_selection_prob(&p) - normal_cdf(0.55)).abs() < 1e-15);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn finite_value() -> impl Strategy<Value = f64> {
            -50.0f64..50.0
        }

        fn probability() -> impl Strategy<Value = f64> {
            0.0f64..=1.0
        }

        proptest! {
            #[test]
            fn outputs_stay_in_unit_interval(
                a1 in finite_value(),
                a2 in finite_value(),
                p in probability(),
                r in probability(),
            ) {
                let pr = params(p, r);
                let pa = pair(a1, a2);
                for v in [
                    initial_selection_prob(&pa),
                    choice_prob_first(&pa, &pr),
                    choice_prob_last(&pa, &pr),
                    choose_best_prob(&pa, &pr, pa.best_is_first()),
                ] {
                    prop_assert!((0.0..=1.0).contains(&v), "out of range: {v}");
                }
            }

            #[test]
            fn first_and_last_probabilities_are_complementary(
                a1 in finite_value(),
                a2 in finite_value(),
                p in probability(),
                r in probability(),
            ) {
                let pr = params(p, r);
                let pa = pair(a1, a2);
                let total = choice_prob_first(&pa, &pr) + choice_prob_last(&pa, &pr);
                prop_assert!((total - 1.0).abs() < 1e-12);
            }

            #[test]
            fn worse_first_answers_are_chosen_no_more_often(
                a2 in 0.0f64..5.0,
                bump1 in 0.0f64..5.0,
                bump2 in 0.0f64..5.0,
                p in probability(),
                r in probability(),
            ) {
                // fixed a2 >= 0; raising a1 above it never helps a1
                let pr = params(p, r);
                let lo = a2 + bump1;
                let hi = lo + bump2;
                let prob_lo = choice_prob_first(&pair(lo, a2), &pr);
                let prob_hi = choice_prob_first(&pair(hi, a2), &pr);
                prop_assert!(prob_hi <= prob_lo + 1e-15);
            }
        }
    }
}
