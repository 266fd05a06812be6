//! Fitting the decision-model parameters `(p, r)` to observed choices, with
//! bootstrap errors, nested likelihood-ratio tests, a parametric-bootstrap
//! goodness-of-fit check, and Beta-posterior utilities for vote proportions.
//!
//! A choice record carries the two displayed values and which position was
//! picked. The closeness probability of the first answer depends only on the
//! displayed values, so it is precomputed once per record; each likelihood
//! evaluation is then a single log per record, which keeps the 2-D fit and
//! the thousand-resample bootstrap cheap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{initial_selection_prob, AnswerPair, ModelParams};
use crate::optimize::{golden_section_max, nelder_mead_max_2d};
use crate::seed::derive_seed;
use crate::special::{beta_quantile, chi_squared_tail};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// One observed decision: the two displayed values and the position picked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoiceRecord {
    pub a_first: f64,
    pub a_last: f64,
    pub chose_first: bool,
}

/// Maximum-likelihood fit of `(p, r)`.
///
/// `p_err` / `r_err` are zero until filled in from [`bootstrap_errors`];
/// `degenerate` flags data where every record shows two equal values, which
/// collapses the likelihood to one dimension and leaves `p` and `r` jointly
/// unidentified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub p_hat: f64,
    pub r_hat: f64,
    pub log_likelihood: f64,
    pub p_err: f64,
    pub r_err: f64,
    pub n: usize,
    pub degenerate: bool,
}

/// Precomputed per-record likelihood terms.
///
/// For a record, the chosen answer's probability is
/// `r/2 + (1-r) * (p * chose_first + (1-p) * closeness)` where `closeness`
/// is the chosen answer's own selection probability.
struct FitData {
    /// (closeness of the chosen answer, whether the first answer was chosen)
    terms: Vec<(f64, bool)>,
    degenerate: bool,
}

impl FitData {
    fn from_records(records: &[ChoiceRecord]) -> Result<Self> {
        let mut terms = Vec::with_capacity(records.len());
        let mut degenerate = true;
        for rec in records {
            let pair = AnswerPair::new(rec.a_first, rec.a_last)?;
            degenerate &= rec.a_first == rec.a_last;
            let s_first = initial_selection_prob(&pair);
            let closeness = if rec.chose_first { s_first } else { 1.0 - s_first };
            terms.push((closeness, rec.chose_first));
        }
        Ok(Self { terms, degenerate })
    }

    fn log_likelihood(&self, p: f64, r: f64) -> f64 {
        let mut acc = 0.0;
        for &(closeness, chose_first) in &self.terms {
            let bonus = if chose_first { p } else { 0.0 };
            let prob = r / 2.0 + (1.0 - r) * (bonus + (1.0 - p) * closeness);
            acc += prob.max(1e-300).ln();
        }
        acc
    }

    fn resampled(&self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.terms.len();
        let terms = (0..n).map(|_| self.terms[rng.random_range(0..n)]).collect();
        Self {
            terms,
            degenerate: self.degenerate,
        }
    }
}

/// Multi-start bounded maximization of the fit likelihood: Nelder-Mead from
/// the four corners and the center of the unit square.
fn maximize_fit(data: &FitData) -> (f64, f64, f64) {
    const STARTS: [[f64; 2]; 5] = [
        [0.0, 0.0],
        [1.0, 0.0],
        [0.0, 1.0],
        [1.0, 1.0],
        [0.5, 0.5],
    ];
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for start in STARTS {
        let ([p, r], ll) =
            nelder_mead_max_2d(|p, r| data.log_likelihood(p, r), start, 0.2, 0.0, 1.0, 400);
        if ll > best.2 {
            best = (p, r, ll);
        }
    }
    best
}

/// Fit `(p, r)` by maximum likelihood. Deterministic: fixed starting points,
/// no randomness.
pub fn fit_params(records: &[ChoiceRecord]) -> Result<FitResult> {
    if records.len() < 2 {
        return Err(Error::InsufficientData {
            context: format!("need at least 2 choice records, got {}", records.len()),
        });
    }
    let data = FitData::from_records(records)?;
    let (p_hat, r_hat, log_likelihood) = maximize_fit(&data);
    Ok(FitResult {
        p_hat,
        r_hat,
        log_likelihood,
        p_err: 0.0,
        r_err: 0.0,
        n: records.len(),
        degenerate: data.degenerate,
    })
}

/// One bootstrap refit, kept for diagnostic logs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapEstimate {
    pub p_hat: f64,
    pub r_hat: f64,
    pub log_likelihood: f64,
}

/// Bootstrap standard errors of the fitted parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapErrors {
    pub p_err: f64,
    pub r_err: f64,
    pub resamples: usize,
    /// Fewer than two resamples cannot carry variance information.
    pub degenerate: bool,
    pub estimates: Vec<BootstrapEstimate>,
}

fn bootstrap_one(data: &FitData, seed: u64) -> BootstrapEstimate {
    let resample = data.resampled(seed);
    let (p_hat, r_hat, log_likelihood) = maximize_fit(&resample);
    BootstrapEstimate {
        p_hat,
        r_hat,
        log_likelihood,
    }
}

fn finish_bootstrap(estimates: Vec<BootstrapEstimate>) -> BootstrapErrors {
    let b = estimates.len();
    if b < 2 {
        return BootstrapErrors {
            p_err: 0.0,
            r_err: 0.0,
            resamples: b,
            degenerate: true,
            estimates,
        };
    }
    let sd = |extract: fn(&BootstrapEstimate) -> f64| {
        let mean = estimates.iter().map(extract).sum::<f64>() / b as f64;
        (estimates
            .iter()
            .map(|e| (extract(e) - mean).powi(2))
            .sum::<f64>()
            / (b - 1) as f64)
            .sqrt()
    };
    BootstrapErrors {
        p_err: sd(|e| e.p_hat),
        r_err: sd(|e| e.r_hat),
        resamples: b,
        degenerate: false,
        estimates,
    }
}

/// Resample the records with replacement `b` times, refit each resample, and
/// report the standard deviations of the refitted parameters.
pub fn bootstrap_errors(records: &[ChoiceRecord], b: usize, seed: u64) -> Result<BootstrapErrors> {
    let data = FitData::from_records(records)?;
    #[cfg(feature = "parallel")]
    let estimates: Vec<BootstrapEstimate> = (0..b as u64)
        .into_par_iter()
        .map(|i| bootstrap_one(&data, derive_seed(seed, i)))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let estimates: Vec<BootstrapEstimate> = (0..b as u64)
        .map(|i| bootstrap_one(&data, derive_seed(seed, i)))
        .collect();
    Ok(finish_bootstrap(estimates))
}

/// Sequential twin of [`bootstrap_errors`]; same results.
pub fn bootstrap_errors_seq(
    records: &[ChoiceRecord],
    b: usize,
    seed: u64,
) -> Result<BootstrapErrors> {
    let data = FitData::from_records(records)?;
    let estimates: Vec<BootstrapEstimate> = (0..b as u64)
        .map(|i| bootstrap_one(&data, derive_seed(seed, i)))
        .collect();
    Ok(finish_bootstrap(estimates))
}

/// Which parameters a nested null model pins at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    /// Null model without position bias (`p = 0`).
    PositionBiasZero,
    /// Null model without random choice (`r = 0`).
    RandomChoiceZero,
    /// Quality-only null model (`p = r = 0`).
    Both,
}

/// Likelihood-ratio test of the full model against a nested null.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodRatioTest {
    pub statistic: f64,
    pub df: u32,
    /// Chi-squared upper-tail probability of the statistic.
    pub p_value: f64,
    pub full_log_likelihood: f64,
    pub restricted_log_likelihood: f64,
}

/// Fit both the full and the restricted model and compare twice the
/// log-likelihood gap against the chi-squared tail with as many degrees of
/// freedom as parameters pinned.
pub fn likelihood_ratio_test(
    records: &[ChoiceRecord],
    restriction: Restriction,
) -> Result<LikelihoodRatioTest> {
    let data = FitData::from_records(records)?;
    let (_, _, full_ll) = maximize_fit(&data);
    let (restricted_ll, df) = match restriction {
        Restriction::PositionBiasZero => {
            let (_, ll) =
                golden_section_max(|r| data.log_likelihood(0.0, r), 0.0, 1.0, 1e-9);
            (ll, 1)
        }
        Restriction::RandomChoiceZero => {
            let (_, ll) =
                golden_section_max(|p| data.log_likelihood(p, 0.0), 0.0, 1.0, 1e-9);
            (ll, 1)
        }
        Restriction::Both => (data.log_likelihood(0.0, 0.0), 2),
    };
    let gap = full_ll - restricted_ll;
    if gap < -1e-9 {
        return Err(Error::OptimizerFailure {
            context: format!(
                "restricted likelihood {restricted_ll} exceeds full likelihood {full_ll}"
            ),
        });
    }
    let statistic = 2.0 * gap.max(0.0);
    Ok(LikelihoodRatioTest {
        statistic,
        df,
        p_value: chi_squared_tail(statistic, df),
        full_log_likelihood: full_ll,
        restricted_log_likelihood: restricted_ll,
    })
}

/// Outcome of the parametric-bootstrap agreement check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodnessOfFit {
    /// Fraction of synthetic datasets that fit the model worse than the
    /// observed data.
    pub p_value: f64,
    /// Agreement is declared when the p-value exceeds 0.1.
    pub agrees: bool,
    pub resamples: usize,
}

/// Parametric-bootstrap goodness of fit: generate `b` synthetic datasets from
/// the fitted model at the same displayed pairs and report the fraction whose
/// log-likelihood falls below the observed one.
///
/// With `refit` each synthetic dataset is refitted and compared at its own
/// maximum; the default compares everything at the original fitted
/// parameters, which is substantially cheaper and nearly identical.
pub fn goodness_of_fit(
    records: &[ChoiceRecord],
    fitted: &FitResult,
    b: usize,
    seed: u64,
    refit: bool,
) -> Result<GoodnessOfFit> {
    let data = FitData::from_records(records)?;
    let observed_ll = data.log_likelihood(fitted.p_hat, fitted.r_hat);
    // probability the first answer is chosen, per record, under the fit
    let first_probs: Vec<f64> = records
        .iter()
        .map(|rec| {
            let pair = AnswerPair::new(rec.a_first, rec.a_last).expect("validated above");
            let s = initial_selection_prob(&pair);
            fitted.r_hat / 2.0 + (1.0 - fitted.r_hat) * (fitted.p_hat + (1.0 - fitted.p_hat) * s)
        })
        .collect();

    let synthetic_ll = |i: u64| -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i));
        let synthetic = FitData {
            terms: records
                .iter()
                .zip(&first_probs)
                .map(|(rec, &prob_first)| {
                    let chose_first = rng.random::<f64>() < prob_first;
                    let pair = AnswerPair::new(rec.a_first, rec.a_last).expect("validated above");
                    let s = initial_selection_prob(&pair);
                    let closeness = if chose_first { s } else { 1.0 - s };
                    (closeness, chose_first)
                })
                .collect(),
            degenerate: data.degenerate,
        };
        if refit {
            maximize_fit(&synthetic).2
        } else {
            synthetic.log_likelihood(fitted.p_hat, fitted.r_hat)
        }
    };

    #[cfg(feature = "parallel")]
    let lls: Vec<f64> = (0..b as u64).into_par_iter().map(synthetic_ll).collect();
    #[cfg(not(feature = "parallel"))]
    let lls: Vec<f64> = (0..b as u64).map(synthetic_ll).collect();

    let worse = lls.iter().filter(|&&ll| ll < observed_ll).count();
    let p_value = worse as f64 / b as f64;
    Ok(GoodnessOfFit {
        p_value,
        agrees: p_value > 0.1,
        resamples: b,
    })
}

/// Success/failure counts with a uniform prior over the underlying rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BetaPosterior {
    pub successes: u64,
    pub failures: u64,
}

/// Point estimates and an equal-tailed credible interval for a proportion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaInterval {
    /// `S / (S + F)`; absent when there are no observations.
    pub mle: Option<f64>,
    /// Posterior mean `(S + 1) / (S + F + 2)`.
    pub mean: f64,
    pub low: f64,
    pub high: f64,
}

/// Equal-tailed interval of the Beta(S + 1, F + 1) posterior holding `mass`
/// probability, plus the MLE and posterior-mean point estimates.
pub fn beta_interval(posterior: &BetaPosterior, mass: f64) -> BetaInterval {
    assert!(
        mass > 0.0 && mass < 1.0,
        "interval mass must be in (0, 1), got {mass}"
    );
    let s = posterior.successes as f64;
    let f = posterior.failures as f64;
    let total = s + f;
    let mle = (total > 0.0).then_some(s / total);
    let tail = 0.5 * (1.0 - mass);
    BetaInterval {
        mle,
        mean: (s + 1.0) / (total + 2.0),
        low: beta_quantile(s + 1.0, f + 1.0, tail),
        high: beta_quantile(s + 1.0, f + 1.0, 1.0 - tail),
    }
}

/// Draw synthetic choice records from the model: displayed pairs sampled
/// standard-normal, choices Bernoulli at the model probability.
pub fn simulate_records<R: Rng + ?Sized>(
    params: &ModelParams,
    n: usize,
    rng: &mut R,
) -> Vec<ChoiceRecord> {
    use rand_distr::{Distribution, StandardNormal};
    (0..n)
        .map(|_| {
            let a_first: f64 = StandardNormal.sample(rng);
            let a_last: f64 = StandardNormal.sample(rng);
            let pair = AnswerPair::new(a_first, a_last).expect("normal draws are finite");
            let prob_first = crate::model::choice_prob_first(&pair, params);
            ChoiceRecord {
                a_first,
                a_last,
                chose_first: rng.random::<f64>() < prob_first,
            }
        })
        .collect()
}
