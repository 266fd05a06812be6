//! Cleaning raw numeric guesses and mapping them to z-scores of log guesses.
//!
//! Raw guesses for a question span orders of magnitude and are roughly
//! log-normal, so the working representation of an answer is
//! `A = (ln g - mean_log) / std_log`. After this transform zero is the best
//! possible answer and a latent guess is approximately standard normal,
//! which is what the decision model assumes.

use crate::error::{Error, Result};
use crate::special::normal_quantile;

/// Guesses below this bound (or non-finite) are discarded as invalid.
pub const MIN_GUESS: f64 = 1.0;
/// Guesses above this bound are discarded as throwaway answers.
pub const MAX_GUESS: f64 = 1e6;

/// A cleaned batch of guesses for one question.
#[derive(Debug, Clone, PartialEq)]
pub struct GuessSample {
    pub question_id: String,
    pub guesses: Vec<f64>,
    /// How many raw entries the cleaning step dropped.
    pub removed: usize,
}

/// Location and scale of the log guesses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationStats {
    pub mean_log: f64,
    pub std_log: f64,
    pub n: usize,
}

impl NormalizationStats {
    /// Replace the centering point, e.g. with the log of the known true
    /// answer instead of the sample mean. The scale is left untouched.
    pub fn with_mean_log(mut self, mean_log: f64) -> Self {
        self.mean_log = mean_log;
        self
    }
}

/// Drop invalid guesses: non-finite values and anything outside
/// `[MIN_GUESS, MAX_GUESS]` (bounds inclusive). Survivor order is preserved.
///
/// Fails if fewer than two guesses survive, since normalization needs a
/// nonzero variance.
pub fn clean_guesses(question_id: &str, raw: &[f64]) -> Result<GuessSample> {
    let guesses: Vec<f64> = raw
        .iter()
        .copied()
        .filter(|g| g.is_finite() && (MIN_GUESS..=MAX_GUESS).contains(g))
        .collect();
    if guesses.len() < 2 {
        return Err(Error::InsufficientData {
            context: format!(
                "question {question_id:?}: {} valid guesses after cleaning, need at least 2",
                guesses.len()
            ),
        });
    }
    let removed = raw.len() - guesses.len();
    Ok(GuessSample {
        question_id: question_id.to_owned(),
        guesses,
        removed,
    })
}

/// Mean and sample standard deviation (n - 1 denominator) of the log guesses.
pub fn fit_stats(sample: &GuessSample) -> Result<NormalizationStats> {
    let n = sample.guesses.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            context: format!("need at least 2 guesses to fit, got {n}"),
        });
    }
    let logs: Vec<f64> = sample.guesses.iter().map(|g| g.ln()).collect();
    let mean_log = logs.iter().sum::<f64>() / n as f64;
    let var = logs.iter().map(|x| (x - mean_log).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var <= 0.0 {
        return Err(Error::DegenerateSample);
    }
    Ok(NormalizationStats {
        mean_log,
        std_log: var.sqrt(),
        n,
    })
}

/// z-score of `ln(guess)` under `stats`.
pub fn normalize(guess: f64, stats: &NormalizationStats) -> Result<f64> {
    if !guess.is_finite() || guess < MIN_GUESS {
        return Err(Error::InvalidGuess { value: guess });
    }
    Ok((guess.ln() - stats.mean_log) / stats.std_log)
}

/// Normalize every guess in a sample.
pub fn normalize_all(sample: &GuessSample, stats: &NormalizationStats) -> Result<Vec<f64>> {
    sample
        .guesses
        .iter()
        .map(|&g| normalize(g, stats))
        .collect()
}

/// Quantile-quantile pairs for a log-normality check: standard-normal
/// quantiles at plotting positions `(i - 0.5) / n` against the sorted
/// normalized values.
pub fn lognormal_qq(sample: &GuessSample) -> Result<Vec<(f64, f64)>> {
    let stats = fit_stats(sample)?;
    let mut values = normalize_all(sample, &stats)?;
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    Ok(values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let pos = (i as f64 + 0.5) / n as f64;
            (normal_quantile(pos), v)
        })
        .collect())
}
