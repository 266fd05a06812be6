//! Monte-Carlo simulation of sequential voters choosing between two ranked
//! answers, under pluggable ranking policies.
//!
//! Each trial fixes the two answer values (best at zero by convention), the
//! true behavioral parameters, and a policy. Voters arrive one at a time,
//! see the current order, and choose per the decision model; the chosen
//! answer's counters update and the policy then reorders. Within a trial the
//! votes are inherently sequential; across trials everything is independent,
//! seeded per trial from the experiment master seed, and runs in parallel
//! under the `parallel` feature with results identical to the sequential
//! path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fit::{beta_interval, BetaPosterior};
use crate::inference::{mle_quality, VoteLedger};
use crate::model::{choice_prob_first, AnswerPair, ModelParams};
use crate::seed::derive_seed;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How answers reorder after each vote.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankingPolicy {
    /// Answer with more total votes first. The worst answer may start with a
    /// vote head start; those votes count toward totals but are not observed
    /// choices, so they never enter the inference ledger.
    Popularity { initial_advantage: u64 },
    /// Most recently chosen answer first.
    Recency,
    /// Answer whose inferred quality gap exceeds 1/2 first, re-estimated
    /// after every vote from the position-conditioned ledger. The assumed
    /// parameters may differ from the true ones for robustness studies.
    Quality { assumed: ModelParams },
}

impl RankingPolicy {
    /// Stable label used in CSV output.
    pub fn label(&self) -> String {
        match self {
            RankingPolicy::Popularity { initial_advantage } => {
                format!("popularity_{initial_advantage}")
            }
            RankingPolicy::Recency => "recency".to_owned(),
            RankingPolicy::Quality { .. } => "quality".to_owned(),
        }
    }
}

/// One simulated ranking run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    /// Best answer value; zero by convention.
    pub a_best: f64,
    /// Worst answer value; must differ from `a_best`.
    pub a_worst: f64,
    pub true_params: ModelParams,
    pub policy: RankingPolicy,
    pub num_votes: u64,
    pub seed: u64,
}

/// Final state of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub best_first_at_end: bool,
    pub votes_best: u64,
    pub votes_worst: u64,
    /// Position-conditioned counts for the best answer (observed votes only).
    pub ledger: VoteLedger,
}

/// Mutable per-trial bookkeeping: current order, vote totals, and the
/// inference ledger for the best answer. Votes are applied in terms of
/// "chose the first-listed answer" so the policy logic is testable without
/// a random source.
struct TrialState {
    policy: RankingPolicy,
    best_first: bool,
    votes_best: u64,
    votes_worst: u64,
    ledger: VoteLedger,
}

impl TrialState {
    fn new(policy: RankingPolicy, best_first: bool) -> Self {
        let votes_worst = match policy {
            RankingPolicy::Popularity { initial_advantage } => initial_advantage,
            _ => 0,
        };
        Self {
            policy,
            best_first,
            votes_best: 0,
            votes_worst,
            ledger: VoteLedger::empty(),
        }
    }

    /// Record one vote for the currently first (or last) listed answer, then
    /// reorder per the policy.
    fn apply_vote(&mut self, chose_first: bool) {
        let chose_best = chose_first == self.best_first;
        if chose_best {
            self.votes_best += 1;
        } else {
            self.votes_worst += 1;
        }
        self.ledger.record(self.best_first, chose_best);
        self.best_first = match &self.policy {
            RankingPolicy::Popularity { .. } => {
                // ties preserve the current order
                if self.votes_best == self.votes_worst {
                    self.best_first
                } else {
                    self.votes_best > self.votes_worst
                }
            }
            RankingPolicy::Recency => chose_best,
            RankingPolicy::Quality { assumed } => {
                let estimate = mle_quality(&self.ledger, assumed);
                if estimate.uninformed || estimate.q_hat == 0.5 {
                    self.best_first
                } else {
                    estimate.rank_first
                }
            }
        };
    }

    fn result(&self) -> TrialResult {
        TrialResult {
            best_first_at_end: self.best_first,
            votes_best: self.votes_best,
            votes_worst: self.votes_worst,
            ledger: self.ledger,
        }
    }
}

/// Initial display order: the worst answer leads when it starts with a vote
/// advantage, otherwise a uniform coin from the trial RNG decides.
fn initial_best_first<R: Rng + ?Sized>(policy: &RankingPolicy, rng: &mut R) -> bool {
    match policy {
        RankingPolicy::Popularity { initial_advantage } if *initial_advantage > 0 => false,
        _ => rng.random::<bool>(),
    }
}

fn run_trial_impl(config: &TrialConfig, checkpoints: &[u64]) -> (TrialResult, Vec<bool>) {
    assert!(config.num_votes >= 1, "num_votes must be at least 1");
    assert!(
        config.a_best != config.a_worst,
        "the two answers must be distinct"
    );
    debug_assert!(
        checkpoints.windows(2).all(|w| w[0] < w[1])
            && checkpoints.last().is_none_or(|&c| c >= 1 && c <= config.num_votes),
        "checkpoints must be increasing and within 1..=num_votes"
    );

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let best_first_pair = AnswerPair::new(config.a_best, config.a_worst).expect("finite values");
    let worst_first_pair = best_first_pair.swapped();
    let prob_first_given_best_first = choice_prob_first(&best_first_pair, &config.true_params);
    let prob_first_given_worst_first = choice_prob_first(&worst_first_pair, &config.true_params);

    let mut state = TrialState::new(config.policy, initial_best_first(&config.policy, &mut rng));
    let mut flags = Vec::with_capacity(checkpoints.len());
    let mut next_checkpoint = 0;
    for vote in 1..=config.num_votes {
        let prob_first = if state.best_first {
            prob_first_given_best_first
        } else {
            prob_first_given_worst_first
        };
        state.apply_vote(rng.random::<f64>() < prob_first);
        if next_checkpoint < checkpoints.len() && checkpoints[next_checkpoint] == vote {
            flags.push(state.best_first);
            next_checkpoint += 1;
        }
    }
    (state.result(), flags)
}

/// Simulate one trial to completion.
pub fn run_trial(config: &TrialConfig) -> TrialResult {
    run_trial_impl(config, &[]).0
}

/// Simulate one trial, also recording whether the best answer sat first
/// after the reorder step of each checkpoint vote. Checkpoints must be
/// strictly increasing and within `1..=num_votes`.
pub fn run_trial_tracked(config: &TrialConfig, checkpoints: &[u64]) -> (TrialResult, Vec<bool>) {
    run_trial_impl(config, checkpoints)
}

/// A batch of independent trials sharing one configuration, evaluated at a
/// set of vote-count checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub a_best: f64,
    pub a_worst: f64,
    pub true_params: ModelParams,
    pub policy: RankingPolicy,
    pub num_trials: u64,
    /// Strictly increasing vote counts; the last one is the trial length.
    pub checkpoints: Vec<u64>,
    pub master_seed: u64,
}

/// Fraction of trials with the best answer ranked first at one checkpoint,
/// with a 95% equal-tailed interval from the Beta posterior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointEstimate {
    pub votes: u64,
    pub trials: u64,
    pub best_first_count: u64,
    pub prob_best_first: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

fn trial_flags(config: &ExperimentConfig, index: u64) -> Vec<bool> {
    let trial = TrialConfig {
        a_best: config.a_best,
        a_worst: config.a_worst,
        true_params: config.true_params,
        policy: config.policy,
        num_votes: *config.checkpoints.last().expect("validated non-empty"),
        seed: derive_seed(config.master_seed, index),
    };
    run_trial_tracked(&trial, &config.checkpoints).1
}

fn summarize(config: &ExperimentConfig, all_flags: Vec<Vec<bool>>) -> Vec<CheckpointEstimate> {
    let trials = all_flags.len() as u64;
    config
        .checkpoints
        .iter()
        .enumerate()
        .map(|(k, &votes)| {
            let best_first_count = all_flags.iter().filter(|flags| flags[k]).count() as u64;
            let posterior = BetaPosterior {
                successes: best_first_count,
                failures: trials - best_first_count,
            };
            let interval = beta_interval(&posterior, 0.95);
            CheckpointEstimate {
                votes,
                trials,
                best_first_count,
                prob_best_first: interval.mle.expect("at least one trial"),
                ci_low: interval.low,
                ci_high: interval.high,
            }
        })
        .collect()
}

fn validate_experiment(config: &ExperimentConfig) {
    assert!(config.num_trials >= 1, "num_trials must be at least 1");
    assert!(
        !config.checkpoints.is_empty()
            && config.checkpoints[0] >= 1
            && config.checkpoints.windows(2).all(|w| w[0] < w[1]),
        "checkpoints must be non-empty and strictly increasing"
    );
}

/// Run all trials and aggregate per checkpoint. Trials run in parallel under
/// the `parallel` feature; results are identical to [`run_experiment_seq`].
pub fn run_experiment(config: &ExperimentConfig) -> Vec<CheckpointEstimate> {
    validate_experiment(config);
    #[cfg(feature = "parallel")]
    let all_flags: Vec<Vec<bool>> = (0..config.num_trials)
        .into_par_iter()
        .map(|i| trial_flags(config, i))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let all_flags: Vec<Vec<bool>> = (0..config.num_trials)
        .map(|i| trial_flags(config, i))
        .collect();
    summarize(config, all_flags)
}

/// Sequential twin of [`run_experiment`]; same results on the same seed.
pub fn run_experiment_seq(config: &ExperimentConfig) -> Vec<CheckpointEstimate> {
    validate_experiment(config);
    let all_flags: Vec<Vec<bool>> = (0..config.num_trials)
        .map(|i| trial_flags(config, i))
        .collect();
    summarize(config, all_flags)
}
