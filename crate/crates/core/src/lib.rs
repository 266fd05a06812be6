//! Two-option crowdsourced ranking toolkit.
//!
//! The crate models a voter choosing between two ranked answers under two
//! cognitive heuristics — position bias `p` (pick the top answer regardless of
//! content) and a random-choice rate `r` — on top of an otherwise
//! quality-driven choice. From that decision model it provides:
//!
//! - [`model`]: the choice probabilities themselves and a Bernoulli sampler;
//! - [`normalize`]: cleaning raw numeric guesses and z-scoring their logs;
//! - [`stability`]: when popularity ranking locks in the worse answer, the
//!   critical quality gap, and the long-run recency-ranking probability;
//! - [`simulate`]: Monte-Carlo vote sequences under popularity, recency, and
//!   quality-inference ranking policies;
//! - [`inference`]: maximum-likelihood quality estimation from
//!   position-conditioned vote counts;
//! - [`fit`]: fitting `(p, r)` to observed choices, bootstrap errors, nested
//!   likelihood-ratio tests, parametric-bootstrap goodness of fit, and
//!   Beta-posterior intervals;
//! - [`io`]: the CSV formats shared with the command-line tool.
//!
//! Experiments, bootstraps, and grid sweeps are data-parallel via rayon when
//! the `parallel` feature (on by default) is enabled; every parallel entry
//! point has a sequential twin that produces bit-identical results.

pub mod error;
pub mod fit;
pub mod inference;
pub mod io;
pub mod model;
pub mod normalize;
pub mod optimize;
pub mod seed;
pub mod simulate;
pub mod special;
pub mod stability;

pub use error::{Error, Result};
pub use model::{AnswerPair, ChoiceOutcome, ModelParams};

/// Size the global rayon pool; a no-op without the `parallel` feature.
///
/// Call at most once, before any parallel work runs.
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) {
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
}

/// Size the global rayon pool; a no-op without the `parallel` feature.
#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_n: usize) {}
