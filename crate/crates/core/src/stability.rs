//! Closed-form stability analysis of popularity ranking and the long-run
//! behavior of recency ranking.
//!
//! Popularity ranking is stable — the best answer is guaranteed to end up
//! first given enough votes — exactly when the best answer is more likely to
//! be chosen from last place than the worst answer is from first place.
//! That reduces to a threshold on the quality gap: the probability `q` that
//! a latent guess falls closer to the best answer must exceed
//! `1 / (2 (1 - p))`. For position bias `p >= 0.5` the threshold reaches 1
//! and no quality gap can stabilize the ranking.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::special::normal_cdf;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Critical initial-selection probability for popularity-ranking stability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionThreshold {
    /// The threshold `1 / (2 (1 - p))`. Quality gaps with selection
    /// probability above this are stable under popularity ranking.
    pub value: f64,
    /// Set when the threshold is at or above 1, so no achievable quality gap
    /// stabilizes the ranking.
    pub no_stable_region: bool,
}

/// One cell of the stability phase diagram over (position bias, worst-answer
/// value), with the best answer fixed at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub p: f64,
    pub a_worst: f64,
    pub stable: bool,
}

/// Critical selection probability as a function of the position bias.
///
/// Independent of the random-choice rate by construction. Errors on
/// `p` outside `[0, 1)`; flags `no_stable_region` for `p >= 0.5`.
pub fn s_crit(p: f64) -> Result<SelectionThreshold> {
    if !p.is_finite() || !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidProbability {
            name: "position bias p",
            value: p,
        });
    }
    let value = 1.0 / (2.0 * (1.0 - p));
    Ok(SelectionThreshold {
        value,
        no_stable_region: value >= 1.0,
    })
}

/// The worst-answer value at the stability boundary, with the best answer at
/// zero: the `a > 0` where the selection probability `Phi(a / 2)` meets the
/// critical threshold. Solved by bisection to 1e-10.
pub fn critical_a_worst(p: f64) -> Result<f64> {
    let threshold = s_crit(p)?;
    if threshold.no_stable_region {
        return Err(Error::NoStableRegion { p });
    }
    let target = threshold.value;
    let f = |a: f64| normal_cdf(a / 2.0) - target;
    if f(0.0) >= 0.0 {
        // p = 0: the boundary sits at a zero quality gap
        return Ok(0.0);
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while f(hi) < 0.0 {
        hi *= 2.0;
        debug_assert!(hi < 1e3, "bracket expansion ran away");
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Label every grid cell stable or unstable. A cell is stable only when the
/// worst-answer value strictly exceeds the critical boundary for its `p`;
/// points exactly on the boundary are labeled unstable.
pub fn phase_diagram(p_grid: &[f64], a_grid: &[f64]) -> Vec<PhasePoint> {
    let row = |&p: &f64| -> Vec<PhasePoint> {
        let boundary = critical_a_worst(p).ok();
        a_grid
            .iter()
            .map(|&a_worst| PhasePoint {
                p,
                a_worst,
                stable: boundary.is_some_and(|b| a_worst > b),
            })
            .collect()
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<PhasePoint>> = p_grid.par_iter().map(row).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<PhasePoint>> = p_grid.iter().map(row).collect();
    rows.into_iter().flatten().collect()
}

/// Long-run probability that the best answer is ranked first under recency
/// ranking (most recently chosen answer on top), given the quality gap `q`
/// (probability a guess is closer to the best answer).
///
/// This is the fixed point of the one-step recursion: the best answer is on
/// top next vote iff it is chosen this vote, from whichever position it
/// currently occupies.
pub fn recency_asymptote(q: f64, params: &ModelParams) -> f64 {
    debug_assert!((0.0..=1.0).contains(&q), "q = {q} outside [0, 1]");
    let p = params.p();
    let r = params.r();
    (2.0 * (1.0 - p) * (1.0 - r) * q + r) / (2.0 - 2.0 * p * (1.0 - r))
}
