//! Growth-regime classifiers.
//!
//! Each hypothesis about the pair (f, g) — sublinear or superlinear balance
//! against the first eigenvalue, origin behaviour, Sobolev subcriticality,
//! superlinearity of primitives, exponential growth type, and the min-max
//! lower bound — is probed on geometric grids and answered with a [`Verdict`].
//!
//! Uniformity over the closed ball is realized as min/max over a fixed set of
//! radial shells. Limits at −∞ or 0⁻ are estimated from the tail of the
//! sampled sequence: a tail whose relative spread is below tolerance is a
//! plateau, a monotone unbounded tail counts as divergence, and anything else
//! is reported as `Indeterminate` rather than guessed. Probes work on the
//! logarithm of the sampled ratios so that exponential families can be
//! followed far beyond floating-point range.

pub mod constants;
mod hypotheses;

pub use constants::{alpha_n, harmonic, hessian_constants, k_star, sphere_area, HessianConstants};
pub use hypotheses::{
    check_ar, check_subcritical_sobolev, classify_infinity, classify_origin, classify_origin_tm,
    exp_growth_type, full_report, minmax_check, minmax_threshold, ratio_infinity, ArParams,
    ClassifyInputs, ClassifyReport,
};

use serde::Serialize;

use crate::error::{Error, Result};

/// Which end of the axis a probe approaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Infinity,
    Origin,
}

/// Geometric probe grid and plateau-detection settings.
#[derive(Debug, Clone)]
pub struct LimitProbe {
    /// first grid magnitude; grid is z_j = −z0·ρ^{±j}
    pub z0: f64,
    pub rho: f64,
    pub points: usize,
    /// tail length entering the plateau test
    pub window: usize,
    /// relative spread declaring a plateau
    pub spread_tol: f64,
    /// ratios below this value count as a zero limit
    pub zero_tol: f64,
    /// sustained tail growth by this factor counts as divergence
    pub diverge_factor: f64,
    /// verdicts require at least this relative distance to the threshold
    pub margin_min: f64,
    /// radial shells standing in for x ∈ closed ball
    pub x_samples: Vec<f64>,
}

fn default_shells() -> Vec<f64> {
    (0..32).map(|j| j as f64 / 31.0).collect()
}

impl LimitProbe {
    /// Standard grid towards −∞: 40 points from −1 doubling each step.
    pub fn infinity() -> Self {
        LimitProbe {
            z0: 1.0,
            rho: 2.0,
            points: 40,
            window: 5,
            spread_tol: 1e-3,
            zero_tol: 1e-9,
            diverge_factor: 10.0,
            margin_min: 1e-6,
            x_samples: default_shells(),
        }
    }

    /// Standard grid towards 0⁻: 40 points from −1 halving each step.
    pub fn origin() -> Self {
        Self::infinity()
    }

    /// Shorter infinity grid for probes that subtract two large exponents
    /// (min-max estimates); beyond ~10⁴ the cancellation hits f64 precision.
    pub fn moderate_infinity() -> Self {
        LimitProbe {
            points: 14,
            ..Self::infinity()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 1.0) {
            return Err(Error::domain("probe ratio rho must exceed 1"));
        }
        if !(self.z0 > 0.0) {
            return Err(Error::domain("probe start z0 must be positive"));
        }
        if self.points < self.window || self.window < 2 {
            return Err(Error::domain("probe needs points >= window >= 2"));
        }
        if self.x_samples.is_empty() {
            return Err(Error::domain("probe needs at least one x sample"));
        }
        Ok(())
    }

    /// The grid in probe order (increasingly extreme towards the limit).
    pub fn grid(&self, direction: Direction) -> Vec<f64> {
        (0..self.points)
            .map(|j| match direction {
                Direction::Infinity => -self.z0 * self.rho.powi(j as i32),
                Direction::Origin => -self.z0 * self.rho.powi(-(j as i32)),
            })
            .collect()
    }
}

/// Classifier outcome labels. One enum covers every hypothesis; each verdict
/// names the hypothesis it answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Label {
    Sublinear,
    Superlinear,
    Pass,
    Fail,
    SubcriticalExp,
    CriticalExp,
    Indeterminate,
}

/// Sampled series backing a verdict: per grid point, the min and max of the
/// probed quantity over the x samples. `scale` names the quantity.
#[derive(Debug, Clone, Serialize)]
pub struct Evidence {
    pub grid: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub scale: String,
}

impl Evidence {
    pub fn empty(scale: &str) -> Self {
        Evidence {
            grid: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            scale: scale.to_string(),
        }
    }
}

/// The answer to one hypothesis.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub hypothesis: String,
    pub label: Label,
    /// false means the probe could not commit; the label is then Indeterminate
    pub converged: bool,
    /// relative distance to the decision threshold, when one applies
    pub margin: Option<f64>,
    /// the estimated limit, when finite and meaningful
    pub limit: Option<f64>,
    pub note: Option<String>,
    pub evidence: Evidence,
}

impl Verdict {
    fn indeterminate(hypothesis: &str, evidence: Evidence, note: Option<String>) -> Self {
        Verdict {
            hypothesis: hypothesis.to_string(),
            label: Label::Indeterminate,
            converged: false,
            margin: None,
            limit: None,
            note,
            evidence,
        }
    }
}

/// What a sampled log-series tail looks like.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum TailOutcome {
    /// both envelopes flat; carries exp(mean) of lower and upper envelopes
    Plateau { low: f64, high: f64 },
    /// ratios collapse below the zero tolerance
    Zero,
    /// sustained unbounded growth of the lower envelope
    Diverging,
    Inconclusive,
}

/// Classify the tail of a log-scale series pair (lower/upper envelopes over
/// the x samples, in probe order).
pub(crate) fn analyze_log_tail(lower: &[f64], upper: &[f64], probe: &LimitProbe) -> TailOutcome {
    if lower.len() < probe.window || lower.len() != upper.len() {
        return TailOutcome::Inconclusive;
    }
    let lo_tail = &lower[lower.len() - probe.window..];
    let hi_tail = &upper[upper.len() - probe.window..];
    let zero_log = probe.zero_tol.ln();

    if hi_tail.iter().all(|&v| v <= zero_log) && hi_tail[hi_tail.len() - 1] <= hi_tail[0] + 0.1 {
        return TailOutcome::Zero;
    }

    let spread = |tail: &[f64]| {
        let max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    };
    // spread of the log is the log of the relative spread
    if spread(lo_tail) <= probe.spread_tol && spread(hi_tail) <= probe.spread_tol {
        let mean = |tail: &[f64]| tail.iter().sum::<f64>() / tail.len() as f64;
        return TailOutcome::Plateau {
            low: mean(lo_tail).exp(),
            high: mean(hi_tail).exp(),
        };
    }

    let increasing = lo_tail.windows(2).all(|w| w[1] > w[0]);
    if increasing && lo_tail[lo_tail.len() - 1] - lo_tail[0] >= probe.diverge_factor.ln() {
        return TailOutcome::Diverging;
    }

    TailOutcome::Inconclusive
}

/// Evaluate a log-scale quantity over grid × x-samples. `eval` may return
/// `Ok(None)` to drop a point (out of the reachable range); hard errors abort.
/// Returns (kept grid, lower envelope, upper envelope).
pub(crate) fn sample_envelopes(
    grid: &[f64],
    x_samples: &[f64],
    mut eval: impl FnMut(f64, f64) -> Result<Option<f64>>,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut kept = Vec::new();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    'grid: for &z in grid {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &r in x_samples {
            match eval(r, z)? {
                Some(v) => {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                None => continue 'grid, // uniformity needs every shell
            }
        }
        kept.push(z);
        lower.push(lo);
        upper.push(hi);
    }
    Ok((kept, lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probe() -> LimitProbe {
        LimitProbe::infinity()
    }

    #[test]
    fn plateau_detection() {
        let vals: Vec<f64> = (0..10).map(|i| 2.0 + 1e-5 * i as f64).collect();
        match analyze_log_tail(&vals, &vals, &probe()) {
            TailOutcome::Plateau { low, high } => {
                assert!((low - 2.0f64.exp()).abs() < 1e-3);
                assert!((high - low).abs() < 1e-6);
            }
            other => panic!("expected plateau, got {other:?}"),
        }
    }

    #[test]
    fn zero_detection() {
        let vals: Vec<f64> = (0..10).map(|i| -5.0 * i as f64 - 30.0).collect();
        assert_eq!(analyze_log_tail(&vals, &vals, &probe()), TailOutcome::Zero);
        // minus infinity entries (exact zeros) also count
        let zeros = vec![f64::NEG_INFINITY; 10];
        assert_eq!(analyze_log_tail(&zeros, &zeros, &probe()), TailOutcome::Zero);
    }

    #[test]
    fn divergence_detection() {
        let vals: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert_eq!(
            analyze_log_tail(&vals, &vals, &probe()),
            TailOutcome::Diverging
        );
    }

    #[test]
    fn inconclusive_on_oscillation() {
        let vals: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { 1.0 } else { 2.0 }).collect();
        assert_eq!(
            analyze_log_tail(&vals, &vals, &probe()),
            TailOutcome::Inconclusive
        );
    }

    #[test]
    fn short_series_is_inconclusive() {
        let vals = vec![1.0, 1.0];
        assert_eq!(
            analyze_log_tail(&vals, &vals, &probe()),
            TailOutcome::Inconclusive
        );
    }

    #[test]
    fn grids_are_geometric() {
        let p = LimitProbe::infinity();
        let g = p.grid(Direction::Infinity);
        assert_eq!(g.len(), 40);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[3], -8.0);
        let o = p.grid(Direction::Origin);
        assert_eq!(o[3], -0.125);
        for w in g.windows(2) {
            assert!(w[1] < w[0]);
        }
        for w in o.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn envelope_drops_unreachable_points() {
        let grid = [-1.0, -2.0, -4.0];
        let (kept, lo, hi) = sample_envelopes(&grid, &[0.0, 1.0], |r, z| {
            if z < -3.0 {
                Ok(None)
            } else {
                Ok(Some(z + r))
            }
        })
        .unwrap();
        assert_eq!(kept, vec![-1.0, -2.0]);
        assert_eq!(lo, vec![-1.0, -2.0]);
        assert_eq!(hi, vec![0.0, -1.0]);
    }
}
