//! Non-existence density and sign scans.
//!
//! For the gradient-free equation with right-hand side h(x, z) the scan
//! evaluates the density
//!
//! ```text
//!   D(x, z) = n Ψ(x,z) − ((n−2k)/(k+1)) z h(x,z) + Σ_i x_i ∂Ψ/∂x_i(x,z)
//! ```
//!
//! with Ψ(x,z) = ∫_0^z h(x,t) dt. A density that is strictly positive on
//! Ω × (−∞, 0) rules out negative solutions on star-shaped domains; a
//! nonnegative density with zeros still rules them out when ⟨x, ν⟩ > 0 on the
//! boundary (the unit ball satisfies both). Mixed signs are inconclusive.
//!
//! Sign classification is relative to the local magnitude of the three terms:
//! zeros are |D| below a declared fraction of that scale, not of an absolute
//! unit, so homogeneous families classify uniformly across many decades of z.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad;
use crate::transform::{Transform, TransformedNonlinearity};

/// Relative sign tolerance of the scan. The transformed nonlinearity carries
/// inverse-solver and quadrature error of order 1e-11 relative, so exact
/// cancellations classify as zeros at 1e-10, not machine precision.
pub const SIGN_EPS: f64 = 1e-10;

type HFn = Arc<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>;

/// The density evaluator bound to a transformed nonlinearity (or a raw h for
/// cross-checks), with its primitive built by adaptive quadrature.
pub struct NonexistenceDensity {
    h: HFn,
    n: usize,
    k: usize,
    x_independent: bool,
    quad_abs: f64,
    quad_rel: f64,
}

impl NonexistenceDensity {
    /// Density of the transformed nonlinearity of a pair; requires the
    /// Sobolev regime n > 2k.
    pub fn from_transform(transform: &Arc<Transform>) -> Result<Self> {
        let pair = transform.pair();
        if pair.n <= 2 * pair.k {
            return Err(Error::domain(format!(
                "non-existence scan needs n > 2k; got n = {}, k = {}",
                pair.n, pair.k
            )));
        }
        let h: TransformedNonlinearity = transform.transformed_h();
        let x_independent = pair.f.x_independent();
        Ok(NonexistenceDensity {
            h: Arc::new(move |r, z| h.eval(r, z)),
            n: pair.n,
            k: pair.k,
            x_independent,
            quad_abs: transform.settings().quad_abs,
            quad_rel: transform.settings().quad_rel,
        })
    }

    /// Density of an explicit h(r, z); used by the sign-convention tests.
    pub fn from_closure(
        n: usize,
        k: usize,
        x_independent: bool,
        h: impl Fn(f64, f64) -> Result<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if k == 0 || n <= 2 * k {
            return Err(Error::domain("need n > 2k >= 2"));
        }
        Ok(NonexistenceDensity {
            h: Arc::new(h),
            n,
            k,
            x_independent,
            quad_abs: 1e-12,
            quad_rel: 1e-10,
        })
    }

    /// Ψ(x, z) = ∫_0^z h(x, t) dt ≤ 0 for nonnegative h and z < 0.
    pub fn primitive(&self, r: f64, z: f64) -> Result<f64> {
        let h = &self.h;
        let value = quad::integrate(
            |t| h(r, t).unwrap_or(f64::NAN),
            z,
            0.0,
            self.quad_abs,
            self.quad_rel,
        )?;
        Ok(-value)
    }

    /// The density and the magnitude of its constituent terms at (x, z).
    fn density_terms(&self, r: f64, z: f64) -> Result<(f64, f64)> {
        if !(z < 0.0) {
            return Err(Error::domain("density requires z < 0"));
        }
        let n = self.n as f64;
        let coef = (self.n as f64 - 2.0 * self.k as f64) / (self.k as f64 + 1.0);
        let psi = self.primitive(r, z)?;
        let hval = (self.h)(r, z)?;
        let radial_term = if self.x_independent {
            0.0
        } else {
            // Σ x_i ∂Ψ/∂x_i = r ∂Ψ/∂r for radial h
            let delta = 1e-4 * r.max(0.05);
            let lo = (r - delta).max(0.0);
            let hi = (r + delta).min(1.0);
            r * (self.primitive(hi, z)? - self.primitive(lo, z)?) / (hi - lo)
        };
        let density = n * psi - coef * z * hval + radial_term;
        let scale = (n * psi).abs() + (coef * z * hval).abs() + radial_term.abs();
        Ok((density, scale))
    }

    /// The density at a point x (dimension n) and z < 0.
    pub fn density(&self, x: &[f64], z: f64) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::domain(format!(
                "point dimension {} does not match n = {}",
                x.len(),
                self.n
            )));
        }
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(self.density_terms(r, z)?.0)
    }
}

/// Scan grid over (x, z): radial shells and a geometric z ladder.
#[derive(Debug, Clone, Serialize)]
pub struct ScanGrid {
    pub z_min: f64,
    pub z_max: f64,
    pub z_points: usize,
    pub shells: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid {
            z_min: -1e4,
            z_max: -1e-3,
            z_points: 60,
            shells: 16,
        }
    }
}

impl ScanGrid {
    fn validate(&self) -> Result<()> {
        if !(self.z_min < self.z_max && self.z_max < 0.0) {
            return Err(Error::domain("scan needs z_min < z_max < 0"));
        }
        if self.z_points < 2 || self.shells == 0 {
            return Err(Error::domain("scan needs z_points >= 2 and shells >= 1"));
        }
        Ok(())
    }

    fn z_ladder(&self) -> Vec<f64> {
        let ratio = (self.z_min / self.z_max).powf(1.0 / (self.z_points as f64 - 1.0));
        (0..self.z_points)
            .map(|j| self.z_max * ratio.powi(j as i32))
            .collect()
    }
}

/// Scan outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScanLabel {
    /// density > 0 everywhere sampled: non-existence on star-shaped domains
    StrictlyPositive,
    /// density ≥ 0 with zeros: non-existence under the boundary condition
    /// ⟨x, ν⟩ > 0
    NonnegativeWithZeros,
    /// sign changes: the criterion is inconclusive
    Mixed,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSample {
    pub r: f64,
    pub z: f64,
    pub density: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub label: ScanLabel,
    /// h vanished identically on the grid
    pub degenerate: bool,
    pub min_normalized: f64,
    pub min_at: (f64, f64),
    pub zeros: usize,
    pub grid: ScanGrid,
    pub sign_eps: f64,
    pub samples: Vec<ScanSample>,
}

/// Evaluate the density over the grid and classify its sign, relative to the
/// local term scale with tolerance [`SIGN_EPS`].
pub fn nonexistence_scan(density: &NonexistenceDensity, grid: &ScanGrid) -> Result<ScanReport> {
    grid.validate()?;
    let shells: Vec<f64> = if density.x_independent {
        vec![0.5]
    } else {
        (0..grid.shells)
            .map(|j| (j as f64 + 0.5) / grid.shells as f64)
            .collect()
    };
    let ladder = grid.z_ladder();
    let rows: Vec<Result<Vec<ScanSample>>> = ladder
        .par_iter()
        .map(|&z| {
            shells
                .iter()
                .map(|&r| {
                    let (d, scale) = density.density_terms(r, z)?;
                    let normalized = if scale > 1e-300 { d / scale } else { 0.0 };
                    Ok(ScanSample {
                        r,
                        z,
                        density: d,
                        normalized,
                    })
                })
                .collect()
        })
        .collect();

    let mut samples = Vec::with_capacity(ladder.len() * shells.len());
    for row in rows {
        samples.extend(row?);
    }
    let mut min_normalized = f64::INFINITY;
    let mut min_at = (f64::NAN, f64::NAN);
    let mut zeros = 0usize;
    let mut any_negative = false;
    let mut degenerate = true;
    for s in &samples {
        if s.normalized < min_normalized {
            min_normalized = s.normalized;
            min_at = (s.r, s.z);
        }
        if s.normalized.abs() <= SIGN_EPS {
            zeros += 1;
        } else if s.normalized < 0.0 {
            any_negative = true;
        }
        if s.density != 0.0 {
            degenerate = false;
        }
    }
    let label = if any_negative {
        ScanLabel::Mixed
    } else if zeros > 0 {
        ScanLabel::NonnegativeWithZeros
    } else {
        ScanLabel::StrictlyPositive
    };
    Ok(ScanReport {
        label,
        degenerate,
        min_normalized,
        min_at,
        zeros,
        grid: grid.clone(),
        sign_eps: SIGN_EPS,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::{FFamily, GFamily, GrowthPair};

    fn power_density(p: f64) -> NonexistenceDensity {
        // n = 5, k = 2, h(z) = (−z)^p through the full transform
        let pair =
            GrowthPair::new(5, 2, FFamily::PowerExp { p, k: 2 }, GFamily::Const(1.0)).unwrap();
        let t = Transform::with_defaults(pair).unwrap();
        NonexistenceDensity::from_transform(&t).unwrap()
    }

    #[test]
    fn sign_convention_against_closed_form() {
        // with h = (−z)^p the primitive is −(−z)^{p+1}/(p+1)
        let nd = NonexistenceDensity::from_closure(5, 2, true, |_, z| Ok((-z).powi(3))).unwrap();
        for &z in &[-0.5f64, -2.0, -7.0] {
            let psi = nd.primitive(0.3, z).unwrap();
            let exact = -(-z).powi(4) / 4.0;
            assert!(
                (psi - exact).abs() <= 1e-10 * (1.0 + exact.abs()),
                "z={z}: {psi} vs {exact}"
            );
        }
    }

    #[test]
    fn density_critical_power_vanishes() {
        // p = k* − 1 = 14: the closed-form coefficient −n/(p+1) + (n−2k)/(k+1)
        // cancels exactly
        let nd = power_density(14.0);
        for &z in &[-0.01f64, -1.0, -100.0] {
            let (d, scale) = nd.density_terms(0.4, z).unwrap();
            assert!(
                d.abs() <= 1e-10 * scale.max(1e-300),
                "z={z}: d={d}, scale={scale}"
            );
        }
    }

    #[test]
    fn density_above_critical_is_positive() {
        let nd = power_density(15.0);
        for &z in &[-0.01f64, -1.0, -100.0] {
            let (d, scale) = nd.density_terms(0.4, z).unwrap();
            assert!(d > 1e-3 * scale, "z={z}: d={d}");
        }
    }

    #[test]
    fn density_of_zero_h_is_zero() {
        let nd = NonexistenceDensity::from_closure(5, 2, true, |_, _| Ok(0.0)).unwrap();
        assert_eq!(nd.density(&[0.1, 0.0, 0.0, 0.0, 0.0], -3.0).unwrap(), 0.0);
    }

    #[test]
    fn scan_verdicts_across_the_threshold() {
        let grid = ScanGrid::default();
        let sub = nonexistence_scan(&power_density(5.0), &grid).unwrap();
        assert_eq!(sub.label, ScanLabel::Mixed, "min {}", sub.min_normalized);

        let critical = nonexistence_scan(&power_density(14.0), &grid).unwrap();
        assert_eq!(
            critical.label,
            ScanLabel::NonnegativeWithZeros,
            "min {}",
            critical.min_normalized
        );

        let above = nonexistence_scan(&power_density(15.0), &grid).unwrap();
        assert_eq!(
            above.label,
            ScanLabel::StrictlyPositive,
            "min {}",
            above.min_normalized
        );
    }

    #[test]
    fn scan_flips_within_one_p_step() {
        // the verdict leaves Mixed exactly at the critical power
        let grid = ScanGrid {
            z_points: 24,
            shells: 4,
            ..Default::default()
        };
        let mut labels = Vec::new();
        for ip in 0..9 {
            let p = 12.0 + 0.5 * ip as f64;
            labels.push((
                p,
                nonexistence_scan(&power_density(p), &grid).unwrap().label,
            ));
        }
        for (p, label) in &labels {
            let expect = if *p < 14.0 {
                ScanLabel::Mixed
            } else if *p == 14.0 {
                ScanLabel::NonnegativeWithZeros
            } else {
                ScanLabel::StrictlyPositive
            };
            assert_eq!(label, &expect, "p = {p}");
        }
    }

    #[test]
    fn zero_forcing_scan_is_degenerate() {
        let pair = GrowthPair::new(5, 2, FFamily::Zero, GFamily::Const(1.0)).unwrap();
        let t = Transform::with_defaults(pair).unwrap();
        let nd = NonexistenceDensity::from_transform(&t).unwrap();
        let report = nonexistence_scan(&nd, &ScanGrid::default()).unwrap();
        assert_eq!(report.label, ScanLabel::NonnegativeWithZeros);
        assert!(report.degenerate);
    }

    #[test]
    fn density_is_continuous_in_z() {
        let nd = power_density(10.0);
        let mut prev: Option<(f64, f64)> = None;
        for j in 0..50 {
            let z = -0.5 - 0.05 * j as f64;
            let (d, scale) = nd.density_terms(0.3, z).unwrap();
            if let Some((pz, pd)) = prev {
                let slope = (d - pd).abs() / (z - pz).abs();
                // crude Lipschitz-style bound on the sampled step
                assert!(slope.is_finite() && slope < 1e3 * (1.0 + scale));
            }
            prev = Some((z, d));
        }
    }

    #[test]
    fn sobolev_regime_required() {
        let pair =
            GrowthPair::new(4, 2, FFamily::PowerExp { p: 3.0, k: 2 }, GFamily::Zero).unwrap();
        let t = Transform::with_defaults(pair).unwrap();
        assert!(NonexistenceDensity::from_transform(&t).is_err());
    }
}
