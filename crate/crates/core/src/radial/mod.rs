//! Radial Dirichlet solver, eigenvalue machinery and the end-to-end pipeline
//! on the unit ball.
//!
//! For radial u the minor-sum operator collapses to
//!
//! ```text
//!   S_k[u](r) = C(n−1,k) (u'/r)^k + C(n−1,k−1) (u'/r)^{k−1} u''      (r > 0)
//!   S_k[u](0) = C(n,k) (u''(0))^k
//! ```
//!
//! which has the divergence form (C(n−1,k−1)/k) (r^{n−k} (u')^k)' = r^{n−1} S_k[u].
//! Integrating once turns the Dirichlet problem S_k[u] = ψ(r, u), u(1) = 0
//! into a monotone integral fixed point for u':
//!
//! ```text
//!   (u'(r))^k = (k / C(n−1,k−1)) r^{k−n} ∫_0^r s^{n−1} ψ(s, u(s)) ds
//! ```
//!
//! The constant is forced by the u = (r²−1)/2, ψ = C(n,k) case and the whole
//! reduction is unit-tested against the full-matrix minor-sum definition.

mod dirichlet;
mod eigen;
mod io;
mod pipeline;

pub use dirichlet::solve_dirichlet;
pub use io::{profile_from_csv, profile_to_csv};
pub use eigen::{
    big_lambda1, big_lambda1_shooting, lambda1_ball, lambda1_shooting, rayleigh_quotient,
    EigenGrid, EigenResult,
};
pub use pipeline::{
    equation_residual, map_back, profile_to_map, solve_transformed_and_map, verify_equivalence,
    CollocationSample, CollocationSettings, EquationResidualReport, PipelineResult,
};

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::minors::binomial;

/// Pointwise radial form of the minor-sum operator.
pub fn radial_sk(du: f64, d2u: f64, r: f64, n: usize, k: usize) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::domain(format!("order k={k} out of range 1..={n}")));
    }
    if r < 0.0 {
        return Err(Error::domain("radius must be nonnegative"));
    }
    if r == 0.0 {
        return Ok(binomial(n, k) * d2u.powi(k as i32));
    }
    let slope = du / r;
    Ok(binomial(n - 1, k) * slope.powi(k as i32)
        + binomial(n - 1, k - 1) * slope.powi(k as i32 - 1) * d2u)
}

/// Cumulative integral of uniformly sampled values: out[i] = ∫_{x_0}^{x_i} f,
/// one quadratic panel per step (O(h³) global error).
pub(crate) fn cumulative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * h * (values[0] + values[1]);
        return out;
    }
    out[1] = h * (5.0 * values[0] + 8.0 * values[1] - values[2]) / 12.0;
    for i in 1..n - 1 {
        out[i + 1] = out[i] + h * (-values[i - 1] + 8.0 * values[i] + 5.0 * values[i + 1]) / 12.0;
    }
    out
}

/// Cumulative weighted integral out[i] = ∫_0^{r_i} s^{n−1} ψ(s) ds on the
/// uniform grid r_i = i·h. ψ is interpolated by local quadratics and the
/// s^{n−1} weight is integrated exactly through its moments, so steep weights
/// near the origin cost no accuracy and constant ψ integrates exactly.
pub(crate) fn weighted_cumulative(psi: &[f64], h: f64, n: usize) -> Vec<f64> {
    let m = psi.len();
    let mut out = vec![0.0; m];
    if m < 3 {
        if m == 2 {
            // linear ψ fallback on a single interval
            let a = psi[0];
            let b = (psi[1] - psi[0]) / h;
            let np = n as i32;
            out[1] = a * h.powi(np) / n as f64 + b * h.powi(np + 1) / (n as f64 + 1.0);
        }
        return out;
    }
    let nf = n as f64;
    // ∫_a^b s^{n-1+j} ds for j = 0, 1, 2
    let moment = |a: f64, b: f64, j: i32| -> f64 {
        let p = n as i32 + j;
        (b.powi(p) - a.powi(p)) / (nf + j as f64)
    };
    for i in 0..m - 1 {
        // quadratic through the three nodes nearest the interval
        let base = if i == 0 { 0 } else { i - 1 };
        let (x0, x1) = (base as f64 * h, (base + 1) as f64 * h);
        let (y0, y1, y2) = (psi[base], psi[base + 1], psi[base + 2]);
        let d1 = (y1 - y0) / h;
        let d2 = ((y2 - y1) / h - d1) / (2.0 * h);
        let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
        let m0 = moment(a, b, 0);
        let m1 = moment(a, b, 1);
        let m2 = moment(a, b, 2);
        // Newton form y0 + d1 (s − x0) + d2 (s − x0)(s − x1)
        let piece = y0 * m0
            + d1 * (m1 - x0 * m0)
            + d2 * (m2 - (x0 + x1) * m1 + x0 * x1 * m0);
        out[i + 1] = out[i] + piece;
    }
    out
}

/// ψ(r, u) with its problem sizes and solver budget.
pub struct RadialProblem {
    pub n: usize,
    pub k: usize,
    pub psi: Arc<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>,
    pub grid_n: usize,
    /// Picard stopping tolerance on the sup-norm update
    pub tol: f64,
    pub max_picard: usize,
    pub damping: f64,
    pub branch: SolveBranch,
}

/// Which route the Dirichlet solver takes to a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveBranch {
    /// damped Picard iteration from u ≡ 0; finds the solution of forced
    /// problems (ψ(·, 0) not identically zero)
    FixedPoint,
    /// center-depth shooting with bisection; finds nontrivial solutions when
    /// u ≡ 0 is itself a fixed point (ψ(·, 0) ≡ 0, superlinear forcing)
    Shooting,
    /// pick Shooting exactly when ψ(·, 0) ≡ 0 but ψ is not identically zero
    Auto,
}

impl RadialProblem {
    pub fn new(
        n: usize,
        k: usize,
        psi: impl Fn(f64, f64) -> Result<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::domain(format!("need 1 <= k <= n, got n={n} k={k}")));
        }
        Ok(RadialProblem {
            n,
            k,
            psi: Arc::new(psi),
            grid_n: 1024,
            tol: 1e-12,
            max_picard: 500,
            damping: 0.5,
            branch: SolveBranch::Auto,
        })
    }

    pub fn with_grid(mut self, grid_n: usize) -> Result<Self> {
        if grid_n < 64 {
            return Err(Error::domain("grid must have at least 64 cells"));
        }
        self.grid_n = grid_n;
        Ok(self)
    }

    pub fn with_branch(mut self, branch: SolveBranch) -> Self {
        self.branch = branch;
        self
    }
}

/// Sampled radial solution on [0, 1].
#[derive(Debug, Clone, Serialize)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub d2u: Vec<f64>,
    /// center value u(0)
    pub center: f64,
    /// max relative pointwise defect of the equation the profile was built for
    pub residual: f64,
}

impl RadialProfile {
    /// Boundary, sign and monotonicity checks; these are certified, not
    /// assumed.
    pub fn assert_invariants(&self) -> Result<()> {
        let m = self.r.len();
        if m < 2 || self.u.len() != m || self.du.len() != m || self.d2u.len() != m {
            return Err(Error::domain("profile arrays must share a length >= 2"));
        }
        let depth = 1.0 + self.center.abs();
        if self.u[m - 1].abs() > 1e-9 * depth {
            return Err(Error::numeric(format!(
                "profile boundary value u(1) = {} is not zero",
                self.u[m - 1]
            )));
        }
        if self.du[0].abs() > 1e-9 * depth {
            return Err(Error::numeric(format!(
                "profile center slope u'(0) = {} is not zero",
                self.du[0]
            )));
        }
        for (i, &ui) in self.u.iter().enumerate() {
            if ui > 1e-9 * depth {
                return Err(Error::numeric(format!(
                    "profile is positive at r = {}: u = {ui}",
                    self.r[i]
                )));
            }
        }
        for (i, &di) in self.du.iter().enumerate() {
            if di < -1e-8 * depth {
                return Err(Error::numeric(format!(
                    "profile slope is negative at r = {}: u' = {di}",
                    self.r[i]
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{radial_field, ScalarMap1D};

    #[test]
    fn radial_parabola_gives_binomial() {
        // u = (r²−1)/2: u' = r, u'' = 1
        for n in 2..=6 {
            for k in 1..=n {
                for &r in &[0.0f64, 0.3, 0.9] {
                    let v = radial_sk(r, 1.0, r, n, k).unwrap();
                    assert!(
                        (v - binomial(n, k)).abs() < 1e-12,
                        "n={n} k={k} r={r}: {v}"
                    );
                }
            }
        }
    }

    #[test]
    fn center_formula() {
        let a: f64 = 1.7;
        for n in 2..=5 {
            for k in 1..=n {
                let v = radial_sk(0.0, a, 0.0, n, k).unwrap();
                assert!((v - binomial(n, k) * a.powi(k as i32)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matches_minor_sum_on_random_profiles() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        for _ in 0..100 {
            // u(r) = a r² + b r⁴ + c r⁶, admissibly increasing not required here
            let (a, b, c) = (
                rng.gen_range(0.1..2.0),
                rng.gen_range(-0.3..0.5),
                rng.gen_range(-0.1..0.2),
            );
            let profile = ScalarMap1D::new(
                move |r: f64| a * r.powi(2) + b * r.powi(4) + c * r.powi(6),
                move |r: f64| 2.0 * a * r + 4.0 * b * r.powi(3) + 6.0 * c * r.powi(5),
                move |r: f64| 2.0 * a + 12.0 * b * r.powi(2) + 30.0 * c * r.powi(4),
            );
            let n = rng.gen_range(2..=5usize);
            let k = rng.gen_range(1..=n);
            let field = radial_field(&profile, n);
            let r = rng.gen_range(0.05..1.0f64);
            let mut x = vec![0.0; n];
            // off-axis direction
            let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
            let norm: f64 = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
            for i in 0..n {
                x[i] = r * dir[i] / norm;
            }
            let via_minors = field.sk(&x, k).unwrap();
            let via_radial = radial_sk(profile.d1(r), profile.d2(r), r, n, k).unwrap();
            assert!(
                (via_minors - via_radial).abs() <= 1e-8 * (1.0 + via_minors.abs()),
                "n={n} k={k} r={r}: {via_minors} vs {via_radial}"
            );
        }
    }

    #[test]
    fn cumulative_quadratic_is_exact_on_parabolas() {
        let n = 101;
        let h = 0.01;
        let values: Vec<f64> = (0..n).map(|i| {
            let x = i as f64 * h;
            3.0 * x * x - 2.0 * x + 1.0
        }).collect();
        let integral = cumulative(&values, h);
        for (i, &v) in integral.iter().enumerate() {
            let x = i as f64 * h;
            let exact = x.powi(3) - x * x + x;
            assert!((v - exact).abs() < 1e-13, "i={i}");
        }
    }

    #[test]
    fn cumulative_converges_at_cubic_order() {
        let test = |n: usize| {
            let h = 1.0 / n as f64;
            let values: Vec<f64> = (0..=n).map(|i| (i as f64 * h).exp()).collect();
            let integral = cumulative(&values, h);
            (integral[n] - (1f64.exp() - 1.0)).abs()
        };
        let coarse = test(128);
        let fine = test(256);
        assert!(coarse / fine > 6.0, "order too low: {coarse} vs {fine}");
    }

    #[test]
    fn invalid_orders_rejected() {
        assert!(radial_sk(1.0, 1.0, 0.5, 3, 0).is_err());
        assert!(radial_sk(1.0, 1.0, 0.5, 3, 4).is_err());
        assert!(radial_sk(1.0, 1.0, -0.5, 3, 1).is_err());
    }
}
