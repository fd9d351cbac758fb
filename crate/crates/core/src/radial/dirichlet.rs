//! The radial Dirichlet solver.

use crate::error::{Error, Result};
use crate::minors::binomial;

use super::{cumulative, radial_sk, RadialProblem, RadialProfile, SolveBranch};

/// Shared per-sweep state on the uniform grid.
struct Sweep {
    n: usize,
    k: usize,
    grid: Vec<f64>,
    h: f64,
    /// k / C(n−1, k−1)
    factor: f64,
}

impl Sweep {
    fn new(problem: &RadialProblem) -> Self {
        let cells = problem.grid_n;
        let h = 1.0 / cells as f64;
        Sweep {
            n: problem.n,
            k: problem.k,
            grid: (0..=cells).map(|i| i as f64 * h).collect(),
            h,
            factor: problem.k as f64 / binomial(problem.n - 1, problem.k - 1),
        }
    }

    fn psi_values(&self, problem: &RadialProblem, u: &[f64]) -> Result<Vec<f64>> {
        self.grid
            .iter()
            .zip(u)
            .map(|(&r, &ui)| {
                let v = (problem.psi)(r, ui)?;
                if v < -1e-12 * (1.0 + v.abs()) {
                    return Err(Error::numeric(format!(
                        "admissibility: right-hand side negative at r = {r}: {v}"
                    )));
                }
                Ok(v.max(0.0))
            })
            .collect()
    }

    /// u'(r) from the integrated divergence form for fixed ψ samples.
    fn slope_from_psi(&self, psi: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let m = self.grid.len();
        let prefix = super::weighted_cumulative(psi, self.h, self.n);
        let mut slope = vec![0.0; m];
        for i in 1..m {
            let r = self.grid[i];
            // ψ ≥ 0 was enforced upstream; a negative prefix can only be an
            // interpolation undershoot of size O(h⁴), clamp it
            let b = self.factor * r.powi(self.k as i32 - self.n as i32) * prefix[i];
            slope[i] = b.max(0.0).powf(1.0 / self.k as f64);
        }
        Ok((slope, prefix))
    }

    /// Curvature along the profile, differentiating the integral form:
    /// u'' = (1/k) B^{1/k − 1} B' with B = factor·r^{k−n}·P.
    fn curvature(&self, psi: &[f64], prefix: &[f64], slope: &[f64]) -> Vec<f64> {
        let m = self.grid.len();
        let (n, k) = (self.n as i32, self.k as i32);
        let kf = self.k as f64;
        let mut d2u = vec![0.0; m];
        // center limit: S_k(0) = C(n,k) u''(0)^k
        d2u[0] = (psi[0] / binomial(self.n, self.k)).powf(1.0 / kf);
        for i in 1..m {
            let r = self.grid[i];
            if slope[i] > 1e-150 {
                let bp = self.factor
                    * ((k - n) as f64 * r.powi(k - n - 1) * prefix[i]
                        + r.powi(k - 1) * psi[i]);
                d2u[i] = slope[i].powi(1 - k) * bp / kf;
            } else {
                // degenerate slope: fall back to the center-limit form
                d2u[i] = (psi[i] / binomial(self.n, self.k)).powf(1.0 / kf);
            }
        }
        d2u
    }

    /// Max relative defect of S_k[u] = ψ over the grid.
    fn residual(&self, psi: &[f64], slope: &[f64], d2u: &[f64]) -> Result<f64> {
        let mut worst = 0.0f64;
        for i in 0..self.grid.len() {
            let s = radial_sk(slope[i], d2u[i], self.grid[i], self.n, self.k)?;
            let rel = (s - psi[i]).abs() / (1.0 + psi[i].abs());
            worst = worst.max(rel);
        }
        Ok(worst)
    }

    fn finish(
        &self,
        problem: &RadialProblem,
        u: Vec<f64>,
    ) -> Result<RadialProfile> {
        let psi = self.psi_values(problem, &u)?;
        let (slope, prefix) = self.slope_from_psi(&psi)?;
        let d2u = self.curvature(&psi, &prefix, &slope);
        let residual = self.residual(&psi, &slope, &d2u)?;
        let profile = RadialProfile {
            r: self.grid.clone(),
            u: u.clone(),
            du: slope,
            d2u,
            center: u[0],
            residual,
        };
        profile.assert_invariants()?;
        Ok(profile)
    }
}

/// Solve S_k[u] = ψ(r, u) on the unit ball with u(1) = 0, u ≤ 0.
///
/// The `FixedPoint` branch damps the boundary-anchored integral map starting
/// from u ≡ 0. The `Shooting` branch fixes a center depth, marches the
/// Volterra form outward and bisects the depth until the boundary condition
/// holds; it reaches the nontrivial solution when u ≡ 0 is a trap.
pub fn solve_dirichlet(problem: &RadialProblem) -> Result<RadialProfile> {
    if problem.grid_n < 64 {
        return Err(Error::domain("grid must have at least 64 cells"));
    }
    let branch = match problem.branch {
        SolveBranch::Auto => {
            let zero_forcing = (0..=16).try_fold(true, |acc, i| {
                let r = i as f64 / 16.0;
                Ok::<bool, Error>(acc && (problem.psi)(r, 0.0)?.abs() <= 1e-14)
            })?;
            let active = (0..=16).try_fold(false, |acc, i| {
                let r = i as f64 / 16.0;
                Ok::<bool, Error>(acc || (problem.psi)(r, -1.0)? > 1e-14)
            })?;
            if zero_forcing && active {
                SolveBranch::Shooting
            } else {
                SolveBranch::FixedPoint
            }
        }
        other => other,
    };
    match branch {
        SolveBranch::FixedPoint | SolveBranch::Auto => fixed_point(problem),
        SolveBranch::Shooting => shooting(problem),
    }
}

fn fixed_point(problem: &RadialProblem) -> Result<RadialProfile> {
    let sweep = Sweep::new(problem);
    let m = sweep.grid.len();
    let mut u = vec![0.0; m];
    let mut trace = Vec::new();
    for _ in 0..problem.max_picard {
        let psi = sweep.psi_values(problem, &u)?;
        let (slope, _) = sweep.slope_from_psi(&psi)?;
        let islope = cumulative(&slope, sweep.h);
        let total = islope[m - 1];
        let mut delta = 0.0f64;
        for i in 0..m {
            let target = -(total - islope[i]);
            let next = (1.0 - problem.damping) * u[i] + problem.damping * target;
            delta = delta.max((next - u[i]).abs());
            u[i] = next;
        }
        trace.push(delta);
        let depth = 1.0 + u[0].abs();
        if delta <= problem.tol * depth {
            return sweep.finish(problem, u);
        }
    }
    Err(Error::convergence(
        format!(
            "Picard iteration did not converge in {} sweeps",
            problem.max_picard
        ),
        &trace,
    ))
}

/// March the Volterra form outward from u(0) = −depth; the returned boundary
/// value is the shooting objective.
fn march(sweep: &Sweep, problem: &RadialProblem, depth: f64) -> Result<Vec<f64>> {
    let m = sweep.grid.len();
    let (n, k) = (sweep.n as i32, sweep.k as i32);
    let kf = sweep.k as f64;
    let mut u = vec![0.0; m];
    let mut slope = vec![0.0; m];
    let mut weighted = vec![0.0; m];
    let mut prefix = 0.0f64;
    u[0] = -depth;
    weighted[0] = 0.0;
    for i in 0..m - 1 {
        let r_next = sweep.grid[i + 1];
        // predictor
        let u_pred = u[i] + sweep.h * slope[i];
        let psi_pred = (problem.psi)(r_next, u_pred)?.max(0.0);
        let w_pred = r_next.powi(n - 1) * psi_pred;
        let p_next = prefix + 0.5 * sweep.h * (weighted[i] + w_pred);
        let b = sweep.factor * r_next.powi(k - n) * p_next;
        let s_next = b.max(0.0).powf(1.0 / kf);
        // corrector
        let u_corr = u[i] + 0.5 * sweep.h * (slope[i] + s_next);
        let psi_corr = (problem.psi)(r_next, u_corr)?.max(0.0);
        let w_corr = r_next.powi(n - 1) * psi_corr;
        prefix += 0.5 * sweep.h * (weighted[i] + w_corr);
        let b = sweep.factor * r_next.powi(k - n) * prefix;
        slope[i + 1] = b.max(0.0).powf(1.0 / kf);
        u[i + 1] = u[i] + 0.5 * sweep.h * (slope[i] + slope[i + 1]);
        weighted[i + 1] = w_corr;
    }
    Ok(u)
}

/// Refine a marched profile at fixed center depth with full-grid sweeps of
/// the Volterra map (quadratic-panel quadrature); contraction is factorial in
/// the sweep count.
fn volterra_polish(
    sweep: &Sweep,
    problem: &RadialProblem,
    depth: f64,
    u: &mut [f64],
) -> Result<()> {
    let m = sweep.grid.len();
    for _ in 0..40 {
        let psi = sweep.psi_values(problem, u)?;
        let (slope, _) = sweep.slope_from_psi(&psi)?;
        let islope = cumulative(&slope, sweep.h);
        let mut delta = 0.0f64;
        for i in 0..m {
            let next = -depth + islope[i];
            delta = delta.max((next - u[i]).abs());
            u[i] = next;
        }
        if delta <= 1e-15 * (1.0 + depth) {
            break;
        }
    }
    Ok(())
}

fn shooting(problem: &RadialProblem) -> Result<RadialProfile> {
    let sweep = Sweep::new(problem);
    let m = sweep.grid.len();
    let boundary = |depth: f64| -> Result<f64> {
        Ok(march(&sweep, problem, depth)?[m - 1])
    };

    // bracket a sign change of u(1; depth) over decades
    let mut lo = 1e-6f64;
    let mut g_lo = boundary(lo)?;
    while g_lo > 0.0 && lo > 1e-12 {
        lo *= 0.25;
        g_lo = boundary(lo)?;
    }
    if g_lo > 0.0 {
        return Err(Error::convergence(
            "shooting: no depth with negative boundary value found",
            &[g_lo],
        ));
    }
    let mut hi = lo.max(1e-3);
    let mut g_hi = boundary(hi)?;
    let mut expansions = 0;
    while g_hi < 0.0 {
        hi *= 2.0;
        g_hi = boundary(hi)?;
        expansions += 1;
        if expansions > 60 {
            return Err(Error::convergence(
                "shooting: boundary value stays negative up to the depth cap",
                &[g_hi],
            ));
        }
    }
    let mut trace = Vec::new();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g_mid = boundary(mid)?;
        trace.push(g_mid);
        if g_mid < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-13 * (1.0 + hi) {
            break;
        }
    }
    let mut depth = 0.5 * (lo + hi);

    // polish with the higher-order sweeps and a secant on the depth
    let polished_boundary = |d: f64| -> Result<f64> {
        let mut u = march(&sweep, problem, d)?;
        volterra_polish(&sweep, problem, d, &mut u)?;
        Ok(u[m - 1])
    };
    let mut d0 = depth * (1.0 - 1e-6);
    let mut d1 = depth;
    let mut g0 = polished_boundary(d0)?;
    let mut g1 = polished_boundary(d1)?;
    for _ in 0..12 {
        if (g1 - g0).abs() < 1e-300 {
            break;
        }
        let d2 = d1 - g1 * (d1 - d0) / (g1 - g0);
        if !d2.is_finite() || d2 <= 0.0 {
            break;
        }
        d0 = d1;
        g0 = g1;
        d1 = d2;
        g1 = polished_boundary(d1)?;
        if g1.abs() <= 1e-14 * (1.0 + d1) {
            break;
        }
    }
    depth = d1;

    let mut u = march(&sweep, problem, depth)?;
    volterra_polish(&sweep, problem, depth, &mut u)?;
    // the residual boundary offset is within the depth tolerance; pin it
    let offset = u[m - 1];
    for v in u.iter_mut() {
        *v -= offset;
    }
    sweep.finish(problem, u)
}
