//! Scalar fields with derivatives and the pointwise operator calculus on them.
//!
//! A [`ScalarField`] is an evaluable u: ℝⁿ → ℝ whose gradient and Hessian come
//! either from user-supplied analytic callbacks or from central finite
//! differences. On top of that sit the pointwise minor-sum operator, its
//! gradient-type companion, composition with a C² map of the real line, and
//! the residual of the composition rule
//!
//! ```text
//!   S_k[A(u)] = (A'(u))^k S_k[u] + (A'(u))^{k-1} A''(u) H_k(∇u, D²u)
//! ```
//!
//! whose left side is always computed by differentiating the composite field
//! and never by reusing the right side, so the two routes stay independent.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::minors::{self, SymmetricMatrix};

type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type HessFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>; // row-major n×n

/// How a field's derivatives are obtained.
#[derive(Clone)]
enum DerivativeMode {
    Analytic { grad: GradFn, hess: HessFn },
    FiniteDifference,
}

/// An evaluable scalar field with first and second derivatives.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    eval: EvalFn,
    mode: DerivativeMode,
}

fn fd_gradient_step(x: f64) -> f64 {
    // cube-root-of-epsilon balancing of truncation vs roundoff
    f64::EPSILON.powf(1.0 / 3.0) * x.abs().max(1.0)
}

fn fd_hessian_step(x: f64) -> f64 {
    f64::EPSILON.powf(0.25) * x.abs().max(1.0)
}

impl ScalarField {
    pub fn new_analytic(
        dim: usize,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        hess: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        ScalarField {
            dim,
            eval: Arc::new(eval),
            mode: DerivativeMode::Analytic {
                grad: Arc::new(grad),
                hess: Arc::new(hess),
            },
        }
    }

    pub fn new_fd(dim: usize, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField {
            dim,
            eval: Arc::new(eval),
            mode: DerivativeMode::FiniteDifference,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let v = (self.eval)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::numeric(format!("field evaluated non-finite at {x:?}")))
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::domain(format!(
                "point has dimension {}, field has {}",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let g = match &self.mode {
            DerivativeMode::Analytic { grad, .. } => grad(x),
            DerivativeMode::FiniteDifference => self.fd_gradient(x),
        };
        if g.len() != self.dim {
            return Err(Error::domain("gradient callback returned wrong length"));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric(format!("gradient non-finite at {x:?}")));
        }
        Ok(g)
    }

    pub fn hessian(&self, x: &[f64]) -> Result<SymmetricMatrix> {
        self.check_point(x)?;
        let entries = match &self.mode {
            DerivativeMode::Analytic { hess, .. } => hess(x),
            DerivativeMode::FiniteDifference => self.fd_hessian(x),
        };
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric(format!("hessian non-finite at {x:?}")));
        }
        SymmetricMatrix::symmetrized(self.dim, &entries)
    }

    fn fd_gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut p = x.to_vec();
        let mut g = vec![0.0; self.dim];
        for i in 0..self.dim {
            let h = fd_gradient_step(x[i]);
            p[i] = x[i] + h;
            let fp = (self.eval)(&p);
            p[i] = x[i] - h;
            let fm = (self.eval)(&p);
            p[i] = x[i];
            g[i] = (fp - fm) / (2.0 * h);
        }
        g
    }

    fn fd_hessian(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut p = x.to_vec();
        let mut out = vec![0.0; n * n];
        let f0 = (self.eval)(x);
        for i in 0..n {
            let hi = fd_hessian_step(x[i]);
            // diagonal: (f(x+h) - 2 f(x) + f(x-h)) / h²
            p[i] = x[i] + hi;
            let fp = (self.eval)(&p);
            p[i] = x[i] - hi;
            let fm = (self.eval)(&p);
            p[i] = x[i];
            out[i * n + i] = (fp - 2.0 * f0 + fm) / (hi * hi);
            for j in (i + 1)..n {
                let hj = fd_hessian_step(x[j]);
                p[i] = x[i] + hi;
                p[j] = x[j] + hj;
                let fpp = (self.eval)(&p);
                p[j] = x[j] - hj;
                let fpm = (self.eval)(&p);
                p[i] = x[i] - hi;
                let fmm = (self.eval)(&p);
                p[j] = x[j] + hj;
                let fmp = (self.eval)(&p);
                p[i] = x[i];
                p[j] = x[j];
                let v = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        out
    }

    /// S_k of the Hessian at x.
    pub fn sk(&self, x: &[f64], k: usize) -> Result<f64> {
        minors::s_k(&self.hessian(x)?, k)
    }

    /// Gradient-type term at x.
    pub fn hk(&self, x: &[f64], k: usize) -> Result<f64> {
        minors::h_k(&self.gradient(x)?, &self.hessian(x)?, k)
    }

    /// The composite field A ∘ u. Analytic fields get chain-rule derivatives
    /// assembled at the callback level; finite-difference fields differentiate
    /// the composed evaluation directly.
    pub fn compose(&self, map: &ScalarMap1D) -> ScalarField {
        let eval = self.eval.clone();
        let m = map.clone();
        let composed_eval = move |x: &[f64]| m.value(eval(x));
        match &self.mode {
            DerivativeMode::FiniteDifference => ScalarField::new_fd(self.dim, composed_eval),
            DerivativeMode::Analytic { grad, hess } => {
                let n = self.dim;
                let (ev_g, gr_g, m_g) = (self.eval.clone(), grad.clone(), map.clone());
                let composed_grad = move |x: &[f64]| {
                    let a1 = m_g.d1(ev_g(x));
                    gr_g(x).into_iter().map(|gi| a1 * gi).collect()
                };
                let (ev_h, gr_h, he_h, m_h) =
                    (self.eval.clone(), grad.clone(), hess.clone(), map.clone());
                let composed_hess = move |x: &[f64]| {
                    let u = ev_h(x);
                    let a1 = m_h.d1(u);
                    let a2 = m_h.d2(u);
                    let g = gr_h(x);
                    let h = he_h(x);
                    let mut out = vec![0.0; n * n];
                    for i in 0..n {
                        for j in 0..n {
                            out[i * n + j] = a2 * g[i] * g[j] + a1 * h[i * n + j];
                        }
                    }
                    out
                };
                ScalarField::new_analytic(self.dim, composed_eval, composed_grad, composed_hess)
            }
        }
    }

    /// Compare analytic derivatives against central finite differences of the
    /// evaluation at the given probe points (1e-4 relative). A no-op for
    /// finite-difference fields.
    pub fn validate_derivatives(&self, probes: &[Vec<f64>]) -> Result<()> {
        if matches!(self.mode, DerivativeMode::FiniteDifference) {
            return Ok(());
        }
        for x in probes {
            let g = self.gradient(x)?;
            let g_fd = self.fd_gradient(x);
            for i in 0..self.dim {
                let scale = 1.0 + g[i].abs().max(g_fd[i].abs());
                if (g[i] - g_fd[i]).abs() > 1e-4 * scale {
                    return Err(Error::domain(format!(
                        "analytic gradient component {i} disagrees with finite differences at {x:?}: {} vs {}",
                        g[i], g_fd[i]
                    )));
                }
            }
            let h = self.hessian(x)?;
            let h_fd = self.fd_hessian(x);
            for i in 0..self.dim {
                for j in 0..self.dim {
                    let a = h.get(i, j);
                    let b = 0.5 * (h_fd[i * self.dim + j] + h_fd[j * self.dim + i]);
                    let scale = 1.0 + a.abs().max(b.abs());
                    if (a - b).abs() > 1e-4 * scale {
                        return Err(Error::domain(format!(
                            "analytic hessian entry ({i},{j}) disagrees with finite differences at {x:?}: {a} vs {b}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

type Fn1D = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A C² map of the real line with derivative callbacks, e.g. the outer map of
/// a composition or a radial profile u(r).
#[derive(Clone)]
pub struct ScalarMap1D {
    f: Fn1D,
    d1: Fn1D,
    d2: Fn1D,
}

impl ScalarMap1D {
    pub fn new(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ScalarMap1D {
            f: Arc::new(f),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
        }
    }

    pub fn identity() -> Self {
        ScalarMap1D::new(|t| t, |_| 1.0, |_| 0.0)
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn d1(&self, t: f64) -> f64 {
        (self.d1)(t)
    }

    pub fn d2(&self, t: f64) -> f64 {
        (self.d2)(t)
    }

    /// Check the derivative callbacks against central differences at probes.
    pub fn validate(&self, probes: &[f64]) -> Result<()> {
        for &t in probes {
            let h = fd_gradient_step(t);
            let d1_fd = (self.value(t + h) - self.value(t - h)) / (2.0 * h);
            let d1 = self.d1(t);
            if (d1 - d1_fd).abs() > 1e-4 * (1.0 + d1.abs().max(d1_fd.abs())) {
                return Err(Error::domain(format!(
                    "first derivative disagrees with finite differences at t={t}: {d1} vs {d1_fd}"
                )));
            }
            let h2 = fd_hessian_step(t);
            let d2_fd = (self.value(t + h2) - 2.0 * self.value(t) + self.value(t - h2)) / (h2 * h2);
            let d2 = self.d2(t);
            if (d2 - d2_fd).abs() > 1e-4 * (1.0 + d2.abs().max(d2_fd.abs())) {
                return Err(Error::domain(format!(
                    "second derivative disagrees with finite differences at t={t}: {d2} vs {d2_fd}"
                )));
            }
        }
        Ok(())
    }
}

/// Relative residual of the composition rule at x:
///
/// |S_k[A(u)] − ((A'(u))^k S_k[u] + (A'(u))^{k−1} A''(u) H_k)| / (|S_k[A(u)]| + 1)
///
/// The left side goes through the composed field's own Hessian and the generic
/// minor sum; the right side goes through `s_k`/`h_k` of the base field.
pub fn composition_residual(
    map: &ScalarMap1D,
    field: &ScalarField,
    x: &[f64],
    k: usize,
) -> Result<f64> {
    let composed = field.compose(map);
    let lhs = composed.sk(x, k)?;

    let u = field.value(x)?;
    let a1 = map.d1(u);
    let a2 = map.d2(u);
    let sk_u = field.sk(x, k)?;
    let hk_u = field.hk(x, k)?;
    let rhs = a1.powi(k as i32) * sk_u + a1.powi(k as i32 - 1) * a2 * hk_u;
    if !rhs.is_finite() {
        return Err(Error::numeric("composition residual: non-finite right side"));
    }
    Ok((lhs - rhs).abs() / (lhs.abs() + 1.0))
}

/// Radius below which a radial field switches to its even-extension Taylor
/// form; u'(r)/r is 0/0 at the center for admissible profiles.
pub const RADIAL_CENTER_CUTOFF: f64 = 1e-6;

/// The field x ↦ u(|x|) with analytic derivatives
/// D²u = (u'' − u'/r)·x̂x̂ᵀ + (u'/r)·I away from the center, and the quadratic
/// Taylor fallback u'(0) = 0, D²u = u''(0)·I inside the cutoff.
pub fn radial_field(profile: &ScalarMap1D, n: usize) -> ScalarField {
    let p_e = profile.clone();
    let eval = move |x: &[f64]| {
        let r = norm(x);
        if r < RADIAL_CENTER_CUTOFF {
            p_e.value(0.0) + 0.5 * p_e.d2(0.0) * r * r
        } else {
            p_e.value(r)
        }
    };
    let p_g = profile.clone();
    let grad = move |x: &[f64]| {
        let r = norm(x);
        if r < RADIAL_CENTER_CUTOFF {
            let d2 = p_g.d2(0.0);
            x.iter().map(|xi| d2 * xi).collect()
        } else {
            let du = p_g.d1(r);
            x.iter().map(|xi| du * xi / r).collect()
        }
    };
    let p_h = profile.clone();
    let hess = move |x: &[f64]| {
        let r = norm(x);
        let mut out = vec![0.0; n * n];
        if r < RADIAL_CENTER_CUTOFF {
            let d2 = p_h.d2(0.0);
            for i in 0..n {
                out[i * n + i] = d2;
            }
        } else {
            let du = p_h.d1(r);
            let d2u = p_h.d2(r);
            let radialpart = d2u - du / r;
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] = radialpart * x[i] * x[j] / (r * r);
                }
                out[i * n + i] += du / r;
            }
        }
        out
    };
    ScalarField::new_analytic(n, eval, grad, hess)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Multivariate polynomial with analytic derivatives; the workhorse of the
/// randomized identity suites.
#[derive(Debug, Clone)]
pub struct PolynomialField {
    dim: usize,
    /// (coefficient, exponents per variable)
    monomials: Vec<(f64, Vec<u32>)>,
}

impl PolynomialField {
    pub fn new(dim: usize, monomials: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        for (_, exps) in &monomials {
            if exps.len() != dim {
                return Err(Error::domain("monomial exponent list has wrong length"));
            }
        }
        Ok(PolynomialField { dim, monomials })
    }

    /// Random dense polynomial of total degree ≤ `max_degree` with
    /// coefficients in [−1, 1].
    pub fn random(rng: &mut impl Rng, dim: usize, max_degree: u32) -> Self {
        let mut monomials = Vec::new();
        let mut exps = vec![0u32; dim];
        collect_monomials(rng, dim, max_degree, 0, &mut exps, &mut monomials);
        PolynomialField { dim, monomials }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.monomials
            .iter()
            .map(|(c, exps)| {
                c * exps
                    .iter()
                    .zip(x)
                    .map(|(&e, &xi)| xi.powi(e as i32))
                    .product::<f64>()
            })
            .sum()
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                self.monomials
                    .iter()
                    .map(|(c, exps)| {
                        if exps[i] == 0 {
                            return 0.0;
                        }
                        let mut term = c * exps[i] as f64;
                        for (j, (&e, &xj)) in exps.iter().zip(x).enumerate() {
                            let p = if j == i { e - 1 } else { e };
                            term *= xj.powi(p as i32);
                        }
                        term
                    })
                    .sum()
            })
            .collect()
    }

    pub fn hess(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let mut sum = 0.0;
                for (c, exps) in &self.monomials {
                    let (ei, ej) = (exps[i], exps[j]);
                    let factor = if i == j {
                        if ei < 2 {
                            continue;
                        }
                        (ei * (ei - 1)) as f64
                    } else {
                        if ei == 0 || ej == 0 {
                            continue;
                        }
                        (ei * ej) as f64
                    };
                    let mut term = c * factor;
                    for (m, (&e, &xm)) in exps.iter().zip(x).enumerate() {
                        let mut p = e;
                        if m == i {
                            p -= 1;
                        }
                        if m == j {
                            p -= 1;
                        }
                        term *= xm.powi(p as i32);
                    }
                    sum += term;
                }
                out[i * n + j] = sum;
                out[j * n + i] = sum;
            }
        }
        out
    }

    pub fn to_field(&self) -> ScalarField {
        let a = self.clone();
        let b = self.clone();
        let c = self.clone();
        ScalarField::new_analytic(
            self.dim,
            move |x| a.eval(x),
            move |x| b.grad(x),
            move |x| c.hess(x),
        )
    }
}

fn collect_monomials(
    rng: &mut impl Rng,
    dim: usize,
    budget: u32,
    var: usize,
    exps: &mut Vec<u32>,
    out: &mut Vec<(f64, Vec<u32>)>,
) {
    if var == dim {
        out.push((rng.gen_range(-1.0..1.0), exps.clone()));
        return;
    }
    for e in 0..=budget {
        exps[var] = e;
        collect_monomials(rng, dim, budget - e, var + 1, exps, out);
    }
    exps[var] = 0;
}

/// Outcome of the randomized composition-identity suite.
#[derive(Debug, Clone, Serialize)]
pub struct IdentitySuiteReport {
    pub cases: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub failures: Vec<IdentityCase>,
    pub all_passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCase {
    pub dim: usize,
    pub k: usize,
    pub map: String,
    pub residual: f64,
}

/// Run `cases` random composition-identity checks: a random polynomial field
/// of degree ≤ 4 in n ∈ {2,…,5} variables, an outer map drawn from
/// {t + t³, 1 − e^t}, every admissible k, at a random probe point in [−1,1]ⁿ.
pub fn identity_suite(seed: u64, cases: usize, tolerance: f64) -> Result<IdentitySuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let maps: Vec<(&str, ScalarMap1D)> = vec![
        (
            "t + t^3",
            ScalarMap1D::new(|t| t + t * t * t, |t| 1.0 + 3.0 * t * t, |t| 6.0 * t),
        ),
        (
            "1 - exp(t)",
            ScalarMap1D::new(|t| 1.0 - t.exp(), |t| -t.exp(), |t| -t.exp()),
        ),
    ];
    let mut max_residual = 0.0f64;
    let mut failures = Vec::new();
    let mut done = 0;
    while done < cases {
        let dim = rng.gen_range(2..=5usize);
        let poly = PolynomialField::random(&mut rng, dim, 4);
        let field = poly.to_field();
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (name, map) = &maps[rng.gen_range(0..maps.len())];
        let k = rng.gen_range(1..=dim);
        let residual = composition_residual(map, &field, &x, k)?;
        max_residual = max_residual.max(residual);
        if residual >= tolerance {
            failures.push(IdentityCase {
                dim,
                k,
                map: name.to_string(),
                residual,
            });
        }
        done += 1;
    }
    Ok(IdentitySuiteReport {
        cases,
        max_residual,
        tolerance,
        all_passed: failures.is_empty(),
        failures,
    })
}
