//! The Kazdan–Kramer change of variables and the transformed nonlinearity.
//!
//! For a continuous g: (−∞, 0] → [0, ∞) define
//!
//! ```text
//!   G(t)   = ∫_t^0 g(τ) dτ
//!   A_g(s) = −∫_s^0 e^{G(t)} dt
//! ```
//!
//! `A_g` is a strictly increasing bijection of (−∞, 0] with A_g' = e^G, and it
//! removes the gradient-type term from the equation: solving with right-hand
//! side g(u)·H_k + f(x,u) is equivalent to solving the plain equation with
//!
//! ```text
//!   h(x, s) = e^{k G(A_g⁻¹(s))} f(x, A_g⁻¹(s)).
//! ```
//!
//! Both G and A_g are cached on a geometric grid at construction; a query
//! completes the nearest cached node with a local Gauss–Kronrod panel, so
//! every value carries quadrature-level accuracy. The inverse is a bracketed,
//! safeguarded Newton iteration warm-started from the cache.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::quad;

/// Largest exponent fed to `exp` before the transform reports overflow
/// instead of returning infinity.
const G_OVERFLOW: f64 = 700.0;

/// Families for the gradient coefficient g(t), t ≤ 0.
#[derive(Debug, Clone)]
pub enum GFamily {
    Zero,
    Const(f64),
    /// g(t) = slope · |t|
    Linear(f64),
    /// g(t) = Σ coeffs[i] · |t|^i
    Poly(Vec<f64>),
    /// expression in the variable `z`
    Expr(Expr),
}

impl GFamily {
    pub fn eval(&self, t: f64) -> Result<f64> {
        let v = match self {
            GFamily::Zero => 0.0,
            GFamily::Const(c) => *c,
            GFamily::Linear(slope) => slope * (-t),
            GFamily::Poly(coeffs) => {
                let a = -t;
                coeffs.iter().rev().fold(0.0, |acc, c| acc * a + c)
            }
            GFamily::Expr(e) => e.eval(&[t])?,
        };
        if !v.is_finite() {
            return Err(Error::numeric(format!("g non-finite at t = {t}")));
        }
        Ok(v)
    }

    /// Exact primitive G(t) = ∫_t^0 g when the family is polynomial in |t|.
    /// Used only to extend log-scale probes beyond the cached range; the
    /// working-route G always goes through quadrature.
    pub fn closed_big_g(&self, t: f64) -> Option<f64> {
        let coeffs: Vec<f64> = match self {
            GFamily::Zero => vec![],
            GFamily::Const(c) => vec![*c],
            GFamily::Linear(slope) => vec![0.0, *slope],
            GFamily::Poly(c) => c.clone(),
            GFamily::Expr(_) => return None,
        };
        let a = -t;
        let mut acc = 0.0;
        for (i, c) in coeffs.iter().enumerate().rev() {
            acc = acc * a + c / (i as f64 + 1.0);
        }
        Some(acc * a)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            GFamily::Zero => true,
            GFamily::Const(c) => *c == 0.0,
            GFamily::Linear(s) => *s == 0.0,
            GFamily::Poly(c) => c.iter().all(|&v| v == 0.0),
            GFamily::Expr(_) => false,
        }
    }
}

/// Families for the forcing f(x, z), x in the closed unit ball (radially
/// represented by r = |x|), z ≤ 0. Values for z > 0 are the zero extension.
#[derive(Debug, Clone)]
pub enum FFamily {
    Zero,
    /// f(x,z) = (e^{−z} − 1)^p e^{k z}; the order k is taken from the pair.
    PowerExp { p: f64, k: usize },
    /// f(x,z) = c·|z|^q
    PowerLaw { c: f64, q: f64 },
    /// f(x,z) = b0 · e^{alpha0 |z|^exponent} · |z|^gamma
    ExpCritical { b0: f64, alpha0: f64, exponent: f64, gamma: f64 },
    /// expression in the variables x, r (aliases for the radius) and z
    Expr(Expr),
}

/// The variable set f-expressions are parsed with; x and r both bind to the
/// radius.
pub const F_EXPR_VARS: [&str; 3] = ["x", "r", "z"];

/// The variable set g-expressions are parsed with.
pub const G_EXPR_VARS: [&str; 1] = ["z"];

impl FFamily {
    pub fn eval(&self, r: f64, z: f64) -> Result<f64> {
        if z > 0.0 {
            return Ok(0.0);
        }
        let v = match self {
            FFamily::Zero => 0.0,
            FFamily::PowerExp { p, k } => {
                (-z).exp_m1().powf(*p) * ((*k as f64) * z).exp()
            }
            FFamily::PowerLaw { c, q } => {
                if z == 0.0 && *q == 0.0 {
                    *c
                } else {
                    c * (-z).powf(*q)
                }
            }
            FFamily::ExpCritical { b0, alpha0, exponent, gamma } => {
                b0 * (alpha0 * (-z).powf(*exponent)).exp() * (-z).powf(*gamma)
            }
            FFamily::Expr(e) => e.eval(&[r, r, z])?,
        };
        if !v.is_finite() {
            return Err(Error::numeric(format!(
                "f non-finite at (r, z) = ({r}, {z})"
            )));
        }
        Ok(v)
    }

    /// ln f(x, z) where an overflow-free closed form exists; extends limit
    /// probes far beyond f64 range for the builtin families.
    pub fn log_eval(&self, _r: f64, z: f64) -> Option<f64> {
        if z >= 0.0 {
            return None;
        }
        match self {
            FFamily::PowerExp { p, k } => {
                // ln[(e^{−z}−1)^p e^{kz}] = p(−z + ln(1 − e^{z})) + k z
                Some(p * (-z + (-(z.exp())).ln_1p()) + (*k as f64) * z)
            }
            FFamily::PowerLaw { c, q } => {
                if *c > 0.0 {
                    Some(c.ln() + q * (-z).ln())
                } else {
                    None
                }
            }
            FFamily::ExpCritical { b0, alpha0, exponent, gamma } => {
                if *b0 > 0.0 {
                    Some(b0.ln() + alpha0 * (-z).powf(*exponent) + gamma * (-z).ln())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, FFamily::Zero)
            || matches!(self, FFamily::PowerLaw { c, .. } if *c == 0.0)
            || matches!(self, FFamily::ExpCritical { b0, .. } if *b0 == 0.0)
    }

    pub fn x_independent(&self) -> bool {
        match self {
            FFamily::Expr(e) => e.independent_of("r") && e.independent_of("x"),
            _ => true,
        }
    }
}

/// The pair (f, g) of the problem together with its dimensions.
///
/// Sign hypotheses are probed numerically at construction. Regularity of the
/// transformed nonlinearity (the C^{1,1} smoothness some existence arguments
/// need) is not checkable from callbacks and rests with the caller.
#[derive(Debug, Clone)]
pub struct GrowthPair {
    pub n: usize,
    pub k: usize,
    pub f: FFamily,
    pub g: GFamily,
    /// caller asserts f(x,z) > 0 for z < 0
    pub positive_f: bool,
}

impl GrowthPair {
    pub fn new(n: usize, k: usize, f: FFamily, g: GFamily) -> Result<Self> {
        if n == 0 || k == 0 || k > n {
            return Err(Error::domain(format!(
                "growth pair requires 1 <= k <= n, got n={n}, k={k}"
            )));
        }
        if let FFamily::PowerExp { k: fk, .. } = f {
            if fk != k {
                return Err(Error::domain(format!(
                    "power-exp family order {fk} disagrees with pair order {k}"
                )));
            }
        }
        let pair = GrowthPair { n, k, f, g, positive_f: false };
        pair.validate()?;
        Ok(pair)
    }

    pub fn with_positivity(mut self) -> Result<Self> {
        self.positive_f = true;
        self.validate()?;
        Ok(self)
    }

    /// Probe the sign hypotheses on geometric grids. Not a proof, a tripwire.
    pub fn validate(&self) -> Result<()> {
        let mut t = -1e-6;
        while t >= -64.0 {
            let gv = self.g.eval(t)?;
            if gv < 0.0 {
                return Err(Error::domain(format!(
                    "g must be nonnegative on (-inf, 0]; g({t}) = {gv}"
                )));
            }
            t *= 4.0;
        }
        for &r in &[0.0, 0.5, 1.0] {
            // families singular at the origin (used for infinity-side probes
            // only) are allowed through; the sign check applies where f exists
            if let Ok(f0) = self.f.eval(r, 0.0) {
                if f0 < 0.0 {
                    return Err(Error::domain(format!("f(x, 0) must be >= 0; got {f0}")));
                }
            }
            if self.positive_f {
                let mut z = -1e-6;
                while z >= -32.0 {
                    if self.f.eval(r, z)? <= 0.0 {
                        return Err(Error::domain(format!(
                            "positivity flag set but f({r}, {z}) <= 0"
                        )));
                    }
                    z *= 4.0;
                }
            }
        }
        Ok(())
    }
}

/// Numerical settings of a [`Transform`].
#[derive(Debug, Clone)]
pub struct TransformSettings {
    /// working interval is [s_min, 0]; queries below report a range error
    pub s_min: f64,
    pub quad_abs: f64,
    pub quad_rel: f64,
    /// inverse stops when |A_g(s) − v| ≤ inverse_tol · (1 + |v|)
    pub inverse_tol: f64,
    pub max_newton: usize,
    pub cache_nodes: usize,
}

impl Default for TransformSettings {
    fn default() -> Self {
        TransformSettings {
            s_min: -50.0,
            quad_abs: 1e-12,
            quad_rel: 1e-10,
            inverse_tol: 1e-13,
            max_newton: 100,
            cache_nodes: 256,
        }
    }
}

/// The change of variables A_g with eagerly built caches. Immutable after
/// construction; wrap in `Arc` to share.
///
/// ```
/// use hessian_kk_core::transform::{FFamily, GFamily, GrowthPair, Transform};
///
/// // g == 1 has the closed form A_g(s) = 1 - e^{-s}
/// let pair = GrowthPair::new(3, 1, FFamily::Zero, GFamily::Const(1.0)).unwrap();
/// let t = Transform::with_defaults(pair).unwrap();
/// let a = t.a_g(-1.0).unwrap();
/// assert!((a - (1.0 - std::f64::consts::E)).abs() < 1e-11);
/// assert!((t.a_g_inv(a).unwrap() + 1.0).abs() < 1e-11);
/// ```
pub struct Transform {
    pair: GrowthPair,
    settings: TransformSettings,
    /// cache abscissae, strictly decreasing from 0 towards s_min
    nodes: Vec<f64>,
    g_vals: Vec<f64>,
    a_vals: Vec<f64>,
    /// most negative s for which e^{G} stayed below overflow
    reachable_s: f64,
}

impl Transform {
    pub fn new(pair: GrowthPair, settings: TransformSettings) -> Result<Arc<Self>> {
        if !(settings.s_min < 0.0) {
            return Err(Error::domain("s_min must be negative"));
        }
        // geometric node layout: 0, then −t0 · q^j down to s_min
        let t0 = 1e-6;
        let m = settings.cache_nodes.max(32);
        let q = (settings.s_min.abs() / t0).powf(1.0 / (m as f64 - 1.0));
        let mut nodes = Vec::with_capacity(m + 1);
        nodes.push(0.0);
        let mut mag = t0;
        for _ in 0..m {
            nodes.push(-mag);
            mag *= q;
        }
        *nodes.last_mut().unwrap() = settings.s_min;

        let mut g_vals = vec![0.0; nodes.len()];
        let mut a_vals = vec![0.0; nodes.len()];
        let mut reachable_s = settings.s_min;
        let mut usable = nodes.len();
        for i in 1..nodes.len() {
            let hi = nodes[i - 1];
            let lo = nodes[i];
            let seg_g = quad::integrate(
                |t| pair.g.eval(t).unwrap_or(f64::NAN),
                lo,
                hi,
                settings.quad_abs,
                settings.quad_rel,
            )
            .map_err(|e| Error::numeric(format!("building G cache on [{lo}, {hi}]: {e}")))?;
            g_vals[i] = g_vals[i - 1] + seg_g;
            if g_vals[i] > G_OVERFLOW {
                reachable_s = hi;
                usable = i;
                break;
            }
            let gv = &g_vals;
            let gref = &pair.g;
            let qa = settings.quad_abs;
            let qr = settings.quad_rel;
            let seg_a = quad::integrate(
                |t| {
                    let g_at = cache_query_g(&nodes[..=i], &gv[..=i], gref, t, qa, qr)
                        .unwrap_or(f64::NAN);
                    g_at.exp()
                },
                lo,
                hi,
                settings.quad_abs,
                settings.quad_rel,
            )
            .map_err(|e| Error::numeric(format!("building A_g cache on [{lo}, {hi}]: {e}")))?;
            a_vals[i] = a_vals[i - 1] - seg_a;
        }
        nodes.truncate(usable);
        g_vals.truncate(usable);
        a_vals.truncate(usable);

        let t = Transform {
            pair,
            settings,
            nodes,
            g_vals,
            a_vals,
            reachable_s,
        };
        // monotonicity of the cached A_g is structural; assert it anyway
        for w in t.a_vals.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::numeric(
                    "A_g cache is not strictly decreasing in |s|; g may be wild",
                ));
            }
        }
        Ok(Arc::new(t))
    }

    pub fn with_defaults(pair: GrowthPair) -> Result<Arc<Self>> {
        Transform::new(pair, TransformSettings::default())
    }

    pub fn pair(&self) -> &GrowthPair {
        &self.pair
    }

    pub fn settings(&self) -> &TransformSettings {
        &self.settings
    }

    /// Most negative s the transform can evaluate before e^G overflows or the
    /// working interval ends.
    pub fn reachable_s(&self) -> f64 {
        self.reachable_s
    }

    fn check_s(&self, s: f64) -> Result<()> {
        if !(s <= 0.0) {
            return Err(Error::domain(format!("transform argument must be <= 0, got {s}")));
        }
        if s < self.reachable_s {
            return Err(Error::range(format!(
                "s = {s} below the reachable interval [{}, 0] (working cap {}, overflow guard e^G <= e^{G_OVERFLOW})",
                self.reachable_s, self.settings.s_min
            )));
        }
        Ok(())
    }

    /// G(t) = ∫_t^0 g, from the cache completed by a local panel.
    pub fn big_g(&self, t: f64) -> Result<f64> {
        self.check_s(t)?;
        cache_query_g(
            &self.nodes,
            &self.g_vals,
            &self.pair.g,
            t,
            self.settings.quad_abs,
            self.settings.quad_rel,
        )
    }

    /// A_g'(s) = e^{G(s)}.
    pub fn a_g_prime(&self, s: f64) -> Result<f64> {
        let g = self.big_g(s)?;
        if g > G_OVERFLOW {
            return Err(Error::numeric(format!("e^G overflow at t = {s} (G = {g})")));
        }
        Ok(g.exp())
    }

    /// A_g(s) = −∫_s^0 e^{G(t)} dt.
    pub fn a_g(&self, s: f64) -> Result<f64> {
        self.check_s(s)?;
        // nearest cached node with |node| <= |s|
        let idx = match self
            .nodes
            .binary_search_by(|probe| s.partial_cmp(probe).unwrap())
        {
            Ok(i) => return Ok(self.a_vals[i]),
            Err(i) => i - 1, // nodes[i-1] > s >= nodes[i] in value order
        };
        let anchor = self.nodes[idx];
        let tail = quad::integrate(
            |t| {
                self.big_g(t)
                    .map(|g| if g > G_OVERFLOW { f64::NAN } else { g.exp() })
                    .unwrap_or(f64::NAN)
            },
            s,
            anchor,
            self.settings.quad_abs,
            self.settings.quad_rel,
        )
        .map_err(|e| Error::numeric(format!("A_g quadrature near s = {s}: {e}")))?;
        Ok(self.a_vals[idx] - tail)
    }

    /// Inverse of A_g: the s ≤ 0 with A_g(s) = v, by bracketing plus
    /// safeguarded Newton (A_g' = e^G).
    pub fn a_g_inv(&self, v: f64) -> Result<f64> {
        if !(v <= 0.0) {
            return Err(Error::domain(format!("inverse argument must be <= 0, got {v}")));
        }
        if v == 0.0 {
            return Ok(0.0);
        }
        let reach = self.a_vals.last().copied().unwrap_or(0.0);
        if v < reach {
            return Err(Error::range(format!(
                "v = {v} below the reachable range [{reach}, 0] of A_g on [{}, 0]",
                self.reachable_s
            )));
        }
        // warm start from the cache: nodes bracket v since a_vals is monotone
        let idx = self
            .a_vals
            .partition_point(|&a| a > v)
            .min(self.a_vals.len() - 1);
        let (mut lo, mut hi) = if idx == 0 {
            (self.nodes[0], self.nodes[0])
        } else {
            (self.nodes[idx], self.nodes[idx - 1])
        };
        // expand below if the warm bracket degenerated at the ends
        if lo == hi {
            lo = (-1.0f64).max(self.reachable_s);
            while self.a_g(lo)? > v {
                lo = (lo * 2.0).max(self.reachable_s);
                if lo == self.reachable_s && self.a_g(lo)? > v {
                    return Err(Error::range(format!(
                        "v = {v} not reachable above the working cap s = {}",
                        self.reachable_s
                    )));
                }
            }
            hi = 0.0;
        }
        let tol = self.settings.inverse_tol * (1.0 + v.abs());
        let mut s = 0.5 * (lo + hi);
        // linear warm start between cached values
        if idx > 0 {
            let (a_lo, a_hi) = (self.a_vals[idx], self.a_vals[idx - 1]);
            if a_hi != a_lo {
                let w = (v - a_hi) / (a_lo - a_hi);
                s = hi + w * (lo - hi);
            }
        }
        for _ in 0..self.settings.max_newton {
            let a = self.a_g(s)?;
            let residual = a - v;
            if residual.abs() <= tol {
                return Ok(s);
            }
            if residual > 0.0 {
                hi = s; // A_g(s) > v means s is too far right
            } else {
                lo = s;
            }
            let slope = self.a_g_prime(s)?;
            let mut next = s - residual / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            s = next;
        }
        Err(Error::convergence(
            format!("inverse of A_g at v = {v} did not reach tolerance {tol}"),
            &[],
        ))
    }

    /// Residual of the defining second-order relation at s. A_g'(s) comes from
    /// the cached quadrature route and A_g''(s) = −g(s)·e^{G(s)} from a fresh
    /// whole-interval quadrature, so the cancellation crosses two independent
    /// evaluations of G. Normalized by the magnitude of the two terms.
    pub fn ode_residual(&self, s: f64) -> Result<f64> {
        if !(s < 0.0) {
            return Err(Error::domain("ode residual requires s < 0"));
        }
        self.check_s(s)?;
        let k = self.pair.k as i32;
        let a1 = self.a_g_prime(s)?; // cached route
        let g_fresh = quad::integrate(
            |t| self.pair.g.eval(t).unwrap_or(f64::NAN),
            s,
            0.0,
            self.settings.quad_abs,
            self.settings.quad_rel,
        )?;
        if g_fresh > G_OVERFLOW {
            return Err(Error::numeric(format!("e^G overflow at t = {s}")));
        }
        let a2 = -self.pair.g.eval(s)? * g_fresh.exp(); // fresh route
        let term1 = a1.powi(k - 1) * a2;
        let term2 = self.pair.g.eval(s)? * a1.powi(k);
        let scale = 1.0 + term1.abs() + term2.abs();
        Ok((term1 + term2).abs() / scale)
    }

    /// k·G(s), extended by the polynomial closed form beyond the reachable
    /// interval when the g family admits one. Log-scale probe support.
    pub fn log_weight(&self, s: f64) -> Result<f64> {
        let k = self.pair.k as f64;
        if s >= self.reachable_s {
            return Ok(k * self.big_g(s)?);
        }
        match self.pair.g.closed_big_g(s) {
            Some(g) => Ok(k * g),
            None => Err(Error::range(format!(
                "G at s = {s} is outside the reachable interval and g has no closed primitive"
            ))),
        }
    }

    /// ln |A_g(s)|, with closed forms for zero and constant g extending the
    /// probe range past floating overflow.
    pub fn log_abs_a_g(&self, s: f64) -> Result<f64> {
        if !(s < 0.0) {
            return Err(Error::domain("log|A_g| requires s < 0"));
        }
        if s >= self.reachable_s {
            let a = self.a_g(s)?;
            if a < 0.0 {
                return Ok((-a).ln());
            }
        }
        match &self.pair.g {
            GFamily::Zero => Ok((-s).ln()),
            GFamily::Const(c) if *c == 0.0 => Ok((-s).ln()),
            GFamily::Const(c) => {
                // |A_g(s)| = (e^{c|s|} − 1)/c; ln = c|s| + ln(1 − e^{−c|s|}) − ln c
                let a = c * (-s);
                Ok(a + (-((-a).exp())).ln_1p() - c.ln())
            }
            _ => Err(Error::range(format!(
                "|A_g| at s = {s} is outside the reachable interval and has no closed form"
            ))),
        }
    }

    /// The transformed nonlinearity h(x, s) = e^{k G(A⁻¹(s))} f(x, A⁻¹(s)).
    pub fn transformed_h(self: &Arc<Self>) -> TransformedNonlinearity {
        TransformedNonlinearity { transform: self.clone() }
    }
}

/// G-cache query shared between construction (partial cache) and use.
fn cache_query_g(
    nodes: &[f64],
    g_vals: &[f64],
    g: &GFamily,
    t: f64,
    quad_abs: f64,
    quad_rel: f64,
) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let idx = match nodes.binary_search_by(|probe| t.partial_cmp(probe).unwrap()) {
        Ok(i) => return Ok(g_vals[i]),
        Err(i) => i - 1,
    };
    let anchor = nodes[idx.min(nodes.len() - 1)];
    let tail = quad::integrate(
        |tau| g.eval(tau).unwrap_or(f64::NAN),
        t,
        anchor,
        quad_abs,
        quad_rel,
    )?;
    Ok(g_vals[idx.min(nodes.len() - 1)] + tail)
}

/// Callable h(x, v) bound to its transform.
#[derive(Clone)]
pub struct TransformedNonlinearity {
    transform: Arc<Transform>,
}

impl TransformedNonlinearity {
    pub fn transform(&self) -> &Arc<Transform> {
        &self.transform
    }

    /// h(x, v) with x represented by its radius.
    pub fn eval(&self, r: f64, v: f64) -> Result<f64> {
        if v > 0.0 {
            // zero extension above the origin
            return Ok(0.0);
        }
        if v == 0.0 {
            // A_g⁻¹(0) = 0 and G(0) = 0, so h(x, 0) = f(x, 0)
            return self.transform.pair.f.eval(r, 0.0);
        }
        let z = self.transform.a_g_inv(v)?;
        let weight = self.transform.log_weight(z)?.exp();
        if !weight.is_finite() {
            return Err(Error::numeric(format!("e^{{kG}} overflow at z = {z}")));
        }
        Ok(weight * self.transform.pair.f.eval(r, z)?)
    }

    /// ln h(x, v) when the f family provides a log form; used by the
    /// exponential-growth probes where h itself overflows.
    pub fn log_eval(&self, r: f64, v: f64) -> Result<Option<f64>> {
        if v >= 0.0 {
            return Ok(None);
        }
        let z = self.transform.a_g_inv(v)?;
        match self.transform.pair.f.log_eval(r, z) {
            Some(lf) => Ok(Some(self.transform.log_weight(z)? + lf)),
            None => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair_with_g(g: GFamily) -> GrowthPair {
        GrowthPair::new(3, 2, FFamily::PowerLaw { c: 1.0, q: 2.0 }, g).unwrap()
    }

    fn transform_with_g(g: GFamily) -> Arc<Transform> {
        Transform::with_defaults(pair_with_g(g)).unwrap()
    }

    #[test]
    fn big_g_constant() {
        let t = transform_with_g(GFamily::Const(1.0));
        assert!((t.big_g(-3.0).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(t.big_g(0.0).unwrap(), 0.0);
    }

    #[test]
    fn big_g_zero() {
        let t = transform_with_g(GFamily::Zero);
        for &s in &[-0.5, -5.0, -40.0] {
            assert_eq!(t.big_g(s).unwrap(), 0.0);
        }
    }

    #[test]
    fn big_g_linear() {
        // g(t) = −t: ∫_{−2}^0 (−τ) dτ = 2
        let t = transform_with_g(GFamily::Linear(1.0));
        assert!((t.big_g(-2.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn a_g_is_identity_for_zero_g() {
        let t = transform_with_g(GFamily::Zero);
        for &s in &[-0.01, -1.0, -7.3, -45.0] {
            assert!((t.a_g(s).unwrap() - s).abs() < 1e-12 * (1.0 + s.abs()));
        }
        assert_eq!(t.a_g(0.0).unwrap(), 0.0);
    }

    #[test]
    fn a_g_const_matches_analytic() {
        // g ≡ 1: A_g(s) = 1 − e^{−s}
        let t = transform_with_g(GFamily::Const(1.0));
        for &s in &[-0.25f64, -1.0, -3.0, -10.0] {
            let expect = 1.0 - (-s).exp();
            let got = t.a_g(s).unwrap();
            assert!(
                (got - expect).abs() < 1e-11 * (1.0 + expect.abs()),
                "s={s}: {got} vs {expect}"
            );
        }
        let at_minus_one = t.a_g(-1.0).unwrap();
        assert!((at_minus_one - (1.0 - std::f64::consts::E)).abs() < 1e-12);
    }

    #[test]
    fn inverse_of_zero_g_is_identity() {
        let t = transform_with_g(GFamily::Zero);
        for &v in &[-0.1, -2.0, -20.0] {
            assert!((t.a_g_inv(v).unwrap() - v).abs() < 1e-11 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn inverse_const_analytic_point() {
        let t = transform_with_g(GFamily::Const(1.0));
        let v = 1.0 - std::f64::consts::E;
        assert!((t.a_g_inv(v).unwrap() + 1.0).abs() < 1e-11);
    }

    #[test]
    fn inverse_round_trip_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let t = transform_with_g(GFamily::Linear(0.2));
        for _ in 0..100 {
            let s = -rng.gen_range(1e-3..20.0f64);
            let v = t.a_g(s).unwrap();
            let back = t.a_g_inv(v).unwrap();
            assert!(
                (back - s).abs() < 1e-9 * (1.0 + s.abs()),
                "s={s}, back={back}"
            );
        }
    }

    #[test]
    fn a_g_monotone_and_dominated() {
        let t = transform_with_g(GFamily::Const(0.7));
        let grid: Vec<f64> = (1..60).map(|i| -0.5 * i as f64).collect();
        let mut prev = t.a_g(grid[0]).unwrap();
        for &s in &grid[1..] {
            let a = t.a_g(s).unwrap();
            assert!(a < prev, "A_g not strictly increasing at s={s}");
            assert!(a <= s + 1e-12, "A_g(s) <= s violated at s={s}: {a}");
            prev = a;
        }
    }

    #[test]
    fn transformed_h_power_exp_closed_form() {
        // f = (e^{−z} − 1)^p e^{kz}, g ≡ 1  =>  h(x, v) = (−v)^p
        for &p in &[2.0, 3.0] {
            for &k in &[1usize, 2] {
                let pair = GrowthPair::new(
                    5,
                    k,
                    FFamily::PowerExp { p, k },
                    GFamily::Const(1.0),
                )
                .unwrap();
                let t = Transform::with_defaults(pair).unwrap();
                let h = t.transformed_h();
                for &v in &[-0.5, -1.0, -2.0] {
                    let got = h.eval(0.3, v).unwrap();
                    let expect = (-v).powf(p);
                    assert!(
                        (got - expect).abs() < 1e-10 * (1.0 + expect),
                        "p={p} k={k} v={v}: {got} vs {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn transformed_h_reduces_to_f_for_zero_g() {
        let pair = GrowthPair::new(3, 1, FFamily::PowerLaw { c: 2.0, q: 3.0 }, GFamily::Zero)
            .unwrap();
        let t = Transform::with_defaults(pair).unwrap();
        let h = t.transformed_h();
        for &v in &[-0.2f64, -1.5, -9.0] {
            let expect = 2.0 * (-v).powf(3.0);
            assert!((h.eval(0.0, v).unwrap() - expect).abs() < 1e-9 * (1.0 + expect));
        }
    }

    #[test]
    fn transformed_h_of_zero_f_is_zero() {
        let pair = GrowthPair::new(3, 1, FFamily::Zero, GFamily::Const(1.0)).unwrap();
        let t = Transform::with_defaults(pair).unwrap();
        let h = t.transformed_h();
        assert_eq!(h.eval(0.5, -2.0).unwrap(), 0.0);
        assert_eq!(h.eval(0.5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn h_vanishes_at_origin_when_f_does() {
        let pair = GrowthPair::new(
            4,
            2,
            FFamily::PowerExp { p: 3.0, k: 2 },
            GFamily::Const(1.0),
        )
        .unwrap();
        let t = Transform::with_defaults(pair).unwrap();
        assert_eq!(t.transformed_h().eval(0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn ode_residual_examples() {
        let pair = GrowthPair::new(4, 2, FFamily::PowerLaw { c: 1.0, q: 2.0 }, GFamily::Const(1.0))
            .unwrap();
        let t = Transform::with_defaults(pair).unwrap();
        assert!(t.ode_residual(-1.0).unwrap() < 1e-12);

        let t0 = transform_with_g(GFamily::Zero);
        assert_eq!(t0.ode_residual(-2.0).unwrap(), 0.0);
    }

    #[test]
    fn ode_residual_random_poly_g() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let coeffs: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..0.5)).collect();
            let t = transform_with_g(GFamily::Poly(coeffs));
            for _ in 0..5 {
                let s = -rng.gen_range(0.01..6.0f64);
                let r = t.ode_residual(s).unwrap();
                assert!(r < 1e-10, "residual {r} at s={s}");
            }
        }
    }

    #[test]
    fn overflow_reports_range() {
        // strong constant g: G(t) = 20|t| overflows e^G near t = −35
        let t = transform_with_g(GFamily::Const(20.0));
        assert!(t.reachable_s() > -50.0);
        let err = t.a_g(-49.0).unwrap_err();
        assert!(matches!(err, Error::Range(_)), "{err}");
        let err = t.a_g_inv(f64::MIN / 2.0).unwrap_err();
        assert!(matches!(err, Error::Range(_)), "{err}");
    }

    #[test]
    fn negative_g_rejected() {
        let e = GrowthPair::new(3, 1, FFamily::Zero, GFamily::Const(-1.0)).unwrap_err();
        assert!(matches!(e, Error::Domain(_)));
    }

    #[test]
    fn positivity_flag_is_probed() {
        let ok = GrowthPair::new(3, 1, FFamily::PowerLaw { c: 1.0, q: 2.0 }, GFamily::Zero)
            .unwrap()
            .with_positivity();
        assert!(ok.is_ok());
        let zero = GrowthPair::new(3, 1, FFamily::Zero, GFamily::Zero)
            .unwrap()
            .with_positivity();
        assert!(zero.is_err());
    }

    #[test]
    fn power_exp_order_must_match_pair() {
        let e = GrowthPair::new(3, 2, FFamily::PowerExp { p: 3.0, k: 1 }, GFamily::Zero)
            .unwrap_err();
        assert!(matches!(e, Error::Domain(_)));
    }

    #[test]
    fn log_helpers_match_direct_values_in_range() {
        let t = transform_with_g(GFamily::Const(1.0));
        let s = -5.0;
        let direct = t.a_g(s).unwrap().abs().ln();
        assert!((t.log_abs_a_g(s).unwrap() - direct).abs() < 1e-10);
        let lw = t.log_weight(s).unwrap();
        assert!((lw - 2.0 * 5.0).abs() < 1e-10); // k = 2, G(−5) = 5
    }

    #[test]
    fn log_helpers_extend_beyond_reachable() {
        let t = transform_with_g(GFamily::Const(1.0));
        let s = -500.0; // far beyond the working interval
        let lw = t.log_weight(s).unwrap();
        assert!((lw - 1000.0).abs() < 1e-9);
        let la = t.log_abs_a_g(s).unwrap();
        // ln(e^{500} − 1) ≈ 500
        assert!((la - 500.0).abs() < 1e-9);
    }
}
