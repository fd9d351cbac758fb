//! Named constants of the k-Hessian theory on the unit ball.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::minors::binomial;

fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

/// Γ(half/2) for positive integer `half`; exact formulas for integer and
/// half-integer arguments.
fn gamma_of_half(half: usize) -> f64 {
    if half.is_multiple_of(2) {
        factorial(half / 2 - 1)
    } else {
        let m = (half - 1) / 2;
        let mut v = PI.sqrt();
        for i in 0..m {
            v *= (2 * i + 1) as f64 / 2.0;
        }
        v
    }
}

/// Surface area ω_{n−1} of the unit sphere in ℝⁿ: 2 π^{n/2} / Γ(n/2).
pub fn sphere_area(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("sphere area needs n >= 1"));
    }
    let mut pi_pow = PI.powi((n / 2) as i32);
    if !n.is_multiple_of(2) {
        pi_pow *= PI.sqrt(); // π^{n/2} for odd n = π^{(n-1)/2} · √π
    }
    Ok(2.0 * pi_pow / gamma_of_half(n))
}

/// Critical Sobolev exponent k* = n(k+1)/(n − 2k); defined only for n > 2k.
pub fn k_star(n: usize, k: usize) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::domain(format!("k = {k} out of range for n = {n}")));
    }
    if n <= 2 * k {
        return Err(Error::domain(format!(
            "critical exponent requires n > 2k (Sobolev regime); got n = {n}, k = {k}"
        )));
    }
    Ok((n * (k + 1)) as f64 / (n - 2 * k) as f64)
}

/// Partial harmonic sum 1 + 1/2 + … + 1/k.
pub fn harmonic(k: usize) -> f64 {
    (1..=k).map(|i| 1.0 / i as f64).sum()
}

/// The critical Moser-type constant α_n = n · c_n^{2/n}; defined for k = n/2.
pub fn alpha_n(n: usize, k: usize) -> Result<f64> {
    if 2 * k != n {
        return Err(Error::domain(format!(
            "alpha_n is defined for k = n/2 only; got n = {n}, k = {k}"
        )));
    }
    let c = hessian_constants(n, k)?.c_n;
    Ok(n as f64 * c.powf(2.0 / n as f64))
}

/// Bundle of the constants attached to a pair (n, k).
#[derive(Debug, Clone, Serialize)]
pub struct HessianConstants {
    /// c_n = (ω_{n−1}/k) · C(n−1, k−1)
    pub c_n: f64,
    /// τ = ω_{n−1}
    pub tau: f64,
    /// n · c_n^{2/n}, present only in the k = n/2 regime
    pub alpha_n: Option<f64>,
    /// 1 + 1/2 + … + 1/k
    pub harmonic_k: f64,
}

pub fn hessian_constants(n: usize, k: usize) -> Result<HessianConstants> {
    if k == 0 || k > n {
        return Err(Error::domain(format!("k = {k} out of range for n = {n}")));
    }
    let omega = sphere_area(n)?;
    let c_n = omega / k as f64 * binomial(n - 1, k - 1);
    let alpha = if 2 * k == n {
        Some(n as f64 * c_n.powf(2.0 / n as f64))
    } else {
        None
    };
    Ok(HessianConstants {
        c_n,
        tau: omega,
        alpha_n: alpha,
        harmonic_k: harmonic(k),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3).unwrap() - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4).unwrap() - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(5).unwrap() - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn k_star_values() {
        assert_eq!(k_star(3, 1).unwrap(), 6.0);
        assert_eq!(k_star(5, 2).unwrap(), 15.0);
        assert!((k_star(5, 1).unwrap() - 10.0 / 3.0).abs() < 1e-15);
        assert!(k_star(4, 2).is_err());
        assert!(k_star(2, 1).is_err());
    }

    #[test]
    fn constants_n2_k1() {
        let c = hessian_constants(2, 1).unwrap();
        assert!((c.c_n - 2.0 * PI).abs() < 1e-13);
        assert!((c.tau - 2.0 * PI).abs() < 1e-13);
        let a = c.alpha_n.unwrap();
        assert!((a - 4.0 * PI).abs() < 1e-12, "alpha_2 = {a}");
    }

    #[test]
    fn constants_n4_k2() {
        let c = hessian_constants(4, 2).unwrap();
        assert!((c.c_n - 3.0 * PI * PI).abs() < 1e-12);
        let a = c.alpha_n.unwrap();
        assert!((a - 4.0 * 3.0f64.sqrt() * PI).abs() < 1e-12, "alpha_4 = {a}");
    }

    #[test]
    fn harmonic_values() {
        assert_eq!(harmonic(1), 1.0);
        assert!((harmonic(3) - 11.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn alpha_requires_half_dimension() {
        assert!(alpha_n(5, 2).is_err());
        assert!(alpha_n(4, 2).is_ok());
        let c = hessian_constants(5, 2).unwrap();
        assert!(c.alpha_n.is_none());
    }
}
