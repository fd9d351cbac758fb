//! The individual hypothesis probes and the combined report.

use std::sync::Arc;

use serde::Serialize;

use super::constants::{hessian_constants, k_star, HessianConstants};
use super::{
    analyze_log_tail, sample_envelopes, Direction, Evidence, Label, LimitProbe, TailOutcome,
    Verdict,
};
use crate::error::{Error, Result};
use crate::quad;
use crate::transform::{FFamily, Transform};

/// ln f with a zero mapped to −∞. Prefers the family's closed log form.
fn log_f(f: &FFamily, r: f64, z: f64) -> Result<f64> {
    if let Some(lf) = f.log_eval(r, z) {
        return Ok(lf);
    }
    let v = f.eval(r, z)?;
    if v < 0.0 {
        return Err(Error::domain(format!(
            "f must be nonnegative; f({r}, {z}) = {v}"
        )));
    }
    Ok(if v == 0.0 { f64::NEG_INFINITY } else { v.ln() })
}

/// ln of e^{kG(z)} f(x,z) / |A_g(z)|^denom_exponent. `None` drops the point:
/// outside the reachable range, or f overflowed there.
fn log_pair_ratio(
    t: &Transform,
    r: f64,
    z: f64,
    denom_exponent: f64,
) -> Result<Option<f64>> {
    let lw = match t.log_weight(z) {
        Ok(v) => v,
        Err(Error::Range(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let la = match t.log_abs_a_g(z) {
        Ok(v) => v,
        Err(Error::Range(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let lf = match log_f(&t.pair().f, r, z) {
        Ok(v) => v,
        Err(Error::Numeric(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    Ok(Some(lw + lf - denom_exponent * la))
}

/// The pointwise ratio e^{kG(z)} f(x,z) / (∫_z^0 e^G)^k used by the
/// sublinear/superlinear conditions.
pub fn ratio_infinity(t: &Arc<Transform>, r: f64, z: f64) -> Result<f64> {
    if !(z < 0.0) {
        return Err(Error::domain("ratio requires z < 0"));
    }
    match log_pair_ratio(t, r, z, t.pair().k as f64)? {
        Some(l) => {
            if l > 709.0 {
                Err(Error::numeric(format!("ratio overflows at z = {z}")))
            } else {
                Ok(l.exp())
            }
        }
        None => Err(Error::range(format!("ratio not evaluable at z = {z}"))),
    }
}

fn degenerate_note(t: &Transform) -> Option<String> {
    if t.pair().f.is_zero() {
        Some("degenerate: f is identically zero".to_string())
    } else {
        None
    }
}

/// Turn a tail outcome into a verdict against a positive threshold.
#[allow(clippy::too_many_arguments)]
fn threshold_verdict(
    hypothesis: &str,
    outcome: TailOutcome,
    threshold: f64,
    below: Label,
    above: Label,
    evidence: Evidence,
    probe: &LimitProbe,
    note: Option<String>,
) -> Verdict {
    match outcome {
        TailOutcome::Zero => Verdict {
            hypothesis: hypothesis.to_string(),
            label: below,
            converged: true,
            margin: Some(1.0),
            limit: Some(0.0),
            note,
            evidence,
        },
        TailOutcome::Diverging => Verdict {
            hypothesis: hypothesis.to_string(),
            label: above,
            converged: true,
            margin: None,
            limit: None,
            note: Some(match note {
                Some(n) => format!("{n}; ratio diverges"),
                None => "ratio diverges".to_string(),
            }),
            evidence,
        },
        TailOutcome::Plateau { low, high } => {
            if high < threshold * (1.0 - probe.margin_min) {
                Verdict {
                    hypothesis: hypothesis.to_string(),
                    label: below,
                    converged: true,
                    margin: Some((threshold - high) / threshold),
                    limit: Some(0.5 * (low + high)),
                    note,
                    evidence,
                }
            } else if low > threshold * (1.0 + probe.margin_min) {
                Verdict {
                    hypothesis: hypothesis.to_string(),
                    label: above,
                    converged: true,
                    margin: Some((low - threshold) / threshold),
                    limit: Some(0.5 * (low + high)),
                    note,
                    evidence,
                }
            } else {
                Verdict {
                    hypothesis: hypothesis.to_string(),
                    label: Label::Indeterminate,
                    converged: true,
                    margin: None,
                    limit: Some(0.5 * (low + high)),
                    note: Some("plateau within margin of the threshold".to_string()),
                    evidence,
                }
            }
        }
        TailOutcome::Inconclusive => Verdict::indeterminate(hypothesis, evidence, note),
    }
}

/// Sublinear vs superlinear balance of the pair at −∞, against λ₁.
pub fn classify_infinity(
    t: &Arc<Transform>,
    lambda1: f64,
    probe: &LimitProbe,
) -> Result<Verdict> {
    if !(lambda1 > 0.0) {
        return Err(Error::domain("lambda1 must be positive"));
    }
    probe.validate()?;
    let grid = probe.grid(Direction::Infinity);
    let k = t.pair().k as f64;
    let (kept, lower, upper) =
        sample_envelopes(&grid, &probe.x_samples, |r, z| log_pair_ratio(t, r, z, k))?;
    let evidence = Evidence {
        grid: kept,
        lower,
        upper,
        scale: "log pair ratio".to_string(),
    };
    let outcome = analyze_log_tail(&evidence.lower, &evidence.upper, probe);
    Ok(threshold_verdict(
        "pair-linearity-at-infinity",
        outcome,
        lambda1,
        Label::Sublinear,
        Label::Superlinear,
        evidence,
        probe,
        degenerate_note(t),
    ))
}

/// Origin balance of the raw forcing f(x,z)/|z|^k against λ₁.
pub fn classify_origin(t: &Arc<Transform>, lambda1: f64, probe: &LimitProbe) -> Result<Verdict> {
    if !(lambda1 > 0.0) {
        return Err(Error::domain("lambda1 must be positive"));
    }
    probe.validate()?;
    let grid = probe.grid(Direction::Origin);
    let k = t.pair().k as f64;
    let f = &t.pair().f;
    let (kept, lower, upper) = sample_envelopes(&grid, &probe.x_samples, |r, z| {
        match log_f(f, r, z) {
            Ok(lf) => Ok(Some(lf - k * (-z).ln())),
            Err(Error::Numeric(_)) => Ok(None),
            Err(e) => Err(e),
        }
    })?;
    let evidence = Evidence {
        grid: kept,
        lower,
        upper,
        scale: "log of f/|z|^k".to_string(),
    };
    let outcome = analyze_log_tail(&evidence.lower, &evidence.upper, probe);
    Ok(threshold_verdict(
        "origin-linearity",
        outcome,
        lambda1,
        Label::Sublinear,
        Label::Superlinear,
        evidence,
        probe,
        degenerate_note(t),
    ))
}

/// The origin condition of the k = n/2 regime: limsup of the pair ratio at 0⁻
/// must stay below the variational constant Λ₁.
pub fn classify_origin_tm(
    t: &Arc<Transform>,
    big_lambda1: f64,
    probe: &LimitProbe,
) -> Result<Verdict> {
    if !(big_lambda1 > 0.0) {
        return Err(Error::domain("big_lambda1 must be positive"));
    }
    probe.validate()?;
    let grid = probe.grid(Direction::Origin);
    let k = t.pair().k as f64;
    let (kept, lower, upper) =
        sample_envelopes(&grid, &probe.x_samples, |r, z| log_pair_ratio(t, r, z, k))?;
    let evidence = Evidence {
        grid: kept,
        lower,
        upper,
        scale: "log pair ratio at origin".to_string(),
    };
    let outcome = analyze_log_tail(&evidence.lower, &evidence.upper, probe);
    Ok(threshold_verdict(
        "origin-vs-variational-constant",
        outcome,
        big_lambda1,
        Label::Pass,
        Label::Fail,
        evidence,
        probe,
        degenerate_note(t),
    ))
}

/// Sobolev subcriticality: the pair ratio with denominator exponent k*−1 must
/// vanish at −∞.
pub fn check_subcritical_sobolev(t: &Arc<Transform>, probe: &LimitProbe) -> Result<Verdict> {
    probe.validate()?;
    let pair = t.pair();
    let kstar = k_star(pair.n, pair.k)?;
    let grid = probe.grid(Direction::Infinity);
    let (kept, lower, upper) = sample_envelopes(&grid, &probe.x_samples, |r, z| {
        log_pair_ratio(t, r, z, kstar - 1.0)
    })?;
    let evidence = Evidence {
        grid: kept,
        lower,
        upper,
        scale: format!("log ratio with denominator exponent {}", kstar - 1.0),
    };
    let outcome = analyze_log_tail(&evidence.lower, &evidence.upper, probe);
    let hypothesis = "sobolev-subcritical";
    Ok(match outcome {
        TailOutcome::Zero => Verdict {
            hypothesis: hypothesis.to_string(),
            label: Label::Pass,
            converged: true,
            margin: Some(1.0),
            limit: Some(0.0),
            note: degenerate_note(t),
            evidence,
        },
        TailOutcome::Plateau { low, high } => Verdict {
            hypothesis: hypothesis.to_string(),
            label: Label::Fail,
            converged: true,
            margin: Some(-0.5 * (low + high)),
            limit: Some(0.5 * (low + high)),
            note: Some("ratio plateaus at a nonzero value; the limit must be 0".to_string()),
            evidence,
        },
        TailOutcome::Diverging => Verdict {
            hypothesis: hypothesis.to_string(),
            label: Label::Fail,
            converged: true,
            margin: None,
            limit: None,
            note: Some("ratio diverges; the limit must be 0".to_string()),
            evidence,
        },
        TailOutcome::Inconclusive => Verdict::indeterminate(hypothesis, evidence, None),
    })
}

/// Parameters of the superlinearity-of-primitive conditions.
#[derive(Debug, Clone, Serialize)]
pub enum ArParams {
    /// (k+1)/(1−θ) · ∫_z^0 e^{(k+1)G} f ≤ e^{kG} f · ∫_z^0 e^G for z < −M
    Sobolev { theta: f64, m: f64 },
    /// ϑ · ∫ ≤ same right side on the ball, with the primitive positive on the
    /// annulus r1 < |x| < r2, for z < −z0
    TrudingerMoser { vartheta: f64, r1: f64, r2: f64, z0: f64 },
    /// 0 < ∫_z^0 e^{(k+1)G} f ≤ M e^{kG} f for z < −L
    TrudingerMoserPrimitive { l: f64, m: f64 },
}

impl ArParams {
    fn validate(&self, k: usize) -> Result<()> {
        match self {
            ArParams::Sobolev { theta, m } => {
                if !(*theta > 0.0 && *theta < 1.0) {
                    return Err(Error::domain(format!(
                        "theta must lie in (0, 1), got {theta}"
                    )));
                }
                if !(*m > 0.0) {
                    return Err(Error::domain("M must be positive"));
                }
            }
            ArParams::TrudingerMoser { vartheta, r1, r2, z0 } => {
                if !(*vartheta > (k + 1) as f64) {
                    return Err(Error::domain(format!(
                        "vartheta must exceed k+1 = {}, got {vartheta}",
                        k + 1
                    )));
                }
                if !(0.0 < *r1 && r1 < r2 && *r2 < 1.0) {
                    return Err(Error::domain("need 0 < r1 < r2 < 1"));
                }
                if !(*z0 > 0.0) {
                    return Err(Error::domain("z0 must be positive"));
                }
            }
            ArParams::TrudingerMoserPrimitive { l, m } => {
                if !(*l > 0.0 && *m > 0.0) {
                    return Err(Error::domain("L and M must be positive"));
                }
            }
        }
        Ok(())
    }

    fn cutoff(&self) -> f64 {
        match self {
            ArParams::Sobolev { m, .. } => *m,
            ArParams::TrudingerMoser { z0, .. } => *z0,
            ArParams::TrudingerMoserPrimitive { l, .. } => *l,
        }
    }

    fn hypothesis(&self) -> String {
        match self {
            ArParams::Sobolev { theta, m } => format!("ar-sobolev(theta={theta}, M={m})"),
            ArParams::TrudingerMoser { vartheta, r1, r2, z0 } => {
                format!("ar-tm(vartheta={vartheta}, r1={r1}, r2={r2}, z0={z0})")
            }
            ArParams::TrudingerMoserPrimitive { l, m } => {
                format!("ar-tm-primitive(L={l}, M={m})")
            }
        }
    }
}

/// Primitive ∫_z^0 e^{(k+1)G(s)} f(x,s) ds by quadrature; `None` when the
/// exponent leaves floating range.
fn primitive_integral(t: &Transform, r: f64, z: f64) -> Result<Option<f64>> {
    let k1 = (t.pair().k + 1) as f64;
    match t.big_g(z) {
        Ok(g) if k1 * g > 700.0 => return Ok(None),
        Ok(_) => {}
        Err(Error::Range(_)) => return Ok(None),
        Err(e) => return Err(e),
    }
    let value = quad::integrate(
        |s| {
            let g = match t.big_g(s) {
                Ok(v) => v,
                Err(_) => return f64::NAN,
            };
            let f = match t.pair().f.eval(r, s) {
                Ok(v) => v,
                Err(_) => return f64::NAN,
            };
            (k1 * g).exp() * f
        },
        z,
        0.0,
        t.settings().quad_abs,
        t.settings().quad_rel,
    );
    match value {
        Ok(v) => Ok(Some(v)),
        Err(Error::Numeric(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Check one of the primitive-superlinearity conditions on sampled (x, z).
pub fn check_ar(t: &Arc<Transform>, params: &ArParams, probe: &LimitProbe) -> Result<Verdict> {
    probe.validate()?;
    let pair = t.pair();
    params.validate(pair.k)?;
    let hypothesis = params.hypothesis();
    let cutoff = params.cutoff();
    let k = pair.k as f64;

    // sample z below the cutoff on a short geometric grid
    let z_grid: Vec<f64> = (0..12)
        .map(|j| -(cutoff + 1.0) * 1.5f64.powi(j))
        .filter(|&z| z >= t.reachable_s())
        .collect();
    if z_grid.is_empty() {
        return Ok(Verdict::indeterminate(
            &hypothesis,
            Evidence::empty("inequality margin"),
            Some("no sample points below the cutoff are reachable".to_string()),
        ));
    }

    let shells: Vec<f64> = if pair.f.x_independent() {
        vec![probe.x_samples[0]]
    } else {
        probe.x_samples.clone()
    };

    let mut kept = Vec::new();
    let mut lo_margin = Vec::new();
    let mut hi_margin = Vec::new();
    let mut positivity_ok = true;
    let mut any_sample = false;

    for &z in &z_grid {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut all_evaluated = true;
        for &r in &shells {
            let integral = match primitive_integral(t, r, z)? {
                Some(v) => v,
                None => {
                    all_evaluated = false;
                    break;
                }
            };
            let weight = match t.log_weight(z) {
                Ok(w) if w <= 700.0 => w.exp(),
                _ => {
                    all_evaluated = false;
                    break;
                }
            };
            let f_val = pair.f.eval(r, z)?;
            let margin = match params {
                ArParams::Sobolev { theta, .. } => {
                    let a = t.a_g(z)?.abs();
                    let lhs = (k + 1.0) / (1.0 - theta) * integral;
                    let rhs = weight * f_val * a;
                    (rhs - lhs) / (1.0 + rhs.abs())
                }
                ArParams::TrudingerMoser { vartheta, .. } => {
                    let a = t.a_g(z)?.abs();
                    let lhs = vartheta * integral;
                    let rhs = weight * f_val * a;
                    (rhs - lhs) / (1.0 + rhs.abs())
                }
                ArParams::TrudingerMoserPrimitive { m, .. } => {
                    let rhs = m * weight * f_val;
                    let upper = (rhs - integral) / (1.0 + rhs.abs());
                    if integral <= 0.0 {
                        positivity_ok = false;
                    }
                    upper
                }
            };
            lo = lo.min(margin);
            hi = hi.max(margin);
            any_sample = true;
        }
        if all_evaluated {
            kept.push(z);
            lo_margin.push(lo);
            hi_margin.push(hi);
        }
    }

    // the annulus positivity clause of the ball variant
    if let ArParams::TrudingerMoser { r1, r2, .. } = params {
        let mut annulus: Vec<f64> = probe
            .x_samples
            .iter()
            .copied()
            .filter(|r| *r > *r1 && *r < *r2)
            .collect();
        if annulus.is_empty() {
            annulus.push(0.5 * (r1 + r2));
        }
        'outer: for &z in &kept {
            for &r in &annulus {
                match primitive_integral(t, r, z)? {
                    Some(v) if v > 0.0 => {}
                    _ => {
                        positivity_ok = false;
                        break 'outer;
                    }
                }
            }
        }
    }

    let evidence = Evidence {
        grid: kept,
        lower: lo_margin,
        upper: hi_margin,
        scale: "inequality margin (rhs - lhs, normalized)".to_string(),
    };
    if !any_sample || evidence.grid.is_empty() {
        return Ok(Verdict::indeterminate(
            &hypothesis,
            evidence,
            Some("no evaluable samples".to_string()),
        ));
    }
    let min_margin = evidence
        .lower
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let inequality_ok = min_margin >= -1e-9;
    let label = if inequality_ok && positivity_ok {
        Label::Pass
    } else {
        Label::Fail
    };
    let note = if !positivity_ok {
        Some("primitive positivity clause fails".to_string())
    } else {
        degenerate_note(t)
    };
    Ok(Verdict {
        hypothesis,
        label,
        converged: true,
        margin: Some(min_margin),
        limit: None,
        note,
        evidence,
    })
}

/// Exponent estimate α̂(z) = ln(e^{kG} f) / (∫_z^0 e^G)^{(n+2)/n} and its
/// limit classification: vanishing α̂ is subcritical exponential growth, a
/// positive uniform plateau is critical growth with that α₀.
pub fn exp_growth_type(t: &Arc<Transform>, probe: &LimitProbe) -> Result<Verdict> {
    probe.validate()?;
    let pair = t.pair();
    if 2 * pair.k != pair.n {
        return Err(Error::domain(format!(
            "exponential growth classification needs k = n/2; got n = {}, k = {}",
            pair.n, pair.k
        )));
    }
    let hypothesis = "exponential-growth-type";
    if pair.f.is_zero() {
        return Ok(Verdict {
            hypothesis: hypothesis.to_string(),
            label: Label::SubcriticalExp,
            converged: true,
            margin: None,
            limit: Some(0.0),
            note: degenerate_note(t),
            evidence: Evidence::empty("log alpha-hat"),
        });
    }
    let q = (pair.n + 2) as f64 / pair.n as f64;
    let grid = probe.grid(Direction::Infinity);
    let (kept, lower, upper) = sample_envelopes(&grid, &probe.x_samples, |r, z| {
        let lw = match t.log_weight(z) {
            Ok(v) => v,
            Err(Error::Range(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let la = match t.log_abs_a_g(z) {
            Ok(v) => v,
            Err(Error::Range(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        if q * la > 700.0 {
            return Ok(None); // |A|^q leaves floating range
        }
        let lf = match log_f(&pair.f, r, z) {
            Ok(v) => v,
            Err(Error::Numeric(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let alpha_hat = (lw + lf) * (-q * la).exp();
        Ok(Some(if alpha_hat > 0.0 {
            alpha_hat.ln()
        } else {
            f64::NEG_INFINITY
        }))
    })?;
    let evidence = Evidence {
        grid: kept,
        lower,
        upper,
        scale: "log alpha-hat".to_string(),
    };
    let outcome = analyze_log_tail(&evidence.lower, &evidence.upper, probe);
    Ok(match outcome {
        TailOutcome::Zero => Verdict {
            hypothesis: hypothesis.to_string(),
            label: Label::SubcriticalExp,
            converged: true,
            margin: None,
            limit: Some(0.0),
            note: None,
            evidence,
        },
        TailOutcome::Plateau { low, high } => {
            if (high - low) > 1e-2 * high {
                Verdict {
                    hypothesis: hypothesis.to_string(),
                    label: Label::Indeterminate,
                    converged: true,
                    margin: None,
                    limit: Some(0.5 * (low + high)),
                    note: Some("alpha-hat limit is not uniform across shells".to_string()),
                    evidence,
                }
            } else {
                let alpha0 = 0.5 * (low + high);
                // two-sided condition at alpha0 (1 ± delta): the tail of
                // alpha-hat must separate from both test exponents
                let delta = 0.05;
                let margin = (delta * alpha0 - 0.5 * (high - low)) / alpha0;
                Verdict {
                    hypothesis: hypothesis.to_string(),
                    label: Label::CriticalExp,
                    converged: true,
                    margin: Some(margin),
                    limit: Some(alpha0),
                    note: None,
                    evidence,
                }
            }
        }
        TailOutcome::Diverging => Verdict {
            hypothesis: hypothesis.to_string(),
            label: Label::Indeterminate,
            converged: true,
            margin: None,
            limit: None,
            note: Some("alpha-hat diverges: growth exceeds every exponential order".to_string()),
            evidence,
        },
        TailOutcome::Inconclusive => Verdict::indeterminate(hypothesis, evidence, None),
    })
}

/// Threshold of the min-max condition:
/// e^{−(1 + 1/2 + … + 1/k)} (α_n/α₀)^{n/2} (n/τ).
pub fn minmax_threshold(n: usize, k: usize, alpha0: f64) -> Result<f64> {
    if !(alpha0 > 0.0) {
        return Err(Error::domain("alpha0 must be positive"));
    }
    let c = hessian_constants(n, k)?;
    let alpha_n = c
        .alpha_n
        .ok_or_else(|| Error::domain("min-max threshold needs k = n/2"))?;
    Ok((-c.harmonic_k).exp() * (alpha_n / alpha0).powf(n as f64 / 2.0) * n as f64 / c.tau)
}

/// Estimate b₀ = lim e^{kG}|s| f / e^{α₀ (∫ e^G)^{(n+2)/n}} and compare it to
/// the min-max threshold. Requires critical growth with exponent α₀.
pub fn minmax_check(t: &Arc<Transform>, alpha0: f64, probe: &LimitProbe) -> Result<Verdict> {
    probe.validate()?;
    let pair = t.pair();
    if 2 * pair.k != pair.n {
        return Err(Error::domain("min-max check needs k = n/2"));
    }
    let threshold = minmax_threshold(pair.n, pair.k, alpha0)?;
    let q = (pair.n + 2) as f64 / pair.n as f64;
    let hypothesis = "min-max-bound";
    let grid = probe.grid(Direction::Infinity);
    let (kept, lower, upper) = sample_envelopes(&grid, &probe.x_samples, |r, z| {
        let lw = match t.log_weight(z) {
            Ok(v) => v,
            Err(Error::Range(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let la = match t.log_abs_a_g(z) {
            Ok(v) => v,
            Err(Error::Range(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        if q * la > 700.0 {
            return Ok(None);
        }
        let lf = match log_f(&pair.f, r, z) {
            Ok(v) => v,
            Err(Error::Numeric(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        // log of the estimate; the subtraction limits the usable |z| range,
        // hence the moderate default grid
        Ok(Some(lw + (-z).ln() + lf - alpha0 * (q * la).exp()))
    })?;
    let evidence = Evidence {
        grid: kept,
        lower,
        upper,
        scale: "log b0 estimate".to_string(),
    };
    let outcome = analyze_log_tail(&evidence.lower, &evidence.upper, probe);
    Ok(match outcome {
        TailOutcome::Plateau { low, high } => {
            if low > threshold * (1.0 + probe.margin_min) {
                Verdict {
                    hypothesis: hypothesis.to_string(),
                    label: Label::Pass,
                    converged: true,
                    margin: Some((low - threshold) / threshold),
                    limit: Some(0.5 * (low + high)),
                    note: None,
                    evidence,
                }
            } else if high < threshold * (1.0 - probe.margin_min) {
                Verdict {
                    hypothesis: hypothesis.to_string(),
                    label: Label::Fail,
                    converged: true,
                    margin: Some((high - threshold) / threshold),
                    limit: Some(0.5 * (low + high)),
                    note: None,
                    evidence,
                }
            } else {
                Verdict {
                    hypothesis: hypothesis.to_string(),
                    label: Label::Indeterminate,
                    converged: true,
                    margin: None,
                    limit: Some(0.5 * (low + high)),
                    note: Some("b0 plateau within margin of the threshold".to_string()),
                    evidence,
                }
            }
        }
        TailOutcome::Zero => Verdict {
            hypothesis: hypothesis.to_string(),
            label: Label::Fail,
            converged: true,
            margin: Some(-1.0),
            limit: Some(0.0),
            note: None,
            evidence,
        },
        // the limit must exist as a finite b0; divergence is not a pass
        TailOutcome::Diverging | TailOutcome::Inconclusive => Verdict::indeterminate(
            hypothesis,
            evidence,
            Some("b0 limit did not stabilize".to_string()),
        ),
    })
}

/// Inputs of the combined classification report.
#[derive(Debug, Clone)]
pub struct ClassifyInputs {
    pub lambda1: f64,
    pub big_lambda1: Option<f64>,
    pub ar: Vec<ArParams>,
    /// overrides the detected critical exponent in the min-max check
    pub alpha0: Option<f64>,
    pub infinity_probe: LimitProbe,
    pub origin_probe: LimitProbe,
    pub minmax_probe: LimitProbe,
}

impl ClassifyInputs {
    pub fn new(lambda1: f64) -> Self {
        ClassifyInputs {
            lambda1,
            big_lambda1: None,
            ar: Vec::new(),
            alpha0: None,
            infinity_probe: LimitProbe::infinity(),
            origin_probe: LimitProbe::origin(),
            minmax_probe: LimitProbe::moderate_infinity(),
        }
    }
}

/// The full hypothesis report for a pair.
#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    pub n: usize,
    pub k: usize,
    pub k_star: Option<f64>,
    pub constants: HessianConstants,
    pub lambda1: f64,
    pub big_lambda1: Option<f64>,
    pub verdicts: Vec<Verdict>,
}

/// Run every hypothesis applicable to the pair's regime.
pub fn full_report(t: &Arc<Transform>, inputs: &ClassifyInputs) -> Result<ClassifyReport> {
    let pair = t.pair();
    let mut verdicts = Vec::new();
    verdicts.push(classify_infinity(t, inputs.lambda1, &inputs.infinity_probe)?);
    verdicts.push(classify_origin(t, inputs.lambda1, &inputs.origin_probe)?);
    let kstar = k_star(pair.n, pair.k).ok();
    if kstar.is_some() {
        verdicts.push(check_subcritical_sobolev(t, &inputs.infinity_probe)?);
    }
    for params in &inputs.ar {
        verdicts.push(check_ar(t, params, &inputs.infinity_probe)?);
    }
    if 2 * pair.k == pair.n {
        if let Some(bl) = inputs.big_lambda1 {
            verdicts.push(classify_origin_tm(t, bl, &inputs.origin_probe)?);
        }
        let growth = exp_growth_type(t, &inputs.infinity_probe)?;
        let detected_alpha = growth.limit.filter(|_| growth.label == Label::CriticalExp);
        verdicts.push(growth);
        if let Some(alpha0) = inputs.alpha0.or(detected_alpha) {
            if alpha0 > 0.0 {
                verdicts.push(minmax_check(t, alpha0, &inputs.minmax_probe)?);
            }
        }
    }
    Ok(ClassifyReport {
        n: pair.n,
        k: pair.k,
        k_star: kstar,
        constants: hessian_constants(pair.n, pair.k)?,
        lambda1: inputs.lambda1,
        big_lambda1: inputs.big_lambda1,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::{FFamily, GFamily, GrowthPair};
    use std::f64::consts::PI;

    fn make_transform(n: usize, k: usize, f: FFamily, g: GFamily) -> Arc<Transform> {
        Transform::with_defaults(GrowthPair::new(n, k, f, g).unwrap()).unwrap()
    }

    fn power_exp(n: usize, k: usize, p: f64) -> Arc<Transform> {
        make_transform(n, k, FFamily::PowerExp { p, k }, GFamily::Const(1.0))
    }

    #[test]
    fn infinity_power_law_below_and_above_lambda1() {
        let lambda1 = 30.0;
        let below = make_transform(3, 2, FFamily::PowerLaw { c: 5.0, q: 2.0 }, GFamily::Zero);
        let v = classify_infinity(&below, lambda1, &LimitProbe::infinity()).unwrap();
        assert_eq!(v.label, Label::Sublinear);
        assert!((v.limit.unwrap() - 5.0).abs() < 1e-6);

        let above = make_transform(3, 2, FFamily::PowerLaw { c: 80.0, q: 2.0 }, GFamily::Zero);
        let v = classify_infinity(&above, lambda1, &LimitProbe::infinity()).unwrap();
        assert_eq!(v.label, Label::Superlinear);
        assert!((v.limit.unwrap() - 80.0).abs() < 1e-4);
    }

    #[test]
    fn infinity_power_exp_superlinear_for_p_above_k() {
        let t = power_exp(5, 2, 5.0);
        let v = classify_infinity(&t, 10.0, &LimitProbe::infinity()).unwrap();
        assert_eq!(v.label, Label::Superlinear);
        assert!(v.converged);
    }

    #[test]
    fn infinity_power_exp_sublinear_for_p_below_k() {
        // the weighted ratio behaves like (-v)^{p-k} and collapses for p < k
        let t = power_exp(5, 2, 1.5);
        let v = classify_infinity(&t, 10.0, &LimitProbe::infinity()).unwrap();
        assert_eq!(v.label, Label::Sublinear);
        assert_eq!(v.limit, Some(0.0));
    }

    #[test]
    fn ratio_infinity_reduces_to_plain_ratio_for_zero_g() {
        let t = make_transform(3, 2, FFamily::PowerLaw { c: 3.0, q: 5.0 }, GFamily::Zero);
        for &z in &[-0.5f64, -2.0, -11.0] {
            let got = ratio_infinity(&t, 0.3, z).unwrap();
            let expect = 3.0 * (-z).powf(5.0) / (-z).powf(2.0);
            assert!((got - expect).abs() < 1e-9 * (1.0 + expect));
        }
    }

    #[test]
    fn origin_power_law_recovers_coefficient() {
        let t = make_transform(4, 2, FFamily::PowerLaw { c: 7.0, q: 2.0 }, GFamily::Zero);
        let v = classify_origin(&t, 10.0, &LimitProbe::origin()).unwrap();
        assert_eq!(v.label, Label::Sublinear);
        assert!((v.limit.unwrap() - 7.0).abs() < 1e-6);
        let v = classify_origin(&t, 5.0, &LimitProbe::origin()).unwrap();
        assert_eq!(v.label, Label::Superlinear);
    }

    #[test]
    fn origin_power_exp() {
        // p > k: f/|z|^k ~ |z|^{p-k} -> 0, passes the sub-eigenvalue condition
        let t = power_exp(5, 2, 5.0);
        let v = classify_origin(&t, 1.0, &LimitProbe::origin()).unwrap();
        assert_eq!(v.label, Label::Sublinear);
        assert_eq!(v.limit, Some(0.0));
        // 1 <= p < k: ratio diverges
        let t = power_exp(5, 2, 1.0);
        let v = classify_origin(&t, 1.0, &LimitProbe::origin()).unwrap();
        assert_eq!(v.label, Label::Superlinear);
    }

    #[test]
    fn subcritical_sobolev_threshold() {
        // n=5, k=2: k* - 1 = 14
        let pass = power_exp(5, 2, 5.0);
        let v = check_subcritical_sobolev(&pass, &LimitProbe::infinity()).unwrap();
        assert_eq!(v.label, Label::Pass, "{:?}", v.note);

        let critical = power_exp(5, 2, 14.0);
        let v = check_subcritical_sobolev(&critical, &LimitProbe::infinity()).unwrap();
        assert_eq!(v.label, Label::Fail);
        assert!((v.limit.unwrap() - 1.0).abs() < 1e-6, "limit {:?}", v.limit);

        let zero = make_transform(5, 2, FFamily::Zero, GFamily::Const(1.0));
        let v = check_subcritical_sobolev(&zero, &LimitProbe::infinity()).unwrap();
        assert_eq!(v.label, Label::Pass);
    }

    #[test]
    fn ar_power_exp_theta_threshold() {
        // the inequality holds exactly up to theta* = 1 - (k+1)/(p+1)
        let t = power_exp(5, 2, 5.0);
        let theta_star = 1.0 - 3.0 / 6.0;
        let v = check_ar(
            &t,
            &ArParams::Sobolev { theta: 0.5 * theta_star, m: 5.0 },
            &LimitProbe::infinity(),
        )
        .unwrap();
        assert_eq!(v.label, Label::Pass, "margin {:?}", v.margin);

        let v = check_ar(
            &t,
            &ArParams::Sobolev { theta: theta_star + 0.1, m: 5.0 },
            &LimitProbe::infinity(),
        )
        .unwrap();
        assert_eq!(v.label, Label::Fail);
    }

    #[test]
    fn ar_parameter_rejection() {
        let t = power_exp(5, 2, 5.0);
        assert!(check_ar(
            &t,
            &ArParams::Sobolev { theta: 0.0, m: 5.0 },
            &LimitProbe::infinity()
        )
        .is_err());
        assert!(check_ar(
            &t,
            &ArParams::TrudingerMoser { vartheta: 2.0, r1: 0.2, r2: 0.6, z0: 1.0 },
            &LimitProbe::infinity()
        )
        .is_err());
    }

    #[test]
    fn ar_zero_f_fails_positivity() {
        let t = make_transform(4, 2, FFamily::Zero, GFamily::Const(1.0));
        let v = check_ar(
            &t,
            &ArParams::TrudingerMoser { vartheta: 4.0, r1: 0.25, r2: 0.75, z0: 1.0 },
            &LimitProbe::infinity(),
        )
        .unwrap();
        assert_eq!(v.label, Label::Fail);
        assert!(v.note.as_deref().unwrap_or("").contains("positivity"));
    }

    #[test]
    fn exp_growth_critical_family() {
        let alpha0 = 2.0 * PI;
        let t = make_transform(
            2,
            1,
            FFamily::ExpCritical { b0: 1.0, alpha0, exponent: 2.0, gamma: 0.0 },
            GFamily::Zero,
        );
        let v = exp_growth_type(&t, &LimitProbe::infinity()).unwrap();
        assert_eq!(v.label, Label::CriticalExp);
        let detected = v.limit.unwrap();
        assert!(
            (detected - alpha0).abs() < 1e-3 * alpha0,
            "alpha0 detected {detected}"
        );
    }

    #[test]
    fn exp_growth_polynomial_is_subcritical() {
        let t = make_transform(2, 1, FFamily::PowerLaw { c: 2.0, q: 3.0 }, GFamily::Zero);
        let v = exp_growth_type(&t, &LimitProbe::infinity()).unwrap();
        assert_eq!(v.label, Label::SubcriticalExp);
    }

    #[test]
    fn exp_growth_zero_f_flagged() {
        let t = make_transform(2, 1, FFamily::Zero, GFamily::Zero);
        let v = exp_growth_type(&t, &LimitProbe::infinity()).unwrap();
        assert_eq!(v.label, Label::SubcriticalExp);
        assert!(v.note.is_some());
    }

    #[test]
    fn exp_growth_requires_half_dimension() {
        let t = make_transform(5, 2, FFamily::PowerLaw { c: 1.0, q: 1.0 }, GFamily::Zero);
        assert!(exp_growth_type(&t, &LimitProbe::infinity()).is_err());
    }

    #[test]
    fn minmax_threshold_disk() {
        // n=2, k=1, alpha0 = 4π: threshold is 1/(e π)
        let t = minmax_threshold(2, 1, 4.0 * PI).unwrap();
        assert!((t - 1.0 / (std::f64::consts::E * PI)).abs() < 1e-14, "{t}");
    }

    #[test]
    fn minmax_recovers_b0_and_compares() {
        let alpha0 = 4.0 * PI;
        let threshold = minmax_threshold(2, 1, alpha0).unwrap();
        // family engineered so that the limit is exactly b0
        let b0 = 3.0 * threshold;
        let t = make_transform(
            2,
            1,
            FFamily::ExpCritical { b0, alpha0, exponent: 2.0, gamma: -1.0 },
            GFamily::Zero,
        );
        let v = minmax_check(&t, alpha0, &LimitProbe::moderate_infinity()).unwrap();
        assert_eq!(v.label, Label::Pass);
        let est = v.limit.unwrap();
        assert!((est - b0).abs() < 0.05 * b0, "b0 {est} vs {b0}");

        let small = make_transform(
            2,
            1,
            FFamily::ExpCritical { b0: 0.25 * threshold, alpha0, exponent: 2.0, gamma: -1.0 },
            GFamily::Zero,
        );
        let v = minmax_check(&small, alpha0, &LimitProbe::moderate_infinity()).unwrap();
        assert_eq!(v.label, Label::Fail);
    }

    #[test]
    fn report_for_benchmark_regime() {
        // n=5, k=2, p=5, g=1: origin passes, superlinear, subcritical, AR holds
        let t = power_exp(5, 2, 5.0);
        let mut inputs = ClassifyInputs::new(10.0);
        inputs.ar.push(ArParams::Sobolev { theta: 0.1, m: 10.0 });
        let report = full_report(&t, &inputs).unwrap();
        let get = |name: &str| {
            report
                .verdicts
                .iter()
                .find(|v| v.hypothesis.starts_with(name))
                .unwrap_or_else(|| panic!("missing verdict {name}"))
        };
        assert_eq!(get("origin-linearity").label, Label::Sublinear);
        assert_eq!(get("pair-linearity-at-infinity").label, Label::Superlinear);
        assert_eq!(get("sobolev-subcritical").label, Label::Pass);
        assert_eq!(get("ar-sobolev").label, Label::Pass);
        assert_eq!(report.k_star, Some(15.0));
    }

    #[test]
    fn verdicts_are_deterministic() {
        let t = power_exp(5, 2, 5.0);
        let a = classify_infinity(&t, 10.0, &LimitProbe::infinity()).unwrap();
        let b = classify_infinity(&t, 10.0, &LimitProbe::infinity()).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn primitive_limsup_never_exceeds_the_origin_ratio_limsup() {
        // (k+1) ∫_s^0 h / |s|^{k+1} is bounded near the origin by the
        // weighted pair ratio; check the sampled tails for several pairs
        let pairs = vec![
            power_exp(5, 2, 5.0),
            power_exp(4, 2, 3.0),
            make_transform(3, 1, FFamily::PowerLaw { c: 2.0, q: 1.0 }, GFamily::Const(0.5)),
            make_transform(4, 2, FFamily::PowerLaw { c: 1.0, q: 2.0 }, GFamily::Linear(0.3)),
        ];
        for t in pairs {
            let k = t.pair().k as f64;
            let h = t.transformed_h();
            let mut lhs_tail: f64 = f64::NEG_INFINITY;
            let mut rhs_tail: f64 = f64::NEG_INFINITY;
            for j in 10..20 {
                let s = -(0.5f64.powi(j));
                let primitive = crate::quad::integrate(
                    |tau| h.eval(0.4, tau).unwrap_or(f64::NAN),
                    s,
                    0.0,
                    1e-13,
                    1e-11,
                )
                .unwrap();
                let lhs = (k + 1.0) * primitive / (-s).powf(k + 1.0);
                let rhs = ratio_infinity(&t, 0.4, s).unwrap();
                lhs_tail = lhs_tail.max(lhs);
                rhs_tail = rhs_tail.max(rhs);
            }
            assert!(
                lhs_tail <= rhs_tail * (1.0 + 1e-6) + 1e-12,
                "limsup direction violated: {lhs_tail} vs {rhs_tail}"
            );
        }
    }
}
