//! Profile exchange: the CSV schema (r, u, uprime, sk, residual) and its
//! reader, so solved profiles can be exported, re-imported and re-verified.

use crate::error::{Error, Result};

use super::{radial_sk, RadialProfile};

/// Render a profile in the fixed five-column schema. `rhs` supplies the
/// equation's right-hand side at (r, u) for the residual column; rows where
/// it returns `None` record NaN.
pub fn profile_to_csv(
    profile: &RadialProfile,
    n: usize,
    k: usize,
    mut rhs: impl FnMut(f64, f64) -> Option<f64>,
) -> String {
    let mut csv = String::from("r,u,uprime,sk,residual\n");
    for i in 0..profile.r.len() {
        let r = profile.r[i];
        let sk = radial_sk(profile.du[i], profile.d2u[i], r, n, k).unwrap_or(f64::NAN);
        let residual = match rhs(r, profile.u[i]) {
            Some(target) => (sk - target).abs() / (1.0 + target.abs()),
            None => f64::NAN,
        };
        csv.push_str(&format!(
            "{r},{},{},{sk},{residual}\n",
            profile.u[i], profile.du[i]
        ));
    }
    csv
}

/// Parse a profile written by [`profile_to_csv`]. The curvature column is not
/// part of the schema, so it is rebuilt by second-order differences of the
/// slope column; the stored residual is the max finite residual column entry.
pub fn profile_from_csv(text: &str) -> Result<RadialProfile> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::domain("profile CSV is empty"))?;
    if header.trim() != "r,u,uprime,sk,residual" {
        return Err(Error::domain(format!(
            "unexpected profile CSV header '{header}'"
        )));
    }
    let mut r = Vec::new();
    let mut u = Vec::new();
    let mut du = Vec::new();
    let mut residual = 0.0f64;
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(Error::domain(format!(
                "profile CSV row {} has {} columns, expected 5",
                lineno + 2,
                cols.len()
            )));
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| {
                Error::domain(format!(
                    "profile CSV row {}: bad {what} value '{s}'",
                    lineno + 2
                ))
            })
        };
        r.push(parse(cols[0], "radius")?);
        u.push(parse(cols[1], "u")?);
        du.push(parse(cols[2], "uprime")?);
        if let Ok(res) = parse(cols[4], "residual") {
            if res.is_finite() {
                residual = residual.max(res);
            }
        }
    }
    let m = r.len();
    if m < 4 {
        return Err(Error::domain("profile CSV needs at least 4 rows"));
    }
    let h = r[1] - r[0];
    for (i, w) in r.windows(2).enumerate() {
        if (w[1] - w[0] - h).abs() > 1e-9 * (1.0 + h) {
            return Err(Error::domain(format!(
                "profile CSV grid is not uniform near row {}",
                i + 2
            )));
        }
    }
    let mut d2u = vec![0.0; m];
    for i in 0..m {
        d2u[i] = if i == 0 {
            (-3.0 * du[0] + 4.0 * du[1] - du[2]) / (2.0 * h)
        } else if i == m - 1 {
            (3.0 * du[m - 1] - 4.0 * du[m - 2] + du[m - 3]) / (2.0 * h)
        } else {
            (du[i + 1] - du[i - 1]) / (2.0 * h)
        };
    }
    let profile = RadialProfile {
        center: u[0],
        r,
        u,
        du,
        d2u,
        residual,
    };
    profile.assert_invariants()?;
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minors::binomial;
    use crate::radial::{solve_dirichlet, RadialProblem};

    #[test]
    fn round_trip_preserves_the_profile() {
        let c = binomial(4, 2);
        let problem = RadialProblem::new(4, 2, move |_, _| Ok(c))
            .unwrap()
            .with_grid(128)
            .unwrap();
        let solved = solve_dirichlet(&problem).unwrap();
        let csv = profile_to_csv(&solved, 4, 2, |_, _| Some(c));
        let imported = profile_from_csv(&csv).unwrap();
        assert_eq!(imported.r.len(), solved.r.len());
        for i in 0..solved.r.len() {
            assert!((imported.u[i] - solved.u[i]).abs() < 1e-12);
            assert!((imported.du[i] - solved.du[i]).abs() < 1e-12);
            // curvature is rebuilt by differences: second-order accurate
            assert!(
                (imported.d2u[i] - solved.d2u[i]).abs() < 1e-3,
                "row {i}: {} vs {}",
                imported.d2u[i],
                solved.d2u[i]
            );
        }
        // the residual column of an exact-forcing solve stays tiny
        assert!(imported.residual < 1e-7);
    }

    #[test]
    fn reimported_profile_re_verifies() {
        use crate::radial::{equation_residual, CollocationSettings};
        use crate::transform::{FFamily, GFamily, GrowthPair, Transform};
        let pair = GrowthPair::new(
            3,
            1,
            FFamily::PowerExp { p: 2.0, k: 1 },
            GFamily::Const(1.0),
        )
        .unwrap();
        let t = Transform::with_defaults(pair).unwrap();
        let result = crate::radial::solve_transformed_and_map(
            &t,
            512,
            crate::radial::SolveBranch::Auto,
            &CollocationSettings::default(),
        )
        .unwrap();
        let csv = profile_to_csv(&result.u, 3, 1, |_, _| None);
        let imported = profile_from_csv(&csv).unwrap();
        let report =
            equation_residual(&t, &imported, &CollocationSettings::default()).unwrap();
        assert!(
            report.max_residual < 1e-4,
            "re-verification residual {}",
            report.max_residual
        );
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(profile_from_csv("").is_err());
        assert!(profile_from_csv("wrong,header\n").is_err());
        assert!(profile_from_csv("r,u,uprime,sk,residual\n0,0,0\n").is_err());
        assert!(profile_from_csv("r,u,uprime,sk,residual\n0,zero,0,0,0\n").is_err());
    }
}
