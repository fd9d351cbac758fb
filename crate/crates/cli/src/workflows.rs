//! The six computational workflows and their artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use hessian_kk_core::classify::{self, ClassifyInputs, LimitProbe};
use hessian_kk_core::field::identity_suite;
use hessian_kk_core::pohozaev::{nonexistence_scan, NonexistenceDensity};
use hessian_kk_core::radial::{
    big_lambda1, big_lambda1_shooting, lambda1_ball, lambda1_shooting, profile_to_csv,
    profile_to_map, solve_transformed_and_map,
};
use hessian_kk_core::transform::Transform;

use crate::config::{runtime_error, CliError, Config};

pub struct RunOutput {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

fn write_text(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content).map_err(|e| CliError {
        code: 3,
        message: format!("writing {}: {e}", path.display()),
    })
}

/// Wrap a workflow result with the resolved configuration so every report is
/// self-describing, then write it.
fn write_report<T: Serialize>(
    out_dir: &Path,
    workflow: &str,
    config: &Config,
    result: &T,
) -> Result<PathBuf, CliError> {
    let envelope = json!({
        "workflow": workflow,
        "seed": config.seed,
        "config": serde_json::to_value(config).expect("config serializes"),
        "result": serde_json::to_value(result).expect("result serializes"),
    });
    let path = out_dir.join(format!("{workflow}.json"));
    let mut text = serde_json::to_string_pretty(&envelope).expect("report serializes");
    text.push('\n');
    write_text(&path, &text)?;
    Ok(path)
}

fn build_transform(config: &Config) -> Result<Arc<Transform>, CliError> {
    let pair = config.growth_pair()?;
    Transform::new(pair, config.transform_settings()).map_err(runtime_error)
}

fn infinity_probe(config: &Config) -> LimitProbe {
    config.probe.to_probe(None)
}

/// λ₁ for the classifier: user override or the inverse-iteration value.
fn resolve_lambda1(config: &Config) -> Result<(f64, &'static str), CliError> {
    if let Some(l) = config.lambda1 {
        if l <= 0.0 || !l.is_finite() {
            return Err(CliError::validation("lambda1 override must be positive"));
        }
        return Ok((l, "user"));
    }
    let result =
        lambda1_ball(config.n, config.k, config.eigen.grid()).map_err(runtime_error)?;
    Ok((result.lambda, "radial-solver"))
}

fn resolve_big_lambda1(config: &Config) -> Result<Option<(f64, &'static str)>, CliError> {
    if let Some(l) = config.big_lambda1 {
        if l <= 0.0 || !l.is_finite() {
            return Err(CliError::validation("big_lambda1 override must be positive"));
        }
        return Ok(Some((l, "user")));
    }
    if 2 * config.k == config.n {
        let result = big_lambda1(config.n, config.k, config.eigen.quotient_grid())
            .map_err(runtime_error)?;
        return Ok(Some((result.lambda, "radial-solver")));
    }
    Ok(None)
}

pub fn run_verify_identity(config: &Config, out_dir: &Path) -> Result<RunOutput, CliError> {
    let report = identity_suite(
        config.seed,
        config.identity.cases,
        config.identity.tolerance,
    )
    .map_err(runtime_error)?;
    let path = write_report(out_dir, "verify-identity", config, &report)?;
    let summary = format!(
        "verify-identity: {} cases, max residual {:.3e}, {}",
        report.cases,
        report.max_residual,
        if report.all_passed { "all passed" } else { "FAILURES" }
    );
    if !report.all_passed {
        return Err(CliError {
            code: 3,
            message: format!("{} identity cases exceeded the tolerance", report.failures.len()),
        });
    }
    Ok(RunOutput {
        summary,
        files: vec![path],
    })
}

pub fn run_transform(config: &Config, out_dir: &Path) -> Result<RunOutput, CliError> {
    let t = build_transform(config)?;
    let h = t.transformed_h();
    let ladder = config.tables.ladder()?;
    let mut files = Vec::new();

    let table = |name: &str, eval: &mut dyn FnMut(f64) -> Option<f64>| -> Result<PathBuf, CliError> {
        let mut csv = String::from("z,value\n");
        for &z in &ladder {
            if let Some(v) = eval(z) {
                csv.push_str(&format!("{z},{v}\n"));
            }
        }
        let path = out_dir.join(format!("{name}.csv"));
        write_text(&path, &csv)?;
        Ok(path)
    };

    files.push(table("big_g", &mut |z| t.big_g(z).ok())?);
    files.push(table("a_g", &mut |z| t.a_g(z).ok())?);
    files.push(table("a_g_inv", &mut |v| t.a_g_inv(v).ok())?);
    let shell = 0.5;
    files.push(table("h", &mut |v| h.eval(shell, v).ok())?);

    let result = json!({
        "reachable_s": t.reachable_s(),
        "table_grid": { "z_min": config.tables.z_min, "z_max": config.tables.z_max,
                         "points": config.tables.points },
        "h_shell_radius": shell,
        "tables": ["big_g.csv", "a_g.csv", "a_g_inv.csv", "h.csv"],
    });
    files.insert(0, write_report(out_dir, "transform", config, &result)?);
    Ok(RunOutput {
        summary: format!(
            "transform: tabulated G, A_g, A_g^-1 and h on {} points into {}",
            ladder.len(),
            out_dir.display()
        ),
        files,
    })
}

pub fn run_classify(config: &Config, out_dir: &Path) -> Result<RunOutput, CliError> {
    let t = build_transform(config)?;
    let (lambda1, lambda1_source) = resolve_lambda1(config)?;
    let big = resolve_big_lambda1(config)?;
    let mut inputs = ClassifyInputs::new(lambda1);
    inputs.big_lambda1 = big.map(|(v, _)| v);
    inputs.alpha0 = config.alpha0;
    inputs.ar = config.ar.iter().map(|a| a.to_params()).collect();
    inputs.infinity_probe = infinity_probe(config);
    inputs.origin_probe = config.probe.to_probe(None);
    inputs.minmax_probe = config.probe.to_probe(Some(14));
    let report = classify::full_report(&t, &inputs).map_err(runtime_error)?;

    let result = json!({
        "lambda1_source": lambda1_source,
        "big_lambda1_source": big.map(|(_, s)| s),
        "report": serde_json::to_value(&report).expect("report serializes"),
    });
    let path = write_report(out_dir, "classify", config, &result)?;
    let mut lines = Vec::new();
    for v in &report.verdicts {
        lines.push(format!("  {}: {:?}", v.hypothesis, v.label));
    }
    Ok(RunOutput {
        summary: format!(
            "classify: lambda1 = {lambda1:.6} ({lambda1_source})\n{}",
            lines.join("\n")
        ),
        files: vec![path],
    })
}

pub fn run_solve(config: &Config, out_dir: &Path) -> Result<RunOutput, CliError> {
    let t = build_transform(config)?;
    let settings = config.collocation.to_settings(config.seed)?;
    let branch = config.solver.to_branch()?;
    let result = solve_transformed_and_map(&t, config.solver.grid, branch, &settings)
        .map_err(runtime_error)?;

    let h = t.transformed_h();
    let v_csv = profile_to_csv(&result.v, config.n, config.k, |r, v| h.eval(r, v).ok());
    // for the mapped profile the right-hand side includes the gradient term;
    // evaluate it through the full-matrix operators at one off-axis direction
    let pair = t.pair();
    let u_map = profile_to_map(&result.u).map_err(runtime_error)?;
    let field = hessian_kk_core::field::radial_field(&u_map, config.n);
    let u_csv = profile_to_csv(&result.u, config.n, config.k, |r, u| {
        if !(0.01..1.0).contains(&r) {
            return None;
        }
        let mut x = vec![0.0; config.n];
        let scale = r / (config.n as f64).sqrt();
        for xi in x.iter_mut() {
            *xi = scale;
        }
        match (field.hk(&x, config.k), pair.g.eval(u), pair.f.eval(r, u)) {
            (Ok(hk_x), Ok(gv), Ok(fv)) => Some(gv * hk_x + fv),
            _ => None,
        }
    });
    let v_path = out_dir.join("v_profile.csv");
    write_text(&v_path, &v_csv)?;
    let u_path = out_dir.join("u_profile.csv");
    write_text(&u_path, &u_csv)?;

    let report = json!({
        "transformed_center": result.v.center,
        "original_center": result.u.center,
        "transformed_residual": result.v.residual,
        "equation_residual": serde_json::to_value(&result.report).expect("serializes"),
        "profiles": ["v_profile.csv", "u_profile.csv"],
        "grid": config.solver.grid,
    });
    let path = write_report(out_dir, "solve", config, &report)?;
    Ok(RunOutput {
        summary: format!(
            "solve: centers v(0) = {:.6}, u(0) = {:.6}; original-equation residual {:.3e}",
            result.v.center, result.u.center, result.report.max_residual
        ),
        files: vec![path, v_path, u_path],
    })
}

pub fn run_eigen(config: &Config, out_dir: &Path) -> Result<RunOutput, CliError> {
    let iterated = lambda1_ball(config.n, config.k, config.eigen.grid()).map_err(runtime_error)?;
    let shot = lambda1_shooting(config.n, config.k, config.eigen.shooting_step)
        .map_err(runtime_error)?;
    let quotient = big_lambda1(config.n, config.k, config.eigen.quotient_grid())
        .map_err(runtime_error)?;
    let quotient_shot = big_lambda1_shooting(config.n, config.k, config.eigen.shooting_step)
        .map_err(runtime_error)?;

    let result = json!({
        "lambda1": {
            "inverse_iteration": iterated.lambda,
            "shooting": shot.lambda,
            "relative_gap": (iterated.lambda - shot.lambda).abs() / shot.lambda,
            "iteration_history": iterated.history,
        },
        "big_lambda1": {
            "quotient_minimization": quotient.lambda,
            "euler_lagrange_shooting": quotient_shot.lambda,
            "relative_gap": (quotient.lambda - quotient_shot.lambda).abs() / quotient_shot.lambda,
            "descent_history_len": quotient.history.len(),
            "descent_first_last": [quotient.history.first(), quotient.history.last()],
        },
    });
    let path = write_report(out_dir, "eigen", config, &result)?;
    Ok(RunOutput {
        summary: format!(
            "eigen: lambda1 = {:.6} (shooting {:.6}); variational constant = {:.6} (shooting {:.6})",
            iterated.lambda, shot.lambda, quotient.lambda, quotient_shot.lambda
        ),
        files: vec![path],
    })
}

pub fn run_pohozaev(config: &Config, out_dir: &Path) -> Result<RunOutput, CliError> {
    let t = build_transform(config)?;
    let density = NonexistenceDensity::from_transform(&t).map_err(runtime_error)?;
    let grid = config.scan.to_grid();
    let report = nonexistence_scan(&density, &grid).map_err(runtime_error)?;

    let mut files = Vec::new();
    if config.scan.csv {
        let mut csv = String::from("z,r,density,normalized\n");
        for s in &report.samples {
            csv.push_str(&format!("{},{},{},{}\n", s.z, s.r, s.density, s.normalized));
        }
        let path = out_dir.join("density.csv");
        write_text(&path, &csv)?;
        files.push(path);
    }
    let path = write_report(out_dir, "pohozaev", config, &report)?;
    files.insert(0, path);
    Ok(RunOutput {
        summary: format!(
            "pohozaev: verdict {:?}, min normalized density {:.3e} at (r, z) = ({:.3}, {:.4})",
            report.label, report.min_normalized, report.min_at.0, report.min_at.1
        ),
        files,
    })
}

pub fn dispatch(workflow: &str, config: &Config, out_dir: &Path) -> Result<RunOutput, CliError> {
    match workflow {
        "verify-identity" => run_verify_identity(config, out_dir),
        "transform" => run_transform(config, out_dir),
        "classify" => run_classify(config, out_dir),
        "solve" => run_solve(config, out_dir),
        "eigen" => run_eigen(config, out_dir),
        "pohozaev" => run_pohozaev(config, out_dir),
        other => Err(CliError::validation(format!("unknown workflow '{other}'"))),
    }
}
