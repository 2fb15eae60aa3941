//! The four subcommands. Each writes its files under `out` and returns the
//! text to print.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use condldp::conditional::{
    build_conditioning_set, check_infimum_consistency, conditional_free_energy, conditional_marginal_rate,
    conditional_rate, inf_rate_on_set, slice_free_energy, solve_tilt, verify_duality, ConsistencyStatus, RateSource,
    DEFAULT_TILT_TOL,
};
use condldp::empirics::{canonical_expectation, convergence_sweep, sandwich_check, SweepOptions, SweepResult};
use condldp::{ConditioningSet, Extended, Grid, JointModel, ScalarField, TiltSolution};

use crate::config::{GridSpec, RunConfig};
use crate::csv::{self, Table};
use crate::error::CliError;
use crate::report::{self, Metadata, ReportRecord, ARTIFACT_VERSION};

/// Points per axis of the fallback grids.
pub const DEFAULT_POINTS: usize = 512;

fn write(out: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Config(format!("cannot create {}: {e}", out.display())))?;
    let path = out.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Dyadic grid with `points` nodes on roughly `[-4, 4)` that contains 0.
pub fn centred_axis(points: usize) -> (f64, f64) {
    let half = (points / 2) as f64;
    let step = (0.5_f64).powi((half / 4.0).log2().floor() as i32);
    let lower = -step * half;
    (lower, lower + step * (points - 1) as f64)
}

fn centred_grid(dim: usize, points: usize) -> Result<Grid, CliError> {
    let (lo, hi) = centred_axis(points);
    GridSpec {
        lower: vec![lo; dim],
        upper: vec![hi; dim],
        points: vec![points; dim],
    }
    .build()
}

fn state_grid(cfg: &RunConfig, model: &JointModel) -> Result<Grid, CliError> {
    match cfg.grid()? {
        Some(g) => Ok(g),
        None => centred_grid(model.dim(), DEFAULT_POINTS),
    }
}

fn y_grid(grid: &Grid, model: &JointModel) -> Result<Option<Grid>, CliError> {
    if model.y_dim() == 0 {
        return Ok(None);
    }
    Ok(Some(Grid::new(grid.axes()[model.x_dim()..].to_vec())?))
}

fn lambda_grid(cfg: &RunConfig, y: &Grid) -> Result<Grid, CliError> {
    match &cfg.lambda_grid {
        Some(spec) => spec.build(),
        None => centred_grid(y.dim(), y.axis(0).points),
    }
}

fn names(prefix: &str, dim: usize) -> Vec<String> {
    if dim == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=dim).map(|k| format!("{prefix}{k}")).collect()
    }
}

fn tabulate(grid: Option<&Grid>, field: &ScalarField, columns: Vec<String>, value: &str) -> String {
    let mut header = columns;
    header.push(value.to_string());
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = Table::new(&refs);
    match grid {
        Some(g) => {
            for p in g.points() {
                let v = field.eval(&p);
                t.row(p.iter().map(|&x| csv::float(x)).chain([csv::extended(v)]));
            }
        }
        None => t.row([csv::extended(field.eval(&[]))]),
    }
    t.finish()
}

fn tilt_of(cfg: &RunConfig, model: &JointModel) -> Result<TiltSolution, CliError> {
    Ok(solve_tilt(&model.free_energy(), &cfg.x0, DEFAULT_TILT_TOL)?)
}

fn vector(v: &[f64]) -> String {
    let cells: Vec<String> = v.iter().map(|x| csv::float(*x)).collect();
    format!("[{}]", cells.join(", "))
}

pub fn tilt(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let model = cfg.model()?;
    let t = tilt_of(cfg, &model)?;
    write(out, &cfg.outputs.tilt, &report::to_json(&t))?;
    let mut s = String::new();
    let rows = [
        ("model", model.name().to_string()),
        ("x0", vector(&t.x0)),
        ("lambda0", vector(&t.lambda0)),
        ("y0", vector(&t.y0)),
        ("inf I(B)", csv::float(t.min_rate)),
        ("residual", csv::float(t.residual)),
        ("iterations", t.iterations.to_string()),
    ];
    for (k, v) in rows {
        let _ = writeln!(s, "{k:<12}{v}");
    }
    Ok(s)
}

struct Conditioned {
    model: JointModel,
    tilt: TiltSolution,
    set: ConditioningSet,
    grid: Grid,
    y_grid: Option<Grid>,
    i_x0: ScalarField,
    psi_x0: ScalarField,
}

fn conditioned(cfg: &RunConfig) -> Result<Conditioned, CliError> {
    let model = cfg.model()?;
    let tilt = tilt_of(cfg, &model)?;
    let set = build_conditioning_set(&tilt.lambda0, &tilt.x0, cfg.delta)?;
    let grid = state_grid(cfg, &model)?;
    let y_grid = y_grid(&grid, &model)?;
    let psi = model.free_energy();
    let rate = model.rate_function();
    let i_x0 = conditional_marginal_rate(&psi, &tilt, RateSource::ClosedForm(&rate))?.field;
    let psi_x0 = conditional_free_energy(&psi, &tilt.lambda0)?;
    Ok(Conditioned {
        model,
        tilt,
        set,
        grid,
        y_grid,
        i_x0,
        psi_x0,
    })
}

pub fn condition(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let c = conditioned(cfg)?;
    let rate = c.model.rate_function();
    let inf = inf_rate_on_set(&rate, &c.set, &c.grid, Some(&c.tilt))?;
    let i_b = conditional_rate(&rate, &c.set, inf.value)?.to_field();

    let mut state_cols = names("x", c.model.x_dim());
    state_cols.extend(names("y", c.model.y_dim()));
    let dy = c.model.y_dim();
    let lambdas = c.y_grid.as_ref().map(|y| lambda_grid(cfg, y)).transpose()?;

    let files = [
        (&cfg.outputs.conditional_rate, tabulate(Some(&c.grid), &i_b, state_cols, "i_b")),
        (
            &cfg.outputs.marginal_rate,
            tabulate(c.y_grid.as_ref(), &c.i_x0, names("y", dy), "i_x0"),
        ),
        (
            &cfg.outputs.free_energy,
            tabulate(lambdas.as_ref(), &c.psi_x0, names("lambda", dy), "psi_x0"),
        ),
    ];
    let mut s = String::new();
    for (name, text) in files {
        write(out, name, &text)?;
        let _ = writeln!(s, "wrote {} ({} rows)", name, text.lines().count() - 1);
    }
    let _ = writeln!(s, "inf I(B) on grid: {}", csv::extended(inf.value));
    Ok(s)
}

fn run_sweep(cfg: &RunConfig, model: &JointModel, set: &ConditioningSet, grid: &Grid) -> Result<SweepResult, CliError> {
    let options = SweepOptions {
        epsilon: cfg.epsilon,
        radius: cfg.radius,
        grid: Some(grid.clone()),
    };
    Ok(convergence_sweep(
        model,
        &cfg.ns,
        &cfg.event()?,
        set,
        cfg.method,
        cfg.seed,
        cfg.replicas,
        &options,
    )?)
}

fn checked_n(cfg: &RunConfig, n: u64) -> bool {
    cfg.sandwich_from_n.is_none_or(|from| n >= from)
}

fn sweep_table(sweep: &SweepResult) -> String {
    let mut t = Table::new(&["n", "estimate", "stderr", "target"]);
    for e in &sweep.estimates {
        t.row([
            e.n.to_string(),
            csv::log_value(e.estimate),
            csv::float(e.stderr),
            csv::log_value(sweep.target),
        ]);
    }
    t.finish()
}

pub fn sweep(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let model = cfg.model()?;
    let tilt = tilt_of(cfg, &model)?;
    let set = build_conditioning_set(&tilt.lambda0, &tilt.x0, cfg.delta)?;
    let grid = state_grid(cfg, &model)?;
    let result = run_sweep(cfg, &model, &set, &grid)?;
    let table = sweep_table(&result);
    write(out, &cfg.outputs.sweep_csv, &table)?;
    let failed: Vec<String> = result
        .ns
        .iter()
        .zip(&result.verdicts)
        .filter(|(n, v)| checked_n(cfg, **n) && !v.pass)
        .map(|(n, _)| format!("sandwich at n={n}"))
        .collect();
    if !failed.is_empty() {
        return Err(CliError::Verification(failed));
    }
    Ok(table)
}

/// Runs every check and writes the report; verdict failures surface as
/// [`CliError::Verification`] after the report is on disk.
pub fn verify(cfg: &RunConfig, out: &Path) -> Result<(String, ReportRecord), CliError> {
    let c = conditioned(cfg)?;
    let rate = c.model.rate_function();
    let set_infimum = inf_rate_on_set(&rate, &c.set, &c.grid, Some(&c.tilt))?;
    let event = condldp::ConditioningSet::new(cfg.event.clone())?;
    let consistency = check_infimum_consistency(&rate, &event, &c.set, &c.grid)?;

    let (duality, slice_duality) = match &c.y_grid {
        Some(y) => {
            let l = lambda_grid(cfg, y)?;
            let slice = slice_free_energy(&c.model.free_energy(), &c.tilt);
            (
                verify_duality(&c.psi_x0, &c.i_x0, Some((&l, y)))?,
                Some(verify_duality(&slice, &c.i_x0, Some((&l, y)))?),
            )
        }
        None => (verify_duality(&c.psi_x0, &c.i_x0, None)?, None),
    };

    let sweep = run_sweep(cfg, &c.model, &c.set, &c.grid)?;

    let canonical = match (&cfg.canonical, c.model.y_dim()) {
        (Some(spec), dy) if dy > 0 => Some(canonical_expectation(
            &c.model,
            spec.n,
            &c.tilt.lambda0,
            cfg.seed,
            spec.replicas,
        )?),
        _ => None,
    };

    let expected_verdicts = cfg.expected_rate.map(|r| {
        let r = Extended::Finite(r);
        sweep
            .estimates
            .iter()
            .map(|e| sandwich_check(e, r, r, cfg.epsilon))
            .collect::<Vec<_>>()
    });

    let mut checks = std::collections::BTreeMap::new();
    checks.insert("tilt_residual".to_string(), c.tilt.residual <= DEFAULT_TILT_TOL);
    checks.insert("inf_on_set".to_string(), set_infimum.agrees != Some(false));
    checks.insert(
        "infimum_consistency".to_string(),
        consistency.status == ConsistencyStatus::Pass,
    );
    checks.insert(
        "duality".to_string(),
        duality.max_defect <= Extended::Finite(cfg.duality_tolerance),
    );
    let sandwich = |verdicts: &[condldp::empirics::Verdict]| {
        sweep
            .ns
            .iter()
            .zip(verdicts)
            .all(|(n, v)| !checked_n(cfg, *n) || v.pass)
    };
    checks.insert("sandwich".to_string(), sandwich(&sweep.verdicts));
    if let Some(v) = &expected_verdicts {
        checks.insert("expected_rate".to_string(), sandwich(v));
    }
    if let Some(ce) = &canonical {
        let ok = ce
            .mean
            .iter()
            .zip(&ce.stderr)
            .zip(&c.tilt.y0)
            .all(|((m, se), y0)| (m - y0).abs() <= 4.0 * se);
        checks.insert("canonical_expectation".to_string(), ok);
    }
    let pass = checks.values().all(|ok| *ok);

    let record = ReportRecord {
        metadata: Metadata {
            config_hash: cfg.hash(),
            version: ARTIFACT_VERSION,
            command: "verify",
        },
        tilt: c.tilt,
        set_infimum,
        consistency,
        sweep,
        duality,
        slice_duality,
        canonical,
        expected_verdicts,
        checks,
        pass,
    };
    write(out, &cfg.outputs.report, &report::to_json(&record))?;

    let mut s = String::new();
    for (k, ok) in &record.checks {
        let _ = writeln!(s, "{:<22}{}", k, if *ok { "pass" } else { "FAIL" });
    }
    if !record.pass {
        return Err(CliError::Verification(record.failed_checks()));
    }
    Ok((s, record))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centred_axis_is_dyadic_through_zero() {
        assert_eq!(centred_axis(512), (-4.0, 3.984375));
        assert_eq!(centred_axis(256), (-4.0, 3.96875));
        let (lo, hi) = centred_axis(100);
        let g = Grid::line(lo, hi, 100).unwrap();
        assert!(g.axis(0).node_of(0.0).is_some());
    }

    #[test]
    fn column_names() {
        assert_eq!(names("x", 1), ["x"]);
        assert_eq!(names("y", 2), ["y1", "y2"]);
        assert!(names("y", 0).is_empty());
    }
}
