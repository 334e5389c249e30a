use std::io::Write;
use std::path::Path;

use thermal_designs::analysis::{
    check_feasible, dos_diagnostics, estimate_beta_c, numeric_derivative, run_sweep, with_threads,
    Estimator, KinkEstimate, SweepOptions, SweepResult, ThresholdSolver, DEFAULT_BLOCKS,
};
use thermal_designs::design::sym_dimension;

use crate::config::RunConfig;
use crate::csvio::{
    self, curve_from_table, curve_rows, DOS_HEADER, SWEEP_HEADER, THRESHOLD_HEADER,
};
use crate::error::{CliError, CliResult};

fn ensure_parent_exists(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(CliError::io(
            path,
            std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "parent directory does not exist",
            ),
        )),
        _ => Ok(()),
    }
}

/// One line per estimator saying whether it can run for `(D, t)`.
pub fn feasibility_report(
    dim: usize,
    t: usize,
    cap: usize,
) -> Vec<(Estimator, Result<(), String>)> {
    Estimator::ALL
        .into_iter()
        .map(|e| {
            (
                e,
                check_feasible(e, dim, t, cap).map_err(|err| err.to_string()),
            )
        })
        .collect()
}

fn provenance_lines(cfg: &RunConfig) -> Vec<String> {
    vec![
        format!("config: {}", cfg.provenance_json()),
        format!("seed: {}", cfg.ensemble.seed),
    ]
}

/// Resolves the estimator list, reporting feasibility to `log`; fails before
/// any sampling when a requested estimator cannot run.
fn plan_estimators(cfg: &RunConfig, t: usize, log: &mut dyn Write) -> CliResult<Vec<Estimator>> {
    let dim = cfg.ensemble.dim()?;
    let report = feasibility_report(dim, t, cfg.memory_cap);
    for (e, status) in &report {
        let _ = match status {
            Ok(()) => writeln!(log, "estimator {e}: feasible for D={dim}, t={t}"),
            Err(why) => writeln!(log, "estimator {e}: not feasible ({why})"),
        };
    }
    let chosen: Vec<Estimator> = match &cfg.estimators {
        Some(list) => {
            for e in list {
                check_feasible(*e, dim, t, cfg.memory_cap)?;
            }
            let mut list = list.clone();
            list.sort();
            list.dedup();
            list
        }
        None => report
            .iter()
            .filter(|(_, s)| s.is_ok())
            .map(|(e, _)| *e)
            .collect(),
    };
    if chosen.is_empty() {
        return Err(CliError::Config("no estimators requested".into()));
    }
    Ok(chosen)
}

pub fn sweep_result(cfg: &RunConfig, log: &mut dyn Write) -> CliResult<SweepResult> {
    let t = cfg.require_t()?;
    let grid = cfg
        .beta_grid
        .ok_or_else(|| CliError::Config("config is missing beta_grid".into()))?
        .grid()?;
    if grid.is_empty() {
        return Err(CliError::Config("beta grid is empty".into()));
    }
    let estimators = plan_estimators(cfg, t, log)?;
    let opts = SweepOptions::new(t)
        .with_estimators(&estimators)
        .with_memory_cap(cfg.memory_cap);
    Ok(with_threads(cfg.threads, || {
        run_sweep(&cfg.ensemble, &grid, &opts)
    })??)
}

pub fn sweep_metadata(cfg: &RunConfig, res: &SweepResult) -> CliResult<Vec<String>> {
    let dim = cfg.ensemble.dim()?;
    let mut meta = provenance_lines(cfg);
    meta.push(format!("dimension: {dim}"));
    meta.push(format!("d_sym: {}", sym_dimension(dim, res.t)));
    meta.push(format!(
        "estimators: {}",
        res.estimators
            .iter()
            .map(|e| e.name())
            .collect::<Vec<_>>()
            .join(" ")
    ));
    meta.push(format!(
        "stderr: block jackknife ({} blocks) of {}",
        cfg.ensemble.samples.min(DEFAULT_BLOCKS),
        res.estimators[0]
    ));
    Ok(meta)
}

pub fn sweep(cfg: &RunConfig, log: &mut dyn Write) -> CliResult<()> {
    let out = cfg.output()?;
    ensure_parent_exists(out)?;
    let res = sweep_result(cfg, log)?;
    let rows = curve_rows(&res.to_curve());
    csvio::write_table(out, &SWEEP_HEADER, &rows, &sweep_metadata(cfg, &res)?)?;
    let _ = writeln!(log, "wrote {} rows to {}", rows.len(), out.display());
    Ok(())
}

fn kink_lines(column: Estimator, k: &KinkEstimate) -> Vec<String> {
    vec![
        format!("kink_column: {column}"),
        format!("kink_beta_c: {:?}", k.beta_c),
        format!("kink_fit_residual: {:?}", k.fit_quality),
        format!("kink_below_exponent: {:?}", k.below_exponent),
        format!("kink_quadratic_coefficient: {:?}", k.quadratic_coefficient),
        format!("kink_above_rate: {:?}", k.above_rate),
        format!("kink_above_amplitude: {:?}", k.above_amplitude),
        format!("kink_above_offset: {:?}", k.above_offset),
    ]
}

pub fn derivative(input: &Path, output: &Path, log: &mut dyn Write) -> CliResult<()> {
    ensure_parent_exists(output)?;
    let table = csvio::read_table(input, &SWEEP_HEADER)?;
    let curve = curve_from_table(input, &table)?;
    let deriv = numeric_derivative(&curve).map_err(|e| match e {
        thermal_designs::Error::InvalidGrid(m) => CliError::Parse {
            path: input.to_path_buf(),
            line: table.lines.last().copied().unwrap_or(1),
            message: m,
        },
        other => other.into(),
    })?;
    let mut meta: Vec<String> = table.metadata.clone();
    meta.push("derivative: central differences, second-order one-sided at the ends".into());
    match deriv.primary() {
        Some(col) => {
            match estimate_beta_c(&deriv.betas, deriv.column(col).expect("primary exists")) {
                Ok(k) => {
                    let _ = writeln!(log, "kink from {col}: beta_c = {}", k.beta_c);
                    meta.extend(kink_lines(col, &k));
                }
                Err(e) => meta.push(format!("kink: unavailable ({e})")),
            }
        }
        None => meta.push("kink: unavailable (no estimator columns)".into()),
    }
    csvio::write_table(output, &SWEEP_HEADER, &curve_rows(&deriv), &meta)
}

pub fn threshold(
    cfg: &RunConfig,
    ts: &[usize],
    epsilons: &[f64],
    log: &mut dyn Write,
) -> CliResult<()> {
    let out = cfg.output()?;
    ensure_parent_exists(out)?;
    if ts.is_empty() || epsilons.is_empty() {
        return Err(CliError::Config(
            "need at least one t and one epsilon".into(),
        ));
    }
    let rows = with_threads(cfg.threads, || -> CliResult<Vec<Vec<Option<f64>>>> {
        let solver = ThresholdSolver::new(&cfg.ensemble)?;
        let mut rows = Vec::new();
        for &t in ts {
            for &eps in epsilons {
                let th = solver.solve(t, eps)?;
                rows.push(vec![
                    Some(t as f64),
                    Some(eps),
                    Some(th.beta_star),
                    Some(th.temperature),
                ]);
            }
        }
        Ok(rows)
    })??;
    let mut meta = provenance_lines(cfg);
    meta.push("objective: ground-state bound 1 - E[p0^t] on a frozen sample set".into());
    csvio::write_table(out, &THRESHOLD_HEADER, &rows, &meta)?;
    let _ = writeln!(log, "wrote {} rows to {}", rows.len(), out.display());
    Ok(())
}

pub fn dos(cfg: &RunConfig, bins: usize, log: &mut dyn Write) -> CliResult<()> {
    let out = cfg.output()?;
    ensure_parent_exists(out)?;
    let d = with_threads(cfg.threads, || dos_diagnostics(&cfg.ensemble, bins))??;
    let rows: Vec<Vec<Option<f64>>> = (0..d.bin_centers.len())
        .map(|i| {
            vec![
                Some(d.bin_centers[i]),
                Some(d.density[i]),
                Some(d.reference_density[i]),
            ]
        })
        .collect();
    let mut meta = provenance_lines(cfg);
    meta.push(format!(
        "reference: {}",
        serde_json::to_value(d.reference)
            .expect("serializes")
            .as_str()
            .unwrap_or("")
    ));
    meta.push(format!("excess_kurtosis: {:?}", d.excess_kurtosis));
    meta.push(format!("sup_deviation: {:?}", d.sup_deviation));
    meta.push(format!("mean: {:?}", d.mean));
    meta.push(format!("variance: {:?}", d.variance));
    csvio::write_table(out, &DOS_HEADER, &rows, &meta)?;
    let _ = writeln!(
        log,
        "excess kurtosis {:.4}, wrote {} bins to {}",
        d.excess_kurtosis,
        rows.len(),
        out.display()
    );
    Ok(())
}
