//! `check`: the library's invariants at a scale that runs in seconds.

use std::io::Write;

use thermal_designs::analysis::{run_sweep, with_threads, BetaGrid, Estimator, SweepOptions};
use thermal_designs::design::{
    build_sym_projector, tensor_power, MomentAccumulator, SymBasis, DEFAULT_MEMORY_CAP,
};
use thermal_designs::ensembles::{sample_gue, Graph, SeedPolicy};
use thermal_designs::spectral::{eig_hermitian, purity_beta_derivative, purity_m, thermal_state};
use thermal_designs::{EnsembleSpec, HermitianMatrix};

use crate::error::{CliError, CliResult};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn infinite_temperature(samples: usize) -> Outcome {
    let spec = EnsembleSpec::global(2, 2, 11, samples);
    let res = run_sweep(
        &spec,
        &BetaGrid::single(0.0).unwrap(),
        &SweepOptions::new(2),
    )
    .map_err(|e| e.to_string())?;
    let row = &res.rows[0];
    let worst = [
        Estimator::TraceNorm,
        Estimator::SymOverlap,
        Estimator::Cycle,
    ]
    .iter()
    .map(|e| (row.get(*e).unwrap() - 0.375).abs())
    .fold(0.0, f64::max);
    let bound_err = (row.get(Estimator::Bound).unwrap() - (1.0 - 1.0 / 16.0)).abs();
    ensure(
        worst < 1e-10 && bound_err < 1e-12,
        format!("max deviation {worst:.1e}"),
    )
}

fn estimator_relations(samples: usize) -> Outcome {
    let spec = EnsembleSpec::local(3, 2, 2, Graph::Line, 12, samples);
    let grid = BetaGrid::from_range(0.0, 3.0, 0.5).unwrap();
    let res = run_sweep(&spec, &grid, &SweepOptions::new(2)).map_err(|e| e.to_string())?;
    let mut identity = 0.0f64;
    let mut sandwich = f64::NEG_INFINITY;
    let mut range_ok = true;
    for r in &res.rows {
        let (tn, so, cy) = (
            r.get(Estimator::TraceNorm).unwrap(),
            r.get(Estimator::SymOverlap).unwrap(),
            r.get(Estimator::Cycle).unwrap(),
        );
        identity = identity.max((so - cy).abs());
        sandwich = sandwich.max(so - tn);
        range_ok &= r
            .values
            .iter()
            .flatten()
            .all(|v| (-1e-10..=1.0).contains(v));
    }
    ensure(
        identity < 1e-10 && sandwich <= 1e-10 && range_ok,
        format!("|cycle - sym_overlap| <= {identity:.1e}, max(sym_overlap - trace_norm) = {sandwich:.1e}"),
    )
}

fn projector_algebra() -> Outcome {
    for (d, t) in [(2, 3), (3, 2), (2, 8)] {
        let p = build_sym_projector(d, t).map_err(|e| e.to_string())?;
        let basis = SymBasis::new(d, t, DEFAULT_MEMORY_CAP).map_err(|e| e.to_string())?;
        let c = basis
            .compress(p.matrix().as_mat())
            .map_err(|e| e.to_string())?;
        let dev = (0..c.dim())
            .flat_map(|i| (0..c.dim()).map(move |j| (i, j)))
            .map(|(i, j)| {
                (c.get(i, j).re - if i == j { 1.0 } else { 0.0 }).abs() + c.get(i, j).im.abs()
            })
            .fold(0.0, f64::max);
        if dev > 1e-12 || (p.matrix().trace() - p.d_sym() as f64).abs() > 1e-9 {
            return Err(format!("D={d}, t={t}: deviation {dev:.1e}"));
        }
    }
    Ok("idempotent with trace d_sym".into())
}

fn pure_states_are_symmetric() -> Outcome {
    let policy = SeedPolicy::new(13);
    for t in 1..=3 {
        let h = sample_gue(3, &mut policy.stream(t as u64, 0)).map_err(|e| e.to_string())?;
        let psi = thermal_state(&eig_hermitian(&h).map_err(|e| e.to_string())?, 1e6)
            .map_err(|e| e.to_string())?;
        let p = build_sym_projector(3, t).map_err(|e| e.to_string())?;
        let power: HermitianMatrix = tensor_power(&psi, t);
        let n = power.dim();
        let overlap: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (power.get(i, j) * p.matrix().get(j, i)).re)
            .sum();
        if (overlap - 1.0).abs() > 1e-10 {
            return Err(format!("t={t}: tr(psi^t Pi) = {overlap}"));
        }
    }
    Ok("tr(psi^t Pi) = 1".into())
}

fn purity_derivative() -> Outcome {
    let policy = SeedPolicy::new(14);
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let s = eig_hermitian(&sample_gue(6, &mut policy.stream(i, 0)).unwrap())
            .map_err(|e| e.to_string())?;
        let beta = 0.1 + 0.15 * i as f64;
        let m = 2 + (i % 4) as u32;
        let h = 1e-5;
        let fd =
            (purity_m(&s, beta + h, m).unwrap() - purity_m(&s, beta - h, m).unwrap()) / (2.0 * h);
        let an = purity_beta_derivative(&s, beta, m).map_err(|e| e.to_string())?;
        if an < -1e-12 {
            return Err(format!("negative derivative {an}"));
        }
        worst = worst.max((an - fd).abs() / fd.abs().max(1e-12));
    }
    ensure(worst <= 1e-6, format!("max relative error {worst:.1e}"))
}

fn thread_independence(samples: usize) -> Outcome {
    let spec = EnsembleSpec::global(2, 2, 15, samples);
    let grid = BetaGrid::from_range(0.0, 2.0, 0.5).unwrap();
    let opts = SweepOptions::new(2);
    let one =
        with_threads(Some(1), || run_sweep(&spec, &grid, &opts)).map_err(|e| e.to_string())?;
    let two =
        with_threads(Some(2), || run_sweep(&spec, &grid, &opts)).map_err(|e| e.to_string())?;
    ensure(
        one.map_err(|e| e.to_string())? == two.map_err(|e| e.to_string())?,
        "1 and 2 workers agree bit for bit".into(),
    )
}

fn global_monotonicity(samples: usize) -> Outcome {
    let spec = EnsembleSpec::global(2, 2, 16, samples);
    let grid = BetaGrid::from_range(0.0, 4.0, 0.25).unwrap();
    let res = run_sweep(&spec, &grid, &SweepOptions::new(2)).map_err(|e| e.to_string())?;
    let worst = res
        .rows
        .windows(2)
        .map(|w| {
            let e = Estimator::TraceNorm;
            w[1].get(e).unwrap() - w[0].get(e).unwrap() - 3.0 * w[0].stderr_of(e).unwrap()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    ensure(worst <= 0.0, format!("max excess increase {worst:.1e}"))
}

fn accumulator_paths() -> Outcome {
    let policy = SeedPolicy::new(17);
    let states: Vec<HermitianMatrix> = (0..30u64)
        .map(|i| {
            thermal_state(
                &eig_hermitian(&sample_gue(3, &mut policy.stream(i, 0)).unwrap()).unwrap(),
                0.8,
            )
            .unwrap()
        })
        .collect();
    let mut seq = MomentAccumulator::new(3, 3).map_err(|e| e.to_string())?;
    let mut batch = seq.clone();
    for s in &states {
        seq.accumulate(s).map_err(|e| e.to_string())?;
    }
    batch.accumulate_batch(&states).map_err(|e| e.to_string())?;
    let n = seq.total_dim();
    let dev = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (seq.mean()[(i, j)] - batch.mean()[(i, j)]).norm())
        .fold(0.0, f64::max);
    ensure(dev < 1e-13, format!("streaming vs batched: {dev:.1e}"))
}

/// Runs every check, printing one line each; fails if any check fails.
pub fn run_checks(samples: usize, log: &mut dyn Write) -> CliResult<()> {
    let samples = samples.max(2);
    let checks: Vec<(&str, Outcome)> = vec![
        ("infinite-temperature value", infinite_temperature(samples)),
        (
            "estimator identity and sandwich",
            estimator_relations(samples),
        ),
        ("symmetric projector", projector_algebra()),
        ("pure-state moments", pure_states_are_symmetric()),
        ("purity derivative", purity_derivative()),
        ("moment accumulator paths", accumulator_paths()),
        ("worker-count independence", thread_independence(samples)),
        ("global monotonicity", global_monotonicity(samples)),
    ];
    let mut failed = Vec::new();
    for (name, outcome) in checks {
        let _ = match &outcome {
            Ok(detail) => writeln!(log, "PASS {name}: {detail}"),
            Err(detail) => {
                failed.push(name);
                writeln!(log, "FAIL {name}: {detail}")
            }
        };
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(failed.join(", ")))
    }
}
