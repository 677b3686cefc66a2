use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use std::sync::Arc;

use acidfront::forward::{reaction_step, solve_direct_detailed};
use acidfront::inverse::{add_noise, minimize, recovery_experiment, ExperimentSetup};
use acidfront::io::{read_schedule, read_u3_series, write_schedule, write_trajectory, Manifest};
use acidfront::parallel::with_workers;
use acidfront::{make_uniform_mesh, Error, NodalField, Result};

use crate::config::RunConfig;

/// Creates `<out>/<command>-<unix seconds>-<pid>[-k]`, never reusing a name.
fn run_dir(out: &Path, command: &str) -> Result<PathBuf> {
    fs::create_dir_all(out)?;
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let pid = std::process::id();
    for k in 0.. {
        let name = if k == 0 {
            format!("{command}-{secs}-{pid}")
        } else {
            format!("{command}-{secs}-{pid}-{k}")
        };
        let dir = out.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    unreachable!()
}

fn setup(cfg: &RunConfig) -> ExperimentSetup {
    ExperimentSetup {
        params: cfg.params,
        config: cfg.solver.clone(),
        profile: cfg.profile.clone(),
        bounds: cfg.bounds,
        options: cfg.minimize,
        freeze_mesh: cfg.freeze_mesh,
    }
}

pub fn simulate(cfg: &RunConfig) -> Result<PathBuf> {
    let solution = with_workers(cfg.workers, || solve_direct_detailed(&cfg.params, &cfg.solver, &cfg.profile))??;
    let dir = run_dir(&cfg.out, "simulate")?;
    fs::write(dir.join("config.txt"), cfg.serialize())?;
    write_trajectory(
        &dir,
        &solution.trajectory,
        &Manifest {
            params: &cfg.params,
            config: &cfg.solver,
            profile: &cfg.profile,
            steps: &solution.steps,
        },
    )?;
    write_schedule(&dir.join("schedule.txt"), &solution.schedule)?;

    if !cfg.timing_workers.is_empty() {
        let state = &solution.final_state;
        let mut w = BufWriter::new(File::create(dir.join("timing.csv"))?);
        writeln!(w, "workers,nodes,reaction_seconds")?;
        for &workers in &cfg.timing_workers {
            let seconds = with_workers(Some(workers), || -> Result<f64> {
                let mut best = f64::INFINITY;
                for _ in 0..3 {
                    let clock = Instant::now();
                    reaction_step(state, &cfg.params, cfg.solver.tau, cfg.solver.reaction_tol)?;
                    best = best.min(clock.elapsed().as_secs_f64());
                }
                Ok(best)
            })??;
            writeln!(w, "{workers},{},{seconds:.6e}", state.node_count())?;
            println!("reaction phase, {workers} workers, {} nodes: {seconds:.6} s", state.node_count());
        }
        w.flush()?;
    }
    let last = solution.steps.last();
    println!(
        "levels {}  final nodes {}  final eta {:.6e}",
        solution.trajectory.levels(),
        solution.final_mesh.node_count(),
        last.map(|s| s.eta).unwrap_or(0.0)
    );
    Ok(dir)
}

pub fn estimate(cfg: &RunConfig) -> Result<PathBuf> {
    let data_dir = cfg
        .data
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("estimate needs a data directory (--data or `data =`)".into()))?;
    let (mesh, tau, series) = read_u3_series(data_dir)?;
    let coarse = make_uniform_mesh(cfg.solver.coarse_n)?;
    if !mesh.same_geometry(&coarse) {
        return Err(Error::MeshMismatch(format!(
            "data mesh has {} nodes, configuration uses a {}x{} coarse mesh",
            mesh.node_count(),
            cfg.solver.coarse_n,
            cfg.solver.coarse_n
        )));
    }
    if (tau - cfg.solver.tau).abs() > 1e-12 || series.len() != cfg.solver.steps() + 1 {
        return Err(Error::MeshMismatch(format!(
            "data has {} levels with tau = {tau}, configuration needs {} with tau = {}",
            series.len(),
            cfg.solver.steps() + 1,
            cfg.solver.tau
        )));
    }
    let series = series
        .into_iter()
        .map(|f| NodalField::new(&coarse, f.into_values()))
        .collect::<Result<Vec<_>>>()?;
    let schedule_path = data_dir.join("schedule.txt");
    let schedule = if cfg.freeze_mesh && schedule_path.exists() {
        Some(Arc::new(read_schedule(&schedule_path)?))
    } else {
        if cfg.freeze_mesh {
            log::warn!("no schedule.txt in {}, meshes adapt per evaluation", data_dir.display());
        }
        None
    };
    let data = add_noise(&series, cfg.sigma, cfg.seed)?;
    let problem = setup(cfg).problem_for(data, schedule, cfg.delta1_init);
    let result = with_workers(cfg.workers, || minimize(&problem))??;

    let dir = run_dir(&cfg.out, "estimate")?;
    fs::write(dir.join("config.txt"), cfg.serialize())?;
    let mut w = BufWriter::new(File::create(dir.join("history.csv"))?);
    writeln!(w, "iteration,delta1,objective,gradient")?;
    for (i, h) in result.history.iter().enumerate() {
        writeln!(w, "{i},{:.16e},{:.16e},{:.16e}", h.delta1, h.objective, h.gradient)?;
    }
    w.flush()?;
    let mut w = BufWriter::new(File::create(dir.join("result.csv"))?);
    writeln!(w, "delta1_star,objective,gradient,iterations,evaluations,termination")?;
    writeln!(
        w,
        "{:.16e},{:.16e},{:.16e},{},{},{:?}",
        result.delta1_star,
        result.objective_value,
        result.gradient_value,
        result.iterations,
        result.evaluations,
        result.termination
    )?;
    w.flush()?;

    for (i, h) in result.history.iter().enumerate() {
        println!("{i:3}  delta1 {:.6}  J {:.6e}  J' {:.6e}", h.delta1, h.objective, h.gradient);
    }
    println!(
        "delta1* = {:.6}  J = {:.6e}  J' = {:.6e}  ({} evaluations, {:?})",
        result.delta1_star, result.objective_value, result.gradient_value, result.evaluations, result.termination
    );
    Ok(dir)
}

pub fn experiment(cfg: &RunConfig) -> Result<PathBuf> {
    let setup = setup(cfg);
    let mut rows = Vec::new();
    for &truth in &cfg.true_delta1 {
        for &sigma in &cfg.sigmas {
            let cell = with_workers(cfg.workers, || recovery_experiment(&setup, truth, sigma, cfg.n_runs, cfg.seed))?;
            let row = match cell {
                Ok(s) => format!(
                    "{truth},{sigma},{},{:.16e},{:.16e},{:.16e},{}",
                    s.n_runs, s.mean, s.std, s.rel_error, s.failures
                ),
                Err(e) => {
                    log::warn!("cell delta1 = {truth}, sigma = {sigma} failed: {e}");
                    format!("{truth},{sigma},{},NaN,NaN,NaN,{}", cfg.n_runs, cfg.n_runs)
                }
            };
            println!("{row}");
            rows.push(row);
        }
    }
    let dir = run_dir(&cfg.out, "experiment")?;
    fs::write(dir.join("config.txt"), cfg.serialize())?;
    let mut w = BufWriter::new(File::create(dir.join("table.csv"))?);
    writeln!(w, "true_delta1,sigma,n_runs,mean,std,rel_error,failures")?;
    for r in rows {
        writeln!(w, "{r}")?;
    }
    w.flush()?;
    Ok(dir)
}
