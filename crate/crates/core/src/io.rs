//! Field files, trajectory dumps and CSV summaries.
//!
//! A field file is `field <n>` followed by one value per line. A trajectory
//! directory holds `mesh.txt`, `manifest.txt` and files `u{k}_{level}.txt`
//! for every field and level. Numbers are written with 17 significant
//! digits so that reading them back is exact.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::NodalField;
use crate::forward::{
    InitialProfile, ModelParams, RefinementSchedule, SolverConfig, StateField, StepStats, Trajectory,
};
use crate::mesh::Mesh;

pub fn write_field(path: &Path, field: &NodalField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "field {}", field.len())?;
    for v in field.values() {
        writeln!(w, "{v:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field(path: &Path, mesh: &Mesh) -> Result<NodalField> {
    let r = BufReader::new(File::open(path)?);
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::parse(1, "empty field file"))??;
    let n: usize = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["field", n] => n.parse().map_err(|_| Error::parse(1, "bad value count"))?,
        _ => return Err(Error::parse(1, "expected `field <count>`")),
    };
    let mut values = Vec::with_capacity(n);
    for (i, line) in lines.enumerate().take(n) {
        let line = line?;
        let t = line.trim();
        values.push(
            t.parse::<f64>()
                .map_err(|_| Error::parse(i + 2, format!("bad number `{t}`")))?,
        );
    }
    if values.len() != n {
        return Err(Error::parse(values.len() + 2, "truncated field file"));
    }
    NodalField::new(mesh, values)
}

/// Writes the marked element sets of every refinement round.
///
/// Layout: `schedule <steps>`, then per step a line `step <rounds>` followed
/// by one line of element indices per round.
pub fn write_schedule(path: &Path, schedule: &RefinementSchedule) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "schedule {}", schedule.steps.len())?;
    for rounds in &schedule.steps {
        writeln!(w, "step {}", rounds.len())?;
        for marked in rounds {
            let line: Vec<String> = marked.iter().map(|t| t.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn count_line<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, key: &str) -> Result<usize> {
    let (no, line) = lines
        .next()
        .ok_or_else(|| Error::parse(0, format!("missing `{key}` line")))?;
    match line.split_whitespace().collect::<Vec<_>>().as_slice() {
        [k, n] if *k == key => n.parse().map_err(|_| Error::parse(no, "bad count")),
        _ => Err(Error::parse(no, format!("expected `{key} <count>`"))),
    }
}

pub fn read_schedule(path: &Path) -> Result<RefinementSchedule> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let n_steps = count_line(&mut lines, "schedule")?;
    let mut steps = Vec::with_capacity(n_steps);
    for _ in 0..n_steps {
        let rounds = count_line(&mut lines, "step")?;
        let mut step = Vec::with_capacity(rounds);
        for _ in 0..rounds {
            let (no, line) = lines.next().ok_or_else(|| Error::parse(0, "truncated schedule"))?;
            let marked = line
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| Error::parse(no, format!("bad index `{t}`"))))
                .collect::<Result<Vec<_>>>()?;
            step.push(marked);
        }
        steps.push(step);
    }
    Ok(RefinementSchedule { steps })
}

fn field_name(k: usize, level: usize) -> String {
    format!("u{}_{level:05}.txt", k + 1)
}

/// Run description stored next to a trajectory.
#[derive(Debug, Clone)]
pub struct Manifest<'a> {
    pub params: &'a ModelParams,
    pub config: &'a SolverConfig,
    pub profile: &'a InitialProfile,
    pub steps: &'a [StepStats],
}

/// Writes the coarse mesh, every field at every level, the manifest and
/// `summary.csv` into `dir`, which is created if needed.
pub fn write_trajectory(dir: &Path, traj: &Trajectory, manifest: &Manifest<'_>) -> Result<()> {
    fs::create_dir_all(dir)?;
    traj.coarse_mesh.write_text(BufWriter::new(File::create(dir.join("mesh.txt"))?))?;
    for (level, s) in traj.states.iter().enumerate() {
        for (k, f) in s.fields().iter().enumerate() {
            write_field(&dir.join(field_name(k, level)), f)?;
        }
    }

    let mut w = BufWriter::new(File::create(dir.join("manifest.txt"))?);
    let p = manifest.params;
    let c = manifest.config;
    writeln!(w, "levels = {}", traj.levels())?;
    writeln!(w, "tau = {:.16e}", traj.tau)?;
    writeln!(w, "t_final = {:.16e}", traj.t_final())?;
    writeln!(w, "delta1 = {:.16e}", p.delta1)?;
    writeln!(w, "rho2 = {:.16e}", p.rho2)?;
    writeln!(w, "D2 = {:.16e}", p.d2)?;
    writeln!(w, "delta3 = {:.16e}", p.delta3)?;
    writeln!(w, "coarse_n = {}", c.coarse_n)?;
    writeln!(w, "eps_tol = {:.16e}", c.eps_tol)?;
    writeln!(w, "theta = {:.16e}", c.theta)?;
    writeln!(w, "profile = {}", manifest.profile)?;
    let refines: Vec<String> = manifest.steps.iter().map(|s| s.refines.to_string()).collect();
    writeln!(w, "refines = {}", refines.join(","))?;
    w.flush()?;

    write_summary_csv(&dir.join("summary.csv"), traj, manifest.steps)
}

/// `t, min/max of each field, eta_omega, refines`, one row per level.
/// The initial level has no estimator value and is written with `0`.
pub fn write_summary_csv(path: &Path, traj: &Trajectory, steps: &[StepStats]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,u1_min,u1_max,u2_min,u2_max,u3_min,u3_max,eta_omega,refines")?;
    for (level, s) in traj.states.iter().enumerate() {
        let (eta, refines) = match level.checked_sub(1).and_then(|i| steps.get(i)) {
            Some(st) => (st.eta, st.refines),
            None => (0.0, 0),
        };
        write!(w, "{:.16e}", traj.times[level])?;
        for f in s.fields() {
            let (lo, hi) = min_max(f.values());
            write!(w, ",{lo:.16e},{hi:.16e}")?;
        }
        writeln!(w, ",{eta:.16e},{refines}")?;
    }
    w.flush()?;
    Ok(())
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Reads `key = value` lines of a manifest.
fn manifest_value(dir: &Path, key: &str) -> Result<String> {
    let text = fs::read_to_string(dir.join("manifest.txt"))?;
    text.lines()
        .filter_map(|l| l.split_once('='))
        .find(|(k, _)| k.trim() == key)
        .map(|(_, v)| v.trim().to_string())
        .ok_or_else(|| Error::invalid(format!("manifest in {} lacks `{key}`", dir.display())))
}

/// Reads back a directory written by [`write_trajectory`].
pub fn read_trajectory(dir: &Path) -> Result<Trajectory> {
    let mesh = Arc::new(Mesh::read_text(BufReader::new(File::open(dir.join("mesh.txt"))?))?);
    let levels: usize = manifest_value(dir, "levels")?
        .parse()
        .map_err(|_| Error::invalid("bad level count in manifest"))?;
    let tau: f64 = manifest_value(dir, "tau")?
        .parse()
        .map_err(|_| Error::invalid("bad tau in manifest"))?;
    let mut states = Vec::with_capacity(levels);
    for level in 0..levels {
        let f = |k| read_field(&dir.join(field_name(k, level)), &mesh);
        states.push(StateField::new(f(0)?, f(1)?, f(2)?, level as f64 * tau)?);
    }
    Trajectory::new(mesh, tau, states)
}

/// Writes a `u3` data series as a trajectory-shaped directory holding only
/// `mesh.txt`, `manifest.txt` and the `u3` files.
pub fn write_u3_series(dir: &Path, mesh: &Mesh, tau: f64, data: &[NodalField]) -> Result<()> {
    fs::create_dir_all(dir)?;
    mesh.write_text(BufWriter::new(File::create(dir.join("mesh.txt"))?))?;
    for (level, f) in data.iter().enumerate() {
        write_field(&dir.join(field_name(2, level)), f)?;
    }
    let mut w = BufWriter::new(File::create(dir.join("manifest.txt"))?);
    writeln!(w, "levels = {}", data.len())?;
    writeln!(w, "tau = {tau:.16e}")?;
    w.flush()?;
    Ok(())
}

/// Reads the `u3` series of a data directory: its mesh, `tau` and fields.
pub fn read_u3_series(dir: &Path) -> Result<(Arc<Mesh>, f64, Vec<NodalField>)> {
    if !dir.is_dir() {
        return Err(Error::invalid(format!("data directory {} does not exist", dir.display())));
    }
    let mesh = Arc::new(Mesh::read_text(BufReader::new(File::open(dir.join("mesh.txt"))?))?);
    let levels: usize = manifest_value(dir, "levels")?
        .parse()
        .map_err(|_| Error::invalid("bad level count in manifest"))?;
    let tau: f64 = manifest_value(dir, "tau")?
        .parse()
        .map_err(|_| Error::invalid("bad tau in manifest"))?;
    let data = (0..levels)
        .map(|level| read_field(&dir.join(field_name(2, level)), &mesh))
        .collect::<Result<_>>()?;
    Ok((mesh, tau, data))
}
