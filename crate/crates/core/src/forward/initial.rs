use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::StateField;
use crate::error::{Error, Result};
use crate::fem::NodalField;
use crate::mesh::Mesh;

/// Initial data for the forward problem.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialProfile {
    /// `u2 = exp(-|x - c|^2 / w^2)`, `u1 = 1 - u2`, `u3 = u2`.
    GaussianSeed { center: [f64; 2], width_sq: f64 },
    /// The same value at every node.
    Uniform([f64; 3]),
    /// Nodal values read from a state file.
    File(PathBuf),
}

impl Default for InitialProfile {
    fn default() -> Self {
        InitialProfile::GaussianSeed {
            center: [0.5, 0.5],
            width_sq: 5e-4,
        }
    }
}

impl fmt::Display for InitialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialProfile::GaussianSeed { center, width_sq } => {
                write!(f, "gaussian-seed({}, {}, {})", center[0], center[1], width_sq)
            }
            InitialProfile::Uniform(u) => write!(f, "uniform({}, {}, {})", u[0], u[1], u[2]),
            InitialProfile::File(p) => write!(f, "file({})", p.display()),
        }
    }
}

impl std::str::FromStr for InitialProfile {
    type Err = Error;

    /// Parses the `Display` form back.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = s
            .split_once('(')
            .ok_or_else(|| Error::invalid(format!("profile `{s}` lacks an argument list")))?;
        let args = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::invalid(format!("profile `{s}` lacks a closing parenthesis")))?;
        let nums = || -> Result<Vec<f64>> {
            args.split(',')
                .map(|a| {
                    a.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::invalid(format!("bad number `{}` in profile", a.trim())))
                })
                .collect()
        };
        match name.trim() {
            "gaussian-seed" => match nums()?.as_slice() {
                &[cx, cy, w2] if w2 > 0.0 => Ok(InitialProfile::GaussianSeed {
                    center: [cx, cy],
                    width_sq: w2,
                }),
                _ => Err(Error::invalid("gaussian-seed takes cx, cy and a positive w^2")),
            },
            "uniform" => match nums()?.as_slice() {
                &[a, b, c] => Ok(InitialProfile::Uniform([a, b, c])),
                _ => Err(Error::invalid("uniform takes three values")),
            },
            "file" => Ok(InitialProfile::File(PathBuf::from(args.trim()))),
            other => Err(Error::invalid(format!("unknown profile `{other}`"))),
        }
    }
}

/// Evaluates a profile at the nodes of `mesh`, at time zero.
pub fn initial_condition(mesh: &Mesh, profile: &InitialProfile) -> Result<StateField> {
    match profile {
        InitialProfile::GaussianSeed { center, width_sq } => {
            if !(*width_sq > 0.0) {
                return Err(Error::invalid("gaussian-seed width must be positive"));
            }
            let u2 = NodalField::from_fn(mesh, |x, y| {
                let r2 = (x - center[0]).powi(2) + (y - center[1]).powi(2);
                (-r2 / width_sq).exp()
            });
            let mut u1 = u2.clone();
            u1.values_mut().iter_mut().for_each(|v| *v = 1.0 - *v);
            Ok(StateField {
                u1,
                u3: u2.clone(),
                u2,
                time: 0.0,
            })
        }
        InitialProfile::Uniform(u) => Ok(StateField::uniform(mesh, *u, 0.0)),
        InitialProfile::File(path) => read_state(path, mesh),
    }
}

/// Writes a state as `state <n>` followed by one `u1 u2 u3` line per node.
pub fn write_state(path: &Path, state: &StateField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "state {}", state.node_count())?;
    for i in 0..state.node_count() {
        let [a, b, c] = state.at(i);
        writeln!(w, "{a:.16e} {b:.16e} {c:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a state file written by [`write_state`] onto `mesh`.
pub fn read_state(path: &Path, mesh: &Mesh) -> Result<StateField> {
    let r = BufReader::new(File::open(path)?);
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty state file"))?;
    let header = header?;
    let n: usize = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["state", n] => n.parse().map_err(|_| Error::parse(1, "bad node count"))?,
        _ => return Err(Error::parse(1, "expected `state <count>`")),
    };
    if n != mesh.node_count() {
        return Err(Error::MeshMismatch(format!(
            "state file has {n} nodes, mesh has {}",
            mesh.node_count()
        )));
    }
    let mut cols = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for _ in 0..n {
        let (i, line) = lines.next().ok_or_else(|| Error::parse(n + 1, "truncated state file"))?;
        let line = line?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|v| v.parse::<f64>().map_err(|_| Error::parse(i + 1, format!("bad number `{v}`"))))
            .collect::<Result<_>>()?;
        if vals.len() != 3 {
            return Err(Error::parse(i + 1, "expected three values"));
        }
        for k in 0..3 {
            cols[k].push(vals[k]);
        }
    }
    let [a, b, c] = cols;
    StateField::new(NodalField::new(mesh, a)?, NodalField::new(mesh, b)?, NodalField::new(mesh, c)?, 0.0)
}
