//! Forward solver: Lie splitting of reaction and diffusion with adaptive P1
//! finite elements in space.

mod diffusion;
mod estimate;
mod initial;
mod reaction;
mod solve;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::NodalField;
use crate::mesh::Mesh;
use crate::ode::OdeTolerances;

pub use diffusion::diffusion_step;
use diffusion::diffusion_step_counted;
pub use estimate::{estimate_error, ErrorIndicators};
pub use initial::{initial_condition, read_state, write_state, InitialProfile};
pub use reaction::{reaction_rhs, reaction_step};
pub use solve::{
    solve_direct, solve_direct_detailed, solve_direct_scheduled, DirectSolution, RefinementSchedule, StepStats,
};

/// The four dimensionless model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub delta1: f64,
    pub rho2: f64,
    pub d2: f64,
    pub delta3: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            delta1: 12.5,
            rho2: 1.0,
            d2: 4e-5,
            delta3: 1.0,
        }
    }
}

impl ModelParams {
    pub fn new(delta1: f64, rho2: f64, d2: f64, delta3: f64) -> Result<Self> {
        let p = ModelParams { delta1, rho2, d2, delta3 };
        p.validate()?;
        Ok(p)
    }

    pub fn with_delta1(self, delta1: f64) -> Self {
        ModelParams { delta1, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("delta1", self.delta1),
            ("rho2", self.rho2),
            ("D2", self.d2),
            ("delta3", self.delta3),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} = {v} must be finite and non-negative")));
            }
        }
        Ok(())
    }
}

/// Nodal values of the three fields at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    pub u1: NodalField,
    pub u2: NodalField,
    pub u3: NodalField,
    pub time: f64,
}

impl StateField {
    pub fn new(u1: NodalField, u2: NodalField, u3: NodalField, time: f64) -> Result<Self> {
        if u1.mesh_id() != u2.mesh_id() || u1.mesh_id() != u3.mesh_id() || u1.len() != u2.len() || u1.len() != u3.len()
        {
            return Err(Error::MeshMismatch("state components on different meshes".into()));
        }
        Ok(StateField { u1, u2, u3, time })
    }

    /// Spatially uniform state.
    pub fn uniform(mesh: &Mesh, u: [f64; 3], time: f64) -> Self {
        StateField {
            u1: NodalField::constant(mesh, u[0]),
            u2: NodalField::constant(mesh, u[1]),
            u3: NodalField::constant(mesh, u[2]),
            time,
        }
    }

    pub fn mesh_id(&self) -> u64 {
        self.u1.mesh_id()
    }

    pub fn node_count(&self) -> usize {
        self.u1.len()
    }

    pub fn check_on(&self, mesh: &Mesh) -> Result<()> {
        self.u1.check_on(mesh)?;
        self.u2.check_on(mesh)?;
        self.u3.check_on(mesh)
    }

    pub fn fields(&self) -> [&NodalField; 3] {
        [&self.u1, &self.u2, &self.u3]
    }

    /// Values of all three fields at node `i`.
    pub fn at(&self, i: usize) -> [f64; 3] {
        [self.u1.values()[i], self.u2.values()[i], self.u3.values()[i]]
    }

    pub fn is_finite(&self) -> bool {
        self.fields().iter().all(|f| f.values().iter().all(|v| v.is_finite()))
    }

    /// Interpolates onto another mesh of the same domain.
    pub fn transfer(&self, from: &Mesh, to: &Mesh) -> Result<StateField> {
        Ok(StateField {
            u1: crate::fem::transfer_field(&self.u1, from, to)?,
            u2: crate::fem::transfer_field(&self.u2, from, to)?,
            u3: crate::fem::transfer_field(&self.u3, from, to)?,
            time: self.time,
        })
    }

    /// Restriction to `coarse` when the first nodes of the current mesh are
    /// the coarse nodes, as is the case for every refinement of `coarse`.
    pub(crate) fn restrict_prefix(&self, coarse: &Mesh) -> Result<StateField> {
        let n = coarse.node_count();
        let cut = |f: &NodalField| NodalField::new(coarse, f.values()[..n].to_vec());
        Ok(StateField {
            u1: cut(&self.u1)?,
            u2: cut(&self.u2)?,
            u3: cut(&self.u3)?,
            time: self.time,
        })
    }
}

/// Numerical settings of the forward solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tau: f64,
    pub t_final: f64,
    pub eps_tol: f64,
    pub theta: f64,
    pub reaction_tol: OdeTolerances,
    pub max_refines_per_step: usize,
    /// Relative residual target of the diffusion solves.
    pub cg_tol: f64,
    pub coarse_n: usize,
    /// Refinement stops once the working mesh has this many nodes.
    pub max_nodes: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tau: 0.1,
            t_final: 10.0,
            eps_tol: 1e-5,
            theta: 0.5,
            reaction_tol: OdeTolerances::default(),
            max_refines_per_step: 10,
            cg_tol: 1e-12,
            coarse_n: 16,
            max_nodes: 20_000,
        }
    }
}

impl SolverConfig {
    /// Reduced configuration for quick runs: 8x8 coarse mesh, T = 2.
    pub fn desk() -> Self {
        SolverConfig {
            t_final: 2.0,
            coarse_n: 8,
            max_nodes: 2_000,
            ..Self::default()
        }
    }

    /// Same settings with adaptivity switched off.
    pub fn fixed_mesh(self) -> Self {
        SolverConfig {
            max_refines_per_step: 0,
            ..self
        }
    }

    /// Number of time steps `T / tau`.
    pub fn steps(&self) -> usize {
        (self.t_final / self.tau).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::invalid(format!("tau = {} must be positive", self.tau)));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::invalid(format!("T = {} must be positive", self.t_final)));
        }
        let n = (self.t_final / self.tau).round();
        if n < 1.0 || (n * self.tau - self.t_final).abs() > 1e-12 * self.t_final.max(1.0) {
            return Err(Error::invalid(format!(
                "T = {} is not an integer multiple of tau = {}",
                self.t_final, self.tau
            )));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::invalid(format!("theta = {} outside [0, 1]", self.theta)));
        }
        if !(self.eps_tol > 0.0) {
            return Err(Error::invalid("eps_tol must be positive"));
        }
        if !(self.reaction_tol.abs > 0.0 && self.reaction_tol.rel >= 0.0) {
            return Err(Error::invalid("reaction tolerances must be positive"));
        }
        if !(self.cg_tol > 0.0 && self.cg_tol < 1.0) {
            return Err(Error::invalid("cg_tol must lie in (0, 1)"));
        }
        if self.coarse_n == 0 {
            return Err(Error::invalid("coarse_n must be at least 1"));
        }
        Ok(())
    }
}

/// Forward solution recorded on the coarse mesh at `t_0, ..., t_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub coarse_mesh: Arc<Mesh>,
    pub tau: f64,
    pub times: Vec<f64>,
    pub states: Vec<StateField>,
}

impl Trajectory {
    pub fn new(coarse_mesh: Arc<Mesh>, tau: f64, states: Vec<StateField>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::invalid("trajectory needs at least one level"));
        }
        for s in &states {
            s.check_on(&coarse_mesh)?;
        }
        let times = (0..states.len()).map(|n| n as f64 * tau).collect();
        Ok(Trajectory {
            coarse_mesh,
            tau,
            times,
            states,
        })
    }

    pub fn levels(&self) -> usize {
        self.states.len()
    }

    pub fn t_final(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    /// The u3 component at every level.
    pub fn u3_series(&self) -> Vec<NodalField> {
        self.states.iter().map(|s| s.u3.clone()).collect()
    }

    /// True when `data` has one field per level on the coarse mesh.
    pub fn check_series(&self, data: &[NodalField]) -> Result<()> {
        if data.len() != self.levels() {
            return Err(Error::MeshMismatch(format!(
                "data has {} levels, trajectory has {}",
                data.len(),
                self.levels()
            )));
        }
        for d in data {
            d.check_on(&self.coarse_mesh)?;
        }
        Ok(())
    }
}

/// Trapezoid weights for `levels` equally spaced samples with spacing `tau`.
pub fn trapezoid_weights(levels: usize, tau: f64) -> Vec<f64> {
    let mut w = vec![tau; levels];
    if levels == 1 {
        w[0] = 0.0;
    } else {
        w[0] = 0.5 * tau;
        w[levels - 1] = 0.5 * tau;
    }
    w
}
