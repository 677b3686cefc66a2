//! Reduced inverse problem for `delta1`: objective and gradient evaluation,
//! bound-constrained minimization, synthetic data and recovery experiments.

mod experiment;
mod minimize;
mod noise;

use std::sync::Arc;

use crate::adjoint::{objective, reduced_gradient, solve_adjoint};
use crate::error::{Error, Result};
use crate::fem::NodalField;
use crate::forward::{
    solve_direct, solve_direct_scheduled, InitialProfile, ModelParams, RefinementSchedule, SolverConfig, Trajectory,
};

pub use experiment::{
    generate_data, random_starts, recovery_experiment, ExperimentSetup, RecoverySummary, SyntheticData,
};
pub use minimize::{minimize, EstimationResult, HistoryEntry, MinimizeOptions, Termination};
pub use noise::{add_noise, add_noise_stream};

/// The paper's admissible interval for `delta1`.
pub const DEFAULT_BOUNDS: [f64; 2] = [0.0, 20.0];

/// Data and settings of one estimation run.
#[derive(Debug, Clone)]
pub struct EstimationProblem {
    /// Measured `u3` at every level of the coarse time grid.
    pub data: Vec<NodalField>,
    /// `rho2`, `D2` and `delta3` are used; `delta1` is ignored.
    pub fixed_params: ModelParams,
    pub bounds: [f64; 2],
    pub config: SolverConfig,
    pub profile: InitialProfile,
    pub delta1_init: f64,
    pub options: MinimizeOptions,
    /// Mesh sequence shared by every evaluation. Without one each forward
    /// solve adapts its own meshes, which makes `J` jump between nearby
    /// values of `delta1`.
    pub schedule: Option<Arc<RefinementSchedule>>,
}

impl EstimationProblem {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.bounds;
        if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::invalid(format!("bounds [{lo}, {hi}] must satisfy 0 <= lo < hi")));
        }
        if !(lo..=hi).contains(&self.delta1_init) {
            return Err(Error::invalid(format!(
                "initial delta1 = {} outside [{lo}, {hi}]",
                self.delta1_init
            )));
        }
        if self.data.len() != self.config.steps() + 1 {
            return Err(Error::MeshMismatch(format!(
                "data has {} levels, configuration needs {}",
                self.data.len(),
                self.config.steps() + 1
            )));
        }
        self.fixed_params.validate()?;
        self.config.validate()
    }

    fn forward(&self, params: &ModelParams) -> Result<Trajectory> {
        match &self.schedule {
            Some(s) => Ok(solve_direct_scheduled(params, &self.config, &self.profile, s)?.trajectory),
            None => solve_direct(params, &self.config, &self.profile),
        }
    }

    /// Reduced objective and its adjoint gradient at `delta1`.
    pub fn evaluate(&self, delta1: f64) -> Result<(f64, f64)> {
        let run = || -> Result<(f64, f64)> {
            let params = self.fixed_params.with_delta1(delta1);
            let traj = self.forward(&params)?;
            let j = objective(&traj, &self.data)?;
            let adj = solve_adjoint(&traj, &self.data, &params)?;
            Ok((j, reduced_gradient(&traj, &adj)?))
        };
        run().map_err(|e| Error::Evaluation {
            delta1,
            source: Box::new(e),
        })
    }

    /// Reduced objective alone.
    pub fn objective_at(&self, delta1: f64) -> Result<f64> {
        let params = self.fixed_params.with_delta1(delta1);
        let traj = self.forward(&params).map_err(|e| Error::Evaluation {
            delta1,
            source: Box::new(e),
        })?;
        objective(&traj, &self.data)
    }
}

/// Dimensional rates and capacities of the original model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionalParams {
    pub d1: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub d3: f64,
    pub k2: f64,
    pub dn2: f64,
    pub dn3: f64,
}

/// `delta1 = d1 r3 K2 / (d3 r1)`, `rho2 = r2 / r1`, `D2 = D_N2 / D_N3`,
/// `delta3 = d3 / r1`.
pub fn nondimensionalize(p: &DimensionalParams) -> Result<ModelParams> {
    for (name, v) in [("r1", p.r1), ("d3", p.d3), ("D_N3", p.dn3)] {
        if v == 0.0 || !v.is_finite() {
            return Err(Error::invalid(format!("{name} must be finite and nonzero")));
        }
    }
    ModelParams::new(
        p.d1 * p.r3 * p.k2 / (p.d3 * p.r1),
        p.r2 / p.r1,
        p.dn2 / p.dn3,
        p.d3 / p.r1,
    )
}
