use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{add_noise_stream, minimize, EstimationProblem, MinimizeOptions, DEFAULT_BOUNDS};
use crate::error::{Error, Result};
use crate::fem::NodalField;
use crate::forward::{solve_direct_detailed, InitialProfile, ModelParams, RefinementSchedule, SolverConfig};

/// Stream offset separating start-point draws from noise draws.
const START_STREAM: u64 = 1 << 32;

/// Everything about a recovery run except the true value and the noise.
#[derive(Debug, Clone)]
pub struct ExperimentSetup {
    /// `rho2`, `D2`, `delta3`; `delta1` is overwritten.
    pub params: ModelParams,
    pub config: SolverConfig,
    pub profile: InitialProfile,
    pub bounds: [f64; 2],
    pub options: MinimizeOptions,
    /// Fit on the mesh sequence that generated the data.
    pub freeze_mesh: bool,
}

impl Default for ExperimentSetup {
    fn default() -> Self {
        ExperimentSetup {
            params: ModelParams::default(),
            config: SolverConfig::default(),
            profile: InitialProfile::default(),
            bounds: DEFAULT_BOUNDS,
            options: MinimizeOptions::default(),
            freeze_mesh: true,
        }
    }
}

impl ExperimentSetup {
    /// Estimation problem for `data`, using its mesh schedule when
    /// `freeze_mesh` is set.
    pub fn problem(&self, data: &SyntheticData, delta1_init: f64) -> EstimationProblem {
        self.problem_for(data.u3.clone(), self.freeze_mesh.then(|| data.schedule.clone()), delta1_init)
    }

    pub fn problem_for(
        &self,
        data: Vec<NodalField>,
        schedule: Option<Arc<RefinementSchedule>>,
        delta1_init: f64,
    ) -> EstimationProblem {
        EstimationProblem {
            data,
            fixed_params: self.params,
            bounds: self.bounds,
            config: self.config.clone(),
            profile: self.profile.clone(),
            delta1_init,
            options: self.options,
            schedule,
        }
    }
}

/// Summary row of a recovery experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoverySummary {
    pub true_delta1: f64,
    pub sigma: f64,
    pub n_runs: usize,
    pub mean: f64,
    /// Sample standard deviation (zero for a single run).
    pub std: f64,
    /// `|mean - true| / true`.
    pub rel_error: f64,
    pub failures: usize,
    /// Successful estimates in run order.
    pub estimates: Vec<f64>,
}

/// Synthetic measurements with the refinement schedule that produced them.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub u3: Vec<NodalField>,
    pub schedule: Arc<RefinementSchedule>,
}

/// Noiseless synthetic `u3` data at `true_delta1`.
pub fn generate_data(setup: &ExperimentSetup, true_delta1: f64) -> Result<SyntheticData> {
    let params = setup.params.with_delta1(true_delta1);
    let sol = solve_direct_detailed(&params, &setup.config, &setup.profile)?;
    Ok(SyntheticData {
        u3: sol.trajectory.u3_series(),
        schedule: Arc::new(sol.schedule),
    })
}

/// `n` starting points drawn uniformly from `bounds` (ChaCha8, `seed`).
pub fn random_starts(bounds: [f64; 2], n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(START_STREAM);
    (0..n).map(|_| rng.random_range(bounds[0]..=bounds[1])).collect()
}

/// Generates data at `true_delta1`, then for each run perturbs it with noise
/// on ChaCha stream `run` and minimizes from a random start. Runs execute in
/// parallel; failed runs are counted and left out of the statistics.
pub fn recovery_experiment(
    setup: &ExperimentSetup,
    true_delta1: f64,
    sigma: f64,
    n_runs: usize,
    seed: u64,
) -> Result<RecoverySummary> {
    if n_runs == 0 {
        return Err(Error::invalid("a recovery experiment needs at least one run"));
    }
    if !(true_delta1 > 0.0) {
        return Err(Error::invalid("true delta1 must be positive"));
    }
    let clean = generate_data(setup, true_delta1)?;
    let starts = random_starts(setup.bounds, n_runs, seed);
    let outcomes: Vec<Result<f64>> = (0..n_runs)
        .into_par_iter()
        .map(|run| {
            let noisy = SyntheticData {
                u3: add_noise_stream(&clean.u3, sigma, seed, run as u64)?,
                schedule: clean.schedule.clone(),
            };
            let result = minimize(&setup.problem(&noisy, starts[run]))?;
            Ok(result.delta1_star)
        })
        .collect();

    let mut estimates = Vec::new();
    let mut failures = 0;
    for (run, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(d) => estimates.push(d),
            Err(e) => {
                log::warn!("run {run} failed: {e}");
                failures += 1;
            }
        }
    }
    let k = estimates.len();
    let mean = if k > 0 { estimates.iter().sum::<f64>() / k as f64 } else { f64::NAN };
    let std = if k > 1 {
        (estimates.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()
    } else if k == 1 {
        0.0
    } else {
        f64::NAN
    };
    Ok(RecoverySummary {
        true_delta1,
        sigma,
        n_runs,
        mean,
        std,
        rel_error: (mean - true_delta1).abs() / true_delta1,
        failures,
        estimates,
    })
}
