use std::sync::Arc;
use std::time::Instant;

use super::{
    diffusion_step_counted, estimate_error, initial_condition, reaction_step, InitialProfile, ModelParams,
    SolverConfig, StateField, Trajectory,
};
use crate::error::{Error, Result};
use crate::fem::{FemSpace, NodalField};
use crate::mesh::{bulk_mark, make_uniform_mesh, rgb_refine, Mesh};

/// Bookkeeping for one accepted time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepStats {
    pub time: f64,
    pub refines: usize,
    pub eta: f64,
    pub nodes: usize,
    /// Accepted with `eta >= eps_tol` because a refinement limit was hit.
    pub capped: bool,
    /// Wall time spent in reaction steps, including rejected attempts.
    pub reaction_seconds: f64,
    /// Conjugate-gradient iterations of all diffusion solves in the step.
    pub cg_iterations: usize,
}

/// The marked triangle sets of every refinement, grouped by time step.
///
/// Replaying a schedule rebuilds exactly the same sequence of working
/// meshes without consulting the estimator.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RefinementSchedule {
    pub steps: Vec<Vec<Vec<usize>>>,
}

impl RefinementSchedule {
    pub fn total_refinements(&self) -> usize {
        self.steps.iter().map(Vec::len).sum()
    }
}

/// Forward solution with per-step statistics and the last working mesh.
#[derive(Debug, Clone)]
pub struct DirectSolution {
    pub trajectory: Trajectory,
    pub steps: Vec<StepStats>,
    pub schedule: RefinementSchedule,
    pub final_mesh: Arc<Mesh>,
    pub final_state: StateField,
}

/// Solves the forward problem and returns the coarse-mesh trajectory.
pub fn solve_direct(params: &ModelParams, config: &SolverConfig, init: &InitialProfile) -> Result<Trajectory> {
    Ok(solve_direct_detailed(params, config, init)?.trajectory)
}

/// [`solve_direct`] keeping the step statistics, the refinement schedule and
/// the final fine state.
///
/// Each step runs reaction then diffusion on the working mesh and evaluates
/// the estimator. While `eta(Omega) >= eps_tol`, the working mesh is refined
/// by bulk marking and the step is redone from the prolonged previous state,
/// up to `max_refines_per_step` times or until the mesh reaches `max_nodes`
/// (the refinement that crosses the limit is kept). The working mesh is kept
/// for the following steps.
pub fn solve_direct_detailed(
    params: &ModelParams,
    config: &SolverConfig,
    init: &InitialProfile,
) -> Result<DirectSolution> {
    march(params, config, init, None)
}

/// Forward solve on the mesh sequence of a recorded schedule. At each step
/// the recorded refinements are applied first and the step is taken once.
pub fn solve_direct_scheduled(
    params: &ModelParams,
    config: &SolverConfig,
    init: &InitialProfile,
    schedule: &RefinementSchedule,
) -> Result<DirectSolution> {
    if schedule.steps.len() != config.steps() {
        return Err(Error::invalid(format!(
            "schedule covers {} steps, configuration has {}",
            schedule.steps.len(),
            config.steps()
        )));
    }
    march(params, config, init, Some(schedule))
}

struct WorkingMesh {
    mesh: Arc<Mesh>,
    space: FemSpace,
}

impl WorkingMesh {
    fn new(mesh: Arc<Mesh>) -> Self {
        WorkingMesh {
            space: FemSpace::new(mesh.clone()),
            mesh,
        }
    }

    /// Refines the marked triangles and prolongs `state` to the new mesh.
    fn refine(&mut self, marked: &[usize], state: &StateField) -> Result<StateField> {
        let refinement = rgb_refine(&self.mesh, marked)?;
        let prolong = |f: &NodalField| NodalField::new(&refinement.mesh, refinement.prolong(f.values()));
        let out = StateField {
            u1: prolong(&state.u1)?,
            u2: prolong(&state.u2)?,
            u3: prolong(&state.u3)?,
            time: state.time,
        };
        *self = WorkingMesh::new(Arc::new(refinement.mesh));
        Ok(out)
    }
}

fn march(
    params: &ModelParams,
    config: &SolverConfig,
    init: &InitialProfile,
    replay: Option<&RefinementSchedule>,
) -> Result<DirectSolution> {
    params.validate()?;
    config.validate()?;
    let coarse = Arc::new(make_uniform_mesh(config.coarse_n)?);
    let start = initial_condition(&coarse, init)?;
    let tau = config.tau;

    let mut work = WorkingMesh::new(coarse.clone());
    let mut prev = start.clone();
    let mut states = Vec::with_capacity(config.steps() + 1);
    states.push(start);
    let mut steps = Vec::with_capacity(config.steps());
    let mut schedule = RefinementSchedule::default();

    for n in 1..=config.steps() {
        prev.time = (n - 1) as f64 * tau;
        let mut marked_sets = Vec::new();
        if let Some(s) = replay {
            for marked in &s.steps[n - 1] {
                prev = work.refine(marked, &prev)?;
                marked_sets.push(marked.clone());
            }
        }
        let mut reaction_seconds = 0.0;
        let mut cg_iterations = 0;
        let (next, eta) = loop {
            let clock = Instant::now();
            let reacted = reaction_step(&prev, params, tau, config.reaction_tol)?;
            reaction_seconds += clock.elapsed().as_secs_f64();
            let (mut next, its) = diffusion_step_counted(&work.space, &reacted, params, tau, config.cg_tol)?;
            cg_iterations += its;
            next.time = n as f64 * tau;
            if !next.is_finite() {
                return Err(Error::SolverFailure {
                    system: format!("forward state at t = {}", next.time),
                    iterations: n,
                    residual: f64::NAN,
                });
            }
            let est = estimate_error(&work.space, &next, &prev, tau, params)?;
            let may_refine = replay.is_none()
                && marked_sets.len() < config.max_refines_per_step
                && work.mesh.node_count() < config.max_nodes;
            if est.global < config.eps_tol || !may_refine {
                break (next, est.global);
            }
            let marked = bulk_mark(&est.per_element, config.theta)?;
            if marked.is_empty() {
                break (next, est.global);
            }
            prev = work.refine(&marked, &prev)?;
            marked_sets.push(marked);
        };
        let refines = marked_sets.len();
        let capped = eta >= config.eps_tol;
        if capped {
            log::debug!(
                "step {n}: eta = {eta:.3e} >= {:.1e} after {refines} refinements ({} nodes)",
                config.eps_tol,
                work.mesh.node_count()
            );
        }
        states.push(next.restrict_prefix(&coarse)?);
        steps.push(StepStats {
            time: next.time,
            refines,
            eta,
            nodes: work.mesh.node_count(),
            capped,
            reaction_seconds,
            cg_iterations,
        });
        schedule.steps.push(marked_sets);
        prev = next;
    }

    let capped = steps.iter().filter(|s| s.capped).count();
    if capped > 0 && replay.is_none() {
        log::warn!(
            "{capped} of {} steps ended with eta >= {:.1e} (refinement or node cap reached, {} nodes)",
            steps.len(),
            config.eps_tol,
            work.mesh.node_count()
        );
    }

    Ok(DirectSolution {
        trajectory: Trajectory::new(coarse, tau, states)?,
        steps,
        schedule,
        final_mesh: work.mesh,
        final_state: prev,
    })
}
