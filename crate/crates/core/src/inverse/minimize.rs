use super::EstimationProblem;
use crate::error::Result;

/// Stopping rules of [`minimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    /// Stop when `|projected gradient| <= gtol_rel * |J'(delta1_init)|`.
    pub gtol_rel: f64,
    /// Stop when an accepted or trial step is shorter than this.
    pub step_tol: f64,
    /// Cap on objective-and-gradient evaluations.
    pub max_evaluations: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Length of the first step, as a fraction of the interval width.
    pub initial_step: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            gtol_rel: 1e-6,
            step_tol: 1e-10,
            max_evaluations: 100,
            armijo: 1e-4,
            initial_step: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Gradient,
    StepSize,
    Evaluations,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryEntry {
    pub delta1: f64,
    pub objective: f64,
    pub gradient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub delta1_star: f64,
    pub objective_value: f64,
    pub gradient_value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Accepted iterates, starting with the initial point.
    pub history: Vec<HistoryEntry>,
    pub termination: Termination,
}

/// Projected secant-Newton minimization of `J(delta1)` over the bounds.
///
/// The curvature is the secant slope of the last two accepted gradients;
/// without a positive one the step falls back to a fixed fraction of the
/// interval against the gradient. Trial points are projected onto the
/// bounds and halved until the Armijo condition holds, so the accepted
/// objective values never increase.
pub fn minimize(problem: &EstimationProblem) -> Result<EstimationResult> {
    problem.validate()?;
    let opts = problem.options;
    let [lo, hi] = problem.bounds;
    let project = |x: f64| x.clamp(lo, hi);

    let mut x = problem.delta1_init;
    let (mut f, mut g) = problem.evaluate(x)?;
    let mut evaluations = 1;
    let mut history = vec![HistoryEntry {
        delta1: x,
        objective: f,
        gradient: g,
    }];
    let gtol = opts.gtol_rel * g.abs();
    let mut curvature: Option<f64> = None;
    let default_step = opts.initial_step * (hi - lo);

    let termination = 'outer: loop {
        let pg = if (x <= lo && g > 0.0) || (x >= hi && g < 0.0) { 0.0 } else { g };
        if pg.abs() <= gtol {
            break Termination::Gradient;
        }
        let mut step = match curvature {
            Some(h) => -g / h,
            None => -g.signum() * default_step,
        };
        loop {
            if evaluations >= opts.max_evaluations {
                break 'outer Termination::Evaluations;
            }
            let trial = project(x + step);
            let s = trial - x;
            if s.abs() < opts.step_tol {
                break 'outer Termination::StepSize;
            }
            let (ft, gt) = problem.evaluate(trial)?;
            evaluations += 1;
            if ft <= f + opts.armijo * g * s {
                let h = (gt - g) / s;
                curvature = (h > 0.0 && h.is_finite()).then_some(h);
                x = trial;
                f = ft;
                g = gt;
                history.push(HistoryEntry {
                    delta1: x,
                    objective: f,
                    gradient: g,
                });
                break;
            }
            step = 0.5 * s;
        }
    };

    Ok(EstimationResult {
        delta1_star: x,
        objective_value: f,
        gradient_value: g,
        iterations: history.len() - 1,
        evaluations,
        history,
        termination,
    })
}
