use rayon::prelude::*;

use super::{ModelParams, StateField};
use crate::error::{Error, Result};
use crate::fem::NodalField;
use crate::ode::{integrate, OdeTolerances};

/// Reaction terms `F(u)` of the three equations.
#[inline]
pub fn reaction_rhs(u: &[f64; 3], p: &ModelParams) -> [f64; 3] {
    [
        u[0] * (1.0 - u[0]) - p.delta1 * u[0] * u[2],
        p.rho2 * u[1] * (1.0 - u[1]),
        p.delta3 * (u[1] - u[2]),
    ]
}

/// Integrates the reaction system over `[t, t + dt]` independently at every
/// node. Nodes are processed in parallel; each node's result depends only
/// on its own data, so the output does not depend on the worker count.
pub fn reaction_step(state: &StateField, params: &ModelParams, dt: f64, tol: OdeTolerances) -> Result<StateField> {
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("reaction step {dt} must be positive")));
    }
    let n = state.node_count();
    let t0 = state.time;
    let out: Vec<[f64; 3]> = (0..n)
        .into_par_iter()
        .map(|i| {
            integrate(|u| reaction_rhs(u, params), state.at(i), t0, t0 + dt, tol)
                .map(|(u, _)| u)
                .map_err(|e| match e {
                    Error::StepUnderflow { time, .. } => Error::StepUnderflow { node: i, time },
                    other => other,
                })
        })
        .collect::<Result<_>>()?;
    let column = |k: usize, like: &NodalField| {
        let mut f = like.clone();
        for (v, u) in f.values_mut().iter_mut().zip(&out) {
            *v = u[k];
        }
        f
    };
    Ok(StateField {
        u1: column(0, &state.u1),
        u2: column(1, &state.u2),
        u3: column(2, &state.u3),
        time: t0 + dt,
    })
}
