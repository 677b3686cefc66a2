use super::{ModelParams, StateField};
use crate::error::Result;
use crate::fem::{pcg, FemSpace, KrylovOptions};

/// Semi-implicit diffusion step.
///
/// `u1` is left alone. `u2` solves `(M_L + tau K_w) u2' = M_L u2` where `K_w`
/// has the coefficient `max(D2 (1 - u1), 0)` built from the incoming `u1`,
/// and `u3` solves `(M_L + tau K) u3' = M_L u3`. Natural boundary conditions.
///
/// `M_L` is the lumped mass matrix. On meshes without obtuse angles, which
/// includes every refinement of the uniform mesh, both system matrices are
/// M-matrices and non-negative data stay non-negative. Lumping leaves the
/// total mass `1^T M u` unchanged. Previous values seed the
/// conjugate-gradient iterations.
pub fn diffusion_step(
    space: &FemSpace,
    state: &StateField,
    params: &ModelParams,
    tau: f64,
    cg_tol: f64,
) -> Result<StateField> {
    Ok(diffusion_step_counted(space, state, params, tau, cg_tol)?.0)
}

/// [`diffusion_step`] that also returns the total CG iteration count.
pub(crate) fn diffusion_step_counted(
    space: &FemSpace,
    state: &StateField,
    params: &ModelParams,
    tau: f64,
    cg_tol: f64,
) -> Result<(StateField, usize)> {
    state.check_on(space.mesh())?;
    let ml = space.lumped_mass();
    let weighted = |u: &[f64]| -> Vec<f64> { u.iter().zip(ml).map(|(a, b)| a * b).collect() };
    let opts = KrylovOptions::with_tol(cg_tol);

    let coeff: Vec<f64> = state
        .u1
        .values()
        .iter()
        .map(|u1| (params.d2 * (1.0 - u1)).max(0.0))
        .collect();
    let mut iterations = 0;
    let mut u2 = state.u2.clone();
    if params.d2 > 0.0 {
        let a = space.stiffness(&coeff).scale(tau).add_diagonal(ml);
        let rhs = weighted(state.u2.values());
        iterations += pcg(&a, &rhs, u2.values_mut(), &opts, "u2 diffusion")?;
    }

    let a = space.laplace().scale(tau).add_diagonal(ml);
    let rhs = weighted(state.u3.values());
    let mut u3 = state.u3.clone();
    iterations += pcg(&a, &rhs, u3.values_mut(), &opts, "u3 diffusion")?;

    let next = StateField {
        u1: state.u1.clone(),
        u2,
        u3,
        time: state.time,
    };
    Ok((next, iterations))
}
