//! Backward adjoint solve on the coarse mesh and the reduced gradient.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{gmres, CsrMatrix, FemSpace, KrylovOptions, NodalField};
use crate::forward::{trapezoid_weights, ModelParams, StateField, Trajectory};
use crate::mesh::Mesh;

const GMRES_RESTART: usize = 60;
const GMRES_TOL: f64 = 1e-12;

/// Adjoint fields `(lambda1, lambda2, lambda3)` at every level of the
/// forward time grid. The last level is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointTrajectory {
    pub coarse_mesh: Arc<Mesh>,
    pub times: Vec<f64>,
    pub lambdas: Vec<[NodalField; 3]>,
}

/// Matrix `M_blk + tau K_H` of one implicit Euler adjoint step, with the
/// forward coefficients taken from `state`.
///
/// Unknowns are ordered `(lambda1, lambda2, lambda3)`. The mass blocks use
/// the lumped mass `M_L` of the forward diffusion step, and the reaction
/// blocks are `diag(a) M_L` for the nodal coefficient `a`, which is the
/// transpose of the linearized node-wise reaction. The `(1, 2)` block is the
/// derivative of the `u2` diffusion with respect to `u1`:
/// `-D2 sum_T |T|/3 grad(u2) . grad(phi_j)` in row `i` for each vertex `i`
/// of `T`, dropped where the coefficient `D2 (1 - u1)` is clipped.
pub fn adjoint_system(space: &FemSpace, state: &StateField, params: &ModelParams, tau: f64) -> Result<CsrMatrix> {
    state.check_on(space.mesh())?;
    let ml = space.lumped_mass();
    let (u1, u2, u3) = (state.u1.values(), state.u2.values(), state.u3.values());
    let p = params;
    let diag = |a: &dyn Fn(usize) -> f64| -> Vec<f64> { (0..ml.len()).map(|i| ml[i] * a(i)).collect() };

    let a11 = space
        .zero_matrix()
        .add_diagonal(&diag(&|i| 1.0 + tau * (-(1.0 - 2.0 * u1[i]) + p.delta1 * u3[i])));
    let tris = space.mesh().triangles();
    let cross = space.assemble(|t, k| {
        let g = space.gradient(t, u2);
        let geo = space.geometry(t);
        let w = geo.area / 3.0;
        for (a, &node) in tris[t].iter().enumerate() {
            if p.d2 * (1.0 - u1[node]) < 0.0 {
                continue;
            }
            for b in 0..3 {
                k[a][b] = w * (g[0] * geo.grad[b][0] + g[1] * geo.grad[b][1]);
            }
        }
    });
    let a12 = cross.scale(-tau * p.d2);
    let coeff: Vec<f64> = u1.iter().map(|v| (p.d2 * (1.0 - v)).max(0.0)).collect();
    let a22 = space
        .stiffness(&coeff)
        .scale(tau)
        .add_diagonal(&diag(&|i| 1.0 - tau * p.rho2 * (1.0 - 2.0 * u2[i])));
    let a23 = CsrMatrix::from_diagonal(&diag(&|_| -tau * p.delta3));
    let a31 = CsrMatrix::from_diagonal(&diag(&|i| tau * p.delta1 * u1[i]));
    let a33 = space.laplace().scale(tau).add_diagonal(&diag(&|_| 1.0 + tau * p.delta3));

    Ok(CsrMatrix::from_blocks(&[
        vec![Some(&a11), Some(&a12), None],
        vec![None, Some(&a22), Some(&a23)],
        vec![Some(&a31), None, Some(&a33)],
    ]))
}

/// One backward step: solves `(M_blk + tau K_H) lambda_prev = M_blk lambda_next - tau b`
/// with `tau b = weight M (u3 - data)` in the `lambda3` rows. The source uses
/// the consistent mass matrix, matching [`objective`].
///
/// `state` and `data_u3` belong to the earlier level `t_{n-1}`; `weight` is
/// that level's quadrature weight in the objective.
pub fn adjoint_step(
    space: &FemSpace,
    lambda_next: &[NodalField; 3],
    state: &StateField,
    data_u3: &NodalField,
    weight: f64,
    params: &ModelParams,
    tau: f64,
) -> Result<[NodalField; 3]> {
    let mesh = space.mesh();
    for l in lambda_next {
        l.check_on(mesh)?;
    }
    data_u3.check_on(mesh)?;
    let n = space.node_count();
    let m = space.mass();
    let ml = space.lumped_mass();
    let a = adjoint_system(space, state, params, tau)?;

    let misfit: Vec<f64> = state
        .u3
        .values()
        .iter()
        .zip(data_u3.values())
        .map(|(u, d)| weight * (u - d))
        .collect();
    let source = m.mul_vec(&misfit);
    let mut rhs = Vec::with_capacity(3 * n);
    for l in lambda_next {
        rhs.extend(l.values().iter().zip(ml).map(|(v, w)| v * w));
    }
    for (r, s) in rhs[2 * n..].iter_mut().zip(&source) {
        *r -= s;
    }

    let mut x: Vec<f64> = lambda_next.iter().flat_map(|l| l.values().iter().copied()).collect();
    gmres(&a, &rhs, &mut x, GMRES_RESTART, &KrylovOptions::with_tol(GMRES_TOL), "adjoint system")?;
    Ok([
        NodalField::new(mesh, x[..n].to_vec())?,
        NodalField::new(mesh, x[n..2 * n].to_vec())?,
        NodalField::new(mesh, x[2 * n..].to_vec())?,
    ])
}

/// Marches the adjoint from `lambda^N = 0` back to `t_0`.
pub fn solve_adjoint(trajectory: &Trajectory, data: &[NodalField], params: &ModelParams) -> Result<AdjointTrajectory> {
    trajectory.check_series(data)?;
    let mesh = trajectory.coarse_mesh.clone();
    let space = FemSpace::new(mesh.clone());
    let levels = trajectory.levels();
    let w = trapezoid_weights(levels, trajectory.tau);

    let zero = || NodalField::zeros(&mesh);
    let mut lambdas = vec![[zero(), zero(), zero()]; levels];
    for n in (1..levels).rev() {
        let next = lambdas[n].clone();
        lambdas[n - 1] = adjoint_step(
            &space,
            &next,
            &trajectory.states[n - 1],
            &data[n - 1],
            w[n - 1],
            params,
            trajectory.tau,
        )
        .map_err(|e| Error::AtLevel {
            context: "adjoint step",
            level: n - 1,
            source: Box::new(e),
        })?;
    }
    Ok(AdjointTrajectory {
        coarse_mesh: mesh,
        times: trajectory.times.clone(),
        lambdas,
    })
}

/// `sum_n w_n (u1 u3)^T M_L lambda1^n` with trapezoid weights `w_n` and the
/// lumped mass `M_L` through which the reaction enters the forward scheme.
pub fn reduced_gradient(trajectory: &Trajectory, adjoint: &AdjointTrajectory) -> Result<f64> {
    if adjoint.lambdas.len() != trajectory.levels() || !adjoint.coarse_mesh.same_geometry(&trajectory.coarse_mesh) {
        return Err(Error::MeshMismatch("adjoint does not match the trajectory".into()));
    }
    let space = FemSpace::new(trajectory.coarse_mesh.clone());
    let w = trapezoid_weights(trajectory.levels(), trajectory.tau);
    let mut g = 0.0;
    for (n, s) in trajectory.states.iter().enumerate() {
        let ml = space.lumped_mass();
        let (u1, u3, l1) = (s.u1.values(), s.u3.values(), adjoint.lambdas[n][0].values());
        g += w[n] * (0..ml.len()).map(|i| u1[i] * u3[i] * ml[i] * l1[i]).sum::<f64>();
    }
    Ok(g)
}

/// `J = 1/2 sum_n w_n e_n^T M e_n` with `e_n = u3 - data` at level `n`.
pub fn objective(trajectory: &Trajectory, data: &[NodalField]) -> Result<f64> {
    trajectory.check_series(data)?;
    let space = FemSpace::new(trajectory.coarse_mesh.clone());
    let w = trapezoid_weights(trajectory.levels(), trajectory.tau);
    let mut j = 0.0;
    for (n, s) in trajectory.states.iter().enumerate() {
        let e: Vec<f64> = s.u3.values().iter().zip(data[n].values()).map(|(u, d)| u - d).collect();
        j += w[n] * space.mass_inner(&e, &e);
    }
    Ok(0.5 * j)
}
