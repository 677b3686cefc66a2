use rayon::prelude::*;

use super::reaction::reaction_rhs;
use super::{ModelParams, StateField};
use crate::error::{Error, Result};
use crate::fem::FemSpace;

/// Residual indicators on one mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorIndicators {
    /// `eta(T)` per triangle.
    pub per_element: Vec<f64>,
    /// `eta(S)` per edge, boundary edges included.
    pub per_edge: Vec<f64>,
    /// `eta(Omega) = sqrt(sum_T eta(T)^2)`.
    pub global: f64,
}

/// Residual a posteriori estimator of a time step.
///
/// `eta(T)^2 = H_T^2 ||R_T||^2 + sum_{S in dT} H_S ||J_S||^2`. The element
/// residual `R_T = (u_new - u_old)/tau - A(u_new) - F(u_new)` is taken over
/// all three equations and integrated with the edge-midpoint rule. For P1
/// functions the only surviving part of `A` inside `T` is the
/// coefficient-gradient term `grad(c) . grad(u2)` with
/// `c = max(D2 (1 - u1), 0)`. `J_S` is the jump of the normal flux of `u2`
/// (coefficient `c`) and `u3` across interior edges, and the flux itself on
/// boundary edges where the natural condition asks for zero.
pub fn estimate_error(
    space: &FemSpace,
    new: &StateField,
    old: &StateField,
    tau: f64,
    params: &ModelParams,
) -> Result<ErrorIndicators> {
    let mesh = space.mesh();
    new.check_on(mesh)?;
    old.check_on(mesh)?;
    if !(tau > 0.0) {
        return Err(Error::invalid("estimator needs a positive time step"));
    }
    let (u1, u2, u3) = (new.u1.values(), new.u2.values(), new.u3.values());
    let coeff: Vec<f64> = u1.iter().map(|v| (params.d2 * (1.0 - v)).max(0.0)).collect();

    let per_edge: Vec<f64> = (0..mesh.edge_count())
        .into_par_iter()
        .map(|e| {
            let edge = &mesh.edges()[e];
            let t0 = edge.triangles[0];
            let k = mesh.triangle_edges(t0).iter().position(|&x| x == e).expect("edge of its triangle");
            let nu = mesh.outward_normal(t0, k);
            let g2 = space.gradient(t0, u2);
            let g3 = space.gradient(t0, u3);
            let (mut j2, mut j3) = (dot(g2, nu), dot(g3, nu));
            if !edge.boundary {
                let t1 = edge.triangles[1];
                j2 -= dot(space.gradient(t1, u2), nu);
                j3 -= dot(space.gradient(t1, u3), nu);
            }
            let len = mesh.edge_length(e);
            let [a, b] = edge.nodes;
            let (ca, cb) = (coeff[a], coeff[b]);
            // exact integral of the squared linear coefficient along the edge
            let c2 = (ca * ca + ca * cb + cb * cb) / 3.0;
            let jump_sq = len * (j2 * j2 * c2 + j3 * j3);
            (len * jump_sq).sqrt()
        })
        .collect();

    let per_element: Vec<f64> = (0..mesh.triangle_count())
        .into_par_iter()
        .map(|t| {
            let tri = mesh.triangle(t);
            let area = mesh.area(t);
            let h = mesh.diameter(t);
            let gc = space.gradient(t, &coeff);
            let g2 = space.gradient(t, u2);
            let a2 = dot(gc, g2);
            let mut r_sq = 0.0;
            for k in 0..3 {
                let (p, q) = (tri[k], tri[(k + 1) % 3]);
                let mid = |f: &[f64]| 0.5 * (f[p] + f[q]);
                let un = [mid(u1), mid(u2), mid(u3)];
                let uo = [mid(old.u1.values()), mid(old.u2.values()), mid(old.u3.values())];
                let f = reaction_rhs(&un, params);
                let r = [
                    (un[0] - uo[0]) / tau - f[0],
                    (un[1] - uo[1]) / tau - a2 - f[1],
                    (un[2] - uo[2]) / tau - f[2],
                ];
                r_sq += r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
            }
            let r_sq = r_sq * area / 3.0;
            let edges: f64 = mesh.triangle_edges(t).iter().map(|&e| per_edge[e] * per_edge[e]).sum();
            (h * h * r_sq + edges).sqrt()
        })
        .collect();

    let global = per_element.iter().map(|e| e * e).sum::<f64>().sqrt();
    Ok(ErrorIndicators {
        per_element,
        per_edge,
        global,
    })
}

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}
