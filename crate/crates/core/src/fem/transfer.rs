use super::NodalField;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

const BARY_TOL: f64 = 1e-10;

/// Finds a triangle of `mesh` containing `p`, walking from `start` and
/// falling back to an exhaustive scan. Returns the triangle and the
/// barycentric coordinates of `p` in it.
pub fn locate(mesh: &Mesh, p: [f64; 2], start: usize) -> Result<(usize, [f64; 3])> {
    let mut t = start.min(mesh.triangle_count() - 1);
    for _ in 0..mesh.triangle_count() {
        let l = mesh.barycentric(t, p);
        let (j, min) = l
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (j, v)| if v < acc.1 { (j, v) } else { acc });
        if min >= -BARY_TOL {
            return Ok((t, l));
        }
        // cross the edge opposite the most negative coordinate
        match mesh.neighbor(t, (j + 1) % 3) {
            Some(next) => t = next,
            None => break,
        }
    }
    let mut best = (usize::MAX, f64::NEG_INFINITY, [0.0; 3]);
    for t in 0..mesh.triangle_count() {
        let l = mesh.barycentric(t, p);
        let min = l[0].min(l[1]).min(l[2]);
        if min > best.1 {
            best = (t, min, l);
        }
    }
    if best.1 >= -BARY_TOL {
        Ok((best.0, best.2))
    } else {
        Err(Error::PointLocation { x: p[0], y: p[1] })
    }
}

/// Evaluates the P1 interpolant of `values` (on `from`) at every node of `to`.
pub fn transfer(values: &[f64], from: &Mesh, to: &Mesh) -> Result<Vec<f64>> {
    if values.len() != from.node_count() {
        return Err(Error::MeshMismatch(format!(
            "{} values for a source mesh with {} nodes",
            values.len(),
            from.node_count()
        )));
    }
    if from.same_geometry(to) {
        return Ok(values.to_vec());
    }
    let mut hint = 0;
    to.nodes()
        .iter()
        .map(|&p| {
            let (t, l) = locate(from, p, hint)?;
            hint = t;
            let [a, b, c] = from.triangle(t);
            Ok(l[0] * values[a] + l[1] * values[b] + l[2] * values[c])
        })
        .collect()
}

/// [`transfer`] for a [`NodalField`].
pub fn transfer_field(field: &NodalField, from: &Mesh, to: &Mesh) -> Result<NodalField> {
    field.check_on(from)?;
    NodalField::new(to, transfer(field.values(), from, to)?)
}
