//! Bulk marking and red-green-blue refinement.

use std::collections::BTreeSet;

use super::Mesh;
use crate::error::{Error, Result};

/// Smallest set of triangles whose squared indicators sum to at least
/// `theta` times the total.
///
/// Triangles are taken greedily by descending `eta^2`, ties broken by
/// ascending index. Triangles with a zero indicator are never marked.
pub fn bulk_mark(eta: &[f64], theta: f64) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::invalid(format!("bulk fraction {theta} outside [0, 1]")));
    }
    if let Some(bad) = eta.iter().position(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(Error::invalid(format!("indicator {bad} is negative or not finite")));
    }
    let mut order: Vec<usize> = (0..eta.len()).collect();
    order.sort_by(|&a, &b| {
        let (ea, eb) = (eta[a] * eta[a], eta[b] * eta[b]);
        eb.total_cmp(&ea).then(a.cmp(&b))
    });
    // summing in the sorted order makes the full partial sum equal the total exactly
    let total: f64 = order.iter().map(|&t| eta[t] * eta[t]).sum();
    let target = theta * total;
    let mut marked = Vec::new();
    let mut acc = 0.0;
    for t in order {
        if acc >= target || eta[t] == 0.0 {
            break;
        }
        acc += eta[t] * eta[t];
        marked.push(t);
    }
    Ok(marked)
}

/// Result of a refinement: the new mesh plus, for every node appended after
/// the parent's nodes, the parent edge whose midpoint it is.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub mesh: Mesh,
    pub midpoint_of: Vec<[usize; 2]>,
}

impl Refinement {
    /// Prolongs a parent nodal field to the refined mesh (exact for P1).
    pub fn prolong(&self, parent: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.mesh.node_count());
        out.extend_from_slice(parent);
        out.extend(self.midpoint_of.iter().map(|&[a, b]| 0.5 * (parent[a] + parent[b])));
        out
    }
}

/// Red-green-blue refinement of the marked triangles.
///
/// Marked triangles get all three edges bisected (red). The closure then marks
/// the refinement edge of every triangle that has any bisected edge, and
/// unmarked triangles are split green (refinement edge only) or blue
/// (refinement edge plus one more). The result is conforming.
pub fn rgb_refine(mesh: &Mesh, marked: &[usize]) -> Result<Refinement> {
    if let Some(&bad) = marked.iter().find(|&&t| t >= mesh.triangle_count()) {
        return Err(Error::invalid(format!("marked triangle {bad} does not exist")));
    }
    let marked: BTreeSet<usize> = marked.iter().copied().collect();
    if marked.is_empty() {
        return Ok(Refinement {
            mesh: mesh.clone(),
            midpoint_of: Vec::new(),
        });
    }

    let mut split = vec![false; mesh.edge_count()];
    let mut queue: Vec<usize> = Vec::new();
    for &t in &marked {
        for e in mesh.triangle_edges(t) {
            if !split[e] {
                split[e] = true;
                queue.push(e);
            }
        }
    }
    // closure: a triangle with any split edge must split its refinement edge
    while let Some(e) = queue.pop() {
        let edge = &mesh.edges()[e];
        for t in [edge.triangles[0], edge.triangles[1]] {
            let r = mesh.triangle_edges(t)[mesh.refinement_edge(t)];
            if !split[r] {
                split[r] = true;
                queue.push(r);
            }
        }
    }

    let mut nodes = mesh.nodes().to_vec();
    let mut midpoint = vec![usize::MAX; mesh.edge_count()];
    let mut midpoint_of = Vec::new();
    for (e, edge) in mesh.edges().iter().enumerate() {
        if split[e] {
            let [a, b] = edge.nodes;
            let (p, q) = (mesh.node(a), mesh.node(b));
            midpoint[e] = nodes.len();
            nodes.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            midpoint_of.push([a, b]);
        }
    }

    let mut triangles = Vec::with_capacity(mesh.triangle_count() + 3 * marked.len());
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangle(t);
        let edges = mesh.triangle_edges(t);
        let r = mesh.refinement_edge(t);
        // rotate so that (a, b) is the refinement edge and c the opposite vertex
        let (a, b, c) = (tri[r], tri[(r + 1) % 3], tri[(r + 2) % 3]);
        let (e_ab, e_bc, e_ca) = (edges[r], edges[(r + 1) % 3], edges[(r + 2) % 3]);
        let (s_ab, s_bc, s_ca) = (split[e_ab], split[e_bc], split[e_ca]);
        let (m_ab, m_bc, m_ca) = (midpoint[e_ab], midpoint[e_bc], midpoint[e_ca]);
        match (s_ab, s_bc, s_ca) {
            (false, false, false) => triangles.push(tri),
            (true, false, false) => {
                triangles.push([a, m_ab, c]);
                triangles.push([m_ab, b, c]);
            }
            (true, true, false) => {
                triangles.push([a, m_ab, c]);
                triangles.push([m_ab, b, m_bc]);
                triangles.push([m_ab, m_bc, c]);
            }
            (true, false, true) => {
                triangles.push([a, m_ab, m_ca]);
                triangles.push([m_ab, c, m_ca]);
                triangles.push([m_ab, b, c]);
            }
            (true, true, true) => {
                triangles.push([a, m_ab, m_ca]);
                triangles.push([m_ab, b, m_bc]);
                triangles.push([m_ca, m_bc, c]);
                triangles.push([m_ab, m_bc, m_ca]);
            }
            _ => unreachable!("closure marks the refinement edge of every split triangle"),
        }
    }

    let mesh = Mesh::new(nodes, triangles)?;
    Ok(Refinement { mesh, midpoint_of })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::make_uniform_mesh;

    #[test]
    fn bulk_mark_edges() {
        let eta: Vec<f64> = [4.0f64, 3.0, 2.0, 1.0].iter().map(|v| v.sqrt()).collect();
        assert!(bulk_mark(&eta, 0.0).unwrap().is_empty());
        assert_eq!(bulk_mark(&eta, 0.5).unwrap(), vec![0, 1]);
        assert_eq!(bulk_mark(&eta, 1.0).unwrap(), vec![0, 1, 2, 3]);
        let with_zero = [1.0, 0.0, 2.0];
        assert_eq!(bulk_mark(&with_zero, 1.0).unwrap(), vec![2, 0]);
        assert!(bulk_mark(&eta, 1.5).is_err());
    }

    #[test]
    fn bulk_mark_ties_by_index() {
        let eta = [1.0, 2.0, 2.0, 1.0];
        assert_eq!(bulk_mark(&eta, 0.3).unwrap(), vec![1]);
        assert_eq!(bulk_mark(&eta, 0.5).unwrap(), vec![1, 2]);
        assert_eq!(bulk_mark(&eta, 0.9).unwrap(), vec![1, 2, 0]);
    }

    #[test]
    fn empty_marking_is_identity() {
        let m = make_uniform_mesh(3).unwrap();
        let r = rgb_refine(&m, &[]).unwrap();
        assert!(r.mesh.same_geometry(&m));
        assert!(r.midpoint_of.is_empty());
    }

    #[test]
    fn marking_everything_quadruples() {
        let m = make_uniform_mesh(3).unwrap();
        let all: Vec<usize> = (0..m.triangle_count()).collect();
        let r = rgb_refine(&m, &all).unwrap();
        assert_eq!(r.mesh.triangle_count(), 4 * m.triangle_count());
        assert_eq!(r.mesh.node_count(), 49);
        assert!((r.mesh.total_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_mark_closes_with_green_and_blue() {
        let m = make_uniform_mesh(2).unwrap();
        let r = rgb_refine(&m, &[3]).unwrap();
        assert!(r.mesh.triangle_count() > m.triangle_count() + 3);
        assert_eq!(&r.mesh.nodes()[..m.node_count()], m.nodes());
        assert!((r.mesh.total_area() - 1.0).abs() < 1e-12);
        let parent = vec![1.0; m.node_count()];
        assert!(r.prolong(&parent).iter().all(|&v| v == 1.0));
    }

    #[test]
    fn rejects_unknown_triangle() {
        let m = make_uniform_mesh(1).unwrap();
        assert!(rgb_refine(&m, &[2]).is_err());
    }
}
