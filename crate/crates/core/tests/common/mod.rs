//! Helpers shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

use acidfront::Mesh;

/// Independent geometric audit of a triangulation of the unit square.
/// Recomputes everything from raw coordinates and index triples.
pub fn audit(mesh: &Mesh) -> Result<(), String> {
    let nodes = mesh.nodes();
    let tris = mesh.triangles();
    for (i, p) in nodes.iter().enumerate() {
        if !(-1e-12..=1.0 + 1e-12).contains(&p[0]) || !(-1e-12..=1.0 + 1e-12).contains(&p[1]) {
            return Err(format!("node {i} at {p:?} outside the square"));
        }
    }
    let mut total = 0.0;
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    for (t, tri) in tris.iter().enumerate() {
        let [a, b, c] = tri.map(|i| nodes[i]);
        let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
        if !(area > 0.0) {
            return Err(format!("triangle {t} has signed area {area}"));
        }
        total += area;
        for k in 0..3 {
            let (i, j) = (tri[k], tri[(k + 1) % 3]);
            *edges.entry((i.min(j), i.max(j))).or_default() += 1;
        }
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(format!("total area {total}"));
    }
    let on_boundary = |p: [f64; 2], q: [f64; 2]| {
        let side = |v: f64| v.abs() < 1e-14 || (v - 1.0).abs() < 1e-14;
        (side(p[0]) && p[0] == q[0]) || (side(p[1]) && p[1] == q[1])
    };
    for (&(i, j), &count) in &edges {
        match count {
            1 if on_boundary(nodes[i], nodes[j]) => {}
            1 => return Err(format!("interior edge ({i}, {j}) has one triangle")),
            2 => {}
            n => return Err(format!("edge ({i}, {j}) shared by {n} triangles")),
        }
        let (p, q) = (nodes[i], nodes[j]);
        let len2 = (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2);
        for (k, r) in nodes.iter().enumerate() {
            if k == i || k == j {
                continue;
            }
            let cross = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
            let s = ((r[0] - p[0]) * (q[0] - p[0]) + (r[1] - p[1]) * (q[1] - p[1])) / len2;
            if cross.abs() < 1e-14 && s > 1e-12 && s < 1.0 - 1e-12 {
                return Err(format!("hanging node {k} on edge ({i}, {j})"));
            }
        }
    }
    Ok(())
}

/// Relative difference with an absolute floor.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
