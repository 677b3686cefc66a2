//! Conforming triangulations of the unit square.
//!
//! A [`Mesh`] owns its node coordinates, counter-clockwise triangles and the
//! derived edge table. Meshes are immutable once built; refinement returns a
//! new mesh whose first nodes are exactly the nodes of its parent.

mod io;
mod refine;

use std::collections::HashMap;

use crate::error::{Error, Result};

pub use refine::{bulk_mark, rgb_refine, Refinement};

/// Tolerance for node coordinates outside `[0, 1]^2`.
const COORD_TOL: f64 = 1e-12;

/// An edge with its one or two adjacent triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub nodes: [usize; 2],
    pub triangles: [usize; 2],
    pub boundary: bool,
}

impl Edge {
    /// The triangle on the other side of `t`, if any.
    pub fn other(&self, t: usize) -> Option<usize> {
        if self.boundary {
            None
        } else if self.triangles[0] == t {
            Some(self.triangles[1])
        } else {
            Some(self.triangles[0])
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    /// Local edge `k` of a triangle joins its vertices `k` and `(k + 1) % 3`.
    triangle_edges: Vec<[usize; 3]>,
    refinement_edge: Vec<u8>,
    id: u64,
}

impl Mesh {
    /// Builds a mesh from coordinates and node-index triples.
    ///
    /// Clockwise triangles are reoriented. Fails on degenerate triangles,
    /// out-of-range indices, coordinates outside the unit square, edges shared
    /// by more than two triangles, and single-sided edges in the interior of
    /// the square (hanging nodes or holes).
    pub fn new(nodes: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        for (i, p) in nodes.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite() && *c >= -COORD_TOL && *c <= 1.0 + COORD_TOL) {
                return Err(Error::InvalidMesh(format!(
                    "node {i} at ({}, {}) lies outside the unit square",
                    p[0], p[1]
                )));
            }
        }
        let mut triangles = triangles;
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&v| v >= nodes.len()) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing node")));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("triangle {t} repeats a node")));
            }
            let a = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            let scale = longest_sq(&nodes, tri);
            if a.abs() <= 1e-14 * scale {
                return Err(Error::InvalidMesh(format!("triangle {t} is degenerate")));
            }
            if a < 0.0 {
                tri.swap(1, 2);
            }
        }

        let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(triangles.len() * 2);
        let mut edges: Vec<Edge> = Vec::with_capacity(triangles.len() * 2);
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if !edge.boundary {
                            return Err(Error::InvalidMesh(format!(
                                "edge ({}, {}) is shared by more than two triangles",
                                key.0, key.1
                            )));
                        }
                        edge.triangles[1] = t;
                        edge.boundary = false;
                        local[k] = e;
                    }
                    None => {
                        lookup.insert(key, edges.len());
                        local[k] = edges.len();
                        edges.push(Edge {
                            nodes: [key.0, key.1],
                            triangles: [t, t],
                            boundary: true,
                        });
                    }
                }
            }
            triangle_edges.push(local);
        }

        for e in edges.iter().filter(|e| e.boundary) {
            let (p, q) = (nodes[e.nodes[0]], nodes[e.nodes[1]]);
            let on_side = (0..2).any(|c| {
                (p[c].abs() <= COORD_TOL && q[c].abs() <= COORD_TOL)
                    || ((p[c] - 1.0).abs() <= COORD_TOL && (q[c] - 1.0).abs() <= COORD_TOL)
            });
            if !on_side {
                return Err(Error::InvalidMesh(format!(
                    "edge ({}, {}) has one triangle but is not on the domain boundary",
                    e.nodes[0], e.nodes[1]
                )));
            }
        }

        let refinement_edge = triangles
            .iter()
            .map(|tri| longest_local_edge(&nodes, tri))
            .collect();
        let id = fingerprint(&nodes, &triangles);
        Ok(Mesh {
            nodes,
            triangles,
            edges,
            triangle_edges,
            refinement_edge,
            id,
        })
    }

    /// Content fingerprint; equal for meshes with identical nodes and triangles.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, i: usize) -> [f64; 2] {
        self.nodes[i]
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    /// Global edge indices of triangle `t`, local edge `k` opposite vertex `(k + 2) % 3`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    /// Local index (0..3) of the refinement edge of triangle `t`.
    pub fn refinement_edge(&self, t: usize) -> usize {
        self.refinement_edge[t] as usize
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edges[e].boundary
    }

    /// Triangle across local edge `k` of `t`.
    pub fn neighbor(&self, t: usize, k: usize) -> Option<usize> {
        self.edges[self.triangle_edges[t][k]].other(t)
    }

    pub fn vertices(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.vertices(t);
        signed_area(a, b, c)
    }

    /// Longest edge length of triangle `t`.
    pub fn diameter(&self, t: usize) -> f64 {
        longest_sq(&self.nodes, &self.triangles[t]).sqrt()
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].nodes;
        dist(self.nodes[a], self.nodes[b])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangle_count()).map(|t| self.area(t)).sum()
    }

    /// Unit normal of local edge `k`, pointing out of triangle `t`.
    pub fn outward_normal(&self, t: usize, k: usize) -> [f64; 2] {
        let tri = self.triangles[t];
        let p = self.nodes[tri[k]];
        let q = self.nodes[tri[(k + 1) % 3]];
        let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
        let len = dx.hypot(dy);
        // counter-clockwise orientation puts the interior on the left
        [dy / len, -dx / len]
    }

    /// Barycentric coordinates of `p` with respect to triangle `t`.
    pub fn barycentric(&self, t: usize, p: [f64; 2]) -> [f64; 3] {
        let [a, b, c] = self.vertices(t);
        let det = signed_area(a, b, c);
        let l0 = signed_area(p, b, c) / det;
        let l1 = signed_area(a, p, c) / det;
        [l0, l1, 1.0 - l0 - l1]
    }

    /// True when both meshes have bitwise identical nodes and triangles.
    pub fn same_geometry(&self, other: &Mesh) -> bool {
        self.id == other.id && self.nodes == other.nodes && self.triangles == other.triangles
    }
}

/// Uniform `n x n` grid of squares on the unit square, each cut along its
/// lower-left to upper-right diagonal.
pub fn make_uniform_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::invalid("uniform mesh resolution must be at least 1"));
    }
    let h = 1.0 / n as f64;
    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            // exact endpoints keep boundary nodes on the square
            let x = if i == n { 1.0 } else { i as f64 * h };
            let y = if j == n { 1.0 } else { j as f64 * h };
            nodes.push([x, y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let a = j * (n + 1) + i;
            let b = a + 1;
            let c = a + n + 2;
            let d = a + n + 1;
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    Mesh::new(nodes, triangles)
}

pub(crate) fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

fn dist_sq(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    dx * dx + dy * dy
}

fn longest_sq(nodes: &[[f64; 2]], tri: &[usize; 3]) -> f64 {
    (0..3)
        .map(|k| dist_sq(nodes[tri[k]], nodes[tri[(k + 1) % 3]]))
        .fold(0.0, f64::max)
}

fn longest_local_edge(nodes: &[[f64; 2]], tri: &[usize; 3]) -> u8 {
    let mut best = 0u8;
    let mut best_len = dist_sq(nodes[tri[0]], nodes[tri[1]]);
    for k in 1..3 {
        let len = dist_sq(nodes[tri[k]], nodes[tri[(k + 1) % 3]]);
        // ties within rounding keep the lower local index
        if len > best_len * (1.0 + 1e-12) {
            best = k as u8;
            best_len = len;
        }
    }
    best
}

/// FNV-1a over coordinate bits and connectivity.
fn fingerprint(nodes: &[[f64; 2]], triangles: &[[usize; 3]]) -> u64 {
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |w: u64| {
        for byte in w.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(PRIME);
        }
    };
    feed(nodes.len() as u64);
    for p in nodes {
        feed(p[0].to_bits());
        feed(p[1].to_bits());
    }
    feed(triangles.len() as u64);
    for t in triangles {
        for &v in t {
            feed(v as u64);
        }
    }
    h
}
