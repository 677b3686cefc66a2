use std::sync::Arc;

use super::sparse::CsrMatrix;
use super::NodalField;
use crate::error::Result;
use crate::mesh::Mesh;

/// Area and constant barycentric gradients of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub area: f64,
    pub grad: [[f64; 2]; 3],
}

impl ElementGeometry {
    pub fn of(mesh: &Mesh, t: usize) -> Self {
        let [p0, p1, p2] = mesh.vertices(t);
        let area = mesh.area(t);
        let inv = 1.0 / (2.0 * area);
        let grad = [
            [(p1[1] - p2[1]) * inv, (p2[0] - p1[0]) * inv],
            [(p2[1] - p0[1]) * inv, (p0[0] - p2[0]) * inv],
            [(p0[1] - p1[1]) * inv, (p1[0] - p0[0]) * inv],
        ];
        ElementGeometry { area, grad }
    }

    /// Gradient of the P1 interpolant with the given vertex values.
    pub fn gradient(&self, v: [f64; 3]) -> [f64; 2] {
        [
            v[0] * self.grad[0][0] + v[1] * self.grad[1][0] + v[2] * self.grad[2][0],
            v[0] * self.grad[0][1] + v[1] * self.grad[1][1] + v[2] * self.grad[2][1],
        ]
    }

    fn stiffness(&self) -> [[f64; 3]; 3] {
        let mut k = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                k[i][j] = self.area * (self.grad[i][0] * self.grad[j][0] + self.grad[i][1] * self.grad[j][1]);
            }
        }
        k
    }
}

const MASS_REF: [[f64; 3]; 3] = [[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]];

/// P1 space on a mesh with its cached geometry, sparsity pattern, mass
/// matrix and unit-coefficient stiffness matrix.
///
/// All matrices produced by one space share the same pattern, so sums like
/// `M + tau K` are a single pass over the values. Assembly visits triangles
/// in index order, which keeps floating-point results reproducible.
#[derive(Debug, Clone)]
pub struct FemSpace {
    mesh: Arc<Mesh>,
    geometry: Vec<ElementGeometry>,
    local_stiffness: Vec<[[f64; 3]; 3]>,
    slots: Vec<[usize; 9]>,
    pattern: CsrMatrix,
    mass: CsrMatrix,
    lumped: Vec<f64>,
    laplace: CsrMatrix,
}

impl FemSpace {
    pub fn new(mesh: Arc<Mesh>) -> Self {
        let n = mesh.node_count();
        let mut triplets = Vec::with_capacity(9 * mesh.triangle_count());
        for tri in mesh.triangles() {
            for &i in tri {
                for &j in tri {
                    triplets.push((i, j, 0.0));
                }
            }
        }
        let pattern = CsrMatrix::from_triplets(n, n, &triplets);
        let slots = mesh
            .triangles()
            .iter()
            .map(|tri| {
                let mut s = [0usize; 9];
                for a in 0..3 {
                    for b in 0..3 {
                        s[3 * a + b] = pattern.slot(tri[a], tri[b]).expect("pattern covers element");
                    }
                }
                s
            })
            .collect();
        let geometry: Vec<ElementGeometry> = (0..mesh.triangle_count())
            .map(|t| ElementGeometry::of(&mesh, t))
            .collect();
        let local_stiffness = geometry.iter().map(|g| g.stiffness()).collect();
        let mut space = FemSpace {
            mesh,
            geometry,
            local_stiffness,
            slots,
            mass: pattern.clone(),
            lumped: Vec::new(),
            laplace: pattern.clone(),
            pattern,
        };
        space.mass = space.assemble(|t, k| {
            let a = space.geometry[t].area / 12.0;
            for i in 0..3 {
                for j in 0..3 {
                    k[i][j] = a * MASS_REF[i][j];
                }
            }
        });
        space.laplace = space.assemble(|t, k| *k = space.local_stiffness[t]);
        space.lumped = (0..n).map(|i| space.mass.row(i).map(|(_, v)| v).sum()).collect();
        space
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn node_count(&self) -> usize {
        self.mesh.node_count()
    }

    pub fn geometry(&self, t: usize) -> &ElementGeometry {
        &self.geometry[t]
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    /// Row sums of the mass matrix, `int phi_i`.
    pub fn lumped_mass(&self) -> &[f64] {
        &self.lumped
    }

    /// Empty matrix on the shared pattern.
    pub fn zero_matrix(&self) -> CsrMatrix {
        self.pattern.clone()
    }

    /// Stiffness matrix with unit coefficient.
    pub fn laplace(&self) -> &CsrMatrix {
        &self.laplace
    }

    /// Assembles element matrices produced by `local(t, &mut k)` onto the
    /// shared pattern, in triangle order.
    pub fn assemble(&self, mut local: impl FnMut(usize, &mut [[f64; 3]; 3])) -> CsrMatrix {
        let mut values = vec![0.0; self.pattern.nnz()];
        for (t, slots) in self.slots.iter().enumerate() {
            let mut k = [[0.0; 3]; 3];
            local(t, &mut k);
            for a in 0..3 {
                for b in 0..3 {
                    values[slots[3 * a + b]] += k[a][b];
                }
            }
        }
        self.pattern.with_values(values)
    }

    /// `K_ij = sum_T cbar_T int_T grad(phi_i) . grad(phi_j)` where `cbar_T` is
    /// the mean of the nodal coefficient over the vertices of `T`.
    pub fn stiffness(&self, coeff: &[f64]) -> CsrMatrix {
        assert_eq!(coeff.len(), self.node_count());
        let tris = self.mesh.triangles();
        self.assemble(|t, k| {
            let [a, b, c] = tris[t];
            let cbar = (coeff[a] + coeff[b] + coeff[c]) / 3.0;
            for i in 0..3 {
                for j in 0..3 {
                    k[i][j] = cbar * self.local_stiffness[t][i][j];
                }
            }
        })
    }

    /// Gradient of the P1 interpolant of `values` on triangle `t`.
    pub fn gradient(&self, t: usize, values: &[f64]) -> [f64; 2] {
        let [a, b, c] = self.mesh.triangle(t);
        self.geometry[t].gradient([values[a], values[b], values[c]])
    }

    /// `f^T M g`, the L2 inner product of two P1 fields.
    pub fn mass_inner(&self, f: &[f64], g: &[f64]) -> f64 {
        let mg = self.mass.mul_vec(g);
        f.iter().zip(&mg).map(|(a, b)| a * b).sum()
    }
}

/// Consistent P1 mass matrix.
pub fn assemble_mass(mesh: &Mesh) -> CsrMatrix {
    FemSpace::new(Arc::new(mesh.clone())).mass.clone()
}

/// P1 stiffness matrix with an elementwise-mean nodal coefficient.
/// Negative coefficient values are clamped to zero.
pub fn assemble_stiffness(mesh: &Mesh, coeff: &NodalField) -> Result<CsrMatrix> {
    coeff.check_on(mesh)?;
    let clamped: Vec<f64> = coeff.values().iter().map(|c| c.max(0.0)).collect();
    Ok(FemSpace::new(Arc::new(mesh.clone())).stiffness(&clamped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::make_uniform_mesh;

    #[test]
    fn single_triangle_mass() {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let mesh = Mesh::new(nodes, vec![[0, 1, 2], [1, 3, 2]]).unwrap();
        let m = assemble_mass(&mesh);
        let a = 0.5 / 12.0;
        assert!((m.get(0, 0) - 2.0 * a).abs() < 1e-15);
        assert!((m.get(0, 1) - a).abs() < 1e-15);
        assert_eq!(m.get(0, 3), 0.0);
    }

    #[test]
    fn mass_sums_to_area() {
        let m = assemble_mass(&make_uniform_mesh(5).unwrap());
        let s: f64 = m.values().iter().sum();
        assert!((s - 1.0).abs() < 1e-13);
        assert!(m.max_asymmetry() < 1e-15);
        assert!(m.values().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn stiffness_kills_constants() {
        let mesh = make_uniform_mesh(4).unwrap();
        let coeff = NodalField::from_fn(&mesh, |x, y| 1.0 + x * y);
        let k = assemble_stiffness(&mesh, &coeff).unwrap();
        for r in k.mul_vec(&vec![1.0; mesh.node_count()]) {
            assert!(r.abs() < 1e-12);
        }
        let zero = assemble_stiffness(&mesh, &NodalField::zeros(&mesh)).unwrap();
        assert!(zero.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn energy_of_linear_field() {
        let mesh = make_uniform_mesh(4).unwrap();
        let k = assemble_stiffness(&mesh, &NodalField::constant(&mesh, 1.0)).unwrap();
        let v: Vec<f64> = mesh.nodes().iter().map(|p| p[0]).collect();
        let kv = k.mul_vec(&v);
        let e: f64 = v.iter().zip(&kv).map(|(a, b)| a * b).sum();
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_coefficient_is_clamped() {
        let mesh = make_uniform_mesh(2).unwrap();
        let k = assemble_stiffness(&mesh, &NodalField::constant(&mesh, -3.0)).unwrap();
        assert!(k.values().iter().all(|v| *v == 0.0));
    }
}
