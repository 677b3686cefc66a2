//! P1 finite elements: sparse matrices, assembly, Krylov solvers and
//! field transfer between meshes.

mod assembly;
mod krylov;
mod sparse;
mod transfer;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

pub use assembly::{assemble_mass, assemble_stiffness, ElementGeometry, FemSpace};
pub use krylov::{gmres, pcg, solve_spd, KrylovOptions};
pub use sparse::CsrMatrix;
pub use transfer::{locate, transfer, transfer_field};

/// One real value per node of a specific mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    mesh_id: u64,
    values: Vec<f64>,
}

impl NodalField {
    pub fn new(mesh: &Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.node_count() {
            return Err(Error::MeshMismatch(format!(
                "{} values for a mesh with {} nodes",
                values.len(),
                mesh.node_count()
            )));
        }
        Ok(NodalField {
            mesh_id: mesh.id(),
            values,
        })
    }

    pub fn constant(mesh: &Mesh, value: f64) -> Self {
        NodalField {
            mesh_id: mesh.id(),
            values: vec![value; mesh.node_count()],
        }
    }

    pub fn zeros(mesh: &Mesh) -> Self {
        Self::constant(mesh, 0.0)
    }

    /// Nodal interpolant of `f`.
    pub fn from_fn(mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Self {
        NodalField {
            mesh_id: mesh.id(),
            values: mesh.nodes().iter().map(|p| f(p[0], p[1])).collect(),
        }
    }

    pub fn mesh_id(&self) -> u64 {
        self.mesh_id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn lives_on(&self, mesh: &Mesh) -> bool {
        self.mesh_id == mesh.id() && self.values.len() == mesh.node_count()
    }

    pub fn check_on(&self, mesh: &Mesh) -> Result<()> {
        if self.lives_on(mesh) {
            Ok(())
        } else {
            Err(Error::MeshMismatch(format!(
                "field with {} values does not belong to mesh {:016x}",
                self.values.len(),
                mesh.id()
            )))
        }
    }
}
