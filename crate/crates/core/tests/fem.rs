mod common;

use std::sync::Arc;

use acidfront::fem::{assemble_mass, assemble_stiffness, solve_spd, transfer_field, CsrMatrix};
use acidfront::mesh::rgb_refine;
use acidfront::{make_uniform_mesh, FemSpace, NodalField};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dense(a: &CsrMatrix) -> DMatrix<f64> {
    let rows = a.to_dense();
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| rows[i][j])
}

#[test]
fn mass_row_sums_match_per_triangle_areas() {
    let mesh = make_uniform_mesh(2).unwrap();
    let m = assemble_mass(&mesh);
    let mut lumped = vec![0.0; mesh.node_count()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for &i in tri {
            lumped[i] += mesh.area(t) / 3.0;
        }
    }
    for (i, r) in m.mul_vec(&vec![1.0; mesh.node_count()]).iter().enumerate() {
        assert!((r - lumped[i]).abs() < 1e-15, "node {i}: {r} vs {}", lumped[i]);
    }
}

#[test]
fn mass_is_positive_definite() {
    let mesh = rgb_refine(&make_uniform_mesh(8).unwrap(), &[3, 40, 77]).unwrap().mesh;
    let eig = SymmetricEigen::new(dense(&assemble_mass(&mesh)));
    assert!(eig.eigenvalues.min() > 0.0);
}

#[test]
fn stiffness_kernel_is_the_constants() {
    let mesh = make_uniform_mesh(5).unwrap();
    let coeff = NodalField::from_fn(&mesh, |x, y| 0.5 + x * x + y);
    let k = dense(&assemble_stiffness(&mesh, &coeff).unwrap());
    assert!((&k - k.transpose()).amax() < 1e-12);
    let mut ev: Vec<f64> = SymmetricEigen::new(k).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    assert!(ev[0].abs() < 1e-12);
    assert!(ev[1] > 1e-3);
}

#[test]
fn cg_matches_dense_factorization() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 20;
    let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let a = &b * b.transpose() + DMatrix::identity(n, n) * 0.5;
    let mut triplets = Vec::new();
    for i in 0..n {
        for j in 0..n {
            triplets.push((i, j, a[(i, j)]));
        }
    }
    let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x = solve_spd(&CsrMatrix::from_triplets(n, n, &triplets), &rhs, 1e-14).unwrap();
    let exact = a.lu().solve(&DVector::from_vec(rhs)).unwrap();
    for i in 0..n {
        assert!((x[i] - exact[i]).abs() < 1e-8 * exact.amax().max(1.0));
    }
}

#[test]
fn mass_solve_inverts_mass() {
    let mesh = make_uniform_mesh(6).unwrap();
    let m = assemble_mass(&mesh);
    let b: Vec<f64> = (0..mesh.node_count()).map(|i| (i as f64 * 0.7).sin()).collect();
    let x = solve_spd(&m, &b, 1e-12).unwrap();
    let r: f64 = m.mul_vec(&x).iter().zip(&b).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let bn: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(r <= 1e-12 * bn * 1.0001);
}

#[test]
fn neumann_system_keeps_constants() {
    let mesh = make_uniform_mesh(6).unwrap();
    let space = FemSpace::new(Arc::new(mesh.clone()));
    let a = space.mass().add_scaled(0.1, space.laplace());
    let rhs = space.mass().mul_vec(&vec![1.0; mesh.node_count()]);
    for v in solve_spd(&a, &rhs, 1e-13).unwrap() {
        assert!((v - 1.0).abs() < 1e-11);
    }
}

#[test]
fn galerkin_residual_is_orthogonal() {
    // (M + K) u = M f, residual tested against every basis function
    let mesh = make_uniform_mesh(8).unwrap();
    let space = FemSpace::new(Arc::new(mesh.clone()));
    let a = space.mass().add_scaled(1.0, space.laplace());
    let f = NodalField::from_fn(&mesh, |x, y| (3.0 * x).cos() * y);
    let rhs = space.mass().mul_vec(f.values());
    let u = solve_spd(&a, &rhs, 1e-13).unwrap();
    let au = a.mul_vec(&u);
    let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (l, r) in au.iter().zip(&rhs) {
        assert!((l - r).abs() < 1e-11 * scale);
    }
}

#[test]
fn transfer_onto_refined_mesh_is_exact_for_affine() {
    let coarse = make_uniform_mesh(3).unwrap();
    let fine = rgb_refine(&coarse, &[1, 2, 9]).unwrap().mesh;
    let f = NodalField::from_fn(&coarse, |x, y| 2.0 - x + 3.5 * y);
    let g = transfer_field(&f, &coarse, &fine).unwrap();
    for (p, v) in fine.nodes().iter().zip(g.values()) {
        assert!((v - (2.0 - p[0] + 3.5 * p[1])).abs() < 1e-12);
    }
    let back = transfer_field(&g, &fine, &coarse).unwrap();
    assert_eq!(back.values(), f.values());
}
