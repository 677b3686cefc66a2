mod common;

use acidfront::mesh::{bulk_mark, rgb_refine};
use acidfront::{make_uniform_mesh, Mesh};
use proptest::prelude::*;

#[test]
fn paper_coarse_mesh_has_512_triangles() {
    let m = make_uniform_mesh(16).unwrap();
    assert_eq!(m.triangle_count(), 512);
    assert_eq!(m.node_count(), 289);
}

#[test]
fn small_meshes_count() {
    let m = make_uniform_mesh(1).unwrap();
    assert_eq!((m.triangle_count(), m.node_count(), m.edge_count()), (2, 4, 5));
    let m = make_uniform_mesh(2).unwrap();
    assert_eq!((m.triangle_count(), m.node_count()), (8, 9));
    assert!(make_uniform_mesh(0).is_err());
}

#[test]
fn uniform_meshes_pass_audit() {
    for n in 1..=32 {
        let m = make_uniform_mesh(n).unwrap();
        assert_eq!(m.triangle_count(), 2 * n * n);
        assert_eq!(m.node_count(), (n + 1) * (n + 1));
        common::audit(&m).unwrap();
    }
}

#[test]
fn bulk_mark_picks_two_largest() {
    let eta: Vec<f64> = [4.0f64, 3.0, 2.0, 1.0].iter().map(|v| v.sqrt()).collect();
    assert_eq!(bulk_mark(&eta, 0.5).unwrap(), vec![0, 1]);
    // exhaustive check: no single element reaches 5
    assert!(eta.iter().all(|e| e * e < 5.0));
}

#[test]
fn bulk_mark_limits() {
    let eta = [0.3, 0.0, 0.1, 0.2];
    assert!(bulk_mark(&eta, 0.0).unwrap().is_empty());
    let mut all = bulk_mark(&eta, 1.0).unwrap();
    all.sort();
    assert_eq!(all, vec![0, 2, 3]);
    assert!(bulk_mark(&eta, 1.5).is_err());
}

#[test]
fn one_marked_triangle_gives_conforming_mesh() {
    let m = make_uniform_mesh(2).unwrap();
    for t in 0..m.triangle_count() {
        let r = rgb_refine(&m, &[t]).unwrap();
        common::audit(&r.mesh).unwrap();
        assert!(r.mesh.triangle_count() > m.triangle_count());
    }
}

#[test]
fn mesh_text_round_trip() {
    let mut m = make_uniform_mesh(3).unwrap();
    m = rgb_refine(&m, &[0, 5, 7]).unwrap().mesh;
    let mut buf = Vec::new();
    m.write_text(&mut buf).unwrap();
    let back = Mesh::read_text(&buf[..]).unwrap();
    assert_eq!(back.nodes(), m.nodes());
    assert_eq!(back.triangles(), m.triangles());
}

fn refine_sequence(n: usize, picks: &[Vec<u32>]) -> Vec<Mesh> {
    let mut meshes = vec![make_uniform_mesh(n).unwrap()];
    for pick in picks {
        let m = meshes.last().unwrap();
        let marked: Vec<usize> = pick.iter().map(|&p| p as usize % m.triangle_count()).collect();
        meshes.push(rgb_refine(m, &marked).unwrap().mesh);
    }
    meshes
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refinement_keeps_invariants(
        n in 1usize..4,
        picks in prop::collection::vec(prop::collection::vec(any::<u32>(), 0..4), 1..8),
    ) {
        let meshes = refine_sequence(n, &picks);
        for pair in meshes.windows(2) {
            let (old, new) = (&pair[0], &pair[1]);
            prop_assert!(common::audit(new).is_ok(), "{:?}", common::audit(new));
            prop_assert_eq!(&new.nodes()[..old.node_count()], old.nodes());
        }
    }

    #[test]
    fn bulk_mark_is_minimal(
        eta in prop::collection::vec(0.0f64..10.0, 1..40),
        theta in 0.0f64..=1.0,
    ) {
        let marked = bulk_mark(&eta, theta).unwrap();
        let total: f64 = eta.iter().map(|e| e * e).sum();
        let sum: f64 = marked.iter().map(|&t| eta[t] * eta[t]).sum();
        prop_assert!(sum >= theta * total * (1.0 - 1e-12));
        if let Some((&last, rest)) = marked.split_last() {
            let without: f64 = rest.iter().map(|&t| eta[t] * eta[t]).sum();
            prop_assert!(without < theta * total);
            // greedy order: nothing left out is larger than the smallest kept
            let smallest = eta[last];
            for (t, e) in eta.iter().enumerate() {
                if !marked.contains(&t) {
                    prop_assert!(*e <= smallest);
                }
            }
        }
    }
}
