mod common;

use common::{root_residual, median, true_unknown};
use geomatch::geometry::{p3p_quartic, MinimalProblemKind, Point3};
use geomatch::polynomials::{normalized_resultant, ResultantBackend};
use geomatch::sim::ExperimentConfig;
use geomatch::tensor::{edge_polynomials, minimal_polynomial, sample_hyperedges, Correspondence};
use geomatch::ProblemInstance;
use nalgebra::{Rotation3, Vector3};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instances(kind: MinimalProblemKind, count: usize, seed: u64) -> Vec<ProblemInstance> {
    let mut cfg = ExperimentConfig::new(kind);
    cfg.seed = seed;
    (0..count).map(|i| cfg.instance(i).unwrap()).collect()
}

fn correct_set(inst: &ProblemInstance, rows: &[usize]) -> Vec<Correspondence> {
    rows.iter().map(|&r| Correspondence::new(r, inst.ground_truth[r])).collect()
}

#[test]
fn true_unknown_is_a_root_for_every_kind() {
    for kind in MinimalProblemKind::ALL {
        let m = kind.minimal_set_size();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut worst: f64 = 0.0;
        for inst in instances(kind, 500, 3) {
            for _ in 0..4 {
                let rows = sample(&mut rng, inst.n_rows(), m).into_vec();
                let q = minimal_polynomial(&inst, &correct_set(&inst, &rows)).unwrap();
                let x = true_unknown(&inst, &rows);
                worst = worst.max(root_residual(q.coeffs(), x));
            }
        }
        assert!(worst <= 1e-8, "{kind}: worst residual {worst:e}");
    }
}

#[test]
fn overlapping_exact_sets_share_a_root() {
    for kind in MinimalProblemKind::ALL {
        let m = kind.minimal_set_size();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for inst in instances(kind, 200, 4) {
            let rows = sample(&mut rng, inst.n_rows(), m + 1).into_vec();
            let p = minimal_polynomial(&inst, &correct_set(&inst, &rows[..m])).unwrap();
            let mut other = rows[..m - 1].to_vec();
            other.push(rows[m]);
            let q = minimal_polynomial(&inst, &correct_set(&inst, &other)).unwrap();
            let r = normalized_resultant(&p, &q, ResultantBackend::Qr).unwrap();
            assert!(r <= 1e-8, "{kind}: {r:e}");
        }
    }
}

/// Resultants of minimal sets taken from two unrelated instances.
fn mismatched_resultants(kind: MinimalProblemKind) -> Vec<f64> {
    let m = kind.minimal_set_size();
    let a = instances(kind, 300, 5);
    let b = instances(kind, 300, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut out = Vec::new();
    for (ia, ib) in a.iter().zip(&b) {
        let rows = sample(&mut rng, ia.n_rows(), m).into_vec();
        let p = minimal_polynomial(ia, &correct_set(ia, &rows)).unwrap();
        let rows = sample(&mut rng, ib.n_rows(), m).into_vec();
        let q = minimal_polynomial(ib, &correct_set(ib, &rows)).unwrap();
        out.push(normalized_resultant(&p, &q, ResultantBackend::Qr).unwrap());
    }
    out
}

#[test]
fn unrelated_sets_have_large_resultants_for_up2p() {
    let med = median(mismatched_resultants(MinimalProblemKind::Up2p));
    assert!(med >= 1e-4, "median {med:e}");
}

fn exact_overlap_max(kind: MinimalProblemKind) -> f64 {
    let m = kind.minimal_set_size();
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let mut worst: f64 = 0.0;
    for inst in instances(kind, 300, 5) {
        let rows = sample(&mut rng, inst.n_rows(), m + 1).into_vec();
        let p = minimal_polynomial(&inst, &correct_set(&inst, &rows[..m])).unwrap();
        let mut other = rows[..m - 1].to_vec();
        other.push(rows[m]);
        let q = minimal_polynomial(&inst, &correct_set(&inst, &other)).unwrap();
        worst = worst.max(normalized_resultant(&p, &q, ResultantBackend::Qr).unwrap());
    }
    worst
}

/// Resultants of the two minimal sets of hyper-edges with at least one wrong
/// correspondence, within one instance.
fn wrong_edge_resultants(kind: MinimalProblemKind) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    let mut out = Vec::new();
    for inst in instances(kind, 300, 9) {
        let edges = sample_hyperedges(inst.n_rows(), inst.n_cols(), kind.edge_order(), 20, &mut rng).unwrap();
        for e in edges {
            if e.as_slice().iter().all(|c| inst.ground_truth[c.row] == c.col) {
                continue;
            }
            let (p, q) = edge_polynomials(&inst, &e).unwrap();
            out.push(normalized_resultant(&p, &q, ResultantBackend::Qr).unwrap());
        }
    }
    out
}

#[test]
fn p3p_sets_from_unrelated_instances_are_far_from_exact_overlaps() {
    // The simulated scenes are viewed from far away, so every P3P quartic has
    // its roots near x = 1 and absolute resultants are small. The gap to exact
    // overlaps is what matters.
    let exact = exact_overlap_max(MinimalProblemKind::P3P);
    let med = median(mismatched_resultants(MinimalProblemKind::P3P));
    assert!(med >= 1e3 * exact, "median {med:e}, exact max {exact:e}");
}

#[test]
fn wrong_correspondences_are_far_from_exact_overlaps() {
    for kind in MinimalProblemKind::ALL {
        let exact = exact_overlap_max(kind);
        let med = median(wrong_edge_resultants(kind));
        assert!(med >= 1e3 * exact, "{kind}: median {med:e}, exact max {exact:e}");
    }
}

fn p3p_coeffs(world: [Point3; 3], inst: &ProblemInstance, cols: [usize; 3]) -> Vec<f64> {
    let image = cols.map(|c| inst.target()[c]);
    let q = p3p_quartic(world, image, &inst.intrinsics).unwrap();
    // fix the overall sign so comparisons are meaningful
    let s = q.coeffs()[0].signum();
    q.coeffs().iter().map(|c| c * s).collect()
}

#[test]
fn p3p_quartic_is_invariant_to_rigid_motion_and_scale_of_the_world() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for inst in instances(MinimalProblemKind::P3P, 100, 7) {
        let rows = [0, 1, 2];
        let cols = rows.map(|r| inst.ground_truth[r]);
        let world = rows.map(|r| inst.points3d[r]);
        let base = p3p_coeffs(world, &inst, cols);

        let axis = Vector3::new(rng.random(), rng.random(), rng.random::<f64>() + 0.1);
        let rot = Rotation3::new(axis.normalize() * rng.random_range(0.0..3.0));
        let shift = Vector3::new(rng.random(), rng.random(), rng.random()) * 10.0;
        let moved = world.map(|p| Point3::from(rot * p.coords + shift));
        for (a, b) in base.iter().zip(p3p_coeffs(moved, &inst, cols)) {
            assert!((a - b).abs() < 1e-9);
        }

        let k = rng.random_range(0.1..10.0);
        let scaled = world.map(|p| Point3::from(p.coords * k));
        for (a, b) in base.iter().zip(p3p_coeffs(scaled, &inst, cols)) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn swapping_the_two_unshared_slots_keeps_the_shared_root() {
    // The root x = b/a depends on slots 0 and 1 only, so reordering the third
    // correspondence of a P3P set must not move it.
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for inst in instances(MinimalProblemKind::P3P, 100, 8) {
        let rows = sample(&mut rng, inst.n_rows(), 4).into_vec();
        let x = true_unknown(&inst, &rows);
        for third in [rows[2], rows[3]] {
            let set = correct_set(&inst, &[rows[0], rows[1], third]);
            let q = minimal_polynomial(&inst, &set).unwrap();
            assert!(root_residual(q.coeffs(), x) <= 1e-8);
        }
    }
}
