//! Scores a correct and a corrupted hyper-edge for each minimal problem.
//!
//! The correct edge pairs every row with its true column; the corrupted one
//! moves its last correspondence to a wrong column. A single edge can mislead
//! (3P1 roots all sit near 1), so medians over many instances follow.

use geomatch::geometry::MinimalProblemKind;
use geomatch::polynomials::ResultantBackend;
use geomatch::sim::{ExperimentConfig, ProblemInstance};
use geomatch::tensor::{
    affinity_from_resultant, edge_polynomials, edge_resultant, Correspondence, EdgeTuple,
    DEFAULT_RHO,
};

fn edges(inst: &ProblemInstance) -> (EdgeTuple, EdgeTuple) {
    let d = inst.kind.edge_order();
    let good: Vec<Correspondence> =
        (0..d).map(|r| Correspondence::new(r, inst.ground_truth[r])).collect();
    let mut bad = good.clone();
    bad[d - 1].col = inst.ground_truth[d];
    (EdgeTuple::new(&good), EdgeTuple::new(&bad))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn main() {
    for kind in MinimalProblemKind::ALL {
        let cfg = ExperimentConfig::new(kind);
        let inst = cfg.instance(0).expect("instance");
        let d = kind.edge_order();
        let (good, bad) = edges(&inst);

        println!("{kind} (edge order {d}, degree {})", kind.polynomial_degree());
        for (label, edge) in [("correct", good), ("one wrong match", bad)] {
            let (p, q) = edge_polynomials(&inst, &edge).expect("non-degenerate edge");
            let r = edge_resultant(&inst, &edge, ResultantBackend::Qr).unwrap_or(f64::INFINITY);
            println!("  {label}");
            println!("    p = {:?}", p.normalize().unwrap().coeffs());
            println!("    q = {:?}", q.normalize().unwrap().coeffs());
            println!("    resultant {r:.3e}  affinity {:.3}", affinity_from_resultant(r, DEFAULT_RHO));
        }
        let (mut good, mut bad) = (Vec::new(), Vec::new());
        for i in 0..200 {
            let inst = cfg.instance(i).expect("instance");
            let (g, b) = edges(&inst);
            let res = |e| edge_resultant(&inst, e, ResultantBackend::Qr).unwrap_or(f64::INFINITY);
            good.push(res(&g));
            bad.push(res(&b));
        }
        println!("  median over 200 instances: correct {:.1e}, one wrong match {:.1e}", median(good), median(bad));
    }
}
