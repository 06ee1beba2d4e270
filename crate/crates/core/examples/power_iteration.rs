//! Matches a small P3P instance with both tensor solvers.

use geomatch::geometry::MinimalProblemKind;
use geomatch::matching::{accuracy, discretize, AssignmentMatrix, IterationOptions, SolverVariant};
use geomatch::sim::ExperimentConfig;
use geomatch::tensor::{build_tensor, sample_hyperedges, DEFAULT_RHO};

fn main() {
    let mut cfg = ExperimentConfig::new(MinimalProblemKind::P3P);
    cfg.n = 6;
    let inst = cfg.instance(0).expect("instance");
    let mut rng = cfg.instance_rng(0, 1);
    // 6*5*4*3 = 360 ordered row tuples; 20k samples cover every exact edge
    let edges = sample_hyperedges(6, 6, 4, 20_000, &mut rng).unwrap();
    let tensor = build_tensor(&inst, &edges, DEFAULT_RHO).unwrap();
    println!("{} distinct non-zero entries from {} samples", tensor.len(), edges.len());
    println!("ground truth: {:?}", inst.ground_truth);

    let x0 = AssignmentMatrix::uniform(6, 6);
    for variant in [SolverVariant::Sparse, SolverVariant::Dense] {
        let soft = variant.solve(&tensor, &x0, &IterationOptions::default()).unwrap();
        let hard = discretize(&soft);
        let found: Vec<usize> = hard.row_assignment().into_iter().map(Option::unwrap).collect();
        println!("\n{variant}: {found:?}  accuracy {:.2}", accuracy(&hard, &inst.ground_truth, 6));
        for r in 0..soft.rows() {
            let row: Vec<String> = soft.row(r).iter().map(|v| format!("{v:.2}")).collect();
            println!("  {}", row.join(" "));
        }
    }
}
