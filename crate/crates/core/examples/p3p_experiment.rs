//! Accuracy against sample count for P3P, clean and with outliers.
//!
//! A reduced run (20 instances). The full protocol is `geomatch run`.

use geomatch::geometry::MinimalProblemKind;
use geomatch::matching::SolverVariant;
use geomatch::sim::{default_schedule, run_experiment, ExperimentConfig};

fn main() {
    let mut cfg = ExperimentConfig::new(MinimalProblemKind::P3P);
    cfg.instances = 20;
    cfg.outliers = vec![0, 5];
    cfg.schedule = default_schedule(50_000);
    cfg.solvers = vec![SolverVariant::Sparse, SolverVariant::Dense];

    let cells = run_experiment(&cfg).expect("valid configuration");
    print!("{:>18}", "samples");
    for s in &cfg.schedule {
        print!("{s:>7}");
    }
    println!();
    for cell in &cells {
        print!("{:>18}", format!("{} +{} out", cell.solver, cell.outliers));
        for row in &cell.curve.rows {
            print!("{:>7.2}", row.mean_accuracy);
        }
        println!();
    }
}
