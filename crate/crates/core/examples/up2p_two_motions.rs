//! up2p with the scene split into two rigid motions.
//!
//! Half of the points move with a second camera pose, so only edges whose rows
//! all belong to one motion carry a common root. The sparse solver still
//! recovers both groups once enough samples are drawn.

use geomatch::geometry::MinimalProblemKind;
use geomatch::matching::SolverVariant;
use geomatch::sim::{default_schedule, run_experiment, ExperimentConfig};

fn main() {
    let mut cfg = ExperimentConfig::new(MinimalProblemKind::Up2p);
    cfg.instances = 10;
    cfg.motions = 2;
    cfg.schedule = default_schedule(50_000);
    cfg.solvers = vec![SolverVariant::Sparse, SolverVariant::Dense];

    let labels = cfg.instance(0).unwrap().motion_labels.unwrap();
    println!("motion label per point in instance 0: {labels:?}");
    for cell in run_experiment(&cfg).expect("valid configuration") {
        let curve: Vec<String> = cell
            .curve
            .rows
            .iter()
            .map(|r| format!("{}:{:.2}", r.samples, r.mean_accuracy))
            .collect();
        println!("{}: {}", cell.solver, curve.join(" "));
    }
}
