//! 3P1 accuracy under image noise for a short and a long stereo baseline.

use geomatch::geometry::MinimalProblemKind;
use geomatch::sim::{run_experiment, ExperimentConfig};

fn main() {
    for baseline in [1.0, 5.0] {
        let mut cfg = ExperimentConfig::new(MinimalProblemKind::ThreePlusOne);
        cfg.instances = 20;
        cfg.baseline = baseline;
        cfg.sigmas = vec![0.0, 0.5, 1.0];
        let cells = run_experiment(&cfg).expect("valid configuration");
        let accs: Vec<String> = cells
            .iter()
            .map(|c| format!("sigma {:.1}: {:.2}", c.sigma, c.curve.last().unwrap().mean_accuracy))
            .collect();
        println!("baseline {baseline}: {}", accs.join(", "));
    }
}
