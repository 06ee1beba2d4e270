//! Synthetic instances and the accuracy-versus-samples protocol.
//!
//! Every instance draws from its own ChaCha8 stream so results do not depend
//! on how instances are scheduled across threads. For instance `k` and a run
//! seed `s`, the generator uses `ChaCha8Rng::seed_from_u64(s)` on stream
//! `2k`; corruption and hyper-edge sampling use stream `2k + 1`, restarted for
//! every (noise, outlier) cell so all cells share outlier positions and the
//! standard-normal noise draws.

use std::f64::consts::TAU;

use nalgebra::Vector3;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{project, rot_z, Camera, Intrinsics, MinimalProblemKind, Point2, Point3};
use crate::matching::{
    accuracy, discretize, AssignmentMatrix, IterationOptions, MatchError, SolverVariant,
};
use crate::tensor::{sample_hyperedges, score_edges, SparseAffinityTensor, TensorError, DEFAULT_RHO};

pub const IMAGE_WIDTH: f64 = 640.0;
pub const IMAGE_HEIGHT: f64 = 480.0;
/// Radius of the sphere carrying the camera centers.
pub const CAMERA_RADIUS: f64 = 12.0;
/// Half side of the cube holding the 3D points.
pub const CUBE_HALF_SIDE: f64 = 2.0;

const MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Matching(#[from] MatchError),
    #[error("could not place a visible point after {MAX_REJECTIONS} draws")]
    Visibility,
    #[error("failed to build worker pool: {0}")]
    ThreadPool(String),
}

/// One synthetic matching problem.
///
/// Rows of the assignment are the source items: 3D points for P3P and up2p,
/// first-image points for 3P1. Columns are the points of the last
/// observation list.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub kind: MinimalProblemKind,
    pub intrinsics: Intrinsics,
    pub points3d: Vec<Point3>,
    pub observations: Vec<Vec<Point2>>,
    pub cameras: Vec<Camera>,
    /// `ground_truth[row]` is the true column of each inlier row.
    pub ground_truth: Vec<usize>,
    pub n_inliers: usize,
    pub n_outliers: usize,
    pub motion_labels: Option<Vec<usize>>,
}

impl ProblemInstance {
    pub fn n_rows(&self) -> usize {
        match self.kind {
            MinimalProblemKind::ThreePlusOne => self.observations[0].len(),
            _ => self.points3d.len(),
        }
    }

    pub fn n_cols(&self) -> usize {
        self.target().len()
    }

    /// Observation list the rows are matched into.
    pub fn target(&self) -> &[Point2] {
        self.observations.last().expect("instance has observations")
    }
}

fn in_image(u: &Point2) -> bool {
    (0.0..IMAGE_WIDTH).contains(&u.x) && (0.0..IMAGE_HEIGHT).contains(&u.y)
}

fn uniform_in_cube<R: Rng + ?Sized>(rng: &mut R) -> Point3 {
    let mut coord = || rng.random_range(-CUBE_HALF_SIDE..CUBE_HALF_SIDE);
    Point3::new(coord(), coord(), coord())
}

fn uniform_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Draws points uniformly in the cube, conditioned on the (moved) point being
/// visible in every camera. Returns the original point and its projections.
fn visible_point<R: Rng + ?Sized>(
    rng: &mut R,
    cameras: &[Camera],
    motion: impl Fn(&Point3) -> Point3,
) -> Result<(Point3, Vec<Point2>), SimError> {
    for _ in 0..MAX_REJECTIONS {
        let x = uniform_in_cube(rng);
        let moved = motion(&x);
        let proj: Option<Vec<Point2>> = cameras
            .iter()
            .map(|c| project(&moved, c).ok().filter(in_image))
            .collect();
        if let Some(proj) = proj {
            return Ok((x, proj));
        }
    }
    Err(SimError::Visibility)
}

/// Shuffles `points`; returns the shuffled list and `truth[i]`, the new
/// position of the original item `i`.
fn shuffle_columns<R: Rng + ?Sized>(rng: &mut R, points: Vec<Point2>) -> (Vec<Point2>, Vec<usize>) {
    let mut perm: Vec<usize> = (0..points.len()).collect();
    perm.shuffle(rng);
    let mut shuffled = vec![Point2::origin(); points.len()];
    for (i, &p) in perm.iter().enumerate() {
        shuffled[p] = points[i];
    }
    (shuffled, perm)
}

fn equator_camera_center<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    let a = rng.random_range(0.0..TAU);
    Vector3::new(a.cos(), a.sin(), 0.0) * CAMERA_RADIUS
}

/// Absolute-pose instance: points in the cube, one camera on the sphere
/// looking at the origin.
pub fn gen_p3p_instance<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ProblemInstance, SimError> {
    if n < 4 {
        return Err(SimError::InvalidConfig("p3p needs n >= 4".into()));
    }
    let k = Intrinsics::default();
    let center = uniform_unit_vector(rng) * CAMERA_RADIUS;
    let cam = Camera::looking_at(k, center, Vector3::zeros());
    let mut points = Vec::with_capacity(n);
    let mut image = Vec::with_capacity(n);
    for _ in 0..n {
        let (x, u) = visible_point(rng, &[cam], |p| *p)?;
        points.push(x);
        image.push(u[0]);
    }
    let (image, truth) = shuffle_columns(rng, image);
    Ok(ProblemInstance {
        kind: MinimalProblemKind::P3P,
        intrinsics: k,
        points3d: points,
        observations: vec![image],
        cameras: vec![cam],
        ground_truth: truth,
        n_inliers: n,
        n_outliers: 0,
        motion_labels: None,
    })
}

/// Two level cameras: the first on the equator of the sphere, the second
/// `baseline` away within the equatorial plane, both looking at the origin.
pub fn gen_3p1_instance<R: Rng + ?Sized>(
    n: usize,
    baseline: f64,
    rng: &mut R,
) -> Result<ProblemInstance, SimError> {
    if n < 4 {
        return Err(SimError::InvalidConfig("3p1 needs n >= 4".into()));
    }
    if !(baseline > 0.0) {
        return Err(SimError::InvalidConfig("baseline must be positive".into()));
    }
    let k = Intrinsics::default();
    let c1 = equator_camera_center(rng);
    let dir = rng.random_range(0.0..TAU);
    let c2 = c1 + Vector3::new(dir.cos(), dir.sin(), 0.0) * baseline;
    let cams = [
        Camera::looking_at(k, c1, Vector3::zeros()),
        Camera::looking_at(k, c2, Vector3::zeros()),
    ];
    let mut points = Vec::with_capacity(n);
    let mut first = Vec::with_capacity(n);
    let mut second = Vec::with_capacity(n);
    for _ in 0..n {
        let (x, u) = visible_point(rng, &cams, |p| *p)?;
        points.push(x);
        first.push(u[0]);
        second.push(u[1]);
    }
    let (second, truth) = shuffle_columns(rng, second);
    Ok(ProblemInstance {
        kind: MinimalProblemKind::ThreePlusOne,
        intrinsics: k,
        points3d: points,
        observations: vec![first, second],
        cameras: cams.to_vec(),
        ground_truth: truth,
        n_inliers: n,
        n_outliers: 0,
        motion_labels: None,
    })
}

/// Level camera on the equator. With `motions == 2`, the second half of the
/// points is moved by a random vertical-axis rotation and a random unit
/// translation before projection; `points3d` keeps the unmoved points.
pub fn gen_up2p_instance<R: Rng + ?Sized>(
    n: usize,
    motions: usize,
    rng: &mut R,
) -> Result<ProblemInstance, SimError> {
    if n < 3 {
        return Err(SimError::InvalidConfig("up2p needs n >= 3".into()));
    }
    if !(1..=2).contains(&motions) {
        return Err(SimError::InvalidConfig("motions must be 1 or 2".into()));
    }
    let k = Intrinsics::default();
    let cam = Camera::looking_at(k, equator_camera_center(rng), Vector3::zeros());
    let (rotation, translation) = if motions == 2 {
        (rot_z(rng.random_range(0.0..TAU)), uniform_unit_vector(rng))
    } else {
        (rot_z(0.0), Vector3::zeros())
    };
    let split = if motions == 2 { n / 2 } else { n };
    let mut points = Vec::with_capacity(n);
    let mut image = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = usize::from(i >= split);
        let (x, u) = if label == 0 {
            visible_point(rng, &[cam], |p| *p)?
        } else {
            visible_point(rng, &[cam], |p| Point3::from(rotation * p.coords + translation))?
        };
        points.push(x);
        image.push(u[0]);
        labels.push(label);
    }
    let (image, truth) = shuffle_columns(rng, image);
    Ok(ProblemInstance {
        kind: MinimalProblemKind::Up2p,
        intrinsics: k,
        points3d: points,
        observations: vec![image],
        cameras: vec![cam],
        ground_truth: truth,
        n_inliers: n,
        n_outliers: 0,
        motion_labels: Some(labels),
    })
}

/// Appends `outliers` uniform image points to the last observation list, then
/// adds Gaussian noise of standard deviation `sigma` (pixels) to every 2D
/// point, outliers included.
///
/// Noise is drawn as `sigma * N(0, 1)` with one standard-normal draw per
/// coordinate regardless of `sigma`, so two calls with the same RNG state and
/// different `sigma` perturb along the same directions.
pub fn corrupt<R: Rng + ?Sized>(
    instance: &ProblemInstance,
    sigma: f64,
    outliers: usize,
    rng: &mut R,
) -> ProblemInstance {
    assert!(sigma >= 0.0, "noise level must be nonnegative");
    let mut out = instance.clone();
    let target = out.observations.last_mut().expect("instance has observations");
    for _ in 0..outliers {
        let u = Point2::new(
            rng.random_range(0.0..IMAGE_WIDTH),
            rng.random_range(0.0..IMAGE_HEIGHT),
        );
        target.push(u);
    }
    out.n_outliers += outliers;
    for list in &mut out.observations {
        for u in list.iter_mut() {
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            u.x += sigma * dx;
            u.y += sigma * dy;
        }
    }
    out
}

/// Ten log-spaced sample sizes from 100 to `max`, rounded and deduplicated.
pub fn default_schedule(max: usize) -> Vec<usize> {
    const START: f64 = 100.0;
    const STEPS: usize = 10;
    if max <= 100 {
        return vec![max.max(1)];
    }
    let ratio = (max as f64 / START).ln() / (STEPS - 1) as f64;
    let mut out: Vec<usize> = (0..STEPS)
        .map(|i| (START * (ratio * i as f64).exp()).round() as usize)
        .collect();
    *out.last_mut().unwrap() = max;
    out.dedup();
    out
}

/// Default largest sample count for a problem kind.
pub fn default_samples_max(kind: MinimalProblemKind) -> usize {
    match kind {
        MinimalProblemKind::Up2p => 5_000,
        _ => 20_000,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: MinimalProblemKind,
    pub n: usize,
    pub sigmas: Vec<f64>,
    /// Outlier counts added to the target image.
    pub outliers: Vec<usize>,
    /// Stereo baseline for 3P1, world units.
    pub baseline: f64,
    /// Number of rigid motions for up2p (1 or 2).
    pub motions: usize,
    pub instances: usize,
    /// Strictly increasing sample sizes.
    pub schedule: Vec<usize>,
    pub rho: f64,
    pub solvers: Vec<SolverVariant>,
    pub seed: u64,
    pub iteration: IterationOptions,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    /// Defaults for one problem kind: `n = 10`, 100 instances, noise-free, no
    /// outliers, sparse solver.
    pub fn new(kind: MinimalProblemKind) -> Self {
        Self {
            kind,
            n: 10,
            sigmas: vec![0.0],
            outliers: vec![0],
            baseline: 1.0,
            motions: 1,
            instances: 100,
            schedule: default_schedule(default_samples_max(kind)),
            rho: DEFAULT_RHO,
            solvers: vec![SolverVariant::Sparse],
            seed: 0,
            iteration: IterationOptions::default(),
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        let order = self.kind.edge_order();
        if self.n < order {
            return fail(&format!("{} needs n >= {order}", self.kind));
        }
        if self.instances == 0 {
            return fail("instances must be positive");
        }
        if self.sigmas.is_empty() || self.sigmas.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return fail("noise levels must be finite and nonnegative");
        }
        if self.outliers.is_empty() {
            return fail("at least one outlier count is required");
        }
        if self.schedule.is_empty()
            || self.schedule[0] == 0
            || self.schedule.windows(2).any(|w| w[0] >= w[1])
        {
            return fail("sample schedule must be positive and strictly increasing");
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return fail("rho must be positive");
        }
        if self.solvers.is_empty() {
            return fail("at least one solver is required");
        }
        if self.kind == MinimalProblemKind::ThreePlusOne && !(self.baseline > 0.0) {
            return fail("baseline must be positive");
        }
        if !(1..=2).contains(&self.motions) {
            return fail("motions must be 1 or 2");
        }
        if self.motions == 2 && self.kind != MinimalProblemKind::Up2p {
            return fail("two motions are only simulated for up2p");
        }
        if self.threads == Some(0) {
            return fail("threads must be positive");
        }
        Ok(())
    }

    /// RNG for instance `index`: stream 0 generates, stream 1 corrupts and samples.
    pub fn instance_rng(&self, index: usize, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(2 * index as u64 + stream);
        rng
    }

    /// Generates the clean instance with the given index.
    pub fn instance(&self, index: usize) -> Result<ProblemInstance, SimError> {
        let mut rng = self.instance_rng(index, 0);
        match self.kind {
            MinimalProblemKind::P3P => gen_p3p_instance(self.n, &mut rng),
            MinimalProblemKind::ThreePlusOne => gen_3p1_instance(self.n, self.baseline, &mut rng),
            MinimalProblemKind::Up2p => gen_up2p_instance(self.n, self.motions, &mut rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub samples: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
}

/// Mean accuracy (and population standard deviation) per sample size.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AccuracyCurve {
    pub rows: Vec<CurveRow>,
}

impl AccuracyCurve {
    pub fn last(&self) -> Option<&CurveRow> {
        self.rows.last()
    }
}

/// One experiment cell: a noise level, an outlier count and a solver.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub sigma: f64,
    pub outliers: usize,
    pub solver: SolverVariant,
    pub curve: AccuracyCurve,
}

/// Accuracies of one instance, indexed `[cell][solver][schedule step]`.
type InstanceScores = Vec<Vec<Vec<f64>>>;

/// Solves with `variant`, falling back to the start matrix when the prefix
/// tensor has no support.
fn solve_or_start(
    tensor: &SparseAffinityTensor,
    x0: &AssignmentMatrix,
    variant: SolverVariant,
    opts: &IterationOptions,
) -> Result<AssignmentMatrix, MatchError> {
    match variant.solve(tensor, x0, opts) {
        Err(MatchError::EmptyTensor) => Ok(x0.clone()),
        other => other,
    }
}

/// Runs every solver on every schedule prefix of one corrupted instance.
pub fn evaluate_instance<R: Rng + ?Sized>(
    instance: &ProblemInstance,
    cfg: &ExperimentConfig,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>, SimError> {
    let max = *cfg.schedule.last().expect("validated schedule");
    let samples = sample_hyperedges(
        instance.n_rows(),
        instance.n_cols(),
        instance.kind.edge_order(),
        max,
        rng,
    )?;
    let affinities = score_edges(instance, &samples, cfg.rho);
    let mut tensor = SparseAffinityTensor::new(
        instance.kind.edge_order(),
        instance.n_rows(),
        instance.n_cols(),
    )?;
    let x0 = AssignmentMatrix::uniform(instance.n_rows(), instance.n_cols());
    let mut scores = vec![Vec::with_capacity(cfg.schedule.len()); cfg.solvers.len()];
    let mut filled = 0;
    for &s in &cfg.schedule {
        for (e, &a) in samples[filled..s].iter().zip(&affinities[filled..s]) {
            tensor.insert(e, a);
        }
        filled = s;
        for (slot, &variant) in cfg.solvers.iter().enumerate() {
            let soft = solve_or_start(&tensor, &x0, variant, &cfg.iteration)?;
            let hard = discretize(&soft);
            scores[slot].push(accuracy(&hard, &instance.ground_truth, instance.n_inliers));
        }
    }
    Ok(scores)
}

fn run_instance(cfg: &ExperimentConfig, index: usize) -> Result<InstanceScores, SimError> {
    let clean = cfg.instance(index)?;
    let mut out = Vec::with_capacity(cfg.sigmas.len() * cfg.outliers.len());
    for &outliers in &cfg.outliers {
        for &sigma in &cfg.sigmas {
            let mut rng = cfg.instance_rng(index, 1);
            let noisy = corrupt(&clean, sigma, outliers, &mut rng);
            out.push(evaluate_instance(&noisy, cfg, &mut rng)?);
        }
    }
    Ok(out)
}

/// Runs the full protocol. Cells are ordered by outlier count, then noise
/// level, then solver (in configuration order).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<CellResult>, SimError> {
    cfg.validate()?;
    let work = || -> Result<Vec<InstanceScores>, SimError> {
        (0..cfg.instances)
            .into_par_iter()
            .map(|i| run_instance(cfg, i))
            .collect()
    };
    let per_instance = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| SimError::ThreadPool(e.to_string()))?
            .install(work)?,
        None => work()?,
    };

    let count = cfg.instances as f64;
    let mut cells = Vec::new();
    let mut cell = 0;
    for &outliers in &cfg.outliers {
        for &sigma in &cfg.sigmas {
            for (slot, &solver) in cfg.solvers.iter().enumerate() {
                let rows = cfg
                    .schedule
                    .iter()
                    .enumerate()
                    .map(|(step, &samples)| {
                        // summed in instance order for run-to-run stability
                        let values: Vec<f64> =
                            per_instance.iter().map(|inst| inst[cell][slot][step]).collect();
                        let mean = values.iter().sum::<f64>() / count;
                        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / count;
                        CurveRow {
                            samples,
                            mean_accuracy: mean,
                            std_accuracy: var.sqrt(),
                        }
                    })
                    .collect();
                cells.push(CellResult {
                    sigma,
                    outliers,
                    solver,
                    curve: AccuracyCurve { rows },
                });
            }
            cell += 1;
        }
    }
    Ok(cells)
}
