//! Tensor power iteration for higher-order assignment problems.
//!
//! Two variants are provided: the plain power method with a global unit
//! Euclidean norm, and a row-constrained variant that keeps `X = Y o Y` with
//! unit-norm rows of `Y`, so every row of `X` sums to one and the output is
//! close to boolean.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::tensor::SparseAffinityTensor;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("affinity tensor has no nonzero entry")]
    EmptyTensor,
    #[error("initial assignment must be {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    ShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("initial assignment must be strictly positive")]
    NonPositiveStart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignmentMode {
    Soft,
    Hard,
}

/// `rows x cols` nonnegative matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    mode: AssignmentMode,
}

impl AssignmentMatrix {
    pub fn from_values(rows: usize, cols: usize, values: Vec<f64>, mode: AssignmentMode) -> Self {
        assert_eq!(values.len(), rows * cols, "value count does not match shape");
        Self {
            rows,
            cols,
            values,
            mode,
        }
    }

    /// Constant matrix with unit global Euclidean norm.
    pub fn uniform(rows: usize, cols: usize) -> Self {
        let v = 1.0 / ((rows * cols) as f64).sqrt();
        Self::from_values(rows, cols, vec![v; rows * cols], AssignmentMode::Soft)
    }

    /// Random strictly positive start with unit global norm.
    pub fn random_positive<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut values: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(0.5..1.5)).collect();
        let norm = l2(&values);
        values.iter_mut().for_each(|v| *v /= norm);
        Self::from_values(rows, cols, values, AssignmentMode::Soft)
    }

    /// Hard assignment from a row-to-column map.
    pub fn from_assignment(rows: usize, cols: usize, map: &[Option<usize>]) -> Self {
        assert_eq!(map.len(), rows);
        let mut values = vec![0.0; rows * cols];
        for (r, c) in map.iter().enumerate() {
            if let Some(c) = c {
                values[r * cols + c] = 1.0;
            }
        }
        Self::from_values(rows, cols, values, AssignmentMode::Hard)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mode(&self) -> AssignmentMode {
        self.mode
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    /// Column of the 1 in each row, for hard matrices; argmax for soft ones.
    pub fn row_assignment(&self) -> Vec<Option<usize>> {
        (0..self.rows)
            .map(|r| {
                let row = self.row(r);
                let (best, &v) = row
                    .iter()
                    .enumerate()
                    .fold((0, &f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
                (v > 0.0).then_some(best)
            })
            .collect()
    }
}

/// Stopping rule for both solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationOptions {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for IterationOptions {
    fn default() -> Self {
        Self {
            max_iters: 100,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverVariant {
    /// Global Euclidean normalization.
    Dense,
    /// Unit row sums via the square-root reparametrization.
    Sparse,
}

impl SolverVariant {
    pub fn name(self) -> &'static str {
        match self {
            Self::Dense => "dense",
            Self::Sparse => "sparse",
        }
    }

    pub fn solve(
        self,
        tensor: &SparseAffinityTensor,
        x0: &AssignmentMatrix,
        opts: &IterationOptions,
    ) -> Result<AssignmentMatrix, MatchError> {
        match self {
            Self::Dense => power_iteration_dense(tensor, x0, opts),
            Self::Sparse => power_iteration_sparse(tensor, x0, opts),
        }
    }
}

impl fmt::Display for SolverVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dense" => Ok(Self::Dense),
            "sparse" => Ok(Self::Sparse),
            other => Err(format!("unknown solver `{other}` (expected sparse or dense)")),
        }
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn validate(tensor: &SparseAffinityTensor, x0: &AssignmentMatrix) -> Result<(), MatchError> {
    if x0.rows != tensor.n_rows() || x0.cols != tensor.n_cols() {
        return Err(MatchError::ShapeMismatch {
            expected_rows: tensor.n_rows(),
            expected_cols: tensor.n_cols(),
            rows: x0.rows,
            cols: x0.cols,
        });
    }
    if x0.values.iter().any(|&v| !(v > 0.0)) {
        return Err(MatchError::NonPositiveStart);
    }
    if !tensor.has_nonzero() {
        return Err(MatchError::EmptyTensor);
    }
    Ok(())
}

/// Higher-order power method: `v <- H v^(d-1) / ||H v^(d-1)||`.
///
/// The plain step can overshoot for odd orders and lower the multilinear
/// score. When it would, the step is retried as `H v^(d-1) + alpha v` with
/// `alpha` doubling from `||H v^(d-1)||`; the shift keeps the same fixed points
/// and, for a large enough `alpha`, is an ascent step. The returned iterate has
/// unit Euclidean norm and its score is never below that of `x0`.
pub fn power_iteration_dense(
    tensor: &SparseAffinityTensor,
    x0: &AssignmentMatrix,
    opts: &IterationOptions,
) -> Result<AssignmentMatrix, MatchError> {
    const MAX_SHIFT_DOUBLINGS: usize = 60;
    // relative drop that counts as a decrease; smaller ones are rounding
    const DROP_TOL: f64 = 1e-12;
    validate(tensor, x0)?;
    let mut v = x0.values.clone();
    let norm = l2(&v);
    v.iter_mut().for_each(|x| *x /= norm);
    let mut score = tensor.score(&v);
    for _ in 0..opts.max_iters {
        let grad = tensor.contract(&v);
        let grad_norm = l2(&grad);
        if grad_norm == 0.0 {
            break;
        }
        let mut next: Vec<f64> = grad.iter().map(|g| g / grad_norm).collect();
        let mut next_score = tensor.score(&next);
        let mut alpha = grad_norm;
        let mut doublings = 0;
        let drops = |new: f64, old: f64| old - new > DROP_TOL * old;
        while drops(next_score, score) && doublings < MAX_SHIFT_DOUBLINGS {
            next = grad.iter().zip(&v).map(|(g, x)| g + alpha * x).collect();
            let n = l2(&next);
            next.iter_mut().for_each(|x| *x /= n);
            next_score = tensor.score(&next);
            alpha *= 2.0;
            doublings += 1;
        }
        if drops(next_score, score) {
            // numerically stationary
            break;
        }
        let delta = distance(&next, &v);
        v = next;
        score = next_score;
        if delta < opts.tol {
            break;
        }
    }
    Ok(AssignmentMatrix::from_values(
        x0.rows,
        x0.cols,
        v,
        AssignmentMode::Soft,
    ))
}

/// Row-stochastic power iteration.
///
/// Keeps `Y` with unit-norm rows and reports `X = Y o Y`. Each step multiplies
/// `Y` elementwise by the contraction of the tensor with `X`, then rescales
/// every row of `Y` back to unit norm. A row that receives no support keeps
/// its previous values.
pub fn power_iteration_sparse(
    tensor: &SparseAffinityTensor,
    x0: &AssignmentMatrix,
    opts: &IterationOptions,
) -> Result<AssignmentMatrix, MatchError> {
    validate(tensor, x0)?;
    let (rows, cols) = (x0.rows, x0.cols);
    let mut y: Vec<f64> = x0.values.iter().map(|v| v.sqrt()).collect();
    let start = y.clone();
    normalize_rows(&mut y, &start, cols);
    let mut x: Vec<f64> = y.iter().map(|v| v * v).collect();
    for _ in 0..opts.max_iters {
        let grad = tensor.contract(&x);
        let mut next: Vec<f64> = y.iter().zip(&grad).map(|(a, g)| a * g).collect();
        normalize_rows(&mut next, &y, cols);
        let next_x: Vec<f64> = next.iter().map(|v| v * v).collect();
        let delta = distance(&next_x, &x);
        y = next;
        x = next_x;
        if delta < opts.tol {
            break;
        }
    }
    Ok(AssignmentMatrix::from_values(rows, cols, x, AssignmentMode::Soft))
}

/// Scales each row of `y` to unit Euclidean norm; all-zero rows are replaced
/// by the matching row of `fallback`.
fn normalize_rows(y: &mut [f64], fallback: &[f64], cols: usize) {
    for (row, prev) in y.chunks_mut(cols).zip(fallback.chunks(cols)) {
        let norm = l2(row);
        if norm > 0.0 && norm.is_finite() {
            row.iter_mut().for_each(|v| *v /= norm);
        } else {
            let norm = l2(prev);
            for (v, p) in row.iter_mut().zip(prev) {
                *v = p / norm;
            }
        }
    }
}

/// Greedy rounding: repeatedly fixes the largest remaining entry and removes
/// its row and column. Ties go to the lowest row, then the lowest column.
pub fn discretize(x: &AssignmentMatrix) -> AssignmentMatrix {
    let (rows, cols) = (x.rows, x.cols);
    let mut order: Vec<usize> = (0..rows * cols).collect();
    // stable sort keeps row-major order among equal values
    order.sort_by(|&a, &b| x.values[b].total_cmp(&x.values[a]));
    let mut row_used = vec![false; rows];
    let mut col_used = vec![false; cols];
    let mut map = vec![None; rows];
    let mut picks = 0;
    for flat in order {
        if picks == rows.min(cols) {
            break;
        }
        let (r, c) = (flat / cols, flat % cols);
        if row_used[r] || col_used[c] {
            continue;
        }
        row_used[r] = true;
        col_used[c] = true;
        map[r] = Some(c);
        picks += 1;
    }
    AssignmentMatrix::from_assignment(rows, cols, &map)
}

/// Fraction of the first `n_inliers` rows assigned to their true column.
pub fn accuracy(hard: &AssignmentMatrix, ground_truth: &[usize], n_inliers: usize) -> f64 {
    if n_inliers == 0 {
        return 0.0;
    }
    let assigned = hard.row_assignment();
    let good = (0..n_inliers)
        .filter(|&r| assigned[r] == Some(ground_truth[r]))
        .count();
    good as f64 / n_inliers as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{Correspondence, EdgeTuple};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(row: usize, col: usize) -> Correspondence {
        Correspondence::new(row, col)
    }

    fn random_tensor(rng: &mut ChaCha8Rng, order: usize, n: usize, m: usize, entries: usize) -> SparseAffinityTensor {
        let samples = crate::tensor::sample_hyperedges(n, m, order, entries, rng).unwrap();
        let values: Vec<f64> = samples.iter().map(|_| rng.random::<f64>()).collect();
        SparseAffinityTensor::from_scored(order, n, m, &samples, &values).unwrap()
    }

    #[test]
    fn discretize_examples() {
        let perm = AssignmentMatrix::from_assignment(3, 3, &[Some(2), Some(0), Some(1)]);
        assert_eq!(discretize(&perm), perm);

        let x = AssignmentMatrix::from_values(2, 2, vec![0.9, 0.1, 0.2, 0.8], AssignmentMode::Soft);
        assert_eq!(discretize(&x).row_assignment(), vec![Some(0), Some(1)]);

        let x = AssignmentMatrix::from_values(2, 2, vec![0.5; 4], AssignmentMode::Soft);
        assert_eq!(discretize(&x).row_assignment(), vec![Some(0), Some(1)]);
    }

    #[test]
    fn discretize_non_square() {
        let x = AssignmentMatrix::from_values(2, 3, vec![0.1, 0.2, 0.9, 0.3, 0.1, 0.8], AssignmentMode::Soft);
        let h = discretize(&x);
        assert_eq!(h.row_assignment(), vec![Some(2), Some(0)]);
        assert_eq!(h.mode(), AssignmentMode::Hard);
    }

    #[test]
    fn accuracy_examples() {
        let gt = [3, 1, 0, 2];
        let exact = AssignmentMatrix::from_assignment(4, 4, &gt.map(Some));
        assert_eq!(accuracy(&exact, &gt, 4), 1.0);
        let shifted: Vec<Option<usize>> = (0..4).map(|r| Some(gt[(r + 1) % 4])).collect();
        assert_eq!(accuracy(&AssignmentMatrix::from_assignment(4, 4, &shifted), &gt, 4), 0.0);
        let half = [Some(3), Some(1), Some(2), Some(0)];
        assert_eq!(accuracy(&AssignmentMatrix::from_assignment(4, 4, &half), &gt, 4), 0.5);
    }

    #[test]
    fn errors() {
        let t = SparseAffinityTensor::new(3, 3, 3).unwrap();
        let x0 = AssignmentMatrix::uniform(3, 3);
        assert_eq!(power_iteration_dense(&t, &x0, &Default::default()), Err(MatchError::EmptyTensor));
        assert_eq!(power_iteration_sparse(&t, &x0, &Default::default()), Err(MatchError::EmptyTensor));
        let mut t = t;
        t.insert(&EdgeTuple::new(&[c(0, 0), c(1, 1), c(2, 2)]), 1.0);
        let bad = AssignmentMatrix::from_values(3, 3, vec![0.0; 9], AssignmentMode::Soft);
        assert_eq!(power_iteration_dense(&t, &bad, &Default::default()), Err(MatchError::NonPositiveStart));
        let wrong_shape = AssignmentMatrix::uniform(2, 3);
        assert!(matches!(
            power_iteration_sparse(&t, &wrong_shape, &Default::default()),
            Err(MatchError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn single_entry_concentrates_mass() {
        let mut t = SparseAffinityTensor::new(3, 4, 4).unwrap();
        let e = EdgeTuple::new(&[c(0, 2), c(1, 0), c(3, 1)]);
        t.insert(&e, 0.8);
        let x0 = AssignmentMatrix::uniform(4, 4);

        let dense = power_iteration_dense(&t, &x0, &Default::default()).unwrap();
        for corr in e.as_slice() {
            assert_abs_diff_eq!(dense.get(corr.row, corr.col), 1.0 / 3f64.sqrt(), epsilon = 1e-8);
        }

        let sparse = power_iteration_sparse(&t, &x0, &Default::default()).unwrap();
        for corr in e.as_slice() {
            assert!(sparse.get(corr.row, corr.col) > 1.0 - 1e-6);
        }
        // untouched row stays uniform
        for col in 0..4 {
            assert_abs_diff_eq!(sparse.get(2, col), 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn rank_one_tensor_recovers_indicator() {
        // u = (1, 0, 0, 1) / sqrt(2) on a 2x2 assignment. Off the diagonal,
        // u (x) u is nonzero only at {(0,0), (1,1)}, which is this single entry.
        let mut t = SparseAffinityTensor::new(2, 2, 2).unwrap();
        t.insert(&EdgeTuple::new(&[c(0, 0), c(1, 1)]), 0.5);
        let x0 = AssignmentMatrix::uniform(2, 2);
        let v = power_iteration_dense(&t, &x0, &Default::default()).unwrap();
        let s = 1.0 / 2f64.sqrt();
        for (got, want) in v.values().iter().zip([s, 0.0, 0.0, s]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn order_two_matches_perron_vector() {
        // order-2 tensors are symmetric matrices; the power method must land on
        // the eigenvector of the largest eigenvalue
        use nalgebra::{DMatrix, SymmetricEigen};
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let t = random_tensor(&mut rng, 2, 3, 3, 25);
            let n = t.dim();
            let mut m = DMatrix::<f64>::zeros(n, n);
            for (idx, h) in t.entries() {
                let (a, b) = (idx[0] as usize, idx[1] as usize);
                m[(a, b)] = h;
                m[(b, a)] = h;
            }
            let eig = SymmetricEigen::new(m);
            let top = eig.eigenvalues.imax();
            let mut perron: Vec<f64> = eig.eigenvectors.column(top).iter().copied().collect();
            if perron.iter().sum::<f64>() < 0.0 {
                perron.iter_mut().for_each(|v| *v = -*v);
            }
            let opts = IterationOptions { max_iters: 100_000, tol: 1e-14 };
            let v = power_iteration_dense(&t, &AssignmentMatrix::uniform(3, 3), &opts).unwrap();
            for (got, want) in v.values().iter().zip(&perron) {
                assert_abs_diff_eq!(*got, *want, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn sparse_rows_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let t = random_tensor(&mut rng, 3, 5, 7, 60);
            let x = power_iteration_sparse(&t, &AssignmentMatrix::uniform(5, 7), &Default::default()).unwrap();
            for r in 0..5 {
                assert_abs_diff_eq!(x.row(r).iter().sum::<f64>(), 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn dense_output_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let t = random_tensor(&mut rng, 4, 6, 6, 100);
        let x = power_iteration_dense(&t, &AssignmentMatrix::uniform(6, 6), &Default::default()).unwrap();
        assert_abs_diff_eq!(l2(x.values()), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn random_positive_start_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = AssignmentMatrix::random_positive(3, 4, &mut rng);
        assert!(x.values().iter().all(|&v| v > 0.0));
        assert_abs_diff_eq!(l2(x.values()), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn solver_names_round_trip() {
        for s in [SolverVariant::Dense, SolverVariant::Sparse] {
            assert_eq!(s.name().parse::<SolverVariant>().unwrap(), s);
        }
        assert!("both".parse::<SolverVariant>().is_err());
    }
}
