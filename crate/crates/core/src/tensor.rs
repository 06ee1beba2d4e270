//! Hyper-edge sampling and the sparse affinity tensor.
//!
//! A hyper-edge is an ordered tuple of candidate correspondences. Its first
//! `m` correspondences form the minimal set `S`; replacing the last of them by
//! the extra correspondence gives `S'`. The affinity `exp(-r / rho)` uses the
//! resultant magnitude `r` of the two minimal-set polynomials.

use std::collections::HashMap;

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{
    p3p_quartic, three_plus_one_quartic, up2p_quadratic, GeometryError, MinimalProblemKind,
};
use crate::polynomials::{sylvester, Polynomial, ResultantBackend};
use crate::sim::ProblemInstance;

/// Largest supported hyper-edge order.
pub const MAX_ORDER: usize = 4;

/// Default spread of the affinity kernel, shared by all problem kinds.
///
/// The simulated scenes view a small cube from far away, so the minimal-set
/// polynomials of unrelated correspondences already have nearly coincident
/// roots: mismatched P3P resultants have a median near 1e-7 and a 0.1%
/// quantile near 1e-13, while exact matches stay below 1e-15. The kernel has
/// to be this narrow to keep the two apart.
pub const DEFAULT_RHO: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TensorError {
    #[error("need at least {order} points on both sides, got {rows} x {cols}")]
    InsufficientPoints { order: usize, rows: usize, cols: usize },
    #[error("hyper-edge order must be in 1..={MAX_ORDER}, got {0}")]
    UnsupportedOrder(usize),
    #[error("sample count must be at least 1")]
    NoSamples,
}

/// Candidate match of source item `row` with target item `col`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Correspondence {
    pub row: usize,
    pub col: usize,
}

impl Correspondence {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// Ordered tuple of up to [`MAX_ORDER`] correspondences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeTuple {
    len: u8,
    items: [Correspondence; MAX_ORDER],
}

impl EdgeTuple {
    pub fn new(items: &[Correspondence]) -> Self {
        assert!(
            !items.is_empty() && items.len() <= MAX_ORDER,
            "edge order must be in 1..={MAX_ORDER}"
        );
        let mut buf = [Correspondence::default(); MAX_ORDER];
        buf[..items.len()].copy_from_slice(items);
        Self {
            len: items.len() as u8,
            items: buf,
        }
    }

    pub fn order(&self) -> usize {
        self.len as usize
    }

    pub fn as_slice(&self) -> &[Correspondence] {
        &self.items[..self.order()]
    }

    /// True when no row and no column appears twice.
    pub fn is_partial_matching(&self) -> bool {
        let c = self.as_slice();
        (0..c.len()).all(|a| ((a + 1)..c.len()).all(|b| c[a].row != c[b].row && c[a].col != c[b].col))
    }
}

/// A scored hyper-edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperEdge {
    pub tuple: EdgeTuple,
    pub affinity: f64,
}

/// Draws `count` ordered tuples uniformly, with replacement, from all tuples of
/// `order` correspondences with distinct rows and distinct columns.
pub fn sample_hyperedges<R: Rng + ?Sized>(
    n_rows: usize,
    n_cols: usize,
    order: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<EdgeTuple>, TensorError> {
    if order == 0 || order > MAX_ORDER {
        return Err(TensorError::UnsupportedOrder(order));
    }
    if n_rows < order || n_cols < order {
        return Err(TensorError::InsufficientPoints {
            order,
            rows: n_rows,
            cols: n_cols,
        });
    }
    if count == 0 {
        return Err(TensorError::NoSamples);
    }
    let mut out = Vec::with_capacity(count);
    let mut buf = [Correspondence::default(); MAX_ORDER];
    for _ in 0..count {
        // index::sample returns the picks in random order, so pairing the two
        // draws slot by slot is uniform over ordered tuples.
        let rows = sample_indices(rng, n_rows, order);
        let cols = sample_indices(rng, n_cols, order);
        for (slot, (r, c)) in rows.iter().zip(cols.iter()).enumerate() {
            buf[slot] = Correspondence::new(r, c);
        }
        out.push(EdgeTuple::new(&buf[..order]));
    }
    Ok(out)
}

/// Seeded variant of [`sample_hyperedges`] using a ChaCha8 stream.
pub fn sample_hyperedges_seeded(
    n_rows: usize,
    n_cols: usize,
    order: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<EdgeTuple>, TensorError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_hyperedges(n_rows, n_cols, order, count, &mut rng)
}

/// Minimal-set polynomial of `kind` for the given correspondences.
pub fn minimal_polynomial(
    instance: &ProblemInstance,
    set: &[Correspondence],
) -> Result<Polynomial, GeometryError> {
    let k = &instance.intrinsics;
    let target = instance.target();
    match instance.kind {
        MinimalProblemKind::P3P => {
            let world = [0, 1, 2].map(|s| instance.points3d[set[s].row]);
            let image = [0, 1, 2].map(|s| target[set[s].col]);
            p3p_quartic(world, image, k)
        }
        MinimalProblemKind::ThreePlusOne => {
            let source = &instance.observations[0];
            let first = [0, 1, 2].map(|s| source[set[s].row]);
            let second = [0, 1, 2].map(|s| target[set[s].col]);
            three_plus_one_quartic(first, second, k)
        }
        MinimalProblemKind::Up2p => {
            let world = [0, 1].map(|s| instance.points3d[set[s].row]);
            let image = [0, 1].map(|s| target[set[s].col]);
            up2p_quadratic(world, image, k)
        }
    }
}

/// The two overlapping minimal sets of a hyper-edge: `S` is the first `m`
/// correspondences and `S'` swaps the last of them for the extra one, so the
/// first `m - 1` slots are shared.
pub fn overlapping_sets(edge: &EdgeTuple) -> (Vec<Correspondence>, Vec<Correspondence>) {
    let c = edge.as_slice();
    let m = c.len() - 1;
    let s = c[..m].to_vec();
    let mut s_prime = c[..m - 1].to_vec();
    s_prime.push(c[m]);
    (s, s_prime)
}

/// Both minimal-set polynomials of a hyper-edge.
pub fn edge_polynomials(
    instance: &ProblemInstance,
    edge: &EdgeTuple,
) -> Result<(Polynomial, Polynomial), GeometryError> {
    let (s, s_prime) = overlapping_sets(edge);
    Ok((
        minimal_polynomial(instance, &s)?,
        minimal_polynomial(instance, &s_prime)?,
    ))
}

/// Resultant magnitude of the hyper-edge polynomials, or `None` when the edge
/// is degenerate.
pub fn edge_resultant(
    instance: &ProblemInstance,
    edge: &EdgeTuple,
    backend: ResultantBackend,
) -> Option<f64> {
    let (p, q) = edge_polynomials(instance, edge).ok()?;
    if p.is_degenerate() || q.is_degenerate() {
        return None;
    }
    let m = sylvester(&p, &q).ok()?;
    let r = backend.magnitude(&m);
    r.is_finite().then_some(r)
}

/// `exp(-r / rho)`.
pub fn affinity_from_resultant(resultant: f64, rho: f64) -> f64 {
    (-resultant / rho).exp()
}

/// Affinity of one hyper-edge using the QR resultant. Degenerate edges score 0.
pub fn edge_affinity(instance: &ProblemInstance, edge: &EdgeTuple, rho: f64) -> f64 {
    edge_resultant(instance, edge, ResultantBackend::Qr)
        .map_or(0.0, |r| affinity_from_resultant(r, rho))
}

/// Scores all samples in parallel; the output is in sample order.
pub fn score_edges(instance: &ProblemInstance, samples: &[EdgeTuple], rho: f64) -> Vec<f64> {
    samples
        .par_iter()
        .map(|e| edge_affinity(instance, e, rho))
        .collect()
}

type EntryKey = [u32; MAX_ORDER];

/// Super-symmetric sparse tensor over the flattened correspondence space
/// `row * n_cols + col`.
///
/// Each entry stores one sorted index tuple; every permutation of it has the
/// same value. Entries keep the order in which they were first inserted, so a
/// tensor built from a sample prefix is an entry prefix of the tensor built
/// from the whole sample list.
#[derive(Debug, Clone)]
pub struct SparseAffinityTensor {
    order: usize,
    n_rows: usize,
    n_cols: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
    lookup: HashMap<EntryKey, usize>,
}

impl SparseAffinityTensor {
    pub fn new(order: usize, n_rows: usize, n_cols: usize) -> Result<Self, TensorError> {
        if order == 0 || order > MAX_ORDER {
            return Err(TensorError::UnsupportedOrder(order));
        }
        Ok(Self {
            order,
            n_rows,
            n_cols,
            indices: Vec::new(),
            values: Vec::new(),
            lookup: HashMap::new(),
        })
    }

    /// Builds a tensor from scored samples. `affinities[k]` belongs to `samples[k]`.
    pub fn from_scored(
        order: usize,
        n_rows: usize,
        n_cols: usize,
        samples: &[EdgeTuple],
        affinities: &[f64],
    ) -> Result<Self, TensorError> {
        assert_eq!(samples.len(), affinities.len());
        let mut t = Self::new(order, n_rows, n_cols)?;
        for (e, &a) in samples.iter().zip(affinities) {
            t.insert(e, a);
        }
        Ok(t)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Length of each mode, `n_rows * n_cols`.
    pub fn dim(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn flat_index(&self, c: Correspondence) -> usize {
        c.row * self.n_cols + c.col
    }

    fn key(&self, flat: &[usize]) -> EntryKey {
        let mut key = [u32::MAX; MAX_ORDER];
        for (k, &f) in key.iter_mut().zip(flat) {
            *k = f as u32;
        }
        key[..flat.len()].sort_unstable();
        key
    }

    /// Inserts an edge; a repeated index set keeps the larger value.
    pub fn insert(&mut self, edge: &EdgeTuple, value: f64) {
        assert_eq!(edge.order(), self.order, "edge order mismatch");
        debug_assert!(value >= 0.0);
        let flat: Vec<usize> = edge.as_slice().iter().map(|&c| self.flat_index(c)).collect();
        let key = self.key(&flat);
        match self.lookup.get(&key) {
            Some(&pos) => {
                if value > self.values[pos] {
                    self.values[pos] = value;
                }
            }
            None => {
                self.lookup.insert(key, self.values.len());
                self.indices.extend_from_slice(&key[..self.order]);
                self.values.push(value);
            }
        }
    }

    /// Value at any permutation of a flattened index tuple; 0 when absent.
    pub fn get(&self, flat: &[usize]) -> f64 {
        if flat.len() != self.order {
            return 0.0;
        }
        let key = self.key(flat);
        self.lookup.get(&key).map_or(0.0, |&pos| self.values[pos])
    }

    pub fn get_edge(&self, edge: &EdgeTuple) -> f64 {
        let flat: Vec<usize> = edge.as_slice().iter().map(|&c| self.flat_index(c)).collect();
        self.get(&flat)
    }

    /// Number of stored (unique, unsymmetrized) entries.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn has_nonzero(&self) -> bool {
        self.values.iter().any(|&v| v > 0.0)
    }

    /// Stored entries as (sorted flat indices, value), in insertion order.
    pub fn entries(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.indices
            .chunks_exact(self.order)
            .zip(self.values.iter().copied())
    }

    /// Multiplies every value by `c`.
    pub fn scale(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    /// `H` contracted with `v` on every mode but one, over the full
    /// super-symmetric expansion, divided by `(order - 1)!`.
    pub fn contract(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim());
        let mut out = vec![0.0; self.dim()];
        let d = self.order;
        for (idx, h) in self.entries() {
            if h == 0.0 {
                continue;
            }
            for p in 0..d {
                let mut prod = h;
                for (q, &j) in idx.iter().enumerate() {
                    if q != p {
                        prod *= v[j as usize];
                    }
                }
                out[idx[p] as usize] += prod;
            }
        }
        out
    }

    /// Multilinear score `sum H x ... x` over all index tuples, counting every
    /// permutation of a stored entry.
    pub fn score(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.dim());
        let perms: f64 = (1..=self.order).map(|k| k as f64).product();
        let base: f64 = self
            .entries()
            .map(|(idx, h)| h * idx.iter().map(|&j| v[j as usize]).product::<f64>())
            .sum();
        perms * base
    }
}

/// Scores the samples and assembles the tensor.
pub fn build_tensor(
    instance: &ProblemInstance,
    samples: &[EdgeTuple],
    rho: f64,
) -> Result<SparseAffinityTensor, TensorError> {
    if samples.is_empty() {
        return Err(TensorError::NoSamples);
    }
    let affinities = score_edges(instance, samples, rho);
    SparseAffinityTensor::from_scored(
        instance.kind.edge_order(),
        instance.n_rows(),
        instance.n_cols(),
        samples,
        &affinities,
    )
}
