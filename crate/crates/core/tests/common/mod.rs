//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls the library's resultant, QR or polynomial builders; the
//! point is to check those against values computed another way.

#![allow(dead_code)]

use geomatch::geometry::{level_yaw, relative_vertical_angle, MinimalProblemKind};
use geomatch::ProblemInstance;
use rand::Rng;

/// Descending coefficients of `lead * prod (x - r)`.
pub fn poly_from_roots(lead: f64, roots: &[f64]) -> Vec<f64> {
    let mut c = vec![lead];
    for &r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (i, &a) in c.iter().enumerate() {
            next[i] += a;
            next[i + 1] -= a * r;
        }
        c = next;
    }
    c
}

/// Classical resultant from leading coefficients and roots:
/// `lp^deg(q) * lq^deg(p) * prod (r_i - s_j)`.
pub fn resultant_from_roots(lp: f64, rp: &[f64], lq: f64, rq: &[f64]) -> f64 {
    let mut r = lp.powi(rq.len() as i32) * lq.powi(rp.len() as i32);
    for a in rp {
        for b in rq {
            r *= a - b;
        }
    }
    r
}

/// Determinant by cofactor expansion along the first row.
pub fn det_laplace(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    let mut total = 0.0;
    for col in 0..n {
        if m[0][col] == 0.0 {
            continue;
        }
        let minor: Vec<Vec<f64>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(j, _)| j != col).map(|(_, &v)| v).collect())
            .collect();
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * m[0][col] * det_laplace(&minor);
    }
    total
}

/// Sylvester matrix written out directly from its definition, `p` rows first.
pub fn sylvester_rows(p: &[f64], q: &[f64]) -> Vec<Vec<f64>> {
    let n = p.len() - 1;
    assert_eq!(q.len(), p.len());
    let dim = 2 * n;
    let mut m = vec![vec![0.0; dim]; dim];
    for s in 0..n {
        for k in 0..=n {
            m[s][s + k] = p[k];
            m[n + s][s + k] = q[k];
        }
    }
    m
}

pub fn unit_norm(c: &[f64]) -> Vec<f64> {
    let n = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    c.iter().map(|v| v / n).collect()
}

/// `roots` uniform in `[-2, 2]`, each at least `gap` away from every value in
/// `avoid` and from each other.
pub fn separated_roots<R: Rng>(rng: &mut R, count: usize, avoid: &[f64], gap: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(count);
    while out.len() < count {
        let r = rng.random_range(-2.0..2.0);
        if avoid.iter().chain(out.iter()).all(|a| (a - r).abs() >= gap) {
            out.push(r);
        }
    }
    out
}

/// Value of the shared unknown for the minimal set of the given rows, under
/// the instance's ground truth. Rows must be inliers (and, for two-motion
/// up2p, belong to the unmoved group).
pub fn true_unknown(instance: &ProblemInstance, rows: &[usize]) -> f64 {
    match instance.kind {
        MinimalProblemKind::P3P => {
            let c = instance.cameras[0].center;
            let a = (instance.points3d[rows[0]].coords - c).norm();
            let b = (instance.points3d[rows[1]].coords - c).norm();
            b / a
        }
        MinimalProblemKind::ThreePlusOne => {
            relative_vertical_angle(&instance.cameras[0].rotation, &instance.cameras[1].rotation).cos()
        }
        MinimalProblemKind::Up2p => (level_yaw(&instance.cameras[0].rotation) / 2.0).tan(),
    }
}

/// `|q(x)|` for unit-norm descending coefficients. For `|x| > 1` the value
/// is taken as `|x^-n q(x)|`, the reversed polynomial at `1 / x`, so that a
/// huge root (up2p near half a turn of yaw) is judged on a bounded scale.
pub fn root_residual(coeffs: &[f64], x: f64) -> f64 {
    let c = unit_norm(coeffs);
    let horner = |cs: &mut dyn Iterator<Item = &f64>, t: f64| cs.fold(0.0, |acc, &v| acc * t + v);
    if x.abs() <= 1.0 {
        horner(&mut c.iter(), x).abs()
    } else {
        horner(&mut c.iter().rev(), 1.0 / x).abs()
    }
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

/// All ordered `k`-permutations of `0..n`.
pub fn k_permutations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !cur.contains(&i) {
                cur.push(i);
                go(n, k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, k, &mut Vec::new(), &mut out);
    out
}

/// Every ordered hyper-edge of order `k` over an `n x n` correspondence space.
pub fn exhaustive_edges(n: usize, k: usize) -> Vec<geomatch::EdgeTuple> {
    let perms = k_permutations(n, k);
    let mut out = Vec::with_capacity(perms.len() * perms.len());
    for rows in &perms {
        for cols in &perms {
            let items: Vec<geomatch::Correspondence> = rows
                .iter()
                .zip(cols)
                .map(|(&r, &c)| geomatch::Correspondence::new(r, c))
                .collect();
            out.push(geomatch::EdgeTuple::new(&items));
        }
    }
    out
}

/// Row-major indicator vector of the assignment `row -> perm[row]`.
pub fn permutation_vector(perm: &[usize], cols: usize) -> Vec<f64> {
    let mut v = vec![0.0; perm.len() * cols];
    for (r, &c) in perm.iter().enumerate() {
        v[r * cols + c] = 1.0;
    }
    v
}

/// Matching score of a permutation from raw edges and affinities: every
/// correspondence set counts once with its largest affinity, times `d!` for
/// the super-symmetric expansion.
pub fn brute_force_score(edges: &[geomatch::EdgeTuple], values: &[f64], perm: &[usize]) -> f64 {
    let mut best: std::collections::HashMap<Vec<geomatch::Correspondence>, f64> =
        std::collections::HashMap::new();
    for (e, &v) in edges.iter().zip(values) {
        let mut key = e.as_slice().to_vec();
        key.sort();
        let slot = best.entry(key).or_insert(0.0);
        *slot = slot.max(v);
    }
    let d = edges[0].order();
    let fact: f64 = (1..=d).map(|k| k as f64).product();
    fact * best
        .iter()
        .filter(|(k, _)| k.iter().all(|c| perm[c.row] == c.col))
        .map(|(_, v)| v)
        .sum::<f64>()
}
