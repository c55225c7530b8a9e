use rand::Rng as _;

use super::squared_distance;
use crate::seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansParams {
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this (Euclidean).
    pub tol: f64,
    /// Independent k-means++ restarts; the lowest final inertia wins.
    pub n_init: usize,
}

impl Default for KMeansParams {
    fn default() -> Self {
        KMeansParams {
            max_iter: 300,
            tol: 1e-6,
            n_init: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Sum of squared distances to the assigned centroid.
    pub inertia: f64,
    /// Inertia after each assignment step; non-increasing.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

/// Lloyd's algorithm with k-means++ seeding, restarted `n_init` times.
/// Ties in final inertia go to the earliest restart.
///
/// A cluster that ends up empty is re-seeded at the point farthest from its
/// centroid among clusters with more than one member, which never raises
/// inertia and keeps every cluster non-empty.
pub fn kmeans(points: &[&[f64]], k: usize, seed: u64, params: KMeansParams) -> Result<KMeansFit> {
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptyInput("k-means needs at least one point"));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} must be in 1..={n}")));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch("k-means points differ in length".into()));
    }
    let mut best: Option<KMeansFit> = None;
    for r in 0..params.n_init.max(1) {
        let fit = lloyd(points, k, seed::derive(seed, &[r as u64]), params);
        if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn lloyd(points: &[&[f64]], k: usize, seed: u64, params: KMeansParams) -> KMeansFit {
    let n = points.len();
    let dim = points[0].len();
    let mut rng = seed::rng(seed);
    let mut centroids = plus_plus(points, k, &mut rng);
    let mut assignments = vec![0usize; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    while iterations < params.max_iter {
        iterations += 1;
        assign(points, &centroids, &mut assignments);
        fix_empty(points, &mut centroids, &mut assignments);
        history.push(inertia(points, &centroids, &assignments));
        let updated = means(points, &assignments, k, dim);
        let shift = centroids
            .iter()
            .zip(&updated)
            .map(|(a, b)| squared_distance(a, b))
            .fold(0.0, f64::max)
            .sqrt();
        centroids = updated;
        if shift < params.tol {
            break;
        }
    }
    assign(points, &centroids, &mut assignments);
    fix_empty(points, &mut centroids, &mut assignments);
    centroids = means(points, &assignments, k, dim);
    let mut sizes = vec![0usize; k];
    assignments.iter().for_each(|&a| sizes[a] += 1);
    for _ in 0..params.max_iter {
        if !transfer_pass(points, &mut centroids, &mut assignments, &mut sizes) {
            break;
        }
    }
    centroids = means(points, &assignments, k, dim);
    let final_inertia = inertia(points, &centroids, &assignments);
    if history.last().is_none_or(|&last| final_inertia < last) {
        history.push(final_inertia);
    }
    KMeansFit {
        centroids,
        assignments,
        inertia: final_inertia,
        inertia_history: history,
        iterations,
    }
}

fn plus_plus(points: &[&[f64]], k: usize, rng: &mut seed::Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points[rng.random_range(0..n)].to_vec()];
    let mut d2: Vec<f64> = points.iter().map(|p| squared_distance(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            chosen.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).unwrap())
        } else {
            rng.random_range(0..n)
        };
        let c = points[pick].to_vec();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(squared_distance(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Nearest centroid; ties go to the lower centroid index.
fn assign(points: &[&[f64]], centroids: &[Vec<f64>], out: &mut [usize]) {
    for (a, p) in out.iter_mut().zip(points) {
        let mut best = (f64::INFINITY, 0);
        for (j, c) in centroids.iter().enumerate() {
            let d = squared_distance(p, c);
            if d < best.0 {
                best = (d, j);
            }
        }
        *a = best.1;
    }
}

/// Hartigan single-point transfers: a point moves to another cluster when
/// that lowers inertia, accounting for both centroids shifting. Lloyd's
/// fixed points can still be improved this way. Returns whether any moved.
fn transfer_pass(points: &[&[f64]], centroids: &mut [Vec<f64>], assignments: &mut [usize], sizes: &mut [usize]) -> bool {
    let mut moved = false;
    for (i, p) in points.iter().enumerate() {
        let a = assignments[i];
        if sizes[a] < 2 {
            continue;
        }
        let na = sizes[a] as f64;
        let removal = na / (na - 1.0) * squared_distance(p, &centroids[a]);
        let mut best = (removal * (1.0 - 1e-12), a);
        for (b, c) in centroids.iter().enumerate() {
            if b != a {
                let nb = sizes[b] as f64;
                let added = nb / (nb + 1.0) * squared_distance(p, c);
                if added < best.0 {
                    best = (added, b);
                }
            }
        }
        let b = best.1;
        if b == a {
            continue;
        }
        let nb = sizes[b] as f64;
        for (d, &x) in p.iter().enumerate() {
            centroids[a][d] = (na * centroids[a][d] - x) / (na - 1.0);
            centroids[b][d] = (nb * centroids[b][d] + x) / (nb + 1.0);
        }
        sizes[a] -= 1;
        sizes[b] += 1;
        assignments[i] = b;
        moved = true;
    }
    moved
}

fn fix_empty(points: &[&[f64]], centroids: &mut [Vec<f64>], assignments: &mut [usize]) {
    let k = centroids.len();
    loop {
        let mut sizes = vec![0usize; k];
        for &a in assignments.iter() {
            sizes[a] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else { return };
        let mut far = (f64::NEG_INFINITY, usize::MAX);
        for (i, p) in points.iter().enumerate() {
            if sizes[assignments[i]] > 1 {
                let d = squared_distance(p, &centroids[assignments[i]]);
                if d > far.0 {
                    far = (d, i);
                }
            }
        }
        centroids[empty] = points[far.1].to_vec();
        assignments[far.1] = empty;
    }
}

fn means(points: &[&[f64]], assignments: &[usize], k: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(p.iter()) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        for v in s.iter_mut() {
            *v /= c as f64;
        }
    }
    sums
}

fn inertia(points: &[&[f64]], centroids: &[Vec<f64>], assignments: &[usize]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| squared_distance(p, &centroids[a]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_blobs() {
        let pts: Vec<Vec<f64>> = vec![vec![0.0], vec![0.1], vec![0.2], vec![10.0], vec![10.2]];
        let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        let fit = kmeans(&refs, 2, 4, KMeansParams::default()).unwrap();
        assert_eq!(fit.assignments[0], fit.assignments[2]);
        assert_ne!(fit.assignments[0], fit.assignments[3]);
        assert!((fit.inertia - (0.02 + 0.02)).abs() < 1e-12);
        assert!(fit.inertia_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn duplicates_keep_clusters_non_empty() {
        let pts = vec![vec![1.0, 1.0]; 5];
        let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        let fit = kmeans(&refs, 3, 0, KMeansParams::default()).unwrap();
        for j in 0..3 {
            assert!(fit.assignments.contains(&j));
        }
        assert_eq!(fit.inertia, 0.0);
    }

    #[test]
    fn k_equals_n_is_zero_inertia() {
        let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        assert_eq!(kmeans(&refs, 6, 2, KMeansParams::default()).unwrap().inertia, 0.0);
    }

    #[test]
    fn bad_k() {
        let pts = [vec![0.0]];
        let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        assert!(kmeans(&refs, 2, 0, KMeansParams::default()).is_err());
        assert!(kmeans(&refs, 0, 0, KMeansParams::default()).is_err());
        assert!(kmeans(&[], 1, 0, KMeansParams::default()).is_err());
    }
}
