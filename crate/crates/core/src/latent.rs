//! Candidate screening in latent space: a two-component PCA projection,
//! k-nearest-neighbour distances, quantile retention and the two-sided
//! (positive affinity, negative repulsion) avoidance filter.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_KEEP_FRACTION: f64 = 0.25;
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Where candidate distances are measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DistanceSpace {
    /// The 2-D principal-component plane.
    #[default]
    Projected,
    /// The full latent space.
    Latent,
}

/// Top-two principal components of a point set.
#[derive(Clone, Debug, PartialEq)]
pub struct Pca2 {
    pub mean: Vec<f64>,
    pub axes: [Vec<f64>; 2],
    /// Explained variances, `variances[0] >= variances[1] >= 0`.
    pub variances: [f64; 2],
    /// Fewer than two non-zero eigenvalues; one or both axes were chosen
    /// by the deterministic fallback.
    pub rank_deficient: bool,
}

impl Pca2 {
    pub fn project(&self, point: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (o, axis) in out.iter_mut().zip(&self.axes) {
            *o = point.iter().zip(&self.mean).zip(axis).map(|((x, m), a)| (x - m) * a).sum();
        }
        out
    }

    pub fn project_all(&self, points: &[Vec<f64>]) -> Vec<[f64; 2]> {
        points.iter().map(|p| self.project(p)).collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Flip `v` so its largest-magnitude coordinate (first on ties) is positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// First standard basis vector with a usable component orthogonal to
/// `against`, orthonormalized.
fn fallback_axis(dim: usize, against: &[&[f64]]) -> Vec<f64> {
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        for a in against {
            let d: f64 = e.iter().zip(*a).map(|(x, y)| x * y).sum();
            e.iter_mut().zip(*a).for_each(|(x, y)| *x -= d * y);
        }
        let n = norm(&e);
        if n > 0.5 {
            e.iter_mut().for_each(|x| *x /= n);
            return e;
        }
    }
    unreachable!("dimension >= 2 always admits an orthogonal basis vector")
}

/// Principal axes from an exact symmetric eigendecomposition of the
/// sample covariance (divisor `n - 1`). When there are fewer points than
/// dimensions the equivalent `n x n` Gram matrix is decomposed instead.
pub fn pca2(points: &[Vec<f64>]) -> Result<Pca2> {
    let n = points.len();
    if n < 3 {
        return Err(Error::Data(format!("PCA needs at least 3 points, got {n}")));
    }
    let d = points[0].len();
    if d < 2 {
        return Err(Error::Data("PCA needs dimension >= 2".into()));
    }
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::Data("points differ in dimension".into()));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite latent coordinate".into()));
    }
    let mut mean = vec![0.0; d];
    for p in points {
        mean.iter_mut().zip(p).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let x = DMatrix::from_fn(n, d, |i, j| points[i][j] - mean[j]);
    let denom = (n - 1) as f64;

    // (eigenvalue, axis) pairs, largest first
    let mut pairs: Vec<(f64, Vec<f64>)> = if d <= n {
        let cov = x.transpose() * &x / denom;
        let eig = SymmetricEigen::new(cov);
        (0..d)
            .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).iter().copied().collect()))
            .collect()
    } else {
        let gram = &x * x.transpose() / denom;
        let eig = SymmetricEigen::new(gram);
        (0..n)
            .map(|i| {
                let u = eig.eigenvectors.column(i);
                let v: Vec<f64> = (x.transpose() * u).iter().copied().collect();
                (eig.eigenvalues[i], v)
            })
            .collect()
    };
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let scale = pairs[0].0.abs().max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale.max(1.0);

    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(2);
    let mut variances = [0.0; 2];
    let mut rank_deficient = false;
    for slot in 0..2 {
        let (lambda, v) = &pairs[slot];
        let usable = *lambda > tol;
        let axis = if usable {
            let nv = norm(v);
            let mut a: Vec<f64> = v.iter().map(|x| x / nv).collect();
            // re-orthogonalize against the first axis to wash out rounding
            if let Some(first) = axes.first() {
                let dp: f64 = a.iter().zip(first).map(|(x, y)| x * y).sum();
                a.iter_mut().zip(first).for_each(|(x, y)| *x -= dp * y);
                let na = norm(&a);
                a.iter_mut().for_each(|x| *x /= na);
            }
            variances[slot] = *lambda;
            a
        } else {
            rank_deficient = true;
            let against: Vec<&[f64]> = axes.iter().map(|a| a.as_slice()).collect();
            fallback_axis(d, &against)
        };
        axes.push(axis);
    }
    for a in &mut axes {
        fix_sign(a);
    }
    let second = axes.pop().unwrap();
    let first = axes.pop().unwrap();
    Ok(Pca2 {
        mean,
        axes: [first, second],
        variances,
        rank_deficient,
    })
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// The `k` smallest distances from `query` to `reference`, ascending
/// (ties ordered by reference index).
pub fn knn_distances(query: &[f64], reference: &[Vec<f64>], k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::Config("k must be >= 1".into()));
    }
    if reference.len() < k {
        return Err(Error::Data(format!(
            "k = {k} exceeds the reference set size {}",
            reference.len()
        )));
    }
    let mut d: Vec<(f64, usize)> = reference.iter().enumerate().map(|(i, r)| (euclidean(query, r), i)).collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(d[..k].iter().map(|x| x.0).collect())
}

pub fn knn_mean_dist(query: &[f64], reference: &[Vec<f64>], k: usize) -> Result<f64> {
    Ok(knn_distances(query, reference, k)?.iter().sum::<f64>() / k as f64)
}

/// One-sided exact Mann–Whitney test of "`x` tends to be smaller than
/// `y`": the probability, under random relabelling of the pooled sample,
/// of an `x` rank sum at most the observed one. Ties use midranks.
pub fn mann_whitney_less(x: &[f64], y: &[f64]) -> Result<f64> {
    let (m, n) = (x.len(), y.len());
    if m == 0 || n == 0 {
        return Err(Error::Data("rank test needs two non-empty samples".into()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::Numeric("NaN in rank test sample".into()));
    }
    let total = m + n;
    let mut pooled: Vec<(f64, bool)> = x.iter().map(|&v| (v, true)).chain(y.iter().map(|&v| (v, false))).collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    // doubled midranks keep every rank an integer
    let mut ranks2 = vec![0usize; total];
    let mut i = 0;
    while i < total {
        let mut j = i;
        while j + 1 < total && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        for r in &mut ranks2[i..=j] {
            *r = (i + 1) + (j + 1);
        }
        i = j + 1;
    }
    let observed: usize = ranks2.iter().zip(&pooled).filter(|(_, p)| p.1).map(|(r, _)| r).sum();
    let max_sum: usize = ranks2.iter().sum();
    // ways[j][s]: subsets of size j with doubled rank sum s
    let mut ways = vec![vec![0.0f64; max_sum + 1]; m + 1];
    ways[0][0] = 1.0;
    for &r in &ranks2 {
        for j in (1..=m).rev() {
            let (lo, hi) = ways.split_at_mut(j);
            for s in (r..=max_sum).rev() {
                hi[0][s] += lo[j - 1][s - r];
            }
        }
    }
    let all: f64 = ways[m].iter().sum();
    let le: f64 = ways[m][..=observed].iter().sum();
    Ok(le / all)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    /// Mean distance to the k nearest positives (or training points).
    pub d_plus: f64,
    /// Mean distance to the k nearest negatives (avoidance mode only).
    pub d_minus: Option<f64>,
    pub p_value: Option<f64>,
    pub accepted: bool,
}

impl CandidateScore {
    pub fn delta(&self) -> Option<f64> {
        self.d_minus.map(|m| self.d_plus - m)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    /// One score per candidate, in candidate order.
    pub scores: Vec<CandidateScore>,
    /// Accepted candidate indices, best first.
    pub ranking: Vec<usize>,
}

/// `ceil(fraction * n)`, at least one, robust to representation error.
pub fn keep_count(n: usize, fraction: f64) -> usize {
    (((fraction * n as f64) - 1e-9).ceil().max(1.0) as usize).min(n)
}

/// Keep the `ceil(keep_fraction * n)` candidates closest to the training
/// points (mean distance to k nearest), ties by candidate index.
pub fn select_standard(candidates: &[Vec<f64>], training: &[Vec<f64>], keep_fraction: f64, k: usize) -> Result<Selection> {
    if candidates.is_empty() {
        return Err(Error::Data("no candidates to filter".into()));
    }
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::Config(format!("keep fraction {keep_fraction} must lie in (0, 1]")));
    }
    let dist: Vec<f64> = candidates
        .par_iter()
        .map(|c| knn_mean_dist(c, training, k))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
    order.truncate(keep_count(candidates.len(), keep_fraction));
    let mut scores: Vec<CandidateScore> = dist
        .iter()
        .map(|&d| CandidateScore {
            d_plus: d,
            d_minus: None,
            p_value: None,
            accepted: false,
        })
        .collect();
    for &i in &order {
        scores[i].accepted = true;
    }
    Ok(Selection { scores, ranking: order })
}

/// Accept candidates that sit closer to positives than to negatives, with
/// the k positive-neighbour distances significantly smaller (one-sided
/// exact Mann–Whitney, `p < alpha`); rank accepted ones by `d+ - d-`.
pub fn select_avoidance(
    candidates: &[Vec<f64>],
    positives: &[Vec<f64>],
    negatives: &[Vec<f64>],
    k: usize,
    alpha: f64,
) -> Result<Selection> {
    if candidates.is_empty() {
        return Err(Error::Data("no candidates to filter".into()));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Config(format!("alpha {alpha} must lie in (0, 1]")));
    }
    if positives.len() < k || negatives.len() < k {
        return Err(Error::Data(format!(
            "k = {k} exceeds the positive ({}) or negative ({}) set size",
            positives.len(),
            negatives.len()
        )));
    }
    let scores: Vec<CandidateScore> = candidates
        .par_iter()
        .map(|c| {
            let dp = knn_distances(c, positives, k)?;
            let dn = knn_distances(c, negatives, k)?;
            let d_plus = dp.iter().sum::<f64>() / k as f64;
            let d_minus = dn.iter().sum::<f64>() / k as f64;
            let p = mann_whitney_less(&dp, &dn)?;
            Ok(CandidateScore {
                d_plus,
                d_minus: Some(d_minus),
                p_value: Some(p),
                accepted: d_plus < d_minus && p < alpha,
            })
        })
        .collect::<Result<_>>()?;
    let mut ranking: Vec<usize> = (0..candidates.len()).filter(|&i| scores[i].accepted).collect();
    ranking.sort_by(|&a, &b| {
        let (da, db) = (scores[a].delta().unwrap(), scores[b].delta().unwrap());
        da.total_cmp(&db).then(a.cmp(&b))
    });
    Ok(Selection { scores, ranking })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

/// Scores TSV: one row per candidate, in candidate order.
pub fn scores_tsv(sequences: &[String], selection: &Selection) -> String {
    let mut s = String::from("sequence\td_plus\td_minus\tdelta\tp_value\taccepted\n");
    for (seq, sc) in sequences.iter().zip(&selection.scores) {
        s.push_str(&format!(
            "{seq}\t{}\t{}\t{}\t{}\t{}\n",
            sc.d_plus,
            fmt_opt(sc.d_minus),
            fmt_opt(sc.delta()),
            fmt_opt(sc.p_value),
            sc.accepted
        ));
    }
    s
}

/// Projected coordinates TSV for plotting: `(set, sequence, point)` rows.
pub fn coords_tsv(rows: &[(&str, &str, [f64; 2])]) -> String {
    let mut s = String::from("set\tsequence\tpc1\tpc2\n");
    for (set, seq, p) in rows {
        s.push_str(&format!("{set}\t{seq}\t{}\t{}\n", p[0], p[1]));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_points(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut r = rng::stream(seed, 0);
        (0..n).map(|_| (0..d).map(|_| r.sample(StandardNormal)).collect()).collect()
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    fn check_axes(p: &Pca2) {
        for i in 0..2 {
            assert!((dot(&p.axes[i], &p.axes[i]) - 1.0).abs() < 1e-9);
        }
        assert!(dot(&p.axes[0], &p.axes[1]).abs() < 1e-9);
        assert!(p.variances[0] >= p.variances[1] && p.variances[1] >= 0.0);
    }

    #[test]
    fn centered_plane_projects_to_itself() {
        let pts = vec![vec![3.0, 0.1], vec![-3.0, -0.1], vec![0.5, 1.0], vec![-0.5, -1.0]];
        let p = pca2(&pts).unwrap();
        check_axes(&p);
        for q in &pts {
            let y = p.project(q);
            let back: Vec<f64> = (0..2).map(|j| y[0] * p.axes[0][j] + y[1] * p.axes[1][j]).collect();
            for (a, b) in back.iter().zip(q) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sign_convention() {
        let p = pca2(&random_points(20, 6, 4)).unwrap();
        for a in &p.axes {
            let big = a.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            assert!(big > 0.0);
        }
    }

    #[test]
    fn gram_path_matches_covariance_path() {
        // 8 points in 12-D uses the Gram matrix; padding to 12-D with
        // repeated points forces the covariance route on the same data
        let pts = random_points(8, 12, 5);
        let a = pca2(&pts).unwrap();
        let mut more = pts.clone();
        more.extend(pts.iter().cloned());
        let b = pca2(&more).unwrap();
        for i in 0..2 {
            for (x, y) in a.axes[i].iter().zip(&b.axes[i]) {
                assert!((x - y).abs() < 1e-8);
            }
            // duplicating every point rescales the (n-1) divisor
            let ratio = (2.0 * 8.0 - 1.0) / (2.0 * (8.0 - 1.0));
            assert!((a.variances[i] - b.variances[i] * ratio).abs() < 1e-9 * a.variances[0]);
        }
    }

    #[test]
    fn rank_deficient_input_is_flagged() {
        let line: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 2.0 * i as f64, 0.0]).collect();
        let p = pca2(&line).unwrap();
        assert!(p.rank_deficient);
        check_axes(&p);
        let same = vec![vec![1.0, 1.0]; 4];
        let p = pca2(&same).unwrap();
        assert!(p.rank_deficient);
        check_axes(&p);
        assert!(pca2(&same[..2]).is_err());
    }

    fn residual(points: &[Vec<f64>], mean: &[f64], a: &[f64], b: &[f64]) -> f64 {
        points
            .iter()
            .map(|p| {
                let c: Vec<f64> = p.iter().zip(mean).map(|(x, m)| x - m).collect();
                let (u, v) = (dot(&c, a), dot(&c, b));
                dot(&c, &c) - u * u - v * v
            })
            .sum()
    }

    #[test]
    fn pca_is_never_beaten_by_random_planes() {
        let pts = random_points(50, 10, 6);
        let p = pca2(&pts).unwrap();
        let best = residual(&pts, &p.mean, &p.axes[0], &p.axes[1]);
        let mut r = rng::stream(7, 0);
        for _ in 0..10_000 {
            let a: Vec<f64> = (0..10).map(|_| r.sample(StandardNormal)).collect();
            let mut b: Vec<f64> = (0..10).map(|_| r.sample(StandardNormal)).collect();
            let na = norm(&a);
            let a: Vec<f64> = a.iter().map(|x| x / na).collect();
            let d = dot(&a, &b);
            b.iter_mut().zip(&a).for_each(|(x, y)| *x -= d * y);
            let nb = norm(&b);
            b.iter_mut().for_each(|x| *x /= nb);
            assert!(residual(&pts, &p.mean, &a, &b) >= best - 1e-9);
        }
    }

    #[test]
    fn knn_examples() {
        let r = vec![vec![0.0], vec![3.0], vec![4.0]];
        assert_eq!(knn_mean_dist(&[0.0], &r, 1).unwrap(), 0.0);
        assert_eq!(knn_mean_dist(&[0.0], &r, 2).unwrap(), 1.5);
        assert!(knn_mean_dist(&[0.0], &r, 4).is_err());
    }

    /// Enumerate every labelling of the pooled sample.
    fn brute_mann_whitney(x: &[f64], y: &[f64]) -> f64 {
        let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
        let n = pooled.len();
        let rank = |v: f64| {
            let less = pooled.iter().filter(|&&u| u < v).count() as f64;
            let eq = pooled.iter().filter(|&&u| u == v).count() as f64;
            less + (eq + 1.0) / 2.0
        };
        let ranks: Vec<f64> = pooled.iter().map(|&v| rank(v)).collect();
        let obs: f64 = ranks[..x.len()].iter().sum();
        let (mut le, mut all) = (0u64, 0u64);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != x.len() {
                continue;
            }
            all += 1;
            let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            if s <= obs + 1e-9 {
                le += 1;
            }
        }
        le as f64 / all as f64
    }

    #[test]
    fn mann_whitney_separated_five_by_five() {
        let p = mann_whitney_less(&[1.0, 2.0, 3.0, 4.0, 5.0], &[6.0, 7.0, 8.0, 9.0, 10.0]).unwrap();
        assert!((p - 1.0 / 252.0).abs() < 1e-12);
        let p = mann_whitney_less(&[6.0, 7.0, 8.0, 9.0, 10.0], &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn avoidance_geometry_examples() {
        let pos: Vec<Vec<f64>> = (0..6).map(|i| vec![(i as f64) * 0.1, 0.0]).collect();
        let neg: Vec<Vec<f64>> = (0..6).map(|i| vec![10.0 + i as f64 * 0.1, 5.0]).collect();
        let s = select_avoidance(&[vec![0.25, 0.0]], &pos, &neg, 5, 0.05).unwrap();
        assert!(s.scores[0].accepted && s.scores[0].delta().unwrap() < 0.0);

        // interleaved on a circle around the candidate
        let ring = |offset: f64| -> Vec<Vec<f64>> {
            (0..5)
                .map(|i| {
                    let t = offset + i as f64 * 2.0 * std::f64::consts::PI / 5.0;
                    vec![t.cos(), t.sin()]
                })
                .collect()
        };
        let s = select_avoidance(&[vec![0.0, 0.0]], &ring(0.0), &ring(0.3), 5, 0.05).unwrap();
        assert!(!s.scores[0].accepted);
        assert!(select_avoidance(&[vec![0.0, 0.0]], &ring(0.0), &ring(0.3), 6, 0.05).is_err());
    }

    #[test]
    fn standard_examples() {
        let train = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let cands: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, i as f64]).collect();
        let s = select_standard(&cands, &train, 0.25, 1).unwrap();
        assert_eq!(s.ranking, vec![0, 1]);
        assert_eq!(s.scores.iter().filter(|c| c.accepted).count(), 2);
        assert_eq!(keep_count(10, 0.3), 3);
        assert_eq!(keep_count(3, 0.01), 1);
        assert!(select_standard(&[], &train, 0.25, 1).is_err());
        assert!(select_standard(&cands, &train, 0.0, 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn pca_axes_are_orthonormal(seed in 0u64..10_000, n in 3usize..30, d in 2usize..40) {
            let p = pca2(&random_points(n, d, seed)).unwrap();
            check_axes(&p);
        }

        #[test]
        fn knn_matches_full_sort(seed in 0u64..10_000, n in 1usize..30, k in 1usize..6) {
            prop_assume!(k <= n);
            let pts = random_points(n + 1, 2, seed);
            let (q, refs) = pts.split_first().unwrap();
            let mut d: Vec<f64> = refs.iter().map(|r| ((q[0]-r[0]).powi(2) + (q[1]-r[1]).powi(2)).sqrt()).collect();
            d.sort_by(f64::total_cmp);
            let want = d[..k].iter().sum::<f64>() / k as f64;
            prop_assert!((knn_mean_dist(q, refs, k).unwrap() - want).abs() < 1e-12);
        }

        #[test]
        fn mann_whitney_matches_enumeration(x in proptest::collection::vec(0u8..6, 1..6), y in proptest::collection::vec(0u8..6, 1..6)) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let y: Vec<f64> = y.into_iter().map(f64::from).collect();
            prop_assert!((mann_whitney_less(&x, &y).unwrap() - brute_mann_whitney(&x, &y)).abs() < 1e-12);
        }

        #[test]
        fn standard_prefix_property(seed in 0u64..10_000, n in 1usize..25, f in 0.01f64..1.0) {
            let c = random_points(n, 2, seed);
            let t = random_points(6, 2, seed + 1);
            let full = select_standard(&c, &t, 1.0, 3).unwrap();
            prop_assert_eq!(full.ranking.len(), n);
            let part = select_standard(&c, &t, f, 3).unwrap();
            prop_assert_eq!(&full.ranking[..part.ranking.len()], part.ranking.as_slice());
        }

        #[test]
        fn avoidance_is_translation_and_scale_invariant(seed in 0u64..10_000, shift in -5.0f64..5.0, s in 0.1f64..10.0) {
            let c = random_points(6, 2, seed);
            let p = random_points(7, 2, seed + 1).into_iter().map(|v| vec![v[0] - 1.5, v[1]]).collect::<Vec<_>>();
            let n = random_points(7, 2, seed + 2).into_iter().map(|v| vec![v[0] + 1.5, v[1]]).collect::<Vec<_>>();
            let base = select_avoidance(&c, &p, &n, 5, 0.05).unwrap();
            let tf = |v: &Vec<Vec<f64>>| v.iter().map(|x| x.iter().map(|y| s * y + shift).collect()).collect::<Vec<Vec<f64>>>();
            let moved = select_avoidance(&tf(&c), &tf(&p), &tf(&n), 5, 0.05).unwrap();
            prop_assert_eq!(&base.ranking, &moved.ranking);
            for (a, b) in base.scores.iter().zip(&moved.scores) {
                prop_assert_eq!(a.accepted, b.accepted);
                prop_assert!((a.d_plus * s - b.d_plus).abs() < 1e-9 * (1.0 + b.d_plus));
                prop_assert!((a.delta().unwrap() * s - b.delta().unwrap()).abs() < 1e-9 * (1.0 + b.d_plus + b.d_minus.unwrap()));
            }
        }
    }
}
