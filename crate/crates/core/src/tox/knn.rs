use serde::{Deserialize, Serialize};

use super::Matrix;

/// k-nearest neighbours by Euclidean distance; the probability is the toxic
/// fraction among the k nearest training rows. Distance ties go to the
/// lower training index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub x: Matrix,
    pub y: Vec<bool>,
}

impl KnnModel {
    pub(crate) fn fit(x: &Matrix, y: &[bool], k: usize) -> KnnModel {
        KnnModel {
            k: k.min(x.rows),
            x: x.clone(),
            y: y.to_vec(),
        }
    }

    pub fn predict_row(&self, q: &[f64]) -> f64 {
        let mut d: Vec<(f64, usize)> = (0..self.x.rows)
            .map(|i| {
                let s: f64 = self.x.row(i).iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                (s, i)
            })
            .collect();
        let k = self.k;
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, cmp);
        }
        d[..k].iter().filter(|&&(_, i)| self.y[i]).count() as f64 / k as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_nn_returns_own_label() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64, (i * i % 5) as f64]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<bool> = (0..12).map(|i| i % 3 == 0).collect();
        let m = KnnModel::fit(&x, &y, 1);
        for i in 0..12 {
            assert_eq!(m.predict_row(x.row(i)), if y[i] { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn distance_ties_prefer_lower_index() {
        let x = Matrix::from_rows(&[vec![-1.0], vec![1.0], vec![5.0]]).unwrap();
        let m = KnnModel::fit(&x, &[true, false, false], 1);
        assert_eq!(m.predict_row(&[0.0]), 1.0);
        let m3 = KnnModel::fit(&x, &[true, false, false], 5);
        assert_eq!(m3.k, 3);
        assert!((m3.predict_row(&[0.0]) - 1.0 / 3.0).abs() < 1e-15);
    }
}
