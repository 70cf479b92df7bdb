//! k-nearest-neighbour regression on standardized features.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub points: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl Knn {
    pub fn fit(z: &[Vec<f64>], y: &[f64], k: usize) -> Self {
        Self {
            k: k.min(y.len()).max(1),
            points: z.to_vec(),
            targets: y.to_vec(),
        }
    }

    /// Mean target of the `k` closest points (Euclidean); equal distances
    /// resolve to the earlier training row.
    pub fn predict(&self, z: &[f64]) -> f64 {
        let mut dist: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let d: f64 = p.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, i)
            })
            .collect();
        let k = self.k.min(dist.len());
        dist.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut nearest: Vec<usize> = dist[..k].iter().map(|&(_, i)| i).collect();
        nearest.sort_unstable();
        nearest.iter().map(|&i| self.targets[i]).sum::<f64>() / k as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_neighbour_recovers_training_targets() {
        let z: Vec<Vec<f64>> = (0..15).map(|i| vec![i as f64 * 0.3, (i * i % 7) as f64]).collect();
        let y: Vec<f64> = (0..15).map(|i| (i * 3) as f64 + 0.25).collect();
        let knn = Knn::fit(&z, &y, 1);
        for (p, t) in z.iter().zip(&y) {
            assert_eq!(knn.predict(p), *t);
        }
    }

    #[test]
    fn k_neighbours_average() {
        let z = vec![vec![0.0], vec![1.0], vec![2.0], vec![10.0]];
        let y = vec![1.0, 2.0, 3.0, 100.0];
        let knn = Knn::fit(&z, &y, 3);
        assert_eq!(knn.predict(&[1.1]), 2.0);
        // k larger than the data clamps
        assert_eq!(Knn::fit(&z, &y, 10).k, 4);
    }
}
