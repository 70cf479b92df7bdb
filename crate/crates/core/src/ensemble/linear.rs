//! Linear members on z-scored features: Lasso by cyclic coordinate descent
//! and Ridge in closed form. Intercepts are the target mean and are never
//! penalized.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::EnsembleError;

/// Per-feature z-score transform. Zero-variance features keep scale 1 so
/// they standardize to a column of zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let p = x[0].len();
        let n = x.len() as f64;
        let mut mean = vec![0.0; p];
        for row in x {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; p];
        for row in x {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|r| self.transform_row(r)).collect()
    }

    pub fn is_valid(&self) -> bool {
        self.mean.len() == self.scale.len()
            && self.mean.iter().all(|m| m.is_finite())
            && self.scale.iter().all(|s| s.is_finite() && *s > 0.0)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoConfig {
    /// Fixed penalty; `None` selects it from `grid` by k-fold CV.
    pub lambda: Option<f64>,
    pub grid: Vec<f64>,
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self {
            lambda: None,
            grid: vec![1e-3, 1e-2, 1e-1, 1.0, 10.0],
            tol: 1e-6,
            max_sweeps: 10_000,
        }
    }
}

/// Lasso minimising `1/(2n) ‖y − ȳ − Zβ‖² + λ‖β‖₁` over standardized `Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lasso {
    pub lambda: f64,
    pub intercept: f64,
    pub coef: Vec<f64>,
    /// Objective after each sweep.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

impl Lasso {
    pub fn fit(z: &[Vec<f64>], y: &[f64], lambda: f64, tol: f64, max_sweeps: usize) -> Self {
        let n = y.len();
        let nf = n as f64;
        let p = z[0].len();
        let intercept = mean(y);
        // column-major copy for the sweeps
        let cols: Vec<Vec<f64>> = (0..p).map(|j| z.iter().map(|r| r[j]).collect()).collect();
        let sq: Vec<f64> = cols.iter().map(|c| dot(c, c) / nf).collect();
        let mut resid: Vec<f64> = y.iter().map(|v| v - intercept).collect();
        let mut coef = vec![0.0; p];
        let objective = |resid: &[f64], coef: &[f64]| {
            dot(resid, resid) / (2.0 * nf) + lambda * coef.iter().map(|b| b.abs()).sum::<f64>()
        };
        let mut current = objective(&resid, &coef);
        let mut trace = vec![current];
        let mut trial_resid = resid.clone();
        let mut trial_coef = coef.clone();
        for _ in 0..max_sweeps {
            let mut max_step: f64 = 0.0;
            for j in 0..p {
                if sq[j] == 0.0 {
                    continue;
                }
                let old = coef[j];
                let rho = dot(&cols[j], &resid) / nf + sq[j] * old;
                let new = soft_threshold(rho, lambda) / sq[j];
                let step = new - old;
                if step == 0.0 {
                    continue;
                }
                for ((t, r), zij) in trial_resid.iter_mut().zip(&resid).zip(&cols[j]) {
                    *t = r - step * zij;
                }
                trial_coef[j] = new;
                let candidate = objective(&trial_resid, &trial_coef);
                // updates lost to rounding are dropped
                if candidate <= current {
                    resid.copy_from_slice(&trial_resid);
                    coef[j] = new;
                    current = candidate;
                    max_step = max_step.max(step.abs());
                } else {
                    trial_coef[j] = old;
                }
            }
            trace.push(current);
            if max_step < tol {
                break;
            }
        }
        Self {
            lambda,
            intercept,
            coef,
            objective_trace: trace,
        }
    }

    pub fn predict(&self, z: &[f64]) -> f64 {
        self.intercept + dot(&self.coef, z)
    }

    /// `(intercept, slopes)` on the original feature scale.
    pub fn raw_coefficients(&self, standardizer: &Standardizer) -> (f64, Vec<f64>) {
        let slopes: Vec<f64> = self
            .coef
            .iter()
            .zip(&standardizer.scale)
            .map(|(b, s)| b / s)
            .collect();
        let intercept = self.intercept - dot(&slopes, &standardizer.mean);
        (intercept, slopes)
    }
}

/// Ridge: `β = (ZᵀZ + λI)⁻¹ Zᵀ(y − ȳ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ridge {
    pub lambda: f64,
    pub intercept: f64,
    pub coef: Vec<f64>,
}

impl Ridge {
    pub fn fit(z: &[Vec<f64>], y: &[f64], lambda: f64) -> Result<Self, EnsembleError> {
        let n = y.len();
        let p = z[0].len();
        let intercept = mean(y);
        let zm = DMatrix::from_fn(n, p, |i, j| z[i][j]);
        let yc = DVector::from_iterator(n, y.iter().map(|v| v - intercept));
        let mut gram = zm.transpose() * &zm;
        for j in 0..p {
            gram[(j, j)] += lambda;
        }
        let eig = SymmetricEigen::new(gram.clone()).eigenvalues;
        let (lo, hi) = eig
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e.abs())));
        if !(lo > 1e-12 * hi.max(1.0)) {
            return Err(EnsembleError::SingularDesign);
        }
        let rhs = zm.transpose() * yc;
        let coef = gram
            .cholesky()
            .ok_or(EnsembleError::SingularDesign)?
            .solve(&rhs);
        Ok(Self {
            lambda,
            intercept,
            coef: coef.iter().copied().collect(),
        })
    }

    pub fn predict(&self, z: &[f64]) -> f64 {
        self.intercept + dot(&self.coef, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn problem(seed: u64, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = SplitMix64::new(seed);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| rng.next_f64() * 4.0 - 2.0).collect())
            .collect();
        let y = x
            .iter()
            .map(|r| 1.5 * r[0] - 2.0 * r[1] + 0.5 * r[2] + 3.0 + 0.1 * (rng.next_f64() - 0.5))
            .collect();
        (x, y)
    }

    #[test]
    fn lasso_objective_never_increases() {
        let (x, y) = problem(3, 60);
        let s = Standardizer::fit(&x);
        let lasso = Lasso::fit(&s.transform(&x), &y, 0.05, 1e-9, 10_000);
        let t = &lasso.objective_trace;
        assert!(t.len() > 2);
        assert!(t.windows(2).all(|w| w[1] <= w[0]), "{t:?}");
    }

    #[test]
    fn lasso_large_penalty_zeroes_everything() {
        let (x, y) = problem(4, 40);
        let s = Standardizer::fit(&x);
        let lasso = Lasso::fit(&s.transform(&x), &y, 1e6, 1e-9, 100);
        assert!(lasso.coef.iter().all(|&b| b == 0.0));
        assert_eq!(lasso.intercept, mean(&y));
    }

    #[test]
    fn ridge_huge_penalty_shrinks_to_mean() {
        let (x, y) = problem(5, 50);
        let s = Standardizer::fit(&x);
        let ridge = Ridge::fit(&s.transform(&x), &y, 1e9).unwrap();
        assert!(ridge.coef.iter().all(|b| b.abs() < 1e-6), "{:?}", ridge.coef);
        assert_eq!(ridge.intercept, mean(&y));
    }

    #[test]
    fn ridge_zero_penalty_rank_deficient() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, 7.0, 2.0 * i as f64]).collect();
        let y: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let s = Standardizer::fit(&x);
        assert!(matches!(
            Ridge::fit(&s.transform(&x), &y, 0.0),
            Err(EnsembleError::SingularDesign)
        ));
        assert!(Ridge::fit(&s.transform(&x), &y, 1.0).is_ok());
    }

    #[test]
    fn standardizer_zero_variance_scale_one() {
        let x = vec![vec![1.0, 5.0], vec![3.0, 5.0]];
        let s = Standardizer::fit(&x);
        assert_eq!(s.mean, vec![2.0, 5.0]);
        assert_eq!(s.scale, vec![1.0, 1.0]);
        assert!(s.is_valid());
        assert_eq!(s.transform_row(&[3.0, 5.0]), vec![1.0, 0.0]);
    }
}
