//! Non-negative least squares (Lawson-Hanson active set).

use nalgebra::{DMatrix, DVector};

/// `argmin ‖Ax − b‖` subject to `x >= 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let p = a.ncols();
    let mut x = DVector::zeros(p);
    let mut passive = vec![false; p];
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())) * b.amax().max(1.0);
    let tol = 1e-10 * scale.max(1.0) * a.nrows() as f64;

    for _ in 0..(3 * p + 10) {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..p)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]).then(j.cmp(&i)));
        let Some(j) = candidate else { break };
        passive[j] = true;

        loop {
            let s = solve_passive(a, b, &passive);
            if (0..p).all(|i| !passive[i] || s[i] > 0.0) {
                x = s;
                break;
            }
            let mut alpha = f64::INFINITY;
            for i in 0..p {
                if passive[i] && s[i] <= 0.0 {
                    alpha = alpha.min(x[i] / (x[i] - s[i]));
                }
            }
            x += (&s - &x) * alpha;
            for i in 0..p {
                if passive[i] && x[i] <= 1e-15 {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            if !passive.iter().any(|&q| q) {
                break;
            }
        }
    }
    x
}

fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..passive.len()).filter(|&j| passive[j]).collect();
    let sub = DMatrix::from_fn(a.nrows(), cols.len(), |i, k| a[(i, cols[k])]);
    let sol = sub
        .svd(true, true)
        .solve(b, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(cols.len()));
    let mut full = DVector::zeros(passive.len());
    for (k, &j) in cols.iter().enumerate() {
        full[j] = sol[k];
    }
    full
}
