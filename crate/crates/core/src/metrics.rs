// SPDX-License-Identifier: Apache-2.0

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub mse: f64,
    /// `‖approx − exact‖_F / ‖exact‖_F`; zero when both are zero, infinite
    /// when only `exact` is zero.
    pub rel_frobenius: f64,
    pub max_abs: f64,
}

pub fn error_metrics(approx: ArrayView2<'_, f64>, exact: ArrayView2<'_, f64>) -> Result<ErrorReport> {
    if approx.shape() != exact.shape() {
        return dim_err(format!("shapes {:?} and {:?} differ", approx.shape(), exact.shape()));
    }
    let n = exact.len();
    let (mut sq_err, mut sq_ref, mut max_abs) = (0.0_f64, 0.0_f64, 0.0_f64);
    for (a, e) in approx.iter().zip(exact.iter()) {
        let d = a - e;
        sq_err += d * d;
        sq_ref += e * e;
        max_abs = max_abs.max(d.abs());
    }
    let rel_frobenius = if sq_err == 0.0 {
        0.0
    } else if sq_ref == 0.0 {
        f64::INFINITY
    } else {
        (sq_err / sq_ref).sqrt()
    };
    Ok(ErrorReport { mse: if n == 0 { 0.0 } else { sq_err / n as f64 }, rel_frobenius, max_abs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_is_zero() {
        let a = Array2::from_shape_fn((3, 4), |(r, c)| (r * 4 + c) as f64);
        let r = error_metrics(a.view(), a.view()).unwrap();
        assert_eq!((r.mse, r.rel_frobenius, r.max_abs), (0.0, 0.0, 0.0));
    }

    #[test]
    fn unit_offset() {
        let e = Array2::from_shape_fn((5, 5), |(r, c)| (r as f64) - (c as f64) * 0.5);
        let a = e.mapv(|v| v + 1.0);
        let r = error_metrics(a.view(), e.view()).unwrap();
        assert_eq!(r.mse, 1.0);
        assert_eq!(r.max_abs, 1.0);
    }

    #[test]
    fn shape_mismatch() {
        let a = Array2::<f64>::zeros((2, 3));
        let b = Array2::<f64>::zeros((3, 2));
        assert!(error_metrics(a.view(), b.view()).is_err());
    }

    #[test]
    fn matches_scalar_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let a = Array2::from_shape_fn((7, 9), |_| rng.random_range(-5.0..5.0));
        let e = Array2::from_shape_fn((7, 9), |_| rng.random_range(-5.0..5.0));
        let r = error_metrics(a.view(), e.view()).unwrap();
        let (mut se, mut sr, mut mx) = (0.0, 0.0, 0.0f64);
        for i in 0..7 {
            for j in 0..9 {
                let d = a[[i, j]] - e[[i, j]];
                se += d * d;
                sr += e[[i, j]] * e[[i, j]];
                mx = mx.max(d.abs());
            }
        }
        assert!((r.mse - se / 63.0).abs() < 1e-12);
        assert!((r.rel_frobenius - (se.sqrt() / sr.sqrt())).abs() < 1e-12);
        assert_eq!(r.max_abs, mx);
    }
}
