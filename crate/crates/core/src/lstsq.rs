//! Householder QR least squares for small dense systems.

use crate::error::{Error, Result};
use crate::hermitian::jacobi_hermitian;
use crate::matrix::{Complex64, ComplexMatrix};

/// Minimize ‖a·x − b‖_F for a full-column-rank `a` (m ≥ n) and multi-column
/// right-hand side `b`. Returns the minimizer together with the residual norm.
pub(crate) fn least_squares(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    let (m, n) = (a.rows(), a.cols());
    if b.rows() != m {
        return Err(Error::DimensionMismatch(format!(
            "least squares: a is {}x{} but b has {} rows",
            m,
            n,
            b.rows()
        )));
    }
    if m < n {
        return Err(Error::InvalidParameter(
            "least squares requires at least as many rows as columns".into(),
        ));
    }
    let k = b.cols();
    let mut r = a.clone();
    let mut qtb = b.clone();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);

    for j in 0..n {
        let norm_x: f64 = (j..m).map(|i| r[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm_x <= scale * 1e-14 {
            return Err(Error::InvariantViolation(
                "rank-deficient least-squares system".into(),
            ));
        }
        let x0 = r[(j, j)];
        let alpha = if x0.norm() == 0.0 {
            Complex64::new(-norm_x, 0.0)
        } else {
            -(x0 / x0.norm()) * norm_x
        };
        // v = x − α e1, reflector H = I − 2vv†/‖v‖²
        let mut v: Vec<Complex64> = (j..m).map(|i| r[(i, j)]).collect();
        v[0] -= alpha;
        let vnorm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq <= (scale * 1e-290).max(f64::MIN_POSITIVE) {
            continue;
        }
        for col in j..n {
            let dot: Complex64 = (j..m).map(|i| v[i - j].conj() * r[(i, col)]).sum();
            let w = dot * (2.0 / vnorm_sq);
            for i in j..m {
                let vi = v[i - j];
                r[(i, col)] -= w * vi;
            }
        }
        for col in 0..k {
            let dot: Complex64 = (j..m).map(|i| v[i - j].conj() * qtb[(i, col)]).sum();
            let w = dot * (2.0 / vnorm_sq);
            for i in j..m {
                let vi = v[i - j];
                qtb[(i, col)] -= w * vi;
            }
        }
        r[(j, j)] = alpha;
        for i in (j + 1)..m {
            r[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }

    let residual: f64 = (n..m)
        .flat_map(|i| (0..k).map(move |col| (i, col)))
        .map(|(i, col)| qtb[(i, col)].norm_sqr())
        .sum::<f64>()
        .sqrt();

    let mut x = ComplexMatrix::zeros(n, k);
    for col in 0..k {
        for i in (0..n).rev() {
            let mut acc = qtb[(i, col)];
            for l in (i + 1)..n {
                acc -= r[(i, l)] * x[(l, col)];
            }
            if r[(i, i)].norm() <= scale * 1e-14 {
                return Err(Error::InvariantViolation(
                    "rank-deficient least-squares system".into(),
                ));
            }
            x[(i, col)] = acc / r[(i, i)];
        }
    }
    Ok((x, residual))
}

/// Smallest singular value of `a`, via the spectrum of a†a.
pub(crate) fn min_singular_value(a: &ComplexMatrix) -> Result<f64> {
    let gram = &a.dagger() * a;
    let eig = jacobi_hermitian(&gram.hermitized())?;
    Ok(eig.min_eigenvalue().max(0.0).sqrt())
}
