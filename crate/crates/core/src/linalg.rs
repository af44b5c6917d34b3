//! Minimal dense linear algebra for the smoother's normal equations.

use crate::scalar::Real;

/// Dense symmetric positive-definite solve via Cholesky, `a x = b`.
///
/// `a` is row-major `n x n` (only the lower triangle is read) and is
/// destroyed. Returns `None` when the factorization hits a non-positive
/// pivot, signaling a singular or indefinite system.
pub(crate) fn cholesky_solve<T: Real>(a: &mut [T], b: &[T], n: usize) -> Option<Vec<T>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    // In-place LL^T factorization.
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d <= T::zero() || !d.is_finite() {
            return None;
        }
        let d_sqrt = d.sqrt();
        a[j * n + j] = d_sqrt;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d_sqrt;
        }
    }
    // Forward substitution L y = b.
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let lik = a[i * n + k];
            x[i] = x[i] - lik * x[k];
        }
        x[i] = x[i] / a[i * n + i];
    }
    // Back substitution L^T x = y.
    for i in (0..n).rev() {
        for k in i + 1..n {
            let lki = a[k * n + i];
            x[i] = x[i] - lki * x[k];
        }
        x[i] = x[i] / a[i * n + i];
    }
    Some(x)
}
