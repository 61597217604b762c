//! Tridiagonal node-pressure solve for a chain of cells between two reservoirs.

/// Solves `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]` in place
/// (Thomas algorithm). `sub[0]` and `sup[n-1]` are ignored.
///
/// Only meant for diagonally dominant systems; no pivoting.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [f64]) {
    let n = rhs.len();
    debug_assert!(sub.len() == n && diag.len() == n && sup.len() == n);
    if n == 0 {
        return;
    }
    let mut c = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    rhs[0] /= diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / m;
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_product() {
        let sub = [0.0, -1.0, -2.0, -0.5];
        let diag = [4.0, 5.0, 6.0, 3.0];
        let sup = [-1.0, -2.0, -0.5, 0.0];
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut b: Vec<f64> = (0..4)
            .map(|i| {
                let mut v = diag[i] * x[i];
                if i > 0 {
                    v += sub[i] * x[i - 1];
                }
                if i < 3 {
                    v += sup[i] * x[i + 1];
                }
                v
            })
            .collect();
        solve_tridiagonal(&sub, &diag, &sup, &mut b);
        for i in 0..4 {
            assert!((b[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn single_unknown() {
        let mut b = [6.0];
        solve_tridiagonal(&[0.0], &[3.0], &[0.0], &mut b);
        assert_eq!(b[0], 2.0);
    }
}
