//! Bracketing root search: a uniform sign scan followed by bisection.
//!
//! Bisection keeps every iterate inside a bracket, so the scans stay clear of
//! the pole at the magnet planes no matter how steep the function gets there.

/// Default number of scan intervals.
pub const SCAN_INTERVALS: usize = 2048;

/// Absolute bracket width at which bisection stops.
pub const BISECTION_TOL: f64 = 1e-10;

/// A strict sign change of the scanned function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub at: f64,
    /// `true` when the function goes from negative to positive with increasing argument.
    pub rising: bool,
}

/// Bisects `[lo, hi]`, where `f_lo = f(lo)` and `f(hi)` have opposite signs.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, mut f_lo: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Finds every strict sign change of `f` on `[lo, hi]` using `intervals` equal cells.
///
/// Grid nodes where `f` is exactly zero are skipped over; a root there is only
/// reported if the sign on either side differs. Tangent zeros are ignored.
pub fn sign_changes<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, intervals: usize) -> Vec<Crossing> {
    let n = intervals.max(1);
    let h = (hi - lo) / n as f64;
    let mut out = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for i in 0..=n {
        let x = if i == n { hi } else { lo + h * i as f64 };
        let fx = f(x);
        if fx == 0.0 || fx.is_nan() {
            continue;
        }
        if let Some((xl, fl)) = last {
            if (fl < 0.0) != (fx < 0.0) {
                out.push(Crossing {
                    at: bisect(f, xl, x, fl, BISECTION_TOL),
                    rising: fl < 0.0,
                });
            }
        }
        last = Some((x, fx));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_both_roots_of_quadratic() {
        let f = |x: f64| (x - 0.3) * (x - 0.7);
        let roots = sign_changes(&f, 0.0, 1.0, 64);
        assert_eq!(roots.len(), 2);
        assert!((roots[0].at - 0.3).abs() < 1e-9);
        assert!(!roots[0].rising);
        assert!((roots[1].at - 0.7).abs() < 1e-9);
        assert!(roots[1].rising);
    }

    #[test]
    fn tangent_zero_is_not_a_crossing() {
        let f = |x: f64| (x - 0.5) * (x - 0.5);
        assert!(sign_changes(&f, 0.0, 1.0, 10).is_empty());
    }

    #[test]
    fn zero_on_grid_node_is_reported_once() {
        let f = |x: f64| x - 0.5;
        let roots = sign_changes(&f, 0.0, 1.0, 10);
        assert_eq!(roots.len(), 1);
        assert!((roots[0].at - 0.5).abs() < 1e-10);
    }
}
