//! Scalar bracketing solvers shared by the allocation routines.

use crate::error::{Error, Result};

/// Root of a function that changes sign on `[lo, hi]`, by bisection until the
/// bracket is narrower than `rel_tol * max(|lo|, |hi|)` (or stops shrinking).
///
/// Only the sign of `f` is used, so it works for monotone functions that are
/// badly scaled.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, rel_tol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "bisection bracket [{lo}, {hi}] does not straddle a root ({f_lo}, {f_hi})"
        )));
    }
    let lo_negative = f_lo < 0.0;
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) <= rel_tol * lo.abs().max(hi.abs()) {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence {
        what: "bisection",
        iterations: max_iter,
    })
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximiser of a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_section_max<F>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    abs_tol: f64,
    max_iter: usize,
) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..max_iter {
        if (hi - lo).abs() <= abs_tol {
            return Ok(0.5 * (lo + hi));
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    Err(Error::Convergence {
        what: "golden-section search",
        iterations: max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        // decreasing function
        let r = bisect(|x| 2.0 - x * x, 0.0, 2.0, 1e-15, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn bisect_rejects_bad_bracket() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 100).is_err());
    }

    #[test]
    fn golden_section_on_parabola() {
        let x = golden_section_max(|x| -(x - 0.3) * (x - 0.3), -2.0, 5.0, 1e-10, 500).unwrap();
        assert!((x - 0.3).abs() < 1e-9);
    }
}
