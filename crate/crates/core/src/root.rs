//! Scalar root finding on bracketed monotone functions.

use crate::error::{Error, Result};

/// Bisection for the boundary of a monotone predicate: `pred(lo)` is false,
/// `pred(hi)` is true, and the returned interval brackets the switch.
pub fn bisect_predicate<P>(mut lo: f64, mut hi: f64, tol: f64, max_iter: usize, mut pred: P) -> (f64, f64)
where
    P: FnMut(f64) -> bool,
{
    for _ in 0..max_iter {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Plain bisection for a sign change `f(lo) > 0 >= f(hi)` or the reverse.
pub fn bisect<F>(lo: f64, hi: f64, tol: f64, max_iter: usize, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::RootNotFound(format!(
            "no sign change on [{lo}, {hi}]: f = {flo}, {fhi}"
        )));
    }
    let rising = flo < 0.0;
    let (a, b) = bisect_predicate(lo, hi, tol, max_iter, |x| (f(x) >= 0.0) == rising);
    Ok(0.5 * (a + b))
}

/// Stopping rule for [`safeguarded_newton`].
#[derive(Debug, Clone, Copy)]
pub struct NewtonTolerance {
    pub residual: f64,
    pub step: f64,
    pub max_iter: usize,
}

/// Newton's method kept inside the bracket `[lo, hi]`, where the target
/// function is increasing with `f(lo) < 0 < f(hi)`. Steps that leave the
/// bracket or fail to halve the previous step fall back to bisection.
///
/// `f` returns the value and derivative at a point. Returns the final
/// iterate and its residual.
pub fn safeguarded_newton<F>(mut lo: f64, mut hi: f64, start: f64, tol: NewtonTolerance, mut f: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let mut x = if start > lo && start < hi {
        start
    } else {
        0.5 * (lo + hi)
    };
    let mut prev_step = hi - lo;
    let mut best = (x, f64::INFINITY);
    for _ in 0..tol.max_iter {
        let (fx, dfx) = f(x)?;
        if !fx.is_finite() {
            return Err(Error::RootNotFound(format!("non-finite value at {x}")));
        }
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() <= tol.residual {
            return Ok((x, fx));
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= tol.step * x.abs().max(1.0) {
            return Ok(best);
        }
        let newton = x - fx / dfx;
        let next =
            if dfx > 0.0 && newton.is_finite() && newton > lo && newton < hi && (newton - x).abs() <= 0.5 * prev_step {
                newton
            } else {
                0.5 * (lo + hi)
            };
        prev_step = (next - x).abs();
        if next == x {
            return Ok(best);
        }
        x = next;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_sqrt2() {
        let r = bisect(0.0, 2.0, 1e-15, 200, |x| x * x - 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn bisection_without_sign_change_fails() {
        assert!(bisect(0.0, 1.0, 1e-12, 100, |x| x + 1.0).is_err());
    }

    #[test]
    fn newton_converges_quadratically_inside_bracket() {
        let tol = NewtonTolerance {
            residual: 1e-15,
            step: 1e-16,
            max_iter: 100,
        };
        let mut calls = 0;
        let (x, _) = safeguarded_newton(-10.0, 10.0, 5.0, tol, |x| {
            calls += 1;
            Ok((x.exp() - 3.0, x.exp()))
        })
        .unwrap();
        assert!((x - 3f64.ln()).abs() < 1e-14);
        assert!(calls < 40);
    }

    #[test]
    fn newton_survives_flat_derivative() {
        let tol = NewtonTolerance {
            residual: 1e-14,
            step: 1e-16,
            max_iter: 400,
        };
        let (x, _) = safeguarded_newton(-1.0, 2.0, -0.9, tol, |x| Ok((x.powi(3) - 0.125, 3.0 * x * x))).unwrap();
        assert!((x - 0.5).abs() < 1e-12);
    }
}
