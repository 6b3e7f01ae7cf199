//! Perron root and vectors of row-weighted 0/1 matrices by power iteration.

use crate::error::{Error, Result};

pub const POWER_TOLERANCE: f64 = 1e-13;
pub const POWER_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone)]
pub struct Perron {
    pub log_rho: f64,
    /// Right eigenvector, normalized to unit sum.
    pub right: Vec<f64>,
    /// Left eigenvector, normalized so that `<left, right> = 1`.
    pub left: Vec<f64>,
    pub iterations: usize,
}

/// Perron data of `M[a][b] = A[a][b] * exp(log_weights[a])` where `succ[a]`
/// lists the admissible `b`.
pub fn perron(succ: &[Vec<usize>], log_weights: &[f64]) -> Result<Perron> {
    let n = log_weights.len();
    let shift = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_weights.iter().map(|lw| (lw - shift).exp()).collect();
    let max_row = succ
        .iter()
        .zip(&w)
        .map(|(s, wa)| wa * s.len() as f64)
        .fold(0.0, f64::max);
    // B = M + cI shares eigenvectors with M and is aperiodic.
    let c = 0.5 * max_row;

    let apply = |v: &[f64], out: &mut [f64]| {
        for a in 0..n {
            let s: f64 = succ[a].iter().map(|&b| v[b]).sum();
            out[a] = w[a] * s + c * v[a];
        }
    };
    let apply_t = |u: &[f64], out: &mut [f64]| {
        for (o, &x) in out.iter_mut().zip(u) {
            *o = c * x;
        }
        for a in 0..n {
            let ua = u[a] * w[a];
            for &b in &succ[a] {
                out[b] += ua;
            }
        }
    };

    let (rho_b, right, it_r) = iterate(n, apply)?;
    let (_, mut left, it_l) = iterate(n, apply_t)?;
    let rho = rho_b - c;
    if !(rho > 0.0) {
        return Err(Error::PowerIteration {
            iterations: it_r.max(it_l),
        });
    }
    let dot: f64 = left.iter().zip(&right).map(|(u, v)| u * v).sum();
    for u in &mut left {
        *u /= dot;
    }
    Ok(Perron {
        log_rho: rho.ln() + shift,
        right,
        left,
        iterations: it_r.max(it_l),
    })
}

fn iterate<F>(n: usize, apply: F) -> Result<(f64, Vec<f64>, usize)>
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut v = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for it in 1..=POWER_MAX_ITER {
        apply(&v, &mut next);
        // Collatz-Wielandt: min ratio <= rho <= max ratio.
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (x, y) in v.iter().zip(&next) {
            let r = y / x;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let total: f64 = next.iter().sum();
        for (x, y) in v.iter_mut().zip(&next) {
            *x = y / total;
        }
        if hi - lo <= POWER_TOLERANCE * hi {
            return Ok((0.5 * (lo + hi), v, it));
        }
    }
    Err(Error::PowerIteration {
        iterations: POWER_MAX_ITER,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_mean_shift() {
        // A = [[1,1],[1,0]] has Perron root the golden ratio.
        let succ = vec![vec![0, 1], vec![0]];
        let p = perron(&succ, &[0.0, 0.0]).unwrap();
        let phi = 0.5 * (1.0 + 5f64.sqrt());
        assert!((p.log_rho - phi.ln()).abs() < 1e-13);
        assert!((p.right[0] / p.right[1] - phi).abs() < 1e-12);
    }

    #[test]
    fn periodic_matrix_converges() {
        let succ = vec![vec![1], vec![0]];
        let p = perron(&succ, &[0.3, -1.1]).unwrap();
        // rho^2 = e^{0.3} e^{-1.1}
        assert!((p.log_rho - 0.5 * (0.3 - 1.1)).abs() < 1e-13);
    }

    #[test]
    fn large_weights_stay_finite() {
        let succ = vec![vec![0, 1], vec![0, 1]];
        let p = perron(&succ, &[800.0, 795.0]).unwrap();
        let expect = 800.0 + (1.0 + (-5f64).exp()).ln();
        assert!((p.log_rho - expect).abs() < 1e-12);
    }
}
