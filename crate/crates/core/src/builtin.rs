//! Ready-made systems and families, with closed-form reference functions for
//! the three worked examples.

use crate::error::{Error, Result};
use crate::system::{PotentialFamily, SystemSpec, TailLaw, TailModel};

/// Default truncation level of the infinite builtins.
pub const DEFAULT_TRUNCATION: usize = 200;

/// Name and one-line description of every builtin.
pub const BUILTINS: &[(&str, &str)] = &[
    ("example_5_1", "three Gauss branches, family (1, 2, 1)"),
    ("example_5_2", "three Gauss branches, family (1, 2, 2)"),
    ("example_5_3", "dyadic Luroth system, Lyapunov family"),
    ("parity", "three Gauss branches, parity family (0, 1, 0)"),
    ("linearized_gauss", "linearized Gauss system, Lyapunov family"),
    ("luroth", "dyadic Luroth system, Lyapunov family"),
];

/// Full shift on `n = 1..=N` with ratios `1 / (n (n + 1))` and intervals
/// `[1 / (n + 1), 1 / n]`; the ratios past `N` obey `r_n <= n^-2`.
pub fn linearized_gauss(n: usize) -> SystemSpec {
    gauss_branches(&(1..=n).collect::<Vec<_>>()).with_tail(TailModel {
        law: TailLaw::PowerLaw {
            scale: 1.0,
            exponent: 2.0,
        },
        exact: false,
    })
}

/// Finite full shift on the given linearized Gauss branches (1-based).
pub fn linearized_gauss_subsystem(symbols: &[usize]) -> SystemSpec {
    gauss_branches(symbols)
}

fn gauss_branches(symbols: &[usize]) -> SystemSpec {
    let ratios = symbols.iter().map(|&n| 1.0 / (n as f64 * (n as f64 + 1.0))).collect();
    let intervals = symbols
        .iter()
        .map(|&n| (1.0 / (n as f64 + 1.0), 1.0 / n as f64))
        .collect();
    SystemSpec::full_shift(ratios).with_intervals(intervals)
}

/// Luroth-type system cut at the partition points `a_0 = 1 > a_1 > ... > a_N`:
/// branch `n` maps onto `[a_n, a_{n-1}]` with ratio `a_{n-1} - a_n`.
pub fn luroth(a: &[f64], tail: Option<TailModel>) -> Result<SystemSpec> {
    if a.len() < 2 || a[0] != 1.0 {
        return Err(Error::InvalidArgument(
            "partition sequence must start at 1 and have at least two points".to_string(),
        ));
    }
    if let Some(i) = a.windows(2).position(|w| !(w[1] < w[0] && w[1] >= 0.0)) {
        return Err(Error::NonMonotoneSequence(i + 1));
    }
    let ratios = a.windows(2).map(|w| w[0] - w[1]).collect();
    let intervals = a.windows(2).map(|w| (w[1], w[0])).collect();
    let spec = SystemSpec::full_shift(ratios).with_intervals(intervals);
    Ok(match tail {
        Some(t) => spec.with_tail(t),
        None => spec,
    })
}

/// Dyadic Luroth system `a_k = 2^-k` truncated at `N`, with the remainder
/// `r_n = 2^-n` summed exactly.
pub fn luroth_dyadic(n: usize) -> SystemSpec {
    let a: Vec<f64> = (0..=n).map(|k| 0.5f64.powi(k as i32)).collect();
    let tail = TailModel {
        law: TailLaw::Geometric {
            scale: 1.0,
            rate: std::f64::consts::LN_2,
        },
        exact: true,
    };
    luroth(&a, Some(tail)).expect("dyadic sequence is strictly decreasing")
}

pub fn example_5_1() -> (SystemSpec, PotentialFamily) {
    (
        linearized_gauss_subsystem(&[1, 2, 3]),
        PotentialFamily::new(vec![1.0, 2.0, 1.0]),
    )
}

pub fn example_5_2() -> (SystemSpec, PotentialFamily) {
    (
        linearized_gauss_subsystem(&[1, 2, 3]),
        PotentialFamily::new(vec![1.0, 2.0, 2.0]),
    )
}

/// Dyadic Luroth system with `F = -log Phi'`.
pub fn example_5_3(n: usize) -> (SystemSpec, PotentialFamily) {
    let spec = luroth_dyadic(n);
    let fam = PotentialFamily::lyapunov(&spec);
    (spec, fam)
}

/// Three Gauss branches with the parity family `f_n = 1` for even `n`, else 0.
pub fn parity() -> (SystemSpec, PotentialFamily) {
    (
        linearized_gauss_subsystem(&[1, 2, 3]),
        PotentialFamily::new(vec![0.0, 1.0, 0.0]),
    )
}

/// Look up a builtin by name; `truncation` applies to infinite systems.
pub fn builtin(name: &str, truncation: Option<usize>) -> Result<(SystemSpec, PotentialFamily)> {
    let n = truncation.unwrap_or(DEFAULT_TRUNCATION);
    if n == 0 {
        return Err(Error::InvalidArgument("truncation must be at least 1".to_string()));
    }
    match name {
        "example_5_1" => Ok(example_5_1()),
        "example_5_2" => Ok(example_5_2()),
        "example_5_3" | "luroth" => Ok(example_5_3(n)),
        "parity" => Ok(parity()),
        "linearized_gauss" => {
            let spec = linearized_gauss(n);
            let fam = PotentialFamily::lyapunov(&spec);
            Ok((spec, fam))
        }
        _ => Err(Error::UnknownBuiltin(name.to_string())),
    }
}

/// Reference functions of a worked example.
#[derive(Debug, Clone, Copy)]
pub struct ClosedForm {
    pub pressure: fn(f64, f64) -> f64,
    pub dp_dq: fn(f64, f64) -> f64,
    /// `q(t, xi)` solving `dP/dq(t, q) = xi`.
    pub q_of: fn(f64, f64) -> f64,
    /// `t(xi)`, when known in closed form.
    pub t_of: Option<fn(f64) -> f64>,
}

fn p51(t: f64, q: f64) -> f64 {
    (q.exp() / 2f64.powf(t) + (2.0 * q).exp() / 6f64.powf(t) + q.exp() / 12f64.powf(t)).ln()
}

fn dp51(t: f64, q: f64) -> f64 {
    let a = q.exp() * (2f64.powf(-t) + 12f64.powf(-t));
    let b = (2.0 * q).exp() * 6f64.powf(-t);
    (a + 2.0 * b) / (a + b)
}

fn q51(t: f64, xi: f64) -> f64 {
    ((xi - 1.0) * (2f64.powf(-t) + 12f64.powf(-t)) / (6f64.powf(-t) * (2.0 - xi))).ln()
}

fn p52(t: f64, q: f64) -> f64 {
    (2f64.powf(-t) * q.exp() + (6f64.powf(-t) + 12f64.powf(-t)) * (2.0 * q).exp()).ln()
}

fn dp52(t: f64, q: f64) -> f64 {
    let a = 2f64.powf(-t) * q.exp();
    let b = (6f64.powf(-t) + 12f64.powf(-t)) * (2.0 * q).exp();
    (a + 2.0 * b) / (a + b)
}

fn q52(t: f64, xi: f64) -> f64 {
    ((xi - 1.0) * 2f64.powf(-t) / ((6f64.powf(-t) + 12f64.powf(-t)) * (2.0 - xi))).ln()
}

fn p53(t: f64, q: f64) -> f64 {
    let x = 2f64.powf(q - t);
    x.ln() - (1.0 - x).ln()
}

fn dp53(t: f64, q: f64) -> f64 {
    2f64.powf(t) * std::f64::consts::LN_2 / (2f64.powf(t) - 2f64.powf(q))
}

fn q53(t: f64, xi: f64) -> f64 {
    (2f64.powf(t) - 2f64.powf(t) * std::f64::consts::LN_2 / xi).log2()
}

fn t53(xi: f64) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    (xi / ln2 - 1.0).ln() / xi - (1.0 - ln2 / xi).log2()
}

pub fn closed_form_oracles(name: &str) -> Result<ClosedForm> {
    match name {
        "example_5_1" => Ok(ClosedForm {
            pressure: p51,
            dp_dq: dp51,
            q_of: q51,
            t_of: None,
        }),
        "example_5_2" => Ok(ClosedForm {
            pressure: p52,
            dp_dq: dp52,
            q_of: q52,
            t_of: None,
        }),
        "example_5_3" => Ok(ClosedForm {
            pressure: p53,
            dp_dq: dp53,
            q_of: q53,
            t_of: Some(t53),
        }),
        _ => Err(Error::UnknownBuiltin(name.to_string())),
    }
}
