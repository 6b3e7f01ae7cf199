//! Gibbs and equilibrium states of `t log|phi'| + q f~` on the carried
//! alphabet, their entropy and characteristic exponents, and the
//! zero-temperature limit `q -> -inf`.

use serde::{Deserialize, Serialize};

use crate::cycle::{max_mean_cycle, min_mean_cycle};
use crate::error::{Error, Result};
use crate::pressure::{PressureSurface, State};
use crate::system::{PotentialFamily, SystemSpec};

/// Largest exponent fed to `exp` by the zero-temperature clamps.
const EXP_RANGE: f64 = 700.0;
/// Enumeration limit of [`gibbs_inequality_check`].
pub const MAX_WORDS: u128 = 10_000_000;
pub const MAX_WORD_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsState {
    pub t: f64,
    pub q: f64,
    /// Stationary probabilities of the carried symbols.
    pub stationary: Vec<f64>,
    /// Mass of the symbols past the truncation level (closed-form tails only).
    pub tail_mass: f64,
    /// Row-stochastic transition matrix; `None` for Bernoulli states.
    pub transition: Option<Vec<Vec<f64>>>,
    pub entropy: f64,
    /// Characteristic F-exponent `int f~ dmu`.
    pub f_exponent: f64,
    /// Characteristic Lyapunov exponent `-int log|phi'| dmu`.
    pub lyapunov: f64,
    /// `entropy / lyapunov`.
    pub dimension: f64,
}

fn build_state(surface: &PressureSurface<'_>, st: &State, t: f64, q: f64) -> GibbsState {
    let (entropy, transition) = match (&st.perron, surface.successors()) {
        (Some(p), Some(succ)) => {
            let n = st.probs.len();
            let mut rows = vec![vec![0.0; n]; n];
            let mut entropy = 0.0;
            for (a, next) in succ.iter().enumerate() {
                let base = (st.log_weights[a] - p.log_rho).exp() / p.right[a];
                let mut row_h = 0.0;
                for &b in next {
                    let tr = base * p.right[b];
                    rows[a][b] = tr;
                    if tr > 0.0 {
                        row_h -= tr * tr.ln();
                    }
                }
                entropy += st.probs[a] * row_h;
            }
            (entropy, Some(rows))
        }
        _ => {
            let mut entropy: f64 = st.probs.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum();
            if let Some(tl) = &st.tail {
                if tl.mass > 0.0 {
                    entropy -= tl.mass * (tl.log_p_first - tl.decay * tl.mean_j());
                }
            }
            (entropy, None)
        }
    };
    let entropy = entropy.max(0.0);
    let lyapunov = -st.mean_g;
    GibbsState {
        t,
        q,
        stationary: st.probs.clone(),
        tail_mass: st.tail.map_or(0.0, |tl| tl.mass),
        transition,
        entropy,
        f_exponent: st.mean_f,
        lyapunov,
        dimension: entropy / lyapunov,
    }
}

pub(crate) fn gibbs_on(surface: &PressureSurface<'_>, t: f64, q: f64) -> Result<(GibbsState, f64)> {
    let st = surface.state(t, q)?.ok_or(Error::NotSummable { t, q })?;
    Ok((build_state(surface, &st, t, q), st.log_z))
}

/// Equilibrium state at `(t, q)`: Bernoulli weights `r_e^t e^{q f_e}` on full
/// shifts, the Parry-type Markov measure from the Perron vectors otherwise.
pub fn gibbs_state(spec: &SystemSpec, fam: &PotentialFamily, t: f64, q: f64) -> Result<GibbsState> {
    let surface = PressureSurface::new(spec, fam)?;
    Ok(gibbs_on(&surface, t, q)?.0)
}

/// `|h(mu) + t int log r dmu + q int f dmu - P(t, q)|` for the equilibrium state.
pub fn variational_check(spec: &SystemSpec, fam: &PotentialFamily, t: f64, q: f64) -> Result<f64> {
    let surface = PressureSurface::new(spec, fam)?;
    let (g, p) = gibbs_on(&surface, t, q)?;
    Ok((g.entropy - t * g.lyapunov + q * g.f_exponent - p).abs())
}

/// Extreme values of `mu([w]) / exp(S_|w| phi - |w| P)` over all admissible
/// words of length `1..=word_len`.
pub fn gibbs_inequality_check(
    spec: &SystemSpec,
    fam: &PotentialFamily,
    t: f64,
    q: f64,
    word_len: usize,
) -> Result<(f64, f64)> {
    if word_len == 0 || word_len > MAX_WORD_LEN {
        return Err(Error::InvalidArgument(format!(
            "word length must lie in 1..={MAX_WORD_LEN}, got {word_len}"
        )));
    }
    let n = spec.alphabet_size() as u128;
    let count: u128 = (1..=word_len as u32).map(|l| n.saturating_pow(l)).sum();
    if count > MAX_WORDS {
        return Err(Error::TooManyWords {
            count,
            limit: MAX_WORDS,
        });
    }
    let surface = PressureSurface::new(spec, fam)?;
    let st = surface.state(t, q)?.ok_or(Error::NotSummable { t, q })?;
    let g = build_state(&surface, &st, t, q);
    let succ = spec.successors();
    let lw = &st.log_weights;
    let p = st.log_z;

    // log of the transition probability a -> b
    let log_step = |a: usize, b: usize| -> f64 {
        match &g.transition {
            Some(rows) => rows[a][b].ln(),
            None => g.stationary[b].ln(),
        }
    };

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    // (last symbol, length, log mu, S phi)
    let mut stack: Vec<(usize, usize, f64, f64)> = (0..spec.alphabet_size())
        .map(|a| (a, 1, g.stationary[a].ln(), lw[a]))
        .collect();
    while let Some((last, len, log_mu, s_phi)) = stack.pop() {
        let ratio = log_mu - (s_phi - len as f64 * p);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        if len < word_len {
            for &b in &succ[last] {
                stack.push((b, len + 1, log_mu + log_step(last, b), s_phi + lw[b]));
            }
        }
    }
    Ok((lo.exp(), hi.exp()))
}

/// `xi_min` on the carried alphabet: minimum cycle mean of `f` (weight on the
/// source symbol); `min_e f_e` for full shifts.
pub fn min_average_oracle(spec: &SystemSpec, fam: &PotentialFamily) -> f64 {
    if spec.is_full_shift() {
        return fam.min_value();
    }
    min_mean_cycle(&spec.successors(), &fam.values).unwrap_or(f64::NAN)
}

/// Maximum cycle mean of `f`; `max_e f_e` for full shifts.
pub fn max_average_oracle(spec: &SystemSpec, fam: &PotentialFamily) -> f64 {
    if spec.is_full_shift() {
        return fam.max_value();
    }
    max_mean_cycle(&spec.successors(), &fam.values).unwrap_or(f64::NAN)
}

/// Gaps between the two smallest and the two largest distinct values of `f`.
fn extreme_gaps(fam: &PotentialFamily) -> Option<(f64, f64)> {
    let mut v = fam.values.clone();
    v.sort_by(f64::total_cmp);
    let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let eps = 1e-12 * scale;
    let lo = v[0];
    let hi = v[v.len() - 1];
    let second = v.iter().copied().find(|x| *x > lo + eps)?;
    let penultimate = v.iter().rev().copied().find(|x| *x < hi - eps)?;
    Some((second - lo, hi - penultimate))
}

/// Most negative `q` used before `exp(q (f_(2) - f_(1)))` leaves the IEEE range.
pub fn zero_temperature_floor(fam: &PotentialFamily) -> f64 {
    match extreme_gaps(fam) {
        Some((low, _)) => -EXP_RANGE / low,
        None => f64::NEG_INFINITY,
    }
}

/// Mirror of [`zero_temperature_floor`] for `q -> +inf`.
pub fn zero_temperature_ceiling(fam: &PotentialFamily) -> f64 {
    match extreme_gaps(fam) {
        Some((_, high)) => EXP_RANGE / high,
        None => f64::INFINITY,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroTemperatureSample {
    /// The `q` actually evaluated (after clamping).
    pub q: f64,
    pub f_exponent: f64,
    pub entropy: f64,
}

/// Characteristic exponent trace along a decreasing `q` sequence at fixed `t`.
pub fn zero_temperature_limit(
    spec: &SystemSpec,
    fam: &PotentialFamily,
    t: f64,
    q_sequence: &[f64],
) -> Result<Vec<ZeroTemperatureSample>> {
    if q_sequence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "q sequence must be strictly decreasing".to_string(),
        ));
    }
    let surface = PressureSurface::new(spec, fam)?;
    let floor = zero_temperature_floor(fam);
    q_sequence
        .iter()
        .map(|&q| {
            let q = q.max(floor);
            let (g, _) = gibbs_on(&surface, t, q)?;
            Ok(ZeroTemperatureSample {
                q,
                f_exponent: g.f_exponent,
                entropy: g.entropy,
            })
        })
        .collect()
}
