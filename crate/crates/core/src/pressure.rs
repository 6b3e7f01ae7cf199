//! Two-parameter topological pressure `P(t, q)` of the potential
//! `t log|phi'| + q f~` for depth-one locally constant data.
//!
//! Full shifts: `P = log sum_e r_e^t exp(q f_e)`. Markov incidence: `P` is the
//! log Perron root of `M[a][b] = A[a][b] r_a^t exp(q f_a)`. Every weight is
//! handled in log space with a max shift.
//!
//! Infinite systems are evaluated on the carried symbols; the remainder is
//! bounded through the tail law, or summed in closed form when the tail law is
//! exact and the family is an exact affine function of `log r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::perron::{perron, Perron};
use crate::root::bisect_predicate;
use crate::system::{PotentialFamily, SystemSpec, TailLaw};

/// `ln(f64::MAX)`; partition sums above this are reported as the +inf marker.
const LOG_OVERFLOW: f64 = 709.78;
/// Step of the central differences behind Markov Hessians.
const HESSIAN_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressurePoint {
    pub t: f64,
    pub q: f64,
    pub value: ExtReal,
    pub grad: Option<(f64, f64)>,
    pub hessian: Option<[[f64; 2]; 2]>,
    /// Log-space size of the part of the partition sum past the truncation
    /// level (zero for finite alphabets).
    pub tail_error: f64,
    pub in_region: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum TailBound {
    Absent,
    Finite(f64),
    Divergent,
}

/// Remainder series summed in closed form: symbol `N + 1 + j` has
/// `log r = g_first - slope * j` and `f = -alpha log r + offset`, so its
/// weight is `x^j` times that of symbol `N + 1`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ExactTail {
    /// Probability mass of the remainder in the Bernoulli state.
    pub mass: f64,
    pub x: f64,
    /// `-ln x`.
    pub decay: f64,
    pub one_minus_x: f64,
    pub g_first: f64,
    pub slope: f64,
    pub alpha: f64,
    pub offset: f64,
    /// Log probability of symbol `N + 1`.
    pub log_p_first: f64,
}

impl ExactTail {
    /// Mean of `j` under the geometric law `(1 - x) x^j`.
    pub fn mean_j(&self) -> f64 {
        self.x / self.one_minus_x
    }

    pub fn mean_j2(&self) -> f64 {
        self.x * (1.0 + self.x) / (self.one_minus_x * self.one_minus_x)
    }

    /// Mass-weighted `sum_j P(j) (a0 + a1 j)(b0 + b1 j)`.
    pub fn cross(&self, a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
        self.mass * (a0 * b0 + (a0 * b1 + a1 * b0) * self.mean_j() + a1 * b1 * self.mean_j2())
    }

    pub fn f_first(&self) -> f64 {
        -self.alpha * self.g_first + self.offset
    }
}

/// Everything the evaluator learns at one `(t, q)` inside the region.
#[derive(Debug, Clone)]
pub(crate) struct State {
    pub log_z: f64,
    /// Stationary probabilities of the carried symbols.
    pub probs: Vec<f64>,
    pub tail: Option<ExactTail>,
    pub tail_error: f64,
    pub mean_g: f64,
    pub mean_f: f64,
    /// Covariance of `(log r, f)`; full shifts only.
    pub cov: Option<[[f64; 2]; 2]>,
    pub perron: Option<Perron>,
    pub log_weights: Vec<f64>,
}

/// Evaluator bundle for `P`, its derivatives and region membership.
#[derive(Debug, Clone)]
pub struct PressureSurface<'a> {
    spec: &'a SystemSpec,
    fam: &'a PotentialFamily,
    log_r: Vec<f64>,
    succ: Option<Vec<Vec<usize>>>,
}

impl<'a> PressureSurface<'a> {
    pub fn new(spec: &'a SystemSpec, fam: &'a PotentialFamily) -> Result<Self> {
        if fam.values.len() != spec.alphabet_size() {
            return Err(Error::InvalidArgument(format!(
                "family has {} values for {} symbols",
                fam.values.len(),
                spec.alphabet_size()
            )));
        }
        let succ = (!spec.is_full_shift()).then(|| spec.successors());
        Ok(PressureSurface {
            spec,
            fam,
            log_r: spec.log_ratios(),
            succ,
        })
    }

    pub fn spec(&self) -> &SystemSpec {
        self.spec
    }

    pub fn family(&self) -> &PotentialFamily {
        self.fam
    }

    pub(crate) fn log_ratios(&self) -> &[f64] {
        &self.log_r
    }

    pub(crate) fn successors(&self) -> Option<&[Vec<usize>]> {
        self.succ.as_deref()
    }

    /// Exponent `s` and log prefactor with `r^t e^{q f} <= e^{pref} r^s` past the truncation.
    fn tail_exponent(&self, t: f64, q: f64) -> Result<(f64, f64)> {
        if q == 0.0 {
            return Ok((t, 0.0));
        }
        if let Some(c) = self.fam.comparability {
            return Ok((t - q * c.alpha, (q * c.beta).max(q * c.gamma)));
        }
        if self.fam.bounded {
            let hi = self.fam.max_value();
            return Ok((t, (q * self.fam.lower_bound).max(q * hi)));
        }
        Err(Error::CannotBoundTail)
    }

    pub(crate) fn tail_bound(&self, t: f64, q: f64) -> Result<TailBound> {
        let Some(tail) = self.spec.tail else {
            return Ok(TailBound::Absent);
        };
        let (s, pref) = self.tail_exponent(t, q)?;
        let n = self.spec.alphabet_size() as f64;
        Ok(match tail.law {
            TailLaw::Geometric { scale, rate } => {
                if s <= 0.0 {
                    TailBound::Divergent
                } else {
                    let first = s * (scale.ln() - rate * (n + 1.0));
                    TailBound::Finite(pref + first - (-(-rate * s).exp_m1()).ln())
                }
            }
            TailLaw::PowerLaw { scale, exponent } => {
                let ps = exponent * s;
                if ps <= 1.0 {
                    TailBound::Divergent
                } else {
                    TailBound::Finite(pref + s * scale.ln() + (1.0 - ps) * n.ln() - (ps - 1.0).ln())
                }
            }
        })
    }

    /// Whether `(t, q)` lies in the Manhattan region (first-level sum finite).
    pub fn in_region(&self, t: f64, q: f64) -> Result<bool> {
        Ok(!matches!(self.tail_bound(t, q)?, TailBound::Divergent))
    }

    /// Closed-form remainder parameters, when the tail law and family allow it.
    fn exact_tail_shape(&self, t: f64, q: f64) -> Option<(f64, f64, f64, f64, f64)> {
        let tail = self.spec.tail?;
        if !tail.exact || !self.spec.is_full_shift() {
            return None;
        }
        let TailLaw::Geometric { scale, rate } = tail.law else {
            return None;
        };
        let c = self.fam.comparability.filter(|c| c.is_exact())?;
        let s = t - q * c.alpha;
        let m = (self.spec.alphabet_size() + 1) as f64;
        let g_first = scale.ln() - rate * m;
        let lw_first = s * g_first + q * c.beta;
        Some((lw_first, rate * s, g_first, rate, c.alpha))
    }

    pub(crate) fn log_weight(&self, i: usize, t: f64, q: f64) -> f64 {
        t * self.log_r[i] + q * self.fam.values[i]
    }

    /// Full evaluation at `(t, q)`; `None` outside the region.
    pub(crate) fn state(&self, t: f64, q: f64) -> Result<Option<State>> {
        let bound = self.tail_bound(t, q)?;
        if matches!(bound, TailBound::Divergent) {
            return Ok(None);
        }
        let lw: Vec<f64> = (0..self.log_r.len()).map(|i| self.log_weight(i, t, q)).collect();
        let st = match &self.succ {
            None => self.bernoulli(t, q, lw, bound),
            Some(succ) => self.markov(succ, lw, bound)?,
        };
        Ok(Some(st))
    }

    fn bernoulli(&self, t: f64, q: f64, lw: Vec<f64>, bound: TailBound) -> State {
        let g = &self.log_r;
        let f = &self.fam.values;
        let exact = self.exact_tail_shape(t, q);
        let mut shift = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if let Some((lw_first, ..)) = exact {
            shift = shift.max(lw_first);
        }
        let scaled: Vec<f64> = lw.iter().map(|w| (w - shift).exp()).collect();
        let mut z: f64 = scaled.iter().sum();
        let partial = z;
        let mut tail = None;
        if let Some((lw_first, decay, g_first, slope, alpha)) = exact {
            let one_minus_x = -(-decay).exp_m1();
            let x = (-decay).exp();
            let tz = (lw_first - shift).exp() / one_minus_x;
            z += tz;
            let c = self.fam.comparability.map_or(0.0, |c| c.beta);
            tail = Some(ExactTail {
                mass: tz / z,
                x,
                decay,
                one_minus_x,
                g_first,
                slope,
                alpha,
                offset: c,
                log_p_first: lw_first - shift - z.ln(),
            });
        }
        let log_z = shift + z.ln();
        let probs: Vec<f64> = scaled.iter().map(|w| w / z).collect();

        // Means are accumulated as offsets from the heaviest symbol so that
        // concentrated states reproduce its values exactly.
        let heaviest = scaled
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(i, _)| i);
        let (g_ref, f_ref) = (g[heaviest], f[heaviest]);
        let mut dg: f64 = probs.iter().zip(g).map(|(p, x)| p * (x - g_ref)).sum();
        let mut df: f64 = probs.iter().zip(f).map(|(p, x)| p * (x - f_ref)).sum();
        if let Some(tl) = &tail {
            dg += tl.mass * (tl.g_first - g_ref - tl.slope * tl.mean_j());
            df += tl.mass * (tl.f_first() - f_ref + tl.alpha * tl.slope * tl.mean_j());
        }
        let mean_g = g_ref + dg;
        let mean_f = f_ref + df;
        let mut cov = [[0.0; 2]; 2];
        for ((p, x), y) in probs.iter().zip(g).zip(f) {
            let dg = x - mean_g;
            let df = y - mean_f;
            cov[0][0] += p * dg * dg;
            cov[0][1] += p * dg * df;
            cov[1][1] += p * df * df;
        }
        if let Some(tl) = &tail {
            let (g0, g1) = (tl.g_first - mean_g, -tl.slope);
            let (f0, f1) = (tl.f_first() - mean_f, tl.alpha * tl.slope);
            cov[0][0] += tl.cross(g0, g1, g0, g1);
            cov[0][1] += tl.cross(g0, g1, f0, f1);
            cov[1][1] += tl.cross(f0, f1, f0, f1);
        }
        cov[1][0] = cov[0][1];

        let tail_error = match (tail.as_ref(), bound) {
            (Some(tl), _) => (-tl.mass).ln_1p().abs(),
            (None, TailBound::Finite(lb)) => (lb - (shift + partial.ln())).exp().ln_1p(),
            _ => 0.0,
        };
        State {
            log_z,
            probs,
            tail,
            tail_error,
            mean_g,
            mean_f,
            cov: Some(cov),
            perron: None,
            log_weights: lw,
        }
    }

    fn markov(&self, succ: &[Vec<usize>], lw: Vec<f64>, bound: TailBound) -> Result<State> {
        let p = perron(succ, &lw)?;
        let mut probs: Vec<f64> = p.left.iter().zip(&p.right).map(|(u, v)| u * v).collect();
        let total: f64 = probs.iter().sum();
        for x in &mut probs {
            *x /= total;
        }
        let mean_g = probs.iter().zip(&self.log_r).map(|(a, b)| a * b).sum();
        let mean_f = probs.iter().zip(&self.fam.values).map(|(a, b)| a * b).sum();
        let tail_error = match bound {
            TailBound::Finite(lb) => {
                let shift = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let log_first: f64 = shift + lw.iter().map(|w| (w - shift).exp()).sum::<f64>().ln();
                (lb - log_first).exp().ln_1p()
            }
            _ => 0.0,
        };
        Ok(State {
            log_z: p.log_rho,
            probs,
            tail: None,
            tail_error,
            mean_g,
            mean_f,
            cov: None,
            perron: Some(p),
            log_weights: lw,
        })
    }

    /// Pressure value and gradient; the +inf marker outside the region.
    pub fn point(&self, t: f64, q: f64) -> Result<PressurePoint> {
        match self.state(t, q)? {
            None => Ok(PressurePoint {
                t,
                q,
                value: ExtReal::PosInfinity,
                grad: None,
                hessian: None,
                tail_error: 0.0,
                in_region: false,
            }),
            Some(st) => Ok(PressurePoint {
                t,
                q,
                value: ExtReal::Finite(st.log_z),
                grad: Some((st.mean_g, st.mean_f)),
                hessian: st.cov,
                tail_error: st.tail_error,
                in_region: true,
            }),
        }
    }

    pub fn value(&self, t: f64, q: f64) -> Result<ExtReal> {
        Ok(match self.state(t, q)? {
            None => ExtReal::PosInfinity,
            Some(st) => ExtReal::Finite(st.log_z),
        })
    }

    pub fn grad(&self, t: f64, q: f64) -> Result<(f64, f64)> {
        let st = self.state(t, q)?.ok_or(Error::NotSummable { t, q })?;
        Ok((st.mean_g, st.mean_f))
    }

    pub fn hessian(&self, t: f64, q: f64) -> Result<[[f64; 2]; 2]> {
        let st = self.state(t, q)?.ok_or(Error::NotSummable { t, q })?;
        if let Some(cov) = st.cov {
            return Ok(cov);
        }
        let h = HESSIAN_STEP;
        let (gt_p, gq_p) = self.grad(t + h, q)?;
        let (gt_m, gq_m) = self.grad(t - h, q)?;
        let (tq_p, qq_p) = self.grad(t, q + h)?;
        let (tq_m, qq_m) = self.grad(t, q - h)?;
        let tt = (gt_p - gt_m) / (2.0 * h);
        let qq = (qq_p - qq_m) / (2.0 * h);
        let tq = 0.5 * ((gq_p - gq_m) + (tq_p - tq_m)) / (2.0 * h);
        Ok([[tt, tq], [tq, qq]])
    }

    /// `(P, dP/dq, d2P/dq2)` at a point inside the region.
    pub(crate) fn q_derivatives(&self, t: f64, q: f64) -> Result<(f64, f64, f64)> {
        let st = self.state(t, q)?.ok_or(Error::NotSummable { t, q })?;
        let second = match st.cov {
            Some(cov) => cov[1][1],
            None => {
                let h = HESSIAN_STEP;
                (self.grad(t, q + h)?.1 - self.grad(t, q - h)?.1) / (2.0 * h)
            }
        };
        Ok((st.log_z, st.mean_f, second))
    }

    /// Boundary `q_0(t)` of the region from the tail law, when it is a curve.
    pub(crate) fn q_boundary(&self, t: f64) -> Option<f64> {
        let tail = self.spec.tail?;
        let c = self.fam.comparability?;
        if c.alpha <= 0.0 || self.fam.bounded {
            return None;
        }
        Some((t - tail.law.critical_exponent()) / c.alpha)
    }
}

/// First-level partition sum `sum_e r_e^t exp(q f_e)` plus the tail remainder
/// (closed form when exact, otherwise its upper bound).
pub fn z_tilde_1(spec: &SystemSpec, fam: &PotentialFamily, t: f64, q: f64) -> Result<ExtReal> {
    let surface = PressureSurface::new(spec, fam)?;
    let bound = surface.tail_bound(t, q)?;
    let lw: Vec<f64> = (0..spec.alphabet_size()).map(|i| surface.log_weight(i, t, q)).collect();
    let mut terms = lw;
    match bound {
        TailBound::Divergent => return Ok(ExtReal::PosInfinity),
        TailBound::Finite(lb) => match surface.exact_tail_shape(t, q) {
            Some((lw_first, decay, ..)) => terms.push(lw_first - (-(-decay).exp_m1()).ln()),
            None => terms.push(lb),
        },
        TailBound::Absent => {}
    }
    let shift = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = shift + terms.iter().map(|w| (w - shift).exp()).sum::<f64>().ln();
    if log_sum > LOG_OVERFLOW {
        Ok(ExtReal::PosInfinity)
    } else {
        Ok(ExtReal::Finite(log_sum.exp()))
    }
}

/// Pressure value and gradient at `(t, q)`.
pub fn pressure(spec: &SystemSpec, fam: &PotentialFamily, t: f64, q: f64) -> Result<PressurePoint> {
    PressureSurface::new(spec, fam)?.point(t, q)
}

/// `(dP/dt, dP/dq)`, the integrals of `log r` and `f` against the equilibrium state.
pub fn pressure_grad(spec: &SystemSpec, fam: &PotentialFamily, t: f64, q: f64) -> Result<(f64, f64)> {
    PressureSurface::new(spec, fam)?.grad(t, q)
}

/// Hessian of `P`: the covariance of `(log r, f)` for full shifts, central
/// differences of the gradient for Markov incidence.
pub fn pressure_hessian(spec: &SystemSpec, fam: &PotentialFamily, t: f64, q: f64) -> Result<[[f64; 2]; 2]> {
    PressureSurface::new(spec, fam)?.hessian(t, q)
}

/// `theta = inf { t : P(t, 0) < inf }`; the -inf marker for finite alphabets.
pub fn finiteness_parameter(spec: &SystemSpec) -> ExtReal {
    let zero = PotentialFamily::zero(spec);
    let Ok(surface) = PressureSurface::new(spec, &zero) else {
        return ExtReal::NegInfinity;
    };
    if !spec.is_infinite() {
        return ExtReal::NegInfinity;
    }
    let converges = |t: f64| matches!(surface.tail_bound(t, 0.0), Ok(TailBound::Finite(_)));
    // r^0 = 1 for infinitely many symbols: t = 0 always diverges.
    let lo = 0.0;
    let mut hi = 1.0;
    while !converges(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            return ExtReal::PosInfinity;
        }
    }
    let (a, b) = bisect_predicate(lo, hi, 1e-15, 200, converges);
    ExtReal::Finite(0.5 * (a + b))
}

/// Zero of `t -> P(t, 0)` on `(theta, inf)`, to `1e-12`.
pub fn bowen_parameter(spec: &SystemSpec) -> Result<f64> {
    let zero = PotentialFamily::zero(spec);
    let surface = PressureSurface::new(spec, &zero)?;
    let p = |t: f64| -> Result<f64> { Ok(surface.value(t, 0.0)?.to_f64()) };
    let lo = match finiteness_parameter(spec) {
        ExtReal::Finite(theta) => theta,
        _ => 0.0,
    };
    let p_lo = p(lo)?;
    if p_lo == 0.0 {
        return Ok(lo);
    }
    if p_lo < 0.0 {
        return Err(Error::NoPressureZero);
    }
    let mut hi = lo.max(0.0) + 1.0;
    while p(hi)? >= 0.0 {
        hi = 2.0 * hi + 1.0;
        if hi > 1e9 {
            return Err(Error::NoPressureZero);
        }
    }
    let mut err = None;
    let (a, b) = bisect_predicate(lo, hi, 1e-14, 300, |t| match p(t) {
        Ok(v) => v < 0.0,
        Err(e) => {
            err = Some(e);
            true
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(0.5 * (a + b))
}

/// `|P_coarse(t, 0) - P_fine(t, 0)|` over the carried symbols only, tails
/// dropped: how much the truncation level still moves the pressure.
pub fn truncation_gap(coarse: &SystemSpec, fine: &SystemSpec, t: f64) -> Result<f64> {
    let carried = |spec: &SystemSpec| -> Result<f64> {
        let mut bare = spec.clone();
        bare.tail = None;
        let zero = PotentialFamily::zero(&bare);
        Ok(PressureSurface::new(&bare, &zero)?.value(t, 0.0)?.to_f64())
    };
    Ok((carried(coarse)? - carried(fine)?).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub theta: ExtReal,
    pub cofinitely_regular: bool,
    pub regular: bool,
    pub h: Option<f64>,
    pub notes: Vec<String>,
}

pub fn regularity_report(spec: &SystemSpec) -> Result<RegularityReport> {
    let theta = finiteness_parameter(spec);
    let mut notes = Vec::new();
    let cofinitely_regular = match spec.tail {
        Some(tail) => {
            let zero = PotentialFamily::zero(spec);
            let surface = PressureSurface::new(spec, &zero)?;
            let at_theta = tail.law.critical_exponent();
            notes.push(format!("theta from {:?} tail law", tail.law));
            matches!(surface.tail_bound(at_theta, 0.0)?, TailBound::Divergent)
        }
        None => {
            notes.push("finite alphabet: D is the whole plane".to_string());
            false
        }
    };
    if spec.intervals.is_none() {
        notes.push("SOSC assumed (no interval data)".to_string());
    }
    let (regular, h) = match bowen_parameter(spec) {
        Ok(h) => (true, Some(h)),
        Err(Error::NoPressureZero) => {
            notes.push("no zero of pressure".to_string());
            (false, None)
        }
        Err(e) => return Err(e),
    };
    Ok(RegularityReport {
        theta,
        cofinitely_regular,
        regular,
        h,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManhattanBoundary {
    /// `(t, q_0(t))` on the boundary curve.
    pub samples: Vec<(f64, f64)>,
    /// Set when the region is the half plane `t > theta`.
    pub half_plane_theta: Option<ExtReal>,
}

/// Samples of `q_0(t) = sup { q : Z_1(t, q) < inf }` by bisection on tail divergence.
pub fn manhattan_boundary(spec: &SystemSpec, fam: &PotentialFamily, t_grid: &[f64]) -> Result<ManhattanBoundary> {
    if !spec.is_infinite() {
        return Ok(ManhattanBoundary {
            samples: Vec::new(),
            half_plane_theta: None,
        });
    }
    let half_plane = ManhattanBoundary {
        samples: Vec::new(),
        half_plane_theta: Some(finiteness_parameter(spec)),
    };
    if fam.bounded {
        return Ok(half_plane);
    }
    let Some(c) = fam.comparability else {
        return Err(Error::BoundaryShapeUnknown);
    };
    if c.alpha <= 0.0 {
        return Ok(half_plane);
    }
    let surface = PressureSurface::new(spec, fam)?;
    let diverges = |t: f64, q: f64| matches!(surface.tail_bound(t, q), Ok(TailBound::Divergent));
    let mut samples = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let mut step = 1.0;
        let mut lo = t.min(0.0) - step;
        while diverges(t, lo) {
            step *= 2.0;
            lo = t.min(0.0) - step;
            if step > 1e12 {
                break;
            }
        }
        let mut hi = lo + 1.0;
        let mut up = 1.0;
        while !diverges(t, hi) && up < 1e12 {
            up *= 2.0;
            hi = lo + up;
        }
        if !diverges(t, hi) || diverges(t, lo) {
            continue;
        }
        let (a, b) = bisect_predicate(lo, hi, 1e-13, 300, |q| diverges(t, q));
        samples.push((t, 0.5 * (a + b)));
    }
    Ok(ManhattanBoundary {
        samples,
        half_plane_theta: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupProbe {
    pub q: f64,
    pub pressure: f64,
    pub dq: f64,
}

/// Samples `q = q_0(t) - 2^{-k}` for `k = 0..probe_count` and records `P` and `dP/dq`.
pub fn boundary_blowup_check(
    spec: &SystemSpec,
    fam: &PotentialFamily,
    t: f64,
    probe_count: usize,
) -> Result<Vec<BlowupProbe>> {
    if !spec.is_infinite() {
        return Ok(Vec::new());
    }
    let boundary = manhattan_boundary(spec, fam, &[t])?;
    let Some(&(_, q0)) = boundary.samples.first() else {
        return Ok(Vec::new());
    };
    let surface = PressureSurface::new(spec, fam)?;
    let mut out = Vec::with_capacity(probe_count);
    for k in 0..probe_count {
        let q = q0 - 0.5f64.powi(k as i32);
        let st = surface.state(t, q)?.ok_or(Error::NotSummable { t, q })?;
        out.push(BlowupProbe {
            q,
            pressure: st.log_z,
            dq: st.mean_f,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::TailModel;

    fn example_5_1() -> (SystemSpec, PotentialFamily) {
        (
            SystemSpec::full_shift(vec![0.5, 1.0 / 6.0, 1.0 / 12.0]),
            PotentialFamily::new(vec![1.0, 2.0, 1.0]),
        )
    }

    fn luroth(n: usize) -> SystemSpec {
        SystemSpec::full_shift((1..=n).map(|k| 0.5f64.powi(k as i32)).collect()).with_tail(TailModel {
            law: TailLaw::Geometric {
                scale: 1.0,
                rate: 2f64.ln(),
            },
            exact: true,
        })
    }

    fn closed_luroth(t: f64, q: f64) -> f64 {
        let x = 2f64.powf(q - t);
        x.ln() - (1.0 - x).ln()
    }

    #[test]
    fn z_tilde_at_origin_counts_symbols() {
        let (s, f) = example_5_1();
        assert!((z_tilde_1(&s, &f, 0.0, 0.0).unwrap().to_f64() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn z_tilde_diverges_on_luroth_diagonal() {
        let s = luroth(50);
        let f = PotentialFamily::lyapunov(&s);
        assert_eq!(z_tilde_1(&s, &f, 0.7, 0.7).unwrap(), ExtReal::PosInfinity);
    }

    #[test]
    fn z_tilde_decays_in_t() {
        let (s, f) = example_5_1();
        let z = z_tilde_1(&s, &f, 3.0, 0.0).unwrap().to_f64();
        assert!(z < 1.0 && z > 0.0);
    }

    #[test]
    fn missing_tail_data_is_reported() {
        let s = luroth(10);
        let f = PotentialFamily::new(vec![1.0; 10]).with_bounded(false);
        assert_eq!(z_tilde_1(&s, &f, 1.0, 0.5), Err(Error::CannotBoundTail));
    }

    #[test]
    fn luroth_pressure_matches_closed_form() {
        let s = luroth(60);
        let f = PotentialFamily::lyapunov(&s);
        let p = pressure(&s, &f, 1.0, 0.0).unwrap();
        assert!(p.value.to_f64().abs() < 1e-14);
        for &(t, q) in &[(0.5, -1.0), (2.0, 1.9), (0.2, -3.0), (1.0, 0.999)] {
            let v = pressure(&s, &f, t, q).unwrap().value.to_f64();
            assert!((v - closed_luroth(t, q)).abs() < 1e-12, "{t} {q}");
        }
        let (_, dq) = pressure_grad(&s, &f, 1.0, 0.0).unwrap();
        assert!((dq - 2.0 * 2f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn luroth_second_q_derivative() {
        let s = luroth(60);
        let f = PotentialFamily::lyapunov(&s);
        let h = pressure_hessian(&s, &f, 1.0, 0.0).unwrap();
        let ln2 = 2f64.ln();
        assert!((h[1][1] - 2.0 * ln2 * ln2).abs() < 1e-12);
        // Lyapunov family: P depends on t - q only.
        assert!((h[0][0] - h[1][1]).abs() < 1e-12);
        assert!((h[0][1] + h[1][1]).abs() < 1e-12);
    }

    #[test]
    fn one_symbol_system() {
        let s = SystemSpec::full_shift(vec![0.3]);
        let f = PotentialFamily::new(vec![1.7]);
        let p = pressure(&s, &f, 2.0, -0.5).unwrap();
        assert!((p.value.to_f64() - (2.0 * 0.3f64.ln() - 0.5 * 1.7)).abs() < 1e-15);
        assert_eq!(p.grad, Some((0.3f64.ln(), 1.7)));
        assert_eq!(pressure_hessian(&s, &f, 2.0, -0.5).unwrap(), [[0.0; 2]; 2]);
        assert_eq!(bowen_parameter(&s).unwrap(), 0.0);
    }

    #[test]
    fn example_5_1_hessian_is_weighted_covariance() {
        let (s, f) = example_5_1();
        let h = pressure_hessian(&s, &f, 0.0, 0.0).unwrap();
        // uniform weights at the origin
        let g = [0.5f64.ln(), (1.0f64 / 6.0).ln(), (1.0f64 / 12.0).ln()];
        let v = [1.0, 2.0, 1.0];
        let mg = g.iter().sum::<f64>() / 3.0;
        let mv = v.iter().sum::<f64>() / 3.0;
        let cgg = g.iter().map(|x| (x - mg).powi(2)).sum::<f64>() / 3.0;
        let cgv = g.iter().zip(&v).map(|(x, y)| (x - mg) * (y - mv)).sum::<f64>() / 3.0;
        let cvv = v.iter().map(|y| (y - mv).powi(2)).sum::<f64>() / 3.0;
        assert!((h[0][0] - cgg).abs() < 1e-14);
        assert!((h[0][1] - cgv).abs() < 1e-14);
        assert!((h[1][1] - cvv).abs() < 1e-14);
        let det = h[0][0] * h[1][1] - h[0][1] * h[0][1];
        assert!(det >= 0.0);
    }

    #[test]
    fn finiteness_parameters() {
        assert_eq!(
            finiteness_parameter(&SystemSpec::full_shift(vec![0.5, 0.25])),
            ExtReal::NegInfinity
        );
        assert!(finiteness_parameter(&luroth(40)).to_f64().abs() < 1e-12);
        let gauss =
            SystemSpec::full_shift((1..=100).map(|n| 1.0 / (n * (n + 1)) as f64).collect()).with_tail(TailModel {
                law: TailLaw::PowerLaw {
                    scale: 1.0,
                    exponent: 2.0,
                },
                exact: false,
            });
        assert!((finiteness_parameter(&gauss).to_f64() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bowen_parameter_of_three_branches() {
        let (s, _) = example_5_1();
        let h = bowen_parameter(&s).unwrap();
        let sum = 2f64.powf(-h) + 6f64.powf(-h) + 12f64.powf(-h);
        assert!((sum - 1.0).abs() < 1e-12);
        assert!((bowen_parameter(&luroth(200)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regularity_flags() {
        let r = regularity_report(&luroth(100)).unwrap();
        assert!(r.cofinitely_regular && r.regular);
        let (s, _) = example_5_1();
        let r = regularity_report(&s).unwrap();
        assert_eq!(r.theta, ExtReal::NegInfinity);
        assert!(!r.cofinitely_regular && r.regular);
    }

    #[test]
    fn luroth_boundary_is_diagonal() {
        let s = luroth(50);
        let f = PotentialFamily::lyapunov(&s);
        let b = manhattan_boundary(&s, &f, &[-1.0, 0.0, 0.5, 2.0]).unwrap();
        assert_eq!(b.samples.len(), 4);
        for (t, q0) in b.samples {
            assert!((q0 - t).abs() < 1e-12);
        }
        let bounded = PotentialFamily::new(vec![1.0; 50]);
        let b = manhattan_boundary(&s, &bounded, &[0.0]).unwrap();
        assert!(b.samples.is_empty());
        assert!(b.half_plane_theta.is_some());
        let unknown = PotentialFamily::new(vec![1.0; 50]).with_bounded(false);
        assert_eq!(
            manhattan_boundary(&s, &unknown, &[0.0]),
            Err(Error::BoundaryShapeUnknown)
        );
        let (fs, ff) = example_5_1();
        assert!(manhattan_boundary(&fs, &ff, &[0.0]).unwrap().samples.is_empty());
    }

    #[test]
    fn luroth_blowup() {
        let s = luroth(50);
        let f = PotentialFamily::lyapunov(&s);
        let probes = boundary_blowup_check(&s, &f, 1.0, 30).unwrap();
        assert_eq!(probes.len(), 30);
        for w in probes.windows(2) {
            assert!(w[1].pressure > w[0].pressure);
            assert!(w[1].dq > w[0].dq);
        }
        let last = probes.last().unwrap();
        let ln2 = 2f64.ln();
        let expect = 2.0 * ln2 / (-2.0 * ((last.q - 1.0) * ln2).exp_m1());
        assert!((last.dq - expect).abs() / expect < 1e-8);
        assert!(last.pressure > 15.0);
        let (fs, ff) = example_5_1();
        assert!(boundary_blowup_check(&fs, &ff, 1.0, 10).unwrap().is_empty());
    }

    #[test]
    fn truncation_gap_of_dyadic_sums() {
        // carried sums 1 - 2^-N at t = 1
        let gap = truncation_gap(&luroth(20), &luroth(40), 1.0).unwrap();
        let expect = (1.0 - 0.5f64.powi(40)).ln() - (1.0 - 0.5f64.powi(20)).ln();
        assert!((gap - expect).abs() < 1e-15);
        assert!(truncation_gap(&luroth(200), &luroth(400), 1.0).unwrap() < 1e-15);
    }

    #[test]
    fn markov_golden_mean_pressure() {
        let s = SystemSpec::markov(vec![0.5, 0.5], vec![vec![true, true], vec![true, false]]);
        let f = PotentialFamily::new(vec![0.0, 0.0]);
        let p = pressure(&s, &f, 0.0, 0.0).unwrap();
        let phi = 0.5 * (1.0 + 5f64.sqrt());
        assert!((p.value.to_f64() - phi.ln()).abs() < 1e-13);
        // every word has the same ratio: P(t, 0) = log phi + t log(1/2)
        let p = pressure(&s, &f, 1.3, 0.0).unwrap();
        assert!((p.value.to_f64() - (phi.ln() - 1.3 * 2f64.ln())).abs() < 1e-13);
    }
}
