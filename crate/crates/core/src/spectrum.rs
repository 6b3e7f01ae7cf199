//! Multifractal spectrum of Birkhoff averages: the solution `(t(xi), q(xi))`
//! of `P(t, q) = q xi`, `dP/dq(t, q) = xi` over the exponent range.
//!
//! For fixed `t` the inner problem inverts the increasing map `q -> dP/dq`.
//! The outer problem finds the root of `W(t) = min_q P(t, q) - q xi`, which is
//! convex and strictly decreasing on `[0, h]` with `W'(t) = dP/dt`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::gibbs::{
    max_average_oracle, min_average_oracle, zero_temperature_ceiling, zero_temperature_floor, zero_temperature_limit,
};
use crate::pressure::{bowen_parameter, finiteness_parameter, PressureSurface};
use crate::root::{safeguarded_newton, NewtonTolerance};
use crate::system::{translate_family, PotentialFamily, SystemSpec};

/// Agreement required between the zero-temperature limit and the cycle oracle.
pub const RANGE_TOLERANCE: f64 = 1e-6;
/// Residual bound a point must meet to count as solved.
pub const POINT_TOLERANCE: f64 = 1e-9;
/// Relative width at which a bracket is considered collapsed.
const STEP_TOLERANCE: f64 = 1e-15;
/// Limit on bracket expansions in either direction.
const MAX_EXPANSIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Target for `|W(t)| = |P(t, q) - q xi|`.
    pub tol_root: f64,
    /// Target for `|dP/dq(t, q) - xi|`.
    pub tol_grad: f64,
    pub max_iter: usize,
    /// Invert `dP/dq` in closed form when the family takes two values.
    pub closed_form: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol_root: 1e-12,
            tol_grad: 1e-13,
            max_iter: 200,
            closed_form: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub count: usize,
    /// Upper end of the sampled range when `xi_max` is infinite or larger.
    pub xi_cap: f64,
    /// Distance kept from both ends of the exponent range.
    pub margin: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            count: 1000,
            xi_cap: 10.0,
            margin: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentRange {
    pub xi_min: f64,
    /// Exponent with `q(xi_zero) = 0`, equal to `dP/dq(h, 0)`.
    pub xi_zero: f64,
    pub xi_max: ExtReal,
    pub source: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointFlags {
    /// The inner solve stopped at the `q` clamp.
    pub clamped: bool,
    /// `q(t, xi)` came from the two-value closed form.
    pub closed_form: bool,
    /// The point could not be solved; values are NaN.
    pub failed: bool,
}

impl PointFlags {
    /// `|`-joined names of the raised flags, `-` when none.
    pub fn label(&self) -> String {
        let names: Vec<&str> = [
            (self.clamped, "clamped"),
            (self.closed_form, "closed_form"),
            (self.failed, "failed"),
        ]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, n)| *n)
        .collect();
        if names.is_empty() {
            "-".to_string()
        } else {
            names.join("|")
        }
    }

    /// Inverse of [`PointFlags::label`].
    pub fn parse(label: &str) -> Option<Self> {
        let mut flags = PointFlags::default();
        if label == "-" {
            return Some(flags);
        }
        for name in label.split('|') {
            match name {
                "clamped" => flags.clamped = true,
                "closed_form" => flags.closed_form = true,
                "failed" => flags.failed = true,
                _ => return None,
            }
        }
        Some(flags)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub xi: f64,
    pub t: f64,
    pub q: f64,
    pub w_residual: f64,
    pub inner_residual: f64,
    pub flags: PointFlags,
}

impl SpectrumPoint {
    fn failed(xi: f64) -> Self {
        SpectrumPoint {
            xi,
            t: f64::NAN,
            q: f64::NAN,
            w_residual: f64::NAN,
            inner_residual: f64::NAN,
            flags: PointFlags {
                failed: true,
                ..PointFlags::default()
            },
        }
    }

    /// Both equations hold to [`POINT_TOLERANCE`].
    pub fn is_solved(&self) -> bool {
        !self.flags.failed && self.w_residual <= POINT_TOLERANCE && self.inner_residual <= POINT_TOLERANCE
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCurve {
    pub points: Vec<SpectrumPoint>,
    pub range: ExponentRange,
    pub h: f64,
    pub theta: ExtReal,
    /// Index of the grid point placed on `xi_zero`.
    pub xi_zero_index: Option<usize>,
    pub infinite: bool,
    /// Family is comparable and unbounded (`xi_max` infinite).
    pub unbounded: bool,
}

/// Result of one inner solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerSolution {
    pub q: f64,
    pub residual: f64,
    pub clamped: bool,
    pub closed_form: bool,
}

/// Result of one outer solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterSolution {
    pub t: f64,
    pub q: f64,
    pub w_residual: f64,
    pub inner: InnerSolution,
}

/// Full shift without tail whose family takes exactly two values.
#[derive(Debug, Clone)]
struct TwoValues {
    low: f64,
    high: f64,
    /// Symbols carrying the high value.
    high_mask: Vec<bool>,
}

fn two_values(spec: &SystemSpec, fam: &PotentialFamily) -> Option<TwoValues> {
    if !spec.is_full_shift() || spec.tail.is_some() {
        return None;
    }
    let low = fam.min_value();
    let high = fam.max_value();
    if low == high || fam.values.iter().any(|&v| v != low && v != high) {
        return None;
    }
    Some(TwoValues {
        low,
        high,
        high_mask: fam.values.iter().map(|&v| v == high).collect(),
    })
}

fn log_sum_exp<I: Iterator<Item = f64> + Clone>(terms: I) -> f64 {
    let shift = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    shift + terms.map(|w| (w - shift).exp()).sum::<f64>().ln()
}

/// Solver bundle for one system and family: pressure evaluator, Bowen
/// parameter, exponent range and `q` clamps.
#[derive(Debug, Clone)]
pub struct SpectrumSolver<'a> {
    surface: PressureSurface<'a>,
    settings: SolverSettings,
    h: f64,
    theta: ExtReal,
    range: ExponentRange,
    q_floor: f64,
    q_ceiling: f64,
    two: Option<TwoValues>,
}

impl<'a> SpectrumSolver<'a> {
    pub fn new(spec: &'a SystemSpec, fam: &'a PotentialFamily, settings: SolverSettings) -> Result<Self> {
        let surface = PressureSurface::new(spec, fam)?;
        let h = bowen_parameter(spec)?;
        let range = range_on(&surface, h)?;
        Ok(SpectrumSolver {
            surface,
            settings,
            h,
            theta: finiteness_parameter(spec),
            range,
            q_floor: zero_temperature_floor(fam),
            q_ceiling: zero_temperature_ceiling(fam),
            two: two_values(spec, fam),
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn theta(&self) -> ExtReal {
        self.theta
    }

    pub fn range(&self) -> &ExponentRange {
        &self.range
    }

    pub fn settings(&self) -> SolverSettings {
        self.settings
    }

    /// `q_floor` and `q_ceiling` used by the inner solve.
    pub fn q_clamps(&self) -> (f64, f64) {
        (self.q_floor, self.q_ceiling)
    }

    /// `(dP/dq - xi, d2P/dq2)` at `(t, q)`.
    fn inner_residual(&self, t: f64, q: f64, xi: f64) -> Result<(f64, f64)> {
        let (_, dq, d2) = self.surface.q_derivatives(t, q)?;
        Ok((dq - xi, d2))
    }

    fn closed_form_q(&self, two: &TwoValues, t: f64, xi: f64) -> Result<InnerSolution> {
        if !(xi > two.low && xi < two.high) {
            return Err(Error::XiOutOfRange { t, xi });
        }
        let g = self.surface.log_ratios();
        let weights = |high: bool| {
            log_sum_exp(
                g.iter()
                    .zip(&two.high_mask)
                    .filter(move |(_, &m)| m == high)
                    .map(move |(lg, _)| t * lg),
            )
        };
        let (la, lb) = (weights(false), weights(true));
        let raw = (((xi - two.low) / (two.high - xi)).ln() + la - lb) / (two.high - two.low);
        let q = raw.clamp(self.q_floor, self.q_ceiling);
        let (r, _) = self.inner_residual(t, q, xi)?;
        Ok(InnerSolution {
            q,
            residual: r.abs(),
            clamped: q != raw,
            closed_form: true,
        })
    }

    /// The unique `q` with `dP/dq(t, q) = xi`, searched from `hint`.
    pub fn inner_solve_q(&self, t: f64, xi: f64, hint: Option<f64>) -> Result<InnerSolution> {
        if self.settings.closed_form {
            if let Some(two) = &self.two {
                return self.closed_form_q(two, t, xi);
            }
        }
        let boundary = self.surface.q_boundary(t);
        let ceiling = match boundary {
            Some(b) => self.q_ceiling.min(b),
            None => self.q_ceiling,
        };
        let floor = self.q_floor;
        let clamped = |q: f64, residual: f64| InnerSolution {
            q,
            residual: residual.abs(),
            clamped: true,
            closed_form: false,
        };

        let mut start = hint.unwrap_or(0.0);
        if let Some(b) = boundary {
            if start >= b {
                start = b - 1.0;
            }
        }
        start = start.max(floor);
        if start >= ceiling {
            start = ceiling - 1.0;
        }
        let r_start = self.inner_residual(t, start, xi)?.0;
        if r_start == 0.0 {
            return Ok(InnerSolution {
                q: start,
                residual: 0.0,
                clamped: false,
                closed_form: false,
            });
        }

        let (lo, hi) = if r_start < 0.0 {
            let mut lo = start;
            let mut step = 1.0;
            let mut found = None;
            for _ in 0..MAX_EXPANSIONS {
                let mut cand = lo + step;
                if cand >= ceiling {
                    cand = if boundary.is_some_and(|b| ceiling == b) {
                        0.5 * (lo + ceiling)
                    } else {
                        ceiling
                    };
                }
                if cand <= lo {
                    break;
                }
                let r = self.inner_residual(t, cand, xi)?.0;
                if r >= 0.0 {
                    found = Some(cand);
                    break;
                }
                if cand == ceiling {
                    return Ok(clamped(cand, r));
                }
                lo = cand;
                step *= 2.0;
            }
            match found {
                Some(hi) => (lo, hi),
                None => return Err(Error::XiOutOfRange { t, xi }),
            }
        } else {
            let mut hi = start;
            let mut step = 1.0;
            let mut found = None;
            for _ in 0..MAX_EXPANSIONS {
                let cand = (hi - step).max(floor);
                if cand >= hi {
                    break;
                }
                let r = self.inner_residual(t, cand, xi)?.0;
                if r <= 0.0 {
                    found = Some(cand);
                    break;
                }
                if cand == floor {
                    return Ok(clamped(cand, r));
                }
                hi = cand;
                step *= 2.0;
            }
            match found {
                Some(lo) => (lo, hi),
                None => return Err(Error::XiOutOfRange { t, xi }),
            }
        };

        let tol = NewtonTolerance {
            residual: self.settings.tol_grad,
            step: STEP_TOLERANCE,
            max_iter: self.settings.max_iter,
        };
        let start = hint.filter(|h| *h > lo && *h < hi).unwrap_or(0.5 * (lo + hi));
        let (q, r) = safeguarded_newton(lo, hi, start, tol, |q| self.inner_residual(t, q, xi))?;
        Ok(InnerSolution {
            q,
            residual: r.abs(),
            clamped: false,
            closed_form: false,
        })
    }

    /// `(W(t), W'(t), inner solution)`.
    fn w(&self, t: f64, xi: f64, hint: Option<f64>) -> Result<(f64, f64, InnerSolution)> {
        let inner = self.inner_solve_q(t, xi, hint)?;
        let (log_z, dt) = {
            let (p, _, _) = self.surface.q_derivatives(t, inner.q)?;
            (p, self.surface.grad(t, inner.q)?.0)
        };
        Ok((log_z - xi * inner.q, dt, inner))
    }

    /// Root `t(xi)` of `W` on `[0, h]`, Newton steps kept inside the bracket.
    /// Probes where the inner solve fails are treated as `W > 0`.
    pub fn outer_solve_t(&self, xi: f64, start: Option<f64>) -> Result<OuterSolution> {
        let mut hi = self.h;
        let mut lo = 0.0f64.min(hi);
        let (w_hi, _, inner_hi) = self.w(hi, xi, None).map_err(|_| Error::XiUnreachable(xi))?;
        let at_hi = OuterSolution {
            t: hi,
            q: inner_hi.q,
            w_residual: w_hi.abs(),
            inner: inner_hi,
        };
        if w_hi.abs() <= self.settings.tol_root {
            return Ok(at_hi);
        }
        if w_hi > 0.0 {
            return Err(Error::XiUnreachable(xi));
        }
        let mut best: Option<OuterSolution> = None;
        let mut x = start.filter(|s| *s >= lo && *s < hi).unwrap_or(lo);
        let mut hint = None;
        let mut prev_step = hi - lo;
        for _ in 0..self.settings.max_iter {
            let next = match self.w(x, xi, hint) {
                Err(_) => {
                    lo = x;
                    0.5 * (lo + hi)
                }
                Ok((w, dw, inner)) => {
                    let sol = OuterSolution {
                        t: x,
                        q: inner.q,
                        w_residual: w.abs(),
                        inner,
                    };
                    if best.is_none_or(|b| sol.w_residual < b.w_residual) {
                        best = Some(sol);
                    }
                    if w.abs() <= self.settings.tol_root {
                        return Ok(sol);
                    }
                    hint = Some(inner.q);
                    if w > 0.0 {
                        lo = x;
                    } else {
                        hi = x;
                    }
                    let newton = x - w / dw;
                    if dw < 0.0 && newton > lo && newton < hi && (newton - x).abs() <= 0.5 * prev_step {
                        newton
                    } else {
                        0.5 * (lo + hi)
                    }
                }
            };
            if hi - lo <= STEP_TOLERANCE * hi.abs().max(1.0) || next == x {
                break;
            }
            prev_step = (next - x).abs();
            x = next;
        }
        match best {
            Some(b) if b.w_residual <= at_hi.w_residual => Ok(b),
            Some(_) => Ok(at_hi),
            None => Err(Error::XiUnreachable(xi)),
        }
    }

    fn point(&self, xi: f64) -> SpectrumPoint {
        match self.outer_solve_t(xi, None) {
            Ok(sol) => SpectrumPoint {
                xi,
                t: sol.t,
                q: sol.q,
                w_residual: sol.w_residual,
                inner_residual: sol.inner.residual,
                flags: PointFlags {
                    clamped: sol.inner.clamped,
                    closed_form: sol.inner.closed_form,
                    failed: false,
                },
            },
            Err(_) => SpectrumPoint::failed(xi),
        }
    }

    /// Grid over `(xi_min + margin, min(xi_max, xi_cap) - margin)` with one
    /// node placed exactly on `xi_zero` when it lies inside.
    pub fn grid(&self, grid: &GridSpec) -> Result<(Vec<f64>, Option<usize>)> {
        let xi0 = self.range.xi_zero;
        if grid.count == 0 {
            return Err(Error::InvalidArgument("grid count must be at least 1".to_string()));
        }
        if grid.count == 1 {
            return Ok((vec![xi0], Some(0)));
        }
        let lo = self.range.xi_min + grid.margin;
        let top = match self.range.xi_max {
            ExtReal::Finite(m) => m.min(grid.xi_cap),
            _ => grid.xi_cap,
        };
        let hi = top - grid.margin;
        if !(hi > lo) {
            return Err(Error::InvalidArgument(format!("empty grid range ({lo}, {hi})")));
        }
        let n = grid.count;
        if !(xi0 > lo && xi0 < hi) {
            let step = (hi - lo) / (n - 1) as f64;
            return Ok(((0..n).map(|i| lo + step * i as f64).collect(), None));
        }
        let k = (((xi0 - lo) / (hi - lo)) * (n - 1) as f64).round() as usize;
        let k = k.min(n - 1);
        let mut xs = Vec::with_capacity(n);
        for i in 0..k {
            xs.push(lo + (xi0 - lo) * i as f64 / k as f64);
        }
        xs.push(xi0);
        let right = n - 1 - k;
        for j in 1..=right {
            xs.push(xi0 + (hi - xi0) * j as f64 / right as f64);
        }
        Ok((xs, Some(k)))
    }

    /// Solve every grid point in parallel.
    pub fn sample(&self, grid: &GridSpec) -> Result<SpectrumCurve> {
        let (xs, xi_zero_index) = self.grid(grid)?;
        let points: Vec<SpectrumPoint> = xs.par_iter().map(|&xi| self.point(xi)).collect();
        Ok(SpectrumCurve {
            points,
            range: self.range.clone(),
            h: self.h,
            theta: self.theta,
            xi_zero_index,
            infinite: self.surface.spec().is_infinite(),
            unbounded: !self.range.xi_max.is_finite(),
        })
    }
}

/// Range from the zero-temperature limit, checked against the cycle oracle.
fn range_on(surface: &PressureSurface<'_>, h: f64) -> Result<ExponentRange> {
    let spec = surface.spec();
    let fam = surface.family();
    let oracle_min = min_average_oracle(spec, fam);
    let oracle_max = max_average_oracle(spec, fam);
    let unbounded = spec.is_infinite() && !fam.bounded && fam.comparability.is_some_and(|c| c.alpha > 0.0);
    let scale = oracle_min.abs().max(oracle_max.abs()).max(1.0);
    if !unbounded && oracle_max - oracle_min <= 1e-12 * scale {
        return Err(Error::DegenerateFamily(oracle_min));
    }
    let mut source = Vec::new();

    let floor = zero_temperature_floor(fam);
    if !floor.is_finite() {
        return Err(Error::DegenerateFamily(oracle_min));
    }
    let mut qs = Vec::new();
    let mut q = -1.0;
    while q > floor {
        qs.push(q);
        q *= 2.0;
    }
    qs.push(floor);
    // Bounded families on infinite alphabets have P(0, q) = inf for every q.
    let t_probe = if surface.in_region(0.0, qs[0])? { 0.0 } else { h };
    let trace = zero_temperature_limit(spec, fam, t_probe, &qs)?;
    let limit = trace.last().map_or(f64::NAN, |s| s.f_exponent);
    if !((limit - oracle_min).abs() <= RANGE_TOLERANCE) {
        return Err(Error::RangeDisagreement {
            limit,
            oracle: oracle_min,
        });
    }
    source.push(format!(
        "xi_min: zero-temperature limit at t = {t_probe}, q = {floor:.6e}; agrees with cycle oracle"
    ));

    let (_, xi_zero, _) = surface.q_derivatives(h, 0.0)?;
    source.push("xi_zero: dP/dq(h, 0)".to_string());

    let xi_max = if unbounded {
        source.push("xi_max: unbounded comparable family".to_string());
        ExtReal::PosInfinity
    } else {
        source.push(if spec.is_full_shift() {
            "xi_max: maximum over the alphabet".to_string()
        } else {
            "xi_max: maximum cycle mean".to_string()
        });
        ExtReal::Finite(oracle_max)
    };
    Ok(ExponentRange {
        xi_min: oracle_min,
        xi_zero,
        xi_max,
        source,
    })
}

pub fn exponent_range(spec: &SystemSpec, fam: &PotentialFamily) -> Result<ExponentRange> {
    let surface = PressureSurface::new(spec, fam)?;
    let h = bowen_parameter(spec)?;
    range_on(&surface, h)
}

pub fn inner_solve_q(spec: &SystemSpec, fam: &PotentialFamily, t: f64, xi: f64) -> Result<f64> {
    Ok(SpectrumSolver::new(spec, fam, SolverSettings::default())?
        .inner_solve_q(t, xi, None)?
        .q)
}

/// `(t(xi), q(xi))`.
pub fn outer_solve_t(spec: &SystemSpec, fam: &PotentialFamily, xi: f64) -> Result<(f64, f64)> {
    let sol = SpectrumSolver::new(spec, fam, SolverSettings::default())?.outer_solve_t(xi, None)?;
    Ok((sol.t, sol.q))
}

pub fn sample_spectrum(
    spec: &SystemSpec,
    fam: &PotentialFamily,
    grid: &GridSpec,
    settings: SolverSettings,
) -> Result<SpectrumCurve> {
    SpectrumSolver::new(spec, fam, settings)?.sample(grid)
}

/// Lyapunov spectrum through the one-parameter pressure `p(s) = P(s, 0)`:
/// solve `-p'(s) = xi`, then `q = p(s) / xi` and `t = s + q`.
pub fn lyapunov_spectrum(spec: &SystemSpec, xi: f64) -> Result<(f64, f64)> {
    let zero = PotentialFamily::zero(spec);
    let surface = PressureSurface::new(spec, &zero)?;
    let lyap = PotentialFamily::lyapunov(spec);
    let xi_min = min_average_oracle(spec, &lyap);
    if !(xi > xi_min) {
        return Err(Error::BelowMinimum { xi, xi_min });
    }
    // psi(s) = xi + p'(s) is increasing in s.
    let psi = |s: f64| -> Result<(f64, f64)> {
        let (dt, _) = surface.grad(s, 0.0)?;
        let hess = surface.hessian(s, 0.0)?;
        Ok((xi + dt, hess[0][0]))
    };
    let start = bowen_parameter(spec)?;
    let theta = finiteness_parameter(spec);
    let r0 = psi(start)?.0;
    let (lo, hi) = if r0 < 0.0 {
        let mut lo = start;
        let mut step = 1.0;
        loop {
            let cand = lo + step;
            if psi(cand)?.0 >= 0.0 {
                break (lo, cand);
            }
            lo = cand;
            step *= 2.0;
            if step > 1e12 {
                return Err(Error::XiUnreachable(xi));
            }
        }
    } else {
        let mut hi = start;
        let mut step = 1.0;
        let mut found = None;
        for _ in 0..MAX_EXPANSIONS {
            let cand = match theta {
                ExtReal::Finite(th) if hi - step <= th => 0.5 * (hi + th),
                _ => hi - step,
            };
            if cand >= hi {
                break;
            }
            if psi(cand)?.0 <= 0.0 {
                found = Some(cand);
                break;
            }
            hi = cand;
            step *= 2.0;
        }
        (found.ok_or(Error::XiUnreachable(xi))?, hi)
    };
    let tol = NewtonTolerance {
        residual: 1e-13 * xi.max(1.0),
        step: STEP_TOLERANCE,
        max_iter: 400,
    };
    let (s, _) = safeguarded_newton(lo, hi, 0.5 * (lo + hi), tol, psi)?;
    let p = surface.value(s, 0.0)?.to_f64();
    let q = p / xi;
    Ok((s + q, q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeCheck {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    /// Set when the curve is too short or the range collapses.
    pub degenerate: Option<String>,
    pub checks: Vec<ShapeCheck>,
}

impl ShapeReport {
    /// No check failed and the curve is not degenerate.
    pub fn passed(&self) -> bool {
        self.degenerate.is_none() && self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn status(&self, name: &str) -> Option<CheckStatus> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.status)
    }
}

/// Minimum number of points [`shape_diagnostics`] needs.
pub const MIN_DIAGNOSTIC_POINTS: usize = 100;
/// Slack for monotonicity comparisons on sampled values.
const SHAPE_SLACK: f64 = 1e-12;

fn check(name: &str, ok: bool, detail: String) -> ShapeCheck {
    ShapeCheck {
        name: name.to_string(),
        status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        detail,
    }
}

fn skipped(name: &str, why: &str) -> ShapeCheck {
    ShapeCheck {
        name: name.to_string(),
        status: CheckStatus::Skipped,
        detail: why.to_string(),
    }
}

/// Second difference of `t` at the middle of three (possibly uneven) nodes.
fn second_difference(p: &[SpectrumPoint]) -> f64 {
    let (a, b, c) = (&p[0], &p[1], &p[2]);
    let right = (c.t - b.t) / (c.xi - b.xi);
    let left = (b.t - a.t) / (b.xi - a.xi);
    2.0 * (right - left) / (c.xi - a.xi)
}

/// Sign patterns of `q` and `t`, concavity at the peak, the inflection of
/// unbounded families and the tail behaviour of infinite systems.
pub fn shape_diagnostics(curve: &SpectrumCurve) -> ShapeReport {
    let range = &curve.range;
    if range.xi_max == ExtReal::Finite(range.xi_min) {
        return ShapeReport {
            degenerate: Some("xi_min = xi_max".to_string()),
            checks: Vec::new(),
        };
    }
    if curve.points.len() < MIN_DIAGNOSTIC_POINTS {
        return ShapeReport {
            degenerate: Some(format!(
                "{} points, at least {MIN_DIAGNOSTIC_POINTS} needed",
                curve.points.len()
            )),
            checks: Vec::new(),
        };
    }
    let mut checks = Vec::new();
    let pts: Vec<SpectrumPoint> = curve.points.iter().copied().filter(|p| !p.flags.failed).collect();
    let failed = curve.points.len() - pts.len();
    let max_w = pts.iter().map(|p| p.w_residual).fold(0.0, f64::max);
    let max_inner = pts.iter().map(|p| p.inner_residual).fold(0.0, f64::max);
    checks.push(check(
        "system-residuals",
        failed == 0 && max_w <= POINT_TOLERANCE && max_inner <= POINT_TOLERANCE,
        format!("{failed} failed points, max |W| {max_w:.3e}, max inner {max_inner:.3e}"),
    ));
    let out_of_range = pts
        .iter()
        .filter(|p| p.t < -SHAPE_SLACK || p.t > curve.h + SHAPE_SLACK)
        .count();
    checks.push(check(
        "t-in-range",
        out_of_range == 0,
        format!("{out_of_range} points outside [0, h]"),
    ));

    let xi0 = range.xi_zero;
    let peak = pts.iter().position(|p| p.xi == xi0);
    let left: Vec<&SpectrumPoint> = pts.iter().filter(|p| p.xi < xi0).collect();
    let right: Vec<&SpectrumPoint> = pts.iter().filter(|p| p.xi > xi0).collect();

    let bad_left = left.iter().filter(|p| !(p.q < 0.0)).count();
    let bad_right = right.iter().filter(|p| !(p.q > 0.0)).count();
    let q_at_peak = peak.map(|i| pts[i].q);
    let peak_ok = q_at_peak.is_none_or(|q| q.abs() <= 1e-8);
    checks.push(check(
        "q-sign",
        bad_left == 0 && bad_right == 0 && peak_ok,
        format!("{bad_left} left and {bad_right} right violations, q(xi_zero) = {q_at_peak:?}"),
    ));

    let rising = left.windows(2).filter(|w| w[1].t < w[0].t - SHAPE_SLACK).count();
    let falling = right.windows(2).filter(|w| w[1].t > w[0].t + SHAPE_SLACK).count();
    checks.push(check(
        "t-monotone",
        rising == 0 && falling == 0,
        format!("{rising} decreases left of xi_zero, {falling} increases right of it"),
    ));

    match peak {
        Some(i) if i > 0 && i + 1 < pts.len() => {
            let d2 = second_difference(&pts[i - 1..=i + 1]);
            checks.push(check(
                "concave-at-peak",
                d2 < 0.0,
                format!("second difference {d2:.6e}"),
            ));
        }
        _ => checks.push(skipped("concave-at-peak", "xi_zero is not an interior grid point")),
    }

    let argmax = pts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.t.total_cmp(&b.1.t))
        .map(|(i, _)| i);
    match (argmax, peak) {
        (Some(m), Some(i)) => {
            let top = pts[m].t;
            checks.push(check(
                "peak-identity",
                m.abs_diff(i) <= 1 && (top - curve.h).abs() <= 1e-6,
                format!("argmax {m}, xi_zero index {i}, max t {top:.12}, h {:.12}", curve.h),
            ));
        }
        _ => checks.push(skipped("peak-identity", "xi_zero is not a grid point")),
    }

    if curve.unbounded {
        let idx: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].xi > xi0).collect();
        let mut found = None;
        for &i in &idx {
            if i >= 1 && i + 1 < pts.len() && pts[i - 1].xi >= xi0 && second_difference(&pts[i - 1..=i + 1]) > 0.0 {
                found = Some(pts[i].xi);
                break;
            }
        }
        checks.push(check(
            "inflection",
            found.is_some(),
            match found {
                Some(x) => format!("second difference turns positive near xi = {x:.6}"),
                None => "second difference stays negative right of xi_zero".to_string(),
            },
        ));
    } else {
        checks.push(skipped("inflection", "bounded family"));
    }

    if curve.infinite && curve.unbounded {
        let theta = curve.theta.to_f64();
        let tail: Vec<&&SpectrumPoint> = right.iter().rev().take(right.len() / 4).collect();
        let last = right.last().map_or(f64::NAN, |p| p.t);
        let tail_falls = tail.windows(2).all(|w| w[0].t <= w[1].t + SHAPE_SLACK);
        checks.push(check(
            "t-tail",
            tail_falls && last > theta - SHAPE_SLACK && last < curve.h,
            format!("t decreases toward theta = {theta}; last t {last:.6}"),
        ));
        let q_peak_right = right.iter().map(|p| p.q).fold(f64::NEG_INFINITY, f64::max);
        let q_last = right.last().map_or(f64::NAN, |p| p.q);
        let q_first = pts.first().map_or(f64::NAN, |p| p.q);
        let q_min = pts.iter().map(|p| p.q).fold(f64::INFINITY, f64::min);
        checks.push(check(
            "q-tail",
            q_last > 0.0 && q_last < q_peak_right && q_first == q_min,
            format!("q right end {q_last:.6} below its maximum {q_peak_right:.6}; q left end {q_first:.6} is minimal"),
        ));
    } else {
        checks.push(skipped("t-tail", "finite alphabet or bounded family"));
        checks.push(skipped("q-tail", "finite alphabet or bounded family"));
    }

    ShapeReport {
        degenerate: None,
        checks,
    }
}

/// `max |t_{F+a}(xi + a) - t_F(xi)|` over the grid of `F`.
pub fn translation_invariance_check(
    spec: &SystemSpec,
    fam: &PotentialFamily,
    a: f64,
    grid: &GridSpec,
    settings: SolverSettings,
) -> Result<f64> {
    let base = SpectrumSolver::new(spec, fam, settings)?;
    let shifted_fam = translate_family(fam, a);
    let shifted = SpectrumSolver::new(spec, &shifted_fam, settings)?;
    let (xs, _) = base.grid(grid)?;
    let devs: Vec<f64> = xs
        .par_iter()
        .map(|&xi| -> Result<f64> {
            let t0 = base.outer_solve_t(xi, None)?.t;
            let t1 = shifted.outer_solve_t(xi + a, None)?.t;
            Ok((t1 - t0).abs())
        })
        .collect::<Result<_>>()?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{TailLaw, TailModel};

    fn ex51() -> (SystemSpec, PotentialFamily) {
        (
            SystemSpec::full_shift(vec![0.5, 1.0 / 6.0, 1.0 / 12.0]),
            PotentialFamily::new(vec![1.0, 2.0, 1.0]),
        )
    }

    fn luroth(n: usize) -> (SystemSpec, PotentialFamily) {
        let s = SystemSpec::full_shift((1..=n).map(|k| 0.5f64.powi(k as i32)).collect()).with_tail(TailModel {
            law: TailLaw::Geometric {
                scale: 1.0,
                rate: 2f64.ln(),
            },
            exact: true,
        });
        let f = PotentialFamily::lyapunov(&s);
        (s, f)
    }

    fn luroth_t(xi: f64) -> f64 {
        let ln2 = 2f64.ln();
        (xi / ln2 - 1.0).ln() / xi - (1.0 - ln2 / xi).log2()
    }

    #[test]
    fn flags_round_trip() {
        for flags in [
            PointFlags::default(),
            PointFlags {
                clamped: true,
                closed_form: true,
                failed: false,
            },
            PointFlags {
                failed: true,
                ..PointFlags::default()
            },
        ] {
            assert_eq!(PointFlags::parse(&flags.label()), Some(flags));
        }
        assert_eq!(PointFlags::parse("bogus"), None);
    }

    #[test]
    fn example_5_1_range() {
        let (s, f) = ex51();
        let r = exponent_range(&s, &f).unwrap();
        assert!((r.xi_min - 1.0).abs() < 1e-12);
        assert_eq!(r.xi_max, ExtReal::Finite(2.0));
        let h = bowen_parameter(&s).unwrap();
        let w = [2f64.powf(-h), 6f64.powf(-h), 12f64.powf(-h)];
        let xi0 = w[0] + 2.0 * w[1] + w[2];
        assert!((r.xi_zero - xi0).abs() < 1e-12);
    }

    #[test]
    fn constant_family_is_degenerate() {
        let (s, _) = ex51();
        let f = PotentialFamily::new(vec![1.5; 3]);
        assert_eq!(exponent_range(&s, &f), Err(Error::DegenerateFamily(1.5)));
    }

    #[test]
    fn luroth_range() {
        let (s, f) = luroth(200);
        let r = exponent_range(&s, &f).unwrap();
        let ln2 = 2f64.ln();
        assert!((r.xi_min - ln2).abs() < 1e-12);
        assert!((r.xi_zero - 2.0 * ln2).abs() < 1e-12);
        assert_eq!(r.xi_max, ExtReal::PosInfinity);
    }

    #[test]
    fn inner_matches_closed_forms() {
        let (s, f) = ex51();
        let q = inner_solve_q(&s, &f, 0.0, 1.5).unwrap();
        assert!((q - 2f64.ln()).abs() < 1e-14);
        let generic = SpectrumSolver::new(
            &s,
            &f,
            SolverSettings {
                closed_form: false,
                ..SolverSettings::default()
            },
        )
        .unwrap();
        let sol = generic.inner_solve_q(0.0, 1.5, None).unwrap();
        assert!(!sol.closed_form);
        assert!((sol.q - 2f64.ln()).abs() < 1e-11);

        let (s, f) = luroth(200);
        let ln2 = 2f64.ln();
        for &(t, xi) in &[(0.3, 1.0), (1.0, 5.0), (0.0, 0.7), (0.9, 9.0)] {
            let q = inner_solve_q(&s, &f, t, xi).unwrap();
            let expect = (2f64.powf(t) * (1.0 - ln2 / xi)).log2();
            assert!((q - expect).abs() < 1e-11, "{t} {xi}: {q} vs {expect}");
        }
    }

    #[test]
    fn outer_at_xi_zero_is_peak() {
        let (s, f) = ex51();
        let solver = SpectrumSolver::new(&s, &f, SolverSettings::default()).unwrap();
        let sol = solver.outer_solve_t(solver.range().xi_zero, None).unwrap();
        assert!((sol.t - solver.h()).abs() < 1e-12);
        assert!(sol.q.abs() < 1e-12);
    }

    #[test]
    fn luroth_points_follow_closed_form() {
        let (s, f) = luroth(200);
        let solver = SpectrumSolver::new(&s, &f, SolverSettings::default()).unwrap();
        for &xi in &[0.7, 1.0, 2.0 * 2f64.ln(), 3.0, 9.99] {
            let sol = solver.outer_solve_t(xi, None).unwrap();
            assert!((sol.t - luroth_t(xi)).abs() < 1e-10, "{xi}");
        }
    }

    #[test]
    fn lyapunov_fast_path() {
        let (s, _) = luroth(200);
        let (t, q) = lyapunov_spectrum(&s, 2.0 * 2f64.ln()).unwrap();
        assert!((t - 1.0).abs() < 1e-12 && q.abs() < 1e-12);
        for &xi in &[0.8, 2.5, 10.0, 1000.0] {
            let (t, _) = lyapunov_spectrum(&s, xi).unwrap();
            assert!((t - luroth_t(xi)).abs() < 1e-10, "{xi}");
        }
        assert!(lyapunov_spectrum(&s, 1000.0).unwrap().0 < 0.02);
        assert!(matches!(lyapunov_spectrum(&s, 0.5), Err(Error::BelowMinimum { .. })));
    }

    #[test]
    fn grid_lands_on_xi_zero() {
        let (s, f) = ex51();
        let solver = SpectrumSolver::new(&s, &f, SolverSettings::default()).unwrap();
        let (xs, k) = solver.grid(&GridSpec::default()).unwrap();
        assert_eq!(xs.len(), 1000);
        assert_eq!(xs[k.unwrap()], solver.range().xi_zero);
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
        let one = GridSpec {
            count: 1,
            ..GridSpec::default()
        };
        let curve = solver.sample(&one).unwrap();
        assert_eq!(curve.points.len(), 1);
        assert!((curve.points[0].t - solver.h()).abs() < 1e-12);
        assert!(solver
            .grid(&GridSpec {
                count: 0,
                ..GridSpec::default()
            })
            .is_err());
    }

    #[test]
    fn short_curve_is_degenerate() {
        let (s, f) = ex51();
        let grid = GridSpec {
            count: 10,
            ..GridSpec::default()
        };
        let curve = sample_spectrum(&s, &f, &grid, SolverSettings::default()).unwrap();
        assert!(shape_diagnostics(&curve).degenerate.is_some());
    }

    #[test]
    fn zero_translation_is_exact() {
        let (s, f) = ex51();
        let grid = GridSpec {
            count: 20,
            ..GridSpec::default()
        };
        assert_eq!(
            translation_invariance_check(&s, &f, 0.0, &grid, SolverSettings::default()).unwrap(),
            0.0
        );
    }
}
