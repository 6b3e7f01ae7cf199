//! Subcommand implementations.

use std::path::Path;

use birkhoff_spectrum::builtin::BUILTINS;
use birkhoff_spectrum::gibbs::{gibbs_state, variational_check};
use birkhoff_spectrum::pressure::{manhattan_boundary, truncation_gap, PressureSurface};
use birkhoff_spectrum::spectrum::{
    shape_diagnostics, translation_invariance_check, CheckStatus, GridSpec, SpectrumCurve, SpectrumSolver,
};
use birkhoff_spectrum::system::SystemSpec;
use birkhoff_spectrum::Error;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::output::{emit, ext_json, fmt_f64, Table, SCHEMA_VERSION};

/// Failure classes, one per exit code.
#[derive(Debug)]
pub enum Failure {
    Validation(anyhow::Error),
    Solver(anyhow::Error),
    Checks(Vec<String>),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Checks(_) => 4,
        }
    }

    pub fn validation(e: impl Into<anyhow::Error>) -> Self {
        Failure::Validation(e.into())
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Validation(e) => write!(f, "validation failed: {e:#}"),
            Failure::Solver(e) => write!(f, "solver failed: {e:#}"),
            Failure::Checks(names) => write!(f, "checks failed: {}", names.join(", ")),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidSystem(_)
            | Error::InvalidArgument(_)
            | Error::DegenerateFamily(_)
            | Error::UnknownBuiltin(_)
            | Error::NonMonotoneSequence(_)
            | Error::CannotBoundTail
            | Error::BoundaryShapeUnknown
            | Error::NoPressureZero => Failure::Validation(e.into()),
            _ => Failure::Solver(e.into()),
        }
    }
}

pub type Outcome = Result<(), Failure>;

fn header(command: &str, cfg: &RunConfig) -> Value {
    json!({
        "schema": SCHEMA_VERSION,
        "command": command,
        "config": cfg,
    })
}

fn curve_summary(curve: &SpectrumCurve) -> Value {
    let solved: Vec<_> = curve.points.iter().filter(|p| !p.flags.failed).collect();
    json!({
        "points": curve.points.len(),
        "failed": curve.points.len() - solved.len(),
        "clamped": solved.iter().filter(|p| p.flags.clamped).count(),
        "max_w_residual": solved.iter().map(|p| p.w_residual).fold(0.0, f64::max),
        "max_inner_residual": solved.iter().map(|p| p.inner_residual).fold(0.0, f64::max),
    })
}

fn range_json(curve: &SpectrumCurve) -> Value {
    json!({
        "xi_min": curve.range.xi_min,
        "xi_zero": curve.range.xi_zero,
        "xi_max": ext_json(curve.range.xi_max),
        "source": curve.range.source,
    })
}

pub fn spectrum(cfg: &RunConfig, format: Format, out: Option<&Path>) -> Outcome {
    let (spec, fam) = cfg.build().map_err(Failure::validation)?;
    let solver = SpectrumSolver::new(&spec, &fam, cfg.solver)?;
    let curve = solver.sample(&cfg.grid)?;

    let table = Table {
        columns: vec!["xi", "t", "q", "W_residual", "inner_residual", "flags"],
        rows: curve
            .points
            .iter()
            .map(|p| {
                vec![
                    fmt_f64(p.xi),
                    fmt_f64(p.t),
                    fmt_f64(p.q),
                    fmt_f64(p.w_residual),
                    fmt_f64(p.inner_residual),
                    p.flags.label(),
                ]
            })
            .collect(),
        json_rows: curve
            .points
            .iter()
            .map(|p| json!([p.xi, p.t, p.q, p.w_residual, p.inner_residual, p.flags.label()]))
            .collect(),
    };
    let mut head = header("spectrum", cfg);
    head["range"] = range_json(&curve);
    head["h"] = json!(curve.h);
    head["theta"] = ext_json(curve.theta);
    head["summary"] = curve_summary(&curve);
    emit(&table, head.clone(), format, out).map_err(Failure::Solver)?;

    let s = &head["summary"];
    let line = format!(
        "theta={} h={} xi_min={} xi_zero={} xi_max={} points={} max_residual={:.3e}",
        fmt_f64(curve.theta.to_f64()),
        fmt_f64(curve.h),
        fmt_f64(curve.range.xi_min),
        fmt_f64(curve.range.xi_zero),
        fmt_f64(curve.range.xi_max.to_f64()),
        curve.points.len(),
        s["max_w_residual"]
            .as_f64()
            .unwrap_or(f64::NAN)
            .max(s["max_inner_residual"].as_f64().unwrap_or(f64::NAN)),
    );
    if out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(())
}

fn linspace(range: (f64, f64), steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![range.0];
    }
    (0..steps)
        .map(|i| range.0 + (range.1 - range.0) * i as f64 / (steps - 1) as f64)
        .collect()
}

pub fn pressure_surface(
    cfg: &RunConfig,
    t_range: (f64, f64),
    q_range: (f64, f64),
    steps: usize,
    format: Format,
    out: Option<&Path>,
) -> Outcome {
    if steps == 0 {
        return Err(Failure::validation(anyhow::anyhow!("steps must be at least 1")));
    }
    let (spec, fam) = cfg.build().map_err(Failure::validation)?;
    let surface = PressureSurface::new(&spec, &fam)?;
    let ts = linspace(t_range, steps);
    let qs = linspace(q_range, steps);
    let mut rows = Vec::with_capacity(steps * steps);
    let mut json_rows = Vec::with_capacity(steps * steps);
    for &t in &ts {
        for &q in &qs {
            let p = surface.point(t, q)?;
            let (dt, dq) = p.grad.unwrap_or((f64::NAN, f64::NAN));
            rows.push(vec![
                fmt_f64(t),
                fmt_f64(q),
                fmt_f64(p.value.to_f64()),
                fmt_f64(dt),
                fmt_f64(dq),
                p.in_region.to_string(),
            ]);
            json_rows.push(json!([
                t,
                q,
                ext_json(p.value),
                p.grad.map(|g| g.0),
                p.grad.map(|g| g.1),
                p.in_region
            ]));
        }
    }
    let table = Table {
        columns: vec!["t", "q", "P", "dP_dt", "dP_dq", "in_region"],
        rows,
        json_rows,
    };
    let mut head = header("pressure-surface", cfg);
    head["t_range"] = json!([t_range.0, t_range.1]);
    head["q_range"] = json!([q_range.0, q_range.1]);
    head["steps"] = json!(steps);
    head["boundary"] = match manhattan_boundary(&spec, &fam, &ts) {
        Ok(b) => json!({
            "samples": b.samples,
            "half_plane_theta": b.half_plane_theta.map(ext_json),
        }),
        Err(e) => json!({ "unavailable": e.to_string() }),
    };
    emit(&table, head, format, out).map_err(Failure::Solver)
}

pub fn gibbs(cfg: &RunConfig, t: f64, q: f64, format: Format, out: Option<&Path>) -> Outcome {
    let (spec, fam) = cfg.build().map_err(Failure::validation)?;
    let g = gibbs_state(&spec, &fam, t, q)?;
    let residual = variational_check(&spec, &fam, t, q)?;
    let table = Table {
        columns: vec!["symbol", "stationary"],
        rows: g
            .stationary
            .iter()
            .enumerate()
            .map(|(i, p)| vec![(i + 1).to_string(), fmt_f64(*p)])
            .collect(),
        json_rows: g
            .stationary
            .iter()
            .enumerate()
            .map(|(i, p)| json!([i + 1, p]))
            .collect(),
    };
    let mut head = header("gibbs", cfg);
    head["state"] = json!({
        "t": t,
        "q": q,
        "entropy": g.entropy,
        "f_exponent": g.f_exponent,
        "lyapunov": g.lyapunov,
        "dimension": g.dimension,
        "tail_mass": g.tail_mass,
        "variational_residual": residual,
        "transition": g.transition,
    });
    emit(&table, head, format, out).map_err(Failure::Solver)?;
    eprintln!(
        "entropy={} f_exponent={} lyapunov={} dimension={} variational_residual={:.3e}",
        fmt_f64(g.entropy),
        fmt_f64(g.f_exponent),
        fmt_f64(g.lyapunov),
        fmt_f64(g.dimension),
        residual
    );
    Ok(())
}

/// Tolerance of the translation, variational and exponent checks.
const IDENTITY_TOLERANCE: f64 = 1e-8;
/// Largest accepted change of the carried pressure when the truncation doubles.
const TAIL_TOLERANCE: f64 = 1e-8;

struct Row {
    name: String,
    status: CheckStatus,
    detail: String,
}

fn row(name: &str, ok: bool, detail: String) -> Row {
    Row {
        name: name.to_string(),
        status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        detail,
    }
}

/// Prefix of a full shift keeping the first `n` symbols.
fn prefix(spec: &SystemSpec, n: usize) -> Option<SystemSpec> {
    if !spec.is_full_shift() || n == 0 {
        return None;
    }
    let mut coarse = SystemSpec::full_shift(spec.ratios[..n].to_vec());
    coarse.tail = spec.tail;
    Some(coarse)
}

pub fn diagnostics(cfg: &RunConfig, out: Option<&Path>) -> Outcome {
    let (spec, fam) = cfg.build().map_err(Failure::validation)?;
    let solver = SpectrumSolver::new(&spec, &fam, cfg.solver)?;
    let curve = solver.sample(&cfg.grid)?;
    let h = solver.h();
    let mut rows = Vec::new();

    let report = shape_diagnostics(&curve);
    if let Some(why) = &report.degenerate {
        rows.push(row("shape", false, format!("degenerate curve: {why}")));
    }
    for c in &report.checks {
        rows.push(Row {
            name: c.name.clone(),
            status: c.status,
            detail: c.detail.clone(),
        });
    }

    let small = GridSpec {
        count: cfg.grid.count.min(25),
        ..cfg.grid
    };
    let dev = translation_invariance_check(&spec, &fam, 0.5, &small, cfg.solver)?;
    rows.push(row(
        "translation",
        dev <= IDENTITY_TOLERANCE,
        format!("max |t_(F+0.5)(xi+0.5) - t_F(xi)| = {dev:.3e}"),
    ));

    let solved: Vec<_> = curve.points.iter().filter(|p| !p.flags.failed).collect();
    let stride = (solved.len() / 5).max(1);
    let (mut var, mut chi, mut dim_bad) = (0.0f64, 0.0f64, 0usize);
    for p in solved.iter().step_by(stride) {
        var = var.max(variational_check(&spec, &fam, p.t, p.q)?);
        let g = gibbs_state(&spec, &fam, p.t, p.q)?;
        chi = chi.max((g.f_exponent - p.xi).abs());
        if !(g.dimension >= 0.0 && g.dimension <= h + 1e-12) {
            dim_bad += 1;
        }
    }
    rows.push(row(
        "variational",
        var <= IDENTITY_TOLERANCE,
        format!("max residual {var:.3e}"),
    ));
    rows.push(row(
        "gibbs-exponent",
        chi <= IDENTITY_TOLERANCE,
        format!("max |int f dmu - xi| {chi:.3e} at sampled curve points"),
    ));
    rows.push(row(
        "gibbs-dimension",
        dim_bad == 0,
        format!("{dim_bad} dimensions outside [0, h]"),
    ));

    if spec.is_infinite() {
        let n = spec.alphabet_size();
        let compared = if cfg.rebuildable() {
            cfg.build_system(Some(2 * n))
                .ok()
                .map(|fine| (truncation_gap(&spec, &fine, h), format!("N = {n} vs {}", 2 * n)))
        } else {
            prefix(&spec, n / 2).map(|coarse| (truncation_gap(&coarse, &spec, h), format!("N = {} vs {n}", n / 2)))
        };
        match compared {
            Some((gap, label)) => {
                let gap = gap?;
                rows.push(row(
                    "tail-stability",
                    gap <= TAIL_TOLERANCE,
                    format!("{label}: carried pressure at t = h moves by {gap:.3e}"),
                ));
            }
            None => rows.push(Row {
                name: "tail-stability".to_string(),
                status: CheckStatus::Skipped,
                detail: "system cannot be re-truncated".to_string(),
            }),
        }
    } else {
        rows.push(Row {
            name: "tail-stability".to_string(),
            status: CheckStatus::Skipped,
            detail: "finite alphabet".to_string(),
        });
    }

    println!("{:<18} {:<7} detail", "check", "status");
    for r in &rows {
        let status = match r.status {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "skip",
        };
        println!("{:<18} {:<7} {}", r.name, status, r.detail);
    }
    if let Some(path) = out {
        let mut doc = header("diagnostics", cfg);
        doc["h"] = json!(h);
        doc["theta"] = ext_json(curve.theta);
        doc["range"] = range_json(&curve);
        doc["checks"] = rows
            .iter()
            .map(|r| json!({ "name": r.name, "status": format!("{:?}", r.status).to_lowercase(), "detail": r.detail }))
            .collect();
        let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Solver(e.into()))?;
        s.push('\n');
        std::fs::write(path, s).map_err(|e| Failure::Solver(e.into()))?;
    }
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| r.status == CheckStatus::Fail)
        .map(|r| r.name.clone())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Checks(failed))
    }
}

pub fn list_builtins() {
    for (name, about) in BUILTINS {
        println!("{name:<18} {about}");
    }
}
