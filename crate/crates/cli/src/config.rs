//! Run configuration: TOML sections, command-line overrides, and resolution
//! into a validated system and family.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use birkhoff_spectrum::builtin::{builtin, luroth, BUILTINS};
use birkhoff_spectrum::spectrum::{GridSpec, SolverSettings};
use birkhoff_spectrum::system::{
    check_finite_irreducibility, validate_family, validate_system, Comparability, PotentialFamily, SystemSpec, TailLaw,
    TailModel,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Builtin,
    FullShift,
    Markov,
    Luroth,
    LinearizedGauss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub kind: SystemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<f64>>,
    /// 0/1 rows of the incidence matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub incidence: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<[f64; 2]>>,
    /// Partition points `1 = a_0 > a_1 > ...` of a Luroth system.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<f64>>,
    /// Inline family values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Values,
    Lyapunov,
    Builtin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySection {
    pub kind: FamilyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    /// `[alpha, beta, gamma]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparability: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounded: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailLawKind {
    Geometric,
    PowerLaw,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_law: Option<TailLawKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_exact: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub count: Option<usize>,
    pub xi_cap: Option<f64>,
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub tol_root: Option<f64>,
    pub tol_grad: Option<f64>,
    pub max_iter: Option<usize>,
    pub closed_form: Option<bool>,
}

/// Contents of a `--config` file; every section is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub system: Option<SystemSection>,
    pub family: Option<FamilySection>,
    pub truncation: Option<TruncationSection>,
    pub grid: Option<GridSection>,
    pub solver: Option<SolverSection>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Command-line values that override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub system: Option<String>,
    pub family: Option<String>,
    pub truncation: Option<usize>,
    pub grid: Option<usize>,
    pub xi_cap: Option<f64>,
    pub tol_root: Option<f64>,
    pub tol_grad: Option<f64>,
}

/// Fully resolved configuration; written into every JSON header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub system: SystemSection,
    pub family: FamilySection,
    pub truncation: TruncationSection,
    pub grid: GridSpec,
    pub solver: SolverSettings,
}

fn parse_family(arg: &str) -> Result<FamilySection> {
    let blank = |kind| FamilySection {
        kind,
        name: None,
        values: None,
        lower_bound: None,
        comparability: None,
        bounded: None,
    };
    if arg == "lyapunov" {
        return Ok(blank(FamilyKind::Lyapunov));
    }
    if BUILTINS.iter().any(|(n, _)| *n == arg) {
        return Ok(FamilySection {
            name: Some(arg.to_string()),
            ..blank(FamilyKind::Builtin)
        });
    }
    let values = arg
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| {
            anyhow!("family `{arg}` is neither `lyapunov`, a builtin, nor a comma-separated list of values")
        })?;
    Ok(FamilySection {
        values: Some(values),
        ..blank(FamilyKind::Values)
    })
}

impl RunConfig {
    /// Merge the config file (if any) with the command-line overrides.
    pub fn resolve(ov: &Overrides) -> Result<Self> {
        let mut file = match &ov.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        if let Some(sys) = &ov.system {
            let path = Path::new(sys);
            if path.is_file() || sys.ends_with(".toml") {
                let other = ConfigFile::load(path)?;
                file.system = other.system;
                if other.truncation.is_some() {
                    file.truncation = other.truncation;
                }
                if other.family.is_some() && file.family.is_none() {
                    file.family = other.family;
                }
            } else {
                file.system = Some(SystemSection {
                    kind: SystemKind::Builtin,
                    name: Some(sys.clone()),
                    ratios: None,
                    incidence: None,
                    intervals: None,
                    partition: None,
                    potential: None,
                });
            }
        }
        let system = file
            .system
            .ok_or_else(|| anyhow!("no system given: use --system or a [system] section"))?;
        let family = match &ov.family {
            Some(arg) => parse_family(arg)?,
            None => match (file.family, &system) {
                (Some(f), _) => f,
                (None, s) if s.potential.is_some() => FamilySection {
                    kind: FamilyKind::Values,
                    name: None,
                    values: s.potential.clone(),
                    lower_bound: None,
                    comparability: None,
                    bounded: None,
                },
                (None, s) if s.kind == SystemKind::Builtin => FamilySection {
                    kind: FamilyKind::Builtin,
                    name: s.name.clone(),
                    values: None,
                    lower_bound: None,
                    comparability: None,
                    bounded: None,
                },
                _ => bail!("no family given: use --family, [family] or [system].potential"),
            },
        };
        let mut truncation = file.truncation.unwrap_or_default();
        if ov.truncation.is_some() {
            truncation.n = ov.truncation;
        }

        let g = file.grid.unwrap_or_default();
        let d = GridSpec::default();
        let grid = GridSpec {
            count: ov.grid.or(g.count).unwrap_or(d.count),
            xi_cap: ov.xi_cap.or(g.xi_cap).unwrap_or(d.xi_cap),
            margin: g.margin.unwrap_or(d.margin),
        };
        let s = file.solver.unwrap_or_default();
        let d = SolverSettings::default();
        let solver = SolverSettings {
            tol_root: ov.tol_root.or(s.tol_root).unwrap_or(d.tol_root),
            tol_grad: ov.tol_grad.or(s.tol_grad).unwrap_or(d.tol_grad),
            max_iter: s.max_iter.unwrap_or(d.max_iter),
            closed_form: s.closed_form.unwrap_or(d.closed_form),
        };
        let cfg = RunConfig {
            system,
            family,
            truncation,
            grid,
            solver,
        };
        cfg.check_settings()?;
        Ok(cfg)
    }

    fn check_settings(&self) -> Result<()> {
        if self.grid.count < 1 {
            bail!("grid count must be at least 1");
        }
        if !(self.grid.margin >= 0.0) || !(self.grid.xi_cap.is_finite()) {
            bail!("grid margin must be non-negative and xi_cap finite");
        }
        if !(self.solver.tol_root > 0.0 && self.solver.tol_grad > 0.0) {
            bail!("solver tolerances must be positive");
        }
        if self.solver.max_iter == 0 {
            bail!("solver max_iter must be positive");
        }
        if self.truncation.n == Some(0) {
            bail!("truncation must be at least 1");
        }
        Ok(())
    }

    fn tail(&self) -> Result<Option<TailModel>> {
        let t = &self.truncation;
        let Some(kind) = t.tail_law else {
            return Ok(None);
        };
        let scale = t.tail_scale.unwrap_or(1.0);
        let law = match kind {
            TailLawKind::Geometric => TailLaw::Geometric {
                scale,
                rate: t.tail_rate.ok_or_else(|| anyhow!("geometric tail needs tail_rate"))?,
            },
            TailLawKind::PowerLaw => TailLaw::PowerLaw {
                scale,
                exponent: t
                    .tail_exponent
                    .ok_or_else(|| anyhow!("power-law tail needs tail_exponent"))?,
            },
        };
        Ok(Some(TailModel {
            law,
            exact: t.tail_exact.unwrap_or(false),
        }))
    }

    /// The system at truncation level `n` (or the configured one).
    pub fn build_system(&self, n: Option<usize>) -> Result<SystemSpec> {
        let s = &self.system;
        let n = n.or(self.truncation.n);
        let spec = match s.kind {
            SystemKind::Builtin => {
                let name = s
                    .name
                    .as_deref()
                    .ok_or_else(|| anyhow!("builtin system needs a name"))?;
                builtin(name, n)?.0
            }
            SystemKind::LinearizedGauss => builtin("linearized_gauss", n)?.0,
            SystemKind::FullShift | SystemKind::Markov => {
                let ratios = s.ratios.clone().ok_or_else(|| anyhow!("[system] needs ratios"))?;
                let mut spec = if s.kind == SystemKind::Markov {
                    let rows = s
                        .incidence
                        .as_ref()
                        .ok_or_else(|| anyhow!("markov system needs incidence"))?;
                    SystemSpec::markov(
                        ratios,
                        rows.iter().map(|r| r.iter().map(|&x| x != 0).collect()).collect(),
                    )
                } else {
                    SystemSpec::full_shift(ratios)
                };
                if let Some(iv) = &s.intervals {
                    spec = spec.with_intervals(iv.iter().map(|[a, b]| (*a, *b)).collect());
                }
                if let Some(tail) = self.tail()? {
                    spec = spec.with_tail(tail);
                }
                spec
            }
            SystemKind::Luroth => {
                let a = s
                    .partition
                    .as_ref()
                    .ok_or_else(|| anyhow!("luroth system needs partition"))?;
                luroth(a, self.tail()?)?
            }
        };
        Ok(spec)
    }

    pub fn build_family(&self, spec: &SystemSpec) -> Result<PotentialFamily> {
        let f = &self.family;
        let mut fam = match f.kind {
            FamilyKind::Lyapunov => PotentialFamily::lyapunov(spec),
            FamilyKind::Builtin => {
                let name = f
                    .name
                    .as_deref()
                    .ok_or_else(|| anyhow!("builtin family needs a name"))?;
                builtin(name, Some(spec.alphabet_size()))?.1
            }
            FamilyKind::Values => {
                PotentialFamily::new(f.values.clone().ok_or_else(|| anyhow!("[family] needs values"))?)
            }
        };
        if let Some(lb) = f.lower_bound {
            fam.lower_bound = lb;
        }
        if let Some([alpha, beta, gamma]) = f.comparability {
            fam.comparability = Some(Comparability { alpha, beta, gamma });
        }
        if let Some(b) = f.bounded {
            fam.bounded = b;
        }
        Ok(fam)
    }

    /// Build and validate; every message names the violated condition.
    pub fn build(&self) -> Result<(SystemSpec, PotentialFamily)> {
        let spec = self.build_system(None)?;
        let problems: Vec<String> = validate_system(&spec).iter().map(|v| v.to_string()).collect();
        if !problems.is_empty() {
            bail!("invalid system: {}", problems.join("; "));
        }
        let fam = self.build_family(&spec)?;
        let problems: Vec<String> = validate_family(&spec, &fam).iter().map(|v| v.to_string()).collect();
        if !problems.is_empty() {
            bail!("invalid family: {}", problems.join("; "));
        }
        let irr = check_finite_irreducibility(&spec, None);
        if let Some((a, b)) = irr.unreachable {
            bail!("system is not finitely irreducible: no admissible path from {a} to {b}");
        }
        Ok((spec, fam))
    }

    /// Whether the system can be rebuilt at another truncation level.
    pub fn rebuildable(&self) -> bool {
        matches!(self.system.kind, SystemKind::Builtin | SystemKind::LinearizedGauss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_argument_forms() {
        assert_eq!(parse_family("lyapunov").unwrap().kind, FamilyKind::Lyapunov);
        assert_eq!(parse_family("parity").unwrap().kind, FamilyKind::Builtin);
        assert_eq!(parse_family("1, 2,3").unwrap().values, Some(vec![1.0, 2.0, 3.0]));
        assert!(parse_family("1,x").is_err());
    }

    #[test]
    fn builtin_resolution_uses_its_family() {
        let ov = Overrides {
            system: Some("example_5_2".to_string()),
            ..Overrides::default()
        };
        let cfg = RunConfig::resolve(&ov).unwrap();
        let (_, fam) = cfg.build().unwrap();
        assert_eq!(fam.values, vec![1.0, 2.0, 2.0]);
        assert_eq!(cfg.grid.count, 1000);
    }

    #[test]
    fn sections_parse() {
        let text = r#"
            [system]
            kind = "markov"
            ratios = [0.4, 0.3]
            incidence = [[1, 1], [1, 0]]
            potential = [0.5, 1.5]

            [grid]
            count = 50

            [solver]
            tol_root = 1e-11
        "#;
        let file: ConfigFile = toml::from_str(text).unwrap();
        assert_eq!(file.grid.as_ref().unwrap().count, Some(50));
        assert!(toml::from_str::<ConfigFile>("[system]\nkind = \"markov\"\nbogus = 1\n").is_err());
    }
}
