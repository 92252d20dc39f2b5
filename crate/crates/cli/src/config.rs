//! Scenario configuration: one JSON document, every field defaulted.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use waveop::checks::LabSettings;
use waveop::osc_integrals::IntegralKind;
use waveop::potential::Profile;
use waveop::wave_kernel::GridSpec;

/// Malformed or unreadable configuration (exit status 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TableConfig {
    pub kind: IntegralKind,
    pub lo: f64,
    pub hi: f64,
    pub nodes: usize,
}

impl Default for TableConfig {
    fn default() -> Self {
        Self {
            kind: IntegralKind::Ws0,
            lo: 1e-3,
            hi: 20.0,
            nodes: 121,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Probe {
    /// `L^p` growth, annulus and Schur series.
    Lp,
    /// Certification of the lambda integrals on the `(A, B)` grid.
    Certification,
    /// Weighted convolution lemma ratios.
    Convolutions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// Angular sectors whose eigenstates and `W_s` grids are built.
    pub sectors: Vec<usize>,
    /// Potential, cutoff, grids, truncation radius and fit windows.
    pub lab: LabSettings,
    pub tables: Vec<TableConfig>,
    pub probes: Vec<Probe>,
    /// Build the `W_log` grid.
    pub wlog: bool,
    /// Acceptance criteria (1 to 12) evaluated for the report.
    pub criteria: Vec<usize>,
    pub output_dir: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "full".into(),
            sectors: vec![1, 2],
            lab: LabSettings::default(),
            tables: vec![TableConfig::default()],
            probes: vec![Probe::Lp, Probe::Certification, Probe::Convolutions],
            wlog: true,
            criteria: (1..=12).collect(),
            output_dir: None,
        }
    }
}

pub const BUILTINS: [&str; 4] = ["l1-dichotomy", "l2-cancellation", "lemma-suite", "wlog"];

impl ScenarioConfig {
    pub fn builtin(name: &str) -> Result<Self, ConfigError> {
        let base = Self {
            name: name.into(),
            ..Self::default()
        };
        let cfg = match name {
            "full" => base,
            "l1-dichotomy" => Self {
                sectors: vec![1, 2],
                probes: vec![],
                wlog: false,
                criteria: vec![1, 2, 3, 4, 8],
                ..base
            },
            "l2-cancellation" => Self {
                sectors: vec![2],
                probes: vec![Probe::Lp],
                wlog: false,
                criteria: vec![3, 4, 9],
                ..base
            },
            "lemma-suite" => Self {
                sectors: vec![],
                tables: IntegralKind::ALL
                    .iter()
                    .map(|&kind| TableConfig {
                        kind,
                        ..TableConfig::default()
                    })
                    .collect(),
                wlog: false,
                criteria: vec![1, 2, 5, 6, 7, 9, 11],
                ..base
            },
            "wlog" => Self {
                sectors: vec![1],
                probes: vec![],
                wlog: true,
                criteria: vec![10],
                ..base
            },
            other => {
                return Err(ConfigError(format!(
                    "unknown scenario '{other}' (built-ins: full, {})",
                    BUILTINS.join(", ")
                )))
            }
        };
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError(m));
        if let Some(&s) = self.sectors.iter().find(|&&s| !(1..=2).contains(&s)) {
            return bad(format!(
                "sector {s} unsupported (eigenstates exist for 1 and 2)"
            ));
        }
        if let Some(&n) = self.criteria.iter().find(|&&n| !(1..=12).contains(&n)) {
            return bad(format!("criterion {n} outside 1..=12"));
        }
        let lab = &self.lab;
        if !(lab.cutoff.lambda0 > 0.0 && lab.cutoff.lambda0.is_finite()) {
            return bad(format!(
                "cutoff lambda0 = {} must be positive",
                lab.cutoff.lambda0
            ));
        }
        if lab.density == 0 || !lab.density.is_power_of_two() {
            return bad(format!("density = {} must be a power of two", lab.density));
        }
        if !(lab.truncation_radius > 0.0) {
            return bad("truncation_radius must be positive".into());
        }
        check_grid("kernel_grid", &lab.kernel_grid)?;
        check_grid("wlog_grid", &lab.wlog_grid)?;
        if !(lab.x_window.0 > 0.0 && lab.x_window.1 > lab.x_window.0) {
            return bad("x_window must be increasing and positive".into());
        }
        if !(lab.y_window.0 > 0.0 && lab.y_window.1 > lab.y_window.0 && lab.y_window.1 <= 1.0) {
            return bad("y_window must be an increasing sub-interval of (0, 1]".into());
        }
        if !(lab.potential.coupling.is_finite()) {
            return bad("potential coupling must be finite".into());
        }
        let width_ok = match lab.potential.profile {
            Profile::Gaussian { width } | Profile::Exponential { width } => width > 0.0,
            Profile::CompactBump { radius } => radius > 0.0,
            Profile::Algebraic { power } => power > 0.0,
        };
        if !width_ok {
            return bad("potential profile parameter must be positive".into());
        }
        for t in &self.tables {
            if !(t.lo > 0.0 && t.hi > t.lo && t.nodes >= 4) {
                return bad(format!(
                    "table {}: need 0 < lo < hi and nodes >= 4",
                    t.kind.name()
                ));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, recorded in every artifact.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        format!("{:x}", Sha256::digest(&canonical))
    }
}

fn check_grid(name: &str, g: &GridSpec) -> Result<(), ConfigError> {
    if !(g.r_min > 0.0 && g.r_max > g.r_min && g.radii >= 2 && g.angles >= 1) {
        return Err(ConfigError(format!(
            "{name}: need 0 < r_min < r_max, radii >= 2, angles >= 1"
        )));
    }
    Ok(())
}
