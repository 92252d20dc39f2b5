//! Pipeline stages. Each stage writes its artifacts into the output
//! directory and stamps them with the config hash.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;
use waveop::bounds_lab::{
    default_truncations, fit_decay_exponent, fit_regime_bound, weighted_convolution_check,
    write_bound_fits, write_series, BoundFit, Convolution, Direction, Weight,
};
use waveop::checks::{probe_series, Criterion, Lab};
use waveop::osc_integrals::{OscTable, TableSpec};
use waveop::wave_kernel::{KernelGrid, Regime};
use waveop::zero_energy::decay_fit;

use crate::config::{Probe, ScenarioConfig};
use crate::svg;

pub const MANIFEST: &str = "manifest.json";
pub const CHECKS: &str = "checks.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Eigensolve,
    BuildTable,
    KernelGrid,
    FitBounds,
    Probes,
    Checks,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Self::Eigensolve,
        Self::BuildTable,
        Self::KernelGrid,
        Self::FitBounds,
        Self::Probes,
        Self::Checks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Eigensolve => "eigensolve",
            Self::BuildTable => "build-table",
            Self::KernelGrid => "kernel-grid",
            Self::FitBounds => "fit-bounds",
            Self::Probes => "probes",
            Self::Checks => "checks",
        }
    }
}

/// File names a stage produces under `cfg`.
pub fn stage_artifacts(cfg: &ScenarioConfig, stage: Stage) -> Vec<String> {
    let angles = cfg.lab.kernel_grid.angles;
    let mut out = Vec::new();
    match stage {
        Stage::Eigensolve => {
            for ell in &cfg.sectors {
                out.push(format!("eigenstate_l{ell}.csv"));
                out.push(format!("eigenstate_l{ell}.json"));
            }
        }
        Stage::BuildTable => {
            for t in &cfg.tables {
                out.push(format!("table_{}.csv", t.kind.name()));
            }
        }
        Stage::KernelGrid => {
            for ell in &cfg.sectors {
                out.push(format!("kernel_ws_l{ell}.csv"));
                for k in 0..angles {
                    out.push(format!("heatmap_ws_l{ell}_theta{k}.svg"));
                }
            }
            if cfg.wlog {
                out.push("kernel_wlog_l1.csv".into());
                for k in 0..cfg.lab.wlog_grid.angles {
                    out.push(format!("heatmap_wlog_l1_theta{k}.svg"));
                }
            }
        }
        Stage::FitBounds => {
            if !cfg.sectors.is_empty() || cfg.wlog {
                out.push("bound_fits.csv".into());
                out.push("decay_fits.json".into());
            }
        }
        Stage::Probes => {
            for p in &cfg.probes {
                out.push(
                    match p {
                        Probe::Lp => "probes_lp.csv",
                        Probe::Certification => "certification.csv",
                        Probe::Convolutions => "convolutions.csv",
                    }
                    .into(),
                );
            }
        }
        Stage::Checks => out.push(CHECKS.into()),
    }
    out
}

/// Every artifact a full run produces, report files excluded.
pub fn expected_artifacts(cfg: &ScenarioConfig) -> Vec<String> {
    let mut out = vec![MANIFEST.to_string()];
    for s in Stage::ALL {
        out.extend(stage_artifacts(cfg, s));
    }
    out
}

/// Prefix a CSV written by a library routine with the config hash.
fn stamp_csv(path: &Path, hash: &str) -> Result<()> {
    let body = std::fs::read_to_string(path)?;
    std::fs::write(path, format!("# config-sha256 {hash}\n{body}"))?;
    Ok(())
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    config_hash: &'a str,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize)]
struct CheckFile<'a> {
    scenario: &'a str,
    criteria: &'a [Criterion],
}

pub struct Pipeline {
    pub cfg: ScenarioConfig,
    pub hash: String,
    pub out: PathBuf,
    lab: Lab,
}

impl Pipeline {
    pub fn new(cfg: ScenarioConfig, out: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&out)
            .with_context(|| format!("cannot create output directory {}", out.display()))?;
        let hash = cfg.hash();
        let lab = Lab::new(cfg.lab.clone());
        Ok(Self {
            cfg,
            hash,
            out,
            lab,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_json<T: Serialize>(&self, name: &str, body: T) -> Result<()> {
        let doc = Stamped {
            config_hash: &self.hash,
            body,
        };
        let text = serde_json::to_string_pretty(&doc)?;
        std::fs::write(self.path(name), text + "\n")?;
        Ok(())
    }

    pub fn write_manifest(&self, stages: &[Stage]) -> Result<()> {
        let artifacts: Vec<String> = std::iter::once(MANIFEST.to_string())
            .chain(stages.iter().flat_map(|&s| stage_artifacts(&self.cfg, s)))
            .collect();
        self.write_json(
            MANIFEST,
            json!({
                "scenario": self.cfg.name,
                "stages": stages.iter().map(|s| s.name()).collect::<Vec<_>>(),
                "artifacts": artifacts,
                "config": self.cfg,
            }),
        )
    }

    pub fn run(&self, stage: Stage) -> Result<()> {
        let r = match stage {
            Stage::Eigensolve => self.eigensolve(),
            Stage::BuildTable => self.build_tables(),
            Stage::KernelGrid => self.kernel_grids(),
            Stage::FitBounds => self.fit_bounds(),
            Stage::Probes => self.probes(),
            Stage::Checks => self.checks().map(|_| ()),
        };
        r.with_context(|| format!("stage {} failed", stage.name()))
    }

    fn eigensolve(&self) -> Result<()> {
        for &ell in &self.cfg.sectors {
            let s = self.lab.state(ell)?;
            let csv = self.path(&format!("eigenstate_l{ell}.csv"));
            s.write_csv(&csv)?;
            stamp_csv(&csv, &self.hash)?;
            self.write_json(
                &format!("eigenstate_l{ell}.json"),
                json!({
                    "state": s.sidecar(),
                    "potential": s.potential,
                    "ode_residual": s.ode_residual(),
                    "tail_slope": decay_fit(s)?,
                }),
            )?;
        }
        Ok(())
    }

    fn build_tables(&self) -> Result<()> {
        for t in &self.cfg.tables {
            let mut spec = TableSpec::new(t.kind, self.cfg.lab.cutoff, t.lo, t.hi, t.nodes);
            spec.panels = self.cfg.lab.panel_options();
            let table = OscTable::build(spec)?;
            let path = self.path(&format!("table_{}.csv", t.kind.name()));
            table.write_csv(&path)?;
            stamp_csv(&path, &self.hash)?;
        }
        Ok(())
    }

    fn grids(&self) -> Result<Vec<(String, &KernelGrid)>> {
        let mut out = Vec::new();
        for &ell in &self.cfg.sectors {
            out.push((format!("ws_l{ell}"), self.lab.ws_grid(ell)?));
        }
        if self.cfg.wlog {
            out.push(("wlog_l1".to_string(), self.lab.wlog_grid()?));
        }
        Ok(out)
    }

    fn kernel_grids(&self) -> Result<()> {
        for (label, grid) in self.grids()? {
            let path = self.path(&format!("kernel_{label}.csv"));
            grid.write_csv(&path)?;
            stamp_csv(&path, &self.hash)?;
            for k in 0..grid.meta.spec.angles {
                let title = format!("{label} ({})", grid.meta.kind.name());
                std::fs::write(
                    self.path(&format!("heatmap_{label}_theta{k}.svg")),
                    svg::heatmap(grid, k, &title, &self.hash),
                )?;
            }
        }
        Ok(())
    }

    fn fit_bounds(&self) -> Result<()> {
        let grids = self.grids()?;
        if grids.is_empty() {
            return Ok(());
        }
        let path = self.path("bound_fits.csv");
        let mut all: Vec<(String, Vec<BoundFit>)> = Vec::new();
        let mut decays = Vec::new();
        let s = &self.cfg.lab;
        for (label, grid) in grids {
            let wlog = label.starts_with("wlog");
            let tr = default_truncations(grid.meta.spec.r_max);
            let fits: Vec<BoundFit> = if wlog {
                let w = Weight::log_envelope(s.wlog_eps);
                Regime::ALL
                    .iter()
                    .map(|&r| fit_regime_bound(grid, r, w, &tr))
                    .collect::<Result<_, _>>()?
            } else {
                [
                    (Regime::YLarge, Weight::new(2.0, 3.0, 0.0)),
                    (Regime::YLarge, Weight::new(2.0, 4.0, 0.0)),
                    (Regime::Ring, Weight::new(3.0, 0.0, 2.0)),
                    (Regime::XLarge, Weight::new(5.0, 0.0, 0.0)),
                ]
                .iter()
                .map(|&(r, w)| fit_regime_bound(grid, r, w, &tr))
                .collect::<Result<_, _>>()?
            };
            if !wlog {
                let yw = (
                    s.y_window.0 * grid.meta.spec.r_max,
                    s.y_window.1 * grid.meta.spec.r_max,
                );
                decays.push((
                    label.clone(),
                    fit_decay_exponent(grid, Regime::YLarge, Direction::Y, yw)?,
                ));
                decays.push((
                    label.clone(),
                    fit_decay_exponent(grid, Regime::XLarge, Direction::X, s.x_window_abs())?,
                ));
            }
            all.push((label, fits));
        }
        write_bound_fits(&path, &all)?;
        stamp_csv(&path, &self.hash)?;
        let rows: Vec<_> = decays
            .iter()
            .map(|(label, d)| {
                json!({
                    "grid": label,
                    "regime": d.regime,
                    "direction": format!("{:?}", d.direction).to_lowercase(),
                    "exponent": d.exponent,
                    "window": d.window,
                })
            })
            .collect();
        self.write_json("decay_fits.json", json!({ "fits": rows }))
    }

    fn probes(&self) -> Result<()> {
        for p in &self.cfg.probes {
            match p {
                Probe::Lp => {
                    let path = self.path("probes_lp.csv");
                    write_series(&path, &probe_series())?;
                    stamp_csv(&path, &self.hash)?;
                }
                Probe::Certification => {
                    let mut text = format!(
                        "# config-sha256 {}\nintegral,sup,sup_inner,argmax_a,argmax_b,inner_max,grid_max,extension_ratio\n",
                        self.hash
                    );
                    for c in self.lab.certifications()? {
                        text.push_str(&format!(
                            "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                            c.integral.name(),
                            c.sup,
                            c.sup_inner,
                            c.argmax.0,
                            c.argmax.1,
                            c.inner_max,
                            c.grid_max,
                            c.extension_ratio()
                        ));
                    }
                    std::fs::write(self.path("certification.csv"), text)?;
                }
                Probe::Convolutions => {
                    let s = &self.cfg.lab;
                    let mut text = format!(
                        "# config-sha256 {}\nlemma,sup_ratio,argmax_t,argmax_r,extended_sup,points\n",
                        self.hash
                    );
                    for lemma in convolution_lemmas() {
                        let c = weighted_convolution_check(
                            lemma,
                            s.convolution_extent,
                            s.convolution_nodes,
                        )?;
                        text.push_str(&format!(
                            "{},{:.17e},{:.17e},{:.17e},{:.17e},{}\n",
                            lemma.name(),
                            c.sup_ratio,
                            c.argmax.0,
                            c.argmax.1,
                            c.extended_sup,
                            c.points
                        ));
                    }
                    std::fs::write(self.path("convolutions.csv"), text)?;
                }
            }
        }
        Ok(())
    }

    pub fn checks(&self) -> Result<Vec<Criterion>> {
        let mut out = Vec::new();
        for &n in &self.cfg.criteria {
            let c = self.lab.criterion(n)?;
            eprintln!("{}", c.summary_line());
            out.push(c);
        }
        self.write_json(
            CHECKS,
            CheckFile {
                scenario: &self.cfg.name,
                criteria: &out,
            },
        )?;
        Ok(out)
    }
}

fn convolution_lemmas() -> [Convolution; 3] {
    [
        Convolution::A1 {
            alpha: 2.0,
            beta: 2.0,
            n_decay: 8.0,
        },
        Convolution::B1 {
            s: 0.5,
            alpha: 2.0,
            beta: 2.0,
            gamma: 1.0,
            n_decay: 8.0,
        },
        Convolution::LargeW {
            k: 1.0,
            alpha: 0.0,
            n_decay: 8.0,
        },
    ]
}
