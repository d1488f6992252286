//! Named experiment matrices run over several seeds.

use std::fmt::Write as _;
use std::path::Path;

use fbhebb_core::{Architecture, Direction, Regime, RuleVariant};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::runner::{execute, write_artifacts, RunSummary};
use crate::HarnessError;

/// One grid cell: a delta over the base config.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub arch: Architecture,
    pub variant: RuleVariant,
    pub regime: Regime,
}

impl Cell {
    pub fn name(&self) -> String {
        format!("{}_{}_{}", self.arch, self.variant, self.regime)
    }

    pub fn config(&self, base: &RunConfig, seed: u64) -> RunConfig {
        RunConfig {
            seed,
            arch: self.arch,
            variant: self.variant,
            regime: self.regime,
            ..base.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentMatrix {
    pub name: String,
    pub cells: Vec<Cell>,
}

impl ExperimentMatrix {
    /// Every architecture under the full rule, both regimes.
    pub fn controls() -> Self {
        let cells = Architecture::ALL
            .iter()
            .flat_map(|&arch| {
                Regime::ALL.iter().map(move |&regime| Cell {
                    arch,
                    variant: RuleVariant::Full,
                    regime,
                })
            })
            .collect();
        ExperimentMatrix {
            name: "controls".into(),
            cells,
        }
    }

    /// Every rule variant on the proposed architecture, both regimes.
    pub fn ablations() -> Self {
        let cells = RuleVariant::ALL
            .iter()
            .flat_map(|&variant| {
                Regime::ALL.iter().map(move |&regime| Cell {
                    arch: Architecture::Ff2Fb2,
                    variant,
                    regime,
                })
            })
            .collect();
        ExperimentMatrix {
            name: "ablations".into(),
            cells,
        }
    }

    /// Union of the two built-in matrices; what the acceptance report needs.
    pub fn acceptance() -> Self {
        let mut cells = Self::controls().cells;
        for c in Self::ablations().cells {
            if !cells.contains(&c) {
                cells.push(c);
            }
        }
        ExperimentMatrix {
            name: "acceptance".into(),
            cells,
        }
    }

    pub fn builtin(name: &str) -> Result<Self, HarnessError> {
        match name {
            "controls" => Ok(Self::controls()),
            "ablations" => Ok(Self::ablations()),
            "acceptance" => Ok(Self::acceptance()),
            other => Err(HarnessError::UnknownMatrix(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub run_dir: String,
    pub error: Option<String>,
    pub summary: Option<RunSummary>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellReport {
    pub cell: Cell,
    pub runs: Vec<SeedOutcome>,
}

impl CellReport {
    fn summaries(&self) -> impl Iterator<Item = &RunSummary> {
        self.runs.iter().filter_map(|r| r.summary.as_ref())
    }

    fn count(&self, f: impl Fn(&RunSummary) -> bool) -> String {
        let n = self.summaries().count();
        format!("{}/{}", self.summaries().filter(|s| f(s)).count(), n)
    }
}

/// Per-architecture outcome of the three probes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ControlRow {
    pub arch: Architecture,
    /// Post-phase-2 prediction of pair B, seeds selective / seeds run.
    pub prediction: String,
    /// Post-phase-2 regeneration of pair B, or "unsupported".
    pub regeneration: String,
    /// Interleaved four-site output co-maintenance.
    pub conditioning: String,
    /// Whether, where co-maintenance fails, one target set dominates.
    pub conditioning_detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: RuleVariant,
    pub peak_min: f64,
    pub peak_mean: f64,
    pub peak_max: f64,
    /// Layer of the maximum per seed.
    pub peak_layers: Vec<String>,
    /// Output-layer retention at sites 8 and 9, mean over seeds.
    pub r8_mean: Option<f64>,
    pub r9_mean: Option<f64>,
    /// Seeds with R8, R9 < -0.5.
    pub unlearning: String,
    /// Interleaved four-site output co-maintenance.
    pub co_maintenance: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridReport {
    pub matrix: String,
    pub seeds: Vec<u64>,
    pub cells: Vec<CellReport>,
    pub controls: Vec<ControlRow>,
    pub ablations: Vec<AblationRow>,
}

/// Runs every cell x seed, writing each run to `out/<run_name>`. Cell
/// failures are recorded in the report; only harness failures are errors.
pub fn run_matrix(
    matrix: &ExperimentMatrix,
    base: &RunConfig,
    seeds: &[u64],
    out: &Path,
    workers: usize,
) -> Result<GridReport, HarnessError> {
    let jobs: Vec<(usize, RunConfig)> = matrix
        .cells
        .iter()
        .enumerate()
        .flat_map(|(i, c)| seeds.iter().map(move |&s| (i, c.config(base, s))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Config(format!("workers: {e}")))?;
    let results: Vec<(usize, SeedOutcome)> = pool.install(|| {
        jobs.par_iter()
            .map(|(i, cfg)| {
                let dir = out.join(cfg.run_name());
                let res = execute(cfg).and_then(|o| write_artifacts(&dir, &o));
                let (summary, error) = match res {
                    Ok(s) => (Some(s), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                (
                    *i,
                    SeedOutcome {
                        seed: cfg.seed,
                        run_dir: dir.display().to_string(),
                        error,
                        summary,
                    },
                )
            })
            .collect()
    });
    let mut cells: Vec<CellReport> = matrix
        .cells
        .iter()
        .map(|c| CellReport {
            cell: c.clone(),
            runs: Vec::new(),
        })
        .collect();
    for (i, outcome) in results {
        cells[i].runs.push(outcome);
    }
    let report = GridReport {
        matrix: matrix.name.clone(),
        seeds: seeds.to_vec(),
        controls: control_rows(&cells),
        ablations: ablation_rows(&cells),
        cells,
    };
    let path = out.join(format!("grid-report-{}.json", matrix.name));
    let json = serde_json::to_string_pretty(&report).map_err(|source| HarnessError::Json {
        path: path.clone(),
        source,
    })?;
    std::fs::write(&path, json).map_err(|e| HarnessError::io(&path, e))?;
    Ok(report)
}

fn find(
    cells: &[CellReport],
    arch: Architecture,
    variant: RuleVariant,
    regime: Regime,
) -> Option<&CellReport> {
    cells.iter().find(|c| {
        c.cell
            == Cell {
                arch,
                variant,
                regime,
            }
    })
}

fn final_verdict(s: &RunSummary, name: &str) -> bool {
    s.verdict(name, s.final_epoch).is_some_and(|v| v.selective)
}

/// Which target set, if any, the interleaved output layer favours.
fn dominance(s: &RunSummary) -> &'static str {
    match s.verdict("co_maintenance_output", s.final_epoch) {
        Some(v) if v.selective => "both",
        _ => {
            let pa = s
                .verdict("predict_A", s.final_epoch)
                .is_some_and(|v| v.selective);
            let pb = s
                .verdict("predict_B", s.final_epoch)
                .is_some_and(|v| v.selective);
            match (pa, pb) {
                (true, false) => "A dominates",
                (false, true) => "B dominates",
                (true, true) => "both expressed, connectivity not separated",
                (false, false) => "neither expressed",
            }
        }
    }
}

fn control_rows(cells: &[CellReport]) -> Vec<ControlRow> {
    Architecture::ALL
        .iter()
        .filter_map(|&arch| {
            let seq = find(cells, arch, RuleVariant::Full, Regime::Sequential)?;
            let int = find(cells, arch, RuleVariant::Full, Regime::Interleaved)?;
            let regeneration = if arch.has_feedback() {
                seq.count(|s| final_verdict(s, "regenerate_B"))
            } else {
                "unsupported".to_string()
            };
            let mut detail: Vec<String> =
                int.summaries().map(|s| dominance(s).to_string()).collect();
            detail.dedup();
            Some(ControlRow {
                arch,
                prediction: seq.count(|s| final_verdict(s, "predict_B")),
                regeneration,
                conditioning: int.count(|s| final_verdict(s, "co_maintenance_output")),
                conditioning_detail: detail.join("; "),
            })
        })
        .collect()
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn output_r(s: &RunSummary, site: usize) -> Option<f64> {
    s.retention_at(s.config.arch.output_layer(), Direction::Output, site)
        .and_then(|r| r.value)
}

fn ablation_rows(cells: &[CellReport]) -> Vec<AblationRow> {
    RuleVariant::ALL
        .iter()
        .filter_map(|&variant| {
            let seq = find(cells, Architecture::Ff2Fb2, variant, Regime::Sequential)?;
            let peaks: Vec<f64> = seq.summaries().map(|s| s.peak_weight.max_abs).collect();
            let r8: Vec<f64> = seq.summaries().filter_map(|s| output_r(s, 8)).collect();
            let r9: Vec<f64> = seq.summaries().filter_map(|s| output_r(s, 9)).collect();
            let co_maintenance = find(cells, Architecture::Ff2Fb2, variant, Regime::Interleaved)
                .map(|c| c.count(|s| final_verdict(s, "co_maintenance_output")))
                .unwrap_or_else(|| "-".into());
            Some(AblationRow {
                variant,
                peak_min: peaks.iter().copied().fold(f64::INFINITY, f64::min),
                peak_mean: mean(&peaks).unwrap_or(f64::NAN),
                peak_max: peaks.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                peak_layers: seq.summaries().map(|s| s.peak_weight.matrix.to_string()).collect(),
                r8_mean: mean(&r8),
                r9_mean: mean(&r9),
                unlearning: seq.count(|s| {
                    matches!((output_r(s, 8), output_r(s, 9)), (Some(a), Some(b)) if a < -0.5 && b < -0.5)
                }),
                co_maintenance,
            })
        })
        .collect()
}

pub fn render_grid(report: &GridReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "matrix {} over seeds {:?}", report.matrix, report.seeds);
    let failures: Vec<_> = report
        .cells
        .iter()
        .flat_map(|c| {
            c.runs
                .iter()
                .filter_map(move |r| r.error.as_ref().map(|e| (c.cell.name(), r.seed, e)))
        })
        .collect();
    for (cell, seed, e) in &failures {
        let _ = writeln!(s, "  FAILED {cell} seed {seed}: {e}");
    }
    if !report.controls.is_empty() {
        let _ = writeln!(
            s,
            "\narchitecture  prediction(B)  regeneration(B)  conditioning  detail"
        );
        for r in &report.controls {
            let _ = writeln!(
                s,
                "{:<12}  {:<13}  {:<15}  {:<12}  {}",
                r.arch.as_str(),
                r.prediction,
                r.regeneration,
                r.conditioning,
                r.conditioning_detail
            );
        }
    }
    if !report.ablations.is_empty() {
        let _ = writeln!(s, "\nvariant   peak|w| min/mean/max      R8 mean  R9 mean  unlearning  co-maint  layer of max");
        let fmt = |v: Option<f64>| v.map_or("   -   ".to_string(), |x| format!("{x:+7.3}"));
        for r in &report.ablations {
            let _ = writeln!(
                s,
                "{:<8}  {:.3}/{:.3}/{:.3}  {}  {}  {:<10}  {:<8}  {}",
                r.variant.as_str(),
                r.peak_min,
                r.peak_mean,
                r.peak_max,
                fmt(r.r8_mean),
                fmt(r.r9_mean),
                r.unlearning,
                r.co_maintenance,
                r.peak_layers.join(", ")
            );
        }
    }
    s
}
