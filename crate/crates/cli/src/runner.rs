//! Executes one configured run and reads/writes its artifacts.
//!
//! A run directory holds:
//!
//! - `config.toml`: the full effective config
//! - `trajectory.csv`: connectivity profiles, long format
//! - `summary.json`: retention indices, peak weights, probes, verdicts
//! - `snapshots/epoch_NNNN.json`: weight snapshots at the baseline and each phase end

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use fbhebb_core::trajectory::EpochRecord;
use fbhebb_core::{
    retention, run_protocol, selectivity, ConnectivityTable, Direction, MatrixId, Network,
    NetworkSnapshot, Pair, PeakWeight, ProbeSet, RetentionIndex, RunMetadata, SiteVector, Trainer,
    TrajectoryRecord, TrajectoryRecorder, ACTIVITY_MARGIN, CONNECTIVITY_MARGIN,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::HarnessError;

pub const CONFIG_FILE: &str = "config.toml";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SNAPSHOT_DIR: &str = "snapshots";

/// The four sites whose output connectivity the sequential retention tracks.
pub const OUTPUT_RETENTION_SITES: [usize; 4] = [5, 6, 8, 9];
/// Pair-A sites tracked in the top feedback layer.
pub const FEEDBACK_RETENTION_SITES: [usize; 2] = [8, 9];
pub const ALL_TARGET_SITES: [usize; 4] = [5, 6, 8, 9];

pub struct RunOutcome {
    pub config: RunConfig,
    pub record: TrajectoryRecord,
    pub network: Network,
}

pub fn execute(config: &RunConfig) -> Result<RunOutcome, HarnessError> {
    config.validate()?;
    let spec = config.protocol();
    let mut net = Network::new(config.arch, config.injection, config.seed);
    let mut trainer = Trainer::new(config.params, config.variant, config.granularity)?;
    let metadata = RunMetadata {
        seed: config.seed,
        arch: config.arch,
        variant: config.variant,
        regime: Some(config.regime),
    };
    let mut recorder = TrajectoryRecorder::new(metadata, &spec.snapshot_epochs(), config.snapshots);
    run_protocol(&mut net, &spec, &mut trainer, &mut recorder).map_err(|source| {
        HarnessError::Protocol {
            run: config.run_name(),
            source,
        }
    })?;
    Ok(RunOutcome {
        config: config.clone(),
        record: recorder.finish(),
        network: net,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochPeak {
    pub epoch: usize,
    pub peak: PeakWeight,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectivityVerdict {
    pub name: String,
    pub epoch: usize,
    pub target_sites: Vec<usize>,
    pub threshold: f64,
    pub margin: f64,
    pub selective: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub metadata: RunMetadata,
    pub phase_end_epochs: Vec<usize>,
    pub final_epoch: usize,
    pub retention: Vec<RetentionIndex>,
    /// Peak at the final epoch.
    pub peak_weight: PeakWeight,
    pub peaks: Vec<EpochPeak>,
    pub selectivity: Vec<SelectivityVerdict>,
    /// Probe outputs at the baseline and each phase end.
    pub probes: BTreeMap<usize, ProbeSet>,
}

impl RunSummary {
    pub fn verdict(&self, name: &str, epoch: usize) -> Option<&SelectivityVerdict> {
        self.selectivity
            .iter()
            .find(|v| v.name == name && v.epoch == epoch)
    }

    pub fn peak_at(&self, epoch: usize) -> Option<&PeakWeight> {
        self.peaks
            .iter()
            .find(|p| p.epoch == epoch)
            .map(|p| &p.peak)
    }

    pub fn retention_at(
        &self,
        matrix: MatrixId,
        direction: Direction,
        site: usize,
    ) -> Option<&RetentionIndex> {
        self.retention
            .iter()
            .find(|r| r.matrix == matrix && r.direction == direction && r.site == site)
    }
}

/// Retention indices tracked for a two-phase schedule: output-layer output
/// connectivity at the four target sites and top-feedback input connectivity
/// at the pair-A sites, over (baseline, end of phase 1, end of phase 2).
pub fn standard_retention(
    table: &ConnectivityTable,
    arch: fbhebb_core::Architecture,
    phase_ends: &[usize],
) -> Vec<RetentionIndex> {
    let [e_pre, e_post] = match phase_ends {
        [a, b] => [*a, *b],
        _ => return Vec::new(),
    };
    let mut out = Vec::new();
    for site in OUTPUT_RETENTION_SITES {
        if let Ok(r) = retention(
            table,
            arch.output_layer(),
            Direction::Output,
            site,
            0,
            e_pre,
            e_post,
        ) {
            out.push(r);
        }
    }
    if let Some(fb) = arch.top_feedback() {
        for site in FEEDBACK_RETENTION_SITES {
            if let Ok(r) = retention(table, fb, Direction::Input, site, 0, e_pre, e_post) {
                out.push(r);
            }
        }
    }
    out
}

fn verdict(
    name: &str,
    epoch: usize,
    v: &SiteVector,
    targets: &[usize],
    threshold: f64,
) -> SelectivityVerdict {
    let s = selectivity(v, targets, threshold);
    SelectivityVerdict {
        name: name.to_string(),
        epoch,
        target_sites: targets.to_vec(),
        threshold,
        margin: s.margin,
        selective: s.selective,
    }
}

fn probe_verdicts(epoch: usize, probes: &ProbeSet) -> Vec<SelectivityVerdict> {
    let mut out = Vec::new();
    for (pair, v) in &probes.predict {
        out.push(verdict(
            &format!("predict_{pair}"),
            epoch,
            v,
            pair.target_sites(),
            ACTIVITY_MARGIN,
        ));
    }
    for (pair, v) in &probes.regenerate {
        out.push(verdict(
            &format!("regenerate_{pair}"),
            epoch,
            v,
            &[pair.input_site()],
            ACTIVITY_MARGIN,
        ));
    }
    out
}

/// Four-site co-maintenance verdicts on the output layer and top feedback.
pub fn co_maintenance(
    table: &ConnectivityTable,
    arch: fbhebb_core::Architecture,
    epoch: usize,
) -> Vec<SelectivityVerdict> {
    let mut out = Vec::new();
    if let Some(p) = table.get(epoch, arch.output_layer(), Direction::Output) {
        out.push(verdict(
            "co_maintenance_output",
            epoch,
            p,
            &ALL_TARGET_SITES,
            CONNECTIVITY_MARGIN,
        ));
    }
    if let Some(p) = arch
        .top_feedback()
        .and_then(|fb| table.get(epoch, fb, Direction::Input))
    {
        out.push(verdict(
            "co_maintenance_feedback",
            epoch,
            p,
            &ALL_TARGET_SITES,
            CONNECTIVITY_MARGIN,
        ));
    }
    out
}

pub fn summarize(outcome: &RunOutcome) -> RunSummary {
    let config = &outcome.config;
    let spec = config.protocol();
    let rec = &outcome.record;
    let phase_ends = spec.phase_end_epochs();
    let final_epoch = spec.total_epochs();
    let snapshot_epochs = spec.snapshot_epochs();

    let probes: BTreeMap<usize, ProbeSet> = rec
        .epochs
        .iter()
        .filter(|r| snapshot_epochs.contains(&r.epoch))
        .map(|r| (r.epoch, r.probes.clone()))
        .collect();
    let mut sel: Vec<SelectivityVerdict> = probes
        .iter()
        .flat_map(|(e, p)| probe_verdicts(*e, p))
        .collect();
    sel.extend(co_maintenance(&rec.connectivity, config.arch, final_epoch));

    let final_record: &EpochRecord = rec.epoch(final_epoch).expect("final epoch recorded");
    RunSummary {
        config: config.clone(),
        metadata: rec.metadata.clone(),
        phase_end_epochs: phase_ends.clone(),
        final_epoch,
        retention: standard_retention(&rec.connectivity, config.arch, &phase_ends),
        peak_weight: final_record.peak,
        peaks: rec
            .epochs
            .iter()
            .map(|r| EpochPeak {
                epoch: r.epoch,
                peak: r.peak,
            })
            .collect(),
        selectivity: sel,
        probes,
    }
}

fn write(path: &Path, contents: &str) -> Result<(), HarnessError> {
    fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

pub fn snapshot_path(dir: &Path, epoch: usize) -> PathBuf {
    dir.join(SNAPSHOT_DIR)
        .join(format!("epoch_{epoch:04}.json"))
}

/// Writes every artifact of `outcome` into `dir` (created if needed).
pub fn write_artifacts(dir: &Path, outcome: &RunOutcome) -> Result<RunSummary, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let summary = summarize(outcome);
    write(&dir.join(CONFIG_FILE), &outcome.config.to_toml())?;
    write(
        &dir.join(TRAJECTORY_FILE),
        &outcome.record.connectivity.to_csv(),
    )?;
    let json = serde_json::to_string_pretty(&summary).map_err(|source| HarnessError::Json {
        path: dir.join(SUMMARY_FILE),
        source,
    })?;
    write(&dir.join(SUMMARY_FILE), &json)?;
    if !outcome.record.snapshots.is_empty() {
        let snap_dir = dir.join(SNAPSHOT_DIR);
        fs::create_dir_all(&snap_dir).map_err(|e| HarnessError::io(&snap_dir, e))?;
        for (epoch, snap) in &outcome.record.snapshots {
            write(&snapshot_path(dir, *epoch), &snap.to_json())?;
        }
    }
    Ok(summary)
}

/// A completed run read back from disk.
#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub summary: RunSummary,
    /// Empty when the CSV could not be parsed; see `connectivity_error`.
    pub connectivity: ConnectivityTable,
    pub connectivity_error: Option<String>,
    pub trajectory_csv: String,
    pub snapshots: BTreeMap<usize, NetworkSnapshot>,
}

impl RunArtifacts {
    pub fn is_run_dir(dir: &Path) -> bool {
        dir.join(SUMMARY_FILE).is_file()
    }

    pub fn load(dir: &Path) -> Result<Self, HarnessError> {
        let read = |name: &str| {
            let p = dir.join(name);
            fs::read_to_string(&p).map_err(|e| HarnessError::io(&p, e))
        };
        let summary_path = dir.join(SUMMARY_FILE);
        let summary: RunSummary =
            serde_json::from_str(&read(SUMMARY_FILE)?).map_err(|source| HarnessError::Json {
                path: summary_path,
                source,
            })?;
        // a damaged CSV only disables the criteria that read it
        let (trajectory_csv, connectivity, connectivity_error) = match read(TRAJECTORY_FILE) {
            Ok(text) => match ConnectivityTable::from_csv(&text) {
                Ok(table) => (text, table, None),
                Err(source) => {
                    let e = HarnessError::Metrics {
                        path: dir.join(TRAJECTORY_FILE),
                        source,
                    };
                    (text, ConnectivityTable::new(), Some(e.to_string()))
                }
            },
            Err(e) => (String::new(), ConnectivityTable::new(), Some(e.to_string())),
        };
        let mut snapshots = BTreeMap::new();
        let snap_dir = dir.join(SNAPSHOT_DIR);
        if snap_dir.is_dir() {
            let mut epochs = vec![0];
            epochs.extend(summary.phase_end_epochs.iter().copied());
            for epoch in epochs {
                let p = snapshot_path(dir, epoch);
                if p.is_file() {
                    snapshots.insert(epoch, NetworkSnapshot::load(&p)?);
                }
            }
        }
        Ok(RunArtifacts {
            dir: dir.to_path_buf(),
            summary,
            connectivity,
            connectivity_error,
            trajectory_csv,
            snapshots,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.summary.config
    }

    pub fn network_at(&self, epoch: usize) -> Option<Result<Network, HarnessError>> {
        self.snapshots
            .get(&epoch)
            .map(|s| s.to_network().map_err(HarnessError::from))
    }
}

/// Human-readable retention table and peak weight, as printed by `run`.
pub fn render_summary(summary: &RunSummary) -> String {
    let mut s = format!(
        "run {} ({} epochs)\n",
        summary.config.run_name(),
        summary.final_epoch
    );
    if summary.retention.is_empty() {
        s.push_str("retention: n/a (single-phase schedule)\n");
    } else {
        s.push_str("retention                 site  epochs      C0        Cpre      Cpost     R\n");
        for r in &summary.retention {
            let value = r
                .value
                .map_or("undefined".to_string(), |v| format!("{v:+.3}"));
            s.push_str(&format!(
                "  {:<22}  {:>3}  {:>2}/{:>2}/{:>2}  {:+.5}  {:+.5}  {:+.5}  {}\n",
                format!("{} {}", r.matrix, r.direction),
                r.site,
                r.epochs[0],
                r.epochs[1],
                r.epochs[2],
                r.c0,
                r.c_pre,
                r.c_post,
                value
            ));
        }
    }
    for v in summary
        .selectivity
        .iter()
        .filter(|v| v.name.starts_with("co_maintenance"))
    {
        s.push_str(&format!(
            "{} at epoch {}: margin {:+.4} ({})\n",
            v.name,
            v.epoch,
            v.margin,
            if v.selective {
                "maintained"
            } else {
                "not maintained"
            }
        ));
    }
    s.push_str(&format!(
        "peak |w| = {:.4} in {}\n",
        summary.peak_weight.max_abs, summary.peak_weight.matrix
    ));
    s
}

/// Which pair's pattern the probes for `pair` use.
pub fn probe_pattern(pair: Pair, regenerate: bool) -> SiteVector {
    if regenerate {
        pair.target()
    } else {
        pair.input()
    }
}
