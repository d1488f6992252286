//! Per-epoch records of a protocol run and their on-disk forms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;
use crate::metrics::{connectivity, peak_weight, Direction, PeakWeight};
use crate::network::{Architecture, MatrixId, Network, Role};
use crate::plasticity::RuleVariant;
use crate::protocol::{Pair, Recorder, Regime};
use crate::site::{SiteVector, SITES};
use crate::snapshot::NetworkSnapshot;

pub const CSV_HEADER: &str = "epoch,matrix_role,matrix_index,direction,site,value";

/// 17 significant digits, enough to round-trip any f64.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Connectivity profiles keyed by `(epoch, matrix, direction)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConnectivityTable {
    profiles: BTreeMap<(usize, MatrixId, Direction), SiteVector>,
}

impl ConnectivityTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        epoch: usize,
        matrix: MatrixId,
        direction: Direction,
        profile: SiteVector,
    ) {
        self.profiles.insert((epoch, matrix, direction), profile);
    }

    /// Both profiles of every learned matrix.
    pub fn insert_network(&mut self, epoch: usize, net: &Network) {
        for (id, m) in net.matrices() {
            for d in [Direction::Input, Direction::Output] {
                self.insert(epoch, id, d, connectivity(&m.w, d));
            }
        }
    }

    pub fn get(&self, epoch: usize, matrix: MatrixId, direction: Direction) -> Option<&SiteVector> {
        self.profiles.get(&(epoch, matrix, direction))
    }

    pub fn has_epoch(&self, epoch: usize) -> bool {
        self.profiles.keys().any(|k| k.0 == epoch)
    }

    pub fn epochs(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.profiles.keys().map(|k| k.0).collect();
        set.into_iter().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Long format, one row per site, ordered by epoch then matrix then
    /// direction. Layer and site numbers are 1-based.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * SITES * self.profiles.len() + 64);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for ((epoch, id, dir), profile) in &self.profiles {
            for (site, v) in profile.sites() {
                let _ = writeln!(
                    out,
                    "{epoch},{},{},{},{site},{}",
                    id.role.as_str(),
                    id.index,
                    dir.as_str(),
                    format_value(v)
                );
            }
        }
        out
    }

    /// Inverse of [`to_csv`](Self::to_csv). Every profile must list all ten sites.
    pub fn from_csv(text: &str) -> Result<Self, MetricsError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == CSV_HEADER => {}
            _ => {
                return Err(MetricsError::Csv {
                    line: 1,
                    reason: format!("expected header `{CSV_HEADER}`"),
                })
            }
        }
        let mut partial: BTreeMap<(usize, MatrixId, Direction), [Option<f64>; SITES]> =
            BTreeMap::new();
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let err = |reason: String| MetricsError::Csv {
                line: line_no,
                reason,
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(err(format!("expected 6 fields, found {}", fields.len())));
            }
            let epoch: usize = fields[0].parse().map_err(|e| err(format!("epoch: {e}")))?;
            let role: Role = fields[1].parse().map_err(err)?;
            let index: usize = fields[2]
                .parse()
                .map_err(|e| err(format!("matrix_index: {e}")))?;
            let dir: Direction = fields[3].parse().map_err(err)?;
            let site: usize = fields[4].parse().map_err(|e| err(format!("site: {e}")))?;
            let value: f64 = fields[5].parse().map_err(|e| err(format!("value: {e}")))?;
            if !(1..=SITES).contains(&site) {
                return Err(err(format!("site {site} outside 1..={SITES}")));
            }
            let slot = &mut partial
                .entry((epoch, MatrixId { role, index }, dir))
                .or_insert([None; SITES])[site - 1];
            if slot.is_some() {
                return Err(err(format!("duplicate site {site}")));
            }
            *slot = Some(value);
        }
        let mut table = ConnectivityTable::new();
        for ((epoch, id, dir), sites) in partial {
            let mut v = SiteVector::zeros();
            for (i, s) in sites.iter().enumerate() {
                v.0[i] = s.ok_or_else(|| MetricsError::Csv {
                    line: 0,
                    reason: format!(
                        "{id} {dir} profile at epoch {epoch} is missing site {}",
                        i + 1
                    ),
                })?;
            }
            table.insert(epoch, id, dir, v);
        }
        Ok(table)
    }
}

/// Probe outputs at one epoch. Regeneration is absent without feedback.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProbeSet {
    pub predict: BTreeMap<Pair, SiteVector>,
    pub regenerate: BTreeMap<Pair, SiteVector>,
}

impl ProbeSet {
    pub fn of(net: &Network) -> Self {
        let mut probes = ProbeSet::default();
        for pair in Pair::ALL {
            if let Ok(v) = net.probe_prediction(&pair.input()) {
                probes.predict.insert(pair, v);
            }
            if let Ok(v) = net.probe_regeneration(&pair.target()) {
                probes.regenerate.insert(pair, v);
            }
        }
        probes
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub peak: PeakWeight,
    pub probes: ProbeSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub arch: Architecture,
    pub variant: RuleVariant,
    pub regime: Option<Regime>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub metadata: RunMetadata,
    pub connectivity: ConnectivityTable,
    pub epochs: Vec<EpochRecord>,
    /// Full network state at the snapshot epochs, when requested.
    pub snapshots: BTreeMap<usize, NetworkSnapshot>,
}

impl TrajectoryRecord {
    pub fn epoch(&self, epoch: usize) -> Option<&EpochRecord> {
        self.epochs.iter().find(|r| r.epoch == epoch)
    }
}

/// Collects a [`TrajectoryRecord`] while a protocol runs.
#[derive(Clone, Debug)]
pub struct TrajectoryRecorder {
    snapshot_epochs: BTreeSet<usize>,
    keep_snapshots: bool,
    record: TrajectoryRecord,
}

impl TrajectoryRecorder {
    pub fn new(metadata: RunMetadata, snapshot_epochs: &[usize], keep_snapshots: bool) -> Self {
        TrajectoryRecorder {
            snapshot_epochs: snapshot_epochs.iter().copied().collect(),
            keep_snapshots,
            record: TrajectoryRecord {
                metadata,
                connectivity: ConnectivityTable::new(),
                epochs: Vec::new(),
                snapshots: BTreeMap::new(),
            },
        }
    }

    pub fn finish(self) -> TrajectoryRecord {
        self.record
    }
}

impl Recorder for TrajectoryRecorder {
    fn record(&mut self, epoch: usize, net: &Network) {
        self.record.connectivity.insert_network(epoch, net);
        self.record.epochs.push(EpochRecord {
            epoch,
            peak: peak_weight(net),
            probes: ProbeSet::of(net),
        });
        if self.keep_snapshots && self.snapshot_epochs.contains(&epoch) {
            self.record.snapshots.insert(epoch, net.snapshot());
        }
    }
}
