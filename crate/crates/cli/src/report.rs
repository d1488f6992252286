//! Acceptance report: evaluates every criterion against run artifacts.
//!
//! Probe criteria rebuild networks from the snapshot files, connectivity
//! criteria read the trajectory CSV and weight criteria read the summary, so a
//! damaged file only affects the criteria that depend on it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fbhebb_core::{
    retention, selectivity, Architecture, ConnectivityTable, Direction, ModelError, Network, Pair,
    Regime, RuleVariant, ACTIVITY_MARGIN, CONNECTIVITY_MARGIN,
};
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::config::RunConfig;
use crate::properties;
use crate::runner::{RunArtifacts, ALL_TARGET_SITES};
use crate::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RunKey {
    pub arch: Architecture,
    pub variant: RuleVariant,
    pub regime: Regime,
    pub seed: u64,
}

impl std::fmt::Display for RunKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}_{}_{}_s{}",
            self.arch, self.variant, self.regime, self.seed
        )
    }
}

/// Default-parameter runs found under some directories, by cell and seed.
#[derive(Debug, Default)]
pub struct RunIndex {
    pub runs: BTreeMap<RunKey, RunArtifacts>,
    /// Run directories skipped because they could not be read.
    pub unreadable: Vec<(PathBuf, String)>,
    /// Runs skipped because they used non-default settings or repeat a key.
    pub ignored: Vec<PathBuf>,
}

fn is_default_cell(cfg: &RunConfig) -> bool {
    let reference = RunConfig {
        seed: cfg.seed,
        arch: cfg.arch,
        variant: cfg.variant,
        regime: cfg.regime,
        ..RunConfig::default()
    };
    *cfg == reference
}

impl RunIndex {
    /// Walks every root for run directories. Errors only when nothing at all
    /// looks like a run.
    pub fn load(roots: &[PathBuf]) -> Result<Self, HarnessError> {
        let mut dirs: Vec<PathBuf> = roots
            .iter()
            .flat_map(|root| {
                WalkDir::new(root)
                    .follow_links(true)
                    .into_iter()
                    .filter_map(Result::ok)
            })
            .filter(|e| e.file_type().is_dir() && RunArtifacts::is_run_dir(e.path()))
            .map(|e| e.into_path())
            .collect();
        dirs.sort();
        dirs.dedup();
        if dirs.is_empty() {
            return Err(HarnessError::NoArtifacts(roots.to_vec()));
        }
        let mut index = RunIndex::default();
        for dir in dirs {
            match RunArtifacts::load(&dir) {
                Ok(run) => {
                    let cfg = run.config();
                    let key = RunKey {
                        arch: cfg.arch,
                        variant: cfg.variant,
                        regime: cfg.regime,
                        seed: cfg.seed,
                    };
                    if !is_default_cell(cfg) || index.runs.contains_key(&key) {
                        index.ignored.push(dir);
                    } else {
                        index.runs.insert(key, run);
                    }
                }
                Err(e) => index.unreadable.push((dir, e.to_string())),
            }
        }
        Ok(index)
    }

    pub fn get(&self, key: &RunKey) -> Option<&RunArtifacts> {
        self.runs.get(key)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub detail: String,
    /// Seed-sensitive comparisons that do not affect the verdict.
    pub informative: Vec<String>,
    /// Artifacts the criterion needed but could not find.
    pub missing: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub seeds: Vec<u64>,
    pub criteria: Vec<CriterionResult>,
    pub unreadable: Vec<String>,
}

impl AcceptanceReport {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn criterion(&self, id: u8) -> Option<&CriterionResult> {
        self.criteria.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.criteria {
            let _ = writeln!(
                s,
                "[{}] C{} {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.id,
                c.title,
                c.detail
            );
            for i in &c.informative {
                let _ = writeln!(s, "       info: {i}");
            }
            for m in &c.missing {
                let _ = writeln!(s, "       missing: {m}");
            }
        }
        for u in &self.unreadable {
            let _ = writeln!(s, "unreadable: {u}");
        }
        let passed = self.criteria.iter().filter(|c| c.passed).count();
        let _ = writeln!(s, "{passed}/{} criteria passed", self.criteria.len());
        s
    }
}

/// Per-seed outcome of one check; `None` when an artifact is missing.
type SeedResults = Vec<(u64, Option<bool>)>;

struct Eval<'a> {
    index: &'a RunIndex,
    seeds: &'a [u64],
    missing: Vec<String>,
    notes: Vec<String>,
}

impl<'a> Eval<'a> {
    fn new(index: &'a RunIndex, seeds: &'a [u64]) -> Self {
        Eval {
            index,
            seeds,
            missing: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn run(
        &mut self,
        arch: Architecture,
        variant: RuleVariant,
        regime: Regime,
        seed: u64,
    ) -> Option<&'a RunArtifacts> {
        let key = RunKey {
            arch,
            variant,
            regime,
            seed,
        };
        let r = self.index.get(&key);
        if r.is_none() {
            self.note_missing(format!("run {key}"));
        }
        r
    }

    fn note_missing(&mut self, what: String) {
        if !self.missing.contains(&what) {
            self.missing.push(what);
        }
    }

    fn network(&mut self, run: &RunArtifacts, epoch: usize) -> Option<Network> {
        match run.network_at(epoch) {
            Some(Ok(n)) => Some(n),
            Some(Err(e)) => {
                self.note_missing(format!(
                    "{}: epoch {epoch} snapshot unusable ({e})",
                    run.dir.display()
                ));
                None
            }
            None => {
                self.note_missing(format!("{}: epoch {epoch} snapshot", run.dir.display()));
                None
            }
        }
    }

    fn table<'r>(&mut self, run: &'r RunArtifacts) -> Option<&'r ConnectivityTable> {
        match &run.connectivity_error {
            Some(e) => {
                self.note_missing(e.clone());
                None
            }
            None => Some(&run.connectivity),
        }
    }

    /// Retention at `site` from the trajectory CSV over (0, e1, e2).
    fn retention(
        &mut self,
        run: &RunArtifacts,
        matrix: fbhebb_core::MatrixId,
        dir: Direction,
        site: usize,
    ) -> Option<Option<f64>> {
        let ends = run.config().protocol().phase_end_epochs();
        let table = self.table(run)?;
        match retention(table, matrix, dir, site, 0, ends[0], ends[1]) {
            Ok(r) => Some(r.value),
            Err(e) => {
                self.note_missing(format!("{}: {e}", run.dir.display()));
                None
            }
        }
    }

    fn finish(self, id: u8, title: &str, passed: bool, detail: String) -> CriterionResult {
        let passed = passed && self.missing.is_empty();
        CriterionResult {
            id,
            title: title.to_string(),
            passed,
            detail,
            informative: self.notes,
            missing: self.missing,
        }
    }
}

fn count(results: &SeedResults) -> usize {
    results.iter().filter(|(_, r)| *r == Some(true)).count()
}

fn seed_list(results: &SeedResults) -> String {
    results
        .iter()
        .map(|(s, r)| {
            format!(
                "s{s}:{}",
                match r {
                    Some(true) => "ok",
                    Some(false) => "no",
                    None => "?",
                }
            )
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// At least 4 of 5, scaled to the number of seeds requested.
fn majority(n: usize) -> usize {
    (4 * n).div_ceil(5)
}

fn fmt_r(r: Option<f64>) -> String {
    r.map_or("undef".into(), |v| format!("{v:+.2}"))
}

// Criterion bodies, parameterised by architecture so the FF3_FB3 control can
// reuse them.

fn c1(ev: &mut Eval, arch: Architecture) -> (bool, String) {
    let mut res = SeedResults::new();
    let mut margins = Vec::new();
    for &seed in ev.seeds {
        let outcome = ev
            .run(arch, RuleVariant::Full, Regime::Sequential, seed)
            .and_then(|run| {
                let e1 = run.config().protocol().phase_end_epochs()[0];
                let before = ev.network(run, 0)?;
                let after = ev.network(run, e1)?;
                let probe = |n: &Network| n.probe_prediction(&Pair::A.input()).ok();
                let pre = selectivity(&probe(&before)?, Pair::A.target_sites(), ACTIVITY_MARGIN);
                let post = selectivity(&probe(&after)?, Pair::A.target_sites(), ACTIVITY_MARGIN);
                margins.push(format!("s{seed} {:+.3}->{:+.3}", pre.margin, post.margin));
                Some(post.selective && !pre.selective)
            });
        res.push((seed, outcome));
    }
    let ok = count(&res) == ev.seeds.len();
    (
        ok,
        format!(
            "predict(e3) selective for {{8,9}} after phase 1 only, {}/{} seeds [{}]; margins {}",
            count(&res),
            ev.seeds.len(),
            seed_list(&res),
            margins.join(", ")
        ),
    )
}

fn c2(ev: &mut Eval, arch: Architecture) -> (bool, String) {
    let mut res = SeedResults::new();
    let mut margins = Vec::new();
    for &seed in ev.seeds {
        let outcome = ev
            .run(arch, RuleVariant::Full, Regime::Sequential, seed)
            .and_then(|run| {
                let e1 = run.config().protocol().phase_end_epochs()[0];
                let before = ev.network(run, 0)?;
                let after = ev.network(run, e1)?;
                let probe = |n: &Network| n.probe_regeneration(&Pair::A.target()).ok();
                let pre = selectivity(&probe(&before)?, &[Pair::A.input_site()], ACTIVITY_MARGIN);
                let post = selectivity(&probe(&after)?, &[Pair::A.input_site()], ACTIVITY_MARGIN);
                margins.push(format!("s{seed} {:+.3}->{:+.3}", pre.margin, post.margin));
                Some(post.selective && !pre.selective)
            });
        res.push((seed, outcome));
    }
    let ok = count(&res) == ev.seeds.len();
    (
        ok,
        format!(
            "regenerate(A) selective for {{3}} after phase 1 only, {}/{} seeds [{}]; margins {}",
            count(&res),
            ev.seeds.len(),
            seed_list(&res),
            margins.join(", ")
        ),
    )
}

const REFERENCE_OUTPUT_R: [f64; 4] = [0.98, 1.68, -1.27, -1.05];

fn c3(ev: &mut Eval, arch: Architecture, variant: RuleVariant) -> (bool, String) {
    let mut res = SeedResults::new();
    let mut values = Vec::new();
    let mut close = Vec::new();
    for &seed in ev.seeds {
        let Some(run) = ev.run(arch, variant, Regime::Sequential, seed) else {
            res.push((seed, None));
            continue;
        };
        let rs: Option<Vec<Option<f64>>> = ALL_TARGET_SITES
            .iter()
            .map(|&site| ev.retention(run, arch.output_layer(), Direction::Output, site))
            .collect();
        let Some(rs) = rs else {
            res.push((seed, None));
            continue;
        };
        let pass = matches!(rs[..], [Some(r5), Some(r6), Some(r8), Some(r9)]
            if r5 > 0.0 && r6 > 0.0 && r8 < -0.5 && r9 < -0.5);
        let magnitudes = rs
            .iter()
            .zip(REFERENCE_OUTPUT_R)
            .all(|(r, p)| r.is_some_and(|v| (v - p).abs() <= 0.6));
        if magnitudes {
            close.push(seed);
        }
        values.push(format!(
            "s{seed} ({})",
            rs.iter().map(|r| fmt_r(*r)).collect::<Vec<_>>().join(", ")
        ));
        res.push((seed, Some(pass)));
    }
    if variant == RuleVariant::Full && arch == Architecture::Ff2Fb2 {
        ev.notes.push(format!(
            "magnitudes within 0.6 of (0.98, 1.68, -1.27, -1.05) on seeds {:?}",
            close
        ));
    }
    let need = majority(ev.seeds.len());
    (
        count(&res) >= need,
        format!(
        "R5>0, R6>0, R8<-0.5, R9<-0.5 at {} output on {}/{} seeds (need {need}); R(5,6,8,9): {}",
        arch.output_layer(),
        count(&res),
        ev.seeds.len(),
        values.join("; ")
    ),
    )
}

fn c4(ev: &mut Eval, arch: Architecture) -> (bool, String) {
    let Some(fb) = arch.top_feedback() else {
        return (false, "architecture has no feedback pathway".into());
    };
    let mut res = SeedResults::new();
    let mut values = Vec::new();
    for &seed in ev.seeds {
        let Some(run) = ev.run(arch, RuleVariant::Full, Regime::Sequential, seed) else {
            res.push((seed, None));
            continue;
        };
        let r8 = ev.retention(run, fb, Direction::Input, 8);
        let r9 = ev.retention(run, fb, Direction::Input, 9);
        let outcome = match (r8, r9) {
            (Some(a), Some(b)) => {
                values.push(format!("s{seed} ({}, {})", fmt_r(a), fmt_r(b)));
                Some(a.is_some_and(|v| v.abs() <= 0.2) && b.is_some_and(|v| v.abs() <= 0.2))
            }
            _ => None,
        };
        res.push((seed, outcome));
    }
    let need = majority(ev.seeds.len());
    (
        count(&res) >= need,
        format!(
            "|R8|, |R9| <= 0.2 at {fb} input on {}/{} seeds (need {need}); R(8,9): {}",
            count(&res),
            ev.seeds.len(),
            values.join("; ")
        ),
    )
}

/// Four-site co-maintenance margin of a profile in the interleaved run's CSV.
fn co_margin(
    ev: &mut Eval,
    run: &RunArtifacts,
    matrix: fbhebb_core::MatrixId,
    dir: Direction,
) -> Option<f64> {
    let epoch = run.config().protocol().total_epochs();
    match ev.table(run)?.get(epoch, matrix, dir) {
        Some(p) => Some(selectivity(p, &ALL_TARGET_SITES, CONNECTIVITY_MARGIN).margin),
        None => {
            ev.note_missing(format!(
                "{}: epoch {epoch} {matrix} {dir} connectivity",
                run.dir.display()
            ));
            None
        }
    }
}

fn c5(ev: &mut Eval, arch: Architecture) -> (bool, String) {
    let mut res = SeedResults::new();
    let mut values = Vec::new();
    for &seed in ev.seeds {
        let Some(run) = ev.run(arch, RuleVariant::Full, Regime::Interleaved, seed) else {
            res.push((seed, None));
            continue;
        };
        let fwd = co_margin(ev, run, arch.output_layer(), Direction::Output);
        let fb = match arch.top_feedback() {
            Some(fb) => co_margin(ev, run, fb, Direction::Input),
            None => Some(f64::NEG_INFINITY),
        };
        let outcome = match (fwd, fb) {
            (Some(f), Some(b)) => {
                values.push(format!("s{seed} ({f:+.3}, {b:+.3})"));
                Some(f > CONNECTIVITY_MARGIN && b > CONNECTIVITY_MARGIN)
            }
            _ => None,
        };
        res.push((seed, outcome));
    }
    let need = majority(ev.seeds.len());
    (count(&res) >= need, format!(
        "sites {{5,6,8,9}} co-elevated (margin > {CONNECTIVITY_MARGIN}) at output and top-feedback input on {}/{} seeds (need {need}); margins (output, feedback): {}",
        count(&res),
        ev.seeds.len(),
        values.join("; ")
    ))
}

fn c6(ev: &mut Eval) -> (bool, String) {
    let arch = Architecture::Ff3Fb3;
    let parts = [
        ("C1", c1(ev, arch)),
        ("C2", c2(ev, arch)),
        ("C3", c3(ev, arch, RuleVariant::Full)),
        ("C4", c4(ev, arch)),
        ("C5", c5(ev, arch)),
    ];
    let deep_ok = parts.iter().all(|(_, (ok, _))| *ok);
    let deep: Vec<String> = parts
        .iter()
        .map(|(n, (ok, _))| format!("{n} {}", if *ok { "ok" } else { "FAIL" }))
        .collect();
    for (n, (_, d)) in &parts {
        ev.notes.push(format!("3ff3fb {n}: {d}"));
    }

    let arch = Architecture::Ff2Only;
    let need = majority(ev.seeds.len());
    let mut pred = SeedResults::new();
    let mut regen = SeedResults::new();
    let mut cond = SeedResults::new();
    for &seed in ev.seeds {
        let p = ev
            .run(arch, RuleVariant::Full, Regime::Sequential, seed)
            .and_then(|run| {
                let end = run.config().protocol().total_epochs();
                let net = ev.network(run, end)?;
                let b = net.probe_prediction(&Pair::B.input()).ok()?;
                let r = matches!(
                    net.probe_regeneration(&Pair::B.target()),
                    Err(ModelError::NoFeedbackPathway(_))
                );
                regen.push((seed, Some(r)));
                Some(selectivity(&b, Pair::B.target_sites(), ACTIVITY_MARGIN).selective)
            });
        if p.is_none() {
            regen.push((seed, None));
        }
        pred.push((seed, p));
        let c = ev
            .run(arch, RuleVariant::Full, Regime::Interleaved, seed)
            .and_then(|run| co_margin(ev, run, arch.output_layer(), Direction::Output))
            .map(|m| m <= CONNECTIVITY_MARGIN);
        cond.push((seed, c));
    }
    let shallow_ok = count(&pred) >= need && count(&regen) >= need && count(&cond) >= need;
    (deep_ok && shallow_ok, format!(
        "3ff3fb: {}; 2ff: predict B after phase 2 {}/{n}, regeneration unsupported {}/{n}, co-maintenance fails {}/{n} (need {need} each)",
        deep.join(", "),
        count(&pred),
        count(&regen),
        count(&cond),
        n = ev.seeds.len(),
    ))
}

/// End-of-sequential peak |w| per seed for one variant.
fn final_peaks(ev: &mut Eval, variant: RuleVariant) -> Vec<(u64, Option<(f64, String)>)> {
    ev.seeds
        .iter()
        .map(|&seed| {
            let p = ev
                .run(Architecture::Ff2Fb2, variant, Regime::Sequential, seed)
                .and_then(|run| {
                    let s = &run.summary;
                    let p = s.peak_at(s.config.protocol().total_epochs());
                    if p.is_none() {
                        ev.note_missing(format!("{}: final-epoch peak weight", run.dir.display()));
                    }
                    p.map(|p| (p.max_abs, p.matrix.to_string()))
                });
            (seed, p)
        })
        .collect()
}

fn c7(ev: &mut Eval) -> (bool, String) {
    use RuleVariant::*;
    let order = [NoCovariance, NoDecay, Full, NoSupervised];
    let peaks: Vec<_> = order.iter().map(|&v| final_peaks(ev, v)).collect();
    let mut res = SeedResults::new();
    let mut rows = Vec::new();
    let mut layer_hits = [0usize; 4];
    let expected_layer = [
        "forward layer 2",
        "forward layer 1",
        "forward layer 1",
        "forward layer 1",
    ];
    for (i, &seed) in ev.seeds.iter().enumerate() {
        let vals: Option<Vec<(f64, String)>> = peaks.iter().map(|p| p[i].1.clone()).collect();
        let Some(vals) = vals else {
            res.push((seed, None));
            continue;
        };
        for (j, (_, layer)) in vals.iter().enumerate() {
            if layer == expected_layer[j] {
                layer_hits[j] += 1;
            }
        }
        let v: Vec<f64> = vals.iter().map(|x| x.0).collect();
        let ordered = v[0] > v[1] && v[1] > v[2] && v[2] > v[3];
        let full_in_range = (0.7..=1.7).contains(&v[2]);
        rows.push(format!(
            "s{seed} no-cov {:.3} no-decay {:.3} full {:.3} no-sup {:.3}",
            v[0], v[1], v[2], v[3]
        ));
        res.push((seed, Some(ordered && full_in_range)));
    }
    ev.notes.push(format!(
        "layer of max matches (no-cov L2, no-decay L1, full L1, no-sup L1): {:?} of {} seeds",
        layer_hits,
        ev.seeds.len()
    ));
    (
        count(&res) == ev.seeds.len(),
        format!(
            "no-cov > no-decay > full > no-sup with full in [0.7, 1.7] on {}/{} seeds [{}]; {}",
            count(&res),
            ev.seeds.len(),
            seed_list(&res),
            rows.join("; ")
        ),
    )
}

fn c8(ev: &mut Eval) -> (bool, String) {
    let arch = Architecture::Ff2Fb2;
    let mut seq = SeedResults::new();
    let mut int = SeedResults::new();
    let mut values = Vec::new();
    for &seed in ev.seeds {
        let s = ev
            .run(arch, RuleVariant::NoSupervised, Regime::Sequential, seed)
            .and_then(|run| {
                let r8 = ev.retention(run, arch.output_layer(), Direction::Output, 8)?;
                let r9 = ev.retention(run, arch.output_layer(), Direction::Output, 9)?;
                values.push(format!("s{seed} R8 {} R9 {}", fmt_r(r8), fmt_r(r9)));
                // undefined retention cannot demonstrate anything, so it fails
                Some(r8.is_some_and(|v| v > -0.5) && r9.is_some_and(|v| v > -0.5))
            });
        seq.push((seed, s));
        let c = ev
            .run(arch, RuleVariant::NoSupervised, Regime::Interleaved, seed)
            .and_then(|run| co_margin(ev, run, arch.output_layer(), Direction::Output))
            .map(|m| m <= CONNECTIVITY_MARGIN);
        int.push((seed, c));
    }
    let need = majority(ev.seeds.len());
    (count(&seq) >= need && count(&int) >= need, format!(
        "sequential R8, R9 > -0.5 on {}/{n}; interleaved co-maintenance fails on {}/{n} (need {need} each); {}",
        count(&seq),
        count(&int),
        values.join("; "),
        n = ev.seeds.len()
    ))
}

fn c9(ev: &mut Eval) -> (bool, String) {
    let checks = properties::run_all();
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    for c in &checks {
        ev.notes.push(format!(
            "{}: {} ({})",
            c.name,
            if c.passed { "ok" } else { "FAIL" },
            c.detail
        ));
    }
    (
        failed.is_empty(),
        if failed.is_empty() {
            format!("all {} properties hold", checks.len())
        } else {
            format!("failing: {}", failed.join(", "))
        },
    )
}

fn c10(ev: &mut Eval) -> (bool, String) {
    let mut res = SeedResults::new();
    let mut worst = Vec::new();
    for &seed in ev.seeds {
        let full = ev.run(
            Architecture::Ff2Fb2,
            RuleVariant::Full,
            Regime::Sequential,
            seed,
        );
        let nd = ev.run(
            Architecture::Ff2Fb2,
            RuleVariant::NoDecay,
            Regime::Sequential,
            seed,
        );
        let outcome = match (full, nd) {
            (Some(f), Some(n)) => {
                let epochs = f.summary.config.protocol().total_epochs();
                let mut ok = true;
                let mut gap = f64::INFINITY;
                for e in 0..=epochs {
                    match (f.summary.peak_at(e), n.summary.peak_at(e)) {
                        (Some(a), Some(b)) => {
                            ok &= a.max_abs <= b.max_abs;
                            gap = gap.min(b.max_abs - a.max_abs);
                        }
                        _ => {
                            ev.note_missing(format!("s{seed}: peak weight at epoch {e}"));
                            ok = false;
                        }
                    }
                }
                worst.push(format!("s{seed} min gap {gap:+.2e}"));
                Some(ok)
            }
            _ => None,
        };
        res.push((seed, outcome));
    }
    (
        count(&res) == ev.seeds.len(),
        format!(
            "full peak <= no-decay peak at every epoch on {}/{} seeds; {}",
            count(&res),
            ev.seeds.len(),
            worst.join(", ")
        ),
    )
}

pub const TITLES: [&str; 10] = [
    "single-association learning",
    "regeneration",
    "sequential LTD-like unlearning",
    "feedback retention",
    "interleaved conditioning",
    "architectural controls",
    "ablation peak weights",
    "no-supervision failure modes",
    "property suite",
    "decay directional check",
];

/// Evaluates criterion `id` (1 to 10).
pub fn evaluate_one(index: &RunIndex, seeds: &[u64], id: u8) -> CriterionResult {
    let mut ev = Eval::new(index, seeds);
    let arch = Architecture::Ff2Fb2;
    let (ok, detail) = match id {
        1 => c1(&mut ev, arch),
        2 => c2(&mut ev, arch),
        3 => c3(&mut ev, arch, RuleVariant::Full),
        4 => c4(&mut ev, arch),
        5 => c5(&mut ev, arch),
        6 => c6(&mut ev),
        7 => c7(&mut ev),
        8 => c8(&mut ev),
        9 => c9(&mut ev),
        10 => c10(&mut ev),
        _ => panic!("no criterion {id}"),
    };
    ev.finish(id, TITLES[usize::from(id) - 1], ok, detail)
}

pub fn evaluate(index: &RunIndex, seeds: &[u64]) -> AcceptanceReport {
    AcceptanceReport {
        seeds: seeds.to_vec(),
        criteria: (1..=10).map(|id| evaluate_one(index, seeds, id)).collect(),
        unreadable: index
            .unreadable
            .iter()
            .map(|(p, e)| format!("{}: {e}", p.display()))
            .collect(),
    }
}

/// Loads `roots`, evaluates and writes `acceptance-report.json` plus
/// `acceptance-report.txt` into `out`.
pub fn write_report(
    roots: &[PathBuf],
    seeds: &[u64],
    out: &Path,
) -> Result<AcceptanceReport, HarnessError> {
    let index = RunIndex::load(roots)?;
    let report = evaluate(&index, seeds);
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    for (name, body) in [
        ("acceptance-report.json", report.to_json()),
        ("acceptance-report.txt", report.render()),
    ] {
        let p = out.join(name);
        std::fs::write(&p, body).map_err(|e| HarnessError::io(&p, e))?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majority_of_five_is_four() {
        assert_eq!(majority(5), 4);
        assert_eq!(majority(1), 1);
        assert_eq!(majority(10), 8);
    }

    #[test]
    fn empty_index_fails_every_artifact_criterion() {
        let index = RunIndex::default();
        let r = evaluate_one(&index, &[1, 2], 3);
        assert!(!r.passed);
        assert_eq!(r.missing.len(), 2);
        assert!(r.missing[0].contains("2fb") || r.missing[0].contains("2ff2fb"));
    }

    #[test]
    fn empty_dir_is_no_artifacts() {
        let d = std::env::temp_dir().join(format!("fbhebb-empty-{}", std::process::id()));
        std::fs::create_dir_all(&d).unwrap();
        let err = RunIndex::load(std::slice::from_ref(&d)).unwrap_err();
        assert!(matches!(err, HarnessError::NoArtifacts(_)));
        assert!(err.to_string().contains("no artifacts"));
        std::fs::remove_dir_all(d).unwrap();
    }
}
