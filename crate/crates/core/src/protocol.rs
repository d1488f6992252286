//! The two-pair association task and the training schedules.

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ProtocolError;
use crate::network::Network;
use crate::plasticity::Trainer;
use crate::site::SiteVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pair {
    /// Site 3 → sites 8, 9.
    A,
    /// Site 7 → sites 5, 6.
    B,
}

impl Pair {
    pub const ALL: [Pair; 2] = [Pair::A, Pair::B];

    pub fn input_site(self) -> usize {
        match self {
            Pair::A => 3,
            Pair::B => 7,
        }
    }

    pub fn target_sites(self) -> &'static [usize] {
        match self {
            Pair::A => &[8, 9],
            Pair::B => &[5, 6],
        }
    }

    pub fn input(self) -> SiteVector {
        SiteVector::one_hot(self.input_site())
    }

    pub fn target(self) -> SiteVector {
        SiteVector::from_sites(self.target_sites())
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Pair::A => "A",
            Pair::B => "B",
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "A" | "a" => Ok(Pair::A),
            "B" | "b" => Ok(Pair::B),
            other => Err(format!("unknown pair `{other}` (expected A or B)")),
        }
    }
}

/// `(input, target)` for one presentation. Samples carry no noise.
pub fn make_sample(pair: Pair) -> (SiteVector, SiteVector) {
    (pair.input(), pair.target())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// A only, then B only.
    Sequential,
    /// A, B, A, B, ... within every epoch.
    Interleaved,
}

impl Regime {
    pub const ALL: [Regime; 2] = [Regime::Sequential, Regime::Interleaved];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Sequential => "sequential",
            Regime::Interleaved => "interleaved",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sequential" => Ok(Regime::Sequential),
            "interleaved" => Ok(Regime::Interleaved),
            other => Err(format!(
                "unknown regime `{other}` (expected sequential or interleaved)"
            )),
        }
    }
}

/// Which pair each sample of an epoch presents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    Only(Pair),
    /// Cycles through the listed pairs, restarting every epoch.
    Cycle(Vec<Pair>),
}

impl Schedule {
    pub fn pair_at(&self, sample: usize) -> Pair {
        match self {
            Schedule::Only(p) => *p,
            Schedule::Cycle(seq) => seq[sample % seq.len()],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase {
    pub schedule: Schedule,
    pub samples_per_epoch: usize,
    pub epochs: usize,
}

/// Optional additive uniform input noise, clipped to [0, 1]. Off by default.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputNoise {
    pub amplitude: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub regime: Option<Regime>,
    pub phases: Vec<Phase>,
    pub input_noise: Option<InputNoise>,
}

/// One scheduled presentation. Phase and sample are 1-based within their
/// scope; `epoch` is the global 1-based epoch number.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub phase: usize,
    pub epoch: usize,
    pub sample: usize,
    pub pair: Pair,
}

pub const DEFAULT_EPOCHS: usize = 10;

impl ProtocolSpec {
    /// Phase 1: A only, 50 samples x `epochs`; phase 2: B only, same size.
    pub fn sequential(epochs: usize) -> Self {
        let phase = |p| Phase {
            schedule: Schedule::Only(p),
            samples_per_epoch: 50,
            epochs,
        };
        ProtocolSpec {
            regime: Some(Regime::Sequential),
            phases: vec![phase(Pair::A), phase(Pair::B)],
            input_noise: None,
        }
    }

    /// One phase of 100 samples per epoch alternating A, B, starting with A.
    pub fn interleaved(epochs: usize) -> Self {
        ProtocolSpec {
            regime: Some(Regime::Interleaved),
            phases: vec![Phase {
                schedule: Schedule::Cycle(vec![Pair::A, Pair::B]),
                samples_per_epoch: 100,
                epochs,
            }],
            input_noise: None,
        }
    }

    pub fn for_regime(regime: Regime, epochs: usize) -> Self {
        match regime {
            Regime::Sequential => Self::sequential(epochs),
            Regime::Interleaved => Self::interleaved(epochs),
        }
    }

    pub fn total_epochs(&self) -> usize {
        self.phases.iter().map(|p| p.epochs).sum()
    }

    /// Global epoch at which each phase ends.
    pub fn phase_end_epochs(&self) -> Vec<usize> {
        self.phases
            .iter()
            .scan(0, |acc, p| {
                *acc += p.epochs;
                Some(*acc)
            })
            .collect()
    }

    /// Baseline plus every phase end, ascending and deduplicated.
    pub fn snapshot_epochs(&self) -> Vec<usize> {
        let mut v = vec![0];
        v.extend(self.phase_end_epochs());
        v.dedup();
        v
    }

    pub fn presentations(&self) -> impl Iterator<Item = Presentation> + '_ {
        let starts = std::iter::once(0).chain(self.phase_end_epochs());
        self.phases
            .iter()
            .zip(starts)
            .enumerate()
            .flat_map(|(pi, (phase, start))| {
                (0..phase.epochs).flat_map(move |e| {
                    (0..phase.samples_per_epoch).map(move |s| Presentation {
                        phase: pi + 1,
                        epoch: start + e + 1,
                        sample: s + 1,
                        pair: phase.schedule.pair_at(s),
                    })
                })
            })
    }

    /// Presentations per pair, `(A, B)`.
    pub fn pair_counts(&self) -> (usize, usize) {
        self.presentations().fold((0, 0), |(a, b), p| match p.pair {
            Pair::A => (a + 1, b),
            Pair::B => (a, b + 1),
        })
    }
}

/// Receives the network at the baseline and after every epoch.
pub trait Recorder {
    fn record(&mut self, epoch: usize, net: &Network);
}

impl<F: FnMut(usize, &Network)> Recorder for F {
    fn record(&mut self, epoch: usize, net: &Network) {
        self(epoch, net)
    }
}

/// Trains `net` through the schedule in order. Means, contexts and the step
/// counter carry across phase boundaries.
pub fn run_protocol<R: Recorder + ?Sized>(
    net: &mut Network,
    spec: &ProtocolSpec,
    trainer: &mut Trainer,
    recorder: &mut R,
) -> Result<(), ProtocolError> {
    recorder.record(0, net);
    let mut noise = spec.input_noise.map(|n| {
        (
            ChaCha8Rng::seed_from_u64(n.seed),
            Uniform::new_inclusive(-n.amplitude, n.amplitude),
        )
    });
    let mut current_epoch = 0;
    for p in spec.presentations() {
        if p.epoch != current_epoch {
            if current_epoch != 0 {
                trainer.end_epoch(net);
                recorder.record(current_epoch, net);
            }
            current_epoch = p.epoch;
        }
        let (mut input, target) = make_sample(p.pair);
        if let Some((rng, dist)) = noise.as_mut() {
            for v in input.0.iter_mut() {
                *v = (*v + dist.sample(rng)).clamp(0.0, 1.0);
            }
        }
        trainer
            .step(net, &input, &target)
            .map_err(|source| ProtocolError {
                phase: p.phase,
                epoch: p.epoch,
                sample: p.sample,
                source,
            })?;
    }
    if current_epoch != 0 {
        trainer.end_epoch(net);
        recorder.record(current_epoch, net);
    }
    Ok(())
}
