//! JSON weight snapshots.
//!
//! ```json
//! {
//!   "format": "fbhebb-snapshot/1",
//!   "arch": "2ff2fb",
//!   "injection": "input",
//!   "step_counter": 500,
//!   "context": [[...10 values...], ...],
//!   "matrices": [
//!     { "role": "forward", "index": 1, "values": [...100 row-major...],
//!       "mean_in": [...], "mean_out": [...] },
//!     ...
//!   ]
//! }
//! ```
//!
//! Floats are written in shortest round-trip form, so save/load is bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::SnapshotError;
use crate::network::{Architecture, InjectionMode, MatrixId, Network, Role};
use crate::site::{SiteVector, SITES, ZERO_MATRIX};
use crate::weights::WeightMatrix;

pub const SNAPSHOT_FORMAT: &str = "fbhebb-snapshot/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixSnapshot {
    pub role: Role,
    /// 1-based layer number.
    pub index: usize,
    pub values: Vec<f64>,
    pub mean_in: SiteVector,
    pub mean_out: SiteVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSnapshot {
    pub format: String,
    pub arch: Architecture,
    pub injection: InjectionMode,
    pub step_counter: u64,
    pub context: Vec<SiteVector>,
    pub matrices: Vec<MatrixSnapshot>,
}

impl NetworkSnapshot {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, SnapshotError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), SnapshotError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SnapshotError> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_network(&self) -> Result<Network, SnapshotError> {
        Network::from_snapshot(self)
    }
}

impl Network {
    pub fn snapshot(&self) -> NetworkSnapshot {
        NetworkSnapshot {
            format: SNAPSHOT_FORMAT.to_string(),
            arch: self.arch(),
            injection: self.injection(),
            step_counter: self.step,
            context: self.context.clone(),
            matrices: self
                .matrices()
                .map(|(id, m)| MatrixSnapshot {
                    role: id.role,
                    index: id.index,
                    values: m.w.iter().flatten().copied().collect(),
                    mean_in: m.mean_in,
                    mean_out: m.mean_out,
                })
                .collect(),
        }
    }

    pub fn from_snapshot(snap: &NetworkSnapshot) -> Result<Network, SnapshotError> {
        let bad = |msg: String| Err(SnapshotError::Malformed(msg));
        if snap.format != SNAPSHOT_FORMAT {
            return bad(format!("unsupported format `{}`", snap.format));
        }
        let arch = snap.arch;
        let mut net = Network::zeroed(arch, snap.injection);
        let expected = arch.num_forward() + arch.num_feedback();
        if snap.matrices.len() != expected {
            return bad(format!(
                "{arch} needs {expected} matrices, snapshot has {}",
                snap.matrices.len()
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for ms in &snap.matrices {
            let id = MatrixId {
                role: ms.role,
                index: ms.index,
            };
            if !seen.insert(id) {
                return bad(format!("{id} appears twice"));
            }
            if ms.values.len() != SITES * SITES {
                return bad(format!(
                    "{id} has {} values, expected {}",
                    ms.values.len(),
                    SITES * SITES
                ));
            }
            let slot: &mut WeightMatrix = match (ms.role, ms.index.checked_sub(1)) {
                (Role::Forward, Some(i)) if i < arch.num_forward() => &mut net.forward[i],
                (Role::Feedback, Some(i)) if i < arch.num_feedback() => &mut net.feedback[i],
                _ => return bad(format!("{id} does not exist in {arch}")),
            };
            let mut w = ZERO_MATRIX;
            for (k, v) in ms.values.iter().enumerate() {
                w[k / SITES][k % SITES] = *v;
            }
            slot.w = w;
            slot.mean_in = ms.mean_in;
            slot.mean_out = ms.mean_out;
        }
        if snap.context.len() != arch.num_forward() {
            return bad(format!(
                "context has {} vectors, expected {}",
                snap.context.len(),
                arch.num_forward()
            ));
        }
        net.context = snap.context.clone();
        net.step = snap.step_counter;
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plasticity::{train_step, RuleParams, RuleVariant};
    use crate::protocol::Pair;

    fn trained() -> Network {
        let mut net = Network::new(Architecture::Ff3Fb3, InjectionMode::Input, 21);
        for _ in 0..7 {
            train_step(
                &mut net,
                &Pair::A.input(),
                &Pair::A.target(),
                &RuleParams::default(),
                RuleVariant::Full,
            )
            .unwrap();
        }
        net
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let net = trained();
        let text = net.snapshot().to_json();
        let back = NetworkSnapshot::from_json(&text)
            .unwrap()
            .to_network()
            .unwrap();
        assert_eq!(back, net);
        for ((_, a), (_, b)) in back.matrices().zip(net.matrices()) {
            for (x, y) in a.w.iter().flatten().zip(b.w.iter().flatten()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        assert_eq!(back.snapshot().to_json(), text);
    }

    #[test]
    fn rejects_wrong_shapes() {
        let mut snap = trained().snapshot();
        snap.matrices[0].values.pop();
        assert!(matches!(
            snap.to_network(),
            Err(SnapshotError::Malformed(_))
        ));

        let mut snap = trained().snapshot();
        snap.matrices[5].index = 4;
        assert!(snap.to_network().is_err());

        let mut snap = trained().snapshot();
        snap.arch = Architecture::Ff2Fb2;
        assert!(snap.to_network().is_err());

        assert!(NetworkSnapshot::from_json("{}").is_err());
    }
}
