//! Weight-derived summaries. Every function here is read-only.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;
use crate::network::{MatrixId, Network};
use crate::site::{Matrix, SiteVector, SITES};
use crate::trajectory::ConnectivityTable;

/// Margin a target set must clear in an activity pattern.
pub const ACTIVITY_MARGIN: f64 = 0.1;
/// Margin a target set must clear in a connectivity profile.
pub const CONNECTIVITY_MARGIN: f64 = 0.02;
/// Smallest earlier-phase change for which a retention index is defined.
pub const RETENTION_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Column means: how strongly each input site projects into the layer.
    Input,
    /// Row means: how strongly each output unit integrates its inputs.
    Output,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Input => "input",
            Direction::Output => "output",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "input" => Ok(Direction::Input),
            "output" => Ok(Direction::Output),
            other => Err(format!("unknown direction `{other}`")),
        }
    }
}

pub fn connectivity(w: &Matrix, direction: Direction) -> SiteVector {
    let n = SITES as f64;
    SiteVector(std::array::from_fn(|i| match direction {
        Direction::Output => w[i].iter().sum::<f64>() / n,
        Direction::Input => w.iter().map(|row| row[i]).sum::<f64>() / n,
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityProfile {
    pub matrix: MatrixId,
    pub direction: Direction,
    pub profile: SiteVector,
    pub epoch: usize,
}

/// `(post − pre) / |pre − c0|`, or `None` when `|pre − c0| <= eps`.
pub fn retention_value(c0: f64, c_pre: f64, c_post: f64, eps: f64) -> Option<f64> {
    let denom = (c_pre - c0).abs();
    (denom > eps).then(|| (c_post - c_pre) / denom)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetentionIndex {
    pub matrix: MatrixId,
    pub direction: Direction,
    pub site: usize,
    pub epochs: [usize; 3],
    pub c0: f64,
    pub c_pre: f64,
    pub c_post: f64,
    /// `None` when the earlier-phase change is below [`RETENTION_EPS`].
    pub value: Option<f64>,
}

pub fn retention(
    table: &ConnectivityTable,
    matrix: MatrixId,
    direction: Direction,
    site: usize,
    e0: usize,
    e_pre: usize,
    e_post: usize,
) -> Result<RetentionIndex, MetricsError> {
    let at = |epoch| {
        table
            .get(epoch, matrix, direction)
            .map(|p| p[site])
            .ok_or_else(|| {
                if table.has_epoch(epoch) {
                    MetricsError::MissingProfile {
                        matrix,
                        direction,
                        epoch,
                    }
                } else {
                    MetricsError::EpochNotRecorded(epoch)
                }
            })
    };
    let (c0, c_pre, c_post) = (at(e0)?, at(e_pre)?, at(e_post)?);
    Ok(RetentionIndex {
        matrix,
        direction,
        site,
        epochs: [e0, e_pre, e_post],
        c0,
        c_pre,
        c_post,
        value: retention_value(c0, c_pre, c_post, RETENTION_EPS),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakWeight {
    pub max_abs: f64,
    pub matrix: MatrixId,
}

/// Largest `|w|` over every learned matrix. Ties go to forward before
/// feedback, then the lower layer.
pub fn peak_weight(net: &Network) -> PeakWeight {
    let mut best = PeakWeight {
        max_abs: 0.0,
        matrix: MatrixId::forward(1),
    };
    for (id, m) in net.matrices() {
        let v = m.max_abs();
        if v > best.max_abs {
            best = PeakWeight {
                max_abs: v,
                matrix: id,
            };
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selectivity {
    pub selective: bool,
    /// Lowest target value minus highest non-target value.
    pub margin: f64,
}

/// Panics on an empty target set or when every site is a target.
pub fn selectivity(v: &SiteVector, targets: &[usize], threshold: f64) -> Selectivity {
    assert!(
        !targets.is_empty(),
        "selectivity needs at least one target site"
    );
    let (mut lo_target, mut hi_other) = (f64::INFINITY, f64::NEG_INFINITY);
    for (s, x) in v.sites() {
        if targets.contains(&s) {
            lo_target = lo_target.min(x);
        } else {
            hi_other = hi_other.max(x);
        }
    }
    assert!(
        hi_other.is_finite(),
        "selectivity needs at least one non-target site"
    );
    let margin = lo_target - hi_other;
    Selectivity {
        selective: margin > threshold,
        margin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Architecture, InjectionMode};
    use crate::site::{transpose, ZERO_MATRIX};

    #[test]
    fn constant_matrix_profiles() {
        let w = [[1.0; SITES]; SITES];
        assert_eq!(connectivity(&w, Direction::Input), SiteVector::splat(1.0));
        assert_eq!(connectivity(&w, Direction::Output), SiteVector::splat(1.0));
    }

    #[test]
    fn single_entry_profiles() {
        let mut w = ZERO_MATRIX;
        w[8][2] = 1.0; // row 9, column 3
        let out = connectivity(&w, Direction::Output);
        let inp = connectivity(&w, Direction::Input);
        assert_eq!(out[9], 0.1);
        assert_eq!(inp[3], 0.1);
        assert_eq!(out.iter().filter(|&v| v != 0.0).count(), 1);
        assert_eq!(inp.iter().filter(|&v| v != 0.0).count(), 1);
    }

    #[test]
    fn input_profile_is_transposed_output_profile() {
        let w = crate::weights::init_weights(5).w;
        assert_eq!(
            connectivity(&w, Direction::Input),
            connectivity(&transpose(&w), Direction::Output)
        );
    }

    #[test]
    fn retention_edge_cases() {
        assert_eq!(retention_value(0.0, 1.0, 1.0, RETENTION_EPS), Some(0.0));
        assert_eq!(retention_value(0.2, 0.2, 1.0, RETENTION_EPS), None);
        assert_eq!(retention_value(0.0, 0.5, 1.0, RETENTION_EPS), Some(1.0));
        assert_eq!(retention_value(1.0, 0.5, 0.0, RETENTION_EPS), Some(-1.0));
    }

    #[test]
    fn peak_of_zero_network() {
        let net = Network::zeroed(Architecture::Ff2Fb2, InjectionMode::Input);
        assert_eq!(
            peak_weight(&net),
            PeakWeight {
                max_abs: 0.0,
                matrix: MatrixId::forward(1)
            }
        );
    }

    #[test]
    fn peak_ties_prefer_forward() {
        let mut net = Network::zeroed(Architecture::Ff2Fb2, InjectionMode::Input);
        net.feedback_mut()[0].w[0][0] = -2.0;
        net.forward_mut()[1].w[4][4] = 2.0;
        assert_eq!(peak_weight(&net).matrix, MatrixId::forward(2));
        net.feedback_mut()[0].w[0][0] = -2.5;
        assert_eq!(peak_weight(&net).matrix, MatrixId::feedback(1));
    }

    #[test]
    fn selectivity_cases() {
        let mut v = SiteVector::splat(0.05);
        v[8] = 0.9;
        v[9] = 0.9;
        let s = selectivity(&v, &[8, 9], ACTIVITY_MARGIN);
        assert!(s.selective);
        assert!((s.margin - 0.85).abs() < 1e-12);

        let u = selectivity(&SiteVector::splat(0.5), &[8, 9], ACTIVITY_MARGIN);
        assert!(!u.selective);
        assert!(u.margin <= 0.0);
    }
}
