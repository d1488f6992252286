//! The unified local update rule and its ablations.
//!
//! For a matrix mapping `x` to `y` with target `t`:
//!
//! ```text
//! Δw_rc = lr · [ (y_r − ⟨y⟩_r)(x_c − ⟨x⟩_c) − β (y_r − ⟨y⟩_r)² w_rc + (t_r − y_r) x_c ]
//! ```
//!
//! `⟨·⟩` are exponential running means updated with the current sample
//! before `Δw` is computed. Layers without a target use `t = y`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::network::{ForwardPass, MatrixId, Network};
use crate::site::{Matrix, SiteVector, SITES, ZERO_MATRIX};
use crate::weights::WeightMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuleParams {
    pub lr: f64,
    /// Oja decay strength.
    pub beta: f64,
    /// Running-mean smoothing; the averaging window is about `1/alpha` samples.
    pub alpha: f64,
}

impl Default for RuleParams {
    fn default() -> Self {
        RuleParams {
            lr: 0.001,
            beta: 1.0,
            alpha: 0.01,
        }
    }
}

impl RuleParams {
    /// `lr=0` is allowed so the means can be driven in isolation.
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.lr.is_finite() && self.lr >= 0.0) {
            return Err(ModelError::InvalidParams {
                field: "lr",
                reason: format!("must be a finite non-negative number, got {}", self.lr),
            });
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(ModelError::InvalidParams {
                field: "beta",
                reason: format!("must be >= 0, got {}", self.beta),
            });
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(ModelError::InvalidParams {
                field: "alpha",
                reason: format!("must lie in (0, 1], got {}", self.alpha),
            });
        }
        Ok(())
    }
}

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum RuleVariant {
    #[default]
    #[serde(rename = "full")]
    Full,
    /// Oja term removed.
    #[serde(rename = "no-decay")]
    NoDecay,
    /// Centred Hebbian term removed.
    #[serde(rename = "no-cov")]
    NoCovariance,
    /// `t = y` everywhere.
    #[serde(rename = "no-sup")]
    NoSupervised,
}

impl RuleVariant {
    pub const ALL: [RuleVariant; 4] = [
        RuleVariant::Full,
        RuleVariant::NoDecay,
        RuleVariant::NoCovariance,
        RuleVariant::NoSupervised,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleVariant::Full => "full",
            RuleVariant::NoDecay => "no-decay",
            RuleVariant::NoCovariance => "no-cov",
            RuleVariant::NoSupervised => "no-sup",
        }
    }

    pub fn terms(self) -> RuleTerms {
        let all = RuleTerms::ALL;
        match self {
            RuleVariant::Full => all,
            RuleVariant::NoDecay => RuleTerms {
                decay: false,
                ..all
            },
            RuleVariant::NoCovariance => RuleTerms {
                covariance: false,
                ..all
            },
            RuleVariant::NoSupervised => RuleTerms {
                supervised: false,
                ..all
            },
        }
    }
}

impl fmt::Display for RuleVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "full" => Ok(RuleVariant::Full),
            "no-decay" => Ok(RuleVariant::NoDecay),
            "no-cov" => Ok(RuleVariant::NoCovariance),
            "no-sup" => Ok(RuleVariant::NoSupervised),
            other => Err(format!(
                "unknown rule variant `{other}` (expected full, no-decay, no-cov or no-sup)"
            )),
        }
    }
}

/// Which terms of the rule are active. Variants map onto these; tests also
/// combine them freely.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RuleTerms {
    pub covariance: bool,
    pub decay: bool,
    pub supervised: bool,
}

impl RuleTerms {
    pub const ALL: RuleTerms = RuleTerms {
        covariance: true,
        decay: true,
        supervised: true,
    };
}

/// Where a matrix's target comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSource {
    /// The task's target pattern (final forward matrix).
    TaskOutput,
    /// The input of the paired forward layer (feedback matrices).
    PairedLayerInput,
    /// No target: `t := y`.
    None,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateGranularity {
    /// One additive update per presented sample.
    #[default]
    Sample,
    /// Per-sample updates are accumulated against frozen weights and their
    /// mean is applied once at the end of each epoch.
    EpochMean,
}

impl UpdateGranularity {
    pub fn as_str(self) -> &'static str {
        match self {
            UpdateGranularity::Sample => "sample",
            UpdateGranularity::EpochMean => "epoch-mean",
        }
    }
}

impl FromStr for UpdateGranularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sample" => Ok(UpdateGranularity::Sample),
            "epoch-mean" => Ok(UpdateGranularity::EpochMean),
            other => Err(format!(
                "unknown update granularity `{other}` (expected sample or epoch-mean)"
            )),
        }
    }
}

/// `⟨x⟩ ← (1−α)⟨x⟩ + αx`, same for `⟨y⟩`.
pub fn update_means(m: &mut WeightMatrix, x: &SiteVector, y: &SiteVector, alpha: f64) {
    for i in 0..SITES {
        m.mean_in.0[i] = (1.0 - alpha) * m.mean_in.0[i] + alpha * x.0[i];
        m.mean_out.0[i] = (1.0 - alpha) * m.mean_out.0[i] + alpha * y.0[i];
    }
}

/// The update for one matrix given its local activities. Means must already
/// include this presentation.
pub fn delta_w(
    m: &WeightMatrix,
    x: &SiteVector,
    y: &SiteVector,
    t: &SiteVector,
    params: &RuleParams,
    terms: RuleTerms,
) -> Matrix {
    let mut dw = ZERO_MATRIX;
    for (r, row) in dw.iter_mut().enumerate() {
        let dy = y.0[r] - m.mean_out.0[r];
        let err = t.0[r] - y.0[r];
        for (c, d) in row.iter_mut().enumerate() {
            let mut v = 0.0;
            if terms.covariance {
                v += dy * (x.0[c] - m.mean_in.0[c]);
            }
            if terms.decay {
                v -= params.beta * dy * dy * m.w[r][c];
            }
            if terms.supervised {
                v += err * x.0[c];
            }
            *d = params.lr * v;
        }
    }
    dw
}

/// Activities produced while training on one sample.
#[derive(Clone, Debug, PartialEq)]
pub struct StepTrace {
    pub pass: ForwardPass,
    pub reconstructions: Vec<SiteVector>,
}

/// `(x, y, t)` seen by one matrix on one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalActivity {
    pub matrix: MatrixId,
    pub x: SiteVector,
    pub y: SiteVector,
    pub t: SiteVector,
}

fn resolve_target(
    m: &WeightMatrix,
    y: &SiteVector,
    task: &SiteVector,
    paired: &SiteVector,
) -> SiteVector {
    match m.target {
        TargetSource::TaskOutput => *task,
        TargetSource::PairedLayerInput => *paired,
        TargetSource::None => *y,
    }
}

/// Local activities for every learned matrix, in canonical matrix order.
pub fn local_activities(
    net: &Network,
    trace: &StepTrace,
    target: &SiteVector,
) -> Vec<LocalActivity> {
    let pass = &trace.pass;
    let fwd = net.forward().iter().enumerate().map(|(k, m)| {
        let y = pass.activities[k];
        LocalActivity {
            matrix: MatrixId::forward(k + 1),
            x: pass.drives[k],
            y,
            t: resolve_target(m, &y, target, &pass.inputs[k]),
        }
    });
    let fb = net.feedback().iter().enumerate().map(|(k, m)| {
        let y = trace.reconstructions[k];
        LocalActivity {
            matrix: MatrixId::feedback(k + 1),
            x: pass.activities[k],
            y,
            t: resolve_target(m, &y, target, &pass.inputs[k]),
        }
    });
    fwd.chain(fb).collect()
}

fn check_open_unit(matrix: MatrixId, v: &SiteVector) -> Result<(), ModelError> {
    match v.sites().find(|&(_, a)| !(a > 0.0 && a < 1.0)) {
        Some((site, value)) => Err(ModelError::ActivityOutOfRange {
            matrix,
            site,
            value,
        }),
        None => Ok(()),
    }
}

fn propagate_for_training(net: &mut Network, input: &SiteVector) -> Result<StepTrace, ModelError> {
    let pass = net.forward_step(input)?;
    let reconstructions = net.feedback_step(&pass)?;
    for (k, a) in pass.activities.iter().enumerate() {
        check_open_unit(MatrixId::forward(k + 1), a)?;
    }
    for (k, r) in reconstructions.iter().enumerate() {
        check_open_unit(MatrixId::feedback(k + 1), r)?;
    }
    Ok(StepTrace {
        pass,
        reconstructions,
    })
}

fn matrix_mut(net: &mut Network, id: MatrixId) -> &mut WeightMatrix {
    let i = id.index - 1;
    match id.role {
        crate::network::Role::Forward => &mut net.forward_mut()[i],
        crate::network::Role::Feedback => &mut net.feedback_mut()[i],
    }
}

/// One training presentation: forward step, feedback step, then exactly one
/// update per learned matrix from its local activities.
pub fn train_step(
    net: &mut Network,
    input: &SiteVector,
    target: &SiteVector,
    params: &RuleParams,
    variant: RuleVariant,
) -> Result<StepTrace, ModelError> {
    let trace = propagate_for_training(net, input)?;
    let terms = variant.terms();
    for local in local_activities(net, &trace, target) {
        let m = matrix_mut(net, local.matrix);
        update_means(m, &local.x, &local.y, params.alpha);
        let dw = delta_w(m, &local.x, &local.y, &local.t, params, terms);
        m.add_assign(&dw);
    }
    Ok(trace)
}

/// Applies the rule at the configured granularity.
#[derive(Clone, Debug)]
pub struct Trainer {
    params: RuleParams,
    variant: RuleVariant,
    granularity: UpdateGranularity,
    pending: Vec<(MatrixId, Matrix)>,
    pending_count: usize,
}

impl Trainer {
    pub fn new(
        params: RuleParams,
        variant: RuleVariant,
        granularity: UpdateGranularity,
    ) -> Result<Self, ModelError> {
        params.validate()?;
        Ok(Trainer {
            params,
            variant,
            granularity,
            pending: Vec::new(),
            pending_count: 0,
        })
    }

    pub fn params(&self) -> &RuleParams {
        &self.params
    }

    pub fn variant(&self) -> RuleVariant {
        self.variant
    }

    pub fn granularity(&self) -> UpdateGranularity {
        self.granularity
    }

    pub fn step(
        &mut self,
        net: &mut Network,
        input: &SiteVector,
        target: &SiteVector,
    ) -> Result<StepTrace, ModelError> {
        match self.granularity {
            UpdateGranularity::Sample => train_step(net, input, target, &self.params, self.variant),
            UpdateGranularity::EpochMean => self.accumulate(net, input, target),
        }
    }

    fn accumulate(
        &mut self,
        net: &mut Network,
        input: &SiteVector,
        target: &SiteVector,
    ) -> Result<StepTrace, ModelError> {
        let trace = propagate_for_training(net, input)?;
        let terms = self.variant.terms();
        let locals = local_activities(net, &trace, target);
        if self.pending.is_empty() {
            self.pending = locals.iter().map(|l| (l.matrix, ZERO_MATRIX)).collect();
        }
        for (local, (_, acc)) in locals.iter().zip(self.pending.iter_mut()) {
            let m = matrix_mut(net, local.matrix);
            update_means(m, &local.x, &local.y, self.params.alpha);
            let dw = delta_w(m, &local.x, &local.y, &local.t, &self.params, terms);
            for (arow, drow) in acc.iter_mut().zip(dw.iter()) {
                for (a, d) in arow.iter_mut().zip(drow.iter()) {
                    *a += d;
                }
            }
        }
        self.pending_count += 1;
        Ok(trace)
    }

    /// Flushes accumulated updates. A no-op for per-sample training.
    pub fn end_epoch(&mut self, net: &mut Network) {
        if self.pending_count == 0 {
            return;
        }
        let n = self.pending_count as f64;
        for (id, acc) in self.pending.drain(..) {
            let mean = acc.map(|row| row.map(|v| v / n));
            matrix_mut(net, id).add_assign(&mean);
        }
        self.pending_count = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Architecture, InjectionMode};
    use crate::weights::init_weights;

    #[test]
    fn one_step_mean() {
        let mut m = WeightMatrix::zeros(TargetSource::None);
        let x = SiteVector::one_hot(3);
        update_means(&mut m, &x, &x, 0.01);
        assert_eq!(m.mean_in, SiteVector::one_hot(3).map(|v| 0.01 * v));
    }

    #[test]
    fn alpha_one_copies_input() {
        let mut m = init_weights(3);
        let x = SiteVector::from([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]);
        update_means(&mut m, &x, &x, 1.0);
        assert_eq!(m.mean_in, x);
        assert_eq!(m.mean_out, x);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn centred_input_and_neutral_target_leave_only_decay() {
        let mut m = init_weights(5);
        let x = SiteVector::splat(0.3);
        let y = SiteVector::from([0.9, 0.1, 0.5, 0.4, 0.2, 0.7, 0.3, 0.8, 0.6, 0.05]);
        m.mean_in = x;
        m.mean_out = SiteVector::splat(0.25);
        let p = RuleParams::default();
        let dw = delta_w(&m, &x, &y, &y, &p, RuleTerms::ALL);
        for r in 0..SITES {
            let dy = y.0[r] - 0.25;
            for c in 0..SITES {
                let expect = -p.lr * p.beta * dy * dy * m.w[r][c];
                assert!((dw[r][c] - expect).abs() < 1e-18);
            }
        }
    }

    #[test]
    fn no_supervised_equals_full_with_t_equal_y() {
        let m = init_weights(11);
        let x = SiteVector::one_hot(7);
        let y = SiteVector::splat(0.4);
        let t = SiteVector::from_sites(&[5, 6]);
        let p = RuleParams::default();
        let a = delta_w(&m, &x, &y, &t, &p, RuleVariant::NoSupervised.terms());
        let b = delta_w(&m, &x, &y, &y, &p, RuleVariant::Full.terms());
        assert_eq!(a, b);
    }

    #[test]
    fn params_validation() {
        assert!(RuleParams::default().validate().is_ok());
        let bad = RuleParams {
            alpha: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(ModelError::InvalidParams { field: "alpha", .. })
        ));
        let bad = RuleParams {
            beta: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = RuleParams {
            lr: f64::NAN,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn zero_lr_freezes_weights_but_not_means() {
        let mut net = Network::new(Architecture::Ff2Fb2, InjectionMode::Input, 2);
        let before = net.clone();
        let p = RuleParams {
            lr: 0.0,
            ..Default::default()
        };
        train_step(
            &mut net,
            &SiteVector::one_hot(3),
            &SiteVector::from_sites(&[8, 9]),
            &p,
            RuleVariant::Full,
        )
        .unwrap();
        for ((_, a), (_, b)) in net.matrices().zip(before.matrices()) {
            assert_eq!(a.w, b.w);
            assert_ne!(a.mean_in, b.mean_in);
        }
    }

    #[test]
    fn feedback_target_is_paired_layer_input() {
        let net = Network::new(Architecture::Ff2Fb2, InjectionMode::Input, 4);
        let mut probe = net.clone();
        let trace = propagate_for_training(&mut probe, &SiteVector::one_hot(3)).unwrap();
        let task = SiteVector::from_sites(&[8, 9]);
        let locals = local_activities(&net, &trace, &task);
        assert_eq!(locals.len(), 4);
        assert_eq!(locals[0].t, locals[0].y);
        assert_eq!(locals[1].t, task);
        assert_eq!(locals[2].t, SiteVector::one_hot(3));
        assert_eq!(locals[3].t, trace.pass.inputs[1]);
        assert_eq!(locals[3].x, trace.pass.activities[1]);
    }

    #[test]
    fn epoch_mean_defers_weight_changes() {
        let mut net = Network::new(Architecture::Ff2Fb2, InjectionMode::Input, 8);
        let w0: Vec<_> = net.matrices().map(|(_, m)| m.w).collect();
        let mut trainer = Trainer::new(
            RuleParams::default(),
            RuleVariant::Full,
            UpdateGranularity::EpochMean,
        )
        .unwrap();
        let x = SiteVector::one_hot(3);
        let t = SiteVector::from_sites(&[8, 9]);
        for _ in 0..5 {
            trainer.step(&mut net, &x, &t).unwrap();
        }
        let mid: Vec<_> = net.matrices().map(|(_, m)| m.w).collect();
        assert_eq!(w0, mid);
        trainer.end_epoch(&mut net);
        let after: Vec<_> = net.matrices().map(|(_, m)| m.w).collect();
        assert_ne!(w0, after);
    }
}
