//! Network state and propagation: activation, forward pass with context
//! injection, feedback reconstruction and read-only probes. Nothing in this
//! module learns.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::plasticity::TargetSource;
use crate::site::{mat_vec, SiteVector};
use crate::weights::WeightMatrix;

/// `½(1 + tanh z)`, bounded in (0, 1).
pub fn phi(z: f64) -> f64 {
    0.5 * (1.0 + z.tanh())
}

/// Elementwise [`phi`]; `matrix` names the layer in the error on non-finite input.
pub fn activation(z: &SiteVector, matrix: MatrixId) -> Result<SiteVector, ModelError> {
    if !z.is_finite() {
        return Err(ModelError::NonFinite { matrix });
    }
    Ok(z.map(phi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Architecture {
    /// Two forward and two dedicated feedback matrices.
    #[serde(rename = "2ff2fb")]
    Ff2Fb2,
    #[serde(rename = "3ff3fb")]
    Ff3Fb3,
    /// Forward pathway only.
    #[serde(rename = "2ff")]
    Ff2Only,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [
        Architecture::Ff2Fb2,
        Architecture::Ff3Fb3,
        Architecture::Ff2Only,
    ];

    pub fn num_forward(self) -> usize {
        match self {
            Architecture::Ff2Fb2 | Architecture::Ff2Only => 2,
            Architecture::Ff3Fb3 => 3,
        }
    }

    pub fn num_feedback(self) -> usize {
        match self {
            Architecture::Ff2Fb2 => 2,
            Architecture::Ff3Fb3 => 3,
            Architecture::Ff2Only => 0,
        }
    }

    pub fn has_feedback(self) -> bool {
        self.num_feedback() > 0
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Architecture::Ff2Fb2 => "2ff2fb",
            Architecture::Ff3Fb3 => "3ff3fb",
            Architecture::Ff2Only => "2ff",
        }
    }

    /// The forward matrix that produces the task output.
    pub fn output_layer(self) -> MatrixId {
        MatrixId::forward(self.num_forward())
    }

    /// The feedback matrix paired with the output layer, if any.
    pub fn top_feedback(self) -> Option<MatrixId> {
        self.has_feedback()
            .then(|| MatrixId::feedback(self.num_feedback()))
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Architecture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "2ff2fb" => Ok(Architecture::Ff2Fb2),
            "3ff3fb" => Ok(Architecture::Ff3Fb3),
            "2ff" => Ok(Architecture::Ff2Only),
            other => Err(format!(
                "unknown architecture `{other}` (expected 2ff2fb, 3ff3fb or 2ff)"
            )),
        }
    }
}

/// Where the previous step's reconstruction enters a forward layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InjectionMode {
    /// Added to the layer's input before the matrix: `W (a + r)`.
    #[default]
    Input,
    /// Added to the pre-activation: `W a + r`.
    Preactivation,
}

impl InjectionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            InjectionMode::Input => "input",
            InjectionMode::Preactivation => "preactivation",
        }
    }
}

impl FromStr for InjectionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "input" => Ok(InjectionMode::Input),
            "preactivation" => Ok(InjectionMode::Preactivation),
            other => Err(format!(
                "unknown injection mode `{other}` (expected input or preactivation)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Forward,
    Feedback,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Forward => "forward",
            Role::Feedback => "feedback",
        }
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "forward" => Ok(Role::Forward),
            "feedback" => Ok(Role::Feedback),
            other => Err(format!("unknown matrix role `{other}`")),
        }
    }
}

/// Identifies a learned matrix. `index` is the 1-based layer number, so
/// `MatrixId::forward(2)` is forward layer 2.
///
/// Ordering is forward before feedback, then by layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MatrixId {
    pub role: Role,
    pub index: usize,
}

impl MatrixId {
    pub const fn forward(index: usize) -> Self {
        MatrixId {
            role: Role::Forward,
            index,
        }
    }

    pub const fn feedback(index: usize) -> Self {
        MatrixId {
            role: Role::Feedback,
            index,
        }
    }
}

impl fmt::Display for MatrixId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} layer {}", self.role.as_str(), self.index)
    }
}

/// Everything a forward step computed, kept for plasticity and feedback targets.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardPass {
    /// Activity arriving from below (`a_{k-1}`, the external input for layer 1).
    pub inputs: Vec<SiteVector>,
    /// What the matrix actually multiplied: `a_{k-1} + r_k` under input
    /// injection, `a_{k-1}` otherwise. Plasticity uses this as `x`.
    pub drives: Vec<SiteVector>,
    pub activities: Vec<SiteVector>,
}

impl ForwardPass {
    pub fn output(&self) -> &SiteVector {
        self.activities.last().expect("at least one forward layer")
    }
}

/// An assembled architecture with its temporal context.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    arch: Architecture,
    injection: InjectionMode,
    pub(crate) forward: Vec<WeightMatrix>,
    pub(crate) feedback: Vec<WeightMatrix>,
    /// `context[k]` is added to forward layer `k+1`'s drive on the next step.
    pub(crate) context: Vec<SiteVector>,
    pub(crate) step: u64,
}

fn forward_targets(arch: Architecture) -> impl Iterator<Item = TargetSource> {
    let n = arch.num_forward();
    (0..n).map(move |k| {
        if k + 1 == n {
            TargetSource::TaskOutput
        } else {
            TargetSource::None
        }
    })
}

impl Network {
    /// Fresh network with seeded uniform weights. Forward matrices are drawn
    /// first, then feedback, from one ChaCha stream, so architectures sharing
    /// a forward depth start with identical forward weights.
    pub fn new(arch: Architecture, injection: InjectionMode, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let forward = forward_targets(arch)
            .map(|t| WeightMatrix::random(&mut rng, t))
            .collect();
        let feedback = (0..arch.num_feedback())
            .map(|_| WeightMatrix::random(&mut rng, TargetSource::PairedLayerInput))
            .collect();
        Self::assemble(arch, injection, forward, feedback)
    }

    /// All weights zero.
    pub fn zeroed(arch: Architecture, injection: InjectionMode) -> Self {
        let forward = forward_targets(arch).map(WeightMatrix::zeros).collect();
        let feedback = (0..arch.num_feedback())
            .map(|_| WeightMatrix::zeros(TargetSource::PairedLayerInput))
            .collect();
        Self::assemble(arch, injection, forward, feedback)
    }

    pub(crate) fn assemble(
        arch: Architecture,
        injection: InjectionMode,
        forward: Vec<WeightMatrix>,
        feedback: Vec<WeightMatrix>,
    ) -> Self {
        debug_assert_eq!(forward.len(), arch.num_forward());
        debug_assert_eq!(feedback.len(), arch.num_feedback());
        Network {
            arch,
            injection,
            context: vec![SiteVector::zeros(); forward.len()],
            forward,
            feedback,
            step: 0,
        }
    }

    pub fn arch(&self) -> Architecture {
        self.arch
    }

    pub fn injection(&self) -> InjectionMode {
        self.injection
    }

    pub fn step_counter(&self) -> u64 {
        self.step
    }

    pub fn forward(&self) -> &[WeightMatrix] {
        &self.forward
    }

    pub fn feedback(&self) -> &[WeightMatrix] {
        &self.feedback
    }

    pub fn forward_mut(&mut self) -> &mut [WeightMatrix] {
        &mut self.forward
    }

    pub fn feedback_mut(&mut self) -> &mut [WeightMatrix] {
        &mut self.feedback
    }

    pub fn context(&self) -> &[SiteVector] {
        &self.context
    }

    pub fn matrix(&self, id: MatrixId) -> Option<&WeightMatrix> {
        let list = match id.role {
            Role::Forward => &self.forward,
            Role::Feedback => &self.feedback,
        };
        id.index.checked_sub(1).and_then(|i| list.get(i))
    }

    /// Every learned matrix in canonical order (forward first, by layer).
    pub fn matrices(&self) -> impl Iterator<Item = (MatrixId, &WeightMatrix)> {
        let fwd = self
            .forward
            .iter()
            .enumerate()
            .map(|(i, m)| (MatrixId::forward(i + 1), m));
        let fb = self
            .feedback
            .iter()
            .enumerate()
            .map(|(i, m)| (MatrixId::feedback(i + 1), m));
        fwd.chain(fb)
    }

    /// Forward pass using the stored contexts. Does not mutate the network.
    pub fn forward_step(&self, input: &SiteVector) -> Result<ForwardPass, ModelError> {
        if self.context.len() != self.forward.len() {
            return Err(ModelError::ContextMismatch {
                expected: self.forward.len(),
                found: self.context.len(),
            });
        }
        self.propagate(input, Some(&self.context))
    }

    fn propagate(
        &self,
        input: &SiteVector,
        context: Option<&[SiteVector]>,
    ) -> Result<ForwardPass, ModelError> {
        let n = self.forward.len();
        let mut pass = ForwardPass {
            inputs: Vec::with_capacity(n),
            drives: Vec::with_capacity(n),
            activities: Vec::with_capacity(n),
        };
        let mut below = *input;
        for (k, m) in self.forward.iter().enumerate() {
            let ctx = context.map(|c| c[k]).unwrap_or_default();
            let (drive, z) = match self.injection {
                InjectionMode::Input => {
                    let d = below + ctx;
                    (d, m.apply(&d))
                }
                InjectionMode::Preactivation => (below, m.apply(&below) + ctx),
            };
            let a = activation(&z, MatrixId::forward(k + 1))?;
            pass.inputs.push(below);
            pass.drives.push(drive);
            pass.activities.push(a);
            below = a;
        }
        Ok(pass)
    }

    /// Reconstructs each forward layer's input from its activity and stores
    /// the reconstructions of hidden-layer inputs as next-step context. The
    /// input-level reconstruction is returned but never injected.
    ///
    /// Advances the step counter. On an architecture without feedback this
    /// returns no reconstructions and leaves the (all-zero) contexts alone.
    pub fn feedback_step(&mut self, pass: &ForwardPass) -> Result<Vec<SiteVector>, ModelError> {
        let recon = self
            .feedback
            .iter()
            .zip(pass.activities.iter())
            .enumerate()
            .map(|(k, (fb, a))| activation(&fb.apply(a), MatrixId::feedback(k + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        for (k, r) in recon.iter().enumerate().skip(1) {
            self.context[k] = *r;
        }
        self.step += 1;
        Ok(recon)
    }

    /// Output activity for `input` with all contexts forced to zero.
    pub fn probe_prediction(&self, input: &SiteVector) -> Result<SiteVector, ModelError> {
        Ok(*self.propagate(input, None)?.output())
    }

    /// Chains the feedback matrices from the output side down to the input,
    /// starting from `output_pattern`.
    pub fn probe_regeneration(
        &self,
        output_pattern: &SiteVector,
    ) -> Result<SiteVector, ModelError> {
        if !self.arch.has_feedback() {
            return Err(ModelError::NoFeedbackPathway(self.arch));
        }
        let mut est = *output_pattern;
        for (k, fb) in self.feedback.iter().enumerate().rev() {
            est = activation(&mat_vec(&fb.w, &est), MatrixId::feedback(k + 1))?;
        }
        Ok(est)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::site::ZERO_MATRIX;

    fn id() -> MatrixId {
        MatrixId::forward(1)
    }

    #[test]
    fn activation_values() {
        let half = activation(&SiteVector::zeros(), id()).unwrap();
        assert_eq!(half, SiteVector::splat(0.5));

        let hi = activation(&SiteVector::splat(20.0), id()).unwrap();
        let lo = activation(&SiteVector::splat(-20.0), id()).unwrap();
        assert!(hi.iter().all(|v| (v - 1.0).abs() < 1e-8));
        assert!(lo.iter().all(|v| v.abs() < 1e-8));

        // ½(1 + tanh 1) = 0.8807970779778824...
        let one = activation(&SiteVector::splat(1.0), id()).unwrap();
        assert!(one.iter().all(|v| (v - 0.880_797).abs() < 5e-7));
    }

    #[test]
    fn activation_rejects_non_finite() {
        let mut z = SiteVector::zeros();
        z[4] = f64::NAN;
        let err = activation(&z, MatrixId::feedback(2)).unwrap_err();
        assert_eq!(
            err,
            ModelError::NonFinite {
                matrix: MatrixId::feedback(2)
            }
        );
        assert!(err.to_string().contains("feedback layer 2"));
    }

    #[test]
    fn layer_counts() {
        for arch in Architecture::ALL {
            let net = Network::new(arch, InjectionMode::Input, 3);
            assert_eq!(net.forward().len(), arch.num_forward());
            assert_eq!(net.feedback().len(), arch.num_feedback());
            assert_eq!(net.context().len(), arch.num_forward());
            assert!(net.context().iter().all(|c| *c == SiteVector::zeros()));
        }
        assert_eq!(Architecture::Ff3Fb3.output_layer(), MatrixId::forward(3));
        assert_eq!(Architecture::Ff2Only.top_feedback(), None);
    }

    #[test]
    fn supervision_assignment() {
        let net = Network::new(Architecture::Ff3Fb3, InjectionMode::Input, 1);
        let fwd: Vec<_> = net.forward().iter().map(|m| m.target).collect();
        assert_eq!(
            fwd,
            vec![
                TargetSource::None,
                TargetSource::None,
                TargetSource::TaskOutput
            ]
        );
        assert!(net
            .feedback()
            .iter()
            .all(|m| m.target == TargetSource::PairedLayerInput));
    }

    #[test]
    fn zero_weights_give_half_everywhere() {
        let mut net = Network::zeroed(Architecture::Ff2Fb2, InjectionMode::Input);
        let pass = net.forward_step(&SiteVector::one_hot(3)).unwrap();
        assert!(pass.activities.iter().all(|a| *a == SiteVector::splat(0.5)));
        let recon = net.feedback_step(&pass).unwrap();
        assert!(recon.iter().all(|r| *r == SiteVector::splat(0.5)));
        // only the hidden layer's input reconstruction becomes context
        assert_eq!(net.context()[0], SiteVector::zeros());
        assert_eq!(net.context()[1], SiteVector::splat(0.5));
        assert_eq!(net.step_counter(), 1);

        assert_eq!(
            net.probe_prediction(&SiteVector::one_hot(3)).unwrap(),
            SiteVector::splat(0.5)
        );
        assert_eq!(
            net.probe_regeneration(&SiteVector::from_sites(&[8, 9]))
                .unwrap(),
            SiteVector::splat(0.5)
        );
    }

    #[test]
    fn scaled_identity_single_layer() {
        let c = 1.7;
        let mut w = ZERO_MATRIX;
        for (i, row) in w.iter_mut().enumerate() {
            row[i] = c;
        }
        let mut net = Network::zeroed(Architecture::Ff2Only, InjectionMode::Input);
        net.forward_mut()[0].w = w;
        let pass = net.forward_step(&SiteVector::one_hot(3)).unwrap();
        for (s, v) in pass.activities[0].sites() {
            let z = if s == 3 { c } else { 0.0 };
            assert_eq!(v, 0.5 * (1.0 + f64::tanh(z)));
        }
    }

    #[test]
    fn context_enters_drive_by_mode() {
        let mut net = Network::new(Architecture::Ff2Fb2, InjectionMode::Input, 9);
        let x = SiteVector::one_hot(3);
        let first = net.forward_step(&x).unwrap();
        assert_eq!(first.drives[1], first.inputs[1]);
        let recon = net.feedback_step(&first).unwrap();
        let second = net.forward_step(&x).unwrap();
        assert_eq!(second.drives[1], second.inputs[1] + recon[1]);
        let z = net.forward()[1].apply(&second.drives[1]);
        assert_eq!(second.activities[1], z.map(phi));

        let mut pre = Network::new(Architecture::Ff2Fb2, InjectionMode::Preactivation, 9);
        let p1 = pre.forward_step(&x).unwrap();
        let r = pre.feedback_step(&p1).unwrap();
        let p2 = pre.forward_step(&x).unwrap();
        assert_eq!(p2.drives[1], p2.inputs[1]);
        let z = pre.forward()[1].apply(&p2.inputs[1]) + r[1];
        assert_eq!(p2.activities[1], z.map(phi));
    }

    #[test]
    fn regeneration_requires_feedback() {
        let net = Network::new(Architecture::Ff2Only, InjectionMode::Input, 1);
        assert_eq!(
            net.probe_regeneration(&SiteVector::from_sites(&[8, 9])),
            Err(ModelError::NoFeedbackPathway(Architecture::Ff2Only))
        );
    }

    #[test]
    fn ff2only_feedback_step_is_noop() {
        let mut net = Network::new(Architecture::Ff2Only, InjectionMode::Input, 1);
        let pass = net.forward_step(&SiteVector::one_hot(7)).unwrap();
        assert!(net.feedback_step(&pass).unwrap().is_empty());
        assert!(net.context().iter().all(|c| *c == SiteVector::zeros()));
    }

    #[test]
    fn matrix_ordering() {
        assert!(MatrixId::forward(2) < MatrixId::feedback(1));
        assert!(MatrixId::forward(1) < MatrixId::forward(2));
        let net = Network::new(Architecture::Ff2Fb2, InjectionMode::Input, 1);
        let ids: Vec<_> = net.matrices().map(|(id, _)| id).collect();
        assert_eq!(
            ids,
            vec![
                MatrixId::forward(1),
                MatrixId::forward(2),
                MatrixId::feedback(1),
                MatrixId::feedback(2)
            ]
        );
        assert!(net.matrix(MatrixId::feedback(3)).is_none());
        assert!(net.matrix(MatrixId::forward(0)).is_none());
    }
}
