use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::plasticity::TargetSource;
use crate::site::{mat_vec, Matrix, SiteVector, SITES, ZERO_MATRIX};

/// Fan-in of every learned matrix.
pub const FAN_IN: usize = SITES;

/// Half-width of the uniform initialisation interval, `sqrt(6 / fan_in)`.
pub fn init_bound() -> f64 {
    (6.0 / FAN_IN as f64).sqrt()
}

/// A learned 10x10 synaptic matrix with its running-mean state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    pub w: Matrix,
    /// Running mean of the presynaptic (input) activity.
    pub mean_in: SiteVector,
    /// Running mean of the postsynaptic (output) activity.
    pub mean_out: SiteVector,
    pub target: TargetSource,
}

impl WeightMatrix {
    pub fn zeros(target: TargetSource) -> Self {
        WeightMatrix {
            w: ZERO_MATRIX,
            mean_in: SiteVector::zeros(),
            mean_out: SiteVector::zeros(),
            target,
        }
    }

    pub fn from_weights(w: Matrix, target: TargetSource) -> Self {
        WeightMatrix {
            w,
            ..Self::zeros(target)
        }
    }

    /// Draws every entry from `U[-b, b]` with `b = sqrt(6 / fan_in)`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, target: TargetSource) -> Self {
        let b = init_bound();
        let dist = Uniform::new_inclusive(-b, b);
        let mut w = ZERO_MATRIX;
        for row in w.iter_mut() {
            for v in row.iter_mut() {
                *v = dist.sample(rng);
            }
        }
        Self::from_weights(w, target)
    }

    /// Whether an explicit target drives this matrix's supervised term.
    pub fn supervised(&self) -> bool {
        self.target != TargetSource::None
    }

    pub fn apply(&self, x: &SiteVector) -> SiteVector {
        mat_vec(&self.w, x)
    }

    pub fn max_abs(&self) -> f64 {
        self.w
            .iter()
            .flat_map(|row| row.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn add_assign(&mut self, delta: &Matrix) {
        for (row, drow) in self.w.iter_mut().zip(delta.iter()) {
            for (v, d) in row.iter_mut().zip(drow.iter()) {
                *v += d;
            }
        }
    }
}

/// Standalone initialiser: one matrix from its own seed, means zeroed.
pub fn init_weights(seed: u64) -> WeightMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    WeightMatrix::random(&mut rng, TargetSource::None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_within_bound() {
        // sqrt(6/10) = 0.774596669241483...
        assert!((init_bound() - 0.774_596_669_241_483_4).abs() < 1e-15);
        for seed in 0..20 {
            let m = init_weights(seed);
            assert!(m.max_abs() <= init_bound());
        }
    }

    #[test]
    fn seeded_init_is_deterministic() {
        let a = init_weights(42);
        let b = init_weights(42);
        let bits =
            |m: &WeightMatrix| -> Vec<u64> { m.w.iter().flatten().map(|v| v.to_bits()).collect() };
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn distinct_seeds_differ() {
        assert_ne!(init_weights(1).w, init_weights(2).w);
    }

    #[test]
    fn means_start_at_zero() {
        let m = init_weights(7);
        assert_eq!(m.mean_in, SiteVector::zeros());
        assert_eq!(m.mean_out, SiteVector::zeros());
    }
}
