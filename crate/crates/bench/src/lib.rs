//! Fixtures shared by the benchmarks.

use fbhebb_core::{update_means, Pair, SiteVector, TargetSource, WeightMatrix};

/// A forward-layer matrix with means already advanced for pair A.
pub fn primed_matrix(seed: u64) -> (WeightMatrix, SiteVector, SiteVector, SiteVector) {
    let mut m = fbhebb_core::init_weights(seed);
    m.target = TargetSource::TaskOutput;
    let x = Pair::A.input();
    let y = SiteVector::splat(0.5);
    update_means(&mut m, &x, &y, 0.01);
    (m, x, y, Pair::A.target())
}
