//! Seed-independent exact checks bundled into the acceptance report.
//!
//! The update-rule oracle here is a scalar, entry-at-a-time evaluation kept
//! separate from `fbhebb_core::delta_w`.

use fbhebb_core::metrics::retention_value;
use fbhebb_core::{
    connectivity, delta_w, phi, train_step, update_means, Architecture, Direction, InjectionMode,
    Matrix, Network, Pair, RuleParams, RuleTerms, RuleVariant, SiteVector, TargetSource,
    WeightMatrix, RETENTION_EPS, SITES,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::runner::{execute, summarize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: impl Into<String>) -> PropertyCheck {
    PropertyCheck {
        name: name.to_string(),
        passed,
        detail: detail.into(),
    }
}

/// One entry of the rule, written out term by term.
#[allow(clippy::too_many_arguments)]
pub fn oracle_entry(
    w: f64,
    x_c: f64,
    y_r: f64,
    t_r: f64,
    mean_x_c: f64,
    mean_y_r: f64,
    lr: f64,
    beta: f64,
) -> f64 {
    let centred_out = y_r - mean_y_r;
    let centred_in = x_c - mean_x_c;
    let hebb = centred_out * centred_in;
    let oja = beta * centred_out * centred_out * w;
    let drive = (t_r - y_r) * x_c;
    lr * (hebb - oja + drive)
}

struct RandomState {
    m: WeightMatrix,
    x: SiteVector,
    y: SiteVector,
    t: SiteVector,
}

fn random_vec(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> SiteVector {
    SiteVector(std::array::from_fn(|_| rng.gen_range(lo..hi)))
}

fn random_state(rng: &mut ChaCha8Rng) -> RandomState {
    let mut m = WeightMatrix::random(rng, TargetSource::TaskOutput);
    m.mean_in = random_vec(rng, 0.0, 1.0);
    m.mean_out = random_vec(rng, 0.0, 1.0);
    RandomState {
        x: random_vec(rng, 0.0, 2.0),
        y: random_vec(rng, 0.0, 1.0),
        t: SiteVector(std::array::from_fn(|_| f64::from(rng.gen_range(0..2u8)))),
        m,
    }
}

const TRIALS: usize = 200;

pub fn supervision_neutrality() -> PropertyCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let p = RuleParams::default();
    let no_sup = RuleTerms {
        supervised: false,
        ..RuleTerms::ALL
    };
    let ok = (0..TRIALS).all(|_| {
        let s = random_state(&mut rng);
        delta_w(&s.m, &s.x, &s.y, &s.y, &p, RuleTerms::ALL)
            == delta_w(&s.m, &s.x, &s.y, &s.y, &p, no_sup)
    });
    check(
        "supervision neutrality (t = y)",
        ok,
        format!("{TRIALS} random states, exact equality"),
    )
}

pub fn variant_zeroing() -> PropertyCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let p = RuleParams::default();
    let only_sup = RuleTerms {
        covariance: false,
        decay: false,
        supervised: true,
    };
    let ok = (0..TRIALS).all(|_| {
        let s = random_state(&mut rng);
        delta_w(&s.m, &s.x, &s.y, &s.y, &p, only_sup)
            .iter()
            .flatten()
            .all(|&v| v == 0.0)
    });
    check(
        "no-cov + no-decay + t = y gives zero update",
        ok,
        format!("{TRIALS} random states"),
    )
}

pub fn activation_bounds() -> PropertyCheck {
    let mut prev = 0.0;
    let mut ok = true;
    for i in -1500..=1500 {
        let v = phi(f64::from(i) / 100.0);
        ok &= v > 0.0 && v < 1.0 && v > prev;
        prev = v;
    }
    // a full default run checks every activity against (0, 1) at every step
    let run = execute(&RunConfig::default());
    check(
        "activation bounded in (0, 1)",
        ok && run.is_ok(),
        "phi strictly increasing on [-15, 15]; full sequential run completed without range violations",
    )
}

pub fn probe_purity() -> PropertyCheck {
    let mut ok = true;
    for arch in Architecture::ALL {
        let mut net = Network::new(arch, InjectionMode::Input, 7);
        for i in 0..37 {
            let pair = if i % 3 == 0 { Pair::B } else { Pair::A };
            let _ = train_step(
                &mut net,
                &pair.input(),
                &pair.target(),
                &RuleParams::default(),
                RuleVariant::Full,
            );
        }
        let before = net.snapshot().to_json();
        for pair in Pair::ALL {
            let _ = net.probe_prediction(&pair.input());
            let _ = net.probe_regeneration(&pair.target());
        }
        let _ = fbhebb_core::peak_weight(&net);
        for (_, m) in net.matrices() {
            let _ = connectivity(&m.w, Direction::Input);
        }
        ok &= net.snapshot().to_json() == before;
    }
    check(
        "probe and metric purity",
        ok,
        "snapshot JSON identical before/after probes and metrics",
    )
}

pub fn running_mean_closed_form() -> PropertyCheck {
    let alpha = 0.01;
    let x = SiteVector::from([0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 0.3, 0.9, 0.6, 0.05]);
    let mut worst: f64 = 0.0;
    for n in [1, 10, 100] {
        let mut m = WeightMatrix::zeros(TargetSource::None);
        for _ in 0..n {
            update_means(&mut m, &x, &x, alpha);
        }
        let scale = 1.0 - (1.0 - alpha).powi(n);
        for i in 0..SITES {
            worst = worst.max((m.mean_in.0[i] - scale * x.0[i]).abs());
            worst = worst.max((m.mean_out.0[i] - scale * x.0[i]).abs());
        }
    }
    check(
        "running mean matches closed form",
        worst <= 1e-12,
        format!("max deviation {worst:.3e} over n in {{1, 10, 100}} (tolerance 1e-12)"),
    )
}

pub fn determinism() -> PropertyCheck {
    let cfg = RunConfig::default();
    match (execute(&cfg), execute(&cfg)) {
        (Ok(a), Ok(b)) => {
            let same_csv = a.record.connectivity.to_csv() == b.record.connectivity.to_csv();
            let same_summary = serde_json::to_string(&summarize(&a)).ok()
                == serde_json::to_string(&summarize(&b)).ok();
            let same_net = a.network.snapshot().to_json() == b.network.snapshot().to_json();
            check(
                "determinism",
                same_csv && same_summary && same_net,
                "two runs of the default config: trajectory CSV, summary and final snapshot byte-identical",
            )
        }
        (Err(e), _) | (_, Err(e)) => check("determinism", false, e.to_string()),
    }
}

pub fn connectivity_linearity() -> PropertyCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst: f64 = 0.0;
    for _ in 0..TRIALS {
        let w1 = WeightMatrix::random(&mut rng, TargetSource::None).w;
        let w2 = WeightMatrix::random(&mut rng, TargetSource::None).w;
        let a: f64 = rng.gen_range(-3.0..3.0);
        let b: f64 = rng.gen_range(-3.0..3.0);
        let mix: Matrix =
            std::array::from_fn(|r| std::array::from_fn(|c| a * w1[r][c] + b * w2[r][c]));
        for d in [Direction::Input, Direction::Output] {
            let lhs = connectivity(&mix, d);
            let (c1, c2) = (connectivity(&w1, d), connectivity(&w2, d));
            for i in 0..SITES {
                worst = worst.max((lhs.0[i] - (a * c1.0[i] + b * c2.0[i])).abs());
            }
        }
    }
    check(
        "connectivity linearity",
        worst <= 1e-12,
        format!("max deviation {worst:.3e} (tolerance 1e-12)"),
    )
}

pub fn retention_algebra() -> PropertyCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    // values on a 1/1024 grid with small integer shifts keep every
    // difference exact
    let grid = |rng: &mut ChaCha8Rng| f64::from(rng.gen_range(-4096..4096)) / 1024.0;
    let mut shift_ok = true;
    let mut scale_ok = true;
    for _ in 0..TRIALS {
        let (c0, pre, post) = (grid(&mut rng), grid(&mut rng), grid(&mut rng));
        let r = retention_value(c0, pre, post, RETENTION_EPS);
        let k = f64::from(rng.gen_range(-8..8));
        shift_ok &= retention_value(c0 + k, pre + k, post + k, RETENTION_EPS) == r;
        for s in [0.25, 2.0, 8.0] {
            scale_ok &= retention_value(s * c0, s * pre, s * post, RETENTION_EPS) == r;
            scale_ok &=
                retention_value(-s * c0, -s * pre, -s * post, RETENTION_EPS) == r.map(|v| -v);
        }
    }
    check(
        "retention shift/scale algebra",
        shift_ok && scale_ok,
        "shift by k leaves R unchanged; scaling by s multiplies R by sign(s); exact on a dyadic grid",
    )
}

#[allow(clippy::needless_range_loop)]
pub fn rule_matches_scalar_oracle() -> PropertyCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut worst: f64 = 0.0;
    let mut compare = |s: &RandomState, p: &RuleParams| {
        let dw = delta_w(&s.m, &s.x, &s.y, &s.t, p, RuleTerms::ALL);
        for r in 0..SITES {
            for c in 0..SITES {
                let o = oracle_entry(
                    s.m.w[r][c],
                    s.x.0[c],
                    s.y.0[r],
                    s.t.0[r],
                    s.m.mean_in.0[c],
                    s.m.mean_out.0[r],
                    p.lr,
                    p.beta,
                );
                worst = worst.max((dw[r][c] - o).abs());
            }
        }
    };
    for _ in 0..TRIALS {
        let s = random_state(&mut rng);
        let p = RuleParams {
            lr: rng.gen_range(1e-4..1e-1),
            beta: rng.gen_range(0.0..2.0),
            alpha: 0.01,
        };
        compare(&s, &p);
    }
    // zero weights, one mean update with x = e3, y = 0.5, t = {8, 9}
    let mut m = WeightMatrix::zeros(TargetSource::TaskOutput);
    let x = Pair::A.input();
    let y = SiteVector::splat(0.5);
    update_means(&mut m, &x, &y, 0.01);
    compare(
        &RandomState {
            m,
            x,
            y,
            t: Pair::A.target(),
        },
        &RuleParams::default(),
    );
    check(
        "update rule matches scalar oracle",
        worst <= 1e-12,
        format!("max deviation {worst:.3e} (tolerance 1e-12)"),
    )
}

pub fn run_all() -> Vec<PropertyCheck> {
    vec![
        supervision_neutrality(),
        variant_zeroing(),
        activation_bounds(),
        probe_purity(),
        running_mean_closed_form(),
        determinism(),
        connectivity_linearity(),
        retention_algebra(),
        rule_matches_scalar_oracle(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_property_holds() {
        for c in run_all() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn oracle_hand_case() {
        // after one mean step: <x> = 0.01 e3, <y> = 0.005; row 8, column 3
        let v = oracle_entry(0.0, 1.0, 0.5, 1.0, 0.01, 0.005, 0.001, 1.0);
        let expect = 0.001 * (0.495 * 0.99 + 0.5);
        assert!((v - expect).abs() < 1e-15);
    }
}
