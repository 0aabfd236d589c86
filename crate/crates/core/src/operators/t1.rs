use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::measure::{dyadic_ladder, BallQuery, BallSample, QuadratureCloud};
use crate::operators::direct::{DirectOperator, LinearOperator};
use crate::operators::field::weighted_norm_sqr;
use crate::kernels::KernelVariant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct T1Report {
    /// `sup ||T chi_B||^2 / mu(B)` for the modified operator.
    pub sup_t: f64,
    /// The same for its adjoint.
    pub sup_tadj: f64,
    pub witness_t: Option<BallQuery>,
    pub witness_tadj: Option<BallQuery>,
    pub balls_tested: usize,
    /// Balls containing no node.
    pub balls_skipped: usize,
    pub sample: String,
}

/// Square centers (at most `max_centers`, chosen with `seed` when there are more)
/// crossed with the dyadic ladder from the smallest side to the diameter.
pub fn square_center_sample(cloud: &QuadratureCloud, max_centers: usize, seed: u64) -> BallSample {
    let mut centers: Vec<Complex64> = cloud.squares().iter().map(|s| (s.lo + s.hi) * 0.5).collect();
    if centers.len() > max_centers {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        centers.shuffle(&mut rng);
        centers.truncate(max_centers);
    }
    BallSample {
        centers,
        radii: dyadic_ladder(cloud.min_side(), cloud.diameter()),
    }
}

/// Testing conditions over sampled balls with the direct operators.
pub fn t1_testing(cloud: &QuadratureCloud, sample: &BallSample) -> T1Report {
    let t = DirectOperator::new(cloud, KernelVariant::Modified);
    let t_adj = DirectOperator::new(cloud, KernelVariant::Adjoint);
    t1_testing_with(cloud, sample, &t, &t_adj)
}

/// Testing conditions with caller-supplied operators (e.g. treecode-backed).
/// `t_adj` must realize the adjoint kernel; for indicator inputs its output
/// norm equals that of the formal adjoint.
pub fn t1_testing_with(
    cloud: &QuadratureCloud,
    sample: &BallSample,
    t: &dyn LinearOperator,
    t_adj: &dyn LinearOperator,
) -> T1Report {
    let mu = cloud.mu_weights();
    let mut report = T1Report {
        sup_t: 0.0,
        sup_tadj: 0.0,
        witness_t: None,
        witness_tadj: None,
        balls_tested: 0,
        balls_skipped: 0,
        sample: sample.describe(),
    };
    for &center in &sample.centers {
        for &radius in &sample.radii {
            let ball = BallQuery { center, radius };
            let nodes = cloud.nodes_in_ball(&ball);
            if nodes.is_empty() {
                report.balls_skipped += 1;
                continue;
            }
            report.balls_tested += 1;
            let mass: f64 = nodes.iter().map(|&q| mu[q]).sum();
            let mut chi = vec![Complex64::new(0.0, 0.0); cloud.len()];
            for &q in &nodes {
                chi[q] = Complex64::new(1.0, 0.0);
            }
            let a = weighted_norm_sqr(&t.apply(&chi), mu) / mass;
            if a > report.sup_t {
                report.sup_t = a;
                report.witness_t = Some(ball);
            }
            let b = weighted_norm_sqr(&t_adj.apply(&chi), mu) / mass;
            if b > report.sup_tadj {
                report.sup_tadj = b;
                report.witness_tadj = Some(ball);
            }
        }
    }
    report
}
