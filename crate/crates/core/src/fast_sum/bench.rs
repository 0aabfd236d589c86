//! Direct versus treecode timing on generated families.

use std::time::Instant;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fast_sum::{build_tree, max_relative_deviation, ExpansionParams, FastOperator};
use crate::geometry::{generate_family, BoundingBox, GeneratorConfig, SquareFamily};
use crate::kernels::{inv_sq, KernelVariant};
use crate::measure::{build_measure, build_quadrature, QuadratureCloud};
use crate::operators::direct::LinearOperator;
use crate::operators::{Field, MeasureTag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Requested node counts; each is rounded up to a whole number of squares.
    pub sizes: Vec<usize>,
    pub params: ExpansionParams,
    pub seed: u64,
    pub d: f64,
    pub packing_target: f64,
    pub n_per_side: usize,
    /// Above this many nodes the direct sum is evaluated on a random subset of
    /// targets and its full cost is extrapolated linearly in the target count.
    pub oracle_targets: usize,
}

impl BenchConfig {
    pub fn new(sizes: Vec<usize>, params: ExpansionParams, seed: u64) -> Self {
        Self {
            sizes,
            params,
            seed,
            d: 1.2,
            packing_target: 4.0,
            n_per_side: 16,
            oracle_targets: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub t_direct_ms: f64,
    pub t_fast_ms: f64,
    pub speedup: f64,
    pub max_rel_err: f64,
    pub p: usize,
    pub theta: f64,
    pub seed: u64,
    /// Whether `t_direct_ms` was extrapolated from a target subset.
    #[serde(skip)]
    pub direct_extrapolated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of `log t_fast` against `log N`.
    pub fast_cost_exponent: f64,
    pub direct_cost_exponent: f64,
    /// Largest `max_rel_err / theta^p` over the rows.
    pub empirical_cexp: f64,
}

impl BenchReport {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A family of unit squares with roughly `nodes / n_per_side^2` members,
/// spread over a box large enough for the packing bound to be met.
pub fn bench_family(nodes: usize, d: f64, packing_target: f64, n_per_side: usize, seed: u64) -> Result<SquareFamily> {
    if n_per_side == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let m = nodes.div_ceil(n_per_side * n_per_side).max(1);
    // M unit squares inside a side-L ancestor have ratio M / L^(2-d).
    let side = (2.0 * (m as f64 / packing_target).powf(1.0 / (2.0 - d))).max(10.0 * (m as f64).sqrt());
    let side = side.log2().ceil().exp2();
    let cfg = GeneratorConfig::new(seed, m, d, packing_target)
        .generations(0, 0)
        .bounding_box(BoundingBox::square(side));
    Ok(generate_family(&cfg)?.family)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64() * 1e3)
}

/// Independent direct evaluation of the modified operator on selected targets.
fn direct_on_targets(cloud: &QuadratureCloud, f: &[Complex64], targets: &[usize]) -> Vec<Complex64> {
    let pos = cloud.positions();
    let sq = cloud.square_indices();
    let charges: Vec<Complex64> = (0..cloud.len())
        .map(|q| f[q] * cloud.mu_weights()[q] * cloud.squares()[sq[q] as usize].side_pow_d)
        .collect();
    targets
        .par_iter()
        .map(|&p| {
            let mut acc = Complex64::new(0.0, 0.0);
            for q in 0..pos.len() {
                if sq[q] != sq[p] {
                    acc += charges[q] * inv_sq(pos[p] - pos[q]);
                }
            }
            acc
        })
        .collect()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if den == 0.0 {
        f64::NAN
    } else {
        num / den
    }
}

pub fn benchmark(config: &BenchConfig) -> Result<BenchReport> {
    if config.sizes.is_empty() {
        return Err(invalid("sizes", "at least one size is required"));
    }
    config.params.validate()?;
    let mut rows = Vec::with_capacity(config.sizes.len());
    for (idx, &size) in config.sizes.iter().enumerate() {
        let seed = config.seed.wrapping_add(idx as u64);
        let family = bench_family(size, config.d, config.packing_target, config.n_per_side, seed)?;
        let cloud = build_quadrature(&build_measure(family), config.n_per_side)?;
        let n = cloud.len();
        let f = Field::random_complex(n, seed, MeasureTag::Mu).values;

        let (fast, t_fast_ms) = timed(|| {
            let tree = build_tree(&cloud, config.params.leaf_cap)?;
            let op = FastOperator::new(&cloud, &tree, KernelVariant::Modified, config.params)?;
            Ok::<_, crate::error::Error>(op.apply(&f))
        });
        let fast = fast?;

        let extrapolated = n > config.oracle_targets;
        let targets: Vec<usize> = if extrapolated {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut t = sample(&mut rng, n, config.oracle_targets).into_vec();
            t.sort_unstable();
            t
        } else {
            (0..n).collect()
        };
        let (direct, t_sub) = timed(|| direct_on_targets(&cloud, &f, &targets));
        let t_direct_ms = t_sub * n as f64 / targets.len() as f64;
        let fast_sub: Vec<Complex64> = targets.iter().map(|&p| fast[p]).collect();
        let max_rel_err = max_relative_deviation(&fast_sub, &direct);
        rows.push(BenchRow {
            n,
            t_direct_ms,
            t_fast_ms,
            speedup: t_direct_ms / t_fast_ms,
            max_rel_err,
            p: config.params.order,
            theta: config.params.theta,
            seed,
            direct_extrapolated: extrapolated,
        });
    }
    let logn: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let fast_cost_exponent = slope(&logn, &rows.iter().map(|r| r.t_fast_ms.ln()).collect::<Vec<_>>());
    let direct_cost_exponent = slope(&logn, &rows.iter().map(|r| r.t_direct_ms.ln()).collect::<Vec<_>>());
    let factor = config.params.error_factor();
    let empirical_cexp = rows.iter().fold(0.0f64, |m, r| m.max(r.max_rel_err / factor));
    Ok(BenchReport {
        rows,
        fast_cost_exponent,
        direct_cost_exponent,
        empirical_cexp,
    })
}
