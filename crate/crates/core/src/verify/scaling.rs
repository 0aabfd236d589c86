use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{check_domination, check_main_inequality, trial_seed, Backend, Instance, NormConfig};
use crate::error::{invalid, Result};
use crate::fast_sum::ExpansionParams;
use crate::geometry::{generate_family, BoundingBox, GeneratorConfig};
use crate::kernels::KernelVariant;
use crate::measure::{growth_constant, BallSample};
use crate::operators::{maximal_function, square_center_sample, t1_testing_with, Field, MeasureTag, DEFAULT_KAPPA};

/// Parameters of a scaling ladder. Each rung draws `M` squares of generations
/// `k_min..=k_max` in the box `[0, box_factor * sqrt(M) * 2^-k_min)^2`, so the
/// number of squares per unit area is the same on every rung.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub d: f64,
    pub packing_target: f64,
    pub ladder: Vec<usize>,
    pub n_per_side: usize,
    pub seed: u64,
    pub k_min: i32,
    pub k_max: i32,
    pub box_factor: f64,
    /// Random fields per rung for the domination and maximal-operator columns.
    pub trials: usize,
    /// Ball centers per rung for the testing conditions.
    pub t1_centers: usize,
    pub tol: f64,
    pub params: ExpansionParams,
}

impl ScalingConfig {
    pub fn new(d: f64, ladder: Vec<usize>, seed: u64) -> Self {
        Self {
            d,
            packing_target: 4.0,
            ladder,
            n_per_side: 8,
            seed,
            k_min: 0,
            k_max: 3,
            box_factor: 4.0,
            trials: 2,
            t1_centers: 8,
            tol: 1e-6,
            params: ExpansionParams::default(),
        }
    }

    fn bounding_box(&self, m: usize) -> BoundingBox {
        BoundingBox::square(self.box_factor * (m as f64).sqrt() * (-self.k_min as f64).exp2())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    #[serde(rename = "M")]
    pub m: usize,
    pub squares: usize,
    /// `false` when the generator ran out of attempts before `M` squares.
    pub complete: bool,
    pub nodes: usize,
    #[serde(rename = "C_pack")]
    pub c_pack: f64,
    #[serde(rename = "C_growth")]
    pub c_growth: f64,
    pub sigma_max: f64,
    pub converged: bool,
    #[serde(rename = "C_dom")]
    pub c_dom: f64,
    #[serde(rename = "C_M")]
    pub c_m: f64,
    #[serde(rename = "sup_T")]
    pub sup_t: f64,
    #[serde(rename = "sup_Tadj")]
    pub sup_tadj: f64,
}

/// Wall-clock times per rung, kept apart from the deterministic table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTiming {
    #[serde(rename = "M")]
    pub m: usize,
    pub t_generate_ms: f64,
    pub t_growth_ms: f64,
    pub t_norm_ms: f64,
    pub t_domination_ms: f64,
    pub t_maximal_ms: f64,
    pub t_t1_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub config: ScalingConfig,
    pub rows: Vec<ScalingRow>,
    pub timings: Vec<ScalingTiming>,
}

impl ScalingStudy {
    pub fn table_csv(&self) -> Result<Vec<u8>> {
        to_csv(&self.rows)
    }

    pub fn timings_csv(&self) -> Result<Vec<u8>> {
        to_csv(&self.timings)
    }

    /// `max / median` of the `sigma_max` column.
    pub fn sigma_spread(&self) -> f64 {
        max_over_median(self.rows.iter().map(|r| r.sigma_max))
    }
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| crate::error::Error::Io(e.into_error()))
}

/// `max / median` of a sample (the median of an even sample is the mean of
/// the two central values); `NaN` for an empty sample or a zero median.
pub fn max_over_median(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
    if median == 0.0 {
        f64::NAN
    } else {
        v[n - 1] / median
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn scaling_study(config: &ScalingConfig) -> Result<ScalingStudy> {
    if config.ladder.is_empty() {
        return Err(invalid("M", "the ladder must contain at least one size"));
    }
    if !(config.box_factor > 0.0) {
        return Err(invalid("box_factor", "must be positive"));
    }
    let norm_cfg = NormConfig {
        trials: config.trials,
        seed: config.seed,
        tol: config.tol,
        max_iter: crate::operators::norm::DEFAULT_MAX_ITER,
    };
    let mut rows = Vec::with_capacity(config.ladder.len());
    let mut timings = Vec::with_capacity(config.ladder.len());
    for &m in &config.ladder {
        let t = Instant::now();
        let gen = generate_family(
            &GeneratorConfig::new(config.seed, m, config.d, config.packing_target)
                .generations(config.k_min, config.k_max)
                .bounding_box(config.bounding_box(m)),
        )?;
        let c_pack = gen.family.packing_constant();
        let squares = gen.family.len();
        let inst = Instance::with_backend(gen.family, config.n_per_side, Backend::Auto)?;
        let inst = match inst.backend() {
            Backend::Fast(_) => Instance::with_backend(inst.family, config.n_per_side, Backend::Fast(config.params))?,
            _ => inst,
        };
        let t_generate_ms = ms(t);

        let t = Instant::now();
        let c_growth = growth_constant(&inst.cloud, &BallSample::default_for(&inst.cloud)).constant;
        let t_growth_ms = ms(t);

        let t = Instant::now();
        let norm = check_main_inequality(&inst, &norm_cfg)?;
        let t_norm_ms = ms(t);

        let t = Instant::now();
        let dom = check_domination(&inst, config.trials, config.seed)?;
        let t_domination_ms = ms(t);

        let t = Instant::now();
        let mut c_m = 0.0f64;
        for k in 0..config.trials {
            let f = Field::random_nonnegative(inst.cloud.len(), trial_seed(config.seed, k), MeasureTag::Mu);
            let mf = maximal_function(&inst.cloud, &f, DEFAULT_KAPPA)?;
            c_m = c_m.max(mf.norm(&inst.cloud) / f.norm(&inst.cloud));
        }
        let t_maximal_ms = ms(t);

        let t = Instant::now();
        let sample = square_center_sample(&inst.cloud, config.t1_centers, config.seed);
        let op_t = inst.operator(KernelVariant::Modified)?;
        let op_adj = inst.operator(KernelVariant::Adjoint)?;
        let t1 = t1_testing_with(&inst.cloud, &sample, op_t.as_ref(), op_adj.as_ref());
        let t_t1_ms = ms(t);

        rows.push(ScalingRow {
            m,
            squares,
            complete: gen.complete,
            nodes: inst.cloud.len(),
            c_pack,
            c_growth,
            sigma_max: norm.constant("sigma_max"),
            converged: norm.details.get("converged").and_then(|v| v.as_bool()).unwrap_or(false),
            c_dom: dom.constant("C_dom"),
            c_m,
            sup_t: t1.sup_t,
            sup_tadj: t1.sup_tadj,
        });
        timings.push(ScalingTiming {
            m,
            t_generate_ms,
            t_growth_ms,
            t_norm_ms,
            t_domination_ms,
            t_maximal_ms,
            t_t1_ms,
        });
    }
    Ok(ScalingStudy {
        config: config.clone(),
        rows,
        timings,
    })
}
