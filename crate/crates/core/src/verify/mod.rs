//! Verification checks assembled into reproducible JSON reports.

mod domination;
mod scaling;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, Result};
use crate::fast_sum::{build_tree, ExpansionParams, FastOperator, QuadTree};
use crate::geometry::SquareFamily;
use crate::io::sha256_hex;
use crate::kernels::KernelVariant;
use crate::measure::{build_measure, build_quadrature, QuadratureCloud};
use crate::operators::direct::{DirectOperator, LinearOperator};
use crate::operators::field::weighted_norm_sqr;
use crate::operators::norm::{DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};
use crate::operators::{apply_direct, operator_norm, Field, MeasureTag};

pub use domination::{audit_annuli, check_domination, AnnulusAudit, AnnulusDiagnostic};
pub use scaling::{max_over_median, scaling_study, ScalingConfig, ScalingRow, ScalingStudy, ScalingTiming};

pub const SCHEMA: &str = "nhcz/1";

/// Clouds larger than this use the treecode under [`Backend::Auto`].
pub const DIRECT_MAX_NODES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    Auto,
    Direct,
    Fast(ExpansionParams),
}

/// A family together with its quadrature cloud and, when needed, a tree.
pub struct Instance {
    pub family: SquareFamily,
    pub cloud: QuadratureCloud,
    backend: Backend,
    tree: Option<QuadTree>,
}

impl Instance {
    pub fn new(family: SquareFamily, n_per_side: usize) -> Result<Self> {
        Self::with_backend(family, n_per_side, Backend::Auto)
    }

    pub fn with_backend(family: SquareFamily, n_per_side: usize, backend: Backend) -> Result<Self> {
        let cloud = build_quadrature(&build_measure(family.clone()), n_per_side)?;
        let backend = match backend {
            Backend::Auto if cloud.len() > DIRECT_MAX_NODES => Backend::Fast(ExpansionParams::default()),
            Backend::Auto => Backend::Direct,
            b => b,
        };
        let tree = match backend {
            Backend::Fast(p) => Some(build_tree(&cloud, p.leaf_cap)?),
            _ => None,
        };
        Ok(Self { family, cloud, backend, tree })
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// The modified or adjoint operator on the selected backend; the full and
    /// local kernels always use direct summation.
    pub fn operator(&self, variant: KernelVariant) -> Result<Box<dyn LinearOperator + '_>> {
        match (self.backend, &self.tree) {
            (Backend::Fast(p), Some(tree)) if variant.uses_mu_weights() => {
                Ok(Box::new(FastOperator::new(&self.cloud, tree, variant, p)?))
            }
            _ => Ok(Box::new(DirectOperator::new(&self.cloud, variant))),
        }
    }

    pub fn family_digest(&self) -> String {
        sha256_hex(self.family.to_file().to_json().as_bytes())
    }

    pub fn inputs(&self, seeds: Vec<u64>, params: BTreeMap<String, f64>) -> InputsDigest {
        InputsDigest::new(self.family_digest(), self.family.d(), self.cloud.n_per_side(), seeds, params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputsDigest {
    /// SHA-256 of the family file serialization.
    pub family_sha256: String,
    pub d: f64,
    pub n_per_side: usize,
    pub seeds: Vec<u64>,
    pub params: BTreeMap<String, f64>,
    /// SHA-256 over all of the above.
    pub digest: String,
}

impl InputsDigest {
    pub fn new(family_sha256: String, d: f64, n_per_side: usize, seeds: Vec<u64>, params: BTreeMap<String, f64>) -> Self {
        let body = serde_json::json!({
            "family_sha256": family_sha256,
            "d": d,
            "n_per_side": n_per_side,
            "seeds": seeds,
            "params": params,
        });
        let digest = sha256_hex(body.to_string().as_bytes());
        Self {
            family_sha256,
            d,
            n_per_side,
            seeds,
            params,
            digest,
        }
    }
}

/// Outcome of one check. Everything except `runtime_ms` is a deterministic
/// function of the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub check: String,
    pub inputs: InputsDigest,
    pub constants: BTreeMap<String, f64>,
    pub thresholds: BTreeMap<String, f64>,
    pub witnesses: BTreeMap<String, Value>,
    pub details: BTreeMap<String, Value>,
    pub pass: bool,
    pub runtime_ms: f64,
}

impl VerificationReport {
    pub fn new(check: &str, inputs: InputsDigest) -> Self {
        Self {
            schema: SCHEMA.into(),
            check: check.into(),
            inputs,
            constants: BTreeMap::new(),
            thresholds: BTreeMap::new(),
            witnesses: BTreeMap::new(),
            details: BTreeMap::new(),
            pass: true,
            runtime_ms: 0.0,
        }
    }

    pub fn constant(&self, name: &str) -> f64 {
        self.constants.get(name).copied().unwrap_or(f64::NAN)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// The report with the wall-clock field cleared, for reproducibility comparisons.
    pub fn without_runtime(&self) -> Self {
        Self {
            runtime_ms: 0.0,
            ..self.clone()
        }
    }

    fn finish(mut self, start: Instant) -> Self {
        self.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
        self
    }
}

/// Seed of the `t`-th trial field of a check.
pub(crate) fn trial_seed(seed: u64, t: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(t as u64 + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormConfig {
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NormConfig {
    fn default() -> Self {
        Self {
            trials: 8,
            seed: 0,
            tol: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// `sigma_max^2` of the adjoint-kernel operator on `L^2(mu)` and the largest
/// Rayleigh ratio `||T' f||^2 / ||f||^2` over seeded random fields.
pub fn check_main_inequality(inst: &Instance, cfg: &NormConfig) -> Result<VerificationReport> {
    let start = Instant::now();
    let params = BTreeMap::from([
        ("trials".to_string(), cfg.trials as f64),
        ("tol".to_string(), cfg.tol),
        ("max_iter".to_string(), cfg.max_iter as f64),
    ]);
    let mut report = VerificationReport::new("main_inequality", inst.inputs(vec![cfg.seed], params));
    let op = inst.operator(KernelVariant::Adjoint)?;
    let est = operator_norm(op.as_ref(), cfg.tol, cfg.max_iter, cfg.seed)?;
    let sigma_sq = est.sigma_max * est.sigma_max;
    let mu = inst.cloud.mu_weights();
    let mut best = (0.0f64, None);
    for t in 0..cfg.trials {
        let f = Field::random_complex(inst.cloud.len(), trial_seed(cfg.seed, t), MeasureTag::Mu);
        let ratio = weighted_norm_sqr(&op.apply(&f.values), mu) / f.norm_sqr(&inst.cloud);
        if ratio > best.0 || best.1.is_none() {
            best = (ratio, Some(t));
        }
    }
    report.constants.insert("sigma_max".into(), est.sigma_max);
    report.constants.insert("sigma_max_sq".into(), sigma_sq);
    report.constants.insert("random_field_max".into(), best.0);
    report.constants.insert("iterations".into(), est.iterations as f64);
    report.constants.insert("residual".into(), est.residual);
    report.thresholds.insert("random_field_max".into(), sigma_sq + cfg.tol);
    if let Some(t) = best.1 {
        report.witnesses.insert("trial".into(), serde_json::json!({ "index": t, "seed": trial_seed(cfg.seed, t) }));
    }
    report.details.insert("backend".into(), Value::String(format!("{:?}", inst.backend())));
    report.details.insert("converged".into(), Value::Bool(est.converged));
    report.pass = est.converged && best.0 <= sigma_sq + cfg.tol;
    Ok(report.finish(start))
}

/// `max_p |t f - (K f + t0 f)|` over random complex fields and one delta field,
/// relative to `max_p |t f|`.
pub fn check_decomposition(inst: &Instance, trials: usize, seed: u64) -> Result<VerificationReport> {
    let start = Instant::now();
    let params = BTreeMap::from([("trials".to_string(), trials as f64)]);
    let mut report = VerificationReport::new("decomposition", inst.inputs(vec![seed], params));
    let n = inst.cloud.len();
    let mut fields: Vec<(String, Field)> = (0..trials)
        .map(|t| (format!("random:{t}"), Field::random_complex(n, trial_seed(seed, t), MeasureTag::M2)))
        .collect();
    fields.push(("delta:0".into(), Field::delta(n, 0, MeasureTag::M2)));
    let mut worst = (0.0f64, String::new(), 0usize);
    let mut worst_abs = 0.0f64;
    for (name, f) in &fields {
        let (dev, abs, node) = decomposition_deviation(&inst.cloud, f)?;
        worst_abs = worst_abs.max(abs);
        if dev > worst.0 || worst.1.is_empty() {
            worst = (dev, name.clone(), node);
        }
    }
    report.constants.insert("max_relative_deviation".into(), worst.0);
    report.constants.insert("max_absolute_deviation".into(), worst_abs);
    report.thresholds.insert("max_relative_deviation".into(), 1e-12);
    report
        .witnesses
        .insert("field".into(), serde_json::json!({ "name": worst.1, "node": worst.2 }));
    report.pass = worst.0 <= 1e-12;
    Ok(report.finish(start))
}

/// `(relative, absolute, node)` deviation of the decomposition identity for one field.
pub fn decomposition_deviation(cloud: &QuadratureCloud, f: &Field) -> Result<(f64, f64, usize)> {
    let full = apply_direct(cloud, KernelVariant::Full, f)?;
    let modified = apply_direct(cloud, KernelVariant::Modified, f)?;
    let local = apply_direct(cloud, KernelVariant::Local, f)?;
    let scale = full.max_abs();
    let mut worst = (0.0f64, 0usize);
    for p in 0..cloud.len() {
        let e = (full.values[p] - (modified.values[p] + local.values[p])).norm();
        if e > worst.0 {
            worst = (e, p);
        }
    }
    let rel = if scale > 0.0 { worst.0 / scale } else { worst.0 };
    Ok((rel, worst.0, worst.1))
}

pub(crate) fn require_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        Err(invalid("trials", "at least one trial field is required"))
    } else {
        Ok(())
    }
}
