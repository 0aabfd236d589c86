use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::operators::direct::LinearOperator;
use crate::operators::field::{weighted_norm_sqr, Field, MeasureTag};

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub sigma_max: f64,
    pub iterations: usize,
    /// Relative change of the last two Rayleigh quotients.
    pub residual: f64,
    pub seed: u64,
    pub converged: bool,
    /// Rayleigh quotients `||A v_k||^2` of every iteration.
    pub rayleigh: Vec<f64>,
}

/// Power iteration on `A* A` in the operator's weighted inner product, started
/// from a seeded random field. Stops once consecutive Rayleigh quotients
/// agree to `tol` in relative terms, or after `max_iter` iterations.
pub fn operator_norm(op: &dyn LinearOperator, tol: f64, max_iter: usize, seed: u64) -> Result<NormEstimate> {
    if !(tol > 0.0) {
        return Err(invalid("tol", format!("must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(invalid("max_iter", "must be positive"));
    }
    let w = op.weights();
    let mut v = Field::random_complex(op.len(), seed, MeasureTag::Mu).values;
    normalize(&mut v, w);
    let mut rayleigh = Vec::new();
    let mut prev: Option<f64> = None;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..max_iter {
        let u = op.apply(&v);
        let lambda = weighted_norm_sqr(&u, w);
        rayleigh.push(lambda);
        if lambda == 0.0 {
            residual = 0.0;
            converged = true;
            break;
        }
        if let Some(p) = prev {
            residual = (lambda - p).abs() / lambda;
            if residual < tol {
                converged = true;
                break;
            }
        }
        prev = Some(lambda);
        v = op.apply_adjoint(&u);
        if normalize(&mut v, w) == 0.0 {
            converged = true;
            residual = 0.0;
            break;
        }
    }
    Ok(NormEstimate {
        sigma_max: rayleigh.last().copied().unwrap_or(0.0).sqrt(),
        iterations: rayleigh.len(),
        residual,
        seed,
        converged,
        rayleigh,
    })
}

fn normalize(v: &mut [Complex64], w: &[f64]) -> f64 {
    let n = weighted_norm_sqr(v, w).sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    n
}
