//! Treecode for the off-square sums `sum_q c_q / (x_p - y_q)^2`.
//!
//! Each cell carries the moments `M_k = sum_q c_q (y_q - c)^k`, `k < p`, and a
//! target `z` far enough from the cell uses
//! `1/(z-w)^2 = sum_k (k+1) (w-c)^k / (z-c)^(k+2)` truncated at order `p`.
//! Cells that touch the target's own square are always opened so the
//! same-square exclusion is applied exactly at the leaves.

pub mod bench;
mod tree;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::{inv_sq, KernelVariant};
use crate::measure::QuadratureCloud;
use crate::operators::direct::{factors, Factors, LinearOperator};
use crate::operators::Field;

pub use bench::{bench_family, benchmark, BenchConfig, BenchReport, BenchRow};
pub use tree::{Cell, QuadTree};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionParams {
    pub order: usize,
    pub theta: f64,
    pub leaf_cap: usize,
}

impl Default for ExpansionParams {
    fn default() -> Self {
        Self {
            order: 12,
            theta: 0.5,
            leaf_cap: 32,
        }
    }
}

impl ExpansionParams {
    pub fn new(order: usize, theta: f64, leaf_cap: usize) -> Result<Self> {
        let p = Self { order, theta, leaf_cap };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(invalid("p", "expansion order must be at least 1"));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(invalid("theta", format!("opening parameter must lie in (0, 1), got {}", self.theta)));
        }
        if self.leaf_cap < 1 {
            return Err(invalid("leaf_cap", "must be at least 1"));
        }
        Ok(())
    }

    /// `theta^p`, the geometric factor of the truncation error.
    pub fn error_factor(&self) -> f64 {
        self.theta.powi(self.order as i32)
    }
}

pub fn build_tree(cloud: &QuadratureCloud, leaf_cap: usize) -> Result<QuadTree> {
    QuadTree::build(cloud, leaf_cap)
}

/// Moments of every cell for a given charge vector, accumulated from the
/// leaves upward with the exact binomial shift.
pub fn multipoles(tree: &QuadTree, cloud: &QuadratureCloud, charges: &[Complex64], order: usize) -> Vec<Complex64> {
    let pos = cloud.positions();
    let mut coeff = vec![Complex64::new(0.0, 0.0); tree.cells.len() * order];
    let binom = binomials(order);
    for ci in tree.post_order() {
        let cell = &tree.cells[ci];
        let mut local = vec![Complex64::new(0.0, 0.0); order];
        if cell.is_leaf() {
            for &q in &tree.order[cell.start..cell.end] {
                let z = pos[q] - cell.center;
                let mut pw = charges[q];
                for m in local.iter_mut() {
                    *m += pw;
                    pw *= z;
                }
            }
        } else {
            for &child in &cell.children {
                let shift = tree.cells[child].center - cell.center;
                let src = &coeff[child * order..(child + 1) * order];
                let mut pows = vec![Complex64::new(1.0, 0.0); order];
                for k in 1..order {
                    pows[k] = pows[k - 1] * shift;
                }
                for k in 0..order {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for m in 0..=k {
                        acc += src[m] * pows[k - m] * binom[k][m];
                    }
                    local[k] += acc;
                }
            }
        }
        coeff[ci * order..(ci + 1) * order].copy_from_slice(&local);
    }
    coeff
}

fn binomials(order: usize) -> Vec<Vec<f64>> {
    let mut b = vec![vec![0.0; order]; order];
    for k in 0..order {
        b[k][0] = 1.0;
        for m in 1..=k {
            b[k][m] = b[k - 1][m - 1] + if m < k { b[k - 1][m] } else { 0.0 };
        }
    }
    b
}

/// Off-square sums for every target.
fn tree_sum(
    tree: &QuadTree,
    cloud: &QuadratureCloud,
    charges: &[Complex64],
    params: &ExpansionParams,
) -> Vec<Complex64> {
    let order = params.order;
    let coeff = multipoles(tree, cloud, charges, order);
    let pos = cloud.positions();
    let squares = cloud.squares();
    let square_of = cloud.square_indices();
    let theta = params.theta;
    (0..cloud.len())
        .into_par_iter()
        .map_init(Vec::new, |stack, p| {
            let z = pos[p];
            let own = square_of[p];
            let sq = &squares[own as usize];
            let mut far = Complex64::new(0.0, 0.0);
            let mut near = Complex64::new(0.0, 0.0);
            stack.clear();
            stack.push(0usize);
            while let Some(ci) = stack.pop() {
                let cell = &tree.cells[ci];
                let touches_own = cell.box_intersects(sq.lo, sq.hi);
                if !touches_own {
                    let dz = z - cell.center;
                    if cell.radius <= theta * cell.box_distance(z) {
                        let u = dz.inv();
                        let c = &coeff[ci * order..(ci + 1) * order];
                        let mut acc = Complex64::new(0.0, 0.0);
                        for k in (0..order).rev() {
                            acc = acc * u + c[k] * (k + 1) as f64;
                        }
                        far += acc * u * u;
                        continue;
                    }
                }
                if cell.is_leaf() {
                    for &q in &tree.order[cell.start..cell.end] {
                        if square_of[q] != own {
                            near += charges[q] * inv_sq(z - pos[q]);
                        }
                    }
                } else {
                    stack.extend(cell.children.iter().rev());
                }
            }
            far + near
        })
        .collect()
}

/// Treecode-backed modified or adjoint operator.
pub struct FastOperator<'a> {
    cloud: &'a QuadratureCloud,
    tree: &'a QuadTree,
    params: ExpansionParams,
    factors: Factors,
    adjoint_out: Vec<f64>,
}

impl<'a> FastOperator<'a> {
    pub fn new(
        cloud: &'a QuadratureCloud,
        tree: &'a QuadTree,
        variant: KernelVariant,
        params: ExpansionParams,
    ) -> Result<Self> {
        params.validate()?;
        if !variant.uses_mu_weights() {
            return Err(Error::Unsupported(format!(
                "treecode handles the modified and adjoint kernels only, not {variant:?}; use apply_direct"
            )));
        }
        if tree.order.len() != cloud.len() {
            return Err(Error::LengthMismatch {
                expected: cloud.len(),
                got: tree.order.len(),
            });
        }
        let factors = factors(cloud, variant);
        let adjoint_out = factors
            .source
            .iter()
            .zip(cloud.mu_weights())
            .map(|(s, m)| s / m)
            .collect();
        Ok(Self {
            cloud,
            tree,
            params,
            factors,
            adjoint_out,
        })
    }
}

impl LinearOperator for FastOperator<'_> {
    fn len(&self) -> usize {
        self.cloud.len()
    }

    fn weights(&self) -> &[f64] {
        self.cloud.mu_weights()
    }

    fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let charges: Vec<Complex64> = f.iter().zip(&self.factors.source).map(|(v, s)| v * s).collect();
        let mut out = tree_sum(self.tree, self.cloud, &charges, &self.params);
        for (o, t) in out.iter_mut().zip(&self.factors.target) {
            *o *= t;
        }
        out
    }

    fn apply_adjoint(&self, g: &[Complex64]) -> Vec<Complex64> {
        let charges: Vec<Complex64> = g
            .iter()
            .zip(&self.factors.target)
            .zip(self.cloud.mu_weights())
            .map(|((v, t), m)| v.conj() * (t * m))
            .collect();
        let mut out = tree_sum(self.tree, self.cloud, &charges, &self.params);
        for (o, a) in out.iter_mut().zip(&self.adjoint_out) {
            *o = o.conj() * a;
        }
        out
    }
}

pub fn apply_fast(
    cloud: &QuadratureCloud,
    tree: &QuadTree,
    variant: KernelVariant,
    f: &Field,
    params: &ExpansionParams,
) -> Result<Field> {
    f.check_len(cloud.len())?;
    let op = FastOperator::new(cloud, tree, variant, *params)?;
    Ok(Field::new(op.apply(&f.values), f.tag))
}

/// `max_p |a_p - b_p| / max_p |b_p|` (0 when `b` vanishes identically and `a == b`).
pub fn max_relative_deviation(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let err = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
    if scale == 0.0 {
        if err == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        err / scale
    }
}
