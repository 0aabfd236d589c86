use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::kernels::{inv_sq, KernelVariant};
use crate::measure::QuadratureCloud;
use crate::operators::Field;

/// A discrete operator on fields over a fixed node set, with its adjoint
/// relative to the weighted inner product given by [`LinearOperator::weights`].
pub trait LinearOperator: Sync {
    fn len(&self) -> usize;

    fn weights(&self) -> &[f64];

    fn apply(&self, f: &[Complex64]) -> Vec<Complex64>;

    fn apply_adjoint(&self, g: &[Complex64]) -> Vec<Complex64>;
}

/// Which source nodes interact with a target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Exclusion {
    /// All nodes except the target itself.
    SelfOnly,
    /// Nodes of other squares only.
    SameSquare,
    /// Nodes of the target's own square, except the target itself.
    OtherSquares,
}

impl Exclusion {
    pub(crate) fn for_variant(v: KernelVariant) -> Self {
        match v {
            KernelVariant::Full => Exclusion::SelfOnly,
            KernelVariant::Modified | KernelVariant::Adjoint => Exclusion::SameSquare,
            KernelVariant::Local => Exclusion::OtherSquares,
        }
    }
}

/// `out_p = sum_q charge_q / (x_p - x_q)^2` over the pairs allowed by `exclusion`,
/// accumulated per target in node order.
pub(crate) fn pair_sum(cloud: &QuadratureCloud, charges: &[Complex64], exclusion: Exclusion) -> Vec<Complex64> {
    let pos = cloud.positions();
    let squares = cloud.squares();
    (0..cloud.len())
        .into_par_iter()
        .map(|p| {
            let x = pos[p];
            let own = cloud.square_of(p);
            let mut acc = Complex64::new(0.0, 0.0);
            match exclusion {
                Exclusion::SelfOnly => {
                    for q in 0..pos.len() {
                        if q != p {
                            acc += charges[q] * inv_sq(x - pos[q]);
                        }
                    }
                }
                Exclusion::SameSquare => {
                    for (m, sq) in squares.iter().enumerate() {
                        if m == own {
                            continue;
                        }
                        for q in sq.nodes.clone() {
                            acc += charges[q] * inv_sq(x - pos[q]);
                        }
                    }
                }
                Exclusion::OtherSquares => {
                    for q in squares[own].nodes.clone() {
                        if q != p {
                            acc += charges[q] * inv_sq(x - pos[q]);
                        }
                    }
                }
            }
            acc
        })
        .collect()
}

/// Per-node source and target factors so that the operator reads
/// `(A f)_p = T_p sum_q k(x_p, x_q) S_q w_q f_q` with `k = 1/(x-y)^2`.
pub(crate) struct Factors {
    pub source: Vec<f64>,
    pub target: Vec<f64>,
}

pub(crate) fn factors(cloud: &QuadratureCloud, variant: KernelVariant) -> Factors {
    let pow: Vec<f64> = (0..cloud.len()).map(|p| cloud.squares()[cloud.square_of(p)].side_pow_d).collect();
    let w = if variant.uses_mu_weights() { cloud.mu_weights() } else { cloud.area_weights() };
    let ones = vec![1.0; cloud.len()];
    match variant {
        KernelVariant::Modified => Factors {
            source: pow.iter().zip(w).map(|(a, b)| a * b).collect(),
            target: ones,
        },
        KernelVariant::Adjoint => Factors {
            source: w.to_vec(),
            target: pow,
        },
        KernelVariant::Full | KernelVariant::Local => Factors {
            source: w.to_vec(),
            target: ones,
        },
    }
}

/// Direct `O(N^2)` application of one of the four kernels.
pub struct DirectOperator<'a> {
    cloud: &'a QuadratureCloud,
    variant: KernelVariant,
    exclusion: Exclusion,
    factors: Factors,
    /// `S_q w_q / mu_q`, the output factor of the `mu`-adjoint.
    adjoint_out: Vec<f64>,
}

impl<'a> DirectOperator<'a> {
    pub fn new(cloud: &'a QuadratureCloud, variant: KernelVariant) -> Self {
        let factors = factors(cloud, variant);
        let adjoint_out = factors
            .source
            .iter()
            .zip(cloud.mu_weights())
            .map(|(s, m)| s / m)
            .collect();
        Self {
            cloud,
            variant,
            exclusion: Exclusion::for_variant(variant),
            factors,
            adjoint_out,
        }
    }

    pub fn variant(&self) -> KernelVariant {
        self.variant
    }
}

impl LinearOperator for DirectOperator<'_> {
    fn len(&self) -> usize {
        self.cloud.len()
    }

    fn weights(&self) -> &[f64] {
        self.cloud.mu_weights()
    }

    fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let charges: Vec<Complex64> = f.iter().zip(&self.factors.source).map(|(v, s)| v * s).collect();
        let mut out = pair_sum(self.cloud, &charges, self.exclusion);
        for (o, t) in out.iter_mut().zip(&self.factors.target) {
            *o *= t;
        }
        out
    }

    /// `(A* g)_q = (S_q w_q / mu_q) conj(sum_p k(x_q, x_p) T_p mu_p conj(g_p))`.
    fn apply_adjoint(&self, g: &[Complex64]) -> Vec<Complex64> {
        let charges: Vec<Complex64> = g
            .iter()
            .zip(&self.factors.target)
            .zip(self.cloud.mu_weights())
            .map(|((v, t), m)| v.conj() * (t * m))
            .collect();
        let mut out = pair_sum(self.cloud, &charges, self.exclusion);
        for (o, a) in out.iter_mut().zip(&self.adjoint_out) {
            *o = o.conj() * a;
        }
        out
    }
}

/// `(T f)(x_p) = sum_q kernel(x_p, y_q) f_q w_q`, with `mu` weights for the
/// modified kernels and area weights for the full and local ones (self term omitted).
pub fn apply_direct(cloud: &QuadratureCloud, variant: KernelVariant, f: &Field) -> Result<Field> {
    f.check_len(cloud.len())?;
    let op = DirectOperator::new(cloud, variant);
    Ok(Field::new(op.apply(&f.values), f.tag))
}

/// Dense operator with explicit matrix, mostly a test seam for the norm estimator.
pub struct DenseOperator {
    n: usize,
    matrix: Vec<Complex64>,
    weights: Vec<f64>,
}

impl DenseOperator {
    /// Row-major `n x n` matrix acting as `(A f)_p = sum_q a_pq f_q`.
    pub fn new(matrix: Vec<Complex64>, weights: Vec<f64>) -> Self {
        let n = weights.len();
        assert_eq!(matrix.len(), n * n, "matrix must be square and match the weights");
        Self { n, matrix, weights }
    }

    pub fn identity(weights: Vec<f64>) -> Self {
        let n = weights.len();
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        for p in 0..n {
            m[p * n + p] = Complex64::new(1.0, 0.0);
        }
        Self::new(m, weights)
    }

    /// Materializes any operator column by column.
    pub fn from_operator(op: &dyn LinearOperator) -> Self {
        let n = op.len();
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        for q in 0..n {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[q] = Complex64::new(1.0, 0.0);
            for (p, v) in op.apply(&e).into_iter().enumerate() {
                m[p * n + q] = v;
            }
        }
        Self::new(m, op.weights().to_vec())
    }

    pub fn entry(&self, p: usize, q: usize) -> Complex64 {
        self.matrix[p * self.n + q]
    }
}

impl LinearOperator for DenseOperator {
    fn len(&self) -> usize {
        self.n
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|p| (0..self.n).map(|q| self.entry(p, q) * f[q]).sum())
            .collect()
    }

    fn apply_adjoint(&self, g: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|q| {
                (0..self.n)
                    .map(|p| self.entry(p, q).conj() * g[p] * (self.weights[p] / self.weights[q]))
                    .sum()
            })
            .collect()
    }
}
