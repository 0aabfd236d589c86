//! The four kernels built from `1/(x-y)^2` and an empirical check of the
//! size and smoothness conditions satisfied by the modified kernel.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::SquareFamily;
use crate::measure::QuadratureCloud;

/// `1 / z^2` for `z != 0`.
#[inline(always)]
pub fn inv_sq(z: Complex64) -> Complex64 {
    let inv = 1.0 / z.norm_sqr();
    let w = Complex64::new(z.re * inv, -z.im * inv);
    w * w
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelVariant {
    /// `t(x, y) = 1/(x-y)^2`.
    Full,
    /// `K(x, y) = l_i^d/(x-y)^2` for `y in Q_i`, `x in Q_j`, `i != j`; zero on one square.
    Modified,
    /// `K'(x, y) = K(y, x) = l_j^d/(x-y)^2`.
    Adjoint,
    /// `t_0`, the same-square part of `t`.
    Local,
}

impl KernelVariant {
    pub const ALL: [KernelVariant; 4] = [
        KernelVariant::Full,
        KernelVariant::Modified,
        KernelVariant::Adjoint,
        KernelVariant::Local,
    ];

    /// Whether the operator integrates against `mu` (otherwise against area).
    pub fn uses_mu_weights(self) -> bool {
        matches!(self, KernelVariant::Modified | KernelVariant::Adjoint)
    }

    /// Whether the pair `(x, y)` with the given squares is allowed to interact.
    #[inline]
    pub fn pair_active(self, same_square: bool) -> bool {
        match self {
            KernelVariant::Full => true,
            KernelVariant::Modified | KernelVariant::Adjoint => !same_square,
            KernelVariant::Local => same_square,
        }
    }
}

impl std::str::FromStr for KernelVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Self::Full),
            "modified" => Ok(Self::Modified),
            "adjoint" => Ok(Self::Adjoint),
            "local" => Ok(Self::Local),
            other => Err(invalid("variant", format!("unknown kernel `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KernelSpec<'a> {
    pub variant: KernelVariant,
    pub family: &'a SquareFamily,
}

impl<'a> KernelSpec<'a> {
    pub fn new(variant: KernelVariant, family: &'a SquareFamily) -> Self {
        Self { variant, family }
    }

    pub fn d(&self) -> f64 {
        self.family.d()
    }
}

/// Kernel value on node-level data: squares and their `l^d` are already known.
#[inline(always)]
pub(crate) fn kernel_at(
    variant: KernelVariant,
    x: Complex64,
    y: Complex64,
    sq_x: usize,
    sq_y: usize,
    pow_x: f64,
    pow_y: f64,
) -> Complex64 {
    let same = sq_x == sq_y;
    if !variant.pair_active(same) {
        return Complex64::new(0.0, 0.0);
    }
    let t = inv_sq(x - y);
    match variant {
        KernelVariant::Full | KernelVariant::Local => t,
        KernelVariant::Modified => t * pow_y,
        KernelVariant::Adjoint => t * pow_x,
    }
}

/// Evaluates the kernel at two points of the plane read as complex numbers.
pub fn kernel_eval(spec: &KernelSpec<'_>, x: Complex64, y: Complex64) -> Result<Complex64> {
    if spec.variant == KernelVariant::Full {
        if x == y {
            return Err(Error::CoincidentPoints(format!("{x}")));
        }
        return Ok(inv_sq(x - y));
    }
    let locate = |z: Complex64| spec.family.locate(z).ok_or_else(|| Error::OutsideSupport(format!("{z}")));
    let (sx, sy) = (locate(x)?, locate(y)?);
    if sx == sy && spec.variant == KernelVariant::Local && x == y {
        return Err(Error::CoincidentPoints(format!("{x}")));
    }
    let d = spec.d();
    let sq = spec.family.squares();
    Ok(kernel_at(
        spec.variant,
        x,
        y,
        sx,
        sy,
        sq[sx].side().powf(d),
        sq[sy].side().powf(d),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    Exhaustive,
    Sampled,
}

/// Empirical suprema of the three Calderon-Zygmund conditions for the modified kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CzReport {
    pub tau: f64,
    pub s: f64,
    pub epsilon: f64,
    #[serde(rename = "A_I")]
    pub a_i: f64,
    #[serde(rename = "A_II")]
    pub a_ii: f64,
    #[serde(rename = "A_III")]
    pub a_iii: f64,
    pub budget: usize,
    pub seed: u64,
    pub iii2_counterexamples: usize,
    pub mode: SamplingMode,
    /// Ordered `(x, y)` pairs visited; every admissible third point is scanned for each.
    pub pairs: usize,
    pub triples_ii: usize,
    pub triples_iii: usize,
}

/// `epsilon = min(1, tau d)`.
pub fn cz_epsilon(d: f64, tau: f64) -> f64 {
    (tau * d).min(1.0)
}

#[derive(Default)]
struct CzAccumulator {
    a_i: f64,
    a_ii: f64,
    a_iii: f64,
    iii2: usize,
    triples_ii: usize,
    triples_iii: usize,
}

/// Suprema over node pairs `(x, y)`; for each pair every node within half the
/// pair distance of `x` (resp. `y`) is taken as `x'` (resp. `y'`). All ordered
/// pairs are visited when there are at most `budget` of them, otherwise
/// `budget` pairs are drawn uniformly with the seeded generator.
pub fn cz_constants(cloud: &QuadratureCloud, tau: f64, budget: usize, seed: u64) -> Result<CzReport> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(invalid("tau", format!("must lie in (0, 1), got {tau}")));
    }
    if budget == 0 {
        return Err(invalid("budget", "must be positive"));
    }
    let d = cloud.d();
    let s = 2.0 - d;
    let eps = cz_epsilon(d, tau);
    let n = cloud.len();
    let total_pairs = n * n.saturating_sub(1);
    let mut acc = CzAccumulator::default();
    let (mode, pairs) = if total_pairs <= budget {
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    cz_visit(cloud, s, eps, p, q, &mut acc);
                }
            }
        }
        (SamplingMode::Exhaustive, total_pairs)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..budget {
            let p = rng.gen_range(0..n);
            let mut q = rng.gen_range(0..n - 1);
            if q >= p {
                q += 1;
            }
            cz_visit(cloud, s, eps, p, q, &mut acc);
        }
        (SamplingMode::Sampled, budget)
    };
    Ok(CzReport {
        tau,
        s,
        epsilon: eps,
        a_i: acc.a_i,
        a_ii: acc.a_ii,
        a_iii: acc.a_iii,
        budget,
        seed,
        iii2_counterexamples: acc.iii2,
        mode,
        pairs,
        triples_ii: acc.triples_ii,
        triples_iii: acc.triples_iii,
    })
}

fn cz_visit(cloud: &QuadratureCloud, s: f64, eps: f64, p: usize, q: usize, acc: &mut CzAccumulator) {
    let pos = cloud.positions();
    let sqs = cloud.squares();
    let (sp, sq) = (cloud.square_of(p), cloud.square_of(q));
    let modified = |a: usize, b: usize| {
        let (sa, sb) = (cloud.square_of(a), cloud.square_of(b));
        kernel_at(KernelVariant::Modified, pos[a], pos[b], sa, sb, sqs[sa].side_pow_d, sqs[sb].side_pow_d)
    };
    let k_xy = modified(p, q);
    let dist = (pos[p] - pos[q]).norm();
    if sp != sq {
        acc.a_i = acc.a_i.max(k_xy.norm() * dist.powf(s));
    }
    let half = 0.5 * dist;
    let scale = dist.powf(s + eps);
    // condition II: move x
    for_each_near(cloud, pos[p], half, |r| {
        if r == p {
            return;
        }
        let dx = (pos[p] - pos[r]).norm();
        if dx <= half {
            acc.triples_ii += 1;
            let v = (k_xy - modified(r, q)).norm() * scale / dx.powf(eps);
            acc.a_ii = acc.a_ii.max(v);
        }
    });
    // condition III: move y
    for_each_near(cloud, pos[q], half, |r| {
        if r == q {
            return;
        }
        let dy = (pos[q] - pos[r]).norm();
        if dy <= half {
            acc.triples_iii += 1;
            let sr = cloud.square_of(r);
            if (sp == sq && sr != sq) || (sp == sr && sq != sp) {
                acc.iii2 += 1;
            }
            let v = (k_xy - modified(p, r)).norm() * scale / dy.powf(eps);
            acc.a_iii = acc.a_iii.max(v);
        }
    });
}

/// Calls `f` on every node of every square whose node box comes within
/// `radius` of `center` (a superset of the nodes in the closed disc).
fn for_each_near(cloud: &QuadratureCloud, center: Complex64, radius: f64, mut f: impl FnMut(usize)) {
    let r2 = radius * radius * (1.0 + 1e-9);
    for sq in cloud.squares() {
        let nearest = Complex64::new(center.re.clamp(sq.lo.re, sq.hi.re), center.im.clamp(sq.lo.im, sq.hi.im));
        if (nearest - center).norm_sqr() > r2 {
            continue;
        }
        for r in sq.nodes.clone() {
            f(r);
        }
    }
}
