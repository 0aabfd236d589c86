//! The measure `mu = sum_m l_m^(-d) * area|Q_m`, its midpoint discretization
//! and the ball-level checks built on it (growth, A2-type ratio).

use std::f64::consts::PI;
use std::io::Write;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::SquareFamily;

#[derive(Debug, Clone)]
pub struct NonHomogeneousMeasure {
    family: SquareFamily,
    densities: Vec<f64>,
}

impl NonHomogeneousMeasure {
    pub fn new(family: SquareFamily) -> Self {
        let d = family.d();
        let densities = family.squares().iter().map(|q| q.side().powf(-d)).collect();
        Self { family, densities }
    }

    pub fn family(&self) -> &SquareFamily {
        &self.family
    }

    pub fn d(&self) -> f64 {
        self.family.d()
    }

    /// Density `w_m = l_m^(-d)` of the measure against planar area on `Q_m`.
    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    /// `mu(Q_m) = l_m^(2-d)`.
    pub fn square_mass(&self, m: usize) -> f64 {
        self.family.squares()[m].side().powf(2.0 - self.d())
    }

    pub fn total_mass(&self) -> f64 {
        (0..self.family.len()).map(|m| self.square_mass(m)).sum()
    }
}

pub fn build_measure(family: SquareFamily) -> NonHomogeneousMeasure {
    NonHomogeneousMeasure::new(family)
}

/// One quadrature node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub position: Complex64,
    pub square: usize,
    pub area_weight: f64,
    pub mu_weight: f64,
}

/// Per-square bookkeeping shared by the operators.
#[derive(Debug, Clone)]
pub struct CloudSquare {
    pub side: f64,
    /// `l^d`, the factor the modified kernels attach to this square.
    pub side_pow_d: f64,
    pub nodes: Range<usize>,
    pub lo: Complex64,
    pub hi: Complex64,
    pub mu_mass: f64,
    pub area_mass: f64,
    /// `sum area * l^d` over the square's nodes (integral of `w^-1`).
    pub inv_density_mass: f64,
}

/// Discretization nodes carrying both area and `mu` weights. Nodes of one
/// square are stored contiguously, square by square in family order.
#[derive(Debug, Clone)]
pub struct QuadratureCloud {
    d: f64,
    n_per_side: usize,
    positions: Vec<Complex64>,
    square_of: Vec<u32>,
    area: Vec<f64>,
    mu: Vec<f64>,
    squares: Vec<CloudSquare>,
}

impl QuadratureCloud {
    /// Midpoint rule with `n_per_side^2` nodes per square, row by row.
    pub fn midpoint(measure: &NonHomogeneousMeasure, n_per_side: usize) -> Result<Self> {
        if n_per_side < 1 {
            return Err(invalid("n_per_side", "must be at least 1"));
        }
        let n = n_per_side;
        let per = n * n;
        let m_count = measure.family().len();
        let mut nodes = Vec::with_capacity(m_count * per);
        let mut sides = Vec::with_capacity(m_count);
        for (m, q) in measure.family().squares().iter().enumerate() {
            let (s, h) = (q.side(), q.side() / n as f64);
            let (x0, y0) = (q.i as f64 * s, q.j as f64 * s);
            let area = h * h;
            let mu = area * measure.densities()[m];
            for b in 0..n {
                for a in 0..n {
                    nodes.push(Node {
                        position: Complex64::new(x0 + (a as f64 + 0.5) * h, y0 + (b as f64 + 0.5) * h),
                        square: m,
                        area_weight: area,
                        mu_weight: mu,
                    });
                }
            }
            sides.push(s);
        }
        let mut cloud = Self::from_nodes(measure.d(), nodes, &sides)?;
        cloud.n_per_side = n;
        Ok(cloud)
    }

    /// Hand-built cloud. Nodes must be grouped by square index `0..sides.len()`.
    pub fn from_nodes(d: f64, nodes: Vec<Node>, sides: &[f64]) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let mut squares: Vec<CloudSquare> = Vec::with_capacity(sides.len());
        let mut start = 0;
        for (m, &side) in sides.iter().enumerate() {
            let mut end = start;
            while end < nodes.len() && nodes[end].square == m {
                end += 1;
            }
            if end == start {
                return Err(invalid("nodes", format!("square {m} has no nodes or nodes are not grouped")));
            }
            let chunk = &nodes[start..end];
            let lo = chunk.iter().fold(Complex64::new(f64::INFINITY, f64::INFINITY), |a, n| {
                Complex64::new(a.re.min(n.position.re), a.im.min(n.position.im))
            });
            let hi = chunk.iter().fold(Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |a, n| {
                Complex64::new(a.re.max(n.position.re), a.im.max(n.position.im))
            });
            let side_pow_d = side.powf(d);
            squares.push(CloudSquare {
                side,
                side_pow_d,
                nodes: start..end,
                lo,
                hi,
                mu_mass: chunk.iter().map(|n| n.mu_weight).sum(),
                area_mass: chunk.iter().map(|n| n.area_weight).sum(),
                inv_density_mass: chunk.iter().map(|n| n.area_weight * side_pow_d).sum(),
            });
            start = end;
        }
        if start != nodes.len() {
            return Err(invalid("nodes", "node square indices out of range or not grouped"));
        }
        Ok(Self {
            d,
            n_per_side: 0,
            positions: nodes.iter().map(|n| n.position).collect(),
            square_of: nodes.iter().map(|n| n.square as u32).collect(),
            area: nodes.iter().map(|n| n.area_weight).collect(),
            mu: nodes.iter().map(|n| n.mu_weight).collect(),
            squares,
        })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// Subgrid resolution, 0 for hand-built clouds.
    pub fn n_per_side(&self) -> usize {
        self.n_per_side
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Complex64] {
        &self.positions
    }

    pub fn square_of(&self, p: usize) -> usize {
        self.square_of[p] as usize
    }

    pub fn square_indices(&self) -> &[u32] {
        &self.square_of
    }

    pub fn area_weights(&self) -> &[f64] {
        &self.area
    }

    pub fn mu_weights(&self) -> &[f64] {
        &self.mu
    }

    pub fn squares(&self) -> &[CloudSquare] {
        &self.squares
    }

    pub fn node(&self, p: usize) -> Node {
        Node {
            position: self.positions[p],
            square: self.square_of(p),
            area_weight: self.area[p],
            mu_weight: self.mu[p],
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        (0..self.len()).map(|p| self.node(p))
    }

    pub fn total_mu(&self) -> f64 {
        self.mu.iter().sum()
    }

    /// Smallest distance between two distinct nodes of one square (the subgrid spacing).
    pub fn finest_spacing(&self) -> f64 {
        if self.n_per_side > 0 {
            self.squares.iter().map(|s| s.side).fold(f64::INFINITY, f64::min) / self.n_per_side as f64
        } else {
            self.squares.iter().map(|s| s.side).fold(f64::INFINITY, f64::min)
        }
    }

    pub fn min_side(&self) -> f64 {
        self.squares.iter().map(|s| s.side).fold(f64::INFINITY, f64::min)
    }

    /// Diameter of the node set's bounding box.
    pub fn diameter(&self) -> f64 {
        let lo = self.squares.iter().fold(Complex64::new(f64::INFINITY, f64::INFINITY), |a, s| {
            Complex64::new(a.re.min(s.lo.re), a.im.min(s.lo.im))
        });
        let hi = self.squares.iter().fold(Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |a, s| {
            Complex64::new(a.re.max(s.hi.re), a.im.max(s.hi.im))
        });
        (hi - lo).norm()
    }

    /// Sum of `node_value` over nodes within `radius` of `center`, with whole
    /// squares inside or outside the ball resolved from `square_total`.
    pub(crate) fn ball_reduce<const K: usize>(
        &self,
        center: Complex64,
        radius: f64,
        node_value: impl Fn(usize) -> [f64; K],
        square_total: impl Fn(&CloudSquare) -> [f64; K],
    ) -> [f64; K] {
        let r2 = radius * radius;
        let mut acc = [0.0; K];
        for sq in &self.squares {
            let nearest = Complex64::new(center.re.clamp(sq.lo.re, sq.hi.re), center.im.clamp(sq.lo.im, sq.hi.im));
            if (nearest - center).norm_sqr() > r2 {
                continue;
            }
            let far = Complex64::new(
                if center.re - sq.lo.re > sq.hi.re - center.re { sq.lo.re } else { sq.hi.re },
                if center.im - sq.lo.im > sq.hi.im - center.im { sq.lo.im } else { sq.hi.im },
            );
            let v = if (far - center).norm_sqr() <= r2 {
                square_total(sq)
            } else {
                let mut part = [0.0; K];
                for q in sq.nodes.clone() {
                    if (self.positions[q] - center).norm_sqr() <= r2 {
                        let nv = node_value(q);
                        for (a, b) in part.iter_mut().zip(nv) {
                            *a += b;
                        }
                    }
                }
                part
            };
            for (a, b) in acc.iter_mut().zip(v) {
                *a += b;
            }
        }
        acc
    }

    /// Nodes within `radius` of `center`, in index order.
    pub fn nodes_in_ball(&self, ball: &BallQuery) -> Vec<usize> {
        let r2 = ball.radius * ball.radius;
        let mut out = Vec::new();
        for sq in &self.squares {
            let nearest = Complex64::new(
                ball.center.re.clamp(sq.lo.re, sq.hi.re),
                ball.center.im.clamp(sq.lo.im, sq.hi.im),
            );
            if (nearest - ball.center).norm_sqr() > r2 {
                continue;
            }
            out.extend(sq.nodes.clone().filter(|&q| (self.positions[q] - ball.center).norm_sqr() <= r2));
        }
        out
    }

    /// CSV with columns `x,y,square_index,area_weight,mu_weight`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "square_index", "area_weight", "mu_weight"])?;
        for n in self.nodes() {
            w.write_record(&[
                format!("{:e}", n.position.re),
                format!("{:e}", n.position.im),
                n.square.to_string(),
                format!("{:e}", n.area_weight),
                format!("{:e}", n.mu_weight),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn build_quadrature(measure: &NonHomogeneousMeasure, n_per_side: usize) -> Result<QuadratureCloud> {
    QuadratureCloud::midpoint(measure, n_per_side)
}

/// Closed disc `{z : |z - center| <= radius}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallQuery {
    pub center: Complex64,
    pub radius: f64,
}

impl BallQuery {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(invalid("radius", format!("must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }
}

pub fn ball_mass(cloud: &QuadratureCloud, ball: &BallQuery) -> f64 {
    let mu = cloud.mu_weights();
    cloud.ball_reduce(ball.center, ball.radius, |q| [mu[q]], |s| [s.mu_mass])[0]
}

/// Centers crossed with radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSample {
    pub centers: Vec<Complex64>,
    pub radii: Vec<f64>,
}

impl BallSample {
    /// Every node position crossed with the dyadic ladder `l_min * 2^k` up to the
    /// first radius reaching the cloud diameter.
    pub fn default_for(cloud: &QuadratureCloud) -> Self {
        Self {
            centers: cloud.positions().to_vec(),
            radii: dyadic_ladder(cloud.min_side(), cloud.diameter()),
        }
    }

    pub fn len(&self) -> usize {
        self.centers.len() * self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn describe(&self) -> String {
        format!(
            "{} centers x {} radii [{:e} .. {:e}]",
            self.centers.len(),
            self.radii.len(),
            self.radii.first().copied().unwrap_or(0.0),
            self.radii.last().copied().unwrap_or(0.0)
        )
    }

    fn balls(&self) -> impl Iterator<Item = BallQuery> + '_ {
        self.centers
            .iter()
            .flat_map(move |&c| self.radii.iter().map(move |&r| BallQuery { center: c, radius: r }))
    }
}

/// `[lo, 2 lo, 4 lo, ...]` ending at the first entry `>= hi`.
pub fn dyadic_ladder(lo: f64, hi: f64) -> Vec<f64> {
    let mut out = vec![lo];
    let mut r = lo;
    while r < hi {
        r *= 2.0;
        out.push(r);
    }
    out
}

/// Empirical constant of a ball-sampled supremum, with the ball attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallConstant {
    pub constant: f64,
    pub witness: Option<BallQuery>,
    pub sample: String,
}

fn ball_sup(sample: &BallSample, mut value: impl FnMut(&BallQuery) -> f64) -> BallConstant {
    let mut best = BallConstant {
        constant: 0.0,
        witness: None,
        sample: sample.describe(),
    };
    for ball in sample.balls() {
        let v = value(&ball);
        if v > best.constant {
            best.constant = v;
            best.witness = Some(ball);
        }
    }
    best
}

/// `max mu(B(x, r)) / r^(2-d)` over the sample.
pub fn growth_constant(cloud: &QuadratureCloud, sample: &BallSample) -> BallConstant {
    let s = 2.0 - cloud.d();
    ball_sup(sample, |b| ball_mass(cloud, b) / b.radius.powf(s))
}

/// `(|B|^-1 int_{B cap X} w) (|B|^-1 int_{B cap X} w^-1)`, normalized by the full disc area.
pub fn a2_ratio(cloud: &QuadratureCloud, ball: &BallQuery) -> f64 {
    let (mu, area, sq) = (cloud.mu_weights(), cloud.area_weights(), cloud.squares());
    let [w, winv] = cloud.ball_reduce(
        ball.center,
        ball.radius,
        |q| [mu[q], area[q] * sq[cloud.square_of(q)].side_pow_d],
        |s| [s.mu_mass, s.inv_density_mass],
    );
    let b = ball.area();
    (w / b) * (winv / b)
}

pub fn a2_constant(cloud: &QuadratureCloud, sample: &BallSample) -> BallConstant {
    ball_sup(sample, |b| a2_ratio(cloud, b))
}

/// Solves `1/t' - 1/2 = (1/K)(1/t - 1/2)` for `t'`.
pub fn borderline_exponent(t: f64, k_qc: f64) -> Result<f64> {
    if !(t > 0.0 && t < 2.0) {
        return Err(invalid("t", format!("must lie in (0, 2), got {t}")));
    }
    if !(k_qc >= 1.0) || !k_qc.is_finite() {
        return Err(invalid("K", format!("distortion must be a finite value >= 1, got {k_qc}")));
    }
    Ok(1.0 / (0.5 + (1.0 / t - 0.5) / k_qc))
}
