//! Dyadic squares, their concentric dilates, and admissible families.
//!
//! A family is admissible when the closed 4-dilates of its members are
//! pairwise disjoint and the packing sums
//! `sum_{Q_m in Q} l(Q_m)^(2-d) / l(Q)^(2-d)` stay bounded over all dyadic `Q`.
//! Disjointness is decided in exact integer arithmetic; packing ratios are
//! floating point.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Cell `[i 2^-k, (i+1) 2^-k) x [j 2^-k, (j+1) 2^-k)` of the standard dyadic lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicSquare {
    pub k: i32,
    pub i: i64,
    pub j: i64,
}

/// `2^(-k * e)`, the `e`-th power of the side length of a generation-`k` square.
#[inline]
pub fn dyadic_pow(k: i32, e: f64) -> f64 {
    (-(k as f64) * e).exp2()
}

impl DyadicSquare {
    pub const fn new(k: i32, i: i64, j: i64) -> Self {
        Self { k, i, j }
    }

    pub fn side(&self) -> f64 {
        dyadic_pow(self.k, 1.0)
    }

    pub fn center(&self) -> Complex64 {
        let s = self.side();
        Complex64::new((self.i as f64 + 0.5) * s, (self.j as f64 + 0.5) * s)
    }

    /// Center and side length. Both are exact dyadic rationals.
    pub fn extent(&self) -> (Complex64, f64) {
        (self.center(), self.side())
    }

    /// Ancestor at generation `k` (which must not be finer than `self.k`).
    pub fn ancestor(&self, k: i32) -> DyadicSquare {
        debug_assert!(k <= self.k);
        let shift = (self.k - k) as u32;
        if shift >= 63 {
            return DyadicSquare::new(k, if self.i < 0 { -1 } else { 0 }, if self.j < 0 { -1 } else { 0 });
        }
        DyadicSquare::new(k, self.i >> shift, self.j >> shift)
    }

    pub fn parent(&self) -> DyadicSquare {
        self.ancestor(self.k - 1)
    }

    /// Half-open containment of `other` in `self`.
    pub fn contains_square(&self, other: &DyadicSquare) -> bool {
        other.k >= self.k && other.ancestor(self.k) == *self
    }

    /// Half-open containment of a point.
    pub fn contains_point(&self, z: Complex64) -> bool {
        let s = self.side();
        let (x0, y0) = (self.i as f64 * s, self.j as f64 * s);
        z.re >= x0 && z.re < x0 + s && z.im >= y0 && z.im < y0 + s
    }

    /// Concentric dilate `lambda * Q` as a closed region.
    pub fn dilate(&self, lambda: f64) -> Result<SquareRegion> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(invalid("lambda", format!("dilation factor must be positive, got {lambda}")));
        }
        SquareRegion::new(self.center(), lambda * self.side() / 2.0)
    }

    /// Doubled-unit integer interval of the closed 4-dilate along one axis when
    /// the square is rescaled to generation `fine`.
    fn dilate4_interval(coord: i64, k: i32, fine: i32) -> (i128, i128) {
        let scale: i128 = 1i128 << (fine - k) as u32;
        let c = coord as i128;
        ((2 * c - 3) * scale, (2 * c + 5) * scale)
    }

    /// Whether the closed 4-dilates of `self` and `other` intersect, decided exactly.
    pub fn dilates_intersect(&self, other: &DyadicSquare) -> bool {
        let fine = self.k.max(other.k);
        let (ax0, ax1) = Self::dilate4_interval(self.i, self.k, fine);
        let (bx0, bx1) = Self::dilate4_interval(other.i, other.k, fine);
        if ax0 > bx1 || bx0 > ax1 {
            return false;
        }
        let (ay0, ay1) = Self::dilate4_interval(self.j, self.k, fine);
        let (by0, by1) = Self::dilate4_interval(other.j, other.k, fine);
        !(ay0 > by1 || by0 > ay1)
    }

    /// Sup-norm distance between the two (closed) squares.
    pub fn dist_inf(&self, other: &DyadicSquare) -> f64 {
        let (a, b) = (self.side(), other.side());
        let gap = |p0: f64, p1: f64, q0: f64, q1: f64| (q0 - p1).max(p0 - q1).max(0.0);
        let (ax, ay) = (self.i as f64 * a, self.j as f64 * a);
        let (bx, by) = (other.i as f64 * b, other.j as f64 * b);
        gap(ax, ax + a, bx, bx + b).max(gap(ay, ay + a, by, by + b))
    }

    /// Euclidean distance between the two (closed) squares.
    pub fn dist(&self, other: &DyadicSquare) -> f64 {
        let (a, b) = (self.side(), other.side());
        let gap = |p0: f64, p1: f64, q0: f64, q1: f64| (q0 - p1).max(p0 - q1).max(0.0);
        let (ax, ay) = (self.i as f64 * a, self.j as f64 * a);
        let (bx, by) = (other.i as f64 * b, other.j as f64 * b);
        gap(ax, ax + a, bx, bx + b).hypot(gap(ay, ay + a, by, by + b))
    }

    pub fn corners(&self) -> [Complex64; 4] {
        let s = self.side();
        let (x0, y0) = (self.i as f64 * s, self.j as f64 * s);
        [
            Complex64::new(x0, y0),
            Complex64::new(x0 + s, y0),
            Complex64::new(x0, y0 + s),
            Complex64::new(x0 + s, y0 + s),
        ]
    }

    fn quadrant(&self) -> (bool, bool) {
        (self.i < 0, self.j < 0)
    }
}

impl fmt::Display for DyadicSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(k={}, i={}, j={})", self.k, self.i, self.j)
    }
}

/// Closed axis-aligned square `{z : |z - center|_inf <= half_side}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquareRegion {
    pub center: Complex64,
    pub half_side: f64,
}

impl SquareRegion {
    pub fn new(center: Complex64, half_side: f64) -> Result<Self> {
        if !(half_side > 0.0) {
            return Err(invalid("half_side", format!("must be positive, got {half_side}")));
        }
        Ok(Self { center, half_side })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let dz = z - self.center;
        dz.re.abs() <= self.half_side && dz.im.abs() <= self.half_side
    }

    pub fn intersects(&self, other: &SquareRegion) -> bool {
        let dz = other.center - self.center;
        let h = self.half_side + other.half_side;
        dz.re.abs() <= h && dz.im.abs() <= h
    }
}

/// Outcome of the exact disjointness check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Disjointness {
    Ok,
    /// Indices of the first pair (in lexicographic order) whose 4-dilates meet.
    Violation(usize, usize),
}

impl Disjointness {
    pub fn is_ok(&self) -> bool {
        matches!(self, Disjointness::Ok)
    }
}

pub fn check_disjointness(squares: &[DyadicSquare]) -> Disjointness {
    for (a, qa) in squares.iter().enumerate() {
        for (b, qb) in squares.iter().enumerate().skip(a + 1) {
            if qa.dilates_intersect(qb) {
                return Disjointness::Violation(a, b);
            }
        }
    }
    Disjointness::Ok
}

fn check_exponent(d: f64) -> Result<()> {
    if d > 0.0 && d < 2.0 {
        Ok(())
    } else {
        Err(invalid("d", format!("exponent must lie in (0, 2), got {d}")))
    }
}

#[inline]
fn packing_ratio(sum: f64, k: i32, d: f64) -> f64 {
    sum / dyadic_pow(k, 2.0 - d)
}

/// Smallest constant in the packing condition, together with a dyadic square attaining it.
///
/// Ancestors are scanned generation by generation from the finest member
/// upwards until every member is included and each occupied lattice quadrant
/// has collapsed into a single ancestor; beyond that point member sets stop
/// changing and the ratios only decrease.
pub fn packing_constant(squares: &[DyadicSquare], d: f64) -> Result<(f64, DyadicSquare)> {
    check_exponent(d)?;
    if squares.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let k_fine = squares.iter().map(|q| q.k).max().unwrap();
    let k_coarse = squares.iter().map(|q| q.k).min().unwrap();
    let mut quadrants: Vec<(bool, bool)> = squares.iter().map(DyadicSquare::quadrant).collect();
    quadrants.sort();
    quadrants.dedup();

    let weights: Vec<f64> = squares.iter().map(|q| dyadic_pow(q.k, 2.0 - d)).collect();
    let mut best = (f64::NEG_INFINITY, squares[0]);
    let mut level = k_fine;
    loop {
        let mut sums: HashMap<DyadicSquare, f64> = HashMap::new();
        let mut order: Vec<DyadicSquare> = Vec::new();
        for (q, w) in squares.iter().zip(&weights) {
            if q.k < level {
                continue;
            }
            let anc = q.ancestor(level);
            let e = sums.entry(anc).or_insert_with(|| {
                order.push(anc);
                0.0
            });
            *e += w;
        }
        for anc in &order {
            let r = packing_ratio(sums[anc], level, d);
            if r > best.0 {
                best = (r, *anc);
            }
        }
        if level <= k_coarse && order.len() == quadrants.len() {
            break;
        }
        level -= 1;
    }
    Ok(best)
}

/// Admissible configuration: pairwise disjoint 4-dilates, exponent `d` in (0, 2).
#[derive(Debug, Clone, PartialEq)]
pub struct SquareFamily {
    squares: Vec<DyadicSquare>,
    d: f64,
    packing_target: f64,
    packing_constant: f64,
    packing_witness: DyadicSquare,
}

impl SquareFamily {
    /// Validates disjointness exactly and computes the packing constant.
    /// A packing constant above `packing_target` is allowed here and can be
    /// queried with [`SquareFamily::packing_ok`].
    pub fn new(squares: Vec<DyadicSquare>, d: f64, packing_target: f64) -> Result<Self> {
        check_exponent(d)?;
        if squares.is_empty() {
            return Err(Error::EmptyFamily);
        }
        if !(packing_target > 0.0) {
            return Err(invalid("packing_target", format!("must be positive, got {packing_target}")));
        }
        if let Disjointness::Violation(a, b) = check_disjointness(&squares) {
            return Err(Error::NotDisjoint(a, b));
        }
        let (c, w) = packing_constant(&squares, d)?;
        Ok(Self {
            squares,
            d,
            packing_target,
            packing_constant: c,
            packing_witness: w,
        })
    }

    pub fn squares(&self) -> &[DyadicSquare] {
        &self.squares
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn packing_target(&self) -> f64 {
        self.packing_target
    }

    pub fn packing_constant(&self) -> f64 {
        self.packing_constant
    }

    pub fn packing_witness(&self) -> DyadicSquare {
        self.packing_witness
    }

    pub fn packing_ok(&self) -> bool {
        self.packing_constant <= self.packing_target
    }

    /// Index of the member containing `z` (half-open cells).
    pub fn locate(&self, z: Complex64) -> Option<usize> {
        self.squares.iter().position(|q| q.contains_point(z))
    }

    /// Largest distance between two points of the union of the squares.
    pub fn diameter(&self) -> f64 {
        let corners: Vec<Complex64> = self.squares.iter().flat_map(|q| q.corners()).collect();
        let mut best = 0.0f64;
        for (a, za) in corners.iter().enumerate() {
            for zb in &corners[a + 1..] {
                best = best.max((za - zb).norm());
            }
        }
        best
    }

    pub fn min_side(&self) -> f64 {
        self.squares.iter().map(|q| q.side()).fold(f64::INFINITY, f64::min)
    }

    /// Image of the family under `z -> z / 2`, which maps each `(k, i, j)` to `(k+1, i, j)`.
    pub fn rescaled(&self) -> Result<Self> {
        let squares = self.squares.iter().map(|q| DyadicSquare::new(q.k + 1, q.i, q.j)).collect();
        Self::new(squares, self.d, self.packing_target)
    }

    pub fn to_file(&self) -> FamilyFile {
        FamilyFile {
            d: self.d,
            packing_target: self.packing_target,
            squares: self.squares.clone(),
        }
    }
}

/// On-disk JSON form: `{"d": .., "packing_target": .., "squares": [{"k":..,"i":..,"j":..}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyFile {
    pub d: f64,
    pub packing_target: f64,
    pub squares: Vec<DyadicSquare>,
}

impl FamilyFile {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("family serialization is infallible")
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn into_family(self) -> Result<SquareFamily> {
        SquareFamily::new(self.squares, self.d, self.packing_target)
    }
}

/// Half-open axis-aligned box `[x0, x1) x [y0, y1)` that generated squares must lie in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl BoundingBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) {
            return Err(invalid("bounding_box", "box must have positive width and height"));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    pub fn unit() -> Self {
        Self { x0: 0.0, y0: 0.0, x1: 1.0, y1: 1.0 }
    }

    /// `[0, side)^2`.
    pub fn square(side: f64) -> Self {
        Self { x0: 0.0, y0: 0.0, x1: side, y1: side }
    }

    /// Range of lattice indices of generation-`k` cells lying inside the box.
    fn index_range(lo: f64, hi: f64, k: i32) -> Option<(i64, i64)> {
        let scale = dyadic_pow(-k, 1.0);
        let a = (lo * scale).ceil() as i64;
        let b = (hi * scale).floor() as i64 - 1;
        (a <= b).then_some((a, b))
    }

    /// Coarsest generation needed so that each lattice quadrant meeting the box
    /// lies in a single cell.
    fn root_generation(&self) -> i32 {
        let reach = [self.x0, self.x1, self.y0, self.y1]
            .iter()
            .fold(1.0f64, |m, v| m.max(v.abs()));
        -(reach.log2().ceil() as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub target_count: usize,
    pub d: f64,
    pub packing_target: f64,
    pub k_min: i32,
    pub k_max: i32,
    pub bounding_box: BoundingBox,
    /// Maximum number of candidate draws; `None` means `1000 * target_count + 10_000`.
    pub attempt_budget: Option<usize>,
}

impl GeneratorConfig {
    pub fn new(seed: u64, target_count: usize, d: f64, packing_target: f64) -> Self {
        Self {
            seed,
            target_count,
            d,
            packing_target,
            k_min: 2,
            k_max: 6,
            bounding_box: BoundingBox::unit(),
            attempt_budget: None,
        }
    }

    pub fn generations(mut self, k_min: i32, k_max: i32) -> Self {
        self.k_min = k_min;
        self.k_max = k_max;
        self
    }

    pub fn bounding_box(mut self, bbox: BoundingBox) -> Self {
        self.bounding_box = bbox;
        self
    }

    pub fn attempt_budget(mut self, budget: usize) -> Self {
        self.attempt_budget = Some(budget);
        self
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedFamily {
    pub family: SquareFamily,
    /// `false` when the attempt budget ran out before `target_count` squares were accepted.
    pub complete: bool,
    pub attempts: usize,
}

/// Running ancestor sums of `l^(2-d)` used to test packing after a tentative insertion.
struct PackingLedger {
    d: f64,
    root: i32,
    sums: HashMap<DyadicSquare, f64>,
}

impl PackingLedger {
    fn admits(&self, q: &DyadicSquare, target: f64) -> bool {
        let w = dyadic_pow(q.k, 2.0 - self.d);
        (self.root..=q.k).rev().all(|g| {
            let anc = q.ancestor(g);
            let s = self.sums.get(&anc).copied().unwrap_or(0.0) + w;
            packing_ratio(s, g, self.d) <= target
        })
    }

    fn insert(&mut self, q: &DyadicSquare) {
        let w = dyadic_pow(q.k, 2.0 - self.d);
        for g in (self.root..=q.k).rev() {
            *self.sums.entry(q.ancestor(g)).or_insert(0.0) += w;
        }
    }
}

/// Rejection sampling: candidate cells are drawn uniformly (generation first,
/// then lattice position inside the box) and kept when they preserve both
/// admissibility conditions. Deterministic in `config.seed`.
pub fn generate_family(config: &GeneratorConfig) -> Result<GeneratedFamily> {
    check_exponent(config.d)?;
    if !(config.packing_target >= 1.0) {
        return Err(invalid("packing_target", format!("must be >= 1, got {}", config.packing_target)));
    }
    if config.k_min > config.k_max {
        return Err(invalid("generations", format!("k_min {} > k_max {}", config.k_min, config.k_max)));
    }
    if config.target_count == 0 {
        return Err(invalid("target_count", "must be at least 1"));
    }
    let bbox = config.bounding_box;
    let budget = config
        .attempt_budget
        .unwrap_or(1000 * config.target_count + 10_000);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut ledger = PackingLedger {
        d: config.d,
        root: bbox.root_generation().min(config.k_min),
        sums: HashMap::new(),
    };
    let mut accepted: Vec<DyadicSquare> = Vec::with_capacity(config.target_count);
    let mut attempts = 0;
    while accepted.len() < config.target_count && attempts < budget {
        attempts += 1;
        let k = rng.gen_range(config.k_min..=config.k_max);
        let (Some((ia, ib)), Some((ja, jb))) = (
            BoundingBox::index_range(bbox.x0, bbox.x1, k),
            BoundingBox::index_range(bbox.y0, bbox.y1, k),
        ) else {
            continue;
        };
        let cand = DyadicSquare::new(k, rng.gen_range(ia..=ib), rng.gen_range(ja..=jb));
        if accepted.iter().any(|q| q.dilates_intersect(&cand)) {
            continue;
        }
        if !ledger.admits(&cand, config.packing_target) {
            continue;
        }
        ledger.insert(&cand);
        accepted.push(cand);
    }
    if accepted.is_empty() {
        return Err(invalid("generator", "no square could be placed inside the bounding box"));
    }
    let complete = accepted.len() == config.target_count;
    let family = SquareFamily::new(accepted, config.d, config.packing_target)?;
    Ok(GeneratedFamily {
        family,
        complete,
        attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(k: i32, i: i64, j: i64) -> DyadicSquare {
        DyadicSquare::new(k, i, j)
    }

    #[test]
    fn extents() {
        assert_eq!(sq(0, 0, 0).extent(), (Complex64::new(0.5, 0.5), 1.0));
        assert_eq!(sq(1, 3, 0).extent(), (Complex64::new(1.75, 0.25), 0.5));
        assert_eq!(sq(-1, 0, 0).extent(), (Complex64::new(1.0, 1.0), 2.0));
    }

    #[test]
    fn dilates() {
        let r = sq(0, 0, 0).dilate(4.0).unwrap();
        assert_eq!(r.center, Complex64::new(0.5, 0.5));
        assert_eq!(r.half_side, 2.0);
        let r = sq(0, 0, 0).dilate(1.0).unwrap();
        assert_eq!(r.half_side, 0.5);
        assert!(r.contains(Complex64::new(0.0, 1.0)));
        assert_eq!(sq(2, 0, 0).dilate(8.0).unwrap().half_side, 1.0);
        assert!(sq(0, 0, 0).dilate(0.0).is_err());
        assert!(sq(0, 0, 0).dilate(-2.0).is_err());
    }

    #[test]
    fn disjointness_verdicts() {
        assert_eq!(check_disjointness(&[sq(0, 0, 0), sq(0, 8, 0)]), Disjointness::Ok);
        assert_eq!(check_disjointness(&[sq(0, 0, 0), sq(0, 3, 0)]), Disjointness::Violation(0, 1));
        assert_eq!(check_disjointness(&[sq(3, 5, -2)]), Disjointness::Ok);
        // touching closed dilates count as intersecting
        assert_eq!(check_disjointness(&[sq(0, 0, 0), sq(0, 4, 0)]), Disjointness::Violation(0, 1));
        // mixed generations: [-1.5,2.5] vs the 4-dilate of a side-1/2 square at x in [3,3.5]
        assert!(!check_disjointness(&[sq(0, 0, 0), sq(1, 6, 0)]).is_ok());
        assert!(check_disjointness(&[sq(0, 0, 0), sq(1, 7, 0)]).is_ok());
    }

    #[test]
    fn ancestors_with_negative_coordinates() {
        assert_eq!(sq(2, -1, -5).ancestor(0), sq(0, -1, -2));
        assert!(sq(0, -1, -2).contains_square(&sq(2, -1, -5)));
        assert!(!sq(0, 0, 0).contains_square(&sq(2, -1, 0)));
    }

    #[test]
    fn packing_examples() {
        let single = [sq(3, 1, 2)];
        assert_eq!(packing_constant(&single, 0.7).unwrap(), (1.0, sq(3, 1, 2)));
        let pair = [sq(1, 0, 0), sq(1, 1, 1)];
        let (c, w) = packing_constant(&pair, 1.0).unwrap();
        assert_eq!(c, 1.0);
        assert_eq!(w, sq(1, 0, 0));
        let (c, w) = packing_constant(&pair, 1.5).unwrap();
        assert!((c - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(w, sq(0, 0, 0));
        assert!(packing_constant(&pair, 2.0).is_err());
        assert!(packing_constant(&pair, 0.0).is_err());
        assert!(matches!(packing_constant(&[], 1.0), Err(Error::EmptyFamily)));
    }

    #[test]
    fn packing_scan_reaches_distant_merges() {
        // the two squares only share the ancestor [0, 2^10)^2
        let far = [sq(0, 0, 0), sq(0, 1000, 0)];
        let (c, _) = packing_constant(&far, 1.99).unwrap();
        assert!(c > 1.0);
    }

    #[test]
    fn family_rejects_overlap() {
        let err = SquareFamily::new(vec![sq(0, 0, 0), sq(0, 2, 2)], 1.0, 4.0).unwrap_err();
        assert!(matches!(err, Error::NotDisjoint(0, 1)));
    }

    #[test]
    fn generator_single() {
        let g = generate_family(&GeneratorConfig::new(1, 1, 1.0, 2.0)).unwrap();
        assert!(g.complete);
        assert_eq!(g.family.len(), 1);
        assert_eq!(g.family.packing_constant(), 1.0);
    }

    #[test]
    fn generator_reference_call() {
        let cfg = GeneratorConfig::new(7, 32, 1.2, 4.0);
        let a = generate_family(&cfg).unwrap();
        let b = generate_family(&cfg).unwrap();
        assert_eq!(a.family, b.family);
        assert!(check_disjointness(a.family.squares()).is_ok());
        let (c, _) = packing_constant(a.family.squares(), 1.2).unwrap();
        assert!(c <= 4.0);
        for q in a.family.squares() {
            assert!(q.k >= 2 && q.k <= 6);
            assert!(q.corners().iter().all(|z| z.re >= 0.0 && z.re <= 1.0 && z.im >= 0.0 && z.im <= 1.0));
        }
    }

    #[test]
    fn generator_rejects_bad_parameters() {
        assert!(generate_family(&GeneratorConfig::new(0, 4, 2.5, 4.0)).is_err());
        assert!(generate_family(&GeneratorConfig::new(0, 4, 1.0, 0.5)).is_err());
        assert!(generate_family(&GeneratorConfig::new(0, 4, 1.0, 4.0).generations(5, 2)).is_err());
    }

    #[test]
    fn generator_reports_exhausted_budget() {
        let g = generate_family(&GeneratorConfig::new(3, 10_000, 1.0, 4.0).attempt_budget(2000)).unwrap();
        assert!(!g.complete);
        assert_eq!(g.attempts, 2000);
        assert!(g.family.packing_ok());
    }

    #[test]
    fn family_json_round_trip() {
        let g = generate_family(&GeneratorConfig::new(11, 8, 0.9, 3.0)).unwrap();
        let file = g.family.to_file();
        let back = FamilyFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.into_family().unwrap(), g.family);
    }
}
