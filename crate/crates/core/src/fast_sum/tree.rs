use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::measure::QuadratureCloud;

const MAX_DEPTH: usize = 48;

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Tight bounding box of the cell's nodes.
    pub lo: Complex64,
    pub hi: Complex64,
    /// Expansion center (center of the tight box).
    pub center: Complex64,
    /// Largest distance from `center` to a node of the cell.
    pub radius: f64,
    /// Range into [`QuadTree::order`].
    pub start: usize,
    pub end: usize,
    pub children: Vec<usize>,
    pub depth: usize,
}

impl Cell {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// Euclidean distance from `z` to the cell's tight box (0 inside).
    pub fn box_distance(&self, z: Complex64) -> f64 {
        let dx = (self.lo.re - z.re).max(z.re - self.hi.re).max(0.0);
        let dy = (self.lo.im - z.im).max(z.im - self.hi.im).max(0.0);
        dx.hypot(dy)
    }

    pub(crate) fn box_intersects(&self, lo: Complex64, hi: Complex64) -> bool {
        self.lo.re <= hi.re && lo.re <= self.hi.re && self.lo.im <= hi.im && lo.im <= self.hi.im
    }
}

/// Adaptive quadtree over the nodes of a cloud. Cells are split at the
/// midpoint of their geometric box until they hold at most `leaf_cap` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadTree {
    pub cells: Vec<Cell>,
    /// Node indices in tree order; every cell owns a contiguous range.
    pub order: Vec<usize>,
    pub leaf_cap: usize,
}

impl QuadTree {
    pub fn build(cloud: &QuadratureCloud, leaf_cap: usize) -> Result<Self> {
        if leaf_cap < 1 {
            return Err(invalid("leaf_cap", "must be at least 1"));
        }
        if cloud.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let pos = cloud.positions();
        let mut order: Vec<usize> = (0..pos.len()).collect();
        let (lo, hi) = bounds(pos, &order);
        let half = 0.5 * (hi.re - lo.re).max(hi.im - lo.im);
        let mid = (lo + hi) * 0.5;
        let mut cells = Vec::new();
        // (cell index, geometric center, geometric half side)
        let mut stack = vec![(0usize, mid, half)];
        cells.push(make_cell(pos, &order, 0, pos.len(), 0));
        while let Some((ci, gc, gh)) = stack.pop() {
            let (start, end, depth) = (cells[ci].start, cells[ci].end, cells[ci].depth);
            if end - start <= leaf_cap || depth >= MAX_DEPTH || gh == 0.0 {
                continue;
            }
            let mut buckets: [Vec<usize>; 4] = Default::default();
            for &q in &order[start..end] {
                let z = pos[q];
                let b = (z.re >= gc.re) as usize + 2 * ((z.im >= gc.im) as usize);
                buckets[b].push(q);
            }
            let mut at = start;
            let mut kids = Vec::with_capacity(4);
            for (b, bucket) in buckets.iter().enumerate() {
                if bucket.is_empty() {
                    continue;
                }
                order[at..at + bucket.len()].copy_from_slice(bucket);
                let idx = cells.len();
                cells.push(make_cell(pos, &order, at, at + bucket.len(), depth + 1));
                let q = gh * 0.5;
                let off = Complex64::new(if b & 1 == 1 { q } else { -q }, if b & 2 == 2 { q } else { -q });
                kids.push((idx, gc + off, q));
                at += bucket.len();
            }
            cells[ci].children = kids.iter().map(|k| k.0).collect();
            // reversed so that children are refined in quadrant order
            stack.extend(kids.into_iter().rev());
        }
        Ok(Self { cells, order, leaf_cap })
    }

    pub fn root(&self) -> &Cell {
        &self.cells[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.is_leaf())
    }

    pub fn depth(&self) -> usize {
        self.cells.iter().map(|c| c.depth).max().unwrap_or(0)
    }

    /// Cell indices with every child before its parent.
    pub(crate) fn post_order(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.cells.len()).rev()
    }
}

fn bounds(pos: &[Complex64], idx: &[usize]) -> (Complex64, Complex64) {
    let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &q in idx {
        let z = pos[q];
        lo = Complex64::new(lo.re.min(z.re), lo.im.min(z.im));
        hi = Complex64::new(hi.re.max(z.re), hi.im.max(z.im));
    }
    (lo, hi)
}

fn make_cell(pos: &[Complex64], order: &[usize], start: usize, end: usize, depth: usize) -> Cell {
    let (lo, hi) = bounds(pos, &order[start..end]);
    let center = (lo + hi) * 0.5;
    let radius = order[start..end].iter().fold(0.0f64, |r, &q| r.max((pos[q] - center).norm()));
    Cell {
        lo,
        hi,
        center,
        radius,
        start,
        end,
        children: Vec::new(),
        depth,
    }
}
