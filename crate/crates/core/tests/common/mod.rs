//! Shared fixtures and brute-force reference implementations.
#![allow(dead_code)]

pub mod oracle;

use nhcz::geometry::{DyadicSquare, SquareFamily};
use nhcz::measure::{build_measure, build_quadrature, QuadratureCloud};
use num_complex::Complex64;

pub fn family(squares: &[(i32, i64, i64)], d: f64) -> SquareFamily {
    SquareFamily::new(squares.iter().map(|&(k, i, j)| DyadicSquare::new(k, i, j)).collect(), d, 4.0).unwrap()
}

pub fn cloud(squares: &[(i32, i64, i64)], d: f64, n: usize) -> QuadratureCloud {
    build_quadrature(&build_measure(family(squares, d)), n).unwrap()
}

pub struct Case {
    pub family: SquareFamily,
    pub cloud: QuadratureCloud,
    pub pts: Points,
}

impl Case {
    pub fn new(squares: &[(i32, i64, i64)], d: f64, n: usize) -> Self {
        let family = family(squares, d);
        let cloud = build_quadrature(&build_measure(family.clone()), n).unwrap();
        let pts = Points::of(&family, n);
        Case { family, cloud, pts }
    }
}

/// Small instances of at most 64 nodes with squares of mixed generations.
pub fn small_cases() -> Vec<Case> {
    vec![
        Case::new(&[(0, 0, 0), (0, 5, 0)], 1.0, 2),
        Case::new(&[(1, 0, 0), (2, 12, 1), (0, 4, 3)], 1.3, 4),
        Case::new(&[(0, 0, 0), (1, 10, 2), (2, 3, 17), (0, -6, 2)], 0.8, 4),
        Case::new(&[(3, 0, 0), (3, 40, 0), (0, 0, 6), (2, -9, -9)], 1.6, 3),
    ]
}

/// Brute-force point-view of a cloud, rebuilt from its family so that the
/// references below do not go through the library's per-square tables.
pub struct Points {
    pub d: f64,
    pub x: Vec<Complex64>,
    pub sq: Vec<usize>,
    pub side: Vec<f64>,
    pub area: Vec<f64>,
    pub mu: Vec<f64>,
}

impl Points {
    pub fn of(family: &SquareFamily, n: usize) -> Self {
        let d = family.d();
        let mut p = Points { d, x: vec![], sq: vec![], side: vec![], area: vec![], mu: vec![] };
        for (m, q) in family.squares().iter().enumerate() {
            let l = 0.5f64.powi(q.k);
            let h = l / n as f64;
            for b in 0..n {
                for a in 0..n {
                    p.x.push(Complex64::new(q.i as f64 * l + (a as f64 + 0.5) * h, q.j as f64 * l + (b as f64 + 0.5) * h));
                    p.sq.push(m);
                    p.side.push(l);
                    p.area.push(h * h);
                    p.mu.push(h * h * l.powf(-d));
                }
            }
        }
        p
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn t(&self, p: usize, q: usize) -> Complex64 {
        let z = self.x[p] - self.x[q];
        Complex64::new(1.0, 0.0) / (z * z)
    }

    /// `(kernel value, integration weight)` of the pair for one of the four
    /// operators, or `None` when the pair does not interact.
    pub fn entry(&self, variant: &str, p: usize, q: usize) -> Option<Complex64> {
        if p == q {
            return None;
        }
        let same = self.sq[p] == self.sq[q];
        match variant {
            "full" => Some(self.t(p, q) * self.area[q]),
            "local" if same => Some(self.t(p, q) * self.area[q]),
            "modified" if !same => Some(self.t(p, q) * self.side[q].powf(self.d) * self.mu[q]),
            "adjoint" if !same => Some(self.t(p, q) * self.side[p].powf(self.d) * self.mu[q]),
            _ => None,
        }
    }

    pub fn apply(&self, variant: &str, f: &[Complex64]) -> Vec<Complex64> {
        (0..self.len())
            .map(|p| (0..self.len()).filter_map(|q| self.entry(variant, p, q).map(|e| e * f[q])).sum())
            .collect()
    }

    pub fn ball(&self, c: Complex64, r: f64) -> Vec<usize> {
        (0..self.len()).filter(|&q| (self.x[q] - c).norm() <= r).collect()
    }

    pub fn mu_norm_sqr(&self, v: &[Complex64]) -> f64 {
        v.iter().zip(&self.mu).map(|(a, m)| a.norm_sqr() * m).sum()
    }
}

/// `max |a - b| / max |b|`, or `max |a - b|` when `b` vanishes.
pub fn rel_dev(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let den = b.iter().map(|y| y.norm()).fold(0.0, f64::max);
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}
