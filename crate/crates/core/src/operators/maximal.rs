use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::measure::QuadratureCloud;
use crate::operators::Field;

/// Node count up to which every distinct node distance is used as a radius.
pub const EXACT_LADDER_MAX_NODES: usize = 4096;

/// Radius set used by [`maximal_function`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiusLadder {
    /// All distinct distances from the target node (exact supremum for the discrete measure).
    Exact,
    /// `0` plus `h 2^k` from the finest node spacing `h` up to the cloud diameter.
    Dyadic,
}

impl RadiusLadder {
    pub fn for_cloud(cloud: &QuadratureCloud) -> Self {
        if cloud.len() <= EXACT_LADDER_MAX_NODES {
            RadiusLadder::Exact
        } else {
            RadiusLadder::Dyadic
        }
    }
}

/// `M f(x) = sup_R (sum_{B(x,R)} |f| mu) / mu(B(x, kappa R))`.
pub fn maximal_function(cloud: &QuadratureCloud, f: &Field, kappa: f64) -> Result<Field> {
    maximal_function_with(cloud, f, kappa, RadiusLadder::for_cloud(cloud))
}

pub fn maximal_function_with(
    cloud: &QuadratureCloud,
    f: &Field,
    kappa: f64,
    ladder: RadiusLadder,
) -> Result<Field> {
    f.check_len(cloud.len())?;
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(invalid("kappa", format!("dilation must be >= 1, got {kappa}")));
    }
    let mass: Vec<f64> = f.values.iter().zip(cloud.mu_weights()).map(|(v, m)| v.norm() * m).collect();
    let values: Vec<f64> = match ladder {
        RadiusLadder::Exact => (0..cloud.len())
            .into_par_iter()
            .map(|p| exact_at(cloud, &mass, kappa, p))
            .collect(),
        RadiusLadder::Dyadic => {
            let radii = dyadic_radii(cloud);
            (0..cloud.len())
                .into_par_iter()
                .map(|p| dyadic_at(cloud, &mass, kappa, &radii, p))
                .collect()
        }
    };
    Ok(Field::from_real(values, f.tag))
}

fn exact_at(cloud: &QuadratureCloud, mass: &[f64], kappa: f64, p: usize) -> f64 {
    let pos = cloud.positions();
    let mu = cloud.mu_weights();
    let x = pos[p];
    let mut order: Vec<(f64, usize)> = pos.iter().enumerate().map(|(q, y)| ((x - y).norm(), q)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let n = order.len();
    let (mut num, mut den) = (0.0, 0.0);
    let mut den_at = 0;
    let mut best: f64 = 0.0;
    let mut i = 0;
    while i < n {
        let r = order[i].0;
        while i < n && order[i].0 == r {
            num += mass[order[i].1];
            i += 1;
        }
        let reach = kappa * r;
        while den_at < n && order[den_at].0 <= reach {
            den += mu[order[den_at].1];
            den_at += 1;
        }
        best = best.max(num / den);
    }
    best
}

fn dyadic_radii(cloud: &QuadratureCloud) -> Vec<f64> {
    let mut radii = vec![0.0];
    let h = cloud.finest_spacing();
    let diam = cloud.diameter();
    let mut r = h;
    loop {
        radii.push(r);
        if r >= diam {
            break;
        }
        r *= 2.0;
    }
    radii
}

fn bucket(radii: &[f64], dist: f64) -> Option<usize> {
    // smallest k with dist <= radii[k]
    let k = radii.partition_point(|&r| r < dist);
    (k < radii.len()).then_some(k)
}

fn dyadic_at(cloud: &QuadratureCloud, mass: &[f64], kappa: f64, radii: &[f64], p: usize) -> f64 {
    let pos = cloud.positions();
    let mu = cloud.mu_weights();
    let x = pos[p];
    let scaled: Vec<f64> = radii.iter().map(|r| kappa * r).collect();
    let mut num = vec![0.0; radii.len()];
    let mut den = vec![0.0; radii.len()];
    for (q, y) in pos.iter().enumerate() {
        let dist = (x - y).norm();
        if let Some(k) = bucket(radii, dist) {
            num[k] += mass[q];
        }
        if let Some(k) = bucket(&scaled, dist) {
            den[k] += mu[q];
        }
    }
    let (mut a, mut b, mut best) = (0.0, 0.0, 0.0f64);
    for k in 0..radii.len() {
        a += num[k];
        b += den[k];
        if b > 0.0 {
            best = best.max(a / b);
        }
    }
    best
}
