use std::io::{Read, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::QuadratureCloud;

/// Which weights define the natural inner product of a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureTag {
    Mu,
    M2,
}

/// Complex values on the nodes of a cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub values: Vec<Complex64>,
    pub tag: MeasureTag,
}

impl Field {
    pub fn new(values: Vec<Complex64>, tag: MeasureTag) -> Self {
        Self { values, tag }
    }

    pub fn zeros(len: usize, tag: MeasureTag) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); len], tag)
    }

    pub fn from_real(values: impl IntoIterator<Item = f64>, tag: MeasureTag) -> Self {
        Self::new(values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(), tag)
    }

    /// Value 1 at `node`, 0 elsewhere.
    pub fn delta(len: usize, node: usize, tag: MeasureTag) -> Self {
        let mut f = Self::zeros(len, tag);
        f.values[node] = Complex64::new(1.0, 0.0);
        f
    }

    /// Indicator of a node subset.
    pub fn indicator(len: usize, nodes: &[usize], tag: MeasureTag) -> Self {
        let mut f = Self::zeros(len, tag);
        for &q in nodes {
            f.values[q] = Complex64::new(1.0, 0.0);
        }
        f
    }

    /// Real and imaginary parts uniform in `[-1, 1)`.
    pub fn random_complex(len: usize, seed: u64, tag: MeasureTag) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new(
            (0..len)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
            tag,
        )
    }

    /// Real values uniform in `[0, 1)`.
    pub fn random_nonnegative(len: usize, seed: u64, tag: MeasureTag) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_real((0..len).map(|_| rng.gen::<f64>()), tag)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_len(&self, expected: usize) -> Result<()> {
        if self.values.len() == expected {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected,
                got: self.values.len(),
            })
        }
    }

    /// Squared weighted l2 norm with the tagged weights of `cloud`.
    pub fn norm_sqr(&self, cloud: &QuadratureCloud) -> f64 {
        let w = match self.tag {
            MeasureTag::Mu => cloud.mu_weights(),
            MeasureTag::M2 => cloud.area_weights(),
        };
        weighted_norm_sqr(&self.values, w)
    }

    pub fn norm(&self, cloud: &QuadratureCloud) -> f64 {
        self.norm_sqr(cloud).sqrt()
    }

    /// `<self, other>` with the tagged weights of `cloud`.
    pub fn inner(&self, other: &Field, cloud: &QuadratureCloud) -> Complex64 {
        let w = match self.tag {
            MeasureTag::Mu => cloud.mu_weights(),
            MeasureTag::M2 => cloud.area_weights(),
        };
        weighted_dot(&self.values, &other.values, w)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// CSV rows `node,re,im`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node", "re", "im"])?;
        for (p, v) in self.values.iter().enumerate() {
            w.write_record(&[p.to_string(), format!("{:e}", v.re), format!("{:e}", v.im)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, tag: MeasureTag) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut values = Vec::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Malformed(format!("field row {row}: bad column {i}")))
            };
            let node = parse(0)? as usize;
            if node != row {
                return Err(Error::Malformed(format!("field row {row}: node index {node} out of order")));
            }
            values.push(Complex64::new(parse(1)?, parse(2)?));
        }
        Ok(Self::new(values, tag))
    }
}

pub(crate) fn weighted_norm_sqr(values: &[Complex64], weights: &[f64]) -> f64 {
    values.iter().zip(weights).map(|(v, w)| v.norm_sqr() * w).sum()
}

/// `<f, g> = sum w f conj(g)`.
pub(crate) fn weighted_dot(f: &[Complex64], g: &[Complex64], weights: &[f64]) -> Complex64 {
    f.iter().zip(g).zip(weights).map(|((a, b), w)| a * b.conj() * w).sum()
}
