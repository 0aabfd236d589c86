use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::measure::QuadratureCloud;
use crate::operators::Field;

/// Normalized Beurling transform on the `N x N` torus as the Fourier multiplier
/// `conj(xi)/xi`, `xi = xi_1 + i xi_2`, with the zero mode sent to 0.
///
/// `values` are row-major with the x index fastest, matching the node order of
/// a one-square midpoint cloud.
pub fn beurling_grid(values: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
    if n == 0 || n % 2 != 0 {
        return Err(invalid("n", format!("grid side must be even and positive, got {n}")));
    }
    if values.len() != n * n {
        return Err(Error::LengthMismatch {
            expected: n * n,
            got: values.len(),
        });
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut data = values.to_vec();
    fft2(&mut data, n, fwd.as_ref());
    let freq = |k: usize| if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
    for b in 0..n {
        for a in 0..n {
            let xi = Complex64::new(freq(a), freq(b));
            let m = if a == 0 && b == 0 { Complex64::new(0.0, 0.0) } else { xi.conj() / xi };
            data[b * n + a] *= m;
        }
    }
    fft2(&mut data, n, inv.as_ref());
    let scale = 1.0 / (n * n) as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
    Ok(data)
}

fn fft2(data: &mut [Complex64], n: usize, plan: &dyn rustfft::Fft<f64>) {
    for row in data.chunks_exact_mut(n) {
        plan.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for a in 0..n {
        for b in 0..n {
            col[b] = data[b * n + a];
        }
        plan.process(&mut col);
        for b in 0..n {
            data[b * n + a] = col[b];
        }
    }
}

/// [`beurling_grid`] applied to a field on a one-square cloud, read as a periodic grid.
pub fn beurling_spectral(cloud: &QuadratureCloud, g: &Field) -> Result<Field> {
    g.check_len(cloud.len())?;
    if cloud.squares().len() != 1 || cloud.n_per_side() == 0 {
        return Err(Error::Unsupported(
            "the spectral Beurling transform needs a one-square midpoint cloud".into(),
        ));
    }
    Ok(Field::new(beurling_grid(&g.values, cloud.n_per_side())?, g.tag))
}
