//! The spectral Beurling transform on a periodic grid is an isometry on mean-zero fields.

use nhcz::geometry::{DyadicSquare, SquareFamily};
use nhcz::measure::{build_measure, build_quadrature};
use nhcz::operators::{beurling_spectral, Field, MeasureTag};
use num_complex::Complex64;

fn main() -> nhcz::Result<()> {
    let fam = SquareFamily::new(vec![DyadicSquare::new(0, 0, 0)], 1.0, 4.0)?;
    let cloud = build_quadrature(&build_measure(fam), 128)?;
    let mut f = Field::random_complex(cloud.len(), 0, MeasureTag::M2);
    let mean = f.values.iter().sum::<Complex64>() / f.len() as f64;
    f.values.iter_mut().for_each(|v| *v -= mean);
    let g = beurling_spectral(&cloud, &f)?;
    let (a, b) = (f.norm(&cloud), g.norm(&cloud));
    println!("||f|| = {a:.12}, ||B f|| = {b:.12}, relative change {:.2e}", (b / a - 1.0).abs());
    Ok(())
}
