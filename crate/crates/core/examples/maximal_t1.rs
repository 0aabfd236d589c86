//! The dilated maximal function and the T1 testing conditions on balls.

use nhcz::geometry::{generate_family, BoundingBox, GeneratorConfig};
use nhcz::measure::{build_measure, build_quadrature};
use nhcz::operators::{maximal_function, square_center_sample, t1_testing, Field, MeasureTag, DEFAULT_KAPPA};

fn main() -> nhcz::Result<()> {
    let cfg = GeneratorConfig::new(2, 12, 1.0, 4.0).generations(0, 3).bounding_box(BoundingBox::square(16.0));
    let fam = generate_family(&cfg)?.family;
    let cloud = build_quadrature(&build_measure(fam.clone()), 4)?;

    for seed in 0..4 {
        let f = Field::random_complex(cloud.len(), seed, MeasureTag::Mu);
        let mf = maximal_function(&cloud, &f, DEFAULT_KAPPA)?;
        println!("field {seed}: ||M f|| / ||f|| = {:.4}", mf.norm(&cloud) / f.norm(&cloud));
    }

    let sample = square_center_sample(&cloud, 12, 0);
    for n in [4, 8] {
        let c = build_quadrature(&build_measure(fam.clone()), n)?;
        let r = t1_testing(&c, &sample);
        println!(
            "n = {n}: sup ||T 1_B||^2 / mu(B) = {:.4e}, adjoint {:.4e} ({} balls, {} empty)",
            r.sup_t, r.sup_tadj, r.balls_tested, r.balls_skipped
        );
    }
    Ok(())
}
