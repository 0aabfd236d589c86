//! L^2(mu) operator norms by power iteration, and the main inequality report.

use nhcz::geometry::{generate_family, BoundingBox, GeneratorConfig};
use nhcz::kernels::KernelVariant;
use nhcz::operators::{operator_norm, DirectOperator};
use nhcz::verify::{check_main_inequality, Instance, NormConfig};

fn main() -> nhcz::Result<()> {
    let cfg = GeneratorConfig::new(3, 16, 1.2, 4.0).generations(0, 3).bounding_box(BoundingBox::square(16.0));
    let fam = generate_family(&cfg)?.family;
    let inst = Instance::new(fam, 6)?;

    for v in [KernelVariant::Modified, KernelVariant::Adjoint] {
        let est = operator_norm(&DirectOperator::new(&inst.cloud, v), 1e-10, 2000, 0)?;
        println!("{v:?}: sigma_max {:.6} after {} iterations", est.sigma_max, est.iterations);
    }

    let report = check_main_inequality(&inst, &NormConfig::default())?;
    println!("\n{}", report.to_json());
    Ok(())
}
