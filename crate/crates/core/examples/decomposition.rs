//! The full kernel splits exactly into the modified and local parts.

use nhcz::geometry::{generate_family, BoundingBox, GeneratorConfig};
use nhcz::kernels::KernelVariant;
use nhcz::operators::{apply_direct, Field, MeasureTag};
use nhcz::verify::{check_decomposition, decomposition_deviation, Instance};

fn main() -> nhcz::Result<()> {
    let cfg = GeneratorConfig::new(5, 8, 1.5, 4.0).generations(0, 2).bounding_box(BoundingBox::square(12.0));
    let inst = Instance::new(generate_family(&cfg)?.family, 6)?;
    let f = Field::random_complex(inst.cloud.len(), 1, MeasureTag::M2);
    for v in KernelVariant::ALL {
        println!("max |{v:?} f| = {:.4e}", apply_direct(&inst.cloud, v, &f)?.max_abs());
    }
    let (rel, abs, node) = decomposition_deviation(&inst.cloud, &f)?;
    println!("|t f - (K f + t0 f)|: relative {rel:.2e}, absolute {abs:.2e} at node {node}");

    let report = check_decomposition(&inst, 20, 0)?;
    println!("20 random fields and a delta: worst relative {:.2e}, pass {}", report.constant("max_relative_deviation"), report.pass);
    Ok(())
}
