//! Pointwise domination of T' f by the dilated maximal function, with the
//! annulus split at the worst node.

use nhcz::geometry::{generate_family, BoundingBox, GeneratorConfig};
use nhcz::verify::{audit_annuli, check_domination, Instance};

fn main() -> nhcz::Result<()> {
    let cfg = GeneratorConfig::new(11, 32, 1.2, 4.0).generations(0, 3).bounding_box(BoundingBox::square(24.0));
    let fam = generate_family(&cfg)?.family;
    let audit = audit_annuli(fam.squares());
    println!("annulus audit over {} pairs: {:?}", audit.pairs, audit);

    let inst = Instance::new(fam, 4)?;
    let report = check_domination(&inst, 4, 0)?;
    for name in ["C_dom", "C_dom_random", "C_dom_delta_sweep", "reconstruction_error"] {
        println!("{name:>22} = {:.6e}", report.constant(name));
    }
    println!("witness: {}", report.witnesses["node"]);
    if let Some(annuli) = report.details["annuli"].as_array() {
        for a in annuli {
            println!(
                "  a = {:>2}: {:>2} squares, |part| {:.3e}, mu(B(x, R_a)) {:.3e}",
                a["a"], a["members"], a["contribution"].as_f64().unwrap_or(0.0), a["mass_8"].as_f64().unwrap_or(0.0)
            );
        }
    }
    println!("pass: {}", report.pass);
    Ok(())
}
