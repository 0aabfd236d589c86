//! Constants along a ladder of family sizes at fixed packing target.

use nhcz::verify::{scaling_study, ScalingConfig};

fn main() -> nhcz::Result<()> {
    let study = scaling_study(&ScalingConfig::new(1.2, vec![4, 16, 64], 0))?;
    print!("{}", String::from_utf8_lossy(&study.table_csv()?));
    println!("sigma_max max/median: {:.3}", study.sigma_spread());
    Ok(())
}
