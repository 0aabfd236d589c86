//! Kernel values of the four variants and the empirical size and smoothness constants.

use nhcz::geometry::{DyadicSquare, SquareFamily};
use nhcz::kernels::{cz_constants, kernel_eval, KernelSpec, KernelVariant};
use nhcz::measure::{build_measure, build_quadrature};
use num_complex::Complex64;

fn main() -> nhcz::Result<()> {
    let fam = SquareFamily::new(vec![DyadicSquare::new(0, 0, 0), DyadicSquare::new(1, 10, 0)], 1.2, 4.0)?;
    let x = Complex64::new(0.5, 0.5);
    let y = Complex64::new(5.25, 0.25);
    for v in KernelVariant::ALL {
        let k = kernel_eval(&KernelSpec::new(v, &fam), x, y)?;
        println!("{v:?}(x, y) = {k:.6}");
    }

    let cloud = build_quadrature(&build_measure(fam), 6)?;
    for tau in [0.3, 0.6, 0.9] {
        let r = cz_constants(&cloud, tau, 200_000, 0)?;
        println!(
            "tau {tau}: eps {:.2}, A_I {:.4}, A_II {:.4}, A_III {:.4}, III.2 counterexamples {} ({:?}, {} pairs)",
            r.epsilon, r.a_i, r.a_ii, r.a_iii, r.iii2_counterexamples, r.mode, r.pairs
        );
    }
    Ok(())
}
