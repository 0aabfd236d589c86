//! Treecode against direct summation: accuracy at several orders and a
//! small timing ladder.

use nhcz::fast_sum::{apply_fast, bench_family, benchmark, build_tree, max_relative_deviation, BenchConfig, ExpansionParams};
use nhcz::kernels::KernelVariant;
use nhcz::measure::{build_measure, build_quadrature};
use nhcz::operators::{apply_direct, Field, MeasureTag};

fn main() -> nhcz::Result<()> {
    let fam = bench_family(4096, 1.2, 4.0, 16, 0)?;
    let cloud = build_quadrature(&build_measure(fam), 16)?;
    let f = Field::random_complex(cloud.len(), 0, MeasureTag::Mu);
    let direct = apply_direct(&cloud, KernelVariant::Modified, &f)?;
    for p in [4, 8, 12, 16, 24] {
        let params = ExpansionParams::new(p, 0.5, 32)?;
        let tree = build_tree(&cloud, params.leaf_cap)?;
        let fast = apply_fast(&cloud, &tree, KernelVariant::Modified, &f, &params)?;
        println!(
            "p = {p:>2}: max relative deviation {:.2e} (theta^p = {:.1e})",
            max_relative_deviation(&fast.values, &direct.values),
            params.error_factor()
        );
    }

    let report = benchmark(&BenchConfig::new(vec![1024, 4096, 16384], ExpansionParams::default(), 0))?;
    report.write_csv(std::io::stdout())?;
    println!("fast cost exponent {:.3}", report.fast_cost_exponent);
    Ok(())
}
