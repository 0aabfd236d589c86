//! Library results against independently written double loops on small clouds.
//! Each check panics on the first mismatch.

use super::{rel, rel_dev, small_cases, Case};
use nalgebra::DMatrix;
use nhcz::fast_sum::{build_tree, ExpansionParams, FastOperator};
use nhcz::kernels::{cz_constants, kernel_eval, KernelSpec, KernelVariant, SamplingMode};
use nhcz::measure::{a2_constant, ball_mass, growth_constant, BallQuery, BallSample};
use nhcz::operators::maximal::EXACT_LADDER_MAX_NODES;
use nhcz::operators::{
    apply_direct, beurling_grid, maximal_function_with, operator_norm, square_center_sample, t1_testing,
    DirectOperator, Field, LinearOperator, MeasureTag, RadiusLadder,
};
use num_complex::Complex64;
use std::f64::consts::PI;

const TOL: f64 = 1e-12;

fn name(v: KernelVariant) -> &'static str {
    match v {
        KernelVariant::Full => "full",
        KernelVariant::Modified => "modified",
        KernelVariant::Adjoint => "adjoint",
        KernelVariant::Local => "local",
    }
}

pub fn clouds_match_hand_built_nodes() {
    for case in small_cases() {
        assert!(case.cloud.len() <= 64);
        let p = &case.pts;
        assert_eq!(case.cloud.positions(), &p.x[..]);
        for q in 0..p.len() {
            assert_eq!(case.cloud.square_of(q), p.sq[q]);
            assert!(rel(case.cloud.mu_weights()[q], p.mu[q]) < TOL);
            assert!(rel(case.cloud.area_weights()[q], p.area[q]) < TOL);
        }
    }
}

pub fn kernel_values_match_formula() {
    for case in small_cases() {
        let p = &case.pts;
        for v in KernelVariant::ALL {
            let spec = KernelSpec::new(v, &case.family);
            for a in 0..p.len() {
                for b in 0..p.len() {
                    if a == b {
                        continue;
                    }
                    let got = kernel_eval(&spec, p.x[a], p.x[b]).unwrap();
                    let same = p.sq[a] == p.sq[b];
                    let want = match v {
                        KernelVariant::Full => p.t(a, b),
                        KernelVariant::Local if same => p.t(a, b),
                        KernelVariant::Modified if !same => p.t(a, b) * p.side[b].powf(p.d),
                        KernelVariant::Adjoint if !same => p.t(a, b) * p.side[a].powf(p.d),
                        _ => Complex64::new(0.0, 0.0),
                    };
                    assert!((got - want).norm() <= TOL * want.norm().max(1e-300));
                }
            }
        }
    }
}

pub fn direct_application_matches_double_loop() {
    for case in small_cases() {
        let n = case.cloud.len();
        for seed in 0..3 {
            let f = Field::random_complex(n, seed, MeasureTag::Mu);
            for v in KernelVariant::ALL {
                let got = apply_direct(&case.cloud, v, &f).unwrap();
                let want = case.pts.apply(name(v), &f.values);
                assert!(rel_dev(&got.values, &want) < TOL, "{v:?}");
            }
        }
    }
}

pub fn adjoint_matches_conjugate_transpose_in_mu() {
    for case in small_cases() {
        let p = &case.pts;
        let n = p.len();
        let g = Field::random_complex(n, 11, MeasureTag::Mu).values;
        for v in KernelVariant::ALL {
            let op = DirectOperator::new(&case.cloud, v);
            let got = op.apply_adjoint(&g);
            // (A* g)_q = mu_q^-1 sum_p conj(A_pq) g_p mu_p
            let want: Vec<Complex64> = (0..n)
                .map(|q| {
                    (0..n)
                        .filter_map(|a| p.entry(name(v), a, q).map(|e| e.conj() * g[a] * p.mu[a]))
                        .sum::<Complex64>()
                        / p.mu[q]
                })
                .collect();
            assert!(rel_dev(&got, &want) < TOL, "{v:?}");

            let f = Field::random_complex(n, 12, MeasureTag::Mu).values;
            let af = op.apply(&f);
            let lhs: Complex64 = (0..n).map(|a| af[a] * g[a].conj() * p.mu[a]).sum();
            let rhs: Complex64 = (0..n).map(|a| f[a] * got[a].conj() * p.mu[a]).sum();
            assert!((lhs - rhs).norm() <= TOL * lhs.norm().max(1.0), "{v:?}");
        }
    }
}

pub fn fast_operator_matches_double_loop_when_expansion_is_exact() {
    let params = ExpansionParams::new(48, 0.4, 4).unwrap();
    assert!(params.error_factor() < 1e-15);
    for case in small_cases() {
        let tree = build_tree(&case.cloud, params.leaf_cap).unwrap();
        let n = case.cloud.len();
        let f = Field::random_complex(n, 5, MeasureTag::Mu).values;
        for v in [KernelVariant::Modified, KernelVariant::Adjoint] {
            let op = FastOperator::new(&case.cloud, &tree, v, params).unwrap();
            assert!(rel_dev(&op.apply(&f), &case.pts.apply(name(v), &f)) < TOL);
            let direct = DirectOperator::new(&case.cloud, v);
            assert!(rel_dev(&op.apply_adjoint(&f), &direct.apply_adjoint(&f)) < TOL);
        }
    }
}

fn brute_maximal(case: &Case, f: &[Complex64], kappa: f64, radii: &[f64]) -> Vec<f64> {
    let p = &case.pts;
    (0..p.len())
        .map(|a| {
            let mut best = 0.0f64;
            for &r in radii {
                let num: f64 = p.ball(p.x[a], r).iter().map(|&q| f[q].norm() * p.mu[q]).sum();
                let den: f64 = p.ball(p.x[a], kappa * r).iter().map(|&q| p.mu[q]).sum();
                if den > 0.0 {
                    best = best.max(num / den);
                }
            }
            best
        })
        .collect()
}

pub fn maximal_function_matches_brute_force() {
    for case in small_cases() {
        assert!(case.cloud.len() <= EXACT_LADDER_MAX_NODES);
        let p = &case.pts;
        let f = Field::random_complex(p.len(), 3, MeasureTag::Mu);
        for kappa in [1.0, 3.0] {
            let mut all: Vec<f64> = (0..p.len())
                .flat_map(|a| (0..p.len()).map(move |b| (a, b)))
                .map(|(a, b)| (p.x[a] - p.x[b]).norm())
                .collect();
            all.sort_by(f64::total_cmp);
            all.dedup();
            let exact = maximal_function_with(&case.cloud, &f, kappa, RadiusLadder::Exact).unwrap();
            let want = brute_maximal(&case, &f.values, kappa, &all);
            for (g, w) in exact.values.iter().zip(&want) {
                assert!(rel(g.re, *w) < TOL);
            }

            let mut ladder = vec![0.0];
            let mut r = case.cloud.finest_spacing();
            loop {
                ladder.push(r);
                if r >= case.cloud.diameter() {
                    break;
                }
                r *= 2.0;
            }
            let dy = maximal_function_with(&case.cloud, &f, kappa, RadiusLadder::Dyadic).unwrap();
            let want = brute_maximal(&case, &f.values, kappa, &ladder);
            for (g, w) in dy.values.iter().zip(&want) {
                assert!(rel(g.re, *w) < TOL);
            }
        }
    }
}

pub fn t1_testing_matches_brute_force() {
    for case in small_cases() {
        let p = &case.pts;
        let sample = square_center_sample(&case.cloud, 16, 0);
        let report = t1_testing(&case.cloud, &sample);
        let (mut sup_t, mut sup_a) = (0.0f64, 0.0f64);
        for &c in &sample.centers {
            for &r in &sample.radii {
                let ball = p.ball(c, r);
                if ball.is_empty() {
                    continue;
                }
                let mut chi = vec![Complex64::new(0.0, 0.0); p.len()];
                for &q in &ball {
                    chi[q] = Complex64::new(1.0, 0.0);
                }
                let mass: f64 = ball.iter().map(|&q| p.mu[q]).sum();
                sup_t = sup_t.max(p.mu_norm_sqr(&p.apply("modified", &chi)) / mass);
                sup_a = sup_a.max(p.mu_norm_sqr(&p.apply("adjoint", &chi)) / mass);
            }
        }
        assert!(sup_t > 0.0 && sup_a > 0.0);
        assert!(rel(report.sup_t, sup_t) < TOL);
        assert!(rel(report.sup_tadj, sup_a) < TOL);
    }
}

pub fn ball_quantities_match_brute_force() {
    for case in small_cases() {
        let p = &case.pts;
        let s = 2.0 - p.d;
        let sample = BallSample::default_for(&case.cloud);
        let (mut growth, mut a2) = (0.0f64, 0.0f64);
        for &c in &sample.centers {
            for &r in &sample.radii {
                let ball = p.ball(c, r);
                let mass: f64 = ball.iter().map(|&q| p.mu[q]).sum();
                let inv: f64 = ball.iter().map(|&q| p.area[q] * p.side[q].powf(p.d)).sum();
                let got = ball_mass(&case.cloud, &BallQuery::new(c, r).unwrap());
                assert!(rel(got, mass) < TOL);
                growth = growth.max(mass / r.powf(s));
                let area = PI * r * r;
                a2 = a2.max(mass / area * inv / area);
            }
        }
        assert!(rel(growth_constant(&case.cloud, &sample).constant, growth) < TOL);
        assert!(rel(a2_constant(&case.cloud, &sample).constant, a2) < TOL);
    }
}

pub fn cz_constants_match_exhaustive_enumeration() {
    for case in small_cases() {
        let p = &case.pts;
        let n = p.len();
        for tau in [0.3, 0.6, 0.9] {
            let s = 2.0 - p.d;
            let eps = (tau * p.d).min(1.0);
            let k = |a: usize, b: usize| p.entry("modified", a, b).map_or(Complex64::new(0.0, 0.0), |e| e / p.mu[b]);
            let (mut ai, mut aii, mut aiii, mut iii2) = (0.0f64, 0.0f64, 0.0f64, 0usize);
            for a in 0..n {
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    let dist = (p.x[a] - p.x[b]).norm();
                    if p.sq[a] != p.sq[b] {
                        ai = ai.max(k(a, b).norm() * dist.powf(s));
                    }
                    for r in 0..n {
                        let dx = (p.x[a] - p.x[r]).norm();
                        if r != a && dx <= dist / 2.0 {
                            aii = aii.max((k(a, b) - k(r, b)).norm() * dist.powf(s + eps) / dx.powf(eps));
                        }
                        let dy = (p.x[b] - p.x[r]).norm();
                        if r != b && dy <= dist / 2.0 {
                            aiii = aiii.max((k(a, b) - k(a, r)).norm() * dist.powf(s + eps) / dy.powf(eps));
                            let (sa, sb, sr) = (p.sq[a], p.sq[b], p.sq[r]);
                            if (sa == sb && sr != sb) || (sa == sr && sb != sa) {
                                iii2 += 1;
                            }
                        }
                    }
                }
            }
            let rep = cz_constants(&case.cloud, tau, 1_000_000, 0).unwrap();
            assert_eq!(rep.mode, SamplingMode::Exhaustive);
            assert!(rel(rep.a_i, ai) < TOL && rel(rep.a_ii, aii) < TOL && rel(rep.a_iii, aiii) < TOL);
            assert_eq!(rep.iii2_counterexamples, iii2);
            assert_eq!(iii2, 0);
        }
    }
}

pub fn beurling_matches_naive_dft() {
    let n = 8;
    let f = Field::random_complex(n * n, 4, MeasureTag::M2).values;
    let freq = |k: usize| if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
    let mut hat = vec![Complex64::new(0.0, 0.0); n * n];
    for b in 0..n {
        for a in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for y in 0..n {
                for x in 0..n {
                    let ph = -2.0 * PI * ((a * x + b * y) as f64) / n as f64;
                    acc += f[y * n + x] * Complex64::from_polar(1.0, ph);
                }
            }
            let xi = Complex64::new(freq(a), freq(b));
            hat[b * n + a] = if a == 0 && b == 0 { Complex64::new(0.0, 0.0) } else { acc * xi.conj() / xi };
        }
    }
    let mut want = vec![Complex64::new(0.0, 0.0); n * n];
    for y in 0..n {
        for x in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..n {
                for a in 0..n {
                    let ph = 2.0 * PI * ((a * x + b * y) as f64) / n as f64;
                    acc += hat[b * n + a] * Complex64::from_polar(1.0, ph);
                }
            }
            want[y * n + x] = acc / (n * n) as f64;
        }
    }
    assert!(rel_dev(&beurling_grid(&f, n).unwrap(), &want) < TOL);
}

/// Largest singular value of `D^(1/2) A D^(-1/2)` with `D = diag(mu)`.
fn dense_norm(case: &Case, variant: &str) -> f64 {
    let p = &case.pts;
    let n = p.len();
    let m = DMatrix::from_fn(n, n, |a, b| {
        p.entry(variant, a, b).map_or(Complex64::new(0.0, 0.0), |e| e * (p.mu[a] / p.mu[b]).sqrt())
    });
    m.singular_values().max()
}

pub fn power_iteration_matches_dense_svd() {
    for (i, case) in small_cases().into_iter().enumerate() {
        for v in [KernelVariant::Modified, KernelVariant::Adjoint] {
            let want = dense_norm(&case, name(v));
            let est = operator_norm(&DirectOperator::new(&case.cloud, v), 1e-14, 20_000, 0).unwrap();
            let tol = if i == 0 { 1e-8 } else { 1e-6 };
            assert!(rel(est.sigma_max, want) < tol, "case {i} {v:?}: {} vs {want}", est.sigma_max);
        }
    }
}

/// Every check, by name.
pub const ALL: &[(&str, fn())] = &[
    ("clouds_match_hand_built_nodes", clouds_match_hand_built_nodes),
    ("kernel_values_match_formula", kernel_values_match_formula),
    ("direct_application_matches_double_loop", direct_application_matches_double_loop),
    ("adjoint_matches_conjugate_transpose_in_mu", adjoint_matches_conjugate_transpose_in_mu),
    ("fast_operator_matches_double_loop_when_expansion_is_exact", fast_operator_matches_double_loop_when_expansion_is_exact),
    ("maximal_function_matches_brute_force", maximal_function_matches_brute_force),
    ("t1_testing_matches_brute_force", t1_testing_matches_brute_force),
    ("ball_quantities_match_brute_force", ball_quantities_match_brute_force),
    ("cz_constants_match_exhaustive_enumeration", cz_constants_match_exhaustive_enumeration),
    ("beurling_matches_naive_dft", beurling_matches_naive_dft),
    ("power_iteration_matches_dense_svd", power_iteration_matches_dense_svd),
];
