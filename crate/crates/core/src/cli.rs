//! Command-line front end: argument parsing, dispatch and artifact output.
//!
//! Exit status is 0 when every check passes, 1 when a check misses its
//! threshold and 2 for malformed input (reported as JSON on stderr).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::fast_sum::{benchmark, BenchConfig, ExpansionParams};
use crate::geometry::{check_disjointness, generate_family, packing_constant, BoundingBox, Disjointness, FamilyFile, GeneratorConfig, SquareFamily, DyadicSquare};
use crate::io::{sha256_hex, write_atomic};
use crate::kernels::cz_constants;
use crate::measure::{a2_constant, borderline_exponent, growth_constant, BallSample};
use crate::operators::{beurling_spectral, square_center_sample, t1_testing_with, Field, MeasureTag};
use crate::verify::{
    check_decomposition, check_domination, check_main_inequality, scaling_study, Instance, InputsDigest, NormConfig,
    ScalingConfig, VerificationReport,
};

#[derive(Debug, Parser)]
#[command(name = "nhcz", version, about = "Checks for modified Calderón–Zygmund kernels on dyadic square families")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: RunConfig,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Family file (JSON); when absent a family is generated from --seed, --M, --d and --packing-target.
    #[arg(long, global = true)]
    pub family: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1.2)]
    pub d: f64,
    /// Quadrature nodes per square side.
    #[arg(long, global = true, default_value_t = 8)]
    pub n: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value = "nhcz-out")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long = "packing-target", global = true, default_value_t = 4.0)]
    pub packing_target: f64,
    /// Square counts, comma separated.
    #[arg(long = "M", global = true, value_delimiter = ',', default_value = "16")]
    pub m: Vec<usize>,
    #[arg(long, global = true, default_value_t = 0.5)]
    pub tau: f64,
    /// Expansion order of the treecode.
    #[arg(long, global = true, default_value_t = 12)]
    pub p: usize,
    #[arg(long, global = true, default_value_t = 0.5)]
    pub theta: f64,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Generate an admissible family and write family.json.
    Generate {
        #[arg(long = "k-min", default_value_t = 2)]
        k_min: i32,
        #[arg(long = "k-max", default_value_t = 6)]
        k_max: i32,
        #[arg(long = "box-side", default_value_t = 1.0)]
        box_side: f64,
    },
    /// Exact disjointness and packing checks of a family file.
    Validate,
    /// Operator norm of the adjoint kernel on L^2(mu).
    Norm {
        #[arg(long, default_value_t = 8)]
        trials: usize,
    },
    /// Pointwise domination by the dilated maximal function.
    Dominate {
        #[arg(long, default_value_t = 4)]
        trials: usize,
    },
    /// Empirical Calderón–Zygmund constants.
    Czcheck {
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
    },
    /// Growth constant over the default ball sample.
    Growth,
    /// A2-type ratio over the default ball sample.
    A2,
    /// T1 testing conditions over square-centered balls.
    T1 {
        #[arg(long, default_value_t = 16)]
        centers: usize,
    },
    /// Full kernel versus modified plus local.
    Decompose {
        #[arg(long, default_value_t = 4)]
        trials: usize,
    },
    /// Norm preservation of the spectral Beurling transform on an n x n grid.
    Beurling,
    /// Direct versus treecode timings.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "1024,4096,16384")]
        sizes: Vec<usize>,
    },
    /// Constants along a ladder of family sizes (--M).
    Scaling,
    /// Borderline exponent t' with 1/t' - 1/2 = (1/K)(1/t - 1/2).
    Exponent {
        #[arg(long)]
        t: f64,
        #[arg(long = "K")]
        k: f64,
    },
}

/// Result of one dispatched command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    /// Text printed on stdout.
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprintln!("{}", error_json("usage", &e.to_string()));
            return 2;
        }
    };
    match execute(&cli.command, &cli.config) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            if outcome.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("{}", error_json(error_kind(&e), &e.to_string()));
            2
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidParameter { .. } => "invalid_parameter",
        Error::NotDisjoint(..) => "not_disjoint",
        Error::EmptyFamily => "empty_family",
        Error::EmptyCloud => "empty_cloud",
        Error::LengthMismatch { .. } => "length_mismatch",
        Error::CoincidentPoints(_) => "coincident_points",
        Error::OutsideSupport(_) => "outside_support",
        Error::Unsupported(_) => "unsupported",
        Error::Malformed(_) => "malformed",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
        Error::Csv(_) => "csv",
    }
}

fn error_json(kind: &str, message: &str) -> String {
    json!({ "error": kind, "message": message.trim_end() }).to_string()
}

fn load_family(cfg: &RunConfig) -> Result<SquareFamily> {
    match &cfg.family {
        Some(path) => FamilyFile::read(path)?.into_family(),
        None => {
            let m = *cfg.m.first().ok_or_else(|| invalid("M", "no square count given"))?;
            Ok(generate_family(&GeneratorConfig::new(cfg.seed, m, cfg.d, cfg.packing_target))?.family)
        }
    }
}

fn params(cfg: &RunConfig) -> Result<ExpansionParams> {
    ExpansionParams::new(cfg.p, cfg.theta, ExpansionParams::default().leaf_cap)
}

fn write_report(out: &Path, report: &VerificationReport, files: &mut Vec<PathBuf>) -> Result<()> {
    let path = out.join(format!("{}.json", report.check));
    write_atomic(&path, report.to_json().as_bytes())?;
    files.push(path);
    write_inputs(out, &report.inputs, files)
}

fn write_inputs(out: &Path, inputs: &InputsDigest, files: &mut Vec<PathBuf>) -> Result<()> {
    let path = out.join("inputs.json");
    write_atomic(&path, serde_json::to_string_pretty(inputs)?.as_bytes())?;
    files.push(path);
    Ok(())
}

fn report_outcome(out: &Path, report: VerificationReport) -> Result<Outcome> {
    let mut files = Vec::new();
    write_report(out, &report, &mut files)?;
    let constants: BTreeMap<&String, &f64> = report.constants.iter().collect();
    Ok(Outcome {
        pass: report.pass,
        summary: format!(
            "{} {}: {}",
            report.check,
            if report.pass { "pass" } else { "FAIL" },
            serde_json::to_string(&constants)?
        ),
        files,
    })
}

/// A report whose constants are the given values, passing when all are finite.
fn finite_report(inst: &Instance, check: &str, seed: u64, values: &[(&str, f64)], witnesses: Vec<(&str, Value)>) -> VerificationReport {
    let mut r = VerificationReport::new(check, inst.inputs(vec![seed], BTreeMap::new()));
    for (k, v) in values {
        r.constants.insert((*k).into(), *v);
    }
    for (k, v) in witnesses {
        r.witnesses.insert(k.into(), v);
    }
    r.pass = values.iter().all(|(_, v)| v.is_finite());
    r
}

pub fn execute(command: &Command, cfg: &RunConfig) -> Result<Outcome> {
    if let Some(t) = cfg.threads {
        if t == 0 {
            return Err(invalid("threads", "must be positive"));
        }
        // a pool that already exists keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    if !(cfg.tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    let out = cfg.out.as_path();
    match command {
        Command::Exponent { t, k } => {
            let tp = borderline_exponent(*t, *k)?;
            Ok(Outcome {
                pass: true,
                summary: format!("t' = {tp:.10}"),
                files: Vec::new(),
            })
        }
        Command::Generate { k_min, k_max, box_side } => {
            let m = *cfg.m.first().ok_or_else(|| invalid("M", "no square count given"))?;
            let gen = generate_family(
                &GeneratorConfig::new(cfg.seed, m, cfg.d, cfg.packing_target)
                    .generations(*k_min, *k_max)
                    .bounding_box(BoundingBox::new(0.0, 0.0, *box_side, *box_side)?),
            )?;
            let json = gen.family.to_file().to_json();
            let path = out.join("family.json");
            write_atomic(&path, json.as_bytes())?;
            let inputs = InputsDigest::new(
                sha256_hex(json.as_bytes()),
                cfg.d,
                cfg.n,
                vec![cfg.seed],
                BTreeMap::from([
                    ("M".to_string(), m as f64),
                    ("packing_target".to_string(), cfg.packing_target),
                    ("k_min".to_string(), *k_min as f64),
                    ("k_max".to_string(), *k_max as f64),
                    ("box_side".to_string(), *box_side),
                ]),
            );
            let mut files = vec![path];
            write_inputs(out, &inputs, &mut files)?;
            Ok(Outcome {
                pass: gen.complete,
                summary: format!(
                    "generated {} of {} squares (C_pack = {}, attempts = {}){}",
                    gen.family.len(),
                    m,
                    gen.family.packing_constant(),
                    gen.attempts,
                    if gen.complete { "" } else { "; attempt budget exhausted" }
                ),
                files,
            })
        }
        Command::Validate => validate(cfg),
        Command::Norm { trials } => {
            let inst = Instance::new(load_family(cfg)?, cfg.n)?;
            let ncfg = NormConfig {
                trials: *trials,
                seed: cfg.seed,
                tol: cfg.tol,
                ..NormConfig::default()
            };
            report_outcome(out, check_main_inequality(&inst, &ncfg)?)
        }
        Command::Dominate { trials } => {
            let inst = Instance::new(load_family(cfg)?, cfg.n)?;
            report_outcome(out, check_domination(&inst, *trials, cfg.seed)?)
        }
        Command::Decompose { trials } => {
            let inst = Instance::new(load_family(cfg)?, cfg.n)?;
            report_outcome(out, check_decomposition(&inst, *trials, cfg.seed)?)
        }
        Command::Czcheck { budget } => {
            let inst = Instance::new(load_family(cfg)?, cfg.n)?;
            let cz = cz_constants(&inst.cloud, cfg.tau, *budget, cfg.seed)?;
            let mut r = finite_report(
                &inst,
                "czcheck",
                cfg.seed,
                &[("A_I", cz.a_i), ("A_II", cz.a_ii), ("A_III", cz.a_iii), ("epsilon", cz.epsilon), ("s", cz.s)],
                Vec::new(),
            );
            r.constants.insert("iii2_counterexamples".into(), cz.iii2_counterexamples as f64);
            r.thresholds.insert("iii2_counterexamples".into(), 0.0);
            r.details.insert("cz".into(), serde_json::to_value(&cz)?);
            r.pass &= cz.iii2_counterexamples == 0;
            report_outcome(out, r)
        }
        Command::Growth | Command::A2 => {
            let inst = Instance::new(load_family(cfg)?, cfg.n)?;
            let sample = BallSample::default_for(&inst.cloud);
            let (name, c) = if matches!(command, Command::Growth) {
                ("growth", growth_constant(&inst.cloud, &sample))
            } else {
                ("a2", a2_constant(&inst.cloud, &sample))
            };
            let mut r = finite_report(
                &inst,
                name,
                cfg.seed,
                &[("constant", c.constant)],
                vec![("ball", serde_json::to_value(c.witness)?)],
            );
            r.details.insert("sample".into(), Value::String(c.sample));
            report_outcome(out, r)
        }
        Command::T1 { centers } => {
            let inst = Instance::new(load_family(cfg)?, cfg.n)?;
            let sample = square_center_sample(&inst.cloud, *centers, cfg.seed);
            let t = inst.operator(crate::kernels::KernelVariant::Modified)?;
            let ta = inst.operator(crate::kernels::KernelVariant::Adjoint)?;
            let rep = t1_testing_with(&inst.cloud, &sample, t.as_ref(), ta.as_ref());
            let mut r = finite_report(
                &inst,
                "t1",
                cfg.seed,
                &[("sup_T", rep.sup_t), ("sup_Tadj", rep.sup_tadj)],
                vec![
                    ("T", serde_json::to_value(rep.witness_t)?),
                    ("Tadj", serde_json::to_value(rep.witness_tadj)?),
                ],
            );
            r.constants.insert("balls_tested".into(), rep.balls_tested as f64);
            r.constants.insert("balls_skipped".into(), rep.balls_skipped as f64);
            r.details.insert("sample".into(), Value::String(rep.sample));
            report_outcome(out, r)
        }
        Command::Beurling => {
            let fam = SquareFamily::new(vec![DyadicSquare::new(0, 0, 0)], cfg.d, cfg.packing_target)?;
            let inst = Instance::new(fam, cfg.n)?;
            let mut g = Field::random_complex(inst.cloud.len(), cfg.seed, MeasureTag::M2);
            let mean: Complex64 = g.values.iter().sum::<Complex64>() / g.len() as f64;
            for v in g.values.iter_mut() {
                *v -= mean;
            }
            let bg = beurling_spectral(&inst.cloud, &g)?;
            let ratio = bg.norm(&inst.cloud) / g.norm(&inst.cloud);
            let mut r = finite_report(&inst, "beurling", cfg.seed, &[("norm_ratio", ratio)], Vec::new());
            r.thresholds.insert("norm_ratio_deviation".into(), 1e-12);
            r.pass &= (ratio - 1.0).abs() <= 1e-12;
            report_outcome(out, r)
        }
        Command::Bench { sizes } => {
            let mut bc = BenchConfig::new(sizes.clone(), params(cfg)?, cfg.seed);
            bc.d = cfg.d;
            bc.packing_target = cfg.packing_target;
            let rep = benchmark(&bc)?;
            let mut buf = Vec::new();
            rep.write_csv(&mut buf)?;
            let path = out.join("bench.csv");
            write_atomic(&path, &buf)?;
            let worst = rep.rows.iter().fold(0.0f64, |m, r| m.max(r.max_rel_err));
            Ok(Outcome {
                pass: worst <= cfg.tol,
                summary: format!(
                    "{}fast cost exponent {:.3}, direct {:.3}, C_exp {:.3e}, worst error {:.3e} (tol {:e})",
                    String::from_utf8_lossy(&buf),
                    rep.fast_cost_exponent,
                    rep.direct_cost_exponent,
                    rep.empirical_cexp,
                    worst,
                    cfg.tol
                ),
                files: vec![path],
            })
        }
        Command::Scaling => {
            let mut sc = ScalingConfig::new(cfg.d, cfg.m.clone(), cfg.seed);
            sc.packing_target = cfg.packing_target;
            sc.n_per_side = cfg.n;
            sc.tol = cfg.tol;
            sc.params = params(cfg)?;
            let study = scaling_study(&sc)?;
            let table = study.table_csv()?;
            let path = out.join("scaling.csv");
            write_atomic(&path, &table)?;
            let tpath = out.join("scaling_timings.csv");
            write_atomic(&tpath, &study.timings_csv()?)?;
            let inputs = InputsDigest::new(
                String::new(),
                cfg.d,
                cfg.n,
                vec![cfg.seed],
                BTreeMap::from([("packing_target".to_string(), cfg.packing_target), ("tol".to_string(), cfg.tol)]),
            );
            let mut files = vec![path, tpath];
            write_inputs(out, &inputs, &mut files)?;
            let spread = study.sigma_spread();
            Ok(Outcome {
                pass: study.rows.len() < 2 || spread <= 1.25,
                summary: format!("{}sigma_max max/median {:.4}", String::from_utf8_lossy(&table), spread),
                files,
            })
        }
    }
}

fn validate(cfg: &RunConfig) -> Result<Outcome> {
    let path = cfg
        .family
        .as_ref()
        .ok_or_else(|| invalid("family", "validate needs --family FILE"))?;
    let text = std::fs::read_to_string(path)?;
    let file = FamilyFile::from_json(&text)?;
    if file.squares.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let inputs = InputsDigest::new(
        sha256_hex(file.to_json().as_bytes()),
        file.d,
        cfg.n,
        Vec::new(),
        BTreeMap::from([("packing_target".to_string(), file.packing_target)]),
    );
    let mut report = VerificationReport::new("validate", inputs);
    let (c_pack, witness) = packing_constant(&file.squares, file.d)?;
    report.constants.insert("C_pack".into(), c_pack);
    report.thresholds.insert("C_pack".into(), file.packing_target);
    report.witnesses.insert("packing".into(), serde_json::to_value(witness)?);
    let disjoint = check_disjointness(&file.squares);
    if let Disjointness::Violation(a, b) = disjoint {
        report.witnesses.insert(
            "disjointness".into(),
            json!({ "pair": [a, b], "squares": [file.squares[a], file.squares[b]] }),
        );
    }
    report.details.insert("disjoint".into(), Value::Bool(disjoint.is_ok()));
    report.pass = disjoint.is_ok() && c_pack <= file.packing_target;
    report_outcome(&cfg.out, report)
}
