use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use subrank::error::{Error, Result};
use subrank::estimator::{default_subsample_count, estimate, EstimatorConfig, Strategy};
use subrank::exact::{self, identity_suite, s_constants, stirling_bound_check};
use subrank::experiments::{run_study, ExperimentSpec, StudyKind};
use subrank::generators::{generate, GeneratorKind, GeneratorSpec};
use subrank::independence::{calibrate_null, independence_test, NullCalibration, StatisticKind};
use subrank::io;
use subrank::null_theory::{
    aggregate_moments, approx_null_variance, border_dimension, closed_form_moments,
    VarianceVariant,
};
use subrank::rng::{derive_seed, tags};
use subrank::sample::TiePolicy;
use subrank::smoothing::JointDensityModel;

#[derive(Parser)]
#[command(name = "subrank", version, about = "Rank-grid dependence estimation by sub-sampling")]
struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (standard output when absent).
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the rank grid of a sample.
    Estimate(EstimateArgs),
    /// Test independence of the columns of a sample.
    Test(TestArgs),
    /// Simulate the null distribution of a statistic.
    Calibrate(CalibrateArgs),
    /// Exact null moments, border dimension and combinatorial identities.
    Theory(TheoryArgs),
    /// Draw a sample from a data model.
    Generate(GenerateArgs),
    /// Smoothed joint density: conditional slice or synthetic sample.
    Regress(RegressArgs),
    /// Run a simulation study described by a JSON spec.
    Study {
        #[arg(value_enum)]
        kind: StudyName,
        #[command(flatten)]
        args: StudyArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StudyName {
    Moment,
    Power,
    Convergence,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ties {
    Reject,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Statistic {
    Kl,
    L2,
}

impl From<Statistic> for StatisticKind {
    fn from(s: Statistic) -> Self {
        match s {
            Statistic::Kl => StatisticKind::Kl,
            Statistic::L2 => StatisticKind::L2,
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    /// Sample CSV (optional header).
    #[arg(long, short)]
    input: PathBuf,
    /// Sub-sample size.
    #[arg(short)]
    m: usize,
    /// Number of random sub-samples; all subsets are enumerated when absent
    /// and feasible.
    #[arg(long)]
    b: Option<u64>,
    /// Enumerate every subset.
    #[arg(long, conflicts_with = "b")]
    exhaustive: bool,
    #[arg(long, value_enum, default_value = "reject")]
    ties: Ties,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(short, default_value_t = 8)]
    m: usize,
    #[arg(long, default_value_t = 100_000)]
    b: u64,
    #[arg(long, default_value_t = 0.05)]
    level: f64,
    #[arg(long, value_enum, default_value = "kl")]
    statistic: Statistic,
    /// Calibration JSON: read if it exists, otherwise simulated and written.
    #[arg(long)]
    calibration: Option<PathBuf>,
    /// Null simulations when a calibration has to be built.
    #[arg(long, default_value_t = 1000)]
    sims: usize,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(short)]
    m: usize,
    #[arg(short)]
    d: usize,
    #[arg(short)]
    n: usize,
    #[arg(long, default_value_t = 100_000)]
    b: u64,
    #[arg(long, default_value_t = 1000)]
    sims: usize,
    #[arg(long, value_enum, default_value = "kl")]
    statistic: Statistic,
}

#[derive(Args)]
struct TheoryArgs {
    #[arg(short)]
    m: usize,
    /// Dimension of the null moments.
    #[arg(short)]
    d: Option<usize>,
    /// Check the binomial identities for m and the Stirling bracket up to m.
    #[arg(long)]
    identities: bool,
}

#[derive(Args)]
struct GenerateArgs {
    /// Data model: a name with optional parameters (`polynomial:p=2,coef=0.5`)
    /// or a JSON object (`{"kind":"sphere_noise","a":6}`).
    #[arg(long)]
    model: String,
    #[arg(short)]
    n: usize,
    #[arg(short)]
    d: usize,
}

#[derive(Args)]
struct RegressArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(short, default_value_t = 20)]
    m: usize,
    #[arg(long, default_value_t = 100_000)]
    b: u64,
    /// Fixed coordinates, one-based: `x3=0,x4=0,x5=0`.
    #[arg(long, default_value = "")]
    condition: String,
    /// Evaluation grid of the two free coordinates.
    #[arg(long, default_value = "50x50")]
    grid: String,
    /// `auto` (data range of each free coordinate) or `a:b` for both.
    #[arg(long, default_value = "auto")]
    range: String,
    /// Emit this many synthetic points instead of a slice.
    #[arg(long)]
    sample: Option<usize>,
}

#[derive(Args)]
struct StudyArgs {
    /// ExperimentSpec JSON file.
    #[arg(long)]
    spec: PathBuf,
    /// Also write the result table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

enum Outcome {
    Done,
    Partial,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot set thread count: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}

fn emit_json(out: Option<&Path>, value: &impl serde::Serialize) -> Result<()> {
    let mut w = io::output_writer(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn run(cli: &Cli) -> Result<Outcome> {
    let seed = cli.seed.unwrap_or(0);
    let out = cli.output.as_deref();
    match &cli.command {
        Command::Estimate(a) => {
            let sample = io::read_sample_csv(&a.input)?;
            let strategy = match (a.b, a.exhaustive) {
                (Some(count), _) => Strategy::Random { count, seed },
                (None, true) => Strategy::Exhaustive,
                (None, false) => {
                    let subsets = exact::binomial(sample.n() as u64, a.m as i64);
                    if subsets <= subrank::DEFAULT_ENUMERATION_CAP.into() {
                        Strategy::Exhaustive
                    } else {
                        let count = default_subsample_count(a.m, sample.d());
                        Strategy::Random { count, seed }
                    }
                }
            };
            let ties = match a.ties {
                Ties::Reject => TiePolicy::Reject,
                Ties::Random => TiePolicy::RandomBreak { seed: derive_seed(seed, tags::TIES) },
            };
            let cfg = EstimatorConfig { strategy, ..EstimatorConfig::exhaustive(a.m) }.with_ties(ties);
            let grid = estimate(&sample, &cfg)?;
            let meta = io::GridSidecar::new(&grid, sample.n(), strategy);
            match out {
                Some(p) => io::save_grid(&grid, p, &meta)?,
                None => {
                    let mut w = io::output_writer(None)?;
                    io::write_grid(&grid, &mut w)?;
                    w.flush()?;
                    eprintln!("{}", serde_json::to_string(&meta)?);
                }
            }
        }
        Command::Test(a) => {
            let sample = io::read_sample_csv(&a.input)?;
            let kind = a.statistic.into();
            let cal_seed = derive_seed(seed, tags::CALIBRATION);
            let build = || calibrate_null(a.m, sample.d(), sample.n(), a.b, a.sims, cal_seed, kind);
            let cal = match &a.calibration {
                Some(p) if p.exists() => NullCalibration::load(p)?,
                Some(p) => {
                    let cal = build()?;
                    cal.save(p)?;
                    cal
                }
                None => build()?,
            };
            if cal.m != a.m || cal.b != a.b || cal.statistic != kind {
                eprintln!(
                    "note: using the calibration's m = {}, b = {}, statistic = {}",
                    cal.m, cal.b, cal.statistic
                );
            }
            let result =
                independence_test(&sample, &cal, a.level, derive_seed(seed, tags::SUBSAMPLE))?;
            emit_json(out, &result)?;
        }
        Command::Calibrate(a) => {
            let cal = calibrate_null(
                a.m,
                a.d,
                a.n,
                a.b,
                a.sims,
                derive_seed(seed, tags::CALIBRATION),
                a.statistic.into(),
            )?;
            emit_json(out, &cal)?;
        }
        Command::Theory(a) => return theory(a, out),
        Command::Generate(a) => {
            let kind = GeneratorKind::parse(&a.model)?;
            let spec = GeneratorSpec::new(kind, a.n, a.d, seed);
            let sample = generate(&spec)?;
            let w = io::output_writer(out)?;
            io::write_sample(&sample, w)?;
        }
        Command::Regress(a) => regress(a, seed, out)?,
        Command::Study { kind, args } => return study(*kind, args, cli.seed, out),
    }
    Ok(Outcome::Done)
}

fn theory(a: &TheoryArgs, out: Option<&Path>) -> Result<Outcome> {
    if a.identities {
        let report = identity_suite(a.m);
        let stirling = stirling_bound_check(a.m);
        let ok = report.all_hold() && stirling.all_within();
        emit_json(
            out,
            &json!({
                "m": a.m,
                "identities_hold": report.all_hold(),
                "stirling_within": stirling.all_within(),
                "identities": report,
                "stirling": stirling,
            }),
        )?;
        return Ok(if ok { Outcome::Done } else { Outcome::Partial });
    }
    let consts = s_constants(a.m)?;
    let mut value = json!({
        "m": a.m,
        "constants": consts,
        "border_dimension": {
            "printed_form": border_dimension(a.m, VarianceVariant::PrintedForm)?,
            "sign_corrected": border_dimension(a.m, VarianceVariant::SignCorrected)?,
        },
    });
    if let Some(d) = a.d {
        let moments = |v| -> Result<serde_json::Value> {
            let c = closed_form_moments(a.m, d, v)?;
            Ok(json!({
                "mean_limit": c.mean_limit.to_string(),
                "var_limit": c.var_limit.to_string(),
                "mean_limit_f64": c.mean_f64(),
                "var_limit_f64": c.var_f64(),
            }))
        };
        let agg = aggregate_moments(a.m, d)?;
        let corrected = closed_form_moments(a.m, d, VarianceVariant::SignCorrected)?;
        value["d"] = json!(d);
        value["sign_corrected"] = moments(VarianceVariant::SignCorrected)?;
        value["printed_form"] = moments(VarianceVariant::PrintedForm)?;
        value["aggregation_agrees"] = json!(agg == corrected);
        value["approx_variance"] = json!(approx_null_variance(a.m, d));
    }
    emit_json(out, &value)?;
    Ok(Outcome::Done)
}

fn parse_condition(text: &str, d: usize) -> Result<Vec<(usize, f64)>> {
    let mut fixed = Vec::new();
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let bad = || Error::Parse(format!("condition {part:?} is not of the form xK=value"));
        let (name, value) = part.split_once('=').ok_or_else(bad)?;
        let idx: usize =
            name.trim().strip_prefix('x').ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if idx == 0 || idx > d {
            return Err(Error::InvalidParameter(format!("coordinate x{idx} outside x1..x{d}")));
        }
        let v: f64 = value.trim().parse().map_err(|_| bad())?;
        fixed.push((idx - 1, v));
    }
    Ok(fixed)
}

fn parse_grid(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("grid {text:?} is not of the form 50x50"));
    let (a, b) = text.split_once('x').ok_or_else(bad)?;
    let (a, b): (usize, usize) =
        (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a < 2 || b < 2 {
        return Err(Error::InvalidParameter("grid needs at least 2 points per axis".into()));
    }
    Ok((a, b))
}

fn axis(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
}

fn regress(a: &RegressArgs, seed: u64, out: Option<&Path>) -> Result<()> {
    let sample = io::read_sample_csv(&a.input)?;
    let cfg = EstimatorConfig::random(a.m, a.b, derive_seed(seed, tags::SUBSAMPLE));
    let model = JointDensityModel::fit(&sample, &cfg)?;
    if let Some(k) = a.sample {
        let synthetic = model.sample(k, derive_seed(seed, tags::SMOOTH_SAMPLE))?;
        return io::write_sample(&synthetic, io::output_writer(out)?);
    }
    let fixed = parse_condition(&a.condition, sample.d())?;
    let (nx, ny) = parse_grid(&a.grid)?;
    let free: Vec<usize> = (0..sample.d()).filter(|l| !fixed.iter().any(|f| f.0 == *l)).collect();
    if free.len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "conditioning leaves {} free coordinates, a slice needs 2",
            free.len()
        )));
    }
    let range_of = |l: usize| -> Result<(f64, f64)> {
        if a.range == "auto" {
            return Ok(model.marginals[l].data_range());
        }
        let bad = || Error::Parse(format!("range {:?} is not auto or a:b", a.range));
        let (lo, hi) = a.range.split_once(':').ok_or_else(bad)?;
        let (lo, hi): (f64, f64) =
            (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?);
        if !(lo < hi) {
            return Err(bad());
        }
        Ok((lo, hi))
    };
    let (x0, x1) = range_of(free[0])?;
    let (y0, y1) = range_of(free[1])?;
    let slice = model.conditional_slice(&fixed, &axis(x0, x1, nx), &axis(y0, y1, ny))?;
    io::write_slice(&slice, io::output_writer(out)?)
}

fn study(name: StudyName, args: &StudyArgs, seed: Option<u64>, out: Option<&Path>) -> Result<Outcome> {
    let kind = match name {
        StudyName::Moment => StudyKind::MomentStudy,
        StudyName::Power => StudyKind::PowerStudy,
        StudyName::Convergence => StudyKind::ConvergenceStudy,
    };
    let mut value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&args.spec)?)?;
    if let Some(obj) = value.as_object_mut() {
        obj.entry("kind").or_insert(serde_json::to_value(kind)?);
    }
    let mut spec: ExperimentSpec = serde_json::from_value(value)?;
    if spec.kind != kind {
        return Err(Error::InvalidParameter(format!(
            "spec describes {:?}, command asks for {kind:?}",
            spec.kind
        )));
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    spec.validate()?;
    let report = run_study(&spec)?;
    let target = out.map(Path::to_path_buf).or_else(|| spec.output.clone());
    emit_json(target.as_deref(), &report)?;
    if let Some(p) = &args.csv {
        report.write_csv(std::fs::File::create(p)?)?;
    }
    for f in &report.failures {
        eprintln!("row {} failed: {}", f.config, f.message);
    }
    Ok(if report.has_failures() { Outcome::Partial } else { Outcome::Done })
}
