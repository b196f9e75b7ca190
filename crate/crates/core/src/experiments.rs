//! Simulation studies: null moments of the L² statistic, power of the KL
//! test, and convergence of the estimated grid.
//!
//! Every study row derives its streams from `(seed, row index)`, so a report
//! is reproducible from its spec alone, whatever the thread count.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{gaussian_copula_density, generate_with, GeneratorKind, GeneratorSpec};
use crate::grid::GridShape;
use crate::independence::{
    calibrate_null, calibrate_null_cached, independence_test, subsampled_grid, StatisticKind,
};
use crate::null_theory::{
    closed_form_moments, copula_deviation, independence_pmf, l2_pmf_distance, mc_rank_pmf,
    VarianceVariant,
};
use crate::rng::{self, derive_seed, tags};
use crate::sample::TiePolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    MomentStudy,
    PowerStudy,
    ConvergenceStudy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub m: usize,
    pub d: usize,
    pub n: usize,
    /// Sub-samples per estimate; each study has its own default.
    #[serde(default)]
    pub b: Option<u64>,
    /// Data model; independent Gaussians when absent.
    #[serde(default)]
    pub generator: Option<GeneratorKind>,
    /// Cells tracked by the convergence study; corner and centre by default.
    #[serde(default)]
    pub cells: Option<Vec<Vec<usize>>>,
}

impl StudyConfig {
    pub fn new(m: usize, d: usize, n: usize) -> Self {
        StudyConfig { m, d, n, b: None, generator: None, cells: None }
    }

    pub fn with_b(mut self, b: u64) -> Self {
        self.b = Some(b);
        self
    }

    pub fn with_generator(mut self, kind: GeneratorKind) -> Self {
        self.generator = Some(kind);
        self
    }

    fn generator_kind(&self) -> GeneratorKind {
        self.generator.unwrap_or(GeneratorKind::IndependentGaussian)
    }

    fn validate(&self) -> Result<()> {
        if self.m < 2 || self.n < self.m || self.d == 0 {
            return Err(Error::InvalidParameter(format!(
                "need 2 <= m <= n and d >= 1 (m={}, n={}, d={})",
                self.m, self.n, self.d
            )));
        }
        if self.b == Some(0) {
            return Err(Error::InvalidParameter("b must be positive".into()));
        }
        GeneratorSpec::new(self.generator_kind(), self.n, self.d, 0).validate()?;
        GridShape::new(self.m, self.d)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: StudyKind,
    pub configs: Vec<StudyConfig>,
    pub replications: usize,
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Power study: null simulations per calibration.
    #[serde(default)]
    pub calibration_sims: Option<usize>,
    /// Power study: test level.
    #[serde(default)]
    pub level: Option<f64>,
    /// Power study: directory of cached calibrations.
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    /// Convergence study: replications of the Monte Carlo rank-law oracle.
    #[serde(default)]
    pub oracle_replications: Option<u64>,
}

impl ExperimentSpec {
    pub fn new(kind: StudyKind, configs: Vec<StudyConfig>, replications: usize, seed: u64) -> Self {
        ExperimentSpec {
            kind,
            configs,
            replications,
            seed,
            output: None,
            calibration_sims: None,
            level: None,
            cache_dir: None,
            oracle_replications: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidParameter("replications must be >= 1".into()));
        }
        if self.configs.is_empty() {
            return Err(Error::InvalidParameter("no configurations".into()));
        }
        if let Some(level) = self.level {
            if !(level > 0.0 && level < 1.0) {
                return Err(Error::InvalidParameter(format!("level {level} outside (0, 1)")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub m: usize,
    pub d: usize,
    pub n: usize,
    pub b: u64,
    pub replications: usize,
    pub seed: u64,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub mean_limit: f64,
    pub var_limit: f64,
    /// `mean · n / mean_limit`; `None` when the limit vanishes.
    pub mean_ratio: Option<f64>,
    pub mean_ratio_se: Option<f64>,
    /// `variance · n² / var_limit`.
    pub var_ratio: Option<f64>,
    pub var_ratio_se: Option<f64>,
    /// Variance ratio against the printed form of the variance limit.
    pub var_ratio_printed: Option<f64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub generator: GeneratorKind,
    pub m: usize,
    pub d: usize,
    pub n: usize,
    pub b: u64,
    pub replications: usize,
    pub seed: u64,
    pub level: f64,
    pub calibration_sims: usize,
    pub calibration_seed: u64,
    pub rejections: usize,
    pub power: f64,
    pub power_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellTrace {
    pub cell: Vec<usize>,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    /// `P̂ₙ(r)` of every replication.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub generator: GeneratorKind,
    pub m: usize,
    pub d: usize,
    pub n: usize,
    pub b: u64,
    pub replications: usize,
    pub seed: u64,
    pub cells: Vec<CellTrace>,
    /// `max |m^d P(r) - c(r/(m+1))|` over interior cells of the Monte Carlo
    /// rank law, when the model's copula density is known.
    pub deviation: Option<f64>,
    pub oracle_replications: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StudyRow {
    Moment(MomentRow),
    Power(PowerRow),
    Convergence(ConvergenceRow),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowFailure {
    pub config: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub kind: StudyKind,
    pub seed: u64,
    pub replications: usize,
    pub rows: Vec<StudyRow>,
    pub failures: Vec<RowFailure>,
    pub notes: Vec<String>,
    pub runtime_seconds: f64,
}

impl StudyReport {
    pub fn has_failures(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    /// One table line per row; convergence rows expand to one line per cell.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        match self.kind {
            StudyKind::MomentStudy => w.write_record([
                "m", "d", "n", "b", "replications", "mean", "mean_se", "variance", "variance_se",
                "mean_limit", "var_limit", "mean_ratio", "mean_ratio_se", "var_ratio",
                "var_ratio_se", "var_ratio_printed", "degenerate",
            ])?,
            StudyKind::PowerStudy => w.write_record([
                "generator", "m", "d", "n", "b", "replications", "level", "calibration_sims",
                "rejections", "power", "power_se",
            ])?,
            StudyKind::ConvergenceStudy => w.write_record([
                "generator", "m", "d", "n", "b", "replications", "cell", "mean", "mean_se",
                "variance", "deviation",
            ])?,
        }
        for row in &self.rows {
            match row {
                StudyRow::Moment(r) => w.write_record([
                    r.m.to_string(),
                    r.d.to_string(),
                    r.n.to_string(),
                    r.b.to_string(),
                    r.replications.to_string(),
                    r.mean.to_string(),
                    r.mean_se.to_string(),
                    r.variance.to_string(),
                    r.variance_se.to_string(),
                    r.mean_limit.to_string(),
                    r.var_limit.to_string(),
                    opt(r.mean_ratio),
                    opt(r.mean_ratio_se),
                    opt(r.var_ratio),
                    opt(r.var_ratio_se),
                    opt(r.var_ratio_printed),
                    r.degenerate.to_string(),
                ])?,
                StudyRow::Power(r) => w.write_record([
                    generator_label(&r.generator),
                    r.m.to_string(),
                    r.d.to_string(),
                    r.n.to_string(),
                    r.b.to_string(),
                    r.replications.to_string(),
                    r.level.to_string(),
                    r.calibration_sims.to_string(),
                    r.rejections.to_string(),
                    r.power.to_string(),
                    r.power_se.to_string(),
                ])?,
                StudyRow::Convergence(r) => {
                    for c in &r.cells {
                        let cell =
                            c.cell.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
                        w.write_record([
                            generator_label(&r.generator),
                            r.m.to_string(),
                            r.d.to_string(),
                            r.n.to_string(),
                            r.b.to_string(),
                            r.replications.to_string(),
                            cell,
                            c.mean.to_string(),
                            c.mean_se.to_string(),
                            c.variance.to_string(),
                            opt(r.deviation),
                        ])?;
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Compact JSON form of a generator, e.g. `{"kind":"polynomial","p":2,"coef":0.5}`.
pub fn generator_label(kind: &GeneratorKind) -> String {
    serde_json::to_string(kind).unwrap_or_else(|_| format!("{kind:?}"))
}

/// Mean, its standard error, unbiased variance and the standard error of
/// that variance.
fn summarize(xs: &[f64]) -> (f64, f64, f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, f64::NAN, f64::NAN, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / k;
    let var_se = ((m4 - var * var * (k - 3.0) / (k - 1.0)) / k).max(0.0).sqrt();
    (mean, (var / k).sqrt(), var, var_se)
}

fn row_seed(seed: u64, tag: u64, row: usize) -> u64 {
    derive_seed(derive_seed(seed, tag), row as u64)
}

/// Runs `f` on every configuration, keeping failures per row.
fn run_rows(
    spec: &ExperimentSpec,
    mut f: impl FnMut(usize, &StudyConfig) -> Result<StudyRow>,
) -> (Vec<StudyRow>, Vec<RowFailure>) {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (i, cfg) in spec.configs.iter().enumerate() {
        match cfg.validate().and_then(|_| f(i, cfg)) {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(RowFailure { config: i, message: e.to_string() }),
        }
    }
    (rows, failures)
}

fn check_kind(spec: &ExperimentSpec, kind: StudyKind) -> Result<()> {
    spec.validate()?;
    if spec.kind != kind {
        return Err(Error::InvalidParameter(format!(
            "spec describes {:?}, not {kind:?}",
            spec.kind
        )));
    }
    Ok(())
}

/// Default moment-study budget `15 n²`.
pub fn default_moment_budget(n: usize) -> u64 {
    15 * (n as u64) * (n as u64)
}

/// Replicates `T = m^d Σ (P̂ₙ - m^{-d})²` under independence and compares its
/// moments with their limits.
pub fn run_moment_study(spec: &ExperimentSpec) -> Result<StudyReport> {
    check_kind(spec, StudyKind::MomentStudy)?;
    let start = Instant::now();
    let reps = spec.replications;
    let (rows, failures) = run_rows(spec, |i, cfg| {
        let (m, d, n) = (cfg.m, cfg.d, cfg.n);
        let b = cfg.b.unwrap_or_else(|| default_moment_budget(n));
        let seed = row_seed(spec.seed, tags::MOMENT, i);
        let kind = cfg.generator_kind();
        let null = independence_pmf(m, d)?;
        let draws = (0..reps as u64)
            .into_par_iter()
            .map(|rep| {
                let mut data_rng = rng::stream(derive_seed(seed, tags::DATA), rep);
                let sample = generate_with(kind, n, d, &mut data_rng)?;
                let sub = derive_seed(derive_seed(seed, tags::SUBSAMPLE), rep);
                let grid = subsampled_grid(&sample, m, b, sub, TiePolicy::Reject)?;
                l2_pmf_distance(&grid, &null)
            })
            .collect::<Result<Vec<f64>>>()?;
        let (mean, mean_se, variance, variance_se) = summarize(&draws);
        let corrected = closed_form_moments(m, d, VarianceVariant::SignCorrected)?;
        let printed = closed_form_moments(m, d, VarianceVariant::PrintedForm)?;
        let (ml, vl, vp) = (corrected.mean_f64(), corrected.var_f64(), printed.var_f64());
        let nf = n as f64;
        let ratio = |x: f64, limit: f64, scale: f64| (limit > 0.0).then(|| x * scale / limit);
        Ok(StudyRow::Moment(MomentRow {
            m,
            d,
            n,
            b,
            replications: reps,
            seed,
            mean,
            mean_se,
            variance,
            variance_se,
            mean_limit: ml,
            var_limit: vl,
            mean_ratio: ratio(mean, ml, nf),
            mean_ratio_se: ratio(mean_se, ml, nf),
            var_ratio: ratio(variance, vl, nf * nf),
            var_ratio_se: ratio(variance_se, vl, nf * nf),
            var_ratio_printed: ratio(variance, vp, nf * nf),
            degenerate: d == 1,
        }))
    });
    Ok(StudyReport {
        kind: spec.kind,
        seed: spec.seed,
        replications: reps,
        rows,
        failures,
        notes: vec![
            "ratios are empirical / limiting value: mean·n/mean_limit and variance·n²/var_limit".into(),
            "var_limit uses the sign-corrected closed form; var_ratio_printed compares with the printed form".into(),
            "default b is 15·n² per row; a budget of 15·n^d sub-samples is infeasible beyond small n and d".into(),
            "d = 1 rows are degenerate: T vanishes identically".into(),
        ],
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

pub const POWER_SUBSAMPLE_SIZE: usize = 8;
pub const POWER_BUDGET: u64 = 100_000;
pub const POWER_LEVEL: f64 = 0.05;
pub const POWER_CALIBRATION_SIMS: usize = 1000;

/// Rejection rate of the KL test against each configuration's data model.
///
/// Configurations sharing `(m, d, n, b)` share one calibration, drawn from the
/// spec seed; with `cache_dir` set calibrations are reused across runs.
pub fn run_power_study(spec: &ExperimentSpec) -> Result<StudyReport> {
    check_kind(spec, StudyKind::PowerStudy)?;
    let start = Instant::now();
    let reps = spec.replications;
    let level = spec.level.unwrap_or(POWER_LEVEL);
    let sims = spec.calibration_sims.unwrap_or(POWER_CALIBRATION_SIMS);
    let cal_seed = derive_seed(spec.seed, tags::CALIBRATION);
    let kind = StatisticKind::Kl;
    let mut cache: Vec<crate::independence::NullCalibration> = Vec::new();
    let (rows, failures) = run_rows(spec, |i, cfg| {
        let (m, d, n) = (cfg.m, cfg.d, cfg.n);
        let b = cfg.b.unwrap_or(POWER_BUDGET);
        let cal = match cache.iter().find(|c| (c.m, c.d, c.n, c.b) == (m, d, n, b)) {
            Some(c) => c.clone(),
            None => {
                let c = match &spec.cache_dir {
                    Some(dir) => calibrate_null_cached(dir, m, d, n, b, sims, cal_seed, kind)?,
                    None => calibrate_null(m, d, n, b, sims, cal_seed, kind)?,
                };
                cache.push(c.clone());
                c
            }
        };
        let seed = row_seed(spec.seed, tags::POWER, i);
        let gen = cfg.generator_kind();
        let rejections = (0..reps as u64)
            .into_par_iter()
            .map(|rep| {
                let mut data_rng = rng::stream(derive_seed(seed, tags::DATA), rep);
                let sample = generate_with(gen, n, d, &mut data_rng)?;
                let sub = derive_seed(derive_seed(seed, tags::SUBSAMPLE), rep);
                Ok(independence_test(&sample, &cal, level, sub)?.reject as usize)
            })
            .collect::<Result<Vec<usize>>>()?
            .into_iter()
            .sum::<usize>();
        let power = rejections as f64 / reps as f64;
        Ok(StudyRow::Power(PowerRow {
            generator: gen,
            m,
            d,
            n,
            b,
            replications: reps,
            seed,
            level,
            calibration_sims: sims,
            calibration_seed: cal_seed,
            rejections,
            power,
            power_se: (power * (1.0 - power) / reps as f64).sqrt(),
        }))
    });
    Ok(StudyReport {
        kind: spec.kind,
        seed: spec.seed,
        replications: reps,
        rows,
        failures,
        notes: vec![format!(
            "KL statistic; defaults m = {POWER_SUBSAMPLE_SIZE}, b = {POWER_BUDGET}, level = {POWER_LEVEL}, {POWER_CALIBRATION_SIMS} null draws"
        )],
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

pub const CONVERGENCE_MARGIN: f64 = 0.1;
pub const DEFAULT_ORACLE_REPLICATIONS: u64 = 200_000;

/// Corner `(1,…,1)` and centre `(⌈m/2⌉,…)`.
pub fn default_tracked_cells(m: usize, d: usize) -> Vec<Vec<usize>> {
    vec![vec![1; d], vec![m.div_ceil(2); d]]
}

fn copula_density_of(kind: GeneratorKind) -> Option<Box<dyn Fn(&[f64]) -> f64 + Sync>> {
    match kind {
        GeneratorKind::IndependentGaussian => Some(Box::new(|_| 1.0)),
        GeneratorKind::GaussianCopula { rho } => {
            Some(Box::new(move |x| gaussian_copula_density(rho, x).unwrap_or(f64::NAN)))
        }
        _ => None,
    }
}

/// Replication distribution of `P̂ₙ(r)` at chosen cells, and the distance of
/// the model's rank law from its copula density.
pub fn run_convergence_study(spec: &ExperimentSpec) -> Result<StudyReport> {
    check_kind(spec, StudyKind::ConvergenceStudy)?;
    let start = Instant::now();
    let reps = spec.replications;
    let oracle_reps = spec.oracle_replications.unwrap_or(DEFAULT_ORACLE_REPLICATIONS);
    let (rows, failures) = run_rows(spec, |i, cfg| {
        let (m, d, n) = (cfg.m, cfg.d, cfg.n);
        let b = cfg.b.unwrap_or_else(|| crate::estimator::default_subsample_count(m, d));
        let seed = row_seed(spec.seed, tags::CONVERGENCE, i);
        let gen = cfg.generator_kind();
        let shape = GridShape::new(m, d)?;
        let cells = cfg.cells.clone().unwrap_or_else(|| default_tracked_cells(m, d));
        let idx = cells
            .iter()
            .map(|c| {
                if c.len() != d || c.iter().any(|&r| r == 0 || r > m) {
                    Err(Error::InvalidParameter(format!("cell {c:?} outside {{1..{m}}}^{d}")))
                } else {
                    Ok(shape.encode(c))
                }
            })
            .collect::<Result<Vec<u64>>>()?;
        let per_rep = (0..reps as u64)
            .into_par_iter()
            .map(|rep| {
                let mut data_rng = rng::stream(derive_seed(seed, tags::DATA), rep);
                let sample = generate_with(gen, n, d, &mut data_rng)?;
                let sub = derive_seed(derive_seed(seed, tags::SUBSAMPLE), rep);
                let grid = subsampled_grid(&sample, m, b, sub, TiePolicy::Reject)?;
                Ok(idx.iter().map(|&j| grid.weight_at(j)).collect::<Vec<f64>>())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        let traces = cells
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let values: Vec<f64> = per_rep.iter().map(|v| v[k]).collect();
                let (mean, mean_se, variance, _) = summarize(&values);
                CellTrace { cell: c.clone(), mean, mean_se, variance, values }
            })
            .collect();
        let deviation = match copula_density_of(gen) {
            Some(density) => {
                let oracle = mc_rank_pmf(gen, m, d, oracle_reps, derive_seed(seed, tags::MOMENT))?;
                Some(copula_deviation(&oracle, density, CONVERGENCE_MARGIN))
            }
            None => None,
        };
        Ok(StudyRow::Convergence(ConvergenceRow {
            generator: gen,
            m,
            d,
            n,
            b,
            replications: reps,
            seed,
            cells: traces,
            deviation,
            oracle_replications: oracle_reps,
        }))
    });
    Ok(StudyReport {
        kind: spec.kind,
        seed: spec.seed,
        replications: reps,
        rows,
        failures,
        notes: vec![format!(
            "deviation: max |m^d P(r) - c(r/(m+1))| over cells with r/(m+1) in [{CONVERGENCE_MARGIN}, {}]^d, P from Monte Carlo m-samples",
            1.0 - CONVERGENCE_MARGIN
        )],
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn run_study(spec: &ExperimentSpec) -> Result<StudyReport> {
    match spec.kind {
        StudyKind::MomentStudy => run_moment_study(spec),
        StudyKind::PowerStudy => run_power_study(spec),
        StudyKind::ConvergenceStudy => run_convergence_study(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_statistics() {
        let (mean, se, var, _) = summarize(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(mean, 2.5);
        assert!((var - 5.0 / 3.0).abs() < 1e-15);
        assert!((se - (var / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn spec_json_round_trip() {
        let text = r#"{
            "kind": "power_study",
            "configs": [{"m": 8, "d": 2, "n": 30,
                         "generator": {"kind": "polynomial", "p": 2, "coef": 0.5}}],
            "replications": 300,
            "seed": 7
        }"#;
        let spec = ExperimentSpec::from_json(text).unwrap();
        assert_eq!(spec.kind, StudyKind::PowerStudy);
        assert_eq!(spec.configs[0].generator, Some(GeneratorKind::Polynomial { p: 2, coef: 0.5 }));
        let back: ExperimentSpec =
            serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        assert!(ExperimentSpec::from_json(&text.replace("300", "0")).is_err());
    }

    #[test]
    fn moment_study_is_reproducible_and_flags_degeneracy() {
        let spec = ExperimentSpec::new(
            StudyKind::MomentStudy,
            vec![
                StudyConfig::new(3, 1, 12).with_b(200),
                StudyConfig::new(3, 2, 12).with_b(200),
                StudyConfig::new(13, 2, 12),
            ],
            20,
            3,
        );
        let a = run_moment_study(&spec).unwrap();
        let b = run_moment_study(&spec).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.failures.len(), 1);
        assert_eq!(a.failures[0].config, 2);
        match &a.rows[0] {
            StudyRow::Moment(r) => {
                assert!(r.degenerate && r.mean == 0.0 && r.mean_ratio.is_none());
            }
            _ => unreachable!(),
        }
        match &a.rows[1] {
            StudyRow::Moment(r) => assert!(r.mean > 0.0 && r.mean_ratio.is_some()),
            _ => unreachable!(),
        }
        let mut csv = Vec::new();
        a.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 3);
        assert!(run_power_study(&spec).is_err());
    }

    #[test]
    fn power_under_null_model_is_near_level() {
        let mut spec = ExperimentSpec::new(
            StudyKind::PowerStudy,
            vec![StudyConfig::new(4, 2, 12)
                .with_b(300)
                .with_generator(GeneratorKind::RandomVolatility { a: 0.0, dd: 2 })],
            200,
            1,
        );
        spec.calibration_sims = Some(200);
        let r = run_power_study(&spec).unwrap();
        let StudyRow::Power(row) = &r.rows[0] else { unreachable!() };
        assert!((row.power - 0.05).abs() < 4.0 * (0.05f64 * 0.95 / 200.0).sqrt(), "{}", row.power);
    }

    #[test]
    fn convergence_study_tracks_cells() {
        let mut spec = ExperimentSpec::new(
            StudyKind::ConvergenceStudy,
            vec![StudyConfig::new(4, 2, 20).with_b(500)],
            30,
            2,
        );
        spec.oracle_replications = Some(2000);
        let r = run_convergence_study(&spec).unwrap();
        let StudyRow::Convergence(row) = &r.rows[0] else { unreachable!() };
        assert_eq!(row.cells.len(), 2);
        assert_eq!(row.cells[0].cell, vec![1, 1]);
        assert_eq!(row.cells[1].cell, vec![2, 2]);
        assert_eq!(row.cells[0].values.len(), 30);
        assert!(row.deviation.unwrap() < 0.5);
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 3);
    }
}
