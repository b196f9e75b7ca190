//! Distances from an estimated grid to the independence grid, their null law
//! by simulation, and the resulting test.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::random_counts;
use crate::generators::{generate_with, GeneratorKind};
use crate::grid::RankGrid;
use crate::null_theory::{independence_pmf, l2_pmf_distance};
use crate::rng::{self, derive_seed, tags};
use crate::sample::{component_ranks, SampleMatrix, TiePolicy};

/// Levels whose thresholds are stored with every calibration.
pub const STANDARD_LEVELS: [f64; 3] = [0.01, 0.05, 0.10];

/// Smallest accepted number of null simulations.
pub const MIN_NULL_SIMS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatisticKind {
    L2,
    Kl,
}

impl StatisticKind {
    pub fn evaluate(self, grid: &RankGrid, null_grid: &RankGrid) -> Result<f64> {
        match self {
            StatisticKind::L2 => l2_statistic(grid, null_grid),
            StatisticKind::Kl => kl_statistic(grid, null_grid),
        }
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatisticKind::L2 => "l2",
            StatisticKind::Kl => "kl",
        })
    }
}

impl FromStr for StatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(StatisticKind::L2),
            "kl" => Ok(StatisticKind::Kl),
            other => Err(Error::InvalidParameter(format!("unknown statistic {other:?}"))),
        }
    }
}

/// `Σ P log(P / P₀)` over cells with `P > 0`.
pub fn kl_statistic(grid: &RankGrid, null_grid: &RankGrid) -> Result<f64> {
    grid.check_same_shape(null_grid)?;
    let shape = grid.shape();
    let mut total = 0.0;
    for (idx, p) in grid.nonzero() {
        if p <= 0.0 {
            continue;
        }
        let q = null_grid.weight_at(idx);
        if q <= 0.0 {
            return Err(Error::NullHasZeroCell { cell: shape.decode(idx) });
        }
        total += p * (p / q).ln();
    }
    Ok(total)
}

/// `m^d Σ (P - P₀)²`.
pub fn l2_statistic(grid: &RankGrid, null_grid: &RankGrid) -> Result<f64> {
    l2_pmf_distance(grid, null_grid)
}

/// Empirical null law of a statistic for fixed `(m, d, n, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullCalibration {
    pub m: usize,
    pub d: usize,
    pub n: usize,
    pub b: u64,
    pub seed: u64,
    pub statistic: StatisticKind,
    pub n_sims: usize,
    /// Sorted ascending.
    pub null_draws: Vec<f64>,
    pub thresholds: Vec<LevelThreshold>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelThreshold {
    pub level: f64,
    pub threshold: f64,
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!("level {level} outside (0, 1)")));
    }
    Ok(())
}

impl NullCalibration {
    fn from_draws(
        params: (usize, usize, usize, u64, u64, StatisticKind),
        mut draws: Vec<f64>,
    ) -> Self {
        let (m, d, n, b, seed, statistic) = params;
        draws.sort_by(f64::total_cmp);
        let mut cal = NullCalibration {
            m,
            d,
            n,
            b,
            seed,
            statistic,
            n_sims: draws.len(),
            null_draws: draws,
            thresholds: Vec::new(),
        };
        cal.thresholds = STANDARD_LEVELS
            .iter()
            .map(|&level| LevelThreshold { level, threshold: cal.quantile_threshold(level) })
            .collect();
        cal
    }

    /// The empirical `(1 - level)` quantile: the `⌈(1-level)N⌉`-th smallest
    /// draw. At most `level·N` draws exceed it.
    pub fn threshold(&self, level: f64) -> Result<f64> {
        check_level(level)?;
        Ok(self.quantile_threshold(level))
    }

    fn quantile_threshold(&self, level: f64) -> f64 {
        let n = self.null_draws.len();
        // guard against (1 - level)·N landing a hair above an integer
        let k = (((1.0 - level) * n as f64) - 1e-9).ceil() as usize;
        self.null_draws[k.clamp(1, n) - 1]
    }

    /// `(1 + #{draws ≥ statistic}) / (1 + N)`.
    pub fn p_value(&self, statistic: f64) -> f64 {
        let below = self.null_draws.partition_point(|&x| x < statistic);
        let at_or_above = self.null_draws.len() - below;
        (1 + at_or_above) as f64 / (1 + self.null_draws.len()) as f64
    }

    fn validate(&self) -> Result<()> {
        if self.null_draws.len() != self.n_sims || self.n_sims < MIN_NULL_SIMS {
            return Err(Error::Parse(format!(
                "calibration holds {} draws for n_sims = {}",
                self.null_draws.len(),
                self.n_sims
            )));
        }
        if self.null_draws.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Parse("calibration draws are not sorted".into()));
        }
        Ok(())
    }

    /// File name identifying the calibration inside a cache directory.
    pub fn cache_key(
        m: usize,
        d: usize,
        n: usize,
        b: u64,
        statistic: StatisticKind,
        seed: u64,
        n_sims: usize,
    ) -> String {
        format!("null_{statistic}_m{m}_d{d}_n{n}_b{b}_s{seed}_k{n_sims}.json")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cal: NullCalibration = serde_json::from_str(&text)?;
        cal.validate()?;
        Ok(cal)
    }
}

/// Rank grid of `sample` estimated from `b` random sub-samples of size `m`.
pub fn subsampled_grid(
    sample: &SampleMatrix,
    m: usize,
    b: u64,
    seed: u64,
    ties: TiePolicy,
) -> Result<RankGrid> {
    if m < 2 || m > sample.n() {
        return Err(Error::InvalidParameter(format!(
            "sub-sample size {m} must lie in 2..={}",
            sample.n()
        )));
    }
    let ranks = component_ranks(sample, ties)?;
    Ok(random_counts(&ranks, m, b, seed)?.to_grid())
}

/// Statistic of one independent standard Gaussian `n × d` sample.
fn null_replication(
    m: usize,
    d: usize,
    n: usize,
    b: u64,
    seed: u64,
    rep: u64,
    kind: StatisticKind,
    null_grid: &RankGrid,
) -> Result<f64> {
    let mut data_rng = rng::stream(derive_seed(seed, tags::DATA), rep);
    let sample = generate_with(GeneratorKind::IndependentGaussian, n, d, &mut data_rng)?;
    let sub_seed = derive_seed(derive_seed(seed, tags::SUBSAMPLE), rep);
    let grid = subsampled_grid(&sample, m, b, sub_seed, TiePolicy::Reject)?;
    kind.evaluate(&grid, null_grid)
}

pub fn calibrate_null(
    m: usize,
    d: usize,
    n: usize,
    b: u64,
    n_sims: usize,
    seed: u64,
    kind: StatisticKind,
) -> Result<NullCalibration> {
    if n_sims < MIN_NULL_SIMS {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_NULL_SIMS} null simulations, got {n_sims}"
        )));
    }
    if m < 2 || n < m {
        return Err(Error::InvalidParameter(format!("need 2 <= m <= n, got m = {m}, n = {n}")));
    }
    if b == 0 || d == 0 {
        return Err(Error::InvalidParameter("b and d must be positive".into()));
    }
    let null_grid = independence_pmf(m, d)?;
    let draws = (0..n_sims as u64)
        .into_par_iter()
        .map(|rep| null_replication(m, d, n, b, seed, rep, kind, &null_grid))
        .collect::<Result<Vec<f64>>>()?;
    Ok(NullCalibration::from_draws((m, d, n, b, seed, kind), draws))
}

/// Loads the calibration from `dir` when present, otherwise builds and
/// stores it.
pub fn calibrate_null_cached(
    dir: &Path,
    m: usize,
    d: usize,
    n: usize,
    b: u64,
    n_sims: usize,
    seed: u64,
    kind: StatisticKind,
) -> Result<NullCalibration> {
    let path: PathBuf = dir.join(NullCalibration::cache_key(m, d, n, b, kind, seed, n_sims));
    if path.exists() {
        return NullCalibration::load(&path);
    }
    let cal = calibrate_null(m, d, n, b, n_sims, seed, kind)?;
    std::fs::create_dir_all(dir)?;
    cal.save(&path)?;
    Ok(cal)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub level: f64,
    pub threshold_at_level: f64,
    pub reject: bool,
    pub kind: StatisticKind,
    pub m: usize,
    pub d: usize,
    pub n: usize,
    pub b: u64,
    pub n_sims: usize,
    pub calibration_seed: u64,
    /// Seed of the sub-samples drawn from the tested sample.
    pub seed: u64,
}

/// Tests independence of the components of `sample` against `calibration`,
/// estimating the grid with the calibration's `m` and `b` and sub-sample
/// stream `seed`.
pub fn independence_test(
    sample: &SampleMatrix,
    calibration: &NullCalibration,
    level: f64,
    seed: u64,
) -> Result<TestResult> {
    check_level(level)?;
    let cal = calibration;
    if sample.n() != cal.n || sample.d() != cal.d {
        return Err(Error::ShapeMismatch(format!(
            "sample is {}x{}, calibration expects {}x{}",
            sample.n(),
            sample.d(),
            cal.n,
            cal.d
        )));
    }
    let grid = subsampled_grid(sample, cal.m, cal.b, seed, TiePolicy::Reject)?;
    let statistic = cal.statistic.evaluate(&grid, &independence_pmf(cal.m, cal.d)?)?;
    let threshold = cal.threshold(level)?;
    Ok(TestResult {
        statistic,
        p_value: cal.p_value(statistic),
        level,
        threshold_at_level: threshold,
        reject: statistic > threshold,
        kind: cal.statistic,
        m: cal.m,
        d: cal.d,
        n: cal.n,
        b: cal.b,
        n_sims: cal.n_sims,
        calibration_seed: cal.seed,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::estimate_exhaustive;
    use crate::null_theory::comonotone_pmf;
    use crate::sample::tests::table_one;

    #[test]
    fn statistic_closed_forms() {
        for m in [2usize, 8, 15] {
            let u = independence_pmf(m, 2).unwrap();
            let c = comonotone_pmf(m).unwrap();
            assert!((kl_statistic(&c, &u).unwrap() - (m as f64).ln()).abs() < 1e-12);
            assert!((l2_statistic(&c, &u).unwrap() - (m as f64 - 1.0)).abs() < 1e-12);
            assert_eq!(kl_statistic(&u, &u).unwrap(), 0.0);
        }
        let g = estimate_exhaustive(&table_one(), 3).unwrap();
        let u = independence_pmf(3, 2).unwrap();
        assert!((kl_statistic(&g, &u).unwrap() - 0.377_149).abs() < 1e-5);
        assert!((l2_statistic(&g, &u).unwrap() - 0.625).abs() < 1e-12);
    }

    #[test]
    fn kl_requires_support() {
        let u = independence_pmf(3, 2).unwrap();
        let c = comonotone_pmf(3).unwrap();
        match kl_statistic(&u, &c) {
            Err(Error::NullHasZeroCell { cell }) => assert_ne!(cell[0], cell[1]),
            other => panic!("unexpected {other:?}"),
        }
        assert!(kl_statistic(&c, &independence_pmf(2, 2).unwrap()).is_err());
    }

    #[test]
    fn statistic_names_round_trip() {
        for k in [StatisticKind::L2, StatisticKind::Kl] {
            assert_eq!(k.to_string().parse::<StatisticKind>().unwrap(), k);
        }
        assert_eq!("KL".parse::<StatisticKind>().unwrap(), StatisticKind::Kl);
        assert!("chi2".parse::<StatisticKind>().is_err());
    }

    fn small_calibration(seed: u64) -> NullCalibration {
        calibrate_null(4, 2, 15, 300, 200, seed, StatisticKind::Kl).unwrap()
    }

    #[test]
    fn calibration_is_deterministic_and_sorted() {
        let a = small_calibration(5);
        let b = small_calibration(5);
        assert_eq!(a, b);
        assert!(a.null_draws.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(a.thresholds.len(), STANDARD_LEVELS.len());
        assert_ne!(a.null_draws, small_calibration(6).null_draws);
    }

    #[test]
    fn threshold_is_an_upper_quantile() {
        let cal = small_calibration(1);
        for level in [0.01, 0.05, 0.1, 0.37] {
            let t = cal.threshold(level).unwrap();
            let above = cal.null_draws.iter().filter(|&&x| x > t).count() as f64;
            let frac = above / cal.n_sims as f64;
            assert!(frac <= level + 1e-12 && frac >= level - 1.0 / cal.n_sims as f64, "{frac}");
        }
        assert!(cal.threshold(0.0).is_err());
        assert!(cal.threshold(1.0).is_err());
    }

    #[test]
    fn p_values() {
        let cal = small_calibration(2);
        assert_eq!(cal.p_value(-1.0), 1.0);
        assert_eq!(cal.p_value(f64::INFINITY), 1.0 / 201.0);
        let top = *cal.null_draws.last().unwrap();
        assert!((cal.p_value(top) - 2.0 / 201.0).abs() < 1e-15);
    }

    #[test]
    fn test_decision_agrees_with_threshold() {
        let cal = small_calibration(3);
        let sample = table_one();
        assert!(matches!(
            independence_test(&sample, &cal, 0.05, 1),
            Err(Error::ShapeMismatch(_))
        ));
        let data = generate_with(
            GeneratorKind::Comonotone,
            15,
            2,
            &mut rng::seeded(9),
        )
        .unwrap();
        let r = independence_test(&data, &cal, 0.05, 1).unwrap();
        assert_eq!(r.reject, r.statistic > r.threshold_at_level);
        assert!(r.reject);
        assert!((r.p_value - 1.0 / 201.0).abs() < 1e-15);
        assert!(r.p_value > 0.0 && r.p_value <= 1.0);
    }

    #[test]
    fn calibration_validation_and_cache() {
        assert!(calibrate_null(4, 2, 15, 300, 99, 0, StatisticKind::Kl).is_err());
        assert!(calibrate_null(4, 2, 3, 300, 100, 0, StatisticKind::Kl).is_err());
        let dir = tempfile::tempdir().unwrap();
        let a = calibrate_null_cached(dir.path(), 3, 2, 10, 50, 100, 4, StatisticKind::L2).unwrap();
        let b = calibrate_null_cached(dir.path(), 3, 2, 10, 50, 100, 4, StatisticKind::L2).unwrap();
        assert_eq!(a, b);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
