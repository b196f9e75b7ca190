//! The rank-grid estimator: every size-`m` sub-sample marks the `m` cells
//! reached by its observations' within-sub-sample rank vectors, and the grid
//! is the average of these marks, normalised by `m` per sub-sample.
//!
//! The marks are symmetric in the sub-sample's members, so unordered subsets
//! are enumerated (or drawn) rather than injections; the normaliser
//! `m · C(n, m)` then reproduces the estimator exactly.

use num_bigint::BigInt;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::binomial;
use crate::grid::{GridShape, RankCounts, RankGrid, RankVector};
use crate::rng;
use crate::sample::{component_ranks, RankMatrix, SampleMatrix, TiePolicy};

pub const DEFAULT_ENUMERATION_CAP: u64 = 100_000_000;

/// Sub-samples handled by one unit of parallel work.
const CHUNK: u64 = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    Exhaustive,
    /// `count` sub-samples drawn uniformly and independently.
    Random { count: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub m: usize,
    pub strategy: Strategy,
    #[serde(default)]
    pub tie_policy: TiePolicy,
    #[serde(default = "default_cap")]
    pub enumeration_cap: u64,
}

fn default_cap() -> u64 {
    DEFAULT_ENUMERATION_CAP
}

impl EstimatorConfig {
    pub fn exhaustive(m: usize) -> Self {
        Self {
            m,
            strategy: Strategy::Exhaustive,
            tie_policy: TiePolicy::Reject,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    pub fn random(m: usize, count: u64, seed: u64) -> Self {
        Self {
            m,
            strategy: Strategy::Random { count, seed },
            tie_policy: TiePolicy::Reject,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    pub fn with_ties(mut self, tie_policy: TiePolicy) -> Self {
        self.tie_policy = tie_policy;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.m < 2 || self.m > n {
            return Err(Error::InvalidParameter(format!(
                "sub-sample size m = {} must satisfy 2 <= m <= n = {n}",
                self.m
            )));
        }
        if let Strategy::Random { count: 0, .. } = self.strategy {
            return Err(Error::InvalidParameter("sub-sample count b must be >= 1".into()));
        }
        Ok(())
    }
}

/// `max(10⁵, 30 · m^d)`: enough draws that a uniform cell expects more than
/// 30 hits.
pub fn default_subsample_count(m: usize, d: usize) -> u64 {
    let cells = (m as u64).checked_pow(d as u32).unwrap_or(u64::MAX / 30);
    cells.saturating_mul(30).max(100_000)
}

/// Computes the lattice cells reached by one sub-sample.
struct CellMapper<'a> {
    ranks: &'a RankMatrix,
    m: usize,
    strides: Vec<u64>,
    vals: Vec<u32>,
}

impl<'a> CellMapper<'a> {
    fn new(ranks: &'a RankMatrix, m: usize) -> Self {
        let strides = (0..ranks.d()).map(|l| (m as u64).pow(l as u32)).collect();
        Self { ranks, m, strides, vals: vec![0; m] }
    }

    /// Writes into `out` the linear cell index of each member of `subset`.
    /// Within-sub-sample ranks follow from the full-sample ranks because
    /// ranking commutes with restriction.
    #[inline]
    fn map(&mut self, subset: &[u32], out: &mut [u64]) {
        out.iter_mut().for_each(|c| *c = 0);
        for (l, &stride) in self.strides.iter().enumerate() {
            let col = self.ranks.column(l);
            for (v, &i) in self.vals.iter_mut().zip(subset) {
                *v = col[i as usize];
            }
            for j in 0..self.m {
                let x = self.vals[j];
                let below = self.vals.iter().filter(|&&v| v < x).count() as u64;
                out[j] += below * stride;
            }
        }
    }
}

/// The `m` rank vectors of the observations in `subset`, in subset order.
pub fn subsample_rank_set(sample: &SampleMatrix, subset: &[usize]) -> Result<Vec<RankVector>> {
    let mut seen = subset.to_vec();
    seen.sort_unstable();
    if seen.is_empty() || seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter("subset must hold distinct indices".into()));
    }
    let sub = sample.select(subset)?;
    let ranks = component_ranks(&sub, TiePolicy::Reject)?;
    (0..subset.len()).map(|i| RankVector::new(ranks.row(i), subset.len())).collect()
}

/// Incidence counts over all `C(n, m)` sub-samples.
pub fn exhaustive_counts(
    sample: &SampleMatrix,
    m: usize,
    tie_policy: TiePolicy,
    cap: u64,
) -> Result<RankCounts> {
    let n = sample.n();
    EstimatorConfig::exhaustive(m).validate(n)?;
    let total = binomial(n as u64, m as i64);
    if total > BigInt::from(cap) {
        return Err(Error::EnumerationTooLarge { count: total.to_string(), cap });
    }
    let ranks = component_ranks(sample, tie_policy)?;
    let mut counts = RankCounts::new(m, sample.d())?;
    let mut mapper = CellMapper::new(&ranks, m);
    let mut subset: Vec<u32> = (0..m as u32).collect();
    let mut cells = vec![0u64; m];
    let n32 = n as u32;
    loop {
        mapper.map(&subset, &mut cells);
        counts.record(&cells);
        // next combination in lexicographic order
        let mut k = m;
        while k > 0 && subset[k - 1] == n32 - (m - k + 1) as u32 {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        subset[k - 1] += 1;
        for j in k..m {
            subset[j] = subset[j - 1] + 1;
        }
    }
    Ok(counts)
}

pub fn estimate_exhaustive(sample: &SampleMatrix, m: usize) -> Result<RankGrid> {
    Ok(exhaustive_counts(sample, m, TiePolicy::Reject, DEFAULT_ENUMERATION_CAP)?.to_grid())
}

struct Worker<'a> {
    mapper: CellMapper<'a>,
    counts: RankCounts,
    pool: Vec<u32>,
    swaps: Vec<u32>,
    cells: Vec<u64>,
}

/// Incidence counts over `b` random sub-samples of precomputed ranks.
///
/// Sub-sample `i` is a partial Fisher–Yates draw from its own stream
/// `(seed, i)`, so the counts do not depend on how work is split.
pub fn random_counts(ranks: &RankMatrix, m: usize, b: u64, seed: u64) -> Result<RankCounts> {
    let n = ranks.n();
    EstimatorConfig::random(m, b, seed).validate(n)?;
    let shape = GridShape::new(m, ranks.d())?;
    let chunks = b.div_ceil(CHUNK);
    let make = || Worker {
        mapper: CellMapper::new(ranks, m),
        counts: RankCounts::new(shape.m(), shape.d()).expect("shape already validated"),
        pool: (0..n as u32).collect(),
        swaps: vec![0; m],
        cells: vec![0; m],
    };
    let merged = (0..chunks)
        .into_par_iter()
        .fold(make, |mut w, chunk| {
            let end = ((chunk + 1) * CHUNK).min(b);
            for i in chunk * CHUNK..end {
                let mut rng = rng::stream(seed, i);
                for j in 0..m {
                    let k = rng.random_range(j as u32..n as u32);
                    w.pool.swap(j, k as usize);
                    w.swaps[j] = k;
                }
                w.mapper.map(&w.pool[..m], &mut w.cells);
                w.counts.record(&w.cells);
                for j in (0..m).rev() {
                    w.pool.swap(j, w.swaps[j] as usize);
                }
            }
            w
        })
        .map(|w| w.counts)
        .reduce_with(|mut a, b| {
            a.absorb(b).expect("same lattice");
            a
        });
    Ok(merged.unwrap_or_else(|| RankCounts::new(m, ranks.d()).expect("validated")))
}

pub fn estimate_random(sample: &SampleMatrix, cfg: &EstimatorConfig) -> Result<RankGrid> {
    let Strategy::Random { count, seed } = cfg.strategy else {
        return Err(Error::InvalidParameter("estimate_random needs a random strategy".into()));
    };
    cfg.validate(sample.n())?;
    let ranks = component_ranks(sample, cfg.tie_policy)?;
    Ok(random_counts(&ranks, cfg.m, count, seed)?.to_grid())
}

/// Dispatches on the configured strategy.
pub fn estimate(sample: &SampleMatrix, cfg: &EstimatorConfig) -> Result<RankGrid> {
    cfg.validate(sample.n())?;
    match cfg.strategy {
        Strategy::Exhaustive => {
            Ok(exhaustive_counts(sample, cfg.m, cfg.tie_policy, cfg.enumeration_cap)?.to_grid())
        }
        Strategy::Random { .. } => estimate_random(sample, cfg),
    }
}
