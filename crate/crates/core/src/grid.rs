//! Storage for functions on the rank lattice `{1..m}^d`.
//!
//! Cells are addressed by a linear index with the first coordinate varying
//! fastest. Lattices of at most [`DENSE_LIMIT`] cells are stored as flat
//! arrays, larger ones as sorted sparse lists of the nonzero cells.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};

/// Largest cell count stored densely (about 128 MiB of `f64`).
pub const DENSE_LIMIT: u64 = 1 << 24;

/// A d-tuple of ranks, each in `1..=m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RankVector(Vec<usize>);

impl RankVector {
    pub fn new(components: Vec<usize>, m: usize) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("rank vector needs at least one component".into()));
        }
        if let Some(&c) = components.iter().find(|&&c| c == 0 || c > m) {
            return Err(Error::Domain(format!("rank {c} outside 1..={m}")));
        }
        Ok(Self(components))
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }

    pub fn d(&self) -> usize {
        self.0.len()
    }
}

impl AsRef<[usize]> for RankVector {
    fn as_ref(&self) -> &[usize] {
        &self.0
    }
}

/// Sub-sample size and dimension of a lattice, with its cell count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridShape {
    m: usize,
    d: usize,
    cells: u64,
}

impl GridShape {
    pub fn new(m: usize, d: usize) -> Result<Self> {
        if m == 0 || d == 0 {
            return Err(Error::InvalidParameter(format!("grid needs m, d >= 1 (m={m}, d={d})")));
        }
        let mut cells = 1u64;
        for _ in 0..d {
            cells = cells.checked_mul(m as u64).ok_or(Error::SizeOverflow { m, d })?;
        }
        Ok(Self { m, d, cells })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn cells(&self) -> u64 {
        self.cells
    }

    pub fn is_dense(&self) -> bool {
        self.cells <= DENSE_LIMIT
    }

    /// Linear index of a 1-based rank vector. Components are not validated.
    pub fn encode(&self, r: &[usize]) -> u64 {
        let mut idx = 0u64;
        for &c in r.iter().rev() {
            idx = idx * self.m as u64 + (c - 1) as u64;
        }
        idx
    }

    pub fn decode(&self, mut idx: u64) -> Vec<usize> {
        let mut r = Vec::with_capacity(self.d);
        for _ in 0..self.d {
            r.push((idx % self.m as u64) as usize + 1);
            idx /= self.m as u64;
        }
        r
    }

    fn check(&self, r: &[usize]) -> Result<()> {
        if r.len() != self.d {
            return Err(Error::ShapeMismatch(format!(
                "rank vector of length {} on a {}-dimensional grid",
                r.len(),
                self.d
            )));
        }
        if let Some(&c) = r.iter().find(|&&c| c == 0 || c > self.m) {
            return Err(Error::Domain(format!("rank {c} outside 1..={}", self.m)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Cells {
    Dense(Vec<f64>),
    /// Nonzero cells sorted by index.
    Sparse(Vec<(u64, f64)>),
}

/// Nonnegative weights on `{1..m}^d`, normally summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct RankGrid {
    shape: GridShape,
    cells: Cells,
    total_draws: u64,
}

impl RankGrid {
    /// Dense grid from weights in linear-index order.
    pub fn from_dense(m: usize, d: usize, weights: Vec<f64>, total_draws: u64) -> Result<Self> {
        let shape = GridShape::new(m, d)?;
        if weights.len() as u64 != shape.cells {
            return Err(Error::ShapeMismatch(format!(
                "{} weights for {} cells",
                weights.len(),
                shape.cells
            )));
        }
        check_weights(weights.iter().copied())?;
        Ok(Self { shape, cells: Cells::Dense(weights), total_draws })
    }

    /// Sparse grid from `(linear index, weight)` pairs; zero weights are dropped.
    pub fn from_sparse(
        m: usize,
        d: usize,
        mut entries: Vec<(u64, f64)>,
        total_draws: u64,
    ) -> Result<Self> {
        let shape = GridShape::new(m, d)?;
        check_weights(entries.iter().map(|e| e.1))?;
        entries.retain(|e| e.1 != 0.0);
        entries.sort_unstable_by_key(|e| e.0);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter("duplicate cell in sparse grid".into()));
        }
        if entries.last().is_some_and(|e| e.0 >= shape.cells) {
            return Err(Error::Domain("sparse cell index beyond the lattice".into()));
        }
        Ok(Self { shape, cells: Cells::Sparse(entries), total_draws })
    }

    /// Grid with weight `f(r)` on every cell, stored in the natural representation.
    pub fn from_fn(m: usize, d: usize, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let shape = GridShape::new(m, d)?;
        if !shape.is_dense() {
            return Err(Error::SizeOverflow { m, d });
        }
        let weights = (0..shape.cells).map(|i| f(&shape.decode(i))).collect();
        Self::from_dense(m, d, weights, 0)
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn m(&self) -> usize {
        self.shape.m
    }

    pub fn d(&self) -> usize {
        self.shape.d
    }

    pub fn total_draws(&self) -> u64 {
        self.total_draws
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.cells, Cells::Dense(_))
    }

    pub fn weight_at(&self, idx: u64) -> f64 {
        match &self.cells {
            Cells::Dense(w) => w.get(idx as usize).copied().unwrap_or(0.0),
            Cells::Sparse(e) => match e.binary_search_by_key(&idx, |x| x.0) {
                Ok(pos) => e[pos].1,
                Err(_) => 0.0,
            },
        }
    }

    pub fn weight(&self, r: &[usize]) -> Result<f64> {
        self.shape.check(r)?;
        Ok(self.weight_at(self.shape.encode(r)))
    }

    /// Nonzero cells in increasing index order.
    pub fn nonzero(&self) -> Box<dyn Iterator<Item = (u64, f64)> + '_> {
        match &self.cells {
            Cells::Dense(w) => Box::new(
                w.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, &v)| (i as u64, v)),
            ),
            Cells::Sparse(e) => Box::new(e.iter().copied()),
        }
    }

    pub fn nonzero_count(&self) -> usize {
        self.nonzero().count()
    }

    pub fn dense_weights(&self) -> Option<&[f64]> {
        match &self.cells {
            Cells::Dense(w) => Some(w),
            Cells::Sparse(_) => None,
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.nonzero().map(|e| e.1).sum()
    }

    pub fn to_sparse(&self) -> Self {
        Self {
            shape: self.shape,
            cells: Cells::Sparse(self.nonzero().collect()),
            total_draws: self.total_draws,
        }
    }

    pub fn to_dense(&self) -> Result<Self> {
        if !self.shape.is_dense() {
            return Err(Error::SizeOverflow { m: self.shape.m, d: self.shape.d });
        }
        let mut w = vec![0.0; self.shape.cells as usize];
        for (i, v) in self.nonzero() {
            w[i as usize] = v;
        }
        Ok(Self { shape: self.shape, cells: Cells::Dense(w), total_draws: self.total_draws })
    }

    pub(crate) fn check_same_shape(&self, other: &RankGrid) -> Result<()> {
        if self.shape.m != other.shape.m || self.shape.d != other.shape.d {
            return Err(Error::ShapeMismatch(format!(
                "grid (m={}, d={}) vs (m={}, d={})",
                self.shape.m, self.shape.d, other.shape.m, other.shape.d
            )));
        }
        Ok(())
    }
}

fn check_weights(mut w: impl Iterator<Item = f64>) -> Result<()> {
    if let Some(v) = w.find(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Domain(format!("grid weight {v} is not a nonnegative number")));
    }
    Ok(())
}

/// Draw-count-weighted average of grids over one lattice. When no grid
/// records draws the average is unweighted.
pub fn merge_grids(grids: &[RankGrid]) -> Result<RankGrid> {
    let first = grids
        .first()
        .ok_or_else(|| Error::InvalidParameter("cannot merge an empty list of grids".into()))?;
    for g in &grids[1..] {
        first.check_same_shape(g)?;
    }
    let total: u64 = grids.iter().map(|g| g.total_draws).sum();
    let factor = |g: &RankGrid| {
        if total == 0 {
            1.0 / grids.len() as f64
        } else {
            g.total_draws as f64 / total as f64
        }
    };
    let shape = first.shape;
    if shape.is_dense() {
        let mut w = vec![0.0; shape.cells as usize];
        for g in grids {
            let f = factor(g);
            for (i, v) in g.nonzero() {
                w[i as usize] += f * v;
            }
        }
        RankGrid::from_dense(shape.m, shape.d, w, total)
    } else {
        let mut acc: HashMap<u64, f64> = HashMap::new();
        for g in grids {
            let f = factor(g);
            for (i, v) in g.nonzero() {
                *acc.entry(i).or_insert(0.0) += f * v;
            }
        }
        RankGrid::from_sparse(shape.m, shape.d, acc.into_iter().collect(), total)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum CountCells {
    Dense(Vec<u64>),
    Sparse(HashMap<u64, u64>),
}

/// Integer incidence counts of rank vectors over a set of sub-samples.
///
/// Each sub-sample of size `m` contributes `m` incidences, so the estimated
/// weight of a cell is `count / (m · subsamples)`, exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct RankCounts {
    shape: GridShape,
    cells: CountCells,
    subsamples: u64,
}

impl RankCounts {
    pub fn new(m: usize, d: usize) -> Result<Self> {
        let shape = GridShape::new(m, d)?;
        let cells = if shape.is_dense() {
            CountCells::Dense(vec![0; shape.cells as usize])
        } else {
            CountCells::Sparse(HashMap::new())
        };
        Ok(Self { shape, cells, subsamples: 0 })
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn subsamples(&self) -> u64 {
        self.subsamples
    }

    /// Records one sub-sample given the linear indices of its `m` cells.
    #[inline]
    pub(crate) fn record(&mut self, cells: &[u64]) {
        match &mut self.cells {
            CountCells::Dense(c) => {
                for &i in cells {
                    c[i as usize] += 1;
                }
            }
            CountCells::Sparse(c) => {
                for &i in cells {
                    *c.entry(i).or_insert(0) += 1;
                }
            }
        }
        self.subsamples += 1;
    }

    pub fn count_at(&self, idx: u64) -> u64 {
        match &self.cells {
            CountCells::Dense(c) => c.get(idx as usize).copied().unwrap_or(0),
            CountCells::Sparse(c) => c.get(&idx).copied().unwrap_or(0),
        }
    }

    pub fn count(&self, r: &[usize]) -> Result<u64> {
        self.shape.check(r)?;
        Ok(self.count_at(self.shape.encode(r)))
    }

    /// `count / (m · subsamples)` as an exact fraction.
    pub fn exact_weight(&self, r: &[usize]) -> Result<BigRational> {
        let c = self.count(r)?;
        let denom = BigInt::from(self.shape.m) * BigInt::from(self.subsamples.max(1));
        Ok(BigRational::new(BigInt::from(c), denom))
    }

    /// Adds another accumulator over the same lattice.
    pub fn absorb(&mut self, other: RankCounts) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch("counts over different lattices".into()));
        }
        match (&mut self.cells, other.cells) {
            (CountCells::Dense(a), CountCells::Dense(b)) => {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
            (CountCells::Sparse(a), CountCells::Sparse(b)) => {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
            }
            _ => unreachable!("representation follows the shape"),
        }
        self.subsamples += other.subsamples;
        Ok(())
    }

    pub fn to_grid(&self) -> RankGrid {
        let denom = (self.shape.m as f64) * (self.subsamples.max(1) as f64);
        let cells = match &self.cells {
            CountCells::Dense(c) => Cells::Dense(c.iter().map(|&v| v as f64 / denom).collect()),
            CountCells::Sparse(c) => {
                let mut e: Vec<(u64, f64)> =
                    c.iter().filter(|e| *e.1 > 0).map(|(&k, &v)| (k, v as f64 / denom)).collect();
                e.sort_unstable_by_key(|x| x.0);
                Cells::Sparse(e)
            }
        };
        RankGrid { shape: self.shape, cells, total_draws: self.subsamples }
    }
}
