use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// `n × d` real observations, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl SampleMatrix {
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let d = columns.len();
        if d == 0 {
            return Err(Error::InvalidParameter("sample needs at least one column".into()));
        }
        let n = columns[0].len();
        if n == 0 {
            return Err(Error::InvalidParameter("sample needs at least one observation".into()));
        }
        if let Some((l, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != n) {
            return Err(Error::ShapeMismatch(format!(
                "column {l} has {} values, column 0 has {n}",
                c.len()
            )));
        }
        let data: Vec<f64> = columns.into_iter().flatten().collect();
        Self::from_column_major(n, d, data)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidParameter("sample needs at least one observation".into()));
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::InvalidParameter("sample needs at least one column".into()));
        }
        let mut data = vec![0.0; n * d];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::ShapeMismatch(format!(
                    "row {i} has {} values, row 0 has {d}",
                    row.len()
                )));
            }
            for (l, &v) in row.iter().enumerate() {
                data[l * n + i] = v;
            }
        }
        Self::from_column_major(n, d, data)
    }

    pub(crate) fn from_column_major(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        debug_assert_eq!(data.len(), n * d);
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse(format!(
                "non-finite value at observation {}, column {}",
                pos % n,
                pos / n
            )));
        }
        Ok(Self { n, d, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn column(&self, l: usize) -> &[f64] {
        &self.data[l * self.n..(l + 1) * self.n]
    }

    pub fn get(&self, i: usize, l: usize) -> f64 {
        self.data[l * self.n + i]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.d).map(|l| self.get(i, l)).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.n).map(|i| self.row(i))
    }

    /// Applies `f` to every value of column `l`.
    pub fn map_column(&self, l: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut data = self.data.clone();
        for v in &mut data[l * self.n..(l + 1) * self.n] {
            *v = f(*v);
        }
        Self::from_column_major(self.n, self.d, data)
    }

    /// Observations `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let k = indices.len();
        let mut data = Vec::with_capacity(k * self.d);
        for l in 0..self.d {
            let col = self.column(l);
            for &i in indices {
                if i >= self.n {
                    return Err(Error::InvalidParameter(format!(
                        "observation index {i} out of range for n = {}",
                        self.n
                    )));
                }
                data.push(col[i]);
            }
        }
        Self::from_column_major(k, self.d, data)
    }
}

/// What to do when a column has repeated values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum TiePolicy {
    #[default]
    Reject,
    /// Order tied values by independent uniform keys drawn from `seed`.
    RandomBreak { seed: u64 },
}

/// Componentwise ranks `1..=n`, stored column by column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankMatrix {
    n: usize,
    d: usize,
    ranks: Vec<u32>,
}

impl RankMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn column(&self, l: usize) -> &[u32] {
        &self.ranks[l * self.n..(l + 1) * self.n]
    }

    pub fn get(&self, i: usize, l: usize) -> u32 {
        self.ranks[l * self.n + i]
    }

    pub fn row(&self, i: usize) -> Vec<usize> {
        (0..self.d).map(|l| self.get(i, l) as usize).collect()
    }
}

/// Ranks each column; rank 1 is the smallest value.
pub fn component_ranks(sample: &SampleMatrix, tie_policy: TiePolicy) -> Result<RankMatrix> {
    let n = sample.n();
    if n > u32::MAX as usize {
        return Err(Error::InvalidParameter(format!("{n} observations exceed the rank range")));
    }
    let mut ranks = vec![0u32; n * sample.d()];
    let mut order: Vec<usize> = (0..n).collect();
    for l in 0..sample.d() {
        let col = sample.column(l);
        order.sort_unstable_by(|&a, &b| col[a].total_cmp(&col[b]));
        let tied = order.windows(2).find(|w| col[w[0]] == col[w[1]]);
        if let Some(w) = tied {
            match tie_policy {
                TiePolicy::Reject => {
                    return Err(Error::TiesDetected { column: l, value: col[w[0]] });
                }
                TiePolicy::RandomBreak { seed } => {
                    let mut rng = rng::stream(rng::derive_seed(seed, rng::tags::TIES), l as u64);
                    let keys: Vec<u64> = (0..n).map(|_| rng.random()).collect();
                    order.sort_unstable_by(|&a, &b| {
                        col[a].total_cmp(&col[b]).then(keys[a].cmp(&keys[b]))
                    });
                }
            }
        }
        let out = &mut ranks[l * n..(l + 1) * n];
        for (rank, &i) in order.iter().enumerate() {
            out[i] = rank as u32 + 1;
        }
    }
    Ok(RankMatrix { n, d: sample.d(), ranks })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn table_one() -> SampleMatrix {
        SampleMatrix::from_rows(&[
            vec![2.29, -0.97],
            vec![-1.2, -0.95],
            vec![-0.69, 0.75],
            vec![-0.41, -0.12],
        ])
        .unwrap()
    }

    #[test]
    fn worked_example_ranks() {
        let r = component_ranks(&table_one(), TiePolicy::Reject).unwrap();
        let rows: Vec<Vec<usize>> = (0..4).map(|i| r.row(i)).collect();
        assert_eq!(rows, vec![vec![4, 1], vec![1, 2], vec![2, 4], vec![3, 3]]);
    }

    #[test]
    fn single_observation_has_unit_ranks() {
        let s = SampleMatrix::from_rows(&[vec![0.3, -2.0, 5.0]]).unwrap();
        let r = component_ranks(&s, TiePolicy::Reject).unwrap();
        assert_eq!(r.row(0), vec![1, 1, 1]);
    }

    #[test]
    fn ties_rejected_or_broken() {
        let s = SampleMatrix::from_rows(&[vec![1.0, 0.0], vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        match component_ranks(&s, TiePolicy::Reject) {
            Err(Error::TiesDetected { column, value }) => {
                assert_eq!(column, 0);
                assert_eq!(value, 1.0);
            }
            other => panic!("expected ties error, got {other:?}"),
        }
        let r = component_ranks(&s, TiePolicy::RandomBreak { seed: 11 }).unwrap();
        let mut col: Vec<u32> = r.column(0).to_vec();
        assert_eq!(r.get(1, 0), 3);
        col.sort();
        assert_eq!(col, vec![1, 2, 3]);
        assert_eq!(r, component_ranks(&s, TiePolicy::RandomBreak { seed: 11 }).unwrap());
    }

    #[test]
    fn rejects_non_finite_and_ragged_input() {
        assert!(SampleMatrix::from_rows(&[vec![1.0, f64::NAN]]).is_err());
        assert!(SampleMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(SampleMatrix::from_columns(vec![]).is_err());
    }
}
