//! Beta-mixture smoothing of a rank grid into a copula density, and its
//! transformation back to the data scale through kernel marginals.
//!
//! Each cell `r` of the grid becomes the product density
//! `∏_l Beta(x_l; r_l, m - r_l + 1)`, which equals `∏_l m·b_{m-1,r_l-1}(x_l)`.
//! The mixture integrates to one whenever the grid does.

mod kde;

pub use kde::{fit_marginals, silverman_bandwidth, MarginalModel};

use rand_distr::weighted::WeightedIndex;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{estimate, EstimatorConfig};
use crate::exact::bernstein_unchecked;
use crate::grid::RankGrid;
use crate::rng::{self, derive_seed, tags};
use crate::sample::{component_ranks, SampleMatrix, TiePolicy};

const SAMPLE_CHUNK: usize = 1024;

#[derive(Debug, Clone)]
pub struct SmoothedCopula {
    grid: RankGrid,
    m: usize,
    d: usize,
    /// Zero-based ranks of the cells with positive weight, `d` per cell.
    ranks: Vec<u16>,
    weights: Vec<f64>,
    cell_index: Vec<u64>,
}

pub fn smooth(grid: &RankGrid) -> SmoothedCopula {
    let shape = grid.shape();
    let (m, d) = (shape.m(), shape.d());
    let mut ranks = Vec::new();
    let mut weights = Vec::new();
    let mut cell_index = Vec::new();
    for (idx, w) in grid.nonzero() {
        if w <= 0.0 {
            continue;
        }
        ranks.extend(shape.decode(idx).iter().map(|&r| (r - 1) as u16));
        weights.push(w);
        cell_index.push(idx);
    }
    SmoothedCopula { grid: grid.clone(), m, d, ranks, weights, cell_index }
}

impl SmoothedCopula {
    pub fn grid(&self) -> &RankGrid {
        &self.grid
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `m·b_{m-1,t}(x_l)` for every coordinate `l` and zero-based rank `t`.
    fn kernel_table(&self, x: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut table = Vec::with_capacity(self.d * m);
        for &xl in x {
            table.extend((0..m).map(|t| m as f64 * bernstein_unchecked(m - 1, t, xl)));
        }
        table
    }

    /// Density at `x`; zero outside `[0,1]^d`.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d {
            return Err(Error::ShapeMismatch(format!(
                "point of dimension {} for a {}-dimensional copula",
                x.len(),
                self.d
            )));
        }
        Ok(self.density_unchecked(x))
    }

    fn density_unchecked(&self, x: &[f64]) -> f64 {
        if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return 0.0;
        }
        let (m, d) = (self.m, self.d);
        let table = self.kernel_table(x);
        self.weights
            .iter()
            .zip(self.ranks.chunks_exact(d))
            .map(|(w, r)| {
                let mut p = *w;
                for (l, &t) in r.iter().enumerate() {
                    p *= table[l * m + t as usize];
                }
                p
            })
            .sum()
    }

    /// `k` draws with their generating cells.
    pub fn sample_with_cells(&self, k: usize, seed: u64) -> Result<(SampleMatrix, Vec<u64>)> {
        if k == 0 {
            return Err(Error::InvalidParameter("need k >= 1 draws".into()));
        }
        let picker = WeightedIndex::new(&self.weights)
            .map_err(|e| Error::InvalidParameter(format!("grid weights: {e}")))?;
        let m = self.m as f64;
        let betas: Vec<Beta<f64>> = (1..=self.m)
            .map(|r| Beta::new(r as f64, m - r as f64 + 1.0).expect("positive shapes"))
            .collect();
        let d = self.d;
        let base = derive_seed(seed, tags::SMOOTH_SAMPLE);
        let chunks: Vec<(Vec<Vec<f64>>, Vec<u64>)> = (0..k.div_ceil(SAMPLE_CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut rng = rng::stream(base, c as u64);
                let len = SAMPLE_CHUNK.min(k - c * SAMPLE_CHUNK);
                let mut rows = Vec::with_capacity(len);
                let mut cells = Vec::with_capacity(len);
                for _ in 0..len {
                    let j = picker.sample(&mut rng);
                    let r = &self.ranks[j * d..(j + 1) * d];
                    rows.push(r.iter().map(|&t| betas[t as usize].sample(&mut rng)).collect());
                    cells.push(self.cell_index[j]);
                }
                (rows, cells)
            })
            .collect();
        let mut rows = Vec::with_capacity(k);
        let mut cells = Vec::with_capacity(k);
        for (r, c) in chunks {
            rows.extend(r);
            cells.extend(c);
        }
        Ok((SampleMatrix::from_rows(&rows)?, cells))
    }

    /// `k` points in `[0,1]^d` from the smoothed copula.
    pub fn sample(&self, k: usize, seed: u64) -> Result<SampleMatrix> {
        Ok(self.sample_with_cells(k, seed)?.0)
    }
}

/// Ranks divided by `n + 1`.
pub fn pseudo_observations(sample: &SampleMatrix, ties: TiePolicy) -> Result<SampleMatrix> {
    let ranks = component_ranks(sample, ties)?;
    let denom = sample.n() as f64 + 1.0;
    let columns = (0..sample.d())
        .map(|l| ranks.column(l).iter().map(|&r| r as f64 / denom).collect())
        .collect();
    SampleMatrix::from_columns(columns)
}

#[derive(Debug, Clone)]
pub struct JointDensityModel {
    pub copula: SmoothedCopula,
    pub marginals: Vec<MarginalModel>,
}

/// Normalised density values on a rectangular grid of two free coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensitySlice {
    /// Indices of the free coordinates, zero-based.
    pub free: [usize; 2],
    pub fixed: Vec<(usize, f64)>,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `values[i * ys.len() + j]` belongs to `(xs[i], ys[j])`; sums to one.
    pub values: Vec<f64>,
}

impl DensitySlice {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ys.len() + j]
    }
}

impl JointDensityModel {
    pub fn new(copula: SmoothedCopula, marginals: Vec<MarginalModel>) -> Result<Self> {
        if copula.d() != marginals.len() {
            return Err(Error::ShapeMismatch(format!(
                "{}-dimensional copula with {} marginals",
                copula.d(),
                marginals.len()
            )));
        }
        Ok(Self { copula, marginals })
    }

    /// Estimates the grid with `cfg`, smooths it and fits kernel marginals.
    pub fn fit(sample: &SampleMatrix, cfg: &EstimatorConfig) -> Result<Self> {
        let grid = estimate(sample, cfg)?;
        Self::new(smooth(&grid), fit_marginals(sample)?)
    }

    pub fn d(&self) -> usize {
        self.marginals.len()
    }

    /// `ĉ(F̂₁(x₁), …, F̂_d(x_d)) · ∏ f̂_l(x_l)`.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d() {
            return Err(Error::ShapeMismatch(format!(
                "point of dimension {} for a {}-dimensional model",
                x.len(),
                self.d()
            )));
        }
        let u: Vec<f64> = self.marginals.iter().zip(x).map(|(f, &v)| f.cdf(v)).collect();
        let prod: f64 = self.marginals.iter().zip(x).map(|(f, &v)| f.density(v)).product();
        Ok(self.copula.density_unchecked(&u) * prod)
    }

    /// Joint density on the grid `xs × ys` of the two coordinates not listed in
    /// `fixed`, the others held at their fixed values, normalised to sum to one
    /// over the grid.
    pub fn conditional_slice(
        &self,
        fixed: &[(usize, f64)],
        xs: &[f64],
        ys: &[f64],
    ) -> Result<DensitySlice> {
        let d = self.d();
        let mut is_fixed = vec![false; d];
        for &(l, v) in fixed {
            if l >= d || is_fixed[l] || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "bad conditioning on coordinate {l} of {d}"
                )));
            }
            is_fixed[l] = true;
        }
        let free: Vec<usize> = (0..d).filter(|&l| !is_fixed[l]).collect();
        if free.len() != 2 {
            return Err(Error::InvalidParameter(format!(
                "a slice needs exactly two free coordinates, found {}",
                free.len()
            )));
        }
        if xs.is_empty() || ys.is_empty() || xs.iter().chain(ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("slice axes must be finite and non-empty".into()));
        }
        let (a, b) = (free[0], free[1]);
        let mut base_u = vec![0.0; d];
        let mut base_f = 1.0;
        for &(l, v) in fixed {
            base_u[l] = self.marginals[l].cdf(v);
            base_f *= self.marginals[l].density(v);
        }
        let axis = |l: usize, pts: &[f64]| -> Vec<(f64, f64)> {
            pts.iter().map(|&v| (self.marginals[l].cdf(v), self.marginals[l].density(v))).collect()
        };
        let ax = axis(a, xs);
        let ay = axis(b, ys);
        let mut values: Vec<f64> = ax
            .par_iter()
            .flat_map_iter(|&(ua, fa)| {
                let mut u = base_u.clone();
                u[a] = ua;
                ay.iter()
                    .map(|&(ub, fb)| {
                        u[b] = ub;
                        self.copula.density_unchecked(&u) * fa * fb * base_f
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let total: f64 = values.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::DegenerateSlice);
        }
        values.iter_mut().for_each(|v| *v /= total);
        Ok(DensitySlice {
            free: [a, b],
            fixed: fixed.to_vec(),
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            values,
        })
    }

    /// Synthetic data: copula draws mapped through the marginal quantiles.
    pub fn sample(&self, k: usize, seed: u64) -> Result<SampleMatrix> {
        let u = self.copula.sample(k, seed)?;
        let columns = (0..self.d())
            .map(|l| u.column(l).iter().map(|&p| self.marginals[l].quantile(p)).collect())
            .collect();
        SampleMatrix::from_columns(columns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::estimate_exhaustive;
    use crate::generators::{generate, GeneratorKind, GeneratorSpec};
    use crate::null_theory::{comonotone_pmf, independence_pmf};
    use crate::quadrature::Quadrature;
    use crate::sample::tests::table_one;

    #[test]
    fn uniform_grid_smooths_to_one() {
        let c = smooth(&independence_pmf(5, 3).unwrap());
        for x in [[0.0, 0.5, 1.0], [0.1, 0.2, 0.3], [0.99, 0.01, 0.7]] {
            assert!((c.density(&x).unwrap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(c.density(&[0.5, 1.5, 0.5]).unwrap(), 0.0);
        assert!(c.density(&[0.5]).is_err());
    }

    #[test]
    fn comonotone_two_by_two() {
        let c = smooth(&comonotone_pmf(2).unwrap());
        for (x, y) in [(0.0, 0.0), (0.3, 0.8), (0.5, 0.5), (1.0, 0.2)] {
            let expected = 2.0 * ((1.0 - x) * (1.0 - y) + x * y);
            assert!((c.density(&[x, y]).unwrap() - expected).abs() < 1e-14);
        }
        assert_eq!(c.density(&[0.0, 0.0]).unwrap(), 2.0);
    }

    #[test]
    fn smoothed_table_grid_integrates_to_one() {
        let c = smooth(&estimate_exhaustive(&table_one(), 3).unwrap());
        let v = Quadrature::with_tol(1e-11).integrate_unit_cube(|x| c.density_unchecked(x), 2);
        assert!((v - 1.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn uniform_grid_samples_are_uniform() {
        let c = smooth(&independence_pmf(6, 2).unwrap());
        let k = 10_000;
        let s = c.sample(k, 3).unwrap();
        assert_eq!(s.n(), k);
        for l in 0..2 {
            let mut col = s.column(l).to_vec();
            col.sort_by(f64::total_cmp);
            let ks = col
                .iter()
                .enumerate()
                .map(|(i, &u)| (u - i as f64 / k as f64).abs().max((u - (i + 1) as f64 / k as f64).abs()))
                .fold(0.0, f64::max);
            assert!(ks < 0.02, "{ks}");
        }
        assert_eq!(s.column(0), c.sample(k, 3).unwrap().column(0));
    }

    #[test]
    fn comonotone_samples_correlate() {
        let c = smooth(&comonotone_pmf(8).unwrap());
        let s = c.sample(10_000, 1).unwrap();
        let (x, y) = (s.column(0), s.column(1));
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        let vy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
        assert!(cov / (vx * vy).sqrt() > 0.5);
        // mean of a uniform marginal, within 4/√k
        assert!((mx - 0.5).abs() < 4.0 / n.sqrt());
    }

    #[test]
    fn sampled_cells_follow_the_grid() {
        let grid = estimate_exhaustive(&table_one(), 3).unwrap();
        let c = smooth(&grid);
        let k = 20_000;
        let (_, cells) = c.sample_with_cells(k, 8).unwrap();
        for idx in 0..9 {
            let p = grid.weight_at(idx);
            let freq = cells.iter().filter(|&&c| c == idx).count() as f64 / k as f64;
            let se = (p * (1.0 - p) / k as f64).sqrt();
            assert!((freq - p).abs() <= 4.0 * se + 1e-12, "cell {idx}: {freq} vs {p}");
        }
        assert!(c.sample(0, 1).is_err());
    }

    #[test]
    fn pseudo_observations_are_interior() {
        let p = pseudo_observations(&table_one(), TiePolicy::Reject).unwrap();
        assert_eq!(p.column(0), &[0.8, 0.2, 0.4, 0.6]);
    }

    fn independent_model() -> (JointDensityModel, SampleMatrix) {
        let spec = GeneratorSpec::new(GeneratorKind::IndependentGaussian, 400, 3, 2);
        let data = generate(&spec).unwrap();
        let grid = independence_pmf(6, 3).unwrap();
        (JointDensityModel::new(smooth(&grid), fit_marginals(&data).unwrap()).unwrap(), data)
    }

    #[test]
    fn independent_slice_factorises() {
        let (model, _) = independent_model();
        let xs: Vec<f64> = (0..21).map(|i| -2.5 + 0.25 * i as f64).collect();
        let ys: Vec<f64> = (0..17).map(|i| -2.0 + 0.25 * i as f64).collect();
        for fixed in [0.0, 1.3] {
            let s = model.conditional_slice(&[(1, fixed)], &xs, &ys).unwrap();
            assert_eq!(s.free, [0, 2]);
            assert!((s.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let fx: Vec<f64> = xs.iter().map(|&x| model.marginals[0].density(x)).collect();
            let fy: Vec<f64> = ys.iter().map(|&y| model.marginals[2].density(y)).collect();
            let z: f64 = fx.iter().sum::<f64>() * fy.iter().sum::<f64>();
            for i in 0..xs.len() {
                for j in 0..ys.len() {
                    assert!((s.value(i, j) - fx[i] * fy[j] / z).abs() < 1e-12);
                }
            }
        }
        assert!(model.conditional_slice(&[], &xs, &ys).is_err());
        assert!(model.conditional_slice(&[(1, 0.0), (1, 0.0)], &xs, &ys).is_err());
        assert!(matches!(
            model.conditional_slice(&[(1, 1e6)], &xs, &ys),
            Err(Error::DegenerateSlice)
        ));
    }

    #[test]
    fn joint_density_is_nonnegative_and_integrates() {
        let spec = GeneratorSpec::new(GeneratorKind::GaussianCopula { rho: 0.6 }, 300, 2, 4);
        let data = generate(&spec).unwrap();
        let model = JointDensityModel::fit(&data, &EstimatorConfig::random(5, 20_000, 1)).unwrap();
        let mut rng = rng::seeded(5);
        use rand::Rng;
        for _ in 0..10_000 {
            let x = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            assert!(model.density(&x).unwrap() >= 0.0);
        }
        let q = Quadrature { abs_tol: 1e-5, max_depth: 12 };
        let (lo0, hi0) = model.marginals[0].data_range();
        let (lo1, hi1) = model.marginals[1].data_range();
        let pad = 4.0;
        let v = q.integrate_box(
            |x| model.density(x).unwrap(),
            &[lo0 - pad, lo1 - pad],
            &[hi0 + pad, hi1 + pad],
        );
        assert!((v - 1.0).abs() < 0.02, "{v}");
    }

    #[test]
    fn synthetic_sample_has_fitted_scale() {
        let (model, data) = independent_model();
        let s = model.sample(5000, 1).unwrap();
        let mean = s.column(1).iter().sum::<f64>() / 5000.0;
        let data_mean = data.column(1).iter().sum::<f64>() / data.n() as f64;
        assert!((mean - data_mean).abs() < 0.1);
    }
}
