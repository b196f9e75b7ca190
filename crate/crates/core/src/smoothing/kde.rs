//! Gaussian-kernel marginal density estimates.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::sample::SampleMatrix;

/// Points of the cached CDF grid used for inversion.
const INVERSE_GRID: usize = 2048;
/// Kernel contributions beyond this many bandwidths are dropped.
const KERNEL_REACH: f64 = 9.0;

/// Silverman's rule `1.06 · σ̂ · n^{-1/5}`.
pub fn silverman_bandwidth(sd: f64, n: usize) -> f64 {
    1.06 * sd * (n as f64).powf(-0.2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalModel {
    /// Sorted data.
    data: Vec<f64>,
    bandwidth: f64,
    grid_x: Vec<f64>,
    grid_cdf: Vec<f64>,
}

impl MarginalModel {
    /// Fits a kernel density estimate to one column; `column` only labels
    /// errors.
    pub fn fit(values: &[f64], column: usize) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::InvalidParameter("kernel estimate needs n >= 2".into()));
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        let sd = var.sqrt();
        if !(sd > 0.0) {
            return Err(Error::ZeroVariance { column });
        }
        Self::with_bandwidth(values, silverman_bandwidth(sd, n))
    }

    pub fn with_bandwidth(values: &[f64], bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) || values.is_empty() {
            return Err(Error::InvalidParameter(format!("bad bandwidth {bandwidth}")));
        }
        let mut data = values.to_vec();
        data.sort_by(f64::total_cmp);
        let mut model = MarginalModel { data, bandwidth, grid_x: Vec::new(), grid_cdf: Vec::new() };
        let lo = model.data[0] - KERNEL_REACH * bandwidth;
        let hi = model.data[model.data.len() - 1] + KERNEL_REACH * bandwidth;
        let step = (hi - lo) / (INVERSE_GRID - 1) as f64;
        model.grid_x = (0..INVERSE_GRID).map(|i| lo + step * i as f64).collect();
        model.grid_cdf = model.grid_x.iter().map(|&x| model.cdf(x)).collect();
        // keep the cached CDF monotone despite rounding
        for i in 1..INVERSE_GRID {
            if model.grid_cdf[i] < model.grid_cdf[i - 1] {
                model.grid_cdf[i] = model.grid_cdf[i - 1];
            }
        }
        Ok(model)
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn n(&self) -> usize {
        self.data.len()
    }

    /// Data points within kernel reach of `x`.
    fn window(&self, x: f64) -> &[f64] {
        let reach = KERNEL_REACH * self.bandwidth;
        let lo = self.data.partition_point(|&v| v < x - reach);
        let hi = self.data.partition_point(|&v| v <= x + reach);
        &self.data[lo..hi]
    }

    pub fn density(&self, x: f64) -> f64 {
        let phi = Normal::standard();
        let h = self.bandwidth;
        let s: f64 = self.window(x).iter().map(|&v| phi.pdf((x - v) / h)).sum();
        s / (self.data.len() as f64 * h)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let phi = Normal::standard();
        let h = self.bandwidth;
        let reach = KERNEL_REACH * h;
        // points far below contribute 1, far above contribute 0
        let below = self.data.partition_point(|&v| v < x - reach);
        let s: f64 = self.window(x).iter().map(|&v| phi.cdf((x - v) / h)).sum();
        ((below as f64 + s) / self.data.len() as f64).clamp(0.0, 1.0)
    }

    /// Pseudo-inverse of the CDF by linear interpolation on the cached grid.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let g = &self.grid_cdf;
        let i = g.partition_point(|&c| c < u);
        if i == 0 {
            return self.grid_x[0];
        }
        if i >= g.len() {
            return self.grid_x[g.len() - 1];
        }
        let (c0, c1) = (g[i - 1], g[i]);
        let (x0, x1) = (self.grid_x[i - 1], self.grid_x[i]);
        if c1 <= c0 {
            return x1;
        }
        x0 + (x1 - x0) * (u - c0) / (c1 - c0)
    }

    /// `(min, max)` of the fitted data.
    pub fn data_range(&self) -> (f64, f64) {
        (self.data[0], self.data[self.data.len() - 1])
    }
}

/// One kernel estimate per column.
pub fn fit_marginals(sample: &SampleMatrix) -> Result<Vec<MarginalModel>> {
    (0..sample.d()).map(|l| MarginalModel::fit(sample.column(l), l)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Quadrature;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn bandwidth_rule() {
        assert!((silverman_bandwidth(1.0, 100) - 0.421_99).abs() < 1e-5);
    }

    #[test]
    fn two_point_data_is_symmetric() {
        let m = MarginalModel::fit(&[0.0, 1.0], 0).unwrap();
        assert!((m.cdf(0.5) - 0.5).abs() < 1e-12);
        for t in [0.1, 0.4, 0.9, 2.0] {
            assert!((m.density(0.5 - t) - m.density(0.5 + t)).abs() < 1e-12);
        }
        // Silverman's bandwidth (≈0.65 here) merges the two modes
        let narrow = MarginalModel::with_bandwidth(&[0.0, 1.0], 0.2).unwrap();
        assert!(narrow.density(0.0) > narrow.density(0.5));
        assert!((narrow.cdf(0.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_is_rejected() {
        assert!(matches!(MarginalModel::fit(&[2.0, 2.0, 2.0], 4), Err(Error::ZeroVariance { column: 4 })));
        assert!(MarginalModel::fit(&[2.0], 0).is_err());
    }

    #[test]
    fn gaussian_sample_recovers_density() {
        let mut rng = crate::rng::seeded(11);
        let xs: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let m = MarginalModel::fit(&xs, 0).unwrap();
        let phi = Normal::standard();
        let worst = (0..=60)
            .map(|i| -3.0 + 0.1 * i as f64)
            .map(|x| (m.density(x) - phi.pdf(x)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 0.02, "{worst}");
    }

    #[test]
    fn cdf_and_quantile_are_consistent() {
        let data = [-1.3, 0.2, 0.25, 2.0, 3.7, 4.1];
        let m = MarginalModel::fit(&data, 0).unwrap();
        let total = Quadrature::with_tol(1e-10).integrate(|x| m.density(x), -20.0, 25.0);
        assert!((total - 1.0).abs() < 1e-8);
        let mut prev = 0.0;
        for i in 0..200 {
            let x = -6.0 + 0.06 * i as f64;
            let c = m.cdf(x);
            assert!(c >= prev && (0.0..=1.0).contains(&c));
            prev = c;
        }
        for u in [0.05, 0.3, 0.5, 0.77, 0.99] {
            assert!((m.cdf(m.quantile(u)) - u).abs() < 1e-3);
        }
    }
}
