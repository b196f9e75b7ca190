//! Seeded data-generating processes used by the simulation studies.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::sample::SampleMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    IndependentGaussian,
    /// `X₂ = coef · X₁^p + ε`, every other coordinate and `ε` standard Gaussian.
    Polynomial { p: u32, coef: f64 },
    /// The first `dd` coordinates share a lognormal variance `V = exp(a·Z)`.
    RandomVolatility { a: f64, dd: usize },
    /// Every coordinate equals one common standard Gaussian draw.
    Comonotone,
    /// `a · N₁/‖N₁‖ + N₂` with independent standard Gaussian vectors.
    SphereNoise { a: f64 },
    /// Gaussian vector with unit variances and common correlation `rho`.
    GaussianCopula { rho: f64 },
}

impl GeneratorKind {
    /// Reads `name`, `name:key=value,...` (e.g. `polynomial:p=2,coef=0.5`) or
    /// a JSON object with a `kind` field.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.starts_with('{') {
            return Ok(serde_json::from_str(text)?);
        }
        let (name, params) = text.split_once(':').unwrap_or((text, ""));
        let mut obj = serde_json::Map::new();
        obj.insert("kind".into(), serde_json::Value::String(name.trim().into()));
        for pair in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("model parameter {pair:?} is not key=value")))?;
            let v: serde_json::Value = serde_json::from_str(v.trim())
                .map_err(|_| Error::Parse(format!("model parameter {pair:?} is not numeric")))?;
            obj.insert(k.trim().into(), v);
        }
        Ok(serde_json::from_value(serde_json::Value::Object(obj))?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, n: usize, d: usize, seed: u64) -> Self {
        Self { kind, n, d, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::InvalidParameter("generator needs n, d >= 1".into()));
        }
        match self.kind {
            GeneratorKind::Polynomial { p, coef } => {
                if self.d < 2 || p == 0 || !coef.is_finite() {
                    return Err(Error::InvalidParameter(
                        "polynomial dependence needs d >= 2, p >= 1 and a finite coefficient".into(),
                    ));
                }
            }
            GeneratorKind::RandomVolatility { a, dd } => {
                if !(a >= 0.0 && a.is_finite()) || dd < 2 || dd > self.d {
                    return Err(Error::InvalidParameter(format!(
                        "random volatility needs a >= 0 and 2 <= dd <= d (a={a}, dd={dd}, d={})",
                        self.d
                    )));
                }
            }
            GeneratorKind::SphereNoise { a } => {
                if !(a >= 0.0 && a.is_finite()) {
                    return Err(Error::InvalidParameter(format!("sphere radius {a} must be >= 0")));
                }
            }
            GeneratorKind::GaussianCopula { rho } => check_equicorrelation(rho, self.d)?,
            GeneratorKind::IndependentGaussian | GeneratorKind::Comonotone => {}
        }
        Ok(())
    }
}

fn check_equicorrelation(rho: f64, d: usize) -> Result<()> {
    let lower = if d > 1 { -1.0 / (d as f64 - 1.0) } else { -1.0 };
    if !(rho < 1.0 && rho > lower) {
        return Err(Error::SingularCorrelation { rho, d });
    }
    Ok(())
}

fn normal(rng: &mut StreamRng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn generate(spec: &GeneratorSpec) -> Result<SampleMatrix> {
    spec.validate()?;
    let mut rng = rng::seeded(spec.seed);
    generate_with(spec.kind, spec.n, spec.d, &mut rng)
}

/// Draws `n` observations from `kind` using `rng`.
pub fn generate_with(
    kind: GeneratorKind,
    n: usize,
    d: usize,
    rng: &mut StreamRng,
) -> Result<SampleMatrix> {
    GeneratorSpec::new(kind, n, d, 0).validate()?;
    let mut data = vec![0.0; n * d];
    let mut row = vec![0.0; d];
    for i in 0..n {
        fill_row(kind, &mut row, rng);
        for (l, &v) in row.iter().enumerate() {
            data[l * n + i] = v;
        }
    }
    SampleMatrix::from_column_major(n, d, data)
}

fn fill_row(kind: GeneratorKind, row: &mut [f64], rng: &mut StreamRng) {
    let d = row.len();
    match kind {
        GeneratorKind::IndependentGaussian => row.iter_mut().for_each(|v| *v = normal(rng)),
        GeneratorKind::Polynomial { p, coef } => {
            let x1 = normal(rng);
            let eps = normal(rng);
            row[0] = x1;
            row[1] = coef * x1.powi(p as i32) + eps;
            row[2..].iter_mut().for_each(|v| *v = normal(rng));
        }
        GeneratorKind::RandomVolatility { a, dd } => {
            let scale = (a * normal(rng)).exp().sqrt();
            for (l, v) in row.iter_mut().enumerate() {
                let z = normal(rng);
                *v = if l < dd { scale * z } else { z };
            }
        }
        GeneratorKind::Comonotone => {
            let z = normal(rng);
            row.iter_mut().for_each(|v| *v = z);
        }
        GeneratorKind::SphereNoise { a } => {
            let mut norm2 = 0.0;
            for v in row.iter_mut() {
                *v = normal(rng);
                norm2 += *v * *v;
            }
            let k = if norm2 > 0.0 { a / norm2.sqrt() } else { 0.0 };
            for v in row.iter_mut() {
                *v = k * *v + normal(rng);
            }
        }
        GeneratorKind::GaussianCopula { rho } => {
            // Σ = (1-ρ)(I - J/d) + (1+(d-1)ρ) J/d, with orthogonal projections.
            let mut mean = 0.0;
            for v in row.iter_mut() {
                *v = normal(rng);
                mean += *v;
            }
            mean /= d as f64;
            let a = (1.0 - rho).sqrt();
            let b = (1.0 + (d as f64 - 1.0) * rho).sqrt();
            for v in row.iter_mut() {
                *v = a * (*v - mean) + b * mean;
            }
        }
    }
}

/// Density of the equicorrelated Gaussian copula at `x ∈ (0,1)^d`.
pub fn gaussian_copula_density(rho: f64, x: &[f64]) -> Result<f64> {
    let d = x.len();
    if d == 0 {
        return Err(Error::InvalidParameter("empty point".into()));
    }
    check_equicorrelation(rho, d)?;
    if x.iter().any(|&u| !(0.0..=1.0).contains(&u)) {
        return Err(Error::Domain("copula argument outside [0, 1]^d".into()));
    }
    if rho == 0.0 {
        return Ok(1.0);
    }
    if x.iter().any(|&u| u == 0.0 || u == 1.0) {
        return Err(Error::Domain("copula density is unbounded on the boundary".into()));
    }
    let std = Normal::standard();
    let z: Vec<f64> = x.iter().map(|&u| std.inverse_cdf(u)).collect();
    let sum: f64 = z.iter().sum();
    let sum2: f64 = z.iter().map(|v| v * v).sum();
    let df = d as f64;
    let spread = 1.0 + (df - 1.0) * rho;
    let det = (1.0 - rho).powf(df - 1.0) * spread;
    let inv_quad = (sum2 - rho / spread * sum * sum) / (1.0 - rho);
    Ok((-(inv_quad - sum2) / 2.0).exp() / det.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Quadrature;

    fn moments(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let (ma, va) = moments(a);
        let (mb, vb) = moments(b);
        let cov = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>()
            / (a.len() as f64 - 1.0);
        cov / (va * vb).sqrt()
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = GeneratorSpec::new(GeneratorKind::SphereNoise { a: 2.0 }, 50, 3, 4);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = GeneratorSpec { seed: 5, ..spec };
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn gaussian_coordinates_have_standard_moments() {
        let n = 100_000;
        let s = generate(&GeneratorSpec::new(
            GeneratorKind::Polynomial { p: 2, coef: 0.5 },
            n,
            3,
            21,
        ))
        .unwrap();
        let nf = n as f64;
        for l in [0, 2] {
            let (mean, var) = moments(s.column(l));
            assert!(mean.abs() < 4.0 / nf.sqrt(), "column {l} mean {mean}");
            assert!((var - 1.0).abs() < 4.0 * (2.0 / nf).sqrt(), "column {l} var {var}");
        }
        let resid: Vec<f64> =
            s.column(0).iter().zip(s.column(1)).map(|(x, y)| y - 0.5 * x * x).collect();
        assert!(corr(&resid, s.column(0)).abs() < 4.0 / nf.sqrt());
        let (m, v) = moments(&resid);
        assert!(m.abs() < 4.0 / nf.sqrt() && (v - 1.0).abs() < 4.0 * (2.0 / nf).sqrt());
    }

    #[test]
    fn zero_volatility_is_independent_standard() {
        let n = 100_000;
        let s = generate(&GeneratorSpec::new(
            GeneratorKind::RandomVolatility { a: 0.0, dd: 2 },
            n,
            3,
            3,
        ))
        .unwrap();
        let nf = n as f64;
        for l in 0..3 {
            let (mean, var) = moments(s.column(l));
            assert!(mean.abs() < 4.0 / nf.sqrt());
            assert!((var - 1.0).abs() < 4.0 * (2.0 / nf).sqrt());
        }
        assert!(corr(s.column(0), s.column(1)).abs() < 4.0 / nf.sqrt());
    }

    #[test]
    fn sphere_noise_squared_norm() {
        let n = 10_000;
        let s = generate(&GeneratorSpec::new(GeneratorKind::SphereNoise { a: 6.0 }, n, 5, 17))
            .unwrap();
        let norms: Vec<f64> = s.rows().map(|r| r.iter().map(|v| v * v).sum()).collect();
        let (mean, var) = moments(&norms);
        let se = (var / n as f64).sqrt();
        assert!((mean - 41.0).abs() < 4.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn gaussian_copula_generator_correlation() {
        let n = 50_000;
        let s = generate(&GeneratorSpec::new(GeneratorKind::GaussianCopula { rho: 0.5 }, n, 3, 8))
            .unwrap();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            assert!((corr(s.column(a), s.column(b)) - 0.5).abs() < 0.02);
        }
        let (_, v) = moments(s.column(2));
        assert!((v - 1.0).abs() < 0.03);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let bad = [
            GeneratorSpec::new(GeneratorKind::Polynomial { p: 1, coef: 0.5 }, 10, 1, 0),
            GeneratorSpec::new(GeneratorKind::RandomVolatility { a: 1.0, dd: 4 }, 10, 3, 0),
            GeneratorSpec::new(GeneratorKind::RandomVolatility { a: -1.0, dd: 2 }, 10, 3, 0),
            GeneratorSpec::new(GeneratorKind::GaussianCopula { rho: 1.0 }, 10, 2, 0),
            GeneratorSpec::new(GeneratorKind::IndependentGaussian, 0, 2, 0),
        ];
        for spec in bad {
            assert!(generate(&spec).is_err(), "{spec:?}");
        }
    }

    #[test]
    fn copula_density_properties() {
        assert_eq!(gaussian_copula_density(0.0, &[0.2, 0.9, 0.4]).unwrap(), 1.0);
        let a = gaussian_copula_density(0.5, &[0.2, 0.7]).unwrap();
        let b = gaussian_copula_density(0.5, &[0.7, 0.2]).unwrap();
        assert!((a - b).abs() < 1e-14);
        assert!(gaussian_copula_density(1.0, &[0.5, 0.5]).is_err());
        assert!(gaussian_copula_density(-0.6, &[0.5, 0.5, 0.5]).is_err());
        assert!(gaussian_copula_density(0.5, &[0.5, 1.5]).is_err());
    }

    #[test]
    fn copula_density_integrates_to_one() {
        let q = Quadrature { abs_tol: 1e-9, max_depth: 18 };
        let total =
            q.integrate_unit_cube(|p| gaussian_copula_density(0.5, p).unwrap(), 2);
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn parses_model_strings() {
        assert_eq!(
            GeneratorKind::parse("polynomial:p=2,coef=0.5").unwrap(),
            GeneratorKind::Polynomial { p: 2, coef: 0.5 }
        );
        assert_eq!(GeneratorKind::parse("comonotone").unwrap(), GeneratorKind::Comonotone);
        assert_eq!(
            GeneratorKind::parse(r#"{"kind":"sphere_noise","a":6}"#).unwrap(),
            GeneratorKind::SphereNoise { a: 6.0 }
        );
        assert!(GeneratorKind::parse("polynomial:p").is_err());
        assert!(GeneratorKind::parse("banana").is_err());
    }
}
