//! Null objects under independence of the components.
//!
//! The estimated grid is a family of U-statistics, one per cell. Their
//! Hájek projections are driven by the conditional kernel mean
//! `h(r, x)`, the expected contribution to cell `r` of an observation
//! sitting at `x ∈ [0,1]^d`:
//!
//! ```text
//! h(r, x) = (1/m) ∏ b_{m-1,r_l-1}(x_l) + 1/(m (m-1)^{d-1}) ∏ (1 - b_{m-1,r_l-1}(x_l))
//! ```
//!
//! The first term is the chance that the observation itself takes rank
//! vector `r`; the second that it misses `r` in every coordinate and one of
//! the other `m-1` members takes it. With `σ(r,s) = cov(h(r,X), h(s,X))`,
//! `T = m^d Σ_r (P̂(r) - m^{-d})²` satisfies
//! `n·E T → m^{d+2} Σ_r σ(r,r)` and `n²·Var T → 2 m^{2d+4} Σ_{r,s} σ(r,s)²`.
//!
//! Two routes to these limits are provided: [`aggregate_moments`] sums the
//! factorised covariance terms coordinate by coordinate, and
//! [`closed_form_moments`] evaluates the closed forms in `S₁`, `S₂`. The
//! closed variance form exists in two variants: as printed, and with the sign
//! of its `S₂` term in the last summand corrected. Only the corrected form
//! agrees with the aggregation and vanishes at `d = 1`.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{
    self, bernstein_unchecked, concordance_integral, integer, pow, s_constants,
    ExactRational,
};
use crate::generators::{generate_with, GeneratorKind};
use crate::grid::{GridShape, RankCounts, RankGrid};
use crate::rng;
use crate::sample::{component_ranks, TiePolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceVariant {
    PrintedForm,
    SignCorrected,
}

/// Limits of `n·E(T)` and `n²·Var(T)` under independence.
#[derive(Debug, Clone, PartialEq)]
pub struct NullMoments {
    pub m: usize,
    pub d: usize,
    pub mean_limit: ExactRational,
    pub var_limit: ExactRational,
    pub variant: VarianceVariant,
}

impl NullMoments {
    pub fn mean_f64(&self) -> f64 {
        exact::to_f64(&self.mean_limit)
    }

    pub fn var_f64(&self) -> f64 {
        exact::to_f64(&self.var_limit)
    }
}

/// The distinct products `D_{i,j}` of the three terms of `h(r,·) - m^{-d}`
/// against those of `h(s,·) - m^{-d}`, integrated over `[0,1]^d`. The
/// constant term enters with magnitude `m^{-d}`; signs are applied in
/// [`sigma_cov`].
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceTerms {
    pub d11: ExactRational,
    pub d12: ExactRational,
    pub d13: ExactRational,
    pub d22: ExactRational,
    pub d23: ExactRational,
    pub d33: ExactRational,
}

fn check_m(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("sub-sample size m = {m} must be >= 2")));
    }
    Ok(())
}

fn check_ranks(r: &[usize], m: usize) -> Result<()> {
    if r.is_empty() {
        return Err(Error::InvalidParameter("rank vector needs at least one component".into()));
    }
    if let Some(&c) = r.iter().find(|&&c| c == 0 || c > m) {
        return Err(Error::Domain(format!("rank {c} outside 1..={m}")));
    }
    Ok(())
}

/// The constant grid `m^{-d}`.
pub fn independence_pmf(m: usize, d: usize) -> Result<RankGrid> {
    check_m(m)?;
    let cells = GridShape::new(m, d)?.cells();
    let w = 1.0 / cells as f64;
    RankGrid::from_fn(m, d, |_| w)
}

/// Two comonotone components: mass `1/m` on each diagonal cell.
pub fn comonotone_pmf(m: usize) -> Result<RankGrid> {
    check_m(m)?;
    let w = 1.0 / m as f64;
    RankGrid::from_fn(m, 2, |r| if r[0] == r[1] { w } else { 0.0 })
}

/// `h(r, x)` for an observation at `x ∈ [0,1]^d`.
pub fn conditional_kernel_mean(r: &[usize], x: &[f64], m: usize) -> Result<f64> {
    check_m(m)?;
    check_ranks(r, m)?;
    if x.len() != r.len() {
        return Err(Error::ShapeMismatch(format!(
            "point of dimension {} for a rank vector of dimension {}",
            x.len(),
            r.len()
        )));
    }
    if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Domain("kernel argument outside [0, 1]^d".into()));
    }
    Ok(kernel_mean_unchecked(r, x, m))
}

pub(crate) fn kernel_mean_unchecked(r: &[usize], x: &[f64], m: usize) -> f64 {
    let d = r.len();
    let mut hit = 1.0;
    let mut miss = 1.0;
    for (&rl, &xl) in r.iter().zip(x) {
        let b = bernstein_unchecked(m - 1, rl - 1, xl);
        hit *= b;
        miss *= 1.0 - b;
    }
    let mf = m as f64;
    hit / mf + miss / (mf * (mf - 1.0).powi(d as i32 - 1))
}

/// `A(m-1, t, u) / (2m-1) = ∫ b_{m-1,t} b_{m-1,u}` for all `t, u < m`.
fn overlap_table(m: usize) -> Vec<Vec<ExactRational>> {
    let denom = integer(2 * m as i64 - 1);
    (0..m)
        .map(|t| {
            (0..m)
                .map(|u| concordance_integral(m - 1, t, u).expect("indices in range") / &denom)
                .collect()
        })
        .collect()
}

pub fn covariance_terms(r: &[usize], s: &[usize], m: usize) -> Result<CovarianceTerms> {
    check_m(m)?;
    check_ranks(r, m)?;
    check_ranks(s, m)?;
    if r.len() != s.len() {
        return Err(Error::ShapeMismatch("rank vectors of different dimensions".into()));
    }
    let d = r.len();
    let mq = integer(m as i64);
    let m1 = integer(m as i64 - 1);
    let inv_m = mq.recip();
    let denom = integer(2 * m as i64 - 1);

    let mut p11 = ExactRational::one();
    let mut p12 = ExactRational::one();
    let mut p22 = ExactRational::one();
    for (&rl, &sl) in r.iter().zip(s) {
        let overlap = concordance_integral(m - 1, rl - 1, sl - 1)? / &denom;
        p12 *= &inv_m - &overlap;
        p22 *= ExactRational::one() - &inv_m - &inv_m + &overlap;
        p11 *= overlap;
    }
    let m2 = &mq * &mq;
    let m_2d = pow(&mq, 2 * d);
    Ok(CovarianceTerms {
        d11: p11 / &m2,
        d12: p12 / (&m2 * pow(&m1, d - 1)),
        d13: (&m_2d * &mq).recip(),
        d22: p22 / (&m2 * pow(&m1, 2 * d - 2)),
        d23: &m1 / (&m_2d * &mq),
        d33: m_2d.recip(),
    })
}

/// `σ(r, s) = D₁₁ + 2 D₁₂ + D₂₂ - m^{-2d}`.
pub fn sigma_cov(r: &[usize], s: &[usize], m: usize) -> Result<ExactRational> {
    let t = covariance_terms(r, s, m)?;
    let two = integer(2);
    // D₃₃ - 2D₁₃ - 2D₂₃ collapses to -m^{-2d}.
    Ok(&t.d11 + &two * &t.d12 + &t.d22 + &t.d33 - &two * &t.d13 - &two * &t.d23)
}

/// Limits from the per-coordinate factorisation of the covariance terms.
///
/// Every piece of `σ(r,s)` is a weight times `∏_l f(r_l, s_l)`, so sums over
/// the `m^d` or `m^{2d}` index pairs become `d`-th powers of sums over
/// `m` or `m²` coordinate pairs.
pub fn aggregate_moments(m: usize, d: usize) -> Result<NullMoments> {
    check_m(m)?;
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    let table = overlap_table(m);
    let mq = integer(m as i64);
    let m1 = integer(m as i64 - 1);
    let inv_m = mq.recip();
    let m2 = &mq * &mq;
    let one = ExactRational::one();

    // factor tables f_k(t, u) and weights w_k
    let factors: Vec<Vec<Vec<ExactRational>>> = vec![
        table.clone(),
        table.iter().map(|row| row.iter().map(|a| &inv_m - a).collect()).collect(),
        table
            .iter()
            .map(|row| row.iter().map(|a| &one - &inv_m - &inv_m + a).collect())
            .collect(),
        vec![vec![m2.recip(); m]; m],
    ];
    let weights = [
        m2.recip(),
        integer(2) / (&m2 * pow(&m1, d - 1)),
        (&m2 * pow(&m1, 2 * d - 2)).recip(),
        -one.clone(),
    ];

    let mut trace = ExactRational::zero();
    for (w, f) in weights.iter().zip(&factors) {
        let diag: ExactRational = (0..m).map(|t| f[t][t].clone()).sum();
        trace += w * pow(&diag, d);
    }

    let mut square = ExactRational::zero();
    for (wa, fa) in weights.iter().zip(&factors) {
        for (wb, fb) in weights.iter().zip(&factors) {
            let mut s = ExactRational::zero();
            for t in 0..m {
                for u in 0..m {
                    s += &fa[t][u] * &fb[t][u];
                }
            }
            square += wa * wb * pow(&s, d);
        }
    }

    Ok(NullMoments {
        m,
        d,
        mean_limit: pow(&mq, d + 2) * trace,
        var_limit: integer(2) * pow(&mq, 2 * d + 4) * square,
        variant: VarianceVariant::SignCorrected,
    })
}

/// Closed-form limits in terms of `S₁` and `S₂`.
pub fn closed_form_moments(m: usize, d: usize, variant: VarianceVariant) -> Result<NullMoments> {
    check_m(m)?;
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    let c = s_constants(m)?;
    let (s1, s2) = (&c.s1, &c.s2);
    let mq = integer(m as i64);
    let m1 = integer(m as i64 - 1);
    let p = |k: usize| pow(&mq, k);
    let q = |k: usize| pow(&m1, k);
    let two = integer(2);

    let mean = pow(s1, d) - p(2)
        + q(2) * pow(&((p(2) - &two * &mq + s1) / q(2)), d)
        + &two * &m1 * pow(&((&mq - s1) / &m1), d);

    let last_sign = match variant {
        VarianceVariant::PrintedForm => ExactRational::one(),
        VarianceVariant::SignCorrected => -ExactRational::one(),
    };
    let quartic = p(4) - integer(4) * p(3) + integer(6) * p(2) - integer(4) * &mq + s2;
    let cubic = p(3) - integer(3) * p(2) + integer(3) * &mq + last_sign * s2;
    let var = &two * pow(s2, d) - &two * p(4)
        + &two * q(4) * pow(&(quartic / q(4)), d)
        + integer(12) * q(2) * pow(&((p(2) - &two * &mq + s2) / q(2)), d)
        + integer(8) * &m1 * pow(&((&mq - s2) / &m1), d)
        + integer(8) * q(3) * pow(&(cubic / q(3)), d);

    Ok(NullMoments { m, d, mean_limit: mean, var_limit: var, variant })
}

/// Large-`m` approximation `2 (√(πm/8))^d + 7√(π/2) · d · √m` of the
/// variance limit.
pub fn approx_null_variance(m: usize, d: usize) -> f64 {
    let mf = m as f64;
    2.0 * (std::f64::consts::PI * mf / 8.0).sqrt().powi(d as i32) + linear_variance_part(m, d)
}

/// The linear-in-`d` part `7√(π/2) · d · √m` of the approximation.
pub fn linear_variance_part(m: usize, d: usize) -> f64 {
    7.0 * (std::f64::consts::FRAC_PI_2).sqrt() * d as f64 * (m as f64).sqrt()
}

/// Dimension searched up to by [`border_dimension`].
pub const BORDER_SEARCH_LIMIT: usize = 64;

/// Largest `d` at which the linear part still makes up at least half of the
/// exact variance limit of `variant`, i.e. `7√(π/2)·d·√m ≥ ½·Var`. The
/// variance grows geometrically in `d`, so the scan stops at the first
/// dimension past the border. Returns 0 when even `d = 1` fails.
pub fn border_dimension(m: usize, variant: VarianceVariant) -> Result<usize> {
    check_m(m)?;
    let mut border = 0;
    for d in 1..=BORDER_SEARCH_LIMIT {
        let var = closed_form_moments(m, d, variant)?.var_f64();
        if linear_variance_part(m, d) >= var / 2.0 {
            border = d;
        } else if border > 0 {
            break;
        }
    }
    Ok(border)
}

/// Monte Carlo estimate of the rank-vector law of `m`-samples from `kind`:
/// each replication contributes its `m` rank vectors with weight `1/m`.
pub fn mc_rank_pmf(
    kind: GeneratorKind,
    m: usize,
    d: usize,
    reps: u64,
    seed: u64,
) -> Result<RankGrid> {
    check_m(m)?;
    if reps == 0 {
        return Err(Error::InvalidParameter("need at least one replication".into()));
    }
    let shape = GridShape::new(m, d)?;
    // surface generator errors before fanning out
    generate_with(kind, m, d, &mut rng::stream(seed, 0))?;
    let counts = (0..reps)
        .into_par_iter()
        .try_fold(
            || RankCounts::new(m, d).expect("shape validated"),
            |mut acc, rep| -> Result<RankCounts> {
                let sample = generate_with(kind, m, d, &mut rng::stream(seed, rep))?;
                let ranks = component_ranks(&sample, TiePolicy::Reject)?;
                let cells: Vec<u64> = (0..m).map(|i| shape.encode(&ranks.row(i))).collect();
                acc.record(&cells);
                Ok(acc)
            },
        )
        .try_reduce(
            || RankCounts::new(m, d).expect("shape validated"),
            |mut a, b| {
                a.absorb(b)?;
                Ok(a)
            },
        )?;
    Ok(counts.to_grid())
}

/// `m^d Σ_r (P(r) - Q(r))²`.
pub fn l2_pmf_distance(p: &RankGrid, q: &RankGrid) -> Result<f64> {
    p.check_same_shape(q)?;
    let cells = p.shape().cells() as f64;
    let sum = match (p.dense_weights(), q.dense_weights()) {
        (Some(a), Some(b)) => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>(),
        _ => {
            let pp: f64 = p.nonzero().map(|(_, v)| v * v).sum();
            let qq: f64 = q.nonzero().map(|(_, v)| v * v).sum();
            let pq: f64 = p.nonzero().map(|(i, v)| v * q.weight_at(i)).sum();
            (pp + qq - 2.0 * pq).max(0.0)
        }
    };
    Ok(cells * sum)
}

/// `max |m^d P(r) - c(r/(m+1))|` over the cells whose location `r/(m+1)` lies
/// in `[margin, 1 - margin]^d`. Locations `r/(m+1)` are the expected uniform
/// order statistics; the margin keeps the maximum away from corners where
/// smooth copulas may be unbounded.
pub fn copula_deviation(
    grid: &RankGrid,
    density: impl Fn(&[f64]) -> f64,
    margin: f64,
) -> f64 {
    let shape = grid.shape();
    let scale = shape.cells() as f64;
    let mf = shape.m() as f64;
    let mut worst: f64 = 0.0;
    for idx in 0..shape.cells() {
        let r = shape.decode(idx);
        let x: Vec<f64> = r.iter().map(|&c| c as f64 / (mf + 1.0)).collect();
        if x.iter().any(|&v| v < margin || v > 1.0 - margin) {
            continue;
        }
        worst = worst.max((scale * grid.weight_at(idx) - density(&x)).abs());
    }
    worst
}

/// `-m^{-2d}`, the value of `D₃₃ - 2D₁₃ - 2D₂₃`.
pub fn constant_collapse(m: usize, d: usize) -> ExactRational {
    -pow(&integer(m as i64), 2 * d).recip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational;
    use crate::quadrature::Quadrature;

    #[test]
    fn independence_and_comonotone_grids() {
        let g = independence_pmf(8, 2).unwrap();
        assert!(g.nonzero().all(|(_, w)| w == 1.0 / 64.0));
        let g = independence_pmf(3, 1).unwrap();
        assert_eq!(g.weight(&[2]).unwrap(), 1.0 / 3.0);
        let g = independence_pmf(15, 5).unwrap();
        assert!((g.total_weight() - 1.0).abs() < 1e-9);

        let c = comonotone_pmf(3).unwrap();
        for r1 in 1..=3 {
            for r2 in 1..=3 {
                let w = c.weight(&[r1, r2]).unwrap();
                assert_eq!(w, if r1 == r2 { 1.0 / 3.0 } else { 0.0 });
            }
        }
        assert!((c.total_weight() - 1.0).abs() < 1e-15);
        assert!(independence_pmf(1, 2).is_err());
    }

    #[test]
    fn kernel_mean_special_values() {
        for r in 1..=5 {
            for x in [0.0, 0.13, 0.5, 0.99, 1.0] {
                let h = conditional_kernel_mean(&[r], &[x], 5).unwrap();
                assert!((h - 0.2).abs() < 1e-15);
            }
        }
        let h = conditional_kernel_mean(&[1, 1], &[0.0, 0.0], 2).unwrap();
        assert_eq!(h, 0.5);
        assert!(conditional_kernel_mean(&[1, 1], &[0.0, 1.2], 2).is_err());
        assert!(conditional_kernel_mean(&[1, 4], &[0.0, 0.2], 3).is_err());
    }

    #[test]
    fn kernel_mean_integrates_to_cell_probability() {
        let q = Quadrature::with_tol(1e-12);
        let v = q.integrate_unit_cube(|x| kernel_mean_unchecked(&[2, 1], x, 3), 2);
        assert!((v - 1.0 / 9.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn covariance_terms_simple_values() {
        let t = covariance_terms(&[1], &[1], 2).unwrap();
        assert_eq!(t.d11, rational(1, 12));
        for m in 2..=6 {
            for d in 1..=3 {
                let r: Vec<usize> = (0..d).map(|l| 1 + l % m).collect();
                let s: Vec<usize> = (0..d).map(|l| m - l % m).collect();
                let t = covariance_terms(&r, &s, m).unwrap();
                let m2d = pow(&integer(m as i64), 2 * d).recip();
                assert_eq!(t.d33, m2d);
                let two = integer(2);
                assert_eq!(&t.d33 - &two * &t.d13 - &two * &t.d23, constant_collapse(m, d));
            }
        }
    }

    #[test]
    fn sigma_vanishes_in_one_dimension() {
        for m in 2..=7 {
            for r in 1..=m {
                for s in 1..=m {
                    assert!(sigma_cov(&[r], &[s], m).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn sigma_rows_sum_to_zero() {
        let m = 3;
        let shape = GridShape::new(m, 2).unwrap();
        for i in 0..shape.cells() {
            let r = shape.decode(i);
            let row: ExactRational =
                (0..shape.cells()).map(|j| sigma_cov(&r, &shape.decode(j), m).unwrap()).sum();
            assert!(row.is_zero(), "row {r:?}");
        }
    }

    #[test]
    fn sigma_matches_quadrature_of_kernel_variance() {
        let q = Quadrature::with_tol(1e-13);
        let r = [1usize, 1];
        let mean = 0.25;
        let var = q.integrate_unit_cube(
            |x| {
                let h = kernel_mean_unchecked(&r, x, 2) - mean;
                h * h
            },
            2,
        );
        let exact = exact::to_f64(&sigma_cov(&r, &r, 2).unwrap());
        assert!(exact > 0.0);
        assert!((var - exact).abs() < 1e-8, "{var} vs {exact}");
    }

    #[test]
    fn moments_at_small_sizes() {
        let a = aggregate_moments(2, 2).unwrap();
        assert_eq!(a.mean_limit, rational(4, 9));
        assert_eq!(a.var_limit, rational(32, 81));
        for variant in [VarianceVariant::PrintedForm, VarianceVariant::SignCorrected] {
            assert_eq!(closed_form_moments(2, 2, variant).unwrap().mean_limit, rational(4, 9));
        }
        let c = closed_form_moments(2, 2, VarianceVariant::SignCorrected).unwrap();
        assert_eq!(c.var_limit, rational(32, 81));
    }

    #[test]
    fn one_dimensional_degeneracy() {
        for m in 2..=10 {
            let corrected = closed_form_moments(m, 1, VarianceVariant::SignCorrected).unwrap();
            assert!(corrected.mean_limit.is_zero() && corrected.var_limit.is_zero());
            let printed = closed_form_moments(m, 1, VarianceVariant::PrintedForm).unwrap();
            let s2 = s_constants(m).unwrap().s2;
            assert_eq!(printed.var_limit, integer(16) * s2);
            let agg = aggregate_moments(m, 1).unwrap();
            assert!(agg.mean_limit.is_zero() && agg.var_limit.is_zero());
        }
    }

    #[test]
    fn aggregation_matches_corrected_closed_form() {
        for m in 2..=6 {
            for d in 1..=4 {
                let a = aggregate_moments(m, d).unwrap();
                let c = closed_form_moments(m, d, VarianceVariant::SignCorrected).unwrap();
                assert_eq!(a.mean_limit, c.mean_limit, "mean m={m} d={d}");
                assert_eq!(a.var_limit, c.var_limit, "var m={m} d={d}");
            }
        }
    }

    #[test]
    fn approximation_values() {
        assert!((approx_null_variance(10, 5) - 199.84).abs() < 0.01);
        let m = 7;
        let q = (std::f64::consts::PI * m as f64 / 8.0).sqrt();
        for d in 1..6 {
            let step = approx_null_variance(m, d + 1)
                - approx_null_variance(m, d)
                - 7.0 * std::f64::consts::FRAC_PI_2.sqrt() * (m as f64).sqrt();
            let expected = 2.0 * q.powi(d as i32) * (q - 1.0);
            assert!((step - expected).abs() < 1e-9 * expected.abs().max(1.0));
            assert!(step > 0.0);
        }
        // the linear part comes from the printed variance form; the corrected
        // form has no such term and approaches only the geometric part
        for d in 1..=6 {
            let printed =
                closed_form_moments(20, d, VarianceVariant::PrintedForm).unwrap().var_f64();
            let ratio = approx_null_variance(20, d) / printed;
            assert!((0.8..=1.2).contains(&ratio), "d={d} ratio {ratio}");
        }
        let corrected =
            closed_form_moments(50, 6, VarianceVariant::SignCorrected).unwrap().var_f64();
        let geometric = approx_null_variance(50, 6) - linear_variance_part(50, 6);
        assert!((corrected / geometric - 1.0).abs() < 0.1);
    }

    #[test]
    fn border_table_values() {
        let printed: Vec<usize> = [10, 15, 20]
            .iter()
            .map(|&m| border_dimension(m, VarianceVariant::PrintedForm).unwrap())
            .collect();
        assert_eq!(printed, vec![5, 4, 4]);
        let corrected: Vec<usize> = [10, 15, 20]
            .iter()
            .map(|&m| border_dimension(m, VarianceVariant::SignCorrected).unwrap())
            .collect();
        assert_eq!(corrected, vec![7, 5, 5]);
    }

    #[test]
    fn l2_distance_closed_forms() {
        for m in [2usize, 5, 8] {
            let u = independence_pmf(m, 2).unwrap();
            let c = comonotone_pmf(m).unwrap();
            assert_eq!(l2_pmf_distance(&u, &u).unwrap(), 0.0);
            let v = l2_pmf_distance(&c, &u).unwrap();
            assert!((v - (m as f64 - 1.0)).abs() < 1e-12);
            let sparse = l2_pmf_distance(&c.to_sparse(), &u).unwrap();
            assert!((sparse - v).abs() < 1e-12);
        }
        assert!(l2_pmf_distance(&independence_pmf(2, 2).unwrap(), &independence_pmf(3, 2).unwrap())
            .is_err());
    }

    #[test]
    fn mc_pmf_of_comonotone_generator_is_exact() {
        let g = mc_rank_pmf(GeneratorKind::Comonotone, 4, 2, 50, 1).unwrap();
        let c = comonotone_pmf(4).unwrap();
        for i in 0..16 {
            assert_eq!(g.weight_at(i), c.weight_at(i));
        }
    }
}
