//! Exact big-integer and rational evaluation of binomial expressions,
//! Bernstein-polynomial integrals and the summation identities behind the
//! null moments.
//!
//! Nothing in the core path touches floating point; conversions to `f64`
//! happen only through [`to_f64`], which rounds to the nearest
//! representable value and is therefore lossy.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Reduced fraction with arbitrary-precision numerator and positive denominator.
pub type ExactRational = BigRational;

/// `C(n, k)`, zero when `k < 0` or `k > n`.
pub fn binomial(n: u64, k: i64) -> BigInt {
    if k < 0 || k as u64 > n {
        return BigInt::zero();
    }
    BigInt::from(num_integer::binomial(BigUint::from(n), BigUint::from(k as u64)))
}

pub fn rational(num: i64, den: i64) -> ExactRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn integer(n: impl Into<BigInt>) -> ExactRational {
    BigRational::from_integer(n.into())
}

/// Nearest `f64` to an exact rational.
pub fn to_f64(q: &ExactRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn pow(q: &ExactRational, e: usize) -> ExactRational {
    num_traits::pow(q.clone(), e)
}

/// Index of the Bernstein basis polynomial `b_{m,r}(x) = C(m,r) x^r (1-x)^{m-r}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct BernsteinIndex {
    degree: usize,
    index: usize,
}

impl BernsteinIndex {
    pub fn new(degree: usize, index: usize) -> Result<Self> {
        if degree == 0 || index > degree {
            return Err(Error::Domain(format!(
                "Bernstein index {index} of degree {degree} (need degree >= 1, index <= degree)"
            )));
        }
        Ok(Self { degree, index })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Value at `x`, assumed to be already validated.
    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        bernstein_unchecked(self.degree, self.index, x)
    }
}

pub(crate) fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0f64;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// `b_{degree,index}(x)` without domain checks. Degree zero is the constant 1.
pub(crate) fn bernstein_unchecked(degree: usize, index: usize, x: f64) -> f64 {
    if index > degree {
        return 0.0;
    }
    binomial_f64(degree, index) * x.powi(index as i32) * (1.0 - x).powi((degree - index) as i32)
}

pub fn bernstein_value(idx: BernsteinIndex, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("Bernstein argument {x} outside [0, 1]")));
    }
    Ok(idx.eval_unchecked(x))
}

fn check_concordance_args(m: usize, r: usize, s: usize) -> Result<()> {
    if m == 0 || r > m || s > m {
        return Err(Error::Domain(format!(
            "concordance integral A({m}, {r}, {s}) needs m >= 1 and 0 <= r, s <= m"
        )));
    }
    Ok(())
}

/// `A(m, r, s) = C(m,r) C(m,s) / C(2m, r+s)`, so that
/// `∫₀¹ b_{m,r} b_{m,s} dx = A(m, r, s) / (2m + 1)`.
pub fn concordance_integral(m: usize, r: usize, s: usize) -> Result<ExactRational> {
    check_concordance_args(m, r, s)?;
    let (m, r, s) = (m as u64, r as i64, s as i64);
    let num = binomial(m, r) * binomial(m, s);
    Ok(BigRational::new(num, binomial(2 * m, r + s)))
}

/// Lattice-path form of the same quantity:
/// `C(r+s, r) C(2m-r-s, m-r) / C(2m, m)`.
pub fn concordance_integral_paths(m: usize, r: usize, s: usize) -> Result<ExactRational> {
    check_concordance_args(m, r, s)?;
    let num = path_count(m, r, s);
    Ok(BigRational::new(num, binomial(2 * m as u64, m as i64)))
}

fn path_count(m: usize, r: usize, s: usize) -> BigInt {
    binomial((r + s) as u64, r as i64) * binomial((2 * m - r - s) as u64, (m - r) as i64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// `Σ_r C(r+s,r) C(2m-r-s,m-r) = C(2m+1, m)` for a fixed column `s`.
    RowSum,
    /// `Σ_r C(2r,r) C(2m-2r,m-r) = 4^m`.
    Diagonal,
    /// `Σ_{r,s} (C(r+s,r) C(2m-r-s,m-r))² = C(4m+1, 2m)`.
    Squares,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub identity: Identity,
    /// Column index for [`Identity::RowSum`], `None` otherwise.
    pub s: Option<usize>,
    #[serde(serialize_with = "ser_bigint")]
    pub lhs: BigInt,
    #[serde(serialize_with = "ser_bigint")]
    pub rhs: BigInt,
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub m: usize,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(IdentityCheck::holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.holds())
    }
}

fn ser_bigint<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn ser_rational<S: serde::Serializer>(
    v: &ExactRational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Checks the three lattice-path identities by exact summation. A failing
/// identity is reported, never raised.
pub fn identity_suite(m: usize) -> IdentityReport {
    let mu = m as u64;
    let mut checks = Vec::with_capacity(m + 3);

    let row_rhs = binomial(2 * mu + 1, m as i64);
    for s in 0..=m {
        let lhs: BigInt = (0..=m).map(|r| path_count(m, r, s)).sum();
        checks.push(IdentityCheck {
            identity: Identity::RowSum,
            s: Some(s),
            lhs,
            rhs: row_rhs.clone(),
        });
    }

    let diag: BigInt = (0..=m)
        .map(|r| binomial(2 * r as u64, r as i64) * binomial(2 * (mu - r as u64), (m - r) as i64))
        .sum();
    checks.push(IdentityCheck {
        identity: Identity::Diagonal,
        s: None,
        lhs: diag,
        rhs: BigInt::from(4u8).pow(m as u32),
    });

    let mut squares = BigInt::zero();
    for r in 0..=m {
        for s in 0..=m {
            let p = path_count(m, r, s);
            squares += &p * &p;
        }
    }
    checks.push(IdentityCheck {
        identity: Identity::Squares,
        s: None,
        lhs: squares,
        rhs: binomial(4 * mu + 1, 2 * m as i64),
    });

    IdentityReport { m, checks }
}

/// The constants of the limiting null moments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SConstants {
    pub m: usize,
    #[serde(serialize_with = "ser_rational")]
    pub s1: ExactRational,
    #[serde(serialize_with = "ser_rational")]
    pub s2: ExactRational,
    #[serde(serialize_with = "ser_rational")]
    pub r1: ExactRational,
    #[serde(serialize_with = "ser_rational")]
    pub r2: ExactRational,
}

/// `S₁ = m 4^{m-1} / ((2m-1) C(2m-2,m-1))`,
/// `S₂ = m² C(4m-3,2m-2) / ((2m-1) C(2m-2,m-1))²`, and the per-coordinate
/// versions `R₁ = S₁/m`, `R₂ = S₂/m²`, each evaluated from its own formula.
pub fn s_constants(m: usize) -> Result<SConstants> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("S constants need m >= 2, got {m}")));
    }
    let mu = m as u64;
    let central = binomial(2 * mu - 2, m as i64 - 1);
    let base = BigInt::from(2 * mu - 1) * &central;
    let four = BigInt::from(4u8).pow((m - 1) as u32);
    let wide = binomial(4 * mu - 3, 2 * m as i64 - 2);
    let mb = BigInt::from(mu);

    let s1 = BigRational::new(&mb * &four, base.clone());
    let s2 = BigRational::new(&mb * &mb * &wide, &base * &base);
    let r1 = BigRational::new(four, base.clone());
    let r2 = BigRational::new(wide, &base * &base);
    Ok(SConstants { m, s1, s2, r1, r2 })
}

#[derive(Debug, Clone, Serialize)]
pub struct StirlingEntry {
    pub m: usize,
    pub c_m: f64,
    pub within: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StirlingReport {
    pub entries: Vec<StirlingEntry>,
}

impl StirlingReport {
    pub fn all_within(&self) -> bool {
        self.entries.iter().all(|e| e.within)
    }
}

/// Correction `c_m` in `C(2m,m) = 4^m / √(πm) · (1 - c_m/m)`, checked against
/// the bracket `1/9 < c_m < 1/8`. The ratio `C(2m,m)/4^m` is formed exactly.
pub fn stirling_correction(m: usize) -> f64 {
    let ratio = BigRational::new(
        binomial(2 * m as u64, m as i64),
        BigInt::from(4u8).pow(m as u32),
    );
    let x = to_f64(&ratio) * (std::f64::consts::PI * m as f64).sqrt();
    m as f64 * (1.0 - x)
}

/// `c_m` for `m = 1..=m_max`, and whether each lies in `(1/9, 1/8)`. The
/// ratio `C(2m,m)/4^m` is carried by its recurrence `· (2m-1)/(2m)`, whose
/// rounding error stays far below the width of the bracket.
pub fn stirling_bound_check(m_max: usize) -> StirlingReport {
    let mut ratio = 1.0;
    let entries = (1..=m_max)
        .map(|m| {
            let mf = m as f64;
            ratio *= (2.0 * mf - 1.0) / (2.0 * mf);
            let c_m = mf * (1.0 - ratio * (std::f64::consts::PI * mf).sqrt());
            StirlingEntry { m, c_m, within: c_m > 1.0 / 9.0 && c_m < 1.0 / 8.0 }
        })
        .collect();
    StirlingReport { entries }
}
