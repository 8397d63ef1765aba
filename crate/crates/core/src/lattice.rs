//! Integer points in and near spheres of large radius.
//!
//! Centers with a common denominator `D <= 2^40` (every rational center
//! given explicitly, and every floating-point center whose binary expansion
//! is short enough) are counted with exact integer arithmetic: with
//! `x = a / D`, a point `m` is in the shell iff the integer
//! `Q(m) = sum (D m_i - a_i)^2` lies in `[ceil(D^2 (r - eps)^2), floor(D^2 (r + eps)^2)]`.
//! Other centers use floating comparisons with a guard band and report the
//! points inside the band separately.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{float::FloatCore, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Result, ShearError};

/// Largest radius counted in dimension 2.
pub const MAX_RADIUS_2D: f64 = 1.0e5;
/// Largest radius counted in dimension 3.
pub const MAX_RADIUS_3D: f64 = 2.0e3;
/// Largest common denominator handled exactly.
pub const MAX_EXACT_DENOMINATOR: u64 = 1 << 40;
/// Relative guard band of the floating-point path.
pub const GUARD_BAND: f64 = 1e-12;

/// Center of the sphere.
#[derive(Clone, Debug, PartialEq)]
pub enum Center {
    /// Floating-point coordinates.
    Float(Vec<f64>),
    /// `numerators[i] / denominator`.
    Rational { numerators: Vec<i64>, denominator: u64 },
}

impl Center {
    pub fn dim(&self) -> usize {
        match self {
            Center::Float(x) => x.len(),
            Center::Rational { numerators, .. } => numerators.len(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Center::Float(x) => x.clone(),
            Center::Rational { numerators, denominator } => {
                numerators.iter().map(|a| *a as f64 / *denominator as f64).collect()
            }
        }
    }

    /// `(a, D)` with `x = a / D`, when `D <= 2^40`.
    fn scaled(&self) -> Option<(Vec<i128>, i128)> {
        match self {
            Center::Rational { numerators, denominator } => {
                if *denominator == 0 || *denominator > MAX_EXACT_DENOMINATOR {
                    return None;
                }
                Some((numerators.iter().map(|a| *a as i128).collect(), *denominator as i128))
            }
            Center::Float(x) => {
                let parts: Vec<(BigInt, u32)> = x.iter().map(|v| dyadic(*v)).collect();
                let k = parts.iter().map(|p| p.1).max().unwrap_or(0);
                if k > 40 {
                    return None;
                }
                let a = parts.iter().map(|(num, kk)| (num << (k - kk)).to_i128()).collect::<Option<Vec<_>>>()?;
                Some((a, 1i128 << k))
            }
        }
    }
}

/// Exact `x = num / 2^k` with `k` minimal.
fn dyadic(x: f64) -> (BigInt, u32) {
    let (mut mant, mut exp, sign) = FloatCore::integer_decode(x);
    if mant == 0 {
        return (BigInt::zero(), 0);
    }
    while mant % 2 == 0 && exp < 0 {
        mant /= 2;
        exp += 1;
    }
    let mut num = BigInt::from(mant) * sign;
    if exp >= 0 {
        num <<= exp as u32;
        (num, 0)
    } else {
        (num, (-exp) as u32)
    }
}

/// `(floor or ceil)(D^2 (r + s eps)^2)` with exact dyadic arithmetic.
fn scaled_square(d: i128, r: f64, eps: f64, sign: i32, ceil: bool) -> i128 {
    let (rn, rk) = dyadic(r);
    let (en, ek) = dyadic(eps);
    let k = rk.max(ek);
    let num = (rn << (k - rk)) + sign * (en << (k - ek));
    let num = num.clone() * num * BigInt::from(d) * BigInt::from(d);
    let den = BigInt::from(1) << (2 * k);
    let q = if ceil { Integer::div_ceil(&num, &den) } else { Integer::div_floor(&num, &den) };
    q.to_i128().expect("bounded by the radius budget")
}

/// Integer points near the sphere `S(x, r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShellQuery {
    pub center: Center,
    pub radius: f64,
    pub epsilon: f64,
}

impl ShellQuery {
    pub fn new(center: Vec<f64>, radius: f64, epsilon: f64) -> Result<Self> {
        Self::with_center(Center::Float(center), radius, epsilon)
    }

    pub fn rational(numerators: Vec<i64>, denominator: u64, radius: f64, epsilon: f64) -> Result<Self> {
        if denominator == 0 {
            return Err(ShearError::InvalidParameter("denominator must be positive".into()));
        }
        Self::with_center(Center::Rational { numerators, denominator }, radius, epsilon)
    }

    pub fn with_center(center: Center, radius: f64, epsilon: f64) -> Result<Self> {
        check_center(&center)?;
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(ShearError::InvalidParameter(format!("epsilon = {epsilon} must lie in (0, 1/2)")));
        }
        if !(radius > epsilon) || !radius.is_finite() {
            return Err(ShearError::InvalidParameter(format!("radius {radius} must exceed epsilon {epsilon}")));
        }
        Ok(ShellQuery { center, radius, epsilon })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }
}

fn check_center(center: &Center) -> Result<()> {
    let n = center.dim();
    if !(2..=3).contains(&n) {
        return Err(ShearError::InvalidParameter(format!("lattice counts support n = 2, 3 (got {n})")));
    }
    if center.to_f64().iter().any(|c| !c.is_finite() || c.abs() > 1e6) {
        return Err(ShearError::InvalidParameter("center coordinates must be finite and at most 1e6".into()));
    }
    Ok(())
}

fn check_budget(n: usize, outer: f64) -> Result<()> {
    let limit = if n == 2 { MAX_RADIUS_2D } else { MAX_RADIUS_3D };
    if outer > limit {
        return Err(ShearError::BudgetExceeded(format!(
            "radius {outer} exceeds the enumeration budget {limit} in dimension {n}"
        )));
    }
    Ok(())
}

/// A count with its exactness status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShellCount {
    /// Points classified inside (excluding ambiguous ones).
    pub count: u64,
    /// Points within the guard band of a boundary (floating path only).
    pub ambiguous: u64,
    /// Exact integer arithmetic was used.
    pub exact: bool,
}

/// Number of integers `m` with `(D m - a)^2 <= s`.
fn count_le(s: i128, a: i128, d: i128) -> i128 {
    if s < 0 {
        return 0;
    }
    let root = (s as u128).sqrt() as i128;
    let lo = Integer::div_ceil(&(a - root), &d);
    let hi = Integer::div_floor(&(a + root), &d);
    (hi - lo + 1).max(0)
}

/// Points with `lo <= Q(m) <= hi`.
fn exact_count(a: &[i128], d: i128, lo: i128, hi: i128) -> u64 {
    if hi < lo.max(0) {
        return 0;
    }
    let band = |u: i128, a_last: i128| count_le(hi - u, a_last, d) - count_le(lo - 1 - u, a_last, d);
    let root = (hi as u128).sqrt() as i128;
    let first = (Integer::div_ceil(&(a[0] - root), &d) as i64)..=(Integer::div_floor(&(a[0] + root), &d) as i64);
    let total: i128 = first
        .into_par_iter()
        .map(|m1| {
            let u1 = (d * m1 as i128 - a[0]).pow(2);
            if a.len() == 2 {
                return band(u1, a[1]);
            }
            let r2 = ((hi - u1) as u128).sqrt() as i128;
            (Integer::div_ceil(&(a[1] - r2), &d)..=Integer::div_floor(&(a[1] + r2), &d))
                .map(|m2| band(u1 + (d * m2 - a[1]).pow(2), a[2]))
                .sum::<i128>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    total as u64
}

/// Floating classification of `|m - x| in [inner, outer]` with a guard band.
fn float_count(x: &[f64], inner: f64, outer: f64) -> (u64, u64) {
    let guard = GUARD_BAND * outer.max(1.0);
    let classify = |dist: f64| -> (u64, u64) {
        let margin = (dist - inner).min(outer - dist);
        if margin.abs() <= guard {
            (0, 1)
        } else if margin > 0.0 {
            (1, 0)
        } else {
            (0, 0)
        }
    };
    let last = |u: f64, xl: f64| -> (u64, u64) {
        let o2 = (outer + guard).powi(2) - u;
        if o2 < 0.0 {
            return (0, 0);
        }
        let b = o2.sqrt();
        let i2 = (inner - guard).max(0.0).powi(2) - u;
        let a = if i2 > 0.0 { i2.sqrt() } else { 0.0 };
        let hi_range = ((xl + a).floor() as i64 - 1)..=((xl + b).ceil() as i64 + 1);
        let lo_end = (((xl - a).ceil() as i64) + 1).min(*hi_range.start() - 1);
        let lo_range = ((xl - b).floor() as i64 - 1)..=lo_end;
        let mut acc = (0, 0);
        for m in lo_range.chain(hi_range) {
            let dist = (u + (m as f64 - xl).powi(2)).sqrt();
            let c = classify(dist);
            acc.0 += c.0;
            acc.1 += c.1;
        }
        acc
    };
    let reach = outer + guard + 1.0;
    let first = ((x[0] - reach).floor() as i64)..=((x[0] + reach).ceil() as i64);
    let parts: Vec<(u64, u64)> = first
        .into_par_iter()
        .map(|m1| {
            let u1 = (m1 as f64 - x[0]).powi(2);
            if x.len() == 2 {
                return last(u1, x[1]);
            }
            let mut acc = (0, 0);
            for m2 in ((x[1] - reach).floor() as i64)..=((x[1] + reach).ceil() as i64) {
                let c = last(u1 + (m2 as f64 - x[1]).powi(2), x[2]);
                acc.0 += c.0;
                acc.1 += c.1;
            }
            acc
        })
        .collect();
    parts.iter().fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

/// Integer points `m` with `| |m - x| - r | <= eps`.
pub fn count_shell(q: &ShellQuery) -> Result<ShellCount> {
    let n = q.dim();
    check_budget(n, q.radius + q.epsilon)?;
    Ok(match q.center.scaled() {
        Some((a, d)) => {
            let lo = scaled_square(d, q.radius, q.epsilon, -1, true);
            let hi = scaled_square(d, q.radius, q.epsilon, 1, false);
            ShellCount { count: exact_count(&a, d, lo, hi), ambiguous: 0, exact: true }
        }
        None => {
            let (count, ambiguous) = float_count(&q.center.to_f64(), q.radius - q.epsilon, q.radius + q.epsilon);
            ShellCount { count, ambiguous, exact: false }
        }
    })
}

/// Integer points `m` with `|m - x| <= r`.
pub fn count_ball(center: &Center, radius: f64) -> Result<ShellCount> {
    check_center(center)?;
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(ShearError::InvalidParameter(format!("radius {radius} must be non-negative")));
    }
    check_budget(center.dim(), radius)?;
    Ok(match center.scaled() {
        Some((a, d)) => {
            let hi = scaled_square(d, radius, 0.0, 1, false);
            ShellCount { count: exact_count(&a, d, 0, hi), ambiguous: 0, exact: true }
        }
        None => {
            let (count, ambiguous) = float_count(&center.to_f64(), f64::NEG_INFINITY, radius);
            ShellCount { count, ambiguous, exact: false }
        }
    })
}

/// Integer points at distance exactly `r` (exact centers only).
pub fn count_sphere(center: &Center, radius: f64) -> Result<u64> {
    check_center(center)?;
    check_budget(center.dim(), radius)?;
    let (a, d) = center
        .scaled()
        .ok_or_else(|| ShearError::Precondition("exact distances need a center with denominator <= 2^40".into()))?;
    let lo = scaled_square(d, radius, 0.0, 1, true);
    let hi = scaled_square(d, radius, 0.0, 1, false);
    Ok(exact_count(&a, d, lo, hi))
}

/// `(n-1)`-volume of the unit sphere in R^n.
pub fn unit_sphere_surface(n: usize) -> Result<f64> {
    match n {
        2 => Ok(2.0 * PI),
        3 => Ok(4.0 * PI),
        _ => Err(ShearError::InvalidParameter(format!("surface area implemented for n = 2, 3 (got {n})"))),
    }
}

/// Leading-order shell count `2 eps r^(n-1) |S^(n-1)|`.
pub fn shell_asymptotic(q: &ShellQuery) -> Result<f64> {
    let n = q.dim();
    Ok(2.0 * q.epsilon * q.radius.powi(n as i32 - 1) * unit_sphere_surface(n)?)
}

/// Volume `|B^n| r^n`, the leading-order ball count.
pub fn ball_asymptotic(n: usize, radius: f64) -> Result<f64> {
    Ok(unit_sphere_surface(n)? / n as f64 * radius.powi(n as i32))
}
