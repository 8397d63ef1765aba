//! Truncated p-adic integers and translations on Z_p.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Result, ShearError};

/// Default number of base-p digits kept.
pub const DEFAULT_DIGITS: usize = 16;

pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// An element of Z_p truncated to its first `K` digits: digit `j` is the
/// coefficient of `p^j`. Arithmetic is exact modulo `p^K`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PAdicInteger {
    p: u32,
    digits: Vec<u32>,
}

impl PAdicInteger {
    pub fn new(p: u32, digits: Vec<u32>) -> Result<Self> {
        if p < 2 {
            return Err(ShearError::InvalidParameter(format!("p = {p} must be at least 2")));
        }
        if digits.is_empty() {
            return Err(ShearError::InvalidParameter("a p-adic integer needs K >= 1 digits".into()));
        }
        if let Some(d) = digits.iter().find(|&&d| d >= p) {
            return Err(ShearError::InvalidParameter(format!("digit {d} out of range for p = {p}")));
        }
        Ok(PAdicInteger { p, digits })
    }

    pub fn zero(p: u32, k: usize) -> Result<Self> {
        Self::new(p, vec![0; k])
    }

    /// Base-p expansion of `value`, truncated to `k` digits.
    pub fn from_u128(p: u32, k: usize, mut value: u128) -> Result<Self> {
        let mut digits = Vec::with_capacity(k);
        for _ in 0..k {
            digits.push((value % p as u128) as u32);
            value /= p as u128;
        }
        Self::new(p, digits)
    }

    /// Uniform element of `Z / p^K Z`, the image of Haar measure.
    pub fn random(p: u32, k: usize, rng: &mut impl Rng) -> Self {
        PAdicInteger { p, digits: (0..k).map(|_| rng.gen_range(0..p)).collect() }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn precision(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn digit(&self, j: usize) -> u32 {
        self.digits[j]
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    /// Index of the first non-zero digit (`None` for zero).
    pub fn valuation(&self) -> Option<usize> {
        self.digits.iter().position(|&d| d != 0)
    }

    /// Value modulo `p^K` when it fits in 128 bits.
    pub fn to_u128(&self) -> Option<u128> {
        self.digits.iter().rev().try_fold(0u128, |acc, &d| acc.checked_mul(self.p as u128)?.checked_add(d as u128))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.digits.len() != other.digits.len() {
            return Err(ShearError::PAdicMismatch(format!(
                "(p = {}, K = {}) vs (p = {}, K = {})",
                self.p,
                self.digits.len(),
                other.p,
                other.digits.len()
            )));
        }
        Ok(())
    }

    /// Digitwise addition with carries; the carry out of the last digit is
    /// dropped.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut carry = 0u32;
        let digits = self
            .digits
            .iter()
            .zip(&other.digits)
            .map(|(a, b)| {
                let s = a + b + carry;
                carry = (s >= self.p) as u32;
                s - carry * self.p
            })
            .collect();
        Ok(PAdicInteger { p: self.p, digits })
    }

    /// Additive inverse modulo `p^K`.
    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        // (p - 1 - d) on every digit, plus one
        let complement = PAdicInteger { p: self.p, digits: self.digits.iter().map(|d| self.p - 1 - d).collect() };
        let mut one = vec![0; self.digits.len()];
        one[0] = 1;
        complement.add(&PAdicInteger { p: self.p, digits: one }).expect("same shape")
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// `n * self` for any integer `n` (double-and-add).
    pub fn mul_int(&self, n: i64) -> Self {
        let mut acc = PAdicInteger { p: self.p, digits: vec![0; self.digits.len()] };
        let mut base = self.clone();
        let mut m = n.unsigned_abs();
        while m > 0 {
            if m & 1 == 1 {
                acc = acc.add(&base).expect("same shape");
            }
            base = base.add(&base).expect("same shape");
            m >>= 1;
        }
        if n < 0 {
            acc.neg()
        } else {
            acc
        }
    }
}

/// Primitive character `m -> exp(2 pi i j m / p)` of Z/pZ read off digit
/// `level` of a p-adic integer.
#[derive(Clone, Debug, PartialEq)]
pub struct PAdicCharacterObservable {
    p: u32,
    level: usize,
    character: u32,
    table: Vec<Complex64>,
}

impl PAdicCharacterObservable {
    pub fn new(p: u32, level: usize, character: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(ShearError::InvalidParameter(format!("p = {p} is not prime")));
        }
        if character == 0 || character >= p {
            return Err(ShearError::InvalidParameter(format!("character index {character} must lie in 1..{p}")));
        }
        let table = (0..p).map(|m| Complex64::from_polar(1.0, TAU * m as f64 / p as f64)).collect();
        Ok(PAdicCharacterObservable { p, level, character, table })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// `chi(m)` for a residue `m`.
    pub fn chi(&self, m: u64) -> Complex64 {
        self.table[((self.character as u64 * (m % self.p as u64)) % self.p as u64) as usize]
    }

    pub fn eval(&self, y: &PAdicInteger) -> Result<Complex64> {
        if y.p() != self.p {
            return Err(ShearError::PAdicMismatch(format!("p = {} vs observable p = {}", y.p(), self.p)));
        }
        if self.level >= y.precision() {
            return Err(ShearError::InvalidParameter(format!(
                "level {} needs more than {} digits",
                self.level,
                y.precision()
            )));
        }
        Ok(self.chi(y.digit(self.level) as u64))
    }
}

/// Orbit of a character observable under `y -> y + v`.
#[derive(Clone, Debug, PartialEq)]
pub struct PAdicOrbit {
    /// Digit `N` of `T^n y0`, `n = 0..=n_max`.
    pub digits: Vec<u32>,
    /// `f(T^n y0)`.
    pub values: Vec<Complex64>,
    /// The digit sequence equals `y0_N + n k mod p` for every `n`.
    pub matches_closed_form: bool,
    /// Least period of the value sequence.
    pub period: usize,
}

/// `f(T^n y0)` for `n = 0..=n_max`, computed by repeated addition of `v`.
///
/// `v` must have zero digits below `obs.level()` and a non-zero digit `k`
/// at that level; then no carry ever reaches digit `N` and the sequence is
/// `chi(y0_N) chi(k)^n`, exactly p-periodic.
pub fn padic_orbit_values(
    v: &PAdicInteger,
    obs: &PAdicCharacterObservable,
    y0: &PAdicInteger,
    n_max: usize,
) -> Result<PAdicOrbit> {
    v.check_compatible(y0)?;
    let level = obs.level();
    if v.p() != obs.p() {
        return Err(ShearError::PAdicMismatch("shift and observable use different p".into()));
    }
    if level >= v.precision() {
        return Err(ShearError::InvalidParameter(format!("level {level} beyond precision")));
    }
    if v.digits()[..level].iter().any(|&d| d != 0) || v.digit(level) == 0 {
        return Err(ShearError::Precondition(format!(
            "shift must vanish below digit {level} and be non-zero at it (digits {:?})",
            v.digits()
        )));
    }
    let p = obs.p() as u64;
    let k = v.digit(level) as u64;
    let start = y0.digit(level) as u64;
    let mut y = y0.clone();
    let mut digits = Vec::with_capacity(n_max + 1);
    let mut values = Vec::with_capacity(n_max + 1);
    let mut matches = true;
    for n in 0..=n_max {
        let d = y.digit(level);
        matches &= d as u64 == (start + n as u64 * k) % p;
        digits.push(d);
        values.push(obs.eval(&y)?);
        y = y.add(v)?;
    }
    let period = least_period(&digits);
    Ok(PAdicOrbit { digits, values, matches_closed_form: matches, period })
}

pub(crate) fn least_period<T: PartialEq>(seq: &[T]) -> usize {
    (1..=seq.len()).find(|&q| seq.iter().zip(&seq[q.min(seq.len())..]).all(|(a, b)| a == b)).unwrap_or(seq.len())
}
