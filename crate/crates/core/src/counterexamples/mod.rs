//! Systems without shear and their exact no-decay certificates.

pub mod padic;
mod sphere;

pub use padic::{padic_orbit_values, PAdicCharacterObservable, PAdicInteger, PAdicOrbit, DEFAULT_DIGITS};
pub use sphere::{sphere_no_decay_certificate, SphereCertificate};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, ShearError};
use crate::flows::{sample_invariant, FiberExtra, FlowSpec, PAdicFlow};

/// Covariance series of a character observable under a p-adic translation.
#[derive(Clone, Debug, PartialEq)]
pub struct PAdicCovariance {
    /// `cov_n`, `n = 0..=n_max`.
    pub values: Vec<Complex64>,
    /// `counts[n][r]`: samples whose observed digit moved by `r` (mod p) after `n` steps.
    pub counts: Vec<Vec<u64>>,
    /// `E(conj E(f|I) E(f|I))`: the share of atoms whose shift leaves the digit fixed.
    pub invariant_term: f64,
    /// Least period of the count sequence.
    pub period: usize,
}

impl PAdicCovariance {
    /// `max |cov_n|` over the last full period, which equals the limsup for
    /// an exactly periodic series.
    pub fn tail_max(&self) -> f64 {
        let start = self.values.len().saturating_sub(self.period);
        self.values[start..].iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn padic_flow(flow: &FlowSpec) -> Result<&PAdicFlow> {
    match flow {
        FlowSpec::PAdicTranslation(f) => Ok(f),
        other => Err(ShearError::InvalidParameter(format!("{} is not a p-adic translation", other.id()))),
    }
}

/// Covariance `E(conj f . f o T^n) - E(|E(f|I)|^2)` of a character at level
/// `N`, for `n = 0..=n_max`.
///
/// Each sample contributes `chi(d_n - d_0)` where `d_n` is digit `N` of
/// `T^n y`; the series is assembled from exact integer counts of these digit
/// differences, so exactly periodic digit dynamics give exactly periodic
/// values. `E(f|I)` equals `f` on atoms whose shift has valuation above `N`
/// (the digit never moves) and vanishes elsewhere.
pub fn padic_covariance_series(
    flow: &FlowSpec,
    obs: &PAdicCharacterObservable,
    n_max: usize,
    samples: usize,
    seed: u64,
) -> Result<PAdicCovariance> {
    let f = padic_flow(flow)?;
    if obs.p() != f.p {
        return Err(ShearError::PAdicMismatch(format!("observable p = {} vs flow p = {}", obs.p(), f.p)));
    }
    let level = obs.level();
    if level >= f.digits {
        return Err(ShearError::InvalidParameter(format!("level {level} needs more than {} digits", f.digits)));
    }
    let points = sample_invariant(flow, samples, seed)?;
    let p = f.p as usize;
    let per_sample: Vec<Vec<u32>> = points
        .par_iter()
        .map(|pt| {
            let FiberExtra::PAdic(y0) = &pt.extra else { unreachable!("p-adic samples") };
            let shift = &f.shifts[pt.base.coords()[0] as usize];
            let start = y0.digit(level);
            let mut y = y0.clone();
            let mut moves = Vec::with_capacity(n_max + 1);
            for _ in 0..=n_max {
                moves.push((y.digit(level) + f.p - start) % f.p);
                y = y.add(shift).expect("shared (p, K)");
            }
            moves
        })
        .collect();
    let mut counts = vec![vec![0u64; p]; n_max + 1];
    for moves in &per_sample {
        for (n, r) in moves.iter().enumerate() {
            counts[n][*r as usize] += 1;
        }
    }
    let fixed = f.shifts.iter().filter(|s| s.valuation().is_none_or(|v| v > level)).count();
    let invariant_term = fixed as f64 / f.shifts.len() as f64;
    let total = samples as f64;
    let values = counts
        .iter()
        .map(|row| {
            let first: Complex64 = row.iter().enumerate().map(|(r, c)| obs.chi(r as u64) * *c as f64).sum();
            first / total - invariant_term
        })
        .collect();
    let period = padic::least_period(&counts);
    Ok(PAdicCovariance { values, counts, invariant_term, period })
}

/// Digit histograms of `y + n v(x)` over invariant samples: `out[j][d]`
/// counts samples whose digit `j` equals `d`.
pub fn padic_digit_histograms(flow: &FlowSpec, n: i64, samples: usize, seed: u64) -> Result<Vec<Vec<u64>>> {
    let f = padic_flow(flow)?;
    let points = sample_invariant(flow, samples, seed)?;
    let mut hist = vec![vec![0u64; f.p as usize]; f.digits];
    for pt in &points {
        let moved = flow.evolve(pt, n as f64)?;
        let FiberExtra::PAdic(y) = &moved.extra else { unreachable!("p-adic samples") };
        for (j, d) in y.digits().iter().enumerate() {
            hist[j][*d as usize] += 1;
        }
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{chi_square_critical_1pct, chi_square_uniform};

    #[test]
    fn character_covariance_is_periodic() {
        let p = 5;
        let v = PAdicInteger::new(p, vec![0, 2, 0, 1, 0, 0]).unwrap();
        let flow = FlowSpec::padic(p, 6, vec![v]).unwrap();
        let obs = PAdicCharacterObservable::new(p, 1, 1).unwrap();
        let cov = padic_covariance_series(&flow, &obs, 25, 2000, 3).unwrap();
        assert_eq!(cov.period, 5);
        assert_eq!(cov.invariant_term, 0.0);
        assert!((cov.values[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for n in 0..=20 {
            assert_eq!(cov.values[n], cov.values[n + 5]);
        }
        assert_eq!(cov.tail_max(), cov.values[0].norm());
    }

    #[test]
    fn zero_shift_has_trivial_covariance() {
        let p = 3;
        let flow = FlowSpec::padic(p, 4, vec![PAdicInteger::zero(p, 4).unwrap()]).unwrap();
        let obs = PAdicCharacterObservable::new(p, 0, 1).unwrap();
        let cov = padic_covariance_series(&flow, &obs, 6, 500, 1).unwrap();
        assert!(cov.values.iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn translation_preserves_uniform_digits() {
        let p = 7;
        let v = PAdicInteger::from_u128(p, 5, 12_345).unwrap();
        let flow = FlowSpec::padic(p, 5, vec![v]).unwrap();
        let hist = padic_digit_histograms(&flow, 3, 20_000, 9).unwrap();
        for row in hist {
            assert!(chi_square_uniform(&row) < chi_square_critical_1pct(p as usize - 1));
        }
    }
}
