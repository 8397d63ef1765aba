//! Test functions on the phase space as finite fiber-Fourier sums.
//!
//! An observable is `f(x, y) = sum_xi a_xi(x) exp(2 pi i <xi, y>)`, a finite
//! map from integer frequencies to base profiles `a_xi`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{dim_err, Result, ShearError};
use crate::flows::{FiberExtra, PhasePoint};

/// An integer frequency `xi` in Z^d.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FrequencyVector(pub Vec<i64>);

impl FrequencyVector {
    pub fn zero(d: usize) -> Self {
        FrequencyVector(vec![0; d])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&c| c as f64).collect()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt()
    }
}

impl From<Vec<i64>> for FrequencyVector {
    fn from(v: Vec<i64>) -> Self {
        FrequencyVector(v)
    }
}

impl<const N: usize> From<[i64; N]> for FrequencyVector {
    fn from(v: [i64; N]) -> Self {
        FrequencyVector(v.to_vec())
    }
}

/// A bounded function on the base chart.
#[derive(Clone, Debug, PartialEq)]
pub enum BaseProfile {
    Constant(Complex64),
    /// `c * exp(i <k, x>)` in chart coordinates.
    Trig {
        coefficient: Complex64,
        wave: Vec<f64>,
    },
    /// `a * exp(-|x - c|^2 / (2 w^2))`.
    Gaussian {
        amplitude: Complex64,
        center: Vec<f64>,
        width: f64,
    },
    /// C^1 compactly supported hat `a * prod (1 - r_i^2)^2`, `r_i = |x_i - c_i| / h`.
    Hat {
        amplitude: Complex64,
        center: Vec<f64>,
        half_width: f64,
    },
    /// Multilinear interpolant of node values on a uniform grid.
    Grid {
        lower: Vec<f64>,
        upper: Vec<f64>,
        shape: Vec<usize>,
        values: Vec<Complex64>,
    },
    Sum(Vec<BaseProfile>),
    Product(Vec<BaseProfile>),
}

impl BaseProfile {
    pub fn constant(re: f64, im: f64) -> Self {
        BaseProfile::Constant(Complex64::new(re, im))
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        match self {
            BaseProfile::Constant(c) => *c,
            BaseProfile::Trig { coefficient, wave } => {
                let phase: f64 = wave.iter().zip(x).map(|(k, xi)| k * xi).sum();
                coefficient * Complex64::cis(phase)
            }
            BaseProfile::Gaussian { amplitude, center, width } => {
                let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                amplitude * (-r2 / (2.0 * width * width)).exp()
            }
            BaseProfile::Hat { amplitude, center, half_width } => {
                let mut out = 1.0;
                for (xi, ci) in x.iter().zip(center) {
                    let r = (xi - ci) / half_width;
                    if r.abs() >= 1.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let s = 1.0 - r * r;
                    out *= s * s;
                }
                amplitude * out
            }
            BaseProfile::Grid { lower, upper, shape, values } => grid_eval(lower, upper, shape, values, x),
            BaseProfile::Sum(parts) => parts.iter().map(|p| p.eval(x)).sum(),
            BaseProfile::Product(parts) => parts.iter().map(|p| p.eval(x)).product(),
        }
    }

    /// An upper bound of `|a(x)|` over the chart.
    pub fn sup_bound(&self) -> f64 {
        match self {
            BaseProfile::Constant(c) => c.norm(),
            BaseProfile::Trig { coefficient, .. } => coefficient.norm(),
            BaseProfile::Gaussian { amplitude, .. } | BaseProfile::Hat { amplitude, .. } => amplitude.norm(),
            BaseProfile::Grid { values, .. } => values.iter().map(|v| v.norm()).fold(0.0, f64::max),
            BaseProfile::Sum(parts) => parts.iter().map(BaseProfile::sup_bound).sum(),
            BaseProfile::Product(parts) => parts.iter().map(BaseProfile::sup_bound).product(),
        }
    }

    pub fn as_constant(&self) -> Option<Complex64> {
        match self {
            BaseProfile::Constant(c) => Some(*c),
            _ => None,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let check_len = |len: usize| {
            if len == n {
                Ok(())
            } else {
                Err(dim_err(format!("profile over {n} chart coordinates"), len))
            }
        };
        match self {
            BaseProfile::Constant(_) => Ok(()),
            BaseProfile::Trig { wave, .. } => check_len(wave.len()),
            BaseProfile::Gaussian { center, width, .. } => {
                check_len(center.len())?;
                if !(*width > 0.0) {
                    return Err(ShearError::InvalidParameter("gaussian width must be positive".into()));
                }
                Ok(())
            }
            BaseProfile::Hat { center, half_width, .. } => {
                check_len(center.len())?;
                if !(*half_width > 0.0) {
                    return Err(ShearError::InvalidParameter("hat half-width must be positive".into()));
                }
                Ok(())
            }
            BaseProfile::Grid { lower, upper, shape, values } => {
                check_len(shape.len())?;
                if lower.len() != n || upper.len() != n || shape.iter().any(|&s| s < 2) {
                    return Err(ShearError::InvalidParameter("grid profile needs >= 2 nodes per axis".into()));
                }
                if values.len() != shape.iter().product::<usize>() {
                    return Err(ShearError::InvalidParameter("grid profile value count mismatch".into()));
                }
                Ok(())
            }
            BaseProfile::Sum(parts) | BaseProfile::Product(parts) => parts.iter().try_for_each(|p| p.validate(n)),
        }
    }
}

fn grid_eval(lower: &[f64], upper: &[f64], shape: &[usize], values: &[Complex64], x: &[f64]) -> Complex64 {
    let n = shape.len();
    let mut base = vec![0usize; n];
    let mut frac = vec![0.0; n];
    for d in 0..n {
        let cells = (shape[d] - 1) as f64;
        let u = ((x[d] - lower[d]) / (upper[d] - lower[d]) * cells).clamp(0.0, cells);
        let i = (u.floor() as usize).min(shape[d] - 2);
        base[d] = i;
        frac[d] = u - i as f64;
    }
    let mut out = Complex64::new(0.0, 0.0);
    for corner in 0..(1usize << n) {
        let mut w = 1.0;
        let mut flat = 0;
        for d in 0..n {
            let bit = (corner >> d) & 1;
            w *= if bit == 1 { frac[d] } else { 1.0 - frac[d] };
            flat = flat * shape[d] + base[d] + bit;
        }
        out += values[flat] * w;
    }
    out
}

/// Separable coefficient laws `c_xi = g(xi_1) g(xi_2)` on Z^2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoefficientLaw {
    /// `g(k) = exp(-scale k^2)`.
    Gaussian { scale: f64 },
    /// `g(k) = exp(-rate |k|)`: analytic observables.
    Exponential { rate: f64 },
    /// `g(k) = (1 + k^2)^(-order)`: finite Sobolev regularity.
    Sobolev { order: f64 },
}

impl CoefficientLaw {
    pub fn factor(&self, k: i64) -> f64 {
        let k = k as f64;
        match *self {
            CoefficientLaw::Gaussian { scale } => (-scale * k * k).exp(),
            CoefficientLaw::Exponential { rate } => (-rate * k.abs()).exp(),
            CoefficientLaw::Sobolev { order } => (1.0 + k * k).powf(-order),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            CoefficientLaw::Gaussian { scale } => scale > 0.0,
            CoefficientLaw::Exponential { rate } => rate > 0.0,
            // square-summable in 1D
            CoefficientLaw::Sobolev { order } => order > 0.25,
        };
        if ok {
            Ok(())
        } else {
            Err(ShearError::InvalidParameter(format!("degenerate coefficient law {self:?}")))
        }
    }

    /// `sum_{k in Z} g(k)^2` restricted to `|k| <= cutoff` (or all of Z for
    /// `None`), summed until terms drop below 1e-300 of the running total.
    fn square_sum(&self, cutoff: Option<i64>) -> f64 {
        let mut total = self.factor(0).powi(2);
        let mut k = 1i64;
        loop {
            if cutoff.is_some_and(|c| k > c) {
                break;
            }
            let term = 2.0 * self.factor(k).powi(2);
            total += term;
            if cutoff.is_none() && (term < 1e-18 * total || k > 10_000_000) {
                // Sobolev tails: add the integral remainder 2 * int_k^inf x^{-4 order}
                if let CoefficientLaw::Sobolev { order } = *self {
                    let p = 4.0 * order;
                    total += 2.0 * (k as f64).powf(1.0 - p) / (p - 1.0);
                }
                break;
            }
            k += 1;
        }
        total
    }
}

/// An observable `sum_xi a_xi(x) exp(2 pi i <xi, y>)`, optionally multiplied
/// by a character `exp(2 pi i m a)` of the suspension base point `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierObservable {
    base_dim: usize,
    fiber_dim: usize,
    terms: BTreeMap<FrequencyVector, BaseProfile>,
    mark_harmonic: i64,
}

impl FourierObservable {
    pub fn new(base_dim: usize, fiber_dim: usize) -> Self {
        FourierObservable { base_dim, fiber_dim, terms: BTreeMap::new(), mark_harmonic: 0 }
    }

    /// Add the term `a_xi`; at most one term per frequency.
    pub fn with_term(mut self, xi: impl Into<FrequencyVector>, profile: BaseProfile) -> Result<Self> {
        self.insert(xi.into(), profile)?;
        Ok(self)
    }

    pub fn insert(&mut self, xi: FrequencyVector, profile: BaseProfile) -> Result<()> {
        if xi.dim() != self.fiber_dim {
            return Err(dim_err(format!("frequency in Z^{}", self.fiber_dim), xi.dim()));
        }
        profile.validate(self.base_dim)?;
        if self.terms.contains_key(&xi) {
            return Err(ShearError::InvalidParameter(format!("duplicate frequency {:?}", xi.0)));
        }
        self.terms.insert(xi, profile);
        Ok(())
    }

    pub fn with_mark_harmonic(mut self, m: i64) -> Self {
        self.mark_harmonic = m;
        self
    }

    /// A pure torus observable with constant coefficients.
    pub fn pure_torus<I, F>(fiber_dim: usize, coefficients: I) -> Result<Self>
    where
        I: IntoIterator<Item = (F, Complex64)>,
        F: Into<FrequencyVector>,
    {
        let mut obs = FourierObservable::new(0, fiber_dim);
        for (xi, c) in coefficients {
            obs.insert(xi.into(), BaseProfile::Constant(c))?;
        }
        Ok(obs)
    }

    /// Observable on T^2 with coefficients `law` on `|xi|_inf <= cutoff`,
    /// together with the truncated tail `sum_{|xi|_inf > cutoff} |c_xi|^2`.
    pub fn from_law(law: CoefficientLaw, cutoff: i64) -> Result<(Self, f64)> {
        law.validate()?;
        if cutoff < 0 {
            return Err(ShearError::InvalidParameter("cutoff must be non-negative".into()));
        }
        let mut obs = FourierObservable::new(0, 2);
        for a in -cutoff..=cutoff {
            for b in -cutoff..=cutoff {
                let c = law.factor(a) * law.factor(b);
                obs.terms.insert(FrequencyVector(vec![a, b]), BaseProfile::constant(c, 0.0));
            }
        }
        let full = law.square_sum(None);
        let kept = law.square_sum(Some(cutoff));
        let tail = (full * full - kept * kept).max(0.0);
        Ok((obs, tail))
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.base_dim, self.fiber_dim)
    }

    pub fn mark_harmonic(&self) -> i64 {
        self.mark_harmonic
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FrequencyVector, &BaseProfile)> {
        self.terms.iter()
    }

    pub fn term(&self, xi: &FrequencyVector) -> Option<&BaseProfile> {
        self.terms.get(xi)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Every profile is constant: the observable lives on the fiber torus.
    pub fn is_pure_torus(&self) -> bool {
        self.mark_harmonic == 0 && self.terms.values().all(|p| p.as_constant().is_some())
    }

    /// Constant coefficient at `xi` (zero when absent); pure observables only.
    pub fn coefficient(&self, xi: &FrequencyVector) -> Option<Complex64> {
        match self.terms.get(xi) {
            None => Some(Complex64::new(0.0, 0.0)),
            Some(p) => p.as_constant(),
        }
    }

    pub fn eval(&self, p: &PhasePoint) -> Result<Complex64> {
        if p.base.dim() != self.base_dim || p.fiber.dim() != self.fiber_dim {
            return Err(dim_err(
                format!("({}, {})", self.base_dim, self.fiber_dim),
                format!("({}, {})", p.base.dim(), p.fiber.dim()),
            ));
        }
        let mark_factor = if self.mark_harmonic == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            match &p.extra {
                FiberExtra::Mark(m) => Complex64::cis(TAU * ((self.mark_harmonic as f64 * m.value()).fract())),
                _ => {
                    return Err(ShearError::InvalidParameter(
                        "observable reads a suspension base point the phase point lacks".into(),
                    ))
                }
            }
        };
        Ok(self.eval_unchecked(p.base.coords(), p.fiber.coords()) * mark_factor)
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(xi, a)| {
                let phase: f64 = xi.0.iter().zip(y).map(|(k, yi)| *k as f64 * yi).sum();
                a.eval(x) * Complex64::cis(TAU * phase.fract())
            })
            .sum()
    }

    /// Smallest sup bound of the observable, `sum |a_xi|_inf`.
    pub fn sup_bound(&self) -> f64 {
        self.terms.values().map(BaseProfile::sup_bound).sum()
    }
}

/// `E(f | I)` when `I` is generated by the base coordinate: keep only the
/// fiber-invariant `xi = 0` term. A non-zero suspension-base harmonic
/// averages to zero over the ergodic base, so such observables project to 0.
pub fn conditional_expectation(obs: &FourierObservable) -> FourierObservable {
    let mut out = FourierObservable::new(obs.base_dim, obs.fiber_dim);
    if obs.mark_harmonic != 0 {
        return out;
    }
    let zero = FrequencyVector::zero(obs.fiber_dim);
    if let Some(a) = obs.terms.get(&zero) {
        out.terms.insert(zero, a.clone());
    }
    out
}

/// Anisotropic weight `h(xi) = (1 + xi_1^2 / xi_2^2)^(1/2)`, or 1 when `xi_2 = 0`.
pub fn aniso_weight(xi: [i64; 2]) -> f64 {
    if xi[1] == 0 {
        1.0
    } else {
        let r = xi[0] as f64 / xi[1] as f64;
        (1.0 + r * r).sqrt()
    }
}

/// `||f||_{H^{s,0}} = (sum h(xi)^{2s} |c_xi|^2)^{1/2}` of a pure T^2 observable.
pub fn norm_h_s0(obs: &FourierObservable, s: f64) -> Result<f64> {
    if obs.fiber_dim != 2 {
        return Err(ShearError::NotPureTorus(format!("fiber dimension {} != 2", obs.fiber_dim)));
    }
    if !(s >= 0.0) {
        return Err(ShearError::InvalidParameter(format!("regularity s = {s} must be >= 0")));
    }
    let mut sum = 0.0;
    for (xi, a) in &obs.terms {
        let c =
            a.as_constant().ok_or_else(|| ShearError::NotPureTorus(format!("non-constant profile at {:?}", xi.0)))?;
        sum += aniso_weight([xi.0[0], xi.0[1]]).powf(2.0 * s) * c.norm_sqr();
    }
    Ok(sum.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::PhasePoint;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn constant_observable() {
        let obs = FourierObservable::pure_torus(2, [([0, 0], c(1.0))]).unwrap();
        let v = obs.eval(&PhasePoint::on_torus(vec![0.3, 0.8])).unwrap();
        assert_eq!(v, c(1.0));
    }

    #[test]
    fn single_character_at_quarter_turn() {
        let obs = FourierObservable::pure_torus(2, [([1, 0], c(1.0))]).unwrap();
        let v = obs.eval(&PhasePoint::on_torus(vec![0.25, 0.6])).unwrap();
        assert!((v - Complex64::i()).norm() < 1e-15);
    }

    #[test]
    fn euler_identity() {
        let obs = FourierObservable::pure_torus(2, [([1, 0], c(1.0)), ([-1, 0], c(1.0))]).unwrap();
        for y in [0.0, 0.1, 0.37, 0.9] {
            let v = obs.eval(&PhasePoint::on_torus(vec![y, 0.4])).unwrap();
            assert!((v - c(2.0 * (TAU * y).cos())).norm() < 1e-14);
        }
    }

    #[test]
    fn conditional_expectation_keeps_zero_mode() {
        let obs = FourierObservable::new(1, 1)
            .with_term([0], BaseProfile::constant(2.0, 0.0))
            .unwrap()
            .with_term([3], BaseProfile::constant(1.0, 0.0))
            .unwrap();
        let e = conditional_expectation(&obs);
        assert_eq!(e.len(), 1);
        assert!(e.term(&FrequencyVector(vec![0])).is_some());
        assert_eq!(conditional_expectation(&e), e);

        let no_zero = FourierObservable::new(1, 1).with_term([2], BaseProfile::constant(1.0, 0.0)).unwrap();
        assert!(conditional_expectation(&no_zero).is_empty());
    }

    #[test]
    fn duplicate_and_misdimensioned_terms_rejected() {
        let obs = FourierObservable::new(0, 2).with_term([1, 0], BaseProfile::constant(1.0, 0.0)).unwrap();
        assert!(obs.clone().with_term([1, 0], BaseProfile::constant(1.0, 0.0)).is_err());
        assert!(obs.with_term([1, 0, 0], BaseProfile::constant(1.0, 0.0)).is_err());
    }

    #[test]
    fn anisotropic_weight_values() {
        assert_eq!(aniso_weight([3, 4]), 1.25);
        assert_eq!(aniso_weight([7, 0]), 1.0);
        assert_eq!(aniso_weight([0, 5]), 1.0);
    }

    #[test]
    fn h_s0_norm_values() {
        let single = FourierObservable::pure_torus(2, [([0, 1], c(1.0))]).unwrap();
        for s in [0.0, 0.5, 3.0] {
            assert!((norm_h_s0(&single, s).unwrap() - 1.0).abs() < 1e-15);
        }
        let scaled = FourierObservable::pure_torus(2, [([3, 4], c(2.0))]).unwrap();
        assert!((norm_h_s0(&scaled, 1.0).unwrap() - 2.5).abs() < 1e-15);
        // h(1,1)^4 = 4 and h(2,1)^4 = 25 by hand
        let pair = FourierObservable::pure_torus(2, [([1, 1], c(1.0)), ([2, 1], c(1.0))]).unwrap();
        assert!((norm_h_s0(&pair, 2.0).unwrap() - 29f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn h_s0_rejects_base_dependence() {
        let obs = FourierObservable::new(1, 2)
            .with_term([1, 1], BaseProfile::Trig { coefficient: c(1.0), wave: vec![1.0] })
            .unwrap();
        assert!(matches!(norm_h_s0(&obs, 1.0), Err(ShearError::NotPureTorus(_))));
    }

    #[test]
    fn law_tail_matches_brute_force() {
        let law = CoefficientLaw::Exponential { rate: 1.0 };
        let (obs, tail) = FourierObservable::from_law(law, 3).unwrap();
        assert_eq!(obs.len(), 49);
        let mut brute = 0.0;
        for a in -60i64..=60 {
            for b in -60i64..=60 {
                if a.abs().max(b.abs()) > 3 {
                    brute += (law.factor(a) * law.factor(b)).powi(2);
                }
            }
        }
        assert!((tail - brute).abs() < 1e-15, "{tail} vs {brute}");
    }

    #[test]
    fn parseval_on_a_fiber_grid() {
        let obs = FourierObservable::pure_torus(
            2,
            [([1, 2], Complex64::new(0.5, -1.0)), ([0, -3], c(2.0)), ([4, 1], Complex64::new(0.0, 0.25))],
        )
        .unwrap();
        let n = 256;
        let mut mean = 0.0;
        for i in 0..n {
            for j in 0..n {
                let y = [i as f64 / n as f64, j as f64 / n as f64];
                mean += obs.eval_unchecked(&[], &y).norm_sqr();
            }
        }
        mean /= (n * n) as f64;
        let energy: f64 = obs.terms().map(|(_, a)| a.as_constant().unwrap().norm_sqr()).sum();
        assert!((mean - energy).abs() < 1e-10);
    }

    #[test]
    fn hat_profile_is_compact() {
        let hat = BaseProfile::Hat { amplitude: c(1.0), center: vec![1.5], half_width: 0.25 };
        assert_eq!(hat.eval(&[1.5]), c(1.0));
        assert_eq!(hat.eval(&[1.8]), c(0.0));
    }
}
