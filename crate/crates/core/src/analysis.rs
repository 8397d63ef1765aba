//! Decay-rate fitting and the explicit decay bounds.

use num_complex::Complex64;

use crate::covariance::{cov_series, spectral_cov_transvection, CovarianceSeries, Estimator};
use crate::error::{Result, ShearError};
use crate::flows::FlowSpec;
use crate::observables::{norm_h_s0, FourierObservable};
use crate::quadrature::QuadSpec;

/// Envelope values below this are treated as numerically zero.
pub const DECAYED_THRESHOLD: f64 = 1e-14;
/// Minimum number of series points inside a fit window.
pub const MIN_FIT_POINTS: usize = 10;

/// Result of a log-log least-squares fit `|value| ~ A t^(-p)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub exponent: f64,
    pub amplitude: f64,
    pub r2: f64,
    pub window: (f64, f64),
    /// Number of block envelopes used.
    pub blocks: usize,
}

impl DecayFit {
    /// The comment line appended to series CSV files.
    pub fn comment(&self) -> String {
        format!("fit: exponent={:.6}, amplitude={:.6e}, r2={:.6}", self.exponent, self.amplitude, self.r2)
    }
}

/// Result of a log-linear fit `|value| ~ C exp(-c t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentialFit {
    pub rate: f64,
    pub amplitude: f64,
    pub r2: f64,
    pub window: (f64, f64),
    pub blocks: usize,
}

/// Block envelopes `(t at the block maximum, max |value|)` inside a window.
fn envelope(series: &CovarianceSeries, window: (f64, f64), block: usize) -> Result<Vec<(f64, f64)>> {
    if block == 0 {
        return Err(ShearError::InvalidParameter("block length must be at least 1".into()));
    }
    let points: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.values)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(t, v)| (*t, v.norm()))
        .collect();
    if points.len() < MIN_FIT_POINTS {
        return Err(ShearError::TooFewPoints { found: points.len(), required: MIN_FIT_POINTS });
    }
    Ok(points
        .chunks(block)
        .map(|c| c.iter().copied().fold((c[0].0, f64::NEG_INFINITY), |best, p| if p.1 > best.1 { p } else { best }))
        .collect())
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, r2)`.
fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let r2 = if syy <= f64::EPSILON * f64::EPSILON * n * (1.0 + my * my) {
        1.0
    } else {
        let ss_res: f64 = points.iter().map(|p| (p.1 - a - b * p.0).powi(2)).sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    (a, b, r2)
}

/// Fit `log env = log A - p log t` to block envelopes of `|value|` over
/// the window. Blocks whose envelope is below [`DECAYED_THRESHOLD`] are
/// dropped; if all are, the series has fully decayed.
pub fn fit_power_law(series: &CovarianceSeries, window: (f64, f64), block: usize) -> Result<DecayFit> {
    if !(window.0 > 0.0) {
        return Err(ShearError::InvalidParameter("power-law windows need t > 0".into()));
    }
    let env = envelope(series, window, block)?;
    let kept: Vec<(f64, f64)> = env.iter().filter(|e| e.1 >= DECAYED_THRESHOLD).map(|e| (e.0.ln(), e.1.ln())).collect();
    if kept.is_empty() {
        return Err(ShearError::FullyDecayed { threshold: DECAYED_THRESHOLD });
    }
    if kept.len() < 2 {
        return Err(ShearError::TooFewPoints { found: kept.len(), required: 2 });
    }
    let (a, b, r2) = least_squares(&kept);
    Ok(DecayFit { exponent: -b, amplitude: a.exp(), r2, window, blocks: kept.len() })
}

/// Fit `log env = log C - c t` to block envelopes. Only exactly vanishing
/// envelopes are dropped, since exact spectral series stay accurate far
/// below double-precision epsilon.
pub fn fit_exponential(series: &CovarianceSeries, window: (f64, f64), block: usize) -> Result<ExponentialFit> {
    let env = envelope(series, window, block)?;
    let kept: Vec<(f64, f64)> = env.iter().filter(|e| e.1 > 0.0).map(|e| (e.0, e.1.ln())).collect();
    if kept.is_empty() {
        return Err(ShearError::FullyDecayed { threshold: 0.0 });
    }
    if kept.len() < 2 {
        return Err(ShearError::TooFewPoints { found: kept.len(), required: 2 });
    }
    let (a, b, r2) = least_squares(&kept);
    Ok(ExponentialFit { rate: -b, amplitude: a.exp(), r2, window, blocks: kept.len() })
}

/// One row of the transvection bound check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundCheck {
    pub n: i64,
    pub abs_cov: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Compare `|Cov_n|` with `4^s n^(-2s) |f1|_{H^{s,0}} |f2|_{H^{s,0}}` for each `n`.
pub fn check_transvection_bound(
    f1: &FourierObservable,
    f2: &FourierObservable,
    s: f64,
    n_range: impl IntoIterator<Item = i64>,
) -> Result<Vec<BoundCheck>> {
    let norms = norm_h_s0(f1, s)? * norm_h_s0(f2, s)?;
    n_range
        .into_iter()
        .map(|n| {
            if n < 1 {
                return Err(ShearError::InvalidParameter(format!("bound holds for n >= 1, got {n}")));
            }
            let abs_cov = spectral_cov_transvection(f1, f2, n)?.norm();
            let bound = 4f64.powf(s) * (n as f64).powf(-2.0 * s) * norms;
            Ok(BoundCheck { n, abs_cov, bound, ok: abs_cov <= bound * (1.0 + 1e-12) })
        })
        .collect()
}

/// Anchors per decade-spanning window and samples per anchor.
const GEODESIC_ANCHORS: usize = 40;
const GEODESIC_BLOCK: usize = 10;
const GEODESIC_SPACING: f64 = 0.23;

/// Time grid for rate fits: log-spaced anchors, each followed by a short
/// run of samples spanning about two oscillation periods of `exp(2 pi i t)`.
pub fn geodesic_time_grid(window: (f64, f64)) -> Vec<f64> {
    let span = GEODESIC_SPACING * (GEODESIC_BLOCK - 1) as f64;
    let (lo, hi) = (window.0.ln(), (window.1 - span).ln());
    let mut times = Vec::with_capacity(GEODESIC_ANCHORS * GEODESIC_BLOCK);
    for k in 0..GEODESIC_ANCHORS {
        let mut anchor =
            if k == 0 { window.0 } else { (lo + (hi - lo) * k as f64 / (GEODESIC_ANCHORS - 1) as f64).exp() };
        // blocks must not overlap where log-spaced anchors are dense
        if let Some(last) = times.last() {
            anchor = anchor.max(last + GEODESIC_SPACING);
        }
        times.extend((0..GEODESIC_BLOCK).map(|j| (anchor + GEODESIC_SPACING * j as f64).min(window.1)));
    }
    times
}

/// A geodesic-flow rate fit together with the series it was fitted on.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicRate {
    pub fit: DecayFit,
    pub series: CovarianceSeries,
}

/// Spectral covariance series of the unit-speed geodesic flow on `T^1 T^n`
/// over `window` and its envelope power-law fit (expected exponent
/// `(n - 1) / 2`).
pub fn check_geodesic_rate(
    n_dim: usize,
    f1: &FourierObservable,
    f2: &FourierObservable,
    window: (f64, f64),
    quad: &QuadSpec,
) -> Result<GeodesicRate> {
    let flow = FlowSpec::torus_geodesic(n_dim)?;
    let times = geodesic_time_grid(window);
    let mut series = cov_series(&flow, f1, f2, &times, &Estimator::Spectral(*quad))?;
    let fit = fit_power_law(&series, window, GEODESIC_BLOCK)?;
    series.comments.push(fit.comment());
    Ok(GeodesicRate { fit, series })
}

/// Synthetic series `t -> f(t)` with the spectral label, for fitting tests
/// and diagnostics.
pub fn synthetic_series(times: &[f64], f: impl Fn(f64) -> f64) -> CovarianceSeries {
    let values = times.iter().map(|t| Complex64::new(f(*t), 0.0)).collect();
    CovarianceSeries::new(times.to_vec(), values, vec![0.0; times.len()], "spectral").expect("equal lengths")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn exact_power_law() {
        let s = synthetic_series(&grid(10.0, 1000.0, 500), |t| t.powf(-0.5));
        let fit = fit_power_law(&s, (10.0, 1000.0), 10).unwrap();
        assert!((fit.exponent - 0.5).abs() < 0.01);
        assert!(fit.r2 > 0.999);
    }

    #[test]
    fn oscillating_power_law() {
        // blocks of 10 samples at spacing 1.5 cover more than two periods
        let times: Vec<f64> = (0..660).map(|i| 10.0 + 1.5 * i as f64).collect();
        let s = synthetic_series(&times, |t| t.powf(-0.5) * t.cos());
        let fit = fit_power_law(&s, (10.0, 1000.0), 10).unwrap();
        assert!((fit.exponent - 0.5).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn constant_series() {
        let s = synthetic_series(&grid(10.0, 1000.0, 100), |_| 0.3);
        let fit = fit_power_law(&s, (10.0, 1000.0), 10).unwrap();
        assert!(fit.exponent.abs() < 0.01);
        assert!((fit.amplitude - 0.3).abs() < 1e-12);
    }

    #[test]
    fn zero_series_is_fully_decayed() {
        let s = synthetic_series(&grid(10.0, 1000.0, 100), |_| 0.0);
        assert!(matches!(fit_power_law(&s, (10.0, 1000.0), 10), Err(ShearError::FullyDecayed { .. })));
    }

    #[test]
    fn too_few_points() {
        let s = synthetic_series(&grid(10.0, 20.0, 5), |t| 1.0 / t);
        assert!(matches!(fit_power_law(&s, (10.0, 20.0), 1), Err(ShearError::TooFewPoints { .. })));
    }

    #[test]
    fn exponential_rate() {
        let s = synthetic_series(&grid(1.0, 60.0, 60), |t| 3.0 * (-0.7 * t).exp());
        let fit = fit_exponential(&s, (1.0, 60.0), 1).unwrap();
        assert!((fit.rate - 0.7).abs() < 1e-10 && (fit.amplitude - 3.0).abs() < 1e-8);
    }

    #[test]
    fn geodesic_grid_stays_in_window() {
        let g = geodesic_time_grid((10.0, 1000.0));
        assert_eq!(g.len(), 400);
        assert!(g[0] == 10.0 && *g.last().unwrap() <= 1000.0, "{:?}", g.last());
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
