//! Conditional covariance `E(conj f1 * f2 o g_t) - E(conj E(f1|I) E(f2|I))`.
//!
//! Spectral estimators are exact finite Fourier sums (transvection) or sums
//! of base integrals `int conj(a1) a2 exp(2 pi i t <xi, v>) dmu` evaluated by
//! refined quadrature. The Monte Carlo estimator works for every system.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{dim_err, Result, ShearError};
use crate::flows::{cross, normalize};
use crate::flows::{
    sample_invariant, sphere_chart, BaseDensity, BaseManifold, CompatibleFlow, FlowSpec, TransvectionVariant,
    VelocityField,
};
use crate::observables::{BaseProfile, FourierObservable, FrequencyVector};
use crate::quadrature::QuadSpec;
use crate::rng::{derive_seed, CHUNK};
use crate::stats::complex_mean_stderr;

/// Fewest Monte Carlo samples accepted.
pub const MIN_SAMPLES: usize = 100;

fn pure_coefficients(obs: &FourierObservable) -> Result<Vec<([i64; 2], Complex64)>> {
    let (n, d) = obs.dims();
    if n != 0 || d != 2 || obs.mark_harmonic() != 0 {
        return Err(ShearError::NotPureTorus(format!("observable has dims ({n}, {d})")));
    }
    obs.terms()
        .map(|(xi, a)| {
            a.as_constant()
                .map(|c| ([xi.0[0], xi.0[1]], c))
                .ok_or_else(|| ShearError::NotPureTorus(format!("non-constant profile at {:?}", xi.0)))
        })
        .collect()
}

/// Exact covariance of two pure T^2 observables under the `n`-th power of
/// the lower transvection `(x, y) -> (x, x + y)`.
///
/// `f2 o T^n` has coefficient `c_xi` at frequency `(T^*)^n xi`, so the value
/// is `sum_{xi in supp f2, xi_2 != 0} conj(a_{(T^*)^n xi}) c_xi`.
pub fn spectral_cov_transvection(f1: &FourierObservable, f2: &FourierObservable, n: i64) -> Result<Complex64> {
    spectral_cov_transvection_variant(TransvectionVariant::Lower, f1, f2, n)
}

/// [`spectral_cov_transvection`] for either matrix.
pub fn spectral_cov_transvection_variant(
    variant: TransvectionVariant,
    f1: &FourierObservable,
    f2: &FourierObservable,
    n: i64,
) -> Result<Complex64> {
    pure_coefficients(f1)?;
    let c2 = pure_coefficients(f2)?;
    let moving = 1 - variant.invariant_axis();
    let mut total = Complex64::new(0.0, 0.0);
    for (xi, c) in c2 {
        if xi[moving] == 0 {
            continue;
        }
        let image = FrequencyVector(variant.dual_power(xi, n).to_vec());
        if let Some(a) = f1.term(&image).and_then(BaseProfile::as_constant) {
            total += a.conj() * c;
        }
    }
    Ok(total)
}

/// A quadrature-based covariance value with its refinement diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralValue {
    pub value: Complex64,
    /// `|I(N) - I(2N)|` at acceptance.
    pub error_estimate: f64,
    /// Resolution `2N` of the accepted value.
    pub resolution: usize,
}

fn check_compatible_pair<'a>(
    flow: &'a FlowSpec,
    f1: &FourierObservable,
    f2: &FourierObservable,
) -> Result<&'a CompatibleFlow> {
    let c = flow.compatible().ok_or_else(|| {
        ShearError::InvalidParameter(format!("no spectral formula for {}; use Monte Carlo", flow.id()))
    })?;
    let dims = flow.dims();
    for f in [f1, f2] {
        if f.dims() != dims {
            return Err(dim_err(format!("{dims:?}"), format!("{:?}", f.dims())));
        }
        if f.mark_harmonic() != 0 {
            return Err(ShearError::InvalidParameter("mark harmonics need a suspension flow".into()));
        }
    }
    Ok(c)
}

struct Term<'a> {
    xi: Vec<f64>,
    a1: &'a BaseProfile,
    a2: &'a BaseProfile,
}

/// Frame `(u, a, b)` with `u = xi / |xi|`, used to put the stationary points
/// of `<xi, x>` on the sphere at the poles of the quadrature grid.
fn aligned_frame(xi: &[f64]) -> [[f64; 3]; 3] {
    let u = normalize([xi[0], xi[1], xi[2]]);
    let reference = if u[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let a = normalize(cross(reference, u));
    let b = cross(u, a);
    [u, a, b]
}

/// Quadrature nodes per parallel work unit.
const QUAD_BLOCK: usize = 1024;

fn integrate_terms(c: &CompatibleFlow, terms: &[Term], t: f64, res: usize, res_aux: usize) -> (Complex64, f64) {
    let n = c.manifold.dim();
    let d = c.fiber_dim();
    let rotate = matches!((&c.manifold, &c.velocity), (BaseManifold::Sphere, VelocityField::UnitSphere));
    let (nodes, weights) = c.manifold.quadrature(res, res_aux);
    let count = weights.len();
    let mut total = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for term in terms {
        let frame = if rotate { Some(aligned_frame(&term.xi)) } else { None };
        // fixed blocks summed in order keep the result independent of the thread count
        let blocks: Vec<(Complex64, f64)> = (0..count.div_ceil(QUAD_BLOCK))
            .into_par_iter()
            .map(|b| {
                let mut scratch = vec![0.0; d];
                let mut acc = Complex64::new(0.0, 0.0);
                let mut sup = 0.0f64;
                for i in b * QUAD_BLOCK..((b + 1) * QUAD_BLOCK).min(count) {
                    let raw = &nodes[i * n..(i + 1) * n];
                    let mapped;
                    let x: &[f64] = match frame {
                        Some([u, a, b]) => {
                            let (st, ct) = raw[0].sin_cos();
                            let (sp, cp) = raw[1].sin_cos();
                            let w = [
                                ct * u[0] + st * (cp * a[0] + sp * b[0]),
                                ct * u[1] + st * (cp * a[1] + sp * b[1]),
                                ct * u[2] + st * (cp * a[2] + sp * b[2]),
                            ];
                            mapped = sphere_chart(w);
                            &mapped
                        }
                        None => raw,
                    };
                    let amp = term.a1.eval(x).conj() * term.a2.eval(x) * c.density.eval(&c.manifold, x);
                    let phase = t * c.velocity.pair(&term.xi, x, &mut scratch);
                    acc += amp * Complex64::cis(TAU * phase.fract()) * weights[i];
                    sup = sup.max(amp.norm());
                }
                (acc, sup)
            })
            .collect();
        let sum: Complex64 = blocks.iter().map(|b| b.0).sum();
        let sup = blocks.iter().map(|b| b.1).fold(0.0, f64::max);
        total += sum;
        // integrand magnitude relative to the base probability measure
        scale += sup * c.manifold.volume();
    }
    (total, scale)
}

/// Starting resolution from the number of oscillations of the phase.
fn initial_resolution(c: &CompatibleFlow, terms: &[Term], t: f64, spec: &QuadSpec) -> (usize, usize) {
    let n = c.manifold.dim();
    let (coarse, _) = c.manifold.quadrature(4, 16);
    let mut scratch = vec![0.0; c.fiber_dim()];
    let mut spread: f64 = 0.0;
    for term in terms {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for x in coarse.chunks(n) {
            let p = c.velocity.pair(&term.xi, x, &mut scratch);
            lo = lo.min(p);
            hi = hi.max(p);
        }
        // the coarse grid can miss extrema; pad by the largest sampled value
        spread = spread.max(hi - lo + 0.25 * hi.abs().max(lo.abs()));
    }
    let oscillations = t.abs() * spread;
    let base = match c.manifold {
        BaseManifold::Circle => (2.0 * std::f64::consts::PI * oscillations + 32.0) as usize,
        BaseManifold::Sphere => (oscillations / 2.0) as usize + spec.min_resolution,
        _ => oscillations.ceil() as usize,
    };
    let res = ((base.max(spec.min_resolution) as f64) * spec.oversample).ceil() as usize;
    let aux = match c.manifold {
        BaseManifold::Sphere if matches!(c.velocity, VelocityField::UnitSphere) => 2 * spec.min_resolution,
        BaseManifold::Sphere => res.max(2 * spec.min_resolution),
        _ => 1,
    };
    (res.max(1), aux)
}

/// `sum_{xi != 0} int_M conj(a1_xi) a2_xi exp(2 pi i t <xi, v(x)>) dmu(x)` for a
/// compatible flow (product flows, torus geodesic, billiard, sphere geodesic).
///
/// Resolution doubles until `|I(N) - I(2N)| <= tolerance * sum_xi sup|a1 a2|`.
pub fn spectral_cov_product_flow(
    flow: &FlowSpec,
    f1: &FourierObservable,
    f2: &FourierObservable,
    t: f64,
    quad: &QuadSpec,
) -> Result<SpectralValue> {
    let c = check_compatible_pair(flow, f1, f2)?;
    if !t.is_finite() {
        return Err(ShearError::NonFiniteTime(t));
    }
    let terms: Vec<Term> = f2
        .terms()
        .filter(|(xi, _)| !xi.is_zero())
        .filter_map(|(xi, a2)| f1.term(xi).map(|a1| Term { xi: xi.as_f64(), a1, a2 }))
        .collect();
    if terms.is_empty() {
        return Ok(SpectralValue { value: Complex64::new(0.0, 0.0), error_estimate: 0.0, resolution: 0 });
    }
    let (mut res, mut aux) = initial_resolution(c, &terms, t, quad);
    let (mut prev, _) = integrate_terms(c, &terms, t, res, aux);
    let mut last_diff = f64::INFINITY;
    let mut last_tol = 0.0;
    // in the xi-aligned frame a longitude-free integrand needs no aux refinement
    let longitude_free = matches!(c.velocity, VelocityField::UnitSphere)
        && matches!(c.density, BaseDensity::Uniform)
        && terms.iter().all(|t| t.a1.as_constant().is_some() && t.a2.as_constant().is_some());
    for _ in 0..=quad.max_doublings {
        res *= 2;
        if matches!(c.manifold, BaseManifold::Sphere) && !longitude_free {
            aux *= 2;
        }
        let (next, scale) = integrate_terms(c, &terms, t, res, aux);
        let diff = (next - prev).norm();
        let tol = quad.tolerance * scale;
        if diff <= tol {
            return Ok(SpectralValue { value: next, error_estimate: diff, resolution: res });
        }
        prev = next;
        last_diff = diff;
        last_tol = tol;
    }
    Err(ShearError::QuadratureNotConverged { difference: last_diff, tolerance: last_tol, nodes: res })
}

/// Base-space node count cap for the invariant-term quadrature.
const INVARIANT_NODES: f64 = 1.0e6;

/// `E(conj E(f1|I) E(f2|I))` computed analytically per system.
pub fn invariant_term(flow: &FlowSpec, f1: &FourierObservable, f2: &FourierObservable) -> Result<Complex64> {
    match flow {
        FlowSpec::Transvection(variant) => {
            let c1 = pure_coefficients(f1)?;
            pure_coefficients(f2)?;
            let moving = 1 - variant.invariant_axis();
            let mut total = Complex64::new(0.0, 0.0);
            for (xi, a) in c1.into_iter().filter(|(xi, _)| xi[moving] == 0) {
                if let Some(c) = f2.coefficient(&FrequencyVector(xi.to_vec())) {
                    total += a.conj() * c;
                }
            }
            Ok(total)
        }
        FlowSpec::PAdicTranslation(_) => {
            Err(ShearError::InvalidParameter("p-adic systems use character observables".into()))
        }
        FlowSpec::Suspension(s) => base_zero_mode(&s.manifold, &s.density, f1, f2),
        other => {
            let c = other.compatible().expect("compatible system");
            base_zero_mode(&c.manifold, &c.density, f1, f2)
        }
    }
}

fn base_zero_mode(
    manifold: &BaseManifold,
    density: &crate::flows::BaseDensity,
    f1: &FourierObservable,
    f2: &FourierObservable,
) -> Result<Complex64> {
    if f1.mark_harmonic() != 0 || f2.mark_harmonic() != 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (_, d) = f1.dims();
    let zero = FrequencyVector::zero(d);
    let (Some(a1), Some(a2)) = (f1.term(&zero), f2.term(&zero)) else {
        return Ok(Complex64::new(0.0, 0.0));
    };
    let n = manifold.dim();
    let (res, aux) = match manifold {
        BaseManifold::Box { .. } => {
            let per_axis = INVARIANT_NODES.powf(1.0 / n as f64) / crate::quadrature::PANEL_ORDER as f64;
            ((per_axis as usize).clamp(2, 64), 1)
        }
        BaseManifold::Circle => (1024, 1),
        BaseManifold::Sphere => (64, 256),
        _ => (1, 1),
    };
    let (nodes, weights) = manifold.quadrature(res, aux);
    let sum = weights
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let x = &nodes[i * n..(i + 1) * n];
            let rho = match manifold {
                BaseManifold::Atoms(k) => 1.0 / *k as f64,
                BaseManifold::Point => 1.0,
                _ => density.eval(manifold, x),
            };
            a1.eval(x).conj() * a2.eval(x) * rho * w
        })
        .sum();
    Ok(sum)
}

/// Monte Carlo covariance: sample mean of `conj f1(p) f2(g_t p)` over
/// invariant samples, minus the analytic invariant term. Returns the value
/// and the standard error of the sample mean.
pub fn mc_cov(
    flow: &FlowSpec,
    f1: &FourierObservable,
    f2: &FourierObservable,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<(Complex64, f64)> {
    if samples < MIN_SAMPLES {
        return Err(ShearError::InvalidParameter(format!(
            "Monte Carlo needs at least {MIN_SAMPLES} samples (got {samples})"
        )));
    }
    let dims = flow.dims();
    for f in [f1, f2] {
        if f.dims() != dims {
            return Err(dim_err(format!("{dims:?}"), format!("{:?}", f.dims())));
        }
    }
    let second = invariant_term(flow, f1, f2)?;
    let points = sample_invariant(flow, samples, seed)?;
    let products: Vec<Complex64> = points
        .par_chunks(CHUNK)
        .map(|chunk| {
            chunk.iter().map(|p| Ok(f1.eval(p)?.conj() * f2.eval(&flow.evolve(p, t)?)?)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .concat();
    let (mean, stderr) = complex_mean_stderr(&products);
    Ok((mean - second, stderr))
}

/// Which estimator a series uses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Estimator {
    Spectral(QuadSpec),
    /// Time point `i` uses the seed `derive_seed(seed, i)`.
    MonteCarlo {
        samples: usize,
        seed: u64,
    },
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Spectral(_) => "spectral",
            Estimator::MonteCarlo { .. } => "montecarlo",
        }
    }
}

/// Sampled conditional covariances over a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceSeries {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Standard errors; zero for spectral entries.
    pub stderr: Vec<f64>,
    /// Quadrature refinement differences; zero for exact and Monte Carlo entries.
    pub quadrature_error: Vec<f64>,
    pub estimator: &'static str,
    pub flow_id: String,
    pub observable_ids: (String, String),
    /// Comment lines appended after the rows, without the leading `# `.
    pub comments: Vec<String>,
}

impl CovarianceSeries {
    pub fn new(times: Vec<f64>, values: Vec<Complex64>, stderr: Vec<f64>, estimator: &'static str) -> Result<Self> {
        if times.len() != values.len() || times.len() != stderr.len() {
            return Err(ShearError::InvalidParameter("series columns must have equal lengths".into()));
        }
        if stderr.iter().any(|s| !(*s >= 0.0)) {
            return Err(ShearError::InvalidParameter("standard errors must be non-negative".into()));
        }
        let quadrature_error = vec![0.0; times.len()];
        Ok(CovarianceSeries {
            times,
            values,
            stderr,
            quadrature_error,
            estimator,
            flow_id: String::new(),
            observable_ids: ("f1".into(), "f2".into()),
            comments: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn abs_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn with_labels(mut self, f1: impl Into<String>, f2: impl Into<String>) -> Self {
        self.observable_ids = (f1.into(), f2.into());
        self
    }

    /// Same series multiplied by a real factor.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out.stderr.iter_mut().for_each(|s| *s *= factor.abs());
        out
    }

    /// CSV with header `t,re,im,abs,stderr,estimator` and 17 significant
    /// digits per float, followed by the comment lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re,im,abs,stderr,estimator\n");
        for i in 0..self.len() {
            let v = self.values[i];
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                self.times[i],
                v.re,
                v.im,
                v.norm(),
                self.stderr[i],
                self.estimator
            );
        }
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        out
    }
}

/// Apply an estimator at every time of an ascending grid, in parallel.
pub fn cov_series(
    flow: &FlowSpec,
    f1: &FourierObservable,
    f2: &FourierObservable,
    times: &[f64],
    estimator: &Estimator,
) -> Result<CovarianceSeries> {
    if times.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(ShearError::InvalidParameter("times must be sorted ascending".into()));
    }
    let rows: Vec<(Complex64, f64, f64)> = times
        .par_iter()
        .enumerate()
        .map(|(i, &t)| match estimator {
            Estimator::MonteCarlo { samples, seed } => {
                let (v, se) = mc_cov(flow, f1, f2, t, *samples, derive_seed(*seed, i as u64))?;
                Ok((v, se, 0.0))
            }
            Estimator::Spectral(quad) => match flow {
                FlowSpec::Transvection(variant) => {
                    if t.fract() != 0.0 || !t.is_finite() {
                        return Err(ShearError::NonIntegerTime(t));
                    }
                    Ok((spectral_cov_transvection_variant(*variant, f1, f2, t as i64)?, 0.0, 0.0))
                }
                _ => {
                    let s = spectral_cov_product_flow(flow, f1, f2, t, quad)?;
                    Ok((s.value, 0.0, s.error_estimate))
                }
            },
        })
        .collect::<Result<Vec<_>>>()?;
    let mut series = CovarianceSeries::new(
        times.to_vec(),
        rows.iter().map(|r| r.0).collect(),
        rows.iter().map(|r| r.1).collect(),
        estimator.name(),
    )?;
    series.quadrature_error = rows.iter().map(|r| r.2).collect();
    series.flow_id = flow.id();
    Ok(series)
}
