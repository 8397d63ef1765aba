//! I.i.d. sampling from the invariant (compatible) measures.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rayon::prelude::*;

use super::{
    BaseChartPoint, BaseDensity, BaseManifold, BaseMapSpec, FiberExtra, FlowSpec, Mark, PhasePoint, TorusVector,
};
use crate::counterexamples::PAdicInteger;
use crate::error::{Result, ShearError};
use crate::rng::{stream, CHUNK};

/// `count` i.i.d. draws from the invariant measure of `flow`: base from its
/// density, fiber uniform. Chunk `c` of [`CHUNK`] samples uses the stream
/// `(seed, c)`, so the list depends only on `(flow, count, seed)`.
pub fn sample_invariant(flow: &FlowSpec, count: usize, seed: u64) -> Result<Vec<PhasePoint>> {
    if count == 0 {
        return Err(ShearError::InvalidParameter("sample count must be at least 1".into()));
    }
    validate_measure(flow)?;
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<Vec<PhasePoint>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(count - c * CHUNK);
            sample_chunk(flow, seed, c as u64, len)
        })
        .collect();
    Ok(parts.into_iter().flatten().collect())
}

pub(crate) fn validate_measure(flow: &FlowSpec) -> Result<()> {
    match flow {
        FlowSpec::Product(c) => c.density.validate(&c.manifold),
        FlowSpec::Suspension(s) => s.density.validate(&s.manifold),
        _ => Ok(()),
    }
}

/// The `chunk`-th block of samples of the stream keyed by `seed`.
pub(crate) fn sample_chunk(flow: &FlowSpec, seed: u64, chunk: u64, len: usize) -> Vec<PhasePoint> {
    let mut rng = stream(seed, chunk);
    (0..len).map(|_| sample_one(flow, &mut rng)).collect()
}

fn sample_one(flow: &FlowSpec, rng: &mut impl Rng) -> PhasePoint {
    let (_, d) = flow.dims();
    match flow {
        FlowSpec::Transvection(_) => PhasePoint::on_torus(uniform_fiber(2, rng)),
        FlowSpec::Suspension(s) => {
            let base = sample_base(&s.manifold, &s.density, rng);
            let height = rng.gen::<f64>();
            let mark = match s.base_map {
                BaseMapSpec::Doubling => Mark::Binary { key: rng.gen(), shift: 0 },
                BaseMapSpec::Rotation(_) => Mark::Real(rng.gen()),
            };
            PhasePoint { base, fiber: TorusVector::new(vec![height]), extra: FiberExtra::Mark(mark) }
        }
        FlowSpec::PAdicTranslation(f) => {
            let atom = rng.gen_range(0..f.shifts.len());
            let y = PAdicInteger::random(f.p, f.digits, rng);
            PhasePoint {
                base: BaseChartPoint::raw(vec![atom as f64]),
                fiber: TorusVector::zero(0),
                extra: FiberExtra::PAdic(y),
            }
        }
        other => {
            let c = other.compatible().expect("compatible system");
            let base = sample_base(&c.manifold, &c.density, rng);
            PhasePoint::new(base, TorusVector::new(uniform_fiber(d, rng)))
        }
    }
}

fn uniform_fiber(d: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..d).map(|_| rng.gen::<f64>()).collect()
}

fn uniform_base(manifold: &BaseManifold, rng: &mut impl Rng) -> Vec<f64> {
    match manifold {
        BaseManifold::Point => vec![],
        BaseManifold::Box { lower, upper } => {
            lower.iter().zip(upper).map(|(a, b)| a + (b - a) * rng.gen::<f64>()).collect()
        }
        BaseManifold::Circle => vec![TAU * rng.gen::<f64>()],
        BaseManifold::Sphere => {
            let u: f64 = rng.gen();
            vec![(1.0 - 2.0 * u).clamp(-1.0, 1.0).acos(), TAU * rng.gen::<f64>()]
        }
        BaseManifold::Atoms(k) => vec![rng.gen_range(0..*k) as f64],
    }
}

pub(crate) fn sample_base(manifold: &BaseManifold, density: &BaseDensity, rng: &mut impl Rng) -> BaseChartPoint {
    let coords = match density {
        BaseDensity::Uniform => uniform_base(manifold, rng),
        // inverse CDF of cos(theta)/2: F(theta) = (1 + sin theta) / 2
        BaseDensity::HalfCosine => {
            let u: f64 = rng.gen();
            vec![(2.0 * u - 1.0).clamp(-1.0, 1.0).asin().clamp(-PI / 2.0, PI / 2.0)]
        }
        BaseDensity::Tilted { .. } => {
            let sup = density.sup(manifold);
            loop {
                let x = uniform_base(manifold, rng);
                if rng.gen::<f64>() * sup <= density.eval(manifold, &x) {
                    break x;
                }
            }
        }
    };
    BaseChartPoint::raw(coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::{CompatibleFlow, VelocityField};
    use crate::stats::{ks_critical_1pct, ks_statistic};

    #[test]
    fn billiard_angle_mean_is_zero() {
        let n = 100_000;
        let pts = sample_invariant(&FlowSpec::DiskBilliard, n, 11).unwrap();
        let thetas: Vec<f64> = pts.iter().map(|p| p.base.coords()[0]).collect();
        let mean = thetas.iter().sum::<f64>() / n as f64;
        let sd = (thetas.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!(mean.abs() < 4.0 * sd / (n as f64).sqrt(), "mean {mean}");
        let d = ks_statistic(&thetas, |t| (1.0 + t.sin()) / 2.0);
        assert!(d < ks_critical_1pct(n), "KS {d}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_invariant(&FlowSpec::TorusGeodesic(3), 5000, 3).unwrap();
        let b = sample_invariant(&FlowSpec::TorusGeodesic(3), 5000, 3).unwrap();
        assert_eq!(a, b);
        let c = sample_invariant(&FlowSpec::TorusGeodesic(3), 5000, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_interval_passes_ks() {
        let flow = FlowSpec::Product(
            CompatibleFlow::new(
                BaseManifold::interval(0.0, 1.0).unwrap(),
                VelocityField::identity(1),
                BaseDensity::Uniform,
            )
            .unwrap(),
        );
        let n = 100_000;
        let pts = sample_invariant(&flow, n, 5).unwrap();
        let xs: Vec<f64> = pts.iter().map(|p| p.base.coords()[0]).collect();
        assert!(ks_statistic(&xs, |x| x.clamp(0.0, 1.0)) < ks_critical_1pct(n));
    }

    #[test]
    fn tilted_density_is_sampled() {
        let m = BaseManifold::interval(0.0, 1.0).unwrap();
        let flow = FlowSpec::Product(
            CompatibleFlow::new(m, VelocityField::identity(1), BaseDensity::Tilted { slope: 0.5 }).unwrap(),
        );
        let n = 50_000;
        let pts = sample_invariant(&flow, n, 8).unwrap();
        let xs: Vec<f64> = pts.iter().map(|p| p.base.coords()[0]).collect();
        // density 1 + 0.5 (2x - 1): CDF 0.5 x + 0.5 x^2
        let d = ks_statistic(&xs, |x| 0.5 * x + 0.5 * x * x);
        assert!(d < ks_critical_1pct(n), "KS {d}");
    }

    #[test]
    fn zero_count_rejected() {
        assert!(sample_invariant(&FlowSpec::DiskBilliard, 0, 1).is_err());
    }
}
