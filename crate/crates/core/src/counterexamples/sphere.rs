//! Periodicity certificate for the geodesic flow on the round sphere.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::covariance::mc_cov;
use crate::error::{Result, ShearError};
use crate::flows::FlowSpec;
use crate::observables::FourierObservable;

/// Covariances one period apart, estimated on common random numbers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereCertificate {
    pub t0: f64,
    pub cov_t0: Complex64,
    pub cov_t0_plus_period: Complex64,
    pub stderr: f64,
    pub difference: f64,
}

/// `cov(t0)` and `cov(t0 + 2 pi)` from the same invariant samples. Every
/// orbit closes after time `2 pi`, so the two agree up to rounding.
pub fn sphere_no_decay_certificate(
    f1: &FourierObservable,
    f2: &FourierObservable,
    t0: f64,
    samples: usize,
    seed: u64,
) -> Result<SphereCertificate> {
    if !(t0 >= 0.0) {
        return Err(ShearError::NegativeTime(t0));
    }
    let flow = FlowSpec::SphereGeodesic;
    let (a, stderr) = mc_cov(&flow, f1, f2, t0, samples, seed)?;
    let (b, _) = mc_cov(&flow, f1, f2, t0 + TAU, samples, seed)?;
    Ok(SphereCertificate { t0, cov_t0: a, cov_t0_plus_period: b, stderr, difference: (a - b).norm() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::BaseProfile;

    fn phase_character() -> FourierObservable {
        FourierObservable::new(2, 1)
            .with_term([1], BaseProfile::Trig { coefficient: Complex64::new(1.0, 0.0), wave: vec![0.0, 1.0] })
            .unwrap()
    }

    #[test]
    fn one_period_apart() {
        let f = phase_character();
        let c = sphere_no_decay_certificate(&f, &f, 1.0, 2000, 5).unwrap();
        assert!(c.difference < 1e-9);
    }

    #[test]
    fn phase_rotation_keeps_modulus() {
        // f o g_t = exp(i t) f for the phase character
        let f = phase_character();
        for t in [0.0, 0.7, 3.0, 10.0] {
            let (v, _) = mc_cov(&FlowSpec::SphereGeodesic, &f, &f, t, 1000, 2).unwrap();
            assert!((v - Complex64::from_polar(1.0, t)).norm() < 1e-12, "t = {t}: {v}");
        }
    }

    #[test]
    fn negative_start_rejected() {
        let f = phase_character();
        assert!(sphere_no_decay_certificate(&f, &f, -1.0, 200, 0).is_err());
    }
}
