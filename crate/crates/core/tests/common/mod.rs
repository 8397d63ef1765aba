#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shearlab::{BaseProfile, FourierObservable, FrequencyVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random pure T^2 observable with `terms` distinct frequencies in `[-k, k]^2`.
pub fn random_pure(rng: &mut impl Rng, terms: usize, k: i64) -> FourierObservable {
    let mut obs = FourierObservable::new(0, 2);
    let terms = terms.min((2 * k as usize + 1).pow(2));
    while obs.len() < terms {
        let xi = FrequencyVector(vec![rng.gen_range(-k..=k), rng.gen_range(-k..=k)]);
        if obs.term(&xi).is_none() {
            obs.insert(xi, BaseProfile::Constant(complex(rng))).unwrap();
        }
    }
    obs
}

/// Random observable over a chart of dimension `n` with fiber `Z^d`
/// frequencies in `[-k, k]^d` and smooth profiles.
pub fn random_smooth(rng: &mut impl Rng, n: usize, d: usize, terms: usize, k: i64) -> FourierObservable {
    let mut obs = FourierObservable::new(n, d);
    let terms = terms.min((2 * k as usize + 1).pow(d as u32));
    while obs.len() < terms {
        let xi = FrequencyVector((0..d).map(|_| rng.gen_range(-k..=k)).collect());
        if obs.term(&xi).is_some() {
            continue;
        }
        let profile = match rng.gen_range(0..3) {
            0 => BaseProfile::Constant(complex(rng)),
            1 => BaseProfile::Trig {
                coefficient: complex(rng),
                wave: (0..n).map(|_| rng.gen_range(-2..=2) as f64).collect(),
            },
            _ => BaseProfile::Sum(vec![
                BaseProfile::Constant(complex(rng)),
                BaseProfile::Trig { coefficient: complex(rng), wave: (0..n).map(|_| 1.0).collect() },
            ]),
        };
        obs.insert(xi, profile).unwrap();
    }
    obs
}

pub fn single(n: usize, xi: Vec<i64>) -> FourierObservable {
    FourierObservable::new(n, xi.len()).with_term(FrequencyVector(xi), BaseProfile::constant(1.0, 0.0)).unwrap()
}
