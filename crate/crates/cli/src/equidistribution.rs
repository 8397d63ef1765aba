//! Particle clouds for the ring and wavefront scenarios.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use shearlab::rng::{stream, CHUNK};
use shearlab::{ShearError, VelocityField};

/// Number of angular Fourier modes reported per frame.
pub const MODES: usize = 8;

/// Boxes per axis in the discrepancy family.
pub const BOXES: usize = 32;

/// An annulus of particles on one angular arc.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cloud {
    pub r0: f64,
    pub r1: f64,
    /// Arc length in turns.
    pub arc: f64,
    pub particles: usize,
}

/// A particle: radius and initial angle in turns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Particle {
    pub r: f64,
    pub theta0: f64,
}

impl Cloud {
    pub fn validate(&self) -> Result<(), ShearError> {
        if !(self.r0 > 0.0) || !self.r0.is_finite() {
            return Err(ShearError::InvalidParameter(format!("inner radius r0 = {} must be positive", self.r0)));
        }
        if !(self.r1 >= self.r0) || !self.r1.is_finite() {
            return Err(ShearError::InvalidParameter(format!("outer radius r1 = {} must be at least r0", self.r1)));
        }
        if !(self.arc > 0.0 && self.arc <= 1.0) {
            return Err(ShearError::InvalidParameter(format!("arc = {} must lie in (0, 1] turns", self.arc)));
        }
        if self.particles == 0 {
            return Err(ShearError::InvalidParameter("the cloud needs at least one particle".into()));
        }
        Ok(())
    }

    /// Uniform radii on `[r0, r1]` and angles on `[0, arc)`, drawn in
    /// fixed-size chunks from per-chunk streams.
    pub fn sample(&self, seed: u64) -> Result<Vec<Particle>, ShearError> {
        self.validate()?;
        let chunks = self.particles.div_ceil(CHUNK);
        Ok((0..chunks)
            .into_par_iter()
            .flat_map_iter(|c| {
                let mut rng = stream(seed, c as u64);
                let len = CHUNK.min(self.particles - c * CHUNK);
                (0..len)
                    .map(|_| Particle {
                        r: self.r0 + (self.r1 - self.r0) * rng.gen::<f64>(),
                        theta0: self.arc * rng.gen::<f64>(),
                    })
                    .collect::<Vec<_>>()
            })
            .collect())
    }
}

/// Angle in turns at time `t` under the Keplerian speed `r^(-3/2)`.
pub fn angle_at(p: &Particle, t: f64) -> f64 {
    let omega = VelocityField::Kepler.eval(&[p.r])[0];
    (p.theta0 + t * omega).rem_euclid(1.0)
}

/// Magnitudes of the angular modes `1..=MODES` of the empirical angle
/// distribution, computed in each of `bins` equal radial bins and averaged
/// over the non-empty bins.
pub fn angular_modes(cloud: &Cloud, particles: &[Particle], t: f64, bins: usize) -> [f64; MODES] {
    let bins = if cloud.r1 > cloud.r0 { bins.max(1) } else { 1 };
    let width = cloud.r1 - cloud.r0;
    let mut sums = vec![[Complex64::new(0.0, 0.0); MODES]; bins];
    let mut counts = vec![0usize; bins];
    for p in particles {
        let b = if width > 0.0 { (((p.r - cloud.r0) / width * bins as f64) as usize).min(bins - 1) } else { 0 };
        let theta = angle_at(p, t);
        let base = Complex64::from_polar(1.0, TAU * theta);
        let mut z = base;
        for s in sums[b].iter_mut() {
            *s += z;
            z *= base;
        }
        counts[b] += 1;
    }
    let mut out = [0.0; MODES];
    let filled = counts.iter().filter(|c| **c > 0).count() as f64;
    for (s, c) in sums.iter().zip(&counts).filter(|(_, c)| **c > 0) {
        for m in 0..MODES {
            out[m] += s[m].norm() / *c as f64 / filled;
        }
    }
    out
}

/// Positions `(t cos theta_k mod 1, t sin theta_k mod 1)` for `directions`
/// equally spaced angles.
pub fn wavefront(directions: usize, t: f64) -> Vec<[f64; 2]> {
    (0..directions)
        .map(|k| {
            let theta = TAU * k as f64 / directions as f64;
            [(t * theta.cos()).rem_euclid(1.0), (t * theta.sin()).rem_euclid(1.0)]
        })
        .collect()
}

/// Star discrepancy over the anchored boxes `[0, a/32) x [0, b/32)`,
/// `a, b = 1..=32`.
pub fn box_discrepancy(points: &[[f64; 2]]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let cell = |x: f64| ((x * BOXES as f64) as usize).min(BOXES - 1);
    let mut hist = [[0u64; BOXES]; BOXES];
    for p in points {
        hist[cell(p[0])][cell(p[1])] += 1;
    }
    // prefix[a][b] = points in the first a columns and b rows
    let mut prefix = [[0u64; BOXES + 1]; BOXES + 1];
    for a in 0..BOXES {
        for b in 0..BOXES {
            prefix[a + 1][b + 1] = hist[a][b] + prefix[a][b + 1] + prefix[a + 1][b] - prefix[a][b];
        }
    }
    let n = points.len() as f64;
    let cells = (BOXES * BOXES) as f64;
    let mut worst: f64 = 0.0;
    for (a, row) in prefix.iter().enumerate().skip(1) {
        for (b, count) in row.iter().enumerate().skip(1) {
            worst = worst.max((*count as f64 / n - (a * b) as f64 / cells).abs());
        }
    }
    worst
}
