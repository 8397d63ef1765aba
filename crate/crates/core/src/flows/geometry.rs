//! Phase-space coordinates: torus fibers, base charts and base densities.

use std::f64::consts::{PI, TAU};

use crate::error::{dim_err, Result, ShearError};
use crate::quadrature::{composite_gauss_legendre, periodic_trapezoid, PANEL_ORDER};

/// Reduce a real number into `[0, 1)`.
#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance between two points of R/Z.
#[inline]
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = wrap_unit(a - b);
    d.min(1.0 - d)
}

/// A point of the fiber torus (R/Z)^d.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusVector(Vec<f64>);

impl TorusVector {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        let mut coords = coords.into();
        coords.iter_mut().for_each(|c| *c = wrap_unit(*c));
        TorusVector(coords)
    }

    pub fn zero(dim: usize) -> Self {
        TorusVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// `y + t * v`, reduced mod 1 coordinatewise.
    pub fn translate(&self, velocity: &[f64], t: f64) -> Self {
        debug_assert_eq!(velocity.len(), self.0.len());
        TorusVector(self.0.iter().zip(velocity).map(|(y, v)| wrap_unit(y + wrap_unit(t * v))).collect())
    }

    /// Sup-norm distance in the flat torus metric.
    pub fn distance(&self, other: &TorusVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| circle_distance(*a, *b)).fold(0.0, f64::max)
    }
}

/// Chart coordinates of a point of the base manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseChartPoint(Vec<f64>);

impl BaseChartPoint {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Build a point without bounds checks; callers validate through
    /// [`BaseManifold::point`].
    pub(crate) fn raw(coords: Vec<f64>) -> Self {
        BaseChartPoint(coords)
    }
}

/// The base manifold of a compatible flow, described by one chart.
#[derive(Clone, Debug, PartialEq)]
pub enum BaseManifold {
    /// Zero-dimensional base (pure torus systems).
    Point,
    /// Rectangle `prod [lower_i, upper_i]` in R^n with Lebesgue measure.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Unit circle, chart coordinate the angle in `[0, 2 pi)`, arc length.
    Circle,
    /// Unit 2-sphere, chart `(colatitude in [0, pi], longitude in [0, 2 pi))`, area.
    Sphere,
    /// Finite sample space `{0, .., k-1}` with counting measure.
    Atoms(usize),
}

impl BaseManifold {
    pub fn interval(lower: f64, upper: f64) -> Result<Self> {
        Self::rectangle(vec![lower], vec![upper])
    }

    pub fn rectangle(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(ShearError::InvalidParameter("box chart needs matching, non-empty bound lists".into()));
        }
        if lower.iter().zip(&upper).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(ShearError::InvalidParameter(format!(
                "box chart bounds must satisfy lower < upper: {lower:?} / {upper:?}"
            )));
        }
        Ok(BaseManifold::Box { lower, upper })
    }

    pub fn dim(&self) -> usize {
        match self {
            BaseManifold::Point => 0,
            BaseManifold::Box { lower, .. } => lower.len(),
            BaseManifold::Circle | BaseManifold::Atoms(_) => 1,
            BaseManifold::Sphere => 2,
        }
    }

    /// Total reference volume.
    pub fn volume(&self) -> f64 {
        match self {
            BaseManifold::Point => 1.0,
            BaseManifold::Box { lower, upper } => lower.iter().zip(upper).map(|(a, b)| b - a).product(),
            BaseManifold::Circle => TAU,
            BaseManifold::Sphere => 4.0 * PI,
            BaseManifold::Atoms(k) => *k as f64,
        }
    }

    /// Chart bounds per coordinate, used for grids and finite differences.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        match self {
            BaseManifold::Point => vec![],
            BaseManifold::Box { lower, upper } => lower.iter().copied().zip(upper.iter().copied()).collect(),
            BaseManifold::Circle => vec![(0.0, TAU)],
            BaseManifold::Sphere => vec![(0.0, PI), (0.0, TAU)],
            BaseManifold::Atoms(k) => vec![(0.0, *k as f64)],
        }
    }

    /// Validate chart coordinates and build a point. Periodic coordinates
    /// are reduced into their fundamental interval.
    pub fn point(&self, coords: impl Into<Vec<f64>>) -> Result<BaseChartPoint> {
        let mut coords = coords.into();
        if coords.len() != self.dim() {
            return Err(dim_err(format!("{} base coordinates", self.dim()), coords.len()));
        }
        match self {
            BaseManifold::Point => {}
            BaseManifold::Box { lower, upper } => {
                for ((c, a), b) in coords.iter().zip(lower).zip(upper) {
                    if !(c >= a && c <= b) {
                        return Err(ShearError::OutOfDomain(format!("base coordinate {c} outside [{a}, {b}]")));
                    }
                }
            }
            BaseManifold::Circle => coords[0] = coords[0].rem_euclid(TAU),
            BaseManifold::Sphere => {
                if !(0.0..=PI).contains(&coords[0]) {
                    return Err(ShearError::OutOfDomain(format!("colatitude {} outside [0, pi]", coords[0])));
                }
                coords[1] = coords[1].rem_euclid(TAU);
            }
            BaseManifold::Atoms(k) => {
                let c = coords[0];
                if c.fract() != 0.0 || c < 0.0 || c >= *k as f64 {
                    return Err(ShearError::OutOfDomain(format!("atom index {c} not in 0..{k}")));
                }
            }
        }
        Ok(BaseChartPoint(coords))
    }

    /// Quadrature nodes (flattened chart coordinates) and reference-volume
    /// weights. `resolution` is panels per interval coordinate, nodes on the
    /// circle, or colatitude panels on the sphere (with `resolution_aux`
    /// longitude nodes).
    pub fn quadrature(&self, resolution: usize, resolution_aux: usize) -> (Vec<f64>, Vec<f64>) {
        match self {
            BaseManifold::Point => (vec![], vec![1.0]),
            BaseManifold::Box { lower, upper } => {
                let rules: Vec<_> = lower
                    .iter()
                    .zip(upper)
                    .map(|(a, b)| composite_gauss_legendre(*a, *b, resolution, PANEL_ORDER))
                    .collect();
                tensor(&rules)
            }
            BaseManifold::Circle => {
                let rule = periodic_trapezoid(TAU, resolution);
                (rule.iter().map(|r| r.0).collect(), rule.iter().map(|r| r.1).collect())
            }
            BaseManifold::Sphere => {
                let colat = composite_gauss_legendre(0.0, PI, resolution, PANEL_ORDER);
                let lon = periodic_trapezoid(TAU, resolution_aux.max(1));
                let mut nodes = Vec::with_capacity(colat.len() * lon.len() * 2);
                let mut weights = Vec::with_capacity(colat.len() * lon.len());
                for (th, wt) in &colat {
                    let s = th.sin();
                    for (ph, wp) in &lon {
                        nodes.push(*th);
                        nodes.push(*ph);
                        weights.push(wt * wp * s);
                    }
                }
                (nodes, weights)
            }
            BaseManifold::Atoms(k) => ((0..*k).map(|i| i as f64).collect(), vec![1.0; *k]),
        }
    }
}

fn tensor(rules: &[Vec<(f64, f64)>]) -> (Vec<f64>, Vec<f64>) {
    let n = rules.len();
    let total: usize = rules.iter().map(Vec::len).product();
    let mut nodes = Vec::with_capacity(total * n);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let mut w = 1.0;
        for (d, i) in idx.iter().enumerate() {
            let (x, wi) = rules[d][*i];
            nodes.push(x);
            w *= wi;
        }
        weights.push(w);
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < rules[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
    (nodes, weights)
}

/// Unit vector of R^3 from sphere chart coordinates.
#[inline]
pub fn sphere_unit_vector(colatitude: f64, longitude: f64) -> [f64; 3] {
    let (st, ct) = colatitude.sin_cos();
    let (sp, cp) = longitude.sin_cos();
    [st * cp, st * sp, ct]
}

/// Sphere chart coordinates of a unit vector.
#[inline]
pub fn sphere_chart(u: [f64; 3]) -> [f64; 2] {
    let colat = u[2].clamp(-1.0, 1.0).acos();
    let lon = u[1].atan2(u[0]).rem_euclid(TAU);
    [colat, lon]
}

/// Density of the base marginal of a compatible measure with respect to
/// the reference volume of the chart.
#[derive(Clone, Debug, PartialEq)]
pub enum BaseDensity {
    /// Normalized reference volume.
    Uniform,
    /// `cos(theta) / 2` on `(-pi/2, pi/2)`: the invariant angle law of the
    /// disk billiard chart.
    HalfCosine,
    /// `(1 + slope * u(x)) / volume`, with `u` a mean-zero C^1 function with
    /// values in [-1, 1]: the first coordinate rescaled to [-1, 1] on boxes,
    /// `cos` of the (colatitude) angle on circle and sphere.
    Tilted { slope: f64 },
}

impl BaseDensity {
    pub fn eval(&self, manifold: &BaseManifold, x: &[f64]) -> f64 {
        match self {
            BaseDensity::Uniform => 1.0 / manifold.volume(),
            BaseDensity::HalfCosine => 0.5 * x[0].cos(),
            BaseDensity::Tilted { slope } => (1.0 + slope * tilt_shape(manifold, x)) / manifold.volume(),
        }
    }

    /// Upper bound of the density, used by rejection sampling.
    pub fn sup(&self, manifold: &BaseManifold) -> f64 {
        match self {
            BaseDensity::Uniform => 1.0 / manifold.volume(),
            BaseDensity::HalfCosine => 0.5,
            BaseDensity::Tilted { slope } => (1.0 + slope.abs()) / manifold.volume(),
        }
    }

    /// Check the density is nonnegative and integrates to one over the chart.
    pub fn validate(&self, manifold: &BaseManifold) -> Result<()> {
        match (self, manifold) {
            (BaseDensity::HalfCosine, BaseManifold::Box { lower, upper })
                if lower.len() == 1 && (lower[0] + PI / 2.0).abs() < 1e-12 && (upper[0] - PI / 2.0).abs() < 1e-12 => {}
            (BaseDensity::HalfCosine, _) => {
                return Err(ShearError::InvalidParameter(
                    "the half-cosine density lives on the chart (-pi/2, pi/2)".into(),
                ))
            }
            (BaseDensity::Tilted { slope }, _) if !(slope.abs() < 1.0) => {
                return Err(ShearError::InvalidParameter(format!(
                    "tilt slope {slope} must satisfy |slope| < 1 for a positive density"
                )))
            }
            (_, BaseManifold::Atoms(_)) | (_, BaseManifold::Point) => return Ok(()),
            _ => {}
        }
        let (nodes, weights) = manifold.quadrature(32, 64);
        let n = manifold.dim();
        let integral: f64 =
            weights.iter().enumerate().map(|(i, w)| w * self.eval(manifold, &nodes[i * n..(i + 1) * n])).sum();
        if (integral - 1.0).abs() > 1e-6 {
            return Err(ShearError::Unnormalizable { integral });
        }
        Ok(())
    }
}

fn tilt_shape(manifold: &BaseManifold, x: &[f64]) -> f64 {
    match manifold {
        BaseManifold::Box { lower, upper } => 2.0 * (x[0] - lower[0]) / (upper[0] - lower[0]) - 1.0,
        BaseManifold::Circle | BaseManifold::Sphere => x[0].cos(),
        BaseManifold::Point | BaseManifold::Atoms(_) => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_keeps_unit_interval() {
        for x in [-3.25, -1e-18, 0.0, 0.999_999_999_999_999_9, 1.0, 7.5, 1e12 + 0.25] {
            let w = wrap_unit(x);
            assert!((0.0..1.0).contains(&w), "{x} -> {w}");
        }
        assert_eq!(wrap_unit(-0.25), 0.75);
    }

    #[test]
    fn densities_normalize() {
        let billiard = BaseManifold::interval(-PI / 2.0, PI / 2.0).unwrap();
        BaseDensity::HalfCosine.validate(&billiard).unwrap();
        BaseDensity::Uniform.validate(&billiard).unwrap();
        for m in [BaseManifold::Circle, BaseManifold::Sphere, BaseManifold::interval(1.0, 2.0).unwrap()] {
            BaseDensity::Uniform.validate(&m).unwrap();
            BaseDensity::Tilted { slope: 0.7 }.validate(&m).unwrap();
        }
    }

    #[test]
    fn invalid_densities_are_rejected() {
        let unit = BaseManifold::interval(0.0, 1.0).unwrap();
        assert!(BaseDensity::HalfCosine.validate(&unit).is_err());
        assert!(BaseDensity::Tilted { slope: 1.5 }.validate(&unit).is_err());
    }

    #[test]
    fn chart_point_validation() {
        let unit = BaseManifold::interval(0.0, 1.0).unwrap();
        assert!(unit.point(vec![1.5]).is_err());
        assert!(unit.point(vec![0.5, 0.5]).is_err());
        let p = BaseManifold::Circle.point(vec![-0.5]).unwrap();
        assert!((p.coords()[0] - (TAU - 0.5)).abs() < 1e-15);
        assert!(BaseManifold::Sphere.point(vec![4.0, 0.0]).is_err());
    }

    #[test]
    #[allow(clippy::approx_constant)] // 1.5707 sits just short of the pole on purpose
    fn sphere_chart_round_trip() {
        for (th, ph) in [(0.3, 1.0), (2.0, 5.5), (1.5707, 3.0)] {
            let [a, b] = sphere_chart(sphere_unit_vector(th, ph));
            assert!((a - th).abs() < 1e-12 && (b - ph).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_quadrature_has_area_four_pi() {
        let (_, w) = BaseManifold::Sphere.quadrature(4, 8);
        assert!((w.iter().sum::<f64>() - 4.0 * PI).abs() < 1e-12);
    }
}
