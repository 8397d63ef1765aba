//! Velocity fields `v : M -> R^d` generating fiberwise translations.

use std::f64::consts::PI;

use crate::error::{Result, ShearError};
use crate::flows::geometry::sphere_unit_vector;

/// Velocity of the disk billiard in its action-angle chart:
/// `v(theta) = 2 cos(theta) (1, 1/2 - theta/pi)` for `|theta| < pi/2`.
pub fn billiard_chart_velocity(theta: f64) -> Result<[f64; 2]> {
    if !(theta.abs() < PI / 2.0) {
        return Err(ShearError::OutOfDomain(format!("billiard angle {theta} outside (-pi/2, pi/2)")));
    }
    Ok(billiard_velocity_unchecked(theta))
}

#[inline]
fn billiard_velocity_unchecked(theta: f64) -> [f64; 2] {
    let c = 2.0 * theta.cos();
    [c, c * (0.5 - theta / PI)]
}

/// C^1 bump `prod (1 - r_i^2)^2` with `r_i = |x_i - c_i| / w`, zero outside.
#[derive(Clone, Debug, PartialEq)]
pub struct Bump {
    pub center: Vec<f64>,
    pub half_width: f64,
}

impl Bump {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut out = 1.0;
        for (xi, ci) in x.iter().zip(&self.center) {
            let r = (xi - ci) / self.half_width;
            if r.abs() >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - r * r;
            out *= s * s;
        }
        out
    }
}

/// Multilinear interpolant of node values on a uniform grid over a box.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    lower: Vec<f64>,
    upper: Vec<f64>,
    shape: Vec<usize>,
    out_dim: usize,
    values: Vec<f64>,
}

impl GridField {
    /// `values` is node-major (last axis fastest), `out_dim` entries per node.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, shape: Vec<usize>, out_dim: usize, values: Vec<f64>) -> Result<Self> {
        let nodes: usize = shape.iter().product();
        if lower.len() != shape.len() || upper.len() != shape.len() || shape.iter().any(|&s| s < 2) {
            return Err(ShearError::InvalidParameter(
                "grid field needs >= 2 nodes per axis and matching bounds".into(),
            ));
        }
        if values.len() != nodes * out_dim || out_dim == 0 {
            return Err(ShearError::InvalidParameter(format!(
                "grid field expects {} values, got {}",
                nodes * out_dim,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ShearError::InvalidParameter("grid field values must be finite".into()));
        }
        Ok(GridField { lower, upper, shape, out_dim, values })
    }

    /// Sample a closure on the grid nodes.
    pub fn sample(
        lower: Vec<f64>,
        upper: Vec<f64>,
        shape: Vec<usize>,
        out_dim: usize,
        f: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Result<Self> {
        let n = shape.len();
        let total: usize = shape.iter().product();
        let mut values = Vec::with_capacity(total * out_dim);
        let mut idx = vec![0usize; n];
        let mut x = vec![0.0; n];
        for _ in 0..total {
            for d in 0..n {
                x[d] = lower[d] + (upper[d] - lower[d]) * idx[d] as f64 / (shape[d] - 1) as f64;
            }
            values.extend(f(&x));
            for d in (0..n).rev() {
                idx[d] += 1;
                if idx[d] < shape[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        Self::new(lower, upper, shape, out_dim, values)
    }

    pub fn in_dim(&self) -> usize {
        self.shape.len()
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.shape.len();
        out.iter_mut().for_each(|o| *o = 0.0);
        // cell index and local coordinate per axis; points outside are clamped
        let mut base = [0usize; 8];
        let mut frac = [0.0f64; 8];
        assert!(n <= 8, "grid fields support at most 8 axes");
        for d in 0..n {
            let cells = (self.shape[d] - 1) as f64;
            let u = ((x[d] - self.lower[d]) / (self.upper[d] - self.lower[d]) * cells).clamp(0.0, cells);
            let i = (u.floor() as usize).min(self.shape[d] - 2);
            base[d] = i;
            frac[d] = u - i as f64;
        }
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut flat = 0usize;
            for d in 0..n {
                let bit = (corner >> d) & 1;
                w *= if bit == 1 { frac[d] } else { 1.0 - frac[d] };
                flat = flat * self.shape[d] + base[d] + bit;
            }
            if w == 0.0 {
                continue;
            }
            let vals = &self.values[flat * self.out_dim..(flat + 1) * self.out_dim];
            for (o, v) in out.iter_mut().zip(vals) {
                *o += w * v;
            }
        }
    }
}

/// A velocity field on a base chart.
#[derive(Clone, Debug, PartialEq)]
pub enum VelocityField {
    /// The same vector everywhere (no shear).
    Constant(Vec<f64>),
    /// `v(x) = A x + b`, with `A` given row by row (`d` rows of length `n`).
    Affine {
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
    },
    /// Unit direction on the circle chart: `(cos theta, sin theta)`.
    UnitCircle,
    /// Unit direction on the sphere chart.
    UnitSphere,
    /// Disk billiard chart velocity.
    Billiard,
    /// Keplerian angular speed `omega(r) = r^(-3/2)` on a radial chart.
    Kepler,
    /// `base(x) + amount * x_1 * chi(x) * direction`, with `chi = 1` when
    /// no bump is given.
    Perturbed {
        base: Box<VelocityField>,
        amount: f64,
        direction: Vec<f64>,
        bump: Option<Bump>,
    },
    Grid(GridField),
}

impl VelocityField {
    /// Identity field `v(x) = x` in `n` dimensions.
    pub fn identity(n: usize) -> Self {
        let matrix = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        VelocityField::Affine { matrix, offset: vec![0.0; n] }
    }

    /// Chart dimension the field expects, if fixed.
    pub fn in_dim(&self) -> Option<usize> {
        match self {
            VelocityField::Constant(_) => None,
            VelocityField::Affine { matrix, .. } => matrix.first().map(Vec::len),
            VelocityField::UnitCircle | VelocityField::Billiard | VelocityField::Kepler => Some(1),
            VelocityField::UnitSphere => Some(2),
            VelocityField::Perturbed { base, .. } => base.in_dim(),
            VelocityField::Grid(g) => Some(g.in_dim()),
        }
    }

    /// Fiber dimension `d`.
    pub fn out_dim(&self) -> usize {
        match self {
            VelocityField::Constant(v) => v.len(),
            VelocityField::Affine { offset, .. } => offset.len(),
            VelocityField::UnitCircle | VelocityField::Billiard => 2,
            VelocityField::UnitSphere => 3,
            VelocityField::Kepler => 1,
            VelocityField::Perturbed { base, .. } => base.out_dim(),
            VelocityField::Grid(g) => g.out_dim,
        }
    }

    /// Structural validation: consistent shapes, finite parameters.
    pub fn validate(&self) -> Result<()> {
        match self {
            VelocityField::Constant(v) if v.is_empty() || v.iter().any(|c| !c.is_finite()) => {
                Err(ShearError::InvalidParameter("constant velocity must be a finite, non-empty vector".into()))
            }
            VelocityField::Affine { matrix, offset } => {
                let n = matrix.first().map_or(0, Vec::len);
                if matrix.len() != offset.len() || offset.is_empty() || matrix.iter().any(|r| r.len() != n) {
                    return Err(ShearError::InvalidParameter(
                        "affine velocity needs d rows of equal length and d offsets".into(),
                    ));
                }
                Ok(())
            }
            VelocityField::Perturbed { base, direction, amount, bump } => {
                base.validate()?;
                if direction.len() != base.out_dim() || !amount.is_finite() {
                    return Err(ShearError::InvalidParameter(
                        "perturbation direction must live in the fiber dimension".into(),
                    ));
                }
                if let Some(b) = bump {
                    if !(b.half_width > 0.0) {
                        return Err(ShearError::InvalidParameter("bump half-width must be positive".into()));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Evaluate into `out` (length `out_dim()`).
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            VelocityField::Constant(v) => out.copy_from_slice(v),
            VelocityField::Affine { matrix, offset } => {
                for ((o, row), b) in out.iter_mut().zip(matrix).zip(offset) {
                    *o = b + row.iter().zip(x).map(|(a, xi)| a * xi).sum::<f64>();
                }
            }
            VelocityField::UnitCircle => {
                let (s, c) = x[0].sin_cos();
                out[0] = c;
                out[1] = s;
            }
            VelocityField::UnitSphere => out.copy_from_slice(&sphere_unit_vector(x[0], x[1])),
            VelocityField::Billiard => out.copy_from_slice(&billiard_velocity_unchecked(x[0])),
            VelocityField::Kepler => out[0] = x[0].powf(-1.5),
            VelocityField::Perturbed { base, amount, direction, bump } => {
                base.eval_into(x, out);
                let chi = bump.as_ref().map_or(1.0, |b| b.eval(x));
                let scale = amount * x[0] * chi;
                for (o, e) in out.iter_mut().zip(direction) {
                    *o += scale * e;
                }
            }
            VelocityField::Grid(g) => g.eval_into(x, out),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.out_dim()];
        self.eval_into(x, &mut out);
        out
    }

    /// `<xi, v(x)>` using a caller-provided scratch buffer.
    #[inline]
    pub fn pair(&self, xi: &[f64], x: &[f64], scratch: &mut [f64]) -> f64 {
        self.eval_into(x, scratch);
        xi.iter().zip(scratch.iter()).map(|(a, b)| a * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn billiard_velocity_values() {
        let v = billiard_chart_velocity(0.0).unwrap();
        assert_eq!(v, [2.0, 1.0]);
        let v = billiard_chart_velocity(PI / 4.0).unwrap();
        assert!((v[0] - std::f64::consts::SQRT_2).abs() < 1e-8);
        assert!((v[1] - 0.353_553_39).abs() < 1e-8);
        let v = billiard_chart_velocity(PI / 2.0 - 1e-9).unwrap();
        assert!(v[0].abs() < 1e-8 && v[1].abs() < 1e-8);
    }

    #[test]
    fn billiard_velocity_rejects_closed_endpoints() {
        assert!(billiard_chart_velocity(PI / 2.0).is_err());
        assert!(billiard_chart_velocity(-2.0).is_err());
        assert!(billiard_chart_velocity(f64::NAN).is_err());
    }

    #[test]
    fn grid_field_reproduces_affine_data() {
        let g = GridField::sample(vec![0.0, 0.0], vec![1.0, 2.0], vec![5, 9], 2, |x| {
            vec![1.0 + 2.0 * x[0] - x[1], 0.5 * x[1]]
        })
        .unwrap();
        let field = VelocityField::Grid(g);
        let v = field.eval(&[0.37, 1.21]);
        assert!((v[0] - (1.0 + 0.74 - 1.21)).abs() < 1e-12);
        assert!((v[1] - 0.605).abs() < 1e-12);
    }

    #[test]
    fn perturbation_adds_along_direction() {
        let field = VelocityField::Perturbed {
            base: Box::new(VelocityField::Affine {
                matrix: vec![vec![1.0, 0.0], vec![0.0, 0.0]],
                offset: vec![0.0, 0.0],
            }),
            amount: 0.5,
            direction: vec![0.0, 1.0],
            bump: None,
        };
        field.validate().unwrap();
        assert_eq!(field.eval(&[0.4, 0.9]), vec![0.4, 0.2]);
    }

    #[test]
    fn bump_is_compactly_supported() {
        let b = Bump { center: vec![0.5], half_width: 0.25 };
        assert_eq!(b.eval(&[0.5]), 1.0);
        assert_eq!(b.eval(&[0.75]), 0.0);
        assert!(b.eval(&[0.6]) > 0.0);
    }
}
