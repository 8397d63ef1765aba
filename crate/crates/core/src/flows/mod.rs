//! Phase spaces, invariant measures and time evolution.
//!
//! Every system is a bundle `M x F` over a base chart `M`; the flow leaves
//! the base coordinate fixed and moves the fiber. Torus fibers use the
//! integer frequency convention: characters are `exp(2 pi i <xi, y>)` with
//! `xi` in Z^d and `y` in (R/Z)^d.

mod geometry;
mod sampling;
mod suspension;
mod velocity;

use std::f64::consts::{FRAC_PI_2, TAU};
use std::sync::OnceLock;

pub use geometry::{
    circle_distance, sphere_chart, sphere_unit_vector, wrap_unit, BaseChartPoint, BaseDensity, BaseManifold,
    TorusVector,
};
pub use sampling::sample_invariant;
pub use suspension::{suspension_evolve, BaseMapSpec, Mark, SuspensionState};
pub use velocity::{billiard_chart_velocity, Bump, GridField, VelocityField};

use crate::counterexamples::PAdicInteger;
use crate::error::{dim_err, Result, ShearError};

/// Extra fiber state carried by systems whose fiber is not a plain torus.
#[derive(Clone, Debug, PartialEq)]
pub enum FiberExtra {
    None,
    /// Point of the suspension base space `A`.
    Mark(Mark),
    /// p-adic fiber coordinate.
    PAdic(PAdicInteger),
}

/// A point `(x, y)` of the phase space.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub base: BaseChartPoint,
    pub fiber: TorusVector,
    pub extra: FiberExtra,
}

impl PhasePoint {
    pub fn new(base: BaseChartPoint, fiber: TorusVector) -> Self {
        PhasePoint { base, fiber, extra: FiberExtra::None }
    }

    /// A point with an empty base (pure torus systems).
    pub fn on_torus(fiber: impl Into<Vec<f64>>) -> Self {
        PhasePoint::new(BaseChartPoint::raw(vec![]), TorusVector::new(fiber))
    }
}

/// Which parabolic matrix acts on T^2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TransvectionVariant {
    /// Rows `(1, 0), (1, 1)`: `(x, y) -> (x, x + y)`, `x` invariant.
    #[default]
    Lower,
    /// Rows `(1, 1), (0, 1)`: `(x, y) -> (x + y, y)`, `y` invariant.
    Upper,
}

impl TransvectionVariant {
    /// Index of the invariant coordinate.
    pub fn invariant_axis(self) -> usize {
        match self {
            TransvectionVariant::Lower => 0,
            TransvectionVariant::Upper => 1,
        }
    }

    /// Action of the transpose power on a frequency: `(T^*)^n xi`.
    pub fn dual_power(self, xi: [i64; 2], n: i64) -> [i64; 2] {
        match self {
            TransvectionVariant::Lower => [xi[0] + n * xi[1], xi[1]],
            TransvectionVariant::Upper => [xi[0], xi[1] + n * xi[0]],
        }
    }
}

/// A compatible flow `(x, y) -> (x, y + t v(x))` with base law `density`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompatibleFlow {
    pub manifold: BaseManifold,
    pub velocity: VelocityField,
    pub density: BaseDensity,
}

impl CompatibleFlow {
    pub fn new(manifold: BaseManifold, velocity: VelocityField, density: BaseDensity) -> Result<Self> {
        velocity.validate()?;
        if let Some(n) = velocity.in_dim() {
            if n != manifold.dim() {
                return Err(dim_err(
                    format!("velocity on a {}-dimensional chart", manifold.dim()),
                    format!("{n}-dimensional input"),
                ));
            }
        }
        if let VelocityField::Grid(_) = velocity {
            if !matches!(manifold, BaseManifold::Box { .. }) {
                return Err(ShearError::InvalidParameter("grid velocities need a box chart".into()));
            }
        }
        density.validate(&manifold)?;
        Ok(CompatibleFlow { manifold, velocity, density })
    }

    pub fn fiber_dim(&self) -> usize {
        self.velocity.out_dim()
    }
}

/// Suspension flow `(z, [x, s]) -> (z, g_t^{v(z)} [x, s])` over a base map.
#[derive(Clone, Debug, PartialEq)]
pub struct SuspensionFlow {
    pub base_map: BaseMapSpec,
    pub manifold: BaseManifold,
    pub speed: VelocityField,
    pub density: BaseDensity,
}

/// Translation `(x, y) -> (x, y + v(x))` on `M x Z_p` with `M` a finite
/// uniform sample space.
#[derive(Clone, Debug, PartialEq)]
pub struct PAdicFlow {
    pub p: u32,
    pub digits: usize,
    /// Shift `v(x)` for each atom `x` of `M`.
    pub shifts: Vec<PAdicInteger>,
}

/// One of the implemented systems together with its invariant measure.
#[derive(Clone, Debug, PartialEq)]
pub enum FlowSpec {
    Product(CompatibleFlow),
    Transvection(TransvectionVariant),
    /// Unit speed geodesic flow on `T^1 T^n`, `n` in {2, 3}.
    TorusGeodesic(usize),
    DiskBilliard,
    SphereGeodesic,
    Suspension(SuspensionFlow),
    PAdicTranslation(PAdicFlow),
}

impl FlowSpec {
    pub fn torus_geodesic(n: usize) -> Result<Self> {
        if !(2..=3).contains(&n) {
            return Err(ShearError::InvalidParameter(format!(
                "torus geodesic flow is implemented for n = 2, 3 (got {n})"
            )));
        }
        Ok(FlowSpec::TorusGeodesic(n))
    }

    pub fn suspension(
        base_map: BaseMapSpec,
        manifold: BaseManifold,
        speed: VelocityField,
        density: BaseDensity,
    ) -> Result<Self> {
        base_map.validate()?;
        speed.validate()?;
        if speed.out_dim() != 1 {
            return Err(ShearError::InvalidParameter("suspension speed must be scalar".into()));
        }
        if !matches!(manifold, BaseManifold::Box { .. }) {
            return Err(ShearError::InvalidParameter("suspension base must be a box chart".into()));
        }
        if let Some(n) = speed.in_dim() {
            if n != manifold.dim() {
                return Err(dim_err(manifold.dim(), n));
            }
        }
        density.validate(&manifold)?;
        // positivity on a coarse grid of the chart
        let (nodes, _) = manifold.quadrature(8, 8);
        let n = manifold.dim();
        for x in nodes.chunks(n) {
            let s = speed.eval(x)[0];
            if !(s > 0.0) {
                return Err(ShearError::InvalidParameter(format!(
                    "suspension speed must be positive, found {s} at {x:?}"
                )));
            }
        }
        Ok(FlowSpec::Suspension(SuspensionFlow { base_map, manifold, speed, density }))
    }

    pub fn padic(p: u32, digits: usize, shifts: Vec<PAdicInteger>) -> Result<Self> {
        if !crate::counterexamples::padic::is_prime(p) {
            return Err(ShearError::InvalidParameter(format!("p = {p} is not prime")));
        }
        if shifts.is_empty() || shifts.iter().any(|s| s.p() != p || s.precision() != digits) {
            return Err(ShearError::InvalidParameter("p-adic shifts must be non-empty and share (p, K)".into()));
        }
        Ok(FlowSpec::PAdicTranslation(PAdicFlow { p, digits, shifts }))
    }

    /// Short identifier used in CSV metadata.
    pub fn id(&self) -> String {
        match self {
            FlowSpec::Product(_) => "product".into(),
            FlowSpec::Transvection(TransvectionVariant::Lower) => "transvection-lower".into(),
            FlowSpec::Transvection(TransvectionVariant::Upper) => "transvection-upper".into(),
            FlowSpec::TorusGeodesic(n) => format!("torus-geodesic-{n}"),
            FlowSpec::DiskBilliard => "disk-billiard".into(),
            FlowSpec::SphereGeodesic => "sphere-geodesic".into(),
            FlowSpec::Suspension(s) => format!("suspension-{}", s.base_map.id()),
            FlowSpec::PAdicTranslation(f) => format!("padic-{}", f.p),
        }
    }

    /// `(n, d)`: base chart dimension and torus fiber dimension.
    pub fn dims(&self) -> (usize, usize) {
        match self {
            FlowSpec::Product(c) => (c.manifold.dim(), c.fiber_dim()),
            FlowSpec::Transvection(_) => (0, 2),
            FlowSpec::TorusGeodesic(n) => (n - 1, *n),
            FlowSpec::DiskBilliard => (1, 2),
            FlowSpec::SphereGeodesic => (2, 1),
            FlowSpec::Suspension(s) => (s.manifold.dim(), 1),
            FlowSpec::PAdicTranslation(_) => (1, 0),
        }
    }

    /// Base manifold of the bundle.
    pub fn manifold(&self) -> BaseManifold {
        match self {
            FlowSpec::Product(c) => c.manifold.clone(),
            FlowSpec::Suspension(s) => s.manifold.clone(),
            FlowSpec::PAdicTranslation(f) => BaseManifold::Atoms(f.shifts.len()),
            FlowSpec::Transvection(_) => BaseManifold::Point,
            other => other.compatible().expect("compatible system").manifold.clone(),
        }
    }

    /// View as a compatible translation flow on `M x T^d`, when it is one.
    ///
    /// The sphere geodesic flow is the bundle of oriented great circles:
    /// base = unit normal of the circle (uniform on S^2), fiber = phase
    /// `phi / 2 pi`, velocity the constant `1 / 2 pi`.
    pub fn compatible(&self) -> Option<&CompatibleFlow> {
        static GEODESIC_2: OnceLock<CompatibleFlow> = OnceLock::new();
        static GEODESIC_3: OnceLock<CompatibleFlow> = OnceLock::new();
        static BILLIARD: OnceLock<CompatibleFlow> = OnceLock::new();
        static SPHERE: OnceLock<CompatibleFlow> = OnceLock::new();
        match self {
            FlowSpec::Product(c) => Some(c),
            FlowSpec::TorusGeodesic(2) => Some(GEODESIC_2.get_or_init(|| CompatibleFlow {
                manifold: BaseManifold::Circle,
                velocity: VelocityField::UnitCircle,
                density: BaseDensity::Uniform,
            })),
            FlowSpec::TorusGeodesic(_) => Some(GEODESIC_3.get_or_init(|| CompatibleFlow {
                manifold: BaseManifold::Sphere,
                velocity: VelocityField::UnitSphere,
                density: BaseDensity::Uniform,
            })),
            FlowSpec::DiskBilliard => Some(BILLIARD.get_or_init(|| CompatibleFlow {
                manifold: BaseManifold::interval(-FRAC_PI_2, FRAC_PI_2).expect("valid chart"),
                velocity: VelocityField::Billiard,
                density: BaseDensity::HalfCosine,
            })),
            FlowSpec::SphereGeodesic => Some(SPHERE.get_or_init(|| CompatibleFlow {
                manifold: BaseManifold::Sphere,
                velocity: VelocityField::Constant(vec![1.0 / TAU]),
                density: BaseDensity::Uniform,
            })),
            _ => None,
        }
    }

    /// True for systems whose time parameter ranges over the integers.
    pub fn is_map(&self) -> bool {
        matches!(self, FlowSpec::Transvection(_) | FlowSpec::PAdicTranslation(_))
    }

    /// True for semi-flows (non-negative times only).
    pub fn is_semiflow(&self) -> bool {
        matches!(self, FlowSpec::Suspension(_))
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !t.is_finite() {
            return Err(ShearError::NonFiniteTime(t));
        }
        if self.is_semiflow() && t < 0.0 {
            return Err(ShearError::NegativeTime(t));
        }
        if self.is_map() && t.fract() != 0.0 {
            return Err(ShearError::NonIntegerTime(t));
        }
        Ok(())
    }

    fn check_point(&self, p: &PhasePoint) -> Result<()> {
        let (n, d) = self.dims();
        if p.base.dim() != n || p.fiber.dim() != d {
            return Err(dim_err(format!("(n, d) = ({n}, {d})"), format!("({}, {})", p.base.dim(), p.fiber.dim())));
        }
        let extra_ok = match (self, &p.extra) {
            (FlowSpec::Suspension(_), FiberExtra::Mark(_)) => true,
            (FlowSpec::PAdicTranslation(f), FiberExtra::PAdic(y)) => y.p() == f.p && y.precision() == f.digits,
            (FlowSpec::Suspension(_), _) | (FlowSpec::PAdicTranslation(_), _) => false,
            (_, FiberExtra::None) => true,
            _ => false,
        };
        if !extra_ok {
            return Err(dim_err(format!("fiber state of {}", self.id()), format!("{:?}", p.extra)));
        }
        Ok(())
    }

    /// `g_t(p)`.
    pub fn evolve(&self, p: &PhasePoint, t: f64) -> Result<PhasePoint> {
        self.check_point(p)?;
        self.check_time(t)?;
        if t == 0.0 {
            return Ok(p.clone());
        }
        let x = p.base.coords();
        match self {
            FlowSpec::Transvection(variant) => {
                let y = p.fiber.coords();
                let n = t;
                let moved = match variant {
                    TransvectionVariant::Lower => [y[0], wrap_unit(y[1] + wrap_unit(n * y[0]))],
                    TransvectionVariant::Upper => [wrap_unit(y[0] + wrap_unit(n * y[1])), y[1]],
                };
                Ok(PhasePoint { fiber: TorusVector::new(moved.to_vec()), ..p.clone() })
            }
            FlowSpec::Suspension(s) => {
                let FiberExtra::Mark(mark) = &p.extra else { unreachable!("checked above") };
                let speed = s.speed.eval(x)[0];
                let state = SuspensionState { mark: *mark, height: p.fiber.coords()[0] };
                let next = suspension_evolve(&s.base_map, speed, state, t)?;
                Ok(PhasePoint {
                    base: p.base.clone(),
                    fiber: TorusVector::new(vec![next.height]),
                    extra: FiberExtra::Mark(next.mark),
                })
            }
            FlowSpec::PAdicTranslation(f) => {
                let FiberExtra::PAdic(y) = &p.extra else { unreachable!("checked above") };
                let atom = x[0] as usize;
                let shift = f.shifts[atom].mul_int(t as i64);
                Ok(PhasePoint { extra: FiberExtra::PAdic(y.add(&shift)?), ..p.clone() })
            }
            other => {
                let v = other.compatible().expect("compatible system").velocity.eval(x);
                Ok(PhasePoint { fiber: p.fiber.translate(&v, t), ..p.clone() })
            }
        }
    }

    /// Pair a chart point with a fiber, checking dimensions and chart bounds.
    pub fn point(&self, base: impl Into<Vec<f64>>, fiber: impl Into<Vec<f64>>) -> Result<PhasePoint> {
        let base = self.manifold().point(base)?;
        let fiber = fiber.into();
        let (_, d) = self.dims();
        if fiber.len() != d {
            return Err(dim_err(d, fiber.len()));
        }
        Ok(PhasePoint::new(base, TorusVector::new(fiber)))
    }
}

/// Position on S^2 of a sphere-geodesic phase point: `cos(phi) e1 + sin(phi) e2`,
/// where `(e1, e2)` is the oriented frame of the great circle whose unit
/// normal is the base point.
pub fn sphere_position(p: &PhasePoint) -> [f64; 3] {
    let (e1, e2) = sphere_frame(p.base.coords());
    let (s, c) = (TAU * p.fiber.coords()[0]).sin_cos();
    [c * e1[0] + s * e2[0], c * e1[1] + s * e2[1], c * e1[2] + s * e2[2]]
}

/// Oriented orthonormal frame `(e1, e2)` with `e1 x e2 = normal`.
pub fn sphere_frame(normal_chart: &[f64]) -> ([f64; 3], [f64; 3]) {
    let n = sphere_unit_vector(normal_chart[0], normal_chart[1]);
    let reference = if n[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let e1 = normalize(cross(reference, n));
    let e2 = cross(n, e1);
    (e1, e2)
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn normalize(a: [f64; 3]) -> [f64; 3] {
    let r = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    [a[0] / r, a[1] / r, a[2] / r]
}
