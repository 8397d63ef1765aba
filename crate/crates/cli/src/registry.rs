//! Flows, fields and observables built from config sections.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use shearlab::flows::Bump;
use shearlab::{
    BaseDensity, BaseManifold, BaseMapSpec, BaseProfile, CoefficientLaw, CompatibleFlow, FlowSpec, FourierObservable,
    FrequencyVector, PAdicInteger, TransvectionVariant, VelocityField,
};

use crate::config::Section;
use crate::error::CliError;

fn unknown(section: &Section, key: &str, value: &str, known: &str) -> CliError {
    CliError::config(format!("[{}] unknown {key} {value:?} (expected one of: {known})", section.name()))
}

pub fn manifold(s: &Section) -> Result<BaseManifold, CliError> {
    let kind = s.raw("manifold").unwrap_or("interval");
    Ok(match kind {
        "interval" => BaseManifold::interval(s.get_or("lower", 0.0)?, s.get_or("upper", 1.0)?)?,
        "rectangle" | "box" => BaseManifold::rectangle(s.require_list("lower")?, s.require_list("upper")?)?,
        "circle" => BaseManifold::Circle,
        "sphere" => BaseManifold::Sphere,
        other => return Err(unknown(s, "manifold", other, "interval, rectangle, circle, sphere")),
    })
}

/// Velocity field from `velocity = ...`, with an optional perturbation
/// `perturb_amount`, `perturb_direction` (and bump `perturb_center`,
/// `perturb_half_width`).
pub fn velocity(s: &Section, key: &str, chart_dim: usize) -> Result<VelocityField, CliError> {
    let kind = s.require_raw(key)?;
    let field = match kind {
        "constant" => VelocityField::Constant(s.require_list("vector")?),
        "identity" => VelocityField::identity(chart_dim),
        "affine" => {
            let offset: Vec<f64> = s.require_list("offset")?;
            let flat: Vec<f64> = s.require_list("matrix")?;
            if offset.is_empty() || flat.len() != offset.len() * chart_dim {
                return Err(CliError::config(format!(
                    "[{}] affine matrix needs {} x {chart_dim} entries (row-major), got {}",
                    s.name(),
                    offset.len(),
                    flat.len()
                )));
            }
            let matrix = flat.chunks(chart_dim).map(<[f64]>::to_vec).collect();
            VelocityField::Affine { matrix, offset }
        }
        "unit-circle" => VelocityField::UnitCircle,
        "unit-sphere" => VelocityField::UnitSphere,
        "billiard" => VelocityField::Billiard,
        "kepler" => VelocityField::Kepler,
        other => {
            return Err(unknown(
                s,
                key,
                other,
                "constant, identity, affine, unit-circle, unit-sphere, billiard, kepler",
            ))
        }
    };
    perturbation(s, field)
}

fn perturbation(s: &Section, field: VelocityField) -> Result<VelocityField, CliError> {
    let Some(amount) = s.get::<f64>("perturb_amount")? else { return Ok(field) };
    let direction: Vec<f64> = s.require_list("perturb_direction")?;
    let bump = match s.list::<f64>("perturb_center")? {
        Some(center) => Some(Bump { center, half_width: s.require("perturb_half_width")? }),
        None => None,
    };
    let out = VelocityField::Perturbed { base: Box::new(field), amount, direction, bump };
    out.validate()?;
    Ok(out)
}

pub fn density(s: &Section) -> Result<BaseDensity, CliError> {
    Ok(match s.raw("density").unwrap_or("uniform") {
        "uniform" => BaseDensity::Uniform,
        "half-cosine" => BaseDensity::HalfCosine,
        "tilted" => BaseDensity::Tilted { slope: s.require("slope")? },
        other => return Err(unknown(s, "density", other, "uniform, half-cosine, tilted")),
    })
}

/// The system described by a `[flow]` section.
pub fn flow(s: &Section) -> Result<FlowSpec, CliError> {
    let kind = s.require_raw("kind")?;
    Ok(match kind {
        "transvection" => FlowSpec::Transvection(match s.raw("variant").unwrap_or("lower") {
            "lower" => TransvectionVariant::Lower,
            "upper" => TransvectionVariant::Upper,
            other => return Err(unknown(s, "variant", other, "lower, upper")),
        }),
        "torus-geodesic" => FlowSpec::torus_geodesic(s.require("n")?)?,
        "disk-billiard" => FlowSpec::DiskBilliard,
        "sphere-geodesic" => FlowSpec::SphereGeodesic,
        "product" => {
            let m = manifold(s)?;
            let v = velocity(s, "velocity", m.dim())?;
            FlowSpec::Product(CompatibleFlow::new(m, v, density(s)?)?)
        }
        "suspension" => {
            let base = match s.raw("base").unwrap_or("doubling") {
                "doubling" => BaseMapSpec::Doubling,
                "rotation" => BaseMapSpec::rotation(s.require("alpha")?)?,
                other => return Err(unknown(s, "base", other, "doubling, rotation")),
            };
            let m = manifold(s)?;
            let v = velocity(s, "velocity", m.dim())?;
            FlowSpec::suspension(base, m, v, density(s)?)?
        }
        "padic" => {
            let p: u32 = s.require("p")?;
            let digits: usize = s.get_or("digits", shearlab::counterexamples::DEFAULT_DIGITS)?;
            let shifts = s
                .tuples::<u32>("shifts")?
                .ok_or_else(|| CliError::config(format!("[{}] is missing `shifts`", s.name())))?
                .into_iter()
                .map(|mut d| {
                    d.resize(digits, 0);
                    PAdicInteger::new(p, d)
                })
                .collect::<Result<Vec<_>, _>>()?;
            FlowSpec::padic(p, digits, shifts)?
        }
        other => {
            return Err(unknown(
                s,
                "flow kind",
                other,
                "transvection, torus-geodesic, disk-billiard, sphere-geodesic, product, suspension, padic",
            ))
        }
    })
}

/// Chart and velocity field checked by the criterion.
pub fn criterion_field(flow: &FlowSpec) -> Result<(BaseManifold, VelocityField), CliError> {
    match flow {
        FlowSpec::Suspension(s) => Ok((s.manifold.clone(), s.speed.clone())),
        other => other
            .compatible()
            .map(|c| (c.manifold.clone(), c.velocity.clone()))
            .ok_or_else(|| CliError::config(format!("the criterion needs a compatible flow, got {}", other.id()))),
    }
}

fn profile(s: &Section, coefficient: Complex64, base_dim: usize) -> Result<BaseProfile, CliError> {
    Ok(match s.raw("profile").unwrap_or("constant") {
        "constant" => BaseProfile::Constant(coefficient),
        "trig" => BaseProfile::Trig { coefficient, wave: s.require_list("wave")? },
        "gaussian" => BaseProfile::Gaussian {
            amplitude: coefficient,
            center: s.require_list("center")?,
            width: s.require("width")?,
        },
        "hat" => BaseProfile::Hat {
            amplitude: coefficient,
            center: s.require_list("center")?,
            half_width: s.require("half_width")?,
        },
        other => return Err(unknown(s, "profile", other, "constant, trig, gaussian, hat")),
    })
    .and_then(|p| {
        if let BaseProfile::Trig { wave, .. } = &p {
            if wave.len() != base_dim {
                return Err(CliError::config(format!("[{}] wave needs {base_dim} entries", s.name())));
            }
        }
        Ok(p)
    })
}

/// Observable from a section: either a coefficient law on `T^2`
/// (`law`, `law_param`, `cutoff`) or explicit `modes` with `coefficients`
/// (and optional `imag`) sharing one base profile. Returns the observable
/// and the truncated tail `sum |c|^2` (zero for explicit modes).
pub fn observable(s: &Section, flow: &FlowSpec) -> Result<(FourierObservable, f64), CliError> {
    let (n, d) = flow.dims();
    if let Some(law) = s.raw("law") {
        let param: f64 = s.require("law_param")?;
        let law = match law {
            "gaussian" => CoefficientLaw::Gaussian { scale: param },
            "exponential" => CoefficientLaw::Exponential { rate: param },
            "sobolev" => CoefficientLaw::Sobolev { order: param },
            other => return Err(unknown(s, "law", other, "gaussian, exponential, sobolev")),
        };
        if (n, d) != (0, 2) {
            return Err(CliError::config(format!("[{}] coefficient laws need a pure T^2 system", s.name())));
        }
        return Ok(FourierObservable::from_law(law, s.require("cutoff")?)?);
    }
    let modes =
        s.tuples::<i64>("modes")?.ok_or_else(|| CliError::config(format!("[{}] needs `law` or `modes`", s.name())))?;
    let re: Vec<f64> = s.require_list("coefficients")?;
    let im: Vec<f64> = s.list("imag")?.unwrap_or_else(|| vec![0.0; re.len()]);
    if re.len() != modes.len() || im.len() != modes.len() {
        return Err(CliError::config(format!("[{}] modes and coefficients differ in length", s.name())));
    }
    let mut obs = FourierObservable::new(n, d);
    for ((xi, re), im) in modes.into_iter().zip(re).zip(im) {
        let p = profile(s, Complex64::new(re, im), n)?;
        obs.insert(FrequencyVector(xi), p)?;
    }
    if let Some(h) = s.get::<i64>("mark_harmonic")? {
        obs = obs.with_mark_harmonic(h);
    }
    if matches!(flow, FlowSpec::DiskBilliard) {
        check_billiard_angles(s)?;
    }
    Ok((obs, 0.0))
}

/// Billiard observables live on the open angle chart `|theta| < pi/2`.
fn check_billiard_angles(s: &Section) -> Result<(), CliError> {
    let mut angles: Vec<f64> = s.list("center")?.unwrap_or_default();
    angles.extend(s.list::<f64>("theta")?.unwrap_or_default());
    if let Some(bad) = angles.iter().find(|t| !(t.abs() < FRAC_PI_2)) {
        return Err(CliError::config(format!(
            "[{}] billiard angle {bad} lies outside the open chart |theta| < pi/2",
            s.name()
        )));
    }
    Ok(())
}
