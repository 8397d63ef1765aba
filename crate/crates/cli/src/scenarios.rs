//! Scenario runners. Each returns its CSV artifacts in memory; writing them
//! out is left to [`crate::run_job`].

use std::f64::consts::{SQRT_2, TAU};
use std::fmt::Write as _;

use rayon::prelude::*;
use shearlab::counterexamples::padic_orbit_values;
use shearlab::criterion::{default_grid, DEFAULT_DELTAS, DEFAULT_XI_CUTOFF};
use shearlab::{
    check_transvection_bound, count_shell, cov_series, criterion_report, fit_exponential, fit_power_law,
    padic_covariance_series, shell_asymptotic, sphere_no_decay_certificate, BaseManifold, CriterionReport, Estimator,
    FlowSpec, PAdicCharacterObservable, PAdicInteger, QuadSpec, ShearError, ShellQuery, VelocityField,
};

use crate::config::{Config, Section};
use crate::equidistribution::{angular_modes, box_discrepancy, wavefront, Cloud, MODES};
use crate::error::CliError;
use crate::registry;

/// Scenario tags accepted in `[job] scenario`.
pub const SCENARIOS: [&str; 8] =
    ["covariance", "criterion", "perturbation-smoke", "gauss", "padic", "sphere-check", "saturn", "torus-wavefront"];

/// CSV files produced by a scenario, plus human-readable summary lines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Artifacts {
    pub files: Vec<(String, String)>,
    pub summary: Vec<String>,
}

impl Artifacts {
    fn file(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }
}

/// Dispatch on `[job] scenario`. `seed` overrides `[job] seed`.
pub fn run_scenario(config: &Config, seed: Option<u64>) -> Result<Artifacts, CliError> {
    let job = config.require("job")?;
    let tag = job.require_raw("scenario")?;
    let seed = Seed {
        value: match seed {
            Some(s) => Some(s),
            None => job.get("seed")?,
        },
    };
    match tag {
        "covariance" => covariance(config, seed),
        "criterion" => criterion(config),
        "perturbation-smoke" => perturbation_smoke(config),
        "gauss" => gauss(config),
        "padic" => padic(config, seed),
        "sphere-check" => sphere_check(config, seed),
        "saturn" => saturn(config, seed),
        "torus-wavefront" => torus_wavefront(config),
        other => {
            Err(CliError::config(format!("unknown scenario {other:?} (expected one of: {})", SCENARIOS.join(", "))))
        }
    }
}

#[derive(Clone, Copy)]
struct Seed {
    value: Option<u64>,
}

impl Seed {
    /// Stochastic jobs must name a seed.
    fn require(self, what: &str) -> Result<u64, CliError> {
        self.value.ok_or_else(|| CliError::config(format!("{what} is stochastic: set [job] seed or pass --seed")))
    }
}

fn quad_spec(s: Option<&Section>) -> Result<QuadSpec, CliError> {
    let d = QuadSpec::default();
    let Some(s) = s else { return Ok(d) };
    Ok(QuadSpec {
        min_resolution: s.get_or("min_resolution", d.min_resolution)?,
        oversample: s.get_or("oversample", d.oversample)?,
        max_doublings: s.get_or("max_doublings", d.max_doublings)?,
        tolerance: s.get_or("tolerance", d.tolerance)?,
    })
}

fn covariance(config: &Config, seed: Seed) -> Result<Artifacts, CliError> {
    let flow = registry::flow(config.require("flow")?)?;
    let f1_section = config.require("f1")?;
    let f2_section = config.section("f2").unwrap_or(f1_section);
    let (f1, tail1) = registry::observable(f1_section, &flow)?;
    let (f2, tail2) = registry::observable(f2_section, &flow)?;
    let series_section = config.require("series")?;
    let times = series_section.times("times")?.ok_or_else(|| CliError::config("[series] is missing `times`"))?;
    let estimator = match series_section.raw("estimator").unwrap_or("spectral") {
        "spectral" => Estimator::Spectral(quad_spec(Some(series_section))?),
        "monte-carlo" => Estimator::MonteCarlo {
            samples: series_section.require("samples")?,
            seed: seed.require("a Monte Carlo covariance job")?,
        },
        other => return Err(CliError::config(format!("[series] unknown estimator {other:?} (spectral, monte-carlo)"))),
    };
    let mut series = cov_series(&flow, &f1, &f2, &times, &estimator)?.with_labels(f1_section.name(), f2_section.name());
    let mut out = Artifacts::default();
    out.summary.push(format!("flow: {}", flow.id()));
    out.summary.push(format!("rows: {}", series.len()));

    if tail1 > 0.0 || tail2 > 0.0 {
        series.comments.push(format!("truncation tail: f1={tail1:.6e}, f2={tail2:.6e}"));
    }
    if let Some(fit) = config.section("fit") {
        let window = match fit.list::<f64>("window")? {
            Some(w) if w.len() == 2 => (w[0], w[1]),
            Some(_) => return Err(CliError::config("[fit] window needs two entries")),
            None => (times.first().copied().unwrap_or(0.0), times.last().copied().unwrap_or(0.0)),
        };
        let block: usize = fit.get_or("block", 1)?;
        let comment = match fit.raw("kind").unwrap_or("power") {
            "none" => None,
            "power" => Some(match fit_power_law(&series, window, block) {
                Ok(f) => f.comment(),
                Err(ShearError::FullyDecayed { .. }) => "fit: fully decayed".to_string(),
                Err(e) => return Err(e.into()),
            }),
            "exponential" => Some(match fit_exponential(&series, window, block) {
                Ok(f) => format!("fit: rate={:.6}, amplitude={:.6e}, r2={:.6}", f.rate, f.amplitude, f.r2),
                Err(ShearError::FullyDecayed { .. }) => "fit: fully decayed".to_string(),
                Err(e) => return Err(e.into()),
            }),
            other => return Err(CliError::config(format!("[fit] unknown kind {other:?} (power, exponential, none)"))),
        };
        if let Some(c) = comment {
            out.summary.push(c.clone());
            series.comments.push(c);
        }
    }
    out.file("covariance.csv", series.to_csv());

    if let Some(bound) = config.section("bound") {
        if !matches!(flow, FlowSpec::Transvection(_)) {
            return Err(CliError::config("[bound] applies to transvection flows only"));
        }
        let mut csv = String::from("n,s,abs_cov,bound,ok\n");
        let mut failures = 0;
        for s in bound.require_list::<f64>("s")? {
            let ns = times.iter().map(|t| *t as i64);
            for row in check_transvection_bound(&f1, &f2, s, ns)? {
                failures += usize::from(!row.ok);
                let _ = writeln!(csv, "{},{:.16e},{:.16e},{:.16e},{}", row.n, s, row.abs_cov, row.bound, row.ok);
            }
        }
        out.summary.push(format!("bound violations: {failures}"));
        out.file("bound.csv", csv);
    }
    Ok(out)
}

fn criterion_settings(config: &Config, manifold: &BaseManifold) -> Result<(i64, Vec<f64>, usize), CliError> {
    let Some(s) = config.section("criterion") else {
        return Ok((DEFAULT_XI_CUTOFF, DEFAULT_DELTAS.to_vec(), default_grid(manifold)));
    };
    Ok((
        s.get_or("xi_cutoff", DEFAULT_XI_CUTOFF)?,
        s.list("deltas")?.unwrap_or_else(|| DEFAULT_DELTAS.to_vec()),
        s.get_or("grid", default_grid(manifold))?,
    ))
}

fn report(config: &Config, manifold: &BaseManifold, v: &VelocityField) -> Result<CriterionReport, CliError> {
    let (cutoff, deltas, grid) = criterion_settings(config, manifold)?;
    Ok(criterion_report(manifold, v, cutoff, &deltas, grid)?)
}

fn criterion(config: &Config) -> Result<Artifacts, CliError> {
    let flow = registry::flow(config.require("flow")?)?;
    let (manifold, v) = registry::criterion_field(&flow)?;
    let r = report(config, &manifold, &v)?;
    let mut out = Artifacts::default();
    out.summary.push(format!("flow: {}", flow.id()));
    out.summary.push(format!("verdict: {}", r.verdict.label()));
    out.file("criterion.csv", r.to_csv());
    Ok(out)
}

/// Criterion on a field and on its perturbation `v + amount * direction * bump`.
fn perturbation_smoke(config: &Config) -> Result<Artifacts, CliError> {
    let flow = registry::flow(config.require("flow")?)?;
    let (manifold, base) = registry::criterion_field(&flow)?;
    let p = config.require("perturbation")?;
    let bump = match p.list::<f64>("center")? {
        Some(center) => Some(shearlab::flows::Bump { center, half_width: p.require("half_width")? }),
        None => None,
    };
    let perturbed = VelocityField::Perturbed {
        base: Box::new(base.clone()),
        amount: p.get_or("amount", SQRT_2 - 1.0)?,
        direction: p.require_list("direction")?,
        bump,
    };
    perturbed.validate()?;
    let before = report(config, &manifold, &base)?;
    let after = report(config, &manifold, &perturbed)?;
    let mut out = Artifacts::default();
    out.summary.push(format!("verdict before: {}", before.verdict.label()));
    out.summary.push(format!("verdict after: {}", after.verdict.label()));
    out.file("criterion_base.csv", before.to_csv());
    out.file("criterion_perturbed.csv", after.to_csv());
    Ok(out)
}

fn gauss(config: &Config) -> Result<Artifacts, CliError> {
    let g = config.require("gauss")?;
    let dim: usize = g.require("dim")?;
    let center = g.list::<f64>("center")?.unwrap_or_else(|| vec![0.0; dim]);
    if center.len() != dim {
        return Err(CliError::config(format!("[gauss] center needs {dim} entries")));
    }
    let epsilon: f64 = g.require("epsilon")?;
    let radii: Vec<f64> = g.require_list("radii")?;
    let queries = radii.iter().map(|r| ShellQuery::new(center.clone(), *r, epsilon)).collect::<Result<Vec<_>, _>>()?;
    let rows = queries
        .par_iter()
        .map(|q| Ok((count_shell(q)?, shell_asymptotic(q)?)))
        .collect::<Result<Vec<_>, ShearError>>()?;
    let mut csv = String::from("r,epsilon,count,asymptotic,ratio\n");
    let mut out = Artifacts::default();
    for (q, (count, asym)) in queries.iter().zip(&rows) {
        let ratio = count.count as f64 / asym;
        let _ = writeln!(csv, "{:.16e},{:.16e},{},{:.16e},{:.16e}", q.radius, epsilon, count.count, asym, ratio);
        out.summary.push(format!("r={}: count={} ratio={ratio:.4}", q.radius, count.count));
    }
    for (q, (count, _)) in queries.iter().zip(&rows) {
        if count.ambiguous > 0 {
            let _ = writeln!(csv, "# r={}: {} boundary-ambiguous points excluded", q.radius, count.ambiguous);
        }
    }
    out.file("gauss.csv", csv);
    Ok(out)
}

fn padic(config: &Config, seed: Seed) -> Result<Artifacts, CliError> {
    let seed = seed.require("a p-adic job")?;
    let flow = registry::flow(config.require("flow")?)?;
    let FlowSpec::PAdicTranslation(f) = &flow else {
        return Err(CliError::config("padic jobs need [flow] kind = padic"));
    };
    let s = config.require("padic")?;
    let obs = PAdicCharacterObservable::new(f.p, s.get_or("level", 0)?, s.get_or("character", 1)?)?;
    let n_max: usize = s.get_or("n_max", 4 * f.p as usize)?;
    let cov = padic_covariance_series(&flow, &obs, n_max, s.get_or("samples", 10_000)?, seed)?;
    let mut csv = String::from("t,abs_cov,tag\n");
    for (n, v) in cov.values.iter().enumerate() {
        let _ = writeln!(csv, "{:.16e},{:.16e},cov", n as f64, v.norm());
    }
    let _ = writeln!(csv, "# period: {}", cov.period);
    let _ = writeln!(csv, "# limsup: {:.16e}, abs_cov0: {:.16e}", cov.tail_max(), cov.values[0].norm());

    // one orbit of the observed digit from a seeded starting point
    let mut rng = shearlab::rng::stream(seed, u64::MAX);
    let y0 = PAdicInteger::random(f.p, f.digits, &mut rng);
    let orbit = padic_orbit_values(&f.shifts[0], &obs, &y0, n_max)?;
    let mut orbit_csv = String::from("n,digit,re,im\n");
    for (n, (d, v)) in orbit.digits.iter().zip(&orbit.values).enumerate() {
        let _ = writeln!(orbit_csv, "{n},{d},{:.16e},{:.16e}", v.re, v.im);
    }
    let _ = writeln!(orbit_csv, "# period: {}", orbit.period);

    let mut out = Artifacts::default();
    out.summary.push(format!("covariance period: {}", cov.period));
    out.summary.push(format!("limsup |cov|: {:.6}", cov.tail_max()));
    out.summary.push(format!("orbit period: {}", orbit.period));
    out.file("padic.csv", csv);
    out.file("padic_orbit.csv", orbit_csv);
    Ok(out)
}

fn sphere_check(config: &Config, seed: Seed) -> Result<Artifacts, CliError> {
    let seed = seed.require("a sphere-check job")?;
    let flow = FlowSpec::SphereGeodesic;
    let (f1, _) = registry::observable(config.require("f1")?, &flow)?;
    let (f2, _) = registry::observable(config.section("f2").unwrap_or(config.require("f1")?), &flow)?;
    let s = config.require("sphere")?;
    let samples: usize = s.get_or("samples", 10_000)?;
    let mut csv = String::from("t,abs_cov,tag\n");
    let mut worst: f64 = 0.0;
    for t0 in s.require_list::<f64>("t0")? {
        let c = sphere_no_decay_certificate(&f1, &f2, t0, samples, seed)?;
        let _ = writeln!(csv, "{:.16e},{:.16e},t0", t0, c.cov_t0.norm());
        let _ = writeln!(csv, "{:.16e},{:.16e},t0+period", t0 + TAU, c.cov_t0_plus_period.norm());
        let _ = writeln!(csv, "# t0={t0}: difference={:.16e}, stderr={:.16e}", c.difference, c.stderr);
        worst = worst.max(c.difference);
    }
    let mut out = Artifacts::default();
    out.summary.push(format!("max difference: {worst:.3e}"));
    out.file("sphere.csv", csv);
    Ok(out)
}

fn saturn(config: &Config, seed: Seed) -> Result<Artifacts, CliError> {
    let seed = seed.require("the saturn scenario")?;
    let s = config.require("saturn")?;
    let cloud = Cloud {
        r0: s.require("r0")?,
        r1: s.require("r1")?,
        arc: s.get_or("arc", 0.1)?,
        particles: s.get_or("particles", 100_000)?,
    };
    let times = s.times("times")?.ok_or_else(|| CliError::config("[saturn] is missing `times`"))?;
    if times.iter().any(|t| !t.is_finite()) {
        return Err(CliError::config("[saturn] times must be finite"));
    }
    let bins: usize = s.get_or("bins", 8)?;
    let dump: usize = s.get_or("dump", 1000)?;
    let particles = cloud.sample(seed)?;
    let modes: Vec<[f64; MODES]> = times.par_iter().map(|t| angular_modes(&cloud, &particles, *t, bins)).collect();

    let mut csv = String::from("t,mode,magnitude\n");
    for (t, m) in times.iter().zip(&modes) {
        for (k, value) in m.iter().enumerate() {
            let _ = writeln!(csv, "{:.16e},{},{:.16e}", t, k + 1, value);
        }
    }
    let mut out = Artifacts::default();
    for (t, m) in times.iter().zip(&modes) {
        out.summary.push(format!("t={t}: first mode {:.4}", m[0]));
    }
    out.file("saturn.csv", csv);
    if dump > 0 {
        let stride = particles.len().div_ceil(dump).max(1);
        let mut frames = String::from("t,particle,r,theta\n");
        for t in &times {
            for (i, p) in particles.iter().enumerate().step_by(stride) {
                let _ =
                    writeln!(frames, "{:.16e},{i},{:.16e},{:.16e}", t, p.r, crate::equidistribution::angle_at(p, *t));
            }
        }
        out.file("saturn_particles.csv", frames);
    }
    Ok(out)
}

fn torus_wavefront(config: &Config) -> Result<Artifacts, CliError> {
    let s = config.require("wavefront")?;
    let directions: usize = s.get_or("directions", 16384)?;
    if directions < 1000 {
        return Err(CliError::config(format!("[wavefront] needs at least 1000 directions (got {directions})")));
    }
    let times = s.times("times")?.ok_or_else(|| CliError::config("[wavefront] is missing `times`"))?;
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(CliError::config("[wavefront] times must be finite and non-negative"));
    }
    let frames: Vec<f64> = s.list("frames")?.unwrap_or_default();
    let discrepancy: Vec<f64> = times.par_iter().map(|t| box_discrepancy(&wavefront(directions, *t))).collect();
    let mut csv = String::from("t,discrepancy\n");
    let mut out = Artifacts::default();
    for (t, d) in times.iter().zip(&discrepancy) {
        let _ = writeln!(csv, "{t:.16e},{d:.16e}");
        out.summary.push(format!("t={t}: discrepancy {d:.4}"));
    }
    out.file("wavefront.csv", csv);
    if !frames.is_empty() {
        let mut pts = String::from("t,k,x,y\n");
        for t in &frames {
            for (k, p) in wavefront(directions, *t).iter().enumerate() {
                let _ = writeln!(pts, "{t:.16e},{k},{:.16e},{:.16e}", p[0], p[1]);
            }
        }
        out.file("wavefront_frames.csv", pts);
    }
    Ok(out)
}
