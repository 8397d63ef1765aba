//! Numerical check of the critical-set criterion: for every frequency
//! `xi != 0` the set `{d<xi, v> = 0}` should be Lebesgue-null.
//!
//! The measure of `{|grad <xi, v>| <= delta}` is estimated on a grid of
//! cells for a ladder of shrinking `delta`; ladders that shrink to zero are
//! evidence of shear, ladders that stall are evidence against.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Result, ShearError};
use crate::flows::{BaseManifold, VelocityField};
use crate::observables::FrequencyVector;

/// Default `delta` ladder, largest first.
pub const DEFAULT_DELTAS: [f64; 5] = [0.1, 0.05, 0.025, 0.0125, 0.00625];
/// Default frequency cutoff `|xi|_inf <= 8`.
pub const DEFAULT_XI_CUTOFF: i64 = 8;
/// Smallest accepted grid.
pub const MIN_GRID: usize = 16;
/// Fraction of the chart volume above which a sublevel set counts as fat.
pub const FAT_FRACTION: f64 = 0.01;

/// Default cells per axis for a chart.
pub fn default_grid(manifold: &BaseManifold) -> usize {
    match manifold.dim() {
        0 | 1 => 8192,
        2 => 256,
        _ => 48,
    }
}

/// A grid cell with the Jacobian of `v` at its center.
struct Cell {
    volume: f64,
    /// Riemannian rescaling of each chart derivative.
    metric: Vec<f64>,
    /// `jac[i * d + j] = d v_j / d x_i`.
    jac: Vec<f64>,
}

/// Cell layout: per-axis `(lower, upper, cells, periodic)`.
fn axes(manifold: &BaseManifold, grid: usize) -> Result<Vec<(f64, f64, usize)>> {
    Ok(match manifold {
        BaseManifold::Box { lower, upper } => lower.iter().zip(upper).map(|(a, b)| (*a, *b, grid)).collect(),
        BaseManifold::Circle => vec![(0.0, TAU, grid)],
        BaseManifold::Sphere => vec![(0.0, PI, grid), (0.0, TAU, 2 * grid)],
        other => {
            return Err(ShearError::InvalidParameter(format!("the criterion needs a continuous chart, not {other:?}")))
        }
    })
}

fn cells(manifold: &BaseManifold, v: &VelocityField, grid: usize) -> Result<Vec<Cell>> {
    if grid < MIN_GRID {
        return Err(ShearError::InvalidParameter(format!("grid {grid} below the minimum {MIN_GRID}")));
    }
    if let Some(n) = v.in_dim() {
        if n != manifold.dim() {
            return Err(crate::error::dim_err(manifold.dim(), n));
        }
    }
    let axes = axes(manifold, grid)?;
    let n = axes.len();
    let d = v.out_dim();
    let total: usize = axes.iter().map(|a| a.2).product();
    let sphere = matches!(manifold, BaseManifold::Sphere);
    let built: Vec<Result<Cell>> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rest = flat;
            let mut center = vec![0.0; n];
            let mut widths = vec![0.0; n];
            for k in (0..n).rev() {
                let (a, b, m) = axes[k];
                let i = rest % m;
                rest /= m;
                let w = (b - a) / m as f64;
                center[k] = a + (i as f64 + 0.5) * w;
                widths[k] = w;
            }
            let (volume, metric) = if sphere {
                let (lo, hi) = (center[0] - 0.5 * widths[0], center[0] + 0.5 * widths[0]);
                ((lo.cos() - hi.cos()) * widths[1], vec![1.0, 1.0 / center[0].sin()])
            } else {
                (widths.iter().product(), vec![1.0; n])
            };
            let mut jac = vec![0.0; n * d];
            let mut plus = vec![0.0; d];
            let mut minus = vec![0.0; d];
            let mut x = center.clone();
            for i in 0..n {
                let h = (axes[i].1 - axes[i].0) / (8.0 * axes[i].2 as f64);
                x[i] = center[i] + h;
                v.eval_into(&x, &mut plus);
                x[i] = center[i] - h;
                v.eval_into(&x, &mut minus);
                x[i] = center[i];
                for j in 0..d {
                    let g = (plus[j] - minus[j]) / (2.0 * h);
                    if !g.is_finite() {
                        return Err(ShearError::OutOfDomain(format!("velocity not evaluable near {center:?}")));
                    }
                    jac[i * d + j] = g;
                }
            }
            Ok(Cell { volume, metric, jac })
        })
        .collect();
    built.into_iter().collect()
}

fn grad_norm(cell: &Cell, xi: &[f64]) -> f64 {
    let d = xi.len();
    cell.metric
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let g: f64 = xi.iter().enumerate().map(|(j, x)| x * cell.jac[i * d + j]).sum();
            (m * g).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

fn measure(cells: &[Cell], xi: &[f64], delta: f64) -> f64 {
    // sequential sum keeps the result independent of the thread count
    let inside: Vec<f64> = cells.par_iter().map(|c| if grad_norm(c, xi) <= delta { c.volume } else { 0.0 }).collect();
    inside.iter().sum()
}

fn check_xi(v: &VelocityField, xi: &FrequencyVector) -> Result<()> {
    if xi.dim() != v.out_dim() {
        return Err(crate::error::dim_err(v.out_dim(), xi.dim()));
    }
    Ok(())
}

/// Volume of the cells whose center satisfies `|grad <xi, v>| <= delta`
/// (gradient by central differences, step `width / (8 grid)`).
pub fn sublevel_measure(
    manifold: &BaseManifold,
    v: &VelocityField,
    xi: &FrequencyVector,
    delta: f64,
    grid: usize,
) -> Result<f64> {
    check_xi(v, xi)?;
    if !(delta > 0.0) {
        return Err(ShearError::InvalidParameter(format!("delta = {delta} must be positive")));
    }
    let cells = cells(manifold, v, grid)?;
    Ok(measure(&cells, &xi.as_f64(), delta))
}

/// Primitive frequencies with `|xi|_inf <= cutoff`, one per `+-` pair
/// (first non-zero entry positive).
pub fn primitive_frequencies(d: usize, cutoff: i64) -> Vec<FrequencyVector> {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let side = (2 * cutoff + 1) as usize;
    let mut out = Vec::new();
    for flat in 0..side.pow(d as u32) {
        let mut rest = flat;
        let mut xi = vec![0i64; d];
        for c in xi.iter_mut().rev() {
            *c = (rest % side) as i64 - cutoff;
            rest /= side;
        }
        let g = xi.iter().fold(0, |g, &c| gcd(g, c));
        let leading = xi.iter().find(|&&c| c != 0);
        if g == 1 && leading.is_some_and(|&c| c > 0) {
            out.push(FrequencyVector(xi));
        }
    }
    out
}

/// Outcome of the criterion check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    ShearConsistent,
    ShearViolated,
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::ShearConsistent => "shear-consistent",
            Verdict::ShearViolated => "shear-violated",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Sublevel measures of one frequency along the `delta` ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct Ladder {
    pub xi: FrequencyVector,
    /// `(delta, measure)` with `delta` decreasing; `delta` is absolute.
    pub entries: Vec<(f64, f64)>,
}

impl Ladder {
    fn verdict(&self, volume: f64) -> Verdict {
        let m: Vec<f64> = self.entries.iter().map(|e| e.1).collect();
        let (first, last) = (m[0], m[m.len() - 1]);
        let ratio = self.entries[m.len() - 1].0 / self.entries[0].0;
        let fat = FAT_FRACTION * volume;
        if m.len() >= 2 {
            let prev = m[m.len() - 2];
            if last > fat && prev > fat && last >= 0.75 * prev {
                return Verdict::ShearViolated;
            }
        }
        if last <= 2.0 * ratio * first && last < fat {
            Verdict::ShearConsistent
        } else {
            Verdict::Inconclusive
        }
    }
}

/// Per-frequency ladders and the overall verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct CriterionReport {
    pub ladders: Vec<Ladder>,
    pub verdict: Verdict,
    pub grid: usize,
    pub xi_cutoff: i64,
    pub volume: f64,
}

impl CriterionReport {
    /// Ladders that do not shrink to zero.
    pub fn offending(&self) -> impl Iterator<Item = &Ladder> {
        self.ladders.iter().filter(|l| l.verdict(self.volume) != Verdict::ShearConsistent)
    }

    pub fn ladder(&self, xi: &FrequencyVector) -> Option<&Ladder> {
        self.ladders.iter().find(|l| &l.xi == xi)
    }

    /// Rows `xi,delta,measure` and a trailing `# verdict: ...` line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("xi,delta,measure\n");
        for l in &self.ladders {
            let xi: Vec<String> = l.xi.0.iter().map(i64::to_string).collect();
            for (delta, m) in &l.entries {
                let _ = writeln!(out, "[{}],{:.16e},{:.16e}", xi.join(" "), delta, m);
            }
        }
        let _ = writeln!(out, "# verdict: {}", self.verdict.label());
        out
    }
}

/// Check every primitive `xi` with `|xi|_inf <= xi_cutoff`.
///
/// Along the ray through `xi` the sets scale as
/// `{|grad <k xi, v>| <= delta} = {|grad <xi, v>| <= delta / k}`, so the
/// ladder for `xi` uses the thresholds `delta |xi|`: the same sets as for
/// the unit vector `xi / |xi|`, which keeps ladders comparable across
/// frequencies. A ladder is consistent when its last entry is below 1% of
/// the chart volume and at most twice the linear extrapolation of the first
/// entry; it is violated when its two smallest entries both exceed 1% and
/// the last keeps at least 75% of the previous one.
pub fn criterion_report(
    manifold: &BaseManifold,
    v: &VelocityField,
    xi_cutoff: i64,
    deltas: &[f64],
    grid: usize,
) -> Result<CriterionReport> {
    if xi_cutoff < 1 {
        return Err(ShearError::InvalidParameter("frequency cutoff must be at least 1".into()));
    }
    if deltas.is_empty() || deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(ShearError::InvalidParameter("deltas must be positive and non-empty".into()));
    }
    let mut deltas = deltas.to_vec();
    deltas.sort_by(|a, b| b.total_cmp(a));
    let cells = cells(manifold, v, grid)?;
    let volume = manifold.volume();
    let ladders: Vec<Ladder> = primitive_frequencies(v.out_dim(), xi_cutoff)
        .into_iter()
        .map(|xi| {
            let x = xi.as_f64();
            let norm = xi.norm();
            let entries = deltas
                .iter()
                .map(|d| {
                    let abs = d * norm;
                    (abs, measure(&cells, &x, abs))
                })
                .collect();
            Ladder { xi, entries }
        })
        .collect();
    let verdicts: Vec<Verdict> = ladders.iter().map(|l| l.verdict(volume)).collect();
    let verdict = if verdicts.contains(&Verdict::ShearViolated) {
        Verdict::ShearViolated
    } else if verdicts.iter().all(|v| *v == Verdict::ShearConsistent) {
        Verdict::ShearConsistent
    } else {
        Verdict::Inconclusive
    };
    Ok(CriterionReport { ladders, verdict, grid, xi_cutoff, volume })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_field_has_empty_sublevel_set() {
        let m = BaseManifold::interval(0.0, 1.0).unwrap();
        let v = VelocityField::identity(1);
        let got = sublevel_measure(&m, &v, &FrequencyVector(vec![1]), 0.5, 64).unwrap();
        assert_eq!(got, 0.0);
    }

    #[test]
    fn constant_field_fills_the_chart() {
        let m = BaseManifold::rectangle(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap();
        let v = VelocityField::Constant(vec![0.3, 0.7]);
        let got = sublevel_measure(&m, &v, &FrequencyVector(vec![1, 2]), 1e-3, 32).unwrap();
        assert!((got - 2.0).abs() < 1e-12);
        let report = criterion_report(&m, &v, 2, &DEFAULT_DELTAS, 32).unwrap();
        assert_eq!(report.verdict, Verdict::ShearViolated);
    }

    #[test]
    fn small_grid_rejected() {
        let m = BaseManifold::interval(0.0, 1.0).unwrap();
        assert!(sublevel_measure(&m, &VelocityField::identity(1), &FrequencyVector(vec![1]), 0.1, 8).is_err());
    }

    #[test]
    fn primitive_frequency_enumeration() {
        let xs = primitive_frequencies(2, 1);
        let want: Vec<FrequencyVector> =
            vec![vec![0, 1], vec![1, -1], vec![1, 0], vec![1, 1]].into_iter().map(FrequencyVector).collect();
        assert_eq!(xs, want);
        assert_eq!(primitive_frequencies(1, 5), vec![FrequencyVector(vec![1])]);
    }

    #[test]
    fn sphere_cells_cover_the_sphere() {
        let cells = cells(&BaseManifold::Sphere, &VelocityField::UnitSphere, 16).unwrap();
        let area: f64 = cells.iter().map(|c| c.volume).sum();
        assert!((area - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn circle_caps_shrink_linearly() {
        let m = BaseManifold::Circle;
        let v = VelocityField::UnitCircle;
        let xi = FrequencyVector(vec![1, 0]);
        let a = sublevel_measure(&m, &v, &xi, 0.1, 8192).unwrap();
        let b = sublevel_measure(&m, &v, &xi, 0.05, 8192).unwrap();
        // |sin theta| <= delta: measure 4 asin(delta)
        assert!((a - 4.0 * 0.1f64.asin()).abs() < 2.0 * TAU / 8192.0);
        assert!((b - 4.0 * 0.05f64.asin()).abs() < 2.0 * TAU / 8192.0);
    }
}
