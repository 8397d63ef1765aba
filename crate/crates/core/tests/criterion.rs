use std::f64::consts::PI;

use shearlab::criterion::{default_grid, DEFAULT_DELTAS, DEFAULT_XI_CUTOFF};
use shearlab::{criterion_report, sublevel_measure, BaseManifold, FlowSpec, FrequencyVector, VelocityField, Verdict};

fn billiard() -> (BaseManifold, VelocityField) {
    let c = FlowSpec::DiskBilliard.compatible().unwrap().clone();
    (c.manifold, c.velocity)
}

/// `d/dtheta <(1,1), v(theta)>` for the billiard chart velocity.
fn g(theta: f64) -> f64 {
    -2.0 * theta.sin() * (1.5 - theta / PI) - (2.0 / PI) * theta.cos()
}

fn g_prime(theta: f64) -> f64 {
    -2.0 * theta.cos() * (1.5 - theta / PI) + (4.0 / PI) * theta.sin()
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[test]
fn billiard_sublevel_sets_match_root_neighbourhoods() {
    let (m, v) = billiard();
    // sign scan over a fine grid finds every root of g in the chart
    let n = 100_000;
    let step = PI / n as f64;
    let mut roots = Vec::new();
    for i in 0..n {
        let a = -PI / 2.0 + step * i as f64;
        if g(a).signum() != g(a + step).signum() {
            roots.push(bisect(g, a, a + step));
        }
    }
    assert_eq!(roots.len(), 1, "roots {roots:?}");
    assert!(roots[0] < 0.0 && roots[0] > -PI / 2.0);
    let xi = FrequencyVector(vec![1, 1]);
    let grid = default_grid(&m);
    let mut previous = f64::INFINITY;
    for delta in [0.1, 0.05, 0.025] {
        let predicted: f64 = roots.iter().map(|r| 2.0 * delta / g_prime(*r).abs()).sum();
        let got = sublevel_measure(&m, &v, &xi, delta, grid).unwrap();
        assert!((got - predicted).abs() < 0.05 * predicted, "delta {delta}: {got} vs {predicted}");
        assert!(got < previous);
        previous = got;
    }
}

#[test]
fn sublevel_measure_is_monotone_in_delta() {
    let (m, v) = billiard();
    let grid = 1024;
    for xi in [vec![1, 1], vec![1, -2], vec![3, 1]] {
        let xi = FrequencyVector(xi);
        let mut last = 0.0;
        for k in 1..=40 {
            let got = sublevel_measure(&m, &v, &xi, 0.01 * k as f64, grid).unwrap();
            assert!(got >= last, "xi {xi:?} delta {}", 0.01 * k as f64);
            assert!(got <= m.volume() + 1e-12);
            last = got;
        }
    }
}

/// Volume of the largest grid cell; sphere cells are `grid x 2 grid` in
/// (colatitude, longitude) and largest at the equator.
fn largest_cell(m: &BaseManifold, grid: usize) -> f64 {
    match m {
        BaseManifold::Sphere => (PI / grid as f64) * (PI / grid as f64),
        _ => m.volume() / (grid as f64).powi(m.dim() as i32),
    }
}

#[test]
fn doubling_the_grid_is_stable() {
    let cases: Vec<(BaseManifold, VelocityField, Vec<i64>, usize)> = vec![
        (billiard().0, billiard().1, vec![1, 1], 2048),
        (BaseManifold::Circle, VelocityField::UnitCircle, vec![2, 1], 2048),
        (
            BaseManifold::rectangle(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
            VelocityField::Affine { matrix: vec![vec![1.0, 0.0], vec![0.0, 0.0]], offset: vec![0.0, 0.0] },
            vec![1, 2],
            64,
        ),
        (BaseManifold::Sphere, VelocityField::UnitSphere, vec![1, 0, 1], 48),
    ];
    for (m, v, xi, grid) in cases {
        let xi = FrequencyVector(xi);
        let cell = largest_cell(&m, grid);
        for delta in [0.2, 0.1, 0.05] {
            let coarse = sublevel_measure(&m, &v, &xi, delta, grid).unwrap();
            let fine = sublevel_measure(&m, &v, &xi, delta, 2 * grid).unwrap();
            let allowed = (0.05 * coarse).max(2.0 * cell);
            assert!((coarse - fine).abs() <= allowed, "{m:?} {xi:?} {delta}: {coarse} vs {fine}");
        }
    }
}

#[test]
fn frequency_scaling_identity() {
    let (m, v) = billiard();
    let grid = 4096;
    let cell = m.volume() / grid as f64;
    for (xi, k) in [(vec![1, 1], 2), (vec![1, -1], 3), (vec![2, 1], 4)] {
        let scaled = FrequencyVector(xi.iter().map(|c| c * k).collect());
        let xi = FrequencyVector(xi);
        for delta in [0.05, 0.1, 0.4] {
            let a = sublevel_measure(&m, &v, &scaled, delta, grid).unwrap();
            let b = sublevel_measure(&m, &v, &xi, delta / k as f64, grid).unwrap();
            assert!((a - b).abs() <= 2.0 * cell, "{xi:?} k={k} delta={delta}: {a} vs {b}");
        }
    }
    let sphere_cell = largest_cell(&BaseManifold::Sphere, 48);
    let a =
        sublevel_measure(&BaseManifold::Sphere, &VelocityField::UnitSphere, &FrequencyVector(vec![2, 0, 2]), 0.3, 48)
            .unwrap();
    let b =
        sublevel_measure(&BaseManifold::Sphere, &VelocityField::UnitSphere, &FrequencyVector(vec![1, 0, 1]), 0.15, 48)
            .unwrap();
    assert!((a - b).abs() <= 2.0 * sphere_cell, "{a} vs {b}");
}

fn verdict(m: &BaseManifold, v: &VelocityField) -> Verdict {
    criterion_report(m, v, DEFAULT_XI_CUTOFF, &DEFAULT_DELTAS, default_grid(m)).unwrap().verdict
}

#[test]
fn verdicts_for_the_registry_systems() {
    let (m, v) = billiard();
    assert_eq!(verdict(&m, &v), Verdict::ShearConsistent);
    let geo = FlowSpec::TorusGeodesic(2).compatible().unwrap().clone();
    assert_eq!(verdict(&geo.manifold, &geo.velocity), Verdict::ShearConsistent);
    let sphere = FlowSpec::SphereGeodesic.compatible().unwrap().clone();
    assert_eq!(verdict(&sphere.manifold, &sphere.velocity), Verdict::ShearViolated);
    let unit = BaseManifold::rectangle(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    assert_eq!(verdict(&unit, &VelocityField::Constant(vec![0.3, 0.7])), Verdict::ShearViolated);
}

#[test]
fn identically_critical_frequency_is_reported() {
    let unit = BaseManifold::rectangle(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    let v = VelocityField::Affine { matrix: vec![vec![1.0, 0.0], vec![0.0, 0.0]], offset: vec![0.0, 0.0] };
    let report = criterion_report(&unit, &v, 4, &DEFAULT_DELTAS, 64).unwrap();
    assert_eq!(report.verdict, Verdict::ShearViolated);
    let xi = FrequencyVector(vec![0, 1]);
    let ladder = report.ladder(&xi).unwrap();
    assert!(ladder.entries.iter().all(|(_, m)| (*m - 1.0).abs() < 1e-12));
    assert!(report.offending().any(|l| l.xi == xi));
    assert!(report.offending().all(|l| l.xi == xi), "only (0,1) is critical");
}

#[test]
fn perturbation_flips_the_verdict() {
    let unit = BaseManifold::rectangle(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    let base = VelocityField::Affine { matrix: vec![vec![1.0, 0.0], vec![0.0, 0.0]], offset: vec![0.0, 0.0] };
    assert_eq!(verdict(&unit, &base), Verdict::ShearViolated);
    let perturbed = VelocityField::Perturbed {
        base: Box::new(base),
        amount: 2f64.sqrt() - 1.0,
        direction: vec![0.0, 1.0],
        bump: None,
    };
    assert_eq!(verdict(&unit, &perturbed), Verdict::ShearConsistent);
}

#[test]
fn csv_lists_every_ladder_entry() {
    let (m, v) = billiard();
    let report = criterion_report(&m, &v, 2, &[0.1, 0.05], 512).unwrap();
    let csv = report.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "xi,delta,measure");
    assert_eq!(lines.len(), 2 + 2 * report.ladders.len());
    assert_eq!(*lines.last().unwrap(), format!("# verdict: {}", report.verdict.label()));
    assert!(lines[1].starts_with('['));
}
