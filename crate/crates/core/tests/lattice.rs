mod common;

use std::f64::consts::PI;

use rand::Rng;
use shearlab::lattice::{ball_asymptotic, count_sphere, Center};
use shearlab::{count_ball, count_shell, shell_asymptotic, ShearError, ShellQuery};

/// Brute-force ball count for a center `a / den` and dyadic radius
/// `num / 2^k`, all in integers: `4^k |den m - a|^2 <= den^2 num^2`.
fn brute_ball(a: &[i64], den: i64, num: i64, k: u32) -> u64 {
    let r = num as f64 / 2f64.powi(k as i32);
    let reach = r.ceil() as i64 + 1;
    let rhs = (den as i128).pow(2) * (num as i128).pow(2);
    let scale = 4i128.pow(k);
    let mut total = 0;
    let centers: Vec<i64> = a.iter().map(|c| c.div_euclid(den)).collect();
    let ranges: Vec<std::ops::RangeInclusive<i64>> = centers.iter().map(|c| (c - reach)..=(c + reach)).collect();
    let mut stack = vec![(0usize, 0i128)];
    while let Some((axis, acc)) = stack.pop() {
        if axis == a.len() {
            if scale * acc <= rhs {
                total += 1;
            }
            continue;
        }
        for m in ranges[axis].clone() {
            let diff = (den as i128) * (m as i128) - a[axis] as i128;
            stack.push((axis + 1, acc + diff * diff));
        }
    }
    total
}

#[test]
#[allow(clippy::approx_constant)] // a truncated radius, not 1/sqrt(2)
fn small_examples() {
    let q = ShellQuery::new(vec![0.0, 0.0], 5.0, 1e-9).unwrap();
    let c = count_shell(&q).unwrap();
    assert_eq!(c.count, 12);
    assert!(c.exact);
    let q = ShellQuery::new(vec![0.5, 0.5], 0.70710678, 1e-6).unwrap();
    assert_eq!(count_shell(&q).unwrap().count, 4);
    assert_eq!(count_ball(&Center::Float(vec![0.0, 0.0]), 1.0).unwrap().count, 5);
    let q = ShellQuery::new(vec![0.0, 0.0, 0.0], 100.0, 0.1).unwrap();
    assert!((shell_asymptotic(&q).unwrap() - 2.0 * 0.1 * 1e4 * 4.0 * PI).abs() < 1e-6);
    assert!((shell_asymptotic(&q).unwrap() - 25132.7).abs() < 0.1);
}

#[test]
fn ball_counts_track_the_volume() {
    let c2 = count_ball(&Center::Float(vec![0.0, 0.0]), 100.0).unwrap().count as f64;
    let v2 = PI * 1e4;
    assert!((c2 / v2 - 1.0).abs() < 0.01, "{c2} vs {v2}");
    assert!((c2 - v2).abs() < 3.0 * 100f64.powf(2.0 / 3.0), "Gauss error {}", c2 - v2);
    let c3 = count_ball(&Center::Float(vec![0.0, 0.0, 0.0]), 50.0).unwrap().count as f64;
    let v3 = ball_asymptotic(3, 50.0).unwrap();
    assert!((v3 - 4.0 / 3.0 * PI * 50f64.powi(3)).abs() < 1e-6);
    assert!((c3 / v3 - 1.0).abs() < 0.01, "{c3} vs {v3}");
}

#[test]
fn ball_matches_brute_force() {
    let mut rng = common::rng(31);
    for _ in 0..40 {
        let n = rng.gen_range(2..=3);
        let den = rng.gen_range(1..=64);
        let a: Vec<i64> = (0..n).map(|_| rng.gen_range(-200..=200)).collect();
        let k = rng.gen_range(0..=3);
        let num = rng.gen_range(1..=if n == 2 { 120 } else { 40 });
        let r = num as f64 / 2f64.powi(k as i32);
        let center = Center::Rational { numerators: a.clone(), denominator: den as u64 };
        let got = count_ball(&center, r).unwrap();
        assert!(got.exact);
        assert_eq!(got.count, brute_ball(&a, den, num, k), "center {a:?}/{den} r={r}");
    }
}

#[test]
fn shells_nest() {
    let mut rng = common::rng(32);
    for _ in 0..20 {
        let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let r = rng.gen_range(5.0..300.0);
        let mut eps = [rng.gen_range(0.01..0.49), rng.gen_range(0.01..0.49)];
        eps.sort_by(f64::total_cmp);
        let small = count_shell(&ShellQuery::new(x.clone(), r, eps[0]).unwrap()).unwrap();
        let large = count_shell(&ShellQuery::new(x, r, eps[1]).unwrap()).unwrap();
        assert!(small.count <= large.count + large.ambiguous);
    }
}

#[test]
fn shell_equals_ball_difference() {
    let mut rng = common::rng(33);
    for _ in 0..50 {
        let n = rng.gen_range(2..=3);
        let den: u64 = rng.gen_range(1..=40);
        let numerators: Vec<i64> = (0..n).map(|_| rng.gen_range(-500..=500)).collect();
        let center = Center::Rational { numerators, denominator: den };
        // dyadic radius and thickness keep r +- eps exact in f64
        let r = rng.gen_range(8..=if n == 2 { 2400 } else { 400 }) as f64 / 8.0;
        let eps = rng.gen_range(1..=15) as f64 / 32.0;
        let q = ShellQuery::with_center(center.clone(), r, eps).unwrap();
        let shell = count_shell(&q).unwrap();
        let outer = count_ball(&center, r + eps).unwrap();
        let inner = count_ball(&center, r - eps).unwrap();
        let on_inner = count_sphere(&center, r - eps).unwrap();
        assert!(shell.exact && outer.exact && inner.exact);
        assert_eq!(shell.count, outer.count - inner.count + on_inner, "{q:?}");
    }
}

#[test]
fn float_center_brackets_the_exact_count() {
    let exact = Center::Rational { numerators: vec![1, 2], denominator: 3 };
    let float = Center::Float(vec![1.0 / 3.0, 2.0 / 3.0]);
    for r in [10.0, 57.5, 333.0] {
        let e = count_shell(&ShellQuery::with_center(exact.clone(), r, 0.2).unwrap()).unwrap();
        let f = count_shell(&ShellQuery::with_center(float.clone(), r, 0.2).unwrap()).unwrap();
        assert!(!f.exact && e.exact);
        assert!(f.count <= e.count && e.count <= f.count + f.ambiguous, "r={r}: {f:?} vs {e:?}");
    }
}

#[test]
fn shell_ratio_converges() {
    let radii = [250.0, 500.0, 1000.0, 2000.0, 4000.0];
    // exact counts from a separate rational-arithmetic enumeration
    let expected = [788, 1580, 3224, 6412, 12516];
    let deviations: Vec<f64> = radii
        .iter()
        .zip(expected)
        .map(|(r, want)| {
            let q = ShellQuery::new(vec![0.0, 0.0], *r, 0.25).unwrap();
            let count = count_shell(&q).unwrap().count;
            assert_eq!(count, want, "r={r}");
            count as f64 / shell_asymptotic(&q).unwrap() - 1.0
        })
        .map(f64::abs)
        .collect();
    let tail_max: Vec<f64> =
        (0..deviations.len()).map(|i| deviations[i..].iter().copied().fold(0.0, f64::max)).collect();
    assert!(tail_max.windows(2).all(|w| w[1] <= w[0]), "{deviations:?}");
    assert!(tail_max[0] < 0.03, "{deviations:?}");
}

#[test]
fn validation() {
    assert!(ShellQuery::new(vec![0.0, 0.0], 5.0, 0.5).is_err());
    assert!(ShellQuery::new(vec![0.0, 0.0], 0.1, 0.2).is_err());
    assert!(ShellQuery::new(vec![0.0], 5.0, 0.1).is_err());
    let big = ShellQuery::new(vec![0.0, 0.0, 0.0], 3000.0, 0.1).unwrap();
    assert!(matches!(count_shell(&big), Err(ShearError::BudgetExceeded(_))));
    assert!(count_sphere(&Center::Float(vec![1.0 / 3.0, 0.0]), 2.0).is_err());
}
