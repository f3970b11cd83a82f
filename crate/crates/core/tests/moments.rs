use std::f64::consts::PI;

use bergman::moments::{moment_closed_form, moment_quadrature};
use bergman::{DomainSpec, KernelModel, MomentTable, MultiIndex, Settings, Verdict};
use proptest::prelude::*;
use rand::Rng;

fn idx(e: &[u32]) -> MultiIndex {
    MultiIndex::new(e.to_vec())
}

/// Area of `{ |y − x| < (1+x+y)^(−alpha), x, y ≥ 0 }` by hit-or-miss over
/// `x ~ (alpha−1)(1+x)^(−alpha)` and `u = y − x` uniform on
/// `[−(1+x)^(−alpha), (1+x)^(−alpha)]`, which covers the region.
fn monte_carlo_area(alpha: f64, samples: u64, seed: u64) -> (f64, f64) {
    let mut rng = bergman::rng::stream(seed, 0);
    let mut hits = 0u64;
    for _ in 0..samples {
        let v: f64 = rng.random();
        let x = (1.0 - v).powf(-1.0 / (alpha - 1.0)) - 1.0;
        let half = (1.0 + x).powf(-alpha);
        let u = half * (2.0 * rng.random::<f64>() - 1.0);
        let y = x + u;
        if y >= 0.0 && u.abs() < (1.0 + x + y).powf(-alpha) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let scale = 2.0 / (alpha - 1.0);
    (scale * p, scale * (p * (1.0 - p) / samples as f64).sqrt())
}

#[test]
fn sliver_volume_matches_monte_carlo() {
    for (k, alpha) in [2.2, 2.5, 2.8].into_iter().enumerate() {
        let spec = DomainSpec::dalpha(alpha).unwrap();
        let m = moment_quadrature(&spec, &idx(&[0, 0]), &Settings::default()).unwrap();
        let area = m.value.unwrap() / (PI * PI);
        let (mc, se) = monte_carlo_area(alpha, 10_000_000, 100 + k as u64);
        assert!((area - mc).abs() < 5.0 * se, "alpha {alpha}: quadrature {area}, MC {mc} ± {se}");
    }
}

#[test]
fn hartogs_quadrature_matches_closed_form_and_is_honest() {
    let spec = DomainSpec::hartogs_gauss(1).unwrap();
    for a in 0..=4 {
        for q in 0..=3 {
            let i = idx(&[a, q]);
            let exact = moment_closed_form(&spec, &i).unwrap().unwrap().value.unwrap();
            let quad = moment_quadrature(&spec, &i, &Settings::default()).unwrap();
            let err = (quad.value.unwrap() - exact).abs();
            assert!(err / exact < 1e-6, "{i}");
            assert!(err <= quad.abs_error.unwrap() + 1e-15 * exact, "{i}: {err} vs {:?}", quad.abs_error);
        }
    }
}

#[test]
fn sliver_error_bars_cover_a_tighter_run() {
    let spec = DomainSpec::dalpha(2.5).unwrap();
    let loose = Settings {
        quad_tol: 1e-5,
        ..Settings::default()
    };
    for e in [[0, 0], [1, 0], [0, 1]] {
        let a = moment_quadrature(&spec, &idx(&e), &loose).unwrap();
        let b = moment_quadrature(&spec, &idx(&e), &Settings::default()).unwrap();
        let gap = (a.value.unwrap() - b.value.unwrap()).abs();
        assert!(gap <= a.abs_error.unwrap() + b.abs_error.unwrap(), "{e:?}");
        assert!(b.abs_error.unwrap() < 1e-9 * b.value.unwrap() * 10.0);
    }
}

#[test]
fn sliver_degree_one_moment_bound() {
    for alpha in [2.1, 2.5, 2.9] {
        let spec = DomainSpec::dalpha(alpha).unwrap();
        let m10 = moment_quadrature(&spec, &idx(&[1, 0]), &Settings::default()).unwrap();
        let m01 = moment_quadrature(&spec, &idx(&[0, 1]), &Settings::default()).unwrap();
        assert!(m10.value.unwrap() < 2.0 * PI * PI / (alpha - 2.0));
        let gap = (m10.value.unwrap() - m01.value.unwrap()).abs();
        assert!(gap <= m10.abs_error.unwrap() + m01.abs_error.unwrap());
    }
}

#[test]
fn moments_table_csv_shape() {
    let spec = DomainSpec::dalpha(2.5).unwrap();
    let table = MomentTable::build(&spec, 4, &Settings::default()).unwrap();
    let csv = table.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "indices,value,abs_error,verdict,evidence");
    assert_eq!(lines.len(), 16);
    assert_eq!(lines.iter().filter(|l| l.contains("Convergent")).count(), 3);
    assert_eq!(table.convergent().count(), 3);
}

#[test]
fn sliver_series_kernel_is_affine() {
    let spec = DomainSpec::dalpha(2.5).unwrap();
    let table = MomentTable::build(&spec, 4, &Settings::default()).unwrap();
    let k = KernelModel::assemble_series(&table, 4).unwrap();
    let terms = k.series_terms().unwrap();
    assert_eq!(terms.len(), 3);
    let c = |e: &[u32]| terms.iter().find(|(i, _)| i.entries() == e).unwrap().1;
    assert!((c(&[1, 0]) - c(&[0, 1])).abs() < 1e-8 * c(&[1, 0]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn volume_decreases_in_alpha(a in 2.05f64..2.9, d in 0.02f64..0.09) {
        let s = Settings::default();
        let lo = moment_quadrature(&DomainSpec::dalpha(a).unwrap(), &idx(&[0, 0]), &s).unwrap();
        let hi = moment_quadrature(&DomainSpec::dalpha(a + d).unwrap(), &idx(&[0, 0]), &s).unwrap();
        prop_assert!(hi.value.unwrap() < lo.value.unwrap());
    }

    #[test]
    fn classification_follows_degree(a in 2.05f64..2.95, p in 0u32..4, q in 0u32..4) {
        let spec = DomainSpec::dalpha(a).unwrap();
        let c = bergman::moments::classify_convergence(&spec, &idx(&[p, q])).unwrap();
        let want = if p + q <= 1 { Verdict::Convergent } else { Verdict::Divergent };
        prop_assert_eq!(c.verdict, want);
    }

    #[test]
    fn closed_form_moments_are_positive(n in 1usize..4, e in prop::collection::vec(0u32..4, 4)) {
        let entries = e[..n + 1].to_vec();
        for spec in [DomainSpec::hartogs_gauss(n).unwrap(), DomainSpec::ball(n + 1).unwrap()] {
            let r = moment_closed_form(&spec, &MultiIndex::new(entries.clone())).unwrap().unwrap();
            prop_assert!(r.value.unwrap() > 0.0);
            prop_assert_eq!(r.verdict, Verdict::Convergent);
        }
    }
}
