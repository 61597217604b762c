use mehpp_core::model::DEFAULT_Z_IN;
use mehpp_core::*;
use proptest::prelude::*;

/// Raw formula, written out independently of the library.
fn p_ref(z: f64, a_mo: f64, a_mi: f64, z1: f64) -> f64 {
    1.0 - z + a_mo / (z1 - z).powi(3) - a_mi / (8.0 * z.powi(3))
}

/// Number of strict sign changes of `f` on an `n`-point uniform grid.
fn grid_sign_changes<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let v = f(x);
        if v == 0.0 {
            continue;
        }
        if let Some((xp, vp)) = prev {
            if (vp < 0.0) != (v < 0.0) {
                out.push(0.5 * (xp + x));
            }
        }
        prev = Some((x, v));
    }
    out
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-12 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b))
}

fn oracle_a_crit(z1: f64) -> f64 {
    let f = |z: f64| 1.0 / (z1 - z).powi(4) + 1.0 / (8.0 * z.powi(4));
    1.0 / (3.0 * golden_min(f, DEFAULT_Z_IN, z1 - 1e-9))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn dimensionless_form_matches_dimensional(
        k_e in 1.0f64..1e4,
        z0 in 1e-4f64..1e-1,
        rel_mo in 0.0f64..0.5,
        rel_mi in 0.0f64..0.5,
        z1_rel in 1.3f64..3.0,
        frac in 0.0f64..1.0,
    ) {
        let d = DimensionalParams {
            k_e,
            k_mi: rel_mi * k_e * z0.powi(4),
            k_mo: rel_mo * k_e * z0.powi(4),
            z0,
            z1: z1_rel * z0,
            z_in: 0.25 * z0,
            z_out: 1.25 * z0,
        };
        let m = nondimensionalize(&d).unwrap();
        let z = d.z_in + frac * (d.z_out - d.z_in);
        let dim = pressure_dimensional(z, &d).unwrap();
        let star = pressure_star(z / z0, &m).unwrap() * k_e * z0;
        let scale = dim.abs().max(k_e * z0);
        prop_assert!((dim - star).abs() <= 1e-12 * scale, "{dim} vs {star}");
    }

    #[test]
    fn pressure_star_matches_reference_formula(a in 0.0f64..1.0, z in 0.25f64..1.25) {
        let prm = MagnetoElasticParams::symmetric(a);
        let v = pressure_star(z, &prm).unwrap();
        prop_assert!((v - p_ref(z, a, a, 1.5)).abs() <= 1e-12 * v.abs().max(1.0));
    }
}

#[test]
fn slope_matches_central_differences_on_random_points() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let mut runner = TestRunner::deterministic();
    let strat = (0.0f64..0.5, 0.0f64..0.5, 1.4f64..2.5, 0.0f64..1.0);
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (a_mo, a_mi, z1, frac) = strat.new_tree(&mut runner).unwrap().current();
        let prm = MagnetoElasticParams::new(a_mo, a_mi, z1, 0.25, 1.25).unwrap();
        let z = 0.25 + frac;
        let f = |x: f64| p_ref(x, a_mo, a_mi, z1);
        // five-point stencil
        let fd = (f(z - 2.0 * h) - 8.0 * f(z - h) + 8.0 * f(z + h) - f(z + 2.0 * h)) / (12.0 * h);
        let an = pressure_star_slope(z, &prm).unwrap();
        worst = worst.max((fd - an).abs());
    }
    assert!(worst <= 1e-6, "worst finite-difference gap {worst}");
}

#[test]
fn stationary_points_agree_with_million_point_scan() {
    for a in [0.02, 0.05, 0.1, 0.13, 0.14, 0.2, 0.5, 1.0] {
        let prm = MagnetoElasticParams::symmetric(a);
        let slope = |z: f64| -1.0 + 3.0 * a / (1.5 - z).powi(4) + 3.0 * a / (8.0 * z.powi(4));
        let oracle = grid_sign_changes(slope, 0.25, 1.5 - 1e-9, 1_000_000);
        let pts = stationary_points(&prm);
        assert_eq!(pts.len(), oracle.len(), "a = {a}");
        for (p, o) in pts.iter().zip(&oracle) {
            assert!((p.z_star - o).abs() < 2e-6, "a = {a}: {} vs {o}", p.z_star);
        }
        let expected = if a < 0.134 { 2 } else { 0 };
        assert_eq!(pts.len(), expected, "a = {a}");
        if expected == 2 {
            assert_eq!(pts[0].kind, StationaryKind::LocalMaximum);
            assert_eq!(pts[1].kind, StationaryKind::LocalMinimum);
        }
    }
}

#[test]
fn regime_flips_at_the_critical_coefficient() {
    let a_crit = critical_coefficient(1.5);
    for delta in [1e-3, 5e-4, 2e-4] {
        assert_eq!(
            stationary_points(&MagnetoElasticParams::symmetric(a_crit - delta)).len(),
            2
        );
        assert!(stationary_points(&MagnetoElasticParams::symmetric(a_crit + delta)).is_empty());
    }
}

#[test]
fn critical_coefficient_matches_golden_section_oracle() {
    for z1 in [1.3, 1.5, 2.0, 2.7, 3.0] {
        let a = critical_coefficient(z1);
        let o = oracle_a_crit(z1);
        assert!((a - o).abs() < 1e-9, "z1 = {z1}: {a} vs {o}");
    }
    assert!((critical_coefficient(2.0) - 0.4234).abs() < 1e-4);
}

#[test]
fn critical_coefficient_increases_with_magnet_distance() {
    let values: Vec<f64> = (13..=30)
        .map(|k| critical_coefficient(k as f64 / 10.0))
        .collect();
    assert!(values.windows(2).all(|w| w[1] > w[0]), "{values:?}");
}

#[test]
fn equilibria_agree_with_brute_force_scan() {
    for a in [0.0, 0.02, 0.1, 0.13, 0.3] {
        let prm = MagnetoElasticParams::symmetric(a);
        for p in [-0.5, 0.0, 0.2, 0.46, 0.5, 0.6, 1.0, 3.0, 6.1] {
            let f = |z: f64| p_ref(z, a, a, 1.5) - p;
            let oracle = grid_sign_changes(f, 0.25, 1.25, 1_000_000);
            let roots = equilibria_at_pressure(p, &prm);
            assert_eq!(roots.len(), oracle.len(), "a = {a}, p = {p}");
            for (r, o) in roots.iter().zip(&oracle) {
                assert!((r.z_star - o).abs() < 2e-6);
                let s =
                    -1.0 + 3.0 * a / (1.5 - r.z_star).powi(4) + 3.0 * a / (8.0 * r.z_star.powi(4));
                assert_eq!(r.stable, s < 0.0);
            }
        }
    }
}

#[test]
fn stable_branch_pressure_window_for_paper_coefficient() {
    let prm = MagnetoElasticParams::symmetric(0.1);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..=100_000 {
        let z = 0.25 + i as f64 * 1e-5;
        let s = -1.0 + 0.3 / (1.5 - z).powi(4) + 0.3 / (8.0 * z.powi(4));
        if s < 0.0 {
            let p = p_ref(z, 0.1, 0.1, 1.5);
            lo = lo.min(p);
            hi = hi.max(p);
        }
    }
    assert!(
        (lo - 0.457).abs() < 1e-3 && (hi - 0.501).abs() < 1e-3,
        "[{lo}, {hi}]"
    );
    for r in equilibria_at_pressure(0.47, &prm) {
        if r.stable {
            assert!(r.z_star > 0.47 && r.z_star < 0.74);
        }
    }
}
