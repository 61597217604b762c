use mehpp_core::*;
use proptest::prelude::*;

proptest! {
    #[test]
    fn schedules_are_periodic(
        period in 0.1f64..10.0,
        high in -5.0f64..10.0,
        low in -5.0f64..10.0,
        ramp in 0.0f64..0.49,
        t in prop::collection::vec(0.0f64..100.0, 1000),
    ) {
        let w = make_square(period, high, low, ramp).unwrap();
        let swing = (high - low).abs();
        // steepest edge; a hold switch is a jump and gets no slope bound
        let slope = if ramp > 0.0 { swing / (ramp * period) } else { 0.0 };
        let edges = [0.0, 0.5 * period, period];
        for &ti in &t {
            let a = w.pressure_at(ti);
            let b = w.pressure_at(ti + period);
            // phase error from rounding `ti + period` and the wrap
            let dphase = 4.0 * f64::EPSILON * (ti + 2.0 * period);
            let tau = ti.rem_euclid(period);
            let near_jump = ramp == 0.0 && edges.iter().any(|e| (tau - e).abs() <= dphase);
            if !near_jump {
                let tol = 1e-12 * a.abs().max(1.0) + slope * dphase;
                prop_assert!((a - b).abs() <= tol, "t = {}: {} vs {}", ti, a, b);
            }
            let lo = high.min(low) - 1e-12;
            let hi = high.max(low) + 1e-12;
            prop_assert!(a >= lo && a <= hi);
        }
    }

    #[test]
    fn presets_stay_within_their_plateaus(
        p_max in 0.0f64..10.0,
        p_min in 0.0f64..5.0,
        t in prop::collection::vec(-10.0f64..10.0, 200),
    ) {
        for preset in Preset::ALL {
            let w = preset.build(p_max, p_min);
            for &ti in &t {
                let p = w.pressure_at(ti);
                prop_assert!(p <= p_max + 1e-12 && p >= -p_min - 1e-12);
            }
        }
    }
}

#[test]
fn preset_names_round_trip() {
    for p in Preset::ALL {
        assert_eq!(Preset::from_name(p.name()), Some(p));
    }
    assert_eq!(Preset::from_name("sawtooth"), None);
}
