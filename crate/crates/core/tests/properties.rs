use std::f64::consts::PI;

use jcgp::bloch::{bloch_map, bloch_to_state, BlochPoint};
use jcgp::lindblad::{default_step, integrate_master, Density3};
use jcgp::mixed::{eigen_track, mixed_gp_general, mixed_gp_pure_init};
use jcgp::model::{eigensystem, Branch, JcParams, PureState2};
use jcgp::phase::{principal, unwrap};
use jcgp::unitary::{closed_form_gp, evolve};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn principal_is_idempotent_and_in_range(a in -100.0f64..100.0) {
        let p = principal(a);
        prop_assert!((-PI..PI).contains(&p));
        prop_assert_eq!(principal(p), p);
        let k = ((a - p) / (2.0 * PI)).round();
        prop_assert!((a - p - 2.0 * PI * k).abs() < 1e-9);
    }

    #[test]
    fn unwrap_removes_jumps(steps in prop::collection::vec(-3.0f64..3.0, 1..50)) {
        let mut acc = 0.0;
        let raw: Vec<f64> = steps.iter().map(|s| { acc += s; principal(acc) }).collect();
        let un = unwrap(&raw);
        for w in un.windows(2) {
            prop_assert!((w[1].value - w[0].value).abs() <= PI + 1e-12);
        }
        for (u, r) in un.iter().zip(&raw) {
            prop_assert!(principal(u.value - r).abs() < 1e-9);
        }
    }

    #[test]
    fn bloch_round_trip(z in -0.999f64..0.999, phi in 0.0f64..std::f64::consts::TAU) {
        let r = (1.0 - z * z).sqrt();
        let p = BlochPoint::new(r * phi.cos(), r * phi.sin(), z);
        let q = bloch_map(&bloch_to_state(&p).as_array());
        prop_assert!(p.distance(&q) < 1e-12);
    }

    #[test]
    fn evolution_preserves_norm_and_eigenstates(delta in -5.0f64..5.0, t in 0.0f64..20.0) {
        let params = JcParams::ratios(delta, 0.0, 0.0).unwrap();
        let psi = evolve(&params, &PureState2::excited(), t);
        prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
        let plus = eigensystem(&params).state(Branch::Plus);
        let moved = evolve(&params, &plus, t);
        prop_assert!((plus.overlap(&moved).norm() - 1.0).abs() < 1e-12);
        prop_assert!(closed_form_gp(&params, t).is_finite());
    }

    #[test]
    fn eigen_track_invariants(delta in 0.0f64..4.0, gamma in 0.0f64..3.0, pump in 0.0f64..0.05) {
        let params = JcParams::ratios(delta, gamma, pump).unwrap();
        let tau = params.period();
        let traj = integrate_master(&params, &Density3::basis_state(1), tau, default_step(&params, 1000.0)).unwrap();
        let track = eigen_track(&traj);
        for k in 0..track.len() {
            prop_assert!((track.eps0[k] + track.eps_plus[k] + track.eps_minus[k] - 1.0).abs() < 1e-9);
            prop_assert!(track.eps_plus[k] >= track.eps_minus[k]);
        }
        for w in track.vector_plus.windows(2) {
            let ov = jcgp::linalg::inner(&w[0], &w[1]);
            prop_assert!(ov.re > 0.0 && ov.im.abs() < 1e-12);
        }
        let a = mixed_gp_pure_init(&track).unwrap();
        let b = mixed_gp_general(&track, track.initial_weights());
        for k in 0..a.len() {
            if let (Some(x), Some(y)) = (a.value(k), b.value(k)) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
