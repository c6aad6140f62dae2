use proptest::prelude::*;

use semiclassical::dynamics::{
    initial_conditions, initial_conditions_with_l, invariant_for_relative_energy, invariant_i,
    relative_energy, total_energy, vector_field, DynState, SystemParams,
};
use semiclassical::integrator::{integrate, step, IntegratorConfig, Method};
use semiclassical::Error;

fn params() -> impl Strategy<Value = SystemParams> {
    (
        0.2..3.0f64,
        0.2..3.0f64,
        0.0..2.0f64,
        prop_oneof![Just(0.0), 0.0..0.5f64],
    )
        .prop_map(|(wq, wcl, e, eta)| SystemParams::new(wq, wcl, e, eta).unwrap())
}

fn admissible() -> impl Strategy<Value = DynState> {
    (
        1e-3..2.0f64,
        1e-3..2.0f64,
        -1.0..1.0f64,
        -2.0..2.0f64,
        -2.0..2.0f64,
    )
        .prop_map(|(x2, p2, frac, a, pa)| {
            DynState::new(x2, p2, frac * 2.0 * (x2 * p2).sqrt(), a, pa)
        })
}

proptest! {
    #[test]
    fn divergence_is_minus_damping(p in params(), s in admissible()) {
        let h = 1e-5;
        let base = s.to_array();
        let mut trace = 0.0;
        for j in 0..DynState::DIM {
            let (mut up, mut down) = (base, base);
            up[j] += h;
            down[j] -= h;
            let fu = vector_field(&DynState::from_array(up), &p).to_array();
            let fd = vector_field(&DynState::from_array(down), &p).to_array();
            trace += (fu[j] - fd[j]) / (2.0 * h);
        }
        prop_assert!((trace + p.damping).abs() < 1e-6);
    }

    #[test]
    fn invariant_is_stationary_along_the_field(p in params(), s in admissible()) {
        let f = vector_field(&s, &p);
        let di = f.x2 * s.p2 + s.x2 * f.p2 - 0.5 * s.l * f.l;
        prop_assert!(di.abs() < 1e-12);
    }

    #[test]
    fn energy_rate_is_the_damping_loss(p in params(), s in admissible()) {
        let f = vector_field(&s, &p);
        let de = 0.5 * (p.omega_q * (f.x2 + f.p2)
            + 2.0 * p.omega_cl * (s.a * f.a + s.pa * f.pa)
            + p.coupling * (2.0 * s.a * f.a * s.x2 + s.a * s.a * f.x2));
        let expected = -p.damping * p.omega_cl * s.pa * s.pa;
        prop_assert!((de - expected).abs() < 1e-12 * (1.0 + de.abs()));
    }

    #[test]
    fn initial_conditions_hit_targets(
        energy in 0.1..2.0f64,
        er in 1.0001..1e4f64,
        sign in prop_oneof![Just(1.0), Just(-1.0)],
        p in params(),
    ) {
        let invariant = invariant_for_relative_energy(energy, er, p.omega_q).unwrap();
        let s0 = initial_conditions(energy, invariant, sign, &p).unwrap();
        prop_assert!((total_energy(&s0, &p) - energy).abs() < 1e-12 * energy);
        prop_assert!((invariant_i(&s0) - invariant).abs() < 1e-12 * (1.0 + invariant));
        prop_assert_eq!(s0.a, 0.0);
        prop_assert_eq!(s0.l, 0.0);
        prop_assert!(s0.pa * sign >= 0.0);
        let back = relative_energy(energy, invariant, p.omega_q).unwrap();
        prop_assert!((back - er).abs() < 1e-9 * er);
    }

    #[test]
    fn nonzero_l0_keeps_invariant(
        energy in 0.2..2.0f64,
        er in 1.5..100.0f64,
        l_frac in -0.5..0.5f64,
    ) {
        let p = SystemParams::unit(0.0);
        let invariant = invariant_for_relative_energy(energy, er, 1.0).unwrap();
        let l0 = l_frac * 2.0 * energy;
        let bound = energy * energy - invariant;
        prop_assume!(0.25 * l0 * l0 < bound);
        let s0 = initial_conditions_with_l(energy, invariant, l0, 1.0, &p).unwrap();
        prop_assert!((invariant_i(&s0) - invariant).abs() < 1e-12);
        prop_assert!((total_energy(&s0, &p) - energy).abs() < 1e-12);
    }

    #[test]
    fn below_unit_relative_energy_is_rejected(energy in 0.1..2.0f64, er in 0.01..0.999f64) {
        let err = invariant_for_relative_energy(energy, er, 1.0).unwrap_err();
        prop_assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn one_step_keeps_invariant(p in params(), s in admissible()) {
        let next = step(&s, &p, 1e-3).unwrap();
        let scale = s.x2 * s.p2 + 1.0;
        prop_assert!((invariant_i(&next) - invariant_i(&s)).abs() < 1e-11 * scale);
    }
}

#[test]
fn methods_agree_on_a_dissipative_run() {
    let p = SystemParams::unit(0.05);
    let s0 = initial_conditions(0.6, 0.09, 1.0, &p).unwrap();
    let fixed = IntegratorConfig {
        n_samples: 2001,
        ..IntegratorConfig::default()
    };
    let adaptive = IntegratorConfig {
        method: Method::Adaptive,
        ..fixed
    };
    let a = integrate(&s0, &p, &fixed).unwrap();
    let b = integrate(&s0, &p, &adaptive).unwrap();
    for (x, y) in a.states.iter().zip(&b.states) {
        for (u, v) in x.to_array().iter().zip(y.to_array()) {
            assert!((u - v).abs() < 1e-6);
        }
    }
}
