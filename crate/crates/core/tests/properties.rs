//! Randomized invariants of the library, checked with proptest.

use dce_core::asymptotics::{
    classical_yield, f_factors, occurrence_time, AsymptoticParams, ClassicalSeed, DriveKind,
};
use dce_core::floquet::{hill_solution, monodromy, twostep_discriminant};
use dce_core::gaussian::{
    log_negativity, symplectic_eigenvalues, thermal_state, Basis, GaussianState,
};
use dce_core::modulation::{ModulationProfile, SinusoidalModulation, TwoStepModulation};
use dce_core::ode::OdeOptions;
use nalgebra::{DMatrix, DVector, Matrix4};
use proptest::prelude::*;

fn twostep(f_r: f64, theta1: f64, theta2: f64) -> ModulationProfile<f64> {
    ModulationProfile::TwoStep(TwoStepModulation::new(1.0, f_r, theta1, theta2 / f_r).unwrap())
}

fn discrete_params(f_r: f64, gamma: f64, nbar: f64) -> AsymptoticParams<f64> {
    let m = TwoStepModulation::resonant(1.0, f_r).unwrap();
    AsymptoticParams::new(
        f_r.ln().abs() / m.period(),
        gamma,
        nbar,
        m.period(),
        DriveKind::Discrete {
            t1: m.t1(),
            t2: m.t2(),
            f_r: m.f_ratio(),
        },
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn monodromy_has_unit_determinant(
        f_r in 0.5f64..2.0,
        theta1 in 0.05f64..6.0,
        theta2 in 0.05f64..6.0,
    ) {
        let profile = twostep(f_r, theta1, theta2);
        let m = monodromy(&profile, &OdeOptions::default()).unwrap();
        prop_assert!((m.s.determinant() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn closed_discriminant_matches_monodromy(
        f_r in 0.5f64..2.0,
        theta1 in 0.05f64..6.0,
        theta2 in 0.05f64..6.0,
    ) {
        let profile = twostep(f_r, theta1, theta2);
        let m = monodromy(&profile, &OdeOptions::default()).unwrap();
        let closed = twostep_discriminant(f_r, theta1, theta2);
        prop_assert!((m.delta - closed).abs() < 1e-9);
    }

    #[test]
    fn hill_solution_is_periodic(
        f_r in 0.6f64..1.6,
        theta1 in 0.2f64..4.0,
        theta2 in 0.2f64..4.0,
        frac in 0.0f64..1.0,
        m in 1usize..6,
    ) {
        // S(mT + r) = S(r) S(T)^m for the periodic Hill equation
        let profile = twostep(f_r, theta1, theta2);
        let ode = OdeOptions::default();
        let period = profile.period();
        let r = frac * period;
        let full = hill_solution(&profile, m as f64 * period + r, &ode).unwrap();
        let s_t = hill_solution(&profile, period, &ode).unwrap();
        let s_r = hill_solution(&profile, r, &ode).unwrap();
        let mut pow = s_t;
        for _ in 1..m {
            pow = s_t * pow;
        }
        let expected = s_r * pow;
        let scale = expected.amax().max(1.0);
        prop_assert!((full - expected).amax() < 1e-9 * scale);
    }

    #[test]
    fn sinusoidal_monodromy_has_unit_determinant(
        dn in 0.0f64..0.08,
        omega in 0.5f64..3.0,
    ) {
        let profile =
            ModulationProfile::Sinusoidal(SinusoidalModulation::new(1.0, dn, omega).unwrap());
        let m = monodromy(&profile, &OdeOptions::default()).unwrap();
        prop_assert!((m.s.determinant() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn thermal_states_are_separable(nbar in 0.0f64..5.0) {
        let st = thermal_state(nbar, 2, Basis::Original).unwrap();
        prop_assert_eq!(log_negativity(&st).unwrap(), 0.0);
    }

    #[test]
    fn symplectic_congruence_preserves_spectrum(
        nbar in 0.0f64..3.0,
        g in -1.0f64..1.0,
        angle in 0.0f64..std::f64::consts::TAU,
    ) {
        // squeeze+rotation on one mode is symplectic: invariants must survive
        let st = thermal_state(nbar, 2, Basis::Original).unwrap();
        let (c, s) = (angle.cos(), angle.sin());
        let mut k = Matrix4::identity();
        k[(0, 0)] = g.exp() * c;
        k[(0, 1)] = g.exp() * s;
        k[(1, 0)] = -(-g).exp() * s;
        k[(1, 1)] = (-g).exp() * c;
        let cov = DMatrix::from_fn(4, 4, |i, j| k[(i, j)]);
        let new_cov = &cov * &st.cov * cov.transpose();
        let st2 = GaussianState::new(DVector::zeros(4), new_cov, Basis::Original).unwrap();
        let before = symplectic_eigenvalues(&st.cov).unwrap();
        let after = symplectic_eigenvalues(&st2.cov).unwrap();
        for (a, b) in before.iter().zip(after.iter()) {
            prop_assert!((a - b).abs() < 1e-8 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn f_factors_vanish_without_loss(f_r in 1.01f64..1.6, m in 1usize..200) {
        let params = discrete_params(f_r, 0.0, 0.7);
        let (f_minus, f_plus) = f_factors(&params, m).unwrap();
        prop_assert!(f_minus.abs() < 1e-12);
        prop_assert!(f_plus.abs() < 1e-12);
    }

    #[test]
    fn f_factors_continuous_at_critical_loss(f_r in 1.05f64..1.5, m in 1usize..100) {
        // eta_minus = gamma - mu crosses zero smoothly
        let params = discrete_params(f_r, 0.0, 0.5);
        let mu = params.mu;
        let at = |gamma: f64| f_factors(&discrete_params(f_r, gamma, 0.5), m).unwrap();
        let (lo_m, lo_p) = at(mu * (1.0 - 1e-9));
        let (mid_m, mid_p) = at(mu);
        let (hi_m, hi_p) = at(mu * (1.0 + 1e-9));
        prop_assert!((lo_m - mid_m).abs() < 1e-5 * (1.0 + mid_m.abs()));
        prop_assert!((hi_m - mid_m).abs() < 1e-5 * (1.0 + mid_m.abs()));
        prop_assert!((lo_p - mid_p).abs() < 1e-5 * (1.0 + mid_p.abs()));
        prop_assert!((hi_p - mid_p).abs() < 1e-5 * (1.0 + mid_p.abs()));
    }

    #[test]
    fn occurrence_time_monotone_in_temperature(
        f_r in 1.02f64..1.3,
        gamma_t in 0.02f64..0.3,
        nbar in 0.0f64..4.0,
    ) {
        let period = TwoStepModulation::resonant(1.0f64, f_r).unwrap().period();
        let t_lo = occurrence_time(&discrete_params(f_r, gamma_t / period, nbar))
            .unwrap()
            .time;
        let t_hi = occurrence_time(&discrete_params(f_r, gamma_t / period, nbar + 0.5))
            .unwrap()
            .time;
        prop_assert!(t_hi >= t_lo - 1e-9);
    }

    #[test]
    fn classical_zero_seed_yields_nothing(
        f_r in 1.01f64..1.8,
        gamma in 0.0f64..0.2,
        m in 0usize..500,
    ) {
        let period = TwoStepModulation::resonant(1.0f64, f_r).unwrap().period();
        let mu = f_r.ln() / period;
        let seed = ClassicalSeed::new(0.0).unwrap();
        prop_assert_eq!(classical_yield(&seed, mu, gamma, m, period), 0.0);
    }
}
