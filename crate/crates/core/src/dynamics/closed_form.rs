//! Closed-form propagators for the ring cavity in the primed basis.
//!
//! With the Hill fundamental solution `S(t)` and the accumulated squeeze
//! `G(t) = (1/2) ln(n(t)/n0)`, the two primed degrees of freedom propagate as
//!
//! `U+(t) = e^{ G Sigma} R+^-1 S(t) R+`,
//! `U-(t) = e^{-G Sigma} R-^-1 S(t) R-`,
//!
//! with `Sigma = diag(1, -1)`, `R+ = [[0, 1], [-f0, 0]]`, `R- = diag(1, f0)`.
//! Loss (amplitude decay rate `gamma`) multiplies the plus block by
//! `e^{-gamma t}` and adds the thermal quadrature
//!
//! `sigma_p+(t) = 2 gamma (2 nbar + 1)/4 e^{-2 gamma t} U+(t) I(t) U+(t)^T`,
//! `I(t) = int_0^t e^{2 gamma tau} (U+^T U+)^{-1} dtau`,
//!
//! which is accumulated here one period at a time through the recurrence
//! `I(mT + r) = sum_k e^{2 gamma k T} W^{-k} J W^{-kT} + e^{2 gamma m T} W^{-m} J_r W^{-mT}`
//! with `W = U+(T)`.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, Vector4};

use crate::floquet::hill_solution;
use crate::gaussian::{Basis, GaussianState};
use crate::modulation::ModulationProfile;
use crate::ode::OdeOptions;
use crate::quad::integrate_matrix;
use crate::{Error, Result, Scalar};

use super::{mixing_matrix, BathSpec, EvolveOptions};

/// `Sigma = diag(1, -1)`.
pub(crate) fn sigma_z<S: Scalar>() -> Matrix2<S> {
    Matrix2::new(S::one(), S::zero(), S::zero(), -S::one())
}

fn r_plus<S: Scalar>(f0: S) -> Matrix2<S> {
    Matrix2::new(S::zero(), S::one(), -f0, S::zero())
}

fn r_minus<S: Scalar>(f0: S) -> Matrix2<S> {
    Matrix2::new(S::one(), S::zero(), S::zero(), f0)
}

fn squeeze<S: Scalar>(g: S) -> Matrix2<S> {
    Matrix2::new(g.exp(), S::zero(), S::zero(), (-g).exp())
}

/// Propagator of the bath-coupled primed degree of freedom (loss excluded).
pub fn plus_propagator<S: Scalar>(
    profile: &ModulationProfile<S>,
    t: S,
    ode: &OdeOptions<S>,
) -> Result<Matrix2<S>> {
    let s = hill_solution(profile, t, ode)?;
    let g = profile.coefficients_at(t).big_g;
    let f0 = profile.f0();
    let r = r_plus(f0);
    let r_inv = Matrix2::new(S::zero(), -S::one() / f0, S::one(), S::zero());
    Ok(squeeze(g) * r_inv * s * r)
}

/// Propagator of the decoherence-free primed degree of freedom.
pub fn minus_propagator<S: Scalar>(
    profile: &ModulationProfile<S>,
    t: S,
    ode: &OdeOptions<S>,
) -> Result<Matrix2<S>> {
    let s = hill_solution(profile, t, ode)?;
    let g = profile.coefficients_at(t).big_g;
    let f0 = profile.f0();
    let r = r_minus(f0);
    let r_inv = Matrix2::new(S::one(), S::zero(), S::zero(), S::one() / f0);
    Ok(squeeze(-g) * r_inv * s * r)
}

/// Closed-form ring propagator at a fixed time, primed basis.
#[derive(Debug, Clone)]
pub struct ClosedFormPropagator<S: Scalar> {
    pub t: S,
    /// Accumulated squeeze `G(t)` (zero at period multiples).
    pub big_g: S,
    /// Hill fundamental solution `S(t)`.
    pub hill: Matrix2<S>,
    /// Lossless propagator `diag(U+, U-)`.
    pub u: Matrix4<S>,
    /// Lossy propagator `e^{-gamma alpha' t} U`.
    pub u_th: Matrix4<S>,
    /// Thermal inhomogeneous covariance (nonzero in the plus block only).
    pub sigma_p: Matrix4<S>,
    pub r_plus: Matrix2<S>,
    pub r_minus: Matrix2<S>,
    pub sigma_z: Matrix2<S>,
}

fn unit_det_inverse<S: Scalar>(m: &Matrix2<S>) -> Matrix2<S> {
    // adjugate of a unit-determinant matrix
    Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)])
}

/// `int_{0}^{span} e^{rate s} (U+(s)^T U+(s))^{-1} ds`.
fn thermal_panel<S: Scalar>(
    profile: &ModulationProfile<S>,
    rate: S,
    span: S,
    ode: &OdeOptions<S>,
) -> Result<Matrix2<S>> {
    if span <= S::zero() {
        return Ok(Matrix2::zeros());
    }
    let mut failure: Option<Error> = None;
    let mut integrand = |s: S| -> Matrix2<S> {
        match plus_propagator(profile, s, ode) {
            Ok(v) => {
                let v_inv = unit_det_inverse(&v);
                v_inv * v_inv.transpose() * (rate * s).exp()
            }
            Err(e) => {
                failure.get_or_insert(e);
                Matrix2::zeros()
            }
        }
    };
    // scale the absolute tolerance by a coarse magnitude estimate
    let tol = S::lit(1e-13)
        * (S::one() + (rate * span).exp() * span)
        * (S::one() / profile.f0() / profile.f0()).max(S::one());
    // the integrand is discontinuous at the squeeze jumps; split there so
    // no jump can hide between the outermost quadrature node and a panel edge
    let eps = S::lit(1e-12) * span;
    let mut cuts = vec![S::zero()];
    for jump in profile.jumps_within(S::zero(), span) {
        if jump.t > eps && jump.t < span - eps {
            cuts.push(jump.t);
        }
    }
    cuts.push(span);
    let mut out = Matrix2::zeros();
    for pair in cuts.windows(2) {
        out += integrate_matrix(&mut integrand, pair[0], pair[1], tol)?;
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Evaluate the closed-form ring propagator and thermal covariance at `t`.
pub fn closed_form_propagator<S: Scalar>(
    profile: &ModulationProfile<S>,
    bath: &BathSpec<S>,
    t: S,
    opts: &EvolveOptions<S>,
) -> Result<ClosedFormPropagator<S>> {
    if t < S::zero() {
        return Err(Error::Domain("propagator time must be >= 0".into()));
    }
    let ode = opts.ode();
    let hill = hill_solution(profile, t, &ode)?;
    let big_g = profile.coefficients_at(t).big_g;
    let u_p = plus_propagator(profile, t, &ode)?;
    let u_m = minus_propagator(profile, t, &ode)?;

    let mut u = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            u[(i, j)] = u_p[(i, j)];
            u[(i + 2, j + 2)] = u_m[(i, j)];
        }
    }
    let gamma = bath.gamma;
    // gamma is the amplitude decay rate: means damp at gamma, variances at 2 gamma
    let rate = gamma + gamma;
    let damp = (-gamma * t).exp();
    let mut u_th = u;
    for i in 0..2 {
        for j in 0..2 {
            u_th[(i, j)] *= damp;
        }
    }

    let mut sigma_p = Matrix4::zeros();
    if gamma > S::zero() && t > S::zero() {
        let period = profile.period();
        let m_f = (t / period + S::lit(1e-12)).floor();
        let m = m_f.to_f64_lossy() as usize;
        let rem = (t - m_f * period).max(S::zero());

        let mut acc = Matrix2::<S>::zeros();
        if m > 0 {
            let w_inv = unit_det_inverse(&plus_propagator(profile, period, &ode)?);
            let j_full = thermal_panel(profile, rate, period, &ode)?;
            let decay = (rate * period).exp();
            let mut term = j_full;
            let mut w_pow = Matrix2::identity(); // W^{-m} accumulator
            for _ in 0..m {
                acc += term;
                term = w_inv * term * w_inv.transpose() * decay;
                w_pow = w_inv * w_pow;
            }
            if rem > S::lit(1e-12) * period {
                let j_rem = thermal_panel(profile, rate, rem, &ode)?;
                acc += w_pow * j_rem * w_pow.transpose() * (rate * m_f * period).exp();
            }
        } else {
            acc = thermal_panel(profile, rate, rem, &ode)?;
        }
        let pref = rate * bath.equilibrium_variance() * (-rate * t).exp();
        let sp = u_p * acc * u_p.transpose() * pref;
        let sym = (sp + sp.transpose()) * S::lit(0.5);
        for i in 0..2 {
            for j in 0..2 {
                sigma_p[(i, j)] = sym[(i, j)];
            }
        }
    }

    let f0 = profile.f0();
    Ok(ClosedFormPropagator {
        t,
        big_g,
        hill,
        u,
        u_th,
        sigma_p,
        r_plus: r_plus(f0),
        r_minus: r_minus(f0),
        sigma_z: sigma_z(),
    })
}

/// Propagate a two-mode original-basis state to time `t` through the
/// closed-form solution: `sigma'(t) = U_th sigma'(0) U_th^T + sigma_p`.
pub fn closed_form_state<S: Scalar>(
    state: &GaussianState<S>,
    profile: &ModulationProfile<S>,
    bath: &BathSpec<S>,
    t: S,
    opts: &EvolveOptions<S>,
) -> Result<GaussianState<S>> {
    if state.modes() != 2 {
        return Err(Error::Domain(
            "closed_form_state requires a two-mode state".into(),
        ));
    }
    if state.basis != Basis::Original {
        return Err(Error::Domain(
            "closed_form_state requires the original basis".into(),
        ));
    }
    let prop = closed_form_propagator(profile, bath, t, opts)?;
    let gm = mixing_matrix::<S>();
    let mean0 = gm * Vector4::from_iterator(state.mean.iter().copied());
    let cov0 = gm * Matrix4::from_iterator(state.cov.iter().copied()) * gm;
    let mean = prop.u_th * mean0;
    let cov = prop.u_th * cov0 * prop.u_th.transpose() + prop.sigma_p;
    let mean = gm * mean;
    let cov = gm * cov * gm;
    GaussianState::new(
        DVector::from_iterator(4, mean.iter().copied()),
        DMatrix::from_iterator(4, 4, cov.iter().copied()),
        Basis::Original,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{dfs_decompose, evolve_ring};
    use crate::gaussian::thermal_state;
    use crate::modulation::{SinusoidalModulation, TwoStepModulation};
    use approx::assert_relative_eq;

    fn resonant(f_r: f64) -> ModulationProfile<f64> {
        ModulationProfile::TwoStep(TwoStepModulation::resonant(1.0, f_r).unwrap())
    }

    fn constant_profile() -> ModulationProfile<f64> {
        ModulationProfile::Sinusoidal(SinusoidalModulation::new(1.0, 0.0, 2.0).unwrap())
    }

    #[test]
    fn identity_at_time_zero() {
        let bath = BathSpec::new(0.1, 0.5).unwrap();
        let prop =
            closed_form_propagator(&resonant(1.2), &bath, 0.0, &EvolveOptions::default()).unwrap();
        assert!((prop.u - Matrix4::identity()).amax() < 1e-14);
        assert!((prop.u_th - Matrix4::identity()).amax() < 1e-14);
        assert!(prop.sigma_p.amax() < 1e-14);
        assert_eq!(prop.big_g, 0.0);
    }

    #[test]
    fn blocks_are_symplectic() {
        let profile = resonant(1.3);
        let bath = BathSpec::new(0.0, 0.0).unwrap();
        for t in [0.7, profile.period(), 3.4, 5.0 * profile.period()] {
            let prop =
                closed_form_propagator(&profile, &bath, t, &EvolveOptions::default()).unwrap();
            let up = prop.u.fixed_view::<2, 2>(0, 0).into_owned();
            let um = prop.u.fixed_view::<2, 2>(2, 2).into_owned();
            assert_relative_eq!(up.determinant(), 1.0, max_relative = 1e-10);
            assert_relative_eq!(um.determinant(), 1.0, max_relative = 1e-10);
            assert!(prop.u.fixed_view::<2, 2>(0, 2).amax() == 0.0);
        }
    }

    #[test]
    fn undriven_thermalization_is_exponential() {
        // no drive: sigma_p+ = var_inf (1 - e^{-2 gamma t}) Id
        let bath = BathSpec::new(0.25, 1.2).unwrap();
        let v_inf = bath.equilibrium_variance();
        for t in [0.3, 2.0, 7.5] {
            let prop =
                closed_form_propagator(&constant_profile(), &bath, t, &EvolveOptions::default())
                    .unwrap();
            let expected = v_inf * (1.0 - (-2.0 * bath.gamma * t).exp());
            for i in 0..2 {
                for j in 0..2 {
                    let want = if i == j { expected } else { 0.0 };
                    assert!(
                        (prop.sigma_p[(i, j)] - want).abs() < 1e-8,
                        "t = {t}, entry ({i},{j}) = {}",
                        prop.sigma_p[(i, j)]
                    );
                }
            }
        }
    }

    #[test]
    fn matches_numeric_ring_twostep() {
        let profile = resonant(1.2);
        let period = profile.period();
        let bath = BathSpec::new(0.06, 0.8).unwrap();
        let st = thermal_state(0.8, 2, Basis::Original).unwrap();
        for steps in [3.0, 7.0, 7.4] {
            let t = steps * period;
            let opts = EvolveOptions {
                snapshot_interval: t,
                ..EvolveOptions::default()
            };
            let direct = closed_form_state(&st, &profile, &bath, t, &opts).unwrap();
            let trace = evolve_ring(&st, &profile, &bath, t, &opts).unwrap();
            let numeric = &trace.snapshots.last().unwrap().state;
            let scale = numeric.cov.amax();
            for i in 0..4 {
                for j in 0..4 {
                    assert!(
                        (direct.cov[(i, j)] - numeric.cov[(i, j)]).abs() < 1e-7 * scale,
                        "t = {t}, ({i},{j}): {} vs {}",
                        direct.cov[(i, j)],
                        numeric.cov[(i, j)]
                    );
                }
            }
        }
    }

    #[test]
    fn matches_numeric_ring_sinusoidal() {
        let profile =
            ModulationProfile::Sinusoidal(SinusoidalModulation::new(1.0, 0.05, 2.0).unwrap());
        let period = profile.period();
        let bath = BathSpec::new(0.04, 0.3).unwrap();
        let st = thermal_state(0.3f64, 2, Basis::Original).unwrap();
        let t = 4.6 * period;
        let opts = EvolveOptions {
            snapshot_interval: t,
            ..EvolveOptions::default()
        };
        let direct = closed_form_state(&st, &profile, &bath, t, &opts).unwrap();
        let trace = evolve_ring(&st, &profile, &bath, t, &opts).unwrap();
        let numeric = &trace.snapshots.last().unwrap().state;
        let scale = numeric.cov.amax();
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    (direct.cov[(i, j)] - numeric.cov[(i, j)]).abs() < 1e-6 * scale,
                    "({i},{j}): {} vs {}",
                    direct.cov[(i, j)],
                    numeric.cov[(i, j)]
                );
            }
        }
    }

    #[test]
    fn lossless_propagation_is_congruence() {
        let profile = resonant(1.15);
        let bath = BathSpec::new(0.0, 0.0).unwrap();
        let st = thermal_state(0.4, 2, Basis::Original).unwrap();
        let t = 2.5 * profile.period();
        let opts = EvolveOptions::default();
        let prop = closed_form_propagator(&profile, &bath, t, &opts).unwrap();
        assert_eq!(prop.u, prop.u_th);
        assert!(prop.sigma_p.amax() == 0.0);

        let out = closed_form_state(&st, &profile, &bath, t, &opts).unwrap();
        // symplectic spectrum of each primed block is preserved
        let blocks = dfs_decompose(&out).unwrap();
        for b in [blocks.plus_cov, blocks.minus_cov] {
            let nu = b.determinant().sqrt();
            assert_relative_eq!(nu, (2.0 * 0.4 + 1.0) / 4.0, max_relative = 1e-9);
        }
    }
}
