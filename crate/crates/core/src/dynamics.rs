//! Open-system evolution of the modulated cavities.
//!
//! The linear cavity is a single mode with drift generator
//! `A+ = [[g, f], [-f, -g]]`; `gamma` is the amplitude decay rate, so the
//! mean damps at `gamma` and the covariance relaxes at `2 gamma`. The ring cavity
//! is a pair of counter-propagating modes; in the primed basis
//! `X' = Gamma X` it splits into two independent single-mode problems, of
//! which only the symmetric ("plus") one couples to the bath, while the
//! antisymmetric ("minus") one is a decoherence-free subspace.
//!
//! Two-step drives are integrated piecewise, with the squeeze kicks at the
//! index jumps applied as exact symplectic congruences `e^{dG Sigma}`.

mod closed_form;

pub use closed_form::{
    closed_form_propagator, closed_form_state, minus_propagator, plus_propagator,
    ClosedFormPropagator,
};

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, Vector2, Vector4};

use crate::gaussian::{self, Basis, GaussianState, ThermalSpec};
use crate::modulation::ModulationProfile;
use crate::ode::{integrate, OdeOptions};
use crate::{Error, Result, Scalar};

/// Markovian bath: coupling rate and thermal occupation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec<S: Scalar> {
    pub gamma: S,
    pub nbar: S,
}

impl<S: Scalar> BathSpec<S> {
    pub fn new(gamma: S, nbar: S) -> Result<Self> {
        if gamma < S::zero() || nbar < S::zero() {
            return Err(Error::Domain(
                "bath requires gamma >= 0 and nbar >= 0".into(),
            ));
        }
        Ok(Self { gamma, nbar })
    }

    /// Per-quadrature equilibrium variance `(2 nbar + 1)/4`.
    pub fn equilibrium_variance(&self) -> S {
        ThermalSpec { nbar: self.nbar }.variance()
    }
}

/// `M2 = 2 [[-g, f], [-f, g]]`.
pub fn m2<S: Scalar>(f: S, g: S) -> Matrix2<S> {
    let two = S::lit(2.0);
    Matrix2::new(-two * g, two * f, -two * f, two * g)
}

/// Orthogonal, symmetric, involutive mixing transform `Gamma` between the
/// original and primed quadrature bases.
pub fn mixing_matrix<S: Scalar>() -> Matrix4<S> {
    let h = S::lit(0.5).sqrt();
    Matrix4::new(
        h,
        S::zero(),
        h,
        S::zero(),
        S::zero(),
        h,
        S::zero(),
        h,
        h,
        S::zero(),
        -h,
        S::zero(),
        S::zero(),
        h,
        S::zero(),
        -h,
    )
}

/// Projector `alpha' = diag(Id2, 0)` onto the bath-coupled primed block.
pub fn alpha_prime<S: Scalar>() -> Matrix4<S> {
    let mut m = Matrix4::zeros();
    m[(0, 0)] = S::one();
    m[(1, 1)] = S::one();
    m
}

/// The paper-layout drift matrices assembled at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrices<S: Scalar> {
    pub m2: Matrix2<S>,
    pub m4: Matrix4<S>,
    pub mixing: Matrix4<S>,
    pub alpha_prime: Matrix4<S>,
}

/// Assemble `M2`, `M4 = (1/2) diag(M2, -M2^T)`, `Gamma` and `alpha'`.
pub fn drift_matrices<S: Scalar>(f: S, g: S) -> DriftMatrices<S> {
    let m2 = m2(f, g);
    let half = S::lit(0.5);
    let mut m4 = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            m4[(i, j)] = half * m2[(i, j)];
            m4[(i + 2, j + 2)] = -half * m2[(j, i)];
        }
    }
    DriftMatrices {
        m2,
        m4,
        mixing: mixing_matrix(),
        alpha_prime: alpha_prime(),
    }
}

/// Drift generator of the bath-coupled degree of freedom, `-M2^T/2`.
pub(crate) fn gen_plus<S: Scalar>(f: S, g: S) -> Matrix2<S> {
    Matrix2::new(g, f, -f, -g)
}

/// Drift generator of the decoherence-free degree of freedom, `M2/2`.
pub(crate) fn gen_minus<S: Scalar>(f: S, g: S) -> Matrix2<S> {
    Matrix2::new(-g, f, -f, g)
}

/// Options for the evolution drivers.
#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions<S: Scalar> {
    pub rel_tol: S,
    pub abs_tol: S,
    /// Snapshots are emitted at multiples of this interval; exact period
    /// multiples and `t_end` are always included.
    pub snapshot_interval: S,
    /// Abort threshold for uncertainty-principle violations of emitted
    /// snapshots: requires `nu_min >= 1/4 - uncertainty_tol`.
    pub uncertainty_tol: S,
    pub max_steps: usize,
}

impl<S: Scalar> Default for EvolveOptions<S> {
    fn default() -> Self {
        Self {
            rel_tol: S::lit(1e-10),
            abs_tol: S::lit(1e-13),
            snapshot_interval: S::one(),
            uncertainty_tol: S::lit(1e-6),
            max_steps: 50_000_000,
        }
    }
}

impl<S: Scalar> EvolveOptions<S> {
    fn ode(&self) -> OdeOptions<S> {
        OdeOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_steps: self.max_steps,
        }
    }
}

/// One emitted state with its derived observables. `e_n` and `nu_dfs` are
/// absent for the single-mode (linear cavity) evolution.
#[derive(Debug, Clone)]
pub struct Snapshot<S: Scalar> {
    pub t: S,
    pub state: GaussianState<S>,
    /// Photon observable `<N+1>`.
    pub n_mean: S,
    pub e_n: Option<S>,
    pub nu_min: S,
    pub nu_dfs: Option<S>,
    pub trace_sigma: S,
}

#[derive(Debug, Clone)]
pub struct EvolutionTrace<S: Scalar> {
    pub snapshots: Vec<Snapshot<S>>,
}

/// Primed-basis view of a two-mode state: bath-coupled block, DFS block and
/// their cross covariance (zero whenever the ring dynamics started from a
/// primed-block-diagonal state).
#[derive(Debug, Clone, Copy)]
pub struct DfsBlocks<S: Scalar> {
    pub plus_mean: Vector2<S>,
    pub plus_cov: Matrix2<S>,
    pub minus_mean: Vector2<S>,
    pub minus_cov: Matrix2<S>,
    pub cross: Matrix2<S>,
}

/// Split a two-mode original-basis state into its primed blocks.
pub fn dfs_decompose<S: Scalar>(state: &GaussianState<S>) -> Result<DfsBlocks<S>> {
    if state.modes() != 2 {
        return Err(Error::Domain(
            "dfs_decompose requires a two-mode state".into(),
        ));
    }
    if state.basis != Basis::Original {
        return Err(Error::Domain(
            "dfs_decompose requires the original basis".into(),
        ));
    }
    let gamma_mix = mixing_matrix::<S>();
    let mean = Vector4::from_iterator(state.mean.iter().copied());
    let cov = Matrix4::from_iterator(state.cov.iter().copied());
    let mean_p = gamma_mix * mean;
    let cov_p = gamma_mix * cov * gamma_mix;
    Ok(DfsBlocks {
        plus_mean: mean_p.fixed_rows::<2>(0).into_owned(),
        plus_cov: cov_p.fixed_view::<2, 2>(0, 0).into_owned(),
        minus_mean: mean_p.fixed_rows::<2>(2).into_owned(),
        minus_cov: cov_p.fixed_view::<2, 2>(2, 2).into_owned(),
        cross: cov_p.fixed_view::<2, 2>(0, 2).into_owned(),
    })
}

// -- event grid ------------------------------------------------------------

struct Event<S: Scalar> {
    t: S,
    delta_g: Option<S>,
    snapshot: bool,
}

fn build_events<S: Scalar>(
    profile: &ModulationProfile<S>,
    t_end: S,
    snapshot_interval: S,
) -> Result<Vec<Event<S>>> {
    if t_end <= S::zero() {
        return Err(Error::Domain("t_end must be > 0".into()));
    }
    if snapshot_interval <= S::zero() {
        return Err(Error::Domain("snapshot_interval must be > 0".into()));
    }
    let period = profile.period();
    let eps = S::lit(1e-9) * period.min(snapshot_interval);

    let mut times: Vec<(S, Option<S>, bool)> = Vec::new();
    let mut k = S::one();
    loop {
        let t = k * snapshot_interval;
        if t > t_end + eps {
            break;
        }
        times.push((t.min(t_end), None, true));
        k += S::one();
    }
    let mut m = S::one();
    loop {
        let t = m * period;
        if t > t_end + eps {
            break;
        }
        times.push((t.min(t_end), None, true));
        m += S::one();
    }
    times.push((t_end, None, true));
    for j in profile.jumps_within(S::zero(), t_end) {
        times.push((j.t.min(t_end), Some(j.delta_g), false));
    }

    times.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut events: Vec<Event<S>> = Vec::new();
    for (t, dg, snap) in times {
        match events.last_mut() {
            Some(last) if (t - last.t).abs() <= eps => {
                if let Some(dg) = dg {
                    last.delta_g = Some(last.delta_g.unwrap_or_else(S::zero) + dg);
                }
                last.snapshot |= snap;
            }
            _ => events.push(Event {
                t,
                delta_g: dg,
                snapshot: snap,
            }),
        }
    }
    Ok(events)
}

/// Midpoint coefficient sample for drives that are constant between events
/// (two-step); `None` for smoothly varying drives.
fn span_coefficients<S: Scalar>(
    profile: &ModulationProfile<S>,
    t_start: S,
    t_end: S,
) -> Option<crate::modulation::CoefficientSample<S>> {
    match profile {
        ModulationProfile::TwoStep(_) => {
            Some(profile.coefficients_at(S::lit(0.5) * (t_start + t_end)))
        }
        ModulationProfile::Sinusoidal(_) => None,
    }
}

// -- symmetric packing -----------------------------------------------------

fn pack2<S: Scalar>(x: &Vector2<S>, cov: &Matrix2<S>) -> DVector<S> {
    DVector::from_vec(vec![x[0], x[1], cov[(0, 0)], cov[(0, 1)], cov[(1, 1)]])
}

fn unpack2<S: Scalar>(y: &DVector<S>) -> (Vector2<S>, Matrix2<S>) {
    (
        Vector2::new(y[0], y[1]),
        Matrix2::new(y[2], y[3], y[3], y[4]),
    )
}

fn pack4<S: Scalar>(x: &Vector4<S>, cov: &Matrix4<S>) -> DVector<S> {
    let mut v = Vec::with_capacity(14);
    v.extend_from_slice(&[x[0], x[1], x[2], x[3]]);
    for i in 0..4 {
        for j in i..4 {
            v.push(cov[(i, j)]);
        }
    }
    DVector::from_vec(v)
}

fn unpack4<S: Scalar>(y: &DVector<S>) -> (Vector4<S>, Matrix4<S>) {
    let x = Vector4::new(y[0], y[1], y[2], y[3]);
    let mut cov = Matrix4::zeros();
    let mut idx = 4;
    for i in 0..4 {
        for j in i..4 {
            cov[(i, j)] = y[idx];
            cov[(j, i)] = y[idx];
            idx += 1;
        }
    }
    (x, cov)
}

// -- linear cavity ---------------------------------------------------------

/// Evolve a one-mode state under the modulated Hamiltonian and bath.
pub fn evolve_linear<S: Scalar>(
    state: &GaussianState<S>,
    profile: &ModulationProfile<S>,
    bath: &BathSpec<S>,
    t_end: S,
    opts: &EvolveOptions<S>,
) -> Result<EvolutionTrace<S>> {
    if state.modes() != 1 {
        return Err(Error::Domain(
            "evolve_linear requires a one-mode state".into(),
        ));
    }
    if state.basis != Basis::Original {
        return Err(Error::Domain(
            "evolve_linear requires the original basis".into(),
        ));
    }
    let x0 = Vector2::new(state.mean[0], state.mean[1]);
    let cov0 = Matrix2::new(
        state.cov[(0, 0)],
        state.cov[(0, 1)],
        state.cov[(1, 0)],
        state.cov[(1, 1)],
    );
    let mut y = pack2(&x0, &cov0);

    let gamma = bath.gamma;
    let var_inf = bath.equilibrium_variance();
    let lossy = gamma > S::zero();
    let p = *profile;
    let rhs_with = move |c: crate::modulation::CoefficientSample<S>, y: &DVector<S>| {
        let a = gen_plus(c.f, c.g);
        let (x, cov) = unpack2(y);
        let mut dx = a * x;
        let mut dcov = a * cov + cov * a.transpose();
        if lossy {
            dx -= x * gamma;
            dcov -= (cov - Matrix2::identity() * var_inf) * (gamma + gamma);
        }
        pack2(&dx, &dcov)
    };

    let events = build_events(profile, t_end, opts.snapshot_interval)?;
    let ode = opts.ode();
    let mut snapshots = Vec::new();
    snapshots.push(linear_snapshot(S::zero(), &y, opts)?);
    let mut t_cur = S::zero();
    for ev in events {
        // two-step coefficients are constant between events; freezing them
        // at the span midpoint keeps the RHS free of boundary round-off
        let frozen = span_coefficients(&p, t_cur, ev.t);
        let rhs =
            |t: S, y: &DVector<S>| rhs_with(frozen.unwrap_or_else(|| p.coefficients_at(t)), y);
        y = integrate(rhs, t_cur, ev.t, y, &ode)?;
        t_cur = ev.t;
        if let Some(dg) = ev.delta_g {
            apply_jump2(&mut y, dg);
        }
        if ev.snapshot {
            snapshots.push(linear_snapshot(t_cur, &y, opts)?);
        }
    }
    Ok(EvolutionTrace { snapshots })
}

fn apply_jump2<S: Scalar>(y: &mut DVector<S>, dg: S) {
    let e = dg.exp();
    let ei = S::one() / e;
    // K = diag(e^dg, e^-dg); x -> Kx, cov -> K cov K
    y[0] *= e;
    y[1] *= ei;
    y[2] *= e * e;
    // off-diagonal invariant: e * e^-1 = 1
    y[4] *= ei * ei;
}

fn linear_snapshot<S: Scalar>(
    t: S,
    y: &DVector<S>,
    opts: &EvolveOptions<S>,
) -> Result<Snapshot<S>> {
    let (x, cov) = unpack2(y);
    let det = gaussian::symplectic_eigenvalues(&DMatrix::from_iterator(2, 2, cov.iter().copied()))?;
    let nu_min = det[0];
    check_uncertainty(t, nu_min, opts)?;
    let trace_sigma = cov.trace();
    let n_mean = trace_sigma + x.dot(&x);
    let state = GaussianState::new(
        DVector::from_vec(vec![x[0], x[1]]),
        DMatrix::from_iterator(2, 2, cov.iter().copied()),
        Basis::Original,
    )?;
    Ok(Snapshot {
        t,
        state,
        n_mean,
        e_n: None,
        nu_min,
        nu_dfs: None,
        trace_sigma,
    })
}

fn check_uncertainty<S: Scalar>(t: S, nu_min: S, opts: &EvolveOptions<S>) -> Result<()> {
    if nu_min < S::lit(0.25) - opts.uncertainty_tol {
        return Err(Error::UncertaintyViolation {
            t: t.to_f64_lossy(),
            nu_min: nu_min.to_f64_lossy(),
        });
    }
    Ok(())
}

// -- ring cavity -----------------------------------------------------------

/// Evolve a two-mode ring state under the modulated Hamiltonian and shared
/// bath. Internally the state is propagated in the primed basis where the
/// dissipator acts on the plus block only; snapshots are reported in the
/// original basis.
pub fn evolve_ring<S: Scalar>(
    state: &GaussianState<S>,
    profile: &ModulationProfile<S>,
    bath: &BathSpec<S>,
    t_end: S,
    opts: &EvolveOptions<S>,
) -> Result<EvolutionTrace<S>> {
    if state.modes() != 2 {
        return Err(Error::Domain(
            "evolve_ring requires a two-mode state".into(),
        ));
    }
    if state.basis != Basis::Original {
        return Err(Error::Domain(
            "evolve_ring requires the original basis".into(),
        ));
    }
    let gamma_mix = mixing_matrix::<S>();
    let mean = Vector4::from_iterator(state.mean.iter().copied());
    let cov = Matrix4::from_iterator(state.cov.iter().copied());
    let mut y = pack4(&(gamma_mix * mean), &(gamma_mix * cov * gamma_mix));

    let gamma = bath.gamma;
    let var_inf = bath.equilibrium_variance();
    let lossy = gamma > S::zero();
    let p = *profile;
    let rhs_with = move |c: crate::modulation::CoefficientSample<S>, y: &DVector<S>| {
        let a_plus = gen_plus(c.f, c.g);
        let a_minus = gen_minus(c.f, c.g);
        let (x, cov) = unpack4(y);
        let mut b = Matrix4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                b[(i, j)] = a_plus[(i, j)];
                b[(i + 2, j + 2)] = a_minus[(i, j)];
            }
        }
        let mut dx = b * x;
        let mut dcov = b * cov + cov * b.transpose();
        if lossy {
            // damping and thermal injection on the plus block only;
            // gamma is the amplitude decay rate, so variances relax at 2 gamma
            dx[0] -= gamma * x[0];
            dx[1] -= gamma * x[1];
            for i in 0..4 {
                for j in 0..4 {
                    let mut damp = S::zero();
                    if i < 2 {
                        damp += gamma;
                    }
                    if j < 2 {
                        damp += gamma;
                    }
                    dcov[(i, j)] -= damp * cov[(i, j)];
                }
            }
            dcov[(0, 0)] += (gamma + gamma) * var_inf;
            dcov[(1, 1)] += (gamma + gamma) * var_inf;
        }
        pack4(&dx, &dcov)
    };

    let events = build_events(profile, t_end, opts.snapshot_interval)?;
    let ode = opts.ode();
    let mut snapshots = Vec::new();
    snapshots.push(ring_snapshot(S::zero(), &y, opts)?);
    let mut t_cur = S::zero();
    for ev in events {
        let frozen = span_coefficients(&p, t_cur, ev.t);
        let rhs =
            |t: S, y: &DVector<S>| rhs_with(frozen.unwrap_or_else(|| p.coefficients_at(t)), y);
        y = integrate(rhs, t_cur, ev.t, y, &ode)?;
        t_cur = ev.t;
        if let Some(dg) = ev.delta_g {
            apply_jump4(&mut y, dg);
        }
        if ev.snapshot {
            snapshots.push(ring_snapshot(t_cur, &y, opts)?);
        }
    }
    Ok(EvolutionTrace { snapshots })
}

fn apply_jump4<S: Scalar>(y: &mut DVector<S>, dg: S) {
    // K = diag(e^dg, e^-dg, e^-dg, e^dg)
    let (mut x, mut cov) = unpack4(y);
    let k = [dg.exp(), (-dg).exp(), (-dg).exp(), dg.exp()];
    for i in 0..4 {
        x[i] *= k[i];
        for j in 0..4 {
            cov[(i, j)] *= k[i] * k[j];
        }
    }
    *y = pack4(&x, &cov);
}

fn ring_snapshot<S: Scalar>(t: S, y: &DVector<S>, opts: &EvolveOptions<S>) -> Result<Snapshot<S>> {
    let (x, cov) = unpack4(y);
    let p = cov.fixed_view::<2, 2>(0, 0).into_owned();
    let q = cov.fixed_view::<2, 2>(2, 2).into_owned();
    let cross = cov.fixed_view::<2, 2>(0, 2).into_owned();

    let gamma_mix = mixing_matrix::<S>();
    let mean_orig = gamma_mix * x;
    let cov_orig = gamma_mix * cov * gamma_mix;
    let state = GaussianState::new(
        DVector::from_iterator(4, mean_orig.iter().copied()),
        DMatrix::from_iterator(4, 4, cov_orig.iter().copied()),
        Basis::Original,
    )?;

    let trace_sigma = cov.trace();
    let n_mean = trace_sigma + x.dot(&x);

    let block_scale = p.amax().max(q.amax());
    let (e_n, nu_min, nu_dfs) = if cross.amax() <= S::lit(1e-10) * block_scale {
        // exactly decoupled primed blocks: use the cancellation-safe route
        let nu_p2 = gaussian::det2_matrix(&p);
        let nu_q2 = gaussian::det2_matrix(&q);
        if nu_p2 <= S::zero() || nu_q2 <= S::zero() {
            return Err(Error::InvalidCovariance(
                "primed block lost positive definiteness".into(),
            ));
        }
        let nu_p = nu_p2.sqrt();
        let nu_q = nu_q2.sqrt();
        (
            gaussian::log_negativity_blocks(&p, &q),
            nu_p.min(nu_q),
            nu_q,
        )
    } else {
        let nus = gaussian::symplectic_eigenvalues(&state.cov)?;
        let nu_q2 = gaussian::det2_matrix(&q);
        (
            gaussian::log_negativity(&state)?,
            nus[0],
            nu_q2.max(S::zero()).sqrt(),
        )
    };
    check_uncertainty(t, nu_min, opts)?;
    Ok(Snapshot {
        t,
        state,
        n_mean,
        e_n: Some(e_n),
        nu_min,
        nu_dfs: Some(nu_dfs),
        trace_sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::thermal_state;
    use crate::modulation::{SinusoidalModulation, TwoStepModulation};
    use approx::assert_relative_eq;

    fn constant_profile() -> ModulationProfile<f64> {
        ModulationProfile::Sinusoidal(SinusoidalModulation::new(1.0, 0.0, 2.0).unwrap())
    }

    fn resonant(f_r: f64) -> ModulationProfile<f64> {
        ModulationProfile::TwoStep(TwoStepModulation::resonant(1.0, f_r).unwrap())
    }

    #[test]
    fn drift_matrix_shapes() {
        let d = drift_matrices(1.0, 0.0);
        assert_eq!(d.m2, Matrix2::new(0.0, 2.0, -2.0, 0.0));

        let d = drift_matrices(0.8, 0.3);
        assert_eq!(d.m2.trace(), 0.0);
        // M4 = (1/2) diag(M2, -M2^T)
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(d.m4[(i, j)], 0.5 * d.m2[(i, j)]);
                assert_eq!(d.m4[(i + 2, j + 2)], -0.5 * d.m2[(j, i)]);
                assert_eq!(d.m4[(i, j + 2)], 0.0);
                assert_eq!(d.m4[(i + 2, j)], 0.0);
            }
        }
        // Gamma is a symmetric involution
        let g = d.mixing;
        assert!((g * g - Matrix4::identity()).amax() < 1e-15);
        assert_eq!(g, g.transpose());
        assert_eq!(d.alpha_prime * d.alpha_prime, d.alpha_prime);
    }

    #[test]
    fn equilibrium_is_fixed_point_linear() {
        let bath = BathSpec::new(0.05, 0.7).unwrap();
        let st = thermal_state(0.7, 1, Basis::Original).unwrap();
        let trace = evolve_linear(
            &st,
            &constant_profile(),
            &bath,
            20.0,
            &EvolveOptions::default(),
        )
        .unwrap();
        for snap in &trace.snapshots {
            assert_relative_eq!(snap.n_mean, 2.0 * 0.7 / 2.0 + 0.5, epsilon = 1e-9);
            assert!((snap.state.cov[(0, 0)] - bath.equilibrium_variance()).abs() < 1e-10);
        }
    }

    #[test]
    fn relaxation_to_equilibrium_matches_scalar_ode() {
        let gamma = 0.3;
        let nbar = 1.5;
        let bath = BathSpec::new(gamma, nbar).unwrap();
        let st = thermal_state(0.0, 1, Basis::Original).unwrap();
        let opts = EvolveOptions {
            snapshot_interval: 0.5,
            ..EvolveOptions::default()
        };
        let trace = evolve_linear(&st, &constant_profile(), &bath, 10.0, &opts).unwrap();
        let v_inf = bath.equilibrium_variance();
        for snap in &trace.snapshots {
            let expected = v_inf + (0.25 - v_inf) * (-2.0 * gamma * snap.t).exp();
            assert!((snap.state.cov[(0, 0)] - expected).abs() < 1e-8);
            assert!((snap.state.cov[(1, 1)] - expected).abs() < 1e-8);
        }
    }

    #[test]
    fn lossless_resonant_linear_grows_at_two_mu() {
        let profile = resonant(1.2);
        let period = profile.period();
        let mu = 1.2f64.ln() / period;
        let bath = BathSpec::new(0.0, 0.0).unwrap();
        let st = thermal_state(0.0, 1, Basis::Original).unwrap();
        let opts = EvolveOptions {
            snapshot_interval: period,
            ..EvolveOptions::default()
        };
        let trace = evolve_linear(&st, &profile, &bath, 40.0 * period, &opts).unwrap();
        let marks: Vec<&Snapshot<f64>> = trace
            .snapshots
            .iter()
            .filter(|s| (s.t / period - (s.t / period).round()).abs() < 1e-9)
            .collect();
        let first = marks[20];
        let last = marks[40];
        let slope = (last.trace_sigma.ln() - first.trace_sigma.ln()) / (last.t - first.t);
        assert_relative_eq!(slope, 2.0 * mu, max_relative = 1e-6);
    }

    #[test]
    fn ring_equilibrium_is_fixed_point() {
        let bath = BathSpec::new(0.0, 0.8).unwrap();
        let st = thermal_state(0.8, 2, Basis::Original).unwrap();
        let trace = evolve_ring(
            &st,
            &constant_profile(),
            &bath,
            15.0,
            &EvolveOptions::default(),
        )
        .unwrap();
        for snap in &trace.snapshots {
            assert!((snap.n_mean - (2.0 * 0.8 + 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn lossless_resonant_ring_entanglement_growth() {
        let profile = resonant(1.2);
        let period = profile.period();
        let mu = 1.2f64.ln() / period;
        let bath = BathSpec::new(0.0, 0.0).unwrap();
        let st = thermal_state(0.0, 2, Basis::Original).unwrap();
        let opts = EvolveOptions {
            snapshot_interval: period,
            ..EvolveOptions::default()
        };
        let trace = evolve_ring(&st, &profile, &bath, 20.0 * period, &opts).unwrap();
        for m in [5usize, 10, 20] {
            let snap = trace
                .snapshots
                .iter()
                .find(|s| (s.t - m as f64 * period).abs() < 1e-9 * period)
                .unwrap();
            let expected = 2.0 * mu * snap.t / std::f64::consts::LN_2;
            // E_N extracts the shrinking symplectic eigenvalue, so the ODE
            // error budget is relative to the growing covariance scale
            assert_relative_eq!(snap.e_n.unwrap(), expected, max_relative = 1e-3);
        }
    }

    #[test]
    fn dfs_block_untouched_by_bath() {
        let profile = resonant(1.1);
        let period = profile.period();
        for (gamma_t, nbar) in [(0.05, 0.0), (0.5, 1.0)] {
            let bath = BathSpec::new(gamma_t / period, nbar).unwrap();
            let st = thermal_state(nbar, 2, Basis::Original).unwrap();
            let opts = EvolveOptions {
                snapshot_interval: period,
                rel_tol: 1e-12,
                abs_tol: 1e-14,
                ..EvolveOptions::default()
            };
            let trace = evolve_ring(&st, &profile, &bath, 30.0 * period, &opts).unwrap();
            let expected = (2.0 * nbar + 1.0) / 4.0;
            for snap in &trace.snapshots {
                assert!(
                    (snap.nu_dfs.unwrap() - expected).abs() < 1e-6,
                    "t = {}, nu_dfs = {}",
                    snap.t,
                    snap.nu_dfs.unwrap()
                );
            }
        }
    }

    #[test]
    fn linear_matches_ring_plus_block() {
        // same drive and bath: the linear cavity obeys the equations of the
        // ring's bath-coupled primed block
        let profile = resonant(1.15);
        let period = profile.period();
        let bath = BathSpec::new(0.04, 0.6).unwrap();
        let st1 = thermal_state(0.6, 1, Basis::Original).unwrap();
        let st2 = thermal_state(0.6, 2, Basis::Original).unwrap();
        let opts = EvolveOptions {
            snapshot_interval: period,
            ..EvolveOptions::default()
        };
        let t_end = 20.0 * period;
        let lin = evolve_linear(&st1, &profile, &bath, t_end, &opts).unwrap();
        let ring = evolve_ring(&st2, &profile, &bath, t_end, &opts).unwrap();
        assert_eq!(lin.snapshots.len(), ring.snapshots.len());
        for (a, b) in lin.snapshots.iter().zip(ring.snapshots.iter()) {
            let blocks = dfs_decompose(&b.state).unwrap();
            let scale = 1.0 + blocks.plus_cov.amax();
            assert!((blocks.plus_cov[(0, 0)] - a.state.cov[(0, 0)]).abs() < 1e-8 * scale);
            assert!((blocks.plus_cov[(0, 1)] - a.state.cov[(0, 1)]).abs() < 1e-8 * scale);
            assert!((blocks.plus_cov[(1, 1)] - a.state.cov[(1, 1)]).abs() < 1e-8 * scale);
        }
    }

    #[test]
    fn dfs_decompose_roundtrip_and_thermal() {
        let st = thermal_state(1.0, 2, Basis::Original).unwrap();
        let blocks = dfs_decompose(&st).unwrap();
        assert!((blocks.plus_cov - Matrix2::identity() * 0.75).amax() < 1e-15);
        assert!((blocks.minus_cov - Matrix2::identity() * 0.75).amax() < 1e-15);
        assert!(blocks.cross.amax() < 1e-15);

        // Gamma applied twice is the identity
        let g = mixing_matrix::<f64>();
        assert!((g * g - Matrix4::identity()).amax() < 1e-15);
    }

    #[test]
    fn lossless_evolution_preserves_symplectic_spectrum() {
        let profile = resonant(1.05);
        let period = profile.period();
        let bath = BathSpec::new(0.0, 0.5).unwrap();
        let st = thermal_state(0.5, 2, Basis::Original).unwrap();
        let opts = EvolveOptions {
            snapshot_interval: 10.0 * period,
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            ..EvolveOptions::default()
        };
        let trace = evolve_ring(&st, &profile, &bath, 55.0 * period, &opts).unwrap();
        for snap in &trace.snapshots {
            let blocks = dfs_decompose(&snap.state).unwrap();
            for block in [blocks.plus_cov, blocks.minus_cov] {
                let nu = gaussian::det2_matrix(&block).sqrt();
                assert!((nu - 0.5).abs() < 1e-6, "nu = {nu} at t = {}", snap.t);
            }
        }
    }
}
