//! Late-time closed forms for photon number, log-negativity, occurrence
//! time and the classical photon yield.
//!
//! With `eta_pm = gamma +- mu`, the thermal correction factors are
//!
//! discrete:   `F_pm(m) = [1 - e^{-2 eta_pm m T}] B_pm / [1 - e^{2 eta_pm T}]`,
//!             `B_pm = 1 - e^{2 gamma t1} + e^{2 gamma t1}(1 - e^{2 gamma t2}) f_r^{+-1}`,
//! sinusoidal: `F_pm(m) = 2 gamma (1 - e^{2 eta_mp T})(1 - e^{-2 eta_pm m T})
//!                         / [eta_mp (1 - e^{2 eta_pm T})]`.
//!
//! All ratios are evaluated through `phi(x) = (e^x - 1)/x`, which removes the
//! `eta -> 0` singularities, and in log space so that large `mu m T` cannot
//! overflow.

use crate::dynamics::BathSpec;
use crate::floquet::monodromy;
use crate::modulation::ModulationProfile;
use crate::ode::OdeOptions;
use crate::{Error, Result, Scalar};

/// Periodic-drive family the asymptotic formulas distinguish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveKind<S: Scalar> {
    Discrete { t1: S, t2: S, f_r: S },
    Sinusoidal,
}

/// Everything the late-time formulas need about a drive/bath combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticParams<S: Scalar> {
    pub mu: S,
    pub gamma: S,
    pub nbar: S,
    pub period: S,
    pub drive: DriveKind<S>,
}

impl<S: Scalar> AsymptoticParams<S> {
    pub fn new(mu: S, gamma: S, nbar: S, period: S, drive: DriveKind<S>) -> Result<Self> {
        if mu < S::zero() || gamma < S::zero() || nbar < S::zero() || period <= S::zero() {
            return Err(Error::Domain(
                "asymptotic parameters require mu, gamma, nbar >= 0 and T > 0".into(),
            ));
        }
        Ok(Self {
            mu,
            gamma,
            nbar,
            period,
            drive,
        })
    }

    /// Derive the parameters from a modulation profile and bath: the Lyapunov
    /// exponent comes from the monodromy matrix.
    pub fn from_profile(
        profile: &ModulationProfile<S>,
        bath: &BathSpec<S>,
        ode: &OdeOptions<S>,
    ) -> Result<Self> {
        let mono = monodromy(profile, ode)?;
        let drive = match profile {
            ModulationProfile::TwoStep(m) => DriveKind::Discrete {
                t1: m.t1(),
                t2: m.t2(),
                f_r: m.f_ratio(),
            },
            ModulationProfile::Sinusoidal(_) => DriveKind::Sinusoidal,
        };
        Self::new(mono.mu, bath.gamma, bath.nbar, profile.period(), drive)
    }

    pub fn eta_plus(&self) -> S {
        self.gamma + self.mu
    }

    pub fn eta_minus(&self) -> S {
        self.gamma - self.mu
    }
}

/// Classical seed energy in photon units (Eq.-of-motion prefactor collapsed
/// to one dimensionless number).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalSeed<S: Scalar> {
    pub seed_photons: S,
}

impl<S: Scalar> ClassicalSeed<S> {
    pub fn new(seed_photons: S) -> Result<Self> {
        if seed_photons < S::zero() {
            return Err(Error::Domain("seed_photons must be >= 0".into()));
        }
        Ok(Self { seed_photons })
    }
}

/// `ln phi(x)` with `phi(x) = (e^x - 1)/x`, safe for arbitrarily large `x`.
fn ln_phi<S: Scalar>(x: S) -> S {
    if x > S::lit(500.0) {
        // phi(x) ~ e^x / x
        x - x.ln()
    } else {
        x.exp_m1_over().ln()
    }
}

/// `(sign, ln|F|)` of one factor; `F = 0` is encoded as `ln = -inf`.
fn ln_f_factor<S: Scalar>(params: &AsymptoticParams<S>, eta: S, f_r_pow: S, m: usize) -> S {
    let t = params.period;
    let gamma = params.gamma;
    let two = S::lit(2.0);
    let m_s = S::from_usize(m).expect("period count fits the scalar");
    // ratio(m) = (1 - e^{-2 eta m T})/(1 - e^{2 eta T}) = -m phi(-2 eta m T)/phi(2 eta T)
    let ln_ratio = m_s.ln() + ln_phi(-two * eta * m_s * t) - ln_phi(two * eta * t);
    match params.drive {
        DriveKind::Discrete { t1, t2, .. } => {
            // bracket = -[expm1(2 gamma t1) + e^{2 gamma t1} expm1(2 gamma t2) f_r^{+-1}] <= 0
            let b = nalgebra::ComplexField::exp_m1(two * gamma * t1)
                + (two * gamma * t1).exp()
                    * nalgebra::ComplexField::exp_m1(two * gamma * t2)
                    * f_r_pow;
            if b <= S::zero() {
                return S::neg_inf();
            }
            b.ln() + ln_ratio
        }
        DriveKind::Sinusoidal => {
            if gamma <= S::zero() {
                return S::neg_inf();
            }
            // other branch's eta: eta_mp = 2 gamma - eta
            let eta_other = two * gamma - eta;
            // 2 gamma (1 - e^{2 eta_mp T})/eta_mp = -4 gamma T phi(2 eta_mp T)
            (S::lit(4.0) * gamma * t).ln() + ln_phi(two * eta_other * t) + ln_ratio
        }
    }
}

/// `ln` of the m -> infinity limit of `F_plus`; `-inf` when the limit is 0.
fn ln_f_plus_limit<S: Scalar>(params: &AsymptoticParams<S>) -> S {
    let t = params.period;
    let two = S::lit(2.0);
    let eta_p = params.eta_plus();
    if eta_p <= S::zero() {
        return S::neg_inf();
    }
    // ratio(inf) = -1/expm1(2 eta_+ T)
    let ln_ratio = -ln_abs_expm1(two * eta_p * t);
    match params.drive {
        DriveKind::Discrete { t1, t2, f_r } => {
            let gamma = params.gamma;
            let b = nalgebra::ComplexField::exp_m1(two * gamma * t1)
                + (two * gamma * t1).exp() * nalgebra::ComplexField::exp_m1(two * gamma * t2) * f_r;
            if b <= S::zero() {
                return S::neg_inf();
            }
            b.ln() + ln_ratio
        }
        DriveKind::Sinusoidal => {
            let gamma = params.gamma;
            if gamma <= S::zero() {
                return S::neg_inf();
            }
            let eta_m = params.eta_minus();
            (S::lit(4.0) * gamma * t).ln() + ln_phi(two * eta_m * t) + ln_ratio
        }
    }
}

/// `ln|e^x - 1|`, safe for large positive `x`.
fn ln_abs_expm1<S: Scalar>(x: S) -> S {
    if x > S::lit(500.0) {
        x
    } else {
        nalgebra::ComplexField::exp_m1(x).abs().ln()
    }
}

/// Thermal correction factors `(F_plus, F_minus)` after `m` periods.
pub fn f_factors<S: Scalar>(params: &AsymptoticParams<S>, m: usize) -> Result<(S, S)> {
    if m == 0 {
        return Err(Error::Domain("f_factors requires m >= 1".into()));
    }
    let (lp, lm) = ln_f_factors(params, m);
    Ok((lp.exp(), lm.exp()))
}

/// `(ln F_plus, ln F_minus)`; zero factors map to `-inf`.
pub fn ln_f_factors<S: Scalar>(params: &AsymptoticParams<S>, m: usize) -> (S, S) {
    let f_r_for = |sign: bool| match params.drive {
        DriveKind::Discrete { f_r, .. } => {
            if sign {
                f_r
            } else {
                S::one() / f_r
            }
        }
        DriveKind::Sinusoidal => S::one(),
    };
    (
        ln_f_factor(params, params.eta_plus(), f_r_for(true), m),
        ln_f_factor(params, params.eta_minus(), f_r_for(false), m),
    )
}

/// `m -> infinity` limit of `F_plus` (finite because `eta_+ > 0` whenever
/// the drive is resonant).
pub fn f_plus_limit<S: Scalar>(params: &AsymptoticParams<S>) -> S {
    ln_f_plus_limit(params).exp()
}

fn log_sum_exp<S: Scalar>(terms: &[S]) -> S {
    let mut hi = S::neg_inf();
    for &t in terms {
        if t > hi {
            hi = t;
        }
    }
    if hi == S::neg_inf() {
        return hi;
    }
    let mut acc = S::zero();
    for &t in terms {
        acc += (t - hi).exp();
    }
    hi + acc.ln()
}

/// `ln <N+1>` after `m` periods (always finite in log space).
pub fn asymptotic_photons_log<S: Scalar>(params: &AsymptoticParams<S>, m: usize) -> Result<S> {
    if m == 0 {
        return Err(Error::Domain("asymptotic_photons requires m >= 1".into()));
    }
    let two = S::lit(2.0);
    let mt = S::from_usize(m).unwrap() * params.period;
    let (lfp, lfm) = ln_f_factors(params, m);
    let terms = [
        two * params.mu * mt,
        -two * params.eta_minus() * mt,
        lfm,
        lfp,
    ];
    let pref = ((two * params.nbar + S::one()) * S::lit(0.25)).ln();
    Ok(pref + log_sum_exp(&terms))
}

/// Late-time photon expectation `<N+1>`; `+inf` when the linear value
/// overflows the scalar type.
pub fn asymptotic_photons<S: Scalar>(params: &AsymptoticParams<S>, m: usize) -> Result<S> {
    Ok(asymptotic_photons_log(params, m)?.exp())
}

/// Late-time logarithmic negativity (requires loss: `F_plus > 0`).
pub fn asymptotic_log_negativity<S: Scalar>(params: &AsymptoticParams<S>, m: usize) -> Result<S> {
    if m == 0 {
        return Err(Error::Domain(
            "asymptotic_log_negativity requires m >= 1".into(),
        ));
    }
    let (lfp, _) = ln_f_factors(params, m);
    if lfp == S::neg_inf() {
        return Err(Error::Domain(
            "asymptotic E_N needs F_plus > 0 (lossless drives use the pure-state formula)".into(),
        ));
    }
    let ln2 = S::lit(std::f64::consts::LN_2);
    let mt = S::from_usize(m).unwrap() * params.period;
    let two = S::lit(2.0);
    let e_n =
        params.mu * mt / ln2 - ((two * params.nbar + S::one()).ln() + S::lit(0.5) * lfp) / ln2;
    Ok(e_n.max(S::zero()))
}

/// Time at which entanglement first appears, in both time units and periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccurrenceTime<S: Scalar> {
    pub time: S,
    pub periods: S,
}

/// Solve `E_N(t_occ) = 0` with the `m -> infinity` value of `F_plus`; errors
/// with [`Error::NoResonance`] when `mu = 0` (entanglement never occurs).
pub fn occurrence_time<S: Scalar>(params: &AsymptoticParams<S>) -> Result<OccurrenceTime<S>> {
    if params.mu <= S::zero() {
        return Err(Error::NoResonance);
    }
    let lfp = ln_f_plus_limit(params);
    let two = S::lit(2.0);
    // ln[(2 nbar + 1) sqrt(F_plus)]
    let arg = (two * params.nbar + S::one()).ln() + S::lit(0.5) * lfp;
    let time = (arg / params.mu).max(S::zero());
    Ok(OccurrenceTime {
        time,
        periods: time / params.period,
    })
}

/// Classical photon yield `seed * e^{2 (mu - gamma) m T}`.
pub fn classical_yield<S: Scalar>(
    seed: &ClassicalSeed<S>,
    mu: S,
    gamma: S,
    m: usize,
    period: S,
) -> S {
    if seed.seed_photons == S::zero() {
        return S::zero();
    }
    let mt = S::from_usize(m).expect("period count fits the scalar") * period;
    seed.seed_photons * (S::lit(2.0) * (mu - gamma) * mt).exp()
}
