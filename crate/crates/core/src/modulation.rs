//! Periodic refractive-index drives and the coefficient functions they
//! induce on each cavity mode: the instantaneous mode frequency
//! `f(t) = 1/n(t)`, the squeeze rate `g(t) = (1/2) d ln n/dt` and its
//! accumulated integral `G(t)`.
//!
//! Time `t = 0` is the start of the first segment (two-step drive) or the
//! zero-phase point of the sine (sinusoidal drive).

use crate::{Error, Result, Scalar};

/// Instantaneous switching between two index values `n1 = 1/f1` and
/// `n2 = 1/f2`, holding each for `t1` resp. `t2` within a period
/// `T = t1 + t2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStepModulation<S: Scalar> {
    f1: S,
    f2: S,
    t1: S,
    t2: S,
}

impl<S: Scalar> TwoStepModulation<S> {
    pub fn new(f1: S, f2: S, t1: S, t2: S) -> Result<Self> {
        if !(f1 > S::zero() && f2 > S::zero() && t1 > S::zero() && t2 > S::zero()) {
            return Err(Error::InvalidProfile(
                "two-step drive requires f1, f2, t1, t2 > 0".into(),
            ));
        }
        Ok(Self { f1, f2, t1, t2 })
    }

    /// Resonant drive with segment phases `theta1 = theta2 = pi/2`:
    /// `t_i = pi / (2 f_i)`.
    pub fn resonant(f1: S, f2: S) -> Result<Self> {
        let half_pi = S::frac_pi_2();
        Self::new(f1, f2, half_pi / f1, half_pi / f2)
    }

    pub fn f1(&self) -> S {
        self.f1
    }

    pub fn f2(&self) -> S {
        self.f2
    }

    pub fn t1(&self) -> S {
        self.t1
    }

    pub fn t2(&self) -> S {
        self.t2
    }

    pub fn period(&self) -> S {
        self.t1 + self.t2
    }

    /// Frequency ratio `f_r = f2/f1`.
    pub fn f_ratio(&self) -> S {
        self.f2 / self.f1
    }

    /// Segment phases `theta_i = f_i t_i`.
    pub fn thetas(&self) -> (S, S) {
        (self.f1 * self.t1, self.f2 * self.t2)
    }

    /// Squeeze increment of the jump `n1 -> n2` at the end of segment one:
    /// `dG = (1/2) ln(n2/n1) = -(1/2) ln f_r`.
    pub fn jump_into_segment2(&self) -> S {
        S::lit(0.5) * (self.f1 / self.f2).ln()
    }

    /// Squeeze increment of the period-closing jump `n2 -> n1`.
    pub fn jump_into_segment1(&self) -> S {
        -self.jump_into_segment2()
    }
}

/// Small sinusoidal modulation `n(t) = n0 + dn sin(Omega t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidalModulation<S: Scalar> {
    n0: S,
    dn: S,
    omega: S,
}

/// Default upper bound on the relative modulation depth `dn/n0`.
pub const DEFAULT_DEPTH_LIMIT: f64 = 0.1;

impl<S: Scalar> SinusoidalModulation<S> {
    pub fn new(n0: S, dn: S, omega: S) -> Result<Self> {
        Self::with_depth_limit(n0, dn, omega, S::lit(DEFAULT_DEPTH_LIMIT))
    }

    /// As [`new`](Self::new) with a caller-chosen bound on `dn/n0`.
    pub fn with_depth_limit(n0: S, dn: S, omega: S, limit: S) -> Result<Self> {
        if !(n0 > S::zero() && omega > S::zero() && dn >= S::zero()) {
            return Err(Error::InvalidProfile(
                "sinusoidal drive requires n0 > 0, omega > 0, dn >= 0".into(),
            ));
        }
        if dn / n0 > limit {
            return Err(Error::InvalidProfile(format!(
                "relative modulation depth dn/n0 = {} exceeds limit {}",
                (dn / n0).to_f64_lossy(),
                limit.to_f64_lossy()
            )));
        }
        Ok(Self { n0, dn, omega })
    }

    pub fn n0(&self) -> S {
        self.n0
    }

    pub fn dn(&self) -> S {
        self.dn
    }

    pub fn omega(&self) -> S {
        self.omega
    }

    pub fn period(&self) -> S {
        S::two_pi() / self.omega
    }

    fn index_at(&self, t: S) -> S {
        self.n0 + self.dn * (self.omega * t).sin()
    }

    /// Parameters `(delta, epsilon)` of the equivalent Mathieu equation in
    /// scaled time: `delta = 4/(n0^2 Omega^2)`, `epsilon = -8 dn/(n0^3 Omega^2)`.
    /// Parametric resonance of order `m` sits at `delta = m^2`, i.e.
    /// `Omega = 2/(m n0)`.
    pub fn mathieu_parameters(&self) -> (S, S) {
        let w2 = self.omega * self.omega;
        let n02 = self.n0 * self.n0;
        let delta = S::lit(4.0) / (n02 * w2);
        let epsilon = -S::lit(8.0) * self.dn / (n02 * self.n0 * w2);
        (delta, epsilon)
    }
}

/// Coefficient functions evaluated at one instant.
///
/// For two-step drives `g` is a Dirac comb; it is reported as zero between
/// jumps, with the jump events available via
/// [`ModulationProfile::jumps_within`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSample<S: Scalar> {
    /// Mode frequency `f(t) = 1/n(t)`.
    pub f: S,
    /// Squeeze rate `g(t)`.
    pub g: S,
    /// Accumulated squeeze `G(t) = \int_0^t g`.
    pub big_g: S,
}

/// A discrete squeeze kick `G -> G + delta_g` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeJump<S: Scalar> {
    pub t: S,
    pub delta_g: S,
}

/// A periodic refractive-index drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModulationProfile<S: Scalar> {
    TwoStep(TwoStepModulation<S>),
    Sinusoidal(SinusoidalModulation<S>),
}

impl<S: Scalar> ModulationProfile<S> {
    pub fn period(&self) -> S {
        match self {
            Self::TwoStep(m) => m.period(),
            Self::Sinusoidal(m) => m.period(),
        }
    }

    /// `f(0)`.
    pub fn f0(&self) -> S {
        match self {
            Self::TwoStep(m) => m.f1(),
            Self::Sinusoidal(m) => S::one() / m.n0(),
        }
    }

    /// Reduce `t >= 0` to `[0, T)`, guarding against round-off at period
    /// boundaries.
    fn phase(&self, t: S) -> S {
        let period = self.period();
        let mut tau = t - period * (t / period).floor();
        if tau < S::zero() {
            tau += period;
        }
        // snap float residue at the wrap-around back to the period start
        let eps = S::lit(1e-12) * period.max(t);
        if tau >= period - eps {
            tau = S::zero();
        }
        tau
    }

    /// Evaluate `f`, `g` and `G` at time `t >= 0`. At a two-step jump time
    /// the post-jump values are reported.
    pub fn coefficients_at(&self, t: S) -> CoefficientSample<S> {
        assert!(t >= S::zero(), "coefficients_at requires t >= 0");
        match self {
            Self::TwoStep(m) => {
                let tau = self.phase(t);
                // the jump at t1 is reported post-jump, round-off included
                let eps = S::lit(1e-12) * m.period().max(t);
                if tau < m.t1() - eps {
                    CoefficientSample {
                        f: m.f1(),
                        g: S::zero(),
                        big_g: S::zero(),
                    }
                } else {
                    CoefficientSample {
                        f: m.f2(),
                        g: S::zero(),
                        big_g: m.jump_into_segment2(),
                    }
                }
            }
            Self::Sinusoidal(m) => {
                let n = m.index_at(t);
                let f = S::one() / n;
                let g = S::lit(0.5) * m.dn() * m.omega() * (m.omega() * t).cos() / n;
                let big_g = S::lit(0.5) * (n / m.n0()).ln();
                CoefficientSample { f, g, big_g }
            }
        }
    }

    /// Squeeze jumps in the half-open interval `(t_start, t_end]`, in time
    /// order. Empty for sinusoidal drives.
    pub fn jumps_within(&self, t_start: S, t_end: S) -> Vec<SqueezeJump<S>> {
        let m = match self {
            Self::TwoStep(m) => m,
            Self::Sinusoidal(_) => return Vec::new(),
        };
        let period = m.period();
        let eps = S::lit(1e-12) * period;
        let mut jumps = Vec::new();
        let mut k = (t_start / period).floor();
        if k < S::zero() {
            k = S::zero();
        }
        loop {
            let base = k * period;
            if base > t_end + eps {
                break;
            }
            for (t, dg) in [
                (base + m.t1(), m.jump_into_segment2()),
                (base + period, m.jump_into_segment1()),
            ] {
                if t > t_start + eps && t <= t_end + eps {
                    jumps.push(SqueezeJump { t, delta_g: dg });
                }
            }
            k += S::one();
        }
        jumps
    }
}
