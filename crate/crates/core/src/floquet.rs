//! Floquet analysis of the Hill equation `y'' = -f(t)^2 y`: one-period
//! monodromy matrix, discriminant, Lyapunov exponent and stability maps.

use nalgebra::{DVector, Matrix2};

use crate::modulation::ModulationProfile;
use crate::ode::{integrate, OdeOptions};
use crate::{Error, Result, Scalar};

/// One-period solution matrix of the Hill equation in the `[y, y']` basis,
/// with the derived stability quantities.
#[derive(Debug, Clone, Copy)]
pub struct MonodromyResult<S: Scalar> {
    /// Fundamental solution over one period, `det S = 1`.
    pub s: Matrix2<S>,
    /// Floquet discriminant, the half-trace of `s`.
    pub delta: S,
    /// Lyapunov exponent per unit time; zero inside the stable region.
    pub mu: S,
    /// Drive period.
    pub period: S,
}

/// Exact solution matrix of `y'' = -f^2 y` over a span `tau` at constant `f`.
pub fn segment_matrix<S: Scalar>(f: S, tau: S) -> Matrix2<S> {
    let (s, c) = (f * tau).sin_cos();
    Matrix2::new(c, s / f, -f * s, c)
}

/// Solution matrix of the Hill equation from `0` to `t`.
///
/// Two-step drives use the exact product of segment matrices; sinusoidal
/// drives integrate the matrix ODE with two independent initial conditions.
pub fn hill_solution<S: Scalar>(
    profile: &ModulationProfile<S>,
    t: S,
    opts: &OdeOptions<S>,
) -> Result<Matrix2<S>> {
    if t < S::zero() {
        return Err(Error::Domain("hill_solution requires t >= 0".into()));
    }
    match profile {
        ModulationProfile::TwoStep(m) => {
            let period = m.period();
            let mut whole = (t / period).floor();
            let mut rem = t - whole * period;
            if rem < S::zero() {
                rem += period;
                whole -= S::one();
            }
            let per_period = segment_matrix(m.f2(), m.t2()) * segment_matrix(m.f1(), m.t1());
            let mut s = Matrix2::identity();
            let mut count = whole.to_f64_lossy() as u64;
            while count > 0 {
                s = per_period * s;
                count -= 1;
            }
            let partial = if rem <= m.t1() {
                segment_matrix(m.f1(), rem)
            } else {
                segment_matrix(m.f2(), rem - m.t1()) * segment_matrix(m.f1(), m.t1())
            };
            Ok(partial * s)
        }
        ModulationProfile::Sinusoidal(_) => {
            let p = *profile;
            let y = integrate(
                move |tt, y: &DVector<S>| {
                    let f = p.coefficients_at(tt).f;
                    let f2 = f * f;
                    // columns [y1 y1' y2 y2']
                    DVector::from_vec(vec![y[1], -f2 * y[0], y[3], -f2 * y[2]])
                },
                S::zero(),
                t,
                DVector::from_vec(vec![S::one(), S::zero(), S::zero(), S::one()]),
                opts,
            )?;
            Ok(Matrix2::new(y[0], y[2], y[1], y[3]))
        }
    }
}

/// Lyapunov exponent from the Floquet discriminant:
/// `mu = cosh^-1(|delta|)/T` outside the stable band `|delta| <= 1`.
pub fn lyapunov<S: Scalar>(delta: S, period: S) -> S {
    let a = delta.abs();
    if a <= S::one() {
        S::zero()
    } else {
        a.acosh_stable() / period
    }
}

/// One-period monodromy of the Hill equation for the given drive.
pub fn monodromy<S: Scalar>(
    profile: &ModulationProfile<S>,
    opts: &OdeOptions<S>,
) -> Result<MonodromyResult<S>> {
    let period = profile.period();
    let s = hill_solution(profile, period, opts)?;
    let delta = S::lit(0.5) * (s[(0, 0)] + s[(1, 1)]);
    Ok(MonodromyResult {
        s,
        delta,
        mu: lyapunov(delta, period),
        period,
    })
}

/// Closed-form Floquet discriminant of the two-step drive:
/// `delta = ((1+f_r)^2 cos th+ - (1-f_r)^2 cos th-) / (4 f_r)`
/// with `th+- = theta1 +- theta2`.
pub fn twostep_discriminant<S: Scalar>(f_r: S, theta1: S, theta2: S) -> S {
    let one = S::one();
    let quarter = S::lit(0.25);
    let plus = (one + f_r) * (one + f_r) * (theta1 + theta2).cos();
    let minus = (one - f_r) * (one - f_r) * (theta1 - theta2).cos();
    quarter * (plus - minus) / f_r
}

/// One cell of a two-step stability map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityCell<S: Scalar> {
    pub theta1: S,
    pub theta2: S,
    pub delta: S,
    pub mu: S,
    /// `false` marks net amplification (`|delta| > 1`).
    pub stable: bool,
}

/// Classify a `theta1 x theta2` grid at fixed frequency ratio, row-major in
/// `theta1`. `mu` is reported per unit time for the resonant-segment
/// periods `t_i = theta_i / f_i` with `f1 = 1`, `f2 = f_r`.
pub fn stability_map<S: Scalar>(
    f_r: S,
    theta1_grid: &[S],
    theta2_grid: &[S],
) -> Result<Vec<StabilityCell<S>>> {
    if theta1_grid.is_empty() || theta2_grid.is_empty() {
        return Err(Error::Domain(
            "stability_map requires non-empty grids".into(),
        ));
    }
    for grid in [theta1_grid, theta2_grid] {
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(
                "stability_map grids must be strictly increasing".into(),
            ));
        }
    }
    let mut cells = Vec::with_capacity(theta1_grid.len() * theta2_grid.len());
    for &theta1 in theta1_grid {
        for &theta2 in theta2_grid {
            let delta = twostep_discriminant(f_r, theta1, theta2);
            // period of the drive realising these phases
            let period = theta1 + theta2 / f_r;
            let mu = lyapunov(delta, period);
            cells.push(StabilityCell {
                theta1,
                theta2,
                delta,
                mu,
                stable: delta.abs() <= S::one(),
            });
        }
    }
    Ok(cells)
}
