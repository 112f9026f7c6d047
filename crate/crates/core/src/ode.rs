//! Adaptive Dormand-Prince 5(4) integrator for small dense systems.

use nalgebra::DVector;

use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<S: Scalar> {
    pub rel_tol: S,
    pub abs_tol: S,
    pub max_steps: usize,
}

impl<S: Scalar> Default for OdeOptions<S> {
    fn default() -> Self {
        Self {
            rel_tol: S::lit(1e-9),
            abs_tol: S::lit(1e-12),
            max_steps: 1_000_000,
        }
    }
}

// Dormand-Prince coefficients.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// 5th-order weights minus 4th-order weights (error estimator).
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Integrate `dy/dt = rhs(t, y)` from `t0` to `t1` (with `t1 >= t0`),
/// returning `y(t1)`.
pub fn integrate<S, F>(
    mut rhs: F,
    t0: S,
    t1: S,
    y0: DVector<S>,
    opts: &OdeOptions<S>,
) -> Result<DVector<S>>
where
    S: Scalar,
    F: FnMut(S, &DVector<S>) -> DVector<S>,
{
    let span = t1 - t0;
    if span < S::zero() {
        return Err(Error::Integration(
            "backward integration not supported".into(),
        ));
    }
    if span == S::zero() {
        return Ok(y0);
    }

    let a: Vec<Vec<S>> = A
        .iter()
        .map(|row| row.iter().map(|&v| S::lit(v)).collect())
        .collect();
    let c: Vec<S> = C.iter().map(|&v| S::lit(v)).collect();
    let e: Vec<S> = E.iter().map(|&v| S::lit(v)).collect();

    let mut t = t0;
    let mut y = y0;
    let mut k = vec![DVector::<S>::zeros(y.len()); 7];
    k[0] = rhs(t, &y);
    let mut h = span * S::lit(1e-3);
    let h_min = span * S::lit(1e-14);

    // remaining spans below this are float residue of the final clamp
    let t_done = span * S::lit(1e-13);
    for _ in 0..opts.max_steps {
        if t1 - t <= t_done {
            return Ok(y);
        }
        if h > t1 - t {
            h = t1 - t;
        }
        for i in 0..6 {
            let mut yi = y.clone();
            for j in 0..=i {
                if a[i][j] != S::zero() {
                    yi.axpy(h * a[i][j], &k[j], S::one());
                }
            }
            k[i + 1] = rhs(t + c[i] * h, &yi);
        }
        // FSAL: stage 7 evaluated at the 5th-order solution.
        let y_new = {
            let mut yi = y.clone();
            for j in 0..6 {
                if a[5][j] != S::zero() {
                    yi.axpy(h * a[5][j], &k[j], S::one());
                }
            }
            yi
        };

        let mut err = S::zero();
        for idx in 0..y.len() {
            let mut ei = S::zero();
            for j in 0..7 {
                if e[j] != S::zero() {
                    ei += e[j] * k[j][idx];
                }
            }
            ei *= h;
            let sc = opts.abs_tol + opts.rel_tol * y[idx].abs().max(y_new[idx].abs());
            let r = ei / sc;
            err += r * r;
        }
        err = (err / S::from_usize(y.len()).unwrap()).sqrt();

        if err <= S::one() {
            t += h;
            y = y_new;
            k[0] = k[6].clone();
        }

        let fac = if err > S::zero() {
            S::lit(0.9) * err.powf(S::lit(-0.2))
        } else {
            S::lit(5.0)
        };
        h *= fac.clamp(S::lit(0.2), S::lit(5.0));
        if h < h_min {
            return Err(Error::Integration(format!(
                "step size underflow at t = {}",
                t.to_f64_lossy()
            )));
        }
    }
    Err(Error::Integration("maximum step count exceeded".into()))
}
