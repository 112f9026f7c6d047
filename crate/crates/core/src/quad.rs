//! Adaptive Gauss-Kronrod (G7, K15) quadrature for matrix-valued integrands.

use nalgebra::Matrix2;

use crate::{Error, Result, Scalar};

// K15 nodes (positive half) and weights, G7 weights on the shared nodes,
// tabulated to full reference precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn kronrod_panel<S, F>(f: &mut F, a: S, b: S) -> (Matrix2<S>, S)
where
    S: Scalar,
    F: FnMut(S) -> Matrix2<S>,
{
    let half = S::lit(0.5) * (b - a);
    let mid = S::lit(0.5) * (a + b);
    let mut kron = Matrix2::<S>::zeros();
    let mut gauss = Matrix2::<S>::zeros();
    for i in 0..8 {
        let wk = S::lit(WGK[i]);
        if XGK[i] == 0.0 {
            let v = f(mid);
            kron += v * wk;
            gauss += v * S::lit(WG[3]);
        } else {
            let xs = S::lit(XGK[i]);
            let sum = f(mid - half * xs) + f(mid + half * xs);
            kron += sum * wk;
            // the even-indexed Kronrod-only nodes carry no Gauss weight
            if i % 2 == 1 {
                gauss += sum * S::lit(WG[i / 2]);
            }
        }
    }
    kron *= half;
    gauss *= half;
    let err = (kron - gauss).amax();
    (kron, err)
}

/// Adaptive bisection quadrature of a `Matrix2`-valued integrand over
/// `[a, b]` to absolute per-entry tolerance `abs_tol`.
pub fn integrate_matrix<S, F>(mut f: F, a: S, b: S, abs_tol: S) -> Result<Matrix2<S>>
where
    S: Scalar,
    F: FnMut(S) -> Matrix2<S>,
{
    if b < a {
        return Err(Error::Quadrature("reversed interval".into()));
    }
    if a == b {
        return Ok(Matrix2::zeros());
    }
    let mut stack = vec![(a, b, abs_tol)];
    let mut total = Matrix2::<S>::zeros();
    let mut panels = 0usize;
    while let Some((lo, hi, tol)) = stack.pop() {
        panels += 1;
        if panels > 4096 {
            return Err(Error::Quadrature(
                "panel budget exhausted before reaching tolerance".into(),
            ));
        }
        let (val, err) = kronrod_panel(&mut f, lo, hi);
        if err <= tol || hi - lo < S::lit(1e-12) * (b - a) {
            total += val;
        } else {
            let mid = S::lit(0.5) * (lo + hi);
            let half_tol = S::lit(0.5) * tol;
            stack.push((lo, mid, half_tol));
            stack.push((mid, hi, half_tol));
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let m = integrate_matrix(
            |x: f64| Matrix2::new(x * x, 1.0, x, x * x * x),
            0.0,
            2.0,
            1e-12,
        )
        .unwrap();
        assert_relative_eq!(m[(0, 0)], 8.0 / 3.0, max_relative = 1e-13);
        assert_relative_eq!(m[(0, 1)], 2.0, max_relative = 1e-13);
        assert_relative_eq!(m[(1, 0)], 2.0, max_relative = 1e-13);
        assert_relative_eq!(m[(1, 1)], 4.0, max_relative = 1e-13);
    }

    #[test]
    fn step_discontinuity() {
        let m = integrate_matrix(
            |x: f64| {
                let v = if x < 0.37 { 1.0 } else { 2.5 };
                Matrix2::new(v, 0.0, 0.0, v * x)
            },
            0.0,
            1.0,
            1e-13,
        )
        .unwrap();
        let exact = 0.37 + 2.5 * 0.63;
        assert!((m[(0, 0)] - exact).abs() < 1e-10);
    }

    #[test]
    fn oscillatory_integrand() {
        let m = integrate_matrix(
            |x: f64| Matrix2::new((10.0 * x).sin(), 0.0, 0.0, (3.0 * x).exp()),
            0.0,
            1.0,
            1e-11,
        )
        .unwrap();
        assert_relative_eq!(m[(0, 0)], (1.0 - (10.0f64).cos()) / 10.0, epsilon = 1e-10);
        assert_relative_eq!(
            m[(1, 1)],
            ((3.0f64).exp() - 1.0) / 3.0,
            max_relative = 1e-10
        );
    }
}
