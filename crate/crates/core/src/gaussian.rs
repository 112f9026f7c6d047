//! Gaussian states over one or two modes: quadrature means, covariance
//! matrices and the derived observables (photon number, symplectic spectra,
//! logarithmic negativity).
//!
//! Quadratures are `x = (a + a^dag)/2`, `p = (a - a^dag)/(2i)`, so the
//! vacuum covariance is `Id/4` and every symplectic eigenvalue of a
//! physical state is `>= 1/4`. With this normalisation the emitted photon
//! number observable `<N+1>` equals `tr sigma + |mean|^2`.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::{Error, Result, Scalar};

/// Quadrature basis tag. `Primed` refers to the symmetric/antisymmetric
/// mode combinations of the ring cavity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Original,
    Primed,
}

/// Mean thermal occupation of a bath or initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalSpec<S: Scalar> {
    pub nbar: S,
}

impl<S: Scalar> ThermalSpec<S> {
    pub fn new(nbar: S) -> Result<Self> {
        if nbar < S::zero() {
            return Err(Error::Domain("nbar must be >= 0".into()));
        }
        Ok(Self { nbar })
    }

    /// Per-quadrature variance `(2 nbar + 1)/4`.
    pub fn variance(&self) -> S {
        (S::lit(2.0) * self.nbar + S::one()) * S::lit(0.25)
    }
}

/// Mean vector plus covariance matrix of a 1- or 2-mode Gaussian state,
/// quadratures interleaved as `[x1, p1, x2, p2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState<S: Scalar> {
    pub mean: DVector<S>,
    pub cov: DMatrix<S>,
    pub basis: Basis,
}

impl<S: Scalar> GaussianState<S> {
    pub fn new(mean: DVector<S>, cov: DMatrix<S>, basis: Basis) -> Result<Self> {
        let dim = mean.len();
        if dim != 2 && dim != 4 {
            return Err(Error::InvalidCovariance(format!(
                "expected 1 or 2 modes (dim 2 or 4), got dim {dim}"
            )));
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::InvalidCovariance(
                "mean/covariance size mismatch".into(),
            ));
        }
        let scale = S::one().max(cov.amax());
        let sym_tol = S::lit(1e-12) * scale;
        for i in 0..dim {
            for j in (i + 1)..dim {
                if (cov[(i, j)] - cov[(j, i)]).abs() > sym_tol {
                    return Err(Error::InvalidCovariance(
                        "covariance is not symmetric".into(),
                    ));
                }
            }
        }
        Ok(Self { mean, cov, basis })
    }

    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    /// All symplectic eigenvalues are at least `1/4 - tol`.
    pub fn check_uncertainty(&self, tol: S) -> Result<()> {
        let nus = symplectic_eigenvalues(&self.cov)?;
        let bound = S::lit(0.25) - tol;
        match nus.iter().find(|&&nu| nu < bound) {
            Some(&nu) => Err(Error::UncertaintyViolation {
                t: f64::NAN,
                nu_min: nu.to_f64_lossy(),
            }),
            None => Ok(()),
        }
    }
}

/// Zero-mean thermal state `(2 nbar + 1) Id / 4` over `modes` modes.
pub fn thermal_state<S: Scalar>(nbar: S, modes: usize, basis: Basis) -> Result<GaussianState<S>> {
    if modes != 1 && modes != 2 {
        return Err(Error::Domain("thermal_state supports 1 or 2 modes".into()));
    }
    let spec = ThermalSpec::new(nbar)?;
    let dim = 2 * modes;
    GaussianState::new(
        DVector::zeros(dim),
        DMatrix::identity(dim, dim) * spec.variance(),
        basis,
    )
}

/// Bose-Einstein occupation `1/(e^{omega/T} - 1)` with `k_B = 1`.
pub fn nbar_from_temperature<S: Scalar>(omega: S, temperature: S) -> Result<S> {
    if omega <= S::zero() {
        return Err(Error::Domain("omega must be > 0".into()));
    }
    if temperature < S::zero() {
        return Err(Error::Domain("temperature must be >= 0".into()));
    }
    if temperature == S::zero() {
        return Ok(S::zero());
    }
    Ok(S::one() / (omega / temperature).exp_m1())
}

/// Photon-number observable `<N+1> = tr sigma + |mean|^2`.
pub fn photon_number<S: Scalar>(state: &GaussianState<S>) -> S {
    state.cov.trace() + state.mean.dot(&state.mean)
}

/// `a d - b c` via compensated multiplication; accurate even when the
/// products nearly cancel.
pub(crate) fn det2_stable<S: Scalar>(a: S, b: S, c: S, d: S) -> S {
    let w = b * c;
    let e = num_traits::MulAdd::mul_add(b, c, -w);
    let f = num_traits::MulAdd::mul_add(a, d, -w);
    f - e
}

pub(crate) fn det2_matrix<S: Scalar>(m: &Matrix2<S>) -> S {
    det2_stable(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

fn check_square_cov<S: Scalar>(cov: &DMatrix<S>) -> Result<usize> {
    let dim = cov.nrows();
    if cov.ncols() != dim || (dim != 2 && dim != 4) {
        return Err(Error::InvalidCovariance(format!(
            "expected a 2x2 or 4x4 covariance, got {}x{}",
            cov.nrows(),
            cov.ncols()
        )));
    }
    let scale = S::one().max(cov.amax());
    for i in 0..dim {
        for j in (i + 1)..dim {
            if (cov[(i, j)] - cov[(j, i)]).abs() > S::lit(1e-9) * scale {
                return Err(Error::InvalidCovariance(
                    "covariance is not symmetric".into(),
                ));
            }
        }
    }
    if (0..dim).any(|i| cov[(i, i)] <= S::zero()) {
        return Err(Error::InvalidCovariance(
            "covariance has a non-positive diagonal entry".into(),
        ));
    }
    Ok(dim)
}

/// Positive spectrum of `|i Omega sigma|`, ascending: one value per mode.
///
/// Uses the symplectic-invariant formulas for one and two modes with a
/// compensated 2x2 determinant, which stays accurate for strongly squeezed
/// covariances.
pub fn symplectic_eigenvalues<S: Scalar>(cov: &DMatrix<S>) -> Result<Vec<S>> {
    let dim = check_square_cov(cov)?;
    if dim == 2 {
        let det = det2_stable(cov[(0, 0)], cov[(0, 1)], cov[(1, 0)], cov[(1, 1)]);
        if det <= S::zero() {
            return Err(Error::InvalidCovariance(
                "covariance is not positive definite".into(),
            ));
        }
        return Ok(vec![det.sqrt()]);
    }
    let a = cov.fixed_view::<2, 2>(0, 0).into_owned();
    let b = cov.fixed_view::<2, 2>(2, 2).into_owned();
    let c = cov.fixed_view::<2, 2>(0, 2).into_owned();
    let det4 = block_det4(&a, &b, &c);
    if det4 <= S::zero() {
        return Err(Error::InvalidCovariance(
            "covariance is not positive definite".into(),
        ));
    }
    let inv = det2_matrix(&a) + det2_matrix(&b) + S::lit(2.0) * det2_matrix(&c);
    Ok(two_mode_from_invariants(inv, det4))
}

/// Symplectic pair from the invariants `inv = det A + det B +- 2 det C`
/// and `det4 = det sigma`, ascending.
fn two_mode_from_invariants<S: Scalar>(inv: S, det4: S) -> Vec<S> {
    let disc = (inv * inv - S::lit(4.0) * det4).max(S::zero()).sqrt();
    let hi2 = S::lit(0.5) * (inv + disc);
    // stable complement: lo^2 hi^2 = det4
    let lo2 = if hi2 > S::zero() {
        det4 / hi2
    } else {
        S::zero()
    };
    vec![lo2.max(S::zero()).sqrt(), hi2.max(S::zero()).sqrt()]
}

/// `det sigma` for the block form `[[A, C], [C^T, B]]` via a Schur
/// complement on `A`, with compensated 2x2 determinants.
fn block_det4<S: Scalar>(a: &Matrix2<S>, b: &Matrix2<S>, c: &Matrix2<S>) -> S {
    let det_a = det2_matrix(a);
    if det_a == S::zero() {
        return S::zero();
    }
    let a_inv = Matrix2::new(a[(1, 1)], -a[(0, 1)], -a[(1, 0)], a[(0, 0)]) / det_a;
    let schur = b - c.transpose() * a_inv * c;
    det_a * det2_matrix(&schur)
}

/// Logarithmic negativity of a two-mode state in the original basis:
/// partial transposition `p_2 -> -p_2`, then
/// `E_N = max(0, -log2(4 nu_min))`.
pub fn log_negativity<S: Scalar>(state: &GaussianState<S>) -> Result<S> {
    if state.modes() != 2 {
        return Err(Error::Domain(
            "log_negativity requires a two-mode state".into(),
        ));
    }
    if state.basis != Basis::Original {
        return Err(Error::Domain(
            "log_negativity requires the original basis".into(),
        ));
    }
    let cov = &state.cov;
    check_square_cov(cov)?;
    let a = cov.fixed_view::<2, 2>(0, 0).into_owned();
    let b = cov.fixed_view::<2, 2>(2, 2).into_owned();
    let c = cov.fixed_view::<2, 2>(0, 2).into_owned();
    // partial transposition flips the sign of det C and preserves det sigma
    let inv_pt = det2_matrix(&a) + det2_matrix(&b) - S::lit(2.0) * det2_matrix(&c);
    let det4 = block_det4(&a, &b, &c);
    let nus = two_mode_from_invariants(inv_pt, det4);
    Ok(negativity_from_nu_min(nus[0]))
}

/// Logarithmic negativity from the decoupled primed-basis blocks of a ring
/// state, `sigma' = diag(P, Q)`. Stays accurate at dynamic ranges where
/// forming the original-basis covariance would lose the smallest
/// partially-transposed eigenvalue to cancellation.
pub fn log_negativity_blocks<S: Scalar>(p: &Matrix2<S>, q: &Matrix2<S>) -> S {
    // In the primed basis the partial transposition swaps the p-quadrature
    // rows/columns of the two blocks.
    let inv_pt =
        p[(0, 0)] * q[(1, 1)] + q[(0, 0)] * p[(1, 1)] - S::lit(2.0) * p[(0, 1)] * q[(0, 1)];
    let det4 = det2_matrix(p) * det2_matrix(q);
    let nus = two_mode_from_invariants(inv_pt, det4);
    negativity_from_nu_min(nus[0])
}

fn negativity_from_nu_min<S: Scalar>(nu_min: S) -> S {
    if nu_min <= S::zero() {
        return S::zero();
    }
    let val = -(S::lit(4.0) * nu_min).ln() / S::ln_2();
    val.max(S::zero())
}
