/// Real scalar type the whole library is generic over: `f32` or `f64`.
pub trait Scalar:
    nalgebra::RealField
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::MulAdd<Output = Self>
    + Copy
{
    /// Convert an `f64` literal into the scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable in scalar type")
    }

    /// `-inf` in the scalar type.
    fn neg_inf() -> Self {
        Self::from_f64(f64::NEG_INFINITY).expect("scalar type has no -inf")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `(e^x - 1)/x`, continuous through `x = 0`.
    fn exp_m1_over(self) -> Self {
        let x = self;
        if x.abs() < Self::lit(1e-4) {
            let c2 = Self::lit(0.5);
            let c3 = Self::lit(1.0 / 6.0);
            let c4 = Self::lit(1.0 / 24.0);
            Self::one() + x * (c2 + x * (c3 + x * c4))
        } else {
            nalgebra::ComplexField::exp_m1(x) / x
        }
    }

    /// `cosh^-1(x)` for `x >= 1`, stable near `x = 1`.
    fn acosh_stable(self) -> Self {
        let u = self - Self::one();
        if u <= Self::zero() {
            return Self::zero();
        }
        // ln(1 + u + sqrt(u (2 + u)))
        (u + (u * (Self::lit(2.0) + u)).sqrt()).ln_1p()
    }
}

impl<T> Scalar for T where
    T: nalgebra::RealField
        + num_traits::FromPrimitive
        + num_traits::ToPrimitive
        + num_traits::MulAdd<Output = Self>
        + Copy
{
}

#[cfg(test)]
mod tests {
    use super::Scalar;

    #[test]
    fn exp_m1_over_matches_std() {
        for &x in &[-2.0, -1e-3, -1e-7, 1e-9, 1e-5, 0.3, 4.0] {
            let got = Scalar::exp_m1_over(x);
            let want = f64::exp_m1(x) / x;
            assert!((got - want).abs() <= 1e-14 * (1.0 + want.abs()));
        }
        assert_eq!(Scalar::exp_m1_over(0.0), 1.0);
    }

    #[test]
    fn acosh_stable_matches_std() {
        for &x in &[
            1.0,
            1.0 + 1e-12,
            1.0 + 1e-6,
            1.016666,
            1.5430806348152437,
            10.0,
        ] {
            let got = Scalar::acosh_stable(x);
            assert!((got - f64::acosh(x)).abs() <= 1e-12 * (1.0 + f64::acosh(x)));
        }
    }
}
