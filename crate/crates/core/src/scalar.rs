//! Scalar abstraction: the numeric core works over `f32` or `f64`.

use num_complex::Complex;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Real scalar type for all numeric work in this crate.
///
/// `nalgebra::RealField` supplies the field operations and elementary
/// functions; `num_traits::Num` is what `num_complex` arithmetic is bounded
/// on; the primitive conversions are used for tolerances and I/O.
pub trait Scalar: nalgebra::RealField + Copy + Num + FromPrimitive + ToPrimitive {
    /// Convert an `f64` constant (tolerances, table values) into `Self`.
    fn from64(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite constant")
    }

    /// Lossy view as `f64`, used for formatting and reports.
    fn as_f64(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).expect("finite scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use crate::functional::{FunctionalTable, PinRule};
    use crate::hermitian::{builtin_state, min_eigenvalue, partial_transpose_b};
    use crate::monomial::{DegreeBound, VarMode};

    // the numeric core instantiates at f32 as well; the SDP work stays f64
    #[test]
    fn f32_instantiation_smoke() {
        let st = builtin_state::<f32>("Sep2").unwrap().normalized().unwrap();
        assert!((st.trace() - 1.0f32).abs() < 1e-6);
        let pt = partial_transpose_b(&st);
        assert!(min_eigenvalue(pt.mat()).unwrap() > -1e-5);
        let table = FunctionalTable::build(
            2,
            2,
            VarMode::Complex,
            DegreeBound::Total(4),
            PinRule::Balance,
        )
        .unwrap();
        let e = table
            .moment_term(num_complex::Complex::<f32>::new(1.0, 0.0), &crate::monomial::Monomial::one(2, 2))
            .unwrap();
        assert_eq!(e.re.terms.len(), 1);
    }
}

/// Modulus of a complex number without requiring `num_traits::Float`.
pub fn cabs<T: Scalar>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}
