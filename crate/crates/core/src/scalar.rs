//! Scalar abstraction shared by every numeric module.
//!
//! All math in the crate is written against [`Real`], which is implemented
//! for `f32` and `f64`. Complex values are `num_complex::Complex<T>`.

use std::fmt::{Debug, Display};

use nalgebra::{ComplexField, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type usable throughout the crate.
///
/// The associated constants are the default relative tolerances for this
/// precision. `f64` uses the canonical values; `f32` loosens them to sit a
/// comfortable margin above its unit roundoff.
pub trait Real:
    RealField
    + Copy
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Eigenvalue threshold for PD / degenerate / indefinite verdicts.
    const PD_TOL: f64;
    /// Allowed asymmetry `|m_ij - conj(m_ji)|`.
    const HERM_TOL: f64;
    /// Residual threshold for null vectors and invariance checks.
    const RESID_TOL: f64;
    /// Absolute threshold on Fourier coefficients for strictness.
    const STRICT_TOL: f64;
    /// Absolute round-off allowance when analysing a function on a group.
    const SYNTH_TOL: f64;
    /// Default metric tolerance for point identity on continuous spaces.
    const EQ_TOL: f64;

    /// Converts an `f64` literal into this type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite real converts to f64")
    }
}

impl Real for f64 {
    const PD_TOL: f64 = 1e-9;
    const HERM_TOL: f64 = 1e-12;
    const RESID_TOL: f64 = 1e-8;
    const STRICT_TOL: f64 = 1e-10;
    const SYNTH_TOL: f64 = 1e-10;
    const EQ_TOL: f64 = 1e-10;
}

impl Real for f32 {
    const PD_TOL: f64 = 1e-4;
    const HERM_TOL: f64 = 1e-5;
    const RESID_TOL: f64 = 1e-3;
    const STRICT_TOL: f64 = 1e-4;
    const SYNTH_TOL: f64 = 1e-4;
    const EQ_TOL: f64 = 1e-5;
}

/// `e^{i theta}`.
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Embeds a real number.
pub fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Complex exponential.
pub fn cexp<T: Real>(z: Complex<T>) -> Complex<T> {
    cis(z.im) * z.re.exp()
}

/// Modulus `|z|`.
pub fn modulus<T: Real>(z: Complex<T>) -> T {
    ComplexField::modulus(z)
}

/// `sum conj(a_i) b_i`.
pub fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| {
            acc + x.conj() * *y
        })
}

/// Euclidean norm of a complex vector.
pub fn norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}
