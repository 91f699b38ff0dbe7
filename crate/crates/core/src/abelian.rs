//! Fourier analysis of translation-invariant kernels on finite abelian
//! groups `Z_q1 x ... x Z_ql`.
//!
//! The groups are written additively, so the multiplicative `x y^{-1}` of the
//! usual statement becomes the componentwise difference `x - y (mod q)`.
//! Coefficients are indexed by the lexicographic enumeration of
//! [`Space::group_elements`]. Analysis is direct summation, `O(|G|^2)`.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kernels::{MatrixKernel, ScalarForm, ScalarKernel};
use crate::numcore::{classify, HermitianMatrix, PdKind, PdVerdict, Tolerances};
use crate::scalar::{cis, re, Real};
use crate::spaces::{Point, Space};

/// Dense verification cap on `ell * |G|`.
pub const BRUTE_FORCE_CAP: usize = 200;

/// The character `xi_g(x) = prod_r exp(2 pi i g_r x_r / q_r)`.
pub fn character<T: Real>(g: &Point<T>, x: &Point<T>, group: &Space<T>) -> Result<Complex<T>> {
    group.check(g)?;
    group.check(x)?;
    let moduli = group.moduli().ok_or(Error::WrongSpaceKind {
        expected: "finite abelian group",
    })?;
    let (g, x) = (g.as_element().unwrap(), x.as_element().unwrap());
    // Accumulate the phase as an exact fraction of a turn per factor.
    let turns = g
        .iter()
        .zip(x)
        .zip(moduli)
        .fold(T::zero(), |acc, ((&gr, &xr), &q)| {
            let k = (u64::from(gr) * u64::from(xr)) % u64::from(q);
            acc + T::lit(k as f64) / T::lit(f64::from(q))
        });
    Ok(cis(T::two_pi() * turns))
}

/// Character table `table[g][x]` in lexicographic order.
pub fn character_table<T: Real>(group: &Space<T>) -> Result<Vec<Vec<Complex<T>>>> {
    let elements = group.group_elements()?;
    elements
        .iter()
        .map(|g| elements.iter().map(|x| character(g, x, group)).collect())
        .collect()
}

/// Coefficient family of a positive definite translation-invariant kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients<T: Real> {
    /// `a_g >= 0`.
    Scalar(Vec<T>),
    /// Hermitian PSD `A_g`, all of the same size.
    Matrix(Vec<HermitianMatrix<T>>),
}

/// `{a_g}` or `{A_g}` over a finite abelian group.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSpectrum<T: Real> {
    group: Space<T>,
    coefficients: Coefficients<T>,
}

impl<T: Real> FourierSpectrum<T> {
    /// Validated scalar spectrum: one nonnegative coefficient per element.
    pub fn scalar(group: Space<T>, coefficients: Vec<T>) -> Result<Self> {
        Self::new(group, Coefficients::Scalar(coefficients))
    }

    /// Validated matrix spectrum: one Hermitian PSD matrix per element.
    pub fn matrix(group: Space<T>, coefficients: Vec<HermitianMatrix<T>>) -> Result<Self> {
        Self::new(group, Coefficients::Matrix(coefficients))
    }

    pub fn new(group: Space<T>, coefficients: Coefficients<T>) -> Result<Self> {
        let spectrum = Self::unchecked(group, coefficients)?;
        spectrum.validate()?;
        Ok(spectrum)
    }

    /// Checks only the group and the coefficient count.
    fn unchecked(group: Space<T>, coefficients: Coefficients<T>) -> Result<Self> {
        let order = group.order().ok_or(Error::WrongSpaceKind {
            expected: "finite abelian group",
        })?;
        let len = match &coefficients {
            Coefficients::Scalar(a) => a.len(),
            Coefficients::Matrix(a) => a.len(),
        };
        if len != order {
            return Err(Error::WrongLength {
                expected: order,
                got: len,
            });
        }
        if let Coefficients::Matrix(a) = &coefficients {
            let ell = a[0].dim();
            if let Some(bad) = a.iter().find(|m| m.dim() != ell) {
                return Err(Error::DimensionMismatch {
                    expected: ell,
                    got: bad.dim(),
                });
            }
        }
        Ok(Self {
            group,
            coefficients,
        })
    }

    /// Nonnegativity (scalar) or positive semidefiniteness (matrix) up to
    /// `synth_tol`.
    pub fn validate(&self) -> Result<()> {
        let synth_tol = T::lit(T::SYNTH_TOL);
        match &self.coefficients {
            Coefficients::Scalar(a) => {
                if let Some((i, v)) = a.iter().enumerate().find(|(_, v)| !(**v >= -synth_tol)) {
                    return Err(Error::BadParameter(format!(
                        "coefficient {i} is {v}, expected a nonnegative value"
                    )));
                }
            }
            Coefficients::Matrix(a) => {
                for (i, m) in a.iter().enumerate() {
                    let eig = m.eigen()?;
                    if eig.values[0] < -synth_tol * eig.scale().max(T::one()) {
                        return Err(Error::BadParameter(format!(
                            "coefficient matrix {i} has eigenvalue {}",
                            eig.values[0]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &Space<T> {
        &self.group
    }

    pub fn coefficients(&self) -> &Coefficients<T> {
        &self.coefficients
    }

    /// Output dimension: 1 for scalar spectra.
    pub fn ell(&self) -> usize {
        match &self.coefficients {
            Coefficients::Scalar(_) => 1,
            Coefficients::Matrix(a) => a[0].dim(),
        }
    }

    /// Coefficients as `ell x ell` complex matrices (1x1 for scalar spectra).
    pub fn coefficient_matrices(&self) -> Vec<DMatrix<Complex<T>>> {
        match &self.coefficients {
            Coefficients::Scalar(a) => a
                .iter()
                .map(|&v| DMatrix::from_element(1, 1, re(v)))
                .collect(),
            Coefficients::Matrix(a) => a.iter().map(|m| m.as_matrix().clone()).collect(),
        }
    }

    /// Scalar spectrum of the projection `<K v, v>`: `a_g = <A_g v, v>`.
    pub fn project(&self, v: &[Complex<T>]) -> Result<Self> {
        if v.len() != self.ell() {
            return Err(Error::DimensionMismatch {
                expected: self.ell(),
                got: v.len(),
            });
        }
        let a = self
            .coefficient_matrices()
            .iter()
            .map(|m| {
                let mv = m * nalgebra::DVector::from_column_slice(v);
                crate::scalar::inner(v, mv.as_slice()).re
            })
            .collect();
        Self::unchecked(self.group.clone(), Coefficients::Scalar(a))
    }
}

impl<T: Real> Serialize for FourierSpectrum<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("FourierSpectrum", 2)?;
        st.serialize_field("group", self.group.moduli().unwrap_or(&[]))?;
        match &self.coefficients {
            Coefficients::Scalar(a) => st.serialize_field("coefficients", a)?,
            Coefficients::Matrix(a) => st.serialize_field("coefficients", a)?,
        }
        st.end()
    }
}

/// Result of [`analyze`]: the raw coefficients with non-PD flags.
#[derive(Debug, Clone, Serialize)]
pub struct Analysis<T: Real> {
    /// `a_g = (1/|G|) sum_x psi(x) conj(xi_g(x))`, complex in general.
    pub raw: Vec<Complex<T>>,
    pub min_coefficient: T,
    pub max_imaginary: T,
    /// True when some coefficient is negative or non-real beyond `synth_tol`,
    /// which rules out positive definiteness of `psi(x - y)`.
    pub non_pd_evidence: bool,
}

impl<T: Real> Analysis<T> {
    /// Real parts as a spectrum, validated for nonnegativity.
    pub fn spectrum(&self, group: &Space<T>) -> Result<FourierSpectrum<T>> {
        if self.non_pd_evidence {
            return Err(Error::BadParameter(
                "function is not positive definite: coefficients are negative or complex".into(),
            ));
        }
        FourierSpectrum::scalar(
            group.clone(),
            self.raw.iter().map(|z| z.re.max(T::zero())).collect(),
        )
    }
}

/// Fourier coefficients of `psi`, given as its values in lexicographic order.
pub fn analyze<T: Real>(psi: &[Complex<T>], group: &Space<T>) -> Result<Analysis<T>> {
    let table = character_table(group)?;
    if psi.len() != table.len() {
        return Err(Error::WrongLength {
            expected: table.len(),
            got: psi.len(),
        });
    }
    let inv_order = T::one() / T::lit(table.len() as f64);
    let raw: Vec<Complex<T>> = table
        .iter()
        .map(|row| {
            row.iter()
                .zip(psi)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (xi, p)| {
                    acc + *p * xi.conj()
                })
                * inv_order
        })
        .collect();
    let synth_tol = T::lit(T::SYNTH_TOL);
    let min_coefficient = raw
        .iter()
        .fold(T::max_value().unwrap(), |acc, z| acc.min(z.re));
    let max_imaginary = raw.iter().fold(T::zero(), |acc, z| acc.max(z.im.abs()));
    Ok(Analysis {
        non_pd_evidence: min_coefficient < -synth_tol || max_imaginary > synth_tol,
        raw,
        min_coefficient,
        max_imaginary,
    })
}

/// Matrix coefficients `A_g = (1/|G|) sum_x Psi(x) conj(xi_g(x))`.
pub fn analyze_matrix<T: Real>(
    psi: &[DMatrix<Complex<T>>],
    group: &Space<T>,
) -> Result<Vec<DMatrix<Complex<T>>>> {
    let table = character_table(group)?;
    if psi.len() != table.len() {
        return Err(Error::WrongLength {
            expected: table.len(),
            got: psi.len(),
        });
    }
    let (r, c) = psi[0].shape();
    let inv_order = T::one() / T::lit(table.len() as f64);
    Ok(table
        .iter()
        .map(|row| {
            row.iter()
                .zip(psi)
                .fold(DMatrix::zeros(r, c), |acc, (xi, p)| acc + p * xi.conj())
                * re(inv_order)
        })
        .collect())
}

/// `psi(x) = sum_g a_g xi_g(x)` (or `A_g`), with the induced kernel
/// `K(x, y) = psi(x - y)`.
#[derive(Debug, Clone)]
pub struct Synthesis<T: Real> {
    group: Space<T>,
    values: Vec<DMatrix<Complex<T>>>,
}

impl<T: Real> Synthesis<T> {
    pub fn ell(&self) -> usize {
        self.values[0].nrows()
    }

    /// `psi(x)` for every element, lexicographic.
    pub fn values(&self) -> &[DMatrix<Complex<T>>] {
        &self.values
    }

    /// Scalar values; the (0,0) entries for matrix syntheses.
    pub fn scalar_values(&self) -> Vec<Complex<T>> {
        self.values.iter().map(|m| m[(0, 0)]).collect()
    }

    /// The induced kernel `K(x, y) = psi(x - y)` as a lookup table.
    pub fn kernel(&self) -> MatrixKernel<T> {
        let ell = self.ell();
        let entries = (0..ell)
            .map(|i| {
                (0..ell)
                    .map(|j| ScalarKernel {
                        space: self.group.clone(),
                        form: ScalarForm::GroupTable {
                            values: self.values.iter().map(|m| m[(i, j)]).collect(),
                        },
                    })
                    .collect()
            })
            .collect();
        MatrixKernel::new(self.group.clone(), entries).expect("square grid on one space")
    }

    /// Scalar kernel for `ell = 1` syntheses.
    pub fn scalar_kernel(&self) -> ScalarKernel<T> {
        ScalarKernel {
            space: self.group.clone(),
            form: ScalarForm::GroupTable {
                values: self.scalar_values(),
            },
        }
    }
}

pub fn synthesize<T: Real>(spectrum: &FourierSpectrum<T>) -> Result<Synthesis<T>> {
    let group = spectrum.group();
    let table = character_table(group)?;
    let coefficients = spectrum.coefficient_matrices();
    let ell = spectrum.ell();
    let order = table.len();
    let values = (0..order)
        .map(|x| {
            (0..order).fold(DMatrix::zeros(ell, ell), |acc, g| {
                acc + &coefficients[g] * table[g][x]
            })
        })
        .collect();
    Ok(Synthesis {
        group: group.clone(),
        values,
    })
}

/// Strictness from the coefficients alone: every `a_g > strict_tol`, or
/// every `A_g` positive definite.
pub fn strict_criterion<T: Real>(spectrum: &FourierSpectrum<T>) -> bool {
    strict_criterion_with(spectrum, T::lit(T::STRICT_TOL), &Tolerances::default())
}

/// [`strict_criterion`] with explicit thresholds.
pub fn strict_criterion_with<T: Real>(
    spectrum: &FourierSpectrum<T>,
    strict_tol: T,
    tol: &Tolerances<T>,
) -> bool {
    match spectrum.coefficients() {
        Coefficients::Scalar(a) => a.iter().all(|&v| v > strict_tol),
        Coefficients::Matrix(a) => a.iter().all(|m| {
            classify(m, tol)
                .map(|v| v.kind == PdKind::PositiveDefinite)
                .unwrap_or(false)
        }),
    }
}

/// Ground truth: classify the full blocked Gram of `K` over every element.
pub fn brute_force_strict<T: Real>(kernel: &MatrixKernel<T>) -> Result<PdVerdict<T>> {
    brute_force_strict_with(kernel, &Tolerances::default())
}

pub fn brute_force_strict_with<T: Real>(
    kernel: &MatrixKernel<T>,
    tol: &Tolerances<T>,
) -> Result<PdVerdict<T>> {
    let order = kernel.space.order().ok_or(Error::WrongSpaceKind {
        expected: "finite abelian group",
    })?;
    let size = order * kernel.ell;
    if size > BRUTE_FORCE_CAP {
        return Err(Error::TooLarge {
            size,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let elements = kernel.space.group_elements()?;
    let gram = crate::kernels::gram(kernel, &elements)?;
    classify(&gram, tol)
}
