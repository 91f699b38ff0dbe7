//! Dense Hermitian linear algebra with tolerance-aware verdicts.
//!
//! Every threshold is relative: it is multiplied by the spectral scale
//! `max |lambda_i|` of the matrix under test, so verdicts do not change when
//! the matrix is multiplied by a positive constant.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{modulus, Real};

/// Relative tolerances used by the verdict logic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances<T> {
    pub pd_tol: T,
    pub herm_tol: T,
    pub resid_tol: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            pd_tol: T::lit(T::PD_TOL),
            herm_tol: T::lit(T::HERM_TOL),
            resid_tol: T::lit(T::RESID_TOL),
        }
    }
}

/// Square complex matrix that is Hermitian up to `herm_tol`.
///
/// Construction symmetrizes the input to `(M + M*) / 2`, so downstream code
/// can rely on exact Hermitian symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T: Real> {
    inner: DMatrix<Complex<T>>,
}

impl<T: Real> HermitianMatrix<T> {
    /// Validates and symmetrizes `m` using the default Hermitian tolerance.
    pub fn new(m: DMatrix<Complex<T>>) -> Result<Self> {
        Self::with_tolerance(m, T::lit(T::HERM_TOL))
    }

    /// Validates against `herm_tol * max|m_ij|` and symmetrizes.
    pub fn with_tolerance(m: DMatrix<Complex<T>>, herm_tol: T) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        let entry_scale = m.iter().fold(T::zero(), |acc, z| acc.max(modulus(*z)));
        let allowed = herm_tol * entry_scale;
        let mut worst = T::zero();
        for i in 0..rows {
            for j in i..rows {
                let d = modulus(m[(i, j)] - m[(j, i)].conj());
                worst = worst.max(d);
            }
        }
        if worst > allowed || !entry_scale.is_finite() {
            return Err(Error::NonHermitianInput {
                max_asymmetry: worst.as_f64(),
                allowed: allowed.as_f64(),
            });
        }
        let half = T::lit(0.5);
        let sym = DMatrix::from_fn(rows, rows, |i, j| (m[(i, j)] + m[(j, i)].conj()) * half);
        Ok(Self { inner: sym })
    }

    /// Builds from row-major complex rows.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: r.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Builds from row-major real rows.
    pub fn from_real_rows(rows: &[Vec<T>]) -> Result<Self> {
        let complex: Vec<Vec<Complex<T>>> = rows
            .iter()
            .map(|r| r.iter().map(|x| Complex::new(*x, T::zero())).collect())
            .collect();
        Self::from_rows(&complex)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.inner[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex<T>> {
        &self.inner
    }

    pub fn into_matrix(self) -> DMatrix<Complex<T>> {
        self.inner
    }

    /// `alpha * M` for real `alpha`.
    pub fn scaled(&self, alpha: T) -> Self {
        Self {
            inner: self.inner.map(|z| z * alpha),
        }
    }

    /// `M v`.
    pub fn apply(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        self.check_len(v.len())?;
        let n = self.dim();
        Ok((0..n)
            .map(|i| {
                (0..n).fold(Complex::new(T::zero(), T::zero()), |acc, j| {
                    acc + self.inner[(i, j)] * v[j]
                })
            })
            .collect())
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    /// Full eigen-decomposition with eigenvalues in ascending order.
    pub fn eigen(&self) -> Result<Eigen<T>> {
        let n = self.dim();
        let decomposition =
            SymmetricEigen::try_new(self.inner.clone(), T::default_epsilon(), 1000 * n.max(10))
                .ok_or(Error::SolverError)?;
        let mut order: Vec<usize> = (0..n).collect();
        let values = &decomposition.eigenvalues;
        order.sort_by(|&a, &b| {
            values[a]
                .partial_cmp(&values[b])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolverError);
        }
        Ok(Eigen {
            values: order.iter().map(|&k| values[k]).collect(),
            vectors: order
                .iter()
                .map(|&k| {
                    decomposition
                        .eigenvectors
                        .column(k)
                        .iter()
                        .copied()
                        .collect()
                })
                .collect(),
        })
    }
}

impl<T: Real> Serialize for HermitianMatrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let mut seq = serializer.serialize_seq(Some(n))?;
        for i in 0..n {
            let row: Vec<Complex<T>> = (0..n).map(|j| self.inner[(i, j)]).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

/// Eigenpairs sorted by ascending eigenvalue; `vectors[k]` is unit norm.
#[derive(Debug, Clone)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<Complex<T>>>,
}

impl<T: Real> Eigen<T> {
    /// Spectral scale `max |lambda|`.
    pub fn scale(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PdKind {
    PositiveDefinite,
    PositiveSemidefiniteDegenerate,
    Indefinite,
}

/// Outcome of [`classify`].
#[derive(Debug, Clone, Serialize)]
pub struct PdVerdict<T: Real> {
    pub kind: PdKind,
    pub min_eigenvalue: T,
    pub numeric_rank: usize,
    /// Orthonormal basis of the numerical null space; empty unless degenerate.
    #[serde(serialize_with = "serialize_vectors")]
    pub null_vectors: Vec<Vec<Complex<T>>>,
    pub scale: T,
    pub eigenvalues: Vec<T>,
}

fn serialize_vectors<T: Real, S: Serializer>(
    vs: &[Vec<Complex<T>>],
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = serializer.serialize_seq(Some(vs.len()))?;
    for v in vs {
        seq.serialize_element(v)?;
    }
    seq.end()
}

impl<T: Real> PdVerdict<T> {
    pub fn is_positive_definite(&self) -> bool {
        self.kind == PdKind::PositiveDefinite
    }

    /// `min_eigenvalue / scale`, or zero for the zero matrix.
    pub fn relative_min_eigenvalue(&self) -> T {
        if self.scale > T::zero() {
            self.min_eigenvalue / self.scale
        } else {
            T::zero()
        }
    }
}

/// Classifies `m` as positive definite, degenerate PSD, or indefinite.
pub fn classify<T: Real>(m: &HermitianMatrix<T>, tol: &Tolerances<T>) -> Result<PdVerdict<T>> {
    if !(tol.pd_tol > T::zero()) {
        return Err(Error::BadParameter("pd_tol must be positive".into()));
    }
    let eig = m.eigen()?;
    let scale = eig.scale();
    let threshold = tol.pd_tol * scale;
    let min_eigenvalue = eig.values[0];
    let kind = if min_eigenvalue > threshold {
        PdKind::PositiveDefinite
    } else if min_eigenvalue < -threshold {
        PdKind::Indefinite
    } else {
        PdKind::PositiveSemidefiniteDegenerate
    };
    let numeric_rank = eig.values.iter().filter(|v| v.abs() > threshold).count();
    let null_vectors = if kind == PdKind::PositiveSemidefiniteDegenerate {
        eig.values
            .iter()
            .zip(&eig.vectors)
            .filter(|(v, _)| v.abs() <= threshold)
            .map(|(_, u)| u.clone())
            .collect()
    } else {
        Vec::new()
    };
    Ok(PdVerdict {
        kind,
        min_eigenvalue,
        numeric_rank,
        null_vectors,
        scale,
        eigenvalues: eig.values,
    })
}

/// Value of the Hermitian form `c* M c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticForm<T> {
    /// Real part, the value of the form.
    pub value: T,
    /// Imaginary part; zero up to round-off for a Hermitian matrix.
    pub imag: T,
}

impl<T: Real> QuadraticForm<T> {
    /// True when the imaginary round-off exceeds `resid_tol * scale`.
    pub fn imag_exceeds(&self, resid_tol: T, scale: T) -> bool {
        self.imag.abs() > resid_tol * scale
    }
}

/// Evaluates `c* M c`.
pub fn quadratic_form<T: Real>(
    m: &HermitianMatrix<T>,
    c: &[Complex<T>],
) -> Result<QuadraticForm<T>> {
    let mc = m.apply(c)?;
    let z = crate::scalar::inner(c, &mc);
    Ok(QuadraticForm {
        value: z.re,
        imag: z.im,
    })
}

/// Number of eigenvalues with `|lambda| > tol * scale`.
pub fn numeric_rank<T: Real>(m: &HermitianMatrix<T>, tol: T) -> Result<usize> {
    let eig = m.eigen()?;
    let threshold = tol * eig.scale();
    Ok(eig.values.iter().filter(|v| v.abs() > threshold).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: &[&[f64]]) -> HermitianMatrix<f64> {
        HermitianMatrix::from_real_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
            .unwrap()
    }

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn identity_is_positive_definite() {
        let v = classify(&HermitianMatrix::<f64>::identity(2), &Tolerances::default()).unwrap();
        assert_eq!(v.kind, PdKind::PositiveDefinite);
        assert!((v.min_eigenvalue - 1.0).abs() < 1e-15);
        assert_eq!(v.numeric_rank, 2);
        assert!(v.null_vectors.is_empty());
    }

    #[test]
    fn all_ones_is_degenerate_with_antisymmetric_null_vector() {
        let v = classify(&real(&[&[1.0, 1.0], &[1.0, 1.0]]), &Tolerances::default()).unwrap();
        assert_eq!(v.kind, PdKind::PositiveSemidefiniteDegenerate);
        assert_eq!(v.numeric_rank, 1);
        assert_eq!(v.null_vectors.len(), 1);
        let u = &v.null_vectors[0];
        assert!((u[0] + u[1]).norm() < 1e-12);
        assert!((u[0].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn two_by_two_exponential_matches_characteristic_polynomial() {
        let a = (-1.0f64).exp();
        let v = classify(&real(&[&[1.0, a], &[a, 1.0]]), &Tolerances::default()).unwrap();
        assert_eq!(v.kind, PdKind::PositiveDefinite);
        // roots of lambda^2 - 2 lambda + (1 - a^2) by the quadratic formula
        let (b, cc) = (-2.0, 1.0 - a * a);
        let disc = (b * b - 4.0 * cc).sqrt();
        let lo = (-b - disc) / 2.0;
        let hi = (-b + disc) / 2.0;
        assert!((v.eigenvalues[0] - lo).abs() < 1e-14);
        assert!((v.eigenvalues[1] - hi).abs() < 1e-14);
        assert!((lo - (1.0 - a)).abs() < 1e-15);
    }

    #[test]
    fn indefinite_detected() {
        let v = classify(&real(&[&[0.0, 1.0], &[1.0, 0.0]]), &Tolerances::default()).unwrap();
        assert_eq!(v.kind, PdKind::Indefinite);
        assert!((v.min_eigenvalue + 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let v = classify(&real(&[&[0.0, 0.0], &[0.0, 0.0]]), &Tolerances::default()).unwrap();
        assert_eq!(v.kind, PdKind::PositiveSemidefiniteDegenerate);
        assert_eq!(v.numeric_rank, 0);
        assert_eq!(v.null_vectors.len(), 2);
    }

    #[test]
    fn complex_hermitian_eigenvalues() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let m = HermitianMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, -1.0), c(2.0, 0.0)],
        ])
        .unwrap();
        let v = classify(&m, &Tolerances::default()).unwrap();
        assert!((v.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((v.eigenvalues[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_rejected() {
        let err = HermitianMatrix::from_real_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::NonHermitianInput { .. }));
        let err = HermitianMatrix::from_rows(&[vec![c(1.0, 1.0)]]).unwrap_err();
        assert!(matches!(err, Error::NonHermitianInput { .. }));
    }

    #[test]
    fn rounding_asymmetry_is_symmetrized() {
        let m = HermitianMatrix::from_real_rows(&[vec![1.0, 0.5 + 1e-15], vec![0.5, 1.0]]).unwrap();
        assert_eq!(m.get(0, 1), m.get(1, 0));
    }

    #[test]
    fn empty_and_ragged_rejected() {
        assert!(matches!(
            HermitianMatrix::<f64>::from_rows(&[]),
            Err(Error::NotSquare { .. })
        ));
        assert!(matches!(
            HermitianMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0]]),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn quadratic_form_examples() {
        let id = HermitianMatrix::<f64>::identity(2);
        assert_eq!(
            quadratic_form(&id, &[c(1.0, 0.0), c(0.0, 0.0)])
                .unwrap()
                .value,
            1.0
        );
        let ones = real(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert_eq!(
            quadratic_form(&ones, &[c(1.0, 0.0), c(-1.0, 0.0)])
                .unwrap()
                .value,
            0.0
        );
        let diag = real(&[&[2.0, 0.0], &[0.0, 3.0]]);
        let q = quadratic_form(&diag, &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(q.value, 5.0);
        assert!(!q.imag_exceeds(1e-8, 3.0));
        assert!(matches!(
            quadratic_form(&diag, &[c(1.0, 0.0)]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn numeric_rank_examples() {
        assert_eq!(
            numeric_rank(&HermitianMatrix::<f64>::identity(3), 1e-9).unwrap(),
            3
        );
        let ones = HermitianMatrix::from_real_rows(&vec![vec![1.0; 4]; 4]).unwrap();
        assert_eq!(numeric_rank(&ones, 1e-9).unwrap(), 1);
    }

    #[test]
    fn works_in_single_precision() {
        let m = HermitianMatrix::<f32>::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let v = classify(&m, &Tolerances::default()).unwrap();
        assert_eq!(v.kind, PdKind::PositiveSemidefiniteDegenerate);
        let v = classify(&HermitianMatrix::<f32>::identity(3), &Tolerances::default()).unwrap();
        assert_eq!(v.kind, PdKind::PositiveDefinite);
    }
}
