//! Scalar and matrix-valued kernels, scalar projections, Gram assembly and
//! sampled invariance checks.
//!
//! A [`MatrixKernel`] is an `ell x ell` grid of independently evaluable
//! [`ScalarKernel`]s. Blocked Gram matrices use coordinate-major layout:
//! row `i * n + mu` belongs to coordinate `i` and point `mu`.

use nalgebra::DMatrix;
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abelian::character;
use crate::error::{Error, Result};
use crate::numcore::{HermitianMatrix, Tolerances};
use crate::rng::rng;
use crate::scalar::{cexp, re, Real};
use crate::spaces::{canonical_angle, Point, Space, SpaceKind};
use crate::symmetry::SymmetryMap;

/// Default number of sampled point pairs for invariance checks.
pub const DEFAULT_PROBES: usize = 64;

/// Closed forms available to a scalar kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", content = "parameters", rename_all = "snake_case")]
#[serde(bound = "T: Real")]
pub enum ScalarForm<T> {
    /// `0`.
    Zero,
    /// `e^{cos(theta - vartheta)}` on the circle.
    CircleExpCos,
    /// `e^{-sigma |x - y|^2}` on Euclidean space.
    Gaussian { sigma: T },
    /// `e^{scale <x, y>} + shift` on Euclidean space or the complex sphere.
    DotExp {
        #[serde(default = "one::<T>")]
        scale: T,
        #[serde(default)]
        shift: T,
    },
    /// `prod_m 2 / (2 - e^{i(x_m - y_m)})` on the circle or on angle vectors.
    TorusProduct,
    /// `sum_g c_g xi_g(x) conj(xi_g(y))` on a finite abelian group.
    GroupFourier { coefficients: Vec<Complex<T>> },
    /// `psi(x - y)` on a finite abelian group, `psi` tabulated
    /// lexicographically.
    GroupTable { values: Vec<Complex<T>> },
    /// `base(left(x), right(y))`; a missing map is the identity.
    Composed {
        base: Box<ScalarKernel<T>>,
        #[serde(default)]
        left: Option<SymmetryMap<T>>,
        #[serde(default)]
        right: Option<SymmetryMap<T>>,
    },
    /// `base(x, y) + constant`.
    Offset {
        base: Box<ScalarKernel<T>>,
        constant: T,
    },
    /// `<K(x, y) v, v> = sum_ij conj(v_i) K_ij(x, y) v_j`.
    Projection {
        kernel: Box<MatrixKernel<T>>,
        vector: Vec<Complex<T>>,
    },
}

fn one<T: Real>() -> T {
    T::one()
}

/// A scalar kernel on a space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ScalarKernel<T> {
    pub space: Space<T>,
    #[serde(flatten)]
    pub form: ScalarForm<T>,
}

/// Anything that produces `ell x ell` blocks from pairs of points.
pub trait Kernel<T: Real>: Sync {
    fn space(&self) -> &Space<T>;
    fn ell(&self) -> usize;
    fn eval_block(&self, x: &Point<T>, y: &Point<T>) -> Result<DMatrix<Complex<T>>>;
}

impl<T: Real> ScalarKernel<T> {
    pub fn new(space: Space<T>, form: ScalarForm<T>) -> Result<Self> {
        let k = Self { space, form };
        k.validate()?;
        Ok(k)
    }

    pub fn zero(space: Space<T>) -> Self {
        Self {
            space,
            form: ScalarForm::Zero,
        }
    }

    pub fn circle_exp_cos() -> Self {
        Self {
            space: Space::circle(),
            form: ScalarForm::CircleExpCos,
        }
    }

    pub fn gaussian(dim: usize, sigma: T) -> Result<Self> {
        Self::new(Space::euclidean(dim)?, ScalarForm::Gaussian { sigma })
    }

    /// `e^{scale <x, y>} + shift`.
    pub fn dot_exp(space: Space<T>, scale: T, shift: T) -> Result<Self> {
        Self::new(space, ScalarForm::DotExp { scale, shift })
    }

    pub fn torus(space: Space<T>) -> Result<Self> {
        Self::new(space, ScalarForm::TorusProduct)
    }

    /// `base(left(x), right(y))`.
    pub fn composed(
        base: &ScalarKernel<T>,
        left: Option<&SymmetryMap<T>>,
        right: Option<&SymmetryMap<T>>,
    ) -> Result<Self> {
        Self::new(
            base.space.clone(),
            ScalarForm::Composed {
                base: Box::new(base.clone()),
                left: left.cloned(),
                right: right.cloned(),
            },
        )
    }

    /// `self + constant`.
    pub fn offset(&self, constant: T) -> Self {
        Self {
            space: self.space.clone(),
            form: ScalarForm::Offset {
                base: Box::new(self.clone()),
                constant,
            },
        }
    }

    /// Structural validation of parameters against the space.
    pub fn validate(&self) -> Result<()> {
        self.space.validate()?;
        let kind = &self.space.kind;
        let mismatch = |what: &str| {
            Err(Error::SpaceMismatch(format!(
                "{what} kernel cannot live on {kind:?}"
            )))
        };
        match &self.form {
            ScalarForm::Zero => Ok(()),
            ScalarForm::CircleExpCos => match kind {
                SpaceKind::Circle => Ok(()),
                _ => mismatch("circle exp-cos"),
            },
            ScalarForm::Gaussian { sigma } => match kind {
                SpaceKind::Euclidean { .. } if *sigma > T::zero() => Ok(()),
                SpaceKind::Euclidean { .. } => {
                    Err(Error::BadParameter("sigma must be positive".into()))
                }
                _ => mismatch("Gaussian"),
            },
            ScalarForm::DotExp { scale, shift } => match kind {
                SpaceKind::Euclidean { .. } | SpaceKind::ComplexSphere { .. }
                    if scale.is_finite() && shift.is_finite() =>
                {
                    Ok(())
                }
                SpaceKind::Euclidean { .. } | SpaceKind::ComplexSphere { .. } => Err(
                    Error::BadParameter("dot-exp parameters must be finite".into()),
                ),
                _ => mismatch("dot-product"),
            },
            ScalarForm::TorusProduct => match kind {
                SpaceKind::Circle | SpaceKind::Euclidean { .. } => Ok(()),
                _ => mismatch("torus"),
            },
            ScalarForm::GroupFourier {
                coefficients: values,
            }
            | ScalarForm::GroupTable { values } => {
                let order = self.space.order().ok_or_else(|| {
                    Error::SpaceMismatch("group kernels need a finite abelian group".into())
                })?;
                if values.len() != order {
                    return Err(Error::WrongLength {
                        expected: order,
                        got: values.len(),
                    });
                }
                Ok(())
            }
            ScalarForm::Composed { base, left, right } => {
                base.validate()?;
                self.same_space(&base.space)?;
                for map in left.iter().chain(right) {
                    map.validate()?;
                    self.same_space(&map.space)?;
                }
                Ok(())
            }
            ScalarForm::Offset { base, constant } => {
                base.validate()?;
                self.same_space(&base.space)?;
                if !constant.is_finite() {
                    return Err(Error::BadParameter("offset must be finite".into()));
                }
                Ok(())
            }
            ScalarForm::Projection { kernel, vector } => {
                kernel.validate()?;
                self.same_space(&kernel.space)?;
                check_projection_vector(kernel.ell, vector)
            }
        }
    }

    fn same_space(&self, other: &Space<T>) -> Result<()> {
        if self.space.kind != other.kind {
            return Err(Error::SpaceMismatch(format!(
                "{:?} vs {:?}",
                self.space.kind, other.kind
            )));
        }
        Ok(())
    }

    /// `k(x, y)`.
    pub fn eval(&self, x: &Point<T>, y: &Point<T>) -> Result<Complex<T>> {
        self.space.check(x)?;
        self.space.check(y)?;
        self.eval_unchecked(x, y)
    }

    fn eval_unchecked(&self, x: &Point<T>, y: &Point<T>) -> Result<Complex<T>> {
        Ok(match (&self.form, x, y) {
            (ScalarForm::Zero, _, _) => Complex::new(T::zero(), T::zero()),
            (ScalarForm::CircleExpCos, Point::Circle(a), Point::Circle(b)) => {
                re((*a - *b).cos().exp())
            }
            (ScalarForm::Gaussian { sigma }, Point::Euclidean(a), Point::Euclidean(b)) => {
                let d2 = a
                    .iter()
                    .zip(b)
                    .fold(T::zero(), |acc, (p, q)| acc + (*p - *q) * (*p - *q));
                re((-*sigma * d2).exp())
            }
            (ScalarForm::DotExp { scale, shift }, Point::Euclidean(a), Point::Euclidean(b)) => {
                let ip = a.iter().zip(b).fold(T::zero(), |acc, (p, q)| acc + *p * *q);
                re((*scale * ip).exp() + *shift)
            }
            (
                ScalarForm::DotExp { scale, shift },
                Point::ComplexSphere(a),
                Point::ComplexSphere(b),
            ) => {
                // <x, y> = sum x_i conj(y_i)
                let ip = crate::scalar::inner(b, a);
                cexp(ip * *scale) + re(*shift)
            }
            (ScalarForm::TorusProduct, _, _) => {
                let diffs: Vec<T> = match (x, y) {
                    (Point::Circle(a), Point::Circle(b)) => vec![*a - *b],
                    (Point::Euclidean(a), Point::Euclidean(b)) => {
                        a.iter().zip(b).map(|(p, q)| *p - *q).collect()
                    }
                    _ => return Err(self.cannot_eval(x)),
                };
                let two = re(T::lit(2.0));
                diffs.iter().fold(re(T::one()), |acc, d| {
                    acc * (two / (two - crate::scalar::cis(canonical_angle(*d))))
                })
            }
            (ScalarForm::GroupFourier { coefficients }, _, _) => {
                let diff = self.space.group_sub(x, y)?;
                let elements = self.space.group_elements()?;
                elements.iter().zip(coefficients).try_fold(
                    Complex::new(T::zero(), T::zero()),
                    |acc, (g, c)| -> Result<_> { Ok(acc + *c * character(g, &diff, &self.space)?) },
                )?
            }
            (ScalarForm::GroupTable { values }, _, _) => {
                let diff = self.space.group_sub(x, y)?;
                values[self.space.index_of(&diff)?]
            }
            (ScalarForm::Composed { base, left, right }, _, _) => {
                let lx = match left {
                    Some(m) => m.apply(x)?,
                    None => x.clone(),
                };
                let ry = match right {
                    Some(m) => m.apply(y)?,
                    None => y.clone(),
                };
                base.eval_unchecked(&lx, &ry)?
            }
            (ScalarForm::Offset { base, constant }, _, _) => {
                base.eval_unchecked(x, y)? + re(*constant)
            }
            (ScalarForm::Projection { kernel, vector }, _, _) => {
                let block = kernel.eval_unchecked(x, y)?;
                let mut acc = Complex::new(T::zero(), T::zero());
                for i in 0..kernel.ell {
                    for j in 0..kernel.ell {
                        acc += vector[i].conj() * block[(i, j)] * vector[j];
                    }
                }
                acc
            }
            _ => return Err(self.cannot_eval(x)),
        })
    }

    fn cannot_eval(&self, x: &Point<T>) -> Error {
        Error::SpaceMismatch(format!("{:?} cannot evaluate at {x:?}", self.form))
    }
}

impl<T: Real> Kernel<T> for ScalarKernel<T> {
    fn space(&self) -> &Space<T> {
        &self.space
    }

    fn ell(&self) -> usize {
        1
    }

    fn eval_block(&self, x: &Point<T>, y: &Point<T>) -> Result<DMatrix<Complex<T>>> {
        Ok(DMatrix::from_element(1, 1, self.eval(x, y)?))
    }
}

/// An `ell x ell` grid of scalar kernels on one space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MatrixKernel<T> {
    pub space: Space<T>,
    pub ell: usize,
    pub entries: Vec<Vec<ScalarKernel<T>>>,
}

impl<T: Real> MatrixKernel<T> {
    pub fn new(space: Space<T>, entries: Vec<Vec<ScalarKernel<T>>>) -> Result<Self> {
        let k = Self {
            ell: entries.len(),
            space,
            entries,
        };
        k.validate()?;
        Ok(k)
    }

    /// `diag(k, ..., k)`.
    pub fn diagonal(k: &ScalarKernel<T>, ell: usize) -> Result<Self> {
        let entries = (0..ell)
            .map(|i| {
                (0..ell)
                    .map(|j| {
                        if i == j {
                            k.clone()
                        } else {
                            ScalarKernel::zero(k.space.clone())
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(k.space.clone(), entries)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ell == 0 || self.entries.len() != self.ell {
            return Err(Error::BadDimensions {
                source_dim: self.entries.len(),
                target: self.ell,
            });
        }
        for row in &self.entries {
            if row.len() != self.ell {
                return Err(Error::BadDimensions {
                    source_dim: row.len(),
                    target: self.ell,
                });
            }
            for k in row {
                if k.space.kind != self.space.kind {
                    return Err(Error::SpaceMismatch(format!(
                        "grid entry on {:?} inside kernel on {:?}",
                        k.space.kind, self.space.kind
                    )));
                }
                k.validate()?;
            }
        }
        Ok(())
    }

    pub fn entry(&self, i: usize, j: usize) -> &ScalarKernel<T> {
        &self.entries[i][j]
    }

    /// `K(x, y)`.
    pub fn eval(&self, x: &Point<T>, y: &Point<T>) -> Result<DMatrix<Complex<T>>> {
        self.space.check(x)?;
        self.space.check(y)?;
        self.eval_unchecked(x, y)
    }

    fn eval_unchecked(&self, x: &Point<T>, y: &Point<T>) -> Result<DMatrix<Complex<T>>> {
        let mut out = DMatrix::zeros(self.ell, self.ell);
        for i in 0..self.ell {
            for j in 0..self.ell {
                out[(i, j)] = self.entries[i][j].eval_unchecked(x, y)?;
            }
        }
        Ok(out)
    }

    /// The scalar projection `K_v(x, y) = <K(x, y) v, v>`.
    pub fn project(&self, v: &[Complex<T>]) -> Result<ScalarKernel<T>> {
        check_projection_vector(self.ell, v)?;
        Ok(ScalarKernel {
            space: self.space.clone(),
            form: ScalarForm::Projection {
                kernel: Box::new(self.clone()),
                vector: v.to_vec(),
            },
        })
    }
}

fn check_projection_vector<T: Real>(ell: usize, v: &[Complex<T>]) -> Result<()> {
    if v.len() != ell {
        return Err(Error::DimensionMismatch {
            expected: ell,
            got: v.len(),
        });
    }
    if crate::scalar::norm(v) == T::zero() {
        return Err(Error::ZeroVector);
    }
    Ok(())
}

impl<T: Real> Kernel<T> for MatrixKernel<T> {
    fn space(&self) -> &Space<T> {
        &self.space
    }

    fn ell(&self) -> usize {
        self.ell
    }

    fn eval_block(&self, x: &Point<T>, y: &Point<T>) -> Result<DMatrix<Complex<T>>> {
        self.eval(x, y)
    }
}

/// `k(x, y)`.
pub fn eval_scalar<T: Real>(k: &ScalarKernel<T>, x: &Point<T>, y: &Point<T>) -> Result<Complex<T>> {
    k.eval(x, y)
}

/// `K(x, y)`.
pub fn eval_matrix<T: Real>(
    k: &MatrixKernel<T>,
    x: &Point<T>,
    y: &Point<T>,
) -> Result<DMatrix<Complex<T>>> {
    k.eval(x, y)
}

/// `K_v`.
pub fn project<T: Real>(k: &MatrixKernel<T>, v: &[Complex<T>]) -> Result<ScalarKernel<T>> {
    k.project(v)
}

/// Blocked Gram matrix over pairwise distinct points.
pub fn gram<T: Real, K: Kernel<T>>(k: &K, points: &[Point<T>]) -> Result<HermitianMatrix<T>> {
    for p in points {
        k.space().check(p)?;
    }
    if let Some((i, j)) = k.space().find_duplicate(points)? {
        return Err(Error::DuplicatePoints(i, j));
    }
    evaluation_matrix(k, points)
}

/// Blocked evaluation matrix over an arbitrary list; repeated points allowed.
///
/// Rows are evaluated in parallel; every entry is computed independently, so
/// the result is bit-identical to sequential assembly.
pub fn evaluation_matrix<T: Real, K: Kernel<T>>(
    k: &K,
    points: &[Point<T>],
) -> Result<HermitianMatrix<T>> {
    let n = points.len();
    let ell = k.ell();
    if n == 0 {
        return Err(Error::BadParameter("point list is empty".into()));
    }
    let blocks: Vec<Vec<DMatrix<Complex<T>>>> = points
        .par_iter()
        .map(|x| {
            points
                .iter()
                .map(|y| k.eval_block(x, y))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let dim = ell * n;
    let m = DMatrix::from_fn(dim, dim, |r, c| {
        let (i, mu) = (r / n, r % n);
        let (j, nu) = (c / n, c % n);
        blocks[mu][nu][(i, j)]
    });
    HermitianMatrix::new(m)
}

/// Sampled invariance evidence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceEvidence<T> {
    pub maps: usize,
    pub probes: usize,
    /// Largest Frobenius norm of the difference between the two sides.
    pub max_residual: T,
    /// Largest Frobenius norm of a kernel value seen.
    pub scale: T,
    pub pass: bool,
}

impl<T: Real> InvarianceEvidence<T> {
    pub fn relative_residual(&self) -> T {
        if self.scale > T::zero() {
            self.max_residual / self.scale
        } else {
            self.max_residual
        }
    }
}

fn frobenius<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

fn invariance<T: Real, K: Kernel<T>>(
    k: &K,
    maps: usize,
    probes: usize,
    tol: &Tolerances<T>,
    mut sides: impl FnMut() -> Option<Result<(DMatrix<Complex<T>>, DMatrix<Complex<T>>)>>,
) -> Result<InvarianceEvidence<T>> {
    let _ = k;
    let mut max_residual = T::zero();
    let mut scale = T::zero();
    while let Some(pair) = sides() {
        let (a, b) = pair?;
        max_residual = max_residual.max(frobenius(&(&a - &b)));
        scale = scale.max(frobenius(&a)).max(frobenius(&b));
    }
    Ok(InvarianceEvidence {
        maps,
        probes,
        max_residual,
        scale,
        pass: max_residual <= tol.resid_tol * scale,
    })
}

/// Max over maps and probes of `|K(phi x, phi y) - K(x, y)|`.
pub fn check_unitary_invariance<T: Real, K: Kernel<T>>(
    k: &K,
    maps: &[SymmetryMap<T>],
    probes: &[(Point<T>, Point<T>)],
    tol: &Tolerances<T>,
) -> Result<InvarianceEvidence<T>> {
    for map in maps {
        if map.space.kind != k.space().kind {
            return Err(Error::SpaceMismatch("map and kernel spaces differ".into()));
        }
    }
    let mut jobs = maps.iter().flat_map(|m| probes.iter().map(move |p| (m, p)));
    invariance(k, maps.len(), probes.len(), tol, || {
        jobs.next().map(|(phi, (x, y))| {
            Ok((
                k.eval_block(&phi.apply(x)?, &phi.apply(y)?)?,
                k.eval_block(x, y)?,
            ))
        })
    })
}

/// Max over maps and probes of `|K(x, phi y) - K(phi* x, y)|`.
pub fn check_adjoint_invariance<T: Real, K: Kernel<T>>(
    k: &K,
    maps: &[SymmetryMap<T>],
    probes: &[(Point<T>, Point<T>)],
    tol: &Tolerances<T>,
) -> Result<InvarianceEvidence<T>> {
    let partners = maps
        .iter()
        .map(|m| {
            if m.space.kind != k.space().kind {
                return Err(Error::SpaceMismatch("map and kernel spaces differ".into()));
            }
            m.adjoint_map()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut jobs = maps
        .iter()
        .zip(&partners)
        .flat_map(|(m, s)| probes.iter().map(move |p| (m, s, p)));
    invariance(k, maps.len(), probes.len(), tol, || {
        jobs.next().map(|(phi, star, (x, y))| {
            Ok((
                k.eval_block(x, &phi.apply(y)?)?,
                k.eval_block(&star.apply(x)?, y)?,
            ))
        })
    })
}

/// `count` random point pairs from the space's sampling distribution.
pub fn probe_pairs<T: Real>(
    space: &Space<T>,
    count: usize,
    radius: T,
    seed: u64,
) -> Vec<(Point<T>, Point<T>)> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            (
                space.random_point(&mut r, radius),
                space.random_point(&mut r, radius),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn v(xs: &[f64]) -> Point<f64> {
        Point::vector(xs.to_vec())
    }

    #[test]
    fn eval_scalar_examples() {
        let k = ScalarKernel::<f64>::circle_exp_cos();
        let z = eval_scalar(&k, &Point::angle(0.0), &Point::angle(PI)).unwrap();
        assert!((z.re - 0.367_879_4).abs() < 1e-7);
        assert!((z.re - (-1.0f64).exp()).abs() < 1e-15);
        let g = ScalarKernel::gaussian(2, 1.0).unwrap();
        assert_eq!(
            g.eval(&v(&[0.3, 0.4]), &v(&[0.3, 0.4])).unwrap(),
            c(1.0, 0.0)
        );
        let d = ScalarKernel::dot_exp(Space::euclidean(3).unwrap(), 1.0, 1.0).unwrap();
        assert_eq!(d.eval(&v(&[0.0; 3]), &v(&[0.0; 3])).unwrap(), c(2.0, 0.0));
        assert!(matches!(
            g.eval(&Point::angle(0.0), &v(&[0.0, 0.0])),
            Err(Error::SpaceMismatch(_))
        ));
    }

    #[test]
    fn invalid_forms_rejected() {
        assert!(ScalarKernel::gaussian(2, 0.0).is_err());
        assert!(
            ScalarKernel::new(Space::<f64>::circle(), ScalarForm::Gaussian { sigma: 1.0 }).is_err()
        );
        assert!(ScalarKernel::new(
            Space::<f64>::finite_abelian(vec![3]).unwrap(),
            ScalarForm::GroupTable {
                values: vec![c(1.0, 0.0)]
            }
        )
        .is_err());
    }

    #[test]
    fn torus_kernel_is_hermitian_and_peaks_on_diagonal() {
        let t = ScalarKernel::torus(Space::<f64>::euclidean(2).unwrap()).unwrap();
        let (x, y) = (v(&[0.3, -1.0]), v(&[2.0, 0.5]));
        let a = t.eval(&x, &y).unwrap();
        let b = t.eval(&y, &x).unwrap();
        assert!((a - b.conj()).norm() < 1e-15);
        // prod 2/(2-1) at x = y
        assert!((t.eval(&x, &x).unwrap() - c(4.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn complex_dot_exp_is_hermitian() {
        let s = Space::<f64>::complex_sphere(2).unwrap();
        let k = ScalarKernel::dot_exp(s.clone(), 2.0, 0.0).unwrap();
        let pts = s.sample_distinct(2, 1e-3, 4).unwrap();
        let a = k.eval(&pts[0], &pts[1]).unwrap();
        let b = k.eval(&pts[1], &pts[0]).unwrap();
        assert!((a - b.conj()).norm() < 1e-14 * a.norm());
        assert!((k.eval(&pts[0], &pts[0]).unwrap() - c(2f64.exp(), 0.0)).norm() < 1e-13);
    }

    #[test]
    fn projection_examples() {
        let k = ScalarKernel::<f64>::circle_exp_cos();
        let phi = SymmetryMap::circle_rotation(1.0);
        let shifted = ScalarKernel::composed(&k, Some(&phi), None).unwrap();
        let grid = MatrixKernel::new(
            Space::circle(),
            vec![vec![shifted.clone(), k.clone()], vec![k.clone(), k.clone()]],
        );
        assert!(grid.is_ok());
        let diag = MatrixKernel::diagonal(&k, 2).unwrap();
        let kv = diag.project(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let e1 = diag.project(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let (x, y) = (Point::angle(0.2), Point::angle(-1.3));
        let base = k.eval(&x, &y).unwrap();
        assert!((kv.eval(&x, &y).unwrap() - base * 2.0).norm() < 1e-15);
        assert!((e1.eval(&x, &y).unwrap() - base).norm() < 1e-15);
        assert!(matches!(
            diag.project(&[c(0.0, 0.0), c(0.0, 0.0)]),
            Err(Error::ZeroVector)
        ));
        assert!(matches!(
            diag.project(&[c(1.0, 0.0)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gram_examples() {
        let g = ScalarKernel::gaussian(1, 1.0).unwrap();
        let m = gram(&g, &[v(&[0.0]), v(&[1.0])]).unwrap();
        assert_eq!(m.get(0, 0), c(1.0, 0.0));
        assert!((m.get(0, 1) - c((-1.0f64).exp(), 0.0)).norm() < 1e-16);
        assert!(matches!(
            gram(&g, &[v(&[0.0]), v(&[0.0])]),
            Err(Error::DuplicatePoints(0, 1))
        ));

        let k = ScalarKernel::<f64>::circle_exp_cos();
        let pts = Space::circle().sample_distinct(4, 0.1, 8).unwrap();
        let single = gram(&k, &pts).unwrap();
        let blocked = gram(&MatrixKernel::diagonal(&k, 2).unwrap(), &pts).unwrap();
        for r in 0..8 {
            for s in 0..8 {
                let expected = if r / 4 == s / 4 {
                    single.get(r % 4, s % 4)
                } else {
                    c(0.0, 0.0)
                };
                assert_eq!(blocked.get(r, s), expected);
            }
        }
        assert!((single.get(0, 0).re - E).abs() < 1e-15);
    }

    #[test]
    fn invariance_examples() {
        let tol = Tolerances::default();
        let k = ScalarKernel::<f64>::circle_exp_cos();
        let rotations: Vec<_> = [0.4, 2.5]
            .iter()
            .map(|&a| SymmetryMap::circle_rotation(a))
            .collect();
        let probes = probe_pairs(&k.space, 64, 1.0, 1);
        assert!(
            check_unitary_invariance(&k, &rotations, &probes, &tol)
                .unwrap()
                .pass
        );

        let g = ScalarKernel::gaussian(2, 1.0).unwrap();
        let probes = probe_pairs(&g.space, 64, 1.0, 2);
        let shifts = vec![SymmetryMap::translation(vec![0.5, -1.5]).unwrap()];
        assert!(
            check_unitary_invariance(&g, &shifts, &probes, &tol)
                .unwrap()
                .pass
        );
        let scale = vec![SymmetryMap::scaling(2, 2.0).unwrap()];
        let ev = check_unitary_invariance(&g, &scale, &probes, &tol).unwrap();
        assert!(!ev.pass);
        assert!(check_unitary_invariance(&g, &rotations, &probes, &tol).is_err());
    }

    #[test]
    fn adjoint_invariance_examples() {
        let tol = Tolerances::default();
        let d = ScalarKernel::dot_exp(Space::euclidean(2).unwrap(), 1.0, 0.0).unwrap();
        let probes = probe_pairs(&d.space, 64, 1.0, 3);
        let scaling = vec![SymmetryMap::scaling(2, 2.0).unwrap().self_adjoint()];
        assert!(
            check_adjoint_invariance(&d, &scaling, &probes, &tol)
                .unwrap()
                .pass
        );

        let g = ScalarKernel::gaussian(2, 1.0).unwrap();
        let t = SymmetryMap::translation(vec![1.0, 0.0])
            .unwrap()
            .with_adjoint(crate::symmetry::Action::EuclideanTranslation {
                offset: vec![-1.0, 0.0],
            })
            .unwrap();
        assert!(
            check_adjoint_invariance(&g, &[t], &probes, &tol)
                .unwrap()
                .pass
        );

        // e^{<0, z>} = 1 versus e^{<z, 0>}... both 1 at the origin, so probe x = 0, y = e1:
        // e^{<0, e1 + z>} = 1 and e^{<z, e1>} = e for z = e1.
        let self_t = SymmetryMap::translation(vec![1.0, 0.0])
            .unwrap()
            .self_adjoint();
        let ev = check_adjoint_invariance(
            &d,
            std::slice::from_ref(&self_t),
            &[(v(&[0.0, 0.0]), v(&[1.0, 0.0]))],
            &tol,
        )
        .unwrap();
        assert!(!ev.pass);
        assert!((ev.max_residual - (E - 1.0)).abs() < 1e-14);
        let no_adj = SymmetryMap::translation(vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            check_adjoint_invariance(&d, &[no_adj], &probes, &tol),
            Err(Error::MissingAdjoint)
        ));
    }

    #[test]
    fn kernel_json_roundtrip() {
        let k = ScalarKernel::composed(
            &ScalarKernel::gaussian(2, 0.5).unwrap(),
            Some(&SymmetryMap::translation(vec![1.0, 0.0]).unwrap()),
            None,
        )
        .unwrap();
        let text = serde_json::to_string(&k).unwrap();
        let back: ScalarKernel<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, k);
        let parsed: ScalarKernel<f64> = serde_json::from_str(
            r#"{"space":{"kind":"euclidean","dim":2},"form":"dot_exp","parameters":{"shift":1.0}}"#,
        )
        .unwrap();
        assert_eq!(
            parsed.form,
            ScalarForm::DotExp {
                scale: 1.0,
                shift: 1.0
            }
        );
        let m = MatrixKernel::diagonal(&parsed, 2).unwrap();
        let back: MatrixKernel<f64> =
            serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
