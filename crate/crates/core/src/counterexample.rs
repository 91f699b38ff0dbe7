//! Two-by-two counterexample kernels built from a scalar kernel `k` and a
//! symmetry `phi`, their embedding into larger output dimensions, and
//! explicit degeneracy witnesses.
//!
//! The grid is
//!
//! ```text
//! [ k(phi x, phi y)   k(phi x, y) ]
//! [ k(x, phi y)       k(x, y)     ]
//! ```
//!
//! with `k(origin, origin)` added on the diagonal for the shifted variant.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{gram, Kernel, MatrixKernel, ScalarForm, ScalarKernel};
use crate::numcore::{classify, quadratic_form, PdVerdict, Tolerances};
use crate::scalar::Real;
use crate::spaces::{Point, Space};
use crate::symmetry::SymmetryMap;

pub const DEFAULT_RHO: f64 = 1.0;
pub const DEFAULT_SIGMA: f64 = 1.0;
pub const DEFAULT_R: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
#[serde(bound = "T: Real")]
pub enum Variant<T> {
    Unitary,
    Adjoint,
    ShiftedAdjoint { origin: Point<T> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct CounterexampleKernel<T: Real> {
    pub base: ScalarKernel<T>,
    pub map: SymmetryMap<T>,
    pub variant: Variant<T>,
    pub as_matrix: MatrixKernel<T>,
}

fn grid<T: Real>(
    k: &ScalarKernel<T>,
    phi: &SymmetryMap<T>,
    diagonal_shift: Option<T>,
) -> Result<MatrixKernel<T>> {
    if k.space.kind != phi.space.kind {
        return Err(Error::SpaceMismatch(format!(
            "kernel on {:?}, map on {:?}",
            k.space.kind, phi.space.kind
        )));
    }
    let shift = |e: ScalarKernel<T>| match diagonal_shift {
        Some(c) => e.offset(c),
        None => e,
    };
    let k11 = shift(ScalarKernel::composed(k, Some(phi), Some(phi))?);
    let k12 = ScalarKernel::composed(k, Some(phi), None)?;
    let k21 = ScalarKernel::composed(k, None, Some(phi))?;
    let k22 = shift(k.clone());
    MatrixKernel::new(k.space.clone(), vec![vec![k11, k12], vec![k21, k22]])
}

/// Counterexample for a kernel invariant under `phi`.
pub fn build_unitary<T: Real>(
    k: &ScalarKernel<T>,
    phi: &SymmetryMap<T>,
) -> Result<CounterexampleKernel<T>> {
    Ok(CounterexampleKernel {
        as_matrix: grid(k, phi, None)?,
        base: k.clone(),
        map: phi.clone(),
        variant: Variant::Unitary,
    })
}

/// Counterexample for a kernel satisfying `k(x, phi y) = k(phi* x, y)`.
pub fn build_adjoint<T: Real>(
    k: &ScalarKernel<T>,
    phi: &SymmetryMap<T>,
) -> Result<CounterexampleKernel<T>> {
    if !phi.has_adjoint() {
        return Err(Error::MissingAdjoint);
    }
    Ok(CounterexampleKernel {
        as_matrix: grid(k, phi, None)?,
        base: k.clone(),
        map: phi.clone(),
        variant: Variant::Adjoint,
    })
}

/// Adjoint counterexample plus `k(origin, origin) I`; `origin` must be fixed by `phi`.
pub fn build_shifted<T: Real>(
    k: &ScalarKernel<T>,
    phi: &SymmetryMap<T>,
    origin: &Point<T>,
) -> Result<CounterexampleKernel<T>> {
    if !phi.has_adjoint() {
        return Err(Error::MissingAdjoint);
    }
    k.space.check(origin)?;
    if !k.space.points_equal(&phi.apply(origin)?, origin)? {
        return Err(Error::OriginNotFixed);
    }
    let c = k.eval(origin, origin)?.re;
    Ok(CounterexampleKernel {
        as_matrix: grid(k, phi, Some(c))?,
        base: k.clone(),
        map: phi.clone(),
        variant: Variant::ShiftedAdjoint {
            origin: origin.clone(),
        },
    })
}

impl<T: Real> Kernel<T> for CounterexampleKernel<T> {
    fn space(&self) -> &Space<T> {
        &self.as_matrix.space
    }

    fn ell(&self) -> usize {
        2
    }

    fn eval_block(&self, x: &Point<T>, y: &Point<T>) -> Result<nalgebra::DMatrix<Complex<T>>> {
        self.as_matrix.eval(x, y)
    }
}

/// Places `k` in the top-left of an `ell x ell` grid, `filler` on the rest of
/// the diagonal and zero kernels elsewhere.
pub fn embed<T: Real>(
    k: &MatrixKernel<T>,
    ell: usize,
    filler: &ScalarKernel<T>,
) -> Result<MatrixKernel<T>> {
    let m = k.ell;
    if m < 2 || m > ell {
        return Err(Error::BadDimensions {
            source_dim: m,
            target: ell,
        });
    }
    if filler.space.kind != k.space.kind {
        return Err(Error::SpaceMismatch("filler lives on another space".into()));
    }
    let entries = (0..ell)
        .map(|i| {
            (0..ell)
                .map(|j| {
                    if i < m && j < m {
                        k.entries[i][j].clone()
                    } else if i == j {
                        filler.clone()
                    } else {
                        ScalarKernel::zero(k.space.clone())
                    }
                })
                .collect()
        })
        .collect();
    MatrixKernel::new(k.space.clone(), entries)
}

/// Points and coefficient vectors annihilating the Gram quadratic form.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct DegeneracyWitness<T: Real> {
    pub points: Vec<Point<T>>,
    /// One vector of length `ell` per point.
    pub coefficients: Vec<Vec<Complex<T>>>,
    pub achieved_form_value: T,
    /// Spectral scale of the witness Gram.
    pub scale: T,
}

impl<T: Real> DegeneracyWitness<T> {
    /// Coefficients in blocked (coordinate-major) order.
    pub fn flattened(&self) -> Vec<Complex<T>> {
        let n = self.points.len();
        let ell = self.coefficients.first().map_or(0, Vec::len);
        (0..ell * n)
            .map(|r| self.coefficients[r % n][r / n])
            .collect()
    }
}

fn real_vec<T: Real>(xs: &[f64]) -> Vec<Complex<T>> {
    xs.iter()
        .map(|&x| Complex::new(T::lit(x), T::zero()))
        .collect()
}

/// The explicit null direction at `x`.
pub fn witness<T: Real>(c: &CounterexampleKernel<T>, x: &Point<T>) -> Result<DegeneracyWitness<T>> {
    witness_with(c, x, &Tolerances::default())
}

pub fn witness_with<T: Real>(
    c: &CounterexampleKernel<T>,
    x: &Point<T>,
    tol: &Tolerances<T>,
) -> Result<DegeneracyWitness<T>> {
    let space = &c.as_matrix.space;
    space.check(x)?;
    let fx = c.map.apply(x)?;
    let (points, coefficients) = match &c.variant {
        Variant::Unitary | Variant::Adjoint => {
            if space.points_equal(&fx, x)? {
                (vec![x.clone()], vec![real_vec(&[1.0, -1.0])])
            } else {
                (
                    vec![x.clone(), fx],
                    vec![real_vec(&[1.0, 0.0]), real_vec(&[0.0, -1.0])],
                )
            }
        }
        Variant::ShiftedAdjoint { origin } => {
            if space.points_equal(origin, x)? {
                return Err(Error::BadParameter(
                    "witness point must differ from the origin".into(),
                ));
            }
            (
                vec![origin.clone(), x.clone(), fx],
                vec![
                    real_vec(&[-1.0, 1.0]),
                    real_vec(&[1.0, 0.0]),
                    real_vec(&[0.0, -1.0]),
                ],
            )
        }
    };
    let mut w = DegeneracyWitness {
        points,
        coefficients,
        achieved_form_value: T::zero(),
        scale: T::zero(),
    };
    let g = gram(&c.as_matrix, &w.points)?;
    let form = quadratic_form(&g, &w.flattened())?;
    w.scale = g.eigen()?.scale();
    w.achieved_form_value = form.value;
    let allowed = tol.resid_tol * w.scale;
    if form.value.abs() > allowed {
        return Err(Error::WitnessFailed {
            value: form.value.as_f64(),
            allowed: allowed.as_f64(),
        });
    }
    Ok(w)
}

/// PD verdict of the blocked Gram of `c` at `points`.
pub fn blocked_verdict<T: Real>(
    c: &MatrixKernel<T>,
    points: &[Point<T>],
    tol: &Tolerances<T>,
) -> Result<PdVerdict<T>> {
    classify(&gram(c, points)?, tol)
}

/// `[phi(x_1), ..., phi(x_n), x_1, ..., x_n]`.
pub fn proof_points<T: Real>(phi: &SymmetryMap<T>, points: &[Point<T>]) -> Result<Vec<Point<T>>> {
    let mut out = points
        .iter()
        .map(|p| phi.apply(p))
        .collect::<Result<Vec<_>>>()?;
    out.extend_from_slice(points);
    Ok(out)
}

/// Circle kernel `e^{cos}` with rotation by `rho`.
pub fn circle_example<T: Real>(rho: T) -> Result<CounterexampleKernel<T>> {
    build_unitary(
        &ScalarKernel::circle_exp_cos(),
        &SymmetryMap::circle_rotation(rho),
    )
}

/// Gaussian kernel on `R^dim` with translation by `z`; `phi* = phi_{-z}`.
pub fn gaussian_example<T: Real>(sigma: T, z: Vec<T>) -> Result<CounterexampleKernel<T>> {
    let minus: Vec<T> = z.iter().map(|c| -*c).collect();
    let dim = z.len();
    let phi = SymmetryMap::translation(z)?
        .with_adjoint(crate::symmetry::Action::EuclideanTranslation { offset: minus })?;
    build_unitary(&ScalarKernel::gaussian(dim, sigma)?, &phi)
}

/// `e^{<x, y>}` on `R^dim` with the self-adjoint scaling by `r`, shifted by
/// `k(0, 0) = 1`.
pub fn dot_product_example<T: Real>(dim: usize, r: T) -> Result<CounterexampleKernel<T>> {
    let space = Space::euclidean(dim)?;
    let k = ScalarKernel::dot_exp(space, T::one(), T::zero())?;
    let phi = SymmetryMap::scaling(dim, r)?.self_adjoint();
    build_shifted(&k, &phi, &Point::vector(vec![T::zero(); dim]))
}

/// The same kernel written directly as a grid of `e^{s <x, y>} + c` entries.
pub fn dot_product_literal<T: Real>(dim: usize, r: T) -> Result<MatrixKernel<T>> {
    let space = Space::euclidean(dim)?;
    let entry = |scale: T, shift: T| ScalarKernel {
        space: space.clone(),
        form: ScalarForm::DotExp { scale, shift },
    };
    let (one, zero) = (T::one(), T::zero());
    MatrixKernel::new(
        space.clone(),
        vec![
            vec![entry(r * r, one), entry(r, zero)],
            vec![entry(r, zero), entry(one, one)],
        ],
    )
}

/// `e^{<x, y>}` on the complex sphere with the rotation `e^{i theta} I`.
pub fn complex_sphere_example<T: Real>(dim: usize, theta: T) -> Result<CounterexampleKernel<T>> {
    let space = Space::complex_sphere(dim)?;
    let k = ScalarKernel::dot_exp(space, T::one(), T::zero())?;
    build_unitary(&k, &SymmetryMap::complex_rotation(dim, theta)?)
}

/// JSON description of a counterexample, optionally embedded into `ell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantKind {
    Unitary,
    Adjoint,
    ShiftedAdjoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CounterexampleConfig<T> {
    pub variant: VariantKind,
    pub base: ScalarKernel<T>,
    pub map: SymmetryMap<T>,
    /// Required for the shifted variant; encoded like any point of the space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<serde_json::Value>,
    #[serde(default)]
    pub ell: Option<usize>,
    #[serde(default)]
    pub filler: Option<ScalarKernel<T>>,
}

impl<T: Real> CounterexampleConfig<T> {
    pub fn build(&self) -> Result<CounterexampleKernel<T>> {
        match self.variant {
            VariantKind::Unitary => build_unitary(&self.base, &self.map),
            VariantKind::Adjoint => build_adjoint(&self.base, &self.map),
            VariantKind::ShiftedAdjoint => {
                let raw = self
                    .origin
                    .as_ref()
                    .ok_or_else(|| Error::config("origin", "required for shifted_adjoint"))?;
                let origin = self.base.space.parse_point(raw)?;
                build_shifted(&self.base, &self.map, &origin)
            }
        }
    }

    /// The built grid, embedded when `ell` is set; the filler defaults to the base kernel.
    pub fn matrix_kernel(&self) -> Result<MatrixKernel<T>> {
        let c = self.build()?;
        match self.ell {
            None | Some(2) => Ok(c.as_matrix),
            Some(ell) => embed(
                &c.as_matrix,
                ell,
                self.filler.as_ref().unwrap_or(&self.base),
            ),
        }
    }
}
