//! Symmetry maps, finite evidence for aperiodicity / injectivity / center
//! membership, and the orbit decomposition of a point list under a map.
//!
//! Statements such as "phi is aperiodic" or "phi commutes with every element
//! of the semigroup" quantify over infinite sets. The checks here only ever
//! produce finite evidence over explicit probes and iteration depths, and the
//! evidence records carry those parameters.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cis, Real};
use crate::spaces::{Point, Space, SpaceKind};

/// What a map does to a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action_kind", content = "parameters", rename_all = "snake_case")]
#[serde(bound = "T: Real")]
pub enum Action<T> {
    Identity,
    /// `theta -> theta + angle` on the circle.
    CircleRotation {
        angle: T,
    },
    /// `x -> x + offset` on Euclidean space.
    EuclideanTranslation {
        offset: Vec<T>,
    },
    /// `x -> factor * x` on Euclidean space.
    EuclideanScaling {
        factor: T,
    },
    /// `x -> -x` on Euclidean space.
    EuclideanReflection,
    /// `x -> e^{i angle} x` on the complex sphere.
    ComplexSphereRotation {
        angle: T,
    },
    /// `x -> x + shift` (mod q) on a finite abelian group.
    GroupTranslation {
        shift: Vec<u32>,
    },
}

/// A map on a space, optionally paired with its involution partner.
///
/// Only the partner's action is stored; [`SymmetryMap::adjoint_map`] builds
/// the partner with `self` as its own partner, so the involution property
/// holds by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SymmetryMap<T> {
    pub space: Space<T>,
    #[serde(flatten)]
    pub action: Action<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjoint: Option<Action<T>>,
}

impl<T: Real> SymmetryMap<T> {
    pub fn new(space: Space<T>, action: Action<T>) -> Result<Self> {
        space.validate()?;
        check_action(&space, &action)?;
        Ok(Self {
            space,
            action,
            adjoint: None,
        })
    }

    pub fn identity(space: Space<T>) -> Self {
        Self::new(space, Action::Identity).expect("identity acts on every space")
    }

    pub fn circle_rotation(angle: T) -> Self {
        Self::new(Space::circle(), Action::CircleRotation { angle }).expect("valid")
    }

    pub fn translation(offset: Vec<T>) -> Result<Self> {
        Self::new(
            Space::euclidean(offset.len())?,
            Action::EuclideanTranslation { offset },
        )
    }

    pub fn scaling(dim: usize, factor: T) -> Result<Self> {
        Self::new(Space::euclidean(dim)?, Action::EuclideanScaling { factor })
    }

    pub fn reflection(dim: usize) -> Result<Self> {
        Self::new(Space::euclidean(dim)?, Action::EuclideanReflection)
    }

    pub fn complex_rotation(dim: usize, angle: T) -> Result<Self> {
        Self::new(
            Space::complex_sphere(dim)?,
            Action::ComplexSphereRotation { angle },
        )
    }

    pub fn group_translation(moduli: Vec<u32>, shift: Vec<u32>) -> Result<Self> {
        Self::new(
            Space::finite_abelian(moduli)?,
            Action::GroupTranslation { shift },
        )
    }

    /// Re-checks a deserialized map.
    pub fn validate(&self) -> Result<()> {
        self.space.validate()?;
        check_action(&self.space, &self.action)?;
        if let Some(adj) = &self.adjoint {
            check_action(&self.space, adj)?;
        }
        Ok(())
    }

    /// Attaches an involution partner acting on the same space.
    pub fn with_adjoint(mut self, adjoint: Action<T>) -> Result<Self> {
        check_action(&self.space, &adjoint)?;
        self.adjoint = Some(adjoint);
        Ok(self)
    }

    /// Declares the map to be its own partner.
    pub fn self_adjoint(self) -> Self {
        let action = self.action.clone();
        self.with_adjoint(action).expect("own action is valid")
    }

    /// The involution partner `phi*`, whose own partner is `self`.
    pub fn adjoint_map(&self) -> Result<Self> {
        let action = self.adjoint.clone().ok_or(Error::MissingAdjoint)?;
        Ok(Self {
            space: self.space.clone(),
            action,
            adjoint: Some(self.action.clone()),
        })
    }

    pub fn has_adjoint(&self) -> bool {
        self.adjoint.is_some()
    }

    /// Image of `x`, canonicalized in the space.
    pub fn apply(&self, x: &Point<T>) -> Result<Point<T>> {
        self.space.check(x)?;
        let image = match (&self.action, x) {
            (Action::Identity, _) => x.clone(),
            (Action::CircleRotation { angle }, Point::Circle(t)) => Point::angle(*t + *angle),
            (Action::EuclideanTranslation { offset }, Point::Euclidean(v)) => {
                Point::Euclidean(v.iter().zip(offset).map(|(a, b)| *a + *b).collect())
            }
            (Action::EuclideanScaling { factor }, Point::Euclidean(v)) => {
                Point::Euclidean(v.iter().map(|a| *a * *factor).collect())
            }
            (Action::EuclideanReflection, Point::Euclidean(v)) => {
                Point::Euclidean(v.iter().map(|a| -*a).collect())
            }
            (Action::ComplexSphereRotation { angle }, Point::ComplexSphere(v)) => {
                let phase: Complex<T> = cis(*angle);
                Point::ComplexSphere(v.iter().map(|z| phase * z).collect())
            }
            (Action::GroupTranslation { shift }, Point::FiniteAbelian(_)) => self
                .space
                .group_add(x, &Point::FiniteAbelian(shift.clone()))?,
            _ => {
                return Err(Error::SpaceMismatch(format!(
                    "{:?} cannot act on {x:?}",
                    self.action
                )))
            }
        };
        Ok(image)
    }

    /// `phi^m(x)` by repeated application.
    pub fn iterate(&self, x: &Point<T>, m: usize) -> Result<Point<T>> {
        let mut y = x.clone();
        for _ in 0..m {
            y = self.apply(&y)?;
        }
        Ok(y)
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if self.space.kind != other.space.kind {
            return Err(Error::SpaceMismatch(format!(
                "maps act on {:?} and {:?}",
                self.space.kind, other.space.kind
            )));
        }
        Ok(())
    }
}

fn check_action<T: Real>(space: &Space<T>, action: &Action<T>) -> Result<()> {
    let ok = match (action, &space.kind) {
        (Action::Identity, _) => true,
        (Action::CircleRotation { angle }, SpaceKind::Circle) => angle.is_finite(),
        (Action::EuclideanTranslation { offset }, SpaceKind::Euclidean { dim }) => {
            offset.len() == *dim && offset.iter().all(|c| c.is_finite())
        }
        (Action::EuclideanScaling { factor }, SpaceKind::Euclidean { .. }) => factor.is_finite(),
        (Action::EuclideanReflection, SpaceKind::Euclidean { .. }) => true,
        (Action::ComplexSphereRotation { angle }, SpaceKind::ComplexSphere { .. }) => {
            angle.is_finite()
        }
        (Action::GroupTranslation { shift }, SpaceKind::FiniteAbelian { .. }) => {
            space.check(&Point::FiniteAbelian(shift.clone())).is_ok()
        }
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::SpaceMismatch(format!(
            "action {action:?} does not act on {:?}",
            space.kind
        )))
    }
}

/// Finite evidence about `phi^m(x) != x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AperiodicityEvidence<T> {
    pub probes: usize,
    pub m_max: usize,
    /// First `(probe, m)` with `phi^m(probe) = probe`, if any.
    pub violation: Option<PeriodViolation<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodViolation<T> {
    pub probe_index: usize,
    pub point: Point<T>,
    pub period: usize,
}

impl<T> AperiodicityEvidence<T> {
    pub fn no_counterexample(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks `phi^m(x) = x` for every probe and `1 <= m <= m_max`.
pub fn check_aperiodic<T: Real>(
    phi: &SymmetryMap<T>,
    probes: &[Point<T>],
    m_max: usize,
) -> Result<AperiodicityEvidence<T>> {
    for (i, x) in probes.iter().enumerate() {
        let mut y = x.clone();
        for m in 1..=m_max {
            y = phi.apply(&y)?;
            if phi.space.points_equal(&y, x)? {
                return Ok(AperiodicityEvidence {
                    probes: probes.len(),
                    m_max,
                    violation: Some(PeriodViolation {
                        probe_index: i,
                        point: x.clone(),
                        period: m,
                    }),
                });
            }
        }
    }
    Ok(AperiodicityEvidence {
        probes: probes.len(),
        m_max,
        violation: None,
    })
}

/// True iff the images of the (pairwise distinct) points are pairwise distinct.
pub fn check_injective_on<T: Real>(phi: &SymmetryMap<T>, points: &[Point<T>]) -> Result<bool> {
    let images = points
        .iter()
        .map(|x| phi.apply(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(phi.space.find_duplicate(&images)?.is_none())
}

/// Finite evidence that `phi` commutes with a list of generators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenterEvidence<T> {
    pub generators: usize,
    pub probes: usize,
    pub violations: Vec<CommutationViolation<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutationViolation<T> {
    pub generator_index: usize,
    pub probe_index: usize,
    /// Distance between `phi(psi(x))` and `psi(phi(x))`.
    pub distance: T,
}

impl<T> CenterEvidence<T> {
    pub fn no_counterexample(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Compares `phi(psi(x))` with `psi(phi(x))` on every generator and probe.
pub fn check_center<T: Real>(
    phi: &SymmetryMap<T>,
    generators: &[SymmetryMap<T>],
    probes: &[Point<T>],
) -> Result<CenterEvidence<T>> {
    let mut violations = Vec::new();
    for (g, psi) in generators.iter().enumerate() {
        phi.same_space(psi)?;
        for (p, x) in probes.iter().enumerate() {
            let a = phi.apply(&psi.apply(x)?)?;
            let b = psi.apply(&phi.apply(x)?)?;
            if !phi.space.points_equal(&a, &b)? {
                violations.push(CommutationViolation {
                    generator_index: g,
                    probe_index: p,
                    distance: phi.space.distance(&a, &b)?,
                });
            }
        }
    }
    Ok(CenterEvidence {
        generators: generators.len(),
        probes: probes.len(),
        violations,
    })
}

/// Where a decomposition point comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// `phi(x_i)`.
    Image(usize),
    /// `x_i`.
    Original(usize),
}

/// Partition of `{phi(x_1..x_n)} u {x_1..x_n}` into `m + 2p` distinct points.
///
/// Blocks, each in ascending order of the originating index:
/// 1. `phi(x_mu) = x_tau(mu)` for `mu` in `F` (m points),
/// 2. `phi(x_eta)` for `eta` not in `F` (p points),
/// 3. `x_mu` for `mu` not in `tau(F)` (p points).
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitDecomposition<T> {
    /// Indices whose image is again one of the points, ascending.
    pub f: Vec<usize>,
    /// `(mu, tau(mu))` pairs with `x_tau(mu) = phi(x_mu)`, ascending in `mu`.
    pub tau: Vec<(usize, usize)>,
    pub m: usize,
    pub p: usize,
    pub z_points: Vec<Point<T>>,
    pub sources: Vec<Source>,
}

impl<T: Real> OrbitDecomposition<T> {
    pub fn n(&self) -> usize {
        self.m + self.p
    }

    pub fn tau_of(&self, mu: usize) -> Option<usize> {
        self.tau
            .binary_search_by_key(&mu, |(a, _)| *a)
            .ok()
            .map(|k| self.tau[k].1)
    }

    pub fn image_of_f(&self) -> &[Point<T>] {
        &self.z_points[..self.m]
    }

    pub fn image_of_complement(&self) -> &[Point<T>] {
        &self.z_points[self.m..self.m + self.p]
    }

    pub fn not_in_tau_f(&self) -> &[Point<T>] {
        &self.z_points[self.m + self.p..]
    }

    /// Smallest `q` with `tau^q(mu) in F` and `tau^{q+1}(mu)` outside `F`.
    pub fn escape_depth(&self, mu: usize) -> Option<usize> {
        let mut current = mu;
        self.tau_of(current)?;
        for q in 0..=self.n() {
            let next = self.tau_of(current)?;
            if self.tau_of(next).is_none() {
                return Some(q);
            }
            current = next;
        }
        None
    }
}

impl<T: Real> Serialize for OrbitDecomposition<T> {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Blocks<'a, T> {
            image_of_f: &'a [Point<T>],
            image_of_complement: &'a [Point<T>],
            not_in_tau_f: &'a [Point<T>],
        }
        #[derive(Serialize)]
        struct Repr<'a, T> {
            #[serde(rename = "F")]
            f: &'a [usize],
            tau: &'a [(usize, usize)],
            m: usize,
            p: usize,
            blocks: Blocks<'a, T>,
            sources: &'a [Source],
        }
        Repr {
            f: &self.f,
            tau: &self.tau,
            m: self.m,
            p: self.p,
            blocks: Blocks {
                image_of_f: self.image_of_f(),
                image_of_complement: self.image_of_complement(),
                not_in_tau_f: self.not_in_tau_f(),
            },
            sources: &self.sources,
        }
        .serialize(serializer)
    }
}

/// Decomposes `{phi(x_i)} u {x_i}` for an injective aperiodic `phi`.
///
/// Fails with `PeriodicityDetected` when every image lands back in the list
/// or `tau` has a cycle, and with `InjectivityViolation` when two images
/// coincide.
pub fn orbit_decompose<T: Real>(
    phi: &SymmetryMap<T>,
    points: &[Point<T>],
) -> Result<OrbitDecomposition<T>> {
    let space = &phi.space;
    let n = points.len();
    if n == 0 {
        return Err(Error::BadParameter("point list is empty".into()));
    }
    if let Some((i, j)) = space.find_duplicate(points)? {
        return Err(Error::DuplicatePoints(i, j));
    }
    let images = points
        .iter()
        .map(|x| phi.apply(x))
        .collect::<Result<Vec<_>>>()?;
    if let Some((i, j)) = space.find_duplicate(&images)? {
        return Err(Error::InjectivityViolation(i, j));
    }

    let mut tau_table: Vec<Option<usize>> = vec![None; n];
    for (mu, image) in images.iter().enumerate() {
        for (nu, x) in points.iter().enumerate() {
            if space.points_equal(image, x)? {
                tau_table[mu] = Some(nu);
                break;
            }
        }
    }
    let f: Vec<usize> = (0..n).filter(|&mu| tau_table[mu].is_some()).collect();
    if f.len() == n {
        return Err(Error::PeriodicityDetected(
            "every image lies in the point list".into(),
        ));
    }
    for &mu in &f {
        let mut current = mu;
        let mut steps = 0;
        while let Some(next) = tau_table[current] {
            steps += 1;
            if steps > n {
                return Err(Error::PeriodicityDetected(format!(
                    "tau cycles through index {mu}"
                )));
            }
            current = next;
        }
    }

    let tau: Vec<(usize, usize)> = f.iter().map(|&mu| (mu, tau_table[mu].unwrap())).collect();
    let in_tau_f: Vec<bool> = {
        let mut hit = vec![false; n];
        for &(_, nu) in &tau {
            hit[nu] = true;
        }
        hit
    };

    let mut z_points = Vec::with_capacity(2 * n - f.len());
    let mut sources = Vec::with_capacity(2 * n - f.len());
    for &mu in &f {
        z_points.push(images[mu].clone());
        sources.push(Source::Image(mu));
    }
    for eta in (0..n).filter(|&i| tau_table[i].is_none()) {
        z_points.push(images[eta].clone());
        sources.push(Source::Image(eta));
    }
    for mu in (0..n).filter(|&i| !in_tau_f[i]) {
        z_points.push(points[mu].clone());
        sources.push(Source::Original(mu));
    }
    let m = f.len();
    Ok(OrbitDecomposition {
        f,
        tau,
        m,
        p: n - m,
        z_points,
        sources,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn line(xs: &[f64]) -> Vec<Point<f64>> {
        xs.iter().map(|&x| Point::vector(vec![x])).collect()
    }

    fn scalars(ps: &[Point<f64>]) -> Vec<f64> {
        ps.iter().map(|p| p.as_vector().unwrap()[0]).collect()
    }

    #[test]
    fn apply_examples() {
        let r = SymmetryMap::circle_rotation(1.0);
        assert_eq!(r.apply(&Point::angle(0.0)).unwrap(), Point::angle(1.0));
        let t = SymmetryMap::translation(vec![1.0, 0.0]).unwrap();
        assert_eq!(
            t.apply(&Point::vector(vec![0.0, 0.0])).unwrap(),
            Point::vector(vec![1.0, 0.0])
        );
        let s = SymmetryMap::scaling(2, 2.0).unwrap();
        assert_eq!(
            s.apply(&Point::vector(vec![1.0, 1.0])).unwrap(),
            Point::vector(vec![2.0, 2.0])
        );
        assert!(matches!(
            s.apply(&Point::angle(0.0)),
            Err(Error::SpaceMismatch(_))
        ));
    }

    #[test]
    fn complex_rotation_keeps_unit_norm() {
        let phi = SymmetryMap::complex_rotation(2, 1.0).unwrap();
        let x = Point::ComplexSphere(vec![Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)]);
        let y = phi.iterate(&x, 25).unwrap();
        assert!(phi.space.check(&y).is_ok());
    }

    #[test]
    fn mismatched_actions_rejected() {
        assert!(SymmetryMap::new(
            Space::<f64>::circle(),
            Action::EuclideanScaling { factor: 2.0 }
        )
        .is_err());
        assert!(SymmetryMap::<f64>::group_translation(vec![3], vec![3]).is_err());
    }

    #[test]
    fn adjoint_is_an_involution() {
        let phi = SymmetryMap::translation(vec![1.0])
            .unwrap()
            .with_adjoint(Action::EuclideanTranslation { offset: vec![-1.0] })
            .unwrap();
        let star = phi.adjoint_map().unwrap();
        assert_eq!(
            star.action,
            Action::EuclideanTranslation { offset: vec![-1.0] }
        );
        assert_eq!(star.adjoint_map().unwrap(), phi);
        assert!(matches!(
            SymmetryMap::<f64>::scaling(1, 2.0).unwrap().adjoint_map(),
            Err(Error::MissingAdjoint)
        ));
    }

    #[test]
    fn rotation_by_pi_has_period_two() {
        let ev =
            check_aperiodic(&SymmetryMap::circle_rotation(PI), &[Point::angle(0.0)], 4).unwrap();
        assert_eq!(ev.violation.unwrap().period, 2);
    }

    #[test]
    fn irrational_rotation_has_no_short_period() {
        let s = Space::<f64>::circle();
        let probes = s.sample_distinct(8, 1e-3, 11).unwrap();
        let ev = check_aperiodic(&SymmetryMap::circle_rotation(1.0), &probes, 50).unwrap();
        assert!(ev.no_counterexample());
        // independent check: m * 1.0 stays away from multiples of 2 pi
        for m in 1..=50 {
            let r = (m as f64) % (2.0 * PI);
            assert!(r.min(2.0 * PI - r) > 1e-10);
        }
    }

    #[test]
    fn scaling_is_aperiodic_off_origin() {
        let ev = check_aperiodic(
            &SymmetryMap::scaling(2, 2.0).unwrap(),
            &[Point::vector(vec![1.0, 0.0])],
            30,
        )
        .unwrap();
        assert!(ev.no_counterexample());
        assert_eq!(ev.m_max, 30);
    }

    #[test]
    fn injectivity_examples() {
        let s = Space::<f64>::circle();
        let pts = s.sample_distinct(5, 1e-3, 1).unwrap();
        assert!(check_injective_on(&SymmetryMap::circle_rotation(0.7), &pts).unwrap());
        let collapse = SymmetryMap::scaling(2, 0.0).unwrap();
        assert!(!check_injective_on(
            &collapse,
            &[Point::vector(vec![1.0, 0.0]), Point::vector(vec![2.0, 0.0])]
        )
        .unwrap());
        let g = SymmetryMap::<f64>::group_translation(vec![6], vec![4]).unwrap();
        let all = g.space.group_elements().unwrap();
        assert!(check_injective_on(&g, &all).unwrap());
    }

    #[test]
    fn center_examples() {
        let s = Space::<f64>::circle();
        let probes = s.sample_distinct(6, 1e-3, 5).unwrap();
        let gens: Vec<_> = [0.3, 1.7, -2.2]
            .iter()
            .map(|&a| SymmetryMap::circle_rotation(a))
            .collect();
        assert!(
            check_center(&SymmetryMap::circle_rotation(1.0), &gens, &probes)
                .unwrap()
                .no_counterexample()
        );

        let scalings: Vec<_> = [0.5, 3.0]
            .iter()
            .map(|&r| SymmetryMap::scaling(2, r).unwrap())
            .collect();
        let probes = vec![
            Point::vector(vec![1.0, -2.0]),
            Point::vector(vec![0.3, 0.4]),
        ];
        assert!(
            check_center(&SymmetryMap::scaling(2, 2.0).unwrap(), &scalings, &probes)
                .unwrap()
                .no_counterexample()
        );

        // t(r(x)) = -x + 1 versus r(t(x)) = -x - 1: differ by 2 at every probe
        let t = SymmetryMap::translation(vec![1.0, 0.0]).unwrap();
        let r = SymmetryMap::reflection(2).unwrap();
        let ev = check_center(&t, &[r], &[Point::vector(vec![1.0, 0.0])]).unwrap();
        assert_eq!(ev.violations.len(), 1);
        assert!((ev.violations[0].distance - 2.0f64).abs() < 1e-15);

        assert!(check_center(&t, &[SymmetryMap::circle_rotation(1.0)], &[]).is_err());
    }

    #[test]
    fn decomposition_under_unit_translation() {
        let phi = SymmetryMap::translation(vec![1.0]).unwrap();
        let d = orbit_decompose(&phi, &line(&[0.0, 1.0, 2.0, 5.0])).unwrap();
        assert_eq!(d.f, vec![0, 1]);
        assert_eq!(d.tau, vec![(0, 1), (1, 2)]);
        assert_eq!((d.m, d.p), (2, 2));
        assert_eq!(scalars(&d.z_points), vec![1.0, 2.0, 3.0, 6.0, 0.0, 5.0]);
        assert_eq!(d.escape_depth(0), Some(1));
        assert_eq!(d.escape_depth(1), Some(0));
        assert_eq!(d.escape_depth(2), None);
    }

    #[test]
    fn decomposition_under_rotation_with_empty_f() {
        let phi = SymmetryMap::circle_rotation(1.0);
        let d = orbit_decompose(&phi, &[Point::angle(0.0), Point::angle(2.0)]).unwrap();
        assert!(d.f.is_empty());
        assert_eq!((d.m, d.p), (0, 2));
        let angles: Vec<f64> = d.z_points.iter().map(|p| p.as_angle().unwrap()).collect();
        assert_eq!(angles, vec![1.0, 3.0, 0.0, 2.0]);
    }

    #[test]
    fn decomposition_under_scaling() {
        let phi = SymmetryMap::scaling(1, 2.0).unwrap();
        let d = orbit_decompose(&phi, &line(&[1.0, 2.0, 4.0])).unwrap();
        assert_eq!(d.f, vec![0, 1]);
        assert_eq!(d.tau, vec![(0, 1), (1, 2)]);
        assert_eq!((d.m, d.p), (2, 1));
        assert_eq!(scalars(&d.z_points), vec![2.0, 4.0, 8.0, 1.0]);
        assert_eq!(
            d.sources,
            vec![
                Source::Image(0),
                Source::Image(1),
                Source::Image(2),
                Source::Original(0)
            ]
        );
    }

    #[test]
    fn decomposition_detects_periodicity_and_collisions() {
        let half = SymmetryMap::circle_rotation(PI);
        let err = orbit_decompose(&half, &[Point::angle(0.0), Point::angle(PI)]).unwrap_err();
        assert!(matches!(err, Error::PeriodicityDetected(_)));
        let z3 = SymmetryMap::<f64>::group_translation(vec![3], vec![1]).unwrap();
        let err = orbit_decompose(&z3, &z3.space.group_elements().unwrap()).unwrap_err();
        assert!(matches!(err, Error::PeriodicityDetected(_)));
        // a 2-cycle inside a larger list still leaves |F| < n
        let err = orbit_decompose(
            &half,
            &[Point::angle(0.0), Point::angle(PI), Point::angle(1.0)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::PeriodicityDetected(_)));
        let collapse = SymmetryMap::scaling(1, 0.0).unwrap();
        assert!(matches!(
            orbit_decompose(&collapse, &line(&[1.0, 2.0])),
            Err(Error::InjectivityViolation(0, 1))
        ));
        assert!(matches!(
            orbit_decompose(&collapse, &line(&[1.0, 1.0])),
            Err(Error::DuplicatePoints(0, 1))
        ));
    }

    #[test]
    fn decomposition_json_has_blocks() {
        let phi = SymmetryMap::translation(vec![1.0]).unwrap();
        let d = orbit_decompose(&phi, &line(&[0.0, 1.0, 2.0, 5.0])).unwrap();
        let v = serde_json::to_value(&d).unwrap();
        assert_eq!(v["F"], serde_json::json!([0, 1]));
        assert_eq!(
            v["blocks"]["image_of_complement"],
            serde_json::json!([[3.0], [6.0]])
        );
        assert_eq!(
            v["blocks"]["not_in_tau_f"],
            serde_json::json!([[0.0], [5.0]])
        );
    }

    #[test]
    fn map_json_roundtrip() {
        let phi = SymmetryMap::translation(vec![1.0, 0.0])
            .unwrap()
            .with_adjoint(Action::EuclideanTranslation {
                offset: vec![-1.0, 0.0],
            })
            .unwrap();
        let text = serde_json::to_string(&phi).unwrap();
        assert!(text.contains("\"action_kind\":\"euclidean_translation\""));
        let back: SymmetryMap<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, phi);
        let id: SymmetryMap<f64> =
            serde_json::from_str(r#"{"space":{"kind":"circle"},"action_kind":"identity"}"#)
                .unwrap();
        assert_eq!(id.action, Action::Identity);
    }
}
