//! Concrete point spaces: the circle, Euclidean space, the complex unit
//! sphere and finite abelian groups `Z_q1 x ... x Z_ql`.

use num_complex::Complex;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rng::{rng, Rng};
use crate::scalar::{norm, Real};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    Circle,
    Euclidean { dim: usize },
    ComplexSphere { dim: usize },
    FiniteAbelian { moduli: Vec<u32> },
}

/// A point space together with its identity tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Space<T> {
    #[serde(flatten)]
    pub kind: SpaceKind,
    /// Metric tolerance for point identity. Unused on finite groups.
    #[serde(default = "default_eq_tol::<T>")]
    pub eq_tol: T,
}

fn default_eq_tol<T: Real>() -> T {
    T::lit(T::EQ_TOL)
}

/// A point tagged by the space it lives in.
///
/// Serializes as a bare number (circle), an array of numbers (Euclidean), an
/// array of `[re, im]` pairs (complex sphere) or an integer array (group).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Point<T> {
    Circle(T),
    Euclidean(Vec<T>),
    ComplexSphere(Vec<Complex<T>>),
    FiniteAbelian(Vec<u32>),
}

impl<T: Real> Point<T> {
    /// Circle point with its angle reduced to `[-pi, pi)`.
    pub fn angle(theta: T) -> Self {
        Point::Circle(canonical_angle(theta))
    }

    pub fn vector(coords: Vec<T>) -> Self {
        Point::Euclidean(coords)
    }

    pub fn as_angle(&self) -> Option<T> {
        match self {
            Point::Circle(t) => Some(*t),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[T]> {
        match self {
            Point::Euclidean(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_complex(&self) -> Option<&[Complex<T>]> {
        match self {
            Point::ComplexSphere(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_element(&self) -> Option<&[u32]> {
        match self {
            Point::FiniteAbelian(g) => Some(g),
            _ => None,
        }
    }
}

/// Reduces an angle to `[-pi, pi)`.
pub fn canonical_angle<T: Real>(theta: T) -> T {
    let pi = T::pi();
    let two_pi = T::two_pi();
    let mut a = theta - two_pi * ((theta + pi) / two_pi).floor();
    if a >= pi {
        a -= two_pi;
    }
    if a < -pi {
        a += two_pi;
    }
    a
}

impl<T: Real> Space<T> {
    pub fn circle() -> Self {
        Self::from_kind(SpaceKind::Circle).expect("circle is valid")
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::from_kind(SpaceKind::Euclidean { dim })
    }

    pub fn complex_sphere(dim: usize) -> Result<Self> {
        Self::from_kind(SpaceKind::ComplexSphere { dim })
    }

    pub fn finite_abelian(moduli: Vec<u32>) -> Result<Self> {
        Self::from_kind(SpaceKind::FiniteAbelian { moduli })
    }

    pub fn from_kind(kind: SpaceKind) -> Result<Self> {
        let space = Self {
            kind,
            eq_tol: default_eq_tol::<T>(),
        };
        space.validate()?;
        Ok(space)
    }

    pub fn with_eq_tol(mut self, eq_tol: T) -> Result<Self> {
        self.eq_tol = eq_tol;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            SpaceKind::Euclidean { dim } | SpaceKind::ComplexSphere { dim } if *dim == 0 => {
                return Err(Error::BadParameter("dimension must be at least 1".into()))
            }
            SpaceKind::FiniteAbelian { moduli } => {
                if moduli.is_empty() || moduli.iter().any(|&q| q < 2) {
                    return Err(Error::BadParameter(
                        "group moduli must be non-empty and each at least 2".into(),
                    ));
                }
                return Ok(());
            }
            _ => {}
        }
        if !(self.eq_tol > T::zero()) {
            return Err(Error::BadParameter("eq_tol must be positive".into()));
        }
        Ok(())
    }

    pub fn is_finite_group(&self) -> bool {
        matches!(self.kind, SpaceKind::FiniteAbelian { .. })
    }

    /// Group moduli, if this is a finite abelian group.
    pub fn moduli(&self) -> Option<&[u32]> {
        match &self.kind {
            SpaceKind::FiniteAbelian { moduli } => Some(moduli),
            _ => None,
        }
    }

    /// Order `|G|` of a finite group.
    pub fn order(&self) -> Option<usize> {
        self.moduli()
            .map(|m| m.iter().map(|&q| q as usize).product())
    }

    /// Fails with `SpaceMismatch` unless `x` is a valid point of this space.
    pub fn check(&self, x: &Point<T>) -> Result<()> {
        let ok = match (&self.kind, x) {
            (SpaceKind::Circle, Point::Circle(t)) => t.is_finite(),
            (SpaceKind::Euclidean { dim }, Point::Euclidean(v)) => {
                v.len() == *dim && v.iter().all(|c| c.is_finite())
            }
            (SpaceKind::ComplexSphere { dim }, Point::ComplexSphere(v)) => {
                let unit_tol = T::lit(1e-12).max(T::default_epsilon() * T::lit(100.0));
                v.len() == *dim && (norm(v) - T::one()).abs() <= unit_tol
            }
            (SpaceKind::FiniteAbelian { moduli }, Point::FiniteAbelian(g)) => {
                g.len() == moduli.len() && g.iter().zip(moduli).all(|(x, q)| x < q)
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(format!(
                "point {x:?} is not in space {:?}",
                self.kind
            )))
        }
    }

    /// Metric distance: wrap-around on the circle, Euclidean norms elsewhere,
    /// and 0/1 discrete distance on a finite group.
    pub fn distance(&self, x: &Point<T>, y: &Point<T>) -> Result<T> {
        self.check(x)?;
        self.check(y)?;
        Ok(match (x, y) {
            (Point::Circle(a), Point::Circle(b)) => canonical_angle(*a - *b).abs(),
            (Point::Euclidean(a), Point::Euclidean(b)) => a
                .iter()
                .zip(b)
                .fold(T::zero(), |acc, (p, q)| acc + (*p - *q) * (*p - *q))
                .sqrt(),
            (Point::ComplexSphere(a), Point::ComplexSphere(b)) => {
                let diff: Vec<Complex<T>> = a.iter().zip(b).map(|(p, q)| p - q).collect();
                norm(&diff)
            }
            (Point::FiniteAbelian(a), Point::FiniteAbelian(b)) => {
                if a == b {
                    T::zero()
                } else {
                    T::one()
                }
            }
            _ => unreachable!("checked above"),
        })
    }

    /// Tolerance-aware identity. Exact on finite groups.
    pub fn points_equal(&self, x: &Point<T>, y: &Point<T>) -> Result<bool> {
        if self.is_finite_group() {
            self.check(x)?;
            self.check(y)?;
            return Ok(x == y);
        }
        Ok(self.distance(x, y)? <= self.eq_tol)
    }

    /// First pair of coinciding points, if any.
    pub fn find_duplicate(&self, points: &[Point<T>]) -> Result<Option<(usize, usize)>> {
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if self.points_equal(&points[i], &points[j])? {
                    return Ok(Some((i, j)));
                }
            }
        }
        Ok(None)
    }

    /// All group elements in lexicographic order (last coordinate fastest).
    pub fn group_elements(&self) -> Result<Vec<Point<T>>> {
        let order = self.order().ok_or(Error::WrongSpaceKind {
            expected: "finite abelian group",
        })?;
        (0..order).map(|i| self.element_at(i)).collect()
    }

    /// The `index`-th element in lexicographic order.
    pub fn element_at(&self, index: usize) -> Result<Point<T>> {
        let moduli = self.moduli().ok_or(Error::WrongSpaceKind {
            expected: "finite abelian group",
        })?;
        let mut rest = index;
        let mut coords = vec![0u32; moduli.len()];
        for (c, &q) in coords.iter_mut().zip(moduli).rev() {
            *c = (rest % q as usize) as u32;
            rest /= q as usize;
        }
        Ok(Point::FiniteAbelian(coords))
    }

    /// Inverse of [`Space::element_at`].
    pub fn index_of(&self, x: &Point<T>) -> Result<usize> {
        self.check(x)?;
        let moduli = self.moduli().ok_or(Error::WrongSpaceKind {
            expected: "finite abelian group",
        })?;
        let g = x.as_element().expect("checked");
        Ok(g.iter()
            .zip(moduli)
            .fold(0usize, |acc, (&c, &q)| acc * q as usize + c as usize))
    }

    /// Componentwise `x + y` (mod q).
    pub fn group_add(&self, x: &Point<T>, y: &Point<T>) -> Result<Point<T>> {
        self.group_combine(x, y, |a, b, q| (a + b) % q)
    }

    /// Componentwise `x - y` (mod q); the additive form of `x y^{-1}`.
    pub fn group_sub(&self, x: &Point<T>, y: &Point<T>) -> Result<Point<T>> {
        self.group_combine(x, y, |a, b, q| (a + q - b) % q)
    }

    fn group_combine(
        &self,
        x: &Point<T>,
        y: &Point<T>,
        op: impl Fn(u32, u32, u32) -> u32,
    ) -> Result<Point<T>> {
        self.check(x)?;
        self.check(y)?;
        let moduli = self.moduli().ok_or(Error::WrongSpaceKind {
            expected: "finite abelian group",
        })?;
        let (a, b) = (x.as_element().unwrap(), y.as_element().unwrap());
        Ok(Point::FiniteAbelian(
            a.iter()
                .zip(b)
                .zip(moduli)
                .map(|((&p, &q), &m)| op(p, q, m))
                .collect(),
        ))
    }

    /// Draws one point from the sampling distribution of this space:
    /// uniform angle, uniform in `[-radius, radius]^m`, normalized complex
    /// Gaussian, or a uniform group element.
    pub fn random_point(&self, rng: &mut Rng, radius: T) -> Point<T> {
        match &self.kind {
            SpaceKind::Circle => {
                let u: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
                Point::angle(T::lit(u))
            }
            SpaceKind::Euclidean { dim } => {
                let r = radius.as_f64();
                Point::Euclidean(
                    (0..*dim)
                        .map(|_| T::lit(rng.random_range(-r..=r)))
                        .collect(),
                )
            }
            SpaceKind::ComplexSphere { dim } => loop {
                let v: Vec<Complex<f64>> = (0..*dim)
                    .map(|_| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                    .collect();
                let n = norm(&v);
                if n > 1e-6 {
                    break Point::ComplexSphere(
                        v.iter()
                            .map(|z| Complex::new(T::lit(z.re / n), T::lit(z.im / n)))
                            .collect(),
                    );
                }
            },
            SpaceKind::FiniteAbelian { moduli } => {
                Point::FiniteAbelian(moduli.iter().map(|&q| rng.random_range(0..q)).collect())
            }
        }
    }

    /// `n` points with pairwise distance `> min_sep`, deterministic in `seed`.
    pub fn sample_distinct(&self, n: usize, min_sep: T, seed: u64) -> Result<Vec<Point<T>>> {
        Sampler::new(self)
            .min_sep(min_sep)
            .sample(n, &mut rng(seed))
    }

    /// Parses a point from its JSON encoding.
    pub fn parse_point(&self, value: &Value) -> Result<Point<T>> {
        let bad = || {
            Error::config(
                "point",
                format!("cannot read {value} as a point of {:?}", self.kind),
            )
        };
        let num = |v: &Value| v.as_f64().map(T::lit);
        let point = match &self.kind {
            SpaceKind::Circle => Point::angle(num(value).ok_or_else(bad)?),
            SpaceKind::Euclidean { .. } => Point::Euclidean(
                value
                    .as_array()
                    .ok_or_else(bad)?
                    .iter()
                    .map(|v| num(v).ok_or_else(bad))
                    .collect::<Result<_>>()?,
            ),
            SpaceKind::ComplexSphere { .. } => Point::ComplexSphere(
                value
                    .as_array()
                    .ok_or_else(bad)?
                    .iter()
                    .map(|pair| {
                        let pair = pair.as_array().filter(|p| p.len() == 2).ok_or_else(bad)?;
                        Ok(Complex::new(
                            num(&pair[0]).ok_or_else(bad)?,
                            num(&pair[1]).ok_or_else(bad)?,
                        ))
                    })
                    .collect::<Result<_>>()?,
            ),
            SpaceKind::FiniteAbelian { .. } => Point::FiniteAbelian(
                value
                    .as_array()
                    .ok_or_else(bad)?
                    .iter()
                    .map(|v| {
                        v.as_u64()
                            .and_then(|x| u32::try_from(x).ok())
                            .ok_or_else(bad)
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        self.check(&point)?;
        Ok(point)
    }
}

type ImageFn<'a, T> = Box<dyn Fn(&Point<T>) -> Result<Point<T>> + 'a>;

/// Rejection sampler for separated point sets.
///
/// Besides pairwise separation of the sampled points it can keep every
/// sample away from a list of fixed points, and can require that a
/// companion point (typically the image under a map) is separated from
/// everything as well.
pub struct Sampler<'a, T: Real> {
    space: &'a Space<T>,
    min_sep: T,
    radius: T,
    avoid: Vec<Point<T>>,
    image: Option<ImageFn<'a, T>>,
    max_attempts: usize,
}

impl<'a, T: Real> Sampler<'a, T> {
    pub fn new(space: &'a Space<T>) -> Self {
        Self {
            space,
            min_sep: T::lit(1e-3),
            radius: T::one(),
            avoid: Vec::new(),
            image: None,
            max_attempts: 20_000,
        }
    }

    pub fn min_sep(mut self, min_sep: T) -> Self {
        self.min_sep = min_sep;
        self
    }

    /// Half-width of the sampling box on Euclidean spaces.
    pub fn radius(mut self, radius: T) -> Self {
        self.radius = radius;
        self
    }

    pub fn avoid(mut self, points: Vec<Point<T>>) -> Self {
        self.avoid = points;
        self
    }

    pub fn with_images(mut self, image: impl Fn(&Point<T>) -> Result<Point<T>> + 'a) -> Self {
        self.image = Some(Box::new(image));
        self
    }

    pub fn max_attempts(mut self, attempts: usize) -> Self {
        self.max_attempts = attempts;
        self
    }

    pub fn sample(&self, n: usize, rng: &mut Rng) -> Result<Vec<Point<T>>> {
        if let Some(order) = self.space.order() {
            return self.sample_group(n, order, rng);
        }
        if !(self.min_sep > self.space.eq_tol) {
            return Err(Error::BadParameter(
                "min_sep must exceed eq_tol on continuous spaces".into(),
            ));
        }
        let mut attempts = 0;
        // Greedy rejection with restarts: a partial configuration can jam.
        'restart: loop {
            let mut chosen: Vec<Point<T>> = Vec::with_capacity(n);
            let mut occupied: Vec<Point<T>> = self.avoid.clone();
            while chosen.len() < n {
                let mut stuck = 0;
                loop {
                    attempts += 1;
                    if attempts > self.max_attempts {
                        return Err(Error::ExhaustedSampling {
                            requested: n,
                            attempts: self.max_attempts,
                        });
                    }
                    let x = self.space.random_point(rng, self.radius);
                    let mut group = vec![x.clone()];
                    if let Some(image) = &self.image {
                        group.push(image(&x)?);
                    }
                    if self.separated(&group, &occupied)? {
                        chosen.push(x);
                        occupied.extend(group);
                        break;
                    }
                    stuck += 1;
                    if stuck > 200 {
                        continue 'restart;
                    }
                }
            }
            return Ok(chosen);
        }
    }

    fn separated(&self, group: &[Point<T>], occupied: &[Point<T>]) -> Result<bool> {
        for (i, p) in group.iter().enumerate() {
            for q in group[i + 1..].iter().chain(occupied) {
                if self.space.distance(p, q)? <= self.min_sep {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn sample_group(&self, n: usize, order: usize, rng: &mut Rng) -> Result<Vec<Point<T>>> {
        let excluded: Vec<usize> = self
            .avoid
            .iter()
            .map(|p| self.space.index_of(p))
            .collect::<Result<_>>()?;
        let mut pool: Vec<usize> = (0..order).filter(|i| !excluded.contains(i)).collect();
        if n > pool.len() {
            return Err(Error::TooManyPoints {
                requested: n,
                available: pool.len(),
            });
        }
        // partial Fisher-Yates
        for i in 0..n {
            let j = rng.random_range(i..pool.len());
            pool.swap(i, j);
        }
        pool[..n]
            .iter()
            .map(|&i| self.space.element_at(i))
            .collect()
    }
}
