//! Suite orchestration and reports.
//!
//! Every suite is a deterministic function of its [`SuiteConfig`]. Trials
//! draw from `ChaCha8Rng` streams seeded by [`sub_seed`]`(seed, stream)`
//! and then `sub_seed(stream_seed, trial)`, so running trials in parallel
//! never changes a report.

use std::fmt::Write as _;

use num_complex::Complex;
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::abelian::{
    analyze, analyze_matrix, brute_force_strict_with, character, strict_criterion_with, synthesize,
    Coefficients, FourierSpectrum,
};
use crate::counterexample::{
    self as cx, embed, proof_points, witness_with, CounterexampleConfig, CounterexampleKernel,
    Variant,
};
use crate::error::{Error, Result};
use crate::kernels::{
    check_adjoint_invariance, check_unitary_invariance, evaluation_matrix, gram, probe_pairs,
    InvarianceEvidence, MatrixKernel, ScalarKernel,
};
use crate::numcore::{classify, HermitianMatrix, PdKind, PdVerdict, Tolerances};
use crate::rng::{rng, sub_seed, Rng};
use crate::scalar::Real;
use crate::spaces::{Point, Sampler, Space};
use crate::symmetry::{
    check_aperiodic, check_center, check_injective_on, orbit_decompose, Source, SymmetryMap,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 42;

/// Suite ids with one-line descriptions.
pub const SUITES: &[(&str, &str)] = &[
    (
        "circle-example1",
        "e^cos kernel on the circle, rotation by rho",
    ),
    (
        "gaussian-example1",
        "Gaussian kernel on R^3, translation by z",
    ),
    (
        "dotproduct-example1",
        "shifted e^<x,y> kernel on R^2, scaling by r",
    ),
    (
        "orbit-decomposition",
        "orbit decomposition against a brute-force oracle",
    ),
    (
        "abelian-roundtrip",
        "Fourier analysis and synthesis on finite abelian groups",
    ),
    (
        "abelian-strictness",
        "coefficient criterion against full Gram matrices",
    ),
    ("embed-check", "embedding a 2x2 counterexample into 3x3"),
    (
        "complex-sphere",
        "e^<x,y> on the complex sphere, rotation by e^{i theta}",
    ),
    ("negative-controls", "periodic and non-injective maps"),
];

const ANCHOR_INVARIANCE: &str = "invariance of the kernel under the semigroup";
const ANCHOR_CONSTRUCTION: &str = "two-by-two construction: positive definite, not strictly";
const ANCHOR_PROJECTION: &str =
    "scalar projections of the construction are strictly positive definite";
const ANCHOR_APERIODIC: &str = "aperiodicity of the map";
const ANCHOR_CENTER: &str = "map lies in the center of the semigroup";
const ANCHOR_INJECTIVE: &str = "injectivity of the map";
const ANCHOR_BLOCK_GRAM: &str = "blocked Gram equals the Gram of k over the y-points";
const ANCHOR_ADJOINT: &str = "adjoint construction";
const ANCHOR_SHIFT: &str = "shifted dot-product kernel";
const ANCHOR_ORBIT: &str = "orbit decomposition into m + 2p distinct points";
const ANCHOR_FOURIER: &str = "Fourier representation on finite abelian groups";
const ANCHOR_STRICT: &str = "strictness iff every Fourier coefficient is positive (definite)";
const ANCHOR_PROJ_EQ: &str = "on finite abelian groups projection strictness equals strictness";
const ANCHOR_EMBED: &str = "embedding into larger output dimension";
const ANCHOR_SPHERE: &str = "complex sphere with the central rotation e^{i theta} I";
const ANCHOR_CONVERSE: &str = "periodic or non-injective maps (observed, not asserted)";

/// Overrides of the default tolerances.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub pd_tol: Option<f64>,
    pub herm_tol: Option<f64>,
    pub resid_tol: Option<f64>,
    pub strict_tol: Option<f64>,
}

/// Parameters of the catalog kernels.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    pub rho: Option<f64>,
    pub sigma: Option<f64>,
    pub z: Option<Vec<f64>>,
    pub r: Option<f64>,
    pub dim: Option<usize>,
    pub theta: Option<f64>,
}

/// Configuration of one suite run. Unset fields take the suite's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub schema_version: u32,
    pub suite: Option<String>,
    pub seed: u64,
    /// Points per sampled set.
    pub n: Option<usize>,
    /// Number of sampled point sets.
    pub point_sets: Option<usize>,
    /// Number of random projection vectors.
    pub projections: Option<usize>,
    /// Number of random instances (orbit and Fourier suites).
    pub instances: Option<usize>,
    pub min_sep: Option<f64>,
    /// Half-width of the Euclidean sampling box.
    pub radius: Option<f64>,
    /// Point pairs for invariance checks and probes for aperiodicity.
    pub probes: Option<usize>,
    pub m_max: Option<usize>,
    /// Moduli of a finite abelian group.
    pub group: Option<Vec<u32>>,
    pub parameters: Parameters,
    pub tolerances: ToleranceOverrides,
    /// Replaces the catalog counterexample in the example suites.
    pub counterexample: Option<CounterexampleConfig<f64>>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            suite: None,
            seed: DEFAULT_SEED,
            n: None,
            point_sets: None,
            projections: None,
            instances: None,
            min_sep: None,
            radius: None,
            probes: None,
            m_max: None,
            group: None,
            parameters: Parameters::default(),
            tolerances: ToleranceOverrides::default(),
            counterexample: None,
        }
    }
}

impl SuiteConfig {
    pub fn for_suite(id: &str) -> Self {
        Self {
            suite: Some(id.to_string()),
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        let suite = self
            .suite
            .as_deref()
            .ok_or_else(|| Error::config("suite", "no suite id given"))?;
        if !SUITES.iter().any(|(id, _)| *id == suite) {
            return Err(Error::config("suite", format!("unknown suite '{suite}'")));
        }
        for (field, value) in [
            ("n", self.n),
            ("point_sets", self.point_sets),
            ("projections", self.projections),
            ("instances", self.instances),
            ("probes", self.probes),
            ("m_max", self.m_max),
        ] {
            if value == Some(0) {
                return Err(Error::config(field, "must be at least 1"));
            }
        }
        let positive = [
            ("min_sep", self.min_sep),
            ("radius", self.radius),
            ("parameters.sigma", self.parameters.sigma),
            ("tolerances.pd_tol", self.tolerances.pd_tol),
            ("tolerances.herm_tol", self.tolerances.herm_tol),
            ("tolerances.resid_tol", self.tolerances.resid_tol),
            ("tolerances.strict_tol", self.tolerances.strict_tol),
        ];
        for (field, value) in positive {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::config(field, "must be positive and finite"));
                }
            }
        }
        if self.parameters.dim == Some(0) {
            return Err(Error::config("parameters.dim", "must be at least 1"));
        }
        if let Some(z) = &self.parameters.z {
            if z.iter().all(|c| *c == 0.0) {
                return Err(Error::config("parameters.z", "must be nonzero"));
            }
        }
        if let Some(moduli) = &self.group {
            let space = Space::<f64>::finite_abelian(moduli.clone())
                .map_err(|e| Error::config("group", e.to_string()))?;
            let order = space.order().unwrap_or(0);
            if let Some(n) = self.n {
                if n > order {
                    return Err(Error::config(
                        "n",
                        format!("{n} points requested from a group of order {order}"),
                    ));
                }
            }
        }
        if let Some(c) = &self.counterexample {
            c.build()
                .map_err(|e| Error::config("counterexample", e.to_string()))?;
        }
        Ok(())
    }

    fn tolerances(&self) -> Tolerances<f64> {
        let d = Tolerances::<f64>::default();
        Tolerances {
            pd_tol: self.tolerances.pd_tol.unwrap_or(d.pd_tol),
            herm_tol: self.tolerances.herm_tol.unwrap_or(d.herm_tol),
            resid_tol: self.tolerances.resid_tol.unwrap_or(d.resid_tol),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Check,
    /// Reported behaviour that is not a proved invariant.
    Observation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    pub anchor: String,
    pub kind: RecordKind,
    pub pass: bool,
    pub evidence: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub seed: u64,
    pub rng: String,
    pub pd_tol: f64,
    pub herm_tol: f64,
    pub resid_tol: f64,
    pub strict_tol: f64,
    pub synth_tol: f64,
    /// Parameter values chosen by the harness rather than fixed by the theory.
    pub conventions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: String,
    pub pass: bool,
    pub environment: Environment,
    pub records: Vec<Record>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, environment: Environment) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            suite: suite.into(),
            pass: true,
            environment,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, record: Record) {
        self.pass &= record.pass;
        self.records.push(record);
    }

    pub fn record(&self, name: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.pass)
    }

    /// CLI exit code: 0 when every record passes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => Err(Error::config("format", format!("unknown format '{other}'"))),
        }
    }
}

pub fn emit_report(report: &SuiteReport, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(report).expect("reports are plain data"),
        Format::Text => {
            let mut out = String::new();
            let status = if report.pass { "PASS" } else { "FAIL" };
            let env = &report.environment;
            let _ = writeln!(
                out,
                "suite {}  seed {}  {}  ({} records)",
                report.suite,
                env.seed,
                status,
                report.records.len()
            );
            let _ = writeln!(
                out,
                "  tolerances: pd {:e}  herm {:e}  resid {:e}  strict {:e}  synth {:e}",
                env.pd_tol, env.herm_tol, env.resid_tol, env.strict_tol, env.synth_tol
            );
            for c in &env.conventions {
                let _ = writeln!(out, "  convention: {c}");
            }
            for r in &report.records {
                let mark = match (r.kind, r.pass) {
                    (RecordKind::Check, true) => "pass",
                    (RecordKind::Check, false) => "FAIL",
                    (RecordKind::Observation, true) => "seen",
                    (RecordKind::Observation, false) => "MISS",
                };
                let _ = writeln!(out, "  [{mark}] {}  <{}>", r.name, r.anchor);
                let _ = writeln!(out, "         {}", r.evidence);
            }
            out
        }
    }
}

/// Runs the suite named in `config.suite`.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    config.validate()?;
    let id = config.suite.clone().unwrap_or_default();
    let mut ctx = Ctx::new(config, &id);
    match id.as_str() {
        "circle-example1" => circle_suite(&mut ctx)?,
        "gaussian-example1" => gaussian_suite(&mut ctx)?,
        "dotproduct-example1" => dot_suite(&mut ctx)?,
        "orbit-decomposition" => orbit_suite(&mut ctx)?,
        "abelian-roundtrip" => roundtrip_suite(&mut ctx)?,
        "abelian-strictness" => strictness_suite(&mut ctx)?,
        "embed-check" => embed_suite(&mut ctx)?,
        "complex-sphere" => sphere_suite(&mut ctx)?,
        "negative-controls" => negative_suite(&mut ctx)?,
        _ => unreachable!("validated suite id"),
    }
    Ok(ctx.report)
}

struct Ctx<'a> {
    config: &'a SuiteConfig,
    tol: Tolerances<f64>,
    strict_tol: f64,
    report: SuiteReport,
}

impl<'a> Ctx<'a> {
    fn new(config: &'a SuiteConfig, id: &str) -> Self {
        let tol = config.tolerances();
        let strict_tol = config.tolerances.strict_tol.unwrap_or(f64::STRICT_TOL);
        let environment = Environment {
            seed: config.seed,
            rng: "ChaCha8Rng (rand_chacha) seeded via seed_from_u64; sub-seeds by SplitMix64 mixing of (seed, index)".into(),
            pd_tol: tol.pd_tol,
            herm_tol: tol.herm_tol,
            resid_tol: tol.resid_tol,
            strict_tol,
            synth_tol: f64::SYNTH_TOL,
            conventions: Vec::new(),
        };
        Self {
            config,
            tol,
            strict_tol,
            report: SuiteReport::new(id, environment),
        }
    }

    fn stream(&self, index: u64) -> u64 {
        sub_seed(self.config.seed, index)
    }

    fn convention(&mut self, text: String) {
        self.report.environment.conventions.push(text);
    }

    fn check(&mut self, name: &str, anchor: &str, outcome: Result<(bool, Value)>) {
        self.push(name, anchor, RecordKind::Check, outcome);
    }

    fn observe(&mut self, name: &str, anchor: &str, outcome: Result<(bool, Value)>) {
        self.push(name, anchor, RecordKind::Observation, outcome);
    }

    fn push(&mut self, name: &str, anchor: &str, kind: RecordKind, outcome: Result<(bool, Value)>) {
        let (pass, evidence) = match outcome {
            Ok(pair) => pair,
            Err(e) => (false, json!({ "error": e.to_string() })),
        };
        self.report.push(Record {
            name: name.into(),
            anchor: anchor.into(),
            kind,
            pass,
            evidence,
        });
    }

    fn n(&self, default: usize) -> usize {
        self.config.n.unwrap_or(default)
    }

    fn point_sets(&self, default: usize) -> usize {
        self.config.point_sets.unwrap_or(default)
    }

    fn projections(&self, default: usize) -> usize {
        self.config.projections.unwrap_or(default)
    }

    fn instances(&self, default: usize) -> usize {
        self.config.instances.unwrap_or(default)
    }

    fn probes(&self) -> usize {
        self.config.probes.unwrap_or(crate::kernels::DEFAULT_PROBES)
    }

    fn m_max(&self) -> usize {
        self.config.m_max.unwrap_or(50)
    }
}

/// A standard complex Gaussian vector.
pub fn random_vector(ell: usize, r: &mut Rng) -> Vec<Complex<f64>> {
    (0..ell)
        .map(|_| Complex::new(r.sample(StandardNormal), r.sample(StandardNormal)))
        .collect()
}

fn verdict_json(v: &PdVerdict<f64>) -> Value {
    json!({
        "kind": v.kind,
        "min_eigenvalue": v.min_eigenvalue,
        "relative_min_eigenvalue": v.relative_min_eigenvalue(),
        "numeric_rank": v.numeric_rank,
        "scale": v.scale,
    })
}

fn invariance_json(e: &InvarianceEvidence<f64>, threshold: f64) -> Value {
    json!({
        "maps": e.maps,
        "probes": e.probes,
        "max_residual": e.max_residual,
        "scale": e.scale,
        "relative_residual": e.relative_residual(),
        "threshold": threshold,
    })
}

fn max_abs(m: &nalgebra::DMatrix<Complex<f64>>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn vec_json(v: &[Complex<f64>]) -> Value {
    json!(v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
}

/// Angle between `w` and the eigenspace of `g` with `|lambda| <= rel * scale`.
pub fn null_space_angle(g: &HermitianMatrix<f64>, w: &[Complex<f64>], rel: f64) -> Result<f64> {
    let eig = g.eigen()?;
    let threshold = rel * eig.scale();
    let wn = crate::scalar::norm(w);
    let mut captured = 0.0;
    for (lambda, u) in eig.values.iter().zip(&eig.vectors) {
        if lambda.abs() <= threshold {
            captured += crate::scalar::inner(u, w).norm_sqr();
        }
    }
    Ok((captured.sqrt() / wn).clamp(0.0, 1.0).acos())
}

/// How point sets for projection checks are drawn.
struct SetPlan {
    n: usize,
    count: usize,
    min_sep: f64,
    radius: f64,
    /// Prepended to every set and kept away from the samples.
    fixed: Vec<Point<f64>>,
}

fn sample_sets(
    space: &Space<f64>,
    phi: Option<&SymmetryMap<f64>>,
    plan: &SetPlan,
    seed: u64,
) -> Result<Vec<Vec<Point<f64>>>> {
    (0..plan.count)
        .map(|i| {
            let mut sampler = Sampler::new(space)
                .min_sep(plan.min_sep)
                .radius(plan.radius)
                .avoid(plan.fixed.clone());
            if let Some(phi) = phi {
                sampler = sampler.with_images(move |x| phi.apply(x));
            }
            let random = plan.n.saturating_sub(plan.fixed.len());
            let mut set = plan.fixed.clone();
            set.extend(sampler.sample(random, &mut rng(sub_seed(seed, i as u64)))?);
            Ok(set)
        })
        .collect()
}

/// Worst verdict of the projected Grams for each random `v`.
fn projection_checks(
    ctx: &mut Ctx,
    kernel: &MatrixKernel<f64>,
    sets: &[Vec<Point<f64>>],
    count: usize,
    seed: u64,
) {
    let tol = ctx.tol;
    let results: Vec<Result<(bool, Value)>> = (0..count)
        .into_par_iter()
        .map(|k| {
            let v = random_vector(kernel.ell, &mut rng(sub_seed(seed, k as u64)));
            let kv = kernel.project(&v)?;
            let mut worst = f64::INFINITY;
            let mut failures = 0usize;
            for set in sets {
                let verdict = classify(&gram(&kv, set)?, &tol)?;
                worst = worst.min(verdict.relative_min_eigenvalue());
                failures += usize::from(!verdict.is_positive_definite());
            }
            Ok((
                failures == 0,
                json!({
                    "v": vec_json(&v),
                    "point_sets": sets.len(),
                    "points_per_set": sets.first().map_or(0, Vec::len),
                    "not_positive_definite": failures,
                    "worst_relative_min_eigenvalue": worst,
                }),
            ))
        })
        .collect();
    for (k, outcome) in results.into_iter().enumerate() {
        ctx.check(
            &format!("projection-pd/v{k:02}"),
            ANCHOR_PROJECTION,
            outcome,
        );
    }
}

/// Checks shared by every counterexample suite.
struct Pipeline<'a> {
    c: &'a CounterexampleKernel<f64>,
    witness_at: Point<f64>,
    generators: Vec<SymmetryMap<f64>>,
    probes: Vec<(Point<f64>, Point<f64>)>,
    aperiodic_probes: Vec<Point<f64>>,
    plan: SetPlan,
}

const STREAM_PROBES: u64 = 1;
const STREAM_SETS: u64 = 2;
const STREAM_PROJECTIONS: u64 = 3;
const STREAM_GENERATORS: u64 = 4;
const STREAM_WITNESS_SETS: u64 = 5;
const STREAM_EXTRA: u64 = 6;

fn run_pipeline(ctx: &mut Ctx, p: &Pipeline) -> Result<()> {
    let c = p.c;
    let phi = &c.map;
    let space = c.as_matrix.space.clone();
    let tol = ctx.tol;
    let adjoint = !matches!(c.variant, Variant::Unitary);

    let base_inv = if adjoint {
        check_adjoint_invariance(&c.base, &p.generators, &p.probes, &tol)
    } else {
        check_unitary_invariance(&c.base, &p.generators, &p.probes, &tol)
    };
    ctx.check(
        "base-invariance",
        ANCHOR_INVARIANCE,
        base_inv.map(|e| (e.pass, invariance_json(&e, tol.resid_tol))),
    );
    let grid_inv = if adjoint {
        check_adjoint_invariance(c, &p.generators, &p.probes, &tol)
    } else {
        check_unitary_invariance(c, &p.generators, &p.probes, &tol)
    };
    ctx.check(
        "counterexample-invariance",
        ANCHOR_INVARIANCE,
        grid_inv.map(|e| (e.pass, invariance_json(&e, tol.resid_tol))),
    );

    let m_max = ctx.m_max();
    ctx.check(
        "aperiodicity",
        ANCHOR_APERIODIC,
        check_aperiodic(phi, &p.aperiodic_probes, m_max).map(|ev| {
            (
                ev.no_counterexample(),
                serde_json::to_value(&ev).unwrap_or(Value::Null),
            )
        }),
    );
    ctx.check(
        "center",
        ANCHOR_CENTER,
        check_center(phi, &p.generators, &p.aperiodic_probes).map(|ev| {
            (
                ev.no_counterexample(),
                serde_json::to_value(&ev).unwrap_or(Value::Null),
            )
        }),
    );

    let sets = sample_sets(&space, Some(phi), &p.plan, ctx.stream(STREAM_SETS))?;
    ctx.check(
        "injectivity",
        ANCHOR_INJECTIVE,
        sets.iter()
            .map(|s| check_injective_on(phi, s))
            .collect::<Result<Vec<bool>>>()
            .map(|all| {
                let bad = all.iter().filter(|ok| !**ok).count();
                (
                    bad == 0,
                    json!({ "point_sets": all.len(), "non_injective_sets": bad }),
                )
            }),
    );

    // Degeneracy at the explicit witness.
    let witness = witness_with(c, &p.witness_at, &tol);
    ctx.check(
        "witness",
        ANCHOR_CONSTRUCTION,
        match &witness {
            Err(e) => Ok((false, json!({ "error": e.to_string() }))),
            Ok(w) => Ok((
                true,
                json!({
                    "points": w.points,
                    "coefficients": w.coefficients.iter().map(|v| vec_json(v)).collect::<Vec<_>>(),
                    "achieved_form_value": w.achieved_form_value,
                    "scale": w.scale,
                    "threshold": tol.resid_tol * w.scale,
                }),
            )),
        },
    );
    if let Ok(w) = &witness {
        let outcome = (|| {
            let g = gram(&c.as_matrix, &w.points)?;
            let verdict = classify(&g, &tol)?;
            let angle = null_space_angle(&g, &w.flattened(), tol.resid_tol)?;
            let rel = verdict.relative_min_eigenvalue();
            let pass = verdict.kind != PdKind::Indefinite && rel <= tol.resid_tol && angle <= 1e-6;
            let mut ev = verdict_json(&verdict);
            ev["null_direction_angle"] = json!(angle);
            ev["dimension"] = json!(g.dim());
            Ok((pass, ev))
        })();
        ctx.check("witness-gram", ANCHOR_CONSTRUCTION, outcome);

        // Random sets that contain the witness points.
        let plan = SetPlan {
            fixed: w.points.clone(),
            n: p.plan.n.max(w.points.len()),
            ..copy_plan(&p.plan)
        };
        let outcome = (|| {
            let sets = sample_sets(&space, Some(phi), &plan, ctx.stream(STREAM_WITNESS_SETS))?;
            let mut kinds = Vec::new();
            let mut worst = f64::NEG_INFINITY;
            let mut pass = true;
            for s in &sets {
                let v = classify(&gram(&c.as_matrix, s)?, &tol)?;
                worst = worst.max(v.relative_min_eigenvalue());
                pass &= v.kind != PdKind::Indefinite && !v.is_positive_definite();
                kinds.push(v.kind);
            }
            Ok((
                pass,
                json!({
                    "point_sets": sets.len(),
                    "points_per_set": plan.n,
                    "largest_relative_min_eigenvalue": worst,
                    "kinds": kinds,
                }),
            ))
        })();
        ctx.check("psd-not-pd-with-witness", ANCHOR_CONSTRUCTION, outcome);
    }

    if !adjoint {
        let outcome = (|| {
            let mut worst = 0.0f64;
            for s in &sets {
                let blocked = gram(&c.as_matrix, s)?;
                let flat = evaluation_matrix(&c.base, &proof_points(phi, s)?)?;
                let scale = flat.eigen()?.scale();
                let diff = max_abs(&(blocked.as_matrix() - flat.as_matrix()));
                worst = worst.max(diff / scale);
            }
            Ok((
                worst <= 1e-14,
                json!({ "point_sets": sets.len(), "max_relative_difference": worst, "threshold": 1e-14 }),
            ))
        })();
        ctx.check("block-gram-structure", ANCHOR_BLOCK_GRAM, outcome);
    }

    let count = ctx.projections(50);
    projection_checks(
        ctx,
        &c.as_matrix,
        &sets,
        count,
        ctx.stream(STREAM_PROJECTIONS),
    );
    Ok(())
}

fn copy_plan(p: &SetPlan) -> SetPlan {
    SetPlan {
        n: p.n,
        count: p.count,
        min_sep: p.min_sep,
        radius: p.radius,
        fixed: p.fixed.clone(),
    }
}

fn custom_counterexample(ctx: &mut Ctx) -> Result<Option<CounterexampleKernel<f64>>> {
    match &ctx.config.counterexample {
        Some(cfg) => {
            ctx.convention("counterexample supplied by the configuration".into());
            Ok(Some(cfg.build()?))
        }
        None => Ok(None),
    }
}

fn circle_suite(ctx: &mut Ctx) -> Result<()> {
    let rho = ctx.config.parameters.rho.unwrap_or(cx::DEFAULT_RHO);
    if ctx.config.parameters.rho.is_none() {
        ctx.convention(format!("rho = {rho} (any angle outside Q*pi qualifies)"));
    }
    let c = match custom_counterexample(ctx)? {
        Some(c) => c,
        None => cx::circle_example(rho)?,
    };
    let space = c.as_matrix.space.clone();
    let mut gr = rng(ctx.stream(STREAM_GENERATORS));
    let generators: Vec<_> = (0..10)
        .map(|_| SymmetryMap::circle_rotation(gr.random_range(-3.0..3.0)))
        .chain(std::iter::once(c.map.clone()))
        .collect();
    let probes = probe_pairs(&space, ctx.probes(), 1.0, ctx.stream(STREAM_PROBES));
    let aperiodic_probes = space.sample_distinct(8, 1e-3, ctx.stream(STREAM_EXTRA))?;
    let plan = SetPlan {
        n: ctx.n(8),
        count: ctx.point_sets(20),
        min_sep: ctx.config.min_sep.unwrap_or(0.15),
        radius: 1.0,
        fixed: Vec::new(),
    };
    if ctx.config.min_sep.is_none() {
        ctx.convention("projection point sets keep points and their images 0.15 apart".into());
    }
    let p = Pipeline {
        c: &c,
        witness_at: Point::angle(0.0),
        generators,
        probes,
        aperiodic_probes,
        plan,
    };
    run_pipeline(ctx, &p)?;
    let outcome = (|| {
        let g = gram(
            &c.as_matrix,
            &[Point::angle(0.0), c.map.apply(&Point::angle(0.0))?],
        )?;
        let rank = crate::numcore::numeric_rank(&g, ctx.tol.pd_tol)?;
        Ok((rank == 3, json!({ "numeric_rank": rank, "dimension": 4 })))
    })();
    ctx.check("witness-rank", ANCHOR_CONSTRUCTION, outcome);
    Ok(())
}

fn gaussian_suite(ctx: &mut Ctx) -> Result<()> {
    let params = &ctx.config.parameters;
    let sigma = params.sigma.unwrap_or(cx::DEFAULT_SIGMA);
    let dim = params.z.as_ref().map_or(params.dim.unwrap_or(3), Vec::len);
    let z = params.z.clone().unwrap_or_else(|| {
        let mut e1 = vec![0.0; dim];
        e1[0] = 1.0;
        e1
    });
    if params.sigma.is_none() {
        ctx.convention(format!("sigma = {sigma}"));
    }
    if ctx.config.parameters.z.is_none() {
        ctx.convention("z = e1".into());
    }
    let c = match custom_counterexample(ctx)? {
        Some(c) => c,
        None => cx::gaussian_example(sigma, z)?,
    };
    let space = c.as_matrix.space.clone();
    let dim = match space.kind {
        crate::spaces::SpaceKind::Euclidean { dim } => dim,
        _ => return Err(Error::config("counterexample", "Euclidean space expected")),
    };
    let mut gr = rng(ctx.stream(STREAM_GENERATORS));
    let translations: Vec<_> = (0..10)
        .map(|_| {
            let t: Vec<f64> = (0..dim).map(|_| gr.random_range(-2.0..2.0)).collect();
            SymmetryMap::translation(t)
        })
        .collect::<Result<_>>()?;
    let radius = ctx.config.radius.unwrap_or(2.0);
    if ctx.config.radius.is_none() {
        ctx.convention("Euclidean points sampled from [-2, 2]^m".into());
    }
    let probes = probe_pairs(&space, ctx.probes(), radius, ctx.stream(STREAM_PROBES));
    let strict = Tolerances {
        resid_tol: 1e-12,
        ..ctx.tol
    };
    ctx.check(
        "translation-invariance-1e-12",
        ANCHOR_INVARIANCE,
        check_unitary_invariance(&c, &translations, &probes, &strict)
            .map(|e| (e.pass, invariance_json(&e, strict.resid_tol))),
    );
    let outcome = (|| {
        let a = cx::build_adjoint(&c.base, &c.map)?;
        let mut worst = 0.0f64;
        for (x, y) in &probes {
            worst = worst.max(max_abs(
                &(c.as_matrix.eval(x, y)? - a.as_matrix.eval(x, y)?),
            ));
        }
        Ok((
            worst == 0.0,
            json!({ "probes": probes.len(), "max_difference": worst }),
        ))
    })();
    ctx.check("adjoint-matches-unitary", ANCHOR_ADJOINT, outcome);

    let aperiodic_probes = Sampler::new(&space)
        .radius(radius)
        .sample(8, &mut rng(ctx.stream(STREAM_EXTRA)))?;
    let mut generators = translations;
    generators.push(c.map.clone());
    let x0 = Point::vector(vec![0.0; dim]);
    let plan = SetPlan {
        n: ctx.n(8),
        count: ctx.point_sets(20),
        min_sep: ctx.config.min_sep.unwrap_or(1e-3),
        radius,
        fixed: Vec::new(),
    };
    let p = Pipeline {
        c: &c,
        witness_at: x0,
        generators,
        probes,
        aperiodic_probes,
        plan,
    };
    run_pipeline(ctx, &p)
}

fn dot_suite(ctx: &mut Ctx) -> Result<()> {
    let r = ctx.config.parameters.r.unwrap_or(cx::DEFAULT_R);
    let dim = ctx.config.parameters.dim.unwrap_or(2);
    if ctx.config.parameters.r.is_none() {
        ctx.convention(format!("r = {r} (any r outside {{0, 1, -1}} qualifies)"));
    }
    let c = match custom_counterexample(ctx)? {
        Some(c) => c,
        None => cx::dot_product_example(dim, r)?,
    };
    let space = c.as_matrix.space.clone();
    let origin = match &c.variant {
        Variant::ShiftedAdjoint { origin } => origin.clone(),
        _ => Point::vector(vec![0.0; dim]),
    };
    let radius = ctx.config.radius.unwrap_or(1.0);
    let probes = probe_pairs(&space, ctx.probes(), radius, ctx.stream(STREAM_PROBES));
    let mut gr = rng(ctx.stream(STREAM_GENERATORS));
    let mut generators: Vec<_> = (0..10)
        .map(|_| {
            SymmetryMap::scaling(dim, gr.random_range(0.25..2.5)).map(SymmetryMap::self_adjoint)
        })
        .collect::<Result<_>>()?;
    generators.push(c.map.clone());

    if ctx.config.counterexample.is_none() {
        let outcome = (|| {
            let literal = cx::dot_product_literal(dim, r)?;
            let mut worst = 0.0f64;
            for (x, y) in &probes {
                let a = c.as_matrix.eval(x, y)?;
                let b = literal.eval(x, y)?;
                worst = worst.max(max_abs(&(&a - &b)) / max_abs(&b));
            }
            Ok((
                worst <= 1e-12,
                json!({ "probes": probes.len(), "max_relative_difference": worst }),
            ))
        })();
        ctx.check("literal-grid", ANCHOR_SHIFT, outcome);
    }

    let outcome = (|| {
        let unshifted = cx::build_adjoint(&c.base, &c.map)?;
        let at = std::slice::from_ref(&origin);
        let before = classify(&gram(&unshifted.as_matrix, at)?, &ctx.tol)?;
        let after = classify(&gram(&c.as_matrix, at)?, &ctx.tol)?;
        Ok((
            !before.is_positive_definite() && after.is_positive_definite(),
            json!({ "unshifted": verdict_json(&before), "shifted": verdict_json(&after) }),
        ))
    })();
    ctx.check("origin-block", ANCHOR_SHIFT, outcome);

    // The base kernel minus its value at the origin.
    let part1_sets = ctx.point_sets(20);
    let part1_n = ctx.n(10).min(10);
    let outcome = (|| {
        let k00 = c.base.eval(&origin, &origin)?.re;
        let l = c.base.offset(-k00);
        let plan = SetPlan {
            n: part1_n,
            count: part1_sets,
            min_sep: ctx.config.min_sep.unwrap_or(1e-3),
            radius,
            fixed: Vec::new(),
        };
        let sampler_avoid = SetPlan {
            fixed: vec![origin.clone()],
            n: part1_n + 1,
            ..copy_plan(&plan)
        };
        let sets = sample_sets(&space, None, &sampler_avoid, ctx.stream(STREAM_EXTRA))?;
        let mut worst = f64::INFINITY;
        let mut failures = 0;
        for s in &sets {
            let v = classify(&gram(&l, &s[1..])?, &ctx.tol)?;
            worst = worst.min(v.relative_min_eigenvalue());
            failures += usize::from(!v.is_positive_definite());
        }
        Ok((
            failures == 0,
            json!({
                "point_sets": sets.len(),
                "points_per_set": part1_n,
                "not_positive_definite": failures,
                "worst_relative_min_eigenvalue": worst,
                "k_origin": k00,
            }),
        ))
    })();
    ctx.check("part1-shift-strictness", ANCHOR_SHIFT, outcome);

    let aperiodic_probes = Sampler::new(&space)
        .radius(radius)
        .avoid(vec![origin.clone()])
        .min_sep(0.05)
        .sample(8, &mut rng(ctx.stream(STREAM_EXTRA + 1)))?;
    let mut e1 = vec![0.0; dim];
    e1[0] = 1.0;
    let plan = SetPlan {
        n: ctx.n(8),
        count: ctx.point_sets(20),
        min_sep: ctx.config.min_sep.unwrap_or(1e-3),
        radius,
        fixed: vec![origin],
    };
    let p = Pipeline {
        c: &c,
        witness_at: Point::vector(e1),
        generators,
        probes,
        aperiodic_probes,
        plan,
    };
    run_pipeline(ctx, &p)
}

fn sphere_suite(ctx: &mut Ctx) -> Result<()> {
    let theta = ctx.config.parameters.theta.unwrap_or(1.0);
    let dim = ctx.config.parameters.dim.unwrap_or(3);
    if ctx.config.parameters.theta.is_none() {
        ctx.convention(format!("theta = {theta}, base kernel e^<x,y>, q = {dim}"));
    }
    let c = match custom_counterexample(ctx)? {
        Some(c) => c,
        None => cx::complex_sphere_example(dim, theta)?,
    };
    let space = c.as_matrix.space.clone();
    let mut gr = rng(ctx.stream(STREAM_GENERATORS));
    let generators: Vec<_> = (0..10)
        .map(|_| SymmetryMap::complex_rotation(dim, gr.random_range(-3.0..3.0)))
        .chain(std::iter::once(Ok(c.map.clone())))
        .collect::<Result<_>>()?;
    let probes = probe_pairs(&space, ctx.probes(), 1.0, ctx.stream(STREAM_PROBES));
    let aperiodic_probes = space.sample_distinct(8, 1e-3, ctx.stream(STREAM_EXTRA))?;
    let witness_at = space.random_point(&mut rng(ctx.stream(STREAM_EXTRA + 1)), 1.0);
    let plan = SetPlan {
        n: ctx.n(6),
        count: ctx.point_sets(20),
        min_sep: ctx.config.min_sep.unwrap_or(0.3),
        radius: 1.0,
        fixed: Vec::new(),
    };
    if ctx.config.min_sep.is_none() {
        ctx.convention("projection point sets keep points and their images 0.3 apart".into());
    }
    let p = Pipeline {
        c: &c,
        witness_at,
        generators,
        probes,
        aperiodic_probes,
        plan,
    };
    run_pipeline(ctx, &p)?;
    for r in ctx.report.records.iter_mut() {
        if r.name == "aperiodicity" || r.name == "center" {
            r.anchor = ANCHOR_SPHERE.into();
        }
    }
    Ok(())
}

fn embed_suite(ctx: &mut Ctx) -> Result<()> {
    let rho = ctx.config.parameters.rho.unwrap_or(cx::DEFAULT_RHO);
    let c = match custom_counterexample(ctx)? {
        Some(c) => c,
        None => cx::circle_example(rho)?,
    };
    let filler = c.base.clone();
    let e = embed(&c.as_matrix, 3, &filler)?;
    let probes = probe_pairs(
        &c.as_matrix.space,
        ctx.probes(),
        1.0,
        ctx.stream(STREAM_PROBES),
    );
    let count = ctx.projections(30);
    let seed = ctx.stream(STREAM_PROJECTIONS);
    let outcome = (|| {
        let mut worst = 0.0f64;
        for k in 0..count {
            let mut v = random_vector(2, &mut rng(sub_seed(seed, k as u64)));
            let small = c.as_matrix.project(&v)?;
            v.push(Complex::new(0.0, 0.0));
            let big = e.project(&v)?;
            for (x, y) in &probes {
                let a = small.eval(x, y)?;
                let b = big.eval(x, y)?;
                worst = worst.max((a - b).norm() / a.norm().max(1.0));
            }
        }
        Ok((
            worst <= 1e-12,
            json!({ "vectors": count, "probes": probes.len(), "max_relative_difference": worst, "threshold": 1e-12 }),
        ))
    })();
    ctx.check("projection-match", ANCHOR_EMBED, outcome);

    let outcome = (|| {
        let e3 = e.project(&[
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(1.0, 0.0),
        ])?;
        let mut worst = 0.0f64;
        for (x, y) in &probes {
            worst = worst.max((e3.eval(x, y)? - filler.eval(x, y)?).norm());
        }
        Ok((
            worst == 0.0,
            json!({ "probes": probes.len(), "max_difference": worst }),
        ))
    })();
    ctx.check("filler-projection", ANCHOR_EMBED, outcome);

    let outcome = (|| {
        let x = Point::angle(0.0);
        let pts = vec![x.clone(), c.map.apply(&x)?];
        let verdict = classify(&gram(&e, &pts)?, &ctx.tol)?;
        Ok((
            verdict.kind == PdKind::PositiveSemidefiniteDegenerate,
            verdict_json(&verdict),
        ))
    })();
    ctx.check("embedded-degenerate", ANCHOR_EMBED, outcome);
    Ok(())
}

fn negative_suite(ctx: &mut Ctx) -> Result<()> {
    let tol = ctx.tol;
    let count = ctx.projections(20);
    let seed = ctx.stream(STREAM_PROJECTIONS);

    // Rotation by pi has period two.
    let c = cx::build_unitary(
        &ScalarKernel::circle_exp_cos(),
        &SymmetryMap::circle_rotation(std::f64::consts::PI),
    )?;
    let x = Point::angle(0.0);
    ctx.observe(
        "periodic-map-detected",
        ANCHOR_CONVERSE,
        check_aperiodic(&c.map, std::slice::from_ref(&x), 4).map(|ev| {
            (
                !ev.no_counterexample(),
                serde_json::to_value(&ev).unwrap_or(Value::Null),
            )
        }),
    );
    let outcome = (|| {
        let orbit = vec![x.clone(), c.map.apply(&x)?];
        let extra = Sampler::new(&c.as_matrix.space)
            .min_sep(0.15)
            .avoid(orbit.clone())
            .sample(ctx.n(4), &mut rng(ctx.stream(STREAM_SETS)))?;
        let mut set = orbit;
        set.extend(extra);
        let mut vs = vec![
            vec![Complex::new(1.0, 0.0), Complex::new(1.0, 0.0)],
            vec![Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)],
        ];
        vs.extend((0..count).map(|k| random_vector(2, &mut rng(sub_seed(seed, k as u64)))));
        let mut degenerate = Vec::new();
        for (k, v) in vs.iter().enumerate() {
            let verdict = classify(&gram(&c.as_matrix.project(v)?, &set)?, &tol)?;
            if !verdict.is_positive_definite() {
                degenerate.push(
                    json!({ "index": k, "v": vec_json(v), "verdict": verdict_json(&verdict) }),
                );
            }
        }
        Ok((
            !degenerate.is_empty(),
            json!({ "projections": vs.len(), "points": set.len(), "degenerate": degenerate }),
        ))
    })();
    ctx.observe("periodic-projection-degenerate", ANCHOR_CONVERSE, outcome);

    // Scaling by zero collapses every point to the origin.
    let outcome = (|| {
        let space = Space::euclidean(2)?;
        let phi = SymmetryMap::scaling(2, 0.0)?;
        let c = cx::build_unitary(&ScalarKernel::gaussian(2, 1.0)?, &phi)?;
        let set = Sampler::new(&space)
            .min_sep(0.05)
            .avoid(vec![Point::vector(vec![0.0, 0.0])])
            .sample(ctx.n(4), &mut rng(ctx.stream(STREAM_SETS + 10)))?;
        let injective = check_injective_on(&phi, &set)?;
        let mut vs = vec![vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)]];
        vs.extend((0..count).map(|k| random_vector(2, &mut rng(sub_seed(seed ^ 1, k as u64)))));
        let mut degenerate = Vec::new();
        for (k, v) in vs.iter().enumerate() {
            let verdict = classify(&gram(&c.as_matrix.project(v)?, &set)?, &tol)?;
            if !verdict.is_positive_definite() {
                degenerate.push(
                    json!({ "index": k, "v": vec_json(v), "verdict": verdict_json(&verdict) }),
                );
            }
        }
        Ok((
            !injective && !degenerate.is_empty(),
            json!({ "injective": injective, "projections": vs.len(), "points": set.len(), "degenerate": degenerate }),
        ))
    })();
    ctx.observe(
        "non-injective-projection-degenerate",
        ANCHOR_CONVERSE,
        outcome,
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// Orbit decomposition

/// Reference answer computed by direct enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitOracle {
    pub f: Vec<usize>,
    pub tau: Vec<(usize, usize)>,
    /// Indices into `points ++ images` of the distinct elements of the union.
    pub union_size: usize,
}

pub fn orbit_oracle(phi: &SymmetryMap<f64>, points: &[Point<f64>]) -> Result<OrbitOracle> {
    let space = &phi.space;
    let images = points
        .iter()
        .map(|x| phi.apply(x))
        .collect::<Result<Vec<_>>>()?;
    let mut f = Vec::new();
    let mut tau = Vec::new();
    for (mu, y) in images.iter().enumerate() {
        for (nu, x) in points.iter().enumerate() {
            if space.points_equal(y, x)? {
                f.push(mu);
                tau.push((mu, nu));
            }
        }
    }
    let mut distinct: Vec<&Point<f64>> = Vec::new();
    for p in points.iter().chain(&images) {
        let mut seen = false;
        for q in &distinct {
            if space.points_equal(p, q)? {
                seen = true;
                break;
            }
        }
        if !seen {
            distinct.push(p);
        }
    }
    Ok(OrbitOracle {
        f,
        tau,
        union_size: distinct.len(),
    })
}

fn orbit_family_instance(
    phi: &SymmetryMap<f64>,
    r: &mut Rng,
    draw: &dyn Fn(&mut Rng) -> Point<f64>,
) -> Result<Vec<Point<f64>>> {
    let n = r.random_range(1..=10usize);
    let mut points: Vec<Point<f64>> = Vec::with_capacity(n);
    let space = &phi.space;
    while points.len() < n {
        let len = r.random_range(1..=(n - points.len()));
        let mut chain = vec![draw(r)];
        for _ in 1..len {
            let next = phi.apply(chain.last().unwrap())?;
            chain.push(next);
        }
        let mut ok = true;
        for p in &chain {
            for q in points
                .iter()
                .chain(chain.iter().filter(|c| !std::ptr::eq(*c, p)))
            {
                if space.distance(p, q)? < 1e-6 {
                    ok = false;
                }
            }
            // images must stay separated from non-chain points too
            let fp = phi.apply(p)?;
            for q in &points {
                let d = space.distance(&fp, q)?;
                if d < 1e-6 && d > 0.0 {
                    ok = false;
                }
            }
        }
        if ok {
            points.extend(chain);
        }
    }
    // Shuffle so chains are not contiguous.
    for i in (1..points.len()).rev() {
        let j = r.random_range(0..=i);
        points.swap(i, j);
    }
    Ok(points)
}

/// Compares one decomposition with the oracle; returns mismatch descriptions.
pub fn compare_orbit(phi: &SymmetryMap<f64>, points: &[Point<f64>]) -> Result<Vec<String>> {
    let oracle = orbit_oracle(phi, points)?;
    let d = orbit_decompose(phi, points)?;
    let space = &phi.space;
    let mut problems = Vec::new();
    if d.f != oracle.f {
        problems.push(format!("F {:?} vs {:?}", d.f, oracle.f));
    }
    if d.tau != oracle.tau {
        problems.push(format!("tau {:?} vs {:?}", d.tau, oracle.tau));
    }
    let n = points.len();
    if d.m + d.p != n || d.m >= n {
        problems.push(format!("m = {}, p = {}, n = {n}", d.m, d.p));
    }
    if d.z_points.len() != d.m + 2 * d.p || d.z_points.len() != oracle.union_size {
        problems.push(format!(
            "|z| = {}, m + 2p = {}, union = {}",
            d.z_points.len(),
            d.m + 2 * d.p,
            oracle.union_size
        ));
    }
    let images = points
        .iter()
        .map(|x| phi.apply(x))
        .collect::<Result<Vec<_>>>()?;
    for z in &d.z_points {
        let mut found = false;
        for p in points.iter().chain(&images) {
            found |= space.points_equal(z, p)?;
        }
        if !found {
            problems.push(format!("{z:?} not in the union"));
        }
    }
    if let Some((i, j)) = space.find_duplicate(&d.z_points)? {
        problems.push(format!("z points {i} and {j} coincide"));
    }
    for (k, src) in d.sources.iter().enumerate() {
        let expected = match src {
            Source::Image(mu) => &images[*mu],
            Source::Original(mu) => &points[*mu],
        };
        if !space.points_equal(&d.z_points[k], expected)? {
            problems.push(format!("z[{k}] does not match its source"));
        }
    }
    for &mu in &oracle.f {
        if d.escape_depth(mu).is_none() {
            problems.push(format!("index {mu} never leaves F"));
        }
    }
    Ok(problems)
}

fn orbit_suite(ctx: &mut Ctx) -> Result<()> {
    let instances = ctx.instances(200);
    type Draw = Box<dyn Fn(&mut Rng) -> Point<f64> + Sync>;
    let families: Vec<(&str, SymmetryMap<f64>, Draw)> = vec![
        (
            "translation",
            SymmetryMap::translation(vec![1.0])?,
            Box::new(|r: &mut Rng| Point::vector(vec![r.random_range(-5.0..5.0)])),
        ),
        (
            "scaling",
            SymmetryMap::scaling(1, 2.0)?,
            Box::new(|r: &mut Rng| {
                let s: f64 = r.random_range(0.1..3.0);
                Point::vector(vec![if r.random_bool(0.5) { s } else { -s }])
            }),
        ),
        (
            "rotation",
            SymmetryMap::circle_rotation(1.0),
            Box::new(|r: &mut Rng| {
                Point::angle(r.random_range(-std::f64::consts::PI..std::f64::consts::PI))
            }),
        ),
    ];
    let examples = (|| {
        let mut problems = Vec::new();
        let t = SymmetryMap::translation(vec![1.0])?;
        let pts: Vec<_> = [0.0, 1.0, 2.0, 5.0]
            .iter()
            .map(|&x| Point::vector(vec![x]))
            .collect();
        problems.extend(compare_orbit(&t, &pts)?);
        let rot = SymmetryMap::circle_rotation(1.0);
        problems.extend(compare_orbit(
            &rot,
            &[Point::angle(0.0), Point::angle(2.0)],
        )?);
        let s = SymmetryMap::scaling(1, 2.0)?;
        let pts: Vec<_> = [1.0, 2.0, 4.0]
            .iter()
            .map(|&x| Point::vector(vec![x]))
            .collect();
        problems.extend(compare_orbit(&s, &pts)?);
        Ok((problems.is_empty(), json!({ "mismatches": problems })))
    })();
    ctx.check("worked-examples", ANCHOR_ORBIT, examples);
    for (idx, (name, phi, draw)) in families.iter().enumerate() {
        let seed = sub_seed(ctx.stream(STREAM_SETS), idx as u64);
        let results: Vec<Result<Vec<String>>> = (0..instances)
            .into_par_iter()
            .map(|i| {
                let mut r = rng(sub_seed(seed, i as u64));
                let pts = orbit_family_instance(phi, &mut r, draw.as_ref())?;
                compare_orbit(phi, &pts)
            })
            .collect();
        let outcome = (|| {
            let mut mismatched = 0;
            let mut first = Vec::new();
            for res in results {
                let problems = res?;
                if !problems.is_empty() {
                    mismatched += 1;
                    if first.is_empty() {
                        first = problems;
                    }
                }
            }
            Ok((
                mismatched == 0,
                json!({ "instances": instances, "mismatched_instances": mismatched, "first_mismatch": first }),
            ))
        })();
        ctx.check(&format!("oracle/{name}"), ANCHOR_ORBIT, outcome);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Finite abelian groups

/// Groups of order at most 24 used when no group is configured.
pub const DEFAULT_GROUPS: &[&[u32]] = &[
    &[2],
    &[3],
    &[4],
    &[5],
    &[6],
    &[8],
    &[12],
    &[24],
    &[2, 2],
    &[2, 3],
    &[2, 4],
    &[3, 3],
    &[2, 6],
    &[3, 4],
    &[2, 2, 2],
    &[2, 2, 3],
    &[4, 6],
    &[2, 3, 4],
    &[2, 12],
    &[2, 2, 6],
];

/// A random spectrum; each coefficient is singular with probability `p_zero`.
pub fn random_spectrum(
    group: &Space<f64>,
    ell: usize,
    p_zero: f64,
    r: &mut Rng,
) -> Result<FourierSpectrum<f64>> {
    let order = group.order().ok_or(Error::WrongSpaceKind {
        expected: "finite abelian group",
    })?;
    if ell == 1 {
        let a = (0..order)
            .map(|_| {
                if r.random_bool(p_zero) {
                    0.0
                } else {
                    r.random_range(0.1..1.0)
                }
            })
            .collect();
        return FourierSpectrum::scalar(group.clone(), a);
    }
    let mats = (0..order)
        .map(|_| {
            let rank = if r.random_bool(p_zero) {
                r.random_range(0..ell)
            } else {
                ell
            };
            let mut m = nalgebra::DMatrix::<Complex<f64>>::zeros(ell, ell);
            for _ in 0..rank {
                let u = random_vector(ell, r);
                let w: f64 = r.random_range(0.2..1.0) / crate::scalar::norm(&u).powi(2);
                for i in 0..ell {
                    for j in 0..ell {
                        m[(i, j)] += u[i] * u[j].conj() * w;
                    }
                }
            }
            if rank == ell {
                // Keep the smallest eigenvalue well away from the threshold.
                for i in 0..ell {
                    m[(i, i)] += Complex::new(0.1, 0.0);
                }
            }
            HermitianMatrix::new(m)
        })
        .collect::<Result<Vec<_>>>()?;
    FourierSpectrum::matrix(group.clone(), mats)
}

fn groups_for(ctx: &Ctx) -> Result<Vec<Space<f64>>> {
    match &ctx.config.group {
        Some(m) => Ok(vec![Space::finite_abelian(m.clone())?]),
        None => DEFAULT_GROUPS
            .iter()
            .map(|m| Space::finite_abelian(m.to_vec()))
            .collect(),
    }
}

fn max_matrix_diff(
    a: &[nalgebra::DMatrix<Complex<f64>>],
    b: &[nalgebra::DMatrix<Complex<f64>>],
) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| max_abs(&(x - y)))
        .fold(0.0, f64::max)
}

/// Group size, ell, roundtrip residual, Parseval gap, projection gap.
type RoundtripSample = (usize, usize, f64, Option<f64>, Option<f64>);

fn roundtrip_suite(ctx: &mut Ctx) -> Result<()> {
    let groups = groups_for(ctx)?;
    let instances = ctx.instances(100);
    let seed = ctx.stream(STREAM_SETS);
    let synth_tol = f64::SYNTH_TOL;

    let examples = (|| {
        let z2 = Space::finite_abelian(vec![2])?;
        let one = Complex::new(1.0, 0.0);
        let zero = Complex::new(0.0, 0.0);
        let a = analyze(&[one, zero], &z2)?;
        let s = synthesize(&FourierSpectrum::scalar(z2.clone(), vec![0.5, 0.5])?)?;
        let psi = s.scalar_values();
        let g1 = Point::FiniteAbelian(vec![1]);
        let xi = character(&g1, &g1, &z2)?;
        let pass = (a.raw[0] - 0.5).norm() < 1e-15
            && (a.raw[1] - 0.5).norm() < 1e-15
            && (psi[0] - one).norm() < 1e-15
            && psi[1].norm() < 1e-15
            && (xi + one).norm() < 1e-15;
        Ok((
            pass,
            json!({ "analysis": vec_json(&a.raw), "synthesis": vec_json(&psi), "xi_1(1)": [xi.re, xi.im] }),
        ))
    })();
    ctx.check("z2-examples", ANCHOR_FOURIER, examples);

    let results: Vec<Result<RoundtripSample>> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let group = &groups[i % groups.len()];
            let ell = 1 + i % 3;
            let mut r = rng(sub_seed(seed, i as u64));
            let spectrum = random_spectrum(group, ell, 0.2, &mut r)?;
            let synth = synthesize(&spectrum)?;
            let back = analyze_matrix(synth.values(), group)?;
            let residual = max_matrix_diff(&back, &spectrum.coefficient_matrices());
            let (parseval, projection) = if ell == 1 {
                let a = match spectrum.coefficients() {
                    Coefficients::Scalar(a) => a.iter().sum::<f64>(),
                    Coefficients::Matrix(_) => unreachable!(),
                };
                (Some((a - synth.scalar_values()[0]).norm()), None)
            } else {
                let v = random_vector(ell, &mut r);
                let kv = synth.kernel().project(&v)?;
                let zero = group.element_at(0)?;
                let psi_v: Vec<Complex<f64>> = group
                    .group_elements()?
                    .iter()
                    .map(|x| kv.eval(x, &zero))
                    .collect::<Result<_>>()?;
                let raw = analyze(&psi_v, group)?.raw;
                let expected = match spectrum.project(&v)?.coefficients() {
                    Coefficients::Scalar(a) => a.clone(),
                    Coefficients::Matrix(_) => unreachable!(),
                };
                let diff = raw
                    .iter()
                    .zip(&expected)
                    .map(|(z, a)| (z - a).norm())
                    .fold(0.0, f64::max);
                (None, Some(diff))
            };
            Ok((
                group.order().unwrap_or(0),
                ell,
                residual,
                parseval,
                projection,
            ))
        })
        .collect();

    let outcome = (|| {
        let mut worst = 0.0f64;
        let mut worst_parseval = 0.0f64;
        let mut worst_projection = 0.0f64;
        let mut counts = [0usize; 3];
        for res in results {
            let (_, ell, residual, parseval, projection) = res?;
            counts[ell - 1] += 1;
            worst = worst.max(residual);
            worst_parseval = worst_parseval.max(parseval.unwrap_or(0.0));
            worst_projection = worst_projection.max(projection.unwrap_or(0.0));
        }
        Ok((worst, worst_parseval, worst_projection, counts))
    })();
    match outcome {
        Ok((worst, parseval, projection, counts)) => {
            ctx.check(
                "roundtrip",
                ANCHOR_FOURIER,
                Ok((worst < synth_tol, json!({ "instances": instances, "by_ell": counts, "max_residual": worst, "threshold": synth_tol }))),
            );
            ctx.check(
                "parseval",
                ANCHOR_FOURIER,
                Ok((parseval < synth_tol, json!({ "scalar_instances": counts[0], "max_residual": parseval, "threshold": synth_tol }))),
            );
            ctx.check(
                "projection-consistency",
                ANCHOR_PROJ_EQ,
                Ok((projection < synth_tol, json!({ "matrix_instances": counts[1] + counts[2], "max_residual": projection, "threshold": synth_tol }))),
            );
        }
        Err(e) => ctx.check("roundtrip", ANCHOR_FOURIER, Err(e)),
    }

    let outcome = (|| {
        let mut worst = 0.0f64;
        for g in &groups {
            let table = crate::abelian::character_table(g)?;
            let order = table.len() as f64;
            for (a, row_a) in table.iter().enumerate() {
                for (b, row_b) in table.iter().enumerate() {
                    let s: Complex<f64> = row_a.iter().zip(row_b).map(|(x, y)| x * y.conj()).sum();
                    let delta = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((s / order - delta).norm());
                }
            }
        }
        Ok((
            worst <= 1e-12,
            json!({ "groups": groups.len(), "max_deviation": worst, "threshold": 1e-12 }),
        ))
    })();
    ctx.check("character-orthogonality", ANCHOR_FOURIER, outcome);
    Ok(())
}

fn strictness_suite(ctx: &mut Ctx) -> Result<()> {
    let groups = groups_for(ctx)?;
    let instances = ctx.instances(100);
    let seed = ctx.stream(STREAM_SETS);
    let tol = ctx.tol;
    let strict_tol = ctx.strict_tol;
    let subset_n = ctx.config.n;

    let examples = (|| {
        let z2 = Space::finite_abelian(vec![2])?;
        let half = FourierSpectrum::scalar(z2.clone(), vec![0.5, 0.5])?;
        let constant = FourierSpectrum::scalar(z2.clone(), vec![1.0, 0.0])?;
        let z3 = Space::finite_abelian(vec![3])?;
        let ident = FourierSpectrum::matrix(z3, vec![HermitianMatrix::identity(2); 3])?;
        let v_half = brute_force_strict_with(&synthesize(&half)?.kernel(), &tol)?;
        let v_const = brute_force_strict_with(&synthesize(&constant)?.kernel(), &tol)?;
        let v_ident = brute_force_strict_with(&synthesize(&ident)?.kernel(), &tol)?;
        let pass = strict_criterion_with(&half, strict_tol, &tol)
            && !strict_criterion_with(&constant, strict_tol, &tol)
            && strict_criterion_with(&ident, strict_tol, &tol)
            && v_half.kind == PdKind::PositiveDefinite
            && v_const.kind == PdKind::PositiveSemidefiniteDegenerate
            && v_ident.kind == PdKind::PositiveDefinite;
        Ok((
            pass,
            json!({ "half": verdict_json(&v_half), "constant": verdict_json(&v_const), "identity_z3": verdict_json(&v_ident) }),
        ))
    })();
    ctx.check("worked-examples", ANCHOR_STRICT, examples);

    type Row = (usize, bool, PdKind, f64, Option<bool>, Option<bool>);
    let results: Vec<Result<Row>> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let group = &groups[i % groups.len()];
            let ell = 1 + i % 3;
            let mut r = rng(sub_seed(seed, i as u64));
            let p_zero = if ell == 1 { 0.05 } else { 0.1 };
            let spectrum = random_spectrum(group, ell, p_zero, &mut r)?;
            let criterion = strict_criterion_with(&spectrum, strict_tol, &tol);
            let kernel = synthesize(&spectrum)?.kernel();
            let verdict = brute_force_strict_with(&kernel, &tol)?;
            // Projections: a random v for strict spectra, a null vector of a
            // singular coefficient otherwise.
            let projection = if ell > 1 {
                let v = if criterion {
                    Some(random_vector(ell, &mut r))
                } else {
                    match spectrum.coefficients() {
                        Coefficients::Matrix(ms) => ms
                            .iter()
                            .find_map(|m| {
                                classify(m, &tol).ok().filter(|v| !v.is_positive_definite())
                            })
                            .and_then(|v| v.null_vectors.first().cloned()),
                        Coefficients::Scalar(_) => None,
                    }
                };
                match v {
                    Some(v) => {
                        let pv = spectrum.project(&v)?;
                        let crit_v = strict_criterion_with(&pv, strict_tol, &tol);
                        let brute_v = brute_force_strict_with(
                            &MatrixKernel::new(group.clone(), vec![vec![kernel.project(&v)?]])?,
                            &tol,
                        )?;
                        Some(crit_v == criterion && brute_v.is_positive_definite() == criterion)
                    }
                    None => Some(false),
                }
            } else {
                None
            };
            let subset = match subset_n {
                Some(n) if criterion && n <= group.order().unwrap_or(0) => {
                    let pts = group.sample_distinct(n, 1.0, sub_seed(seed ^ 0x5eed, i as u64))?;
                    Some(classify(&gram(&kernel, &pts)?, &tol)?.is_positive_definite())
                }
                _ => None,
            };
            Ok((
                ell,
                criterion,
                verdict.kind,
                verdict.relative_min_eigenvalue(),
                projection,
                subset,
            ))
        })
        .collect();

    let outcome: Result<Vec<Row>> = results.into_iter().collect();
    match outcome {
        Ok(rows) => {
            let mut disagreements = 0;
            let mut strict = [0usize; 3];
            let mut non_strict = [0usize; 3];
            let mut worst_strict = f64::INFINITY;
            let mut worst_degenerate = 0.0f64;
            for (ell, criterion, kind, rel, _, _) in &rows {
                let agree = if *criterion {
                    *kind == PdKind::PositiveDefinite
                } else {
                    *kind == PdKind::PositiveSemidefiniteDegenerate
                };
                disagreements += usize::from(!agree);
                if *criterion {
                    strict[ell - 1] += 1;
                    worst_strict = worst_strict.min(*rel);
                } else {
                    non_strict[ell - 1] += 1;
                    worst_degenerate = worst_degenerate.max(rel.abs());
                }
            }
            ctx.check(
                "criterion-vs-gram",
                ANCHOR_STRICT,
                Ok((
                    disagreements == 0,
                    json!({
                        "instances": rows.len(),
                        "disagreements": disagreements,
                        "strict_by_ell": strict,
                        "non_strict_by_ell": non_strict,
                        "smallest_strict_relative_min_eigenvalue": worst_strict,
                        "largest_degenerate_relative_min_eigenvalue": worst_degenerate,
                    }),
                )),
            );
            let proj: Vec<bool> = rows.iter().filter_map(|r| r.4).collect();
            let bad = proj.iter().filter(|ok| !**ok).count();
            ctx.check(
                "projection-equivalence",
                ANCHOR_PROJ_EQ,
                Ok((
                    bad == 0,
                    json!({ "matrix_instances": proj.len(), "disagreements": bad }),
                )),
            );
            if let Some(n) = subset_n {
                let sub: Vec<bool> = rows.iter().filter_map(|r| r.5).collect();
                let bad = sub.iter().filter(|ok| !**ok).count();
                ctx.check(
                    "subset-strictness",
                    ANCHOR_STRICT,
                    Ok((bad == 0, json!({ "points_per_subset": n, "strict_instances": sub.len(), "not_positive_definite": bad }))),
                );
            }
        }
        Err(e) => ctx.check("criterion-vs-gram", ANCHOR_STRICT, Err(e)),
    }
    Ok(())
}
