use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex;
use serde_json::{json, Value};

use matkern::abelian::{analyze, analyze_matrix, strict_criterion, synthesize, FourierSpectrum};
use matkern::counterexample::CounterexampleConfig;
use matkern::error::{Error, Result};
use matkern::harness::{emit_report, run_suite, Format, SuiteConfig, SUITES};
use matkern::kernels::{gram, MatrixKernel, ScalarKernel};
use matkern::numcore::{classify, HermitianMatrix, Tolerances};
use matkern::spaces::{Point, Space};
use matkern::symmetry::{orbit_decompose, SymmetryMap};

#[derive(Parser)]
#[command(
    name = "matkern",
    version,
    about = "Matrix-valued positive definite kernel checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and print its report.
    Verify {
        suite: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
    /// List the available suites.
    ListSuites,
    /// Gram matrix of a kernel over a list of points, with its PD verdict.
    Gram {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        points: PathBuf,
    },
    /// Orbit decomposition of a point list under a map.
    Orbit {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        points: PathBuf,
    },
    /// Fourier analysis or synthesis on Z_q1 x ... x Z_ql.
    Fourier {
        #[arg(value_enum)]
        direction: Direction,
        /// Comma-separated moduli, e.g. 3,4.
        #[arg(long, value_delimiter = ',', required = true)]
        group: Vec<u32>,
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Analyze,
    Synthesize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::config(path.display().to_string(), e.to_string()))
}

fn from_value<T: serde::de::DeserializeOwned>(value: Value, field: &str) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::config(field, e.to_string()))
}

fn pretty(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("plain JSON")
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Verify {
            suite,
            config,
            seed,
            format,
        } => {
            let mut cfg = match config {
                Some(path) => from_value::<SuiteConfig>(read_json(&path)?, "config")?,
                None => SuiteConfig::default(),
            };
            match &cfg.suite {
                Some(s) if *s != suite => {
                    return Err(Error::config(
                        "suite",
                        format!("config names '{s}' but '{suite}' was requested"),
                    ))
                }
                _ => cfg.suite = Some(suite),
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let report = run_suite(&cfg)?;
            let format = match format {
                OutputFormat::Json => Format::Json,
                OutputFormat::Text => Format::Text,
            };
            print!("{}", emit_report(&report, format));
            if format == Format::Json {
                println!();
            }
            Ok(report.exit_code() as u8)
        }
        Command::ListSuites => {
            for (id, about) in SUITES {
                println!("{id:<22} {about}");
            }
            Ok(0)
        }
        Command::Gram { kernel, points } => {
            let kernel = read_json(&kernel)?;
            let matrix = parse_kernel(kernel)?;
            let pts = parse_points(&matrix.space, &read_json(&points)?)?;
            let g = gram(&matrix, &pts)?;
            let verdict = classify(&g, &Tolerances::default())?;
            println!(
                "{}",
                pretty(
                    &json!({ "dimension": g.dim(), "ell": matrix.ell, "gram": g, "verdict": verdict })
                )
            );
            Ok(0)
        }
        Command::Orbit { map, points } => {
            let phi: SymmetryMap<f64> = from_value(read_json(&map)?, "map")?;
            phi.validate()?;
            let pts = parse_points(&phi.space, &read_json(&points)?)?;
            let d = orbit_decompose(&phi, &pts)?;
            println!("{}", pretty(&serde_json::to_value(&d).expect("plain data")));
            Ok(0)
        }
        Command::Fourier {
            direction,
            group,
            input,
        } => {
            let space = Space::<f64>::finite_abelian(group)?;
            let input = read_json(&input)?;
            match direction {
                Direction::Analyze => analyze_cmd(&space, &input),
                Direction::Synthesize => synthesize_cmd(&space, &input),
            }
        }
    }
}

/// A scalar kernel, a matrix kernel (`entries`) or a counterexample (`variant`).
fn parse_kernel(value: Value) -> Result<MatrixKernel<f64>> {
    if value.get("variant").is_some() {
        return from_value::<CounterexampleConfig<f64>>(value, "kernel")?.matrix_kernel();
    }
    if value.get("entries").is_some() {
        let mut value = value;
        if value.get("ell").is_none() {
            let ell = value["entries"].as_array().map_or(0, Vec::len);
            value["ell"] = json!(ell);
        }
        let k: MatrixKernel<f64> = from_value(value, "kernel")?;
        k.validate()?;
        return Ok(k);
    }
    let k: ScalarKernel<f64> = from_value(value, "kernel")?;
    k.validate()?;
    MatrixKernel::new(k.space.clone(), vec![vec![k]])
}

fn parse_points(space: &Space<f64>, value: &Value) -> Result<Vec<Point<f64>>> {
    value
        .as_array()
        .ok_or_else(|| Error::config("points", "expected a JSON array of points"))?
        .iter()
        .map(|p| space.parse_point(p))
        .collect()
}

fn parse_complex(v: &Value) -> Result<Complex<f64>> {
    if let Some(x) = v.as_f64() {
        return Ok(Complex::new(x, 0.0));
    }
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => match (re.as_f64(), im.as_f64()) {
            (Some(re), Some(im)) => Ok(Complex::new(re, im)),
            _ => Err(Error::config("input", format!("bad complex number {v}"))),
        },
        _ => Err(Error::config("input", format!("bad complex number {v}"))),
    }
}

/// A number, a `[re, im]` pair, or a matrix given as rows of those.
enum Entry {
    Scalar(Complex<f64>),
    Matrix(Vec<Vec<Complex<f64>>>),
}

fn parse_entry(v: &Value) -> Result<Entry> {
    if let Ok(z) = parse_complex(v) {
        return Ok(Entry::Scalar(z));
    }
    let rows = v
        .as_array()
        .ok_or_else(|| Error::config("input", format!("bad entry {v}")))?;
    Ok(Entry::Matrix(
        rows.iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| Error::config("input", format!("bad matrix row {row}")))?
                    .iter()
                    .map(parse_complex)
                    .collect()
            })
            .collect::<Result<_>>()?,
    ))
}

fn entries(input: &Value, key: &str) -> Result<Vec<Entry>> {
    let list = input.get(key).unwrap_or(input);
    list.as_array()
        .ok_or_else(|| Error::config("input", "expected an array of values"))?
        .iter()
        .map(parse_entry)
        .collect()
}

fn to_matrix(rows: &[Vec<Complex<f64>>]) -> Result<nalgebra::DMatrix<Complex<f64>>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) || n == 0 {
        return Err(Error::NotSquare {
            rows: n,
            cols: rows.first().map_or(0, Vec::len),
        });
    }
    Ok(nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn matrix_json(m: &nalgebra::DMatrix<Complex<f64>>) -> Value {
    json!((0..m.nrows())
        .map(|i| (0..m.ncols())
            .map(|j| [m[(i, j)].re, m[(i, j)].im])
            .collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn analyze_cmd(space: &Space<f64>, input: &Value) -> Result<u8> {
    let values = entries(input, "values")?;
    if values.iter().all(|e| matches!(e, Entry::Scalar(_))) {
        let psi: Vec<Complex<f64>> = values
            .iter()
            .map(|e| match e {
                Entry::Scalar(z) => *z,
                Entry::Matrix(_) => unreachable!(),
            })
            .collect();
        let analysis = analyze(&psi, space)?;
        let strict = analysis.spectrum(space).ok().map(|s| strict_criterion(&s));
        println!(
            "{}",
            pretty(&json!({
                "group": space.moduli(),
                "coefficients": analysis.raw.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "min_coefficient": analysis.min_coefficient,
                "max_imaginary": analysis.max_imaginary,
                "non_pd_evidence": analysis.non_pd_evidence,
                "strictly_positive_definite": strict,
            }))
        );
    } else {
        let psi = values
            .iter()
            .map(|e| match e {
                Entry::Matrix(rows) => to_matrix(rows),
                Entry::Scalar(z) => to_matrix(&[vec![*z]]),
            })
            .collect::<Result<Vec<_>>>()?;
        let coeffs = analyze_matrix(&psi, space)?;
        let strict = coeffs
            .iter()
            .map(|m| HermitianMatrix::new(m.clone()))
            .collect::<Result<Vec<_>>>()
            .and_then(|ms| FourierSpectrum::matrix(space.clone(), ms))
            .ok()
            .map(|s| strict_criterion(&s));
        println!(
            "{}",
            pretty(&json!({
                "group": space.moduli(),
                "coefficients": coeffs.iter().map(matrix_json).collect::<Vec<_>>(),
                "strictly_positive_definite": strict,
            }))
        );
    }
    Ok(0)
}

fn synthesize_cmd(space: &Space<f64>, input: &Value) -> Result<u8> {
    let coeffs = entries(input, "coefficients")?;
    let spectrum = if coeffs.iter().all(|e| matches!(e, Entry::Scalar(_))) {
        let a = coeffs
            .iter()
            .map(|e| match e {
                Entry::Scalar(z) if z.im == 0.0 => Ok(z.re),
                _ => Err(Error::config(
                    "coefficients",
                    "scalar coefficients must be real",
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        FourierSpectrum::scalar(space.clone(), a)?
    } else {
        let ms = coeffs
            .iter()
            .map(|e| match e {
                Entry::Matrix(rows) => HermitianMatrix::new(to_matrix(rows)?),
                Entry::Scalar(_) => Err(Error::config(
                    "coefficients",
                    "mixed scalar and matrix coefficients",
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        FourierSpectrum::matrix(space.clone(), ms)?
    };
    let synth = synthesize(&spectrum)?;
    let values: Vec<Value> = if synth.ell() == 1 {
        synth
            .scalar_values()
            .iter()
            .map(|z| json!([z.re, z.im]))
            .collect()
    } else {
        synth.values().iter().map(matrix_json).collect()
    };
    println!(
        "{}",
        pretty(&json!({
            "group": space.moduli(),
            "values": values,
            "strictly_positive_definite": strict_criterion(&spectrum),
        }))
    );
    Ok(0)
}
