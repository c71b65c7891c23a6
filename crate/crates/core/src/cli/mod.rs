//! Command-line surface: file formats, the randomized `verify` suites and the
//! `matfunc` experiment driver.

mod suites;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::{Deserialize, Serialize};

use crate::blockenc::BlockEncoding;
use crate::circuits::QUBIT_CAP;
use crate::error::Error;
use crate::linalg::{dilate_to_unitary, min_singular_value, qubits_of, spectral_norm, CMatrix, CVector, C64};
use crate::matfunc::{
    build_FM_encoding, build_fM_encoding, f_M_dense, CircleContour, QuadratureScheme, ScalarFunction,
};
use crate::report::VerificationReport;
use crate::stateprep::build_sqrt_pair;

pub use suites::{cmd_verify, SuiteSummary, MIN_VERIFY_QUBITS, SUITES};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_CONTRACT: i32 = 4;

/// Failure of a CLI command, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("precondition violated: {0}")]
    Precondition(Error),
    #[error("contract check failed: {0}")]
    Contract(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Precondition(_) => EXIT_PRECONDITION,
            CliError::Contract(_) => EXIT_CONTRACT,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::SpectrumNotEnclosed { .. }
            | Error::Singular(_)
            | Error::BranchCut { .. }
            | Error::EigenvalueOutOfRange { .. }
            | Error::NegativeEigenvalue { .. }
            | Error::NormTooLarge { .. }
            | Error::NotHermitian { .. } => CliError::Precondition(e),
            Error::PairMismatch { .. } => CliError::Contract(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn config_err(context: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{context}: {e}"))
}

#[derive(Debug, Parser)]
#[command(name = "qmatfunc", version, about = "Block-encoding simulator and contract verifier for matrix functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the randomized contract suites over every combinator and pipeline.
    Verify(VerifyArgs),
    /// Build the block-encoding of a matrix function described by a config file.
    Matfunc(MatfuncArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long, default_value_t = 10)]
    pub max_qubits: usize,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub single_thread: bool,
}

#[derive(Debug, Args)]
pub struct MatfuncArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Report path; overrides the config's `output`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config's `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated node counts for a convergence table.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<usize>>,
    #[arg(long)]
    pub single_thread: bool,
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let single_thread = match &cli.command {
        Command::Verify(a) => a.single_thread,
        Command::Matfunc(a) => a.single_thread,
    };
    let outcome = with_threads(single_thread, || match cli.command {
        Command::Verify(args) => run_verify(&args),
        Command::Matfunc(args) => run_matfunc(&args),
    });
    match outcome {
        Ok(()) => EXIT_PASS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs `f` on a one-thread pool when `single_thread` is set.
pub fn with_threads<T: Send>(single_thread: bool, f: impl FnOnce() -> T + Send) -> T {
    if single_thread {
        match rayon::ThreadPoolBuilder::new().num_threads(1).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    } else {
        f()
    }
}

fn run_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let summaries = cmd_verify(args.seed, args.trials, args.max_qubits)?;
    emit(args.out.as_deref(), &to_json(&summaries)?)?;
    let failed: Vec<&str> = summaries.iter().filter(|s| !s.pass).map(|s| s.suite.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Contract(format!("suites failed: {}", failed.join(", "))))
    }
}

fn run_matfunc(args: &MatfuncArgs) -> Result<(), CliError> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let outcome = cmd_matfunc(&config)?;
    let out = args.out.clone().or_else(|| config.output.clone());
    emit(out.as_deref(), &to_json(&outcome.report)?)?;
    if let Some(list) = &args.sweep {
        let table = sweep(&config, list)?;
        let path = out.as_ref().map(|p| p.with_extension("csv"));
        emit(path.as_deref(), &sweep_csv(&table)?)?;
    }
    if outcome.report.pass {
        Ok(())
    } else {
        Err(CliError::Contract(format!(
            "measured error {:.6e} exceeds the claimed bound {:.6e}",
            outcome.report.measured_error_vs_fm, outcome.report.eta
        )))
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| config_err("serializing report", e))?;
    text.push('\n');
    Ok(text)
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| config_err(&format!("writing {}", p.display()), e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `[re, im]` as stored in every JSON file.
pub type ComplexPair = [f64; 2];

fn to_c64(p: ComplexPair) -> C64 {
    C64::new(p[0], p[1])
}

fn from_c64(z: C64) -> ComplexPair {
    [z.re, z.im]
}

/// `{"n": qubits, "entries": [[re, im], ...]}`, row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub entries: Vec<ComplexPair>,
}

impl MatrixFile {
    pub fn from_matrix(a: &CMatrix) -> Result<Self, CliError> {
        let n = qubits_of(a.rows())?;
        Ok(Self {
            n,
            entries: a.data().iter().copied().map(from_c64).collect(),
        })
    }

    pub fn to_matrix(&self) -> Result<CMatrix, CliError> {
        if self.n > QUBIT_CAP {
            return Err(CliError::Config(format!("matrix on {} qubits exceeds the cap", self.n)));
        }
        let dim = 1usize << self.n;
        if self.entries.len() != dim * dim {
            return Err(CliError::Config(format!(
                "matrix file declares n = {} but holds {} entries (expected {})",
                self.n,
                self.entries.len(),
                dim * dim
            )));
        }
        Ok(CMatrix::new(dim, dim, self.entries.iter().copied().map(to_c64).collect())?)
    }
}

pub fn load_matrix(path: &Path) -> Result<CMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|e| config_err(&format!("reading {}", path.display()), e))?;
    let file: MatrixFile =
        serde_json::from_str(&text).map_err(|e| config_err(&format!("parsing {}", path.display()), e))?;
    file.to_matrix()
}

pub fn save_matrix(path: &Path, a: &CMatrix) -> Result<(), CliError> {
    emit(Some(path), &to_json(&MatrixFile::from_matrix(a)?)?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureNode {
    pub w: ComplexPair,
    pub y: ComplexPair,
    pub z: ComplexPair,
}

/// `{"r": real, "nodes": [{"w", "y", "z"}, ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureFile {
    pub r: f64,
    pub nodes: Vec<QuadratureNode>,
}

impl QuadratureFile {
    pub fn from_scheme(q: &QuadratureScheme) -> Self {
        Self {
            r: q.r,
            nodes: (0..q.len())
                .map(|k| QuadratureNode {
                    w: from_c64(q.w[k]),
                    y: from_c64(q.y[k]),
                    z: from_c64(q.z[k]),
                })
                .collect(),
        }
    }

    pub fn to_scheme(&self) -> Result<QuadratureScheme, CliError> {
        let column = |f: fn(&QuadratureNode) -> ComplexPair| CVector(self.nodes.iter().map(|q| to_c64(f(q))).collect());
        Ok(QuadratureScheme::new(column(|q| q.w), column(|q| q.y), column(|q| q.z), self.r)?)
    }
}

pub fn load_quadrature(path: &Path) -> Result<QuadratureScheme, CliError> {
    let text = fs::read_to_string(path).map_err(|e| config_err(&format!("reading {}", path.display()), e))?;
    let file: QuadratureFile =
        serde_json::from_str(&text).map_err(|e| config_err(&format!("parsing {}", path.display()), e))?;
    file.to_scheme()
}

pub fn save_quadrature(path: &Path, q: &QuadratureScheme) -> Result<(), CliError> {
    emit(Some(path), &to_json(&QuadratureFile::from_scheme(q))?)
}

/// `"exp"`, `"log"`, `"inv_sqrt"`, or `{"center": [re, im], "coefficients": [[re, im], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Named(String),
    Polynomial {
        #[serde(default)]
        center: ComplexPair,
        coefficients: Vec<ComplexPair>,
    },
}

impl FunctionSpec {
    pub fn resolve(&self) -> Result<ScalarFunction, CliError> {
        match self {
            FunctionSpec::Named(name) => match name.as_str() {
                "exp" => Ok(ScalarFunction::Exp),
                "log" => Ok(ScalarFunction::Log),
                "inv_sqrt" => Ok(ScalarFunction::InvSqrt),
                other => Err(CliError::Config(format!("unknown function {other:?}"))),
            },
            FunctionSpec::Polynomial { center, coefficients } => {
                if coefficients.is_empty() {
                    return Err(CliError::Config("polynomial needs at least one coefficient".into()));
                }
                Ok(ScalarFunction::Polynomial {
                    center: to_c64(*center),
                    coefficients: coefficients.iter().copied().map(to_c64).collect(),
                })
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContourSpec {
    pub z0: ComplexPair,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(rename = "M")]
    pub points: usize,
    #[serde(rename = "L")]
    pub taylor_terms: usize,
}

impl ContourSpec {
    pub fn resolve(&self) -> Result<CircleContour, CliError> {
        Ok(CircleContour::new(to_c64(self.z0), self.r, self.big_r, self.points, self.taylor_terms)?)
    }
}

/// One `matfunc` experiment. Relative paths resolve against the config file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub matrix: PathBuf,
    pub function: FunctionSpec,
    #[serde(default)]
    pub contour: Option<ContourSpec>,
    #[serde(default)]
    pub quadrature: Option<PathBuf>,
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Normalization of the input encoding; `‖A‖` when omitted.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Bound on the shifted inverses for quadrature mode; computed from the
    /// matrix when omitted.
    #[serde(default)]
    pub beta_prime: Option<f64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| config_err(&format!("reading {}", path.display()), e))?;
        let mut config: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| config_err(&format!("parsing {}", path.display()), e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.matrix = base.join(&config.matrix);
        config.quadrature = config.quadrature.map(|q| base.join(q));
        config.output = config.output.map(|o| base.join(o));
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match (&self.contour, &self.quadrature) {
            (Some(c), None) => {
                c.resolve()?;
            }
            (None, Some(_)) => {}
            _ => {
                return Err(CliError::Config(
                    "exactly one of `contour` and `quadrature` must be given".into(),
                ))
            }
        }
        if !(self.delta > 0.0 && self.delta <= 0.5) {
            return Err(CliError::Config(format!("delta = {} outside (0, 1/2]", self.delta)));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(CliError::Config(format!("alpha = {a} must be positive")));
            }
        }
        if let Some(b) = self.beta_prime {
            if !(b > 0.0 && b.is_finite()) {
                return Err(CliError::Config(format!("beta_prime = {b} must be positive")));
            }
        }
        self.function.resolve()?;
        Ok(())
    }
}

/// Exact `(α, 1, 0)` encoding of `A` by unitary dilation of `A/α`.
pub fn encode_matrix(a: &CMatrix, alpha: Option<f64>) -> Result<BlockEncoding, CliError> {
    let n = qubits_of(a.rows())?;
    let norm = spectral_norm(a);
    let alpha = match alpha {
        Some(al) if al < norm * (1.0 - 1e-12) => {
            return Err(CliError::Config(format!("alpha = {al} is below ‖A‖ = {norm}")))
        }
        Some(al) => al,
        None if norm > 0.0 => norm,
        None => 1.0,
    };
    let contraction = a.scale_real(1.0 / alpha);
    // guard the dilation against a norm that rounds just above one
    let shrink = spectral_norm(&contraction).max(1.0);
    let u = dilate_to_unitary(&contraction.scale_real(1.0 / shrink))?;
    Ok(BlockEncoding::new(u, n, 1, alpha * shrink, 0.0)?)
}

/// Result of [`cmd_matfunc`].
#[derive(Clone, Debug)]
pub struct MatfuncOutcome {
    pub encoding: BlockEncoding,
    pub report: VerificationReport,
}

/// Builds and checks the encoding described by `config`.
///
/// Contour mode returns the full report; quadrature mode has no closed-form
/// discretization bound, so `eps_M` and `measured_error_vs_f` are null.
pub fn cmd_matfunc(config: &ExperimentConfig) -> Result<MatfuncOutcome, CliError> {
    config.validate()?;
    let a = load_matrix(&config.matrix)?;
    let f = config.function.resolve()?;
    let be_a = encode_matrix(&a, config.alpha)?;
    info!("input encoding {:?}", be_a.contract());
    let (encoding, report) = match (&config.contour, &config.quadrature) {
        (Some(spec), _) => {
            let c = spec.resolve()?;
            build_fM_encoding(&be_a, &f, &c, config.delta)?
        }
        (None, Some(path)) => {
            let q = load_quadrature(path)?;
            let beta_prime = match config.beta_prime {
                Some(b) => b,
                None => inverse_bound(&be_a.encoded_block(), &q)?,
            };
            let pair = build_sqrt_pair(&q.w, q.index_qubits())?;
            build_FM_encoding(&be_a, &q, &pair, beta_prime, config.delta)?
        }
        (None, None) => unreachable!("validated"),
    };
    info!(
        "encoding ({:.6e}, {}, {:.6e}), polynomial degree {}",
        encoding.alpha(),
        encoding.a(),
        encoding.epsilon(),
        report.degree_d
    );
    Ok(MatfuncOutcome { encoding, report })
}

/// `max_k ‖(y_k I + z_k A)^{-1}‖`.
pub fn inverse_bound(a: &CMatrix, q: &QuadratureScheme) -> Result<f64, CliError> {
    let mut bound: f64 = 0.0;
    for k in 0..q.len() {
        let smin = min_singular_value(&q.shifted(a, k)?)?;
        if smin <= 0.0 {
            return Err(CliError::Precondition(Error::Singular(format!("y_{k} I + z_{k} A"))));
        }
        bound = bound.max(1.0 / smin);
    }
    Ok(bound)
}

/// One row of the convergence table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "eps_M")]
    pub eps_m: f64,
    /// `‖f(A) − f_M(A)‖` computed densely.
    pub dense_error: f64,
}

/// Dense trapezoidal error for each node count, on the config's circle.
pub fn sweep(config: &ExperimentConfig, points: &[usize]) -> Result<Vec<SweepRow>, CliError> {
    let spec = config
        .contour
        .as_ref()
        .ok_or_else(|| CliError::Config("--sweep needs a contour config".into()))?;
    let a = load_matrix(&config.matrix)?;
    let f = config.function.resolve()?;
    let shift = spectral_norm(&a.sub(&CMatrix::identity(a.rows()).scale(to_c64(spec.z0)))?);
    let mut rows = Vec::with_capacity(points.len());
    for &m in points {
        let c = ContourSpec { points: m, ..spec.clone() }.resolve()?;
        let exact = f.apply(&a, c.z0, c.big_r)?;
        let approx = f_M_dense(&a, &f, &c)?;
        rows.push(SweepRow {
            m,
            eps_m: crate::matfunc::trapezoid_error_bound(&c, &f, shift)?,
            dense_error: spectral_norm(&exact.sub(&approx)?),
        });
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(|e| config_err("writing sweep table", e))?;
    }
    let bytes = writer.into_inner().map_err(|e| config_err("writing sweep table", e))?;
    String::from_utf8(bytes).map_err(|e| config_err("writing sweep table", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_classes_map_to_exit_codes() {
        let cases = [
            (Error::SpectrumNotEnclosed { norm_shift: 1.0, r: 0.5 }, EXIT_PRECONDITION),
            (Error::Singular("x".into()), EXIT_PRECONDITION),
            (
                Error::BranchCut {
                    function: "log",
                    z0: "0".into(),
                    radius: 1.0,
                },
                EXIT_PRECONDITION,
            ),
            (Error::CapExceeded { qubits: 20, cap: 14 }, EXIT_CONFIG),
            (Error::InvalidParameter("x".into()), EXIT_CONFIG),
            (Error::PairMismatch { measured: 1.0, claimed: 0.0 }, EXIT_CONTRACT),
        ];
        for (e, code) in cases {
            assert_eq!(CliError::from(e).exit_code(), code);
        }
    }

    #[test]
    fn matrix_file_round_trip() {
        let a = CMatrix::from_real(&[&[0.1, 0.3], &[0.0, 0.2]]);
        let file = MatrixFile::from_matrix(&a).unwrap();
        assert_eq!(file.n, 1);
        assert_eq!(file.entries[1], [0.3, 0.0]);
        let text = serde_json::to_string(&file).unwrap();
        let back: MatrixFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_matrix().unwrap(), a);
        let bad = MatrixFile { n: 1, entries: vec![[0.0, 0.0]; 3] };
        assert!(matches!(bad.to_matrix(), Err(CliError::Config(_))));
    }

    #[test]
    fn function_specs() {
        let named: FunctionSpec = serde_json::from_str("\"log\"").unwrap();
        assert_eq!(named.resolve().unwrap(), ScalarFunction::Log);
        let poly: FunctionSpec = serde_json::from_str(r#"{"coefficients": [[1, 0], [0, 2]]}"#).unwrap();
        assert!(matches!(poly.resolve().unwrap(), ScalarFunction::Polynomial { .. }));
        let unknown: FunctionSpec = serde_json::from_str("\"sin\"").unwrap();
        assert!(unknown.resolve().is_err());
    }

    #[test]
    fn encode_matrix_contract() {
        let a = CMatrix::from_real(&[&[0.1, 0.3], &[0.0, 0.2]]);
        let be = encode_matrix(&a, None).unwrap();
        assert!(be.verify(&a).unwrap() < 1e-12);
        assert!(encode_matrix(&a, Some(0.1)).is_err());
        let be = encode_matrix(&CMatrix::zeros(2, 2), None).unwrap();
        assert_eq!(be.alpha(), 1.0);
    }

    #[test]
    fn sweep_table_header() {
        let rows = vec![SweepRow { m: 4, eps_m: 0.5, dense_error: 0.25 }];
        let text = sweep_csv(&rows).unwrap();
        assert_eq!(text.lines().next().unwrap(), "M,eps_M,dense_error");
        assert_eq!(text.lines().nth(1).unwrap(), "4,0.5,0.25");
    }
}
