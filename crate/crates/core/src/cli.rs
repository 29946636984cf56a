//! Command-line front end.
//!
//! [`dispatch`] never panics on user input and never touches the process
//! exit status itself, so it can be exercised directly in tests. Successful
//! runs produce `{"tool","version","params","result"}`; failures produce
//! `{"tool","version","error","detail"}` with exit code 2 for usage and
//! precondition errors and 3 for numerical failures.

use std::fs;
use std::io;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hypo::{self, ModelFile, SublaplacianModel};
use crate::mehler::{self, HeatQuery};
use crate::oracle::mellin::{mellin_power_real, MatrixOperator, MellinParams};
use crate::oracle::nilmanifold::{nilmanifold_spectrum, NilmanifoldGrid};
use crate::weyl::{self, AsymptoticModel, CRSetting, Coefficient, Prediction, VolumeConvention};

pub const TOOL: &str = "heisenspec";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const THREADS_ENV: &str = "HEISENSPEC_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = TOOL, version, about = "Heisenberg calculus numerics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// The constant ν(μ).
    Nu(NuArgs),
    /// The Folland–Stein heat kernel k_μ(x0, x', t).
    HeatKernel(HeatKernelArgs),
    /// Hypoellipticity conditions.
    Check(CheckArgs),
    /// Tables of the Weyl coefficients α, β, γ.
    WeylTable(WeylTableArgs),
    /// Leading-order Weyl predictions.
    Predict(PredictArgs),
    /// Tauberian fit of heat-trace samples.
    Karamata(KaramataArgs),
    /// Partial matrix power P^{−s} via the Mellin integral.
    Mellin(MellinArgs),
    /// Spectrum of the discrete sublaplacian on the Heisenberg nilmanifold.
    Nilmanifold(NilmanifoldArgs),
    /// Total mass of the heat kernel on a truncated box.
    Mass(MassArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args, Serialize)]
struct NuArgs {
    #[arg(long)]
    n: u32,
    #[arg(long, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long = "rel-tol", default_value_t = mehler::DEFAULT_NU_TOL)]
    rel_tol: f64,
}

#[derive(Debug, Args, Serialize)]
struct HeatKernelArgs {
    #[arg(long)]
    n: u32,
    #[arg(long, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long, allow_hyphen_values = true)]
    x0: f64,
    #[arg(long, allow_hyphen_values = true)]
    r2: f64,
    #[arg(long, allow_hyphen_values = true)]
    t: f64,
    #[arg(long = "rel-tol", default_value_t = mehler::DEFAULT_KERNEL_TOL)]
    rel_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
enum Condition {
    #[value(name = "rockland")]
    #[serde(rename = "rockland")]
    Rockland,
    #[value(name = "weaker")]
    #[serde(rename = "weaker")]
    Weaker,
    #[value(name = "Yq")]
    Yq,
    #[value(name = "Xk")]
    Xk,
    #[value(name = "Ypq")]
    Ypq,
}

#[derive(Debug, Args, Serialize)]
struct CheckArgs {
    /// Model file, required for `rockland` and `weaker`.
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long, value_enum)]
    condition: Condition,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    kappa: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
struct WeylTableArgs {
    #[arg(long, value_enum)]
    coeff: CoeffArg,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 0)]
    kappa: u32,
    #[arg(long = "rel-tol", default_value_t = mehler::DEFAULT_NU_TOL)]
    rel_tol: f64,
    /// `∫θ∧dθ^n`; adds the volume and the Weyl constants to the output.
    #[arg(long = "vol-integral", allow_hyphen_values = true)]
    vol_integral: Option<f64>,
    #[arg(long = "volume-convention", value_enum, default_value_t = ConventionArg::Pseudohermitian)]
    volume_convention: ConventionArg,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum CoeffArg {
    Alpha,
    Beta,
    Gamma,
}

impl From<CoeffArg> for Coefficient {
    fn from(c: CoeffArg) -> Self {
        match c {
            CoeffArg::Alpha => Coefficient::Alpha,
            CoeffArg::Beta => Coefficient::Beta,
            CoeffArg::Gamma => Coefficient::Gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ConventionArg {
    Pseudohermitian,
    Definition,
}

impl From<ConventionArg> for VolumeConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Pseudohermitian => VolumeConvention::Pseudohermitian,
            ConventionArg::Definition => VolumeConvention::Definition,
        }
    }
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("target").required(true).multiple(false))]
struct PredictArgs {
    #[arg(long)]
    d: u32,
    #[arg(long)]
    m: u32,
    #[arg(long)]
    nu0: f64,
    #[arg(long, group = "target", allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, group = "target")]
    k: Option<u64>,
    #[arg(long, group = "target", allow_hyphen_values = true)]
    t: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
struct KaramataArgs {
    /// CSV with header `t,trace`.
    #[arg(long)]
    samples: PathBuf,
    #[arg(long)]
    d: u32,
    #[arg(long)]
    m: u32,
}

#[derive(Debug, Args, Serialize)]
struct MellinArgs {
    /// JSON nested array of rows.
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    s: f64,
    #[arg(long, default_value_t = MellinParams::default().step)]
    step: f64,
    #[arg(long = "rel-tol", default_value_t = MellinParams::default().rel_tol)]
    rel_tol: f64,
}

#[derive(Debug, Args, Serialize)]
struct NilmanifoldArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    grid: usize,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args, Serialize)]
struct MassArgs {
    #[arg(long)]
    n: u32,
    #[arg(long, allow_hyphen_values = true)]
    t: f64,
    #[arg(long, allow_hyphen_values = true)]
    trunc: f64,
    #[arg(long = "rel-tol", default_value_t = 1e-7)]
    rel_tol: f64,
}

/// Writes every `f64` with 17 significant digits.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Deterministic JSON: sorted keys, fixed float format, trailing newline.
pub fn to_json_bytes(value: &Value) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value.serialize(&mut ser).expect("writing JSON to memory");
    out.push(b'\n');
    out
}

fn float_text(v: f64) -> String {
    format!("{v:.16e}")
}

fn error_document(code: &str, detail: &str) -> Vec<u8> {
    to_json_bytes(&json!({
        "tool": TOOL,
        "version": VERSION,
        "error": code,
        "detail": detail,
    }))
}

fn envelope(params: Value, result: Value) -> Vec<u8> {
    to_json_bytes(&json!({
        "tool": TOOL,
        "version": VERSION,
        "params": params,
        "result": result,
    }))
}

fn fail(e: &Error) -> (i32, Vec<u8>) {
    let code = if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    };
    (code, error_document(e.code(), &e.to_string()))
}

/// Sizes the global rayon pool from `HEISENSPEC_THREADS`, once per process.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        Error::Input(format!(
            "{THREADS_ENV} must be a positive integer, got '{raw}'"
        ))
    })?;
    // A second call finds the pool already built; that is fine.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

fn params_of<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("argument structs serialize")
}

fn complex_json(z: num_complex::Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn read_file(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn dispatch<I, S>(argv: I) -> (i32, Vec<u8>)
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    (EXIT_OK, e.to_string().into_bytes())
                }
                _ => (
                    EXIT_USAGE,
                    error_document("UsageError", e.to_string().trim_end()),
                ),
            };
        }
    };
    if let Err(e) = configure_threads() {
        return fail(&e);
    }
    match run(cli.command) {
        Ok(doc) => (EXIT_OK, doc),
        Err(e) => fail(&e),
    }
}

fn run(command: Command) -> Result<Vec<u8>> {
    match command {
        Command::Nu(a) => {
            let est = mehler::nu_estimate(a.n, a.mu, a.rel_tol)?;
            Ok(envelope(
                params_of(&a),
                json!({ "value": est.value, "est_error": est.est_error }),
            ))
        }
        Command::HeatKernel(a) => {
            let q = HeatQuery::new(a.n, a.mu, a.x0, a.r2, a.t).with_tol(a.rel_tol);
            let kv = mehler::heat_kernel(&q)?;
            Ok(envelope(
                params_of(&a),
                json!({ "value": complex_json(kv.value), "est_error": kv.est_error }),
            ))
        }
        Command::Check(a) => run_check(&a),
        Command::WeylTable(a) => run_weyl_table(&a),
        Command::Predict(a) => {
            let model = AsymptoticModel::new(a.d, a.m, a.nu0)?;
            let (what, kind) = match (a.lambda, a.k, a.t) {
                (Some(l), _, _) => (Prediction::Counting(l), "counting"),
                (_, Some(k), _) => (Prediction::Eigen(k as f64), "eigenvalue"),
                (_, _, Some(t)) => (Prediction::HeatLeading(t), "heat-leading"),
                _ => return Err(Error::Input("one of --lambda, --k, --t is required".into())),
            };
            let value = weyl::predict(&model, what)?;
            Ok(envelope(
                params_of(&a),
                json!({ "kind": kind, "value": value, "exponent": model.exponent(), "a0": model.a0() }),
            ))
        }
        Command::Karamata(a) => {
            let samples = read_samples(&a.samples)?;
            let fit = weyl::karamata_fit(&samples, a.d, a.m)?;
            Ok(envelope(
                params_of(&a),
                serde_json::to_value(fit).expect("fit serializes"),
            ))
        }
        Command::Mellin(a) => {
            let rows: Vec<Vec<f64>> = serde_json::from_str(&read_file(&a.matrix)?)
                .map_err(|e| Error::Input(format!("{}: {e}", a.matrix.display())))?;
            let op = MatrixOperator::from_rows(&rows)?;
            let params = MellinParams {
                step: a.step,
                rel_tol: a.rel_tol,
            };
            let m = mellin_power_real(&op, a.s, params)?;
            Ok(envelope(
                params_of(&a),
                json!({ "matrix": matrix_rows(&m) }),
            ))
        }
        Command::Nilmanifold(a) => {
            let grid = NilmanifoldGrid::new(a.grid, a.mu)?;
            let start = Instant::now();
            let sp = nilmanifold_spectrum(&grid, a.count)?;
            let wallclock = start.elapsed().as_secs_f64();
            match a.format {
                Format::Csv => {
                    let mut out = Vec::new();
                    sp.write_csv(&mut out)?;
                    Ok(out)
                }
                Format::Json => Ok(envelope(
                    params_of(&a),
                    json!({
                        "N": a.grid,
                        "mu": a.mu,
                        "count": a.count,
                        "eigenvalues": sp.expanded(),
                        "wallclock": wallclock,
                    }),
                )),
            }
        }
        Command::Mass(a) => {
            let est = mehler::total_mass(a.n, a.t, a.trunc, a.rel_tol)?;
            Ok(envelope(
                params_of(&a),
                json!({ "value": est.value, "est_error": est.est_error }),
            ))
        }
    }
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

#[derive(Deserialize)]
struct SampleRow {
    t: f64,
    trace: f64,
}

fn read_samples(path: &PathBuf) -> Result<Vec<(f64, f64)>> {
    let mut rd = csv::Reader::from_path(path)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    rd.deserialize::<SampleRow>()
        .map(|r| {
            r.map(|s| (s.t, s.trace))
                .map_err(|e| Error::Input(format!("{}: {e}", path.display())))
        })
        .collect()
}

fn need(v: Option<usize>, flag: &str, cond: &str) -> Result<usize> {
    v.ok_or_else(|| Error::Input(format!("--condition {cond} requires --{flag}")))
}

fn run_check(a: &CheckArgs) -> Result<Vec<u8>> {
    let verdict = match a.condition {
        Condition::Rockland | Condition::Weaker => {
            let path = a
                .file
                .as_ref()
                .ok_or_else(|| Error::Input("--file is required for spectral conditions".into()))?;
            let file: ModelFile = serde_json::from_str(&read_file(path)?)
                .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
            let model = SublaplacianModel::from_file(file)?;
            if a.condition == Condition::Rockland {
                hypo::check_rockland(&model)
            } else {
                hypo::check_weaker(&model)
            }
        }
        Condition::Yq => hypo::check_y(
            need(a.n, "n", "Yq")?,
            need(a.kappa, "kappa", "Yq")?,
            need(a.r, "r", "Yq")?,
            need(a.q, "q", "Yq")?,
        )?,
        Condition::Xk => hypo::check_x(
            need(a.d, "d", "Xk")?,
            need(a.rank, "rank", "Xk")?,
            need(a.k, "k", "Xk")?,
        )?,
        Condition::Ypq => hypo::check_ypq(
            need(a.n, "n", "Ypq")?,
            need(a.kappa, "kappa", "Ypq")?,
            need(a.r, "r", "Ypq")?,
            need(a.p, "p", "Ypq")?,
            need(a.q, "q", "Ypq")?,
        )?,
    };
    Ok(envelope(
        params_of(a),
        serde_json::to_value(verdict).expect("verdict serializes"),
    ))
}

fn run_weyl_table(a: &WeylTableArgs) -> Result<Vec<u8>> {
    let coeff = Coefficient::from(a.coeff);
    let table = weyl::table(coeff, a.n, a.kappa, a.rel_tol)?;
    let convention = VolumeConvention::from(a.volume_convention);
    let volume = a.vol_integral.map(|vol_integral| {
        if coeff == Coefficient::Gamma {
            weyl::contact_volume(a.n, vol_integral)
        } else {
            let s = CRSetting {
                n: a.n,
                kappa: a.kappa,
                vol_integral,
            };
            weyl::pseudohermitian_volume_with(&s, convention)
        }
    });
    let name = match coeff {
        Coefficient::Alpha => "alpha",
        Coefficient::Beta => "beta",
        Coefficient::Gamma => "gamma",
    };
    match a.format {
        Format::Csv => Ok(weyl_csv(a, &table, name, volume)),
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| {
                    let mut row = index_json(a, &r.index);
                    row["value"] = json!(r.value);
                    if coeff != Coefficient::Gamma {
                        row["coefficient"] = json!(name);
                    }
                    if let Some(v) = volume {
                        row["weyl_constant"] = json!(r.value * v);
                    }
                    row
                })
                .collect();
            let skipped: Vec<Value> = table
                .skipped
                .iter()
                .map(|s| {
                    let mut row = index_json(a, &s.index);
                    row["reason"] = json!(s.reason);
                    row
                })
                .collect();
            let mut result = json!({ "coefficient": name, "rows": rows, "skipped": skipped });
            if let Some(v) = volume {
                result["volume"] = json!(v);
            }
            Ok(envelope(params_of(a), result))
        }
    }
}

fn index_json(a: &WeylTableArgs, index: &[u32]) -> Value {
    match index {
        [k] => json!({ "n": a.n, "k": k }),
        [p, q] => json!({ "n": a.n, "kappa": a.kappa, "p": p, "q": q }),
        _ => unreachable!("tables index by one or two degrees"),
    }
}

fn weyl_csv(a: &WeylTableArgs, table: &weyl::Table, name: &str, volume: Option<f64>) -> Vec<u8> {
    let gamma = table.coefficient == Coefficient::Gamma;
    let mut out = String::new();
    out.push_str(if gamma {
        "n,k,value\n"
    } else {
        "n,kappa,p,q,coefficient,value\n"
    });
    for r in &table.rows {
        let v = float_text(r.value);
        match r.index.as_slice() {
            [k] => out.push_str(&format!("{},{k},{v}\n", a.n)),
            [p, q] => out.push_str(&format!("{},{},{p},{q},{name},{v}\n", a.n, a.kappa)),
            _ => unreachable!("tables index by one or two degrees"),
        }
    }
    for s in &table.skipped {
        let idx: Vec<String> = s.index.iter().map(u32::to_string).collect();
        let label = if gamma { "k" } else { "p,q" };
        out.push_str(&format!(
            "# skipped: {label}={} ({})\n",
            idx.join(","),
            s.reason
        ));
    }
    if let Some(v) = volume {
        out.push_str(&format!("# volume: {}\n", float_text(v)));
    }
    out.into_bytes()
}
