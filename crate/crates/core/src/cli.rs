//! Command-line front end.
//!
//! Every command writes one JSON document with sorted keys; floats use the
//! shortest decimal form that round-trips. Exit codes: `0` success, `1`
//! solver error or failed verification, `2` usage error or malformed input.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::direct::{self, NewtonOptions, QesSolution};
use crate::error::Error;
use crate::large_ell::{rescale_decadic, split_linear_p, LargePExpansion, Scheme, SIGMA_EXPONENT};
use crate::model::{solve_wkb_tail, ParityChannel, PotentialSpec, QuasiExactModel, WkbTail};
use crate::perturbation::{evaluate_series, run, solve_zero_order, CorrectionSeries, ZeroOrderSolution};
use crate::system::{build_system, EigenPlet, WaveVector};
use crate::verification;

#[derive(Debug, Parser)]
#[command(name = "magyari", version, about = "Quasi-exactly solvable polynomial oscillators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the truncated recurrence matrix, its shift basis and g_q.
    BuildMatrix(ModelArgs),
    /// Find quasi-exact states directly.
    Solve(SolveArgs),
    /// Large-p perturbation series.
    Perturb(PerturbArgs),
    /// Check solutions against the recurrence and the Schrodinger equation.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
struct ModelArgs {
    /// Number of simultaneously determined couplings.
    #[arg(long)]
    q: Option<usize>,
    /// Degree of the polynomial factor (in x^2).
    #[arg(long = "N")]
    n: Option<usize>,
    /// 0 (even) or 1 (odd); any positive real with --large-ell.
    #[arg(long, default_value_t = 0.0)]
    parity: f64,
    /// Treat --parity as the real parameter p = ell + 1/2.
    #[arg(long)]
    large_ell: bool,
    /// WKB tail f_0..f_q.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "g")]
    f: Option<Vec<f64>>,
    /// Dominant couplings g_{q+1}..g_{2q+1}.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    g: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Auto,
    Harmonic,
    Sextic,
    N0,
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
struct SearchArgs {
    /// Multistart Newton starts.
    #[arg(long, default_value_t = 256)]
    starts: usize,
    #[arg(long, env = "MAGYARI_SEED", default_value_t = 0)]
    seed: u64,
}

impl SearchArgs {
    fn options(&self) -> NewtonOptions {
        NewtonOptions::with_starts(self.starts, self.seed)
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    method: Method,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Linear,
    Decadic,
}

#[derive(Debug, Args)]
struct PerturbArgs {
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    /// Large parameter p = ell + 1/2.
    #[arg(long)]
    p: f64,
    /// Highest correction order K.
    #[arg(long, default_value_t = 3)]
    order: usize,
    /// Shift c in lambda = 1/(2p + c) (linear scheme).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    shift_c: f64,
    /// f_0 of the decadic toy.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    f0: f64,
    /// f_1 of the decadic toy.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    f1: f64,
    /// Polish each evaluated state with Newton on the full system.
    #[arg(long)]
    compare: bool,
    #[command(flatten)]
    search: SearchArgs,
    /// Model for the linear scheme (p comes from --p).
    #[arg(long)]
    q: Option<usize>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "g")]
    f: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    g: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Solution JSON; `-` reads standard input.
    #[arg(long, default_value = "-")]
    input: String,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Overrides the model recorded in the input's `meta`.
    #[command(flatten)]
    model: ModelArgs,
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn failed(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Contract(_) => Failure::usage(e.to_string()),
            _ => Failure::failed(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage_error(message: impl std::fmt::Display) -> Failure {
    let mut cmd = Cli::command();
    Failure::usage(cmd.error(ErrorKind::ArgumentConflict, message).to_string())
}

fn build_model(
    q: Option<usize>,
    n: Option<usize>,
    channel: ParityChannel,
    f: Option<&[f64]>,
    g: Option<&[f64]>,
) -> CliResult<QuasiExactModel> {
    let q = q.ok_or_else(|| usage_error("--q is required"))?;
    let n = n.ok_or_else(|| usage_error("--N is required"))?;
    let tail = match (f, g) {
        (Some(f), None) => {
            if f.len() != q + 1 {
                return Err(usage_error(format!("--f needs q + 1 = {} values, got {}", q + 1, f.len())));
            }
            WkbTail::new(f.to_vec()).map_err(usage_error)?
        }
        (None, Some(g)) => {
            if g.len() != q + 1 {
                return Err(usage_error(format!("--g needs q + 1 = {} values, got {}", q + 1, g.len())));
            }
            solve_wkb_tail(&PotentialSpec::from_dominant(q, g).map_err(usage_error)?).map_err(usage_error)?
        }
        _ => return Err(usage_error("exactly one of --f and --g is required")),
    };
    Ok(QuasiExactModel::new(tail, n, channel))
}

fn channel_of(parity: f64, large_ell: bool) -> CliResult<ParityChannel> {
    if large_ell {
        ParityChannel::large_ell(parity).map_err(usage_error)
    } else {
        ParityChannel::physical(parity).map_err(|_| usage_error("--parity must be 0 or 1 without --large-ell"))
    }
}

impl ModelArgs {
    fn is_empty(&self) -> bool {
        self.q.is_none() && self.n.is_none() && self.f.is_none() && self.g.is_none()
    }

    fn model(&self) -> CliResult<QuasiExactModel> {
        let channel = channel_of(self.parity, self.large_ell)?;
        build_model(self.q, self.n, channel, self.f.as_deref(), self.g.as_deref())
    }
}

fn meta(model: &QuasiExactModel) -> Value {
    json!({
        "q": model.q(),
        "N": model.n(),
        "p": model.p(),
        "f": model.tail().coeffs(),
    })
}

fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("serializable")
}

fn render(value: &Value) -> String {
    // `serde_json::Map` is a BTreeMap: keys come out sorted
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

fn build_matrix(args: &ModelArgs) -> CliResult<Value> {
    let model = args.model()?;
    let system = build_system(&model);
    let matrix: Vec<Vec<f64>> = system.matrix().row_iter().map(|r| r.iter().copied().collect()).collect();
    let shifts = system.shifts();
    let basis: Vec<Value> = (1..=shifts.q())
        .map(|xi| {
            let entries: Vec<[usize; 2]> = (0..shifts.cols()).map(|m| [shifts.row_of(xi, m), m]).collect();
            json!({ "xi": xi, "coupling": format!("g_{}", xi - 1), "entries": entries })
        })
        .collect();
    Ok(json!({
        "meta": meta(&model),
        "shape": [shifts.rows(), shifts.cols()],
        "matrix": matrix,
        "shift_basis": basis,
        "g_q": model.g_q(),
    }))
}

#[derive(Debug, Serialize, Deserialize)]
struct SolutionRecord {
    plet: Vec<f64>,
    energy: f64,
    wave: Vec<f64>,
    #[serde(default)]
    residual_norm: f64,
    #[serde(default)]
    classification: Option<direct::Classification>,
}

fn record(model: &QuasiExactModel, sol: &QesSolution) -> SolutionRecord {
    SolutionRecord {
        plet: sol.plet.values().to_vec(),
        energy: model.energy(sol.plet.values()),
        wave: sol.wave.coeffs().to_vec(),
        residual_norm: sol.residual_norm,
        classification: Some(sol.classification),
    }
}

fn solve(args: &SolveArgs, err: &mut dyn Write) -> CliResult<(QuasiExactModel, Vec<QesSolution>)> {
    let model = args.model.model()?;
    let tail = model.tail();
    let (q, n, channel) = (model.q(), model.n(), model.channel());
    let method = match args.method {
        Method::Auto if q == 0 => Method::Harmonic,
        Method::Auto if n == 0 => Method::N0,
        Method::Auto if q == 1 && tail.f(1) == 1.0 => Method::Sextic,
        Method::Auto => Method::Newton,
        m => m,
    };
    let report = match method {
        Method::Harmonic => {
            if q != 0 {
                return Err(usage_error("--method harmonic needs --q 0"));
            }
            direct::SolveReport { solutions: vec![direct::solve_harmonic(tail.f(0), channel, n)?], diagnostics: vec![] }
        }
        Method::Sextic => {
            if q != 1 || tail.f(1) != 1.0 {
                return Err(usage_error("--method sextic needs --q 1 and f_1 = 1"));
            }
            direct::solve_sextic(tail.f(0), n, channel)?
        }
        Method::N0 => {
            if n != 0 {
                return Err(usage_error("--method n0 needs --N 0"));
            }
            direct::SolveReport { solutions: vec![direct::solve_n0(tail, channel)?], diagnostics: vec![] }
        }
        Method::Newton | Method::Auto => direct::solve_newton(&build_system(&model), &args.search.options()),
    };
    for d in &report.diagnostics {
        let _ = writeln!(err, "note: {d}");
    }
    Ok((model, report.solutions))
}

fn solutions_csv(model: &QuasiExactModel, solutions: &[QesSolution]) -> CliResult<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["index".to_string(), "classification".into(), "energy".into(), "residual_norm".into()];
    header.extend((0..model.q()).map(|k| format!("g_{k}")));
    header.extend((0..=model.n()).map(|k| format!("h_{k}")));
    writer.write_record(&header).map_err(|e| Failure::failed(e.to_string()))?;
    for (i, sol) in solutions.iter().enumerate() {
        let class = serde_json::to_value(sol.classification).expect("serializable");
        let mut row = vec![
            i.to_string(),
            class.as_str().unwrap_or_default().to_string(),
            model.energy(sol.plet.values()).to_string(),
            sol.residual_norm.to_string(),
        ];
        row.extend(sol.plet.values().iter().chain(sol.wave.coeffs()).map(f64::to_string));
        writer.write_record(&row).map_err(|e| Failure::failed(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| Failure::failed(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn expansion(args: &PerturbArgs) -> CliResult<LargePExpansion> {
    match args.scheme {
        SchemeArg::Decadic => Ok(rescale_decadic(args.f0, args.f1, args.p)?),
        SchemeArg::Linear => {
            let channel = ParityChannel::large_ell(args.p).map_err(usage_error)?;
            let model = build_model(args.q, args.n, channel, args.f.as_deref(), args.g.as_deref())?;
            Ok(split_linear_p(&build_system(&model), args.shift_c)?)
        }
    }
}

fn wave_json(wave: &[f64]) -> Value {
    to_json(&wave)
}

fn perturb_state(
    exp: &LargePExpansion,
    z: &ZeroOrderSolution,
    series: &CorrectionSeries,
    args: &PerturbArgs,
) -> CliResult<Value> {
    let (scaled_plet, scaled_wave) = evaluate_series(series, z, exp.lambda)?;
    let (plet, wave) = exp.recover_physical(&scaled_plet, &scaled_wave)?;
    let corrections: Vec<Value> = series
        .orders
        .iter()
        .enumerate()
        .map(|(k, o)| json!({ "order": k + 1, "plet": o.plet.values(), "wave": wave_json(&o.wave) }))
        .collect();
    let mut state = json!({
        "zero_order": { "plet": z.plet0.values(), "wave": z.wave0.coeffs() },
        "reductions": to_json(&z.reductions),
        "corrections": corrections,
        "evaluated_plet": scaled_plet.values(),
        "evaluated_wave": scaled_wave.coeffs(),
        "plet": plet.values(),
        "energy": exp.model.energy(plet.values()),
        "wave": wave.coeffs(),
    });
    if args.compare {
        let system = build_system(&exp.model);
        let comparison = match direct::newton_from(system.pencil(), plet.values(), wave.coeffs(), &NewtonOptions::default()) {
            Some(exact) => {
                let (exact_scaled, _) = exp.to_scaled(&exact.plet, &exact.wave)?;
                let error = exact_scaled.max_abs_diff(&scaled_plet);
                let bound = exp.lambda.powi(args.order as i32 + 1);
                json!({
                    "newton_plet": exact.plet.values(),
                    "newton_scaled_plet": exact_scaled.values(),
                    "error": error,
                    "lambda_power": bound,
                    "ratio": error / bound,
                })
            }
            None => json!({ "error": Value::Null, "note": "Newton did not converge from the evaluated series" }),
        };
        state["comparison_to_newton"] = comparison;
    }
    Ok(state)
}

fn perturb(args: &PerturbArgs) -> CliResult<Value> {
    let exp = expansion(args)?;
    let states = solve_zero_order(&exp.problem, &args.search.options())?;
    let mut out = Vec::new();
    for z in &states {
        let series = run(&exp.problem, z, args.order, false)?;
        out.push(perturb_state(&exp, z, &series, args)?);
    }
    let mut meta = meta(&exp.model);
    match exp.scheme {
        Scheme::Decadic => {
            meta["scheme"] = json!("decadic");
            meta["sigma"] = json!(exp.lambda);
            meta["sigma_exponent"] = json!(SIGMA_EXPONENT);
        }
        Scheme::Linear => {
            meta["scheme"] = json!("linear");
            meta["lambda"] = json!(exp.lambda);
            meta["shift_c"] = json!(exp.shift_c);
        }
    }
    meta["order"] = json!(args.order);
    Ok(json!({ "meta": meta, "solutions": out }))
}

#[derive(Debug, Deserialize)]
struct SolutionFile {
    #[serde(default)]
    meta: Option<MetaRecord>,
    solutions: Vec<SolutionRecord>,
}

#[derive(Debug, Deserialize)]
struct MetaRecord {
    q: usize,
    #[serde(rename = "N")]
    n: usize,
    p: f64,
    f: Vec<f64>,
}

fn verify(args: &VerifyArgs, input: &mut dyn Read) -> CliResult<(Value, bool)> {
    let mut text = String::new();
    if args.input == "-" {
        input.read_to_string(&mut text).map_err(|e| Failure::usage(format!("cannot read input: {e}")))?;
    } else {
        text = std::fs::read_to_string(&args.input)
            .map_err(|e| Failure::usage(format!("cannot read {}: {e}", args.input)))?;
    }
    let file: SolutionFile =
        serde_json::from_str(&text).map_err(|e| Failure::usage(format!("malformed solution JSON: {e}")))?;
    let model = if args.model.is_empty() {
        let meta = file.meta.as_ref().ok_or_else(|| Failure::usage("no model flags and no meta in the input"))?;
        let channel = if meta.p == 0.0 || meta.p == 1.0 {
            ParityChannel::physical(meta.p)
        } else {
            ParityChannel::large_ell(meta.p)
        }
        .map_err(|e| Failure::usage(format!("malformed meta: {e}")))?;
        build_model(Some(meta.q), Some(meta.n), channel, Some(&meta.f), None)?
    } else {
        args.model.model()?
    };
    let mut all = true;
    let mut reports = Vec::new();
    for (i, s) in file.solutions.iter().enumerate() {
        let wave = WaveVector::new(s.wave.clone()).map_err(|e| Failure::usage(format!("solution {i}: {e}")))?;
        let plet = EigenPlet::new(s.plet.clone());
        let verdict = verification::verify(&model, &plet, &wave, args.tol)
            .map_err(|e| Failure::usage(format!("solution {i}: {e}")))?;
        all &= verdict.passed;
        reports.push(json!({ "index": i, "recurrence": verdict.recurrence, "ode": verdict.ode, "passed": verdict.passed }));
    }
    Ok((json!({ "tol": args.tol, "passed": all, "solutions": reports }), all))
}

fn dispatch(cli: Cli, input: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<u8> {
    let text = match &cli.command {
        Command::BuildMatrix(args) => render(&build_matrix(args)?),
        Command::Solve(args) => {
            let (model, solutions) = solve(args, err)?;
            match args.format {
                Format::Json => {
                    let records: Vec<SolutionRecord> = solutions.iter().map(|s| record(&model, s)).collect();
                    render(&json!({ "meta": meta(&model), "solutions": to_json(&records) }))
                }
                Format::Csv => solutions_csv(&model, &solutions)?,
            }
        }
        Command::Perturb(args) => render(&perturb(args)?),
        Command::Verify(args) => {
            let (report, passed) = verify(args, input)?;
            out.write_all(render(&report).as_bytes()).map_err(|e| Failure::failed(e.to_string()))?;
            return Ok(if passed { 0 } else { 1 });
        }
    };
    out.write_all(text.as_bytes()).map_err(|e| Failure::failed(e.to_string()))?;
    Ok(0)
}

/// Runs the CLI on explicit arguments and streams; returns the exit code.
pub fn run_with<I, T>(args: I, input: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code() as u8;
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match dispatch(cli, input, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message.trim_end());
            f.code
        }
    }
}

pub fn main() -> ExitCode {
    let code = run_with(
        std::env::args_os(),
        &mut std::io::stdin().lock(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    ExitCode::from(code)
}
