//! Command-line front end: builds a symbol from flags and an optional JSON
//! config file, runs one library operation and emits JSON or CSV.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 math-domain
//! error (pole, divergent region), 3 verification failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use padic_heat::{
    counting_function, damped_symbol, full_space_kernel, growth_exponent_estimate, heat_kernel,
    mellin_check, parse_table, pole_lattice, spectrum_iter, symbol_from_table, taibleson_symbol,
    trace_bracket, verify_suite, walpha_symbol, zeta_series, Complex64, Error as CoreError,
    GlobalParams, KernelQuery, LatticeLevel, Order, RadialSymbol, WAlphaSpec,
};
use serde::Deserialize;
use serde_json::{json, Value};

/// Environment variable holding the default series tolerance.
pub const TOL_ENV: &str = "PADIC_HEAT_TOL";

pub const DEFAULT_TOL: f64 = 1e-12;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MATH_DOMAIN: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "padic-heat",
    version,
    about = "Spectral objects of radial p-adic operators on the unit ball"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues and multiplicities by shell
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Number of shells to list
        #[arg(long)]
        shells: Option<u32>,
    },
    /// Eigenvalue counting function N(T)
    Count {
        #[command(flatten)]
        common: Common,
        #[arg(long = "T")]
        t_max: Option<f64>,
    },
    /// Spectral zeta series at complex s
    Zeta {
        #[command(flatten)]
        common: Common,
        /// Complex argument as `re,im`
        #[arg(long, allow_hyphen_values = true)]
        s: Option<String>,
    },
    /// Pole lattice of the zeta function
    Poles {
        #[command(flatten)]
        common: Common,
    },
    /// Heat trace on a list of times
    Trace {
        #[command(flatten)]
        common: Common,
        /// Comma-separated times
        #[arg(long)]
        t: Option<String>,
        /// Also report t^(n/beta) Tr(t) and the c0 majorant (JSON only)
        #[arg(long)]
        bracket: bool,
    },
    /// Heat kernel at a point of given order
    Kernel {
        #[command(flatten)]
        common: Common,
        /// ord(x): an integer or `inf`
        #[arg(long, allow_hyphen_values = true)]
        ordx: Option<String>,
        #[arg(long)]
        t: Option<f64>,
        /// Kernel on the full space instead of the ball
        #[arg(long)]
        full_space: bool,
    },
    /// Mellin transform of the trace against Gamma(s) zeta(s)
    Mellin {
        #[command(flatten)]
        common: Common,
        /// Comma-separated real arguments
        #[arg(long)]
        s: Option<String>,
    },
    /// Level-K lattice verification suite
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long = "K")]
        level: Option<u32>,
        #[arg(long)]
        t: Option<f64>,
    },
    /// Least-squares growth exponent of N(T)
    EstimateGrowth {
        #[command(flatten)]
        common: Common,
        #[arg(long = "T")]
        t_max: Option<f64>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SymbolArg {
    Taibleson,
    Damped,
    Walpha,
    Table,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    symbol: Option<SymbolArg>,
    #[arg(long)]
    beta: Option<f64>,
    /// Damped symbol: A in p^(j beta) (B - A e^(-p^j))
    #[arg(long)]
    a: Option<f64>,
    /// Damped symbol: B
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// File of `j value` lines (symbol values, or weights for walpha)
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    /// JSON file with any of these options; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, env = TOL_ENV)]
    tol: Option<f64>,
}

/// Options read from `--config`. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    p: Option<u32>,
    n: Option<usize>,
    symbol: Option<SymbolArg>,
    beta: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    alpha: Option<f64>,
    kappa: Option<f64>,
    table: Option<PathBuf>,
    c0: Option<f64>,
    c1: Option<f64>,
    format: Option<Format>,
    output: Option<PathBuf>,
    tol: Option<f64>,
    shells: Option<u32>,
    #[serde(rename = "T")]
    t_max: Option<f64>,
    s: Option<Value>,
    t: Option<Value>,
    ordx: Option<Value>,
    #[serde(rename = "K")]
    level: Option<u32>,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(CoreError),
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        Failure::Core(e)
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Resolved configuration shared by all subcommands.
struct Settings {
    params: GlobalParams,
    symbol: RadialSymbol,
    format: Format,
    output: Option<PathBuf>,
    tol: f64,
    config: ConfigFile,
}

fn load_config(path: Option<&Path>) -> Res<ConfigFile> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("config: cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("config: {}: {e}", path.display())))
}

fn required<T>(value: Option<T>, field: &str) -> Res<T> {
    value.ok_or_else(|| usage(format!("missing required option `{field}`")))
}

fn read_table(path: &Path) -> Res<Vec<(i64, f64)>> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("table: cannot read {}: {e}", path.display())))?;
    parse_table(&text).map_err(|e| usage(format!("table: {}: {e}", path.display())))
}

fn resolve(common: Common) -> Res<Settings> {
    let config = load_config(common.config.as_deref())?;
    let p = required(common.p.or(config.p), "p")?;
    let n = required(common.n.or(config.n), "n")?;
    let params = GlobalParams::new(p, n)?;
    let kind = common
        .symbol
        .or(config.symbol)
        .unwrap_or(SymbolArg::Taibleson);
    let beta = common.beta.or(config.beta);
    let table = common.table.or(config.table.clone());
    let c0 = common.c0.or(config.c0);
    let c1 = common.c1.or(config.c1);
    let symbol = match kind {
        SymbolArg::Taibleson => taibleson_symbol(params, required(beta, "beta")?)?,
        SymbolArg::Damped => damped_symbol(
            params,
            required(beta, "beta")?,
            required(common.a.or(config.a), "a")?,
            required(common.b.or(config.b), "b")?,
        )?,
        SymbolArg::Walpha => {
            let alpha = required(common.alpha.or(config.alpha), "alpha")?;
            let spec = match &table {
                Some(path) => WAlphaSpec::from_table(
                    alpha,
                    c0.unwrap_or(1.0),
                    c1.unwrap_or(1.0),
                    &read_table(path)?,
                ),
                None => WAlphaSpec::pure_power(p, alpha),
            };
            let spec = spec.with_kappa(common.kappa.or(config.kappa).unwrap_or(1.0));
            let tol = common.tol.or(config.tol).unwrap_or(DEFAULT_TOL);
            walpha_symbol(params, spec, tol)?
        }
        SymbolArg::Table => {
            let path = required(table, "table")?;
            symbol_from_table(
                params,
                &read_table(&path)?,
                required(beta, "beta")?,
                required(c0, "c0")?,
                required(c1, "c1")?,
            )?
        }
    };
    let tol = common.tol.or(config.tol).unwrap_or(DEFAULT_TOL);
    if !(tol > 0.0) {
        return Err(usage(format!("tol must be positive, got {tol}")));
    }
    Ok(Settings {
        params,
        symbol,
        format: common.format.or(config.format).unwrap_or(Format::Json),
        output: common.output.or(config.output.clone()),
        tol,
        config,
    })
}

fn value_as_string(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => items
            .iter()
            .map(value_as_string)
            .collect::<Vec<_>>()
            .join(","),
        other => other.to_string(),
    }
}

fn parse_f64_list(text: &str, field: &str) -> Res<Vec<f64>> {
    text.split(',')
        .map(|item| {
            item.trim()
                .parse::<f64>()
                .map_err(|e| usage(format!("{field}: cannot parse `{item}`: {e}")))
        })
        .collect()
}

fn parse_complex(text: &str) -> Res<Complex64> {
    let parts = parse_f64_list(text, "s")?;
    match parts.as_slice() {
        [re] => Ok(Complex64::new(*re, 0.0)),
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => Err(usage(format!("s: expected `re,im`, got `{text}`"))),
    }
}

fn option_text(flag: Option<String>, config: &Option<Value>) -> Option<String> {
    flag.or_else(|| config.as_ref().map(value_as_string))
}

/// A value in a CSV row.
enum Cell {
    F(f64),
    I(String),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => format_f64(*x),
            Cell::I(s) | Cell::S(s) => s.clone(),
        }
    }
}

/// Output of a subcommand in both formats.
struct Report {
    json: Value,
    header: &'static [&'static str],
    rows: Vec<Vec<Cell>>,
}

/// `x` with 17 significant digits, which round-trips every binary64 value.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }
}

fn render_json(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SeventeenDigits);
    serde::Serialize::serialize(value, &mut ser).expect("serializing a JSON value cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON output is UTF-8")
}

fn render_csv(report: &Report) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(report.header).expect("in-memory CSV");
    for row in &report.rows {
        writer
            .write_record(row.iter().map(Cell::render))
            .expect("in-memory CSV");
    }
    String::from_utf8(writer.into_inner().expect("in-memory CSV")).expect("CSV output is UTF-8")
}

fn emit(report: &Report, format: Format) -> String {
    match format {
        Format::Json => render_json(&report.json),
        Format::Csv => render_csv(report),
    }
}

fn spectrum(s: &Settings, shells: Option<u32>) -> Res<Report> {
    let shells = shells.or(s.config.shells).unwrap_or(10);
    let lines = spectrum_iter(&s.symbol)
        .take(shells as usize)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Report {
        json: Value::Array(
            lines
                .iter()
                .map(|l| json!({"m": l.m, "lambda": l.lambda, "multiplicity": l.multiplicity}))
                .collect(),
        ),
        header: &["m", "lambda", "multiplicity"],
        rows: lines
            .iter()
            .map(|l| {
                vec![
                    Cell::I(l.m.to_string()),
                    Cell::F(l.lambda),
                    Cell::I(l.multiplicity.to_string()),
                ]
            })
            .collect(),
    })
}

fn count(s: &Settings, t_max: Option<f64>) -> Res<Report> {
    let t = required(t_max.or(s.config.t_max), "T")?;
    let n = counting_function(&s.symbol, t)?;
    Ok(Report {
        json: json!({"T": t, "count": n}),
        header: &["T", "count"],
        rows: vec![vec![Cell::F(t), Cell::I(n.to_string())]],
    })
}

fn zeta(s: &Settings, arg: Option<String>) -> Res<Report> {
    let z = parse_complex(&required(option_text(arg, &s.config.s), "s")?)?;
    let r = zeta_series(&s.symbol, z, s.tol)?;
    let v = r.value.value;
    Ok(Report {
        json: json!({
            "s": {"re": z.re, "im": z.im},
            "value": {"re": v.re, "im": v.im},
            "error_bound": r.value.bound,
            "shells_used": r.shells_used,
            "abscissa": r.abscissa,
        }),
        header: &[
            "s_re",
            "s_im",
            "value_re",
            "value_im",
            "error_bound",
            "shells_used",
            "abscissa",
        ],
        rows: vec![vec![
            Cell::F(z.re),
            Cell::F(z.im),
            Cell::F(v.re),
            Cell::F(v.im),
            Cell::F(r.value.bound),
            Cell::I(r.shells_used.to_string()),
            Cell::F(r.abscissa),
        ]],
    })
}

fn poles(s: &Settings) -> Res<Report> {
    let l = pole_lattice(&s.symbol)?;
    let kind = serde_json::to_value(l.kind).expect("enum serializes");
    let kind_text = value_as_string(&kind);
    Ok(Report {
        json: json!({
            "abscissa": l.abscissa,
            "spacing": l.spacing,
            "kind": kind,
            "power_from": l.power_from,
            "power_constant": l.power_constant,
        }),
        header: &["abscissa", "spacing", "kind"],
        rows: vec![vec![
            Cell::F(l.abscissa),
            Cell::F(l.spacing),
            Cell::S(kind_text),
        ]],
    })
}

fn trace(s: &Settings, arg: Option<String>, bracket: bool) -> Res<Report> {
    let grid = parse_f64_list(&required(option_text(arg, &s.config.t), "t")?, "t")?;
    let b = trace_bracket(&s.symbol, &grid, s.tol)?;
    let json = if bracket {
        serde_json::to_value(&b).expect("bracket serializes")
    } else {
        Value::Array(
            b.rows
                .iter()
                .map(|r| json!({"t": r.t, "value": r.trace.value, "bound": r.trace.bound}))
                .collect(),
        )
    };
    Ok(Report {
        json,
        header: &["t", "value", "bound"],
        rows: b
            .rows
            .iter()
            .map(|r| vec![Cell::F(r.t), Cell::F(r.trace.value), Cell::F(r.trace.bound)])
            .collect(),
    })
}

fn kernel(s: &Settings, ordx: Option<String>, t: Option<f64>, full_space: bool) -> Res<Report> {
    let ordx_text = required(option_text(ordx, &s.config.ordx), "ordx")?;
    let ordx: Order = ordx_text.trim().parse().map_err(|_| {
        usage(format!(
            "ordx: expected an integer or `inf`, got `{ordx_text}`"
        ))
    })?;
    let t = match t {
        Some(t) => t,
        None => {
            let text = required(s.config.t.as_ref().map(value_as_string), "t")?;
            parse_f64_list(&text, "t")?
                .first()
                .copied()
                .ok_or_else(|| usage("t: empty"))?
        }
    };
    let e = if full_space {
        full_space_kernel(&s.symbol, ordx, t, s.tol)?
    } else {
        heat_kernel(&s.symbol, KernelQuery::new(ordx, t, s.tol)?)?
    };
    Ok(Report {
        json: json!({"ordx": ordx.to_string(), "t": t, "value": e.value, "bound": e.bound}),
        header: &["ordx", "t", "value", "bound"],
        rows: vec![vec![
            Cell::S(ordx.to_string()),
            Cell::F(t),
            Cell::F(e.value),
            Cell::F(e.bound),
        ]],
    })
}

fn mellin(s: &Settings, arg: Option<String>) -> Res<Report> {
    let values = parse_f64_list(&required(option_text(arg, &s.config.s), "s")?, "s")?;
    let reports = values
        .iter()
        .map(|&v| mellin_check(&s.symbol, v, s.tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Report {
        json: serde_json::to_value(&reports).expect("reports serialize"),
        header: &["s", "lhs", "rhs", "relerr"],
        rows: reports
            .iter()
            .map(|r| {
                vec![
                    Cell::F(r.s),
                    Cell::F(r.lhs),
                    Cell::F(r.rhs),
                    Cell::F(r.relerr),
                ]
            })
            .collect(),
    })
}

fn verify(s: &Settings, level: Option<u32>, t: Option<f64>) -> Res<(Report, bool)> {
    let k = level.or(s.config.level).unwrap_or(3);
    let t = match t {
        Some(t) => t,
        None => match &s.config.t {
            Some(v) => *parse_f64_list(&value_as_string(v), "t")?
                .first()
                .ok_or_else(|| usage("t: empty"))?,
            None => 1.0,
        },
    };
    let level = LatticeLevel::new(s.params, k)?;
    let records = verify_suite(&s.symbol, &level, t, s.tol)?;
    let all_pass = records.iter().all(|r| r.pass);
    Ok((
        Report {
            json: serde_json::to_value(&records).expect("records serialize"),
            header: &["check", "max_error", "certified_bound", "pass"],
            rows: records
                .iter()
                .map(|r| {
                    vec![
                        Cell::S(r.check.clone()),
                        Cell::F(r.max_error),
                        Cell::F(r.certified_bound),
                        Cell::S(r.pass.to_string()),
                    ]
                })
                .collect(),
        },
        all_pass,
    ))
}

fn estimate_growth(s: &Settings, t_max: Option<f64>) -> Res<Report> {
    let t = required(t_max.or(s.config.t_max), "T")?;
    let e = growth_exponent_estimate(&s.symbol, t)?;
    Ok(Report {
        json: json!({
            "T": t,
            "slope": e.slope,
            "intercept": e.intercept,
            "residual": e.residual,
            "shells": e.shells,
        }),
        header: &["T", "slope", "intercept", "residual", "shells"],
        rows: vec![vec![
            Cell::F(t),
            Cell::F(e.slope),
            Cell::F(e.intercept),
            Cell::F(e.residual),
            Cell::I(e.shells.to_string()),
        ]],
    })
}

fn dispatch(command: Command) -> Res<(String, Option<PathBuf>, bool)> {
    let (settings, report, ok) = match command {
        Command::Spectrum { common, shells } => {
            let s = resolve(common)?;
            let r = spectrum(&s, shells)?;
            (s, r, true)
        }
        Command::Count { common, t_max } => {
            let s = resolve(common)?;
            let r = count(&s, t_max)?;
            (s, r, true)
        }
        Command::Zeta { common, s: arg } => {
            let s = resolve(common)?;
            let r = zeta(&s, arg)?;
            (s, r, true)
        }
        Command::Poles { common } => {
            let s = resolve(common)?;
            let r = poles(&s)?;
            (s, r, true)
        }
        Command::Trace { common, t, bracket } => {
            let s = resolve(common)?;
            let r = trace(&s, t, bracket)?;
            (s, r, true)
        }
        Command::Kernel {
            common,
            ordx,
            t,
            full_space,
        } => {
            let s = resolve(common)?;
            let r = kernel(&s, ordx, t, full_space)?;
            (s, r, true)
        }
        Command::Mellin { common, s: arg } => {
            let s = resolve(common)?;
            let r = mellin(&s, arg)?;
            (s, r, true)
        }
        Command::Verify { common, level, t } => {
            let s = resolve(common)?;
            let (r, ok) = verify(&s, level, t)?;
            (s, r, ok)
        }
        Command::EstimateGrowth { common, t_max } => {
            let s = resolve(common)?;
            let r = estimate_growth(&s, t_max)?;
            (s, r, true)
        }
    };
    Ok((emit(&report, settings.format), settings.output, ok))
}

/// Runs one command line (including the program name) and returns the exit
/// code with everything that would go to standard output and error.
/// With `--output`, the report goes to that file instead of standard output.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match dispatch(cli.command) {
        Ok((text, output, ok)) => {
            let code = if ok { EXIT_OK } else { EXIT_VERIFY_FAILED };
            match output {
                Some(path) => match fs::write(&path, &text) {
                    Ok(()) => Outcome {
                        code,
                        stdout: String::new(),
                        stderr: String::new(),
                    },
                    Err(e) => Outcome {
                        code: EXIT_USAGE,
                        stdout: String::new(),
                        stderr: format!("error: cannot write {}: {e}\n", path.display()),
                    },
                },
                None => Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                },
            }
        }
        Err(Failure::Usage(msg)) => Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(Failure::Core(e)) => Outcome {
            code: if e.is_math_domain() {
                EXIT_MATH_DOMAIN
            } else {
                EXIT_USAGE
            },
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for x in [0.5, 1.0 / 3.0, 1e-300, 6.02214076e23, -0.1, 0.0] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn complex_argument_parsing() {
        assert_eq!(parse_complex("2,0").unwrap(), Complex64::new(2.0, 0.0));
        assert_eq!(parse_complex("1.5, -4").unwrap(), Complex64::new(1.5, -4.0));
        assert_eq!(parse_complex("3").unwrap(), Complex64::new(3.0, 0.0));
        assert!(parse_complex("1,2,3").is_err());
    }
}
