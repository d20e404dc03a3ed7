//! Reproducible command-line experiments.
//!
//! Each command produces a [`Report`]: a header echoing the validated
//! configuration and a body of rows with a fixed column order. Reports
//! render as JSON (validated by `schema/report.schema.json`) or CSV. Floats
//! are written with 17 significant digits so they parse back bit-exactly.
//!
//! Exit codes: 0 success, 2 configuration error, 3 mathematical obstruction.

use std::fmt::Write as _;
use std::io;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::asymptotics::{
    chebyshev_floor, lagrange_fractions, modal_class, residual_measure, typicality_measure,
};
use crate::branching::{class_count, class_measure, class_total, all_classes, Coefficients};
use crate::cat::{
    build_phi_observer, seeded_invariance_trials, cat_basis, cat_branch_measures, definite_blank,
    observe_superposition, superposed_blank, CatState, SuperpositionParams,
};
use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_OBSTRUCTION: i32 = 3;

/// Coefficient vectors off from unit sum by more than this are reported.
pub const RENORMALIZE_WARN: f64 = 1e-6;

/// Upper bound on rows emitted by `classes`.
pub const MAX_CLASS_ROWS: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Modal class, typicality and Chebyshev floor over an N sweep.
    Born,
    /// Every count class at N with multiplicity and measure.
    Classes,
    /// R_N = 1 - m(apportioned class) over an N sweep.
    Residual,
    /// Record operator U applied to a superposed cat.
    Cat,
    /// Superposition observer U' on definite and superposed cats.
    Complement,
    /// Branch measures under seeded random object-basis rotations.
    Invariance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "everett", version, about = "Observer-inclusive measurement experiments")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Outcome measures |C_i|^2, comma separated; renormalized on load.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.5", allow_negative_numbers = true)]
    pub coeffs: Vec<f64>,
    /// Largest N of a sweep, N for `classes`, or number of trials for `invariance`.
    #[arg(long, default_value_t = 1024)]
    pub n: u64,
    /// Typicality tolerance on each class fraction (max norm).
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    pub epsilon: f64,
    /// Cat amplitude |a|^2 (a, b real and positive).
    #[arg(long = "a-sq", default_value_t = 0.5, allow_negative_numbers = true)]
    pub a_sq: f64,
    /// Seed for the random basis rotations of `invariance`.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub coeffs: Vec<f64>,
    pub n: u64,
    pub epsilon: f64,
    pub a_sq: f64,
    pub seed: u64,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("mathematical obstruction: {0}")]
    Obstruction(String),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Obstruction(_) => EXIT_OBSTRUCTION,
            CliError::Io(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoUnitaryCompletion { .. } | Error::NotUnitary { .. } => {
                CliError::Obstruction(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

impl ExperimentConfig {
    /// Validates the parsed arguments. Returns warnings alongside the config.
    pub fn from_cli(cli: Cli) -> Result<(Self, Vec<String>), CliError> {
        let mut warnings = Vec::new();
        if cli.coeffs.is_empty() {
            return Err(CliError::Config("--coeffs needs at least one value".into()));
        }
        if let Some(bad) = cli.coeffs.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(CliError::Config(format!("--coeffs entries must be >= 0, got {bad}")));
        }
        let sum: f64 = cli.coeffs.iter().sum();
        if sum <= 0.0 {
            return Err(CliError::Config("--coeffs must not all be zero".into()));
        }
        if (sum - 1.0).abs() > RENORMALIZE_WARN {
            warnings.push(format!("coefficients sum to {sum}; renormalized"));
        }
        let coeffs = cli.coeffs.iter().map(|c| c / sum).collect();

        if cli.command == Command::Invariance {
            if cli.n == 0 {
                warnings.push("zero invariance trials: the check passes vacuously".into());
            }
        } else if cli.n < 1 {
            return Err(CliError::Config("--n must be >= 1".into()));
        }
        if !(cli.epsilon > 0.0 && cli.epsilon <= 1.0) {
            return Err(CliError::Config(format!("--epsilon must be in (0, 1], got {}", cli.epsilon)));
        }
        if !(cli.a_sq > 0.0 && cli.a_sq < 1.0) {
            return Err(CliError::Config(format!("--a-sq must be in (0, 1), got {}", cli.a_sq)));
        }
        Ok((
            Self {
                command: cli.command,
                coeffs,
                n: cli.n,
                epsilon: cli.epsilon,
                a_sq: cli.a_sq,
                seed: cli.seed,
                format: cli.format,
                out: cli.out,
            },
            warnings,
        ))
    }

    fn coefficients(&self) -> Result<Coefficients, CliError> {
        Ok(Coefficients::from_measures(&self.coeffs)?)
    }

    fn params(&self) -> Result<SuperpositionParams, CliError> {
        Ok(SuperpositionParams::from_a_sq(self.a_sq)?)
    }
}

/// One report value.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    /// `None` for quantities without a finite value, such as `ln 0`.
    MaybeFloat(Option<f64>),
    Bool(bool),
    Str(String),
    Ints(Vec<u64>),
    Floats(Vec<f64>),
}

impl Cell {
    fn log(x: f64) -> Cell {
        Cell::MaybeFloat(x.is_finite().then_some(x))
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::MaybeFloat(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Str(v) => json!(v),
            Cell::Ints(v) => json!(v),
            Cell::Floats(v) => json!(v),
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_float(*v),
            Cell::MaybeFloat(Some(v)) => fmt_float(*v),
            Cell::MaybeFloat(None) => String::new(),
            Cell::Bool(v) => v.to_string(),
            Cell::Str(v) => v.clone(),
            Cell::Ints(v) => v.iter().map(u64::to_string).collect::<Vec<_>>().join(";"),
            Cell::Floats(v) => v.iter().map(|x| fmt_float(*x)).collect::<Vec<_>>().join(";"),
        }
    }
}

/// 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug)]
pub struct Report {
    pub config: ExperimentConfig,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(&'static str, Cell)>,
}

impl Report {
    fn new(config: &ExperimentConfig, columns: Vec<&'static str>) -> Self {
        Self { config: config.clone(), columns, rows: Vec::new(), summary: Vec::new() }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    pub fn summary_value(&self, key: &str) -> Option<&Cell> {
        self.summary.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    pub fn to_json_value(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (col, cell) in self.columns.iter().zip(row) {
                    obj.insert((*col).to_string(), cell.to_json());
                }
                Value::Object(obj)
            })
            .collect();
        let mut summary = Map::new();
        for (k, v) in &self.summary {
            summary.insert((*k).to_string(), v.to_json());
        }
        json!({
            "header": {
                "command": self.config.command,
                "config": self.config,
                "version": env!("CARGO_PKG_VERSION"),
            },
            "body": {
                "columns": self.columns,
                "rows": rows,
                "summary": summary,
            }
        })
    }

    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits::default());
        self.to_json_value().serialize(&mut ser).expect("in-memory serialization");
        out.push(b'\n');
        String::from_utf8(out).expect("serde_json emits UTF-8")
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::to_csv).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn render(&self) -> String {
        match self.config.format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

/// Pretty JSON with floats in 17-significant-digit exponent form.
#[derive(Default)]
struct FixedDigits<'a>(serde_json::ser::PrettyFormatter<'a>);

impl serde_json::ser::Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_float(value).as_bytes())
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// `1, 2, 4, ...` up to `n`, with `n` itself appended when it is not a
/// power of two.
pub fn sweep(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = std::iter::successors(Some(1u64), |k| k.checked_mul(2))
        .take_while(|&k| k <= n)
        .collect();
    if out.last() != Some(&n) {
        out.push(n);
    }
    out
}

pub fn run(config: &ExperimentConfig) -> Result<Report, CliError> {
    match config.command {
        Command::Born => cmd_born(config),
        Command::Classes => cmd_classes(config),
        Command::Residual => cmd_residual(config),
        Command::Cat => cmd_cat(config),
        Command::Complement => cmd_complement(config),
        Command::Invariance => cmd_invariance(config),
    }
}

pub fn cmd_born(config: &ExperimentConfig) -> Result<Report, CliError> {
    let coeffs = config.coefficients()?;
    let target = lagrange_fractions(&coeffs, None).fractions;
    let mut report = Report::new(
        config,
        vec![
            "n",
            "modal_class",
            "modal_fractions",
            "max_fraction_deviation",
            "tie",
            "typicality",
            "chebyshev_floor",
        ],
    );
    for n in sweep(config.n) {
        let modal = modal_class(&coeffs, n);
        let fractions = modal.class.fractions();
        let deviation = fractions
            .iter()
            .zip(&target)
            .map(|(f, p)| (f - p).abs())
            .fold(0.0, f64::max);
        let typical = typicality_measure(&coeffs, n, config.epsilon)?;
        report.push(vec![
            Cell::Int(n),
            Cell::Ints(modal.class.counts().to_vec()),
            Cell::Floats(fractions),
            Cell::Float(deviation),
            Cell::Bool(modal.tie()),
            Cell::Float(typical.linear()),
            Cell::Float(chebyshev_floor(&coeffs, n, config.epsilon)),
        ]);
    }
    report.summary.push(("lagrange_fractions", Cell::Floats(target)));
    Ok(report)
}

pub fn cmd_classes(config: &ExperimentConfig) -> Result<Report, CliError> {
    let coeffs = config.coefficients()?;
    let total = class_total(coeffs.len(), config.n);
    if total > MAX_CLASS_ROWS {
        return Err(CliError::Config(format!(
            "{total} classes at N = {} exceed the row limit {MAX_CLASS_ROWS}",
            config.n
        )));
    }
    let mut report = Report::new(
        config,
        vec!["class", "fractions", "multiplicity", "ln_multiplicity", "measure", "ln_measure"],
    );
    let mut sum = crate::measure::LogSumExp::default();
    for class in all_classes(coeffs.len(), config.n) {
        let count = class_count(&class);
        let m = class_measure(&coeffs, &class)?.measure;
        sum.add(m.log());
        report.push(vec![
            Cell::Ints(class.counts().to_vec()),
            Cell::Floats(class.fractions()),
            Cell::Str(count.exact.map(|c| c.to_string()).unwrap_or_default()),
            Cell::Float(count.ln),
            Cell::Float(m.linear()),
            Cell::log(m.log()),
        ]);
    }
    report.summary.push(("total_measure", Cell::Float(sum.value().linear())));
    Ok(report)
}

/// `vanishes` is true iff `R_N < 0.5` at the largest `N`. The literal
/// residual grows with `N`; the frequency statement holds for the
/// typicality measure reported by `born`.
pub fn cmd_residual(config: &ExperimentConfig) -> Result<Report, CliError> {
    let coeffs = config.coefficients()?;
    let rows: Vec<_> = sweep(config.n).into_iter().map(|n| (n, residual_measure(&coeffs, n))).collect();
    let vanishes = rows.last().is_some_and(|(_, r)| r.residual.linear() < 0.5);
    let mut report = Report::new(config, vec!["n", "class", "class_measure", "residual", "vanishes"]);
    for (n, r) in rows {
        report.push(vec![
            Cell::Int(n),
            Cell::Ints(r.class.counts().to_vec()),
            Cell::Float(r.class_measure.linear()),
            Cell::Float(r.residual.linear()),
            Cell::Bool(vanishes),
        ]);
    }
    report.summary.push(("vanishes", Cell::Bool(vanishes)));
    report.summary.push((
        "note",
        Cell::Str(
            "R_N = 1 - m(modal class) does not tend to 0; the measure of the epsilon-typical \
             classes does (see the born command)"
                .into(),
        ),
    ));
    Ok(report)
}

const STATE_COLUMNS: [&str; 5] = ["kind", "label", "re", "im", "measure"];

pub fn cmd_cat(config: &ExperimentConfig) -> Result<Report, CliError> {
    let p = config.params()?;
    let s = observe_superposition(&p)?;
    let mut report = Report::new(config, STATE_COLUMNS.to_vec());
    for (label, a) in s.terms() {
        report.push(vec![
            Cell::Str("term".into()),
            Cell::Str(label.to_string()),
            Cell::MaybeFloat(Some(a.re)),
            Cell::MaybeFloat(Some(a.im)),
            Cell::Float(a.norm_sqr()),
        ]);
    }
    for (record, m) in cat_branch_measures(&s) {
        report.push(vec![
            Cell::Str("branch".into()),
            Cell::Str(record.name().into()),
            Cell::MaybeFloat(None),
            Cell::MaybeFloat(None),
            Cell::Float(m.linear()),
        ]);
    }
    report.summary.push(("norm", Cell::Float(s.norm())));
    Ok(report)
}

pub fn cmd_complement(config: &ExperimentConfig) -> Result<Report, CliError> {
    let p = config.params()?;
    let op = build_phi_observer(&p)?;
    let basis = cat_basis();
    let mut report = Report::new(config, vec!["kind", "input", "row", "col", "re", "im", "measure"]);
    for (r, row) in op.matrix().rows().enumerate() {
        for (c, v) in row.iter().enumerate() {
            report.push(vec![
                Cell::Str("matrix".into()),
                Cell::Str(String::new()),
                Cell::Str(basis[r].to_string()),
                Cell::Str(basis[c].to_string()),
                Cell::MaybeFloat(Some(v.re)),
                Cell::MaybeFloat(Some(v.im)),
                Cell::MaybeFloat(None),
            ]);
        }
    }
    let inputs = [
        ("live", definite_blank(CatState::Live)),
        ("dead", definite_blank(CatState::Dead)),
        ("plus", superposed_blank(&p, 1.0)?),
        ("minus", superposed_blank(&p, -1.0)?),
    ];
    for (name, input) in inputs {
        let out = op.apply(&input)?;
        for (record, m) in cat_branch_measures(&out) {
            report.push(vec![
                Cell::Str("branch".into()),
                Cell::Str(name.into()),
                Cell::Str(record.name().into()),
                Cell::Str(String::new()),
                Cell::MaybeFloat(None),
                Cell::MaybeFloat(None),
                Cell::MaybeFloat(Some(m.linear())),
            ]);
        }
    }
    report.summary.push(("unitarity_residual", Cell::Float(op.unitarity_residual())));
    report.summary.push(("unitary", Cell::Bool(op.verified_unitary())));
    Ok(report)
}

pub fn cmd_invariance(config: &ExperimentConfig) -> Result<Report, CliError> {
    let p = config.params()?;
    let mut report = Report::new(config, vec!["trial", "max_deviation", "invariant"]);
    let mut worst = 0.0f64;
    for (trial, r) in (0u64..).zip(seeded_invariance_trials(&p, config.seed, config.n)?) {
        worst = worst.max(r.max_deviation);
        report.push(vec![Cell::Int(trial), Cell::Float(r.max_deviation), Cell::Bool(r.invariant)]);
    }
    report.summary.push(("trials", Cell::Int(config.n)));
    report.summary.push(("max_deviation", Cell::Float(worst)));
    report.summary.push(("pass", Cell::Bool(worst <= crate::hilbert::NORM_TOL)));
    report.summary.push(("vacuous", Cell::Bool(config.n == 0)));
    Ok(report)
}

/// Parses, runs and writes one experiment. Returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("everett: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (config, warnings) = ExperimentConfig::from_cli(cli)?;
    for w in &warnings {
        eprintln!("everett: warning: {w}");
    }
    let text = run(&config)?.render();
    match &config.out {
        Some(path) => std::fs::write(path, text)?,
        None => io::Write::write_all(&mut io::stdout().lock(), text.as_bytes())?,
    }
    Ok(())
}
