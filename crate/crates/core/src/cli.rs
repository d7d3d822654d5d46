//! The `fracseries` command line.
//!
//! Every verb writes CSV: `#`-prefixed lines echoing the resolved
//! configuration, one column-name row, then data rows. Floats are printed
//! in scientific notation with 17 significant digits, so identical
//! invocations give byte-identical output.
//!
//! Exit codes: 0 success, 1 bad input or configuration, 2 numerical
//! failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::expansion::{frac_derivative, gaussian_hermite_series, Definition, ExpansionConfig, Order};
use crate::fde::{solve_and_compare, FdeKind, FdeProblem, SolveConfig, SolveReport};
use crate::grid::Grid;
use crate::jets::CatalogFn;
use crate::metrics::{truncation_sweep, Reference, SweepResult, SweepSpec};
use crate::selftest;
use crate::specials::{fox_wright, gamma, hermite, recip_gamma, MittagLeffler};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fracseries", version, about = "Fractional derivatives as series of integer derivatives")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Truncated series at one point or along a grid, with per-term trace.
    Deriv(DerivArgs),
    /// Truncation error against a reference curve.
    Sweep(SweepArgs),
    /// Solve a truncated fractional ODE and compare with the exact solution.
    Fde(FdeArgs),
    /// Tabulate a special function.
    Special(SpecialArgs),
    /// Run the built-in invariant checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DefArg {
    Gl,
    Rl,
    Caputo,
}

impl From<DefArg> for Definition {
    fn from(d: DefArg) -> Self {
        match d {
            DefArg::Gl => Definition::GrunwaldLetnikov,
            DefArg::Rl => Definition::RiemannLiouville,
            DefArg::Caputo => Definition::Caputo,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Constant,
    Variable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpecialName {
    Gamma,
    Rgamma,
    MittagLeffler,
    FoxWrightGaussian,
    Hermite,
    GaussianHermite,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_fn(s: &str) -> Result<CatalogFn, String> {
    s.parse::<CatalogFn>().map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    s.parse::<Grid>().map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct DerivArgs {
    /// sech, tanh, sin, cos, gaussian, exp, power:<p> or constant:<c>.
    #[arg(long = "fn", value_parser = parse_fn)]
    pub function: CatalogFn,
    #[arg(long = "def", value_enum, default_value = "caputo")]
    pub definition: DefArg,
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    /// Single evaluation point; ignored when --xgrid is given.
    #[arg(long, default_value_t = 1.0)]
    pub x: f64,
    /// Evaluation grid start:end:count.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
    pub xgrid: Option<Grid>,
    #[arg(long = "log-grid")]
    pub log_grid: bool,
    #[arg(long, default_value_t = 3)]
    pub terms: usize,
    #[arg(long, default_value_t = 0.0)]
    pub base: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SweepArgs {
    #[arg(long = "fn", value_parser = parse_fn)]
    pub function: CatalogFn,
    #[arg(long = "def", value_enum, default_value = "caputo")]
    pub definition: DefArg,
    /// Comma-separated orders.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub q: Vec<f64>,
    /// Comma-separated truncations.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,5,8")]
    pub terms: Vec<usize>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid, default_value = "0.1:5:512")]
    pub xgrid: Grid,
    #[arg(long = "log-grid")]
    pub log_grid: bool,
    #[arg(long, default_value_t = 0.0)]
    pub base: f64,
    /// Terms in the reference series (default 40).
    #[arg(long = "reference-terms", conflicts_with = "reference_grid")]
    pub reference_terms: Option<usize>,
    /// Use the discrete GL sum on this many points as reference (default
    /// for the Gaussian: 100000).
    #[arg(long = "reference-grid")]
    pub reference_grid: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct FdeArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    #[arg(long, default_value_t = 3)]
    pub terms: usize,
    /// Comparison grid; default 0.1:10:200 (constant) or 1:10:200 (variable).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
    pub grid: Option<Grid>,
    #[arg(long = "log-grid")]
    pub log_grid: bool,
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    #[arg(long, default_value_t = 20.0)]
    pub xmax: f64,
    #[arg(long, default_value_t = 100_000)]
    pub steps: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SpecialArgs {
    #[arg(long, value_enum)]
    pub name: SpecialName,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid, default_value = "-3:3:61")]
    pub xgrid: Grid,
    #[arg(long = "log-grid")]
    pub log_grid: bool,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Hermite degree, or the number of terms for gaussian-hermite.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Order for gaussian-hermite.
    #[arg(long, default_value_t = 1.5)]
    pub q: f64,
    #[command(flatten)]
    pub output: Output,
}

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn resolve_grid(g: Grid, log: bool) -> Result<Vec<f64>, Error> {
    Ok(if log { g.logarithmic()?.points() } else { g.points() })
}

/// Header lines, column row and data rows of one CSV document.
#[derive(Debug, Default)]
struct Table {
    header: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(verb: &str) -> Self {
        Self {
            header: vec![format!("# fracseries {verb}")],
            ..Self::default()
        }
    }

    fn echo(&mut self, key: &str, value: impl std::fmt::Display) {
        self.header.push(format!("# {key} = {value}"));
    }

    fn write_to(&self, w: &mut dyn Write) -> io::Result<()> {
        for h in &self.header {
            w.write_all(h.as_bytes())?;
            w.write_all(b"\n")?;
        }
        w.write_all(self.columns.join(",").as_bytes())?;
        w.write_all(b"\n")?;
        for r in &self.rows {
            w.write_all(r.join(",").as_bytes())?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn deriv(a: &DerivArgs) -> Result<Table, Error> {
    let cfg = ExpansionConfig::new(a.definition.into(), Order::new(a.q)?, a.base, a.terms)?;
    let xs = match a.xgrid {
        Some(g) => resolve_grid(g, a.log_grid)?,
        None => vec![a.x],
    };
    let mut t = Table::new("deriv");
    t.echo("fn", a.function);
    t.echo("def", cfg.definition);
    t.echo("q", fmt_float(cfg.order.value()));
    t.echo("base", fmt_float(cfg.base));
    t.echo("terms", cfg.n_terms);
    match a.xgrid {
        Some(g) => t.echo("xgrid", if a.log_grid { g.logarithmic()? } else { g }),
        None => t.echo("x", fmt_float(a.x)),
    }
    t.columns = ["x", "value"].iter().map(|s| s.to_string()).collect();
    t.columns.extend((0..cfg.n_terms).map(|k| format!("term_{k}")));
    for x in xs {
        let ev = frac_derivative(&a.function, x, &cfg)?;
        let mut row = vec![fmt_float(x), fmt_float(ev.value)];
        row.extend(ev.terms.iter().map(|s| fmt_float(s.contribution)));
        t.rows.push(row);
    }
    Ok(t)
}

fn sweep_table(r: &SweepResult) -> Table {
    let spec = &r.spec;
    let mut t = Table::new("sweep");
    t.echo("fn", spec.function);
    t.echo("def", spec.definition);
    t.echo("base", fmt_float(spec.base));
    t.echo("q", spec.orders.iter().map(|q| fmt_float(*q)).collect::<Vec<_>>().join(";"));
    t.echo("terms", spec.truncations.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(";"));
    t.echo("points", spec.grid.len());
    t.echo("reference", spec.reference.describe());
    for row in &r.rows {
        t.header.push(format!(
            "# summary q = {} terms = {}: mean_abs = {} max_abs = {} excluded = {}",
            fmt_float(row.q),
            row.n_terms,
            fmt_float(row.summary.mean_abs),
            fmt_float(row.summary.max_abs),
            row.summary.excluded
        ));
    }
    t.columns = ["q", "terms", "x", "reference", "truncated", "rel_error", "log10_abs_error"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let per_q = spec.truncations.len();
    for (i, row) in r.rows.iter().enumerate() {
        let reference = &r.references[i / per_q];
        let logs = row.log10_errors();
        for j in 0..spec.grid.len() {
            t.rows.push(vec![
                fmt_float(row.q),
                row.n_terms.to_string(),
                fmt_float(spec.grid[j]),
                fmt_float(reference[j]),
                fmt_float(row.values[j]),
                fmt_float(row.errors[j]),
                fmt_float(logs[j]),
            ]);
        }
    }
    t
}

fn sweep(a: &SweepArgs) -> Result<Table, Error> {
    let grid = resolve_grid(a.xgrid, a.log_grid)?;
    let mut spec = SweepSpec::new(a.function, a.definition.into(), a.q.clone(), a.terms.clone(), grid);
    spec.base = a.base;
    if let Some(n) = a.reference_terms {
        spec.reference = Reference::Series { n_terms: n };
    }
    if let Some(n) = a.reference_grid {
        spec.reference = Reference::GrunwaldLetnikov { n_grid: n };
    }
    Ok(sweep_table(&truncation_sweep(&spec)?))
}

fn fde_table(r: &SolveReport, grid_desc: String) -> Table {
    let p = &r.problem;
    let mut t = Table::new("fde");
    t.echo("kind", p.kind);
    t.echo("lambda", fmt_float(p.lambda));
    t.echo("q", fmt_float(p.q.value()));
    t.echo("terms", p.n_terms);
    t.echo("f0", fmt_float(p.f0));
    t.echo("grid", grid_desc);
    t.echo("eps", fmt_float(r.config.eps));
    t.echo("xmax", fmt_float(r.config.x_max));
    t.echo("steps", r.config.steps);
    for (k, v) in &r.diagnostics {
        t.echo(k, fmt_float(*v));
    }
    t.echo("max_abs_rel_error", fmt_float(r.max_abs_error()));
    t.columns = ["x", "numeric", "exact", "rel_error"].iter().map(|s| s.to_string()).collect();
    for i in 0..r.grid.len() {
        t.rows.push(vec![
            fmt_float(r.grid[i]),
            fmt_float(r.numeric[i]),
            fmt_float(r.exact[i]),
            fmt_float(r.rel_error[i]),
        ]);
    }
    t
}

fn fde(a: &FdeArgs) -> Result<Table, Error> {
    let kind = match a.kind {
        KindArg::Constant => FdeKind::ConstantCoeff,
        KindArg::Variable => FdeKind::VariableCoeff,
    };
    let problem = FdeProblem::new(kind, a.lambda)?.with_truncation(a.q, a.terms)?;
    let grid = match a.grid {
        Some(g) => g,
        None => match kind {
            FdeKind::ConstantCoeff => Grid::new(0.1, 10.0, 200, false)?,
            FdeKind::VariableCoeff => Grid::new(1.0, 10.0, 200, false)?,
        },
    };
    let grid = if a.log_grid { grid.logarithmic()? } else { grid };
    let cfg = SolveConfig {
        eps: a.eps,
        x_max: a.xmax,
        steps: a.steps,
        ..SolveConfig::default()
    };
    let report = solve_and_compare(&problem, &grid.points(), &cfg)?;
    Ok(fde_table(&report, grid.to_string()))
}

fn special(a: &SpecialArgs) -> Result<Table, Error> {
    let xs = resolve_grid(a.xgrid, a.log_grid)?;
    let mut t = Table::new("special");
    t.echo("name", format!("{:?}", a.name).to_ascii_lowercase());
    t.echo("xgrid", if a.log_grid { a.xgrid.logarithmic()? } else { a.xgrid });
    match a.name {
        SpecialName::MittagLeffler => {
            t.echo("alpha", fmt_float(a.alpha));
            t.echo("beta", fmt_float(a.beta));
        }
        SpecialName::Hermite => t.echo("k", a.k),
        SpecialName::GaussianHermite => {
            t.echo("q", fmt_float(a.q));
            t.echo("terms", a.k);
        }
        _ => {}
    }
    t.columns = vec!["x".into(), "value".into()];
    let ml = MittagLeffler::new(a.alpha, a.beta);
    for x in xs {
        let v = match a.name {
            SpecialName::Gamma => gamma(x)?,
            SpecialName::Rgamma => recip_gamma(x),
            SpecialName::MittagLeffler => {
                let r = ml.clone()?.evaluate(x)?;
                if r.cancellation_warning {
                    t.header.push(format!("# warning: cancellation expected at x = {}", fmt_float(x)));
                }
                r.value
            }
            SpecialName::FoxWrightGaussian => fox_wright(&[], &[(0.5, -0.5)], x)?,
            SpecialName::Hermite => hermite(a.k, x),
            SpecialName::GaussianHermite => gaussian_hermite_series(x, Order::new(a.q)?, a.k)?,
        };
        t.rows.push(vec![fmt_float(x), fmt_float(v)]);
    }
    Ok(t)
}

fn selftest_table() -> (Table, bool) {
    let mut t = Table::new("selftest");
    t.columns = vec!["check".into(), "result".into(), "detail".into()];
    let mut all = true;
    for c in selftest::run_all() {
        all &= c.passed;
        t.rows.push(vec![
            c.name.replace(',', ";"),
            if c.passed { "pass".into() } else { "FAIL".into() },
            c.detail.replace(',', ";"),
        ]);
    }
    (t, all)
}

fn emit(table: &Table, out: &Option<PathBuf>, stdout: &mut dyn Write) -> io::Result<()> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write_to(&mut w)?;
            w.flush()
        }
        None => table.write_to(stdout),
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INPUT
    }
}

/// Parses `argv` (including the program name), runs the verb and returns
/// the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let (result, out) = match &cli.command {
        Command::Deriv(a) => (deriv(a), &a.output.out),
        Command::Sweep(a) => (sweep(a), &a.output.out),
        Command::Fde(a) => (fde(a), &a.output.out),
        Command::Special(a) => (special(a), &a.output.out),
        Command::Selftest => {
            let (t, ok) = selftest_table();
            if let Err(e) = t.write_to(stdout) {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_INPUT;
            }
            return if ok { EXIT_OK } else { EXIT_NUMERICAL };
        }
    };
    match result {
        Ok(table) => match emit(&table, out, stdout) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                EXIT_INPUT
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
