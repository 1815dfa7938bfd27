//! Command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::decomposition::{fit_least_squares, select_subset, IdentityResiduals, Strategy};
use crate::error::{Error, Result};
use crate::geometry::{contour_lines, default_samples, mcc_surface, profile_line, Cut};
use crate::io::{
    fmt_num, load_csv, write_contours, write_grid, write_profile, DataMatrix, MissingPolicy,
};
use crate::ipd::{muc_ipd, MAX_VARIABLES};
use crate::measures::{muc_det, CorrelationReport};
use crate::minors::{muc_minors, MinorBudget};
use crate::verify::{self, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IDENTITY: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "mucorr",
    version,
    about = "Multivariate correlation and uncorrelation coefficients"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// MCC and MUC of selected columns.
    Mcc(MccArgs),
    /// Least-squares fit of a target on predictors, with the MUC identities.
    Decompose(DecomposeArgs),
    /// Choose predictors minimizing the MUC ratio.
    Select(SelectArgs),
    /// Three-variable MCC surface over two angles, with optional profile and contours.
    Surface(SurfaceArgs),
    /// Randomized cross-check of the determinant identities.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file with a header row, or `-` for standard input.
    #[arg(long)]
    pub input: String,
    /// Drop rows with missing or unparseable selected cells instead of failing.
    #[arg(long)]
    pub drop_missing: bool,
}

impl InputArgs {
    fn load(&self, columns: &[String]) -> Result<DataMatrix> {
        let policy = if self.drop_missing {
            MissingPolicy::DropRow
        } else {
            MissingPolicy::Error
        };
        let data = load_csv(&self.input, Some(columns), policy)?;
        if data.dropped_rows > 0 {
            let s = if data.dropped_rows == 1 { "" } else { "s" };
            eprintln!("{} row{s} dropped", data.dropped_rows);
        }
        Ok(data)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Det,
    Minors,
    Ipd,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Exhaustive,
    Greedy,
}

#[derive(Debug, Args)]
pub struct MccArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    pub cols: Vec<String>,
    #[arg(long, value_enum, default_value = "det")]
    pub route: RouteArg,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub target: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub predictors: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub target: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub pool: Vec<String>,
    /// Number of predictors to choose.
    #[arg(long)]
    pub m: usize,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub strategy: StrategyArg,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    /// Angle between the first two variables, degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Grid spacing in degrees; must divide 180.
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    /// Grid CSV destination, or `-` for standard output.
    #[arg(long)]
    pub out: String,
    /// Profile cut through the (beta, gamma) square: x1,y1,x2,y2.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub cut: Option<Vec<f64>>,
    /// Points sampled along the cut; defaults to one per grid step.
    #[arg(long, requires = "cut")]
    pub samples: Option<usize>,
    /// Profile CSV destination; defaults to `<out>` with a `-profile` suffix.
    #[arg(long, requires = "cut")]
    pub profile_out: Option<String>,
    /// Contour levels of the MCC.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
    /// Contour CSV destination; defaults to `<out>` with a `-contours` suffix.
    #[arg(long, requires = "levels")]
    pub contour_out: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to standard error.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    match run(cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Mcc(a) => run_mcc(&a, out),
        Command::Decompose(a) => run_decompose(&a, out),
        Command::Select(a) => run_select(&a, out),
        Command::Surface(a) => run_surface(&a, out),
        Command::Verify(a) => run_verify(&a, out),
    }
}

fn check_unique(names: &[String]) -> Result<()> {
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(Error::InvalidInput(format!("column '{n}' listed twice")));
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct CrossCheck {
    determinant: f64,
    minors: Option<f64>,
    ipd: Option<f64>,
    /// Largest pairwise difference of the squared MUC across computed routes.
    max_abs_diff: f64,
}

#[derive(Debug, Serialize)]
struct MccOutput {
    #[serde(flatten)]
    report: CorrelationReport,
    columns: Vec<String>,
    cross_check: CrossCheck,
}

fn run_mcc(a: &MccArgs, out: &mut dyn Write) -> Result<i32> {
    check_unique(&a.cols)?;
    let data = a.input.load(&a.cols)?;
    let vars = &data.columns;
    let budget = MinorBudget::from_env()?;
    let det = muc_det(vars)?;

    let minors = match a.route {
        RouteArg::Minors | RouteArg::All => Some(muc_minors(vars, budget)?),
        // the cross-check is skipped, not fatal, when the enumeration is too large
        _ => match muc_minors(vars, budget) {
            Ok(r) => Some(r),
            Err(Error::BudgetExceeded { count, budget }) => {
                eprintln!("minor cross-check skipped: {count} minors exceed budget {budget}");
                None
            }
            Err(e) => return Err(e),
        },
    };
    let ipd = match a.route {
        RouteArg::Ipd => Some(muc_ipd(vars)?),
        RouteArg::All if vars.len() <= MAX_VARIABLES => Some(muc_ipd(vars)?),
        RouteArg::All => {
            eprintln!("expansion route skipped: more than {MAX_VARIABLES} variables");
            None
        }
        _ => None,
    };
    let report = match a.route {
        RouteArg::Det | RouteArg::All => det,
        RouteArg::Minors => minors.expect("minors computed for this route"),
        RouteArg::Ipd => ipd.expect("ipd computed for this route"),
    };
    let values: Vec<f64> = [Some(det), minors, ipd]
        .iter()
        .flatten()
        .map(|r| r.muc_squared)
        .collect();
    let max_abs_diff = values
        .iter()
        .flat_map(|x| values.iter().map(move |y| (x - y).abs()))
        .fold(0.0, f64::max);
    let output = MccOutput {
        report,
        columns: data.column_names.clone(),
        cross_check: CrossCheck {
            determinant: det.muc_squared,
            minors: minors.map(|r| r.muc_squared),
            ipd: ipd.map(|r| r.muc_squared),
            max_abs_diff,
        },
    };
    match a.format {
        Format::Json => write_json(out, &output)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record([
                "mcc",
                "muc",
                "muc_squared",
                "route",
                "m",
                "n",
                "minors",
                "max_abs_diff",
            ])?;
            w.write_record([
                fmt_num(report.mcc),
                fmt_num(report.muc),
                fmt_num(report.muc_squared),
                report.route.as_str().to_string(),
                report.m.to_string(),
                report.n.to_string(),
                output.cross_check.minors.map(fmt_num).unwrap_or_default(),
                fmt_num(max_abs_diff),
            ])?;
            w.flush()?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct DecomposeOutput<'a> {
    target: &'a str,
    predictors: &'a [String],
    coefficients: &'a [f64],
    intercept: f64,
    mse: f64,
    r_squared: f64,
    omega_ratio: f64,
    identity_residuals: IdentityResiduals,
    n: usize,
}

fn run_decompose(a: &DecomposeArgs, out: &mut dyn Write) -> Result<i32> {
    let mut cols = a.predictors.clone();
    cols.push(a.target.clone());
    check_unique(&cols)?;
    let data = a.input.load(&cols)?;
    let (predictors, target) = data.columns.split_at(a.predictors.len());
    let fit = fit_least_squares(predictors, &target[0])?;
    write_json(
        out,
        &DecomposeOutput {
            target: &a.target,
            predictors: &a.predictors,
            coefficients: &fit.coefficients,
            intercept: fit.intercept,
            mse: fit.mse,
            r_squared: fit.r_squared,
            omega_ratio: fit.omega_ratio,
            identity_residuals: fit.identity_residuals,
            n: data.rows(),
        },
    )?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct NamedTraceEntry {
    subset: Vec<String>,
    objective: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SelectOutput {
    target: String,
    chosen: Vec<String>,
    chosen_indices: Vec<usize>,
    objective: f64,
    mse: f64,
    strategy: Strategy,
    trace: Vec<NamedTraceEntry>,
}

fn run_select(a: &SelectArgs, out: &mut dyn Write) -> Result<i32> {
    let mut cols = a.pool.clone();
    cols.push(a.target.clone());
    check_unique(&cols)?;
    let data = a.input.load(&cols)?;
    let (pool, target) = data.columns.split_at(a.pool.len());
    let strategy = match a.strategy {
        StrategyArg::Exhaustive => Strategy::Exhaustive,
        StrategyArg::Greedy => Strategy::GreedyForward,
    };
    let result = select_subset(pool, &target[0], a.m, strategy)?;
    let names = |idx: &[usize]| idx.iter().map(|&i| a.pool[i].clone()).collect::<Vec<_>>();
    write_json(
        out,
        &SelectOutput {
            target: a.target.clone(),
            chosen: names(&result.chosen),
            chosen_indices: result.chosen.clone(),
            objective: result.objective,
            mse: result.mse,
            strategy: result.strategy,
            trace: result
                .trace
                .iter()
                .map(|t| NamedTraceEntry {
                    subset: names(&t.subset),
                    objective: t.objective,
                })
                .collect(),
        },
    )?;
    Ok(EXIT_OK)
}

/// `grid.csv` + `-profile` -> `grid-profile.csv`.
fn sibling_path(out: &str, suffix: &str) -> Result<String> {
    if out == "-" {
        return Err(Error::InvalidInput(format!(
            "an explicit --{suffix}-out is required when the grid goes to standard output"
        )));
    }
    let p = Path::new(out);
    let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("surface");
    let ext = p.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    let name = format!("{stem}-{suffix}.{ext}");
    Ok(match p.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => PathBuf::from(dir).join(name),
        _ => PathBuf::from(name),
    }
    .to_string_lossy()
    .into_owned())
}

fn with_output<F>(path: &str, out: &mut dyn Write, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    if path == "-" {
        write(out)
    } else {
        let mut file = BufWriter::new(File::create(path)?);
        write(&mut file)?;
        file.flush()?;
        Ok(())
    }
}

fn run_surface(a: &SurfaceArgs, out: &mut dyn Write) -> Result<i32> {
    let grid = mcc_surface(a.alpha, a.step)?;
    let profile = match &a.cut {
        Some(c) => {
            if c.len() != 4 {
                return Err(Error::InvalidInput(format!(
                    "--cut takes 4 comma-separated values, got {}",
                    c.len()
                )));
            }
            let cut = Cut {
                start: (c[0], c[1]),
                end: (c[2], c[3]),
            };
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("cut coordinates must be finite".into()));
            }
            let samples = a.samples.unwrap_or_else(|| default_samples(&grid, cut));
            if samples < 2 {
                return Err(Error::InvalidInput(
                    "a profile needs at least 2 samples".into(),
                ));
            }
            let path = match &a.profile_out {
                Some(p) => p.clone(),
                None => sibling_path(&a.out, "profile")?,
            };
            Some((profile_line(&grid, cut, samples)?, path))
        }
        None => None,
    };
    let contours = match &a.levels {
        Some(levels) => {
            if levels.iter().any(|l| !l.is_finite()) {
                return Err(Error::InvalidInput("contour levels must be finite".into()));
            }
            let path = match &a.contour_out {
                Some(p) => p.clone(),
                None => sibling_path(&a.out, "contours")?,
            };
            Some((contour_lines(&grid, levels), path))
        }
        None => None,
    };

    with_output(&a.out, out, |w| write_grid(&grid, w))?;
    if let Some((points, path)) = profile {
        with_output(&path, out, |w| write_profile(&points, w))?;
    }
    if let Some((sets, path)) = contours {
        with_output(&path, out, |w| write_contours(&sets, w))?;
    }
    Ok(EXIT_OK)
}

fn run_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let report = verify::run(VerifyConfig {
        m: a.m,
        trials: a.trials,
        seed: a.seed,
        tol: a.tol,
    })?;
    out.write_all(report.render().as_bytes())?;
    out.flush()?;
    if report.passed() {
        Ok(EXIT_OK)
    } else {
        eprintln!("error: identity check failed");
        Ok(EXIT_IDENTITY)
    }
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}
