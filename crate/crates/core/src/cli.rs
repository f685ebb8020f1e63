//! Command-line front end: `compute`, `batch` and `validate`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::batch::{
    read_table, run_batch, write_histograms, write_table, write_table_to, BatchOptions,
    WriteOptions,
};
use crate::closed_form::{
    hwd_estimate, lncvr_estimate, lnor_estimate, lnrom_estimate, lnrr_estimate,
    reciprocal_estimate, smd_estimate, EstimatorResult, Order, SmdEstimator,
};
use crate::engine::{safe_estimate, BootstrapResult, SafeConfig, DEFAULT_REPLICATES};
use crate::error::Error;
use crate::models::{Truncation, VarianceMode};
use crate::summary::{ContingencyTable, Design, GenotypeCounts, GroupSummary};
use crate::transforms::{CcPolicy, EffectInputs, EffectSizeKind};
use crate::validation::{simulate_scenario, write_scores, Population, Scenario, DEFAULT_GRID};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "safe",
    version,
    about = "Single-fit parametric bootstrap (SAFE) for meta-analytic effect sizes",
    long_about = "Fits a sampling model to summary statistics once, draws B replicates, \
                  transforms each to the effect size and reports the bootstrap SE and the \
                  bias-corrected point next to the closed-form delta-method values."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate one effect size from summary statistics given as flags.
    Compute(ComputeArgs),
    /// Run SAFE on every row of a CSV/TSV dataset.
    Batch(BatchArgs),
    /// Simulation study scoring SAFE against the closed forms.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DesignArg {
    Independent,
    Paired,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TruncateArg {
    /// Discard replicate rows that leave the transform's domain.
    Reject,
    /// Redraw until every positive-only coordinate is positive.
    BoundedDraw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Delimiter {
    Comma,
    Tab,
}

impl Delimiter {
    fn byte(self) -> u8 {
        match self {
            Delimiter::Comma => b',',
            Delimiter::Tab => b'\t',
        }
    }
}

#[derive(Debug, Args)]
struct SafeArgs {
    /// Effect size to compute.
    #[arg(long, value_enum)]
    kind: EffectSizeKind,
    /// Number of bootstrap replicates (at least 1000).
    #[arg(long = "B", value_name = "B", default_value_t = DEFAULT_REPLICATES)]
    replicates: usize,
    /// Master seed; falls back to SAFE_SEED, then 0.
    #[arg(long, env = "SAFE_SEED", default_value_t = 0)]
    seed: u64,
    /// Continuity correction added to counts when a zero occurs.
    #[arg(long, value_name = "ADD", default_value_t = 0.5)]
    cc_add: f64,
    /// Sampling model for the group variances in SMD and lnCVR.
    #[arg(long, value_enum, default_value_t = VarianceMode::Gaussian)]
    var_model: VarianceMode,
    /// Handling of replicate means or variances that fall out of range.
    #[arg(long, value_enum, default_value_t = TruncateArg::Reject)]
    truncate: TruncateArg,
    /// Expansion order for the lnRoM/lnCVR closed-form reference columns.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    order: u8,
    /// Independent or paired (matched) groups.
    #[arg(long, value_enum)]
    design: Option<DesignArg>,
    /// Within-pair correlation; implies a paired design.
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
}

impl SafeArgs {
    fn config(&self) -> Result<SafeConfig, CliError> {
        let cc = CcPolicy::new(self.cc_add).map_err(CliError::usage)?;
        let config = SafeConfig {
            replicates: self.replicates,
            seed: self.seed,
            stream: 0,
            cc,
            variance_mode: self.var_model,
            truncation: match self.truncate {
                TruncateArg::Reject => Truncation::Reject,
                TruncateArg::BoundedDraw => Truncation::BoundedDraw,
            },
            keep_replicates: false,
        };
        config.validate().map_err(CliError::usage)?;
        Ok(config)
    }

    fn order(&self) -> Order {
        Order::from_number(self.order).unwrap_or_default()
    }

    /// Correlation for a paired design, `None` for independent.
    fn paired_r(&self) -> Result<Option<f64>, CliError> {
        match (self.design, self.r) {
            (Some(DesignArg::Independent), Some(_)) => {
                Err(CliError::Usage("--r conflicts with --design independent".into()))
            }
            (Some(DesignArg::Paired), None) => {
                Err(CliError::Usage("--design paired needs --r".into()))
            }
            (_, r) => {
                if r.is_some() && !self.kind.is_two_group_continuous() {
                    return Err(CliError::Usage(format!("--r does not apply to {}", self.kind)));
                }
                Ok(r)
            }
        }
    }
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Group 1 mean.
    #[arg(long, allow_negative_numbers = true)]
    m1: Option<f64>,
    /// Group 1 standard deviation.
    #[arg(long)]
    sd1: Option<f64>,
    /// Group 1 size (also the group-1 total for binary data).
    #[arg(long)]
    n1: Option<u64>,
    /// Group 2 mean.
    #[arg(long, allow_negative_numbers = true)]
    m2: Option<f64>,
    /// Group 2 standard deviation.
    #[arg(long)]
    sd2: Option<f64>,
    /// Group 2 size (also the group-2 total for binary data).
    #[arg(long)]
    n2: Option<u64>,
    /// Single-group mean (reciprocal).
    #[arg(long, allow_negative_numbers = true)]
    mean: Option<f64>,
    /// Single-group standard deviation (reciprocal).
    #[arg(long)]
    sd: Option<f64>,
    /// Single-group size (reciprocal).
    #[arg(long)]
    n: Option<u64>,
    /// Raw observations, comma separated (reciprocal; replaces --mean/--sd/--n).
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    values: Option<Vec<f64>>,
    /// Events in group 1.
    #[arg(long)]
    a: Option<u64>,
    /// Non-events in group 1.
    #[arg(long)]
    b: Option<u64>,
    /// Events in group 2.
    #[arg(long)]
    c: Option<u64>,
    /// Non-events in group 2.
    #[arg(long)]
    d: Option<u64>,
    /// Homozygous major genotype count.
    #[arg(long = "nAA", value_name = "COUNT")]
    n_aa: Option<u64>,
    /// Heterozygous genotype count.
    #[arg(long = "nAa", value_name = "COUNT")]
    n_het: Option<u64>,
    /// Homozygous minor genotype count.
    #[arg(long = "naa", value_name = "COUNT")]
    n_bb: Option<u64>,
}

#[derive(Debug, Args)]
struct ComputeArgs {
    #[command(flatten)]
    safe: SafeArgs,
    #[command(flatten)]
    inputs: InputArgs,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Decimal places in text and CSV output.
    #[arg(long, default_value_t = 4)]
    round: usize,
}

#[derive(Debug, Args)]
struct BatchArgs {
    #[command(flatten)]
    safe: SafeArgs,
    /// Input table with a header row.
    #[arg(long)]
    input: PathBuf,
    /// Output table; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Field delimiter for input and output.
    #[arg(long, value_enum, default_value_t = Delimiter::Comma)]
    delimiter: Delimiter,
    /// Add closed-form reference columns yi_ref and vi_ref.
    #[arg(long)]
    compare: bool,
    /// Decimal places for computed columns (full precision by default).
    #[arg(long)]
    round: Option<usize>,
    /// Stop at the first failing row instead of recording its error.
    #[arg(long)]
    strict: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Write per-row histograms of the replicates to this file.
    #[arg(long)]
    histogram: Option<PathBuf>,
    /// Bins per histogram.
    #[arg(long, default_value_t = 50)]
    bins: usize,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Effect size to study.
    #[arg(long, value_enum)]
    kind: EffectSizeKind,
    /// Sample sizes per group, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_GRID.to_vec())]
    n_grid: Vec<u64>,
    /// Replications per grid cell.
    #[arg(long, default_value_t = crate::validation::DEFAULT_REPLICATIONS)]
    reps: usize,
    /// Bootstrap replicates per SAFE call.
    #[arg(long = "B", value_name = "B", default_value_t = DEFAULT_REPLICATES)]
    replicates: usize,
    /// Master seed; falls back to SAFE_SEED, then 0.
    #[arg(long, env = "SAFE_SEED", default_value_t = 0)]
    seed: u64,
    /// Population mean of group 1 (or the single group).
    #[arg(long, allow_negative_numbers = true)]
    mu1: Option<f64>,
    /// Population SD of group 1 (or the single group).
    #[arg(long)]
    sigma1: Option<f64>,
    /// Population mean of group 2.
    #[arg(long, allow_negative_numbers = true)]
    mu2: Option<f64>,
    /// Population SD of group 2.
    #[arg(long)]
    sigma2: Option<f64>,
    /// Event probability in group 1.
    #[arg(long)]
    p1: Option<f64>,
    /// Event probability in group 2.
    #[arg(long)]
    p2: Option<f64>,
    /// Genotype probabilities AA,Aa,aa.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    probs: Option<Vec<f64>>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Score table destination; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(Error),
}

impl CliError {
    fn usage(e: Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(source: std::io::Error) -> Self {
        CliError::Data(Error::Io {
            path: "<stdout>".into(),
            source,
        })
    }
}

fn need<T: Copy>(v: Option<T>, flag: &str, kind: EffectSizeKind) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("{kind} needs --{flag}")))
}

fn build_inputs(kind: EffectSizeKind, i: &InputArgs, r: Option<f64>) -> Result<EffectInputs, CliError> {
    let group = |m: Option<f64>, s: Option<f64>, n: Option<u64>, k: char| -> Result<GroupSummary, CliError> {
        Ok(GroupSummary::new(
            need(m, &format!("m{k}"), kind)?,
            need(s, &format!("sd{k}"), kind)?,
            need(n, &format!("n{k}"), kind)?,
        )?)
    };
    Ok(match kind {
        EffectSizeKind::Reciprocal => match &i.values {
            Some(xs) => {
                if i.mean.is_some() || i.sd.is_some() || i.n.is_some() {
                    return Err(CliError::Usage("--values conflicts with --mean/--sd/--n".into()));
                }
                EffectInputs::Reciprocal(GroupSummary::from_sample(xs)?)
            }
            None => EffectInputs::Reciprocal(GroupSummary::new(
                need(i.mean, "mean", kind)?,
                need(i.sd, "sd", kind)?,
                need(i.n, "n", kind)?,
            )?),
        },
        EffectSizeKind::LnRoM | EffectSizeKind::Smd | EffectSizeKind::LnCvr => {
            let design = match r {
                Some(r) => Design::paired(r)?,
                None => Design::Independent,
            };
            EffectInputs::two_groups(
                kind,
                group(i.m1, i.sd1, i.n1, '1')?,
                group(i.m2, i.sd2, i.n2, '2')?,
                design,
            )?
        }
        EffectSizeKind::LnOR | EffectSizeKind::LnRR => {
            let a = need(i.a, "a", kind)?;
            let c = need(i.c, "c", kind)?;
            let t = match (i.b, i.d, i.n1, i.n2) {
                (Some(b), Some(d), None, None) => ContingencyTable::new(a, b, c, d)?,
                (None, None, Some(n1), Some(n2)) => ContingencyTable::from_totals(a, n1, c, n2)?,
                _ => {
                    return Err(CliError::Usage(format!(
                        "{kind} needs --b and --d, or --n1 and --n2"
                    )))
                }
            };
            if kind == EffectSizeKind::LnOR {
                EffectInputs::LnOR(t)
            } else {
                EffectInputs::LnRR(t)
            }
        }
        EffectSizeKind::Hwd => EffectInputs::Hwd(GenotypeCounts::new(
            need(i.n_aa, "nAA", kind)?,
            need(i.n_het, "nAa", kind)?,
            need(i.n_bb, "naa", kind)?,
        )?),
    })
}

#[derive(Debug, Serialize)]
struct Column {
    method: String,
    point: f64,
    se: f64,
}

fn closed_form_columns(inputs: &EffectInputs, cc: CcPolicy) -> Result<Vec<Column>, CliError> {
    let col = |label: &str, r: EstimatorResult| Column {
        method: label.to_string(),
        point: r.point,
        se: r.se,
    };
    Ok(match inputs {
        EffectInputs::Reciprocal(g) => vec![col("First", reciprocal_estimate(g)?)],
        EffectInputs::LnRoM { g1, g2, design } => {
            let mut v = vec![col("First", lnrom_estimate(g1, g2, Order::First, *design)?)];
            if !design.is_paired() {
                v.push(col("Second", lnrom_estimate(g1, g2, Order::Second, *design)?));
            }
            v
        }
        EffectInputs::Smd { g1, g2, design } => {
            if design.is_paired() {
                Vec::new()
            } else {
                vec![
                    col("d", smd_estimate(g1, g2, SmdEstimator::CohenD)?.0),
                    col("g", smd_estimate(g1, g2, SmdEstimator::HedgesG)?.0),
                ]
            }
        }
        EffectInputs::LnOR(t) => vec![col("First", lnor_estimate(t, cc))],
        EffectInputs::LnRR(t) => vec![col("First", lnrr_estimate(t, cc))],
        EffectInputs::LnCvr { g1, g2, design } => vec![
            col("First", lncvr_estimate(g1, g2, Order::First, *design)?),
            col("Second", lncvr_estimate(g1, g2, Order::Second, *design)?),
        ],
        EffectInputs::Hwd(g) => vec![col("First", hwd_estimate(g, cc))],
    })
}

#[derive(Debug, Serialize)]
struct ComputeReport<'a> {
    kind: EffectSizeKind,
    inputs: &'a EffectInputs,
    replicates: usize,
    seed: u64,
    closed_form: &'a [Column],
    safe: &'a BootstrapResult,
}

fn compute(args: &ComputeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = args.safe.config()?;
    let r = args.safe.paired_r()?;
    let inputs = build_inputs(args.safe.kind, &args.inputs, r)?;
    let mut columns = closed_form_columns(&inputs, config.cc)?;
    let result = safe_estimate(&inputs, &config)?;
    let k = args.round;
    match args.format {
        Format::Text => {
            columns.push(Column {
                method: "SAFE".into(),
                point: result.theta_bc,
                se: result.se_safe,
            });
            let width = k + 6;
            writeln!(out, "{} (B = {}, seed = {})", inputs.kind(), config.replicates, config.seed)?;
            write!(out, "{:<6}", "")?;
            for c in &columns {
                write!(out, "{:>width$}", c.method)?;
            }
            writeln!(out)?;
            for (label, pick) in [("Point", 0), ("SE", 1)] {
                write!(out, "{label:<6}")?;
                for c in &columns {
                    let v = if pick == 0 { c.point } else { c.se };
                    write!(out, "{v:>width$.k$}")?;
                }
                writeln!(out)?;
            }
            writeln!(
                out,
                "theta_hat {:.k$}  bias {:.k$}  valid {}/{}  cc_applied {}",
                result.theta_hat, result.bias, result.valid, result.drawn, result.cc_applied
            )?;
            if !result.warnings.is_empty() {
                let codes: Vec<&str> = result.warnings.iter().map(|w| w.code()).collect();
                writeln!(out, "warnings: {}", codes.join(", "))?;
            }
        }
        Format::Csv => {
            columns.push(Column {
                method: "SAFE".into(),
                point: result.theta_bc,
                se: result.se_safe,
            });
            writeln!(out, "method,point,se")?;
            for c in &columns {
                writeln!(out, "{},{:.k$},{:.k$}", c.method, c.point, c.se)?;
            }
        }
        Format::Json => {
            let report = ComputeReport {
                kind: inputs.kind(),
                inputs: &inputs,
                replicates: config.replicates,
                seed: config.seed,
                closed_form: &columns,
                safe: &result,
            };
            serde_json::to_writer_pretty(&mut *out, &report)
                .map_err(|e| CliError::Data(Error::invalid(e.to_string())))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn batch(args: &BatchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = args.safe.config()?;
    let r_override = args.safe.paired_r()?;
    if args.threads == Some(0) || (args.histogram.is_some() && args.bins == 0) {
        return Err(CliError::Usage("--threads and --bins must be positive".into()));
    }
    let delimiter = args.delimiter.byte();
    let table = read_table(&args.input, args.safe.kind, None, delimiter)?;
    let options = BatchOptions {
        compare: args.compare,
        strict: args.strict,
        threads: args.threads,
        r_override,
        order: args.safe.order(),
        histogram_bins: args.histogram.as_ref().map(|_| args.bins),
    };
    let rows = run_batch(&table, &config, &options)?;
    let wopts = WriteOptions {
        delimiter,
        round: args.round,
        compare: args.compare,
    };
    match &args.output {
        Some(path) => write_table(path, &table.headers, &rows, wopts)?,
        None => write_table_to(&mut *out, &table.headers, &rows, wopts)?,
    }
    if let Some(path) = &args.histogram {
        write_histograms(path, &rows, delimiter)?;
    }
    Ok(())
}

fn population(args: &ValidateArgs, default: Population) -> Result<Population, CliError> {
    let any_normal = args.mu1.is_some() || args.sigma1.is_some() || args.mu2.is_some() || args.sigma2.is_some();
    let any_binary = args.p1.is_some() || args.p2.is_some();
    let all = |xs: &[Option<f64>], names: &str| -> Result<Vec<f64>, CliError> {
        xs.iter()
            .map(|x| x.ok_or_else(|| CliError::Usage(format!("population needs all of {names}"))))
            .collect()
    };
    Ok(match default {
        Population::Normal { .. } if any_normal => {
            let v = all(&[args.mu1, args.sigma1], "--mu1, --sigma1")?;
            Population::Normal { mu: v[0], sigma: v[1] }
        }
        Population::TwoNormal { .. } if any_normal => {
            let v = all(
                &[args.mu1, args.sigma1, args.mu2, args.sigma2],
                "--mu1, --sigma1, --mu2, --sigma2",
            )?;
            Population::TwoNormal {
                mu1: v[0],
                sigma1: v[1],
                mu2: v[2],
                sigma2: v[3],
            }
        }
        Population::TwoBernoulli { .. } if any_binary => {
            let v = all(&[args.p1, args.p2], "--p1, --p2")?;
            Population::TwoBernoulli { p1: v[0], p2: v[1] }
        }
        Population::Genotypes { .. } if args.probs.is_some() => {
            let p = args.probs.as_deref().unwrap_or_default();
            Population::Genotypes {
                probs: [p[0], p[1], p[2]],
            }
        }
        other => {
            if any_normal || any_binary || args.probs.is_some() {
                return Err(CliError::Usage(format!(
                    "population flags do not match kind {}",
                    args.kind
                )));
            }
            other
        }
    })
}

fn validate(args: &ValidateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let base = Scenario::default_for(args.kind, args.seed);
    let scenario = Scenario {
        population: population(args, base.population)?,
        n_grid: args.n_grid.clone(),
        replications: args.reps,
        config: SafeConfig {
            replicates: args.replicates,
            ..base.config
        },
        ..base
    };
    scenario.validate().map_err(CliError::usage)?;
    let table = match args.threads {
        Some(0) => return Err(CliError::Usage("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| simulate_scenario(&scenario))?,
        None => simulate_scenario(&scenario)?,
    };
    match &args.output {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            write_scores(file, &scenario, &table)?
        }
        None => write_scores(&mut *out, &scenario, &table)?,
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command, returning the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Compute(a) => compute(a, out),
        Command::Batch(a) => batch(a, out),
        Command::Validate(a) => validate(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Data(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DATA
        }
    }
}

/// The full `--help` text of a subcommand, or of the top level for `None`.
pub fn help_text(subcommand: Option<&str>) -> String {
    use clap::CommandFactory;
    let mut cmd = Cli::command();
    match subcommand {
        Some(name) => cmd
            .find_subcommand_mut(name)
            .map(|c| c.render_long_help().to_string())
            .unwrap_or_default(),
        None => cmd.render_long_help().to_string(),
    }
}
