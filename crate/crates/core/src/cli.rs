//! Command-line front end.
//!
//! Every subcommand loads its inputs, runs the library, renders a report and
//! writes it to `--out` (atomically, via a temporary file in the same
//! directory) or to standard output. Exit codes: 0 success, 1 usage error,
//! 2 data or estimation error. Errors are reported as one line on stderr.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::data::{
    load_macro_csv, load_micro_csv, summarize, write_macro_csv, write_micro_csv, LoadOptions,
    MacroSeries, MicroDataset, MicroSchema,
};
use crate::design::ModelSpec;
use crate::diagnostics::{
    breusch_pagan, durbin_alternative, first_order_autocorr, time_trend_test, TestReport,
};
use crate::error::Error;
use crate::format::sig7;
use crate::pipeline::{
    default_macro_baseline, default_micro_baseline, load_beta0_csv, percent_effect,
    pooled_micro_fit, stage_one, stage_two, unemployment_net_effect, EffectReport, GdpMode,
    PooledEstimator, PooledFit, StageOneOptions, StageTwo, StageTwoOptions,
    YearlyHappinessSeries,
};
use crate::report::{
    render_decomposition, render_effects, render_table, render_tests, tests_csv, TableColumn,
};
use crate::synth::{generate_macro, generate_micro, MacroDgp, MicroDgp};

#[derive(Parser, Debug)]
#[command(
    name = "happyreg",
    version,
    about = "Two-stage happiness regressions: yearly micro intercepts, macro regression, diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Summary statistics (n, mean, sd, min, max) of a micro, macro or beta0 file.
    Summarize(SummarizeArgs),
    /// Pooled OLS on the respondent data.
    FitMicro(FitArgs),
    /// Pooled ordered probit on the respondent data.
    FitOprobit(FitArgs),
    /// Per-year OLS; writes year,beta0,n_year,dropped_columns.
    Stage1(Stage1Args),
    /// Regression of yearly intercepts on macro indicators, with diagnostics.
    Stage2(Stage2Args),
    /// Pooled fits, both stages, diagnostics and effect calculations.
    Pipeline(PipelineArgs),
    /// Heteroskedasticity, serial-correlation and trend tests.
    Diagnose(DiagnoseArgs),
    /// Synthetic data from a data-generating process file.
    Synth(SynthArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output file (written atomically); standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct SummarizeArgs {
    #[arg(long, required_unless_present_any = ["macro_csv", "beta0"])]
    micro: Option<PathBuf>,
    #[arg(long = "macro")]
    macro_csv: Option<PathBuf>,
    #[arg(long)]
    beta0: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    micro: PathBuf,
    /// Model specification (JSON); the standard respondent model when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Macro series, required when the spec lists macro regressors.
    #[arg(long = "macro")]
    macro_csv: Option<PathBuf>,
    /// Add year dummies to the spec.
    #[arg(long)]
    time_dummies: bool,
    #[arg(long)]
    significance: Option<f64>,
    /// Reject rows with out-of-range codes instead of skipping them.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct Stage1Args {
    #[arg(long)]
    micro: PathBuf,
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    min_obs: usize,
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Stage2Args {
    #[arg(long)]
    beta0: PathBuf,
    #[arg(long = "macro")]
    macro_csv: PathBuf,
    /// Add the party, disaster and tech dummies.
    #[arg(long)]
    event_dummies: bool,
    /// Use GDP per capita in levels instead of its first difference.
    #[arg(long)]
    raw_gdp: bool,
    #[arg(long, default_value_t = 0.05)]
    significance: f64,
    /// Lags in Durbin's alternative test.
    #[arg(long, default_value_t = 1)]
    lags: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    #[arg(long)]
    micro: PathBuf,
    #[arg(long = "macro")]
    macro_csv: PathBuf,
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    min_obs: usize,
    #[arg(long)]
    raw_gdp: bool,
    #[arg(long)]
    significance: Option<f64>,
    /// Baseline for percent effects of macro coefficients (default: mean beta0, one decimal).
    #[arg(long)]
    macro_baseline: Option<f64>,
    /// Baseline for percent effects of micro coefficients (default: mean happiness, rounded).
    #[arg(long)]
    micro_baseline: Option<f64>,
    /// Change in the unemployment rate for the net-effect calculation.
    #[arg(long, default_value_t = 0.01)]
    delta_u: f64,
    /// Pooled column supplying the personal unemployment coefficient.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    personal_from: u8,
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    /// Diagnose the stage-two regression of this beta0 series.
    #[arg(long, requires = "macro_csv", required_unless_present = "micro")]
    beta0: Option<PathBuf>,
    #[arg(long = "macro")]
    macro_csv: Option<PathBuf>,
    /// Diagnose a pooled OLS fit on this respondent data instead.
    #[arg(long, conflicts_with = "beta0")]
    micro: Option<PathBuf>,
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    event_dummies: bool,
    #[arg(long)]
    raw_gdp: bool,
    #[arg(long, default_value_t = 1)]
    lags: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SynthKind {
    Micro,
    Macro,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(value_enum)]
    kind: SynthKind,
    #[arg(long)]
    dgp: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Respondents per year (micro only).
    #[arg(long, default_value_t = 1000)]
    n_per_year: usize,
    #[arg(long)]
    out: PathBuf,
    /// Also write the generated beta0 series (macro only).
    #[arg(long)]
    beta0_out: Option<PathBuf>,
    /// Take the yearly intercepts from a beta0 file (micro only).
    #[arg(long)]
    intercepts: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Runs the command line; returns the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprintln!("error: {}", one_line_usage(&e.to_string()));
            return 1;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            1
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            2
        }
    }
}

/// Collapses clap's multi-line message into one line ending in a hint.
fn one_line_usage(rendered: &str) -> String {
    let mut parts = Vec::new();
    for line in rendered.lines() {
        let line = line.trim();
        if line.starts_with("Usage:") || line.starts_with("For more information") {
            break;
        }
        if !line.is_empty() {
            parts.push(line.trim_start_matches("error:").trim().to_string());
        }
    }
    format!("{} (see --help)", parts.join(" "))
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Summarize(a) => cmd_summarize(a),
        Command::FitMicro(a) => cmd_fit(a, PooledEstimator::Ols),
        Command::FitOprobit(a) => cmd_fit(a, PooledEstimator::OrderedProbit),
        Command::Stage1(a) => cmd_stage1(a),
        Command::Stage2(a) => cmd_stage2(a),
        Command::Pipeline(a) => cmd_pipeline(a),
        Command::Diagnose(a) => cmd_diagnose(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

fn check_input(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "input file {} does not exist",
            path.display()
        )))
    }
}

fn check_output(path: Option<&Path>) -> CliResult<()> {
    let Some(path) = path else { return Ok(()) };
    if path.is_dir() {
        return Err(Failure::Usage(format!(
            "output {} is a directory",
            path.display()
        )));
    }
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    match parent {
        Some(dir) if !dir.is_dir() => Err(Failure::Usage(format!(
            "output directory {} does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}

fn check_significance(alpha: f64) -> CliResult<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "--significance must lie in (0, 1), got {alpha}"
        )))
    }
}

/// Writes to a temporary file beside `path` and renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io_err = |e: std::io::Error| {
        Failure::Data(format!("cannot write {}: {e}", path.display()))
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Data(format!("cannot write to stdout: {e}")))
        }
    }
}

fn load_spec(path: Option<&Path>) -> CliResult<ModelSpec> {
    match path {
        None => Ok(ModelSpec::standard_micro()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::Data(format!("cannot read {}: {e}", p.display())))?;
            ModelSpec::from_json(&text)
                .map_err(|e| Failure::Data(format!("{}: {e}", p.display())))
        }
    }
}

fn load_micro(path: &Path, strict: bool) -> CliResult<MicroDataset> {
    Ok(load_micro_csv(
        path,
        &MicroSchema::default(),
        LoadOptions { strict },
    )?)
}

fn load_macro(path: &Path) -> CliResult<MacroSeries> {
    Ok(load_macro_csv(path)?)
}

fn gdp_mode(raw: bool) -> GdpMode {
    if raw {
        GdpMode::Level
    } else {
        GdpMode::Differenced
    }
}

fn rejection_note(micro: &MicroDataset) -> String {
    let report = micro.load_report();
    let mut s = format!(
        "Rows read: {}; used: {}; rejected: {}",
        report.rows_read,
        micro.len(),
        report.rejected_count()
    );
    let by_col = report.rejects_by_column();
    if !by_col.is_empty() {
        let parts: Vec<String> = by_col.iter().map(|(c, n)| format!("{c} {n}")).collect();
        let _ = write!(s, " ({})", parts.join(", "));
    }
    s.push('\n');
    s
}

fn cmd_summarize(a: SummarizeArgs) -> CliResult<()> {
    for p in [&a.micro, &a.macro_csv, &a.beta0].into_iter().flatten() {
        check_input(p)?;
    }
    check_output(a.output.out.as_deref())?;
    let mut text = String::new();
    let mut tables = Vec::new();
    if let Some(p) = &a.micro {
        tables.push(("Respondent data", summarize(&load_micro(p, false)?)?));
    }
    if let Some(p) = &a.macro_csv {
        tables.push(("Macro series", summarize(&load_macro(p)?)?));
    }
    if let Some(p) = &a.beta0 {
        tables.push(("Yearly intercepts", summarize(&load_beta0_csv(p)?)?));
    }
    for (i, (title, table)) in tables.iter().enumerate() {
        match a.output.format {
            Format::Csv => {
                let csv = table.to_csv();
                if i == 0 {
                    text.push_str(&csv);
                } else {
                    text.extend(csv.lines().skip(1).map(|l| format!("{l}\n")));
                }
            }
            _ => {
                let _ = writeln!(text, "{title}");
                text.push_str(&table.to_text());
                text.push('\n');
            }
        }
    }
    emit(a.output.out.as_deref(), &text)
}

fn fit_column(fit: &PooledFit<f64>, header: &str) -> TableColumn {
    match fit {
        PooledFit::Ols { fit, .. } => TableColumn::from_ols(header, fit),
        PooledFit::OrderedProbit { fit, .. } => TableColumn::from_oprobit(header, fit),
    }
}

fn render_column(col: &TableColumn, title: &str, format: Format) -> CliResult<String> {
    Ok(match format {
        Format::Text => render_table(title, std::slice::from_ref(col)),
        Format::Csv => col.to_csv(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(col).map_err(Error::from)?;
            s.push('\n');
            s
        }
    })
}

fn cmd_fit(a: FitArgs, estimator: PooledEstimator) -> CliResult<()> {
    check_input(&a.micro)?;
    for p in [&a.spec, &a.macro_csv].into_iter().flatten() {
        check_input(p)?;
    }
    check_output(a.output.out.as_deref())?;
    if let Some(alpha) = a.significance {
        check_significance(alpha)?;
    }
    let mut spec = load_spec(a.spec.as_deref())?;
    if a.time_dummies {
        spec.include_time_dummies = true;
    }
    if let Some(alpha) = a.significance {
        spec.significance = alpha;
    }
    let micro = load_micro(&a.micro, a.strict)?;
    let macro_series = a.macro_csv.as_deref().map(load_macro).transpose()?;
    let fit = pooled_micro_fit::<f64>(&micro, &spec, macro_series.as_ref(), estimator)?;
    let (title, header) = match estimator {
        PooledEstimator::Ols => ("Pooled OLS, dependent variable: happy", "OLS"),
        PooledEstimator::OrderedProbit => {
            ("Pooled ordered probit, dependent variable: happy", "Ordered probit")
        }
    };
    let mut text = render_column(&fit_column(&fit, header), title, a.output.format)?;
    if a.output.format == Format::Text {
        text.push_str(&rejection_note(&micro));
    }
    emit(a.output.out.as_deref(), &text)
}

fn cmd_stage1(a: Stage1Args) -> CliResult<()> {
    check_input(&a.micro)?;
    if let Some(p) = &a.spec {
        check_input(p)?;
    }
    check_output(a.out.as_deref())?;
    if a.min_obs == 0 {
        return Err(Failure::Usage("--min-obs must be positive".into()));
    }
    let spec = load_spec(a.spec.as_deref())?;
    let micro = load_micro(&a.micro, a.strict)?;
    let one = stage_one::<f64>(&micro, &spec, StageOneOptions { min_obs: a.min_obs })?;
    for (year, reason) in &one.skipped {
        eprintln!("note: year {year} skipped: {reason}");
    }
    emit(a.out.as_deref(), &one.series.to_csv())
}

struct StageTwoReport {
    column: TableColumn,
    tests: Vec<TestReport>,
}

fn stage_two_report(
    stage: &StageTwo<f64>,
    header: &str,
    lags: usize,
) -> CliResult<StageTwoReport> {
    let mut column = TableColumn::from_ols(header, &stage.fit);
    let bp = breusch_pagan(&stage.fit, &stage.design)?;
    let durbin = durbin_alternative(&stage.fit, &stage.design, lags)?;
    column.stats.push((
        "Serial correlation rho_hat".into(),
        format!("{} ({})", sig7(durbin.rho_hat), sig7(durbin.rho_std_error)),
    ));
    column.stats.push((
        "Heteroskedasticity".into(),
        format!("{} = {}", bp.distribution, sig7(bp.statistic)),
    ));
    Ok(StageTwoReport {
        column,
        tests: vec![bp, durbin.test],
    })
}

fn cmd_stage2(a: Stage2Args) -> CliResult<()> {
    check_input(&a.beta0)?;
    check_input(&a.macro_csv)?;
    check_output(a.output.out.as_deref())?;
    check_significance(a.significance)?;
    if a.lags == 0 {
        return Err(Failure::Usage("--lags must be positive".into()));
    }
    let series = load_beta0_csv(&a.beta0)?;
    let macro_series = load_macro(&a.macro_csv)?;
    let stage = stage_two(
        &series,
        &macro_series,
        StageTwoOptions {
            event_dummies: a.event_dummies,
            gdp: gdp_mode(a.raw_gdp),
            significance: a.significance,
            ..Default::default()
        },
    )?;
    let header = if a.event_dummies { "(2)" } else { "(1)" };
    let report = stage_two_report(&stage, header, a.lags)?;
    let title = "Macro regression, dependent variable: B0_hat (mean yearly happiness)";
    let text = match a.output.format {
        Format::Text => {
            let mut s = render_table(title, std::slice::from_ref(&report.column));
            s.push('\n');
            s.push_str(&render_tests(&report.tests));
            s
        }
        f => render_column(&report.column, title, f)?,
    };
    emit(a.output.out.as_deref(), &text)
}

fn cmd_diagnose(a: DiagnoseArgs) -> CliResult<()> {
    for p in [&a.beta0, &a.macro_csv, &a.micro, &a.spec].into_iter().flatten() {
        check_input(p)?;
    }
    check_output(a.output.out.as_deref())?;
    if a.lags == 0 {
        return Err(Failure::Usage("--lags must be positive".into()));
    }
    let mut tests = Vec::new();
    if let Some(beta0) = &a.beta0 {
        let macro_path = a.macro_csv.as_deref().expect("clap enforces --macro");
        let series = load_beta0_csv(beta0)?;
        let macro_series = load_macro(macro_path)?;
        let stage = stage_two(
            &series,
            &macro_series,
            StageTwoOptions {
                event_dummies: a.event_dummies,
                gdp: gdp_mode(a.raw_gdp),
                ..Default::default()
            },
        )?;
        tests.push(breusch_pagan(&stage.fit, &stage.design)?);
        tests.push(durbin_alternative(&stage.fit, &stage.design, a.lags)?.test);
        let mut trend = time_trend_test(&series.beta0())?;
        trend.name = "Trend in beta0".into();
        tests.push(trend);
    } else if let Some(micro_path) = &a.micro {
        let spec = load_spec(a.spec.as_deref())?;
        let micro = load_micro(micro_path, false)?;
        let macro_series = a.macro_csv.as_deref().map(load_macro).transpose()?;
        if let PooledFit::Ols { design, fit } =
            pooled_micro_fit::<f64>(&micro, &spec, macro_series.as_ref(), PooledEstimator::Ols)?
        {
            tests.push(breusch_pagan(&fit, &design)?);
        }
    }
    let text = match a.output.format {
        Format::Csv => tests_csv(&tests),
        Format::Json => {
            let rows: Vec<serde_json::Value> = tests
                .iter()
                .map(|t| {
                    serde_json::json!({
                        "test": t.name,
                        "statistic": t.statistic,
                        "distribution": t.distribution.to_string(),
                        "p": t.p_value,
                        "reject_5pct": t.reject_at_5pct,
                    })
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&rows).map_err(Error::from)?;
            s.push('\n');
            s
        }
        Format::Text => render_tests(&tests),
    };
    emit(a.output.out.as_deref(), &text)
}

fn effects_for(
    col: &TableColumn,
    baseline: f64,
    label: &str,
    skip: impl Fn(&str) -> bool,
) -> CliResult<Vec<EffectReport>> {
    col.rows
        .iter()
        .filter(|r| !skip(&r.name))
        .map(|r| {
            Ok(percent_effect(r.coef, baseline)?.named(format!("{} {label}", r.name)))
        })
        .collect()
}

fn is_time_dummy(name: &str) -> bool {
    name.starts_with("d_") && name[2..].chars().all(|c| c.is_ascii_digit())
}

fn cmd_pipeline(a: PipelineArgs) -> CliResult<()> {
    check_input(&a.micro)?;
    check_input(&a.macro_csv)?;
    if let Some(p) = &a.spec {
        check_input(p)?;
    }
    check_output(a.out.as_deref())?;
    if let Some(alpha) = a.significance {
        check_significance(alpha)?;
    }
    for (flag, v) in [("--macro-baseline", a.macro_baseline), ("--micro-baseline", a.micro_baseline)] {
        if let Some(v) = v {
            if !(v > 0.0) {
                return Err(Failure::Usage(format!("{flag} must be positive, got {v}")));
            }
        }
    }
    if !(a.delta_u >= 0.0) {
        return Err(Failure::Usage(format!(
            "--delta-u must be nonnegative, got {}",
            a.delta_u
        )));
    }
    if a.min_obs == 0 {
        return Err(Failure::Usage("--min-obs must be positive".into()));
    }

    let mut spec = load_spec(a.spec.as_deref())?;
    if let Some(alpha) = a.significance {
        spec.significance = alpha;
    }
    spec.include_time_dummies = false;
    spec.include_trend = false;
    spec.macro_regressors.clear();
    let micro = load_micro(&a.micro, a.strict)?;
    let macro_series = load_macro(&a.macro_csv)?;
    let alpha = spec.significance;

    let mut out = String::new();
    let _ = writeln!(out, "Two-stage happiness regression report\n");
    let _ = writeln!(out, "Respondent data");
    out.push_str(&rejection_note(&micro));
    out.push_str(&summarize(&micro)?.to_text());
    out.push('\n');

    // Pooled respondent-level fits, without and with year dummies.
    let col1 = pooled_micro_fit::<f64>(&micro, &spec, None, PooledEstimator::Ols)?;
    let with_years = spec.clone().with_time_dummies(true);
    let col2 = pooled_micro_fit::<f64>(&micro, &with_years, None, PooledEstimator::Ols)?;
    let micro_cols = [fit_column(&col1, "(1)"), fit_column(&col2, "(2)")];
    out.push_str(&render_table(
        "Pooled OLS, dependent variable: happy",
        &micro_cols,
    ));
    out.push('\n');

    // Stage one.
    let one = stage_one::<f64>(&micro, &spec, StageOneOptions { min_obs: a.min_obs })?;
    let _ = writeln!(out, "Stage one: yearly intercepts (B0_hat)");
    let _ = writeln!(out, "{:>6} {:>12} {:>8}  dropped", "year", "beta0", "n");
    for e in one.series.entries() {
        let _ = writeln!(
            out,
            "{:>6} {:>12} {:>8}  {}",
            e.year,
            sig7(e.beta0),
            e.n_year,
            if e.dropped.is_empty() {
                "-".to_string()
            } else {
                e.dropped.join(" ")
            }
        );
    }
    for (year, reason) in &one.skipped {
        let _ = writeln!(out, "{year:>6} skipped: {reason}");
    }
    out.push('\n');
    out.push_str(&summarize(&one.series)?.to_text());
    out.push('\n');

    // Stage two, without and with the event dummies.
    let opts = |event_dummies| StageTwoOptions {
        event_dummies,
        gdp: gdp_mode(a.raw_gdp),
        significance: alpha,
        ..Default::default()
    };
    let s1 = stage_two(&one.series, &macro_series, opts(false))?;
    let s2 = stage_two(&one.series, &macro_series, opts(true))?;
    let r1 = stage_two_report(&s1, "(1)", 1)?;
    let r2 = stage_two_report(&s2, "(2)", 1)?;
    out.push_str(&render_table(
        "Macro regression, dependent variable: B0_hat (mean yearly happiness)",
        &[r1.column.clone(), r2.column.clone()],
    ));
    out.push('\n');

    // Diagnostics.
    let mut tests = Vec::new();
    for (label, r) in [("(1)", &r1), ("(2)", &r2)] {
        for t in &r.tests {
            let mut t = t.clone();
            t.name = format!("{} {label}", t.name);
            tests.push(t);
        }
    }
    let beta0 = one.series.beta0();
    let mut trend = time_trend_test(&beta0)?;
    trend.name = "Trend in beta0".into();
    tests.push(trend);
    let _ = writeln!(out, "Diagnostics");
    out.push_str(&render_tests(&tests));
    let _ = writeln!(out, "\nFirst-order autocorrelation (slope of x_t on x_t-1)");
    let recs = macro_series.restrict_to(&one.series.years())?;
    let series_list: Vec<(&str, Vec<f64>)> = vec![
        ("beta0", beta0.clone()),
        ("unemp", recs.records().iter().map(|r| r.unemployment).collect()),
        ("infl", recs.records().iter().map(|r| r.inflation).collect()),
        (
            "gdp_per_capita",
            recs.records().iter().map(|r| r.gdp_per_capita).collect(),
        ),
    ];
    for (name, values) in &series_list {
        match first_order_autocorr(values) {
            Ok(ar) => {
                let _ = writeln!(
                    out,
                    "{name:<16} {:>12} ({}){}",
                    sig7(ar.rho_hat),
                    sig7(ar.std_error),
                    if ar.exceeds_unit {
                        "  possible unit root"
                    } else {
                        ""
                    }
                );
            }
            Err(e) => {
                let _ = writeln!(out, "{name:<16} not available: {e}");
            }
        }
    }
    out.push('\n');

    // Effects.
    let macro_baseline = a
        .macro_baseline
        .unwrap_or_else(|| default_macro_baseline(&one.series));
    let micro_baseline = a
        .micro_baseline
        .unwrap_or_else(|| default_micro_baseline(&micro));
    let mut macro_effects = Vec::new();
    for (label, r) in [("(1)", &r1), ("(2)", &r2)] {
        macro_effects.extend(effects_for(&r.column, macro_baseline, label, |n| {
            n == "Constant" || n == "t"
        })?);
    }
    let _ = writeln!(out, "Percent effects of macro coefficients");
    out.push_str(&render_effects(&macro_effects));
    out.push('\n');
    let mut micro_effects = Vec::new();
    for (label, c) in [("(1)", &micro_cols[0]), ("(2)", &micro_cols[1])] {
        micro_effects.extend(effects_for(c, micro_baseline, label, |n| {
            n == "Constant" || is_time_dummy(n)
        })?);
    }
    let _ = writeln!(out, "Percent effects of micro coefficients");
    out.push_str(&render_effects(&micro_effects));
    out.push('\n');

    let personal_col = &micro_cols[usize::from(a.personal_from) - 1];
    let personal = personal_col
        .rows
        .iter()
        .find(|r| r.name == "d_unemp")
        .map(|r| r.coef);
    let aggregate = r2.column.rows.iter().find(|r| r.name == "unemp").map(|r| r.coef);
    let _ = writeln!(
        out,
        "Net effect of a {} rise in the unemployment rate (personal from column ({}), aggregate from column (2))",
        sig7(a.delta_u),
        a.personal_from
    );
    match (personal, aggregate) {
        (Some(p), Some(g)) => {
            let d = unemployment_net_effect(p, g, a.delta_u, macro_baseline)?;
            out.push_str(&render_decomposition(&d));
        }
        _ => {
            let _ = writeln!(out, "not available: d_unemp is not in the respondent model");
        }
    }
    emit(a.out.as_deref(), &out)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Data(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn cmd_synth(a: SynthArgs) -> CliResult<()> {
    check_input(&a.dgp)?;
    if let Some(p) = &a.intercepts {
        check_input(p)?;
    }
    check_output(Some(&a.out))?;
    check_output(a.beta0_out.as_deref())?;
    match a.kind {
        SynthKind::Micro => {
            if a.beta0_out.is_some() {
                return Err(Failure::Usage("--beta0-out applies to `synth macro` only".into()));
            }
            if a.n_per_year == 0 {
                return Err(Failure::Usage("--n-per-year must be positive".into()));
            }
            let mut dgp: MicroDgp = read_json(&a.dgp)?;
            if let Some(p) = &a.intercepts {
                let series = load_beta0_csv(p)?;
                dgp.year_intercepts = series.entries().iter().map(|e| (e.year, e.beta0)).collect();
            }
            let generated = generate_micro(&dgp, a.n_per_year, a.seed)?;
            let mut buf = Vec::new();
            write_micro_csv(&generated.data, &mut buf)?;
            write_atomic(&a.out, &buf)
        }
        SynthKind::Macro => {
            if a.intercepts.is_some() {
                return Err(Failure::Usage("--intercepts applies to `synth micro` only".into()));
            }
            let dgp: MacroDgp = read_json(&a.dgp)?;
            let (series, beta0): (MacroSeries, YearlyHappinessSeries<f64>) =
                generate_macro(&dgp, a.seed)?;
            let mut buf = Vec::new();
            write_macro_csv(&series, &mut buf)?;
            write_atomic(&a.out, &buf)?;
            if let Some(p) = &a.beta0_out {
                write_atomic(p, beta0.to_csv().as_bytes())?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_collapse_to_one_line() {
        let msg = "error: the following required arguments were not provided:\n  --beta0 <BETA0>\n\nUsage: happyreg stage2 --beta0 <BETA0>\n";
        let line = one_line_usage(msg);
        assert!(!line.contains('\n'));
        assert!(line.contains("--beta0"));
    }

    #[test]
    fn missing_flag_is_usage_error() {
        assert_eq!(run(["happyreg", "stage2", "--macro", "m.csv"]), 1);
        assert_eq!(run(["happyreg", "frobnicate"]), 1);
    }

    #[test]
    fn time_dummy_names() {
        assert!(is_time_dummy("d_74"));
        assert!(!is_time_dummy("d_unemp"));
        assert!(!is_time_dummy("d_income2"));
    }
}
