use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use elicit_core::distributions::BeliefDistribution;
use elicit_core::elicitation::{mode_report_condition, ModeCondition, ReportSolution, Scheme};
use elicit_core::hierarchical::{
    fit_mle, model_fit_moments, quantify_opposite_share, FitResult, HyperParams, ModeDataset,
    QuantifyResult,
};
use elicit_core::identification::{
    estimate, simulate_experiment, ExperimentConfig, Population, Regressor,
};
use elicit_core::stylized::{
    control_treatment_split, default_groups, default_signal, run_stylized,
    run_stylized_with_scheme, SplitOutcome, StylizedOutcome, DEFAULT_COST, DEFAULT_REPORT_WINDOW,
};
use elicit_core::updating::{posterior_mean_bounds, posterior_mode_bounds, Signal, UpdateReport};
use elicit_core::{BetaBelief, BinomialSignal, Error, Interval};
use serde::Serialize;

const DEFAULT_BONUS_HKD: f64 = 10.0;
const DEFAULT_X_HAT: f64 = 0.17;
const DEFAULT_N: u64 = 1234;
const DEFAULT_DRAWS: usize = 100_000;
const FIGURE_POINTS: usize = 1001;

#[derive(Parser)]
#[command(
    name = "elicit",
    version,
    about = "Belief elicitation, updating and identification experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal report of a belief under a scheme.
    Report {
        /// Belief as a JSON file or inline JSON.
        #[arg(long)]
        dist: String,
        /// Scheme as a JSON file or inline JSON.
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Update a belief on a signal and compare means and modes.
    Update {
        #[arg(long)]
        prior: String,
        #[arg(long)]
        signal: String,
        /// Upper bound on the prior's α + β, for the posterior mean and
        /// mode bounds of a binomial signal.
        #[arg(long)]
        shape_sum_cap: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-group example: table of means and modes, or verdicts as JSON.
    Stylized {
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Pay every group under this scheme instead of its window.
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit Beta(ℓ/2, q/2) to reported modes (CSV with a `report` column).
    Fit {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Share of a belief population whose mean and mode straddle the signal.
    Quantify {
        #[arg(long)]
        seed: u64,
        /// Degrees of freedom; give both or neither. Without them the
        /// rounded (1, 3) and unrounded (0.464, 2.766) estimates both run.
        #[arg(long, requires = "q")]
        ell: Option<f64>,
        #[arg(long, requires = "ell")]
        q: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_DRAWS)]
        draws: usize,
        #[arg(long, default_value_t = DEFAULT_REPORT_WINDOW)]
        delta: f64,
        #[arg(long, default_value_t = DEFAULT_X_HAT)]
        x_hat: f64,
        #[arg(long, default_value_t = DEFAULT_N)]
        n: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the information experiment and regress participation on
    /// reports. Writes the panel CSV to --out and prints the estimate.
    Identify {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        scheme: String,
        /// Population JSON: an array of beliefs or `{"ell": .., "q": ..}`.
        /// Defaults to the two stylized groups.
        #[arg(long)]
        population: Option<String>,
        /// Signal JSON. Defaults to the uniform signal for discrete
        /// populations and (0.17, 1234) binomial otherwise.
        #[arg(long)]
        signal: Option<String>,
        #[arg(long, value_enum, default_value_t = RegressorArg::ReportChange)]
        regressor: RegressorArg,
        #[arg(long, default_value_t = 1000)]
        agents: usize,
        #[arg(long, default_value_t = 0.5)]
        treated_share: f64,
        #[arg(long, default_value_t = DEFAULT_COST)]
        cost: f64,
        /// Logistic noise scale on the participation threshold.
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Density of Beta(1.5, 4) on a grid, plus a JSON sidecar.
    Figure1 {
        /// CSV path; the sidecar goes next to it with a `.json` extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the default parameters.
    Defaults,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegressorArg {
    PostReport,
    ReportChange,
}

impl From<RegressorArg> for Regressor {
    fn from(r: RegressorArg) -> Self {
        match r {
            RegressorArg::PostReport => Regressor::PostReport,
            RegressorArg::ReportChange => Regressor::ReportChange,
        }
    }
}

enum Failure {
    Input(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Domain(e)
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

/// Inline JSON if the argument looks like JSON, otherwise a file path.
fn load_json<T: serde::de::DeserializeOwned>(arg: &str, what: &str) -> CliResult<T> {
    let text = if arg.trim_start().starts_with(['{', '[']) {
        arg.to_string()
    } else {
        fs::read_to_string(arg)
            .map_err(|e| Failure::Input(format!("reading {what} from {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("parsing {what}: {e}")))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => {
            fs::write(p, text).map_err(|e| Failure::Input(format!("writing {}: {e}", p.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Input(format!("writing output: {e}")))
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Report { dist, scheme, out } => {
            let text = cmd_report(
                &load_json(&dist, "distribution")?,
                &load_json(&scheme, "scheme")?,
            )?;
            emit(out.as_deref(), &text)
        }
        Command::Update {
            prior,
            signal,
            shape_sum_cap,
            out,
        } => {
            let text = cmd_update(
                &load_json(&prior, "prior")?,
                &load_json(&signal, "signal")?,
                shape_sum_cap,
            )?;
            emit(out.as_deref(), &text)
        }
        Command::Stylized {
            format,
            scheme,
            out,
        } => {
            let scheme: Option<Scheme> = scheme.map(|s| load_json(&s, "scheme")).transpose()?;
            emit(out.as_deref(), &cmd_stylized(format, scheme.as_ref())?)
        }
        Command::Fit { input, out } => emit(out.as_deref(), &cmd_fit(&input)?),
        Command::Quantify {
            seed,
            ell,
            q,
            draws,
            delta,
            x_hat,
            n,
            out,
        } => {
            let sig = BinomialSignal::new(x_hat, n)?;
            let text = match (ell, q) {
                (Some(ell), Some(q)) => to_json(&quantify_opposite_share(
                    HyperParams::new(ell, q)?,
                    &sig,
                    delta,
                    draws,
                    seed,
                )?),
                _ => {
                    let both: Vec<QuantifyResult> = [
                        HyperParams::treatment_rounded(),
                        HyperParams::treatment_raw(),
                    ]
                    .into_iter()
                    .map(|h| quantify_opposite_share(h, &sig, delta, draws, seed))
                    .collect::<Result<_, _>>()?;
                    to_json(&both)
                }
            };
            emit(out.as_deref(), &text)
        }
        Command::Identify {
            seed,
            scheme,
            population,
            signal,
            regressor,
            agents,
            treated_share,
            cost,
            noise,
            out,
        } => {
            let population: Population = match population {
                Some(p) => load_json(&p, "population")?,
                None => Population::stylized(),
            };
            let signal: Signal = match signal {
                Some(s) => load_json(&s, "signal")?,
                None => default_signal_for(&population)?,
            };
            let cfg = ExperimentConfig {
                population,
                scheme: load_json(&scheme, "scheme")?,
                cost,
                treated_share,
                signal,
                agents,
                seed,
                participation_noise: noise,
            };
            let panel = simulate_experiment(&cfg)?;
            let result = estimate(&panel, regressor.into())?;
            if let Some(path) = out.as_deref() {
                emit(Some(path), &panel.to_csv())?;
            }
            emit(None, &to_json(&result))
        }
        Command::Figure1 { out } => cmd_figure1(out.as_deref()),
        Command::Defaults => emit(None, &defaults_block()),
    }
}

fn default_signal_for(population: &Population) -> CliResult<Signal> {
    let discrete = match population {
        Population::Explicit(v) => v.iter().all(BeliefDistribution::is_discrete),
        Population::Hierarchical(_) => false,
    };
    Ok(if discrete {
        Signal::Uniform(default_signal())
    } else {
        Signal::Binomial(BinomialSignal::new(DEFAULT_X_HAT, DEFAULT_N)?)
    })
}

#[derive(Serialize)]
struct ReportOutput {
    #[serde(flatten)]
    solution: ReportSolution,
    #[serde(skip_serializing_if = "Option::is_none")]
    condition: Option<ModeCondition>,
}

fn cmd_report(dist: &BeliefDistribution, scheme: &Scheme) -> CliResult<String> {
    let solution = scheme.optimal_report(dist)?;
    let condition = match scheme {
        Scheme::Window { delta, .. } => Some(mode_report_condition(dist, *delta)),
        _ => None,
    };
    Ok(to_json(&ReportOutput {
        solution,
        condition,
    }))
}

#[derive(Serialize)]
struct UpdateOutput {
    posterior: BeliefDistribution,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<UpdateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_bounds: Option<Interval>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mode_bounds: Option<Interval>,
}

fn cmd_update(prior: &BeliefDistribution, signal: &Signal, cap: Option<f64>) -> CliResult<String> {
    let posterior = signal.update(prior)?;
    // Means always exist; the comparison is skipped when a mode is undefined.
    let comparison = UpdateReport::compare(prior, &posterior).ok();
    let (mean_bounds, mode_bounds) = match (signal, cap) {
        (Signal::Binomial(s), Some(cap)) => (
            Some(posterior_mean_bounds(s, cap)?),
            Some(posterior_mode_bounds(s, cap)?),
        ),
        (Signal::Uniform(_), Some(_)) => {
            return Err(Failure::Input(
                "--shape-sum-cap applies to binomial signals only".into(),
            ));
        }
        (_, None) => (None, None),
    };
    Ok(to_json(&UpdateOutput {
        posterior,
        comparison,
        mean_bounds,
        mode_bounds,
    }))
}

#[derive(Serialize)]
struct StylizedJson {
    #[serde(flatten)]
    outcome: StylizedOutcome,
    splits: Vec<SplitOutcome>,
}

fn cmd_stylized(format: Format, scheme: Option<&Scheme>) -> CliResult<String> {
    let groups = default_groups();
    let sig = default_signal();
    let outcome = match scheme {
        Some(s) => run_stylized_with_scheme(&groups, &sig, s)?,
        None => run_stylized(&groups, &sig)?,
    };
    Ok(match format {
        Format::Csv => outcome.table_csv(),
        Format::Json => {
            let splits = groups
                .iter()
                .map(|g| control_treatment_split(g, &sig))
                .collect::<Result<Vec<_>, _>>()?;
            to_json(&StylizedJson { outcome, splits })
        }
    })
}

#[derive(Serialize)]
struct FitOutput {
    #[serde(flatten)]
    fit: FitResult,
    sample_mean: f64,
    sample_variance: f64,
    model_mean: f64,
    model_variance: f64,
}

fn cmd_fit(input: &Path) -> CliResult<String> {
    let mut reader = csv::Reader::from_path(input)
        .map_err(|e| Failure::Input(format!("{}: {e}", input.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Failure::Input(format!("{}: {e}", input.display())))?
        .clone();
    let col = headers
        .iter()
        .position(|h| h.trim() == "report")
        .ok_or_else(|| Failure::Input(format!("{}: no `report` column", input.display())))?;
    let mut values = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Failure::Input(format!("{}: {e}", input.display())))?;
        let field = rec.get(col).unwrap_or("").trim();
        let v: f64 = field.parse().map_err(|_| {
            Failure::Input(format!(
                "{}: row {}: `{field}` is not a number",
                input.display(),
                line + 2
            ))
        })?;
        values.push(v);
    }
    let data = ModeDataset::new(values)?;
    if data.clamped() > 0 {
        eprintln!(
            "warning: moved {} reports at exactly 0 or 1 inside the unit interval",
            data.clamped()
        );
    }
    let fit = fit_mle(&data)?;
    let xs = data.reports();
    let n = xs.len() as f64;
    let sample_mean = xs.iter().sum::<f64>() / n;
    let sample_variance = xs.iter().map(|x| (x - sample_mean).powi(2)).sum::<f64>() / (n - 1.0);
    let (model_mean, model_variance) = model_fit_moments(fit.hyper_raw());
    Ok(to_json(&FitOutput {
        fit,
        sample_mean,
        sample_variance,
        model_mean,
        model_variance,
    }))
}

#[derive(Serialize)]
struct Sidecar {
    mode: f64,
    mean: f64,
    intervention: f64,
}

fn figure1_csv(d: &BetaBelief) -> String {
    let mut s = String::from("x,density\n");
    for i in 0..FIGURE_POINTS {
        let x = i as f64 / (FIGURE_POINTS - 1) as f64;
        s.push_str(&format!("{x},{}\n", d.pdf(x)));
    }
    s
}

fn cmd_figure1(out: Option<&Path>) -> CliResult<()> {
    let d = BetaBelief::new(1.5, 4.0)?;
    let sidecar = Sidecar {
        mode: d.mode()?,
        mean: d.mean(),
        intervention: DEFAULT_X_HAT,
    };
    emit(out, &figure1_csv(&d))?;
    match out {
        Some(p) => emit(Some(&p.with_extension("json")), &to_json(&sidecar)),
        None => Ok(()),
    }
}

fn defaults_block() -> String {
    format!(
        "delta  {DEFAULT_REPORT_WINDOW}\nbonus  {DEFAULT_BONUS_HKD} HKD\nx_hat  {DEFAULT_X_HAT}\nn      {DEFAULT_N}\nR      {DEFAULT_DRAWS}\ncost   {DEFAULT_COST}\n"
    )
}
