use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use sphere_bl::scenario::{
    emit_csv_many, parse_scenario, run, summary, Input, InputError, Mode, Params, RunError, RunRecord, Scenario,
};
use sphere_bl::QuadConfig;

/// Sharp exponents and Monte Carlo checks for symmetric Brascamp-Lieb
/// inequalities on spheres.
#[derive(Parser)]
#[command(name = "sphere-bl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Override the seed of every scenario.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the Monte Carlo sample count of every scenario.
    #[arg(long, global = true)]
    samples: Option<u64>,

    /// Print run records as JSON instead of a summary.
    #[arg(long, global = true)]
    json: bool,

    /// Write the series of the run records as CSV.
    #[arg(long, global = true, value_name = "PATH")]
    csv: Option<PathBuf>,

    /// Worker threads (defaults to all cores). Does not affect results.
    #[arg(long, global = true, env = "SPHERE_BL_THREADS")]
    threads: Option<usize>,
}

#[derive(Args)]
struct Source {
    /// Scenario JSON files.
    scenarios: Vec<PathBuf>,

    /// Inline JSON for the scenario's `input` field, used when no file is given.
    #[arg(long, value_name = "JSON")]
    input: Option<String>,

    /// Inline JSON for the scenario's `params` field, used when no file is given.
    #[arg(long, value_name = "JSON")]
    params: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Block decomposition of a maximal edge set.
    Decompose(Source),
    /// Sharp exponents of a balanced type or an explicit family.
    Exponents(Source),
    /// All ordered block assignments of a balanced type.
    Enumerate {
        #[command(flatten)]
        source: Source,
        /// Also group the members into canonical classes.
        #[arg(long)]
        classes: bool,
    },
    /// Exact counting identities for every balanced type up to a dimension.
    Identities {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 10)]
        max_n: usize,
    },
    /// Monte Carlo check of the inequality for one family of functions.
    VerifyHolder(Source),
    /// Divergence experiment with truncated extremal functions.
    VerifySharpness(Source),
    /// Growth of the localized Euclidean inequality in the radius.
    VerifyLocal(Source),
}

fn parse_inline<T: serde::de::DeserializeOwned>(field: &str, text: &str) -> Result<T, InputError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { field.to_string() } else { format!("{field}.{inner}") };
        InputError { path, message: e.into_inner().to_string() }
    })
}

fn load(mode: Mode, source: &Source) -> Result<Vec<Scenario>, RunError> {
    if source.scenarios.is_empty() {
        let input: Input = match &source.input {
            Some(t) => parse_inline("input", t)?,
            None => Input::default(),
        };
        let params: Params = match &source.params {
            Some(t) => parse_inline("params", t)?,
            None => Params::default(),
        };
        return Ok(vec![Scenario { mode, input, params, quad: QuadConfig::default() }]);
    }
    let mut out = Vec::new();
    for path in &source.scenarios {
        let at = |e: InputError| InputError { path: format!("{}: {}", path.display(), e.path), message: e.message };
        let text = std::fs::read_to_string(path)
            .map_err(|e| InputError { path: path.display().to_string(), message: e.to_string() })?;
        let scenario = parse_scenario(&text).map_err(at)?;
        if scenario.mode != mode {
            return Err(at(InputError {
                path: "mode".into(),
                message: format!("scenario is for {}, not {}", scenario.mode.name(), mode.name()),
            })
            .into());
        }
        out.push(scenario);
    }
    Ok(out)
}

fn execute(cli: &Cli) -> Result<Vec<RunRecord>, RunError> {
    let (mode, source) = match &cli.command {
        Command::Decompose(s) => (Mode::Decompose, s),
        Command::Exponents(s) => (Mode::Exponents, s),
        Command::Enumerate { source, .. } => (Mode::Enumerate, source),
        Command::Identities { source, .. } => (Mode::Identities, source),
        Command::VerifyHolder(s) => (Mode::VerifyHolder, s),
        Command::VerifySharpness(s) => (Mode::VerifySharpness, s),
        Command::VerifyLocal(s) => (Mode::VerifyLocal, s),
    };
    let mut scenarios = load(mode, source)?;
    for s in &mut scenarios {
        if let Some(seed) = cli.seed {
            s.quad.seed = seed;
        }
        if let Some(samples) = cli.samples {
            s.quad.samples = samples;
        }
        match &cli.command {
            Command::Enumerate { classes: true, .. } => s.params.classes = true,
            Command::Identities { max_n, .. } if s.input.max_n.is_none() => s.input.max_n = Some(*max_n),
            _ => {}
        }
    }
    scenarios.iter().map(run).collect()
}

fn report(cli: &Cli, records: &[RunRecord]) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    if cli.json {
        let text = if records.len() == 1 {
            serde_json::to_string_pretty(&records[0])?
        } else {
            serde_json::to_string_pretty(records)?
        };
        writeln!(out, "{text}")?;
    } else {
        for r in records {
            writeln!(out, "{}", summary(r))?;
        }
    }
    if let Some(path) = &cli.csv {
        emit_csv_many(records, path).map_err(|e| anyhow::anyhow!("{e}")).with_context(|| {
            format!("writing {}", path.display())
        })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let records = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = report(&cli, &records) {
        if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) {
            return ExitCode::SUCCESS;
        }
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    if records.iter().all(|r| r.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
