use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use h2path::profiles::{ProfileSource, WindProfile};
use h2path::scenarios::{
    self, parse_range, preset, run_configs, sweep, sweep_csv, table_csv, Override, ScenarioConfig, SweepParam,
    SweepSpec, UseCase, REFERENCE_CF, REFERENCE_SEED,
};

/// Wind-electrolyser dispatch simulation and levelised cost of hydrogen.
#[derive(Debug, Parser)]
#[command(name = "h2path", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one scenario and write its cost report.
    Run(RunArgs),
    /// Evaluate several presets on the same profile.
    Compare(CompareArgs),
    /// One-at-a-time sensitivity sweep of a single parameter.
    Sweep(SweepArgs),
    /// Write the per-step flow ledger of one scenario.
    DumpLedger(RunArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Wind profile: a CSV file or `synth:<cf>,<seed>`.
    #[arg(long)]
    profile: Option<String>,
    /// Output directory.
    #[arg(long, env = "H2PATH_OUT", default_value = "results")]
    out: PathBuf,
    /// Override a scenario field, e.g. `econ.prices.p_ppa=0.04`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads (default: available cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
struct ScenarioSelect {
    /// Use case id (I, II, III-a, III-b, IV-a, IV-b, V-a, V-b-i, V-b-ii).
    #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
    preset: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    scenario: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    select: ScenarioSelect,
    #[command(flatten)]
    common: Common,
    /// Also write the per-step ledger CSV.
    #[arg(long)]
    ledger: bool,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Comma-separated use case ids, or `all`.
    #[arg(long, alias = "preset", default_value = "all")]
    presets: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    select: ScenarioSelect,
    /// p_ppa, pem_capex, efficiency or stack_life (long ids also accepted).
    #[arg(long)]
    param: String,
    /// `start:end:step`; relative changes for p_ppa and pem_capex.
    #[arg(long, conflicts_with = "values", allow_hyphen_values = true)]
    range: Option<String>,
    /// Explicit comma-separated values in the parameter's own units.
    #[arg(long, allow_hyphen_values = true)]
    values: Option<String>,
    #[command(flatten)]
    common: Common,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let simulation = e
                .chain()
                .find_map(|c| c.downcast_ref::<h2path::Error>())
                .is_some_and(h2path::Error::is_simulation_failure);
            ExitCode::from(if simulation { 2 } else { 1 })
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => cmd_run(args, false),
        Command::DumpLedger(args) => cmd_run(args, true),
        Command::Compare(args) => cmd_compare(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn init_jobs(jobs: Option<usize>) -> Result<()> {
    if let Some(n) = jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker pool")?;
    }
    Ok(())
}

fn parse_overrides(raw: &[String]) -> Result<Vec<Override>> {
    raw.iter()
        .map(|s| s.parse::<Override>().with_context(|| format!("--set {s}")))
        .collect()
}

fn load_scenario(select: &ScenarioSelect, overrides: &[Override]) -> Result<ScenarioConfig> {
    let base = match (&select.preset, &select.scenario) {
        (Some(id), _) => preset(id.parse()?),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<ScenarioConfig>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        (None, None) => bail!("one of --preset or --scenario is required"),
    };
    Ok(base.with_overrides(overrides)?)
}

fn resolve_profile(flag: Option<&str>, cfg: &ScenarioConfig) -> Result<WindProfile> {
    let source: ProfileSource = match flag.or(cfg.profile.as_deref()) {
        Some(s) => s.parse()?,
        None => ProfileSource::Synth {
            target_cf: REFERENCE_CF,
            seed: REFERENCE_SEED,
        },
    };
    source
        .resolve(cfg.plant.wind.rated_mw)
        .with_context(|| format!("loading profile {source:?}"))
}

fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes through a temporary file in the same directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path
        .file_name()
        .context("output path has no file name")?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

fn cmd_run(args: RunArgs, ledger_only: bool) -> Result<()> {
    init_jobs(args.common.jobs)?;
    let overrides = parse_overrides(&args.common.overrides)?;
    let cfg = load_scenario(&args.select, &overrides)?;
    let profile = resolve_profile(args.common.profile.as_deref(), &cfg)?;
    let stem = file_stem(&cfg.id);
    let out = &args.common.out;

    let (eval, ledger) = scenarios::evaluate(&cfg, &profile)?;
    if ledger_only || args.ledger {
        write_atomic(&out.join(format!("{stem}_ledger.csv")), &ledger.to_csv())?;
    }
    if ledger_only {
        return Ok(());
    }
    let table = table_csv(std::slice::from_ref(&eval));
    write_atomic(&out.join(format!("{stem}.csv")), &table)?;
    write_atomic(&out.join(format!("{stem}.json")), &eval.to_json())?;
    print!("{table}");
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    init_jobs(args.common.jobs)?;
    let overrides = parse_overrides(&args.common.overrides)?;
    let ids = UseCase::parse_list(&args.presets)?;
    let configs = ids
        .iter()
        .map(|&u| preset(u).with_overrides(&overrides))
        .collect::<h2path::Result<Vec<_>>>()?;

    // Every preset shares the reference wind plant rating, so one profile serves all.
    let profile = resolve_profile(args.common.profile.as_deref(), &configs[0])?;
    let rows = run_configs(&configs, &profile)?;

    let out = &args.common.out;
    for row in &rows {
        write_atomic(
            &out.join(format!("{}.csv", file_stem(&row.id))),
            &table_csv(std::slice::from_ref(row)),
        )?;
    }
    let table = table_csv(&rows);
    write_atomic(&out.join("comparison.csv"), &table)?;
    write_atomic(&out.join("comparison.json"), &serde_json::to_string_pretty(&rows)?)?;
    print!("{table}");
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    init_jobs(args.common.jobs)?;
    let overrides = parse_overrides(&args.common.overrides)?;
    let cfg = load_scenario(&args.select, &overrides)?;
    let param: SweepParam = args.param.parse()?;

    let values = match (&args.range, &args.values) {
        (Some(r), _) => {
            let raw = parse_range(r)?;
            if param.takes_relative_range() {
                raw.into_iter().map(|x| 1.0 + x).collect()
            } else {
                raw
            }
        }
        (None, Some(list)) => list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad sweep value `{v}`"))
            })
            .collect::<Result<Vec<_>>>()?,
        (None, None) => param.default_values(),
    };
    let spec = SweepSpec::new(param, values)?;
    let profile = resolve_profile(args.common.profile.as_deref(), &cfg)?;
    let points = sweep(&cfg, &spec, &profile)?;

    let csv = sweep_csv(param, &points);
    let out = &args.common.out;
    write_atomic(&out.join(format!("sweep_{}.csv", param.id())), &csv)?;
    write_atomic(
        &out.join(format!("sweep_{}.json", param.id())),
        &serde_json::to_string_pretty(&points)?,
    )?;
    print!("{csv}");
    Ok(())
}
