use std::path::{Path, PathBuf};
use std::process::ExitCode;

use agrobio::calibration::{calibrate, sensitivity, CalibrationSpec, DESK_SOBOL_POINTS, SENSITIVITY_FACTORS};
use agrobio::io::{
    load_histogram, load_reference_data, read_mean_results, read_sweep, render_scenario_chart,
    render_sweep_chart, write_calibration_report, write_results, write_sensitivity, write_svg,
    write_sweep, RunConfig, CONFIG_ENV, SWEEP_FILE,
};
use agrobio::policy::theta_sweep;
use agrobio::{run_scenario, ScenarioConfig, ScenarioKind, ScenarioRun};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

/// Agent-based simulator of farmland consolidation, pesticide use and
/// farmland bird biodiversity.
#[derive(Parser, Debug)]
#[command(name = "agrobio", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// Config file (TOML). Falls back to $AGROBIO_CONFIG, then built-in defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// First replica seed; replicas use consecutive seeds from here.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,
    /// Number of Monte Carlo replicas.
    #[arg(long, global = true, value_name = "INT")]
    replicas: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Scenario: baseline, pesticide_reduction, flat_subsidy or combined.
    #[arg(long, global = true, value_name = "NAME", value_parser = parse_scenario)]
    scenario: Option<ScenarioKind>,
    /// Shrink the sector tenfold (30,000 farms) for quick runs.
    #[arg(long, global = true)]
    desk_scale: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one scenario.
    Run,
    /// Simulate all four scenarios on shared seeds.
    Compare,
    /// Sweep the per-farmer share of subsidies in the combined scenario.
    Sweep,
    /// Fit the behavioural parameters to the reference series.
    Calibrate,
    /// One-at-a-time sensitivity of the calibrated parameters.
    Sensitivity,
    /// Render SVG charts from stored results in the output directory.
    Plot,
    /// Parse and validate the configuration.
    ValidateConfig,
}

fn parse_scenario(s: &str) -> std::result::Result<ScenarioKind, String> {
    ScenarioKind::parse(s).ok_or_else(|| {
        let names: Vec<&str> = ScenarioKind::ALL.iter().map(|k| k.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

struct Setup {
    config: RunConfig,
    source: String,
}

fn load_config(opts: &Overrides) -> Result<Setup> {
    let path = opts
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
    let (mut config, source) = match &path {
        Some(p) => (RunConfig::load(p)?, p.display().to_string()),
        None => (RunConfig::default(), "built-in defaults".to_string()),
    };
    if let Some(seed) = opts.seed {
        config.engine.base_seed = seed;
        config.engine.seeds.clear();
    }
    if let Some(n) = opts.replicas {
        if n == 0 {
            bail!("--replicas must be at least 1");
        }
        config.engine.replicas = n;
        config.engine.seeds.clear();
        config.calibration.replicas_per_point = n;
    }
    if let Some(seed) = opts.seed {
        config.calibration.base_seed = seed;
    }
    if let Some(out) = &opts.out {
        config.paths.output_dir = out.clone();
    }
    if let Some(kind) = opts.scenario {
        config.scenario.kind = kind;
    }
    if opts.desk_scale {
        config.engine.desk_scale = true;
        if config.calibration.sobol_points == CalibrationSpec::default().sobol_points {
            config.calibration.sobol_points = DESK_SOBOL_POINTS;
        }
    }
    config.validate()?;
    Ok(Setup { config, source })
}

fn command_line() -> String {
    std::env::args().skip(1).collect::<Vec<_>>().join(" ")
}

fn reference_dir(c: &RunConfig) -> &Path {
    &c.paths.reference_dir
}

fn save_runs(c: &RunConfig, runs: &[(String, &ScenarioRun)]) -> Result<()> {
    let dir = &c.paths.output_dir;
    let manifest = write_results(runs, c, &command_line(), dir)?;
    let labelled: Vec<(String, Vec<_>)> = runs.iter().map(|(l, r)| (l.clone(), r.mean.clone())).collect();
    let chart = dir.join("scenarios.svg");
    write_svg(&chart, &render_scenario_chart(&labelled, Some(calibration_window(c)))?)?;
    for (label, run) in runs {
        let last = run.mean.last().expect("non-empty run");
        println!(
            "{label}: {} replicas, {}: biodiversity {:.3}, farmers {:.0}, mean farm size {:.1} ha, price {:.2}",
            run.replicas.len(),
            last.year,
            last.eps,
            last.n_active,
            last.mean_farm_size,
            last.price
        );
    }
    println!("wrote {} files to {}", manifest.files.len() + 2, dir.display());
    Ok(())
}

fn calibration_window(c: &RunConfig) -> (i32, i32) {
    (c.calibration.period[0], c.calibration.period[1])
}

fn run(c: &RunConfig) -> Result<()> {
    let hist = load_histogram(reference_dir(c))?;
    let run = run_scenario(&c.params(), &c.scenario, &hist, &c.engine.seed_list())?;
    save_runs(c, &[(c.scenario.kind.name().to_string(), &run)])
}

fn compare(c: &RunConfig) -> Result<()> {
    let hist = load_histogram(reference_dir(c))?;
    let params = c.params();
    let seeds = c.engine.seed_list();
    let runs = ScenarioKind::ALL
        .iter()
        .map(|&kind| {
            let s = ScenarioConfig { kind, ..c.scenario.clone() };
            Ok((kind.name().to_string(), run_scenario(&params, &s, &hist, &seeds)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<(String, &ScenarioRun)> = runs.iter().map(|(l, r)| (l.clone(), r)).collect();
    save_runs(c, &refs)
}

fn sweep(c: &RunConfig) -> Result<()> {
    let hist = load_histogram(reference_dir(c))?;
    let rows = theta_sweep(&c.params(), &c.scenario, &hist, &c.engine.theta_grid, &c.engine.seed_list())?;
    let dir = &c.paths.output_dir;
    let path = write_sweep(&rows, dir)?;
    write_svg(&dir.join("sweep.svg"), &render_sweep_chart(&rows)?)?;
    for r in &rows {
        println!(
            "theta {:<6} {}: biodiversity {:.3}, farmers {:.0}, flat payment {:.1} EUR",
            r.theta, r.year, r.eps, r.n_active, r.subsidy_per_farmer
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn calibrate_cmd(c: &RunConfig) -> Result<()> {
    let data = load_reference_data(reference_dir(c))?;
    let report = calibrate(&c.params(), &data.histogram, &data.series, &c.calibration)?;
    let files = write_calibration_report(&report, &c.paths.output_dir)?;
    print!("{}", report.summary());
    println!("wrote {}", files[0].display());
    Ok(())
}

fn sensitivity_cmd(c: &RunConfig) -> Result<()> {
    let hist = load_histogram(reference_dir(c))?;
    let report = sensitivity(
        &c.params(),
        &c.scenario,
        &hist,
        &c.engine.seed_list(),
        &SENSITIVITY_FACTORS,
        c.engine.sensitivity_year,
    )?;
    let path = write_sensitivity(&report, &c.paths.output_dir)?;
    for (i, outcome) in ["biodiversity", "pesticide", "farm size"].iter().enumerate() {
        let top = report.most_influential(i);
        println!("{outcome}: most sensitive to {} (spread {:.3})", top.name(), report.spread(top)[i]);
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn plot(c: &RunConfig) -> Result<()> {
    let dir = &c.paths.output_dir;
    let mut written = Vec::new();
    if dir.join(agrobio::io::MANIFEST_FILE).exists() {
        let series = read_mean_results(dir)?;
        let path = dir.join("scenarios.svg");
        write_svg(&path, &render_scenario_chart(&series, Some(calibration_window(c)))?)?;
        written.push(path);
    }
    let sweep_path = dir.join(SWEEP_FILE);
    if sweep_path.exists() {
        let path = dir.join("sweep.svg");
        write_svg(&path, &render_sweep_chart(&read_sweep(&sweep_path)?)?)?;
        written.push(path);
    }
    if written.is_empty() {
        bail!("no results to plot in {}", dir.display());
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    let Setup { config, source } = load_config(&cli.opts).context("invalid configuration")?;
    match cli.command {
        Command::Run => run(&config),
        Command::Compare => compare(&config),
        Command::Sweep => sweep(&config),
        Command::Calibrate => calibrate_cmd(&config),
        Command::Sensitivity => sensitivity_cmd(&config),
        Command::Plot => plot(&config),
        Command::ValidateConfig => {
            println!("configuration ok ({source})");
            Ok(())
        }
    }
}

/// Error chain on one line, skipping causes already quoted by their parent.
fn one_line(e: &anyhow::Error) -> String {
    let mut parts: Vec<String> = Vec::new();
    for cause in e.chain() {
        let text = cause.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
        if parts.last().is_some_and(|p| p.contains(&text)) {
            continue;
        }
        parts.push(text);
    }
    parts.join(": ")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("agrobio: error: {}", one_line(&e));
            ExitCode::FAILURE
        }
    }
}
