use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ctxdiv::ecs::{self, SeriesPolicy};
use ctxdiv::growthfit::FitPreset;
use ctxdiv::report::{self, config::Inputs, RunConfig};
use ctxdiv::{divergence, loopsim, sensitivity, timeline, Error, Result};

#[derive(Parser)]
#[command(name = "ctxdiv", version, about = "AI context windows versus human effective context span")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the timeline and print findings as JSON lines.
    Validate,
    /// Fit the exponential growth rate.
    Fit {
        #[arg(long, value_enum)]
        preset: Option<FitPreset>,
    },
    /// Print the yearly ECS series.
    Ecs {
        #[arg(long, value_enum)]
        policy: Option<SeriesPolicy>,
    },
    /// Print the AI/ECS ratio table and crossover.
    Divergence,
    /// Run the CSF scenario table.
    Sensitivity {
        #[arg(long)]
        scenarios: Option<PathBuf>,
    },
    /// Simulate the delegation feedback loop.
    Loop {
        #[arg(long)]
        periods: Option<usize>,
        /// Period at which the practice floor is raised.
        #[arg(long)]
        intervene: Option<usize>,
    },
    /// Run the full pipeline and write the report bundle.
    Report,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(|e| e.in_stage("config"))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn emit(text: &str) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(text.as_bytes())?;
    stdout.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(&cli)?;
    match cli.command {
        Command::Validate => {
            let inputs = Inputs::load(&cfg)?;
            let dataset = timeline::parse_timeline(&inputs.timeline.text, &inputs.timeline.origin)
                .map_err(|e| e.in_stage("timeline"))?;
            let findings = timeline::validate(&dataset);
            emit(&findings.to_json_lines())?;
            if !findings.is_clean() {
                return Err(Error::Parse(format!("{} timeline finding(s)", findings.findings.len())).in_stage("timeline"));
            }
        }
        Command::Fit { preset } => {
            if let Some(p) = preset {
                cfg.fit_preset = p;
            }
            let results = report::analyze(&cfg)?;
            let fit = results.selected_fit();
            let doc = serde_json::json!({
                "preset": cfg.fit_preset.label(),
                "fit": fit,
                "bootstrap_ci": [results.bootstrap_ci.0, results.bootstrap_ci.1],
                "seed": cfg.seed,
            });
            emit(&format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
        }
        Command::Ecs { policy } => {
            let inputs = Inputs::load(&cfg)?;
            let schedule = ecs::EcsSchedule::from_csv(&inputs.anchors.text, &inputs.asserted.text, cfg.reading)
                .map_err(|e| e.in_stage("ecs"))?;
            let series = ecs::ecs_series(&schedule, policy.unwrap_or(cfg.ecs_policy)).map_err(|e| e.in_stage("ecs"))?;
            let mut out = String::from("year,ecs_tokens\n");
            for (y, v) in series.points() {
                out.push_str(&format!("{y},{v}\n"));
            }
            emit(&out)?;
        }
        Command::Divergence => {
            let results = report::analyze(&cfg)?;
            emit(&divergence::rows_to_csv(&results.rows))?;
            eprintln!("crossover: {}", serde_json::to_string(&results.crossover)?);
        }
        Command::Sensitivity { scenarios } => {
            if scenarios.is_some() {
                cfg.scenarios_path = scenarios;
            }
            let results = report::analyze(&cfg)?;
            emit(&sensitivity::results_to_csv(&results.scenarios, &results.scenario_results))?;
        }
        Command::Loop { periods, intervene } => {
            if let Some(n) = periods {
                cfg.loop_sim.periods = n;
            }
            if intervene.is_some() {
                cfg.loop_sim.intervene_at = intervene;
            }
            let results = report::analyze(&cfg)?;
            emit(&loopsim::trajectory_to_csv(&results.loop_run.trajectory))?;
            eprintln!("trend: {}", serde_json::to_string(&results.loop_run.trend)?);
        }
        Command::Report => {
            for path in report::run_pipeline(&cfg)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
