//! End-to-end pipeline and the bundle of output files it writes.

pub mod config;
pub mod markdown;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::conversion::ReadingParams;
use crate::divergence::{self, AiPoint, Crossover, DivergenceRow};
use crate::ecs::{self, EcsSchedule, SeriesPolicy};
use crate::growthfit::{self, FitPreset, GrowthFit, RangeChoice};
use crate::loopsim::{self, Intervention, LoopParams, LoopState, Trend};
use crate::sensitivity::{self, Scenario, ScenarioResult};
use crate::timeline::{self, FrontierYear, TimelineDataset, ValidationReport};
use crate::{Error, Result, YearlySeries};

pub use config::{config_hash, Inputs, LoopConfig, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// File names of a report bundle, in write order.
pub const BUNDLE_FILES: [&str; 7] = [
    "table1.csv",
    "table2.csv",
    "table3.csv",
    "fit.json",
    "divergence.svg",
    "loop_trajectory.csv",
    "report.md",
];

/// Intervals between which mean ECS change per year is reported.
pub const DECLINE_SPANS: [(i32, i32); 4] = [(2017, 2026), (2004, 2026), (2004, 2017), (2017, 2023)];

#[derive(Debug, Clone)]
pub struct AnchorRow {
    pub year: i32,
    pub session_seconds: f64,
    pub tokens_per_second: f64,
    pub csf: f64,
    pub linear_pass_tokens: f64,
    pub ecs_tokens: f64,
}

#[derive(Debug, Clone)]
pub struct LoopRun {
    pub params: LoopParams,
    pub intervention: Option<Intervention>,
    pub trajectory: Vec<LoopState>,
    pub trend: Trend,
}

/// Everything the emitters need, computed once.
#[derive(Debug, Clone)]
pub struct Results {
    pub config: RunConfig,
    pub config_hash: String,
    pub origins: Vec<(&'static str, String)>,
    pub dataset: TimelineDataset,
    pub validation: ValidationReport,
    pub anchors: Vec<AnchorRow>,
    pub ecs_asserted: YearlySeries,
    pub ecs_anchored: YearlySeries,
    pub frontier: Vec<FrontierYear>,
    pub fits: Vec<(FitPreset, GrowthFit)>,
    pub bootstrap_ci: (f64, f64),
    pub rows: Vec<DivergenceRow>,
    pub crossover: Crossover,
    pub final_year_releases: Vec<f64>,
    pub decline_rates: Vec<(i32, i32, f64)>,
    pub scenarios: Vec<Scenario>,
    pub scenario_results: Vec<(String, ScenarioResult)>,
    pub loop_run: LoopRun,
}

impl Results {
    pub fn selected_fit(&self) -> &GrowthFit {
        self.fit_for(self.config.fit_preset).expect("selected preset is always fitted")
    }

    pub fn fit_for(&self, preset: FitPreset) -> Option<&GrowthFit> {
        self.fits.iter().find(|(p, _)| *p == preset).map(|(_, f)| f)
    }

    pub fn ecs_series(&self) -> &YearlySeries {
        match self.config.ecs_policy {
            SeriesPolicy::Asserted => &self.ecs_asserted,
            SeriesPolicy::Anchored => &self.ecs_anchored,
        }
    }

    /// One-line provenance header shared by every file.
    pub fn header(&self) -> String {
        format!(
            "ctxdiv {VERSION} config_sha256={} seed={}",
            self.config_hash, self.config.seed
        )
    }
}

fn fit_preset(
    dataset: &TimelineDataset,
    cfg: &RunConfig,
    preset: FitPreset,
) -> Result<(Vec<(f64, f64)>, GrowthFit)> {
    let obs = growthfit::preset_observations(
        dataset,
        preset,
        &cfg.exclusions,
        cfg.first_year,
        cfg.last_year,
        cfg.range_choice,
    )?;
    let fit = growthfit::fit_exponential(&obs, f64::from(cfg.first_year))
        .map_err(|e| Error::fit(format!("preset {preset}: {e}")))?;
    Ok((obs, fit))
}

fn run_loop(cfg: &LoopConfig, lambda: f64, ai: f64, schedule: &EcsSchedule) -> Result<LoopRun> {
    let anchor = schedule.anchor(2022)?;
    let reading = schedule.reading();
    let initial = LoopState::baseline(
        ai,
        ecs::ecs_at_anchor(anchor, reading),
        anchor.linear_pass_tokens(reading),
    );
    initial.check()?;
    let params = cfg.params.unwrap_or_else(|| LoopParams::illustrative(lambda));
    params.check()?;
    let intervention = cfg.intervene_at.map(|at_period| Intervention {
        at_period,
        practice_floor: cfg.intervention_floor.unwrap_or(initial.capacity),
    });
    let trajectory = loopsim::simulate_with(&initial, &params, cfg.periods, intervention);
    let trend = loopsim::classify(&trajectory, cfg.tolerance)?;
    Ok(LoopRun {
        params,
        intervention,
        trajectory,
        trend,
    })
}

/// Parses inputs and runs every analysis stage. Errors carry the stage name.
pub fn analyze(cfg: &RunConfig) -> Result<Results> {
    cfg.check().map_err(|e| e.in_stage("config"))?;
    let inputs = Inputs::load(cfg)?;
    let hash = config_hash(cfg, &inputs);

    let dataset = timeline::parse_timeline(&inputs.timeline.text, &inputs.timeline.origin)
        .map_err(|e| e.in_stage("timeline"))?;
    let validation = timeline::validate(&dataset);
    let frontier = timeline::frontier_bounds_by_year(&dataset, cfg.first_year, cfg.last_year, &cfg.exclusions)
        .map_err(|e| e.in_stage("timeline"))?;

    let stage = |e: Error| e.in_stage("ecs");
    let reading: ReadingParams = cfg.reading;
    let schedule = EcsSchedule::from_csv(&inputs.anchors.text, &inputs.asserted.text, reading).map_err(stage)?;
    let anchors = schedule
        .anchors()
        .iter()
        .map(|a| AnchorRow {
            year: a.year,
            session_seconds: a.session_seconds,
            tokens_per_second: reading.tokens_per_second(),
            csf: a.csf,
            linear_pass_tokens: a.linear_pass_tokens(&reading),
            ecs_tokens: ecs::ecs_at_anchor(a, &reading),
        })
        .collect();
    let ecs_asserted = ecs::ecs_series(&schedule, SeriesPolicy::Asserted).map_err(stage)?;
    let ecs_anchored = ecs::ecs_series(&schedule, SeriesPolicy::Anchored).map_err(stage)?;
    let decline_rates = DECLINE_SPANS
        .iter()
        .map(|&(from, to)| ecs::mean_decline_rate(&ecs_asserted, from, to).map(|r| (from, to, r)))
        .collect::<Result<Vec<_>>>()
        .map_err(stage)?;

    let stage = |e: Error| e.in_stage("growthfit");
    let mut fits = Vec::with_capacity(FitPreset::ALL.len());
    let mut selected_obs = Vec::new();
    for preset in FitPreset::ALL {
        let (obs, fit) = fit_preset(&dataset, cfg, preset).map_err(stage)?;
        if preset == cfg.fit_preset {
            selected_obs = obs;
        }
        fits.push((preset, fit));
    }
    let bootstrap_ci = growthfit::bootstrap_ci(&selected_obs, cfg.bootstrap_resamples, cfg.seed).map_err(stage)?;

    let stage = |e: Error| e.in_stage("divergence");
    let ai: Vec<AiPoint> = frontier.iter().map(AiPoint::from_frontier).collect();
    if cfg.first_year < ecs::SERIES_FIRST_YEAR || cfg.last_year > ecs::SERIES_LAST_YEAR {
        return Err(stage(Error::domain(format!(
            "year window {}-{} outside ECS domain {}-{}",
            cfg.first_year,
            cfg.last_year,
            ecs::SERIES_FIRST_YEAR,
            ecs::SERIES_LAST_YEAR
        ))));
    }
    let window = match cfg.ecs_policy {
        SeriesPolicy::Asserted => &ecs_asserted,
        SeriesPolicy::Anchored => &ecs_anchored,
    }
    .slice(cfg.first_year, cfg.last_year);
    let rows = divergence::ratio_series(&ai, &window, &cfg.qa_band).map_err(stage)?;
    let crossover = divergence::crossover_year(&rows);
    let mut final_year_releases: Vec<f64> = dataset
        .included(&cfg.exclusions)
        .filter(|r| r.release_year == cfg.last_year)
        .map(|r| r.max_context_tokens as f64)
        .collect();
    final_year_releases.sort_by(f64::total_cmp);

    let scenarios = sensitivity::parse_scenarios(&inputs.scenarios.text).map_err(|e| e.in_stage("sensitivity"))?;
    let scenario_results = if scenarios.is_empty() {
        Vec::new()
    } else {
        sensitivity::run_all(&scenarios, &schedule, &reading).map_err(|e| e.in_stage("sensitivity"))?
    };

    let loop_ai = frontier
        .iter()
        .find(|f| f.year == 2022)
        .or(frontier.first())
        .map(|f| f.upper)
        .ok_or_else(|| Error::domain("empty frontier").in_stage("loopsim"))?;
    let lambda = fits
        .iter()
        .find(|(p, _)| *p == cfg.fit_preset)
        .map(|(_, f)| f.lambda)
        .unwrap_or_default();
    let loop_run = run_loop(&cfg.loop_sim, lambda, loop_ai, &schedule).map_err(|e| e.in_stage("loopsim"))?;

    let origins = vec![
        ("timeline", inputs.timeline.origin.clone()),
        ("anchors", inputs.anchors.origin.clone()),
        ("asserted_ecs", inputs.asserted.origin.clone()),
        ("scenarios", inputs.scenarios.origin.clone()),
    ];

    Ok(Results {
        config: cfg.clone(),
        config_hash: hash,
        origins,
        dataset,
        validation,
        anchors,
        ecs_asserted,
        ecs_anchored,
        frontier,
        fits,
        bootstrap_ci,
        rows,
        crossover,
        final_year_releases,
        decline_rates,
        scenarios,
        scenario_results,
        loop_run,
    })
}

fn table1_csv(results: &Results) -> String {
    let mut out = String::from("year,session_seconds,tokens_per_second,csf,linear_pass_tokens,ecs_tokens\n");
    for a in &results.anchors {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            a.year, a.session_seconds, a.tokens_per_second, a.csf, a.linear_pass_tokens, a.ecs_tokens
        ));
    }
    out
}

fn fit_json(results: &Results) -> String {
    let fit_entry = |preset: FitPreset, f: &GrowthFit| {
        json!({
            "preset": preset.label(),
            "lambda": f.lambda,
            "c0": f.c0,
            "base_year": f.base_year,
            "ci_low": f.ci_low,
            "ci_high": f.ci_high,
            "slope_std_error": f.slope_std_error,
            "doubling_months": f.doubling_months,
            "cagr": f.cagr_continuous,
            "r_squared": f.r_squared,
            "n_points": f.n_points,
        })
    };
    let cfg = &results.config;
    let doc = json!({
        "meta": {
            "toolkit": "ctxdiv",
            "version": VERSION,
            "config_sha256": results.config_hash,
            "seed": cfg.seed,
        },
        "selected_preset": cfg.fit_preset.label(),
        "range_choice": match cfg.range_choice {
            RangeChoice::Lower => "lower",
            RangeChoice::Upper => "upper",
        },
        "exclusions": cfg.exclusions,
        "fits": results.fits.iter().map(|(p, f)| fit_entry(*p, f)).collect::<Vec<_>>(),
        "bootstrap": {
            "preset": cfg.fit_preset.label(),
            "resamples": cfg.bootstrap_resamples,
            "seed": cfg.seed,
            "ci_low": results.bootstrap_ci.0,
            "ci_high": results.bootstrap_ci.1,
        },
        "published": {
            "lambda": growthfit::PUBLISHED_LAMBDA,
            "analytic_ci": [growthfit::PUBLISHED_ANALYTIC_CI.0, growthfit::PUBLISHED_ANALYTIC_CI.1],
            "bootstrap_ci": [growthfit::PUBLISHED_BOOTSTRAP_CI.0, growthfit::PUBLISHED_BOOTSTRAP_CI.1],
            "doubling_months": growthfit::doubling_time_months(growthfit::PUBLISHED_LAMBDA).ok(),
            "cagr": growthfit::cagr(growthfit::PUBLISHED_LAMBDA),
        },
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json value serializes");
    s.push('\n');
    s
}

/// Renders every bundle file in memory, in [`BUNDLE_FILES`] order.
pub fn render_bundle(results: &Results) -> Result<Vec<(&'static str, String)>> {
    let header = results.header();
    let csv = |body: String| format!("# {header}\n{body}");
    let svg = svg::render_divergence_svg(&results.rows, &results.crossover, &results.config.qa_band, &header)
        .map_err(|e| e.in_stage("report"))?;
    let files = vec![
        ("table1.csv", csv(table1_csv(results))),
        ("table2.csv", csv(divergence::rows_to_csv(&results.rows))),
        (
            "table3.csv",
            csv(sensitivity::results_to_csv(&results.scenarios, &results.scenario_results)),
        ),
        ("fit.json", fit_json(results)),
        ("divergence.svg", svg),
        ("loop_trajectory.csv", csv(loopsim::trajectory_to_csv(&results.loop_run.trajectory))),
        ("report.md", markdown::render_tables(results)),
    ];
    debug_assert!(files.iter().map(|(n, _)| *n).eq(BUNDLE_FILES));
    Ok(files)
}

/// Writes `files` under `dir`. On any failure the files written so far are
/// removed before the error is returned.
pub fn write_bundle(dir: &Path, files: &[(&'static str, String)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(e).in_stage("write"))?;
    let mut written = Vec::with_capacity(files.len());
    for (name, content) in files {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, content) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(Error::Io(e).in_stage("write"));
        }
        written.push(path);
    }
    Ok(written)
}

/// Runs every stage and writes the bundle to `config.output_dir`.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let results = analyze(cfg)?;
    let files = render_bundle(&results)?;
    write_bundle(&cfg.output_dir, &files)
}
