//! Plain-markdown rendering of the pipeline results. Numbers are rounded for
//! display only; the CSV files keep full precision.

use std::fmt::Write;

use crate::divergence::{BandPoint, Crossover, CrossoverKind, NoCrossover};
use crate::growthfit::{self, FitPreset};
use crate::loopsim::Trend;
use crate::report::{Results, VERSION};

/// Integer with thousands separators.
pub fn thousands(v: f64) -> String {
    let r = v.round();
    let digits = format!("{:.0}", r.abs());
    let mut out = String::with_capacity(digits.len() + digits.len() / 3 + 1);
    if r < 0.0 {
        out.push('-');
    }
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

/// Rounds to `n` significant figures.
pub fn round_sig(v: f64, n: i32) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let scale = 10f64.powi(n - 1 - v.abs().log10().floor() as i32);
    (v * scale).round() / scale
}

/// Ratios below 10 keep decimals, larger ones print as integers.
pub fn ratio(v: f64) -> String {
    if v < 1.0 {
        format!("{v:.2}")
    } else if v < 10.0 {
        format!("{v:.1}")
    } else {
        thousands(v)
    }
}

/// Shortest of `{:.1}` or the plain value, so 2.0 stays "2.0" and 1.05 stays "1.05".
pub fn factor(v: f64) -> String {
    let one = format!("{v:.1}");
    if one.parse::<f64>() == Ok(v) {
        one
    } else {
        format!("{v}")
    }
}

fn trend_name(t: Trend) -> &'static str {
    match t {
        Trend::Declining => "declining",
        Trend::Stabilized => "stabilized",
        Trend::Recovering => "recovering",
    }
}

fn table1(out: &mut String, r: &Results) {
    out.push_str("## ECS anchors\n\n");
    out.push_str("| Year | Session S (s) | R_tok (tokens/s) | CSF | Linear pass (tokens) | ECS (tokens) |\n");
    out.push_str("|---|---|---|---|---|---|\n");
    for a in &r.anchors {
        let _ = writeln!(
            out,
            "| {} | {} | {:.2} | {} | {} | {} |",
            a.year,
            thousands(a.session_seconds),
            a.tokens_per_second,
            factor(a.csf),
            thousands(a.linear_pass_tokens),
            thousands(round_sig(a.ecs_tokens, 2)),
        );
    }
    out.push('\n');
}

fn table2(out: &mut String, r: &Results) {
    out.push_str("## Divergence\n\n");
    out.push_str("| Year | Leading model | AI context (tokens) | Human ECS (tokens) | Ratio (AI/ECS) | QA ratio |\n");
    out.push_str("|---|---|---|---|---|---|\n");
    for (row, f) in r.rows.iter().zip(&r.frontier) {
        let (ai, raw) = match row.ai_tokens_alt {
            Some(_) => {
                let (lo, hi) = row.raw_ratio_range();
                (
                    format!("{}-{}", thousands(row.ai_tokens), thousands(row.ai_upper())),
                    format!("{lo:.1}-{hi:.1}"),
                )
            }
            None => (thousands(row.ai_tokens), ratio(row.raw_ratio)),
        };
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} |",
            row.year,
            f.leading_model,
            ai,
            thousands(row.ecs_tokens),
            raw,
            ratio(row.qa_ratio),
        );
    }
    out.push('\n');
    if let (Some(last), Some(lo), Some(hi)) = (
        r.rows.last(),
        r.final_year_releases.first(),
        r.final_year_releases.last(),
    ) {
        let band = &r.config.qa_band;
        let _ = writeln!(
            out,
            "Note: {} releases span {} to {} tokens, a raw ratio of {}-{}. Quality-adjusted to {}-{} tokens the ratio is {}-{} (midpoint {}).\n",
            last.year,
            thousands(*lo),
            thousands(*hi),
            thousands(lo / last.ecs_tokens),
            thousands(hi / last.ecs_tokens),
            thousands(band.low()),
            thousands(band.high()),
            thousands(band.at(BandPoint::Low).min(*hi) / last.ecs_tokens),
            thousands(band.at(BandPoint::High).min(*hi) / last.ecs_tokens),
            thousands(last.qa_ratio),
        );
    }
}

fn table3(out: &mut String, r: &Results) {
    out.push_str("## CSF sensitivity\n\n");
    if r.scenario_results.is_empty() {
        out.push_str("no scenarios run\n\n");
        return;
    }
    out.push_str("| Scenario | CSF 2004 | CSF 2022 | CSF 2026 | ECS 2004 | ECS 2026 | Raw ratio | QA ratio |\n");
    out.push_str("|---|---|---|---|---|---|---|---|\n");
    for (s, (_, res)) in r.scenarios.iter().zip(&r.scenario_results) {
        // Ratios follow from the displayed (rounded) ECS.
        let ecs_2026 = round_sig(res.ecs_2026, 3);
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} | {} |",
            s.name,
            factor(s.csf_2004),
            factor(s.csf_2022),
            factor(s.csf_2026),
            thousands(round_sig(res.ecs_2004, 3)),
            thousands(ecs_2026),
            thousands(s.ai_2026_tokens / ecs_2026),
            thousands(s.qa_midpoint_tokens / ecs_2026),
        );
    }
    out.push('\n');
}

fn growth(out: &mut String, r: &Results) {
    out.push_str("## Growth rate\n\n");
    out.push_str("| Source | n | lambda (1/yr) | 95% CI | Doubling (months) | CAGR | R^2 |\n");
    out.push_str("|---|---|---|---|---|---|---|\n");
    for preset in FitPreset::ALL {
        let Some(f) = r.fit_for(preset) else { continue };
        let marker = if preset == r.config.fit_preset { " (selected)" } else { "" };
        let _ = writeln!(
            out,
            "| computed: {preset}{marker} | {} | {:.3} | ({:.3}, {:.3}) | {} | {:.1}% | {:.3} |",
            f.n_points,
            f.lambda,
            f.ci_low,
            f.ci_high,
            f.doubling_months.map_or("n/a".to_string(), |m| format!("{m:.1}")),
            f.cagr_continuous * 100.0,
            f.r_squared,
        );
    }
    let lambda = growthfit::PUBLISHED_LAMBDA;
    let (lo, hi) = growthfit::PUBLISHED_ANALYTIC_CI;
    let _ = writeln!(
        out,
        "| published | - | {lambda:.2} | ({lo:.2}, {hi:.2}) | {} | {:.1}% | - |",
        growthfit::doubling_time_months(lambda).map_or("n/a".to_string(), |m| format!("{m:.1}")),
        growthfit::cagr(lambda) * 100.0,
    );
    let sel = r.selected_fit();
    let (blo, bhi) = r.bootstrap_ci;
    let (plo, phi) = growthfit::PUBLISHED_BOOTSTRAP_CI;
    let _ = writeln!(
        out,
        "\nSelected preset `{}`: computed lambda {:.3} vs published {lambda:.2}. Percentile bootstrap ({} resamples, seed {}): ({blo:.3}, {bhi:.3}); published bootstrap interval ({plo:.2}, {phi:.2}).\n",
        r.config.fit_preset,
        sel.lambda,
        r.config.bootstrap_resamples,
        r.config.seed,
    );
}

fn ecs_notes(out: &mut String, r: &Results) {
    out.push_str("## ECS notes\n\n");
    let anchored_2022 = r.anchors.iter().find(|a| a.year == 2022).map(|a| a.ecs_tokens);
    let asserted_2022 = r.ecs_asserted.get(2022);
    if let (Some(a), Some(t)) = (anchored_2022, asserted_2022) {
        let _ = writeln!(
            out,
            "> **ECS(2022) discrepancy.** The anchor product gives {} tokens; the tabulated series gives {} tokens. Both are kept; the divergence table uses the `{}` policy.\n",
            thousands(round_sig(a, 2)),
            thousands(t),
            match r.config.ecs_policy {
                crate::ecs::SeriesPolicy::Asserted => "asserted",
                crate::ecs::SeriesPolicy::Anchored => "anchored",
            },
        );
    }
    if let (Some(b2004), Some(b2017)) = (r.ecs_asserted.get(2004), r.ecs_asserted.get(2017)) {
        let _ = writeln!(
            out,
            "Human baselines: {} tokens in 2004 and {} tokens in 2017. The chart starts at {}.\n",
            thousands(round_sig(b2004, 2)),
            thousands(b2017),
            r.config.first_year,
        );
    }
    out.push_str("| Interval | Mean change (tokens/yr) |\n|---|---|\n");
    for (from, to, rate) in &r.decline_rates {
        let _ = writeln!(out, "| {from}-{to} | {} |", thousands(*rate));
    }
    out.push_str("\n| Year | Asserted ECS | Anchored ECS |\n|---|---|---|\n");
    for &(year, asserted) in r.ecs_asserted.points() {
        if year < r.config.first_year || year > r.config.last_year {
            continue;
        }
        let anchored = r.ecs_anchored.get(year).map_or("-".to_string(), thousands);
        let _ = writeln!(out, "| {year} | {} | {anchored} |", thousands(asserted));
    }
    out.push('\n');
}

fn crossover(out: &mut String, r: &Results) {
    out.push_str("## Crossover\n\n");
    let text = match r.crossover {
        Crossover::Crossed { year, kind: CrossoverKind::Interval } => {
            format!("AI context reaches human ECS in {year}; that year's AI range straddles parity.")
        }
        Crossover::Crossed { year, kind: CrossoverKind::Exact } => {
            format!("AI context reaches human ECS in {year}.")
        }
        Crossover::None { direction } => format!(
            "No crossover: the AI series is {}.",
            match direction {
                NoCrossover::AlwaysAbove => "always at or above parity",
                NoCrossover::AlwaysBelow => "always below parity",
                NoCrossover::OnlyDownward => "above parity at the start and never crosses upward",
            }
        ),
    };
    out.push_str(&text);
    out.push_str("\n\n");
}

fn loop_section(out: &mut String, r: &Results) {
    let run = &r.loop_run;
    let p = &run.params;
    out.push_str("## Delegation feedback loop\n\n");
    let _ = writeln!(
        out,
        "Illustrative couplings (not fitted): growth {:.3}, k_threshold {}, k_practice {}, k_capacity {}, recovery {}, capacity floor {}.",
        p.capability_growth_rate,
        p.k_threshold,
        p.k_practice,
        p.k_capacity,
        p.recovery_rate,
        thousands(p.capacity_floor),
    );
    if let Some(iv) = run.intervention {
        let _ = writeln!(
            out,
            "Practice floor raised to {} tokens at period {}.",
            thousands(iv.practice_floor),
            iv.at_period
        );
    }
    if let (Some(first), Some(last)) = (run.trajectory.first(), run.trajectory.last()) {
        let _ = writeln!(
            out,
            "Capacity {} -> {} tokens over {} periods; last-quarter trend: {}.\n",
            thousands(first.capacity),
            thousands(last.capacity),
            run.trajectory.len() - 1,
            trend_name(run.trend),
        );
    }
}

/// Full markdown report: run disclosure, the three tables, the growth-rate
/// comparison, ECS notes, crossover and loop summary.
pub fn render_tables(r: &Results) -> String {
    let cfg = &r.config;
    let mut out = String::new();
    let _ = writeln!(out, "<!-- {} -->\n", r.header());
    out.push_str("# Context divergence report\n\n");
    let _ = writeln!(out, "- toolkit: ctxdiv {VERSION}");
    let _ = writeln!(out, "- config sha256: `{}`", r.config_hash);
    let _ = writeln!(out, "- seed: {}", cfg.seed);
    let exclusions = if cfg.exclusions.is_empty() {
        "none".to_string()
    } else {
        cfg.exclusions.join(", ")
    };
    let _ = writeln!(out, "- exclusions: {exclusions}");
    let _ = writeln!(out, "- fit preset: {}", cfg.fit_preset);
    let _ = writeln!(
        out,
        "- lambda: computed {:.3}, published {:.2}",
        r.selected_fit().lambda,
        growthfit::PUBLISHED_LAMBDA
    );
    let _ = writeln!(out, "- years: {}-{}", cfg.first_year, cfg.last_year);
    for (name, origin) in &r.origins {
        let _ = writeln!(out, "- {name}: {origin}");
    }
    if r.validation.is_clean() {
        out.push_str("- timeline validation: clean\n");
    } else {
        let _ = writeln!(out, "- timeline validation: {} finding(s)", r.validation.findings.len());
        for f in &r.validation.findings {
            let _ = writeln!(out, "  - {}", f.message);
        }
    }
    out.push('\n');
    table1(&mut out, r);
    table2(&mut out, r);
    table3(&mut out, r);
    growth(&mut out, r);
    ecs_notes(&mut out, r);
    crossover(&mut out, r);
    loop_section(&mut out, r);
    out
}
