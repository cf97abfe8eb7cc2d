//! Divergence chart emitted as plain SVG text.
//!
//! Coordinate transform (pixels, origin top-left):
//!
//! ```text
//! x(year)   = LEFT + (year - year_min) / (year_max - year_min) * plot_width
//! y(tokens) = TOP  + (1 - (log10(tokens) - decade_min) / (decade_max - decade_min)) * plot_height
//! ```
//!
//! `decade_min`/`decade_max` are the floor/ceil of `log10` over every plotted
//! value and the quality band.

use std::fmt::Write;

use crate::divergence::{Crossover, DivergenceRow, QualityBand};
use crate::{Error, Result};

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 500.0;
pub const LEFT: f64 = 90.0;
pub const RIGHT: f64 = 60.0;
pub const TOP: f64 = 40.0;
pub const BOTTOM: f64 = 60.0;

const BAND_WIDTH: f64 = 24.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartLayout {
    pub year_min: f64,
    pub year_max: f64,
    pub decade_min: f64,
    pub decade_max: f64,
}

impl ChartLayout {
    pub fn for_rows(rows: &[DivergenceRow], band: &QualityBand) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Render(format!("chart needs at least 2 rows, got {}", rows.len())));
        }
        let values = rows
            .iter()
            .flat_map(|r| [r.ai_tokens, r.ai_upper(), r.ecs_tokens])
            .chain([band.low(), band.high()]);
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if !(lo > 0.0) {
            return Err(Error::Render("log axis needs positive values".into()));
        }
        let mut decade_min = lo.log10().floor();
        let mut decade_max = hi.log10().ceil();
        if decade_max <= decade_min {
            decade_max = decade_min + 1.0;
        }
        if decade_min == decade_max {
            decade_min -= 1.0;
        }
        let first = rows.first().map(|r| r.year).unwrap_or_default();
        let last = rows.last().map(|r| r.year).unwrap_or_default();
        if last <= first {
            return Err(Error::Render("rows must span more than one year".into()));
        }
        Ok(Self {
            year_min: f64::from(first),
            year_max: f64::from(last),
            decade_min,
            decade_max,
        })
    }

    pub fn plot_width(&self) -> f64 {
        WIDTH - LEFT - RIGHT
    }

    pub fn plot_height(&self) -> f64 {
        HEIGHT - TOP - BOTTOM
    }

    pub fn x(&self, year: f64) -> f64 {
        LEFT + (year - self.year_min) / (self.year_max - self.year_min) * self.plot_width()
    }

    pub fn y(&self, tokens: f64) -> f64 {
        let frac = (tokens.log10() - self.decade_min) / (self.decade_max - self.decade_min);
        TOP + (1.0 - frac) * self.plot_height()
    }

    pub fn year_at(&self, x: f64) -> f64 {
        self.year_min + (x - LEFT) / self.plot_width() * (self.year_max - self.year_min)
    }

    pub fn tokens_at(&self, y: f64) -> f64 {
        let frac = 1.0 - (y - TOP) / self.plot_height();
        10f64.powf(self.decade_min + frac * (self.decade_max - self.decade_min))
    }
}

fn polyline(out: &mut String, class: &str, colour: &str, pts: impl Iterator<Item = (f64, f64)>) {
    let points: Vec<String> = pts.map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(
        out,
        r#"  <polyline class="{class}" fill="none" stroke="{colour}" stroke-width="2.5" points="{}"/>"#,
        points.join(" ")
    );
}

/// Renders the AI and ECS series on a log10 token axis. `header` lands in a
/// leading XML comment.
pub fn render_divergence_svg(
    rows: &[DivergenceRow],
    crossover: &Crossover,
    band: &QualityBand,
    header: &str,
) -> Result<String> {
    let layout = ChartLayout::for_rows(rows, band)?;
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(s, "<!-- {} -->", header.replace("--", "-"));
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r##"  <rect class="background" x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##);
    let _ = writeln!(
        s,
        r#"  <text class="title" x="{:.2}" y="24" text-anchor="middle" font-size="15">AI context window vs. human effective context span</text>"#,
        WIDTH / 2.0
    );

    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (TOP, HEIGHT - BOTTOM);

    // x axis: one tick per year.
    let _ = writeln!(s, r#"  <g class="axis x-axis" data-scale="linear">"#);
    let _ = writeln!(s, r##"    <line x1="{x0:.2}" y1="{y1:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="#333333"/>"##);
    for year in (layout.year_min as i32)..=(layout.year_max as i32) {
        let x = layout.x(f64::from(year));
        let _ = writeln!(s, r##"    <line x1="{x:.2}" y1="{y1:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333333"/>"##, y1 + 5.0);
        let _ = writeln!(s, r#"    <text x="{x:.2}" y="{:.2}" text-anchor="middle">{year}</text>"#, y1 + 20.0);
    }
    let _ = writeln!(s, r#"    <text x="{:.2}" y="{:.2}" text-anchor="middle">Year</text>"#, (x0 + x1) / 2.0, HEIGHT - 15.0);
    s.push_str("  </g>\n");

    // y axis: one tick per decade.
    let _ = writeln!(s, r#"  <g class="axis y-axis" data-scale="log10">"#);
    let _ = writeln!(s, r##"    <line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}" stroke="#333333"/>"##);
    for k in (layout.decade_min as i32)..=(layout.decade_max as i32) {
        let y = layout.y(10f64.powi(k));
        let _ = writeln!(s, r##"    <line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="#333333"/>"##, x0 - 5.0);
        let _ = writeln!(s, r##"    <line class="grid" x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="#dddddd"/>"##);
        let _ = writeln!(s, r#"    <text x="{:.2}" y="{:.2}" text-anchor="end">1e{k}</text>"#, x0 - 8.0, y + 4.0);
    }
    let _ = writeln!(
        s,
        r#"    <text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">Tokens (log scale)</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    s.push_str("  </g>\n");

    // Quality-adjusted band at the final year.
    let last = rows.last().expect("at least two rows");
    let bx = layout.x(f64::from(last.year)) - BAND_WIDTH / 2.0;
    let by = layout.y(band.high());
    let bh = layout.y(band.low()) - by;
    let _ = writeln!(
        s,
        r##"  <rect class="qa-band" x="{bx:.2}" y="{by:.2}" width="{BAND_WIDTH:.2}" height="{bh:.2}" fill="#1f77b4" fill-opacity="0.2" data-low="{}" data-high="{}"/>"##,
        band.low(),
        band.high()
    );
    let _ = writeln!(
        s,
        r#"  <text class="qa-band-label" x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">quality-adjusted</text>"#,
        bx - 4.0,
        by + bh / 2.0 + 3.0
    );

    // Range years as vertical bars between the two AI values.
    for r in rows.iter().filter(|r| r.ai_tokens_alt.is_some()) {
        let x = layout.x(f64::from(r.year));
        let lo = r.ai_tokens.min(r.ai_upper());
        let _ = writeln!(
            s,
            r##"  <line class="range-bar" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#1f77b4" stroke-width="6" stroke-opacity="0.4"/>"##,
            layout.y(lo),
            layout.y(r.ai_upper())
        );
    }

    polyline(&mut s, "series ai", "#1f77b4", rows.iter().map(|r| (layout.x(f64::from(r.year)), layout.y(r.ai_upper()))));
    polyline(&mut s, "series ecs", "#d62728", rows.iter().map(|r| (layout.x(f64::from(r.year)), layout.y(r.ecs_tokens))));

    if let Some(year) = crossover.year() {
        let x = layout.x(f64::from(year));
        let _ = writeln!(
            s,
            r##"  <line class="crossover-marker" x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{y1:.2}" stroke="#555555" stroke-dasharray="5,4" data-year="{year}"/>"##
        );
        let _ = writeln!(s, r#"  <text class="crossover-label" x="{:.2}" y="{:.2}">crossover</text>"#, x + 4.0, y0 + 14.0);
    }

    let _ = writeln!(s, r##"  <text class="legend" x="{:.2}" y="{:.2}" fill="#1f77b4">AI context window</text>"##, x0 + 10.0, y0 + 14.0);
    let _ = writeln!(s, r##"  <text class="legend" x="{:.2}" y="{:.2}" fill="#d62728">Human ECS</text>"##, x0 + 10.0, y0 + 30.0);
    s.push_str("</svg>\n");
    Ok(s)
}
