//! AI-to-human context ratios, the quality-adjusted ratio, and crossover
//! detection.

use serde::{Deserialize, Serialize};

use crate::timeline::FrontierYear;
use crate::{Error, Result, YearlySeries};

/// Span over which long-context retrieval stays within 20% of peak quality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBand")]
pub struct QualityBand {
    low_tokens: f64,
    midpoint_tokens: f64,
    high_tokens: f64,
}

#[derive(Deserialize)]
struct RawBand {
    low_tokens: f64,
    midpoint_tokens: f64,
    high_tokens: f64,
}

impl TryFrom<RawBand> for QualityBand {
    type Error = Error;

    fn try_from(raw: RawBand) -> Result<Self> {
        QualityBand::new(raw.low_tokens, raw.midpoint_tokens, raw.high_tokens)
    }
}

impl Default for QualityBand {
    fn default() -> Self {
        Self {
            low_tokens: 100_000.0,
            midpoint_tokens: 150_000.0,
            high_tokens: 200_000.0,
        }
    }
}

impl QualityBand {
    pub fn new(low_tokens: f64, midpoint_tokens: f64, high_tokens: f64) -> Result<Self> {
        if !(low_tokens > 0.0 && low_tokens <= midpoint_tokens && midpoint_tokens <= high_tokens) {
            return Err(Error::domain(format!(
                "quality band needs 0 < low <= midpoint <= high, got {low_tokens}/{midpoint_tokens}/{high_tokens}"
            )));
        }
        Ok(Self {
            low_tokens,
            midpoint_tokens,
            high_tokens,
        })
    }

    pub fn low(&self) -> f64 {
        self.low_tokens
    }

    pub fn midpoint(&self) -> f64 {
        self.midpoint_tokens
    }

    pub fn high(&self) -> f64 {
        self.high_tokens
    }

    pub fn at(&self, point: BandPoint) -> f64 {
        match point {
            BandPoint::Low => self.low_tokens,
            BandPoint::Mid => self.midpoint_tokens,
            BandPoint::High => self.high_tokens,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandPoint {
    Low,
    Mid,
    High,
}

/// Effective AI context: the raw window capped at the chosen band value.
pub fn quality_adjust(ai_tokens: f64, band: &QualityBand, point: BandPoint) -> f64 {
    ai_tokens.min(band.at(point))
}

/// AI context for one year. `alt` holds the second value of a range year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiPoint {
    pub year: i32,
    pub tokens: f64,
    pub alt: Option<f64>,
}

impl AiPoint {
    /// Lower frontier as the primary value, upper as `alt` in range years.
    pub fn from_frontier(f: &FrontierYear) -> Self {
        Self {
            year: f.year,
            tokens: f.lower,
            alt: f.is_range().then_some(f.upper),
        }
    }
}

pub fn ai_points(series: &YearlySeries) -> Vec<AiPoint> {
    series
        .points()
        .iter()
        .map(|&(year, tokens)| AiPoint {
            year,
            tokens,
            alt: None,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceRow {
    pub year: i32,
    pub ai_tokens: f64,
    pub ai_tokens_alt: Option<f64>,
    pub ecs_tokens: f64,
    pub raw_ratio: f64,
    pub qa_ratio: f64,
}

impl DivergenceRow {
    pub fn new(year: i32, ai_tokens: f64, ai_tokens_alt: Option<f64>, ecs_tokens: f64, band: &QualityBand) -> Self {
        Self {
            year,
            ai_tokens,
            ai_tokens_alt,
            ecs_tokens,
            raw_ratio: ai_tokens / ecs_tokens,
            qa_ratio: quality_adjust(ai_tokens, band, BandPoint::Mid) / ecs_tokens,
        }
    }

    pub fn raw_ratio_alt(&self) -> Option<f64> {
        self.ai_tokens_alt.map(|a| a / self.ecs_tokens)
    }

    /// `(min, max)` raw ratio over the year's AI values.
    pub fn raw_ratio_range(&self) -> (f64, f64) {
        let alt = self.raw_ratio_alt().unwrap_or(self.raw_ratio);
        (self.raw_ratio.min(alt), self.raw_ratio.max(alt))
    }

    /// Larger of the two AI values in range years.
    pub fn ai_upper(&self) -> f64 {
        self.ai_tokens_alt.map_or(self.ai_tokens, |a| a.max(self.ai_tokens))
    }
}

pub fn ratio_series(ai: &[AiPoint], ecs: &YearlySeries, band: &QualityBand) -> Result<Vec<DivergenceRow>> {
    let ai_years: Vec<i32> = ai.iter().map(|p| p.year).collect();
    let ecs_years: Vec<i32> = ecs.years().collect();
    if ai_years != ecs_years {
        return Err(Error::domain(format!(
            "AI years {ai_years:?} and ECS years {ecs_years:?} differ"
        )));
    }
    ai.iter()
        .zip(ecs.points())
        .map(|(p, &(_, e))| {
            if !(e > 0.0) {
                return Err(Error::domain(format!("ECS {e} for {} must be positive", p.year)));
            }
            let positive = |v: f64| v > 0.0 && v.is_finite();
            if !positive(p.tokens) || p.alt.is_some_and(|a| !positive(a)) {
                return Err(Error::domain(format!("AI context for {} must be positive", p.year)));
            }
            Ok(DivergenceRow::new(p.year, p.tokens, p.alt, e, band))
        })
        .collect()
}

/// Serializes rows as CSV. The first five columns carry the primary value;
/// `ai_tokens_alt` and `raw_ratio_alt` are filled only in range years.
pub fn rows_to_csv(rows: &[DivergenceRow]) -> String {
    let mut out = String::from("year,ai_tokens,ecs_tokens,raw_ratio,qa_ratio,ai_tokens_alt,raw_ratio_alt\n");
    for r in rows {
        let alt = r.ai_tokens_alt.map(|v| v.to_string()).unwrap_or_default();
        let alt_ratio = r.raw_ratio_alt().map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.year, r.ai_tokens, r.ecs_tokens, r.raw_ratio, r.qa_ratio, alt, alt_ratio
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossoverKind {
    Exact,
    /// The year's AI range straddles parity.
    Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoCrossover {
    AlwaysAbove,
    AlwaysBelow,
    /// Starts at or above parity and never crosses upward.
    OnlyDownward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "result")]
pub enum Crossover {
    Crossed { year: i32, kind: CrossoverKind },
    None { direction: NoCrossover },
}

impl Crossover {
    pub fn year(&self) -> Option<i32> {
        match self {
            Crossover::Crossed { year, .. } => Some(*year),
            Crossover::None { .. } => None,
        }
    }
}

/// First year whose raw ratio (upper value in range years) reaches parity
/// after a year below it. A ratio of exactly 1 counts as crossed.
pub fn crossover_year(rows: &[DivergenceRow]) -> Crossover {
    let upper = |r: &DivergenceRow| r.ai_upper() >= r.ecs_tokens;
    let lower_below = |r: &DivergenceRow| r.ai_tokens.min(r.ai_upper()) < r.ecs_tokens;

    let mut seen_below = false;
    for r in rows {
        if upper(r) && (seen_below || lower_below(r)) {
            let kind = if lower_below(r) {
                CrossoverKind::Interval
            } else {
                CrossoverKind::Exact
            };
            return Crossover::Crossed { year: r.year, kind };
        }
        if !upper(r) {
            seen_below = true;
        }
    }
    let direction = if rows.iter().all(upper) {
        NoCrossover::AlwaysAbove
    } else if rows.iter().all(|r| !upper(r)) {
        NoCrossover::AlwaysBelow
    } else {
        NoCrossover::OnlyDownward
    };
    Crossover::None { direction }
}
