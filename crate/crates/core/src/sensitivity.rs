//! Scenario table for ECS endpoints under alternative CSF assumptions, plus
//! a two-axis sweep over the 2026 CSF and session duration.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conversion::ReadingParams;
use crate::ecs::{ecs_at_anchor, EcsAnchor, EcsSchedule};
use crate::{Error, Result};

pub const BUNDLED_SCENARIOS: &str = include_str!("../data/scenarios.json");

fn default_ai_2026() -> f64 {
    2_000_000.0
}

fn default_qa_midpoint() -> f64 {
    150_000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub csf_2004: f64,
    pub csf_2022: f64,
    pub csf_2026: f64,
    /// Session seconds by year; years not listed use the schedule anchor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_overrides: Option<BTreeMap<i32, f64>>,
    #[serde(default = "default_ai_2026")]
    pub ai_2026_tokens: f64,
    #[serde(default = "default_qa_midpoint")]
    pub qa_midpoint_tokens: f64,
}

impl Scenario {
    pub fn new(name: impl Into<String>, csf_2004: f64, csf_2022: f64, csf_2026: f64) -> Self {
        Self {
            name: name.into(),
            csf_2004,
            csf_2022,
            csf_2026,
            session_overrides: None,
            ai_2026_tokens: default_ai_2026(),
            qa_midpoint_tokens: default_qa_midpoint(),
        }
    }

    fn check(&self) -> Result<()> {
        for (year, csf) in [(2004, self.csf_2004), (2022, self.csf_2022), (2026, self.csf_2026)] {
            if !(csf > 0.0 && csf < 10.0) {
                return Err(Error::domain(format!(
                    "scenario {:?}: CSF {csf} for {year} outside (0, 10)",
                    self.name
                )));
            }
        }
        if !(self.ai_2026_tokens > 0.0 && self.qa_midpoint_tokens > 0.0) {
            return Err(Error::domain(format!(
                "scenario {:?}: AI context values must be positive",
                self.name
            )));
        }
        Ok(())
    }

    fn session_seconds(&self, anchors: &EcsSchedule, year: i32) -> Result<f64> {
        let base = anchors.anchor(year)?.session_seconds;
        Ok(self
            .session_overrides
            .as_ref()
            .and_then(|m| m.get(&year).copied())
            .unwrap_or(base))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub ecs_2004: f64,
    pub ecs_2022: f64,
    pub ecs_2026: f64,
    pub raw_ratio: f64,
    pub qa_ratio: f64,
}

pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>> {
    Ok(serde_json::from_str(text)?)
}

pub fn bundled_scenarios() -> Vec<Scenario> {
    parse_scenarios(BUNDLED_SCENARIOS).expect("bundled scenarios parse")
}

/// Applies the ECS product at 2004, 2022 and 2026 with the scenario's CSF
/// values and any session overrides.
pub fn run_scenario(scenario: &Scenario, anchors: &EcsSchedule, reading: &ReadingParams) -> Result<ScenarioResult> {
    scenario.check()?;
    let ecs = |year: i32, csf: f64| -> Result<f64> {
        let anchor = EcsAnchor {
            year,
            session_seconds: scenario.session_seconds(anchors, year)?,
            csf,
            provenance: String::new(),
        };
        if !(anchor.session_seconds > 0.0) {
            return Err(Error::domain(format!(
                "scenario {:?}: session for {year} must be positive",
                scenario.name
            )));
        }
        Ok(ecs_at_anchor(&anchor, reading))
    };
    let ecs_2004 = ecs(2004, scenario.csf_2004)?;
    let ecs_2022 = ecs(2022, scenario.csf_2022)?;
    let ecs_2026 = ecs(2026, scenario.csf_2026)?;
    Ok(ScenarioResult {
        ecs_2004,
        ecs_2022,
        ecs_2026,
        raw_ratio: scenario.ai_2026_tokens / ecs_2026,
        qa_ratio: scenario.qa_midpoint_tokens / ecs_2026,
    })
}

/// Runs every scenario, preserving input order.
pub fn run_all(
    scenarios: &[Scenario],
    anchors: &EcsSchedule,
    reading: &ReadingParams,
) -> Result<Vec<(String, ScenarioResult)>> {
    if scenarios.is_empty() {
        return Err(Error::domain("no scenarios"));
    }
    let mut names = HashSet::new();
    if let Some(dup) = scenarios.iter().find(|s| !names.insert(s.name.as_str())) {
        return Err(Error::domain(format!("duplicate scenario name {:?}", dup.name)));
    }
    scenarios
        .par_iter()
        .map(|s| {
            run_scenario(s, anchors, reading)
                .map(|r| (s.name.clone(), r))
                .map_err(|e| Error::domain(format!("scenario {:?}: {e}", s.name)))
        })
        .collect()
}

/// Scenario CSV: name, three CSF values, ECS 2004/2026, ratios.
pub fn results_to_csv(scenarios: &[Scenario], results: &[(String, ScenarioResult)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "scenario", "csf_2004", "csf_2022", "csf_2026", "ecs_2004", "ecs_2026", "raw_ratio", "qa_ratio",
    ])
    .expect("write to Vec");
    for (s, (_, r)) in scenarios.iter().zip(results) {
        w.write_record([
            s.name.clone(),
            s.csf_2004.to_string(),
            s.csf_2022.to_string(),
            s.csf_2026.to_string(),
            r.ecs_2004.to_string(),
            r.ecs_2026.to_string(),
            r.raw_ratio.to_string(),
            r.qa_ratio.to_string(),
        ])
        .expect("write to Vec");
    }
    String::from_utf8(w.into_inner().expect("flush Vec")).expect("utf-8 csv")
}

/// Evenly spaced axis. One step is allowed only for a point axis
/// (`low == high`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub low: f64,
    pub high: f64,
    pub steps: usize,
}

impl AxisRange {
    pub fn point(v: f64) -> Self {
        Self { low: v, high: v, steps: 1 }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        let finite = self.low.is_finite() && self.high.is_finite();
        let point = self.steps == 1 && self.low == self.high;
        if !finite || !(point || (self.low < self.high && self.steps >= 2)) {
            return Err(Error::domain(format!(
                "invalid sweep range [{}, {}] with {} steps",
                self.low, self.high, self.steps
            )));
        }
        if point {
            return Ok(vec![self.low]);
        }
        let last = (self.steps - 1) as f64;
        Ok((0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.high
                } else {
                    self.low + (self.high - self.low) * i as f64 / last
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub csf_2026: Vec<f64>,
    pub session_2026: Vec<f64>,
    /// `results[i][j]` pairs `csf_2026[i]` with `session_2026[j]`.
    pub results: Vec<Vec<ScenarioResult>>,
}

impl SweepGrid {
    pub fn iter(&self) -> impl Iterator<Item = &ScenarioResult> {
        self.results.iter().flatten()
    }
}

/// Cartesian sweep over the 2026 CSF and the 2026 session duration.
pub fn sweep(
    csf_2026_range: AxisRange,
    session_2026_range: AxisRange,
    fixed: &Scenario,
    anchors: &EcsSchedule,
    reading: &ReadingParams,
) -> Result<SweepGrid> {
    let csf_values = csf_2026_range.values()?;
    let session_values = session_2026_range.values()?;
    let results = csf_values
        .iter()
        .map(|&csf| {
            session_values
                .iter()
                .map(|&session| {
                    let mut s = fixed.clone();
                    s.csf_2026 = csf;
                    s.session_overrides
                        .get_or_insert_with(BTreeMap::new)
                        .insert(2026, session);
                    run_scenario(&s, anchors, reading)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepGrid {
        csf_2026: csf_values,
        session_2026: session_values,
        results,
    })
}
