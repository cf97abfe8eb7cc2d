//! Human Effective Context Span.
//!
//! `ECS(t) = S(t) * R_tok * CSF(t)`: session reading duration in seconds,
//! times reading rate in tokens per second, times the comprehension scaling
//! factor. Two yearly series are offered:
//!
//! - [`SeriesPolicy::Asserted`] uses the tabulated yearly values for
//!   2017-2026 and fills 2004-2016 linearly from the 2004 anchor.
//! - [`SeriesPolicy::Anchored`] interpolates linearly between the ECS values
//!   of the anchors alone.
//!
//! The tabulated values cannot be generated from the anchors, so both are
//! kept and compared downstream.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::conversion::ReadingParams;
use crate::{Error, Result, YearlySeries};

pub const SERIES_FIRST_YEAR: i32 = 2004;
pub const SERIES_LAST_YEAR: i32 = 2026;
pub const ASSERTED_FIRST_YEAR: i32 = 2017;

pub const BUNDLED_ANCHORS: &str = include_str!("../data/ecs_anchors.csv");
pub const BUNDLED_ASSERTED: &str = include_str!("../data/ecs_asserted.csv");

/// Session duration near 2020 quoted alongside the 593 s 2022 anchor.
pub const ALTERNATE_SESSION_2022_SECONDS: f64 = 600.0;

const MAX_SESSION_SECONDS: f64 = 36_000.0;
const MAX_CSF: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcsAnchor {
    pub year: i32,
    /// `S(t)`, cumulative active reading time on one document.
    pub session_seconds: f64,
    /// `CSF(t)`, comprehension scaling factor.
    pub csf: f64,
    pub provenance: String,
}

impl EcsAnchor {
    pub fn new(year: i32, session_seconds: f64, csf: f64, provenance: impl Into<String>) -> Result<Self> {
        let anchor = Self {
            year,
            session_seconds,
            csf,
            provenance: provenance.into(),
        };
        anchor.check()?;
        Ok(anchor)
    }

    fn check(&self) -> Result<()> {
        if !(self.session_seconds > 0.0 && self.session_seconds < MAX_SESSION_SECONDS) {
            return Err(Error::domain(format!(
                "anchor {}: session {} s outside (0, {MAX_SESSION_SECONDS})",
                self.year, self.session_seconds
            )));
        }
        if !(self.csf > 0.0 && self.csf < MAX_CSF) {
            return Err(Error::domain(format!(
                "anchor {}: CSF {} outside (0, {MAX_CSF})",
                self.year, self.csf
            )));
        }
        Ok(())
    }

    /// Tokens covered by one linear pass over the session, before CSF.
    pub fn linear_pass_tokens(&self, reading: &ReadingParams) -> f64 {
        self.session_seconds * reading.tokens_per_second()
    }
}

pub fn alternate_2022_anchor() -> EcsAnchor {
    EcsAnchor {
        year: 2022,
        session_seconds: ALTERNATE_SESSION_2022_SECONDS,
        csf: 1.5,
        provenance: "alternate: ~600 s session near the 2016-2020 plateau".into(),
    }
}

pub fn ecs_at_anchor(anchor: &EcsAnchor, reading: &ReadingParams) -> f64 {
    anchor.session_seconds * reading.tokens_per_second() * anchor.csf
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesPolicy {
    Anchored,
    #[default]
    Asserted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcsSchedule {
    anchors: Vec<EcsAnchor>,
    asserted: BTreeMap<i32, f64>,
    reading: ReadingParams,
}

impl EcsSchedule {
    pub fn new(
        mut anchors: Vec<EcsAnchor>,
        asserted: BTreeMap<i32, f64>,
        reading: ReadingParams,
    ) -> Result<Self> {
        anchors.sort_by_key(|a| a.year);
        if anchors.is_empty() {
            return Err(Error::domain("schedule needs at least one anchor"));
        }
        for a in &anchors {
            a.check()?;
        }
        if let Some(w) = anchors.windows(2).find(|w| w[0].year == w[1].year) {
            return Err(Error::domain(format!("duplicate anchor year {}", w[0].year)));
        }
        if let Some((y, v)) = asserted.iter().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::domain(format!("asserted ECS {v} for {y} must be positive")));
        }
        let vals: Vec<_> = asserted.iter().collect();
        if let Some(w) = vals.windows(2).find(|w| w[1].1 >= w[0].1) {
            return Err(Error::domain(format!(
                "asserted ECS must strictly decrease: {} -> {}",
                w[0].0, w[1].0
            )));
        }
        Ok(Self {
            anchors,
            asserted,
            reading,
        })
    }

    pub fn bundled() -> Self {
        Self::from_csv(BUNDLED_ANCHORS, BUNDLED_ASSERTED, ReadingParams::default())
            .expect("bundled ECS data is valid")
    }

    pub fn from_csv(anchors_csv: &str, asserted_csv: &str, reading: ReadingParams) -> Result<Self> {
        Self::new(parse_anchors(anchors_csv)?, parse_asserted(asserted_csv)?, reading)
    }

    pub fn anchors(&self) -> &[EcsAnchor] {
        &self.anchors
    }

    pub fn anchor(&self, year: i32) -> Result<&EcsAnchor> {
        self.anchors
            .iter()
            .find(|a| a.year == year)
            .ok_or_else(|| Error::domain(format!("no ECS anchor for {year}")))
    }

    pub fn asserted(&self) -> &BTreeMap<i32, f64> {
        &self.asserted
    }

    pub fn reading(&self) -> &ReadingParams {
        &self.reading
    }

    pub fn anchor_values(&self) -> Vec<(i32, f64)> {
        self.anchors
            .iter()
            .map(|a| (a.year, ecs_at_anchor(a, &self.reading)))
            .collect()
    }

    /// ECS for one year of the 2004-2026 domain under `policy`.
    pub fn ecs_at_year(&self, year: i32, policy: SeriesPolicy) -> Result<f64> {
        if !(SERIES_FIRST_YEAR..=SERIES_LAST_YEAR).contains(&year) {
            return Err(Error::domain(format!(
                "year {year} outside {SERIES_FIRST_YEAR}-{SERIES_LAST_YEAR}"
            )));
        }
        match policy {
            SeriesPolicy::Anchored => interpolate(&self.anchor_values(), year),
            SeriesPolicy::Asserted => {
                if let Some(v) = self.asserted.get(&year) {
                    return Ok(*v);
                }
                let (&first_year, &first_value) = self
                    .asserted
                    .iter()
                    .next()
                    .ok_or_else(|| Error::domain("no asserted ECS values"))?;
                if year > first_year {
                    return Err(Error::domain(format!("no asserted ECS value for {year}")));
                }
                let start = self.anchor(SERIES_FIRST_YEAR)?;
                let knots = [
                    (start.year, ecs_at_anchor(start, &self.reading)),
                    (first_year, first_value),
                ];
                interpolate(&knots, year)
            }
        }
    }
}

fn interpolate(knots: &[(i32, f64)], year: i32) -> Result<f64> {
    if let Some(&(_, v)) = knots.iter().find(|(y, _)| *y == year) {
        return Ok(v);
    }
    let seg = knots
        .windows(2)
        .find(|w| w[0].0 < year && year < w[1].0)
        .ok_or_else(|| Error::domain(format!("year {year} not bracketed by anchors")))?;
    let (y0, v0) = seg[0];
    let (y1, v1) = seg[1];
    let frac = f64::from(year - y0) / f64::from(y1 - y0);
    Ok(v0 + frac * (v1 - v0))
}

/// Yearly ECS over 2004-2026.
pub fn ecs_series(schedule: &EcsSchedule, policy: SeriesPolicy) -> Result<YearlySeries> {
    let points = (SERIES_FIRST_YEAR..=SERIES_LAST_YEAR)
        .map(|y| schedule.ecs_at_year(y, policy).map(|v| (y, v)))
        .collect::<Result<Vec<_>>>()?;
    YearlySeries::new(points)
}

/// Mean change per year between two years of `series`.
pub fn mean_decline_rate(series: &YearlySeries, from: i32, to: i32) -> Result<f64> {
    if from >= to {
        return Err(Error::domain(format!("decline rate needs from < to, got {from} >= {to}")));
    }
    Ok((series.value(to)? - series.value(from)?) / f64::from(to - from))
}

#[derive(Deserialize)]
struct AnchorRow {
    year: i32,
    session_seconds: f64,
    csf: f64,
    provenance: String,
}

#[derive(Deserialize)]
struct AssertedRow {
    year: i32,
    tokens: f64,
}

pub fn parse_anchors(text: &str) -> Result<Vec<EcsAnchor>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<AnchorRow>().enumerate() {
        let row = row.map_err(|e| Error::row(i + 1, e.to_string()))?;
        out.push(
            EcsAnchor::new(row.year, row.session_seconds, row.csf, row.provenance)
                .map_err(|e| Error::row(i + 1, e.to_string()))?,
        );
    }
    if out.is_empty() {
        return Err(Error::Parse("no rows".into()));
    }
    Ok(out)
}

pub fn parse_asserted(text: &str) -> Result<BTreeMap<i32, f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = BTreeMap::new();
    for (i, row) in reader.deserialize::<AssertedRow>().enumerate() {
        let row = row.map_err(|e| Error::row(i + 1, e.to_string()))?;
        if out.insert(row.year, row.tokens).is_some() {
            return Err(Error::row(i + 1, format!("duplicate year {}", row.year)));
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("no rows".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;

    fn reading() -> ReadingParams {
        ReadingParams::default()
    }

    fn anchor(year: i32, s: f64, csf: f64) -> EcsAnchor {
        EcsAnchor {
            year,
            session_seconds: s,
            csf,
            provenance: String::new(),
        }
    }

    #[test]
    fn anchor_products() {
        // 238 * 1.33 / 60 = 5.2756666...
        assert_relative_eq!(ecs_at_anchor(&anchor(2004, 1515.0, 2.0), &reading()), 15_985.27, max_relative = 1e-12);
        assert_relative_eq!(ecs_at_anchor(&anchor(2026, 284.0, 1.2), &reading()), 1_797.947_2, max_relative = 1e-12);
        assert_relative_eq!(ecs_at_anchor(&anchor(2022, 593.0, 1.5), &reading()), 4_692.705_5, max_relative = 1e-12);
        assert_eq!(ecs_at_anchor(&anchor(2022, 593.0, 0.0), &reading()), 0.0);
    }

    #[test]
    fn asserted_series() {
        let sched = EcsSchedule::bundled();
        let s = ecs_series(&sched, SeriesPolicy::Asserted).unwrap();
        assert_eq!(s.len(), 23);
        assert_eq!(s.get(2019), Some(10_500.0));
        assert_eq!(s.get(2022), Some(6_000.0));
        assert_relative_eq!(s.get(2004).unwrap(), 15_985.27, max_relative = 1e-12);
        // 2010 sits 6/13 of the way from the 2004 anchor to 13,500.
        let expect = 15_985.27 + 6.0 / 13.0 * (13_500.0 - 15_985.27);
        assert_relative_eq!(s.get(2010).unwrap(), expect, max_relative = 1e-12);
        assert!(s.points().windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn anchored_series() {
        let sched = EcsSchedule::bundled();
        let s = ecs_series(&sched, SeriesPolicy::Anchored).unwrap();
        assert_relative_eq!(s.get(2022).unwrap(), 4_692.705_5, max_relative = 1e-12);
        assert_relative_eq!(s.get(2024).unwrap(), (4_692.705_5 + 1_797.947_2) / 2.0, max_relative = 1e-12);
        assert!(s.values().all(|v| v > 0.0));
    }

    #[test]
    fn year_domain() {
        let sched = EcsSchedule::bundled();
        assert!(sched.ecs_at_year(2003, SeriesPolicy::Asserted).is_err());
        assert!(sched.ecs_at_year(2027, SeriesPolicy::Anchored).is_err());
    }

    #[test]
    fn decline_rates() {
        let s = ecs_series(&EcsSchedule::bundled(), SeriesPolicy::Asserted).unwrap();
        assert_relative_eq!(mean_decline_rate(&s, 2017, 2026).unwrap(), -1300.0, max_relative = 1e-12);
        assert_relative_eq!(mean_decline_rate(&s, 2017, 2023).unwrap(), -1500.0, max_relative = 1e-12);
        assert_relative_eq!(mean_decline_rate(&s, 2004, 2026).unwrap(), (1800.0 - 15_985.27) / 22.0, max_relative = 1e-12);
        let early = mean_decline_rate(&s, 2004, 2017).unwrap();
        assert!((early / -190.0 - 1.0).abs() < 0.05, "{early}");
        assert!(mean_decline_rate(&s, 2020, 2020).is_err());
        assert!(mean_decline_rate(&s, 2021, 2020).is_err());
        let flat = YearlySeries::new(vec![(2020, 5.0), (2021, 5.0)]).unwrap();
        assert_eq!(mean_decline_rate(&flat, 2020, 2021).unwrap(), 0.0);
    }

    #[test]
    fn schedule_validation() {
        let a = vec![anchor(2004, 1515.0, 2.0)];
        let up: BTreeMap<_, _> = [(2017, 1.0), (2018, 2.0)].into();
        assert!(EcsSchedule::new(a.clone(), up, reading()).is_err());
        let neg: BTreeMap<_, _> = [(2017, -1.0)].into();
        assert!(EcsSchedule::new(a.clone(), neg, reading()).is_err());
        let dup = vec![anchor(2004, 1515.0, 2.0), anchor(2004, 1000.0, 2.0)];
        assert!(EcsSchedule::new(dup, BTreeMap::new(), reading()).is_err());
        assert!(EcsAnchor::new(2004, 0.0, 2.0, "").is_err());
        assert!(EcsAnchor::new(2004, 100.0, 10.0, "").is_err());
        assert!(parse_anchors("year,session_seconds,csf,provenance\n").is_err());
        let err = parse_asserted("year,tokens\n2017,abc\n").unwrap_err();
        assert!(matches!(err, Error::Row { row: 1, .. }));
    }

    #[test]
    fn alternate_anchor_is_valid() {
        let alt = alternate_2022_anchor();
        alt.check().unwrap();
        assert!(ecs_at_anchor(&alt, &reading()) > 4_692.7);
    }

    proptest! {
        #[test]
        fn product_form_is_multiplicative(s in 1.0..3000.0f64, csf in 0.1..5.0f64, k in 0.1..3.0f64) {
            let base = ecs_at_anchor(&anchor(2022, s, csf), &reading());
            let scaled_s = ecs_at_anchor(&anchor(2022, k * s, csf), &reading());
            let scaled_c = ecs_at_anchor(&anchor(2022, s, k * csf), &reading());
            prop_assert!((scaled_s - k * base).abs() <= 1e-12 * scaled_s);
            prop_assert!((scaled_c - k * base).abs() <= 1e-12 * scaled_c);
        }
    }
}
