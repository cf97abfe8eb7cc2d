//! Chronological record of LLM maximum context windows.
//!
//! The bundled `timeline.csv` lists one row per documented release. ChatGPT
//! appears twice: 4,096 tokens at launch (2022-11) and 8,192 tokens once the
//! larger variant shipped (2023-01). The yearly frontier is the running
//! maximum over releases dated in or before each year, so a window persists
//! through years without new releases.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, YearlySeries};

pub const MIN_YEAR: i32 = 2017;
pub const MAX_YEAR: i32 = 2035;

pub const BUNDLED_TIMELINE: &str = include_str!("../data/timeline.csv");

/// Model excluded from the default frontier so the yearly series matches
/// the published comparison table.
pub const DEFAULT_EXCLUSION: &str = "Llama 4 Scout";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelRelease {
    pub release_year: i32,
    pub release_month: u32,
    pub model_name: String,
    pub max_context_tokens: i64,
    pub source_tag: String,
}

impl ModelRelease {
    pub fn date_key(&self) -> (i32, u32) {
        (self.release_year, self.release_month)
    }

    /// Release date as fractional years, month 1 at the year boundary.
    pub fn decimal_year(&self) -> f64 {
        f64::from(self.release_year) + f64::from(self.release_month - 1) / 12.0
    }
}

/// Releases kept sorted ascending by `(year, month)`; ties keep insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct TimelineDataset {
    releases: Vec<ModelRelease>,
    provenance: String,
}

impl TimelineDataset {
    /// Builds a dataset without checking the record invariants. Use
    /// [`validate`] to list violations.
    pub fn from_releases(mut releases: Vec<ModelRelease>, provenance: impl Into<String>) -> Self {
        releases.sort_by_key(ModelRelease::date_key);
        Self {
            releases,
            provenance: provenance.into(),
        }
    }

    pub fn bundled() -> Self {
        parse_timeline(BUNDLED_TIMELINE, "bundled timeline.csv")
            .expect("bundled timeline parses")
    }

    pub fn releases(&self) -> &[ModelRelease] {
        &self.releases
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.releases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.releases.is_empty()
    }

    /// Inserts after any release with the same date.
    pub fn insert(&mut self, release: ModelRelease) {
        let key = release.date_key();
        let at = self.releases.partition_point(|r| r.date_key() <= key);
        self.releases.insert(at, release);
    }

    pub fn included<'a>(&'a self, exclusions: &'a [String]) -> impl Iterator<Item = &'a ModelRelease> {
        self.releases
            .iter()
            .filter(move |r| !exclusions.iter().any(|x| x == &r.model_name))
    }

    /// Serializes back to the `date,model,max_context_tokens,source` format.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(["date", "model", "max_context_tokens", "source"])
            .expect("write to Vec");
        for r in &self.releases {
            let date = format!("{:04}-{:02}", r.release_year, r.release_month);
            let tokens = r.max_context_tokens.to_string();
            w.write_record([date.as_str(), &r.model_name, &tokens, &r.source_tag])
                .expect("write to Vec");
        }
        String::from_utf8(w.into_inner().expect("flush Vec")).expect("utf-8 csv")
    }
}

fn parse_date(raw: &str, row: usize) -> Result<(i32, u32)> {
    let bad = || Error::row(row, format!("malformed date {raw:?}, expected YYYY-MM"));
    let (y, m) = raw.trim().split_once('-').ok_or_else(bad)?;
    if y.len() != 4 || m.len() != 2 {
        return Err(bad());
    }
    let year: i32 = y.parse().map_err(|_| bad())?;
    let month: u32 = m.parse().map_err(|_| bad())?;
    if !(1..=12).contains(&month) {
        return Err(bad());
    }
    Ok((year, month))
}

/// Parses `timeline.csv` text. Rows are numbered from 1, excluding the header.
pub fn parse_timeline(text: &str, provenance: &str) -> Result<TimelineDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("missing column {name:?}")))
    };
    if headers.iter().all(str::is_empty) {
        return Err(Error::Parse("no rows".into()));
    }
    let (c_date, c_model, c_tokens, c_source) =
        (col("date")?, col("model")?, col("max_context_tokens")?, col("source")?);

    let mut releases = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::row(row, e.to_string()))?;
        let field = |c: usize, name: &str| {
            record
                .get(c)
                .ok_or_else(|| Error::row(row, format!("missing column {name:?}")))
        };
        let (release_year, release_month) = parse_date(field(c_date, "date")?, row)?;
        let raw_tokens = field(c_tokens, "max_context_tokens")?;
        let max_context_tokens: i64 = raw_tokens
            .parse()
            .map_err(|_| Error::row(row, format!("invalid token count {raw_tokens:?}")))?;
        if max_context_tokens <= 0 {
            return Err(Error::row(
                row,
                format!("non-positive token count {max_context_tokens}"),
            ));
        }
        releases.push(ModelRelease {
            release_year,
            release_month,
            model_name: field(c_model, "model")?.to_string(),
            max_context_tokens,
            source_tag: field(c_source, "source")?.to_string(),
        });
    }
    if releases.is_empty() {
        return Err(Error::Parse("no rows".into()));
    }
    Ok(TimelineDataset::from_releases(releases, provenance))
}

/// Running maximum of the context window over non-excluded releases dated in
/// or before each year of `first_year..=last_year`.
pub fn leading_context_by_year(
    dataset: &TimelineDataset,
    first_year: i32,
    last_year: i32,
    exclusions: &[String],
) -> Result<YearlySeries> {
    Ok(frontier_bounds_by_year(dataset, first_year, last_year, exclusions)?
        .into_iter()
        .map(|b| (b.year, b.lower))
        .collect::<Vec<_>>())
    .and_then(YearlySeries::new)
}

/// Frontier for one year. `lower` is the running maximum of release-time
/// values; `upper` additionally counts the documented peak of every model
/// first released by that year. They differ only in years where a model
/// launched with a smaller window than its later variant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierYear {
    pub year: i32,
    pub lower: f64,
    pub upper: f64,
    /// Release that first attained `lower` within the year, or the carried
    /// holder when no release that year reached it.
    pub leading_model: String,
}

impl FrontierYear {
    pub fn is_range(&self) -> bool {
        self.upper > self.lower
    }
}

pub fn frontier_bounds_by_year(
    dataset: &TimelineDataset,
    first_year: i32,
    last_year: i32,
    exclusions: &[String],
) -> Result<Vec<FrontierYear>> {
    if first_year > last_year {
        return Err(Error::domain(format!(
            "first year {first_year} after last year {last_year}"
        )));
    }
    let included: Vec<&ModelRelease> = dataset.included(exclusions).collect();
    if !included.iter().any(|r| r.release_year <= first_year) {
        return Err(Error::domain(format!(
            "no frontier value at or before {first_year}"
        )));
    }

    let mut first_seen: HashMap<&str, i32> = HashMap::new();
    let mut peak: HashMap<&str, i64> = HashMap::new();
    for r in &included {
        first_seen.entry(&r.model_name).or_insert(r.release_year);
        let p = peak.entry(&r.model_name).or_insert(0);
        *p = (*p).max(r.max_context_tokens);
    }

    let mut out = Vec::with_capacity((last_year - first_year + 1) as usize);
    let mut lower = 0i64;
    let mut holder = String::new();
    let mut upper = 0i64;
    let mut cursor = 0usize;
    for year in (included[0].release_year.min(first_year))..=last_year {
        let mut claimed = false;
        while cursor < included.len() && included[cursor].release_year == year {
            let r = included[cursor];
            if r.max_context_tokens > lower || (r.max_context_tokens == lower && !claimed) {
                lower = r.max_context_tokens;
                holder = r.model_name.clone();
                claimed = true;
            }
            if first_seen[r.model_name.as_str()] == year {
                upper = upper.max(peak[r.model_name.as_str()]);
            }
            cursor += 1;
        }
        upper = upper.max(lower);
        if year >= first_year {
            out.push(FrontierYear {
                year,
                lower: lower as f64,
                upper: upper as f64,
                leading_model: holder.clone(),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FindingKind {
    EmptyDataset,
    DuplicateEntry,
    NonPositiveContext,
    YearOutOfRange,
    MonthOutOfRange,
    EmptyModelName,
    Unsorted,
    YearGap,
}

impl fmt::Display for FindingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FindingKind::EmptyDataset => "empty dataset",
            FindingKind::DuplicateEntry => "duplicate entry",
            FindingKind::NonPositiveContext => "non-positive context",
            FindingKind::YearOutOfRange => "year out of range",
            FindingKind::MonthOutOfRange => "month out of range",
            FindingKind::EmptyModelName => "empty model name",
            FindingKind::Unsorted => "unsorted",
            FindingKind::YearGap => "year gap",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub kind: FindingKind,
    /// 1-based position in the dataset, when the finding concerns one entry.
    pub row: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has(&self, kind: FindingKind) -> bool {
        self.findings.iter().any(|f| f.kind == kind)
    }

    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        self.findings
            .iter()
            .map(|f| serde_json::to_string(f).expect("finding serializes") + "\n")
            .collect()
    }
}

pub fn validate(dataset: &TimelineDataset) -> ValidationReport {
    let mut findings = Vec::new();
    let mut push = |kind, row, message: String| findings.push(Finding { kind, row, message });

    if dataset.is_empty() {
        push(FindingKind::EmptyDataset, None, "empty dataset".into());
        return ValidationReport { findings };
    }

    let mut seen: BTreeMap<(i32, u32, &str), usize> = BTreeMap::new();
    for (i, r) in dataset.releases.iter().enumerate() {
        let row = i + 1;
        if r.max_context_tokens < 1 {
            push(
                FindingKind::NonPositiveContext,
                Some(row),
                format!("non-positive context: {} has {} tokens", r.model_name, r.max_context_tokens),
            );
        }
        if !(MIN_YEAR..=MAX_YEAR).contains(&r.release_year) {
            push(
                FindingKind::YearOutOfRange,
                Some(row),
                format!("year out of range: {} not in [{MIN_YEAR}, {MAX_YEAR}]", r.release_year),
            );
        }
        if !(1..=12).contains(&r.release_month) {
            push(
                FindingKind::MonthOutOfRange,
                Some(row),
                format!("month out of range: {}", r.release_month),
            );
        }
        if r.model_name.trim().is_empty() {
            push(FindingKind::EmptyModelName, Some(row), "empty model name".into());
        }
        let key = (r.release_year, r.release_month, r.model_name.as_str());
        if let Some(first) = seen.insert(key, row) {
            push(
                FindingKind::DuplicateEntry,
                Some(row),
                format!(
                    "duplicate entry: {:04}-{:02} {} repeats row {first}",
                    r.release_year, r.release_month, r.model_name
                ),
            );
        }
    }
    if dataset
        .releases
        .windows(2)
        .any(|w| w[0].date_key() > w[1].date_key())
    {
        push(FindingKind::Unsorted, None, "unsorted: releases out of date order".into());
    }

    let years: BTreeSet<i32> = dataset.releases.iter().map(|r| r.release_year).collect();
    if let (Some(&lo), Some(&hi)) = (years.first(), years.last()) {
        for y in lo..=hi {
            if !years.contains(&y) {
                push(FindingKind::YearGap, None, format!("year gap: no release dated {y}"));
            }
        }
    }
    ValidationReport { findings }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn release(y: i32, m: u32, name: &str, tokens: i64) -> ModelRelease {
        ModelRelease {
            release_year: y,
            release_month: m,
            model_name: name.into(),
            max_context_tokens: tokens,
            source_tag: "test".into(),
        }
    }

    fn no_excl() -> Vec<String> {
        Vec::new()
    }

    fn default_excl() -> Vec<String> {
        vec![DEFAULT_EXCLUSION.to_string()]
    }

    #[test]
    fn parses_single_rows() {
        let ds = parse_timeline(
            "date,model,max_context_tokens,source\n2026-02,Grok 4.20,2000000,xAI2026\n2017-06,Transformer,512,Vaswani2017\n",
            "t",
        )
        .unwrap();
        assert_eq!(ds.releases()[0], ModelRelease {
            release_year: 2017,
            release_month: 6,
            model_name: "Transformer".into(),
            max_context_tokens: 512,
            source_tag: "Vaswani2017".into(),
        });
        assert_eq!(ds.releases()[1].model_name, "Grok 4.20");
        assert_eq!(ds.releases()[1].max_context_tokens, 2_000_000);
        assert_eq!(ds.releases()[1].date_key(), (2026, 2));
    }

    #[test]
    fn parse_errors_name_the_row() {
        let err = parse_timeline("", "t").unwrap_err();
        assert!(err.to_string().contains("no rows"), "{err}");
        let err = parse_timeline("date,model,max_context_tokens,source\n", "t").unwrap_err();
        assert!(err.to_string().contains("no rows"), "{err}");

        let err = parse_timeline(
            "date,model,max_context_tokens,source\n2017-06,A,512,x\n2018/06,B,512,x\n",
            "t",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Row { row: 2, .. }), "{err}");

        let err = parse_timeline("date,model,max_context_tokens,source\n2017-06,A,0,x\n", "t")
            .unwrap_err();
        assert!(matches!(err, Error::Row { row: 1, .. }), "{err}");
        assert!(err.to_string().contains("non-positive"));

        let err = parse_timeline("date,model,source\n2017-06,A,x\n", "t").unwrap_err();
        assert!(err.to_string().contains("missing column"), "{err}");

        let err = parse_timeline("date,model,max_context_tokens,source\n2017-13,A,5,x\n", "t")
            .unwrap_err();
        assert!(matches!(err, Error::Row { row: 1, .. }));

        let err = parse_timeline("date,model,max_context_tokens,source\n2017-01,A,5\n", "t")
            .unwrap_err();
        assert!(matches!(err, Error::Row { row: 1, .. }), "{err}");
    }

    #[test]
    fn bundled_dataset_shape() {
        let ds = TimelineDataset::bundled();
        assert_eq!(ds.len(), 20);
        assert!(validate(&ds).is_clean(), "{:?}", validate(&ds));
        assert!(ds.releases().windows(2).all(|w| w[0].date_key() <= w[1].date_key()));
    }

    #[test]
    fn frontier_matches_published_rows() {
        let ds = TimelineDataset::bundled();
        let s = leading_context_by_year(&ds, 2017, 2026, &default_excl()).unwrap();
        assert_eq!(s.get(2020), Some(2048.0));
        assert_eq!(s.get(2026), Some(2_000_000.0));
        let all = leading_context_by_year(&ds, 2017, 2026, &no_excl()).unwrap();
        assert_eq!(all.get(2026), Some(10_000_000.0));
        assert_eq!(all.get(2025), Some(10_000_000.0));
    }

    #[test]
    fn frontier_all_rows_brute_force() {
        let ds = TimelineDataset::bundled();
        let all = leading_context_by_year(&ds, 2017, 2026, &no_excl()).unwrap();
        for (year, v) in all.points() {
            let brute = ds
                .releases()
                .iter()
                .filter(|r| r.release_year <= *year)
                .map(|r| r.max_context_tokens)
                .max()
                .unwrap();
            assert_eq!(*v, brute as f64, "year {year}");
        }
    }

    #[test]
    fn range_year_2022() {
        let ds = TimelineDataset::bundled();
        let b = frontier_bounds_by_year(&ds, 2017, 2026, &default_excl()).unwrap();
        let y2022 = b.iter().find(|f| f.year == 2022).unwrap();
        assert_eq!((y2022.lower, y2022.upper), (4096.0, 8192.0));
        assert!(y2022.is_range());
        assert_eq!(b.iter().filter(|f| f.is_range()).count(), 1);
        assert_eq!(y2022.leading_model, "ChatGPT / GPT-3.5");
        let y2024 = b.iter().find(|f| f.year == 2024).unwrap();
        assert_eq!(y2024.leading_model, "Gemini 1.5 Pro");
    }

    #[test]
    fn frontier_errors() {
        let ds = TimelineDataset::bundled();
        assert!(leading_context_by_year(&ds, 2016, 2020, &no_excl()).is_err());
        assert!(leading_context_by_year(&ds, 2020, 2019, &no_excl()).is_err());
    }

    #[test]
    fn carry_forward_over_empty_years() {
        let ds = TimelineDataset::from_releases(
            vec![release(2017, 1, "A", 10), release(2020, 1, "B", 40)],
            "t",
        );
        let s = leading_context_by_year(&ds, 2017, 2021, &no_excl()).unwrap();
        assert_eq!(s.values().collect::<Vec<_>>(), vec![10.0, 10.0, 10.0, 40.0, 40.0]);
        assert!(validate(&ds).has(FindingKind::YearGap));
    }

    #[test]
    fn validate_reports_constructed_violations() {
        let mut releases = TimelineDataset::bundled().releases().to_vec();
        releases.push(release(2023, 7, "Claude 2", 100_000));
        let ds = TimelineDataset::from_releases(releases, "t");
        let report = validate(&ds);
        assert!(report.has(FindingKind::DuplicateEntry));
        assert!(report.findings[0].message.contains("duplicate entry"));

        let ds = TimelineDataset::from_releases(vec![release(2017, 1, "Zero", 0)], "t");
        let report = validate(&ds);
        assert!(report.has(FindingKind::NonPositiveContext));
        assert!(report.to_json_lines().contains("non-positive context"));
        assert_eq!(report.to_json_lines().lines().count(), report.findings.len());

        let ds = TimelineDataset::from_releases(vec![release(2040, 13, " ", 5)], "t");
        let report = validate(&ds);
        assert!(report.has(FindingKind::YearOutOfRange));
        assert!(report.has(FindingKind::MonthOutOfRange));
        assert!(report.has(FindingKind::EmptyModelName));

        let ds = TimelineDataset::from_releases(vec![], "t");
        assert!(validate(&ds).has(FindingKind::EmptyDataset));
    }

    #[test]
    fn insert_keeps_sort_order() {
        let mut ds = TimelineDataset::bundled();
        ds.insert(release(2019, 1, "Early", 700));
        ds.insert(release(2026, 12, "Late", 5));
        assert!(ds.releases().windows(2).all(|w| w[0].date_key() <= w[1].date_key()));
        assert_eq!(ds.releases().last().unwrap().model_name, "Late");
    }

    #[test]
    fn bundled_round_trip() {
        let ds = TimelineDataset::bundled();
        assert_eq!(ds.to_csv(), BUNDLED_TIMELINE);
    }
}
