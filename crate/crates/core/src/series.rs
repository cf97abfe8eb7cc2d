use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One value per calendar year, ascending and without duplicate years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearlySeries {
    points: Vec<(i32, f64)>,
}

impl YearlySeries {
    /// Builds a series from `(year, value)` pairs. Pairs are sorted by year;
    /// a repeated year is rejected.
    pub fn new(mut points: Vec<(i32, f64)>) -> Result<Self> {
        points.sort_by_key(|&(y, _)| y);
        if let Some(w) = points.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::domain(format!("duplicate year {} in series", w[0].0)));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(i32, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        self.points.iter().map(|&(y, _)| y)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|&(_, v)| v)
    }

    pub fn first_year(&self) -> Option<i32> {
        self.points.first().map(|&(y, _)| y)
    }

    pub fn last_year(&self) -> Option<i32> {
        self.points.last().map(|&(y, _)| y)
    }

    pub fn get(&self, year: i32) -> Option<f64> {
        self.points
            .binary_search_by_key(&year, |&(y, _)| y)
            .ok()
            .map(|i| self.points[i].1)
    }

    /// Value at `year`, or a domain error naming the missing year.
    pub fn value(&self, year: i32) -> Result<f64> {
        self.get(year)
            .ok_or_else(|| Error::domain(format!("year {year} outside series domain")))
    }

    /// Points as `(year - base_year, value)` observations for fitting.
    pub fn observations(&self, base_year: i32) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|&(y, v)| (f64::from(y - base_year), v))
            .collect()
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            points: self.points.iter().map(|&(y, v)| (y, f(v))).collect(),
        }
    }

    /// Restricts to `first..=last`.
    pub fn slice(&self, first: i32, last: i32) -> Self {
        Self {
            points: self
                .points
                .iter()
                .copied()
                .filter(|&(y, _)| y >= first && y <= last)
                .collect(),
        }
    }
}
