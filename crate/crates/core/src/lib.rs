//! Deterministic modeling toolkit for the divergence between LLM context
//! windows and the human Effective Context Span (ECS).
//!
//! The crate is organised bottom-up:
//!
//! - [`timeline`]: dated record of maximum context windows and the yearly frontier.
//! - [`conversion`]: words, tokens and reading-time arithmetic.
//! - [`ecs`]: the ECS product `S(t) * R_tok * CSF(t)` and the yearly ECS series.
//! - [`growthfit`]: log-linear exponential fits, doubling time, CAGR, bootstrap.
//! - [`divergence`]: AI/human ratio rows, quality adjustment, crossover detection.
//! - [`sensitivity`]: scenario tables and parameter sweeps.
//! - [`loopsim`]: discrete-time simulator of the delegation feedback loop.
//! - [`report`]: pipeline orchestration, CSV/markdown/SVG emitters.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conversion;
pub mod divergence;
pub mod ecs;
mod error;
pub mod growthfit;
pub mod loopsim;
pub mod report;
pub mod sensitivity;
pub mod series;
pub mod timeline;

pub use error::{Error, Result};
pub use series::YearlySeries;
