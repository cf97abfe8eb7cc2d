//! Reading-rate arithmetic between seconds, words and tokens.
//!
//! All values stay at full `f64` precision; rounding such as `5.28 tokens/s`
//! belongs to presentation code only.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_WORDS_PER_MINUTE: f64 = 238.0;
pub const DEFAULT_TOKENS_PER_WORD: f64 = 1.33;

/// Reported spread of adult silent reading rates, in words per minute.
/// Exposed for overrides only; nothing downstream propagates it.
pub const READING_RATE_RANGE_WPM: (f64, f64) = (175.0, 300.0);

// Sanity bounds that catch unit mistakes (words per second, characters).
const MAX_WORDS_PER_MINUTE: f64 = 2000.0;
const MAX_TOKENS_PER_WORD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawReadingParams")]
pub struct ReadingParams {
    words_per_minute: f64,
    tokens_per_word: f64,
}

#[derive(Deserialize)]
struct RawReadingParams {
    words_per_minute: f64,
    tokens_per_word: f64,
}

impl TryFrom<RawReadingParams> for ReadingParams {
    type Error = Error;

    fn try_from(raw: RawReadingParams) -> Result<Self> {
        ReadingParams::new(raw.words_per_minute, raw.tokens_per_word)
    }
}

impl Default for ReadingParams {
    fn default() -> Self {
        Self {
            words_per_minute: DEFAULT_WORDS_PER_MINUTE,
            tokens_per_word: DEFAULT_TOKENS_PER_WORD,
        }
    }
}

impl ReadingParams {
    pub fn new(words_per_minute: f64, tokens_per_word: f64) -> Result<Self> {
        if !(words_per_minute > 0.0 && words_per_minute < MAX_WORDS_PER_MINUTE) {
            return Err(Error::domain(format!(
                "words_per_minute {words_per_minute} outside (0, {MAX_WORDS_PER_MINUTE})"
            )));
        }
        if !(tokens_per_word > 0.0 && tokens_per_word < MAX_TOKENS_PER_WORD) {
            return Err(Error::domain(format!(
                "tokens_per_word {tokens_per_word} outside (0, {MAX_TOKENS_PER_WORD})"
            )));
        }
        Ok(Self {
            words_per_minute,
            tokens_per_word,
        })
    }

    pub fn words_per_minute(&self) -> f64 {
        self.words_per_minute
    }

    pub fn tokens_per_word(&self) -> f64 {
        self.tokens_per_word
    }

    /// `R_tok`, tokens read per second.
    pub fn tokens_per_second(&self) -> f64 {
        self.words_per_minute * self.tokens_per_word / 60.0
    }

    pub fn tokens_per_minute(&self) -> f64 {
        self.words_per_minute * self.tokens_per_word
    }

    pub fn seconds_to_tokens(&self, seconds: f64) -> Result<f64> {
        seconds_to_tokens(seconds, self)
    }

    pub fn tokens_to_words(&self, tokens: f64) -> f64 {
        tokens / self.tokens_per_word
    }

    pub fn words_to_tokens(&self, words: f64) -> f64 {
        words * self.tokens_per_word
    }

    pub fn seconds_to_words(&self, seconds: f64) -> Result<f64> {
        Ok(self.tokens_to_words(self.seconds_to_tokens(seconds)?))
    }
}

pub fn tokens_per_second(params: &ReadingParams) -> f64 {
    params.tokens_per_second()
}

/// Tokens covered by `seconds` of active reading.
pub fn seconds_to_tokens(seconds: f64, params: &ReadingParams) -> Result<f64> {
    if !(seconds >= 0.0) || !seconds.is_finite() {
        return Err(Error::domain(format!("reading time {seconds} s must be >= 0")));
    }
    Ok(seconds * params.tokens_per_second())
}
