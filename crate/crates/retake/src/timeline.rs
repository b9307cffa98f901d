//! Timed transcripts: the unit of exchange between recognizers and planners.
//!
//! A transcript carries a word tier, a flat phone tier, or both. Times are
//! seconds, kept at microsecond precision; all equality checks happen after
//! rounding to 1 µs. The reserved label `"sil"` marks silence; it may appear
//! between words but is excluded from alignment inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::Phone;

/// Reserved label for silence/pause units.
pub const SILENCE: &str = "sil";

/// Round a time in seconds to microsecond precision.
pub fn round_us(t: f64) -> f64 {
    (t * 1e6).round() / 1e6
}

/// A labeled time span. Zero duration is legal (degenerate units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedUnit {
    pub label: String,
    pub start: f64,
    pub end: f64,
}

impl TimedUnit {
    /// Build a unit with times rounded to 1 µs.
    pub fn new(label: impl Into<String>, start: f64, end: f64) -> TimedUnit {
        TimedUnit { label: label.into(), start: round_us(start), end: round_us(end) }
    }

    pub fn duration(&self) -> f64 {
        round_us(self.end - self.start)
    }

    pub fn is_silence(&self) -> bool {
        self.label == SILENCE
    }
}

/// A word span together with its constituent phones (possibly none).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedWord {
    #[serde(flatten)]
    pub word: TimedUnit,
    #[serde(default)]
    pub phones: Vec<TimedUnit>,
}

impl TimedWord {
    pub fn new(word: TimedUnit, phones: Vec<TimedUnit>) -> TimedWord {
        TimedWord { word, phones }
    }
}

/// Where a transcript came from. CTC transcripts never carry a word tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Forced,
    Ctc,
    Oracle,
}

/// One utterance's timing annotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub utterance_id: String,
    pub source: Source,
    pub frame_rate: Option<f64>,
    pub words: Option<Vec<TimedWord>>,
    pub phones: Option<Vec<TimedUnit>>,
}

impl Transcript {
    /// Round every time to 1 µs; parsing does this before validation.
    pub fn canonicalize(&mut self) {
        let fix = |u: &mut TimedUnit| {
            u.start = round_us(u.start);
            u.end = round_us(u.end);
        };
        if let Some(words) = &mut self.words {
            for w in words {
                fix(&mut w.word);
                w.phones.iter_mut().for_each(fix);
            }
        }
        if let Some(phones) = &mut self.phones {
            phones.iter_mut().for_each(fix);
        }
    }

    /// Check every structural invariant; parsing rejects transcripts that fail.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvariantViolation(msg));
        if self.utterance_id.is_empty() {
            return fail("empty utterance_id".into());
        }
        if self.words.is_none() && self.phones.is_none() {
            return fail("neither words nor phones present".into());
        }
        if self.source == Source::Ctc && self.words.is_some() {
            return fail("ctc transcripts cannot carry a word tier".into());
        }
        if let Some(r) = self.frame_rate {
            if !(r.is_finite() && r > 0.0) {
                return fail(format!("frame_rate must be positive, got {r}"));
            }
        }
        if let Some(words) = &self.words {
            check_sequence(words.iter().map(|w| &w.word), "word")?;
            for w in words {
                if w.word.label.is_empty() {
                    return fail("empty word label".into());
                }
                check_sequence(w.phones.iter(), "word phone")?;
                for p in &w.phones {
                    check_phone_label(&p.label)?;
                }
                if let (Some(first), Some(last)) = (w.phones.first(), w.phones.last()) {
                    if w.word.start != first.start || w.word.end != last.end {
                        return fail(format!(
                            "word '{}' [{}, {}] does not span its phones [{}, {}]",
                            w.word.label, w.word.start, w.word.end, first.start, last.end
                        ));
                    }
                }
            }
        }
        if let Some(phones) = &self.phones {
            check_sequence(phones.iter(), "phone")?;
            for p in phones {
                check_phone_label(&p.label)?;
            }
        }
        // With both tiers present, word-level phones concatenate to the flat list.
        if let (Some(words), Some(phones)) = (&self.words, &self.phones) {
            let concat: Vec<&TimedUnit> = words.iter().flat_map(|w| w.phones.iter()).collect();
            if concat.len() != phones.len()
                || concat.iter().zip(phones).any(|(a, b)| **a != *b)
            {
                return fail("word-level phones do not concatenate to the phone list".into());
            }
        }
        Ok(())
    }

    /// The flat phone list, derived from word-level phones when absent.
    pub fn phone_sequence(&self) -> Result<Vec<TimedUnit>> {
        if let Some(phones) = &self.phones {
            return Ok(phones.clone());
        }
        if let Some(words) = &self.words {
            return Ok(words.iter().flat_map(|w| w.phones.iter().cloned()).collect());
        }
        Err(Error::NoPhones)
    }

    /// Phones that take part in alignment: the flat sequence minus silence.
    pub fn spoken_phones(&self) -> Result<Vec<TimedUnit>> {
        Ok(self.phone_sequence()?.into_iter().filter(|p| !p.is_silence()).collect())
    }

    /// Words that take part in alignment: the word tier minus silence.
    pub fn spoken_words(&self) -> Vec<&TimedWord> {
        self.words
            .as_deref()
            .unwrap_or(&[])
            .iter()
            .filter(|w| !w.word.is_silence())
            .collect()
    }

    /// End of the last unit on any tier (0 when the transcript is empty).
    pub fn span_end(&self) -> f64 {
        let words = self.words.as_deref().unwrap_or(&[]).iter().map(|w| w.word.end);
        let phones = self.phones.as_deref().unwrap_or(&[]).iter().map(|p| p.end);
        words.chain(phones).fold(0.0, f64::max)
    }
}

fn check_phone_label(label: &str) -> Result<()> {
    if label == SILENCE {
        return Ok(());
    }
    Phone::parse(label).map(|_| ()).map_err(|_| {
        Error::InvariantViolation(format!("'{label}' is neither a phone nor '{SILENCE}'"))
    })
}

fn check_sequence<'a>(units: impl Iterator<Item = &'a TimedUnit>, what: &str) -> Result<()> {
    let mut prev_end: Option<f64> = None;
    for u in units {
        if !(u.start.is_finite() && u.end.is_finite()) || u.start < 0.0 || u.end < u.start {
            return Err(Error::InvariantViolation(format!(
                "{what} '{}' has bad times [{}, {}]",
                u.label, u.start, u.end
            )));
        }
        if let Some(pe) = prev_end {
            if u.start < pe {
                return Err(Error::InvariantViolation(format!(
                    "{what} '{}' starts at {} before the previous unit ends at {}",
                    u.label, u.start, pe
                )));
            }
        }
        prev_end = Some(u.end);
    }
    Ok(())
}

/// Parse and validate a transcript JSON document.
pub fn parse_transcript(json: &str) -> Result<Transcript> {
    let mut t: Transcript =
        serde_json::from_str(json).map_err(|e| Error::SchemaError(e.to_string()))?;
    t.canonicalize();
    t.validate()?;
    Ok(t)
}

/// Serialize a transcript; `parse_transcript(emit_transcript(t))` gives `t` back.
pub fn emit_transcript(t: &Transcript) -> String {
    let mut s = serde_json::to_string_pretty(t).expect("transcripts always serialize");
    s.push('\n');
    s
}
