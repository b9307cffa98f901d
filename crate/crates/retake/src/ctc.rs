//! CTC logit matrices and greedy decoding.
//!
//! The on-disk format is a one-line ASCII header followed by raw scores:
//!
//! ```text
//! CTCLOGITS v1 frames=<T> vocab=<V> frame_rate_us=<int>\n
//! ```
//!
//! then `T × (V+1)` little-endian f32 values, row-major, one row per frame,
//! with the blank class in the last column. The phone labels for columns
//! `0..V` live in a separate vocab file, one label per line.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::lexicon::Phone;
use crate::timeline::{round_us, TimedUnit};

/// Per-frame class scores plus the vocabulary and frame rate to interpret them.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitMatrix {
    /// Row-major `frames × (vocab.len() + 1)` scores; blank is the last column.
    scores: Vec<f32>,
    frames: usize,
    vocab: Vec<String>,
    /// Seconds per frame.
    frame_rate: f64,
}

impl LogitMatrix {
    /// Build a matrix, validating shape, labels, and score finiteness.
    pub fn new(scores: Vec<f32>, frames: usize, vocab: Vec<String>, frame_rate: f64) -> Result<Self> {
        if !(frame_rate.is_finite() && frame_rate > 0.0) {
            return Err(Error::InvalidConfig(format!("frame rate must be positive, got {frame_rate}")));
        }
        let width = vocab.len() + 1;
        if scores.len() != frames * width {
            return Err(Error::SizeMismatch {
                expected: (frames * width * 4) as u64,
                actual: (scores.len() * 4) as u64,
            });
        }
        for (i, label) in vocab.iter().enumerate() {
            Phone::parse(label).map_err(|_| Error::UnknownPhone(label.clone()))?;
            if vocab[..i].contains(label) {
                return Err(Error::BadHeader(format!("duplicate vocab label '{label}'")));
            }
        }
        if let Some(pos) = scores.iter().position(|s| s.is_nan()) {
            return Err(Error::NonFiniteScore { frame: pos / width, class: pos % width });
        }
        Ok(LogitMatrix { scores, frames, vocab, frame_rate })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    /// Index of the blank class (always the last column).
    pub fn blank(&self) -> usize {
        self.vocab.len()
    }

    /// Scores for one frame, `vocab.len() + 1` wide.
    pub fn row(&self, frame: usize) -> &[f32] {
        let w = self.vocab.len() + 1;
        &self.scores[frame * w..(frame + 1) * w]
    }

    pub fn raw_scores(&self) -> &[f32] {
        &self.scores
    }
}

/// A decoded phone with the frame run that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedPhone {
    pub phone: TimedUnit,
    pub first_frame: usize,
    pub last_frame: usize,
}

/// Greedy CTC decoding: per-frame argmax, collapse repeats, drop blanks.
///
/// Ties go to the lowest class index; since blank sits in the last column, a
/// phone always beats blank on a tie. A run's span is
/// `[first_frame * rate, (last_frame + 1) * rate]`; a blank between two equal
/// labels splits them into two phones.
pub fn greedy_decode(m: &LogitMatrix) -> Vec<DecodedPhone> {
    let blank = m.blank();
    let mut out: Vec<DecodedPhone> = Vec::new();
    let mut prev: Option<usize> = None; // argmax of the previous frame
    for t in 0..m.frames() {
        let row = m.row(t);
        let mut best = 0usize;
        for (c, &s) in row.iter().enumerate() {
            if s > row[best] {
                best = c;
            }
        }
        if best != blank {
            if prev == Some(best) {
                out.last_mut().expect("run in progress").last_frame = t;
            } else {
                out.push(DecodedPhone {
                    phone: TimedUnit::new(m.vocab()[best].clone(), 0.0, 0.0),
                    first_frame: t,
                    last_frame: t,
                });
            }
        }
        prev = Some(best);
    }
    for d in &mut out {
        d.phone.start = round_us(d.first_frame as f64 * m.frame_rate());
        d.phone.end = round_us((d.last_frame + 1) as f64 * m.frame_rate());
    }
    out
}

/// Write the binary logit format (header line + little-endian f32 payload).
pub fn emit_logits(m: &LogitMatrix, mut w: impl Write) -> Result<()> {
    let header = format!(
        "CTCLOGITS v1 frames={} vocab={} frame_rate_us={}\n",
        m.frames(),
        m.vocab().len(),
        (m.frame_rate() * 1e6).round() as u64
    );
    w.write_all(header.as_bytes())?;
    for s in m.raw_scores() {
        w.write_all(&s.to_le_bytes())?;
    }
    Ok(())
}

/// The vocab file format: one phone label per line.
pub fn emit_vocab(m: &LogitMatrix) -> String {
    let mut s = m.vocab().join("\n");
    s.push('\n');
    s
}

/// Parse the binary logit format plus its vocab file.
///
/// The payload must be exactly `frames × (vocab+1) × 4` bytes; scores round-trip
/// bit-exactly through [`emit_logits`].
pub fn parse_logits(mut logits: impl Read, vocab_text: &str) -> Result<LogitMatrix> {
    let mut bytes = Vec::new();
    logits.read_to_end(&mut bytes)?;
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::BadHeader("missing header line".to_string()))?;
    let header = std::str::from_utf8(&bytes[..nl])
        .map_err(|_| Error::BadHeader("header is not ASCII".to_string()))?;

    let fields: Vec<&str> = header.split(' ').collect();
    if fields.len() != 5 || fields[0] != "CTCLOGITS" || fields[1] != "v1" {
        return Err(Error::BadHeader(format!("unrecognized header '{header}'")));
    }
    let take = |field: &str, key: &str| -> Result<u64> {
        field
            .strip_prefix(&format!("{key}="))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::BadHeader(format!("expected {key}=<int>, got '{field}'")))
    };
    let frames = take(fields[2], "frames")? as usize;
    let vocab_size = take(fields[3], "vocab")? as usize;
    let frame_rate_us = take(fields[4], "frame_rate_us")?;
    if frame_rate_us == 0 {
        return Err(Error::BadHeader("frame_rate_us must be positive".to_string()));
    }

    let vocab: Vec<String> = vocab_text.lines().map(str::to_string).collect();
    if vocab.len() != vocab_size {
        return Err(Error::BadHeader(format!(
            "vocab file has {} labels but the header says vocab={vocab_size}",
            vocab.len()
        )));
    }

    let payload = &bytes[nl + 1..];
    let expected = (frames * (vocab_size + 1) * 4) as u64;
    if payload.len() as u64 != expected {
        return Err(Error::SizeMismatch { expected, actual: payload.len() as u64 });
    }
    let scores = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    LogitMatrix::new(scores, frames, vocab, frame_rate_us as f64 / 1e6)
}
