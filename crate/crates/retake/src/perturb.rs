//! Corpus perturbation: damage clean recordings by inserting, replacing, and
//! deleting word-level segments, while emitting the ground truth — an oracle
//! transcript of what the damaged audio actually contains, plus a record of
//! the operations applied.
//!
//! Each spoken word gets one categorical draw (insert-after / replace /
//! delete / none), so no word is edited twice. Inserted words land at the
//! midpoint of the pause after their word. All randomness comes from one
//! ChaCha8 stream seeded per utterance, making corpora reproducible
//! byte-for-byte.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::align::EditOp;
use crate::audio::Waveform;
use crate::error::{Error, Result};
use crate::splice::{assemble, SpliceConfig};
use crate::timeline::{round_us, Source, TimedUnit, TimedWord, Transcript};

/// 64-bit FNV-1a. Used to derive per-utterance seeds from utterance ids; kept
/// local so corpora remain reproducible regardless of dependency churn.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// The seed governing one utterance's draws.
pub fn utterance_seed(base_seed: u64, utterance_id: &str) -> u64 {
    base_seed ^ fnv1a(utterance_id.as_bytes())
}

/// Perturbation probabilities and the corpus-level seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbConfig {
    pub p_insert: f64,
    pub p_replace: f64,
    pub p_delete: f64,
    pub seed: u64,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        PerturbConfig { p_insert: 0.05, p_replace: 0.05, p_delete: 0.05, seed: 0 }
    }
}

impl PerturbConfig {
    pub fn validate(&self) -> Result<()> {
        let ps = [self.p_insert, self.p_replace, self.p_delete];
        if ps.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidConfig("probabilities must be non-negative".to_string()));
        }
        if ps.iter().sum::<f64>() > 1.0 {
            return Err(Error::InvalidConfig("probabilities must sum to at most 1".to_string()));
        }
        Ok(())
    }
}

/// A word's audio cut out of some utterance, with its phone tier shifted to
/// start at zero, ready to be spliced into another recording.
#[derive(Debug, Clone, PartialEq)]
pub struct WordDonor {
    pub word: String,
    pub source_utterance: String,
    pub sample_rate: u32,
    pub samples: Vec<f32>,
    /// Phone tier relative to the segment start.
    pub phones: Vec<TimedUnit>,
}

impl WordDonor {
    /// Cut a word out of its utterance.
    pub fn cut(utterance_id: &str, wav: &Waveform, word: &TimedWord) -> Result<WordDonor> {
        let seg = crate::audio::extract_segment(wav, [word.word.start, word.word.end])?;
        if seg.samples.is_empty() {
            return Err(Error::EmptyUtterance);
        }
        let phones = word
            .phones
            .iter()
            .map(|p| TimedUnit::new(&p.label, p.start - word.word.start, p.end - word.word.start))
            .collect();
        Ok(WordDonor {
            word: word.word.label.clone(),
            source_utterance: utterance_id.to_string(),
            sample_rate: wav.sample_rate,
            samples: seg.samples,
            phones,
        })
    }

    /// Annotated duration: the phone tier's extent, or the audio length.
    pub fn duration(&self) -> f64 {
        self.phones
            .last()
            .map(|p| p.end)
            .unwrap_or(self.samples.len() as f64 / self.sample_rate as f64)
    }
}

/// One applied perturbation, in terms of the original word indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbOp {
    /// insert = a word added after `word_index`; replace = its audio swapped;
    /// delete = its audio removed.
    pub kind: EditOp,
    pub word_index: usize,
    pub donor_word: Option<String>,
    pub donor_source: Option<String>,
    /// Where the donor audio sits in the perturbed waveform; null for delete.
    pub resulting_span: Option<[f64; 2]>,
}

/// Ground-truth record of everything done to one utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationRecord {
    pub utterance_id: String,
    pub ops: Vec<PerturbOp>,
}

impl PerturbationRecord {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvariantViolation(msg));
        for w in self.ops.windows(2) {
            if w[1].word_index <= w[0].word_index {
                return fail("record ops must be strictly ordered by word index".to_string());
            }
        }
        for op in &self.ops {
            match op.kind {
                EditOp::Unchange => return fail("records never contain unchange ops".to_string()),
                EditOp::Delete => {
                    if op.donor_word.is_some() || op.resulting_span.is_some() {
                        return fail("delete ops carry no donor or span".to_string());
                    }
                }
                EditOp::Insert | EditOp::Replace => {
                    if op.donor_word.is_none() || op.resulting_span.is_none() {
                        return fail("insert/replace ops carry a donor and a span".to_string());
                    }
                }
            }
        }
        Ok(())
    }
}

/// Parse and validate a perturbation record JSON document.
pub fn parse_record(json: &str) -> Result<PerturbationRecord> {
    let record: PerturbationRecord =
        serde_json::from_str(json).map_err(|e| Error::SchemaError(e.to_string()))?;
    record.validate()?;
    Ok(record)
}

/// Serialize a perturbation record.
pub fn emit_record(record: &PerturbationRecord) -> String {
    let mut s = serde_json::to_string_pretty(record).expect("records always serialize");
    s.push('\n');
    s
}

/// What one output piece is made of, enough to place transcript units later.
enum Piece {
    /// Original samples `[a, b)`, possibly grown by merging adjacent keeps.
    Orig(usize, usize),
    /// A donor's audio.
    Donor(usize),
}

/// A word destined for the oracle transcript, before output times are known.
enum OracleWord {
    /// Original word `i`, content at `offset` samples into piece `piece`.
    Kept { piece: usize, offset: usize, index: usize },
    /// Donor word starting at the head of piece `piece`.
    Donated { piece: usize, donor: usize },
}

/// Perturb one utterance.
///
/// `words` is the utterance's spoken word tier (with phones); donors should
/// come from the same speaker — segments whose `source_utterance` equals
/// `utterance_id` are never picked. Returns the perturbed audio, the op
/// record, and an oracle transcript giving the true content and timestamps
/// of the perturbed audio.
pub fn perturb_utterance(
    utterance_id: &str,
    orig: &Waveform,
    words: &[TimedWord],
    donors: &[WordDonor],
    cfg: &PerturbConfig,
    splice: &SpliceConfig,
) -> Result<(Waveform, PerturbationRecord, Transcript)> {
    cfg.validate()?;
    splice.validate()?;
    if words.is_empty() {
        return Err(Error::EmptyUtterance);
    }
    let rate = orig.sample_rate;
    let eligible: Vec<&WordDonor> =
        donors.iter().filter(|d| d.source_utterance != utterance_id).collect();
    for d in &eligible {
        if d.sample_rate != rate {
            return Err(Error::SampleRateMismatch { expected: rate, actual: d.sample_rate });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(utterance_seed(cfg.seed, utterance_id));
    let pick = |rng: &mut ChaCha8Rng| -> Result<&WordDonor> {
        if eligible.is_empty() {
            return Err(Error::MissingDonor("word segment from another utterance".to_string()));
        }
        Ok(eligible[rng.gen_range(0..eligible.len())])
    };

    // Assemble pieces along the original timeline, merging adjacent original
    // stretches so untouched audio forms a single piece (and a fully
    // untouched utterance comes back bit-identical).
    let at = |t: f64| (t * rate as f64).round() as usize;
    let n_samples = orig.samples.len();
    let mut pieces: Vec<Piece> = Vec::new();
    let keep = |pieces: &mut Vec<Piece>, a: usize, b: usize| -> usize {
        if let Some(Piece::Orig(_, end)) = pieces.last_mut() {
            if *end == a {
                *end = b;
                return pieces.len() - 1;
            }
        }
        pieces.push(Piece::Orig(a, b));
        pieces.len() - 1
    };

    let mut picked_donors: Vec<&WordDonor> = Vec::new();
    let mut oracle_words: Vec<OracleWord> = Vec::new();
    let mut ops: Vec<PerturbOp> = Vec::new();
    // (op index, donor piece) pairs, for filling in spans once assembled
    let mut pending_spans: Vec<(usize, usize)> = Vec::new();

    let mut cursor = 0usize;
    for (i, w) in words.iter().enumerate() {
        let (ws, we) = (at(w.word.start), at(w.word.end));
        if ws < cursor || we > n_samples {
            return Err(Error::SpanOutOfRange(format!(
                "word '{}' [{}, {}] outside the waveform or out of order",
                w.word.label, w.word.start, w.word.end
            )));
        }
        // pause before the word
        keep(&mut pieces, cursor, ws);

        let draw: f64 = rng.gen();
        let choice = if draw < cfg.p_insert {
            EditOp::Insert
        } else if draw < cfg.p_insert + cfg.p_replace {
            EditOp::Replace
        } else if draw < cfg.p_insert + cfg.p_replace + cfg.p_delete {
            EditOp::Delete
        } else {
            EditOp::Unchange
        };

        match choice {
            EditOp::Unchange | EditOp::Insert => {
                let piece = keep(&mut pieces, ws, we);
                let offset = match pieces[piece] {
                    Piece::Orig(a, _) => ws - a,
                    Piece::Donor(_) => unreachable!("keep() always yields an original piece"),
                };
                oracle_words.push(OracleWord::Kept { piece, offset, index: i });
            }
            EditOp::Replace => {
                let donor = pick(&mut rng)?;
                picked_donors.push(donor);
                pieces.push(Piece::Donor(picked_donors.len() - 1));
                let piece = pieces.len() - 1;
                oracle_words.push(OracleWord::Donated { piece, donor: picked_donors.len() - 1 });
                pending_spans.push((ops.len(), piece));
                ops.push(PerturbOp {
                    kind: EditOp::Replace,
                    word_index: i,
                    donor_word: Some(donor.word.clone()),
                    donor_source: Some(donor.source_utterance.clone()),
                    resulting_span: None,
                });
            }
            EditOp::Delete => {
                ops.push(PerturbOp {
                    kind: EditOp::Delete,
                    word_index: i,
                    donor_word: None,
                    donor_source: None,
                    resulting_span: None,
                });
            }
        }

        // the pause after the word, split in half when a word is inserted
        let gap_end = if i + 1 < words.len() { at(words[i + 1].word.start) } else { n_samples };
        if choice == EditOp::Insert {
            let mid = cursor.max(we) + (gap_end - we.min(gap_end)) / 2;
            let mid = mid.min(gap_end).max(we);
            keep(&mut pieces, we, mid);
            let donor = pick(&mut rng)?;
            picked_donors.push(donor);
            pieces.push(Piece::Donor(picked_donors.len() - 1));
            let piece = pieces.len() - 1;
            oracle_words.push(OracleWord::Donated { piece, donor: picked_donors.len() - 1 });
            pending_spans.push((ops.len(), piece));
            ops.push(PerturbOp {
                kind: EditOp::Insert,
                word_index: i,
                donor_word: Some(donor.word.clone()),
                donor_source: Some(donor.source_utterance.clone()),
                resulting_span: None,
            });
            keep(&mut pieces, mid, gap_end);
        } else {
            keep(&mut pieces, we, gap_end);
        }
        cursor = gap_end;
    }

    let buffers: Vec<Vec<f32>> = pieces
        .iter()
        .map(|p| match p {
            Piece::Orig(a, b) => orig.samples[*a..*b].to_vec(),
            Piece::Donor(d) => picked_donors[*d].samples.clone(),
        })
        .collect();
    let assembly = assemble(&buffers, splice.crossfade_samples(rate))?;

    // Output positions -> oracle transcript units.
    let mut out_words: Vec<TimedWord> = Vec::new();
    for ow in &oracle_words {
        match *ow {
            OracleWord::Kept { piece, offset, index } => {
                let w = &words[index];
                let out_sample = assembly.piece_starts[piece] + offset;
                // rigid shift: untouched words keep their exact durations
                let shift = out_sample as f64 / rate as f64 - w.word.start
                    + (w.word.start - (at(w.word.start) as f64 / rate as f64));
                let mv = |u: &TimedUnit| TimedUnit::new(&u.label, u.start + shift, u.end + shift);
                out_words.push(TimedWord::new(mv(&w.word), w.phones.iter().map(mv).collect()));
            }
            OracleWord::Donated { piece, donor } => {
                let d = picked_donors[donor];
                let t0 = assembly.piece_starts[piece] as f64 / rate as f64;
                let word = TimedUnit::new(&d.word, t0, t0 + d.duration());
                let phones = d
                    .phones
                    .iter()
                    .map(|p| TimedUnit::new(&p.label, t0 + p.start, t0 + p.end))
                    .collect();
                out_words.push(TimedWord::new(word, phones));
            }
        }
    }
    clamp_overlaps(&mut out_words);

    // Resolve recorded spans now that output positions are known.
    let donor_span = |piece: usize| -> [f64; 2] {
        let t0 = assembly.piece_starts[piece] as f64 / rate as f64;
        let len = buffers[piece].len() as f64 / rate as f64;
        [round_us(t0), round_us(t0 + len)]
    };
    for (op_idx, piece) in pending_spans {
        ops[op_idx].resulting_span = Some(donor_span(piece));
    }

    let flat: Vec<TimedUnit> = out_words.iter().flat_map(|w| w.phones.iter().cloned()).collect();
    let oracle = Transcript {
        utterance_id: utterance_id.to_string(),
        source: Source::Oracle,
        frame_rate: None,
        words: Some(out_words),
        phones: Some(flat),
    };
    oracle.validate()?;

    let record = PerturbationRecord { utterance_id: utterance_id.to_string(), ops };
    record.validate()?;
    Ok((Waveform::new(assembly.samples, rate), record, oracle))
}

/// Crossfades overlap neighboring pieces by the fade length, so consecutive
/// words can nominally overlap when nothing separates them; clamp both sides
/// to the overlap midpoint, phones included.
fn clamp_overlaps(words: &mut [TimedWord]) {
    for i in 1..words.len() {
        let prev_end = words[i - 1].word.end;
        let next_start = words[i].word.start;
        if next_start >= prev_end {
            continue;
        }
        let mid = round_us((prev_end + next_start) / 2.0);
        let a = &mut words[i - 1];
        a.word.end = a.word.end.min(mid);
        a.word.start = a.word.start.min(mid);
        for p in &mut a.phones {
            p.start = p.start.min(mid);
            p.end = p.end.min(mid);
        }
        let b = &mut words[i];
        b.word.start = b.word.start.max(mid);
        b.word.end = b.word.end.max(mid);
        for p in &mut b.phones {
            p.start = p.start.max(mid);
            p.end = p.end.max(mid);
        }
    }
}
