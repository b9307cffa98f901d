//! Execute an edit plan on a waveform by re-assembling it from pieces.
//!
//! The output is built left to right: retained stretches of the original,
//! donor segments for replacements and inserts, nothing for deletions. Every
//! junction between two pieces is blended with a raised-cosine crossfade of
//! `crossfade` seconds, which consumes that many samples per junction:
//!
//! ```text
//! duration(out) = Σ piece lengths − (#pieces − 1) · crossfade
//! ```
//!
//! Samples farther than one crossfade from any junction are bit-exact copies
//! of their source.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::align::EditOp;
use crate::audio::{extract_segment, read_wav_file, Waveform};
use crate::error::{Error, Result};
use crate::plan::{validate_plan, EditPlan};

/// One candidate recording of a token.
#[derive(Debug, Clone, PartialEq)]
pub struct DonorSegment {
    /// Utterance the audio was cut from.
    pub utterance: String,
    pub samples: Vec<f32>,
}

/// Donor audio for splicing, keyed by token (word or phone label), all at one
/// sample rate.
#[derive(Debug, Clone, Default)]
pub struct DonorLibrary {
    sample_rate: u32,
    segments: BTreeMap<String, Vec<DonorSegment>>,
}

impl DonorLibrary {
    pub fn new(sample_rate: u32) -> DonorLibrary {
        DonorLibrary { sample_rate, segments: BTreeMap::new() }
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.segments.keys().map(String::as_str)
    }

    /// Register a candidate recording under `token`. Empty audio is rejected.
    pub fn add(&mut self, token: &str, segment: DonorSegment) -> Result<()> {
        if token.is_empty() {
            return Err(Error::Manifest("empty donor token".to_string()));
        }
        if segment.samples.is_empty() {
            return Err(Error::Manifest(format!("empty donor segment for '{token}'")));
        }
        self.segments.entry(token.to_string()).or_default().push(segment);
        Ok(())
    }

    pub fn candidates(&self, token: &str) -> Option<&[DonorSegment]> {
        self.segments.get(token).map(Vec::as_slice)
    }
}

/// One manifest row: where to cut a donor segment from.
#[derive(Debug, Deserialize)]
struct DonorEntry {
    utterance: String,
    wav: String,
    span: [f64; 2],
}

/// Load a donor library from a manifest mapping token → segment locations.
/// WAV paths are resolved relative to the manifest file.
pub fn load_donor_manifest(path: impl AsRef<Path>) -> Result<DonorLibrary> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let entries: BTreeMap<String, Vec<DonorEntry>> =
        serde_json::from_str(&text).map_err(|e| Error::Manifest(e.to_string()))?;
    let base = path.parent().unwrap_or(Path::new(""));

    let mut lib: Option<DonorLibrary> = None;
    let mut wav_cache: BTreeMap<String, Waveform> = BTreeMap::new();
    for (token, rows) in entries {
        for row in rows {
            let wav = match wav_cache.get(&row.wav) {
                Some(w) => w,
                None => {
                    let loaded = read_wav_file(base.join(&row.wav))?;
                    wav_cache.entry(row.wav.clone()).or_insert(loaded)
                }
            };
            let lib = lib.get_or_insert_with(|| DonorLibrary::new(wav.sample_rate));
            if wav.sample_rate != lib.sample_rate {
                return Err(Error::SampleRateMismatch {
                    expected: lib.sample_rate,
                    actual: wav.sample_rate,
                });
            }
            let cut = extract_segment(wav, row.span)?;
            lib.add(&token, DonorSegment { utterance: row.utterance, samples: cut.samples })?;
        }
    }
    Ok(lib.unwrap_or_default())
}

/// Splice parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SpliceConfig {
    /// Crossfade length in seconds at every junction.
    pub crossfade: f64,
}

impl Default for SpliceConfig {
    fn default() -> Self {
        SpliceConfig { crossfade: 0.010 }
    }
}

impl SpliceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.crossfade.is_finite() && self.crossfade >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "crossfade must be non-negative, got {}",
                self.crossfade
            )));
        }
        Ok(())
    }

    pub fn crossfade_samples(&self, sample_rate: u32) -> usize {
        (self.crossfade * sample_rate as f64).round() as usize
    }
}

/// An assembled waveform plus where each input piece begins in it.
#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    pub samples: Vec<f32>,
    /// Output sample index where each piece's content starts. Empty pieces
    /// get the length of the audio assembled so far.
    pub piece_starts: Vec<usize>,
}

/// Concatenate pieces with a raised-cosine crossfade at every junction.
///
/// Each junction overlaps the tail of the output with the head of the next
/// piece over `crossfade_samples` samples, so when at least two non-empty
/// pieces meet, every non-empty piece must be at least twice the crossfade
/// long. Empty pieces are dropped without forming a junction.
pub fn assemble(pieces: &[Vec<f32>], crossfade_samples: usize) -> Result<Assembly> {
    let c = crossfade_samples;
    let live: Vec<&Vec<f32>> = pieces.iter().filter(|p| !p.is_empty()).collect();
    if live.len() >= 2 && c > 0 {
        if let Some(short) = live.iter().find(|p| p.len() < 2 * c) {
            return Err(Error::CrossfadeTooLong(format!(
                "a {}-sample piece cannot host two {c}-sample crossfades",
                short.len()
            )));
        }
    }

    // w rises from ~0 to ~1; w(k) + w(c-1-k) = 1, so junctions preserve level.
    let w: Vec<f64> = (0..c)
        .map(|k| 0.5 * (1.0 - (std::f64::consts::PI * (k as f64 + 0.5) / c as f64).cos()))
        .collect();

    let mut out: Vec<f32> = Vec::new();
    let mut starts = Vec::with_capacity(pieces.len());
    for p in pieces {
        if p.is_empty() {
            starts.push(out.len());
            continue;
        }
        if out.is_empty() {
            starts.push(0);
            out.extend_from_slice(p);
            continue;
        }
        let base = out.len() - c;
        starts.push(base);
        for k in 0..c {
            let a = out[base + k] as f64;
            let b = p[k] as f64;
            out[base + k] = (a * (1.0 - w[k]) + b * w[k]) as f32;
        }
        out.extend_from_slice(&p[c..]);
    }
    Ok(Assembly { samples: out, piece_starts: starts })
}

/// Deterministically pick one of a token's donor segments: seeded uniform
/// choice over the candidate list.
pub fn pick_donor<'a>(
    donors: &'a DonorLibrary,
    token: &str,
    seed: u64,
) -> Result<&'a DonorSegment> {
    let list = donors
        .candidates(token)
        .filter(|l| !l.is_empty())
        .ok_or_else(|| Error::MissingDonor(token.to_string()))?;
    let idx = ChaCha8Rng::seed_from_u64(seed).gen_range(0..list.len());
    Ok(&list[idx])
}

/// What each stretch of the output is made from.
enum PieceSpec {
    /// Original samples `[a, b)`.
    Keep(usize, usize),
    /// A donor segment for this token.
    Donor(String),
}

/// Execute an edit plan: retain unchanged spans, drop deleted spans, and fill
/// replacements/inserts with donor audio picked deterministically from `seed`.
pub fn apply_plan(
    orig: &Waveform,
    plan: &EditPlan,
    donors: &DonorLibrary,
    cfg: &SpliceConfig,
    seed: u64,
) -> Result<Waveform> {
    validate_plan(plan)?;
    cfg.validate()?;

    // Walk the plan's tiling in time order; zero-width inserts sort between
    // the spans they separate.
    let mut tiles: Vec<([f64; 2], Option<&crate::plan::EditRegion>)> = plan
        .regions
        .iter()
        .map(|r| {
            let span = r.orig_span.unwrap_or_else(|| {
                let a = r.anchor.expect("insert regions carry an anchor");
                [a, a]
            });
            (span, Some(r))
        })
        .chain(plan.unchanged_spans.iter().map(|s| (*s, None)))
        .collect();
    tiles.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]).then(a.0[1].total_cmp(&b.0[1])));

    let mut specs: Vec<PieceSpec> = Vec::new();
    let push_keep = |specs: &mut Vec<PieceSpec>, a: usize, b: usize| {
        if let Some(PieceSpec::Keep(_, prev_end)) = specs.last_mut() {
            if *prev_end == a {
                *prev_end = b;
                return;
            }
        }
        specs.push(PieceSpec::Keep(a, b));
    };
    for (span, region) in tiles {
        match region {
            None => {
                let a = orig.index_at(span[0]);
                let b = orig.index_at(span[1]);
                if b > orig.samples.len() || a > b {
                    return Err(Error::SpanOutOfRange(format!(
                        "unchanged span [{}, {}] outside the waveform",
                        span[0], span[1]
                    )));
                }
                push_keep(&mut specs, a, b);
            }
            Some(r) => {
                if r.op != EditOp::Insert {
                    // Deleted or replaced original audio must actually exist.
                    if orig.index_at(span[1]) > orig.samples.len() {
                        return Err(Error::SpanOutOfRange(format!(
                            "region span [{}, {}] outside the waveform",
                            span[0], span[1]
                        )));
                    }
                }
                for token in &r.target_tokens {
                    specs.push(PieceSpec::Donor(token.clone()));
                }
            }
        }
    }
    // Audio past the plan's coverage (e.g. trailing room after the last word)
    // is retained.
    let covered = plan
        .regions
        .iter()
        .map(|r| r.orig_span.map(|s| s[1]).or(r.anchor).unwrap_or(0.0))
        .chain(plan.unchanged_spans.iter().map(|s| s[1]))
        .fold(0.0, f64::max);
    let covered_idx = orig.index_at(covered).min(orig.samples.len());
    if covered_idx < orig.samples.len() {
        push_keep(&mut specs, covered_idx, orig.samples.len());
    }

    let needs_donors = specs.iter().any(|s| matches!(s, PieceSpec::Donor(_)));
    if needs_donors && !donors.is_empty() && donors.sample_rate() != orig.sample_rate {
        return Err(Error::SampleRateMismatch {
            expected: orig.sample_rate,
            actual: donors.sample_rate(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pieces: Vec<Vec<f32>> = Vec::with_capacity(specs.len());
    for spec in &specs {
        match spec {
            PieceSpec::Keep(a, b) => pieces.push(orig.samples[*a..*b].to_vec()),
            PieceSpec::Donor(token) => {
                let pick_seed = rng.gen::<u64>();
                let seg = pick_donor(donors, token, pick_seed)?;
                pieces.push(seg.samples.clone());
            }
        }
    }

    let assembly = assemble(&pieces, cfg.crossfade_samples(orig.sample_rate))?;
    Ok(Waveform::new(assembly.samples, orig.sample_rate))
}
