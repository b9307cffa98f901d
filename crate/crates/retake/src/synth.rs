//! Deterministic synthetic speech: a small vocabulary of distinguishable
//! tone-complex "words" with exact ground-truth transcripts.
//!
//! Every word's audio is a pure function of its label, so two renditions of
//! the same word are bit-identical anywhere in a corpus — which makes spliced
//! corrections exactly measurable. Utterances follow a fixed layout: a short
//! lead-in, words separated by uniform pauses, and a matching tail.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audio::Waveform;
use crate::error::{Error, Result};
use crate::lexicon::{PronunciationDict, WordToken};
use crate::perturb::fnv1a;
use crate::timeline::{Source, TimedUnit, TimedWord, Transcript};

/// The words the generator can speak. All of them are in the bundled
/// dictionary, with distinct fundamentals from 220 to 770 Hz.
pub const VOCABULARY: [&str; 12] = [
    "we", "are", "not", "happy", "red", "blue", "green", "stop", "go", "one", "two", "three",
];

/// Word length in seconds.
pub const WORD_SECONDS: f64 = 0.080;
/// Pause between words.
pub const GAP_SECONDS: f64 = 0.045;
/// Lead-in and tail silence.
pub const EDGE_SECONDS: f64 = 0.0225;
const RAMP_SECONDS: f64 = 0.010;

/// One generated utterance with its ground truth.
#[derive(Debug, Clone)]
pub struct SynthUtterance {
    pub utterance_id: String,
    pub text: String,
    pub audio: Waveform,
    pub transcript: Transcript,
}

fn fundamental(word: &str) -> Option<f64> {
    VOCABULARY.iter().position(|w| *w == word).map(|i| 220.0 + 50.0 * i as f64)
}

/// Synthesize one word: two partials over word-seeded noise, edge-ramped.
/// Identical label and sample rate always give identical samples.
pub fn word_audio(word: &str, sample_rate: u32) -> Result<Vec<f32>> {
    let f = fundamental(word).ok_or_else(|| {
        Error::InvalidConfig(format!("'{word}' is not in the synthetic vocabulary"))
    })?;
    let n = (WORD_SECONDS * sample_rate as f64).round() as usize;
    let ramp = (RAMP_SECONDS * sample_rate as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(word.as_bytes()));
    let two_pi = 2.0 * std::f64::consts::PI;
    Ok((0..n)
        .map(|i| {
            let t = i as f64 / sample_rate as f64;
            let noise: f64 = rng.gen::<f64>() * 2.0 - 1.0;
            let s = 0.5 * (two_pi * f * t).sin() + 0.15 * (two_pi * 2.1 * f * t).sin() + 0.1 * noise;
            let env = 1.0f64.min((i + 1) as f64 / ramp as f64).min((n - i) as f64 / ramp as f64);
            (s * env) as f32
        })
        .collect())
}

/// Generate one utterance saying `words`, with its exact transcript. Phone
/// boundaries divide each word span evenly among its dictionary phones.
pub fn utterance(
    utterance_id: &str,
    words: &[&str],
    dict: &PronunciationDict,
    sample_rate: u32,
) -> Result<SynthUtterance> {
    if words.is_empty() {
        return Err(Error::EmptyUtterance);
    }
    let rate = sample_rate as f64;
    let edge = (EDGE_SECONDS * rate).round() as usize;
    let gap = (GAP_SECONDS * rate).round() as usize;

    let mut samples: Vec<f32> = vec![0.0; edge];
    let mut timed: Vec<TimedWord> = Vec::new();
    for (k, word) in words.iter().enumerate() {
        if k > 0 {
            samples.extend(std::iter::repeat(0.0).take(gap));
        }
        let start_sample = samples.len();
        samples.extend(word_audio(word, sample_rate)?);
        let end_sample = samples.len();

        let (ws, we) = (start_sample as f64 / rate, end_sample as f64 / rate);
        let token = WordToken::new(word)?;
        let pron = dict.lookup(&token)?;
        let n_p = pron.len() as f64;
        let phones: Vec<TimedUnit> = pron
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let a = ws + (we - ws) * j as f64 / n_p;
                let b = ws + (we - ws) * (j + 1) as f64 / n_p;
                TimedUnit::new(p.to_string(), a, b)
            })
            .collect();
        timed.push(TimedWord::new(TimedUnit::new(*word, ws, we), phones));
    }
    samples.extend(std::iter::repeat(0.0).take(edge));

    let flat: Vec<TimedUnit> = timed.iter().flat_map(|w| w.phones.iter().cloned()).collect();
    let mut transcript = Transcript {
        utterance_id: utterance_id.to_string(),
        source: Source::Forced,
        frame_rate: None,
        words: Some(timed),
        phones: Some(flat),
    };
    // Snap to the transcript format's microsecond grid so writing the corpus
    // out and reading it back is lossless.
    transcript.canonicalize();
    transcript.validate()?;
    Ok(SynthUtterance {
        utterance_id: utterance_id.to_string(),
        text: words.join(" "),
        audio: Waveform::new(samples, sample_rate),
        transcript,
    })
}

/// Generate a whole corpus: `count` utterances of `words_each` uniformly
/// drawn vocabulary words. Word choices derive from `seed` and the utterance
/// id, so any utterance can be regenerated independently.
pub fn corpus(
    seed: u64,
    count: usize,
    words_each: usize,
    dict: &PronunciationDict,
    sample_rate: u32,
) -> Result<Vec<SynthUtterance>> {
    (0..count)
        .map(|u| {
            let id = format!("synth-{u:04}");
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(id.as_bytes()));
            let words: Vec<&str> =
                (0..words_each).map(|_| VOCABULARY[rng.gen_range(0..VOCABULARY.len())]).collect();
            utterance(&id, &words, dict, sample_rate)
        })
        .collect()
}
