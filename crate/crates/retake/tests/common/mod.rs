//! Shared fixtures and independently written reference implementations for
//! the integration suites. Everything here deliberately avoids calling the
//! crate's own algorithms, so tests compare two separate derivations.
#![allow(dead_code)]

use std::path::Path;

use retake::audio::Waveform;
use retake::timeline::{Source, TimedUnit, TimedWord, Transcript};

/// Textbook full-matrix Levenshtein edit distance.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

fn fnv_update(hash: &mut u64, bytes: &[u8]) {
    for &b in bytes {
        *hash ^= b as u64;
        *hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<String>) {
    for entry in std::fs::read_dir(dir).expect("readable directory") {
        let path = entry.expect("directory entry").path();
        if path.is_dir() {
            collect_files(root, &path, out);
        } else {
            let rel = path.strip_prefix(root).expect("path under root");
            out.push(rel.to_string_lossy().into_owned());
        }
    }
}

/// Order-independent digest of a directory tree: relative paths plus bytes.
pub fn tree_hash(dir: &Path) -> u64 {
    let mut files = Vec::new();
    collect_files(dir, dir, &mut files);
    files.sort();
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for rel in files {
        fnv_update(&mut hash, rel.as_bytes());
        fnv_update(&mut hash, &std::fs::read(dir.join(&rel)).expect("readable file"));
    }
    hash
}

fn unit(label: &str, start: f64, end: f64) -> TimedUnit {
    TimedUnit::new(label, start, end)
}

fn word(label: &str, phones: &[(&str, f64, f64)]) -> TimedWord {
    let ps: Vec<TimedUnit> = phones.iter().map(|(l, s, e)| unit(l, *s, *e)).collect();
    let span = unit(label, ps.first().unwrap().start, ps.last().unwrap().end);
    TimedWord::new(span, ps)
}

/// The worked mispronunciation scenario: the speaker said "we are heavily"
/// (with "we" uttered W ER0) where the script wanted "we are not happy".
pub fn mispronounced_transcript() -> Transcript {
    let t = Transcript {
        utterance_id: "scenario".into(),
        source: Source::Forced,
        frame_rate: None,
        words: Some(vec![
            word("we", &[("W", 0.10, 0.22), ("ER0", 0.22, 0.35)]),
            word("are", &[("AA1", 0.40, 0.50), ("R", 0.50, 0.60)]),
            word(
                "heavily",
                &[
                    ("HH", 0.70, 0.80),
                    ("EH1", 0.80, 0.90),
                    ("V", 0.90, 1.00),
                    ("AH0", 1.00, 1.10),
                    ("L", 1.10, 1.20),
                    ("IY0", 1.20, 1.30),
                ],
            ),
        ]),
        phones: None,
    };
    t.validate().expect("fixture is well-formed");
    t
}

// --- Independent spectral-distortion reference -----------------------------
//
// Same formula as the library (Hann window, magnitude DFT, peak-1 triangular
// mel bank, ln with floor, orthonormal DCT-II dropping coefficient 0, DTW
// with diagonal-preferring backtrack), but written from scratch with naive
// O(n²) transforms and no shared code.

const REF_WINDOW: f64 = 0.025;
const REF_HOP: f64 = 0.010;
const REF_BANDS: usize = 80;
const REF_COEFFS: usize = 13;
const REF_FLOOR: f64 = 1e-10;

fn ref_cepstra(w: &Waveform) -> Vec<Vec<f64>> {
    let pi = std::f64::consts::PI;
    let rate = w.sample_rate as f64;
    let win = (REF_WINDOW * rate).round() as usize;
    let hop = (REF_HOP * rate).round() as usize;
    if w.samples.len() < win {
        return Vec::new();
    }
    let n_frames = 1 + (w.samples.len() - win) / hop;
    let mut fft = 1usize;
    while fft < win {
        fft *= 2;
    }
    let bins = fft / 2 + 1;

    let hann: Vec<f64> =
        (0..win).map(|i| 0.5 - 0.5 * (2.0 * pi * i as f64 / (win as f64 - 1.0)).cos()).collect();
    let mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
    let imel = |m: f64| 700.0 * (10f64.powf(m / 2595.0) - 1.0);
    let top = mel(rate / 2.0);
    let pts: Vec<f64> =
        (0..REF_BANDS + 2).map(|i| imel(top * i as f64 / (REF_BANDS + 1) as f64)).collect();

    let mut out = Vec::with_capacity(n_frames);
    for fi in 0..n_frames {
        let off = fi * hop;
        let mut mags = vec![0.0f64; bins];
        for (k, mag) in mags.iter_mut().enumerate() {
            let (mut re, mut im) = (0.0f64, 0.0f64);
            for i in 0..win {
                let v = w.samples[off + i] as f64 * hann[i];
                let ang = 2.0 * pi * (k * i) as f64 / fft as f64;
                re += v * ang.cos();
                im -= v * ang.sin();
            }
            *mag = (re * re + im * im).sqrt();
        }
        let mut logs = vec![0.0f64; REF_BANDS];
        for (b, log) in logs.iter_mut().enumerate() {
            let (lo, mid, hi) = (pts[b], pts[b + 1], pts[b + 2]);
            let mut e = 0.0;
            for (k, mag) in mags.iter().enumerate() {
                let f = k as f64 * rate / fft as f64;
                let rise = if mid > lo { (f - lo) / (mid - lo) } else { 0.0 };
                let fall = if hi > mid { (hi - f) / (hi - mid) } else { 0.0 };
                e += rise.min(fall).max(0.0) * mag;
            }
            *log = e.max(REF_FLOOR).ln();
        }
        let row: Vec<f64> = (1..=REF_COEFFS)
            .map(|k| {
                let s: f64 = logs
                    .iter()
                    .enumerate()
                    .map(|(b, &v)| v * (pi * k as f64 * (b as f64 + 0.5) / REF_BANDS as f64).cos())
                    .sum();
                (2.0 / REF_BANDS as f64).sqrt() * s
            })
            .collect();
        out.push(row);
    }
    out
}

/// Independent mel-cepstral distortion at the default analysis settings.
pub fn reference_mcd(a: &Waveform, b: &Waveform) -> f64 {
    assert_eq!(a.sample_rate, b.sample_rate, "reference assumes equal rates");
    let ca = ref_cepstra(a);
    let cb = ref_cepstra(b);
    assert!(!ca.is_empty() && !cb.is_empty(), "reference needs at least one frame");

    let (m, n) = (ca.len(), cb.len());
    let dist = |i: usize, j: usize| -> f64 {
        ca[i].iter().zip(&cb[j]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    };
    let mut acc = vec![vec![f64::INFINITY; n]; m];
    for i in 0..m {
        for j in 0..n {
            let prev = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 { acc[i - 1][j - 1] } else { f64::INFINITY };
                let up = if i > 0 { acc[i - 1][j] } else { f64::INFINITY };
                let left = if j > 0 { acc[i][j - 1] } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            acc[i][j] = dist(i, j) + prev;
        }
    }
    let (mut i, mut j) = (m - 1, n - 1);
    let mut total = (2.0f64).sqrt() * dist(i, j);
    let mut steps = 1usize;
    while i > 0 || j > 0 {
        let diag = if i > 0 && j > 0 { acc[i - 1][j - 1] } else { f64::INFINITY };
        let up = if i > 0 { acc[i - 1][j] } else { f64::INFINITY };
        let left = if j > 0 { acc[i][j - 1] } else { f64::INFINITY };
        if diag <= up && diag <= left {
            i -= 1;
            j -= 1;
        } else if up < left || (up == left && i > j) {
            i -= 1;
        } else {
            j -= 1;
        }
        total += (2.0f64).sqrt() * dist(i, j);
        steps += 1;
    }
    10.0 / std::f64::consts::LN_10 * total / steps as f64
}
