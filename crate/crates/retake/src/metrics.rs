//! Objective evaluation: phone error rate, timestamp gap statistics, and
//! mel-cepstral distortion.

use serde::{Deserialize, Serialize};

use crate::align::{align, EditOp};
use crate::audio::{mel_cepstra, AnalysisConfig, Waveform};
use crate::error::{Error, Result};
use crate::lexicon::Phone;
use crate::timeline::TimedUnit;

/// Edit-distance error rate against a reference sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRate {
    pub substitutions: usize,
    /// Hypothesis phones with no reference counterpart.
    pub insertions: usize,
    /// Reference phones the hypothesis missed.
    pub deletions: usize,
    pub ref_length: usize,
    /// (S + I + D) / ref_length; can exceed 1.
    pub rate: f64,
}

/// Phone error rate. With `stressed` set, stress digits must match too
/// (AE1 vs AE0 counts as a substitution); otherwise stress is stripped first.
pub fn per(reference: &[Phone], hypothesis: &[Phone], stressed: bool) -> Result<ErrorRate> {
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    let view = |p: &Phone| if stressed { p.to_string() } else { p.base().to_string() };
    let r: Vec<String> = reference.iter().map(view).collect();
    let h: Vec<String> = hypothesis.iter().map(view).collect();
    let alignment = align(&h, &r);

    let mut s = 0;
    let mut i = 0;
    let mut d = 0;
    for p in &alignment.pairs {
        match p.op {
            EditOp::Unchange => {}
            EditOp::Replace => s += 1,
            EditOp::Delete => i += 1, // extra hypothesis phone
            EditOp::Insert => d += 1, // missed reference phone
        }
    }
    Ok(ErrorRate {
        substitutions: s,
        insertions: i,
        deletions: d,
        ref_length: reference.len(),
        rate: (s + i + d) as f64 / reference.len() as f64,
    })
}

/// Timestamp agreement between two timed phone sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapStats {
    /// Mean |Δstart| over matched phones, in milliseconds.
    pub avg_start_gap_ms: f64,
    /// Mean |Δend| over matched phones, in milliseconds.
    pub avg_end_gap_ms: f64,
    /// Fraction of matched phones with |Δstart| ≤ tolerance.
    pub tolerable_start_ratio: f64,
    /// Fraction of matched phones with |Δend| ≤ tolerance.
    pub tolerable_end_ratio: f64,
    pub tolerance_ms: f64,
    /// Number of label-matched phone pairs the stats are computed over.
    pub matched_count: usize,
}

/// Compare hypothesis phone timestamps against reference ones.
///
/// Labels are aligned stress-sensitively and silence is ignored; statistics
/// cover only the matched (label-equal) pairs.
pub fn gap_stats(
    hypothesis: &[TimedUnit],
    reference: &[TimedUnit],
    tolerance_ms: f64,
) -> Result<GapStats> {
    if !(tolerance_ms.is_finite() && tolerance_ms >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "tolerance must be non-negative, got {tolerance_ms}"
        )));
    }
    let spoken = |units: &[TimedUnit]| -> Vec<TimedUnit> {
        units.iter().filter(|u| !u.is_silence()).cloned().collect()
    };
    let h = spoken(hypothesis);
    let r = spoken(reference);
    let h_labels: Vec<&str> = h.iter().map(|u| u.label.as_str()).collect();
    let r_labels: Vec<&str> = r.iter().map(|u| u.label.as_str()).collect();
    let alignment = align(&h_labels, &r_labels);

    let mut start_gaps = Vec::new();
    let mut end_gaps = Vec::new();
    for p in &alignment.pairs {
        if p.op != EditOp::Unchange {
            continue;
        }
        let hu = &h[p.hyp_index.expect("matched pairs touch both sides")];
        let ru = &r[p.target_index.expect("matched pairs touch both sides")];
        start_gaps.push((hu.start - ru.start).abs() * 1000.0);
        end_gaps.push((hu.end - ru.end).abs() * 1000.0);
    }
    let n = start_gaps.len();
    if n == 0 {
        return Err(Error::NoMatchedPhones);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let ok_ratio = |v: &[f64]| v.iter().filter(|g| **g <= tolerance_ms).count() as f64 / v.len() as f64;
    Ok(GapStats {
        avg_start_gap_ms: mean(&start_gaps),
        avg_end_gap_ms: mean(&end_gaps),
        tolerable_start_ratio: ok_ratio(&start_gaps),
        tolerable_end_ratio: ok_ratio(&end_gaps),
        tolerance_ms,
        matched_count: n,
    })
}

/// Mel-cepstral distortion between two waveforms, in dB.
///
/// Frames are paired by dynamic time warping on Euclidean cepstral distance;
/// the reported value is `(10/ln 10) · mean over the warping path of
/// sqrt(2 · Σ_k (c_k − c'_k)²)`. Either signal shorter than one analysis
/// window is an error.
pub fn mcd(a: &Waveform, b: &Waveform, cfg: &AnalysisConfig) -> Result<f64> {
    if a.sample_rate != b.sample_rate {
        return Err(Error::SampleRateMismatch { expected: a.sample_rate, actual: b.sample_rate });
    }
    let ca = mel_cepstra(a, cfg)?;
    let cb = mel_cepstra(b, cfg)?;
    if ca.is_empty() || cb.is_empty() {
        return Err(Error::TooShort);
    }

    let m = ca.len();
    let n = cb.len();
    let dist = |i: usize, j: usize| -> f64 {
        ca[i].iter().zip(&cb[j]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    };

    // Cumulative cost with the classic three predecessors.
    let mut acc = vec![f64::INFINITY; m * n];
    for i in 0..m {
        for j in 0..n {
            let d = dist(i, j);
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 { acc[(i - 1) * n + (j - 1)] } else { f64::INFINITY };
                let up = if i > 0 { acc[(i - 1) * n + j] } else { f64::INFINITY };
                let left = if j > 0 { acc[i * n + (j - 1)] } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            acc[i * n + j] = d + best;
        }
    }

    // Walk the path back, preferring the diagonal on ties; up/left ties break
    // toward the longer side so that mcd(a, b) == mcd(b, a).
    let mut path = vec![(m - 1, n - 1)];
    let (mut i, mut j) = (m - 1, n - 1);
    while i > 0 || j > 0 {
        let diag = if i > 0 && j > 0 { acc[(i - 1) * n + (j - 1)] } else { f64::INFINITY };
        let up = if i > 0 { acc[(i - 1) * n + j] } else { f64::INFINITY };
        let left = if j > 0 { acc[i * n + (j - 1)] } else { f64::INFINITY };
        if diag <= up && diag <= left {
            i -= 1;
            j -= 1;
        } else if up < left || (up == left && i > j) {
            i -= 1;
        } else {
            j -= 1;
        }
        path.push((i, j));
    }

    let total: f64 = path.iter().map(|&(i, j)| (2.0f64).sqrt() * dist(i, j)).sum();
    Ok(10.0 / std::f64::consts::LN_10 * total / path.len() as f64)
}
