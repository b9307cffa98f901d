//! Waveforms: PCM16 mono WAV I/O, segment extraction, and mel-cepstral analysis.
//!
//! Samples live in memory as `f32` in `[-1, 1]` (scale 1/32768). Writing
//! quantizes with round-half-away-from-zero and clamps to the i16 range, and
//! the writer emits a canonical 44-byte header so a read-write cycle of a
//! canonical file is byte-identical.

use std::io::{Read, Write};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Mono audio at a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Waveform {
        Waveform { samples, sample_rate }
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Nearest sample index for a time in seconds.
    pub fn index_at(&self, t: f64) -> usize {
        (t * self.sample_rate as f64).round() as usize
    }
}

/// Copy out the samples under `[start, end]` (seconds, rounded to samples).
pub fn extract_segment(wav: &Waveform, span: [f64; 2]) -> Result<Waveform> {
    let [s, e] = span;
    if !(s.is_finite() && e.is_finite()) || s < 0.0 || e < s {
        return Err(Error::SpanOutOfRange(format!("bad span [{s}, {e}]")));
    }
    let a = wav.index_at(s);
    let b = wav.index_at(e);
    if b > wav.samples.len() {
        return Err(Error::SpanOutOfRange(format!(
            "span [{s}, {e}] ends past the waveform ({} samples at {} Hz)",
            wav.samples.len(),
            wav.sample_rate
        )));
    }
    Ok(Waveform::new(wav.samples[a..b].to_vec(), wav.sample_rate))
}

fn read_exact_or_corrupt(r: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::CorruptHeader(format!("truncated while reading {what}"))
        } else {
            Error::Io(e)
        }
    })
}

fn read_u16(r: &mut impl Read, what: &str) -> Result<u16> {
    let mut b = [0u8; 2];
    read_exact_or_corrupt(r, &mut b, what)?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32(r: &mut impl Read, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact_or_corrupt(r, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

/// Read a PCM16 mono WAV stream. Unknown chunks are skipped; anything other
/// than 16-bit mono integer PCM is rejected.
pub fn read_wav(r: &mut impl Read) -> Result<Waveform> {
    let mut magic = [0u8; 4];
    read_exact_or_corrupt(r, &mut magic, "RIFF magic")?;
    if &magic != b"RIFF" {
        return Err(Error::CorruptHeader("missing RIFF magic".to_string()));
    }
    let _riff_size = read_u32(r, "RIFF size")?;
    read_exact_or_corrupt(r, &mut magic, "WAVE magic")?;
    if &magic != b"WAVE" {
        return Err(Error::CorruptHeader("missing WAVE magic".to_string()));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // (format, channels, rate, bits)
    let mut data: Option<Vec<u8>> = None;
    loop {
        let mut id = [0u8; 4];
        match r.read_exact(&mut id) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(Error::Io(e)),
        }
        let size = read_u32(r, "chunk size")? as usize;
        match &id {
            b"fmt " => {
                if size < 16 {
                    return Err(Error::CorruptHeader(format!("fmt chunk too small ({size} bytes)")));
                }
                let format = read_u16(r, "audio format")?;
                let channels = read_u16(r, "channel count")?;
                let rate = read_u32(r, "sample rate")?;
                let _byte_rate = read_u32(r, "byte rate")?;
                let _block_align = read_u16(r, "block align")?;
                let bits = read_u16(r, "bits per sample")?;
                skip(r, size - 16)?;
                fmt = Some((format, channels, rate, bits));
            }
            b"data" => {
                let mut payload = vec![0u8; size];
                read_exact_or_corrupt(r, &mut payload, "data payload")?;
                data = Some(payload);
            }
            _ => skip(r, size)?,
        }
        if size % 2 == 1 {
            skip(r, 1)?; // chunks are word-aligned
        }
    }

    let (format, channels, rate, bits) =
        fmt.ok_or_else(|| Error::CorruptHeader("no fmt chunk".to_string()))?;
    let payload = data.ok_or_else(|| Error::CorruptHeader("no data chunk".to_string()))?;
    if format != 1 {
        return Err(Error::UnsupportedFormat(format!("audio format {format} (only integer PCM)")));
    }
    if channels != 1 {
        return Err(Error::UnsupportedFormat(format!("{channels} channels (only mono)")));
    }
    if bits != 16 {
        return Err(Error::UnsupportedFormat(format!("{bits}-bit samples (only 16)")));
    }
    if rate == 0 {
        return Err(Error::CorruptHeader("zero sample rate".to_string()));
    }
    if payload.len() % 2 != 0 {
        return Err(Error::CorruptHeader("data chunk has an odd byte count".to_string()));
    }

    let samples = payload
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]) as f32 / 32768.0)
        .collect();
    Ok(Waveform { samples, sample_rate: rate })
}

fn skip(r: &mut impl Read, n: usize) -> Result<()> {
    let copied = std::io::copy(&mut r.take(n as u64), &mut std::io::sink())?;
    if copied != n as u64 {
        return Err(Error::CorruptHeader("truncated chunk".to_string()));
    }
    Ok(())
}

/// Quantize one sample: clamp to [-1, 1], scale by 32768, round half away
/// from zero, then clamp into the i16 range (so +1.0 maps to 32767).
pub fn quantize(x: f32) -> i16 {
    let scaled = (x.clamp(-1.0, 1.0) * 32768.0).round();
    scaled.min(32767.0).max(-32768.0) as i16
}

/// Write a canonical 44-byte-header PCM16 mono WAV.
pub fn write_wav(w: &mut impl Write, wav: &Waveform) -> Result<()> {
    let data_len = (wav.samples.len() * 2) as u32;
    w.write_all(b"RIFF")?;
    w.write_all(&(36 + data_len).to_le_bytes())?;
    w.write_all(b"WAVE")?;
    w.write_all(b"fmt ")?;
    w.write_all(&16u32.to_le_bytes())?;
    w.write_all(&1u16.to_le_bytes())?; // integer PCM
    w.write_all(&1u16.to_le_bytes())?; // mono
    w.write_all(&wav.sample_rate.to_le_bytes())?;
    w.write_all(&(wav.sample_rate * 2).to_le_bytes())?;
    w.write_all(&2u16.to_le_bytes())?;
    w.write_all(&16u16.to_le_bytes())?;
    w.write_all(b"data")?;
    w.write_all(&data_len.to_le_bytes())?;
    for &x in &wav.samples {
        w.write_all(&quantize(x).to_le_bytes())?;
    }
    Ok(())
}

/// Serialize a waveform to an in-memory WAV image.
pub fn wav_bytes(wav: &Waveform) -> Vec<u8> {
    let mut buf = Vec::with_capacity(44 + wav.samples.len() * 2);
    write_wav(&mut buf, wav).expect("writing to a Vec cannot fail");
    buf
}

/// Read a WAV file from disk.
pub fn read_wav_file(path: impl AsRef<std::path::Path>) -> Result<Waveform> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    read_wav(&mut r)
}

/// Parameters for the mel-cepstral analysis used in evaluation.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    /// Analysis window length in seconds.
    pub window: f64,
    /// Hop between frames in seconds.
    pub hop: f64,
    /// Number of triangular mel bands.
    pub mel_bands: usize,
    /// Cepstral coefficients kept per frame (the energy term is dropped).
    pub cepstral_coeffs: usize,
    /// Floor applied to band energies before the log.
    pub log_floor: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            window: 0.025,
            hop: 0.010,
            mel_bands: 80,
            cepstral_coeffs: 13,
            log_floor: 1e-10,
        }
    }
}

impl AnalysisConfig {
    /// Check the parameters against a sample rate.
    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if sample_rate == 0 {
            return fail("sample rate must be positive".into());
        }
        if !(self.window.is_finite() && self.window > 0.0) || self.window_samples(sample_rate) < 2 {
            return fail(format!("window {} too short for {} Hz", self.window, sample_rate));
        }
        if !(self.hop.is_finite() && self.hop > 0.0) || self.hop_samples(sample_rate) < 1 {
            return fail(format!("hop {} too short for {} Hz", self.hop, sample_rate));
        }
        if self.mel_bands < 2 {
            return fail("need at least 2 mel bands".into());
        }
        if self.cepstral_coeffs == 0 || self.cepstral_coeffs >= self.mel_bands {
            return fail(format!(
                "cepstral_coeffs must be in 1..{} (mel_bands)",
                self.mel_bands
            ));
        }
        if !(self.log_floor.is_finite() && self.log_floor > 0.0) {
            return fail("log_floor must be positive".into());
        }
        Ok(())
    }

    pub fn window_samples(&self, sample_rate: u32) -> usize {
        (self.window * sample_rate as f64).round() as usize
    }

    pub fn hop_samples(&self, sample_rate: u32) -> usize {
        (self.hop * sample_rate as f64).round() as usize
    }
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular mel filterbank (peak-1 triangles), one weight row per band over
/// the non-redundant spectrum bins.
fn mel_filterbank(cfg: &AnalysisConfig, sample_rate: u32, n_bins: usize, fft_len: usize) -> Vec<Vec<f64>> {
    let nyquist = sample_rate as f64 / 2.0;
    let top = hz_to_mel(nyquist);
    let points: Vec<f64> = (0..cfg.mel_bands + 2)
        .map(|i| mel_to_hz(top * i as f64 / (cfg.mel_bands + 1) as f64))
        .collect();
    let bin_hz = sample_rate as f64 / fft_len as f64;
    (0..cfg.mel_bands)
        .map(|b| {
            let (lo, mid, hi) = (points[b], points[b + 1], points[b + 2]);
            (0..n_bins)
                .map(|k| {
                    let f = k as f64 * bin_hz;
                    let rise = if mid > lo { (f - lo) / (mid - lo) } else { 0.0 };
                    let fall = if hi > mid { (hi - f) / (hi - mid) } else { 0.0 };
                    rise.min(fall).max(0.0)
                })
                .collect()
        })
        .collect()
}

fn next_pow2(n: usize) -> usize {
    let mut p = 1;
    while p < n {
        p *= 2;
    }
    p
}

/// Mel-cepstral coefficients, one `cepstral_coeffs`-long row per frame.
///
/// Chain: symmetric Hann window, magnitude FFT, triangular mel filterbank,
/// natural log with a floor, orthonormal DCT-II keeping coefficients 1..=K.
/// Frames start at multiples of the hop; a signal shorter than one window
/// yields zero frames.
pub fn mel_cepstra(wav: &Waveform, cfg: &AnalysisConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate(wav.sample_rate)?;
    let win = cfg.window_samples(wav.sample_rate);
    let hop = cfg.hop_samples(wav.sample_rate);
    let n = wav.samples.len();
    if n < win {
        return Ok(Vec::new());
    }
    let n_frames = 1 + (n - win) / hop;

    let fft_len = next_pow2(win);
    let n_bins = fft_len / 2 + 1;
    let hann: Vec<f64> = (0..win)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (win - 1) as f64).cos())
        .collect();
    let bank = mel_filterbank(cfg, wav.sample_rate, n_bins, fft_len);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(fft_len);

    let b_count = cfg.mel_bands as f64;
    let mut frames = Vec::with_capacity(n_frames);
    let mut buf = vec![Complex::new(0.0, 0.0); fft_len];
    for fi in 0..n_frames {
        let off = fi * hop;
        for (i, c) in buf.iter_mut().enumerate() {
            let x = if i < win { wav.samples[off + i] as f64 * hann[i] } else { 0.0 };
            *c = Complex::new(x, 0.0);
        }
        fft.process(&mut buf);
        let mags: Vec<f64> = buf[..n_bins].iter().map(|c| c.norm()).collect();

        let log_energies: Vec<f64> = bank
            .iter()
            .map(|row| {
                let e: f64 = row.iter().zip(&mags).map(|(w, m)| w * m).sum();
                e.max(cfg.log_floor).ln()
            })
            .collect();

        // Orthonormal DCT-II, coefficient 0 (overall level) dropped.
        let coeffs: Vec<f64> = (1..=cfg.cepstral_coeffs)
            .map(|k| {
                let sum: f64 = log_energies
                    .iter()
                    .enumerate()
                    .map(|(b, &v)| {
                        v * (std::f64::consts::PI * k as f64 * (b as f64 + 0.5) / b_count).cos()
                    })
                    .sum();
                (2.0 / b_count).sqrt() * sum
            })
            .collect();
        frames.push(coeffs);
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, rate: u32, n: usize, amp: f32) -> Waveform {
        let samples = (0..n)
            .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin() as f32)
            .collect();
        Waveform::new(samples, rate)
    }

    #[test]
    fn wav_round_trip_is_byte_identical() {
        let wav = tone(440.0, 16000, 1600, 0.8);
        let mut bytes = Vec::new();
        write_wav(&mut bytes, &wav).unwrap();
        let back = read_wav(&mut bytes.as_slice()).unwrap();
        let mut again = Vec::new();
        write_wav(&mut again, &back).unwrap();
        assert_eq!(bytes, again);
        assert_eq!(back.sample_rate, 16000);
        assert_eq!(back.samples.len(), 1600);
    }

    #[test]
    fn quantization_clamps_and_rounds_half_away_from_zero() {
        assert_eq!(quantize(1.0), 32767); // full scale clamps into range
        assert_eq!(quantize(2.0), 32767);
        assert_eq!(quantize(-1.0), -32768);
        assert_eq!(quantize(-2.0), -32768);
        assert_eq!(quantize(0.0), 0);
        assert_eq!(quantize(0.5 / 32768.0), 1);
        assert_eq!(quantize(-0.5 / 32768.0), -1);
        assert_eq!(quantize(1.5 / 32768.0), 2);
    }

    #[test]
    fn reader_skips_unknown_chunks() {
        let wav = tone(100.0, 8000, 16, 0.5);
        let mut bytes = Vec::new();
        write_wav(&mut bytes, &wav).unwrap();
        // Splice a 3-byte LIST chunk (odd size, so padded) before `data`.
        let mut doctored = bytes[..36].to_vec();
        doctored.extend_from_slice(b"LIST");
        doctored.extend_from_slice(&3u32.to_le_bytes());
        doctored.extend_from_slice(b"abc\0");
        doctored.extend_from_slice(&bytes[36..]);
        let back = read_wav(&mut doctored.as_slice()).unwrap();
        assert_eq!(back.samples.len(), 16);
    }

    #[test]
    fn reader_rejects_non_pcm16_mono() {
        let wav = tone(100.0, 8000, 4, 0.5);
        let mut bytes = Vec::new();
        write_wav(&mut bytes, &wav).unwrap();

        let mut stereo = bytes.clone();
        stereo[22] = 2; // channel count
        assert!(matches!(read_wav(&mut stereo.as_slice()), Err(Error::UnsupportedFormat(_))));

        let mut eight_bit = bytes.clone();
        eight_bit[34] = 8; // bits per sample
        assert!(matches!(read_wav(&mut eight_bit.as_slice()), Err(Error::UnsupportedFormat(_))));

        let mut float_fmt = bytes.clone();
        float_fmt[20] = 3; // IEEE float
        assert!(matches!(read_wav(&mut float_fmt.as_slice()), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn reader_rejects_truncation_and_garbage() {
        let wav = tone(100.0, 8000, 16, 0.5);
        let mut bytes = Vec::new();
        write_wav(&mut bytes, &wav).unwrap();
        assert!(matches!(
            read_wav(&mut bytes[..40].as_ref()),
            Err(Error::CorruptHeader(_))
        ));
        assert!(matches!(
            read_wav(&mut b"RIFX....WAVE".as_slice()),
            Err(Error::CorruptHeader(_))
        ));
        assert!(matches!(
            read_wav(&mut b"RIFF\x00\x00\x00\x00MP3 ".as_slice()),
            Err(Error::CorruptHeader(_))
        ));
    }

    #[test]
    fn segment_extraction_rounds_to_samples() {
        let wav = Waveform::new((0..100).map(|i| i as f32 / 100.0).collect(), 1000);
        let seg = extract_segment(&wav, [0.010, 0.020]).unwrap();
        assert_eq!(seg.samples.len(), 10);
        assert_eq!(seg.samples[0], 0.10);
        // out-of-range and inverted spans are rejected
        assert!(matches!(extract_segment(&wav, [0.0, 0.2]), Err(Error::SpanOutOfRange(_))));
        assert!(matches!(extract_segment(&wav, [0.02, 0.01]), Err(Error::SpanOutOfRange(_))));
        // zero-length span is legal and empty
        assert!(extract_segment(&wav, [0.05, 0.05]).unwrap().samples.is_empty());
    }

    #[test]
    fn frame_count_follows_window_and_hop() {
        let cfg = AnalysisConfig::default();
        let rate = 16000;
        // window 400 samples, hop 160
        for (n, want) in [(0, 0), (399, 0), (400, 1), (559, 1), (560, 2), (48000, 298)] {
            let wav = Waveform::new(vec![0.0; n], rate);
            assert_eq!(mel_cepstra(&wav, &cfg).unwrap().len(), want, "n={n}");
        }
    }

    #[test]
    fn silence_has_zero_cepstra() {
        // All bands sit on the log floor, making every kept coefficient 0.
        let wav = Waveform::new(vec![0.0; 1600], 16000);
        let frames = mel_cepstra(&wav, &AnalysisConfig::default()).unwrap();
        assert!(!frames.is_empty());
        for f in frames {
            assert_eq!(f.len(), 13);
            assert!(f.iter().all(|c| c.abs() < 1e-9));
        }
    }

    #[test]
    fn different_tones_have_different_cepstra() {
        let a = mel_cepstra(&tone(220.0, 16000, 1600, 0.8), &AnalysisConfig::default()).unwrap();
        let b = mel_cepstra(&tone(880.0, 16000, 1600, 0.8), &AnalysisConfig::default()).unwrap();
        let d: f64 = a[0].iter().zip(&b[0]).map(|(x, y)| (x - y).powi(2)).sum();
        assert!(d.sqrt() > 1.0, "distance {}", d.sqrt());
    }

    #[test]
    fn config_validation_rejects_bad_parameters() {
        let mut cfg = AnalysisConfig::default();
        cfg.cepstral_coeffs = 80;
        assert!(cfg.validate(16000).is_err());
        let mut cfg = AnalysisConfig::default();
        cfg.window = 0.0;
        assert!(cfg.validate(16000).is_err());
        let mut cfg = AnalysisConfig::default();
        cfg.log_floor = 0.0;
        assert!(cfg.validate(16000).is_err());
        assert!(AnalysisConfig::default().validate(0).is_err());
        // 25 ms window is only 1 sample at 40 Hz
        assert!(AnalysisConfig::default().validate(40).is_err());
    }

    /// From-scratch O(n^2) reimplementation of the analysis chain, kept
    /// deliberately independent of the production code path.
    fn naive_cepstra(wav: &Waveform, cfg: &AnalysisConfig) -> Vec<Vec<f64>> {
        let rate = wav.sample_rate as f64;
        let win = (cfg.window * rate).round() as usize;
        let hop = (cfg.hop * rate).round() as usize;
        if wav.samples.len() < win {
            return Vec::new();
        }
        let mut fft_len = 1;
        while fft_len < win {
            fft_len *= 2;
        }
        let n_bins = fft_len / 2 + 1;
        let pi = std::f64::consts::PI;

        let mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
        let inv = |m: f64| 700.0 * (10f64.powf(m / 2595.0) - 1.0);
        let top = mel(rate / 2.0);
        let pts: Vec<f64> =
            (0..cfg.mel_bands + 2).map(|i| inv(top * i as f64 / (cfg.mel_bands + 1) as f64)).collect();

        let mut out = Vec::new();
        let mut off = 0;
        while off + win <= wav.samples.len() {
            let windowed: Vec<f64> = (0..win)
                .map(|i| {
                    wav.samples[off + i] as f64
                        * (0.5 - 0.5 * (2.0 * pi * i as f64 / (win - 1) as f64).cos())
                })
                .collect();
            let mags: Vec<f64> = (0..n_bins)
                .map(|k| {
                    let (mut re, mut im) = (0.0, 0.0);
                    for (n, &x) in windowed.iter().enumerate() {
                        let ang = -2.0 * pi * k as f64 * n as f64 / fft_len as f64;
                        re += x * ang.cos();
                        im += x * ang.sin();
                    }
                    (re * re + im * im).sqrt()
                })
                .collect();
            let logs: Vec<f64> = (0..cfg.mel_bands)
                .map(|b| {
                    let (lo, mid, hi) = (pts[b], pts[b + 1], pts[b + 2]);
                    let e: f64 = (0..n_bins)
                        .map(|k| {
                            let f = k as f64 * rate / fft_len as f64;
                            let rise = if mid > lo { (f - lo) / (mid - lo) } else { 0.0 };
                            let fall = if hi > mid { (hi - f) / (hi - mid) } else { 0.0 };
                            rise.min(fall).max(0.0) * mags[k]
                        })
                        .sum();
                    e.max(cfg.log_floor).ln()
                })
                .collect();
            out.push(
                (1..=cfg.cepstral_coeffs)
                    .map(|k| {
                        (2.0 / cfg.mel_bands as f64).sqrt()
                            * logs
                                .iter()
                                .enumerate()
                                .map(|(b, &v)| {
                                    v * (pi * k as f64 * (b as f64 + 0.5) / cfg.mel_bands as f64).cos()
                                })
                                .sum::<f64>()
                    })
                    .collect(),
            );
            off += hop;
        }
        out
    }

    #[test]
    fn matches_a_naive_reimplementation() {
        let mut wav = tone(350.0, 8000, 400, 0.6);
        for (i, s) in wav.samples.iter_mut().enumerate() {
            *s += 0.2 * ((i * 7919) % 97) as f32 / 97.0 - 0.1; // repeatable clutter
        }
        let cfg = AnalysisConfig {
            window: 0.016,
            hop: 0.008,
            mel_bands: 10,
            cepstral_coeffs: 4,
            log_floor: 1e-10,
        };
        let fast = mel_cepstra(&wav, &cfg).unwrap();
        let slow = naive_cepstra(&wav, &cfg);
        assert_eq!(fast.len(), slow.len());
        assert!(!fast.is_empty());
        for (a, b) in fast.iter().zip(&slow) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-8, "{x} vs {y}");
            }
        }
    }
}
