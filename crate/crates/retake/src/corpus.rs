//! Corpus manifests tying utterance audio, transcripts, and text together on disk.

use std::collections::BTreeSet;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audio::{read_wav_file, wav_bytes, Waveform};
use crate::error::{Error, Result};
use crate::synth::SynthUtterance;
use crate::timeline::{emit_transcript, parse_transcript, Transcript};

/// One utterance in a corpus manifest; paths are relative to the manifest file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtteranceEntry {
    pub utterance_id: String,
    pub speaker: String,
    /// Path of the PCM16 mono WAV file.
    pub wav: String,
    /// Path of the transcript JSON file.
    pub transcript: String,
    /// The text actually spoken in the recording.
    pub text: String,
}

/// A list of utterances that belong together (a recording session, a test set).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub utterances: Vec<UtteranceEntry>,
}

impl CorpusManifest {
    /// Checks ids are unique and non-empty and referenced paths are non-empty.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for entry in &self.utterances {
            if entry.utterance_id.is_empty() {
                return Err(Error::Manifest("empty utterance_id".into()));
            }
            if !seen.insert(entry.utterance_id.as_str()) {
                return Err(Error::Manifest(format!(
                    "duplicate utterance_id {:?}",
                    entry.utterance_id
                )));
            }
            if entry.wav.is_empty() || entry.transcript.is_empty() {
                return Err(Error::Manifest(format!(
                    "utterance {:?} has an empty file path",
                    entry.utterance_id
                )));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<CorpusManifest> {
        let text = std::fs::read_to_string(path)?;
        let manifest: CorpusManifest = serde_json::from_str(&text)?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.validate()?;
        let mut body = serde_json::to_string_pretty(self)?;
        body.push('\n');
        atomic_write(path, body.as_bytes())
    }

    pub fn entry(&self, utterance_id: &str) -> Option<&UtteranceEntry> {
        self.utterances.iter().find(|e| e.utterance_id == utterance_id)
    }
}

/// Writes `bytes` to `path` via a temporary file in the same directory, then renames.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Loads one utterance's audio and transcript, resolving paths against `base`.
pub fn load_utterance(base: &Path, entry: &UtteranceEntry) -> Result<(Waveform, Transcript)> {
    let wav = read_wav_file(&base.join(&entry.wav))?;
    let text = std::fs::read_to_string(base.join(&entry.transcript))?;
    let transcript = parse_transcript(&text)?;
    Ok((wav, transcript))
}

/// Directory that manifest-relative paths in `manifest_path` resolve against.
pub fn manifest_base(manifest_path: &Path) -> PathBuf {
    match manifest_path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Writes synthesized utterances plus a manifest into `dir`; returns the manifest path.
pub fn write_corpus(dir: &Path, speaker: &str, utterances: &[SynthUtterance]) -> Result<PathBuf> {
    let mut manifest = CorpusManifest::default();
    for utt in utterances {
        let wav_name = format!("{}.wav", utt.utterance_id);
        let transcript_name = format!("{}.transcript.json", utt.utterance_id);
        atomic_write(&dir.join(&wav_name), &wav_bytes(&utt.audio))?;
        atomic_write(&dir.join(&transcript_name), emit_transcript(&utt.transcript).as_bytes())?;
        manifest.utterances.push(UtteranceEntry {
            utterance_id: utt.utterance_id.clone(),
            speaker: speaker.to_string(),
            wav: wav_name,
            transcript: transcript_name,
            text: utt.text.clone(),
        });
    }
    let manifest_path = dir.join("corpus.json");
    manifest.save(&manifest_path)?;
    Ok(manifest_path)
}
