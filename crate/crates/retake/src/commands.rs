//! The command-line surface: argument types and one entry point per
//! subcommand, each a thin orchestration of the library modules.
//!
//! Every output file is written atomically (temp file + rename), so a failed
//! run never leaves a truncated artifact behind.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::audio::{read_wav_file, wav_bytes, AnalysisConfig, Waveform};
use crate::corpus::{atomic_write, load_utterance, manifest_base, CorpusManifest, UtteranceEntry};
use crate::ctc::{greedy_decode, parse_logits};
use crate::error::{Error, Result};
use crate::lexicon::{load_dictionary, normalize_text, Phone, PronunciationDict, WordToken};
use crate::metrics::{gap_stats, mcd, per, ErrorRate, GapStats};
use crate::perturb::{perturb_utterance, PerturbConfig, WordDonor};
use crate::plan::{
    emit_plan, parse_plan, plan_phone_phone, plan_word_phone, plan_word_word, EditPlan, Method,
};
use crate::splice::{apply_plan, load_donor_manifest, SpliceConfig};
use crate::timeline::{emit_transcript, parse_transcript, Source, Transcript};

/// Fix a recorded utterance without redoing the take: recognize what was
/// said, align it against the intended text, plan the edits, and splice.
#[derive(Debug, Parser)]
#[command(name = "retake", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decode a frame-level score matrix into a timed phone transcript.
    Decode(DecodeArgs),
    /// Align a transcript against target text and plan corrective edits.
    Plan(PlanArgs),
    /// Execute an edit plan on a recording, filling edits with donor audio.
    Edit(EditArgs),
    /// Randomly corrupt a corpus, keeping exact records of every change.
    Perturb(PerturbArgs),
    /// Score hypothesis transcripts or audio against references.
    Eval(EvalArgs),
    /// Recognize, plan, and splice in one run.
    Pipeline(PipelineArgs),
}

/// Dispatch one parsed command.
pub fn run(command: &Command) -> Result<()> {
    match command {
        Command::Decode(a) => run_decode(a),
        Command::Plan(a) => run_plan(a),
        Command::Edit(a) => run_edit(a),
        Command::Perturb(a) => run_perturb(a),
        Command::Eval(a) => run_eval(a),
        Command::Pipeline(a) => run_pipeline(a),
    }
}

fn parse_method(s: &str) -> Result<Method> {
    s.parse()
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "utterance".to_string())
}

fn read_text(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Score matrix file (CTCLOGITS v1).
    #[arg(long)]
    pub logits: PathBuf,
    /// Vocabulary file: one phone label per line, blank excluded.
    #[arg(long)]
    pub vocab: PathBuf,
    /// Utterance id for the transcript; defaults to the logits file stem.
    #[arg(long)]
    pub utterance_id: Option<String>,
    /// Output transcript JSON path.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_decode(args: &DecodeArgs) -> Result<()> {
    let vocab_text = read_text(&args.vocab)?;
    let file = std::fs::File::open(&args.logits)?;
    let matrix = parse_logits(std::io::BufReader::new(file), &vocab_text)?;
    let phones = greedy_decode(&matrix).into_iter().map(|d| d.phone).collect();
    let transcript = Transcript {
        utterance_id: args.utterance_id.clone().unwrap_or_else(|| file_stem(&args.logits)),
        source: Source::Ctc,
        frame_rate: Some(matrix.frame_rate()),
        words: None,
        phones: Some(phones),
    };
    transcript.validate()?;
    atomic_write(&args.out, emit_transcript(&transcript).as_bytes())
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Hypothesis transcript JSON describing what was actually said.
    #[arg(long)]
    pub transcript: PathBuf,
    /// Target text the utterance was supposed to say.
    #[arg(long)]
    pub text: String,
    /// Pronunciation dictionary path.
    #[arg(long)]
    pub dict: PathBuf,
    /// Correction method: word-word, word-phone, or phone-phone.
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    /// Output plan JSON path.
    #[arg(long)]
    pub out: PathBuf,
    /// If a target word is missing from the dictionary, print a note and exit
    /// cleanly without writing a plan, instead of failing.
    #[arg(long)]
    pub skip_oov: bool,
}

/// Build a plan with `method`, expanding target words through the dictionary
/// where the method aligns phones.
pub fn build_method_plan(
    hyp: &Transcript,
    target: &[WordToken],
    dict: &PronunciationDict,
    method: Method,
) -> Result<EditPlan> {
    match method {
        Method::WordWord => plan_word_word(hyp, target),
        Method::WordPhone => plan_word_phone(hyp, target, dict),
        Method::PhonePhone => {
            let mut phones: Vec<Phone> = Vec::new();
            for w in target {
                phones.extend(dict.lookup(w)?.iter().cloned());
            }
            plan_phone_phone(hyp, &phones)
        }
    }
}

fn oov_note(word: &str, utterance_id: &str) -> String {
    serde_json::json!({
        "skipped": true,
        "reason": "missing_pronunciation",
        "word": word,
        "utterance_id": utterance_id,
    })
    .to_string()
}

pub fn run_plan(args: &PlanArgs) -> Result<()> {
    let transcript = parse_transcript(&read_text(&args.transcript)?)?;
    let dict = load_dictionary(&read_text(&args.dict)?)?;
    let target = normalize_text(&args.text);
    match build_method_plan(&transcript, &target, &dict, args.method) {
        Ok(plan) => atomic_write(&args.out, emit_plan(&plan).as_bytes()),
        Err(Error::MissingPronunciation(word)) if args.skip_oov => {
            println!("{}", oov_note(&word, &transcript.utterance_id));
            Ok(())
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Args)]
pub struct EditArgs {
    /// Input recording (PCM16 mono WAV).
    #[arg(long)]
    pub audio: PathBuf,
    /// Edit plan JSON.
    #[arg(long)]
    pub plan: PathBuf,
    /// Donor manifest JSON listing replacement audio per token.
    #[arg(long)]
    pub donors: PathBuf,
    /// Output WAV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Crossfade length in seconds at every splice junction.
    #[arg(long, default_value_t = SpliceConfig::default().crossfade)]
    pub crossfade: f64,
    /// Seed for choosing among donor candidates.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run_edit(args: &EditArgs) -> Result<()> {
    let wav = read_wav_file(&args.audio)?;
    let plan = parse_plan(&read_text(&args.plan)?)?;
    let donors = load_donor_manifest(&args.donors)?;
    let cfg = SpliceConfig { crossfade: args.crossfade };
    let out = apply_plan(&wav, &plan, &donors, &cfg, args.seed)?;
    atomic_write(&args.out, &wav_bytes(&out))
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    /// Input corpus manifest JSON.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Directory for perturbed WAVs, oracle transcripts, op records, and the
    /// output manifest.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Probability of inserting a stray word after a spoken word.
    #[arg(long, default_value_t = PerturbConfig::default().p_insert)]
    pub p_insert: f64,
    /// Probability of replacing a spoken word with a different one.
    #[arg(long, default_value_t = PerturbConfig::default().p_replace)]
    pub p_replace: f64,
    /// Probability of deleting a spoken word.
    #[arg(long, default_value_t = PerturbConfig::default().p_delete)]
    pub p_delete: f64,
    /// Corpus-level seed; each utterance derives its own stream from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Crossfade length in seconds at every splice junction.
    #[arg(long, default_value_t = SpliceConfig::default().crossfade)]
    pub crossfade: f64,
}

pub fn run_perturb(args: &PerturbArgs) -> Result<()> {
    let manifest = CorpusManifest::load(&args.corpus)?;
    let base = manifest_base(&args.corpus);
    let cfg = PerturbConfig {
        p_insert: args.p_insert,
        p_replace: args.p_replace,
        p_delete: args.p_delete,
        seed: args.seed,
    };
    cfg.validate()?;
    let splice = SpliceConfig { crossfade: args.crossfade };
    splice.validate()?;

    // Load everything up front and pool donor words per speaker, so every
    // utterance can borrow from its speaker's other recordings.
    let mut loaded: Vec<(&UtteranceEntry, Waveform, Transcript)> = Vec::new();
    let mut pools: BTreeMap<String, Vec<WordDonor>> = BTreeMap::new();
    for entry in &manifest.utterances {
        let (wav, transcript) = load_utterance(&base, entry)?;
        if transcript.words.is_none() {
            return Err(Error::NoWordTier);
        }
        let pool = pools.entry(entry.speaker.clone()).or_default();
        for w in transcript.spoken_words() {
            if w.word.duration() > 0.0 {
                pool.push(WordDonor::cut(&entry.utterance_id, &wav, w)?);
            }
        }
        loaded.push((entry, wav, transcript));
    }

    let mut out_manifest = CorpusManifest::default();
    for (entry, wav, transcript) in &loaded {
        let words: Vec<_> = transcript.spoken_words().into_iter().cloned().collect();
        let pool = pools.get(&entry.speaker).map(Vec::as_slice).unwrap_or(&[]);
        let (perturbed, record, oracle) =
            perturb_utterance(&entry.utterance_id, wav, &words, pool, &cfg, &splice)?;

        let id = &entry.utterance_id;
        let wav_name = format!("{id}.wav");
        let transcript_name = format!("{id}.transcript.json");
        let record_name = format!("{id}.record.json");
        atomic_write(&args.out_dir.join(&wav_name), &wav_bytes(&perturbed))?;
        atomic_write(&args.out_dir.join(&transcript_name), emit_transcript(&oracle).as_bytes())?;
        atomic_write(
            &args.out_dir.join(&record_name),
            crate::perturb::emit_record(&record).as_bytes(),
        )?;
        let text = oracle
            .spoken_words()
            .iter()
            .map(|w| w.word.label.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        out_manifest.utterances.push(UtteranceEntry {
            utterance_id: id.clone(),
            speaker: entry.speaker.clone(),
            wav: wav_name,
            transcript: transcript_name,
            text,
        });
    }
    out_manifest.save(&args.out_dir.join("corpus.json"))
}

/// Which metric family an eval run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EvalKind {
    /// Phone error rate, both stress-blind and stress-strict.
    Per,
    /// Timestamp gaps between matched phones.
    Gaps,
    /// Spectral distortion between two recordings.
    Mcd,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Metric to compute.
    #[arg(long, value_enum)]
    pub kind: EvalKind,
    /// Reference input: transcript JSON (per, gaps) or WAV (mcd); a corpus
    /// manifest with --corpus.
    #[arg(long)]
    pub reference: PathBuf,
    /// Hypothesis input, same shape as --reference.
    #[arg(long)]
    pub hypothesis: PathBuf,
    /// Treat both inputs as corpus manifests and aggregate over utterances.
    #[arg(long)]
    pub corpus: bool,
    /// Tolerance in milliseconds for counting a timestamp gap as acceptable.
    #[arg(long, default_value_t = 100.0)]
    pub tolerance_ms: f64,
    /// Report JSON output path; written to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// One utterance's scores; only the requested metric's fields are set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceReport {
    pub utterance_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per: Option<ErrorRate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_per: Option<ErrorRate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaps: Option<GapStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcd: Option<f64>,
}

/// Corpus-level scores: the mean of each value over the utterances that
/// produced it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_per: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_start_gap_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_end_gap_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerable_start_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerable_end_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcd: Option<f64>,
}

/// A full evaluation: one row per utterance plus the aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub kind: EvalKind,
    pub utterances: Vec<UtteranceReport>,
    pub aggregate: AggregateReport,
}

fn mean_of(values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Average each metric over the rows that carry it.
pub fn aggregate_reports(rows: &[UtteranceReport]) -> AggregateReport {
    let pick = |f: &dyn Fn(&UtteranceReport) -> Option<f64>| {
        mean_of(rows.iter().filter_map(f).collect())
    };
    AggregateReport {
        per: pick(&|r| r.per.as_ref().map(|e| e.rate)),
        s_per: pick(&|r| r.s_per.as_ref().map(|e| e.rate)),
        avg_start_gap_ms: pick(&|r| r.gaps.as_ref().map(|g| g.avg_start_gap_ms)),
        avg_end_gap_ms: pick(&|r| r.gaps.as_ref().map(|g| g.avg_end_gap_ms)),
        tolerable_start_ratio: pick(&|r| r.gaps.as_ref().map(|g| g.tolerable_start_ratio)),
        tolerable_end_ratio: pick(&|r| r.gaps.as_ref().map(|g| g.tolerable_end_ratio)),
        mcd: pick(&|r| r.mcd),
    }
}

fn transcript_phones(t: &Transcript) -> Result<Vec<Phone>> {
    t.spoken_phones()?.iter().map(|u| Phone::parse(&u.label)).collect()
}

/// Score one hypothesis transcript against its reference.
pub fn eval_transcripts(
    kind: EvalKind,
    utterance_id: &str,
    reference: &Transcript,
    hypothesis: &Transcript,
    tolerance_ms: f64,
) -> Result<UtteranceReport> {
    let mut row = UtteranceReport {
        utterance_id: utterance_id.to_string(),
        per: None,
        s_per: None,
        gaps: None,
        mcd: None,
    };
    match kind {
        EvalKind::Per => {
            let r = transcript_phones(reference)?;
            let h = transcript_phones(hypothesis)?;
            row.per = Some(per(&r, &h, false)?);
            row.s_per = Some(per(&r, &h, true)?);
        }
        EvalKind::Gaps => {
            let r = reference.phone_sequence()?;
            let h = hypothesis.phone_sequence()?;
            row.gaps = Some(gap_stats(&h, &r, tolerance_ms)?);
        }
        EvalKind::Mcd => {
            return Err(Error::InvalidConfig(
                "mcd compares waveforms, not transcripts".to_string(),
            ))
        }
    }
    Ok(row)
}

fn eval_corpus(args: &EvalArgs) -> Result<Vec<UtteranceReport>> {
    let ref_manifest = CorpusManifest::load(&args.reference)?;
    let hyp_manifest = CorpusManifest::load(&args.hypothesis)?;
    let ref_base = manifest_base(&args.reference);
    let hyp_base = manifest_base(&args.hypothesis);

    let mut rows = Vec::new();
    for ref_entry in &ref_manifest.utterances {
        let id = &ref_entry.utterance_id;
        let hyp_entry = hyp_manifest
            .entry(id)
            .ok_or_else(|| Error::Manifest(format!("hypothesis corpus is missing {id:?}")))?;
        let row = match args.kind {
            EvalKind::Mcd => {
                let r = read_wav_file(ref_base.join(&ref_entry.wav))?;
                let h = read_wav_file(hyp_base.join(&hyp_entry.wav))?;
                UtteranceReport {
                    utterance_id: id.clone(),
                    per: None,
                    s_per: None,
                    gaps: None,
                    mcd: Some(mcd(&h, &r, &AnalysisConfig::default())?),
                }
            }
            EvalKind::Per | EvalKind::Gaps => {
                let r = parse_transcript(&read_text(&ref_base.join(&ref_entry.transcript))?)?;
                let h = parse_transcript(&read_text(&hyp_base.join(&hyp_entry.transcript))?)?;
                eval_transcripts(args.kind, id, &r, &h, args.tolerance_ms)?
            }
        };
        rows.push(row);
    }
    Ok(rows)
}

pub fn run_eval(args: &EvalArgs) -> Result<()> {
    let rows = if args.corpus {
        eval_corpus(args)?
    } else {
        match args.kind {
            EvalKind::Mcd => {
                let r = read_wav_file(&args.reference)?;
                let h = read_wav_file(&args.hypothesis)?;
                vec![UtteranceReport {
                    utterance_id: file_stem(&args.hypothesis),
                    per: None,
                    s_per: None,
                    gaps: None,
                    mcd: Some(mcd(&h, &r, &AnalysisConfig::default())?),
                }]
            }
            EvalKind::Per | EvalKind::Gaps => {
                let r = parse_transcript(&read_text(&args.reference)?)?;
                let h = parse_transcript(&read_text(&args.hypothesis)?)?;
                vec![eval_transcripts(args.kind, &h.utterance_id.clone(), &r, &h, args.tolerance_ms)?]
            }
        }
    };
    let report =
        EvalReport { kind: args.kind, aggregate: aggregate_reports(&rows), utterances: rows };
    let mut body = serde_json::to_string_pretty(&report)?;
    body.push('\n');
    match &args.out {
        Some(path) => atomic_write(path, body.as_bytes()),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Input recording WAV.
    #[arg(long)]
    pub audio: PathBuf,
    /// Hypothesis transcript JSON; alternative to --logits.
    #[arg(long, conflicts_with = "logits")]
    pub transcript: Option<PathBuf>,
    /// Score matrix to decode instead of a ready transcript.
    #[arg(long, requires = "vocab")]
    pub logits: Option<PathBuf>,
    /// Vocabulary file for --logits.
    #[arg(long, requires = "logits")]
    pub vocab: Option<PathBuf>,
    /// Target text the recording should say.
    #[arg(long)]
    pub text: String,
    /// Correction method: word-word, word-phone, or phone-phone.
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    /// Pronunciation dictionary path.
    #[arg(long)]
    pub dict: PathBuf,
    /// Donor manifest JSON.
    #[arg(long)]
    pub donors: PathBuf,
    /// Corrected WAV output path.
    #[arg(long)]
    pub out_wav: PathBuf,
    /// Edit plan output path.
    #[arg(long)]
    pub out_plan: PathBuf,
    /// Run report output path.
    #[arg(long)]
    pub out_report: PathBuf,
    /// Clean reference WAV; adds a distortion score against it to the report.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Crossfade length in seconds at every splice junction.
    #[arg(long, default_value_t = SpliceConfig::default().crossfade)]
    pub crossfade: f64,
    /// Seed for choosing among donor candidates.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// If a target word is missing from the dictionary, print a note and exit
    /// cleanly without writing outputs, instead of failing.
    #[arg(long)]
    pub skip_oov: bool,
}

/// Summary of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub utterance_id: String,
    pub method: Method,
    pub source: Source,
    /// Number of edit regions the plan contains; zero means the audio was
    /// passed through untouched.
    pub region_count: usize,
    pub input_duration: f64,
    pub output_duration: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcd_to_reference: Option<f64>,
}

pub fn run_pipeline(args: &PipelineArgs) -> Result<()> {
    let wav = read_wav_file(&args.audio)?;
    let transcript = match (&args.transcript, &args.logits, &args.vocab) {
        (Some(path), None, _) => parse_transcript(&read_text(path)?)?,
        (None, Some(logits), Some(vocab)) => {
            let vocab_text = read_text(vocab)?;
            let file = std::fs::File::open(logits)?;
            let matrix = parse_logits(std::io::BufReader::new(file), &vocab_text)?;
            let phones = greedy_decode(&matrix).into_iter().map(|d| d.phone).collect();
            let t = Transcript {
                utterance_id: file_stem(&args.audio),
                source: Source::Ctc,
                frame_rate: Some(matrix.frame_rate()),
                words: None,
                phones: Some(phones),
            };
            t.validate()?;
            t
        }
        _ => {
            return Err(Error::InvalidConfig(
                "pass either --transcript or --logits with --vocab".to_string(),
            ))
        }
    };
    let dict = load_dictionary(&read_text(&args.dict)?)?;
    let target = normalize_text(&args.text);
    let plan = match build_method_plan(&transcript, &target, &dict, args.method) {
        Err(Error::MissingPronunciation(word)) if args.skip_oov => {
            println!("{}", oov_note(&word, &transcript.utterance_id));
            return Ok(());
        }
        other => other?,
    };
    let donors = load_donor_manifest(&args.donors)?;
    let cfg = SpliceConfig { crossfade: args.crossfade };
    let corrected = apply_plan(&wav, &plan, &donors, &cfg, args.seed)?;
    let mcd_to_reference = match &args.reference {
        Some(path) => {
            Some(mcd(&corrected, &read_wav_file(path)?, &AnalysisConfig::default())?)
        }
        None => None,
    };
    let report = PipelineReport {
        utterance_id: transcript.utterance_id.clone(),
        method: args.method,
        source: transcript.source,
        region_count: plan.regions.len(),
        input_duration: wav.duration(),
        output_duration: corrected.duration(),
        mcd_to_reference,
    };
    atomic_write(&args.out_plan, emit_plan(&plan).as_bytes())?;
    atomic_write(&args.out_wav, &wav_bytes(&corrected))?;
    let mut body = serde_json::to_string_pretty(&report)?;
    body.push('\n');
    atomic_write(&args.out_report, body.as_bytes())
}
