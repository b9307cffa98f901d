//! Turn an alignment between recognized speech and target text into an edit plan.
//!
//! Three methods, differing in what they align and how aggressively they edit:
//!
//! * **word-word** — align word labels; a word survives when its label matches.
//!   Needs a word tier, so it cannot run on CTC transcripts.
//! * **word-phone** — align phones (dictionary pronunciations on the target
//!   side) but edit whole words: a word survives only when every one of its
//!   constituent phones matched, so label-identical but mispronounced words
//!   still get replaced.
//! * **phone-phone** — align phones and edit individual phones.
//!
//! A plan's regions plus its unchanged spans tile the utterance `[0, duration]`;
//! inserts are zero-width anchors placed at the midpoint of the gap between the
//! surrounding recognized units.

use serde::{Deserialize, Serialize};

use crate::align::{align, AlignedPair, EditOp};
use crate::error::{Error, Result};
use crate::lexicon::{Phone, PronunciationDict, WordToken};
use crate::timeline::{round_us, Source, TimedUnit, Transcript};

/// `[start, end]` in seconds.
pub type Span = [f64; 2];

/// Correction method; decides the alignment alphabet and the edit granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    WordWord,
    WordPhone,
    PhonePhone,
}

impl Method {
    pub fn granularity(self) -> Granularity {
        match self {
            Method::WordWord | Method::WordPhone => Granularity::Word,
            Method::PhonePhone => Granularity::Phone,
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        match s {
            "word-word" => Ok(Method::WordWord),
            "word-phone" => Ok(Method::WordPhone),
            "phone-phone" => Ok(Method::PhonePhone),
            other => Err(Error::InvalidConfig(format!(
                "unknown method '{other}' (expected word-word, word-phone, or phone-phone)"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::WordWord => "word-word",
            Method::WordPhone => "word-phone",
            Method::PhonePhone => "phone-phone",
        })
    }
}

/// Whether the plan edits whole words or individual phones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Word,
    Phone,
}

/// One edit: replace or delete a span of the original, or insert at an anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditRegion {
    pub op: EditOp,
    /// Original-audio span consumed by Replace/Delete; absent for Insert.
    pub orig_span: Option<Span>,
    /// Insertion point for Insert; absent otherwise.
    pub anchor: Option<f64>,
    /// Donor tokens (words or phones) to splice in; empty for Delete.
    pub target_tokens: Vec<String>,
}

impl EditRegion {
    /// The point in the original timeline where this edit sits.
    pub fn position(&self) -> f64 {
        self.orig_span.map(|s| s[0]).or(self.anchor).unwrap_or(0.0)
    }

    fn span_end(&self) -> f64 {
        self.orig_span.map(|s| s[1]).or(self.anchor).unwrap_or(0.0)
    }
}

/// The full edit plan for one utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditPlan {
    pub utterance_id: String,
    pub method: Method,
    pub granularity: Granularity,
    pub regions: Vec<EditRegion>,
    /// Spans kept verbatim; together with the regions they tile `[0, duration]`.
    pub unchanged_spans: Vec<Span>,
}

/// Word-level correction: align recognized word labels against the target words.
///
/// Adjacent edited words merge into one region, so for example a replaced word
/// followed by a missing word becomes a single Replace region whose
/// `target_tokens` carry both words.
pub fn plan_word_word(hyp: &Transcript, target: &[WordToken]) -> Result<EditPlan> {
    if hyp.source == Source::Ctc {
        return Err(Error::NotApplicable(
            "word-word correction needs a word tier; ctc transcripts carry none".to_string(),
        ));
    }
    if hyp.words.is_none() {
        return Err(Error::NoWordTier);
    }
    let spoken = hyp.spoken_words();
    let hyp_labels: Vec<String> = spoken.iter().map(|w| w.word.label.to_lowercase()).collect();
    let target_labels: Vec<String> = target.iter().map(|t| t.as_str().to_string()).collect();
    let alignment = align(&hyp_labels, &target_labels);

    let items: Vec<Item> = alignment
        .pairs
        .iter()
        .map(|p| Item {
            op: p.op,
            span: p.hyp_index.map(|h| [spoken[h].word.start, spoken[h].word.end]),
            token: p.target_index.map(|t| target_labels[t].clone()),
        })
        .collect();

    build_plan(hyp, Method::WordWord, &items)
}

/// Phone-level correction: align phone labels (stress-sensitive) and edit phones.
pub fn plan_phone_phone(hyp: &Transcript, target: &[Phone]) -> Result<EditPlan> {
    let phones = hyp.spoken_phones()?;
    let hyp_labels: Vec<&str> = phones.iter().map(|p| p.label.as_str()).collect();
    let target_labels: Vec<String> = target.iter().map(Phone::to_string).collect();
    let target_refs: Vec<&str> = target_labels.iter().map(String::as_str).collect();
    let alignment = align(&hyp_labels, &target_refs);

    let items: Vec<Item> = alignment
        .pairs
        .iter()
        .map(|p| Item {
            op: p.op,
            span: p.hyp_index.map(|h| [phones[h].start, phones[h].end]),
            token: p.target_index.map(|t| target_labels[t].clone()),
        })
        .collect();

    build_plan(hyp, Method::PhonePhone, &items)
}

/// Word-granularity correction driven by a phone-level alignment.
///
/// The target side is spelled out with dictionary pronunciations. A target word
/// stays unchanged only when all of its constituent phones aligned as matches
/// and no stray recognized phones attached to it; otherwise the whole word is
/// edited. Stray (deleted) phone runs attach to the following target word —
/// trailing runs to the last word — so their audio is consumed by that word's
/// replacement.
pub fn plan_word_phone(
    hyp: &Transcript,
    target: &[WordToken],
    dict: &PronunciationDict,
) -> Result<EditPlan> {
    // Target phones, with each index mapped back to its word.
    let mut target_labels: Vec<String> = Vec::new();
    let mut word_of_ref: Vec<usize> = Vec::new();
    for (k, w) in target.iter().enumerate() {
        for p in dict.lookup(w)? {
            target_labels.push(p.to_string());
            word_of_ref.push(k);
        }
    }

    // Recognized phones, each with its owning word when a word tier exists.
    let spoken_words = hyp.spoken_words();
    let mut phones: Vec<TimedUnit> = Vec::new();
    let mut word_of_hyp: Vec<Option<usize>> = Vec::new();
    if hyp.words.is_some() {
        for (wi, w) in spoken_words.iter().enumerate() {
            for p in &w.phones {
                if !p.is_silence() {
                    phones.push(p.clone());
                    word_of_hyp.push(Some(wi));
                }
            }
        }
    } else {
        phones = hyp.spoken_phones()?;
        word_of_hyp = vec![None; phones.len()];
    }

    if target.is_empty() {
        // Nothing should remain: one Delete over all recognized material.
        let items = match material_span(&phones, &word_of_hyp, &spoken_words, (0..phones.len()).collect()) {
            Some(span) => vec![Item { op: EditOp::Delete, span: Some(span), token: None }],
            None => Vec::new(),
        };
        return build_plan(hyp, Method::WordPhone, &items);
    }

    let hyp_labels: Vec<&str> = phones.iter().map(|p| p.label.as_str()).collect();
    let target_refs: Vec<&str> = target_labels.iter().map(String::as_str).collect();
    let alignment = align(&hyp_labels, &target_refs);

    let n_words = target.len();
    let mut modified = vec![false; n_words];
    let mut hyp_sets: Vec<Vec<usize>> = vec![Vec::new(); n_words];
    let mut pending: Vec<usize> = Vec::new();
    for pair in &alignment.pairs {
        match pair {
            AlignedPair { hyp_index: Some(h), target_index: None, .. } => pending.push(*h),
            AlignedPair { target_index: Some(r), hyp_index, op } => {
                let k = word_of_ref[*r];
                if !pending.is_empty() {
                    hyp_sets[k].append(&mut pending);
                    modified[k] = true;
                }
                if let Some(h) = hyp_index {
                    hyp_sets[k].push(*h);
                }
                if *op != EditOp::Unchange {
                    modified[k] = true;
                }
            }
            _ => unreachable!("every pair touches at least one side"),
        }
    }
    if !pending.is_empty() {
        // Trailing stray phones attach to the last target word.
        let k = n_words - 1;
        hyp_sets[k].append(&mut pending);
        modified[k] = true;
    }

    let items: Vec<Item> = (0..n_words)
        .map(|k| {
            let span = material_span(&phones, &word_of_hyp, &spoken_words, hyp_sets[k].clone());
            let op = match (modified[k], span.is_some()) {
                (false, _) => EditOp::Unchange,
                (true, true) => EditOp::Replace,
                (true, false) => EditOp::Insert,
            };
            Item { op, span, token: Some(target[k].as_str().to_string()) }
        })
        .collect();

    build_plan(hyp, Method::WordPhone, &items)
}

/// The audio span a set of recognized phones stands for: the union of the
/// owning word spans when a word tier exists, else the union of the phone spans.
fn material_span(
    phones: &[TimedUnit],
    word_of_hyp: &[Option<usize>],
    spoken_words: &[&crate::timeline::TimedWord],
    set: Vec<usize>,
) -> Option<Span> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for h in set {
        let (s, e) = match word_of_hyp[h] {
            Some(wi) => (spoken_words[wi].word.start, spoken_words[wi].word.end),
            None => (phones[h].start, phones[h].end),
        };
        lo = lo.min(s);
        hi = hi.max(e);
    }
    (lo <= hi).then_some([lo, hi])
}

/// One alignment row (or, for word-phone, one target word) ready for grouping.
struct Item {
    op: EditOp,
    span: Option<Span>,
    token: Option<String>,
}

/// Group adjacent edited items into regions, then complete the plan.
fn build_plan(hyp: &Transcript, method: Method, items: &[Item]) -> Result<EditPlan> {
    let duration = hyp.span_end();
    let mut regions: Vec<EditRegion> = Vec::new();

    let mut i = 0;
    while i < items.len() {
        if items[i].op == EditOp::Unchange {
            i += 1;
            continue;
        }
        let start = i;
        while i < items.len() && items[i].op != EditOp::Unchange {
            i += 1;
        }
        let group = &items[start..i];

        let mut span: Option<Span> = None;
        let mut tokens = Vec::new();
        for item in group {
            if let Some([s, e]) = item.span {
                span = Some(match span {
                    Some([ls, le]) => [ls.min(s), le.max(e)],
                    None => [s, e],
                });
            }
            if let Some(t) = &item.token {
                tokens.push(t.clone());
            }
        }

        let region = match span {
            Some(span) => EditRegion {
                op: if tokens.is_empty() { EditOp::Delete } else { EditOp::Replace },
                orig_span: Some(span),
                anchor: None,
                target_tokens: tokens,
            },
            None => {
                // Insert-only group: anchor mid-gap between the surrounding
                // recognized material, with the utterance edges as fallbacks.
                let before = items[..start].iter().rev().find_map(|it| it.span).map(|s| s[1]);
                let after = items[i..].iter().find_map(|it| it.span).map(|s| s[0]);
                let lo = before.unwrap_or(0.0);
                let hi = after.unwrap_or(duration);
                EditRegion {
                    op: EditOp::Insert,
                    orig_span: None,
                    anchor: Some(round_us((lo + hi) / 2.0)),
                    target_tokens: tokens,
                }
            }
        };
        regions.push(region);
    }

    regions.sort_by(|a, b| a.position().total_cmp(&b.position()));
    let regions = coalesce_overlaps(regions);
    let unchanged_spans = complement(&regions, duration);

    let plan = EditPlan {
        utterance_id: hyp.utterance_id.clone(),
        method,
        granularity: method.granularity(),
        regions,
        unchanged_spans,
    };
    validate_plan(&plan)?;
    Ok(plan)
}

/// Merge regions whose spans strictly overlap (possible when word-phone widens
/// phone sets to whole words). Sorted input, sorted output.
fn coalesce_overlaps(regions: Vec<EditRegion>) -> Vec<EditRegion> {
    let mut out: Vec<EditRegion> = Vec::new();
    for r in regions {
        if let Some(last) = out.last_mut() {
            if r.position() < last.span_end() {
                let s = last.orig_span.map(|s| s[0]).unwrap_or(last.position()).min(r.position());
                let e = last.span_end().max(r.span_end());
                last.orig_span = Some([s, e]);
                last.anchor = None;
                last.target_tokens.extend(r.target_tokens);
                last.op = if last.target_tokens.is_empty() { EditOp::Delete } else { EditOp::Replace };
                continue;
            }
        }
        out.push(r);
    }
    out
}

/// Unedited spans: the complement of the region spans in `[0, duration]`,
/// split at insert anchors so the plan tiles the utterance exactly.
fn complement(regions: &[EditRegion], duration: f64) -> Vec<Span> {
    let mut out = Vec::new();
    let mut cursor = 0.0;
    for r in regions {
        let (s, e) = match r.orig_span {
            Some([s, e]) => (s, e),
            None => {
                let a = r.anchor.expect("insert regions carry an anchor");
                (a, a)
            }
        };
        if s > cursor {
            out.push([cursor, s]);
        }
        cursor = cursor.max(e);
    }
    if duration > cursor {
        out.push([cursor, duration]);
    }
    out
}

/// Check structural invariants: per-op field shape, ordering, non-overlap,
/// and that regions plus unchanged spans tile `[0, duration]`.
pub fn validate_plan(plan: &EditPlan) -> Result<()> {
    let fail = |msg: String| Err(Error::InvalidPlan(msg));
    if plan.granularity != plan.method.granularity() {
        return fail(format!("{} plans must have {:?} granularity", plan.method, plan.method.granularity()));
    }
    for r in &plan.regions {
        match r.op {
            EditOp::Unchange => return fail("regions never carry Unchange".to_string()),
            EditOp::Insert => {
                if r.orig_span.is_some() || r.anchor.is_none() {
                    return fail("insert regions carry an anchor and no span".to_string());
                }
                if r.target_tokens.is_empty() {
                    return fail("insert regions need target tokens".to_string());
                }
            }
            EditOp::Replace | EditOp::Delete => {
                if r.orig_span.is_none() || r.anchor.is_some() {
                    return fail("replace/delete regions carry a span and no anchor".to_string());
                }
                if (r.op == EditOp::Delete) != r.target_tokens.is_empty() {
                    return fail("delete has no tokens; replace has some".to_string());
                }
            }
        }
        if let Some([s, e]) = r.orig_span {
            if !(s.is_finite() && e.is_finite()) || s < 0.0 || e < s {
                return fail(format!("bad region span [{s}, {e}]"));
            }
        }
        if let Some(a) = r.anchor {
            if !a.is_finite() || a < 0.0 {
                return fail(format!("bad insert anchor {a}"));
            }
        }
    }

    // Regions and unchanged spans together must tile [0, duration].
    let mut intervals: Vec<Span> = plan
        .regions
        .iter()
        .map(|r| r.orig_span.unwrap_or_else(|| [r.anchor.unwrap(), r.anchor.unwrap()]))
        .collect();
    for &[s, e] in &plan.unchanged_spans {
        if !(s.is_finite() && e.is_finite()) || s < 0.0 || e < s {
            return fail(format!("bad unchanged span [{s}, {e}]"));
        }
        intervals.push([s, e]);
    }
    intervals.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut cursor = 0.0;
    for [s, e] in intervals {
        if s != cursor {
            return fail(format!("plan does not tile the utterance: gap or overlap at {s} (expected {cursor})"));
        }
        cursor = e;
    }
    Ok(())
}

/// Parse and validate an edit-plan JSON document.
pub fn parse_plan(json: &str) -> Result<EditPlan> {
    let mut plan: EditPlan =
        serde_json::from_str(json).map_err(|e| Error::SchemaError(e.to_string()))?;
    for r in &mut plan.regions {
        if let Some(span) = &mut r.orig_span {
            span[0] = round_us(span[0]);
            span[1] = round_us(span[1]);
        }
        if let Some(a) = &mut r.anchor {
            *a = round_us(*a);
        }
    }
    for s in &mut plan.unchanged_spans {
        s[0] = round_us(s[0]);
        s[1] = round_us(s[1]);
    }
    validate_plan(&plan)?;
    Ok(plan)
}

/// Serialize a plan; `parse_plan(emit_plan(p))` gives `p` back.
pub fn emit_plan(plan: &EditPlan) -> String {
    let mut s = serde_json::to_string_pretty(plan).expect("plans always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{load_dictionary, normalize_text};
    use crate::timeline::TimedWord;

    fn unit(label: &str, start: f64, end: f64) -> TimedUnit {
        TimedUnit::new(label, start, end)
    }

    fn word(label: &str, phones: &[(&str, f64, f64)]) -> TimedWord {
        let units: Vec<TimedUnit> = phones.iter().map(|(l, s, e)| unit(l, *s, *e)).collect();
        TimedWord::new(
            unit(label, units.first().unwrap().start, units.last().unwrap().end),
            units,
        )
    }

    /// "we are heavily" pronounced with W ER0 for "we"; intended "we are not happy".
    fn mispronounced_hyp() -> Transcript {
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
        t.validate().unwrap();
        t
    }

    /// Same words and times, but "we" actually said W IY1.
    fn well_pronounced_hyp() -> Transcript {
        let mut t = mispronounced_hyp();
        t.words.as_mut().unwrap()[0] =
            word("we", &[("W", 0.10, 0.22), ("IY1", 0.22, 0.35)]);
        t.validate().unwrap();
        t
    }

    fn dict() -> PronunciationDict {
        load_dictionary(include_str!("../assets/dict-mini.txt")).unwrap()
    }

    fn target() -> Vec<WordToken> {
        normalize_text("we are not happy")
    }

    #[test]
    fn word_word_trusts_matching_labels() {
        let plan = plan_word_word(&mispronounced_hyp(), &target()).unwrap();
        assert_eq!(plan.granularity, Granularity::Word);
        // "we" and "are" match by label; "heavily" -> Replace merged with the
        // missing "happy", one region.
        assert_eq!(plan.regions.len(), 1);
        let r = &plan.regions[0];
        assert_eq!(r.op, EditOp::Replace);
        assert_eq!(r.orig_span, Some([0.70, 1.30]));
        assert_eq!(r.target_tokens, ["not", "happy"]);
        assert_eq!(plan.unchanged_spans, [[0.0, 0.70]]);
    }

    #[test]
    fn word_phone_catches_the_mispronounced_word() {
        let plan = plan_word_phone(&mispronounced_hyp(), &target(), &dict()).unwrap();
        assert_eq!(plan.granularity, Granularity::Word);
        // "we" said W ER0 instead of W IY1: label matches but a phone differs,
        // so the whole word is replaced. "are" survives.
        assert_eq!(plan.regions.len(), 2);
        assert_eq!(plan.regions[0].op, EditOp::Replace);
        assert_eq!(plan.regions[0].orig_span, Some([0.10, 0.35]));
        assert_eq!(plan.regions[0].target_tokens, ["we"]);
        assert_eq!(plan.regions[1].op, EditOp::Replace);
        assert_eq!(plan.regions[1].orig_span, Some([0.70, 1.30]));
        assert_eq!(plan.regions[1].target_tokens, ["not", "happy"]);
        assert_eq!(plan.unchanged_spans, [[0.0, 0.10], [0.35, 0.70]]);
    }

    #[test]
    fn phone_phone_edits_individual_phones() {
        let hyp = mispronounced_hyp();
        let mut phones = Vec::new();
        for w in target() {
            phones.extend(dict().lookup(&w).unwrap().to_vec());
        }
        let plan = plan_phone_phone(&hyp, &phones).unwrap();
        assert_eq!(plan.granularity, Granularity::Phone);
        // ER0 -> IY1 is its own region; the tail of "heavily" is rewritten but
        // its final IY0 is reused as the IY0 of "happy".
        assert_eq!(plan.regions[0].op, EditOp::Replace);
        assert_eq!(plan.regions[0].orig_span, Some([0.22, 0.35]));
        assert_eq!(plan.regions[0].target_tokens, ["IY1"]);
        let last = plan.regions.last().unwrap();
        assert_eq!(last.orig_span, Some([0.70, 1.20]));
        assert_eq!(last.target_tokens, ["N", "AA1", "T", "HH", "AE1", "P"]);
        assert!(plan.unchanged_spans.contains(&[1.20, 1.30]));
    }

    #[test]
    fn identical_input_plans_no_edits() {
        let hyp = mispronounced_hyp();
        let same = normalize_text("we are heavily");
        let plan = plan_word_word(&hyp, &same).unwrap();
        assert!(plan.regions.is_empty());
        assert_eq!(plan.unchanged_spans, [[0.0, 1.30]]);

        let phones: Vec<Phone> = hyp
            .spoken_phones()
            .unwrap()
            .iter()
            .map(|u| Phone::parse(&u.label).unwrap())
            .collect();
        let plan = plan_phone_phone(&hyp, &phones).unwrap();
        assert!(plan.regions.is_empty());

        let plan = plan_word_phone(&hyp, &target(), &dict()).unwrap();
        assert_eq!(plan.regions.len(), 2); // the genuine edits, nothing more
    }

    #[test]
    fn word_phone_attaches_trailing_stray_phones_to_the_last_word() {
        let hyp = well_pronounced_hyp();
        let plan = plan_word_phone(&hyp, &normalize_text("we are"), &dict()).unwrap();
        // "heavily" has no target counterpart: its phones are stray, attach to
        // the last word "are", so "are" gets re-recorded over the union span.
        assert_eq!(plan.regions.len(), 1);
        assert_eq!(plan.regions[0].op, EditOp::Replace);
        assert_eq!(plan.regions[0].orig_span, Some([0.40, 1.30]));
        assert_eq!(plan.regions[0].target_tokens, ["are"]);
        assert_eq!(plan.unchanged_spans, [[0.0, 0.40]]);
    }

    #[test]
    fn word_word_deletes_extra_words() {
        let plan = plan_word_word(&mispronounced_hyp(), &normalize_text("we are")).unwrap();
        assert_eq!(plan.regions.len(), 1);
        assert_eq!(plan.regions[0].op, EditOp::Delete);
        assert_eq!(plan.regions[0].orig_span, Some([0.70, 1.30]));
        assert!(plan.regions[0].target_tokens.is_empty());
    }

    #[test]
    fn word_word_inserts_at_gap_midpoints() {
        // Target adds a word between "we" and "are": anchor mid-gap at 0.375.
        let hyp = Transcript {
            utterance_id: "u".into(),
            source: Source::Forced,
            frame_rate: None,
            words: Some(vec![
                word("we", &[("W", 0.10, 0.22), ("IY1", 0.22, 0.35)]),
                word("are", &[("AA1", 0.40, 0.50), ("R", 0.50, 0.60)]),
            ]),
            phones: None,
        };
        let plan = plan_word_word(&hyp, &normalize_text("we not are")).unwrap();
        assert_eq!(plan.regions.len(), 1);
        let r = &plan.regions[0];
        assert_eq!(r.op, EditOp::Insert);
        assert_eq!(r.anchor, Some(0.375));
        assert_eq!(r.target_tokens, ["not"]);
        assert_eq!(plan.unchanged_spans, [[0.0, 0.375], [0.375, 0.60]]);
    }

    #[test]
    fn ctc_source_rejects_word_word() {
        let hyp = Transcript {
            utterance_id: "u".into(),
            source: Source::Ctc,
            frame_rate: Some(0.04),
            words: None,
            phones: Some(vec![unit("W", 0.0, 0.08), unit("IY1", 0.08, 0.16)]),
        };
        assert!(matches!(plan_word_word(&hyp, &target()), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn missing_word_tier_is_reported() {
        let hyp = Transcript {
            utterance_id: "u".into(),
            source: Source::Forced,
            frame_rate: None,
            words: None,
            phones: Some(vec![unit("W", 0.0, 0.08)]),
        };
        assert!(matches!(plan_word_word(&hyp, &target()), Err(Error::NoWordTier)));
    }

    #[test]
    fn word_phone_decisions_match_between_word_tier_and_flat_hyp() {
        let tiered = mispronounced_hyp();
        let flat = Transcript {
            utterance_id: "scenario".into(),
            source: Source::Ctc,
            frame_rate: Some(0.04),
            words: None,
            phones: Some(tiered.phone_sequence().unwrap()),
        };
        let a = plan_word_phone(&tiered, &target(), &dict()).unwrap();
        let b = plan_word_phone(&flat, &target(), &dict()).unwrap();
        // Same per-word decisions (ops and tokens)...
        let shape = |p: &EditPlan| {
            p.regions
                .iter()
                .map(|r| (r.op, r.target_tokens.clone()))
                .collect::<Vec<_>>()
        };
        assert_eq!(shape(&a), shape(&b));
        // ...and the edited word is consumed whole in both views: matched
        // phones of a flagged word are re-recorded along with the bad ones.
        assert_eq!(a.regions[0].orig_span, Some([0.10, 0.35]));
        assert_eq!(b.regions[0].orig_span, Some([0.10, 0.35]));
    }

    #[test]
    fn word_phone_rejects_oov_targets() {
        let err = plan_word_phone(&mispronounced_hyp(), &normalize_text("we zzxqq"), &dict());
        assert!(matches!(err, Err(Error::MissingPronunciation(_))));
    }

    #[test]
    fn empty_target_deletes_everything() {
        let plan = plan_word_phone(&mispronounced_hyp(), &[], &dict()).unwrap();
        assert_eq!(plan.regions.len(), 1);
        assert_eq!(plan.regions[0].op, EditOp::Delete);
        assert_eq!(plan.regions[0].orig_span, Some([0.10, 1.30]));

        let plan = plan_word_word(&mispronounced_hyp(), &[]).unwrap();
        assert_eq!(plan.regions.len(), 1);
        assert_eq!(plan.regions[0].op, EditOp::Delete);
    }

    #[test]
    fn empty_hyp_inserts_everything_at_the_front() {
        let hyp = Transcript {
            utterance_id: "u".into(),
            source: Source::Oracle,
            frame_rate: None,
            words: Some(vec![]),
            phones: None,
        };
        let plan = plan_word_word(&hyp, &normalize_text("we are")).unwrap();
        assert_eq!(plan.regions.len(), 1);
        assert_eq!(plan.regions[0].op, EditOp::Insert);
        assert_eq!(plan.regions[0].anchor, Some(0.0));
        assert_eq!(plan.regions[0].target_tokens, ["we", "are"]);
        assert!(plan.unchanged_spans.is_empty());
    }

    #[test]
    fn plans_round_trip_through_json() {
        let plan = plan_word_phone(&mispronounced_hyp(), &target(), &dict()).unwrap();
        let parsed = parse_plan(&emit_plan(&plan)).unwrap();
        assert_eq!(parsed, plan);
    }

    #[test]
    fn validation_rejects_malformed_plans() {
        let mut plan = plan_word_word(&mispronounced_hyp(), &target()).unwrap();
        plan.regions[0].anchor = Some(0.5);
        assert!(matches!(validate_plan(&plan), Err(Error::InvalidPlan(_))));

        let mut plan = plan_word_word(&mispronounced_hyp(), &target()).unwrap();
        plan.unchanged_spans = vec![];
        assert!(matches!(validate_plan(&plan), Err(Error::InvalidPlan(_))));
    }
}
