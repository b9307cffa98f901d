//! ARPAbet phones, text normalization, and pronunciation dictionaries.
//!
//! Phones are the 39 base ARPAbet symbols with optional stress digits 0/1/2
//! on vowels ("AH0", "K"). Dictionaries use the plain text format
//! `WORD  PH1 PH2 ...` with `WORD(2)`-style variant lines and `;;;` comments.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The 39 ARPAbet base symbols, with a vowel flag (stress digits attach to vowels only).
const ARPABET: [(&str, bool); 39] = [
    ("AA", true),
    ("AE", true),
    ("AH", true),
    ("AO", true),
    ("AW", true),
    ("AY", true),
    ("B", false),
    ("CH", false),
    ("D", false),
    ("DH", false),
    ("EH", true),
    ("ER", true),
    ("EY", true),
    ("F", false),
    ("G", false),
    ("HH", false),
    ("IH", true),
    ("IY", true),
    ("JH", false),
    ("K", false),
    ("L", false),
    ("M", false),
    ("N", false),
    ("NG", false),
    ("OW", true),
    ("OY", true),
    ("P", false),
    ("R", false),
    ("S", false),
    ("SH", false),
    ("T", false),
    ("TH", false),
    ("UH", true),
    ("UW", true),
    ("V", false),
    ("W", false),
    ("Y", false),
    ("Z", false),
    ("ZH", false),
];

fn arpabet_lookup(base: &str) -> Option<bool> {
    ARPABET.iter().find(|(s, _)| *s == base).map(|(_, v)| *v)
}

/// One phone: a base symbol plus an optional stress digit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phone {
    base: String,
    stress: Option<u8>,
}

impl Phone {
    /// Parse a textual form like "AH0" or "K".
    pub fn parse(s: &str) -> Result<Phone> {
        let (base, stress) = match s.chars().last() {
            Some(c) if c.is_ascii_digit() => (&s[..s.len() - 1], Some(c as u8 - b'0')),
            _ => (s, None),
        };
        let vowel = arpabet_lookup(base).ok_or_else(|| Error::UnknownPhone(s.to_string()))?;
        match stress {
            Some(d) if d > 2 => return Err(Error::UnknownPhone(s.to_string())),
            Some(_) if !vowel => return Err(Error::UnknownPhone(s.to_string())),
            _ => {}
        }
        Ok(Phone { base: base.to_string(), stress })
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn stress(&self) -> Option<u8> {
        self.stress
    }

    pub fn is_vowel(&self) -> bool {
        arpabet_lookup(&self.base).unwrap_or(false)
    }

    /// The same phone with any stress digit removed. Idempotent.
    pub fn strip_stress(&self) -> Phone {
        Phone { base: self.base.clone(), stress: None }
    }
}

impl FromStr for Phone {
    type Err = Error;

    fn from_str(s: &str) -> Result<Phone> {
        Phone::parse(s)
    }
}

impl fmt::Display for Phone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.stress {
            Some(d) => write!(f, "{}{}", self.base, d),
            None => f.write_str(&self.base),
        }
    }
}

/// A normalized word: non-empty, lowercase, no surrounding punctuation or whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WordToken(String);

impl WordToken {
    /// Wrap an already-normalized word. Use [`normalize_text`] for raw text.
    pub fn new(s: &str) -> Result<WordToken> {
        let tokens = normalize_text(s);
        match tokens.as_slice() {
            [one] if one.as_str() == s => Ok(tokens.into_iter().next().unwrap()),
            _ => Err(Error::InvariantViolation(format!("'{s}' is not a normalized word token"))),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for WordToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Lowercase, split on whitespace, strip surrounding punctuation; intra-word
/// apostrophes survive ("don't"). Tokens that are all punctuation vanish.
pub fn normalize_text(raw: &str) -> Vec<WordToken> {
    raw.split_whitespace()
        .filter_map(|t| {
            let t = t.to_lowercase();
            let t = t.trim_matches(|c: char| !c.is_alphanumeric());
            if t.is_empty() {
                None
            } else {
                Some(WordToken(t.to_string()))
            }
        })
        .collect()
}

/// Word → pronunciation variants, keyed by lowercase word. First variant wins on lookup.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PronunciationDict {
    entries: BTreeMap<String, Vec<Vec<Phone>>>,
}

impl PronunciationDict {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append a pronunciation variant for a word (keyed case-insensitively).
    pub fn insert(&mut self, word: &str, phones: Vec<Phone>) {
        self.entries.entry(word.to_lowercase()).or_default().push(phones);
    }

    /// First pronunciation variant for a word; OOV is a hard error.
    pub fn lookup(&self, word: &WordToken) -> Result<&[Phone]> {
        self.entries
            .get(word.as_str())
            .and_then(|v| v.first())
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::MissingPronunciation(word.as_str().to_string()))
    }

    /// All variants for a word, if any.
    pub fn variants(&self, word: &str) -> Option<&[Vec<Phone>]> {
        self.entries.get(&word.to_lowercase()).map(|v| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }
}

/// Parse dictionary text: `WORD  PH1 PH2 ...` per line, `WORD(2)` marking extra
/// variants, `;;;` starting comment lines. Blank lines are skipped.
pub fn load_dictionary(text: &str) -> Result<PronunciationDict> {
    let mut dict = PronunciationDict::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with(";;;") {
            continue;
        }
        let mut fields = line.split_whitespace();
        let word = fields.next().expect("non-empty line has a first field");
        let phones = fields
            .map(|p| {
                Phone::parse(p).map_err(|_| Error::MalformedLine {
                    line: lineno,
                    reason: format!("unknown phone symbol '{p}'"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if phones.is_empty() {
            return Err(Error::MalformedLine { line: lineno, reason: "no phones".to_string() });
        }
        // "WORD(2)" marks the second and later variants; they group under the base word.
        let base = match word.find('(') {
            Some(i) if word.ends_with(')') && word[i + 1..word.len() - 1].chars().all(|c| c.is_ascii_digit()) => {
                &word[..i]
            }
            _ => word,
        };
        if base.is_empty() {
            return Err(Error::MalformedLine { line: lineno, reason: "empty word".to_string() });
        }
        dict.insert(base, phones);
    }
    Ok(dict)
}

/// Serialize a dictionary back to its text form, words sorted, variants in order.
pub fn emit_dictionary(dict: &PronunciationDict) -> String {
    let mut out = String::new();
    for word in dict.words().map(str::to_string).collect::<Vec<_>>() {
        for (i, variant) in dict.variants(&word).unwrap().iter().enumerate() {
            let phones = variant.iter().map(Phone::to_string).collect::<Vec<_>>().join(" ");
            let upper = word.to_uppercase();
            if i == 0 {
                out.push_str(&format!("{upper}  {phones}\n"));
            } else {
                out.push_str(&format!("{upper}({})  {phones}\n", i + 1));
            }
        }
    }
    out
}
