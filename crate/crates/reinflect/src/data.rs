//! Core domain types and parsers for UniMorph triple files and
//! CoNLL-U-style context corpora.
//!
//! Triple files are UTF-8, tab-separated, one `lemma<TAB>msd<TAB>form`
//! entry per line (the form column is absent or ignored in covered test
//! files). Context corpora are blank-line-separated sentence blocks of
//! `FORM<TAB>LEMMA<TAB>MSD` rows where `_` marks an absent field and the
//! target slot is the row whose FORM is `_` but whose LEMMA is present.
//! Lines starting with `#` are comments and skipped.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A morphosyntactic description: an ordered bundle of feature tags.
///
/// The first tag always names the core part of speech. The canonical
/// text form joins the tags with `;` and round-trips through
/// [`Msd::parse`] unchanged. Equality is exact sequence equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Msd {
    tags: Vec<String>,
}

impl Msd {
    /// Builds an MSD from individual tags, validating that the bundle is
    /// non-empty and no tag is empty or contains `;`.
    pub fn new<I, S>(tags: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tags: Vec<String> = tags.into_iter().map(Into::into).collect();
        if tags.is_empty() {
            return Err(Error::Malformed {
                line: 0,
                msg: "empty feature bundle".into(),
            });
        }
        for tag in &tags {
            if tag.is_empty() || tag.contains(';') {
                return Err(Error::Malformed {
                    line: 0,
                    msg: format!("invalid feature tag {tag:?}"),
                });
            }
        }
        Ok(Msd { tags })
    }

    /// Parses the canonical `;`-joined form, e.g. `V;IND;FUT;3;PL`.
    pub fn parse(text: &str) -> Result<Self> {
        Msd::new(text.split(';'))
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    /// The part-of-speech tag (always the first in the bundle).
    pub fn pos(&self) -> &str {
        &self.tags[0]
    }
}

impl fmt::Display for Msd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tags.join(";"))
    }
}

impl FromStr for Msd {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Msd::parse(s)
    }
}

/// One training or test item: a lemma, a feature bundle and the
/// inflected form. In covered test data the form is unknown and held as
/// an empty string, which no legitimate form can be.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    pub lemma: String,
    pub msd: Msd,
    pub form: String,
}

impl Triple {
    pub fn new(lemma: impl Into<String>, msd: Msd, form: impl Into<String>) -> Self {
        Triple {
            lemma: lemma.into(),
            msd,
            form: form.into(),
        }
    }

    /// True when the form column was withheld (covered test data).
    pub fn is_covered(&self) -> bool {
        self.form.is_empty()
    }
}

/// An ordered collection of triples for one language. File order is
/// preserved; downstream sampling depends on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub language: String,
    pub triples: Vec<Triple>,
}

impl Dataset {
    pub fn new(language: impl Into<String>, triples: Vec<Triple>) -> Self {
        Dataset {
            language: language.into(),
            triples,
        }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

/// Whether a triple file carries gold forms (train) or covered ones (test).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseMode {
    /// Three columns, all required.
    Train,
    /// Two or three columns; the third is ignored and forms stay empty.
    Test,
}

/// Splits raw bytes into lines, validating UTF-8 per line so errors can
/// name the offending line. Line numbers are 1-based.
fn utf8_lines(bytes: &[u8]) -> Result<Vec<(usize, &str)>> {
    let mut out = Vec::new();
    for (idx, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        let text = std::str::from_utf8(raw).map_err(|_| Error::Utf8 { line: idx + 1 })?;
        out.push((idx + 1, text));
    }
    // A trailing newline produces one empty trailing slice; drop it.
    if let Some(&(_, last)) = out.last() {
        if last.is_empty() {
            out.pop();
        }
    }
    Ok(out)
}

/// Parses a UniMorph triple file.
///
/// Returns triples in file order. In test mode the form is left empty
/// regardless of whether a third column is present.
pub fn parse_triples(bytes: &[u8], language: &str, mode: ParseMode) -> Result<Dataset> {
    let mut triples = Vec::new();
    for (line, text) in utf8_lines(bytes)? {
        let cols: Vec<&str> = text.split('\t').collect();
        let ok = match mode {
            ParseMode::Train => cols.len() == 3,
            ParseMode::Test => cols.len() == 2 || cols.len() == 3,
        };
        if !ok {
            return Err(Error::ColumnCount {
                line,
                expected: match mode {
                    ParseMode::Train => "3",
                    ParseMode::Test => "2 or 3",
                },
                found: cols.len(),
            });
        }
        if cols[0].is_empty() {
            return Err(Error::Malformed {
                line,
                msg: "empty lemma".into(),
            });
        }
        let msd = Msd::parse(cols[1]).map_err(|_| Error::Malformed {
            line,
            msg: format!("invalid feature bundle {:?}", cols[1]),
        })?;
        let form = match mode {
            ParseMode::Train => {
                if cols[2].is_empty() {
                    return Err(Error::Malformed {
                        line,
                        msg: "empty inflected form".into(),
                    });
                }
                cols[2].to_string()
            }
            ParseMode::Test => String::new(),
        };
        triples.push(Triple::new(cols[0], msd, form));
    }
    Ok(Dataset::new(language, triples))
}

/// Serializes a dataset back to the triple file format. Covered triples
/// are written with two columns, complete ones with three. Parsing the
/// output reproduces the input byte-for-byte modulo a trailing newline.
pub fn format_triples(dataset: &Dataset) -> String {
    let mut out = String::new();
    for t in &dataset.triples {
        if t.is_covered() {
            out.push_str(&format!("{}\t{}\n", t.lemma, t.msd));
        } else {
            out.push_str(&format!("{}\t{}\t{}\n", t.lemma, t.msd, t.form));
        }
    }
    out
}

/// One token of a context sentence. The surface is empty for the covered
/// target slot of a test sentence (written as `_` on disk).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub lemma: Option<String>,
    pub msd: Option<Msd>,
}

impl Token {
    pub fn new(surface: impl Into<String>, lemma: Option<String>, msd: Option<Msd>) -> Self {
        Token {
            surface: surface.into(),
            lemma,
            msd,
        }
    }
}

/// A sentence with at most one target slot to inflect.
///
/// When the gold form of the target is known it is stored as the target
/// token's surface, and `plausible_forms` (if annotated) always contains
/// it. The plausible list preserves annotation order with the original
/// gold form first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedSentence {
    pub tokens: Vec<Token>,
    pub target_index: Option<usize>,
    pub plausible_forms: Option<Vec<String>>,
}

impl AnnotatedSentence {
    /// The lemma of the target token, when a target exists.
    pub fn target_lemma(&self) -> Option<&str> {
        let idx = self.target_index?;
        self.tokens[idx].lemma.as_deref()
    }

    /// The gold form of the target, when known (non-empty target surface).
    pub fn gold_form(&self) -> Option<&str> {
        let idx = self.target_index?;
        let surface = self.tokens[idx].surface.as_str();
        (!surface.is_empty()).then_some(surface)
    }
}

/// The two supervision levels of the context task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Track {
    /// Context words carry surface, lemma and MSD.
    One,
    /// Only context surfaces are observed; no token carries an MSD.
    Two,
}

/// A token row before field interpretation; shared between the UniMorph
/// corpus parser and the UD conversion path.
pub(crate) struct RawRow {
    pub line: usize,
    pub form: String,
    pub lemma: String,
    pub msd: String,
    pub plausible: Option<String>,
}

pub(crate) struct RawSentence {
    pub rows: Vec<RawRow>,
}

/// Splits a corpus into sentence blocks of raw rows. Comment lines are
/// skipped; blank lines separate sentences. Only the target row (covered
/// FORM with a LEMMA) may carry the optional fourth column listing
/// `|`-separated plausible forms, gold form first.
pub(crate) fn parse_context_rows(bytes: &[u8]) -> Result<Vec<RawSentence>> {
    let mut sentences = Vec::new();
    let mut rows: Vec<RawRow> = Vec::new();
    for (line, text) in utf8_lines(bytes)? {
        if text.is_empty() {
            if !rows.is_empty() {
                sentences.push(RawSentence {
                    rows: std::mem::take(&mut rows),
                });
            }
            continue;
        }
        if text.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = text.split('\t').collect();
        if cols.len() != 3 && cols.len() != 4 {
            return Err(Error::ColumnCount {
                line,
                expected: "3 (or 4 on the target row)",
                found: cols.len(),
            });
        }
        rows.push(RawRow {
            line,
            form: cols[0].to_string(),
            lemma: cols[1].to_string(),
            msd: cols[2].to_string(),
            plausible: cols.get(3).map(|s| s.to_string()),
        });
    }
    if !rows.is_empty() {
        sentences.push(RawSentence { rows });
    }
    Ok(sentences)
}

fn parse_plausible(raw: &str, line: usize) -> Result<Vec<String>> {
    let mut forms = Vec::new();
    for part in raw.split('|') {
        if part.is_empty() {
            return Err(Error::Malformed {
                line,
                msg: "empty entry in plausible-form list".into(),
            });
        }
        if !forms.iter().any(|f| f == part) {
            forms.push(part.to_string());
        }
    }
    Ok(forms)
}

fn sentence_from_rows(sentence: RawSentence, track: Track) -> Result<AnnotatedSentence> {
    let mut tokens = Vec::with_capacity(sentence.rows.len());
    let mut target_index = None;
    let mut plausible_forms = None;
    for (idx, row) in sentence.rows.into_iter().enumerate() {
        let lemma = (row.lemma != "_").then(|| row.lemma.clone());
        let msd = if row.msd == "_" {
            None
        } else {
            if track == Track::Two {
                return Err(Error::TrackMismatch { line: row.line });
            }
            Some(Msd::parse(&row.msd).map_err(|_| Error::Malformed {
                line: row.line,
                msg: format!("invalid feature bundle {:?}", row.msd),
            })?)
        };
        let is_target = row.form == "_";
        if is_target {
            if lemma.is_none() {
                return Err(Error::Malformed {
                    line: row.line,
                    msg: "covered form without a lemma".into(),
                });
            }
            if target_index.is_some() {
                return Err(Error::MultipleTargets { line: row.line });
            }
            target_index = Some(idx);
        } else if track == Track::One && (lemma.is_none() || msd.is_none()) {
            return Err(Error::Malformed {
                line: row.line,
                msg: "track-1 token without lemma or MSD annotation".into(),
            });
        }
        let surface = if is_target {
            match row.plausible {
                Some(raw) => {
                    let forms = parse_plausible(&raw, row.line)?;
                    let gold = forms[0].clone();
                    plausible_forms = Some(forms);
                    gold
                }
                None => String::new(),
            }
        } else {
            if row.plausible.is_some() {
                return Err(Error::Malformed {
                    line: row.line,
                    msg: "plausible-form column on a non-target row".into(),
                });
            }
            row.form
        };
        tokens.push(Token::new(surface, lemma, msd));
    }
    Ok(AnnotatedSentence {
        tokens,
        target_index,
        plausible_forms,
    })
}

/// Parses a context corpus into sentences, validating the annotation
/// level the track allows.
pub fn parse_context_corpus(bytes: &[u8], track: Track) -> Result<Vec<AnnotatedSentence>> {
    parse_context_rows(bytes)?
        .into_iter()
        .map(|s| sentence_from_rows(s, track))
        .collect()
}

/// Serializes sentences back to the corpus format, blank-line separated.
pub fn format_context_corpus(sentences: &[AnnotatedSentence]) -> String {
    let mut out = String::new();
    for (s_idx, sentence) in sentences.iter().enumerate() {
        if s_idx > 0 {
            out.push('\n');
        }
        for (idx, token) in sentence.tokens.iter().enumerate() {
            let is_target = sentence.target_index == Some(idx);
            let form: &str = if is_target { "_" } else { &token.surface };
            let lemma = token.lemma.as_deref().unwrap_or("_");
            let msd = token
                .msd
                .as_ref()
                .map(|m| m.to_string())
                .unwrap_or_else(|| "_".to_string());
            out.push_str(form);
            out.push('\t');
            out.push_str(lemma);
            out.push('\t');
            out.push_str(&msd);
            if is_target {
                if let Some(forms) = &sentence.plausible_forms {
                    out.push('\t');
                    out.push_str(&forms.join("|"));
                }
            }
            out.push('\n');
        }
    }
    out
}

fn language_matches(language: &str, names: &[&str]) -> bool {
    let lower = language.to_ascii_lowercase();
    names.iter().any(|n| *n == lower)
}

/// Applies the per-language lemma conversions: Finnish lemmata lose their
/// `#` morpheme-boundary markers, Russian lemmata are lowercased, and all
/// other languages pass through unchanged.
pub fn normalize_lemma(lemma: &str, language: &str) -> String {
    if language_matches(language, &["fi", "fin", "finnish"]) {
        lemma.chars().filter(|&c| c != '#').collect()
    } else if language_matches(language, &["ru", "rus", "russian"]) {
        lemma.to_lowercase()
    } else {
        lemma.to_string()
    }
}

/// Collects the distinct feature bundles of a dataset.
pub fn msd_set(dataset: &Dataset) -> BTreeSet<&Msd> {
    dataset.triples.iter().map(|t| &t.msd).collect()
}
