//! Context-task data construction: UD-to-UniMorph tag conversion,
//! candidate-sentence selection against a UniMorph lexicon, track-2
//! stripping, and the lemma-copying baseline.

use std::collections::{BTreeSet, HashMap};

use crate::data::{
    normalize_lemma, parse_context_rows, AnnotatedSentence, Dataset, Msd, Token,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum FeatureMapping {
    Tag { tag: String, rank: u32 },
    Drop,
}

/// Deterministic conversion rules from UD annotations to UniMorph tags,
/// loaded from a tab-separated table.
///
/// Feature rows read `UD_KEY=VALUE<TAB>TAG<TAB>RANK`, where a tag of `-`
/// drops the feature. Part-of-speech rows read `POS:<UDPOS><TAB>TAG`.
/// Blank lines and `#` comments are skipped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MsdMappingTable {
    features: HashMap<String, FeatureMapping>,
    pos: HashMap<String, String>,
}

impl MsdMappingTable {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|_| Error::Utf8 { line: 0 })?;
        let mut table = MsdMappingTable::default();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if let Some(ud_pos) = cols[0].strip_prefix("POS:") {
                if cols.len() != 2 || cols[1].is_empty() {
                    return Err(Error::Malformed {
                        line: line_no,
                        msg: "part-of-speech rows need exactly one tag column".into(),
                    });
                }
                if table.pos.insert(ud_pos.to_string(), cols[1].to_string()).is_some() {
                    return Err(Error::Malformed {
                        line: line_no,
                        msg: format!("duplicate part-of-speech entry {ud_pos:?}"),
                    });
                }
                continue;
            }
            if cols.len() != 3 {
                return Err(Error::ColumnCount {
                    line: line_no,
                    expected: "3",
                    found: cols.len(),
                });
            }
            let mapping = if cols[1] == "-" {
                FeatureMapping::Drop
            } else {
                let rank: u32 = cols[2].parse().map_err(|_| Error::Malformed {
                    line: line_no,
                    msg: format!("invalid rank {:?}", cols[2]),
                })?;
                FeatureMapping::Tag {
                    tag: cols[1].to_string(),
                    rank,
                }
            };
            if table.features.insert(cols[0].to_string(), mapping).is_some() {
                return Err(Error::Malformed {
                    line: line_no,
                    msg: format!("duplicate feature entry {:?}", cols[0]),
                });
            }
        }
        Ok(table)
    }

    /// Converts one UD annotation to a UniMorph bundle: the mapped
    /// part-of-speech tag first, then the mapped features in table rank
    /// order. Features without a mapping (or mapped to `-`) are dropped;
    /// duplicate resulting tags are kept once. The part of speech must
    /// be mapped.
    pub fn convert(&self, ud_pos: &str, ud_feats: &str) -> Result<Msd> {
        let pos = self.pos.get(ud_pos).ok_or_else(|| Error::UnmappedPos {
            pos: ud_pos.to_string(),
        })?;
        let mut mapped: Vec<(u32, &str)> = Vec::new();
        if ud_feats != "_" && !ud_feats.is_empty() {
            for feat in ud_feats.split('|') {
                if let Some(FeatureMapping::Tag { tag, rank }) = self.features.get(feat) {
                    mapped.push((*rank, tag));
                }
            }
        }
        mapped.sort();
        let mut tags: Vec<&str> = vec![pos];
        for (_, tag) in mapped {
            if !tags.contains(&tag) {
                tags.push(tag);
            }
        }
        Msd::new(tags)
    }
}

/// Free-function form of [`MsdMappingTable::convert`].
pub fn convert_msd(ud_pos: &str, ud_feats: &str, table: &MsdMappingTable) -> Result<Msd> {
    table.convert(ud_pos, ud_feats)
}

/// Exact-lookup index over the (form, lemma, MSD) triples of a UniMorph
/// dataset. Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    tables: HashMap<(String, Msd), BTreeSet<String>>,
}

impl Lexicon {
    /// Indexes a dataset, skipping covered triples.
    pub fn from_dataset(dataset: &Dataset) -> Self {
        let mut tables: HashMap<(String, Msd), BTreeSet<String>> = HashMap::new();
        for t in &dataset.triples {
            if t.is_covered() {
                continue;
            }
            tables
                .entry((t.lemma.clone(), t.msd.clone()))
                .or_default()
                .insert(t.form.clone());
        }
        Lexicon { tables }
    }

    /// True when the exact (form, lemma, MSD) combination occurs in one
    /// inflection table.
    pub fn contains(&self, form: &str, lemma: &str, msd: &Msd) -> bool {
        self.forms(lemma, msd).is_some_and(|set| set.contains(form))
    }

    pub fn forms(&self, lemma: &str, msd: &Msd) -> Option<&BTreeSet<String>> {
        self.tables.get(&(lemma.to_string(), msd.clone()))
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }
}

/// Selects the sentences eligible for the context task: those containing
/// a fully annotated token whose form, lemma and MSD occur together in
/// the lexicon. Returns each retained sentence with its eligible target
/// positions; sentences with none are excluded.
pub fn select_candidates<'a>(
    sentences: &'a [AnnotatedSentence],
    lexicon: &Lexicon,
) -> Vec<(&'a AnnotatedSentence, Vec<usize>)> {
    let mut out = Vec::new();
    for sentence in sentences {
        let positions: Vec<usize> = sentence
            .tokens
            .iter()
            .enumerate()
            .filter_map(|(idx, token)| {
                let lemma = token.lemma.as_deref()?;
                let msd = token.msd.as_ref()?;
                (!token.surface.is_empty() && lexicon.contains(&token.surface, lemma, msd))
                    .then_some(idx)
            })
            .collect();
        if !positions.is_empty() {
            out.push((sentence, positions));
        }
    }
    out
}

/// The lemma-copying baseline: predicts the normalized target lemma,
/// independent of any training data.
pub fn copy_baseline(sentence: &AnnotatedSentence, language: &str) -> Result<String> {
    let lemma = sentence.target_lemma().ok_or(Error::NoTarget)?;
    Ok(normalize_lemma(lemma, language))
}

/// Reduces a fully annotated sentence to track-2 supervision: all MSDs
/// are removed and only the target token keeps its lemma. Surfaces are
/// never altered; the operation is idempotent.
pub fn strip_to_track2(sentence: &AnnotatedSentence) -> AnnotatedSentence {
    let tokens = sentence
        .tokens
        .iter()
        .enumerate()
        .map(|(idx, token)| Token {
            surface: token.surface.clone(),
            lemma: if sentence.target_index == Some(idx) {
                token.lemma.clone()
            } else {
                None
            },
            msd: None,
        })
        .collect();
    AnnotatedSentence {
        tokens,
        target_index: sentence.target_index,
        plausible_forms: sentence.plausible_forms.clone(),
    }
}

/// Parses a context corpus whose MSD column carries UD annotations of
/// the form `UPOS` or `UPOS|Key=Value|...`, converting every annotation
/// through the mapping table and normalizing lemmata for the language.
/// The output is track-1 style: fully annotated with UniMorph bundles.
pub fn convert_ud_corpus(
    bytes: &[u8],
    table: &MsdMappingTable,
    language: &str,
) -> Result<Vec<AnnotatedSentence>> {
    let mut sentences = Vec::new();
    for raw in parse_context_rows(bytes)? {
        let mut tokens = Vec::with_capacity(raw.rows.len());
        let mut target_index = None;
        for (idx, row) in raw.rows.into_iter().enumerate() {
            if row.plausible.is_some() {
                return Err(Error::Malformed {
                    line: row.line,
                    msg: "plausible-form column in a conversion input".into(),
                });
            }
            let lemma = (row.lemma != "_").then(|| normalize_lemma(&row.lemma, language));
            let msd = if row.msd == "_" {
                None
            } else {
                let (pos, feats) = match row.msd.split_once('|') {
                    Some((pos, feats)) => (pos, feats),
                    None => (row.msd.as_str(), "_"),
                };
                Some(table.convert(pos, feats).map_err(|e| match e {
                    Error::UnmappedPos { pos } => Error::Malformed {
                        line: row.line,
                        msg: format!("part-of-speech tag {pos:?} has no mapping entry"),
                    },
                    other => other,
                })?)
            };
            if row.form == "_" {
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
                tokens.push(Token::new("", lemma, msd));
            } else {
                tokens.push(Token::new(row.form, lemma, msd));
            }
        }
        sentences.push(AnnotatedSentence {
            tokens,
            target_index,
            plausible_forms: None,
        });
    }
    Ok(sentences)
}
