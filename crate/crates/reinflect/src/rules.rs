//! The rule-based inflection baseline: lemma/form alignment, prefix and
//! suffix transformation-rule extraction, and rule application with
//! longest-match selection and frequency tie-breaking.
//!
//! From a training pair such as Finnish `koti` -> `kodista` (N;IN+ABL;SG)
//! the extractor produces one suffix rule per lemma suffix length:
//! `"" -> sta`, `i -> ista`, `ti -> dista`, `oti -> odista` and
//! `koti -> kodista`. At generation time the longest rule whose left-hand
//! side matches the input lemma fires, so `luoti` inflects to `luodista`
//! via `oti -> odista`. Prefix changes are handled by a symmetric rule
//! set over the changed prefix region.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::data::{Dataset, Msd, Triple};
use crate::error::{Error, Result};

/// A character-level alignment between a lemma and an inflected form.
///
/// Each pair holds at most one character per side; empty sides mark
/// insertions and deletions. Concatenating the left sides yields the
/// lemma, the right sides the form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub pairs: Vec<(String, String)>,
    cost: usize,
}

impl Alignment {
    /// The unit edit cost of the alignment, equal to the Levenshtein
    /// distance between the two strings.
    pub fn cost(&self) -> usize {
        self.cost
    }
}

/// Aligns a lemma with an inflected form under unit insert, delete and
/// substitute costs.
///
/// Among all minimum-cost alignments the trace deterministically prefers,
/// position by position from the word start, match over substitution over
/// deletion over insertion. This selects the lexicographically smallest
/// operation sequence under that ranking, which keeps stem material
/// aligned early and pushes suffix insertions to the end of the word.
pub fn align(lemma: &str, form: &str) -> Alignment {
    let a: Vec<char> = lemma.chars().collect();
    let b: Vec<char> = form.chars().collect();
    let m = a.len();
    let n = b.len();

    // rest[i][j] = edit distance between a[i..] and b[j..]
    let mut rest = vec![vec![0usize; n + 1]; m + 1];
    for (i, row) in rest.iter_mut().enumerate() {
        row[n] = m - i;
    }
    for (j, cell) in rest[m].iter_mut().enumerate() {
        *cell = n - j;
    }
    for i in (0..m).rev() {
        for j in (0..n).rev() {
            let sub = rest[i + 1][j + 1] + usize::from(a[i] != b[j]);
            rest[i][j] = sub.min(rest[i + 1][j] + 1).min(rest[i][j + 1] + 1);
        }
    }

    let mut pairs = Vec::with_capacity(m.max(n));
    let (mut i, mut j) = (0, 0);
    while i < m || j < n {
        // A zero-cost diagonal always beats substituting a character with
        // itself, so one diagonal test covers both match and substitute.
        if i < m && j < n && rest[i + 1][j + 1] + usize::from(a[i] != b[j]) == rest[i][j] {
            pairs.push((a[i].to_string(), b[j].to_string()));
            i += 1;
            j += 1;
        } else if i < m && rest[i + 1][j] + 1 == rest[i][j] {
            pairs.push((a[i].to_string(), String::new()));
            i += 1;
        } else {
            pairs.push((String::new(), b[j].to_string()));
            j += 1;
        }
    }
    Alignment {
        pairs,
        cost: rest[0][0],
    }
}

/// Whether a rule rewrites material anchored at the end or the start of
/// the word. The anchoring is implicit; stored patterns carry no sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleKind {
    Prefix,
    Suffix,
}

impl RuleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleKind::Prefix => "prefix",
            RuleKind::Suffix => "suffix",
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single edge-anchored transformation rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub kind: RuleKind,
    pub lhs: String,
    pub rhs: String,
}

impl Rule {
    fn suffix(lhs: String, rhs: String) -> Self {
        Rule {
            kind: RuleKind::Suffix,
            lhs,
            rhs,
        }
    }

    fn prefix(lhs: String, rhs: String) -> Self {
        Rule {
            kind: RuleKind::Prefix,
            lhs,
            rhs,
        }
    }
}

/// Extracts the transformation rules licensed by one training triple.
///
/// Suffix rules: one per lemma suffix length `k` in `0..=len(lemma)`,
/// mapping the last `k` lemma characters to the form material aligned to
/// them, extended through end-of-form insertions. Insertions at the very
/// start of the form belong to the prefix side and are never captured by
/// a suffix rule.
///
/// Prefix rules: emitted only when the alignment begins with a changed
/// region (a leading run of non-match pairs). One rule per lemma prefix
/// length `j` in `0..=p`, where `p` extends one anchor character past the
/// changed region, capped at the lemma length.
pub fn extract_rules(triple: &Triple) -> Vec<Rule> {
    let alignment = align(&triple.lemma, &triple.form);
    let pairs = &alignment.pairs;
    let mut rules = Vec::new();

    // Suffix side: walk pairs right to left, emitting after the trailing
    // insertion run and then after every pair that consumes a lemma char.
    let mut lhs = String::new();
    let mut rhs = String::new();
    let mut emitted_k0 = false;
    for (ls, fs) in pairs.iter().rev() {
        if !emitted_k0 && !ls.is_empty() {
            rules.push(Rule::suffix(lhs.clone(), rhs.clone()));
            emitted_k0 = true;
        }
        lhs.insert_str(0, ls);
        rhs.insert_str(0, fs);
        if !ls.is_empty() {
            rules.push(Rule::suffix(lhs.clone(), rhs.clone()));
        }
    }
    if !emitted_k0 {
        // Lemma contributed no characters at all (empty lemma).
        rules.push(Rule::suffix(lhs, rhs));
    }

    // Prefix side: only when the word start changed.
    let leading_changed_chars: usize = pairs
        .iter()
        .take_while(|(ls, fs)| ls != fs)
        .map(|(ls, _)| ls.chars().count())
        .sum();
    let has_leading_change = pairs.first().is_some_and(|(ls, fs)| ls != fs);
    if has_leading_change {
        let lemma_len = triple.lemma.chars().count();
        let max_j = (leading_changed_chars + 1).min(lemma_len);
        let mut lhs = String::new();
        let mut rhs = String::new();
        let mut j = 0;
        let mut iter = pairs.iter().peekable();
        // The leading insertion run belongs to every prefix rule.
        while let Some((ls, fs)) = iter.peek() {
            if !ls.is_empty() {
                break;
            }
            rhs.push_str(fs);
            iter.next();
        }
        rules.push(Rule::prefix(lhs.clone(), rhs.clone()));
        for (ls, fs) in iter {
            rhs.push_str(fs);
            if !ls.is_empty() {
                lhs.push_str(ls);
                j += 1;
                rules.push(Rule::prefix(lhs.clone(), rhs.clone()));
                if j == max_j {
                    break;
                }
            }
        }
    }

    rules
}

type RhsCounts = BTreeMap<String, u64>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct MsdRules {
    suffix: HashMap<String, RhsCounts>,
    prefix: HashMap<String, RhsCounts>,
}

impl MsdRules {
    fn bucket(&mut self, kind: RuleKind) -> &mut HashMap<String, RhsCounts> {
        match kind {
            RuleKind::Prefix => &mut self.prefix,
            RuleKind::Suffix => &mut self.suffix,
        }
    }
}

/// The record of which rules fired during one application.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Application {
    pub output: String,
    pub suffix_rule: Option<Rule>,
    pub prefix_rule: Option<Rule>,
}

/// Transformation rules learned from training data, keyed by exact
/// feature bundle. Immutable once trained; application is read-only.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleTable {
    pub language: String,
    rules: HashMap<Msd, MsdRules>,
}

impl RuleTable {
    fn add(&mut self, msd: &Msd, rule: Rule) {
        let entry = self
            .rules
            .entry(msd.clone())
            .or_default()
            .bucket(rule.kind)
            .entry(rule.lhs)
            .or_default()
            .entry(rule.rhs)
            .or_insert(0);
        *entry += 1;
    }

    /// The number of distinct (MSD, kind, lhs, rhs) rules stored.
    pub fn rule_count(&self) -> usize {
        self.rules
            .values()
            .map(|r| {
                r.suffix.values().map(BTreeMap::len).sum::<usize>()
                    + r.prefix.values().map(BTreeMap::len).sum::<usize>()
            })
            .sum()
    }

    /// The stored count for one rule, if present.
    pub fn count(&self, msd: &Msd, kind: RuleKind, lhs: &str, rhs: &str) -> Option<u64> {
        let msd_rules = self.rules.get(msd)?;
        let bucket = match kind {
            RuleKind::Prefix => &msd_rules.prefix,
            RuleKind::Suffix => &msd_rules.suffix,
        };
        bucket.get(lhs)?.get(rhs).copied()
    }

    /// Inflects a lemma for a feature bundle, reporting which rules fired.
    ///
    /// The best-matching suffix rule is applied first: among rules stored
    /// under exactly this MSD whose left side is a suffix of the lemma,
    /// the longest left side wins, then the highest count, then the
    /// lexicographically smallest replacement. The analogous prefix rule,
    /// matched against the part of the lemma the suffix rule left intact,
    /// is applied to the result. An unseen MSD copies the lemma.
    pub fn apply_detailed(&self, lemma: &str, msd: &Msd) -> Application {
        let Some(msd_rules) = self.rules.get(msd) else {
            return Application {
                output: lemma.to_string(),
                suffix_rule: None,
                prefix_rule: None,
            };
        };
        let chars: Vec<char> = lemma.chars().collect();

        let suffix_rule = longest_match(&msd_rules.suffix, &chars, RuleKind::Suffix);
        let (mut output, stem_len) = match &suffix_rule {
            Some(rule) => {
                let keep = chars.len() - rule.lhs.chars().count();
                let stem: String = chars[..keep].iter().collect();
                (format!("{stem}{}", rule.rhs), keep)
            }
            None => (lemma.to_string(), chars.len()),
        };

        let stem = &chars[..stem_len];
        let prefix_rule = longest_match(&msd_rules.prefix, stem, RuleKind::Prefix);
        if let Some(rule) = &prefix_rule {
            let cut: usize = output
                .chars()
                .take(rule.lhs.chars().count())
                .map(char::len_utf8)
                .sum();
            output = format!("{}{}", rule.rhs, &output[cut..]);
        }

        Application {
            output,
            suffix_rule,
            prefix_rule,
        }
    }

    /// Inflects a lemma for a feature bundle. Total: unseen bundles fall
    /// back to copying the lemma.
    pub fn apply(&self, lemma: &str, msd: &Msd) -> String {
        self.apply_detailed(lemma, msd).output
    }

    /// Serializes the table as sorted `MSD<TAB>kind<TAB>lhs<TAB>rhs<TAB>count`
    /// lines.
    pub fn to_tsv(&self) -> String {
        let mut lines: Vec<String> = Vec::with_capacity(self.rule_count());
        for (msd, msd_rules) in &self.rules {
            for (kind, bucket) in [
                (RuleKind::Prefix, &msd_rules.prefix),
                (RuleKind::Suffix, &msd_rules.suffix),
            ] {
                for (lhs, rhs_counts) in bucket {
                    for (rhs, count) in rhs_counts {
                        lines.push(format!("{msd}\t{kind}\t{lhs}\t{rhs}\t{count}"));
                    }
                }
            }
        }
        lines.sort_unstable();
        let mut out = lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }

    /// Parses a table serialized by [`RuleTable::to_tsv`].
    pub fn from_tsv(bytes: &[u8], language: &str) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|_| Error::Utf8 { line: 0 })?;
        let mut table = RuleTable {
            language: language.to_string(),
            rules: HashMap::new(),
        };
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 5 {
                return Err(Error::ColumnCount {
                    line: line_no,
                    expected: "5",
                    found: cols.len(),
                });
            }
            let msd = Msd::parse(cols[0]).map_err(|_| Error::Malformed {
                line: line_no,
                msg: format!("invalid feature bundle {:?}", cols[0]),
            })?;
            let kind = match cols[1] {
                "prefix" => RuleKind::Prefix,
                "suffix" => RuleKind::Suffix,
                other => {
                    return Err(Error::Malformed {
                        line: line_no,
                        msg: format!("unknown rule kind {other:?}"),
                    })
                }
            };
            let count: u64 = cols[4].parse().map_err(|_| Error::Malformed {
                line: line_no,
                msg: format!("invalid count {:?}", cols[4]),
            })?;
            if count == 0 {
                return Err(Error::Malformed {
                    line: line_no,
                    msg: "rule count must be at least 1".into(),
                });
            }
            *table
                .rules
                .entry(msd)
                .or_default()
                .bucket(kind)
                .entry(cols[2].to_string())
                .or_default()
                .entry(cols[3].to_string())
                .or_insert(0) += count;
        }
        Ok(table)
    }
}

/// Finds the best rule in a bucket for the given word edge: longest
/// matching lhs, then highest count, then lexicographically smallest rhs.
fn longest_match(
    bucket: &HashMap<String, RhsCounts>,
    chars: &[char],
    kind: RuleKind,
) -> Option<Rule> {
    if bucket.is_empty() {
        return None;
    }
    for len in (0..=chars.len()).rev() {
        let lhs: String = match kind {
            RuleKind::Suffix => chars[chars.len() - len..].iter().collect(),
            RuleKind::Prefix => chars[..len].iter().collect(),
        };
        if let Some(rhs_counts) = bucket.get(&lhs) {
            let (rhs, _) = rhs_counts
                .iter()
                .max_by(|(ra, ca), (rb, cb)| ca.cmp(cb).then_with(|| rb.cmp(ra)))
                .expect("rule buckets are never empty");
            return Some(Rule {
                kind,
                lhs,
                rhs: rhs.clone(),
            });
        }
    }
    None
}

/// Trains a rule table from a dataset by extracting and counting the
/// rules of every triple.
pub fn train(dataset: &Dataset) -> Result<RuleTable> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut table = RuleTable {
        language: dataset.language.clone(),
        rules: HashMap::new(),
    };
    for triple in &dataset.triples {
        for rule in extract_rules(triple) {
            table.add(&triple.msd, rule);
        }
    }
    Ok(table)
}
