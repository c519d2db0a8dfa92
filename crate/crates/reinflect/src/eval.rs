//! Metrics and analyses: per-form accuracy, average Levenshtein
//! distance, relaxed plausible-form accuracy, macro-aggregation over
//! languages, ensemble and feature-combination oracles, and pairwise
//! exact sign tests with significance marks.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::data::{AnnotatedSentence, Dataset};
use crate::error::{Error, Result};

/// Items with more plausible alternatives than this are filtered from
/// relaxed-evaluation test sets.
pub const DEFAULT_MAX_PLAUSIBLE: usize = 5;

/// One system's predictions, aligned index-wise with a gold dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionSet {
    pub system_id: String,
    pub predictions: Vec<String>,
}

impl PredictionSet {
    pub fn new(system_id: impl Into<String>, predictions: Vec<String>) -> Self {
        PredictionSet {
            system_id: system_id.into(),
            predictions,
        }
    }

    /// Reads one prediction per line. Empty lines are kept as empty
    /// predictions so the alignment with the gold data is preserved.
    pub fn parse(bytes: &[u8], system_id: &str) -> Result<Self> {
        let mut predictions = Vec::new();
        for (idx, raw) in bytes.split(|&b| b == b'\n').enumerate() {
            let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
            let text = std::str::from_utf8(raw).map_err(|_| Error::Utf8 { line: idx + 1 })?;
            predictions.push(text.to_string());
        }
        if predictions.last().is_some_and(String::is_empty) {
            predictions.pop();
        }
        Ok(PredictionSet::new(system_id, predictions))
    }

    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }
}

/// Levenshtein distance over Unicode scalar values with unit costs.
/// No case folding or normalization is applied.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            curr[j + 1] = sub.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Accuracy (percentage points) and average Levenshtein distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub avg_levenshtein: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relaxed_accuracy: Option<f64>,
}

impl Metrics {
    pub fn new(accuracy: f64, avg_levenshtein: f64) -> Self {
        Metrics {
            accuracy,
            avg_levenshtein,
            relaxed_accuracy: None,
        }
    }
}

fn check_lengths(gold: usize, predictions: usize) -> Result<()> {
    if gold != predictions {
        return Err(Error::LengthMismatch { gold, predictions });
    }
    Ok(())
}

/// Scores predictions against gold forms: exact-match accuracy and mean
/// Levenshtein distance. An empty gold set scores vacuously perfect.
pub fn score(gold: &Dataset, preds: &PredictionSet) -> Result<Metrics> {
    score_forms(
        &gold
            .triples
            .iter()
            .map(|t| t.form.as_str())
            .collect::<Vec<_>>(),
        preds,
    )
}

/// Scores predictions against a plain list of gold forms.
pub fn score_forms(gold: &[&str], preds: &PredictionSet) -> Result<Metrics> {
    check_lengths(gold.len(), preds.len())?;
    if gold.is_empty() {
        return Ok(Metrics::new(100.0, 0.0));
    }
    let n = gold.len() as f64;
    let mut correct = 0usize;
    let mut total_distance = 0usize;
    for (g, p) in gold.iter().zip(&preds.predictions) {
        if *g == p {
            correct += 1;
        } else {
            total_distance += levenshtein(g, p);
        }
    }
    Ok(Metrics::new(
        100.0 * correct as f64 / n,
        total_distance as f64 / n,
    ))
}

/// Relaxed accuracy: the percentage of predictions contained in the
/// item's plausible-form set. Every item must carry a plausible set.
pub fn score_relaxed(gold: &[AnnotatedSentence], preds: &PredictionSet) -> Result<f64> {
    check_lengths(gold.len(), preds.len())?;
    if gold.is_empty() {
        return Ok(100.0);
    }
    let mut correct = 0usize;
    for (index, (sentence, pred)) in gold.iter().zip(&preds.predictions).enumerate() {
        let forms = sentence
            .plausible_forms
            .as_ref()
            .ok_or(Error::MissingPlausibleForms { index })?;
        if forms.iter().any(|f| f == pred) {
            correct += 1;
        }
    }
    Ok(100.0 * correct as f64 / gold.len() as f64)
}

/// Drops items with more than `max_alternatives` plausible forms. Items
/// without a plausible annotation are kept.
pub fn filter_plausible(
    items: Vec<AnnotatedSentence>,
    max_alternatives: usize,
) -> Vec<AnnotatedSentence> {
    items
        .into_iter()
        .filter(|s| {
            s.plausible_forms
                .as_ref()
                .is_none_or(|forms| forms.len() <= max_alternatives)
        })
        .collect()
}

fn correctness(gold: &Dataset, preds: &PredictionSet) -> Result<Vec<bool>> {
    check_lengths(gold.len(), preds.len())?;
    Ok(gold
        .triples
        .iter()
        .zip(&preds.predictions)
        .map(|(t, p)| t.form == *p)
        .collect())
}

/// Per-item correctness of the ensemble oracle: true where any system
/// predicted the gold form.
pub fn oracle_ensemble_vector(gold: &Dataset, systems: &[PredictionSet]) -> Result<Vec<bool>> {
    if systems.is_empty() {
        return Err(Error::NoSystems);
    }
    let mut union = vec![false; gold.len()];
    for system in systems {
        for (slot, hit) in union.iter_mut().zip(correctness(gold, system)?) {
            *slot = *slot || hit;
        }
    }
    Ok(union)
}

fn percentage(hits: &[bool]) -> f64 {
    if hits.is_empty() {
        return 100.0;
    }
    100.0 * hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64
}

/// Upper bound on ensembling: accuracy of an oracle that answers
/// correctly wherever at least one submitted system is correct.
pub fn oracle_ensemble(gold: &Dataset, systems: &[PredictionSet]) -> Result<f64> {
    Ok(percentage(&oracle_ensemble_vector(gold, systems)?))
}

/// Per-item correctness of the feature-combination oracle: true where
/// the test item's exact feature bundle occurred in training.
pub fn oracle_feature_combination_vector(train: &Dataset, test: &Dataset) -> Vec<bool> {
    let seen: BTreeSet<_> = train.triples.iter().map(|t| &t.msd).collect();
    test.triples
        .iter()
        .map(|t| seen.contains(&t.msd))
        .collect()
}

/// Upper bound for systems that treat feature bundles as atomic: the
/// percentage of test items whose bundle was seen in training.
pub fn oracle_feature_combination(train: &Dataset, test: &Dataset) -> f64 {
    percentage(&oracle_feature_combination_vector(train, test))
}

/// Two-sided exact binomial sign test on paired correctness indicators.
///
/// Items where both systems are correct or both incorrect are discarded.
/// With `n` discordant items and `k` the smaller win count, the p-value
/// is `2 * sum_{i=0..=k} C(n,i) / 2^n`, clamped to 1. No discordant
/// items gives `p = 1`.
pub fn sign_test_indicators(a: &[bool], b: &[bool]) -> Result<f64> {
    check_lengths(a.len(), b.len())?;
    let mut wins_a = 0u64;
    let mut wins_b = 0u64;
    for (&ca, &cb) in a.iter().zip(b) {
        match (ca, cb) {
            (true, false) => wins_a += 1,
            (false, true) => wins_b += 1,
            _ => {}
        }
    }
    let n = wins_a + wins_b;
    if n == 0 {
        return Ok(1.0);
    }
    let k = wins_a.min(wins_b);
    Ok((2.0 * binomial_half_cdf(n, k)).min(1.0))
}

/// P(X <= k) for X ~ Binomial(n, 1/2).
///
/// Exact integer arithmetic up to n = 120 (the binomial sums fit in
/// u128); beyond that the terms are summed in floating point from a
/// log-space anchor at the largest term.
fn binomial_half_cdf(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    if n <= 120 {
        let mut coeff: u128 = 1; // C(n, 0)
        let mut sum: u128 = 1;
        for i in 1..=k {
            coeff = coeff * (n - i + 1) as u128 / i as u128;
            sum += coeff;
        }
        return sum as f64 / 2f64.powi(n as i32);
    }
    // ln C(n, k) - n ln 2, then walk the terms downward from i = k.
    let mut ln_term = -(n as f64) * std::f64::consts::LN_2;
    for j in 1..=k {
        ln_term += ((n - k + j) as f64).ln() - (j as f64).ln();
    }
    let mut term = ln_term.exp();
    let mut sum = 0.0;
    let mut i = k;
    loop {
        sum += term;
        if i == 0 || term < sum * 1e-18 {
            break;
        }
        term *= i as f64 / (n - i + 1) as f64;
        i -= 1;
    }
    sum
}

/// Sign test between two systems' predictions over one gold set.
pub fn sign_test(gold: &Dataset, a: &PredictionSet, b: &PredictionSet) -> Result<f64> {
    sign_test_indicators(&correctness(gold, a)?, &correctness(gold, b)?)
}

/// Per-item correctness of the two oracles, as consumed by
/// [`significance_marks`]. The feature-combination vector is optional:
/// computing it needs the training data, which a comparison run may not
/// have.
#[derive(Debug, Clone)]
pub struct OracleVectors {
    pub ensemble: Vec<bool>,
    pub feature_combination: Option<Vec<bool>>,
}

/// The significance marks of one system.
///
/// `bold`: best system, or not significantly different from it.
/// `dagger`: significantly better than the feature-combination oracle.
/// `double_dagger`: not significantly different from the ensemble oracle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Marks {
    pub bold: bool,
    pub dagger: bool,
    pub double_dagger: bool,
}

impl Marks {
    /// Compact text form for reports, e.g. `bold,dagger`.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.bold {
            parts.push("bold");
        }
        if self.dagger {
            parts.push("dagger");
        }
        if self.double_dagger {
            parts.push("ddagger");
        }
        parts.join(",")
    }
}

/// Computes bold/dagger/double-dagger marks for every system via sign
/// tests against the top-accuracy system and the oracle vectors.
pub fn significance_marks(
    gold: &Dataset,
    systems: &[PredictionSet],
    oracles: &OracleVectors,
    alpha: f64,
) -> Result<BTreeMap<String, Marks>> {
    if systems.is_empty() {
        return Err(Error::NoSystems);
    }
    let vectors: Vec<Vec<bool>> = systems
        .iter()
        .map(|s| correctness(gold, s))
        .collect::<Result<_>>()?;
    check_lengths(gold.len(), oracles.ensemble.len())?;
    if let Some(fc) = &oracles.feature_combination {
        check_lengths(gold.len(), fc.len())?;
    }

    let hits = |v: &[bool]| v.iter().filter(|&&h| h).count();
    let best = vectors
        .iter()
        .enumerate()
        .max_by_key(|(idx, v)| (hits(v), std::cmp::Reverse(*idx)))
        .map(|(idx, _)| idx)
        .expect("at least one system");

    let mut marks = BTreeMap::new();
    for (system, vector) in systems.iter().zip(&vectors) {
        let bold = sign_test_indicators(vector, &vectors[best])? >= alpha;
        let dagger = match &oracles.feature_combination {
            Some(fc) => hits(vector) > hits(fc) && sign_test_indicators(vector, fc)? < alpha,
            None => false,
        };
        let double_dagger = sign_test_indicators(vector, &oracles.ensemble)? >= alpha;
        marks.insert(
            system.system_id.clone(),
            Marks {
                bold,
                dagger,
                double_dagger,
            },
        );
    }
    Ok(marks)
}

/// Scores of one system, per language and macro-averaged.
#[derive(Debug, Clone, Serialize)]
pub struct SystemReport {
    pub system: String,
    pub per_language: BTreeMap<String, Metrics>,
    pub aggregate: Metrics,
    /// False for partial submissions that skipped some language; their
    /// aggregate is not comparable and is greyed in reports.
    pub complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marks: Option<Marks>,
}

impl SystemReport {
    /// Builds a report block from per-language scores, macro-averaging
    /// with every language weighted equally. `expected_languages` is the
    /// full language set of the evaluation; systems that miss one are
    /// flagged incomplete.
    pub fn new(
        system: impl Into<String>,
        per_language: BTreeMap<String, Metrics>,
        expected_languages: &BTreeSet<String>,
    ) -> Self {
        let n = per_language.len().max(1) as f64;
        let accuracy = per_language.values().map(|m| m.accuracy).sum::<f64>() / n;
        let avg_levenshtein = per_language.values().map(|m| m.avg_levenshtein).sum::<f64>() / n;
        let relaxed: Vec<f64> = per_language
            .values()
            .filter_map(|m| m.relaxed_accuracy)
            .collect();
        let aggregate = Metrics {
            accuracy,
            avg_levenshtein,
            relaxed_accuracy: (relaxed.len() == per_language.len() && !relaxed.is_empty())
                .then(|| relaxed.iter().sum::<f64>() / n),
        };
        let complete = expected_languages
            .iter()
            .all(|l| per_language.contains_key(l));
        SystemReport {
            system: system.into(),
            per_language,
            aggregate,
            complete,
            marks: None,
        }
    }
}

/// A pairwise sign-test result.
#[derive(Debug, Clone, Serialize)]
pub struct SignificanceEntry {
    pub system_a: String,
    pub system_b: String,
    pub p_value: f64,
}

/// The assembled evaluation report: per-system scores, oracle
/// accuracies and pairwise significance.
#[derive(Debug, Clone, Default, Serialize)]
pub struct EvalReport {
    pub systems: Vec<SystemReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_e: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_fc: Option<f64>,
    pub significance: Vec<SignificanceEntry>,
}

impl Default for Metrics {
    fn default() -> Self {
        Metrics::new(0.0, 0.0)
    }
}

impl EvalReport {
    /// Tab-separated report: one row per system and language plus an
    /// `all` aggregate row. Percentages print with two decimals; the
    /// JSON form keeps full precision.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "# sign test: two-sided exact binomial on per-item correctness, ties discarded\n\
             system\tlanguage\taccuracy\tavg_levenshtein\tmarks\n",
        );
        for report in &self.systems {
            let marks = report.marks.map(|m| m.label()).unwrap_or_default();
            for (language, metrics) in &report.per_language {
                out.push_str(&format!(
                    "{}\t{}\t{:.2}\t{:.2}\t{}\n",
                    report.system, language, metrics.accuracy, metrics.avg_levenshtein, marks
                ));
            }
            let mut aggregate_marks = marks;
            if !report.complete {
                if !aggregate_marks.is_empty() {
                    aggregate_marks.push(',');
                }
                aggregate_marks.push_str("partial");
            }
            out.push_str(&format!(
                "{}\tall\t{:.2}\t{:.2}\t{}\n",
                report.system,
                report.aggregate.accuracy,
                report.aggregate.avg_levenshtein,
                aggregate_marks
            ));
        }
        if let Some(fc) = self.oracle_fc {
            out.push_str(&format!("oracle-fc\tall\t{fc:.2}\t\t\n"));
        }
        if let Some(e) = self.oracle_e {
            out.push_str(&format!("oracle-e\tall\t{e:.2}\t\t\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}
