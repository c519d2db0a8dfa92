//! Property tests for the toolkit invariants, checked against
//! brute-force oracles where one exists.

use proptest::prelude::*;

use reinflect::context::strip_to_track2;
use reinflect::data::{
    format_triples, parse_context_corpus, parse_triples, Dataset, Msd, ParseMode, Track, Triple,
};
use reinflect::eval::{
    levenshtein, oracle_ensemble, score, sign_test_indicators, PredictionSet,
};
use reinflect::rules::{align, train};
use reinflect::sample::{sample_splits, SplitSpec, WeightedPool};

const ALPHABET: &[char] = &[
    'a', 'b', 'c', 'd', 'k', 'o', 't', 'ä', 'ö', 'ß', 'и', 'б', 'м', 'á', '好', ' ',
];

fn word(max_len: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(ALPHABET.to_vec()), 1..=max_len)
        .prop_map(|chars| chars.into_iter().collect())
}

fn short_string(max_len: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(ALPHABET.to_vec()), 0..=max_len)
        .prop_map(|chars| chars.into_iter().collect())
}

fn tag() -> impl Strategy<Value = String> {
    "[A-Z0-9+.]{1,4}"
}

fn msd() -> impl Strategy<Value = Msd> {
    prop::collection::vec(tag(), 1..=4).prop_map(|tags| Msd::new(tags).unwrap())
}

fn triple() -> impl Strategy<Value = Triple> {
    (word(8), msd(), word(8)).prop_map(|(lemma, msd, form)| Triple::new(lemma, msd, form))
}

/// Brute-force edit distance by recursive enumeration of edit sequences.
fn brute_distance(a: &[char], b: &[char]) -> usize {
    match (a.first(), b.first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some(&x), Some(&y)) => {
            let sub = brute_distance(&a[1..], &b[1..]) + usize::from(x != y);
            let del = brute_distance(&a[1..], b) + 1;
            let ins = brute_distance(a, &b[1..]) + 1;
            sub.min(del).min(ins)
        }
    }
}

fn brute(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    brute_distance(&a, &b)
}

proptest! {
    #[test]
    fn triple_files_roundtrip(triples in prop::collection::vec(triple(), 0..20)) {
        let dataset = Dataset::new("xx", triples);
        let text = format_triples(&dataset);
        let reparsed = parse_triples(text.as_bytes(), "xx", ParseMode::Train).unwrap();
        prop_assert_eq!(&reparsed, &dataset);
        prop_assert_eq!(format_triples(&reparsed), text);
    }

    #[test]
    fn parsed_msds_have_clean_tags(triples in prop::collection::vec(triple(), 1..10)) {
        let dataset = Dataset::new("xx", triples);
        let text = format_triples(&dataset);
        let reparsed = parse_triples(text.as_bytes(), "xx", ParseMode::Train).unwrap();
        for t in &reparsed.triples {
            prop_assert!(!t.msd.tags().is_empty());
            prop_assert!(t.msd.tags().iter().all(|tag| !tag.contains(';')));
        }
    }

    #[test]
    fn alignment_reconstructs_inputs(a in short_string(10), b in short_string(10)) {
        let alignment = align(&a, &b);
        let lemma: String = alignment.pairs.iter().map(|(l, _)| l.as_str()).collect();
        let form: String = alignment.pairs.iter().map(|(_, f)| f.as_str()).collect();
        prop_assert_eq!(lemma, a);
        prop_assert_eq!(form, b);
        for (l, f) in &alignment.pairs {
            prop_assert!(l.chars().count() <= 1 && f.chars().count() <= 1);
            prop_assert!(!(l.is_empty() && f.is_empty()));
        }
    }

    #[test]
    fn alignment_cost_is_the_levenshtein_distance(a in short_string(8), b in short_string(8)) {
        prop_assert_eq!(align(&a, &b).cost(), levenshtein(&a, &b));
    }

    #[test]
    fn training_fidelity(t in triple()) {
        let table = train(&Dataset::new("xx", vec![t.clone()])).unwrap();
        prop_assert_eq!(table.apply(&t.lemma, &t.msd), t.form);
    }

    #[test]
    fn training_is_deterministic(triples in prop::collection::vec(triple(), 1..12), lemma in word(8)) {
        let d = Dataset::new("xx", triples);
        let t1 = train(&d).unwrap();
        let t2 = train(&d).unwrap();
        prop_assert_eq!(t1.to_tsv(), t2.to_tsv());
        let msd = &d.triples[0].msd;
        prop_assert_eq!(t1.apply(&lemma, msd), t2.apply(&lemma, msd));
    }

    /// Adding a rule with a longer matching left side never makes the
    /// applied rule shorter.
    #[test]
    fn longest_match_dominance(
        triples in prop::collection::vec(triple(), 1..8),
        lemma in word(8),
        form in word(8),
    ) {
        let msd = triples[0].msd.clone();
        let uniform: Vec<Triple> = triples
            .iter()
            .map(|t| Triple::new(t.lemma.clone(), msd.clone(), t.form.clone()))
            .collect();
        let before = train(&Dataset::new("xx", uniform.clone())).unwrap();
        let len_before = before
            .apply_detailed(&lemma, &msd)
            .suffix_rule
            .map_or(0, |r| r.lhs.chars().count());

        // The added triple contributes a whole-lemma rule for `lemma`.
        let mut extended = uniform;
        extended.push(Triple::new(lemma.clone(), msd.clone(), form));
        let after = train(&Dataset::new("xx", extended)).unwrap();
        let len_after = after
            .apply_detailed(&lemma, &msd)
            .suffix_rule
            .map_or(0, |r| r.lhs.chars().count());
        prop_assert!(len_after >= len_before);
        prop_assert_eq!(len_after, lemma.chars().count());
    }

    #[test]
    fn levenshtein_is_a_metric(
        a in short_string(10),
        b in short_string(10),
        c in short_string(10),
    ) {
        let ab = levenshtein(&a, &b);
        prop_assert_eq!(ab, levenshtein(&b, &a));
        prop_assert_eq!(ab == 0, a == b);
        prop_assert!(ab <= levenshtein(&a, &c) + levenshtein(&c, &b));
    }

    #[test]
    fn levenshtein_matches_brute_force(a in short_string(7), b in short_string(7)) {
        prop_assert_eq!(levenshtein(&a, &b), brute(&a, &b));
    }

    #[test]
    fn sign_test_is_symmetric(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 0..40)) {
        let a: Vec<bool> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<bool> = pairs.iter().map(|p| p.1).collect();
        let p_ab = sign_test_indicators(&a, &b).unwrap();
        let p_ba = sign_test_indicators(&b, &a).unwrap();
        prop_assert_eq!(p_ab, p_ba);
        prop_assert!((0.0..=1.0).contains(&p_ab));
        prop_assert_eq!(sign_test_indicators(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn perfect_accuracy_means_zero_distance(
        items in prop::collection::vec((word(6), msd(), word(6)), 1..15),
        flips in prop::collection::vec(any::<bool>(), 1..15),
    ) {
        let gold = Dataset::new(
            "xx",
            items.iter().map(|(l, m, f)| Triple::new(l.clone(), m.clone(), f.clone())).collect(),
        );
        let preds = PredictionSet::new(
            "s",
            items
                .iter()
                .zip(flips.iter().cycle())
                .map(|((_, _, f), flip)| if *flip { f.clone() } else { format!("{f}!") })
                .collect(),
        );
        let metrics = score(&gold, &preds).unwrap();
        prop_assert_eq!(metrics.accuracy == 100.0, metrics.avg_levenshtein == 0.0);
    }

    #[test]
    fn ensemble_oracle_dominates(
        items in prop::collection::vec((word(6), msd(), word(6)), 1..12),
        masks in prop::collection::vec(prop::collection::vec(any::<bool>(), 1..12), 1..5),
    ) {
        let gold = Dataset::new(
            "xx",
            items.iter().map(|(l, m, f)| Triple::new(l.clone(), m.clone(), f.clone())).collect(),
        );
        let systems: Vec<PredictionSet> = masks
            .iter()
            .enumerate()
            .map(|(idx, mask)| {
                PredictionSet::new(
                    format!("s{idx}"),
                    items
                        .iter()
                        .zip(mask.iter().cycle())
                        .map(|((_, _, f), hit)| if *hit { f.clone() } else { format!("{f}!") })
                        .collect(),
                )
            })
            .collect();
        let oracle = oracle_ensemble(&gold, &systems).unwrap();
        for system in &systems {
            prop_assert!(oracle >= score(&gold, system).unwrap().accuracy - 1e-9);
        }
    }

    #[test]
    fn strip_to_track2_is_idempotent(corpus_seed in 0u8..4) {
        let text: &[u8] = match corpus_seed {
            0 => b"The\tthe\tDET\n_\tdog\t_\nbark\tbark\tV\n",
            1 => b"a\tb\tN;SG\nc\td\tV;PST\n",
            2 => b"_\tx\t_\n",
            _ => b"one\tone\tNUM\ntwo\ttwo\tNUM\nthree\tthree\tNUM\n",
        };
        let sentences = parse_context_corpus(text, Track::One).unwrap();
        for s in &sentences {
            let once = strip_to_track2(s);
            prop_assert_eq!(strip_to_track2(&once), once.clone());
            for (before, after) in s.tokens.iter().zip(&once.tokens) {
                prop_assert_eq!(&before.surface, &after.surface);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_duplicate_free(
        seed in any::<u64>(),
        weights in prop::collection::vec(0.1f64..10.0, 30..80),
    ) {
        let triples: Vec<(Triple, f64)> = weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                (
                    Triple::new(format!("l{i}"), Msd::parse("N;SG").unwrap(), format!("f{i}")),
                    *w,
                )
            })
            .collect();
        let pool = WeightedPool::new("xx", triples).unwrap();
        let spec = SplitSpec { low: 2, medium: 5, high: 20, dev: 4, test: 4, seed };
        let a = sample_splits(&pool, &spec).unwrap();
        let b = sample_splits(&pool, &spec).unwrap();
        prop_assert_eq!(format_triples(&a.high), format_triples(&b.high));
        prop_assert_eq!(format_triples(&a.dev), format_triples(&b.dev));
        prop_assert_eq!(format_triples(&a.test), format_triples(&b.test));

        prop_assert_eq!(&a.high.triples[..2], &a.low.triples[..]);
        prop_assert_eq!(&a.high.triples[..5], &a.medium.triples[..]);
        let mut seen = std::collections::HashSet::new();
        for t in a.high.triples.iter().chain(&a.dev.triples).chain(&a.test.triples) {
            prop_assert!(seen.insert(t.lemma.clone()));
        }
    }
}
