//! Context-task split construction: candidate selection against a
//! UniMorph lexicon, token-count-driven sentence sampling, and the
//! per-track output shapes.
//!
//! Training sets are nested sentence prefixes of one uniformly shuffled
//! candidate order, sized by cumulative token counts. Dev and test are
//! carved from the remainder of the same order. Evaluation sentences
//! cover their target form and carry it as the single plausible form;
//! track-2 outputs strip context annotation down to surfaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reinflect::context::{select_candidates, strip_to_track2, Lexicon};
use reinflect::data::{AnnotatedSentence, Track};

use crate::io::{CliError, CliResult};

pub struct ContextSplits {
    pub low: Vec<AnnotatedSentence>,
    pub medium: Vec<AnnotatedSentence>,
    pub high: Vec<AnnotatedSentence>,
    pub dev: Vec<AnnotatedSentence>,
    pub test: Vec<AnnotatedSentence>,
}

/// Token counts per split, reusing the triple-sampler's size flags.
pub struct TokenTargets {
    pub low: usize,
    pub medium: usize,
    pub high: usize,
    pub dev: usize,
    pub test: usize,
}

/// A training sentence keeps its surfaces. Track 1 keeps the full
/// annotation and marks no target; track 2 keeps only the chosen
/// target's lemma.
fn train_sentence(sentence: &AnnotatedSentence, target: usize, track: Track) -> AnnotatedSentence {
    match track {
        Track::One => {
            let mut s = sentence.clone();
            s.target_index = None;
            s.plausible_forms = None;
            s
        }
        Track::Two => {
            let mut probe = sentence.clone();
            probe.target_index = Some(target);
            let mut s = strip_to_track2(&probe);
            s.target_index = None;
            s.plausible_forms = None;
            s
        }
    }
}

/// An evaluation sentence covers the target form and records it as the
/// single plausible form. The target's MSD is never observed.
fn eval_sentence(sentence: &AnnotatedSentence, target: usize, track: Track) -> AnnotatedSentence {
    let mut s = match track {
        Track::One => sentence.clone(),
        Track::Two => {
            let mut probe = sentence.clone();
            probe.target_index = Some(target);
            strip_to_track2(&probe)
        }
    };
    s.target_index = Some(target);
    s.tokens[target].msd = None;
    s.plausible_forms = Some(vec![s.tokens[target].surface.clone()]);
    s
}

/// Takes sentences from `order` starting at `*cursor` until their token
/// count reaches `target`.
fn take_tokens(
    order: &[(usize, usize)],
    sentences: &[AnnotatedSentence],
    cursor: &mut usize,
    target: usize,
) -> Vec<(usize, usize)> {
    let mut taken = Vec::new();
    let mut tokens = 0;
    while tokens < target && *cursor < order.len() {
        let entry = order[*cursor];
        tokens += sentences[entry.0].tokens.len();
        taken.push(entry);
        *cursor += 1;
    }
    taken
}

pub fn sample_context_splits(
    sentences: &[AnnotatedSentence],
    lexicon: &Lexicon,
    targets: &TokenTargets,
    track: Track,
    seed: u64,
    scale_down: bool,
) -> CliResult<ContextSplits> {
    let candidates = select_candidates(sentences, lexicon);
    if candidates.is_empty() {
        return Err(CliError::Data(
            "no candidate sentences: no token matches the lexicon".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Indices into `sentences` paired with a chosen target position.
    let mut order: Vec<(usize, usize)> = Vec::with_capacity(candidates.len());
    {
        // Map candidate refs back to their corpus indices.
        let mut by_ptr = std::collections::HashMap::new();
        for (idx, s) in sentences.iter().enumerate() {
            by_ptr.insert(s as *const AnnotatedSentence, idx);
        }
        for (sentence, positions) in &candidates {
            let idx = by_ptr[&(*sentence as *const AnnotatedSentence)];
            let target = positions[rng.gen_range(0..positions.len())];
            order.push((idx, target));
        }
    }
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }

    let available: usize = order.iter().map(|&(i, _)| sentences[i].tokens.len()).sum();
    let train_top = targets.high.max(targets.medium).max(targets.low);
    let required = train_top + targets.dev + targets.test;
    if available < required && !scale_down {
        return Err(CliError::Data(format!(
            "candidate sentences hold {available} tokens, {required} required \
             (use --scale-down to truncate)"
        )));
    }

    let mut cursor = 0usize;
    let train_entries = take_tokens(&order, sentences, &mut cursor, train_top);
    let dev_entries = take_tokens(&order, sentences, &mut cursor, targets.dev);
    let test_entries = take_tokens(&order, sentences, &mut cursor, targets.test);

    let train_prefix = |budget: usize| -> Vec<AnnotatedSentence> {
        let mut out = Vec::new();
        let mut tokens = 0;
        for &(idx, target) in &train_entries {
            if tokens >= budget {
                break;
            }
            tokens += sentences[idx].tokens.len();
            out.push(train_sentence(&sentences[idx], target, track));
        }
        out
    };
    let eval_set = |entries: &[(usize, usize)]| -> Vec<AnnotatedSentence> {
        entries
            .iter()
            .map(|&(idx, target)| eval_sentence(&sentences[idx], target, track))
            .collect()
    };

    Ok(ContextSplits {
        low: train_prefix(targets.low),
        medium: train_prefix(targets.medium),
        high: train_prefix(targets.high),
        dev: eval_set(&dev_entries),
        test: eval_set(&test_entries),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use reinflect::data::{format_context_corpus, parse_context_corpus, Dataset, Msd, Triple};

    fn corpus() -> Vec<AnnotatedSentence> {
        let mut text = String::new();
        for i in 0..30 {
            text.push_str(&format!(
                "w{i}\tw{i}\tX\ndogs\tdog\tN;PL\nbark{i}\tbark\tV;PRS\n\n"
            ));
        }
        parse_context_corpus(text.as_bytes(), Track::One).unwrap()
    }

    fn lexicon() -> Lexicon {
        Lexicon::from_dataset(&Dataset::new(
            "en",
            vec![Triple::new("dog", Msd::parse("N;PL").unwrap(), "dogs")],
        ))
    }

    fn targets() -> TokenTargets {
        TokenTargets {
            low: 9,
            medium: 18,
            high: 45,
            dev: 9,
            test: 9,
        }
    }

    #[test]
    fn splits_are_nested_and_sized_by_tokens() {
        let sentences = corpus();
        let splits =
            sample_context_splits(&sentences, &lexicon(), &targets(), Track::Two, 7, false)
                .unwrap();
        assert_eq!(splits.low.len(), 3);
        assert_eq!(splits.medium.len(), 6);
        assert_eq!(splits.high.len(), 15);
        assert_eq!(splits.dev.len(), 3);
        assert_eq!(splits.test.len(), 3);
        for (a, b) in splits.low.iter().zip(&splits.medium) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn track2_train_keeps_only_target_lemmas() {
        let sentences = corpus();
        let splits =
            sample_context_splits(&sentences, &lexicon(), &targets(), Track::Two, 7, false)
                .unwrap();
        for s in &splits.high {
            assert_eq!(s.target_index, None);
            let with_lemma: Vec<_> = s.tokens.iter().filter(|t| t.lemma.is_some()).collect();
            assert_eq!(with_lemma.len(), 1);
            assert_eq!(with_lemma[0].lemma.as_deref(), Some("dog"));
            assert!(s.tokens.iter().all(|t| t.msd.is_none()));
            assert!(s.tokens.iter().all(|t| !t.surface.is_empty()));
        }
    }

    #[test]
    fn eval_sentences_cover_the_gold_form() {
        let sentences = corpus();
        for track in [Track::One, Track::Two] {
            let splits =
                sample_context_splits(&sentences, &lexicon(), &targets(), track, 7, false)
                    .unwrap();
            for s in splits.dev.iter().chain(&splits.test) {
                let target = s.target_index.unwrap();
                assert_eq!(s.gold_form(), Some("dogs"));
                assert_eq!(s.plausible_forms.as_deref(), Some(&["dogs".to_string()][..]));
                assert!(s.tokens[target].msd.is_none());
                assert_eq!(s.tokens[target].lemma.as_deref(), Some("dog"));
            }
            // The serialized form parses back on the same track.
            let text = format_context_corpus(&splits.test);
            let reparsed = parse_context_corpus(text.as_bytes(), track).unwrap();
            assert_eq!(reparsed.len(), splits.test.len());
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let sentences = corpus();
        let a = sample_context_splits(&sentences, &lexicon(), &targets(), Track::Two, 11, false)
            .unwrap();
        let b = sample_context_splits(&sentences, &lexicon(), &targets(), Track::Two, 11, false)
            .unwrap();
        assert_eq!(format_context_corpus(&a.test), format_context_corpus(&b.test));
        let c = sample_context_splits(&sentences, &lexicon(), &targets(), Track::Two, 12, false)
            .unwrap();
        assert_ne!(format_context_corpus(&a.test), format_context_corpus(&c.test));
    }

    #[test]
    fn shortfall_errors_without_scale_down() {
        let sentences = corpus();
        let big = TokenTargets {
            low: 10,
            medium: 100,
            high: 1000,
            dev: 100,
            test: 100,
        };
        assert!(
            sample_context_splits(&sentences, &lexicon(), &big, Track::Two, 7, false).is_err()
        );
        let splits =
            sample_context_splits(&sentences, &lexicon(), &big, Track::Two, 7, true).unwrap();
        assert_eq!(splits.high.len(), 30); // everything available
        assert!(splits.dev.is_empty() && splits.test.is_empty());
    }
}
