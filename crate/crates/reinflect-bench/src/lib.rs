//! Shared fixture generators for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reinflect::data::{Dataset, Msd, Triple};

const ALPHABET: &[char] = &[
    'a', 'e', 'i', 'o', 'u', 'k', 't', 's', 'n', 'l', 'r', 'm', 'ä', 'ö',
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_word(rng: &mut ChaCha8Rng, min_len: usize, max_len: usize) -> String {
    let len = rng.gen_range(min_len..=max_len);
    (0..len)
        .map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())])
        .collect()
}

/// A synthetic inflection dataset: random stems with per-bundle endings,
/// which gives the rule tables realistic shared-suffix structure.
pub fn synthetic_dataset(n: usize, seed: u64) -> Dataset {
    let mut rng = rng(seed);
    let bundles: Vec<(Msd, String)> = (0..24)
        .map(|i| {
            (
                Msd::parse(&format!("N;C{i};SG")).unwrap(),
                random_word(&mut rng, 1, 4),
            )
        })
        .collect();
    let triples = (0..n)
        .map(|_| {
            let stem = random_word(&mut rng, 3, 10);
            let (msd, ending) = &bundles[rng.gen_range(0..bundles.len())];
            Triple::new(stem.clone(), msd.clone(), format!("{stem}{ending}"))
        })
        .collect();
    Dataset::new("xx", triples)
}

pub fn word_pairs(n: usize, seed: u64) -> Vec<(String, String)> {
    let mut rng = rng(seed);
    (0..n)
        .map(|_| {
            (
                random_word(&mut rng, 4, 14),
                random_word(&mut rng, 4, 14),
            )
        })
        .collect()
}
