//! Split construction: weighted sampling without replacement and the
//! nested low/medium/high training sets plus dev/test carving.
//!
//! The draw order is frequency-biased, so the smaller training sets
//! concentrate on high-weight items while dev and test, taken from the
//! tail of the draw, skew toward the low-weight ones.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, Msd, Triple};
use crate::error::{Error, Result};

/// Items to sample from, each carrying a non-negative relative weight.
#[derive(Debug, Clone)]
pub struct WeightedPool {
    pub language: String,
    items: Vec<(Triple, f64)>,
}

impl WeightedPool {
    /// Validates that weights are finite, non-negative, and at least one
    /// is strictly positive.
    pub fn new(language: impl Into<String>, items: Vec<(Triple, f64)>) -> Result<Self> {
        let mut any_positive = false;
        for (idx, (_, w)) in items.iter().enumerate() {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::Malformed {
                    line: idx + 1,
                    msg: format!("invalid weight {w}"),
                });
            }
            any_positive |= *w > 0.0;
        }
        if !any_positive {
            return Err(Error::NoPositiveWeight);
        }
        Ok(WeightedPool {
            language: language.into(),
            items,
        })
    }

    /// A pool giving every triple the same weight.
    pub fn uniform(dataset: &Dataset) -> Result<Self> {
        WeightedPool::new(
            dataset.language.clone(),
            dataset.triples.iter().map(|t| (t.clone(), 1.0)).collect(),
        )
    }

    /// A pool weighted by a weight table; triples without an entry
    /// default to weight 1.
    pub fn from_weights(dataset: &Dataset, weights: &WeightMap) -> Result<Self> {
        WeightedPool::new(
            dataset.language.clone(),
            dataset
                .triples
                .iter()
                .map(|t| (t.clone(), weights.get(t)))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Per-triple weights loaded from a `lemma<TAB>msd<TAB>form<TAB>weight`
/// file.
#[derive(Debug, Clone, Default)]
pub struct WeightMap {
    entries: HashMap<(String, Msd, String), f64>,
}

impl WeightMap {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|_| Error::Utf8 { line: 0 })?;
        let mut entries = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(Error::ColumnCount {
                    line: line_no,
                    expected: "4",
                    found: cols.len(),
                });
            }
            let msd = Msd::parse(cols[1]).map_err(|_| Error::Malformed {
                line: line_no,
                msg: format!("invalid feature bundle {:?}", cols[1]),
            })?;
            let weight: f64 = cols[3].parse().map_err(|_| Error::Malformed {
                line: line_no,
                msg: format!("invalid weight {:?}", cols[3]),
            })?;
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::Malformed {
                    line: line_no,
                    msg: format!("invalid weight {weight}"),
                });
            }
            let key = (cols[0].to_string(), msd, cols[2].to_string());
            if entries.insert(key, weight).is_some() {
                return Err(Error::Malformed {
                    line: line_no,
                    msg: "duplicate weight entry".into(),
                });
            }
        }
        Ok(WeightMap { entries })
    }

    fn get(&self, triple: &Triple) -> f64 {
        let key = (
            triple.lemma.clone(),
            triple.msd.clone(),
            triple.form.clone(),
        );
        self.entries.get(&key).copied().unwrap_or(1.0)
    }
}

/// Requested split sizes and the generator seed.
///
/// The training sizes are nested prefixes of one draw sequence, so
/// `low <= medium <= high` among the non-zero sizes; a size of zero
/// omits that regime. The total draw is the largest training size plus
/// dev plus test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub low: usize,
    pub medium: usize,
    pub high: usize,
    pub dev: usize,
    pub test: usize,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            low: 100,
            medium: 1000,
            high: 10000,
            dev: 1000,
            test: 1000,
            seed: 0,
        }
    }
}

impl SplitSpec {
    /// The number of draws the spec requires.
    pub fn total_draw(&self) -> usize {
        self.train_top() + self.dev + self.test
    }

    fn train_top(&self) -> usize {
        self.high.max(self.medium).max(self.low)
    }

    fn validate(&self) -> Result<()> {
        let mut sizes: Vec<usize> = [self.low, self.medium, self.high]
            .into_iter()
            .filter(|&s| s > 0)
            .collect();
        let sorted = {
            let mut s = sizes.clone();
            s.sort_unstable();
            s
        };
        if sizes != sorted {
            return Err(Error::Malformed {
                line: 0,
                msg: "training sizes must satisfy low <= medium <= high".into(),
            });
        }
        sizes.dedup();
        Ok(())
    }

    /// Shrinks the spec to fit a small pool: first the high regime is
    /// dropped, then dev and test are halved down to a floor of 50, then
    /// the medium regime is dropped, and finally the low size absorbs
    /// whatever remains.
    pub fn scaled_to(&self, pool_size: usize) -> Result<SplitSpec> {
        let mut spec = *self;
        let fits = |s: &SplitSpec| s.total_draw() <= pool_size;
        if fits(&spec) {
            return Ok(spec);
        }
        spec.high = 0;
        while !fits(&spec) && (spec.dev > 50 || spec.test > 50) {
            spec.dev = (spec.dev / 2).max(50.min(spec.dev));
            spec.test = (spec.test / 2).max(50.min(spec.test));
        }
        if !fits(&spec) {
            spec.medium = 0;
        }
        if !fits(&spec) {
            spec.low = pool_size.saturating_sub(spec.dev + spec.test);
        }
        if spec.low == 0 || !fits(&spec) {
            return Err(Error::PoolTooSmall {
                available: pool_size,
                required: spec.dev + spec.test + 1,
                shortfall: (spec.dev + spec.test + 1).saturating_sub(pool_size),
            });
        }
        Ok(spec)
    }
}

/// The five sampled datasets. The training sets are nested prefixes of
/// one draw sequence and disjoint from dev and test.
#[derive(Debug, Clone)]
pub struct Splits {
    pub low: Dataset,
    pub medium: Dataset,
    pub high: Dataset,
    pub dev: Dataset,
    pub test: Dataset,
}

/// Draws the splits by weighted sampling without replacement.
///
/// Each item receives an exponential arrival key `-ln(u)/w` from the
/// seeded generator and the draw order is ascending key order, which is
/// distributionally identical to sequential draws with renormalization.
/// The low/medium/high training sets are prefixes of the draw sequence;
/// the final dev+test draws are uniformly reshuffled and split dev-first.
pub fn sample_splits(pool: &WeightedPool, spec: &SplitSpec) -> Result<Splits> {
    spec.validate()?;
    let required = spec.total_draw();
    if pool.len() < required {
        return Err(Error::PoolTooSmall {
            available: pool.len(),
            required,
            shortfall: required - pool.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut keyed: Vec<(f64, usize)> = pool
        .items
        .iter()
        .enumerate()
        .map(|(idx, (_, weight))| {
            let u: f64 = 1.0 - rng.gen::<f64>(); // in (0, 1]
            let key = if *weight > 0.0 {
                -u.ln() / weight
            } else {
                f64::INFINITY
            };
            (key, idx)
        })
        .collect();
    keyed.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let draws: Vec<&Triple> = keyed[..required]
        .iter()
        .map(|&(_, idx)| &pool.items[idx].0)
        .collect();

    let take = |slice: &[&Triple]| -> Dataset {
        Dataset::new(
            pool.language.clone(),
            slice.iter().map(|t| (*t).clone()).collect(),
        )
    };

    let mut tail: Vec<&Triple> = draws[spec.train_top()..].to_vec();
    // Uniform reshuffle of the dev+test block, then split dev-first.
    for i in (1..tail.len()).rev() {
        let j = rng.gen_range(0..=i);
        tail.swap(i, j);
    }

    Ok(Splits {
        low: take(&draws[..spec.low]),
        medium: take(&draws[..spec.medium]),
        high: take(&draws[..spec.high]),
        dev: take(&tail[..spec.dev]),
        test: take(&tail[spec.dev..spec.dev + spec.test]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn msd(s: &str) -> Msd {
        Msd::parse(s).unwrap()
    }

    fn pool_of(n: usize) -> WeightedPool {
        let triples = (0..n)
            .map(|i| (Triple::new(format!("lemma{i}"), msd("N;SG"), format!("form{i}")), 1.0))
            .collect();
        WeightedPool::new("xx", triples).unwrap()
    }

    fn zipf_pool(n: usize) -> WeightedPool {
        let triples = (0..n)
            .map(|i| {
                (
                    Triple::new(format!("lemma{i}"), msd("N;SG"), format!("form{i}")),
                    1.0 / (i + 1) as f64,
                )
            })
            .collect();
        WeightedPool::new("xx", triples).unwrap()
    }

    #[test]
    fn default_spec_produces_nested_disjoint_splits() {
        let pool = zipf_pool(12_000);
        let spec = SplitSpec::default();
        let splits = sample_splits(&pool, &spec).unwrap();
        assert_eq!(splits.low.len(), 100);
        assert_eq!(splits.medium.len(), 1000);
        assert_eq!(splits.high.len(), 10_000);
        assert_eq!(splits.dev.len(), 1000);
        assert_eq!(splits.test.len(), 1000);
        assert_eq!(splits.medium.triples[..100], splits.low.triples[..]);
        assert_eq!(splits.high.triples[..1000], splits.medium.triples[..]);
        let train: HashSet<&Triple> = splits.high.triples.iter().collect();
        for t in splits.dev.triples.iter().chain(&splits.test.triples) {
            assert!(!train.contains(t));
        }
        let mut all: Vec<&Triple> = splits.high.triples.iter().collect();
        all.extend(&splits.dev.triples);
        all.extend(&splits.test.triples);
        let distinct: HashSet<&&Triple> = all.iter().collect();
        assert_eq!(distinct.len(), all.len());
    }

    #[test]
    fn exhausting_the_pool_returns_draw_order() {
        let pool = pool_of(5);
        let spec = SplitSpec {
            low: 1,
            medium: 2,
            high: 5,
            dev: 0,
            test: 0,
            seed: 7,
        };
        let splits = sample_splits(&pool, &spec).unwrap();
        assert_eq!(splits.high.len(), 5);
        assert_eq!(splits.low.triples[0], splits.high.triples[0]);
        assert_eq!(splits.medium.triples[..], splits.high.triples[..2]);
        assert!(splits.dev.is_empty() && splits.test.is_empty());
    }

    #[test]
    fn dominant_weight_lands_in_low_set() {
        // One item holds 99.9% of the total weight.
        let mut items = vec![(Triple::new("big", msd("N;SG"), "big"), 999.0)];
        for i in 0..4 {
            items.push((
                Triple::new(format!("small{i}"), msd("N;SG"), format!("small{i}")),
                0.25,
            ));
        }
        let pool = WeightedPool::new("xx", items).unwrap();
        let mut in_low = 0usize;
        let mut first_draw = 0usize;
        let runs = 10_000;
        for seed in 0..runs {
            let spec = SplitSpec {
                low: 3,
                medium: 3,
                high: 3,
                dev: 1,
                test: 1,
                seed,
            };
            let splits = sample_splits(&pool, &spec).unwrap();
            if splits.low.triples.iter().any(|t| t.lemma == "big") {
                in_low += 1;
            }
            if splits.low.triples[0].lemma == "big" {
                first_draw += 1;
            }
        }
        assert!(
            in_low as f64 / runs as f64 > 0.999,
            "in_low = {in_low} of {runs}"
        );
        // Analytic first-draw probability is w / sum(w) = 0.999.
        let freq = first_draw as f64 / runs as f64;
        assert!((freq - 0.999).abs() < 0.002, "first-draw freq {freq}");
    }

    #[test]
    fn identical_seeds_are_deterministic() {
        let pool = zipf_pool(500);
        let spec = SplitSpec {
            low: 10,
            medium: 50,
            high: 300,
            dev: 100,
            test: 100,
            seed: 42,
        };
        let a = sample_splits(&pool, &spec).unwrap();
        let b = sample_splits(&pool, &spec).unwrap();
        assert_eq!(a.high.triples, b.high.triples);
        assert_eq!(a.dev.triples, b.dev.triples);
        assert_eq!(a.test.triples, b.test.triples);
        let other = sample_splits(
            &pool,
            &SplitSpec {
                seed: 43,
                ..spec
            },
        )
        .unwrap();
        assert_ne!(a.high.triples, other.high.triples);
    }

    #[test]
    fn small_training_sets_skew_to_high_weights() {
        let pool = zipf_pool(2000);
        let weight_of = |t: &Triple| {
            let idx: usize = t.lemma["lemma".len()..].parse().unwrap();
            1.0 / (idx + 1) as f64
        };
        let mut low_heavier = 0usize;
        let seeds = 1000;
        for seed in 0..seeds {
            let spec = SplitSpec {
                low: 50,
                medium: 100,
                high: 1000,
                dev: 500,
                test: 500,
                seed,
            };
            let splits = sample_splits(&pool, &spec).unwrap();
            let mean = |d: &Dataset| {
                d.triples.iter().map(weight_of).sum::<f64>() / d.len() as f64
            };
            if mean(&splits.low) > mean(&splits.test) {
                low_heavier += 1;
            }
        }
        assert!(low_heavier >= 950, "low heavier in {low_heavier} of {seeds}");
    }

    #[test]
    fn shortfall_is_reported() {
        let pool = pool_of(100);
        let err = sample_splits(&pool, &SplitSpec::default()).unwrap_err();
        match err {
            Error::PoolTooSmall {
                available,
                required,
                shortfall,
            } => {
                assert_eq!(available, 100);
                assert_eq!(required, 12_000);
                assert_eq!(shortfall, 11_900);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn scale_down_drops_regimes_and_halves_eval_sets() {
        let spec = SplitSpec::default();
        // Room for medium but not high: high dropped, dev/test halved
        // until the draw fits.
        let scaled = spec.scaled_to(2000).unwrap();
        assert_eq!(scaled.high, 0);
        assert_eq!(scaled.medium, 1000);
        assert_eq!((scaled.dev, scaled.test), (500, 500));
        assert!(scaled.total_draw() <= 2000);

        // Tiny pools drop medium too and shrink low.
        let scaled = spec.scaled_to(180).unwrap();
        assert_eq!(scaled.high, 0);
        assert_eq!(scaled.medium, 0);
        assert_eq!((scaled.dev, scaled.test), (50, 50));
        assert_eq!(scaled.low, 80);

        // A pool that cannot even host dev/test floors fails.
        assert!(spec.scaled_to(100).is_err());

        // Large pools pass through unchanged.
        assert_eq!(spec.scaled_to(12_000).unwrap(), spec);
    }

    #[test]
    fn scaled_specs_sample_cleanly() {
        let pool = zipf_pool(180);
        let spec = SplitSpec::default().scaled_to(pool.len()).unwrap();
        let splits = sample_splits(&pool, &spec).unwrap();
        assert_eq!(splits.low.len(), 80);
        assert!(splits.medium.is_empty());
        assert!(splits.high.is_empty());
        assert_eq!(splits.dev.len(), 50);
        assert_eq!(splits.test.len(), 50);
    }

    #[test]
    fn unordered_training_sizes_are_rejected() {
        let pool = pool_of(100);
        let spec = SplitSpec {
            low: 50,
            medium: 10,
            high: 60,
            dev: 0,
            test: 0,
            seed: 0,
        };
        assert!(sample_splits(&pool, &spec).is_err());
    }

    #[test]
    fn zero_weights_draw_last() {
        let mut items = vec![(Triple::new("zero", msd("N;SG"), "zero"), 0.0)];
        for i in 0..9 {
            items.push((
                Triple::new(format!("l{i}"), msd("N;SG"), format!("f{i}")),
                1.0,
            ));
        }
        let pool = WeightedPool::new("xx", items).unwrap();
        for seed in 0..20 {
            let spec = SplitSpec {
                low: 9,
                medium: 9,
                high: 9,
                dev: 0,
                test: 1,
                seed,
            };
            let splits = sample_splits(&pool, &spec).unwrap();
            assert!(splits.low.triples.iter().all(|t| t.lemma != "zero"));
            assert_eq!(splits.test.triples[0].lemma, "zero");
        }
    }

    #[test]
    fn invalid_pools_are_rejected() {
        let t = Triple::new("a", msd("N;SG"), "b");
        assert!(matches!(
            WeightedPool::new("xx", vec![(t.clone(), 0.0)]),
            Err(Error::NoPositiveWeight)
        ));
        assert!(WeightedPool::new("xx", vec![(t.clone(), -1.0)]).is_err());
        assert!(WeightedPool::new("xx", vec![(t, f64::NAN)]).is_err());
    }

    #[test]
    fn weight_files_parse_with_defaults() {
        let dataset = Dataset::new(
            "xx",
            vec![
                Triple::new("a", msd("N;SG"), "x"),
                Triple::new("b", msd("N;PL"), "y"),
            ],
        );
        let weights = WeightMap::parse(b"a\tN;SG\tx\t5.5\n").unwrap();
        let pool = WeightedPool::from_weights(&dataset, &weights).unwrap();
        assert_eq!(pool.items[0].1, 5.5);
        assert_eq!(pool.items[1].1, 1.0); // missing row defaults

        assert!(WeightMap::parse(b"a\tN;SG\tx\tnope\n").is_err());
        assert!(WeightMap::parse(b"a\tN;SG\tx\n").is_err());
        assert!(WeightMap::parse(b"a\tN;SG\tx\t1\na\tN;SG\tx\t2\n").is_err());
    }
}
