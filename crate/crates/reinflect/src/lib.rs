//! A morphological reinflection toolkit: UniMorph data handling,
//! frequency-weighted split sampling, a rule-based inflection baseline,
//! a lemma-copying baseline for inflection in context, and a complete
//! evaluation harness with oracle upper bounds and sign-test
//! significance analysis.
//!
//! ```
//! use reinflect::data::{parse_triples, Msd, ParseMode};
//! use reinflect::rules::train;
//!
//! let data = parse_triples(b"koti\tN;IN+ABL;SG\tkodista", "fi", ParseMode::Train)?;
//! let table = train(&data)?;
//! let msd = Msd::parse("N;IN+ABL;SG")?;
//! assert_eq!(table.apply("luoti", &msd), "luodista");
//! # Ok::<(), reinflect::Error>(())
//! ```

pub mod context;
pub mod data;
pub mod error;
pub mod eval;
pub mod rules;
pub mod sample;

pub use error::{Error, Result};
