//! Command-line front end wiring parsing, sampling, training,
//! prediction and evaluation into one workflow.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error. Every output
//! file is written atomically, and identical inputs with the same seed
//! produce byte-identical outputs.

mod io;
mod task2;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};

use reinflect::context::{convert_ud_corpus, copy_baseline, Lexicon, MsdMappingTable};
use reinflect::data::{
    format_context_corpus, format_triples, parse_context_corpus, parse_triples,
    AnnotatedSentence, ParseMode, Track,
};
use reinflect::eval::{
    oracle_ensemble, oracle_feature_combination, oracle_feature_combination_vector, score,
    score_forms, score_relaxed, sign_test, significance_marks, EvalReport, Metrics,
    OracleVectors, PredictionSet, SignificanceEntry, SystemReport,
};
use reinflect::rules::{train, RuleTable};
use reinflect::sample::{sample_splits, SplitSpec, WeightMap, WeightedPool};

use crate::io::{file_stem, read_file, write_atomic, CliError, CliResult};
use crate::task2::{sample_context_splits, TokenTargets};

#[derive(Parser)]
#[command(name = "reinflect", version, about = "Morphological reinflection toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample nested low/medium/high training sets plus dev and test
    Sample(SampleArgs),
    /// Train a transformation-rule table from inflection triples
    Train(TrainArgs),
    /// Predict inflected forms (rule table, or copy baseline with --track)
    Predict(PredictArgs),
    /// Score predictions against gold data, writing a TSV+JSON report
    Evaluate(EvaluateArgs),
    /// Compute ensemble and feature-combination oracle accuracies
    Oracle(OracleArgs),
    /// Compare systems pairwise with sign tests and significance marks
    Compare(CompareArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Input triple file (or a context corpus with --track)
    #[arg(long = "in")]
    input: PathBuf,
    /// Output prefix; writes PREFIX.low/.medium/.high/.dev/.test
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "und")]
    language: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Split sizes: items for triples, tokens with --track
    #[arg(long, default_value_t = 100)]
    low: usize,
    #[arg(long, default_value_t = 1000)]
    medium: usize,
    #[arg(long, default_value_t = 10_000)]
    high: usize,
    #[arg(long, default_value_t = 1000)]
    dev: usize,
    #[arg(long, default_value_t = 1000)]
    test: usize,
    /// Weight file `lemma<TAB>msd<TAB>form<TAB>weight`; absent rows weigh 1
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Shrink the requested sizes when the pool is too small
    #[arg(long)]
    scale_down: bool,
    /// Context-task construction for track 1 or 2
    #[arg(long)]
    track: Option<u8>,
    /// UniMorph triple file backing the candidate lexicon (with --track)
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// UD-to-UniMorph tag mapping; converts the corpus annotation first
    #[arg(long)]
    msd_map: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "und")]
    language: String,
}

#[derive(Args)]
struct PredictArgs {
    /// Covered test triples, or a context corpus with --track
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Rule table produced by `train` (triples mode)
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Copy-baseline prediction over a track-1 or track-2 corpus
    #[arg(long)]
    track: Option<u8>,
    #[arg(long, default_value = "und")]
    language: String,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Gold file; repeat together with --preds for several languages
    #[arg(long, required = true)]
    gold: Vec<PathBuf>,
    /// Predictions, one form per line, aligned with the gold file
    #[arg(long, required = true)]
    preds: Vec<PathBuf>,
    /// Language label per gold file (defaults to the gold file stem)
    #[arg(long)]
    language: Vec<String>,
    /// System name in the report (defaults to the first preds stem)
    #[arg(long)]
    system: Option<String>,
    /// Gold files are context corpora of this track
    #[arg(long)]
    track: Option<u8>,
    /// Concurrent language evaluations
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Report prefix; writes PREFIX.tsv and PREFIX.json
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Training triples for the feature-combination oracle
    #[arg(long)]
    train: Option<PathBuf>,
    /// Test triples for the feature-combination oracle
    #[arg(long)]
    test: Option<PathBuf>,
    /// Gold triples for the ensemble oracle
    #[arg(long)]
    gold: Option<PathBuf>,
    /// System predictions for the ensemble oracle (repeatable)
    #[arg(long)]
    preds: Vec<PathBuf>,
    /// Report prefix; writes PREFIX.json
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    gold: PathBuf,
    /// Predictions of each system under comparison (repeatable)
    #[arg(long, required = true)]
    preds: Vec<PathBuf>,
    /// Training triples; enables the feature-combination oracle marks
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    language: Option<String>,
    /// Report prefix; writes PREFIX.tsv and PREFIX.json
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Sample(args) => run_sample(args),
        Command::Train(args) => run_train(args),
        Command::Predict(args) => run_predict(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Oracle(args) => run_oracle(args),
        Command::Compare(args) => run_compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("reinflect: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn parse_track(track: u8) -> CliResult<Track> {
    match track {
        1 => Ok(Track::One),
        2 => Ok(Track::Two),
        other => Err(CliError::usage(format!(
            "--track must be 1 or 2, got {other}"
        ))),
    }
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{}.{suffix}", prefix.display()))
}

fn run_sample(args: SampleArgs) -> CliResult<()> {
    match args.track {
        None => sample_triples(&args),
        Some(track) => sample_context(&args, parse_track(track)?),
    }
}

fn sample_triples(args: &SampleArgs) -> CliResult<()> {
    let dataset = parse_triples(&read_file(&args.input)?, &args.language, ParseMode::Train)?;
    let pool = match &args.weights {
        Some(path) => {
            let weights = WeightMap::parse(&read_file(path)?)?;
            WeightedPool::from_weights(&dataset, &weights)?
        }
        None => WeightedPool::uniform(&dataset)?,
    };
    let mut spec = SplitSpec {
        low: args.low,
        medium: args.medium,
        high: args.high,
        dev: args.dev,
        test: args.test,
        seed: args.seed,
    };
    if args.scale_down {
        spec = spec.scaled_to(pool.len())?;
    }
    let splits = sample_splits(&pool, &spec)?;
    for (name, dataset) in [
        ("low", &splits.low),
        ("medium", &splits.medium),
        ("high", &splits.high),
        ("dev", &splits.dev),
        ("test", &splits.test),
    ] {
        let path = suffixed(&args.out, name);
        write_atomic(&path, format_triples(dataset).as_bytes())?;
        println!("wrote {} ({} triples)", path.display(), dataset.len());
    }
    Ok(())
}

fn sample_context(args: &SampleArgs, track: Track) -> CliResult<()> {
    if args.weights.is_some() {
        return Err(CliError::usage(
            "--weights applies to triple sampling, not --track mode",
        ));
    }
    let lexicon_path = args.lexicon.as_ref().ok_or_else(|| {
        CliError::usage("--track sampling needs --lexicon with UniMorph triples")
    })?;
    let corpus_bytes = read_file(&args.input)?;
    let sentences = match &args.msd_map {
        Some(map_path) => {
            let table = MsdMappingTable::parse(&read_file(map_path)?)?;
            convert_ud_corpus(&corpus_bytes, &table, &args.language)?
        }
        None => parse_context_corpus(&corpus_bytes, Track::One)?,
    };
    let lexicon = Lexicon::from_dataset(&parse_triples(
        &read_file(lexicon_path)?,
        &args.language,
        ParseMode::Train,
    )?);
    let targets = TokenTargets {
        low: args.low,
        medium: args.medium,
        high: args.high,
        dev: args.dev,
        test: args.test,
    };
    let splits =
        sample_context_splits(&sentences, &lexicon, &targets, track, args.seed, args.scale_down)?;
    for (name, sentences) in [
        ("low", &splits.low),
        ("medium", &splits.medium),
        ("high", &splits.high),
        ("dev", &splits.dev),
        ("test", &splits.test),
    ] {
        let path = suffixed(&args.out, name);
        write_atomic(&path, format_context_corpus(sentences).as_bytes())?;
        println!("wrote {} ({} sentences)", path.display(), sentences.len());
    }
    Ok(())
}

fn run_train(args: TrainArgs) -> CliResult<()> {
    let dataset = parse_triples(&read_file(&args.input)?, &args.language, ParseMode::Train)?;
    let table = train(&dataset)?;
    write_atomic(&args.out, table.to_tsv().as_bytes())?;
    println!(
        "wrote {} ({} rules from {} triples)",
        args.out.display(),
        table.rule_count(),
        dataset.len()
    );
    Ok(())
}

fn run_predict(args: PredictArgs) -> CliResult<()> {
    let predictions: Vec<String> = match args.track {
        None => {
            let rules_path = args.rules.as_ref().ok_or_else(|| {
                CliError::usage("predict needs --rules (or --track for the copy baseline)")
            })?;
            let table = RuleTable::from_tsv(&read_file(rules_path)?, &args.language)?;
            let test = parse_triples(&read_file(&args.input)?, &args.language, ParseMode::Test)?;
            test.triples
                .iter()
                .map(|t| table.apply(&t.lemma, &t.msd))
                .collect()
        }
        Some(track) => {
            let track = parse_track(track)?;
            let sentences = parse_context_corpus(&read_file(&args.input)?, track)?;
            sentences
                .iter()
                .filter(|s| s.target_index.is_some())
                .map(|s| copy_baseline(s, &args.language))
                .collect::<Result<_, _>>()?
        }
    };
    let mut out = predictions.join("\n");
    out.push('\n');
    write_atomic(&args.out, out.as_bytes())?;
    println!("wrote {} ({} predictions)", args.out.display(), predictions.len());
    Ok(())
}

/// Gold forms and relaxed-evaluation sentences of one context corpus.
fn context_gold(
    bytes: &[u8],
    track: Track,
) -> CliResult<(Vec<String>, Vec<AnnotatedSentence>)> {
    let sentences = parse_context_corpus(bytes, track)?;
    let targets: Vec<AnnotatedSentence> = sentences
        .into_iter()
        .filter(|s| s.target_index.is_some())
        .collect();
    let mut golds = Vec::with_capacity(targets.len());
    for (index, sentence) in targets.iter().enumerate() {
        let gold = sentence
            .gold_form()
            .ok_or(reinflect::Error::MissingGoldForm { index })?;
        golds.push(gold.to_string());
    }
    Ok((golds, targets))
}

fn score_language_pair(
    gold_path: &Path,
    preds_path: &Path,
    system: &str,
    track: Option<Track>,
) -> CliResult<Metrics> {
    let preds = PredictionSet::parse(&read_file(preds_path)?, system)?;
    match track {
        None => {
            let gold = parse_triples(&read_file(gold_path)?, "und", ParseMode::Train)?;
            Ok(score(&gold, &preds)?)
        }
        Some(track) => {
            let (golds, sentences) = context_gold(&read_file(gold_path)?, track)?;
            let refs: Vec<&str> = golds.iter().map(String::as_str).collect();
            let mut metrics = score_forms(&refs, &preds)?;
            metrics.relaxed_accuracy = Some(score_relaxed(&sentences, &preds)?);
            Ok(metrics)
        }
    }
}

fn run_evaluate(args: EvaluateArgs) -> CliResult<()> {
    if args.preds.len() != args.gold.len() {
        return Err(CliError::usage(format!(
            "{} --gold files but {} --preds files",
            args.gold.len(),
            args.preds.len()
        )));
    }
    if !args.language.is_empty() && args.language.len() != args.gold.len() {
        return Err(CliError::usage(
            "--language must be given once per --gold file (or not at all)",
        ));
    }
    let track = args.track.map(parse_track).transpose()?;
    let system = args
        .system
        .clone()
        .unwrap_or_else(|| file_stem(&args.preds[0]));

    let languages: Vec<String> = (0..args.gold.len())
        .map(|i| {
            args.language
                .get(i)
                .cloned()
                .unwrap_or_else(|| file_stem(&args.gold[i]))
        })
        .collect();

    let jobs = args.jobs.max(1).min(args.gold.len().max(1));
    let slots: Vec<Mutex<Option<CliResult<Metrics>>>> =
        (0..args.gold.len()).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= args.gold.len() {
                    break;
                }
                let result = score_language_pair(&args.gold[i], &args.preds[i], &system, track);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });

    let mut per_language = BTreeMap::new();
    for (language, slot) in languages.iter().zip(slots) {
        let metrics = slot.into_inner().unwrap().expect("worker filled slot")?;
        if per_language.insert(language.clone(), metrics).is_some() {
            return Err(CliError::usage(format!(
                "duplicate language label {language:?}"
            )));
        }
    }
    let expected: BTreeSet<String> = per_language.keys().cloned().collect();
    let report = EvalReport {
        systems: vec![SystemReport::new(system, per_language, &expected)],
        oracle_e: None,
        oracle_fc: None,
        significance: vec![],
    };
    print!("{}", report.to_tsv());
    write_report(args.out.as_deref(), &report)
}

fn write_report(prefix: Option<&Path>, report: &EvalReport) -> CliResult<()> {
    if let Some(prefix) = prefix {
        write_atomic(&suffixed(prefix, "tsv"), report.to_tsv().as_bytes())?;
        write_atomic(&suffixed(prefix, "json"), report.to_json().as_bytes())?;
    }
    Ok(())
}

fn run_oracle(args: OracleArgs) -> CliResult<()> {
    let mut oracle_fc = None;
    let mut oracle_e = None;
    match (&args.train, &args.test) {
        (Some(train_path), Some(test_path)) => {
            let train_ds = parse_triples(&read_file(train_path)?, "und", ParseMode::Train)?;
            let test_ds = parse_triples(&read_file(test_path)?, "und", ParseMode::Test)?;
            oracle_fc = Some(oracle_feature_combination(&train_ds, &test_ds));
        }
        (None, None) => {}
        _ => {
            return Err(CliError::usage(
                "the feature-combination oracle needs both --train and --test",
            ))
        }
    }
    match (&args.gold, args.preds.is_empty()) {
        (Some(gold_path), false) => {
            let gold = parse_triples(&read_file(gold_path)?, "und", ParseMode::Train)?;
            let systems = parse_systems(&args.preds)?;
            oracle_e = Some(oracle_ensemble(&gold, &systems)?);
        }
        (None, true) => {}
        _ => {
            return Err(CliError::usage(
                "the ensemble oracle needs --gold and at least one --preds",
            ))
        }
    }
    if oracle_fc.is_none() && oracle_e.is_none() {
        return Err(CliError::usage(
            "nothing to compute: give --train/--test and/or --gold/--preds",
        ));
    }
    if let Some(fc) = oracle_fc {
        println!("oracle-fc\t{fc:.2}");
    }
    if let Some(e) = oracle_e {
        println!("oracle-e\t{e:.2}");
    }
    if let Some(prefix) = &args.out {
        let report = EvalReport {
            systems: vec![],
            oracle_e,
            oracle_fc,
            significance: vec![],
        };
        write_atomic(&suffixed(prefix, "json"), report.to_json().as_bytes())?;
    }
    Ok(())
}

fn parse_systems(paths: &[PathBuf]) -> CliResult<Vec<PredictionSet>> {
    let mut ids = BTreeSet::new();
    let mut systems = Vec::with_capacity(paths.len());
    for path in paths {
        let mut id = file_stem(path);
        let mut n = 1;
        while !ids.insert(id.clone()) {
            n += 1;
            id = format!("{}-{n}", file_stem(path));
        }
        systems.push(PredictionSet::parse(&read_file(path)?, &id)?);
    }
    Ok(systems)
}

fn run_compare(args: CompareArgs) -> CliResult<()> {
    if !(0.0..=1.0).contains(&args.alpha) {
        return Err(CliError::usage("--alpha must lie in [0, 1]"));
    }
    let gold = parse_triples(&read_file(&args.gold)?, "und", ParseMode::Train)?;
    let systems = parse_systems(&args.preds)?;
    let language = args
        .language
        .clone()
        .unwrap_or_else(|| file_stem(&args.gold));

    let ensemble = reinflect::eval::oracle_ensemble_vector(&gold, &systems)?;
    let oracle_e = Some(oracle_ensemble(&gold, &systems)?);
    let (feature_combination, oracle_fc) = match &args.train {
        Some(train_path) => {
            let train_ds = parse_triples(&read_file(train_path)?, "und", ParseMode::Train)?;
            (
                Some(oracle_feature_combination_vector(&train_ds, &gold)),
                Some(oracle_feature_combination(&train_ds, &gold)),
            )
        }
        None => (None, None),
    };
    let oracles = OracleVectors {
        ensemble,
        feature_combination,
    };
    let marks = significance_marks(&gold, &systems, &oracles, args.alpha)?;

    let expected: BTreeSet<String> = [language.clone()].into_iter().collect();
    let mut reports = Vec::new();
    for system in &systems {
        let metrics = score(&gold, system)?;
        let mut per_language = BTreeMap::new();
        per_language.insert(language.clone(), metrics);
        let mut report = SystemReport::new(system.system_id.clone(), per_language, &expected);
        report.marks = marks.get(&system.system_id).copied();
        reports.push(report);
    }
    reports.sort_by(|a, b| {
        b.aggregate
            .accuracy
            .partial_cmp(&a.aggregate.accuracy)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.system.cmp(&b.system))
    });

    let mut significance = Vec::new();
    for i in 0..systems.len() {
        for j in i + 1..systems.len() {
            significance.push(SignificanceEntry {
                system_a: systems[i].system_id.clone(),
                system_b: systems[j].system_id.clone(),
                p_value: sign_test(&gold, &systems[i], &systems[j])?,
            });
        }
    }

    let report = EvalReport {
        systems: reports,
        oracle_e,
        oracle_fc,
        significance,
    };
    print!("{}", report.to_tsv());
    if !report.significance.is_empty() {
        println!("# pairwise sign-test p-values (alpha = {})", args.alpha);
        for entry in &report.significance {
            println!(
                "p\t{}\t{}\t{:.6}",
                entry.system_a, entry.system_b, entry.p_value
            );
        }
    }
    write_report(args.out.as_deref(), &report)
}
