use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use genparse::eval::score_corpus;
use genparse::pruning::{
    corpus_open_stats, format_stats_table, lower_bound_p, parse_stats_table, CoarsePruner, PruneModel, PruneTrainConfig,
};
use genparse::scoring::{train_count_scorer, CountScorer};
use genparse::search::{decode_corpus, diagnostics_tsv, DecodeConfig, DecodedSentence, SearchConfig, SearchVariant};
use genparse::synthetic::Pcfg;
use genparse::treebank::{
    build_vocab, parse_bracketed, render_actions, serialize_bracketed, tree_to_actions, NtId, PosPolicy, ReadOptions,
    Sentence, Tree, Vocabulary,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{parse_fraction, Grid, KeyValues, Size};
use crate::{PosArg, TreebankArgs, UsageError};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn read_options(pos: PosArg) -> ReadOptions {
    ReadOptions {
        pos: match pos {
            PosArg::Auto => PosPolicy::Auto,
            PosArg::Keep => PosPolicy::Keep,
            PosArg::Strip => PosPolicy::Strip,
        },
        ..ReadOptions::default()
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn read_trees(path: &Path, pos: PosArg) -> Result<Vec<Tree>> {
    let trees = parse_bracketed(&read_text(path)?, &read_options(pos))
        .with_context(|| format!("parsing {}", path.display()))?;
    if trees.is_empty() {
        bail!("{} contains no trees", path.display());
    }
    Ok(trees)
}

fn linearize_all(trees: &[Tree], vocab: &Vocabulary) -> Result<Vec<Vec<genparse::treebank::Action>>> {
    trees
        .iter()
        .enumerate()
        .map(|(i, t)| tree_to_actions(t, vocab).with_context(|| format!("tree {}", i + 1)))
        .collect()
}

fn load_corpus(data: &TreebankArgs) -> Result<(Vocabulary, Vec<Vec<genparse::treebank::Action>>)> {
    let trees = read_trees(&data.treebank, data.pos)?;
    let vocab = build_vocab(&trees, data.min_count)?;
    let seqs = linearize_all(&trees, &vocab)?;
    Ok((vocab, seqs))
}

pub fn train_scorer(data: &TreebankArgs, order: usize, alpha: f64, out: &Path) -> Result<()> {
    if order == 0 || !(alpha > 0.0 && alpha.is_finite()) {
        return Err(usage("order must be at least 1 and alpha must be positive"));
    }
    let (vocab, seqs) = load_corpus(data)?;
    let scorer = train_count_scorer(&seqs, &vocab, order, alpha)?;
    let ppl = scorer.perplexity(&seqs)?;
    fs::write(out, scorer.to_text()).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "trees {} nonterminals {} words {} perplexity {:.4}",
        seqs.len(),
        vocab.num_nonterminals(),
        vocab.num_words(),
        ppl
    );
    Ok(())
}

pub fn train_pruner(data: &TreebankArgs, config: &PruneTrainConfig, out: &Path) -> Result<()> {
    if config.embed_dim == 0
        || config.hidden_dim == 0
        || config.batch_size == 0
        || config.learning_rate.is_nan()
        || config.learning_rate <= 0.0
    {
        return Err(usage("dimensions, batch size and learning rate must be positive"));
    }
    let (vocab, seqs) = load_corpus(data)?;
    let (model, report) = genparse::pruning::train_pruner(&seqs, &vocab, config)?;
    fs::write(out, model.to_text()).with_context(|| format!("writing {}", out.display()))?;
    for (epoch, loss) in report.losses.iter().enumerate() {
        println!("epoch {} loss {:.6}", epoch, loss);
    }
    println!("examples {} final loss {:.6}", report.examples, report.final_loss());
    Ok(())
}

#[derive(Args, Debug, Clone)]
pub struct DecodeArgs {
    /// Sentences, one per line, words separated by spaces
    #[arg(long)]
    pub input: PathBuf,
    /// Read the input as a bracketed treebank and decode its leaves
    #[arg(long)]
    pub trees: bool,
    #[arg(long, value_enum, default_value_t = PosArg::Auto)]
    pub pos: PosArg,
    /// Scorer file written by train-scorer
    #[arg(long)]
    pub scorer: PathBuf,
    /// key=value settings file; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Search procedure: word or action
    #[arg(long)]
    pub search: Option<SearchVariant>,
    /// Beam size
    #[arg(long)]
    pub k: Option<usize>,
    /// Word beam size (a number, `k` or `k/N`)
    #[arg(long, value_parser = Size::parse)]
    pub kw: Option<Size>,
    /// Fast-track count (a number, `k` or `k/N`)
    #[arg(long, value_parser = Size::parse)]
    pub ks: Option<Size>,
    /// Pruning model written by train-pruner
    #[arg(long)]
    pub prune_model: Option<PathBuf>,
    /// Fraction of pooled Open successors kept, e.g. 8/26
    #[arg(long, value_parser = parse_fraction)]
    pub p: Option<f64>,
    #[arg(long)]
    pub max_open: Option<usize>,
    #[arg(long)]
    pub max_struct: Option<usize>,
    /// Cut bucket (i+1, 0) to the word beam size
    #[arg(long)]
    pub truncate_word_bucket: Option<bool>,
    /// Worker threads
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output trees; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Diagnostics TSV; defaults to the output path plus `.diag.tsv`
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
}

const DECODE_KEYS: &[&str] = &[
    "search",
    "k",
    "kw",
    "ks",
    "p",
    "max_open",
    "max_struct",
    "truncate_word_bucket",
    "jobs",
];

/// Decoding settings after merging flags, config file and defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeSettings {
    pub variant: SearchVariant,
    pub search: SearchConfig,
    pub p: f64,
    pub jobs: usize,
}

pub fn resolve_settings(args: &DecodeArgs, file: &KeyValues) -> Result<DecodeSettings> {
    file.check_keys(DECODE_KEYS)?;
    let size = |flag: &Option<Size>, key: &str| -> Result<Option<Size>> {
        match flag {
            Some(s) => Ok(Some(s.clone())),
            None => file
                .get(key)
                .map(|v| Size::parse(v).map_err(|e| usage(format!("config key `{}`: {}", key, e))))
                .transpose(),
        }
    };
    let k = match args.k {
        Some(k) => k,
        None => file.value("k")?.unwrap_or(2000),
    };
    if k == 0 {
        return Err(usage("k must be at least 1"));
    }
    let mut search = SearchConfig::with_beam(k);
    if let Some(kw) = size(&args.kw, "kw")? {
        search.word_beam_size = kw.resolve(k);
        search.fast_track = search.fast_track.min(search.word_beam_size);
    }
    if let Some(ks) = size(&args.ks, "ks")? {
        search.fast_track = ks.resolve(k);
    }
    if let Some(m) = args.max_open.or(file.value("max_open")?) {
        search.max_open = m;
    }
    if let Some(m) = args.max_struct.or(file.value("max_struct")?) {
        search.max_struct_per_word = m;
    }
    if let Some(t) = args.truncate_word_bucket.or(file.value("truncate_word_bucket")?) {
        search.truncate_word_bucket = t;
    }
    let variant = match args.search {
        Some(v) => v,
        None => file.value("search")?.unwrap_or(SearchVariant::Word),
    };
    let p = match args.p {
        Some(p) => p,
        None => match file.get("p") {
            Some(v) => parse_fraction(v).map_err(|e| usage(format!("config key `p`: {}", e)))?,
            None => 1.0,
        },
    };
    if !(p > 0.0 && p <= 1.0) {
        return Err(usage(format!("p must lie in (0, 1], got {}", p)));
    }
    if variant == SearchVariant::Word {
        search.validate().map_err(|e| usage(e.to_string()))?;
    }
    let jobs = args.jobs.or(file.value("jobs")?).unwrap_or(1).max(1);
    Ok(DecodeSettings {
        variant,
        search,
        p,
        jobs,
    })
}

fn load_scorer(path: &Path) -> Result<CountScorer> {
    CountScorer::from_text(&read_text(path)?).with_context(|| format!("loading scorer {}", path.display()))
}

fn load_prune_model(path: &Path) -> Result<PruneModel> {
    PruneModel::from_text(&read_text(path)?).with_context(|| format!("loading pruning model {}", path.display()))
}

fn run_decode(
    sentences: &[Sentence],
    scorer: &CountScorer,
    model: Option<&PruneModel>,
    settings: &DecodeSettings,
) -> Result<Vec<DecodedSentence>> {
    let config = DecodeConfig {
        search: settings.search.clone(),
        variant: settings.variant,
        fallback_root: scorer.most_frequent_root().unwrap_or(NtId(0)),
        jobs: settings.jobs,
    };
    let pruner = match model {
        Some(m) => Some(CoarsePruner::new(m.clone(), settings.p, scorer.vocab())?),
        None if settings.p < 1.0 => return Err(usage("p < 1 needs --prune-model")),
        None => None,
    };
    let filter = pruner.as_ref().map(|p| p as &dyn genparse::search::OpenFilter);
    Ok(decode_corpus(sentences, scorer, scorer.vocab(), &config, filter)?)
}

fn read_sentences(path: &Path, as_trees: bool, pos: PosArg, vocab: &Vocabulary) -> Result<Vec<Sentence>> {
    if as_trees {
        return Ok(read_trees(path, pos)?.iter().map(|t| vocab.sentence_of(t)).collect());
    }
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.is_empty() {
            bail!("{} line {}: empty sentence", path.display(), i + 1);
        }
        out.push(vocab.sentence(&words));
    }
    if out.is_empty() {
        bail!("{} contains no sentences", path.display());
    }
    Ok(out)
}

pub fn decode(args: &DecodeArgs) -> Result<()> {
    let file = match &args.config {
        Some(p) => KeyValues::load(p)?,
        None => KeyValues::default(),
    };
    let settings = resolve_settings(args, &file)?;
    if settings.p < 1.0 && args.prune_model.is_none() {
        return Err(usage("p < 1 needs --prune-model"));
    }
    let scorer = load_scorer(&args.scorer)?;
    let model = args.prune_model.as_deref().map(load_prune_model).transpose()?;
    let sentences = read_sentences(&args.input, args.trees, args.pos, scorer.vocab())?;
    let decoded = run_decode(&sentences, &scorer, model.as_ref(), &settings)?;

    let mut trees = String::new();
    for d in &decoded {
        trees.push_str(&serialize_bracketed(&d.tree));
        trees.push('\n');
    }
    write_output(args.out.as_deref(), &trees)?;
    let diag_path = args.diagnostics.clone().or_else(|| {
        args.out.as_ref().map(|o| {
            let mut s = o.as_os_str().to_owned();
            s.push(".diag.tsv");
            PathBuf::from(s)
        })
    });
    let records: Vec<_> = decoded.iter().map(|d| d.diagnostics.clone()).collect();
    if let Some(p) = diag_path {
        fs::write(&p, diagnostics_tsv(&records)).with_context(|| format!("writing {}", p.display()))?;
    }
    let failed = records.iter().filter(|r| r.failed).count();
    if failed > 0 {
        eprintln!("{} of {} sentences fell back to a default tree", failed, records.len());
    }
    Ok(())
}

pub fn stats(
    treebank: Option<&Path>,
    table: Option<&Path>,
    pos: PosArg,
    contexts: &[usize],
    min_occurrences: usize,
    coverage: f64,
    num_nonterminals: Option<usize>,
) -> Result<()> {
    if !(coverage > 0.0 && coverage <= 1.0) {
        return Err(usage("coverage must lie in (0, 1]"));
    }
    if min_occurrences == 0 {
        return Err(usage("min-occurrences must be at least 1"));
    }
    let (rows, n) = match (treebank, table) {
        (Some(path), None) => {
            let trees = read_trees(path, pos)?;
            let vocab = build_vocab(&trees, 1)?;
            let seqs = linearize_all(&trees, &vocab)?;
            let n = num_nonterminals.unwrap_or(vocab.num_nonterminals());
            let mut rows = Vec::new();
            for &c in contexts {
                let s = corpus_open_stats(&seqs, vocab.num_nonterminals(), c, min_occurrences)?;
                rows.push((c, s.cumulative()));
            }
            (rows, n)
        }
        (None, Some(path)) => {
            let Some(n) = num_nonterminals else {
                return Err(usage("--table needs --num-nonterminals"));
            };
            (parse_stats_table(&read_text(path)?)?, n)
        }
        _ => return Err(usage("give exactly one of --treebank and --table")),
    };
    let mut out = format_stats_table(&rows);
    for (c, row) in &rows {
        match lower_bound_p(row, coverage, n) {
            Ok(b) => writeln!(out, "c={} p_min {}/{} = {:.3}", c, b.n, b.of, b.value()).unwrap(),
            Err(e) => writeln!(out, "c={} p_min unavailable: {}", c, e).unwrap(),
        }
    }
    print!("{}", out);
    Ok(())
}

pub fn eval(pred: &Path, gold: &Path, pos: PosArg, per_sentence: Option<&Path>) -> Result<()> {
    let p = read_trees(pred, pos)?;
    let g = read_trees(gold, pos)?;
    let report = score_corpus(&p, &g)?;
    print!("{}", report.summary());
    if report.skipped() > 0 {
        eprintln!("{} sentences skipped for word count mismatch", report.skipped());
    }
    if let Some(path) = per_sentence {
        fs::write(path, report.sentence_tsv()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    /// Grid file with comma-separated `search`, `k`, `kw`, `ks` and `p` lists
    #[arg(long)]
    pub config: PathBuf,
    /// Gold development treebank
    #[arg(long)]
    pub dev: PathBuf,
    #[arg(long, value_enum, default_value_t = PosArg::Auto)]
    pub pos: PosArg,
    #[arg(long)]
    pub scorer: PathBuf,
    #[arg(long)]
    pub prune_model: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output TSV; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub const SWEEP_HEADER: &str = "search\tk\tkw\tks\tp\tf1\tlr\tlp\tmean_states_expanded\tfailed\tstatus";

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let file = KeyValues::load(&args.config)?;
    file.check_keys(Grid::KEYS)?;
    let grid = Grid::from_config(&file)?;
    let jobs = args.jobs.or(file.value("jobs")?).unwrap_or(1).max(1);
    let max_open: Option<usize> = file.value("max_open")?;
    let max_struct: Option<usize> = file.value("max_struct")?;
    let scorer = load_scorer(&args.scorer)?;
    let model = args.prune_model.as_deref().map(load_prune_model).transpose()?;
    let gold = read_trees(&args.dev, args.pos)?;
    let sentences: Vec<Sentence> = gold.iter().map(|t| scorer.vocab().sentence_of(t)).collect();

    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for point in grid.points() {
        let mut search = SearchConfig::with_beam(point.k);
        search.word_beam_size = point.kw.resolve(point.k);
        search.fast_track = point.ks.resolve(point.k);
        if let Some(m) = max_open {
            search.max_open = m;
        }
        if let Some(m) = max_struct {
            search.max_struct_per_word = m;
        }
        let variant: SearchVariant = point.search.parse().map_err(usage)?;
        let settings = DecodeSettings {
            variant,
            search: search.clone(),
            p: point.p,
            jobs,
        };
        let prefix = format!(
            "{}\t{}\t{}\t{}\t{:.6}",
            point.search, point.k, search.word_beam_size, search.fast_track, point.p
        );
        let result = (|| -> Result<String> {
            if variant == SearchVariant::Word {
                search.validate()?;
            }
            let decoded = run_decode(&sentences, &scorer, model.as_ref(), &settings)?;
            let pred: Vec<Tree> = decoded.iter().map(|d| d.tree.clone()).collect();
            let report = score_corpus(&pred, &gold)?;
            let states =
                decoded.iter().map(|d| d.diagnostics.states_expanded).sum::<usize>() as f64 / decoded.len() as f64;
            let failed = decoded.iter().filter(|d| d.diagnostics.failed).count();
            Ok(format!(
                "{:.2}\t{:.2}\t{:.2}\t{:.1}\t{}\tok",
                report.f1(),
                report.recall(),
                report.precision(),
                states,
                failed
            ))
        })();
        match result {
            Ok(cols) => writeln!(out, "{}\t{}", prefix, cols).unwrap(),
            Err(e) => {
                let msg = format!("{:#}", e).replace(['\t', '\n'], " ");
                eprintln!("grid point {} failed: {}", prefix.replace('\t', " "), msg);
                writeln!(out, "{}\tNA\tNA\tNA\tNA\tNA\terror: {}", prefix, msg).unwrap();
            }
        }
    }
    write_output(args.out.as_deref(), &out)
}

pub fn synth(count: usize, min_words: usize, max_words: usize, seed: u64, out: Option<&Path>) -> Result<()> {
    if count == 0 || min_words == 0 || min_words > max_words {
        return Err(usage("need count >= 1 and 1 <= min-words <= max-words"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trees = Pcfg::ptb_like().corpus(&mut rng, count, min_words, max_words);
    let mut text = String::new();
    for t in &trees {
        text.push_str(&serialize_bracketed(t));
        text.push('\n');
    }
    write_output(out, &text)
}

pub fn linearize(data: &TreebankArgs) -> Result<()> {
    let trees = read_trees(&data.treebank, data.pos)?;
    let vocab = build_vocab(&trees, data.min_count)?;
    let mut out = String::new();
    for t in &trees {
        let actions = tree_to_actions(t, &vocab)?;
        let sentence = vocab.sentence_of(t);
        out.push_str(&render_actions(&actions, &vocab, Some(&sentence)));
        out.push('\n');
    }
    print!("{}", out);
    Ok(())
}
