use std::fmt::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use super::{action_level_search, word_level_search, OpenFilter, SearchConfig, SearchError, SearchOptions};
use crate::scoring::Scorer;
use crate::treebank::{actions_to_tree, Action, ActionSpace, NtId, Sentence, Tree, Vocabulary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SearchVariant {
    Action,
    Word,
}

impl fmt::Display for SearchVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchVariant::Action => "action",
            SearchVariant::Word => "word",
        })
    }
}

impl FromStr for SearchVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "action" => Ok(SearchVariant::Action),
            "word" => Ok(SearchVariant::Word),
            other => Err(format!("unknown search variant `{}` (expected action or word)", other)),
        }
    }
}

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("nothing to decode")]
    EmptyInput,
    #[error("sentence {0} is empty")]
    EmptySentence(usize),
    #[error("scorer action space {scorer:?} does not match the vocabulary {vocab:?}")]
    VocabularyMismatch { scorer: ActionSpace, vocab: ActionSpace },
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeConfig {
    pub search: SearchConfig,
    pub variant: SearchVariant,
    /// Label of the right-branching tree emitted when search fails.
    pub fallback_root: NtId,
    /// Worker threads; output order never depends on this.
    pub jobs: usize,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            search: SearchConfig::default(),
            variant: SearchVariant::Word,
            fallback_root: NtId(0),
            jobs: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SentenceDiagnostics {
    pub id: usize,
    pub length: usize,
    pub variant: SearchVariant,
    pub states_expanded: usize,
    pub hypotheses_expanded: usize,
    pub buckets_visited: usize,
    pub completed: usize,
    pub pruned: usize,
    /// True when the fallback tree was emitted.
    pub failed: bool,
    pub log_prob: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodedSentence {
    pub tree: Tree,
    /// Best action sequence, absent for fallback trees.
    pub actions: Option<Vec<Action>>,
    pub diagnostics: SentenceDiagnostics,
}

pub const DIAGNOSTICS_HEADER: &str = "sentence_id\tlength\tstates_expanded\tsearch\tfailed\thypotheses_expanded\tbuckets_visited\tcompleted\tpruned\tlog_prob";

/// One tab-separated record per sentence, preceded by a header line.
pub fn diagnostics_tsv(records: &[SentenceDiagnostics]) -> String {
    let mut out = String::new();
    out.push_str(DIAGNOSTICS_HEADER);
    out.push('\n');
    for d in records {
        let lp = d.log_prob.map_or_else(|| "NA".to_string(), |lp| format!("{:?}", lp));
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            d.id,
            d.length,
            d.states_expanded,
            d.variant,
            u8::from(d.failed),
            d.hypotheses_expanded,
            d.buckets_visited,
            d.completed,
            d.pruned,
            lp
        )
        .unwrap();
    }
    out
}

fn decode_one(
    id: usize,
    sentence: &Sentence,
    scorer: &dyn Scorer,
    vocab: &Vocabulary,
    config: &DecodeConfig,
    filter: Option<&dyn OpenFilter>,
) -> DecodedSentence {
    let ids = sentence.ids();
    let options = SearchOptions {
        filter,
        ..SearchOptions::default()
    };
    let result = match config.variant {
        SearchVariant::Action => action_level_search(&ids, scorer, &config.search, options),
        SearchVariant::Word => word_level_search(&ids, scorer, &config.search, options),
    };
    let mut diagnostics = SentenceDiagnostics {
        id,
        length: sentence.len(),
        variant: config.variant,
        states_expanded: 0,
        hypotheses_expanded: 0,
        buckets_visited: 0,
        completed: 0,
        pruned: 0,
        failed: true,
        log_prob: None,
        error: None,
    };
    let mut parsed = None;
    match result {
        Ok(outcome) => {
            diagnostics.states_expanded = outcome.stats.states_expanded;
            diagnostics.hypotheses_expanded = outcome.stats.hypotheses_expanded;
            diagnostics.buckets_visited = outcome.stats.buckets_visited;
            diagnostics.completed = outcome.completed.len();
            diagnostics.pruned = outcome.stats.pruned;
            match outcome.best() {
                Some(best) => {
                    let actions = best.actions();
                    match actions_to_tree(&actions, vocab, sentence) {
                        Ok(tree) => {
                            diagnostics.failed = false;
                            diagnostics.log_prob = Some(best.log_prob());
                            parsed = Some((tree, actions));
                        }
                        Err(e) => diagnostics.error = Some(e.to_string()),
                    }
                }
                None => diagnostics.error = Some("no complete parse".to_string()),
            }
        }
        Err(e) => diagnostics.error = Some(e.to_string()),
    }
    match parsed {
        Some((tree, actions)) => DecodedSentence {
            tree,
            actions: Some(actions),
            diagnostics,
        },
        None => DecodedSentence {
            tree: Tree::right_branching(vocab.label(config.fallback_root), &sentence.surfaces()),
            actions: None,
            diagnostics,
        },
    }
}

/// Decodes every sentence and converts its best hypothesis to a tree.
/// Sentences without a parse get a right-branching fallback tree and are
/// flagged in their diagnostics.
pub fn decode_corpus(
    sentences: &[Sentence],
    scorer: &dyn Scorer,
    vocab: &Vocabulary,
    config: &DecodeConfig,
    filter: Option<&dyn OpenFilter>,
) -> Result<Vec<DecodedSentence>, DecodeError> {
    if sentences.is_empty() {
        return Err(DecodeError::EmptyInput);
    }
    if let Some(i) = sentences.iter().position(Sentence::is_empty) {
        return Err(DecodeError::EmptySentence(i));
    }
    if scorer.space() != ActionSpace::of(vocab) {
        return Err(DecodeError::VocabularyMismatch {
            scorer: scorer.space(),
            vocab: ActionSpace::of(vocab),
        });
    }
    match config.variant {
        SearchVariant::Word => config.search.validate()?,
        SearchVariant::Action => {
            if config.search.beam_size == 0 {
                return Err(SearchError::InvalidConfig("beam size must be at least 1".into()).into());
            }
        }
    }
    if config.jobs <= 1 {
        return Ok(sentences
            .iter()
            .enumerate()
            .map(|(i, s)| decode_one(i, s, scorer, vocab, config, filter))
            .collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| DecodeError::Pool(e.to_string()))?;
    Ok(pool.install(|| {
        sentences
            .par_iter()
            .enumerate()
            .map(|(i, s)| decode_one(i, s, scorer, vocab, config, filter))
            .collect()
    }))
}
