//! Successor validity and the beam search procedures.
//!
//! Two searches are provided:
//!
//! * [`action_level_search`] groups hypotheses by the number of actions
//!   taken, so cheap structural actions compete directly with expensive
//!   lexical ones.
//! * [`word_level_search`] groups hypotheses into buckets `(i, |A_i|)` of
//!   words shifted and structural actions since the last shift, with a word
//!   beam at every word boundary and optional fast-tracking of Shift
//!   successors past the top-`k` filter.
//!
//! Both accept an [`OpenFilter`] hook that may discard Open successors
//! before they are scored.

mod action_level;
mod decode;
mod hypothesis;
mod successors;
mod word_level;

pub use self::action_level::action_level_search;
pub use self::decode::{
    decode_corpus, diagnostics_tsv, DecodeConfig, DecodeError, DecodedSentence, SearchVariant, SentenceDiagnostics,
    DIAGNOSTICS_HEADER,
};
pub use self::hypothesis::Hypothesis;
pub use self::successors::{check_prefix, valid_successors};
pub use self::word_level::word_level_search;

use thiserror::Error;

use crate::history::History;
use crate::scoring::{BatchError, ScoreError, ScoreQuery, Scorer};
use crate::treebank::{Action, WordId};

use self::hypothesis::sort_and_truncate;
use self::successors::push_valid_successors;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot parse an empty sentence")]
    EmptySentence,
    #[error("scoring successors of hypothesis {hypothesis} failed: {source}")]
    Scorer {
        hypothesis: u64,
        #[source]
        source: ScoreError,
    },
}

/// Beam sizes and structural caps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Target beam size `k`.
    pub beam_size: usize,
    /// Word beam size `k_w`, applied at word boundaries.
    pub word_beam_size: usize,
    /// Number `k_s` of Shift successors fast-tracked per pool; 0 disables.
    pub fast_track: usize,
    /// Maximum number of simultaneously open constituents.
    pub max_open: usize,
    /// Maximum number of structural actions between two shifts.
    pub max_struct_per_word: usize,
    /// Truncate bucket `(i+1, 0)` to `k_w` before processing it. When false
    /// `k_w` is only used as the stopping signal.
    pub truncate_word_bucket: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig::with_beam(2000)
    }
}

impl SearchConfig {
    /// `k_w = k/10` and `k_s = k/100`, both at least 1.
    pub fn with_beam(k: usize) -> SearchConfig {
        SearchConfig {
            beam_size: k,
            word_beam_size: (k / 10).max(1),
            fast_track: (k / 100).max(1).min(k),
            max_open: 100,
            max_struct_per_word: 40,
            truncate_word_bucket: true,
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let err = |m: String| Err(SearchError::InvalidConfig(m));
        if self.beam_size == 0 {
            return err("beam size must be at least 1".into());
        }
        if self.word_beam_size == 0 || self.word_beam_size > self.beam_size {
            return err(format!(
                "word beam size must lie in 1..={}, got {}",
                self.beam_size, self.word_beam_size
            ));
        }
        if self.fast_track > self.word_beam_size {
            return err(format!(
                "fast-track count {} exceeds the word beam size {}",
                self.fast_track, self.word_beam_size
            ));
        }
        if self.max_open == 0 || self.max_struct_per_word == 0 {
            return err("structural caps must be at least 1".into());
        }
        Ok(())
    }

    /// Upper bound on the length of any complete sequence over `n` words.
    pub fn max_sequence_len(&self, n: usize) -> usize {
        n + 2 * n * self.max_struct_per_word
    }
}

/// An Open successor offered to an [`OpenFilter`].
#[derive(Clone, Copy, Debug)]
pub struct OpenCandidate<'a> {
    pub history: &'a History,
    /// The next word to shift, or `None` when every word has been shifted.
    pub next_word: Option<WordId>,
    pub action: Action,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FilterDecision {
    /// One flag per candidate, in order.
    pub keep: Vec<bool>,
    /// True when the keep count was raised to one by the minimum-one rule.
    pub safeguard: bool,
}

/// Hook run on the pooled Open successors of a bucket (or action-level
/// beam) before scoring.
pub trait OpenFilter: Send + Sync {
    fn filter(&self, candidates: &[OpenCandidate<'_>]) -> FilterDecision;
}

/// Optional extras for a single search call.
#[derive(Clone, Copy, Default)]
pub struct SearchOptions<'a> {
    pub filter: Option<&'a dyn OpenFilter>,
    /// Gold action sequence to follow through the beam (action-level only).
    pub gold: Option<&'a [Action]>,
    /// Record one [`BucketEvent`] per pool evaluation.
    pub trace: bool,
}

/// Per-pool record kept when tracing is enabled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BucketEvent {
    /// Bucket coordinates; for action-level search `i` is 0 and `j` is the step.
    pub i: usize,
    pub j: usize,
    /// Hypotheses expanded.
    pub size: usize,
    /// Successors scored.
    pub pool: usize,
    /// Shift successors in the pool.
    pub shifts_in_pool: usize,
    /// Shift successors that bypassed the top-`k` filter.
    pub fast_tracked: usize,
    /// Size of bucket `(i+1, 0)` after routing.
    pub next_word_bucket: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SearchStats {
    /// Successor states scored by the main scorer.
    pub states_expanded: usize,
    /// Hypotheses whose successors were generated.
    pub hypotheses_expanded: usize,
    /// Pools evaluated (buckets for word-level search, steps for
    /// action-level search).
    pub buckets_visited: usize,
    /// Open successors discarded by the filter.
    pub pruned: usize,
    /// Pools where the filter applied the minimum-one rule.
    pub safeguard_hits: usize,
    /// Sizes of bucket `(i, 0)` when word position `i` began.
    pub word_bucket_sizes: Vec<usize>,
    /// Action-level search: first step whose kept beam lost the gold prefix.
    pub gold_dropped_at: Option<usize>,
    pub events: Vec<BucketEvent>,
}

/// Completed hypotheses, best first, plus instrumentation.
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub completed: Vec<Hypothesis>,
    pub stats: SearchStats,
}

impl SearchOutcome {
    pub fn best(&self) -> Option<&Hypothesis> {
        self.completed.first()
    }

    /// True when search found no complete parse.
    pub fn is_empty(&self) -> bool {
        self.completed.is_empty()
    }
}

/// Generates, filters and scores all successors of `parents`, numbering
/// them from `next_seq`.
pub(crate) fn expand(
    parents: &[Hypothesis],
    sentence: &[WordId],
    scorer: &dyn Scorer,
    config: &SearchConfig,
    filter: Option<&dyn OpenFilter>,
    next_seq: &mut u64,
    stats: &mut SearchStats,
) -> Result<Vec<Hypothesis>, SearchError> {
    let num_nt = scorer.space().num_nonterminals;
    let mut candidates: Vec<Vec<Action>> = parents
        .iter()
        .map(|h| {
            let mut v = Vec::new();
            push_valid_successors(h, sentence, num_nt, config, &mut v);
            v
        })
        .collect();
    stats.hypotheses_expanded += parents.len();

    if let Some(filter) = filter {
        let mut pool = Vec::new();
        for (h, cands) in parents.iter().zip(&candidates) {
            let next_word = sentence.get(h.word_index()).copied();
            pool.extend(cands.iter().filter(|a| a.is_open()).map(|&action| OpenCandidate {
                history: h.history(),
                next_word,
                action,
            }));
        }
        if !pool.is_empty() {
            let decision = filter.filter(&pool);
            debug_assert_eq!(decision.keep.len(), pool.len());
            let mut flags = decision.keep.into_iter();
            for cands in candidates.iter_mut() {
                cands.retain(|a| !a.is_open() || flags.next().unwrap_or(true));
            }
            stats.pruned += pool.len() - candidates.iter().flatten().filter(|a| a.is_open()).count();
            if decision.safeguard {
                stats.safeguard_hits += 1;
            }
        }
    }

    let queries: Vec<ScoreQuery<'_>> = parents
        .iter()
        .zip(&candidates)
        .map(|(h, c)| ScoreQuery {
            history: h.history(),
            candidates: c,
        })
        .collect();
    let scores = scorer
        .score_batch(&queries)
        .map_err(|BatchError { query, source }| SearchError::Scorer {
            hypothesis: parents[query].seq(),
            source,
        })?;

    let mut out = Vec::with_capacity(candidates.iter().map(Vec::len).sum());
    for ((h, cands), lps) in parents.iter().zip(&candidates).zip(scores) {
        for (&a, lp) in cands.iter().zip(lps) {
            *next_seq += 1;
            out.push(h.extend(a, lp, *next_seq));
        }
    }
    stats.states_expanded += out.len();
    Ok(out)
}
