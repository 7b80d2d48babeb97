//! The generative action-scoring contract consumed by every search
//! procedure, plus two reference scorers.
//!
//! A scorer defines `P(a_t | a_1, ..., a_{t-1})` over the full action
//! vocabulary. Search only ever asks for the log probabilities of valid
//! successors, but the distribution must be normalised over every action so
//! that the log probability of a complete sequence is the sum of its step
//! scores.

mod count;
mod table;

pub use self::count::{train_count_scorer, CountScorer};
pub use self::table::{normalize, TableScorer};

use thiserror::Error;

use crate::history::History;
use crate::textfmt::FormatError;
use crate::treebank::{Action, ActionSpace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoreError {
    #[error("action {0:?} is outside the scorer's action space")]
    UnknownAction(Action),
    #[error("scorer failure: {0}")]
    Failed(String),
}

/// Error from a batched call, naming the offending query.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("query {query}: {source}")]
pub struct BatchError {
    pub query: usize,
    #[source]
    pub source: ScoreError,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoringError {
    #[error("cannot train on an empty corpus")]
    EmptyCorpus,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("distribution does not sum to one (sum = {0})")]
    Unnormalized(f64),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Score(#[from] ScoreError),
}

/// One hypothesis' worth of work for [`Scorer::score_batch`].
#[derive(Clone, Copy, Debug)]
pub struct ScoreQuery<'a> {
    pub history: &'a History,
    pub candidates: &'a [Action],
}

/// A generative model over action sequences.
///
/// Implementations must be pure functions of the history: two calls with
/// equal histories return identical scores.
pub trait Scorer: Send + Sync {
    fn space(&self) -> ActionSpace;

    /// Log probability of each candidate as the next action after `history`.
    fn log_probs(&self, history: &History, candidates: &[Action]) -> Result<Vec<f64>, ScoreError>;

    /// Scores the successors of a whole pool of hypotheses. The default
    /// simply loops; batched models override this.
    fn score_batch(&self, queries: &[ScoreQuery<'_>]) -> Result<Vec<Vec<f64>>, BatchError> {
        queries
            .iter()
            .enumerate()
            .map(|(query, q)| {
                self.log_probs(q.history, q.candidates)
                    .map_err(|source| BatchError { query, source })
            })
            .collect()
    }
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn space(&self) -> ActionSpace {
        (**self).space()
    }

    fn log_probs(&self, history: &History, candidates: &[Action]) -> Result<Vec<f64>, ScoreError> {
        (**self).log_probs(history, candidates)
    }

    fn score_batch(&self, queries: &[ScoreQuery<'_>]) -> Result<Vec<Vec<f64>>, BatchError> {
        (**self).score_batch(queries)
    }
}

/// Sum of step log probabilities of a complete sequence.
pub fn sequence_log_prob<S: Scorer + ?Sized>(scorer: &S, actions: &[Action]) -> Result<f64, ScoreError> {
    let mut history = History::new();
    let mut total = 0.0;
    for &a in actions {
        total += scorer.log_probs(&history, &[a])?[0];
        history = history.push(a);
    }
    Ok(total)
}

/// Per-step log probabilities of a sequence.
pub fn step_log_probs<S: Scorer + ?Sized>(scorer: &S, actions: &[Action]) -> Result<Vec<f64>, ScoreError> {
    let mut history = History::new();
    let mut out = Vec::with_capacity(actions.len());
    for &a in actions {
        out.push(scorer.log_probs(&history, &[a])?[0]);
        history = history.push(a);
    }
    Ok(out)
}

/// Sum of `exp(log P(a | history))` over the full action vocabulary.
pub fn total_mass<S: Scorer + ?Sized>(scorer: &S, history: &History) -> Result<f64, ScoreError> {
    let all: Vec<Action> = scorer.space().iter().collect();
    Ok(scorer.log_probs(history, &all)?.iter().map(|lp| lp.exp()).sum())
}
