use std::collections::HashMap;

use super::{ScoreError, Scorer, ScoringError};
use crate::history::History;
use crate::treebank::{Action, ActionSpace};

const TOLERANCE: f64 = 1e-9;

/// Explicit per-history distributions with a default for unlisted
/// histories. Intended for tests and hand-built examples.
#[derive(Clone, Debug)]
pub struct TableScorer {
    space: ActionSpace,
    default: Vec<f64>,
    table: HashMap<Vec<Action>, Vec<f64>>,
}

fn check(space: &ActionSpace, dist: &[f64]) -> Result<(), ScoringError> {
    if dist.len() != space.size() {
        return Err(ScoringError::InvalidParameter(format!(
            "distribution has {} entries, action space has {}",
            dist.len(),
            space.size()
        )));
    }
    if dist.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
        return Err(ScoringError::InvalidParameter(
            "probabilities must be positive and finite".into(),
        ));
    }
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > TOLERANCE {
        return Err(ScoringError::Unnormalized(sum));
    }
    Ok(())
}

impl TableScorer {
    /// `default` is indexed by [`ActionSpace::index`].
    pub fn new(space: ActionSpace, default: Vec<f64>) -> Result<TableScorer, ScoringError> {
        check(&space, &default)?;
        Ok(TableScorer {
            space,
            default,
            table: HashMap::new(),
        })
    }

    pub fn uniform(space: ActionSpace) -> TableScorer {
        let p = 1.0 / space.size() as f64;
        TableScorer {
            space,
            default: vec![p; space.size()],
            table: HashMap::new(),
        }
    }

    /// Builds the default distribution from unnormalised positive weights.
    pub fn from_weights<F>(space: ActionSpace, weight: F) -> Result<TableScorer, ScoringError>
    where
        F: Fn(Action) -> f64,
    {
        let dist = normalize(space.iter().map(weight).collect());
        TableScorer::new(space, dist)
    }

    /// Sets the distribution after the exact history `history`.
    pub fn insert(&mut self, history: Vec<Action>, dist: Vec<f64>) -> Result<(), ScoringError> {
        check(&self.space, &dist)?;
        self.table.insert(history, dist);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

/// Scales positive weights to sum to one.
pub fn normalize(mut weights: Vec<f64>) -> Vec<f64> {
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    weights
}

impl Scorer for TableScorer {
    fn space(&self) -> ActionSpace {
        self.space
    }

    fn log_probs(&self, history: &History, candidates: &[Action]) -> Result<Vec<f64>, ScoreError> {
        let dist = if self.table.is_empty() {
            &self.default
        } else {
            self.table.get(&history.to_vec()).unwrap_or(&self.default)
        };
        candidates
            .iter()
            .map(|&a| {
                let idx = self.space.index(a) as usize;
                let in_range = match a {
                    Action::Open(n) | Action::Close(n) => (n.0 as usize) < self.space.num_nonterminals,
                    Action::Shift(w) => (w.0 as usize) < self.space.num_words,
                };
                if !in_range {
                    return Err(ScoreError::UnknownAction(a));
                }
                Ok(dist[idx].ln())
            })
            .collect()
    }
}
