//! Coarse Open-action pruning.
//!
//! A small feed-forward model over collapsed actions (all Shifts merged into
//! one symbol) scores the Open successors pooled across a bucket, and only
//! the top `p` fraction of them is passed on to the main scorer.

mod model;
mod stats;
mod train;

pub use self::model::{Example, Gradient, PruneInput, PruneModel};
pub use self::stats::{corpus_open_stats, format_stats_table, lower_bound_p, parse_stats_table, LowerBound, OpenStats};
pub use self::train::{train_pruner, PruneTrainConfig, TrainReport};

use std::collections::HashMap;
use std::sync::Mutex;

use thiserror::Error;

use crate::search::{FilterDecision, OpenCandidate, OpenFilter};
use crate::textfmt::FormatError;
use crate::treebank::{Action, NtId, Vocabulary};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PruneError {
    #[error("no training data")]
    EmptyCorpus,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("training diverged in epoch {epoch}, batch {batch} (loss {loss})")]
    Diverged { epoch: usize, batch: usize, loss: f64 },
    #[error("no pruning input occurs at least {min_occurrences} times with an Open output")]
    NoQualifyingInputs { min_occurrences: usize },
    #[error("cumulative table is not monotone")]
    NotMonotone,
    #[error("coverage {0} is never reached")]
    CoverageUnreachable(f64),
    #[error("table line {line}: {message}")]
    Table { line: usize, message: String },
    #[error(transparent)]
    Format(#[from] FormatError),
}

/// Output symbol of the coarse model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CollapsedAction {
    Open(NtId),
    Close(NtId),
    ShiftAny,
}

impl CollapsedAction {
    /// Opens at `0..n`, Closes at `n..2n`, the Shift symbol at `2n`.
    pub fn index(self, num_nonterminals: usize) -> u32 {
        let n = num_nonterminals as u32;
        match self {
            CollapsedAction::Open(x) => x.0,
            CollapsedAction::Close(x) => n + x.0,
            CollapsedAction::ShiftAny => 2 * n,
        }
    }
}

impl From<Action> for CollapsedAction {
    fn from(a: Action) -> Self {
        match a {
            Action::Open(x) => CollapsedAction::Open(x),
            Action::Close(x) => CollapsedAction::Close(x),
            Action::Shift(_) => CollapsedAction::ShiftAny,
        }
    }
}

/// Number of items kept out of `n` at fraction `p`: `floor(p n)`, raised to
/// one when `n > 0`. The second value reports whether the raise happened.
pub fn keep_count(n: usize, p: f64) -> (usize, bool) {
    let k = ((p * n as f64) + 1e-9).floor() as usize;
    let k = k.min(n);
    if k == 0 && n > 0 {
        (1, true)
    } else {
        (k, false)
    }
}

/// Keeps the `keep_count(scores.len(), p)` highest scores; ties go to the
/// earlier index.
pub fn quantile_keep(scores: &[f64], p: f64) -> FilterDecision {
    let (k, safeguard) = keep_count(scores.len(), p);
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut keep = vec![false; scores.len()];
    for &i in &order[..k] {
        keep[i] = true;
    }
    FilterDecision { keep, safeguard }
}

/// [`OpenFilter`] that keeps the top `p` fraction of pooled Open successors
/// by coarse-model probability.
///
/// The model may use a different vocabulary from the search; labels and
/// words are matched by name, with unknown words mapped to the model's
/// unknown-word row.
pub struct CoarsePruner {
    model: PruneModel,
    p: f64,
    /// Collapsed row of each search-side action index.
    open_rows: Vec<Option<u32>>,
    close_rows: Vec<Option<u32>>,
    word_rows: Vec<u32>,
    calls: Mutex<usize>,
}

impl CoarsePruner {
    pub fn new(model: PruneModel, p: f64, search_vocab: &Vocabulary) -> Result<CoarsePruner, PruneError> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(PruneError::InvalidParameter(format!("p must lie in (0, 1], got {}", p)));
        }
        let mv = model.vocab();
        let nt_rows: Vec<Option<NtId>> = search_vocab.nonterminals().iter().map(|l| mv.nonterminal(l)).collect();
        let open_rows = nt_rows
            .iter()
            .map(|x| x.map(|x| model.action_row(CollapsedAction::Open(x))))
            .collect();
        let close_rows = nt_rows
            .iter()
            .map(|x| x.map(|x| model.action_row(CollapsedAction::Close(x))))
            .collect();
        let word_rows = search_vocab
            .words()
            .iter()
            .map(|w| model.word_row(mv.word(w)))
            .collect();
        Ok(CoarsePruner {
            model,
            p,
            open_rows,
            close_rows,
            word_rows,
            calls: Mutex::new(0),
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn model(&self) -> &PruneModel {
        &self.model
    }

    /// Number of coarse forward passes run so far.
    pub fn forward_calls(&self) -> usize {
        *self.calls.lock().unwrap()
    }

    /// Model input for a candidate, in the model's own rows. Labels the
    /// model has never seen fall back to the begin-of-sequence row.
    pub fn input(&self, candidate: &OpenCandidate<'_>) -> PruneInput {
        let c = self.model.context();
        let bos = self.model.bos_row();
        let mut context: Vec<u32> = candidate
            .history
            .iter_rev()
            .take(c)
            .map(|&a| match a {
                Action::Open(x) => self.open_rows[x.0 as usize].unwrap_or(bos),
                Action::Close(x) => self.close_rows[x.0 as usize].unwrap_or(bos),
                Action::Shift(_) => self.model.action_row(CollapsedAction::ShiftAny),
            })
            .collect();
        context.resize(c, bos);
        context.reverse();
        PruneInput {
            context,
            word: candidate
                .next_word
                .map_or(self.model.eos_row(), |w| self.word_rows[w.0 as usize]),
        }
    }

    /// Coarse probability of each candidate's Open action; one forward pass
    /// per distinct input.
    pub fn scores(&self, candidates: &[OpenCandidate<'_>]) -> Vec<f64> {
        let mut cache: HashMap<PruneInput, Vec<f64>> = HashMap::new();
        let mut out = Vec::with_capacity(candidates.len());
        for cand in candidates {
            let Action::Open(x) = cand.action else {
                panic!("pruning candidates must be Open actions, got {:?}", cand.action);
            };
            let Some(row) = self.open_rows[x.0 as usize] else {
                out.push(0.0);
                continue;
            };
            let input = self.input(cand);
            let probs = cache.entry(input).or_insert_with_key(|k| self.model.forward(k));
            out.push(probs[row as usize]);
        }
        *self.calls.lock().unwrap() += cache.len();
        out
    }
}

impl OpenFilter for CoarsePruner {
    fn filter(&self, candidates: &[OpenCandidate<'_>]) -> FilterDecision {
        if self.p >= 1.0 {
            return FilterDecision {
                keep: vec![true; candidates.len()],
                safeguard: false,
            };
        }
        quantile_keep(&self.scores(candidates), self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::History;
    use crate::treebank::WordId;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn keep_count_rule() {
        assert_eq!(keep_count(26, 8.0 / 26.0), (8, false));
        assert_eq!(keep_count(26, 1.0), (26, false));
        assert_eq!(keep_count(3, 0.2), (1, true));
        assert_eq!(keep_count(0, 0.5), (0, false));
        assert_eq!(keep_count(10, 0.25), (2, false));
    }

    #[test]
    fn quantile_keeps_top_scores_with_stable_ties() {
        let d = quantile_keep(&[0.1, 0.5, 0.5, 0.3, 0.5], 0.4);
        assert_eq!(d.keep, vec![false, true, true, false, false]);
        assert!(!d.safeguard);
    }

    #[test]
    fn twenty_six_opens_keep_eight_best() {
        let labels: Vec<String> = (0..26).map(|i| format!("X{}", i)).collect();
        let vocab = Vocabulary::new(&labels, ["w"]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let model = PruneModel::random(&vocab, 2, 4, 8, &mut rng);
        let pruner = CoarsePruner::new(model.clone(), 8.0 / 26.0, &vocab).unwrap();
        let history = History::from_slice(&[Action::Open(NtId(0))]);
        let next_word = Some(WordId(1));
        let pool: Vec<OpenCandidate> = (0..26)
            .map(|i| OpenCandidate {
                history: &history,
                next_word,
                action: Action::Open(NtId(i)),
            })
            .collect();
        let decision = pruner.filter(&pool);
        assert_eq!(decision.keep.iter().filter(|&&k| k).count(), 8);
        assert_eq!(pruner.forward_calls(), 1);

        let probs = model.forward(&model.input_for(&history, next_word));
        let mut best: Vec<usize> = (0..26).collect();
        best.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]));
        let kept: Vec<usize> = (0..26).filter(|&i| decision.keep[i]).collect();
        let mut expected = best[..8].to_vec();
        expected.sort();
        assert_eq!(kept, expected);
    }

    #[test]
    fn full_fraction_keeps_everything_without_scoring() {
        let vocab = Vocabulary::new(["S"], ["w"]);
        let pruner = CoarsePruner::new(PruneModel::zeros(&vocab, 1, 2, 2), 1.0, &vocab).unwrap();
        let h = History::new();
        let pool = [OpenCandidate {
            history: &h,
            next_word: None,
            action: Action::Open(NtId(0)),
        }];
        assert_eq!(pruner.filter(&pool).keep, vec![true]);
        assert_eq!(pruner.forward_calls(), 0);
        assert!(CoarsePruner::new(PruneModel::zeros(&vocab, 1, 2, 2), 0.0, &vocab).is_err());
    }

    #[test]
    fn vocabularies_are_matched_by_name() {
        let model_vocab = Vocabulary::new(["NP", "S"], ["a"]);
        let search_vocab = Vocabulary::new(["S", "NP", "PP"], ["b", "a"]);
        let pruner = CoarsePruner::new(PruneModel::zeros(&model_vocab, 2, 2, 2), 0.5, &search_vocab).unwrap();
        let h = History::from_slice(&[Action::Open(NtId(0)), Action::Open(NtId(2))]);
        let cand = OpenCandidate {
            history: &h,
            next_word: Some(search_vocab.word("b")),
            action: Action::Open(NtId(1)),
        };
        let input = pruner.input(&cand);
        let m = pruner.model();
        let s_row = m.action_row(CollapsedAction::Open(NtId(1)));
        assert_eq!(input.context, vec![s_row, m.bos_row()]);
        assert_eq!(input.word, m.word_row(m.vocab().unk()));
    }
}
