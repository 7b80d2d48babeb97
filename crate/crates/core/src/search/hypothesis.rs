use crate::history::{ConsList, History};
use crate::treebank::{Action, NtId};

/// An immutable partial parse. Successors share their parent's history.
#[derive(Clone, Debug)]
pub struct Hypothesis {
    history: History,
    log_prob: f64,
    word_index: usize,
    struct_index: usize,
    open: ConsList<NtId>,
    seq: u64,
    parent: u64,
}

impl Hypothesis {
    /// The empty hypothesis in bucket (0, 0).
    pub fn initial() -> Hypothesis {
        Hypothesis {
            history: History::new(),
            log_prob: 0.0,
            word_index: 0,
            struct_index: 0,
            open: ConsList::new(),
            seq: 0,
            parent: 0,
        }
    }

    /// Successor after taking `action` with step score `step_log_prob`.
    pub fn extend(&self, action: Action, step_log_prob: f64, seq: u64) -> Hypothesis {
        let (word_index, struct_index, open) = match action {
            Action::Open(nt) => (self.word_index, self.struct_index + 1, self.open.push(nt)),
            Action::Close(_) => (self.word_index, self.struct_index + 1, self.open.pop()),
            Action::Shift(_) => (self.word_index + 1, 0, self.open.clone()),
        };
        Hypothesis {
            history: self.history.push(action),
            log_prob: self.log_prob + step_log_prob,
            word_index,
            struct_index,
            open,
            seq,
            parent: self.seq,
        }
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn actions(&self) -> Vec<Action> {
        self.history.to_vec()
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    pub fn log_prob(&self) -> f64 {
        self.log_prob
    }

    /// Number of Shift actions taken (`i`).
    pub fn word_index(&self) -> usize {
        self.word_index
    }

    /// Number of actions since the `i`-th Shift (`|A_i|`).
    pub fn struct_index(&self) -> usize {
        self.struct_index
    }

    /// Bucket coordinates `(i, |A_i|)`.
    pub fn bucket(&self) -> (usize, usize) {
        (self.word_index, self.struct_index)
    }

    pub fn open_depth(&self) -> usize {
        self.open.len()
    }

    /// Innermost open nonterminal.
    pub fn innermost(&self) -> Option<NtId> {
        self.open.last().copied()
    }

    /// Open nonterminals, outermost first.
    pub fn open_stack(&self) -> Vec<NtId> {
        self.open.to_vec()
    }

    pub fn last_action(&self) -> Option<Action> {
        self.history.last().copied()
    }

    /// Creation order within one search, used to break score ties.
    pub fn seq(&self) -> u64 {
        self.seq
    }

    /// Sequence number of the hypothesis this one extends.
    pub fn parent_seq(&self) -> u64 {
        self.parent
    }

    /// True once the root constituent has been closed.
    pub fn is_complete(&self) -> bool {
        !self.history.is_empty() && self.open.is_empty()
    }
}

/// Higher score first, then earlier creation.
pub(crate) fn rank(a: &Hypothesis, b: &Hypothesis) -> std::cmp::Ordering {
    b.log_prob.total_cmp(&a.log_prob).then(a.seq.cmp(&b.seq))
}

pub(crate) fn sort_and_truncate(hyps: &mut Vec<Hypothesis>, limit: usize) {
    hyps.sort_unstable_by(rank);
    hyps.truncate(limit);
}
