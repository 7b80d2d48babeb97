//! Bracketed trees, shift-reduce linearization and closed vocabularies.
//!
//! Trees carry surface strings; the numeric view used by scorers and search
//! lives in [`Action`] and [`Sentence`], which are produced against a
//! [`Vocabulary`].

mod action;
mod bracket;
mod vocab;

pub use self::action::{
    actions_to_tree, parse_actions, render_actions, tree_to_actions, Action, ActionError, ActionErrorKind, ActionSpace,
    NtId, WordId,
};
pub use self::bracket::{parse_bracketed, serialize_bracketed, PosPolicy, ReadOptions};
pub use self::vocab::{build_vocab, Sentence, SymbolTable, Vocabulary, WordToken, UNK};

use std::fmt;

use thiserror::Error;

/// Errors raised while reading treebanks or building vocabularies.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreebankError {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("structure error at byte {offset}: {message}")]
    Structure { offset: usize, message: String },
    #[error("unknown nonterminal `{0}`")]
    UnknownNonterminal(String),
    #[error("cannot build a vocabulary from an empty treebank")]
    EmptyTreebank,
    #[error(transparent)]
    Action(#[from] ActionError),
}

/// A constituency tree without a part-of-speech layer.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Tree {
    Node { label: String, children: Vec<Tree> },
    Leaf(String),
}

impl Tree {
    pub fn node(label: impl Into<String>, children: Vec<Tree>) -> Tree {
        Tree::Node {
            label: label.into(),
            children,
        }
    }

    pub fn leaf(word: impl Into<String>) -> Tree {
        Tree::Leaf(word.into())
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Tree::Leaf(_))
    }

    /// Label of an internal node, `None` for leaves.
    pub fn label(&self) -> Option<&str> {
        match self {
            Tree::Node { label, .. } => Some(label),
            Tree::Leaf(_) => None,
        }
    }

    pub fn children(&self) -> &[Tree] {
        match self {
            Tree::Node { children, .. } => children,
            Tree::Leaf(_) => &[],
        }
    }

    /// Words in left-to-right order.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Tree::Leaf(w) => out.push(w),
            Tree::Node { children, .. } => {
                for c in children {
                    c.collect_leaves(out);
                }
            }
        }
    }

    pub fn num_leaves(&self) -> usize {
        match self {
            Tree::Leaf(_) => 1,
            Tree::Node { children, .. } => children.iter().map(Tree::num_leaves).sum(),
        }
    }

    pub fn num_internal(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node { children, .. } => 1 + children.iter().map(Tree::num_internal).sum::<usize>(),
        }
    }

    /// Internal-node labels in pre-order.
    pub fn labels(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_labels(&mut out);
        out
    }

    fn collect_labels<'a>(&'a self, out: &mut Vec<&'a str>) {
        if let Tree::Node { label, children } = self {
            out.push(label);
            for c in children {
                c.collect_labels(out);
            }
        }
    }

    /// Right-branching tree `(X w1 (X w2 (X ... wn)))` over the given words.
    ///
    /// Panics if `words` is empty.
    pub fn right_branching<S: AsRef<str>>(label: &str, words: &[S]) -> Tree {
        assert!(!words.is_empty(), "right-branching tree needs at least one word");
        let mut iter = words.iter().rev();
        let last = iter.next().unwrap();
        let mut tree = Tree::node(label, vec![Tree::leaf(last.as_ref())]);
        for w in iter {
            tree = Tree::node(label, vec![Tree::leaf(w.as_ref()), tree]);
        }
        tree
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf(w) => f.write_str(w),
            Tree::Node { label, children } => {
                write!(f, "({}", label)?;
                for c in children {
                    write!(f, " {}", c)?;
                }
                f.write_str(")")
            }
        }
    }
}
