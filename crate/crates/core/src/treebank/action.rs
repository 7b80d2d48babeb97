use std::fmt;

use thiserror::Error;

use super::{Sentence, Tree, TreebankError, Vocabulary, WordToken};

/// Index into the nonterminal vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NtId(pub u32);

/// Index into the word vocabulary; 0 is the unknown word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WordId(pub u32);

/// A shift-reduce action. `Close` carries the label of the constituent it
/// closes, which must equal the innermost open one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Open(NtId),
    Close(NtId),
    Shift(WordId),
}

impl Action {
    pub fn is_open(self) -> bool {
        matches!(self, Action::Open(_))
    }

    pub fn is_close(self) -> bool {
        matches!(self, Action::Close(_))
    }

    pub fn is_shift(self) -> bool {
        matches!(self, Action::Shift(_))
    }

    /// Open and Close are structural; Shift is lexical.
    pub fn is_structural(self) -> bool {
        !self.is_shift()
    }
}

/// Dense indexing of the full action vocabulary: all Opens, then all
/// Closes, then one Shift per word. One extra index past the end is reserved
/// for the begin-of-sequence padding symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ActionSpace {
    pub num_nonterminals: usize,
    pub num_words: usize,
}

impl ActionSpace {
    pub fn of(vocab: &Vocabulary) -> ActionSpace {
        ActionSpace {
            num_nonterminals: vocab.num_nonterminals(),
            num_words: vocab.num_words(),
        }
    }

    /// Number of real actions (excluding padding).
    pub fn size(&self) -> usize {
        2 * self.num_nonterminals + self.num_words
    }

    pub fn bos(&self) -> u32 {
        self.size() as u32
    }

    pub fn index(&self, action: Action) -> u32 {
        let n = self.num_nonterminals as u32;
        match action {
            Action::Open(NtId(x)) => x,
            Action::Close(NtId(x)) => n + x,
            Action::Shift(WordId(w)) => 2 * n + w,
        }
    }

    pub fn action(&self, index: u32) -> Option<Action> {
        let n = self.num_nonterminals as u32;
        let idx = index as usize;
        if idx >= self.size() {
            None
        } else if index < n {
            Some(Action::Open(NtId(index)))
        } else if index < 2 * n {
            Some(Action::Close(NtId(index - n)))
        } else {
            Some(Action::Shift(WordId(index - 2 * n)))
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Action> + '_ {
        (0..self.size() as u32).map(move |i| self.action(i).unwrap())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionErrorKind {
    EmptySequence,
    ShiftOutsideConstituent,
    ExtraWord,
    WrongWord { expected: WordId, found: WordId },
    CloseWithoutOpen,
    MismatchedClose { expected: NtId, found: NtId },
    EmptyConstituent,
    PrematureRootClose,
    AfterCompletion,
    Unclosed { open: usize },
    MissingWords { remaining: usize },
}

impl fmt::Display for ActionErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionErrorKind::EmptySequence => f.write_str("empty action sequence"),
            ActionErrorKind::ShiftOutsideConstituent => f.write_str("shift with no open constituent"),
            ActionErrorKind::ExtraWord => f.write_str("shift past the end of the sentence"),
            ActionErrorKind::WrongWord { expected, found } => write!(
                f,
                "shift of word {} where the sentence has word {}",
                found.0, expected.0
            ),
            ActionErrorKind::CloseWithoutOpen => f.write_str("close with no open constituent"),
            ActionErrorKind::MismatchedClose { expected, found } => write!(
                f,
                "close of nonterminal {} while nonterminal {} is innermost",
                found.0, expected.0
            ),
            ActionErrorKind::EmptyConstituent => f.write_str("close directly after open (zero-child constituent)"),
            ActionErrorKind::PrematureRootClose => f.write_str("root closed before all words were shifted"),
            ActionErrorKind::AfterCompletion => f.write_str("action after the root was closed"),
            ActionErrorKind::Unclosed { open } => {
                write!(f, "{} constituent(s) left open", open)
            }
            ActionErrorKind::MissingWords { remaining } => {
                write!(f, "{} word(s) never shifted", remaining)
            }
        }
    }
}

/// A validity violation at the first offending action.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid action sequence at index {index}: {kind}")]
pub struct ActionError {
    pub index: usize,
    pub kind: ActionErrorKind,
}

/// Depth-first, left-to-right linearization of `tree`.
pub fn tree_to_actions(tree: &Tree, vocab: &Vocabulary) -> Result<Vec<Action>, TreebankError> {
    fn walk(t: &Tree, vocab: &Vocabulary, out: &mut Vec<Action>) -> Result<(), TreebankError> {
        match t {
            Tree::Leaf(w) => out.push(Action::Shift(vocab.word(w))),
            Tree::Node { label, children } => {
                let nt = vocab
                    .nonterminal(label)
                    .ok_or_else(|| TreebankError::UnknownNonterminal(label.clone()))?;
                out.push(Action::Open(nt));
                for c in children {
                    walk(c, vocab, out)?;
                }
                out.push(Action::Close(nt));
            }
        }
        Ok(())
    }
    let mut out = Vec::with_capacity(2 * tree.num_internal() + tree.num_leaves());
    walk(tree, vocab, &mut out)?;
    Ok(out)
}

/// Rebuilds the tree spelled by a complete action sequence over `sentence`.
/// Leaves take their surface forms from the sentence.
pub fn actions_to_tree(actions: &[Action], vocab: &Vocabulary, sentence: &Sentence) -> Result<Tree, ActionError> {
    let err = |index, kind| ActionError { index, kind };
    if actions.is_empty() {
        return Err(err(0, ActionErrorKind::EmptySequence));
    }
    let mut stack: Vec<(NtId, Vec<Tree>)> = Vec::new();
    let mut shifted = 0;
    let mut root: Option<Tree> = None;
    for (index, &action) in actions.iter().enumerate() {
        if root.is_some() {
            return Err(err(index, ActionErrorKind::AfterCompletion));
        }
        match action {
            Action::Open(nt) => stack.push((nt, Vec::new())),
            Action::Shift(w) => {
                let top = stack
                    .last_mut()
                    .ok_or_else(|| err(index, ActionErrorKind::ShiftOutsideConstituent))?;
                let token = sentence
                    .tokens
                    .get(shifted)
                    .ok_or_else(|| err(index, ActionErrorKind::ExtraWord))?;
                if token.id != w {
                    return Err(err(
                        index,
                        ActionErrorKind::WrongWord {
                            expected: token.id,
                            found: w,
                        },
                    ));
                }
                top.1.push(Tree::Leaf(token.surface.clone()));
                shifted += 1;
            }
            Action::Close(nt) => {
                let (open, children) = stack
                    .pop()
                    .ok_or_else(|| err(index, ActionErrorKind::CloseWithoutOpen))?;
                if open != nt {
                    return Err(err(
                        index,
                        ActionErrorKind::MismatchedClose {
                            expected: open,
                            found: nt,
                        },
                    ));
                }
                if children.is_empty() {
                    return Err(err(index, ActionErrorKind::EmptyConstituent));
                }
                let node = Tree::Node {
                    label: vocab.label(nt).to_string(),
                    children,
                };
                match stack.last_mut() {
                    Some(parent) => parent.1.push(node),
                    None => {
                        if shifted < sentence.len() {
                            return Err(err(index, ActionErrorKind::PrematureRootClose));
                        }
                        root = Some(node);
                    }
                }
            }
        }
    }
    match root {
        Some(tree) => Ok(tree),
        None if !stack.is_empty() => Err(err(actions.len(), ActionErrorKind::Unclosed { open: stack.len() })),
        None => Err(err(
            actions.len(),
            ActionErrorKind::MissingWords {
                remaining: sentence.len() - shifted,
            },
        )),
    }
}

/// Renders a sequence as `(S (NP He NP) ... S)`. Shifts print the sentence's
/// surface forms when available and the vocabulary's otherwise.
pub fn render_actions(actions: &[Action], vocab: &Vocabulary, sentence: Option<&Sentence>) -> String {
    let mut out = String::new();
    let mut shifted = 0;
    for (i, &a) in actions.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        match a {
            Action::Open(nt) => {
                out.push('(');
                out.push_str(vocab.label(nt));
            }
            Action::Close(nt) => {
                out.push_str(vocab.label(nt));
                out.push(')');
            }
            Action::Shift(w) => {
                let surface = sentence
                    .and_then(|s| s.tokens.get(shifted))
                    .map(|t| t.surface.as_str())
                    .unwrap_or_else(|| vocab.surface(w));
                out.push_str(surface);
                shifted += 1;
            }
        }
    }
    out
}

/// Parses one line of the action text format back into actions and the
/// sentence they shift.
pub fn parse_actions(line: &str, vocab: &Vocabulary) -> Result<(Vec<Action>, Sentence), TreebankError> {
    let mut actions = Vec::new();
    let mut sentence = Sentence::default();
    let lookup = |label: &str| {
        vocab
            .nonterminal(label)
            .ok_or_else(|| TreebankError::UnknownNonterminal(label.to_string()))
    };
    for token in line.split_whitespace() {
        if let Some(label) = token.strip_prefix('(').filter(|l| !l.is_empty()) {
            actions.push(Action::Open(lookup(label)?));
        } else if let Some(label) = token.strip_suffix(')').filter(|l| !l.is_empty()) {
            actions.push(Action::Close(lookup(label)?));
        } else {
            let id = vocab.word(token);
            sentence.tokens.push(WordToken {
                id,
                surface: token.to_string(),
            });
            actions.push(Action::Shift(id));
        }
    }
    Ok((actions, sentence))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::{build_vocab, parse_bracketed, ReadOptions};

    fn setup() -> (Tree, Vocabulary, Sentence) {
        let t = parse_bracketed("(S (NP He) (VP had (NP an idea)) .)", &ReadOptions::raw())
            .unwrap()
            .remove(0);
        let v = build_vocab(std::slice::from_ref(&t), 1).unwrap();
        let s = v.sentence_of(&t);
        (t, v, s)
    }

    #[test]
    fn linearizes_example() {
        let (t, v, s) = setup();
        let actions = tree_to_actions(&t, &v).unwrap();
        assert_eq!(actions.len(), 13);
        assert_eq!(
            render_actions(&actions, &v, Some(&s)),
            "(S (NP He NP) (VP had (NP an idea NP) VP) . S)"
        );
        let nt = |l| v.nonterminal(l).unwrap();
        let w = |s| v.word(s);
        let expected = vec![
            Action::Open(nt("S")),
            Action::Open(nt("NP")),
            Action::Shift(w("He")),
            Action::Close(nt("NP")),
            Action::Open(nt("VP")),
            Action::Shift(w("had")),
            Action::Open(nt("NP")),
            Action::Shift(w("an")),
            Action::Shift(w("idea")),
            Action::Close(nt("NP")),
            Action::Close(nt("VP")),
            Action::Shift(w(".")),
            Action::Close(nt("S")),
        ];
        assert_eq!(actions, expected);
        assert_eq!(actions_to_tree(&actions, &v, &s).unwrap(), t);
    }

    #[test]
    fn minimal_sequence() {
        let t = Tree::node("X", vec![Tree::leaf("w")]);
        let v = build_vocab(std::slice::from_ref(&t), 1).unwrap();
        let s = v.sentence_of(&t);
        let a = tree_to_actions(&t, &v).unwrap();
        assert_eq!(
            a,
            vec![Action::Open(NtId(0)), Action::Shift(WordId(1)), Action::Close(NtId(0))]
        );
        assert_eq!(actions_to_tree(&a, &v, &s).unwrap().to_string(), "(X w)");
    }

    #[test]
    fn zero_child_is_rejected() {
        let v = Vocabulary::new(["X"], ["w"]);
        let s = v.sentence(&["w"]);
        let e = actions_to_tree(&[Action::Open(NtId(0)), Action::Close(NtId(0))], &v, &s).unwrap_err();
        assert_eq!(
            e,
            ActionError {
                index: 1,
                kind: ActionErrorKind::EmptyConstituent
            }
        );
    }

    #[test]
    fn reports_first_offending_index() {
        let (t, v, s) = setup();
        let mut a = tree_to_actions(&t, &v).unwrap();
        let nt = |l| v.nonterminal(l).unwrap();

        let mut bad = a.clone();
        bad[3] = Action::Close(nt("VP"));
        assert!(matches!(
            actions_to_tree(&bad, &v, &s).unwrap_err(),
            ActionError {
                index: 3,
                kind: ActionErrorKind::MismatchedClose { .. }
            }
        ));

        let truncated = &a[..12];
        assert_eq!(
            actions_to_tree(truncated, &v, &s).unwrap_err(),
            ActionError {
                index: 12,
                kind: ActionErrorKind::Unclosed { open: 1 }
            }
        );

        // Close the root before the final word.
        let early = vec![
            Action::Open(nt("S")),
            Action::Shift(v.word("He")),
            Action::Close(nt("S")),
        ];
        assert_eq!(
            actions_to_tree(&early, &v, &s).unwrap_err().kind,
            ActionErrorKind::PrematureRootClose
        );

        a.push(Action::Open(nt("S")));
        assert_eq!(
            actions_to_tree(&a, &v, &s).unwrap_err(),
            ActionError {
                index: 13,
                kind: ActionErrorKind::AfterCompletion
            }
        );

        assert_eq!(
            actions_to_tree(&[Action::Shift(v.word("He"))], &v, &s)
                .unwrap_err()
                .kind,
            ActionErrorKind::ShiftOutsideConstituent
        );
    }

    #[test]
    fn action_text_roundtrip() {
        let (t, v, s) = setup();
        let a = tree_to_actions(&t, &v).unwrap();
        let line = render_actions(&a, &v, Some(&s));
        let (back, sentence) = parse_actions(&line, &v).unwrap();
        assert_eq!(back, a);
        assert_eq!(sentence, s);
    }

    #[test]
    fn action_space_indexing() {
        let space = ActionSpace {
            num_nonterminals: 3,
            num_words: 4,
        };
        assert_eq!(space.size(), 10);
        for (i, a) in space.iter().enumerate() {
            assert_eq!(space.index(a), i as u32);
        }
        assert_eq!(space.action(space.bos()), None);
    }
}
