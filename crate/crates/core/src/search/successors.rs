use super::{Hypothesis, SearchConfig};
use crate::treebank::{Action, NtId, WordId};

/// Actions that keep `h` extendable to a complete tree over `sentence`.
///
/// Opens come first in nonterminal order, then the Close, then the Shift.
/// This order fixes insertion sequence numbers and hence tie-breaking.
pub fn valid_successors(
    h: &Hypothesis,
    sentence: &[WordId],
    num_nonterminals: usize,
    config: &SearchConfig,
) -> Vec<Action> {
    let mut out = Vec::new();
    push_valid_successors(h, sentence, num_nonterminals, config, &mut out);
    out
}

pub(crate) fn push_valid_successors(
    h: &Hypothesis,
    sentence: &[WordId],
    num_nonterminals: usize,
    config: &SearchConfig,
    out: &mut Vec<Action>,
) {
    if h.is_complete() {
        return;
    }
    let i = h.word_index();
    let n = sentence.len();
    if i < n && h.open_depth() < config.max_open && h.struct_index() < config.max_struct_per_word {
        out.extend((0..num_nonterminals as u32).map(|x| Action::Open(NtId(x))));
    }
    if h.is_empty() {
        return;
    }
    if let Some(top) = h.innermost() {
        let has_child = !matches!(h.last_action(), Some(Action::Open(_)));
        let is_root = h.open_depth() == 1;
        if has_child && (!is_root || i == n) {
            out.push(Action::Close(top));
        }
        if i < n {
            out.push(Action::Shift(sentence[i]));
        }
    }
}

/// Replays `actions`, checking every step against [`valid_successors`].
/// Returns the index of the first invalid action.
pub fn check_prefix(
    actions: &[Action],
    sentence: &[WordId],
    num_nonterminals: usize,
    config: &SearchConfig,
) -> Result<Hypothesis, usize> {
    let mut h = Hypothesis::initial();
    for (t, &a) in actions.iter().enumerate() {
        if !valid_successors(&h, sentence, num_nonterminals, config).contains(&a) {
            return Err(t);
        }
        h = h.extend(a, 0.0, t as u64 + 1);
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::{build_vocab, parse_bracketed, tree_to_actions, ReadOptions};

    fn config() -> SearchConfig {
        SearchConfig::default()
    }

    #[test]
    fn after_root_open() {
        let sentence: Vec<WordId> = (1..=5).map(WordId).collect();
        let h = Hypothesis::initial().extend(Action::Open(NtId(0)), 0.0, 1);
        let succ = valid_successors(&h, &sentence, 3, &config());
        assert_eq!(
            succ,
            vec![
                Action::Open(NtId(0)),
                Action::Open(NtId(1)),
                Action::Open(NtId(2)),
                Action::Shift(WordId(1)),
            ]
        );
    }

    #[test]
    fn first_action_must_open() {
        let sentence = [WordId(1)];
        let succ = valid_successors(&Hypothesis::initial(), &sentence, 2, &config());
        assert_eq!(succ, vec![Action::Open(NtId(0)), Action::Open(NtId(1))]);
    }

    #[test]
    fn forced_completion() {
        let sentence: Vec<WordId> = (1..=5).map(WordId).collect();
        let mut h = Hypothesis::initial().extend(Action::Open(NtId(0)), 0.0, 1);
        for &w in &sentence {
            h = h.extend(Action::Shift(w), 0.0, 2);
        }
        assert_eq!(
            valid_successors(&h, &sentence, 3, &config()),
            vec![Action::Close(NtId(0))]
        );
        let done = h.extend(Action::Close(NtId(0)), 0.0, 3);
        assert!(valid_successors(&done, &sentence, 3, &config()).is_empty());
    }

    #[test]
    fn caps_remove_opens() {
        let sentence = [WordId(1)];
        let tight = SearchConfig {
            max_open: 2,
            ..config()
        };
        let h = Hypothesis::initial()
            .extend(Action::Open(NtId(0)), 0.0, 1)
            .extend(Action::Open(NtId(1)), 0.0, 2);
        assert_eq!(
            valid_successors(&h, &sentence, 2, &tight),
            vec![Action::Shift(WordId(1))]
        );
        let tight = SearchConfig {
            max_struct_per_word: 2,
            ..config()
        };
        assert_eq!(
            valid_successors(&h, &sentence, 2, &tight),
            vec![Action::Shift(WordId(1))]
        );
    }

    #[test]
    fn non_root_close_before_all_words() {
        let sentence = [WordId(1), WordId(2)];
        let h = Hypothesis::initial()
            .extend(Action::Open(NtId(0)), 0.0, 1)
            .extend(Action::Open(NtId(1)), 0.0, 2)
            .extend(Action::Shift(WordId(1)), 0.0, 3);
        let succ = valid_successors(&h, &sentence, 2, &config());
        assert!(succ.contains(&Action::Close(NtId(1))));
        let h = h.extend(Action::Close(NtId(1)), 0.0, 4);
        let succ = valid_successors(&h, &sentence, 2, &config());
        assert!(!succ.contains(&Action::Close(NtId(0))));
        assert!(succ.contains(&Action::Shift(WordId(2))));
    }

    #[test]
    fn gold_linearization_is_valid_at_every_prefix() {
        let t = parse_bracketed("(S (NP He) (VP had (NP an idea)) .)", &ReadOptions::raw())
            .unwrap()
            .remove(0);
        let v = build_vocab(std::slice::from_ref(&t), 1).unwrap();
        let actions = tree_to_actions(&t, &v).unwrap();
        let sentence = v.sentence_of(&t).ids();
        let h = check_prefix(&actions, &sentence, v.num_nonterminals(), &config()).unwrap();
        assert!(h.is_complete());
    }
}
