use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

use super::{ScoreError, Scorer, ScoringError};
use crate::history::History;
use crate::textfmt::{read_vocab, write_vocab, Lines};
use crate::treebank::{Action, ActionSpace, NtId, Vocabulary};

const MAGIC: &str = "genparse-count-scorer";
const VERSION: u32 = 1;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct ContextCounts {
    total: u64,
    next: HashMap<u32, u64>,
}

/// Additively smoothed m-gram model over actions:
/// `P(a | ctx) = (count(ctx, a) + alpha) / (count(ctx) + alpha * |actions|)`
/// where `ctx` is the previous `order` actions, padded with a
/// begin-of-sequence symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct CountScorer {
    order: usize,
    alpha: f64,
    vocab: Vocabulary,
    space: ActionSpace,
    contexts: HashMap<Box<[u32]>, ContextCounts>,
}

/// Counts every length-`order` context in `sequences`.
pub fn train_count_scorer(
    sequences: &[Vec<Action>],
    vocab: &Vocabulary,
    order: usize,
    alpha: f64,
) -> Result<CountScorer, ScoringError> {
    if sequences.is_empty() || sequences.iter().all(Vec::is_empty) {
        return Err(ScoringError::EmptyCorpus);
    }
    if order == 0 {
        return Err(ScoringError::InvalidParameter("order must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(ScoringError::InvalidParameter(format!(
            "smoothing weight must be positive and finite, got {}",
            alpha
        )));
    }
    let mut scorer = CountScorer {
        order,
        alpha,
        vocab: vocab.clone(),
        space: ActionSpace::of(vocab),
        contexts: HashMap::new(),
    };
    for seq in sequences {
        let mut window = vec![scorer.space.bos(); order];
        for &a in seq {
            let idx = scorer.checked_index(a)?;
            let entry = scorer.contexts.entry(window.clone().into_boxed_slice()).or_default();
            entry.total += 1;
            *entry.next.entry(idx).or_default() += 1;
            window.remove(0);
            window.push(idx);
        }
    }
    Ok(scorer)
}

impl CountScorer {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Same counts, different smoothing weight.
    pub fn with_alpha(&self, alpha: f64) -> Result<CountScorer, ScoringError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(ScoringError::InvalidParameter(format!(
                "bad smoothing weight {}",
                alpha
            )));
        }
        Ok(CountScorer { alpha, ..self.clone() })
    }

    fn checked_index(&self, a: Action) -> Result<u32, ScoreError> {
        let ok = match a {
            Action::Open(n) | Action::Close(n) => (n.0 as usize) < self.space.num_nonterminals,
            Action::Shift(w) => (w.0 as usize) < self.space.num_words,
        };
        if ok {
            Ok(self.space.index(a))
        } else {
            Err(ScoreError::UnknownAction(a))
        }
    }

    fn context_key(&self, history: &History) -> Vec<u32> {
        let mut key = vec![self.space.bos(); self.order];
        for (slot, a) in key.iter_mut().rev().zip(history.iter_rev()) {
            *slot = self.space.index(*a);
        }
        key
    }

    /// Most frequent first action, used as the fallback root label.
    pub fn most_frequent_root(&self) -> Option<NtId> {
        let key = vec![self.space.bos(); self.order];
        let ctx = self.contexts.get(key.as_slice())?;
        ctx.next
            .iter()
            .filter_map(|(&idx, &c)| match self.space.action(idx) {
                Some(Action::Open(nt)) => Some((c, nt)),
                _ => None,
            })
            .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
            .map(|(_, nt)| nt)
    }

    /// `exp` of the mean negative log probability per action.
    pub fn perplexity(&self, sequences: &[Vec<Action>]) -> Result<f64, ScoreError> {
        let mut total = 0.0;
        let mut n = 0usize;
        for seq in sequences {
            total += super::sequence_log_prob(self, seq)?;
            n += seq.len();
        }
        Ok((-total / n.max(1) as f64).exp())
    }

    /// Versioned text serialization; reloading yields an identical scorer.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", MAGIC, VERSION).unwrap();
        writeln!(out, "order {}", self.order).unwrap();
        writeln!(out, "alpha {:?}", self.alpha).unwrap();
        write_vocab(&mut out, &self.vocab);
        let sorted: BTreeMap<_, _> = self.contexts.iter().collect();
        writeln!(out, "contexts {}", sorted.len()).unwrap();
        for (key, ctx) in sorted {
            let key: Vec<String> = key.iter().map(u32::to_string).collect();
            out.push_str(&key.join(" "));
            out.push_str(" |");
            let next: BTreeMap<_, _> = ctx.next.iter().collect();
            for (a, c) in next {
                write!(out, " {}:{}", a, c).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<CountScorer, ScoringError> {
        let mut lines = Lines::new(text);
        let version: u32 = lines.parse_field(MAGIC)?;
        if version != VERSION {
            return Err(lines.error(format!("unsupported version {}", version)).into());
        }
        let order: usize = lines.parse_field("order")?;
        let alpha: f64 = lines.parse_field("alpha")?;
        let vocab = read_vocab(&mut lines)?;
        let space = ActionSpace::of(&vocab);
        let n: usize = lines.parse_field("contexts")?;
        let mut contexts = HashMap::with_capacity(n);
        for _ in 0..n {
            let line = lines.next_line()?;
            let (key, rest) = line
                .split_once('|')
                .ok_or_else(|| lines.error("missing `|` in context record"))?;
            let key = key
                .split_whitespace()
                .map(|t| lines.parse::<u32>(t))
                .collect::<Result<Vec<_>, _>>()?;
            if key.len() != order || key.iter().any(|&k| k > space.bos()) {
                return Err(lines.error("malformed context").into());
            }
            let mut ctx = ContextCounts::default();
            for pair in rest.split_whitespace() {
                let (a, c) = pair
                    .split_once(':')
                    .ok_or_else(|| lines.error(format!("bad count `{}`", pair)))?;
                let a: u32 = lines.parse(a)?;
                let c: u64 = lines.parse(c)?;
                if a >= space.bos() || c == 0 {
                    return Err(lines.error(format!("bad count `{}`", pair)).into());
                }
                ctx.total += c;
                ctx.next.insert(a, c);
            }
            contexts.insert(key.into_boxed_slice(), ctx);
        }
        lines.finish()?;
        if order == 0 || !(alpha > 0.0 && alpha.is_finite()) {
            return Err(ScoringError::InvalidParameter("bad order or alpha in file".into()));
        }
        Ok(CountScorer {
            order,
            alpha,
            vocab,
            space,
            contexts,
        })
    }
}

impl Scorer for CountScorer {
    fn space(&self) -> ActionSpace {
        self.space
    }

    fn log_probs(&self, history: &History, candidates: &[Action]) -> Result<Vec<f64>, ScoreError> {
        let key = self.context_key(history);
        let ctx = self.contexts.get(key.as_slice());
        let total = ctx.map_or(0, |c| c.total) as f64;
        let log_denominator = (total + self.alpha * self.space.size() as f64).ln();
        candidates
            .iter()
            .map(|&a| {
                let idx = self.checked_index(a)?;
                let c = ctx.and_then(|c| c.next.get(&idx)).copied().unwrap_or(0) as f64;
                Ok((c + self.alpha).ln() - log_denominator)
            })
            .collect()
    }
}
