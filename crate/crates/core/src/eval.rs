//! Labeled-bracket precision, recall and F1.
//!
//! Every internal node contributes one `(label, start, end)` bracket over
//! word indices, the root included. Matching is a multiset intersection, so
//! a unary chain of identical labels counts once per node.

use std::collections::HashMap;
use std::fmt::Write;

use thiserror::Error;

use crate::treebank::Tree;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("{pred} predicted trees but {gold} gold trees")]
    LengthMismatch { pred: usize, gold: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bracket {
    pub label: String,
    pub start: usize,
    pub end: usize,
}

/// Brackets of `tree` in pre-order.
pub fn extract_brackets(tree: &Tree) -> Vec<Bracket> {
    fn walk(t: &Tree, start: usize, out: &mut Vec<Bracket>) -> usize {
        match t {
            Tree::Leaf(_) => start + 1,
            Tree::Node { label, children } => {
                let slot = out.len();
                out.push(Bracket {
                    label: label.clone(),
                    start,
                    end: start,
                });
                let end = children.iter().fold(start, |pos, c| walk(c, pos, out));
                out[slot].end = end;
                end
            }
        }
    }
    let mut out = Vec::new();
    walk(tree, 0, &mut out);
    out
}

/// Size of the multiset intersection of two bracket lists.
pub fn matched_brackets(pred: &[Bracket], gold: &[Bracket]) -> usize {
    let mut counts: HashMap<&Bracket, usize> = HashMap::new();
    for b in gold {
        *counts.entry(b).or_default() += 1;
    }
    pred.iter()
        .filter(|b| match counts.get_mut(b) {
            Some(n) if *n > 0 => {
                *n -= 1;
                true
            }
            _ => false,
        })
        .count()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SentenceScore {
    pub id: usize,
    pub length: usize,
    pub matched: usize,
    pub pred_brackets: usize,
    pub gold_brackets: usize,
    /// Set when the sentence was excluded from the totals.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub matched: usize,
    pub pred_brackets: usize,
    pub gold_brackets: usize,
    pub sentences: Vec<SentenceScore>,
}

fn percent(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

impl EvalReport {
    /// Labeled recall, in percent.
    pub fn recall(&self) -> f64 {
        percent(self.matched, self.gold_brackets)
    }

    /// Labeled precision, in percent.
    pub fn precision(&self) -> f64 {
        percent(self.matched, self.pred_brackets)
    }

    pub fn f1(&self) -> f64 {
        let (r, p) = (self.recall(), self.precision());
        if r + p == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn skipped(&self) -> usize {
        self.sentences.iter().filter(|s| s.error.is_some()).count()
    }

    /// Header line `LR LP F1` and one line of values with two decimals.
    pub fn summary(&self) -> String {
        format!(
            "LR LP F1\n{:.2} {:.2} {:.2}\n",
            self.recall(),
            self.precision(),
            self.f1()
        )
    }

    pub fn sentence_tsv(&self) -> String {
        let mut out = String::from("sentence_id\tlength\tmatched\tpred\tgold\tstatus\n");
        for s in &self.sentences {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                s.id,
                s.length,
                s.matched,
                s.pred_brackets,
                s.gold_brackets,
                s.error.as_deref().unwrap_or("ok")
            )
            .unwrap();
        }
        out
    }
}

/// Scores predicted trees against gold trees. A pair whose word counts
/// differ is recorded with an error and left out of the totals.
pub fn score_corpus(pred: &[Tree], gold: &[Tree]) -> Result<EvalReport, EvalError> {
    if pred.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            pred: pred.len(),
            gold: gold.len(),
        });
    }
    let mut report = EvalReport {
        matched: 0,
        pred_brackets: 0,
        gold_brackets: 0,
        sentences: Vec::with_capacity(pred.len()),
    };
    for (id, (p, g)) in pred.iter().zip(gold).enumerate() {
        let (pn, gn) = (p.num_leaves(), g.num_leaves());
        if pn != gn {
            report.sentences.push(SentenceScore {
                id,
                length: gn,
                matched: 0,
                pred_brackets: 0,
                gold_brackets: 0,
                error: Some(format!("word count mismatch: {} predicted, {} gold", pn, gn)),
            });
            continue;
        }
        let (pb, gb) = (extract_brackets(p), extract_brackets(g));
        let matched = matched_brackets(&pb, &gb);
        report.matched += matched;
        report.pred_brackets += pb.len();
        report.gold_brackets += gb.len();
        report.sentences.push(SentenceScore {
            id,
            length: gn,
            matched,
            pred_brackets: pb.len(),
            gold_brackets: gb.len(),
            error: None,
        });
    }
    Ok(report)
}
