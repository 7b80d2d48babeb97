use std::fmt::Write;

use rand::Rng;

use super::{CollapsedAction, PruneError};
use crate::history::History;
use crate::textfmt::{read_vocab, write_row, write_vocab, Lines};
use crate::treebank::{Action, Vocabulary, WordId};

const MAGIC: &str = "genparse-prune-model";
const VERSION: u32 = 1;

/// Input of the coarse model: `c` context symbols and one word symbol, all
/// given as rows of the embedding table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PruneInput {
    pub context: Vec<u32>,
    pub word: u32,
}

/// A training pair: input and the index of the gold collapsed action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example {
    pub input: PruneInput,
    pub target: u32,
}

/// Order-`c` feed-forward model over collapsed actions:
/// `softmax(W2 relu(W1 v + b1) + b2)` where `v` concatenates the
/// embeddings of the last `c` collapsed actions and of the next word.
///
/// The embedding table has one row per collapsed action, then a
/// begin-of-sequence row, one row per word of `vocab` and an
/// end-of-sentence row.
#[derive(Clone, Debug, PartialEq)]
pub struct PruneModel {
    context: usize,
    embed_dim: usize,
    hidden_dim: usize,
    vocab: Vocabulary,
    embeddings: Vec<f64>,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
}

/// Gradient of the mean cross-entropy, shaped like the model parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub embeddings: Vec<f64>,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Gradient {
    pub fn groups(&self) -> [(&'static str, &[f64]); 5] {
        [
            ("embeddings", &self.embeddings),
            ("w1", &self.w1),
            ("b1", &self.b1),
            ("w2", &self.w2),
            ("b2", &self.b2),
        ]
    }
}

struct Activations {
    v: Vec<f64>,
    z1: Vec<f64>,
    h: Vec<f64>,
    log_probs: Vec<f64>,
}

fn log_softmax(mut z: Vec<f64>) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = z.iter().map(|x| (x - max).exp()).sum();
    let lse = max + sum.ln();
    for x in &mut z {
        *x -= lse;
    }
    z
}

impl PruneModel {
    /// A model with every parameter set to zero.
    pub fn zeros(vocab: &Vocabulary, context: usize, embed_dim: usize, hidden_dim: usize) -> PruneModel {
        let outputs = 2 * vocab.num_nonterminals() + 1;
        let rows = outputs + vocab.num_words() + 2;
        PruneModel {
            context,
            embed_dim,
            hidden_dim,
            vocab: vocab.clone(),
            embeddings: vec![0.0; rows * embed_dim],
            w1: vec![0.0; hidden_dim * (context + 1) * embed_dim],
            b1: vec![0.0; hidden_dim],
            w2: vec![0.0; outputs * hidden_dim],
            b2: vec![0.0; outputs],
        }
    }

    /// Uniform initialisation scaled by fan-in and fan-out; biases start at zero.
    pub fn random<R: Rng>(
        vocab: &Vocabulary,
        context: usize,
        embed_dim: usize,
        hidden_dim: usize,
        rng: &mut R,
    ) -> PruneModel {
        let mut m = PruneModel::zeros(vocab, context, embed_dim, hidden_dim);
        let input = m.input_dim();
        let outputs = m.num_outputs();
        let fill = |v: &mut [f64], scale: f64, rng: &mut R| {
            for x in v {
                *x = rng.gen_range(-scale..scale);
            }
        };
        fill(&mut m.embeddings, 0.5, rng);
        fill(&mut m.w1, (6.0 / (input + hidden_dim) as f64).sqrt(), rng);
        fill(&mut m.w2, (6.0 / (hidden_dim + outputs) as f64).sqrt(), rng);
        m
    }

    pub fn context(&self) -> usize {
        self.context
    }

    pub fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn num_nonterminals(&self) -> usize {
        self.vocab.num_nonterminals()
    }

    /// Size of the collapsed action vocabulary, `2N + 1`.
    pub fn num_outputs(&self) -> usize {
        2 * self.num_nonterminals() + 1
    }

    pub fn input_dim(&self) -> usize {
        (self.context + 1) * self.embed_dim
    }

    pub fn num_rows(&self) -> usize {
        self.embeddings.len() / self.embed_dim.max(1)
    }

    pub fn action_row(&self, action: CollapsedAction) -> u32 {
        action.index(self.num_nonterminals())
    }

    pub fn bos_row(&self) -> u32 {
        self.num_outputs() as u32
    }

    pub fn word_row(&self, word: WordId) -> u32 {
        debug_assert!((word.0 as usize) < self.vocab.num_words());
        self.num_outputs() as u32 + 1 + word.0
    }

    pub fn eos_row(&self) -> u32 {
        (self.num_outputs() + 1 + self.vocab.num_words()) as u32
    }

    /// Input for the step after `history`, whose actions use this model's
    /// vocabulary. `next_word` is `None` once every word has been shifted.
    pub fn input_for(&self, history: &History, next_word: Option<WordId>) -> PruneInput {
        let mut context: Vec<u32> = history
            .iter_rev()
            .take(self.context)
            .map(|&a| self.action_row(CollapsedAction::from(a)))
            .collect();
        context.resize(self.context, self.bos_row());
        context.reverse();
        PruneInput {
            context,
            word: next_word.map_or(self.eos_row(), |w| self.word_row(w)),
        }
    }

    /// One example per action of every sequence. The word input is the word
    /// of the next Shift, or end-of-sentence after the last one.
    pub fn examples(&self, sequences: &[Vec<Action>]) -> Vec<Example> {
        let mut out = Vec::new();
        for seq in sequences {
            let mut context = vec![self.bos_row(); self.context];
            let mut next_shift = 0;
            for (t, &a) in seq.iter().enumerate() {
                if next_shift <= t {
                    next_shift = seq[t..].iter().position(|a| a.is_shift()).map_or(seq.len(), |p| t + p);
                }
                let word = match seq.get(next_shift) {
                    Some(Action::Shift(w)) => self.word_row(*w),
                    _ => self.eos_row(),
                };
                let target = self.action_row(CollapsedAction::from(a));
                out.push(Example {
                    input: PruneInput {
                        context: context.clone(),
                        word,
                    },
                    target,
                });
                if self.context > 0 {
                    context.remove(0);
                    context.push(target);
                }
            }
        }
        out
    }

    fn activations(&self, input: &PruneInput) -> Activations {
        assert_eq!(input.context.len(), self.context, "context length mismatch");
        let d = self.embed_dim;
        let mut v = Vec::with_capacity(self.input_dim());
        for &row in input.context.iter().chain(std::iter::once(&input.word)) {
            let r = row as usize;
            v.extend_from_slice(&self.embeddings[r * d..(r + 1) * d]);
        }
        let n_in = v.len();
        let z1: Vec<f64> = self
            .w1
            .chunks_exact(n_in.max(1))
            .zip(&self.b1)
            .map(|(w, b)| b + w.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let h: Vec<f64> = z1.iter().map(|&z| z.max(0.0)).collect();
        let z2: Vec<f64> = self
            .w2
            .chunks_exact(self.hidden_dim.max(1))
            .zip(&self.b2)
            .map(|(w, b)| b + w.iter().zip(&h).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        Activations {
            v,
            z1,
            h,
            log_probs: log_softmax(z2),
        }
    }

    /// Log probabilities over collapsed actions.
    pub fn log_probs(&self, input: &PruneInput) -> Vec<f64> {
        self.activations(input).log_probs
    }

    /// Probabilities over collapsed actions.
    pub fn forward(&self, input: &PruneInput) -> Vec<f64> {
        self.log_probs(input).into_iter().map(f64::exp).collect()
    }

    /// Mean cross-entropy of `batch`.
    pub fn loss(&self, batch: &[Example]) -> f64 {
        if batch.is_empty() {
            return 0.0;
        }
        let total: f64 = batch.iter().map(|e| -self.log_probs(&e.input)[e.target as usize]).sum();
        total / batch.len() as f64
    }

    /// Mean cross-entropy of `batch` and its gradient by backpropagation.
    pub fn loss_and_gradient(&self, batch: &[Example]) -> (f64, Gradient) {
        let mut g = Gradient {
            embeddings: vec![0.0; self.embeddings.len()],
            w1: vec![0.0; self.w1.len()],
            b1: vec![0.0; self.b1.len()],
            w2: vec![0.0; self.w2.len()],
            b2: vec![0.0; self.b2.len()],
        };
        if batch.is_empty() {
            return (0.0, g);
        }
        let scale = 1.0 / batch.len() as f64;
        let (d, dh, n_in) = (self.embed_dim, self.hidden_dim, self.input_dim());
        let mut loss = 0.0;
        let mut dhid = vec![0.0; dh];
        let mut dv = vec![0.0; n_in];
        for e in batch {
            let act = self.activations(&e.input);
            let target = e.target as usize;
            loss -= act.log_probs[target];

            dhid.iter_mut().for_each(|x| *x = 0.0);
            for (k, &lp) in act.log_probs.iter().enumerate() {
                let dz = (lp.exp() - if k == target { 1.0 } else { 0.0 }) * scale;
                g.b2[k] += dz;
                let w = &self.w2[k * dh..(k + 1) * dh];
                let gw = &mut g.w2[k * dh..(k + 1) * dh];
                for j in 0..dh {
                    gw[j] += dz * act.h[j];
                    dhid[j] += dz * w[j];
                }
            }

            dv.iter_mut().for_each(|x| *x = 0.0);
            for j in 0..dh {
                if act.z1[j] <= 0.0 {
                    continue;
                }
                let dz = dhid[j];
                g.b1[j] += dz;
                let w = &self.w1[j * n_in..(j + 1) * n_in];
                let gw = &mut g.w1[j * n_in..(j + 1) * n_in];
                for q in 0..n_in {
                    gw[q] += dz * act.v[q];
                    dv[q] += dz * w[q];
                }
            }

            for (slot, &row) in e.input.context.iter().chain(std::iter::once(&e.input.word)).enumerate() {
                let r = row as usize;
                let ge = &mut g.embeddings[r * d..(r + 1) * d];
                for (x, y) in ge.iter_mut().zip(&dv[slot * d..(slot + 1) * d]) {
                    *x += y;
                }
            }
        }
        (loss * scale, g)
    }

    /// Parameter groups in a fixed order: embeddings, W1, b1, W2, b2.
    pub fn parameters(&self) -> [(&'static str, &[f64]); 5] {
        [
            ("embeddings", &self.embeddings),
            ("w1", &self.w1),
            ("b1", &self.b1),
            ("w2", &self.w2),
            ("b2", &self.b2),
        ]
    }

    pub fn parameters_mut(&mut self) -> [&mut [f64]; 5] {
        [
            &mut self.embeddings,
            &mut self.w1,
            &mut self.b1,
            &mut self.w2,
            &mut self.b2,
        ]
    }

    /// `theta -= rate * gradient`.
    pub fn step(&mut self, gradient: &Gradient, rate: f64) {
        for (p, (_, g)) in self.parameters_mut().into_iter().zip(gradient.groups()) {
            for (x, y) in p.iter_mut().zip(g) {
                *x -= rate * y;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.parameters().iter().all(|(_, p)| p.iter().all(|x| x.is_finite()))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", MAGIC, VERSION).unwrap();
        writeln!(out, "context {}", self.context).unwrap();
        writeln!(out, "embed_dim {}", self.embed_dim).unwrap();
        writeln!(out, "hidden_dim {}", self.hidden_dim).unwrap();
        write_vocab(&mut out, &self.vocab);
        writeln!(out, "embeddings {}", self.num_rows()).unwrap();
        for row in self.embeddings.chunks(self.embed_dim.max(1)) {
            write_row(&mut out, row);
        }
        writeln!(out, "w1 {}", self.hidden_dim).unwrap();
        for row in self.w1.chunks(self.input_dim().max(1)) {
            write_row(&mut out, row);
        }
        out.push_str("b1\n");
        write_row(&mut out, &self.b1);
        writeln!(out, "w2 {}", self.num_outputs()).unwrap();
        for row in self.w2.chunks(self.hidden_dim.max(1)) {
            write_row(&mut out, row);
        }
        out.push_str("b2\n");
        write_row(&mut out, &self.b2);
        out
    }

    pub fn from_text(text: &str) -> Result<PruneModel, PruneError> {
        let mut lines = Lines::new(text);
        let version: u32 = lines.parse_field(MAGIC)?;
        if version != VERSION {
            return Err(lines.error(format!("unsupported version {}", version)).into());
        }
        let context: usize = lines.parse_field("context")?;
        let embed_dim: usize = lines.parse_field("embed_dim")?;
        let hidden_dim: usize = lines.parse_field("hidden_dim")?;
        if embed_dim == 0 || hidden_dim == 0 {
            return Err(lines.error("dimensions must be positive").into());
        }
        let vocab = read_vocab(&mut lines)?;
        let mut m = PruneModel::zeros(&vocab, context, embed_dim, hidden_dim);

        let matrix = |lines: &mut Lines<'_>, key: &str, rows: usize, cols: usize| {
            let n: usize = lines.parse_field(key)?;
            if n != rows {
                return Err(lines.error(format!("expected {} rows for {}, found {}", rows, key, n)));
            }
            let mut values = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                values.extend(lines.row::<f64>(cols)?);
            }
            Ok(values)
        };
        m.embeddings = matrix(&mut lines, "embeddings", m.num_rows(), embed_dim)?;
        m.w1 = matrix(&mut lines, "w1", hidden_dim, m.input_dim())?;
        lines.field("b1")?;
        m.b1 = lines.row(hidden_dim)?;
        m.w2 = matrix(&mut lines, "w2", m.num_outputs(), hidden_dim)?;
        lines.field("b2")?;
        m.b2 = lines.row(m.num_outputs())?;
        lines.finish()?;
        if !m.is_finite() {
            return Err(PruneError::InvalidParameter(
                "model file contains non-finite values".into(),
            ));
        }
        Ok(m)
    }
}
