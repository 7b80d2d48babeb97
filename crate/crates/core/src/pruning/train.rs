use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{PruneError, PruneModel};
use crate::treebank::{Action, Vocabulary};

#[derive(Clone, Debug, PartialEq)]
pub struct PruneTrainConfig {
    /// Context size `c`.
    pub context: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for PruneTrainConfig {
    fn default() -> Self {
        PruneTrainConfig {
            context: 2,
            embed_dim: 32,
            hidden_dim: 128,
            learning_rate: 0.05,
            batch_size: 64,
            epochs: 10,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    /// Mean training loss before the first epoch and after each epoch.
    pub losses: Vec<f64>,
    pub examples: usize,
}

impl TrainReport {
    pub fn final_loss(&self) -> f64 {
        *self.losses.last().expect("report always holds the initial loss")
    }
}

/// Trains a coarse model on gold action sequences by mini-batch gradient
/// descent on the mean cross-entropy of the collapsed gold actions.
pub fn train_pruner(
    sequences: &[Vec<Action>],
    vocab: &Vocabulary,
    config: &PruneTrainConfig,
) -> Result<(PruneModel, TrainReport), PruneError> {
    if config.embed_dim == 0 || config.hidden_dim == 0 || config.batch_size == 0 {
        return Err(PruneError::InvalidParameter(
            "dimensions and batch size must be positive".into(),
        ));
    }
    if !(config.learning_rate > 0.0 && config.learning_rate.is_finite()) {
        return Err(PruneError::InvalidParameter(format!(
            "learning rate must be positive, got {}",
            config.learning_rate
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = PruneModel::random(vocab, config.context, config.embed_dim, config.hidden_dim, &mut rng);
    let mut examples = model.examples(sequences);
    if examples.is_empty() {
        return Err(PruneError::EmptyCorpus);
    }
    let mut losses = vec![model.loss(&examples)];
    for epoch in 1..=config.epochs {
        examples.shuffle(&mut rng);
        for (b, batch) in examples.chunks(config.batch_size).enumerate() {
            let (loss, grad) = model.loss_and_gradient(batch);
            if !loss.is_finite() {
                return Err(PruneError::Diverged { epoch, batch: b, loss });
            }
            model.step(&grad, config.learning_rate);
        }
        let loss = model.loss(&examples);
        if !loss.is_finite() || !model.is_finite() {
            return Err(PruneError::Diverged {
                epoch,
                batch: examples.len().div_ceil(config.batch_size),
                loss,
            });
        }
        losses.push(loss);
    }
    Ok((
        model,
        TrainReport {
            losses,
            examples: examples.len(),
        },
    ))
}
