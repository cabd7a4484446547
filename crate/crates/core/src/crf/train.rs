use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{CrfError, CrfModel, Input};

/// One training or evaluation sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub input: Input,
    pub gold: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    Sgd,
    AdamW {
        beta1: f64,
        beta2: f64,
        epsilon: f64,
        weight_decay: f64,
    },
}

impl Optimizer {
    pub fn adamw() -> Self {
        Optimizer::AdamW {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub warmup_fraction: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
}

impl TrainingConfig {
    /// Settings used with contextual vectors.
    pub fn contextual() -> Self {
        TrainingConfig {
            learning_rate: 5e-5,
            batch_size: 32,
            max_epochs: 50,
            warmup_fraction: 0.1,
            optimizer: Optimizer::adamw(),
            seed: 1,
        }
    }

    /// Settings used with static word vectors.
    pub fn static_vectors() -> Self {
        TrainingConfig {
            learning_rate: 0.1,
            batch_size: 32,
            max_epochs: 50,
            warmup_fraction: 0.0,
            optimizer: Optimizer::Sgd,
            seed: 1,
        }
    }

    pub fn validate(&self) -> Result<(), CrfError> {
        if !(self.learning_rate > 0.0) {
            return Err(CrfError::Config("learning rate must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(CrfError::Config("batch size must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.warmup_fraction) {
            return Err(CrfError::Config("warmup fraction must be in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Linear warmup over the first `warmup` steps, then linear decay to zero.
pub fn scheduled_rate(base: f64, step: usize, total: usize, warmup: usize) -> f64 {
    if step < warmup {
        base * (step + 1) as f64 / warmup as f64
    } else {
        base * (total - step) as f64 / (total - warmup).max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean sentence NLL over the epoch's minibatches.
    pub train_loss: f64,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingHistory {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept; 0 means the initial model.
    pub best_epoch: usize,
}

impl TrainingHistory {
    pub fn render(&self) -> String {
        let mut s = String::from("epoch\ttrain_loss\tval_accuracy\n");
        for e in &self.epochs {
            let acc = e.val_accuracy.map(|a| format!("{a:.6}")).unwrap_or_else(|| "-".into());
            s.push_str(&format!("{}\t{:.6}\t{acc}\n", e.epoch, e.train_loss));
        }
        s.push_str(&format!("best_epoch\t{}\n", self.best_epoch));
        s
    }
}

pub fn token_accuracy_of(model: &CrfModel, examples: &[Example]) -> Option<f64> {
    let (right, total) = examples
        .par_iter()
        .map(|ex| {
            let p = model.predict(&ex.input);
            (p.iter().zip(&ex.gold).filter(|(a, b)| a == b).count(), ex.gold.len())
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    (total > 0).then(|| right as f64 / total as f64)
}

/// Sentences per gradient job; fixed so that summation order does not
/// depend on the thread count.
const GRAD_CHUNK: usize = 4;

fn batch_gradient(model: &CrfModel, batch: &[&Example]) -> (f64, Vec<f64>) {
    let partial: Vec<(f64, Vec<f64>)> = batch
        .par_chunks(GRAD_CHUNK)
        .map(|chunk| {
            let mut g = vec![0.0; model.num_params()];
            let mut loss = 0.0;
            for ex in chunk {
                loss += model.loss_and_gradient(&ex.input, &ex.gold, &mut g);
            }
            (loss, g)
        })
        .collect();
    let mut grad = vec![0.0; model.num_params()];
    let mut loss = 0.0;
    for (l, g) in partial {
        loss += l;
        for (a, b) in grad.iter_mut().zip(&g) {
            *a += b;
        }
    }
    let n = batch.len() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    (loss / n, grad)
}

/// Minibatch training on mean sentence NLL, keeping the parameters of the
/// epoch with the best validation accuracy (the earliest one on ties).
pub fn train(
    model: &CrfModel,
    train_set: &[Example],
    val_set: &[Example],
    config: &TrainingConfig,
) -> Result<(CrfModel, TrainingHistory), CrfError> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(CrfError::EmptyTrainingSet);
    }
    let mut current = model.clone();
    let mut best = model.clone();
    let mut history = TrainingHistory::default();
    let mut best_acc = f64::NEG_INFINITY;
    let batches_per_epoch = train_set.len().div_ceil(config.batch_size);
    let total = batches_per_epoch * config.max_epochs;
    let warmup = (config.warmup_fraction * total as f64).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let p = current.num_params();
    let (mut m1, mut m2) = (vec![0.0; p], vec![0.0; p]);
    let mut step = 0usize;
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&Example> = chunk.iter().map(|&i| &train_set[i]).collect();
            let (loss, grad) = batch_gradient(&current, &batch);
            epoch_loss += loss;
            let lr = scheduled_rate(config.learning_rate, step, total, warmup);
            step += 1;
            let params = current.params_mut();
            match config.optimizer {
                Optimizer::Sgd => {
                    for (w, g) in params.iter_mut().zip(&grad) {
                        *w -= lr * g;
                    }
                }
                Optimizer::AdamW {
                    beta1,
                    beta2,
                    epsilon,
                    weight_decay,
                } => {
                    let c1 = 1.0 - beta1.powi(step as i32);
                    let c2 = 1.0 - beta2.powi(step as i32);
                    for i in 0..p {
                        let g = grad[i];
                        m1[i] = beta1 * m1[i] + (1.0 - beta1) * g;
                        m2[i] = beta2 * m2[i] + (1.0 - beta2) * g * g;
                        let update = (m1[i] / c1) / ((m2[i] / c2).sqrt() + epsilon);
                        params[i] -= lr * (update + weight_decay * params[i]);
                    }
                }
            }
        }
        let val_accuracy = token_accuracy_of(&current, val_set);
        let train_loss = epoch_loss / batches_per_epoch as f64;
        log::info!("epoch {epoch}: loss {train_loss:.5} val {val_accuracy:?}");
        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_accuracy,
        });
        let acc = val_accuracy.unwrap_or(f64::NEG_INFINITY);
        if val_accuracy.is_none() || acc > best_acc {
            best_acc = acc;
            best = current.clone();
            history.best_epoch = epoch;
        }
    }
    Ok((best, history))
}
