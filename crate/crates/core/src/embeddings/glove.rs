use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CooccurrenceCounts, EmbeddingError, EmbeddingTable};

#[derive(Debug, Clone, PartialEq)]
pub struct GloveConfig {
    pub dim: usize,
    pub iterations: usize,
    pub x_max: f64,
    pub alpha: f64,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for GloveConfig {
    fn default() -> Self {
        GloveConfig {
            dim: 300,
            iterations: 25,
            x_max: 10.0,
            alpha: 0.75,
            learning_rate: 0.05,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainedEmbeddings {
    pub table: EmbeddingTable,
    /// Mean weighted squared error per pair, one entry per iteration.
    pub loss_history: Vec<f64>,
}

pub fn glove_weight(x: f64, x_max: f64, alpha: f64) -> f64 {
    if x >= x_max {
        1.0
    } else {
        (x / x_max).powf(alpha)
    }
}

/// AdaGrad on the weighted least-squares objective. The returned vectors
/// are the sum of the word and context vectors.
pub fn train_embeddings(counts: &CooccurrenceCounts, config: &GloveConfig) -> Result<TrainedEmbeddings, EmbeddingError> {
    if config.dim == 0 {
        return Err(EmbeddingError::InvalidDim);
    }
    let mut pairs: Vec<(usize, usize, f64, f64)> = counts
        .pairs
        .iter()
        .map(|(&(i, j), &x)| (i as usize, j as usize, x.ln(), glove_weight(x, config.x_max, config.alpha)))
        .collect();
    if pairs.is_empty() {
        return Err(EmbeddingError::EmptyCounts);
    }
    if pairs.len() > 1 && pairs.iter().all(|p| p.2 == pairs[0].2) {
        return Err(EmbeddingError::DegenerateCounts);
    }
    let (v, d) = (counts.vocab.len(), config.dim);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut init = |n: usize| -> Vec<f64> { (0..n).map(|_| (rng.gen::<f64>() - 0.5) / d as f64).collect() };
    let mut w = init(v * d);
    let mut wt = init(v * d);
    let mut b = init(v);
    let mut bt = init(v);
    let mut gw = vec![1.0f64; v * d];
    let mut gwt = vec![1.0f64; v * d];
    let mut gb = vec![1.0f64; v];
    let mut gbt = vec![1.0f64; v];
    let lr = config.learning_rate;

    let mut history = Vec::with_capacity(config.iterations);
    for _ in 0..config.iterations {
        pairs.shuffle(&mut rng);
        let mut cost = 0.0;
        for &(i, j, logx, f) in &pairs {
            let (wi, wj) = (i * d, j * d);
            let dot: f64 = (0..d).map(|k| w[wi + k] * wt[wj + k]).sum();
            let diff = dot + b[i] + bt[j] - logx;
            let fdiff = f * diff;
            cost += 0.5 * fdiff * diff;
            for k in 0..d {
                let g1 = fdiff * wt[wj + k];
                let g2 = fdiff * w[wi + k];
                w[wi + k] -= lr * g1 / gw[wi + k].sqrt();
                wt[wj + k] -= lr * g2 / gwt[wj + k].sqrt();
                gw[wi + k] += g1 * g1;
                gwt[wj + k] += g2 * g2;
            }
            b[i] -= lr * fdiff / gb[i].sqrt();
            bt[j] -= lr * fdiff / gbt[j].sqrt();
            gb[i] += fdiff * fdiff;
            gbt[j] += fdiff * fdiff;
        }
        history.push(cost / pairs.len() as f64);
        log::debug!("glove iteration {}: loss {:.6}", history.len(), history.last().unwrap());
    }
    let data: Vec<f64> = w.iter().zip(&wt).map(|(a, c)| a + c).collect();
    Ok(TrainedEmbeddings {
        table: EmbeddingTable::new(counts.vocab.clone(), d, data)?,
        loss_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::count_cooccurrences;

    #[test]
    fn weight_cap() {
        assert_eq!(glove_weight(10.0, 10.0, 0.75), 1.0);
        assert_eq!(glove_weight(20.0, 10.0, 0.75), 1.0);
        assert!((glove_weight(5.0, 10.0, 0.75) - 0.5f64.powf(0.75)).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let empty = count_cooccurrences::<String>(&[], 5, 1);
        assert!(matches!(
            train_embeddings(&empty, &GloveConfig::default()),
            Err(EmbeddingError::EmptyCounts)
        ));
        let s = vec![vec!["a".to_string(), "b".to_string()]];
        let flat = count_cooccurrences(&s, 5, 1);
        assert!(matches!(
            train_embeddings(&flat, &GloveConfig::default()),
            Err(EmbeddingError::DegenerateCounts)
        ));
    }
}
