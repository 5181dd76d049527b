use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Label, PaddedSequence};
use crate::error::{Error, Result};
use crate::neuralnet::{AdamConfig, AdamState};
use crate::phm::{Architecture, CnnModel, ModelInput};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainExample<T> {
    pub id: String,
    pub seq: PaddedSequence,
    pub label: Label,
    /// Figurative feature vector; required by FeatAug models.
    pub features: Option<Vec<T>>,
}

impl<T: Scalar> TrainExample<T> {
    pub fn input(&self) -> ModelInput<'_, T> {
        ModelInput {
            seq: &self.seq,
            features: self.features.as_deref(),
        }
    }

    fn target(&self) -> T {
        if self.label.is_positive() {
            T::one()
        } else {
            T::zero()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 35,
            batch_size: 128,
            adam: AdamConfig::default(),
            seed: 0,
        }
    }
}

/// Minimizes mean binary cross-entropy with Adam and returns the mean
/// training loss of every epoch. Examples are put in id order first, so
/// the result does not depend on how the corpus was stored.
pub fn train<T: Scalar>(model: &mut CnnModel<T>, examples: &[TrainExample<T>], config: &TrainConfig) -> Result<Vec<f64>> {
    if examples.is_empty() {
        return Err(Error::invalid("training corpus is empty"));
    }
    if config.epochs == 0 || config.batch_size == 0 {
        return Err(Error::invalid("epochs and batch size must be at least 1"));
    }
    if model.architecture() == Architecture::FeatAug && examples.iter().any(|e| e.features.is_none()) {
        return Err(Error::invalid("FeatAug training needs a figurative verdict for every example"));
    }
    let mut order: Vec<&TrainExample<T>> = examples.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id).then_with(|| a.seq.token_ids.cmp(&b.seq.token_ids)));

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = AdamState::new(config.adam);
    let mut trace = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            model.zero_grad();
            let scale = T::one() / T::of(batch.len() as f64);
            for ex in batch {
                let loss = model.accumulate(&ex.input(), ex.target(), scale, Some(&mut rng))?;
                total += loss.as_f64();
            }
            adam.update(&mut model.trainable_params())?;
        }
        let mean = total / order.len() as f64;
        if !mean.is_finite() {
            return Err(Error::invalid(format!("non-finite training loss in epoch {}", epoch + 1)));
        }
        log::debug!("epoch {}: loss {mean:.6}", epoch + 1);
        trace.push(mean);
    }
    model.zero_grad();
    Ok(trace)
}
