use alloc::vec::Vec;
use core::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::TrainConfig;
use super::model::{loss_and_grad, perplexity, Dropout, Example};
use super::params::ModelParams;
use crate::error::{invalid, Result};

/// One line of the training log.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    /// 1-based.
    pub epoch: usize,
    /// Learning rate used during this epoch.
    pub lr: f64,
    /// Mean cross-entropy per target token, measured during the epoch.
    pub train_loss: f64,
    pub train_perplexity: f64,
    pub dev_perplexity: Option<f64>,
    /// Whether the rate was decayed after this epoch.
    pub decayed: bool,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub log: Vec<EpochLog>,
}

/// One SGD update on `batch`: the summed loss is divided by the batch size,
/// the gradient optionally clipped to global norm `clip_norm`, then
/// `θ ← θ - lr ∇θ`. Returns the summed (unnormalized) loss.
pub fn sgd_step(
    params: &mut ModelParams,
    batch: &[&Example],
    lr: f64,
    clip_norm: Option<f64>,
    dropout_rng: Option<&mut ChaCha8Rng>,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(invalid("empty minibatch"));
    }
    let mut grad = params.zeros_like();
    let scale = 1.0 / batch.len() as f64;
    let mut loss = 0.0;
    let p = params.config.dropout;
    match dropout_rng {
        Some(rng) if p > 0.0 => {
            let mut d = Dropout { p, rng };
            for ex in batch {
                loss += loss_and_grad(params, ex, &mut grad, scale, Some(&mut d))?;
            }
        }
        _ => {
            for ex in batch {
                loss += loss_and_grad(params, ex, &mut grad, scale, None)?;
            }
        }
    }
    if let Some(max) = clip_norm {
        let norm = libm::sqrt(grad.squared_norm());
        if norm > max {
            grad.scale(max / norm);
        }
    }
    if lr != 0.0 {
        params.axpy(-lr, &grad);
    }
    Ok(loss)
}

// Shuffle, group examples of similar source length, then shuffle the
// batch order.
fn make_batches(examples: &[Example], batch_size: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..examples.len()).collect();
    idx.shuffle(rng);
    idx.sort_by_key(|&i| examples[i].source.len());
    let mut batches: Vec<Vec<usize>> = idx.chunks(batch_size).map(<[usize]>::to_vec).collect();
    batches.shuffle(rng);
    batches
}

/// Minibatch SGD over `examples` for `cfg.epochs` epochs.
///
/// After epoch `e` the learning rate is multiplied by `decay_factor` when
/// `e >= decay_start_epoch` or when dev perplexity did not improve on the
/// previous epoch; at most one decay per epoch. `on_epoch` may stop training
/// early.
pub fn train_with<F>(
    mut params: ModelParams,
    examples: &[Example],
    cfg: &TrainConfig,
    dev: &[Example],
    mut on_epoch: F,
) -> Result<TrainOutcome>
where
    F: FnMut(&EpochLog, &ModelParams) -> ControlFlow<()>,
{
    cfg.validate()?;
    if examples.is_empty() {
        return Err(invalid("no training examples"));
    }
    let mut order_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let mut lr = cfg.initial_lr;
    let mut prev_dev: Option<f64> = None;
    let mut log = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        let mut loss = 0.0;
        let mut tokens = 0usize;
        for batch in make_batches(examples, cfg.batch_size, &mut order_rng) {
            let refs: Vec<&Example> = batch.iter().map(|&i| &examples[i]).collect();
            loss += sgd_step(&mut params, &refs, lr, cfg.clip_norm, Some(&mut dropout_rng))?;
            tokens += refs.iter().map(|e| e.target.len()).sum::<usize>();
            if !params.is_finite() {
                return Err(invalid(alloc::format!("non-finite parameters in epoch {epoch}")));
            }
        }
        let train_loss = loss / tokens as f64;
        let dev_perplexity = if dev.is_empty() {
            None
        } else {
            Some(perplexity(&params, dev)?)
        };
        let stalled = matches!((dev_perplexity, prev_dev), (Some(d), Some(p)) if d >= p);
        let decayed = epoch >= cfg.decay_start_epoch || stalled;
        let entry = EpochLog {
            epoch,
            lr,
            train_loss,
            train_perplexity: libm::exp(train_loss),
            dev_perplexity,
            decayed,
        };
        if decayed {
            lr *= cfg.decay_factor;
        }
        prev_dev = dev_perplexity.or(prev_dev);
        let flow = on_epoch(&entry, &params);
        log.push(entry);
        if flow.is_break() {
            break;
        }
    }
    Ok(TrainOutcome { params, log })
}

pub fn train(params: ModelParams, examples: &[Example], cfg: &TrainConfig, dev: &[Example]) -> Result<TrainOutcome> {
    train_with(params, examples, cfg, dev, |_, _| ControlFlow::Continue(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::config::{ModelConfig, Vocab};
    use alloc::vec;

    fn setup(dropout: f64) -> (ModelParams, Vec<Example>) {
        let cfg = ModelConfig {
            embed_dim: 8,
            hidden_dim: 8,
            num_layers: 2,
            dropout,
            vocab: Vocab::from_symbols(["a", "b", "c", "d", "e"]).unwrap(),
        };
        let p = ModelParams::init(&cfg, &TrainConfig::default()).unwrap();
        let data = (0..10u32)
            .map(|i| {
                let src: Vec<u32> = (0..(i % 4 + 1)).map(|k| 4 + (i + k) % 5).collect();
                Example::new(src.clone(), src.iter().rev().copied().collect())
            })
            .collect();
        (p, data)
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let (p, data) = setup(0.3);
        let cfg = TrainConfig { initial_lr: 0.0, epochs: 3, batch_size: 4, ..Default::default() };
        let out = train(p.clone(), &data, &cfg, &[]).unwrap();
        assert_eq!(out.params, p);
    }

    #[test]
    fn single_step_is_gradient_descent() {
        let (p, data) = setup(0.0);
        let (_, g) = crate::neural::model::gradient(&p, &data[3]).unwrap();
        let mut stepped = p.clone();
        sgd_step(&mut stepped, &[&data[3]], 0.7, None, None).unwrap();
        let mut expect = p.clone();
        expect.axpy(-0.7, &g);
        assert_eq!(stepped, expect);
    }

    #[test]
    fn clipping_bounds_the_update() {
        let (p, data) = setup(0.0);
        let mut stepped = p.clone();
        let refs: Vec<&Example> = data.iter().collect();
        sgd_step(&mut stepped, &refs, 1.0, Some(1e-3), None).unwrap();
        let mut diff = stepped.clone();
        diff.axpy(-1.0, &p);
        assert!(libm::sqrt(diff.squared_norm()) <= 1e-3 * (1.0 + 1e-9));
    }

    #[test]
    fn loss_decreases_and_is_deterministic() {
        let (p, data) = setup(0.0);
        let cfg = TrainConfig {
            initial_lr: 0.1,
            epochs: 50,
            batch_size: 2,
            decay_start_epoch: 1000,
            ..Default::default()
        };
        let a = train(p.clone(), &data, &cfg, &[]).unwrap();
        assert!(a.log.last().unwrap().train_loss < a.log[0].train_loss);
        let b = train(p, &data, &cfg, &[]).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.log, b.log);
    }

    #[test]
    fn schedule_decays_from_start_epoch() {
        let (p, data) = setup(0.0);
        let cfg = TrainConfig { initial_lr: 0.01, epochs: 5, decay_start_epoch: 3, ..Default::default() };
        let out = train(p, &data, &cfg, &[]).unwrap();
        let lrs: Vec<f64> = out.log.iter().map(|e| e.lr).collect();
        assert_eq!(lrs, vec![0.01, 0.01, 0.01, 0.005, 0.0025]);
    }

    #[test]
    fn stalled_dev_perplexity_triggers_decay() {
        let (p, data) = setup(0.0);
        // Learning rate 0: dev perplexity is flat, so every epoch after the
        // first counts as stalled.
        let cfg = TrainConfig { initial_lr: 0.0, epochs: 3, decay_start_epoch: 100, ..Default::default() };
        let out = train(p, &data, &cfg, &data[..2]).unwrap();
        let decayed: Vec<bool> = out.log.iter().map(|e| e.decayed).collect();
        assert_eq!(decayed, vec![false, true, true]);
    }

    #[test]
    fn callback_can_stop() {
        let (p, data) = setup(0.0);
        let cfg = TrainConfig { epochs: 10, ..Default::default() };
        let out = train_with(p, &data, &cfg, &[], |e, _| {
            if e.epoch == 2 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
        .unwrap();
        assert_eq!(out.log.len(), 2);
    }

    #[test]
    fn rejects_empty_data() {
        let (p, _) = setup(0.0);
        assert!(train(p, &[], &TrainConfig::default(), &[]).is_err());
    }
}
