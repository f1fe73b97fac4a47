use chemnorm_core::neural::{
    attention_matrix, decode_step, encode, greedy_decode, perplexity, sequence_log_prob, train, Example, ModelConfig,
    ModelParams, TrainConfig, Vocab, BOS,
};

fn config(embed: usize, hidden: usize, layers: usize) -> ModelConfig {
    ModelConfig {
        embed_dim: embed,
        hidden_dim: hidden,
        num_layers: layers,
        dropout: 0.0,
        vocab: Vocab::from_symbols(["a", "b", "c", "d", "e"]).unwrap(),
    }
}

fn model(seed: u64) -> ModelParams {
    ModelParams::init(&config(6, 8, 2), &TrainConfig { seed, init_range: 0.5, ..Default::default() }).unwrap()
}

#[test]
fn init_examples() {
    let cfg = config(6, 8, 2);
    let t = TrainConfig::default();
    let a = ModelParams::init(&cfg, &t).unwrap();
    assert_eq!(a, ModelParams::init(&cfg, &t).unwrap());
    assert!(a.tensors().iter().all(|x| x.data.iter().all(|v| (-0.1..=0.1).contains(v))));
    assert_ne!(a, ModelParams::init(&cfg, &TrainConfig { seed: 2, ..t }).unwrap());
}

#[test]
fn encode_examples() {
    let p = ModelParams::init(&config(4, 500, 1), &TrainConfig::default()).unwrap();
    let ctx = encode(&p, &[4, 5, 6, 7, 8, 4, 5]).unwrap();
    assert_eq!(ctx.states.len(), 7);
    assert!(ctx.states.iter().all(|h| h.len() == 500));

    let z = ModelParams::zeros(&config(4, 8, 2)).unwrap();
    let ctx = encode(&z, &[4, 5, 6]).unwrap();
    assert!(ctx.states.iter().flatten().all(|&x| x == 0.0));
    assert!(encode(&z, &[]).is_err());
    assert!(encode(&z, &[99]).is_err());
}

#[test]
fn decode_step_examples() {
    let mut p = model(3);
    let ctx = encode(&p, &[4, 5, 6]).unwrap();
    let out = decode_step(&p, &ctx.init, BOS, &ctx);
    assert!((out.probs.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    assert!(out.probs.iter().all(|&x| x >= 0.0));

    p.attn.fill(0.0);
    let ctx = encode(&p, &[4, 5, 6]).unwrap();
    let out = decode_step(&p, &ctx.init, BOS, &ctx);
    assert!(out.alpha.iter().all(|a| (a - 1.0 / 3.0).abs() < 1e-12));

    p.output.fill(0.0);
    let out = decode_step(&p, &ctx.init, BOS, &ctx);
    assert!(out.probs.iter().all(|x| (x - 1.0 / 9.0).abs() < 1e-12));
}

#[test]
fn uniform_model_log_prob_and_perplexity() {
    let mut p = model(4);
    p.output.fill(0.0);
    let v = p.config.vocab_size() as f64;
    let target = [4, 5, 6, 2];
    let lp = sequence_log_prob(&p, &[7, 8], &target).unwrap();
    assert!((lp + 4.0 * v.ln()).abs() < 1e-9);
    let ppl = perplexity(&p, &[Example::new(vec![4], vec![5, 6])]).unwrap();
    assert!((ppl - v).abs() < 1e-9);
}

#[test]
fn greedy_output_scores_consistently() {
    for seed in 0..10 {
        let p = model(seed);
        let g = greedy_decode(&p, &[4, 6, 8], 10).unwrap();
        let mut t = g.tokens.clone();
        if g.finished {
            t.push(2);
        }
        // Masked tokens are never chosen, so the masked and unmasked
        // log probabilities of the chosen tokens agree.
        assert!((sequence_log_prob(&p, &[4, 6, 8], &t).unwrap() - g.log_prob).abs() < 1e-9);
    }
}

#[test]
fn appending_a_token_adds_its_log_prob() {
    let p = model(5);
    let src = [4, 5];
    let base = sequence_log_prob(&p, &src, &[6, 7]).unwrap();
    let longer = sequence_log_prob(&p, &src, &[6, 7, 8]).unwrap();
    let ctx = encode(&p, &src).unwrap();
    let s1 = decode_step(&p, &ctx.init, BOS, &ctx);
    let s2 = decode_step(&p, &s1.state, 6, &ctx);
    let s3 = decode_step(&p, &s2.state, 7, &ctx);
    assert!((longer - base - s3.probs[8].ln()).abs() < 1e-9);
}

#[test]
fn attention_matrix_examples() {
    let mut p = model(6);
    let a = attention_matrix(&p, &[4, 5, 6, 7], &[5, 6, 2]).unwrap();
    assert_eq!((a.len(), a[0].len()), (3, 4));
    assert!(a.iter().all(|row| (row.iter().sum::<f64>() - 1.0).abs() < 1e-6));
    p.attn.fill(0.0);
    let a = attention_matrix(&p, &[4, 5, 6, 7], &[5, 6, 2]).unwrap();
    assert!(a.iter().flatten().all(|x| (x - 0.25).abs() < 1e-12));
}

#[test]
fn perplexity_is_at_least_one() {
    let p = model(7);
    let data: Vec<Example> = (0..5).map(|i| Example::new(vec![4 + i % 5], vec![4 + (i + 1) % 5])).collect();
    assert!(perplexity(&p, &data).unwrap() >= 1.0);
}

#[test]
fn training_is_deterministic_and_finite() {
    let data: Vec<Example> = (0..8u32)
        .map(|i| Example::new(vec![4 + i % 5, 4 + (i + 2) % 5], vec![4 + (i + 1) % 5]))
        .collect();
    let cfg = TrainConfig { epochs: 4, batch_size: 3, initial_lr: 0.5, ..Default::default() };
    let mut mc = config(6, 8, 2);
    mc.dropout = 0.3;
    let p = ModelParams::init(&mc, &cfg).unwrap();
    let a = train(p.clone(), &data, &cfg, &data[..2]).unwrap();
    let b = train(p, &data, &cfg, &data[..2]).unwrap();
    assert_eq!(a.params, b.params);
    assert!(a.params.is_finite());
    assert_eq!(a.log.len(), 4);
    assert!(a.log.iter().all(|e| e.dev_perplexity.is_some()));
}
