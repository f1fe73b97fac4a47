//! Forward and backward passes of the attentional encoder-decoder.
//!
//! Per decode step `t`, with `H = {h_1..h_T}` from the encoder:
//!
//! ```text
//! s_t   = f(s_{t-1}, y_{t-1})            stacked LSTM
//! e_j   = s_t^T W_a h_j                  bilinear score
//! α     = softmax(e)
//! c_t   = Σ_j α_j h_j
//! a_t   = tanh(W_c [s_t; c_t])
//! p_t   = softmax(W_s a_t)
//! ```
//!
//! The attentional vector `a_t` is not fed back into the next step.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::config::{BOS, EOS};
use super::lstm::{self, LstmStep};
use super::params::ModelParams;
use super::tensor::{axpy, dot, log_softmax, softmax};
use crate::error::{invalid, Result};

/// Per-layer decoder hidden and cell states.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderState {
    pub h: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
}

impl DecoderState {
    /// Top-layer hidden state, `s_t`.
    pub fn top(&self) -> &[f64] {
        self.h.last().expect("at least one layer")
    }
}

/// Encoder output for one source sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderContext {
    /// `h_t = [forward_t; backward_t]` of the top layer, one per source token.
    pub states: Vec<Vec<f64>>,
    /// `W_a h_t`, cached so each decode step only needs dot products.
    pub keys: Vec<Vec<f64>>,
    /// Decoder start state: per layer, the final forward and backward
    /// states concatenated.
    pub init: DecoderState,
}

impl EncoderContext {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Output of a single decode step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub state: DecoderState,
    /// The attentional vector `a_t`.
    pub attentional: Vec<f64>,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl StepOutput {
    pub fn log_probs(&self) -> Vec<f64> {
        log_softmax(&self.logits)
    }
}

/// Inverted dropout between stacked LSTM layers.
pub(crate) struct Dropout<'a> {
    pub p: f64,
    pub rng: &'a mut ChaCha8Rng,
}

impl Dropout<'_> {
    fn mask(&mut self, n: usize) -> Vec<f64> {
        let keep = 1.0 - self.p;
        (0..n)
            .map(|_| if self.rng.gen_bool(keep) { 1.0 / keep } else { 0.0 })
            .collect()
    }
}

fn apply_mask(x: &[f64], mask: &Option<Vec<f64>>) -> Vec<f64> {
    match mask {
        Some(m) => x.iter().zip(m).map(|(a, b)| a * b).collect(),
        None => x.to_vec(),
    }
}

fn check_ids(ids: &[u32], vocab: usize, what: &str) -> Result<()> {
    if let Some(&bad) = ids.iter().find(|&&i| i as usize >= vocab) {
        return Err(invalid(alloc::format!("{what} id {bad} outside vocabulary of {vocab}")));
    }
    Ok(())
}

struct EncoderLayerCache {
    fwd: Vec<LstmStep>,
    // Indexed by source position, not processing order.
    bwd: Vec<LstmStep>,
    // Dropout mask applied to this layer's input (layers above the first).
    masks: Vec<Option<Vec<f64>>>,
}

struct EncoderCache {
    layers: Vec<EncoderLayerCache>,
    ctx: EncoderContext,
}

fn encode_cached(params: &ModelParams, source: &[u32], mut dropout: Option<&mut Dropout<'_>>) -> Result<EncoderCache> {
    if source.is_empty() {
        return Err(invalid("source sequence is empty"));
    }
    check_ids(source, params.config.vocab_size(), "source")?;
    let hd = params.config.direction_dim();
    let t_len = source.len();
    let mut inputs: Vec<Vec<f64>> = source.iter().map(|&id| params.src_embed.row(id as usize).to_vec()).collect();
    let mut layers = Vec::with_capacity(params.encoder.len());
    let mut init = DecoderState {
        h: Vec::new(),
        c: Vec::new(),
    };
    for (l, layer) in params.encoder.iter().enumerate() {
        let masks: Vec<Option<Vec<f64>>> = (0..t_len)
            .map(|_| match dropout.as_deref_mut() {
                Some(d) if l > 0 => Some(d.mask(inputs[0].len())),
                _ => None,
            })
            .collect();
        let xs: Vec<Vec<f64>> = inputs.iter().zip(&masks).map(|(x, m)| apply_mask(x, m)).collect();

        let mut fwd = Vec::with_capacity(t_len);
        let (mut h, mut c) = (vec![0.0; hd], vec![0.0; hd]);
        for x in &xs {
            let s = lstm::forward(&layer.forward, x.clone(), h, c);
            h = s.h.clone();
            c = s.c.clone();
            fwd.push(s);
        }
        let mut bwd_rev = Vec::with_capacity(t_len);
        let (mut h, mut c) = (vec![0.0; hd], vec![0.0; hd]);
        for x in xs.iter().rev() {
            let s = lstm::forward(&layer.backward, x.clone(), h, c);
            h = s.h.clone();
            c = s.c.clone();
            bwd_rev.push(s);
        }
        bwd_rev.reverse();
        let bwd = bwd_rev;

        init.h.push([fwd[t_len - 1].h.as_slice(), bwd[0].h.as_slice()].concat());
        init.c.push([fwd[t_len - 1].c.as_slice(), bwd[0].c.as_slice()].concat());
        inputs = fwd.iter().zip(&bwd).map(|(f, b)| [f.h.as_slice(), b.h.as_slice()].concat()).collect();
        layers.push(EncoderLayerCache { fwd, bwd, masks });
    }
    let keys = inputs.iter().map(|h| params.attn.matvec(h)).collect();
    Ok(EncoderCache {
        layers,
        ctx: EncoderContext {
            states: inputs,
            keys,
            init,
        },
    })
}

/// Runs the stacked bidirectional encoder over `source`.
pub fn encode(params: &ModelParams, source: &[u32]) -> Result<EncoderContext> {
    Ok(encode_cached(params, source, None)?.ctx)
}

struct StepCache {
    input_token: u32,
    layers: Vec<LstmStep>,
    masks: Vec<Option<Vec<f64>>>,
    alpha: Vec<f64>,
    context: Vec<f64>,
    attn_hidden: Vec<f64>,
    logits: Vec<f64>,
}

impl StepCache {
    fn state(&self) -> DecoderState {
        DecoderState {
            h: self.layers.iter().map(|s| s.h.clone()).collect(),
            c: self.layers.iter().map(|s| s.c.clone()).collect(),
        }
    }
}

fn decode_step_cached(
    params: &ModelParams,
    state: &DecoderState,
    prev_token: u32,
    ctx: &EncoderContext,
    mut dropout: Option<&mut Dropout<'_>>,
) -> StepCache {
    let mut x = params.tgt_embed.row(prev_token as usize).to_vec();
    let mut layers = Vec::with_capacity(params.decoder.len());
    let mut masks = Vec::with_capacity(params.decoder.len());
    for (l, p) in params.decoder.iter().enumerate() {
        let mask = match dropout.as_deref_mut() {
            Some(d) if l > 0 => Some(d.mask(x.len())),
            _ => None,
        };
        let input = apply_mask(&x, &mask);
        let s = lstm::forward(p, input, state.h[l].clone(), state.c[l].clone());
        x = s.h.clone();
        layers.push(s);
        masks.push(mask);
    }
    let s_t = &layers.last().expect("at least one layer").h;
    let scores: Vec<f64> = ctx.keys.iter().map(|k| dot(s_t, k)).collect();
    let alpha = softmax(&scores);
    let mut context = vec![0.0; s_t.len()];
    for (a, h) in alpha.iter().zip(&ctx.states) {
        axpy(*a, h, &mut context);
    }
    let concat = [s_t.as_slice(), context.as_slice()].concat();
    let attn_hidden: Vec<f64> = params.combine.matvec(&concat).into_iter().map(libm::tanh).collect();
    let logits = params.output.matvec(&attn_hidden);
    StepCache {
        input_token: prev_token,
        layers,
        masks,
        alpha,
        context,
        attn_hidden,
        logits,
    }
}

/// One decoder step: consumes `prev_token`, attends over `ctx` and returns
/// the next-token distribution.
pub fn decode_step(params: &ModelParams, state: &DecoderState, prev_token: u32, ctx: &EncoderContext) -> StepOutput {
    let c = decode_step_cached(params, state, prev_token, ctx, None);
    StepOutput {
        state: c.state(),
        probs: softmax(&c.logits),
        attentional: c.attn_hidden,
        logits: c.logits,
        alpha: c.alpha,
    }
}

/// Teacher-forced per-step outputs for `target` (the decoder consumes BOS
/// then the gold tokens).
pub fn teacher_forced_steps(params: &ModelParams, source: &[u32], target: &[u32]) -> Result<Vec<StepOutput>> {
    check_ids(target, params.config.vocab_size(), "target")?;
    let ctx = encode(params, source)?;
    let mut state = ctx.init.clone();
    let mut prev = BOS;
    let mut out = Vec::with_capacity(target.len());
    for &y in target {
        let step = decode_step(params, &state, prev, &ctx);
        state = step.state.clone();
        out.push(step);
        prev = y;
    }
    Ok(out)
}

/// `log P(target | source) = Σ_t log p(y_t | y_<t)` under teacher forcing.
pub fn sequence_log_prob(params: &ModelParams, source: &[u32], target: &[u32]) -> Result<f64> {
    let steps = teacher_forced_steps(params, source, target)?;
    Ok(steps
        .iter()
        .zip(target)
        .map(|(s, &y)| s.log_probs()[y as usize])
        .sum())
}

/// Attention weights of each teacher-forced step: `target.len()` rows of
/// `source.len()` entries.
pub fn attention_matrix(params: &ModelParams, source: &[u32], target: &[u32]) -> Result<Vec<Vec<f64>>> {
    Ok(teacher_forced_steps(params, source, target)?
        .into_iter()
        .map(|s| s.alpha)
        .collect())
}

/// A source/target id pair ready for training; the target ends in EOS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub source: Vec<u32>,
    pub target: Vec<u32>,
}

impl Example {
    /// Appends EOS to `target`.
    pub fn new(source: Vec<u32>, mut target: Vec<u32>) -> Self {
        target.push(EOS);
        Self { source, target }
    }
}

/// `exp(total cross-entropy / total target tokens)` over `examples`.
pub fn perplexity(params: &ModelParams, examples: &[Example]) -> Result<f64> {
    if examples.is_empty() {
        return Err(invalid("perplexity needs at least one example"));
    }
    let mut nll = 0.0;
    let mut tokens = 0usize;
    for ex in examples {
        nll -= sequence_log_prob(params, &ex.source, &ex.target)?;
        tokens += ex.target.len();
    }
    Ok(libm::exp(nll / tokens as f64))
}

/// Cross-entropy `-Σ_t log p(y_t)` of one example; adds `scale` times its
/// gradient into `grad`. With `dropout` set, masks are sampled from its
/// generator (training mode).
pub(crate) fn loss_and_grad(
    params: &ModelParams,
    example: &Example,
    grad: &mut ModelParams,
    scale: f64,
    mut dropout: Option<&mut Dropout<'_>>,
) -> Result<f64> {
    let target = &example.target;
    check_ids(target, params.config.vocab_size(), "target")?;
    let enc = encode_cached(params, &example.source, dropout.as_deref_mut())?;
    let ctx = &enc.ctx;
    let h = params.config.hidden_dim;
    let n_layers = params.decoder.len();

    // Forward through the decoder, keeping every step.
    let mut steps: Vec<StepCache> = Vec::with_capacity(target.len());
    let mut loss = 0.0;
    {
        let mut state = ctx.init.clone();
        let mut prev = BOS;
        for &y in target {
            let c = decode_step_cached(params, &state, prev, ctx, dropout.as_deref_mut());
            loss -= log_softmax(&c.logits)[y as usize];
            state = c.state();
            steps.push(c);
            prev = y;
        }
    }

    let t_len = ctx.len();
    let mut d_states = vec![vec![0.0; h]; t_len];
    let mut d_keys = vec![vec![0.0; h]; t_len];
    let mut dh_next = vec![vec![0.0; h]; n_layers];
    let mut dc_next = vec![vec![0.0; h]; n_layers];

    for (c, &y) in steps.iter().zip(target).rev() {
        // Output layer.
        let mut d_logits = softmax(&c.logits);
        d_logits[y as usize] -= 1.0;
        d_logits.iter_mut().for_each(|d| *d *= scale);
        grad.output.add_outer(&d_logits, &c.attn_hidden);
        let mut d_attn = vec![0.0; h];
        params.output.matvec_t_add(&d_logits, &mut d_attn);

        // a_t = tanh(W_c [s; ctx])
        let d_pre: Vec<f64> = d_attn
            .iter()
            .zip(&c.attn_hidden)
            .map(|(d, a)| d * (1.0 - a * a))
            .collect();
        let s_t = &c.layers[n_layers - 1].h;
        let concat = [s_t.as_slice(), c.context.as_slice()].concat();
        grad.combine.add_outer(&d_pre, &concat);
        let mut d_concat = vec![0.0; 2 * h];
        params.combine.matvec_t_add(&d_pre, &mut d_concat);
        let (d_s_part, d_context) = d_concat.split_at(h);
        let mut d_s = d_s_part.to_vec();

        // Attention.
        let d_alpha: Vec<f64> = ctx.states.iter().map(|hj| dot(d_context, hj)).collect();
        for (ds, a) in d_states.iter_mut().zip(&c.alpha) {
            axpy(*a, d_context, ds);
        }
        let weighted: f64 = c.alpha.iter().zip(&d_alpha).map(|(a, d)| a * d).sum();
        for j in 0..t_len {
            let d_score = c.alpha[j] * (d_alpha[j] - weighted);
            if d_score != 0.0 {
                axpy(d_score, s_t, &mut d_keys[j]);
                axpy(d_score, &ctx.keys[j], &mut d_s);
            }
        }

        // Decoder stack, top to bottom.
        let mut d_above = d_s;
        for l in (0..n_layers).rev() {
            let dh: Vec<f64> = d_above.iter().zip(&dh_next[l]).map(|(a, b)| a + b).collect();
            let (dx, dh_prev, dc_prev) = lstm::backward(&params.decoder[l], &mut grad.decoder[l], &c.layers[l], &dh, &dc_next[l]);
            dh_next[l] = dh_prev;
            dc_next[l] = dc_prev;
            d_above = match &c.masks[l] {
                Some(m) => dx.iter().zip(m).map(|(a, b)| a * b).collect(),
                None => dx,
            };
        }
        axpy(1.0, &d_above, grad.tgt_embed.row_mut(c.input_token as usize));
    }

    // Attention keys: k_j = W_a h_j.
    for j in 0..t_len {
        grad.attn.add_outer(&d_keys[j], &ctx.states[j]);
        params.attn.matvec_t_add(&d_keys[j], &mut d_states[j]);
    }

    // Encoder, top layer first. The decoder start state feeds back into
    // each layer's final forward and backward states.
    let hd = params.config.direction_dim();
    let mut d_out = d_states;
    for l in (0..params.encoder.len()).rev() {
        let layer = &params.encoder[l];
        let cache = &enc.layers[l];
        let gl = &mut grad.encoder[l];
        let in_dim = cache.fwd[0].x.len();
        let mut d_in = vec![vec![0.0; in_dim]; t_len];

        let mut dh = dh_next[l][..hd].to_vec();
        let mut dc = dc_next[l][..hd].to_vec();
        for t in (0..t_len).rev() {
            let total: Vec<f64> = d_out[t][..hd].iter().zip(&dh).map(|(a, b)| a + b).collect();
            let (dx, dhp, dcp) = lstm::backward(&layer.forward, &mut gl.forward, &cache.fwd[t], &total, &dc);
            axpy(1.0, &dx, &mut d_in[t]);
            dh = dhp;
            dc = dcp;
        }
        let mut dh = dh_next[l][hd..].to_vec();
        let mut dc = dc_next[l][hd..].to_vec();
        for t in 0..t_len {
            let total: Vec<f64> = d_out[t][hd..].iter().zip(&dh).map(|(a, b)| a + b).collect();
            let (dx, dhp, dcp) = lstm::backward(&layer.backward, &mut gl.backward, &cache.bwd[t], &total, &dc);
            axpy(1.0, &dx, &mut d_in[t]);
            dh = dhp;
            dc = dcp;
        }
        for (d, m) in d_in.iter_mut().zip(&cache.masks) {
            if let Some(m) = m {
                d.iter_mut().zip(m).for_each(|(a, b)| *a *= b);
            }
        }
        d_out = d_in;
    }
    for (t, &id) in example.source.iter().enumerate() {
        axpy(1.0, &d_out[t], grad.src_embed.row_mut(id as usize));
    }
    Ok(loss)
}

/// Gradient of the summed cross-entropy of `example` without dropout.
pub fn gradient(params: &ModelParams, example: &Example) -> Result<(f64, ModelParams)> {
    let mut g = params.zeros_like();
    let loss = loss_and_grad(params, example, &mut g, 1.0, None)?;
    Ok((loss, g))
}
