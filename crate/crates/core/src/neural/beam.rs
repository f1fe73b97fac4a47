use alloc::vec::Vec;
use core::cmp::Ordering;

use super::config::{BOS, EOS, PAD, UNK};
use super::model::{decode_step, encode, DecoderState, EncoderContext};
use super::params::ModelParams;
use crate::error::{invalid, Result};

/// A partial (or finished) output sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamHypothesis {
    /// Emitted tokens, without BOS and without the final EOS.
    pub tokens: Vec<u32>,
    /// Sum of per-step log probabilities, EOS included when finished.
    pub log_prob: f64,
    pub state: DecoderState,
    pub finished: bool,
}

/// Tokens the decoder may emit: everything but PAD, BOS and UNK.
pub fn is_emittable(token: u32) -> bool {
    !matches!(token, PAD | BOS | UNK)
}

fn masked_log_probs(params: &ModelParams, hyp: &BeamHypothesis, ctx: &EncoderContext) -> (Vec<f64>, DecoderState) {
    let prev = hyp.tokens.last().copied().unwrap_or(BOS);
    let out = decode_step(params, &hyp.state, prev, ctx);
    let mut lp = out.log_probs();
    for (t, v) in lp.iter_mut().enumerate() {
        if !is_emittable(t as u32) {
            *v = f64::NEG_INFINITY;
        }
    }
    (lp, out.state)
}

/// Greedy argmax decoding; the lower token id wins ties.
pub fn greedy_decode(params: &ModelParams, source: &[u32], max_len: usize) -> Result<BeamHypothesis> {
    let ctx = encode(params, source)?;
    let mut hyp = BeamHypothesis {
        tokens: Vec::new(),
        log_prob: 0.0,
        state: ctx.init.clone(),
        finished: false,
    };
    for _ in 0..max_len {
        let (lp, state) = masked_log_probs(params, &hyp, &ctx);
        let (best, score) = lp
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (t, &v)| if v > acc.1 { (t, v) } else { acc });
        hyp.log_prob += score;
        hyp.state = state;
        if best as u32 == EOS {
            hyp.finished = true;
            break;
        }
        hyp.tokens.push(best as u32);
    }
    Ok(hyp)
}

/// Length-unnormalized beam search.
///
/// Each step expands every live hypothesis by every emittable token and
/// keeps the `beam_size` best candidates (higher log probability first, then
/// lower token id, then earlier parent). Candidates ending in EOS are frozen.
/// Search stops once no live hypothesis can beat the best finished one.
/// Returns finished hypotheses best-first, or the best live one when none
/// finished within `max_len` steps.
pub fn beam_search_hypotheses(
    params: &ModelParams,
    source: &[u32],
    beam_size: usize,
    max_len: usize,
) -> Result<Vec<BeamHypothesis>> {
    if beam_size == 0 {
        return Err(invalid("beam size must be at least 1"));
    }
    let ctx = encode(params, source)?;
    let mut live = alloc::vec![BeamHypothesis {
        tokens: Vec::new(),
        log_prob: 0.0,
        state: ctx.init.clone(),
        finished: false,
    }];
    let mut finished: Vec<BeamHypothesis> = Vec::new();

    for _ in 0..max_len {
        let mut candidates: Vec<(f64, u32, usize)> = Vec::new();
        let mut states = Vec::with_capacity(live.len());
        for (i, hyp) in live.iter().enumerate() {
            let (lp, state) = masked_log_probs(params, hyp, &ctx);
            states.push(state);
            for (t, v) in lp.into_iter().enumerate() {
                if v > f64::NEG_INFINITY {
                    candidates.push((hyp.log_prob + v, t as u32, i));
                }
            }
        }
        candidates.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap_or(Ordering::Equal)
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        candidates.truncate(beam_size);

        let mut next = Vec::with_capacity(beam_size);
        for (score, tok, parent) in candidates {
            let tokens = live[parent].tokens.clone();
            let state = states[parent].clone();
            if tok == EOS {
                finished.push(BeamHypothesis {
                    tokens,
                    log_prob: score,
                    state,
                    finished: true,
                });
            } else {
                let mut tokens = tokens;
                tokens.push(tok);
                next.push(BeamHypothesis {
                    tokens,
                    log_prob: score,
                    state,
                    finished: false,
                });
            }
        }
        live = next;
        let best_finished = finished.iter().map(|h| h.log_prob).fold(f64::NEG_INFINITY, f64::max);
        let best_live = live.iter().map(|h| h.log_prob).fold(f64::NEG_INFINITY, f64::max);
        if live.is_empty() || best_finished >= best_live {
            break;
        }
    }

    let mut out = if finished.is_empty() { live } else { finished };
    // Stable: equal scores keep discovery order.
    out.sort_by(|a, b| b.log_prob.partial_cmp(&a.log_prob).unwrap_or(Ordering::Equal));
    Ok(out)
}

/// Best sequence from [`beam_search_hypotheses`], without EOS.
pub fn beam_search(params: &ModelParams, source: &[u32], beam_size: usize, max_len: usize) -> Result<Vec<u32>> {
    let mut hyps = beam_search_hypotheses(params, source, beam_size, max_len)?;
    Ok(if hyps.is_empty() { Vec::new() } else { hyps.swap_remove(0).tokens })
}
