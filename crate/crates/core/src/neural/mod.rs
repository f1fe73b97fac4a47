//! Attention-based LSTM encoder-decoder over BPE tokens.
//!
//! Bidirectional encoder, unidirectional decoder, bilinear (general)
//! attention and an attentional hidden layer before the output softmax.
//! Everything is `f64` and differentiated by hand.

mod beam;
mod config;
mod lstm;
mod model;
mod params;
mod tensor;
mod train;

pub use beam::{beam_search, beam_search_hypotheses, greedy_decode, is_emittable, BeamHypothesis};
pub use config::{ModelConfig, TrainConfig, Vocab, BOS, EOS, PAD, SPECIALS, UNK};
pub use model::{
    attention_matrix, decode_step, encode, gradient, perplexity, sequence_log_prob, teacher_forced_steps, DecoderState,
    EncoderContext, Example, StepOutput,
};
pub use params::{EncoderLayer, LstmParams, ModelParams};
pub use tensor::{log_softmax, softmax, Tensor};
pub use train::{sgd_step, train, train_with, EpochLog, TrainOutcome};
