use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ModelConfig, TrainConfig};
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// One LSTM layer in one direction. Gate rows are ordered input, forget,
/// cell candidate, output.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub w_ih: Tensor,
    pub w_hh: Tensor,
    pub bias: Tensor,
}

impl LstmParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w_ih: Tensor::zeros(4 * hidden, input),
            w_hh: Tensor::zeros(4 * hidden, hidden),
            bias: Tensor::zeros(4 * hidden, 1),
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_hh.cols
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderLayer {
    pub forward: LstmParams,
    pub backward: LstmParams,
}

/// All learned tensors.
///
/// `attn` is the bilinear score matrix (hidden x hidden), `combine` maps
/// `[s_t; c_t]` to the attentional vector (hidden x 2*hidden) and `output`
/// projects that onto the vocabulary (vocab x hidden).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub src_embed: Tensor,
    pub tgt_embed: Tensor,
    pub encoder: Vec<EncoderLayer>,
    pub decoder: Vec<LstmParams>,
    pub attn: Tensor,
    pub combine: Tensor,
    pub output: Tensor,
}

impl ModelParams {
    pub fn zeros(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let v = config.vocab_size();
        let (e, h, hd) = (config.embed_dim, config.hidden_dim, config.direction_dim());
        let encoder = (0..config.num_layers)
            .map(|l| {
                let input = if l == 0 { e } else { h };
                EncoderLayer {
                    forward: LstmParams::zeros(input, hd),
                    backward: LstmParams::zeros(input, hd),
                }
            })
            .collect();
        let decoder = (0..config.num_layers)
            .map(|l| LstmParams::zeros(if l == 0 { e } else { h }, h))
            .collect();
        Ok(Self {
            config: config.clone(),
            src_embed: Tensor::zeros(v, e),
            tgt_embed: Tensor::zeros(v, e),
            encoder,
            decoder,
            attn: Tensor::zeros(h, h),
            combine: Tensor::zeros(h, 2 * h),
            output: Tensor::zeros(v, h),
        })
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.for_each_tensor_mut(|_, t| t.fill(0.0));
        z
    }

    /// Every entry drawn independently from `U[-init_range, init_range]`,
    /// in [`ModelParams::tensor_names`] order.
    pub fn init(config: &ModelConfig, train: &TrainConfig) -> Result<Self> {
        train.validate()?;
        let mut p = Self::zeros(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(train.seed);
        let r = train.init_range;
        p.for_each_tensor_mut(|_, t| {
            for x in t.data.iter_mut() {
                *x = rng.gen_range(-r..=r);
            }
        });
        Ok(p)
    }

    /// Tensors in the fixed serialization order: embeddings, encoder layers
    /// (forward then backward), decoder layers, attention, combine, output.
    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut v = vec![&self.src_embed, &self.tgt_embed];
        for layer in &self.encoder {
            for p in [&layer.forward, &layer.backward] {
                v.extend([&p.w_ih, &p.w_hh, &p.bias]);
            }
        }
        for p in &self.decoder {
            v.extend([&p.w_ih, &p.w_hh, &p.bias]);
        }
        v.extend([&self.attn, &self.combine, &self.output]);
        v
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut v = vec![&mut self.src_embed, &mut self.tgt_embed];
        for layer in &mut self.encoder {
            for p in [&mut layer.forward, &mut layer.backward] {
                v.extend([&mut p.w_ih, &mut p.w_hh, &mut p.bias]);
            }
        }
        for p in &mut self.decoder {
            v.extend([&mut p.w_ih, &mut p.w_hh, &mut p.bias]);
        }
        v.extend([&mut self.attn, &mut self.combine, &mut self.output]);
        v
    }

    /// Names matching [`ModelParams::tensors`] one to one.
    pub fn tensor_names(&self) -> Vec<String> {
        let mut names = vec![String::from("src_embed"), String::from("tgt_embed")];
        for l in 0..self.encoder.len() {
            for dir in ["fwd", "bwd"] {
                for t in ["w_ih", "w_hh", "bias"] {
                    names.push(format!("encoder.{l}.{dir}.{t}"));
                }
            }
        }
        for l in 0..self.decoder.len() {
            for t in ["w_ih", "w_hh", "bias"] {
                names.push(format!("decoder.{l}.{t}"));
            }
        }
        names.extend(["attn", "combine", "output"].map(String::from));
        names
    }

    pub fn for_each_tensor<F: FnMut(&str, &Tensor)>(&self, mut f: F) {
        for (n, t) in self.tensor_names().iter().zip(self.tensors()) {
            f(n, t);
        }
    }

    pub fn for_each_tensor_mut<F: FnMut(&str, &mut Tensor)>(&mut self, mut f: F) {
        let names = self.tensor_names();
        for (n, t) in names.iter().zip(self.tensors_mut()) {
            f(n, t);
        }
    }

    /// Replaces tensor data in serialization order, checking shapes.
    pub fn load_tensors(&mut self, tensors: Vec<Tensor>) -> Result<()> {
        let expected = self.tensors().len();
        if tensors.len() != expected {
            return Err(Error::Shape(format!("expected {expected} tensors, got {}", tensors.len())));
        }
        let mut it = tensors.into_iter();
        let mut err = None;
        self.for_each_tensor_mut(|name, t| {
            let src = it.next().expect("counted");
            if (src.rows, src.cols) != (t.rows, t.cols) {
                err.get_or_insert(Error::Shape(format!(
                    "{name}: expected {}x{}, got {}x{}",
                    t.rows, t.cols, src.rows, src.cols
                )));
            } else {
                *t = src;
            }
        });
        err.map_or(Ok(()), Err)
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        let mut ok = true;
        self.for_each_tensor(|_, t| ok &= t.is_finite());
        ok
    }

    pub fn squared_norm(&self) -> f64 {
        let mut s = 0.0;
        self.for_each_tensor(|_, t| s += t.data.iter().map(|x| x * x).sum::<f64>());
        s
    }

    /// `self += alpha * other`; shapes must agree.
    pub fn axpy(&mut self, alpha: f64, other: &ModelParams) {
        for (t, o) in self.tensors_mut().into_iter().zip(other.tensors()) {
            super::tensor::axpy(alpha, &o.data, &mut t.data);
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        self.for_each_tensor_mut(|_, t| t.data.iter_mut().for_each(|x| *x *= alpha));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::config::Vocab;

    fn cfg() -> ModelConfig {
        ModelConfig {
            embed_dim: 6,
            hidden_dim: 8,
            num_layers: 2,
            dropout: 0.0,
            vocab: Vocab::from_symbols(["a", "b", "c"]).unwrap(),
        }
    }

    #[test]
    fn shapes() {
        let p = ModelParams::zeros(&cfg()).unwrap();
        assert_eq!((p.src_embed.rows, p.src_embed.cols), (7, 6));
        assert_eq!((p.encoder[0].forward.w_ih.rows, p.encoder[0].forward.w_ih.cols), (16, 6));
        assert_eq!((p.encoder[1].backward.w_ih.rows, p.encoder[1].backward.w_ih.cols), (16, 8));
        assert_eq!((p.decoder[0].w_ih.rows, p.decoder[0].w_ih.cols), (32, 6));
        assert_eq!((p.decoder[1].w_hh.rows, p.decoder[1].w_hh.cols), (32, 8));
        assert_eq!((p.attn.rows, p.attn.cols), (8, 8));
        assert_eq!((p.combine.rows, p.combine.cols), (8, 16));
        assert_eq!((p.output.rows, p.output.cols), (7, 8));
        assert_eq!(p.tensor_names().len(), 2 + 2 * 2 * 3 + 2 * 3 + 3);
        assert_eq!(p.tensors().len(), p.tensor_names().len());
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let t = TrainConfig::default();
        let a = ModelParams::init(&cfg(), &t).unwrap();
        let b = ModelParams::init(&cfg(), &t).unwrap();
        assert_eq!(a, b);
        let c = ModelParams::init(&cfg(), &TrainConfig { seed: 2, ..t.clone() }).unwrap();
        assert_ne!(a, c);
        a.for_each_tensor(|_, t| assert!(t.data.iter().all(|x| (-0.1..=0.1).contains(x))));
        assert!(a.is_finite());
    }

    #[test]
    fn load_tensors_checks_shapes() {
        let a = ModelParams::init(&cfg(), &TrainConfig::default()).unwrap();
        let mut b = ModelParams::zeros(&cfg()).unwrap();
        b.load_tensors(a.tensors().into_iter().cloned().collect()).unwrap();
        assert_eq!(a, b);
        let mut bad: Vec<Tensor> = a.tensors().into_iter().cloned().collect();
        bad[3] = Tensor::zeros(1, 1);
        assert!(matches!(b.load_tensors(bad), Err(Error::Shape(_))));
        assert!(b.load_tensors(Vec::new()).is_err());
    }

    #[test]
    fn axpy_and_scale() {
        let a = ModelParams::init(&cfg(), &TrainConfig::default()).unwrap();
        let mut b = a.clone();
        b.axpy(-1.0, &a);
        assert_eq!(b.squared_norm(), 0.0);
        let mut c = a.clone();
        c.scale(2.0);
        assert!((c.squared_norm() - 4.0 * a.squared_norm()).abs() < 1e-12);
    }
}
