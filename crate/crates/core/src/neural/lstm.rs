use alloc::vec;
use alloc::vec::Vec;

use super::params::LstmParams;
use super::tensor::sigmoid;

/// Everything one LSTM step needs to be differentiated later.
#[derive(Debug, Clone)]
pub(crate) struct LstmStep {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    /// Activated gates `[i; f; g; o]`.
    pub gates: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

pub(crate) fn forward(p: &LstmParams, x: Vec<f64>, h_prev: Vec<f64>, c_prev: Vec<f64>) -> LstmStep {
    let n = p.hidden();
    let mut z: Vec<f64> = p.bias.data.clone();
    p.w_ih.matvec_add(&x, &mut z);
    p.w_hh.matvec_add(&h_prev, &mut z);
    for (k, v) in z.iter_mut().enumerate() {
        *v = if (2 * n..3 * n).contains(&k) {
            libm::tanh(*v)
        } else {
            sigmoid(*v)
        };
    }
    let (i, rest) = z.split_at(n);
    let (f, rest) = rest.split_at(n);
    let (g, o) = rest.split_at(n);
    let mut c = vec![0.0; n];
    let mut tanh_c = vec![0.0; n];
    let mut h = vec![0.0; n];
    for k in 0..n {
        c[k] = f[k] * c_prev[k] + i[k] * g[k];
        tanh_c[k] = libm::tanh(c[k]);
        h[k] = o[k] * tanh_c[k];
    }
    LstmStep {
        x,
        h_prev,
        c_prev,
        gates: z,
        c,
        tanh_c,
        h,
    }
}

/// Back-propagates `dh`, `dc` (gradients w.r.t. this step's outputs) into
/// `grad`, returning gradients for the input and the previous state.
pub(crate) fn backward(
    p: &LstmParams,
    grad: &mut LstmParams,
    s: &LstmStep,
    dh: &[f64],
    dc: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = p.hidden();
    let (i, rest) = s.gates.split_at(n);
    let (f, rest) = rest.split_at(n);
    let (g, o) = rest.split_at(n);
    let mut dz = vec![0.0; 4 * n];
    let mut dc_prev = vec![0.0; n];
    for k in 0..n {
        let dct = dc[k] + dh[k] * o[k] * (1.0 - s.tanh_c[k] * s.tanh_c[k]);
        dz[k] = dct * g[k] * i[k] * (1.0 - i[k]);
        dz[n + k] = dct * s.c_prev[k] * f[k] * (1.0 - f[k]);
        dz[2 * n + k] = dct * i[k] * (1.0 - g[k] * g[k]);
        dz[3 * n + k] = dh[k] * s.tanh_c[k] * o[k] * (1.0 - o[k]);
        dc_prev[k] = dct * f[k];
    }
    grad.w_ih.add_outer(&dz, &s.x);
    grad.w_hh.add_outer(&dz, &s.h_prev);
    for (b, d) in grad.bias.data.iter_mut().zip(&dz) {
        *b += d;
    }
    let mut dx = vec![0.0; s.x.len()];
    p.w_ih.matvec_t_add(&dz, &mut dx);
    let mut dh_prev = vec![0.0; n];
    p.w_hh.matvec_t_add(&dz, &mut dh_prev);
    (dx, dh_prev, dc_prev)
}
