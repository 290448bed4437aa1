//! Dual-encoder pair scorer.
//!
//! Two independent LSTMs read the post and the question over a shared
//! embedding table. Their final hidden states are multiplied element-wise,
//! passed through one tanh dense layer and a two-unit output layer, and
//! normalized with softmax. Class 0 is "not a clarification question",
//! class 1 is "clarification question".
//!
//! All parameters live in one flat `Vec<f64>`; [`PairScorerModel::blocks`]
//! describes the layout. Inside each LSTM the `4·hidden` gate rows are
//! ordered input, forget, cell candidate, output.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub vocab: usize,
    pub embed: usize,
    pub hidden: usize,
    pub dense: usize,
}

/// Which of the twin encoders to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Post,
    Question,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct EncoderOffsets {
    w_input: usize,
    w_recurrent: usize,
    bias: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layout {
    encoders: [EncoderOffsets; 2],
    dense_w: usize,
    dense_b: usize,
    out_w: usize,
    out_b: usize,
    total: usize,
}

impl Layout {
    fn new(d: Dims) -> Self {
        let mut at = d.vocab * d.embed;
        let mut encoder = || {
            let w_input = at;
            at += 4 * d.hidden * d.embed;
            let w_recurrent = at;
            at += 4 * d.hidden * d.hidden;
            let bias = at;
            at += 4 * d.hidden;
            EncoderOffsets {
                w_input,
                w_recurrent,
                bias,
            }
        };
        let encoders = [encoder(), encoder()];
        let dense_w = at;
        at += d.dense * d.hidden;
        let dense_b = at;
        at += d.dense;
        let out_w = at;
        at += 2 * d.dense;
        let out_b = at;
        at += 2;
        Layout {
            encoders,
            dense_w,
            dense_b,
            out_w,
            out_b,
            total: at,
        }
    }
}

/// Named parameter block: `offset..offset + rows * cols` in the flat vector,
/// row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub name: &'static str,
    pub rows: usize,
    pub cols: usize,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairScorerModel {
    dims: Dims,
    layout: Layout,
    params: Vec<f64>,
}

/// Per-step values kept for backpropagation through one encoder.
#[derive(Debug, Clone)]
struct LstmTrace {
    /// Post-activation gates, `4·hidden` per step.
    gates: Vec<f64>,
    /// Cell states c_0..c_T (c_0 = 0), `hidden` each.
    cells: Vec<f64>,
    /// Hidden states h_0..h_T (h_0 = 0), `hidden` each.
    hiddens: Vec<f64>,
}

struct Forward {
    post: LstmTrace,
    question: LstmTrace,
    fused: Vec<f64>,
    dense: Vec<f64>,
    probs: [f64; 2],
}

/// Gradient with the same layout as the parameters. Embedding rows are
/// stored sparsely, keyed by token id.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    embed: usize,
    emb_len: usize,
    /// Everything after the embedding table.
    pub(crate) rest: Vec<f64>,
    pub(crate) rows: BTreeMap<u32, Vec<f64>>,
}

impl Gradient {
    fn new(model: &PairScorerModel) -> Self {
        let emb_len = model.dims.vocab * model.dims.embed;
        Gradient {
            embed: model.dims.embed,
            emb_len,
            rest: vec![0.0; model.layout.total - emb_len],
            rows: BTreeMap::new(),
        }
    }

    pub fn get(&self, index: usize) -> f64 {
        if index < self.emb_len {
            let row = (index / self.embed) as u32;
            self.rows.get(&row).map_or(0.0, |r| r[index % self.embed])
        } else {
            self.rest[index - self.emb_len]
        }
    }

    pub fn add(&mut self, other: &Gradient) {
        for (a, b) in self.rest.iter_mut().zip(&other.rest) {
            *a += b;
        }
        for (id, row) in &other.rows {
            let dst = self.rows.entry(*id).or_insert_with(|| vec![0.0; row.len()]);
            for (a, b) in dst.iter_mut().zip(row) {
                *a += b;
            }
        }
    }

    pub fn scale(&mut self, k: f64) {
        self.rest.iter_mut().for_each(|v| *v *= k);
        self.rows.values_mut().flatten().for_each(|v| *v *= k);
    }

    pub fn norm(&self) -> f64 {
        let s: f64 = self.rest.iter().chain(self.rows.values().flatten()).map(|v| v * v).sum();
        s.sqrt()
    }

    fn row_mut(&mut self, id: u32) -> &mut Vec<f64> {
        let embed = self.embed;
        self.rows.entry(id).or_insert_with(|| vec![0.0; embed])
    }

    /// Token ids with a non-zero gradient row.
    pub fn touched_rows(&self) -> impl Iterator<Item = u32> + '_ {
        self.rows.keys().copied()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn softmax2(logits: [f64; 2]) -> [f64; 2] {
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    let s = e0 + e1;
    [e0 / s, e1 / s]
}

/// `out += M · x` for a row-major `rows × x.len()` matrix.
fn mat_vec_acc(out: &mut [f64], m: &[f64], x: &[f64]) {
    let cols = x.len();
    for (o, row) in out.iter_mut().zip(m.chunks_exact(cols)) {
        *o += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// `out += Mᵀ · y` for a row-major `y.len() × out.len()` matrix.
fn mat_t_vec_acc(out: &mut [f64], m: &[f64], y: &[f64]) {
    let cols = out.len();
    for (yi, row) in y.iter().zip(m.chunks_exact(cols)) {
        if *yi == 0.0 {
            continue;
        }
        for (o, a) in out.iter_mut().zip(row) {
            *o += yi * a;
        }
    }
}

/// `g += y ⊗ x` (outer product) for a row-major `y.len() × x.len()` matrix.
fn outer_acc(g: &mut [f64], y: &[f64], x: &[f64]) {
    let cols = x.len();
    for (yi, row) in y.iter().zip(g.chunks_exact_mut(cols)) {
        if *yi == 0.0 {
            continue;
        }
        for (gv, xv) in row.iter_mut().zip(x) {
            *gv += yi * xv;
        }
    }
}

impl PairScorerModel {
    /// All-zero model.
    pub fn zeros(dims: Dims) -> Self {
        let layout = Layout::new(dims);
        PairScorerModel {
            dims,
            layout,
            params: vec![0.0; layout.total],
        }
    }

    /// Seeded random initialization: Glorot-uniform matrices, uniform
    /// embeddings in ±1, zero biases except the forget gate (1.0).
    pub fn init(dims: Dims, seed: u64) -> Self {
        let mut m = Self::zeros(dims);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks = m.blocks();
        for b in &blocks {
            let range = b.offset..b.offset + b.rows * b.cols;
            let limit = match b.name {
                "embedding" => 1.0,
                n if n.ends_with("bias") => 0.0,
                _ => (6.0 / (b.rows + b.cols) as f64).sqrt(),
            };
            for v in &mut m.params[range] {
                *v = if limit > 0.0 { rng.gen_range(-limit..limit) } else { 0.0 };
            }
            if b.name.starts_with("encoder_") && b.name.ends_with("bias") {
                let h = dims.hidden;
                m.params[b.offset + h..b.offset + 2 * h].fill(1.0);
            }
        }
        m
    }

    pub fn from_params(dims: Dims, params: Vec<f64>) -> Result<Self> {
        let layout = Layout::new(dims);
        if params.len() != layout.total {
            return Err(Error::Checkpoint(format!(
                "expected {} parameters for {dims:?}, got {}",
                layout.total,
                params.len()
            )));
        }
        Ok(PairScorerModel { dims, layout, params })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.layout.total
    }

    pub fn blocks(&self) -> Vec<Block> {
        let d = self.dims;
        let l = self.layout;
        let mut blocks = vec![Block {
            name: "embedding",
            rows: d.vocab,
            cols: d.embed,
            offset: 0,
        }];
        for (enc, prefix) in l.encoders.iter().zip(["encoder_p", "encoder_q"]) {
            let names: [&'static str; 3] = if prefix == "encoder_p" {
                ["encoder_p.w_input", "encoder_p.w_recurrent", "encoder_p.bias"]
            } else {
                ["encoder_q.w_input", "encoder_q.w_recurrent", "encoder_q.bias"]
            };
            blocks.push(Block {
                name: names[0],
                rows: 4 * d.hidden,
                cols: d.embed,
                offset: enc.w_input,
            });
            blocks.push(Block {
                name: names[1],
                rows: 4 * d.hidden,
                cols: d.hidden,
                offset: enc.w_recurrent,
            });
            blocks.push(Block {
                name: names[2],
                rows: 1,
                cols: 4 * d.hidden,
                offset: enc.bias,
            });
        }
        blocks.push(Block {
            name: "dense.weight",
            rows: d.dense,
            cols: d.hidden,
            offset: l.dense_w,
        });
        blocks.push(Block {
            name: "dense.bias",
            rows: 1,
            cols: d.dense,
            offset: l.dense_b,
        });
        blocks.push(Block {
            name: "output.weight",
            rows: 2,
            cols: d.dense,
            offset: l.out_w,
        });
        blocks.push(Block {
            name: "output.bias",
            rows: 1,
            cols: 2,
            offset: l.out_b,
        });
        blocks
    }

    pub fn block_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        let b = self.blocks().into_iter().find(|b| b.name == name)?;
        Some(&mut self.params[b.offset..b.offset + b.rows * b.cols])
    }

    fn embedding(&self, id: u32) -> &[f64] {
        let e = self.dims.embed;
        let id = (id as usize).min(self.dims.vocab - 1);
        &self.params[id * e..(id + 1) * e]
    }

    fn check_ids(&self, ids: &[u32]) -> Result<()> {
        if ids.is_empty() {
            return Err(Error::EmptySequence);
        }
        if let Some(bad) = ids.iter().find(|&&i| i as usize >= self.dims.vocab) {
            return Err(Error::InvalidConfig(format!(
                "token id {bad} outside vocabulary of {}",
                self.dims.vocab
            )));
        }
        Ok(())
    }

    fn run_encoder(&self, side: Side, ids: &[u32]) -> LstmTrace {
        let h = self.dims.hidden;
        let e = self.dims.embed;
        let enc = self.layout.encoders[side as usize];
        let w_in = &self.params[enc.w_input..enc.w_input + 4 * h * e];
        let w_rec = &self.params[enc.w_recurrent..enc.w_recurrent + 4 * h * h];
        let bias = &self.params[enc.bias..enc.bias + 4 * h];

        let steps = ids.len();
        let mut trace = LstmTrace {
            gates: Vec::with_capacity(steps * 4 * h),
            cells: vec![0.0; h],
            hiddens: vec![0.0; h],
        };
        let mut z = vec![0.0; 4 * h];
        for (t, &id) in ids.iter().enumerate() {
            z.copy_from_slice(bias);
            mat_vec_acc(&mut z, w_in, self.embedding(id));
            mat_vec_acc(&mut z, w_rec, &trace.hiddens[t * h..(t + 1) * h]);
            for k in 0..h {
                z[k] = sigmoid(z[k]);
                z[h + k] = sigmoid(z[h + k]);
                z[2 * h + k] = z[2 * h + k].tanh();
                z[3 * h + k] = sigmoid(z[3 * h + k]);
            }
            for k in 0..h {
                let c_prev = trace.cells[t * h + k];
                let c = z[h + k] * c_prev + z[k] * z[2 * h + k];
                trace.cells.push(c);
            }
            for k in 0..h {
                let c = trace.cells[(t + 1) * h + k];
                trace.hiddens.push(z[3 * h + k] * c.tanh());
            }
            trace.gates.extend_from_slice(&z);
        }
        trace
    }

    fn backprop_encoder(&self, side: Side, ids: &[u32], trace: &LstmTrace, dh_final: &[f64], grad: &mut Gradient) {
        let h = self.dims.hidden;
        let e = self.dims.embed;
        let emb_len = self.dims.vocab * e;
        let enc = self.layout.encoders[side as usize];
        let w_in = &self.params[enc.w_input..enc.w_input + 4 * h * e];
        let w_rec = &self.params[enc.w_recurrent..enc.w_recurrent + 4 * h * h];

        let mut dh = dh_final.to_vec();
        let mut dc = vec![0.0; h];
        let mut dz = vec![0.0; 4 * h];
        let mut de = vec![0.0; e];
        for t in (0..ids.len()).rev() {
            let gates = &trace.gates[t * 4 * h..(t + 1) * 4 * h];
            let c_prev = &trace.cells[t * h..(t + 1) * h];
            let c = &trace.cells[(t + 1) * h..(t + 2) * h];
            let h_prev = &trace.hiddens[t * h..(t + 1) * h];
            for k in 0..h {
                let (i, f, g, o) = (gates[k], gates[h + k], gates[2 * h + k], gates[3 * h + k]);
                let tc = c[k].tanh();
                dc[k] += dh[k] * o * (1.0 - tc * tc);
                dz[k] = dc[k] * g * i * (1.0 - i);
                dz[h + k] = dc[k] * c_prev[k] * f * (1.0 - f);
                dz[2 * h + k] = dc[k] * i * (1.0 - g * g);
                dz[3 * h + k] = dh[k] * tc * o * (1.0 - o);
                dc[k] *= f;
            }
            {
                let rest = &mut grad.rest;
                let off = |x: usize| x - emb_len;
                outer_acc(
                    &mut rest[off(enc.w_input)..off(enc.w_input) + 4 * h * e],
                    &dz,
                    self.embedding(ids[t]),
                );
                outer_acc(&mut rest[off(enc.w_recurrent)..off(enc.w_recurrent) + 4 * h * h], &dz, h_prev);
                for (g, d) in rest[off(enc.bias)..off(enc.bias) + 4 * h].iter_mut().zip(&dz) {
                    *g += d;
                }
            }
            de.fill(0.0);
            mat_t_vec_acc(&mut de, w_in, &dz);
            for (g, d) in grad.row_mut(ids[t]).iter_mut().zip(&de) {
                *g += d;
            }
            dh.fill(0.0);
            mat_t_vec_acc(&mut dh, w_rec, &dz);
        }
    }

    /// Final hidden state of one encoder after reading `ids` left to right.
    pub fn encode(&self, ids: &[u32], side: Side) -> Result<Vec<f64>> {
        self.check_ids(ids)?;
        let h = self.dims.hidden;
        let trace = self.run_encoder(side, ids);
        Ok(trace.hiddens[ids.len() * h..].to_vec())
    }

    fn forward(&self, post: &[u32], question: &[u32]) -> Forward {
        let d = self.dims;
        let l = self.layout;
        let post_trace = self.run_encoder(Side::Post, post);
        let q_trace = self.run_encoder(Side::Question, question);
        let hp = &post_trace.hiddens[post.len() * d.hidden..];
        let hq = &q_trace.hiddens[question.len() * d.hidden..];
        let fused: Vec<f64> = hp.iter().zip(hq).map(|(a, b)| a * b).collect();
        let mut dense = self.params[l.dense_b..l.dense_b + d.dense].to_vec();
        mat_vec_acc(&mut dense, &self.params[l.dense_w..l.dense_w + d.dense * d.hidden], &fused);
        dense.iter_mut().for_each(|v| *v = v.tanh());
        let mut logits = [self.params[l.out_b], self.params[l.out_b + 1]];
        mat_vec_acc(&mut logits, &self.params[l.out_w..l.out_w + 2 * d.dense], &dense);
        Forward {
            post: post_trace,
            question: q_trace,
            fused,
            dense,
            probs: softmax2(logits),
        }
    }

    /// Class probabilities `(negative, positive)` for a (post, question) pair.
    pub fn score_pair(&self, post: &[u32], question: &[u32]) -> Result<(f64, f64)> {
        self.check_ids(post)?;
        self.check_ids(question)?;
        let p = self.forward(post, question).probs;
        Ok((p[0], p[1]))
    }

    /// Cross-entropy loss of one labeled pair.
    pub fn loss(&self, post: &[u32], question: &[u32], class: usize) -> Result<f64> {
        self.check_ids(post)?;
        self.check_ids(question)?;
        Ok(-self.forward(post, question).probs[class].max(f64::MIN_POSITIVE).ln())
    }

    pub fn zero_gradient(&self) -> Gradient {
        Gradient::new(self)
    }

    /// Adds the gradient of the cross-entropy loss of one pair to `grad`
    /// and returns the loss.
    pub fn accumulate_gradient(&self, post: &[u32], question: &[u32], class: usize, grad: &mut Gradient) -> Result<f64> {
        self.check_ids(post)?;
        self.check_ids(question)?;
        let d = self.dims;
        let l = self.layout;
        let emb_len = d.vocab * d.embed;
        let fwd = self.forward(post, question);

        let mut dlogits = fwd.probs;
        dlogits[class] -= 1.0;
        let rest = &mut grad.rest;
        outer_acc(
            &mut rest[l.out_w - emb_len..l.out_w - emb_len + 2 * d.dense],
            &dlogits,
            &fwd.dense,
        );
        rest[l.out_b - emb_len] += dlogits[0];
        rest[l.out_b - emb_len + 1] += dlogits[1];

        let mut ddense = vec![0.0; d.dense];
        mat_t_vec_acc(&mut ddense, &self.params[l.out_w..l.out_w + 2 * d.dense], &dlogits);
        for (g, a) in ddense.iter_mut().zip(&fwd.dense) {
            *g *= 1.0 - a * a;
        }
        outer_acc(
            &mut rest[l.dense_w - emb_len..l.dense_w - emb_len + d.dense * d.hidden],
            &ddense,
            &fwd.fused,
        );
        for (g, v) in rest[l.dense_b - emb_len..l.dense_b - emb_len + d.dense].iter_mut().zip(&ddense) {
            *g += v;
        }
        let mut dfused = vec![0.0; d.hidden];
        mat_t_vec_acc(&mut dfused, &self.params[l.dense_w..l.dense_w + d.dense * d.hidden], &ddense);

        let hp = &fwd.post.hiddens[post.len() * d.hidden..];
        let hq = &fwd.question.hiddens[question.len() * d.hidden..];
        let dhp: Vec<f64> = dfused.iter().zip(hq).map(|(g, q)| g * q).collect();
        let dhq: Vec<f64> = dfused.iter().zip(hp).map(|(g, p)| g * p).collect();
        self.backprop_encoder(Side::Post, post, &fwd.post, &dhp, grad);
        self.backprop_encoder(Side::Question, question, &fwd.question, &dhq, grad);

        Ok(-fwd.probs[class].max(f64::MIN_POSITIVE).ln())
    }

    /// `params -= lr · grad`.
    pub fn apply_gradient(&mut self, grad: &Gradient, lr: f64) {
        let emb_len = self.dims.vocab * self.dims.embed;
        let e = self.dims.embed;
        for (p, g) in self.params[emb_len..].iter_mut().zip(&grad.rest) {
            *p -= lr * g;
        }
        for (id, row) in &grad.rows {
            let start = *id as usize * e;
            for (p, g) in self.params[start..start + e].iter_mut().zip(row) {
                *p -= lr * g;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Dims {
        Dims {
            vocab: 5,
            embed: 1,
            hidden: 1,
            dense: 1,
        }
    }

    #[test]
    fn zero_model_encodes_to_zero() {
        let m = PairScorerModel::zeros(Dims {
            vocab: 6,
            embed: 3,
            hidden: 4,
            dense: 2,
        });
        assert_eq!(m.encode(&[2, 3, 5], Side::Post).unwrap(), vec![0.0; 4]);
        assert_eq!(m.encode(&[1], Side::Question).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn empty_sequence_rejected() {
        let m = PairScorerModel::init(tiny(), 1);
        assert!(matches!(m.encode(&[], Side::Post), Err(Error::EmptySequence)));
        assert!(matches!(m.score_pair(&[2], &[]), Err(Error::EmptySequence)));
    }

    fn set(m: &mut PairScorerModel, name: &str, values: &[f64]) {
        m.block_mut(name).unwrap().copy_from_slice(values);
    }

    #[test]
    fn single_step_matches_hand_computation() {
        // d_e = d_h = 1, token 2 has embedding 0.5.
        let mut m = PairScorerModel::zeros(tiny());
        set(&mut m, "embedding", &[0.0, 0.0, 0.5, 0.0, 0.0]);
        // gates: input, forget, cell, output
        set(&mut m, "encoder_p.w_input", &[0.4, -0.3, 0.8, 0.2]);
        set(&mut m, "encoder_p.bias", &[0.1, 0.0, -0.2, 0.3]);
        // Pencil values:
        // z_i = 0.1 + 0.4·0.5 = 0.3 -> i = σ(0.3) = 0.574442516811659
        // z_g = -0.2 + 0.8·0.5 = 0.2 -> g = tanh(0.2) = 0.197375320224904
        // z_o = 0.3 + 0.2·0.5 = 0.4 -> o = σ(0.4) = 0.598687660112452
        // c = i·g = 0.113381485909... ; h = o·tanh(c)
        let i = 0.574442516811659_f64;
        let g = 0.197375320224904_f64;
        let o = 0.598687660112452_f64;
        let expected = o * (i * g).tanh();
        let h = m.encode(&[2], Side::Post).unwrap();
        assert!((h[0] - expected).abs() < 1e-12, "{} vs {expected}", h[0]);
        assert!((h[0] - 0.067_590_290_315).abs() < 1e-11);
    }

    #[test]
    fn one_dim_forward_pass() {
        let mut m = PairScorerModel::zeros(tiny());
        set(&mut m, "embedding", &[0.0, 0.0, 1.0, -1.0, 0.0]);
        for enc in ["encoder_p", "encoder_q"] {
            set(&mut m, &format!("{enc}.w_input"), &[0.0, 0.0, 1.0, 0.0]);
            set(&mut m, &format!("{enc}.bias"), &[0.0, 0.0, 0.0, 0.0]);
        }
        set(&mut m, "dense.weight", &[2.0]);
        set(&mut m, "dense.bias", &[0.1]);
        set(&mut m, "output.weight", &[-1.0, 1.5]);
        set(&mut m, "output.bias", &[0.0, 0.2]);
        // Encoder on [2]: i = f = o = 1/2, g = tanh(1); c = g/2; h = tanh(c)/2.
        let hp = 0.5 * (0.5 * 1f64.tanh()).tanh();
        // Question [3]: g = tanh(-1) so h_q = -h_p.
        let hq = -hp;
        let a = (2.0 * hp * hq + 0.1).tanh();
        let l0 = -a;
        let l1 = 1.5 * a + 0.2;
        let p1 = 1.0 / (1.0 + (l0 - l1).exp());
        let (n, p) = m.score_pair(&[2], &[3]).unwrap();
        assert!((p - p1).abs() < 1e-12);
        assert!((n + p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_output_layer_gives_uniform() {
        let mut m = PairScorerModel::init(
            Dims {
                vocab: 8,
                embed: 4,
                hidden: 5,
                dense: 3,
            },
            9,
        );
        m.block_mut("output.weight").unwrap().fill(0.0);
        m.block_mut("output.bias").unwrap().fill(0.0);
        assert_eq!(m.score_pair(&[2, 3, 4], &[5, 7]).unwrap(), (0.5, 0.5));
    }

    #[test]
    fn encoders_are_separate() {
        let m = PairScorerModel::init(
            Dims {
                vocab: 10,
                embed: 4,
                hidden: 6,
                dense: 3,
            },
            3,
        );
        let ids = [2, 5, 7, 3];
        assert_ne!(m.encode(&ids, Side::Post).unwrap(), m.encode(&ids, Side::Question).unwrap());
        let a = m.score_pair(&[2, 5], &[7, 3]).unwrap();
        let b = m.score_pair(&[7, 3], &[2, 5]).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn layout_covers_all_params() {
        let m = PairScorerModel::init(
            Dims {
                vocab: 7,
                embed: 3,
                hidden: 2,
                dense: 4,
            },
            1,
        );
        let blocks = m.blocks();
        let mut at = 0;
        for b in &blocks {
            assert_eq!(b.offset, at, "{}", b.name);
            at += b.rows * b.cols;
        }
        assert_eq!(at, m.param_count());
    }
}
