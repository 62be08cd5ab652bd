//! Forward and backward passes of the relational encoder and both heads.
//!
//! Gradients are accumulated into a flat buffer laid out like
//! [`CriticParams::data`].

use crate::error::Result;
use crate::features::{CandidateInput, GraphBatchInput};
use crate::layout::{Block, Layout, COMMIT_FEATURES, EMBED_DIM, HIDDEN, LAYERS, NODE_INPUT, TEXT_DIM};
use crate::params::CriticParams;

pub const LAYER_NORM_EPS: f64 = 1e-5;

/// Dot product with four independent accumulators.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn affine(w: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
    let cols = x.len();
    b.iter()
        .enumerate()
        .map(|(o, bias)| bias + dot(&w[o * cols..(o + 1) * cols], x))
        .collect()
}

fn matvec(w: &[f64], rows: usize, x: &[f64]) -> Vec<f64> {
    let cols = x.len();
    (0..rows).map(|o| dot(&w[o * cols..(o + 1) * cols], x)).collect()
}

/// dx += Wᵀ dy, restricted to input columns `cols`.
fn matvec_t_acc(w: &[f64], width: usize, dy: &[f64], dx: &mut [f64], cols: std::ops::Range<usize>) {
    for (o, g) in dy.iter().enumerate() {
        if *g == 0.0 {
            continue;
        }
        let row = &w[o * width..(o + 1) * width];
        for (d, c) in dx.iter_mut().zip(cols.clone()) {
            *d += g * row[c];
        }
    }
}

fn outer_acc(grad: &mut [f64], dy: &[f64], x: &[f64], scale: f64) {
    let cols = x.len();
    for (o, g) in dy.iter().enumerate() {
        let g = g * scale;
        if g == 0.0 {
            continue;
        }
        for (acc, xi) in grad[o * cols..(o + 1) * cols].iter_mut().zip(x) {
            *acc += g * xi;
        }
    }
}

fn add_into(acc: &mut [f64], v: &[f64], scale: f64) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += scale * b;
    }
}

fn relu(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.max(0.0)).collect()
}

fn relu_grad(d: &[f64], pre: &[f64]) -> Vec<f64> {
    d.iter().zip(pre).map(|(g, p)| if *p > 0.0 { *g } else { 0.0 }).collect()
}

/// Folds ReLU activation signs into a fingerprint.
fn fold_signs(acc: &mut u64, pre: &[f64]) {
    for p in pre {
        *acc = (*acc ^ u64::from(*p > 0.0)).wrapping_mul(0x0000_0100_0000_01b3);
    }
}

#[derive(Clone, Debug, Default)]
struct LayerCache {
    input: Vec<Vec<f64>>,
    update_in: Vec<Vec<f64>>,
    pre1: Vec<Vec<f64>>,
    act1: Vec<Vec<f64>>,
    xhat: Vec<Vec<f64>>,
    inv_std: Vec<f64>,
}

/// Node states after message passing, with everything backward needs.
#[derive(Clone, Debug)]
pub struct Encoding {
    pub nodes: Vec<Vec<f64>>,
    pub graph: Vec<f64>,
    mask: Vec<bool>,
    inputs: Vec<Vec<f64>>,
    in_pre: Vec<Vec<f64>>,
    in_act: Vec<Vec<f64>>,
    layers: Vec<LayerCache>,
}

impl Encoding {
    /// Masked mean of final node states over `mask ∧ valid`; zero when empty.
    pub fn pool(&self, mask: &[bool]) -> Vec<f64> {
        let mut out = vec![0.0; HIDDEN];
        let members: Vec<usize> = (0..self.nodes.len()).filter(|&v| mask[v] && self.mask[v]).collect();
        if members.is_empty() {
            return out;
        }
        for &v in &members {
            add_into(&mut out, &self.nodes[v], 1.0);
        }
        let k = members.len() as f64;
        out.iter_mut().for_each(|x| *x /= k);
        out
    }

    fn pool_backward(&self, mask: &[bool], d: &[f64], dnodes: &mut [Vec<f64>]) {
        let members: Vec<usize> = (0..self.nodes.len()).filter(|&v| mask[v] && self.mask[v]).collect();
        let scale = 1.0 / members.len().max(1) as f64;
        for v in members {
            add_into(&mut dnodes[v], d, scale);
        }
    }

    pub fn relu_signature(&self) -> u64 {
        let mut acc = 0xcbf2_9ce4_8422_2325;
        for p in &self.in_pre {
            fold_signs(&mut acc, p);
        }
        for l in &self.layers {
            for p in &l.pre1 {
                fold_signs(&mut acc, p);
            }
        }
        acc
    }
}

fn node_input(params: &CriticParams, batch: &GraphBatchInput, v: usize) -> Vec<f64> {
    let layout = Layout::get();
    let mut x = Vec::with_capacity(NODE_INPUT);
    x.extend_from_slice(&batch.text[v]);
    x.extend_from_slice(&params.data[layout.node_type.row(batch.node_kind[v])]);
    match batch.role[v] {
        Some(r) => x.extend_from_slice(&params.data[layout.role.row(r)]),
        None => x.extend(std::iter::repeat_n(0.0, EMBED_DIM)),
    }
    x.push(batch.confidence[v]);
    x.push(batch.evidence_count[v]);
    x
}

fn structural_stats(batch: &GraphBatchInput) -> Vec<[f64; 3]> {
    let mut stats = vec![[0.0; 3]; batch.len()];
    for e in batch.edges.iter().filter(|e| e.active) {
        if !(batch.mask[e.src] && batch.mask[e.dst]) {
            continue;
        }
        stats[e.dst][0] += 1.0;
        if e.resolved {
            stats[e.dst][1] += 1.0;
        }
        stats[e.src][2] += 1.0;
    }
    stats
}

/// Weighted relation messages scatter-added into each destination for layer `l`.
pub fn aggregate_messages(params: &CriticParams, batch: &GraphBatchInput, h: &[Vec<f64>], l: usize) -> Vec<Vec<f64>> {
    let layout = Layout::get();
    let mut msg = vec![vec![0.0; HIDDEN]; batch.len()];
    for e in &batch.edges {
        let w = e.weight();
        if w == 0.0 || !(batch.mask[e.src] && batch.mask[e.dst]) {
            continue;
        }
        let m = matvec(params.block(layout.relation[l][e.relation]), HIDDEN, &h[e.src]);
        add_into(&mut msg[e.dst], &m, w);
    }
    msg
}

pub fn encode(params: &CriticParams, batch: &GraphBatchInput) -> Result<Encoding> {
    batch.validate()?;
    let layout = Layout::get();
    let n = batch.len();
    let p = |b: Block| params.block(b);

    let mut inputs = vec![Vec::new(); n];
    let mut in_pre = vec![Vec::new(); n];
    let mut in_act = vec![Vec::new(); n];
    let mut h = vec![vec![0.0; HIDDEN]; n];
    for v in (0..n).filter(|&v| batch.mask[v]) {
        let x = node_input(params, batch, v);
        let a = affine(p(layout.in_w1), p(layout.in_b1), &x);
        let z = relu(&a);
        h[v] = affine(p(layout.in_w2), p(layout.in_b2), &z);
        inputs[v] = x;
        in_pre[v] = a;
        in_act[v] = z;
    }

    let stats = structural_stats(batch);
    let mut layers = Vec::with_capacity(LAYERS);
    for l in 0..LAYERS {
        let msg = aggregate_messages(params, batch, &h, l);
        let mut cache = LayerCache {
            input: h.clone(),
            update_in: vec![Vec::new(); n],
            pre1: vec![Vec::new(); n],
            act1: vec![Vec::new(); n],
            xhat: vec![Vec::new(); n],
            inv_std: vec![0.0; n],
        };
        let mut next = vec![vec![0.0; HIDDEN]; n];
        for v in (0..n).filter(|&v| batch.mask[v]) {
            let mut u = Vec::with_capacity(2 * HIDDEN + 3);
            u.extend_from_slice(&h[v]);
            u.extend_from_slice(&msg[v]);
            u.extend_from_slice(&stats[v]);
            let pre = affine(p(layout.upd_w1[l]), p(layout.upd_b1[l]), &u);
            let act = relu(&pre);
            let delta = affine(p(layout.upd_w2[l]), p(layout.upd_b2[l]), &act);
            let y: Vec<f64> = h[v].iter().zip(&delta).map(|(a, b)| a + b).collect();
            let mean = y.iter().sum::<f64>() / HIDDEN as f64;
            let var = y.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / HIDDEN as f64;
            let inv = 1.0 / (var + LAYER_NORM_EPS).sqrt();
            let xhat: Vec<f64> = y.iter().map(|x| (x - mean) * inv).collect();
            let (gain, bias) = (p(layout.ln_gain[l]), p(layout.ln_bias[l]));
            next[v] = (0..HIDDEN).map(|i| gain[i] * xhat[i] + bias[i]).collect();
            cache.update_in[v] = u;
            cache.pre1[v] = pre;
            cache.act1[v] = act;
            cache.xhat[v] = xhat;
            cache.inv_std[v] = inv;
        }
        layers.push(cache);
        h = next;
    }

    let mut enc = Encoding {
        nodes: h,
        graph: Vec::new(),
        mask: batch.mask.clone(),
        inputs,
        in_pre,
        in_act,
        layers,
    };
    enc.graph = enc.pool(&vec![true; n]);
    Ok(enc)
}

/// Backpropagates gradients on final node states into the parameters.
pub fn encode_backward(
    params: &CriticParams,
    batch: &GraphBatchInput,
    enc: &Encoding,
    dnodes: Vec<Vec<f64>>,
    grad: &mut [f64],
) {
    let layout = Layout::get();
    let n = batch.len();
    let p = |b: Block| params.block(b);
    let mut dh = dnodes;
    for l in (0..LAYERS).rev() {
        let cache = &enc.layers[l];
        let mut dprev = vec![vec![0.0; HIDDEN]; n];
        let mut dmsg = vec![vec![0.0; HIDDEN]; n];
        let gain = p(layout.ln_gain[l]);
        for v in (0..n).filter(|&v| batch.mask[v]) {
            let dout = &dh[v];
            let xhat = &cache.xhat[v];
            add_into(&mut grad[layout.ln_bias[l].range()], dout, 1.0);
            for (i, g) in grad[layout.ln_gain[l].range()].iter_mut().enumerate() {
                *g += dout[i] * xhat[i];
            }
            let dxhat: Vec<f64> = (0..HIDDEN).map(|i| dout[i] * gain[i]).collect();
            let mean_d = dxhat.iter().sum::<f64>() / HIDDEN as f64;
            let mean_dx = dxhat.iter().zip(xhat).map(|(a, b)| a * b).sum::<f64>() / HIDDEN as f64;
            let dy: Vec<f64> = (0..HIDDEN)
                .map(|i| cache.inv_std[v] * (dxhat[i] - mean_d - xhat[i] * mean_dx))
                .collect();
            add_into(&mut dprev[v], &dy, 1.0);

            outer_acc(&mut grad[layout.upd_w2[l].range()], &dy, &cache.act1[v], 1.0);
            add_into(&mut grad[layout.upd_b2[l].range()], &dy, 1.0);
            let mut dact = vec![0.0; HIDDEN];
            matvec_t_acc(p(layout.upd_w2[l]), HIDDEN, &dy, &mut dact, 0..HIDDEN);
            let dpre = relu_grad(&dact, &cache.pre1[v]);
            outer_acc(&mut grad[layout.upd_w1[l].range()], &dpre, &cache.update_in[v], 1.0);
            add_into(&mut grad[layout.upd_b1[l].range()], &dpre, 1.0);
            let width = 2 * HIDDEN + 3;
            matvec_t_acc(p(layout.upd_w1[l]), width, &dpre, &mut dprev[v], 0..HIDDEN);
            matvec_t_acc(p(layout.upd_w1[l]), width, &dpre, &mut dmsg[v], HIDDEN..2 * HIDDEN);
        }
        for e in &batch.edges {
            let w = e.weight();
            if w == 0.0 || !(batch.mask[e.src] && batch.mask[e.dst]) {
                continue;
            }
            let block = layout.relation[l][e.relation];
            outer_acc(&mut grad[block.range()], &dmsg[e.dst], &cache.input[e.src], w);
            let mut d = vec![0.0; HIDDEN];
            matvec_t_acc(p(block), HIDDEN, &dmsg[e.dst], &mut d, 0..HIDDEN);
            add_into(&mut dprev[e.src], &d, w);
        }
        dh = dprev;
    }

    let embed_cols = TEXT_DIM..TEXT_DIM + 2 * EMBED_DIM;
    for v in (0..n).filter(|&v| batch.mask[v]) {
        let d0 = &dh[v];
        outer_acc(&mut grad[layout.in_w2.range()], d0, &enc.in_act[v], 1.0);
        add_into(&mut grad[layout.in_b2.range()], d0, 1.0);
        let mut dz = vec![0.0; HIDDEN];
        matvec_t_acc(p(layout.in_w2), HIDDEN, d0, &mut dz, 0..HIDDEN);
        let da = relu_grad(&dz, &enc.in_pre[v]);
        outer_acc(&mut grad[layout.in_w1.range()], &da, &enc.inputs[v], 1.0);
        add_into(&mut grad[layout.in_b1.range()], &da, 1.0);
        let mut demb = vec![0.0; 2 * EMBED_DIM];
        matvec_t_acc(p(layout.in_w1), NODE_INPUT, &da, &mut demb, embed_cols.clone());
        add_into(&mut grad[layout.node_type.row(batch.node_kind[v])], &demb[..EMBED_DIM], 1.0);
        if let Some(r) = batch.role[v] {
            add_into(&mut grad[layout.role.row(r)], &demb[EMBED_DIM..], 1.0);
        }
    }
}

#[derive(Clone, Debug)]
pub struct HeadCache {
    input: Vec<f64>,
    pre: Vec<f64>,
    act: Vec<f64>,
    /// Scalar head output before any squashing.
    pub output: f64,
}

impl HeadCache {
    pub fn relu_signature(&self) -> u64 {
        let mut acc = 0xcbf2_9ce4_8422_2325;
        fold_signs(&mut acc, &self.pre);
        acc
    }
}

struct HeadBlocks {
    w1: Block,
    b1: Block,
    w2: Block,
    b2: Block,
}

fn head_forward(params: &CriticParams, blocks: &HeadBlocks, input: Vec<f64>) -> HeadCache {
    let pre = affine(params.block(blocks.w1), params.block(blocks.b1), &input);
    let act = relu(&pre);
    let output = affine(params.block(blocks.w2), params.block(blocks.b2), &act)[0];
    HeadCache {
        input,
        pre,
        act,
        output,
    }
}

/// Returns the gradient with respect to the head input.
fn head_backward(params: &CriticParams, blocks: &HeadBlocks, cache: &HeadCache, dout: f64, grad: &mut [f64]) -> Vec<f64> {
    outer_acc(&mut grad[blocks.w2.range()], &[dout], &cache.act, 1.0);
    grad[blocks.b2.offset] += dout;
    let w2 = params.block(blocks.w2);
    let dact: Vec<f64> = w2.iter().map(|w| w * dout).collect();
    let dpre = relu_grad(&dact, &cache.pre);
    outer_acc(&mut grad[blocks.w1.range()], &dpre, &cache.input, 1.0);
    add_into(&mut grad[blocks.b1.range()], &dpre, 1.0);
    let width = cache.input.len();
    let mut dinput = vec![0.0; width];
    matvec_t_acc(params.block(blocks.w1), width, &dpre, &mut dinput, 0..width);
    dinput
}

fn edit_blocks() -> HeadBlocks {
    let l = Layout::get();
    HeadBlocks {
        w1: l.edit_w1,
        b1: l.edit_b1,
        w2: l.edit_w2,
        b2: l.edit_b2,
    }
}

fn commit_blocks() -> HeadBlocks {
    let l = Layout::get();
    HeadBlocks {
        w1: l.commit_w1,
        b1: l.commit_b1,
        w2: l.commit_w2,
        b2: l.commit_b2,
    }
}

pub fn edit_forward(params: &CriticParams, enc: &Encoding, state_text: &[f64], cand: &CandidateInput) -> HeadCache {
    let layout = Layout::get();
    let mut input = Vec::with_capacity(crate::layout::EDIT_INPUT);
    input.extend_from_slice(&enc.graph);
    input.extend(enc.pool(&cand.target_mask));
    input.extend(enc.pool(&cand.neighbor_mask));
    input.extend_from_slice(&cand.text);
    input.extend_from_slice(&params.data[layout.cand_kind.row(cand.kind)]);
    input.extend_from_slice(state_text);
    head_forward(params, &edit_blocks(), input)
}

/// Backpropagates `dscore` through the edit head, adding node-state gradients to `dnodes`.
pub fn edit_backward(
    params: &CriticParams,
    enc: &Encoding,
    cand: &CandidateInput,
    cache: &HeadCache,
    dscore: f64,
    grad: &mut [f64],
    dnodes: &mut [Vec<f64>],
) {
    let layout = Layout::get();
    let d = head_backward(params, &edit_blocks(), cache, dscore, grad);
    let all = vec![true; enc.nodes.len()];
    enc.pool_backward(&all, &d[..HIDDEN], dnodes);
    enc.pool_backward(&cand.target_mask, &d[HIDDEN..2 * HIDDEN], dnodes);
    enc.pool_backward(&cand.neighbor_mask, &d[2 * HIDDEN..3 * HIDDEN], dnodes);
    let kind_at = 3 * HIDDEN + TEXT_DIM;
    add_into(&mut grad[layout.cand_kind.row(cand.kind)], &d[kind_at..kind_at + EMBED_DIM], 1.0);
}

/// Commit head; `output` is the pre-logistic logit.
pub fn commit_forward(
    params: &CriticParams,
    enc: &Encoding,
    state_text: &[f64],
    features: &[f64; COMMIT_FEATURES],
) -> HeadCache {
    let mut input = Vec::with_capacity(crate::layout::COMMIT_INPUT);
    input.extend_from_slice(&enc.graph);
    input.extend_from_slice(state_text);
    input.extend_from_slice(features);
    head_forward(params, &commit_blocks(), input)
}

pub fn commit_backward(
    params: &CriticParams,
    enc: &Encoding,
    cache: &HeadCache,
    dlogit: f64,
    grad: &mut [f64],
    dnodes: &mut [Vec<f64>],
) {
    let d = head_backward(params, &commit_blocks(), cache, dlogit, grad);
    let all = vec![true; enc.nodes.len()];
    enc.pool_backward(&all, &d[..HIDDEN], dnodes);
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Edit scores for every candidate of one graph.
pub fn score_edits(params: &CriticParams, batch: &GraphBatchInput, candidates: &[CandidateInput]) -> Result<Vec<f64>> {
    let enc = encode(params, batch)?;
    Ok(candidates
        .iter()
        .map(|c| edit_forward(params, &enc, &batch.state_text, c).output)
        .collect())
}

/// Logistic commit score in (0, 1).
pub fn score_commit(params: &CriticParams, batch: &GraphBatchInput, features: &[f64; COMMIT_FEATURES]) -> Result<f64> {
    let enc = encode(params, batch)?;
    Ok(sigmoid(commit_forward(params, &enc, &batch.state_text, features).output))
}
