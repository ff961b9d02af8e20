//! From-scratch multilayer feedforward network.
//!
//! Hidden layers compute `z = ReLU(W a - gamma)`; the output layer is affine
//! so the two one-hot class scores can go negative. Training minimizes the
//! mean of the per-example half-sum-of-squares error with Adam updates, and
//! `gradient_check` verifies the backward pass against central finite
//! differences.

pub mod model;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::oracle::Label;
use crate::rng::{derive_seed, rng_from_seed};

/// Dense row-major f64 matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Weights and thresholds of the network. `sizes` lists the input width
/// followed by every layer width; `weights[l]` maps layer `l` activations of
/// width `sizes[l]` to `sizes[l+1]` outputs, each shifted by
/// `thresholds[l]` before the activation.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams {
    sizes: Vec<usize>,
    weights: Vec<Mat>,
    thresholds: Vec<Vec<f64>>,
}

impl NetworkParams {
    pub fn from_parts(sizes: Vec<usize>, weights: Vec<Mat>, thresholds: Vec<Vec<f64>>) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::ShapeMismatch("need at least input and output layers".into()));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::ShapeMismatch("zero-width layer".into()));
        }
        let layers = sizes.len() - 1;
        if weights.len() != layers || thresholds.len() != layers {
            return Err(Error::ShapeMismatch(format!(
                "expected {layers} weight/threshold blocks, got {}/{}",
                weights.len(),
                thresholds.len()
            )));
        }
        for l in 0..layers {
            if weights[l].rows() != sizes[l + 1] || weights[l].cols() != sizes[l] {
                return Err(Error::ShapeMismatch(format!(
                    "weights[{l}] is {}x{}, expected {}x{}",
                    weights[l].rows(),
                    weights[l].cols(),
                    sizes[l + 1],
                    sizes[l]
                )));
            }
            if thresholds[l].len() != sizes[l + 1] {
                return Err(Error::ShapeMismatch(format!(
                    "thresholds[{l}] has {} entries, expected {}",
                    thresholds[l].len(),
                    sizes[l + 1]
                )));
            }
        }
        let finite = weights.iter().all(|w| w.as_slice().iter().all(|v| v.is_finite()))
            && thresholds.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("non-finite network parameter".into()));
        }
        Ok(Self { sizes, weights, thresholds })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn weights(&self) -> &[Mat] {
        &self.weights
    }

    pub fn thresholds(&self) -> &[Vec<f64>] {
        &self.thresholds
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(|w| w.rows() * w.cols()).sum::<usize>()
            + self.thresholds.iter().map(Vec::len).sum::<usize>()
    }

    /// Flat parameter indexing (weights of every layer first, row-major, then
    /// thresholds); used by the finite-difference check.
    fn param(&self, idx: usize) -> f64 {
        let mut i = idx;
        for w in &self.weights {
            if i < w.data.len() {
                return w.data[i];
            }
            i -= w.data.len();
        }
        for t in &self.thresholds {
            if i < t.len() {
                return t[i];
            }
            i -= t.len();
        }
        panic!("parameter index {idx} out of range");
    }

    fn param_mut(&mut self, idx: usize) -> &mut f64 {
        let mut i = idx;
        for w in &mut self.weights {
            if i < w.data.len() {
                return &mut w.data[i];
            }
            i -= w.data.len();
        }
        for t in &mut self.thresholds {
            if i < t.len() {
                return &mut t[i];
            }
            i -= t.len();
        }
        panic!("parameter index {idx} out of range");
    }
}

/// Gradient (or moment) storage with the same shapes as [`NetworkParams`].
#[derive(Clone, Debug)]
pub struct Gradients {
    pub weights: Vec<Mat>,
    pub thresholds: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(p: &NetworkParams) -> Self {
        Self {
            weights: p.weights.iter().map(|w| Mat::zeros(w.rows(), w.cols())).collect(),
            thresholds: p.thresholds.iter().map(|t| vec![0.0; t.len()]).collect(),
        }
    }

    fn param(&self, idx: usize) -> f64 {
        let mut i = idx;
        for w in &self.weights {
            if i < w.data.len() {
                return w.data[i];
            }
            i -= w.data.len();
        }
        for t in &self.thresholds {
            if i < t.len() {
                return t[i];
            }
            i -= t.len();
        }
        panic!("parameter index {idx} out of range");
    }
}

/// Adam moment accumulators plus the step counter.
#[derive(Clone, Debug)]
pub struct AdamState {
    pub first: Gradients,
    pub second: Gradients,
    pub step: u64,
}

impl AdamState {
    pub fn new(p: &NetworkParams) -> Self {
        Self {
            first: Gradients::zeros_like(p),
            second: Gradients::zeros_like(p),
            step: 0,
        }
    }
}

/// Training hyperparameters. Defaults: two hidden layers of 256, batch 200,
/// learning rate 1e-3, standard Adam constants.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub eta: f64,
    pub batch_size: usize,
    pub hidden: (usize, usize),
    pub epochs: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    /// Weight-init standard deviation; `None` = sqrt(2/fan_in) per layer.
    pub init_scale: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            eta: 1e-3,
            batch_size: 200,
            hidden: (256, 256),
            epochs: 100,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            init_scale: None,
        }
    }
}

/// Allowed hidden-layer width range.
pub const HIDDEN_RANGE: (usize, usize) = (200, 1000);

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::InvalidParameter(format!("eta must be positive, got {}", self.eta)));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("batch_size must be >= 1".into()));
        }
        for h in [self.hidden.0, self.hidden.1] {
            if !(HIDDEN_RANGE.0..=HIDDEN_RANGE.1).contains(&h) {
                return Err(Error::InvalidParameter(format!(
                    "hidden width {h} outside [{}, {}]",
                    HIDDEN_RANGE.0, HIDDEN_RANGE.1
                )));
            }
        }
        if self.epochs == 0 {
            return Err(Error::InvalidParameter("epochs must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return Err(Error::InvalidParameter("Adam betas must lie in [0, 1)".into()));
        }
        if !(self.adam_eps > 0.0) {
            return Err(Error::InvalidParameter("Adam eps must be positive".into()));
        }
        if let Some(s) = self.init_scale {
            if !(s > 0.0) {
                return Err(Error::InvalidParameter("init_scale must be positive".into()));
            }
        }
        Ok(())
    }
}

/// A labeled set of examples: inputs paired with target vectors. Targets are
/// one-hot 2-vectors for classification ((1,0) = steerable, (0,1) =
/// unsteerable) but arbitrary regression targets are accepted.
#[derive(Clone, Debug)]
pub struct LabeledBatch {
    inputs: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
}

impl LabeledBatch {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} inputs vs {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        if let Some(first) = inputs.first() {
            let din = first.len();
            let dout = targets[0].len();
            if din == 0 || dout == 0 {
                return Err(Error::ShapeMismatch("zero-width example".into()));
            }
            for (x, y) in inputs.iter().zip(&targets) {
                if x.len() != din || y.len() != dout {
                    return Err(Error::ShapeMismatch("ragged batch".into()));
                }
            }
        }
        Ok(Self { inputs, targets })
    }

    /// One-hot encoding of +-1 labels: +1 -> (1, 0), -1 -> (0, 1).
    pub fn from_labels(inputs: Vec<Vec<f64>>, labels: &[Label]) -> Result<Self> {
        let targets = labels
            .iter()
            .map(|l| match l {
                Label::Steerable => vec![1.0, 0.0],
                Label::Unsteerable => vec![0.0, 1.0],
            })
            .collect();
        Self::new(inputs, targets)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    pub fn target_dim(&self) -> usize {
        self.targets.first().map_or(0, Vec::len)
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }

    fn select(&self, indices: &[usize]) -> LabeledBatch {
        LabeledBatch {
            inputs: indices.iter().map(|&i| self.inputs[i].clone()).collect(),
            targets: indices.iter().map(|&i| self.targets[i].clone()).collect(),
        }
    }
}

/// Weights drawn from a zero-mean normal (std `sqrt(2/fan_in)` unless
/// overridden), thresholds zero; deterministic per seed.
pub fn init_params_with(sizes: &[usize], init_scale: Option<f64>, seed: u64) -> Result<NetworkParams> {
    if sizes.len() < 2 || sizes.iter().any(|&s| s == 0) {
        return Err(Error::ShapeMismatch(format!("bad layer sizes {sizes:?}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut weights = Vec::with_capacity(sizes.len() - 1);
    let mut thresholds = Vec::with_capacity(sizes.len() - 1);
    for l in 0..sizes.len() - 1 {
        let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
        let scale = init_scale.unwrap_or_else(|| (2.0 / fan_in as f64).sqrt());
        let mut w = Mat::zeros(fan_out, fan_in);
        for v in w.as_mut_slice() {
            let g: f64 = rng.sample(StandardNormal);
            *v = scale * g;
        }
        weights.push(w);
        thresholds.push(vec![0.0; fan_out]);
    }
    NetworkParams::from_parts(sizes.to_vec(), weights, thresholds)
}

pub fn init_params(sizes: &[usize], seed: u64) -> Result<NetworkParams> {
    init_params_with(sizes, None, seed)
}

/// Per-layer pre-activations and activations kept for the backward pass;
/// `acts[0]` is the input, `acts.last()` the network output.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    pub pres: Vec<Vec<f64>>,
    pub acts: Vec<Vec<f64>>,
}

fn affine(w: &Mat, threshold: &[f64], x: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.extend(w.data.chunks_exact(w.cols).zip(threshold).map(|(row, th)| {
        let dot: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
        dot - th
    }));
}

/// Forward pass with cache. Hidden layers apply ReLU; the output layer is
/// affine.
pub fn forward(p: &NetworkParams, x: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
    if x.len() != p.input_dim() {
        return Err(Error::ShapeMismatch(format!(
            "input has {} entries, network expects {}",
            x.len(),
            p.input_dim()
        )));
    }
    let layers = p.weights.len();
    let mut cache = ForwardCache {
        pres: Vec::with_capacity(layers),
        acts: Vec::with_capacity(layers + 1),
    };
    cache.acts.push(x.to_vec());
    let mut pre = Vec::new();
    for l in 0..layers {
        affine(&p.weights[l], &p.thresholds[l], &cache.acts[l], &mut pre);
        cache.pres.push(pre.clone());
        let act = if l + 1 < layers {
            pre.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect()
        } else {
            pre.clone()
        };
        cache.acts.push(act);
    }
    let out = cache.acts.last().unwrap().clone();
    Ok((out, cache))
}

/// Output without the cache.
pub fn infer(p: &NetworkParams, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != p.input_dim() {
        return Err(Error::ShapeMismatch(format!(
            "input has {} entries, network expects {}",
            x.len(),
            p.input_dim()
        )));
    }
    let layers = p.weights.len();
    let mut act = x.to_vec();
    let mut next = Vec::new();
    for l in 0..layers {
        affine(&p.weights[l], &p.thresholds[l], &act, &mut next);
        if l + 1 < layers {
            for v in next.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        std::mem::swap(&mut act, &mut next);
    }
    Ok(act)
}

/// Mean over the batch of the per-example error `1/2 sum_k (yhat_k - y_k)^2`.
pub fn loss(outputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
    if outputs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if outputs.len() != targets.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} outputs vs {} targets",
            outputs.len(),
            targets.len()
        )));
    }
    let mut total = 0.0;
    for (o, t) in outputs.iter().zip(targets) {
        if o.len() != t.len() {
            return Err(Error::ShapeMismatch("output/target width mismatch".into()));
        }
        total += 0.5 * o.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    Ok(total / outputs.len() as f64)
}

fn batch_loss(p: &NetworkParams, batch: &LabeledBatch) -> Result<f64> {
    let mut total = 0.0;
    for (x, t) in batch.inputs.iter().zip(&batch.targets) {
        let out = infer(p, x)?;
        if out.len() != t.len() {
            return Err(Error::ShapeMismatch("target width differs from output layer".into()));
        }
        total += 0.5 * out.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    Ok(total / batch.len().max(1) as f64)
}

/// Exact gradient of [`loss`] over the batch with respect to every weight and
/// threshold. ReLU uses the subgradient convention ReLU'(0) = 0; threshold
/// gradients carry the minus sign from `W a - gamma`.
pub fn backward(p: &NetworkParams, batch: &LabeledBatch) -> Result<Gradients> {
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if batch.input_dim() != p.input_dim() || batch.target_dim() != p.output_dim() {
        return Err(Error::ShapeMismatch(format!(
            "batch dims {}->{} vs network {}->{}",
            batch.input_dim(),
            batch.target_dim(),
            p.input_dim(),
            p.output_dim()
        )));
    }
    let layers = p.weights.len();
    let inv_n = 1.0 / batch.len() as f64;
    let mut grads = Gradients::zeros_like(p);
    let mut delta = Vec::new();
    let mut next_delta = Vec::new();
    for (x, t) in batch.inputs.iter().zip(&batch.targets) {
        let (out, cache) = forward(p, x)?;
        delta.clear();
        delta.extend(out.iter().zip(t).map(|(o, y)| (o - y) * inv_n));
        for l in (0..layers).rev() {
            let acts = &cache.acts[l];
            let gw = &mut grads.weights[l];
            for (i, &di) in delta.iter().enumerate() {
                if di != 0.0 {
                    for (g, a) in gw.row_mut(i).iter_mut().zip(acts) {
                        *g += di * a;
                    }
                }
                grads.thresholds[l][i] -= di;
            }
            if l > 0 {
                // delta_{l-1} = (W_l^T delta_l) gated by the ReLU of layer l-1.
                let w = &p.weights[l];
                next_delta.clear();
                next_delta.resize(p.sizes[l], 0.0);
                for (i, &di) in delta.iter().enumerate() {
                    if di != 0.0 {
                        for (nd, wij) in next_delta.iter_mut().zip(w.row(i)) {
                            *nd += wij * di;
                        }
                    }
                }
                for (nd, &pre) in next_delta.iter_mut().zip(&cache.pres[l - 1]) {
                    if pre <= 0.0 {
                        *nd = 0.0;
                    }
                }
                std::mem::swap(&mut delta, &mut next_delta);
            }
        }
    }
    Ok(grads)
}

/// One Adam update: biased moment updates, bias correction, parameter step
/// `-eta * m^ / (sqrt(v^) + eps)`; increments the step counter.
pub fn adam_step(
    p: &mut NetworkParams,
    grads: &Gradients,
    state: &mut AdamState,
    cfg: &TrainConfig,
) -> Result<()> {
    if grads.weights.len() != p.weights.len() || grads.thresholds.len() != p.thresholds.len() {
        return Err(Error::ShapeMismatch("gradient blocks do not match parameters".into()));
    }
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - cfg.adam_beta1.powi(t);
    let bc2 = 1.0 - cfg.adam_beta2.powi(t);
    let update = |theta: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
        *m = cfg.adam_beta1 * *m + (1.0 - cfg.adam_beta1) * g;
        *v = cfg.adam_beta2 * *v + (1.0 - cfg.adam_beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *theta -= cfg.eta * m_hat / (v_hat.sqrt() + cfg.adam_eps);
    };
    for l in 0..p.weights.len() {
        if grads.weights[l].rows() != p.weights[l].rows()
            || grads.weights[l].cols() != p.weights[l].cols()
            || grads.thresholds[l].len() != p.thresholds[l].len()
        {
            return Err(Error::ShapeMismatch(format!("gradient block {l} shape mismatch")));
        }
        let (wm, wv) = (&mut state.first.weights[l], &mut state.second.weights[l]);
        for (((theta, &g), m), v) in p.weights[l]
            .as_mut_slice()
            .iter_mut()
            .zip(grads.weights[l].as_slice())
            .zip(wm.as_mut_slice())
            .zip(wv.as_mut_slice())
        {
            update(theta, g, m, v);
        }
        let (tm, tv) = (&mut state.first.thresholds[l], &mut state.second.thresholds[l]);
        for (((theta, &g), m), v) in p.thresholds[l]
            .iter_mut()
            .zip(&grads.thresholds[l])
            .zip(tm.iter_mut())
            .zip(tv.iter_mut())
        {
            update(theta, g, m, v);
        }
    }
    Ok(())
}

/// Loss and classification accuracy recorded per epoch; entry 0 is the
/// untrained network, entry `e` the state after epoch `e`.
#[derive(Clone, Debug, Default)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
}

#[derive(Clone, Copy, Debug)]
pub struct EpochStats {
    pub loss: f64,
    pub accuracy: f64,
}

fn eval_stats(p: &NetworkParams, data: &LabeledBatch) -> Result<EpochStats> {
    let mut total = 0.0;
    let mut correct = 0usize;
    for (x, t) in data.inputs.iter().zip(&data.targets) {
        let out = infer(p, x)?;
        total += 0.5 * out.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        let pred = argmax(&out);
        if pred == argmax(t) {
            correct += 1;
        }
    }
    Ok(EpochStats {
        loss: total / data.len() as f64,
        accuracy: correct as f64 / data.len() as f64,
    })
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Number of consecutive epochs with improvement below 1e-6 that stops
/// training early.
const PLATEAU_PATIENCE: usize = 10;
const PLATEAU_DELTA: f64 = 1e-6;

/// Mini-batch training with per-epoch seeded shuffling and Adam updates.
/// Stops after `cfg.epochs` or once the epoch loss has improved by less than
/// 1e-6 for ten consecutive epochs. Deterministic per seed.
pub fn train(data: &LabeledBatch, cfg: &TrainConfig) -> Result<(NetworkParams, TrainHistory)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let sizes = vec![data.input_dim(), cfg.hidden.0, cfg.hidden.1, data.target_dim()];
    let mut params = init_params_with(&sizes, cfg.init_scale, derive_seed(cfg.seed, 0))?;
    let mut state = AdamState::new(&params);
    let mut shuffle_rng = rng_from_seed(derive_seed(cfg.seed, 1));

    let mut history = TrainHistory::default();
    history.epochs.push(eval_stats(&params, data)?);

    let mut indices: Vec<usize> = (0..data.len()).collect();
    let mut plateau = 0usize;
    for _epoch in 0..cfg.epochs {
        // Fisher-Yates with the dedicated shuffle stream.
        for i in (1..indices.len()).rev() {
            let j = shuffle_rng.gen_range(0..=i);
            indices.swap(i, j);
        }
        for chunk in indices.chunks(cfg.batch_size) {
            let mini = data.select(chunk);
            let grads = backward(&params, &mini)?;
            adam_step(&mut params, &grads, &mut state, cfg)?;
        }
        let stats = eval_stats(&params, data)?;
        let prev = history.epochs.last().unwrap().loss;
        history.epochs.push(stats);
        if prev - stats.loss < PLATEAU_DELTA {
            plateau += 1;
            if plateau >= PLATEAU_PATIENCE {
                break;
            }
        } else {
            plateau = 0;
        }
    }
    Ok((params, history))
}

/// Argmax decision: +1 when the steerable score is at least the unsteerable
/// score (ties break to +1).
pub fn predict(p: &NetworkParams, x: &[f64]) -> Result<Label> {
    let out = infer(p, x)?;
    if out.len() != 2 {
        return Err(Error::ShapeMismatch(format!(
            "classification needs 2 outputs, network has {}",
            out.len()
        )));
    }
    Ok(if out[0] >= out[1] { Label::Steerable } else { Label::Unsteerable })
}

/// Central finite differences over every parameter, compared to [`backward`].
///
/// Per-parameter error is relative, `|a - n| / max(|a|, |n|)`, unless both
/// magnitudes fall below 1e-3, where the difference itself is reported:
/// below that scale the finite-difference noise floor (~1e-10) would dominate
/// a ratio and a genuine gradient bug still shows up as a large absolute gap.
pub fn gradient_check(p: &NetworkParams, batch: &LabeledBatch, step: f64) -> Result<f64> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter("step must be positive".into()));
    }
    let analytic = backward(p, batch)?;
    let mut probe = p.clone();
    let mut worst = 0.0_f64;
    for idx in 0..p.num_params() {
        let original = p.param(idx);
        *probe.param_mut(idx) = original + step;
        let plus = batch_loss(&probe, batch)?;
        *probe.param_mut(idx) = original - step;
        let minus = batch_loss(&probe, batch)?;
        *probe.param_mut(idx) = original;
        let numeric = (plus - minus) / (2.0 * step);
        let a = analytic.param(idx);
        let denom = a.abs().max(numeric.abs());
        let err = if denom < 1e-3 { (a - numeric).abs() } else { (a - numeric).abs() / denom };
        worst = worst.max(err);
    }
    Ok(worst)
}
