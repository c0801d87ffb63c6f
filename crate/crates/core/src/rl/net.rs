//! Multilayer perceptron Q-network with Adam, trained on batched TD
//! targets. No autodiff: the backward pass is written out against the
//! three GEMM shapes the network needs, which keeps one training update
//! allocation-free after warmup.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};

/// Feed-forward Q-value network: ReLU hidden layers, linear output.
///
/// Parameters live in one flat buffer, per layer the weight matrix
/// (out×in, row-major) followed by the bias vector. That layout is also
/// the checkpoint format.
#[derive(Debug, Clone)]
pub struct QNetwork {
    sizes: Vec<usize>,
    params: Vec<f64>,
    // (weight offset, bias offset) per layer
    offsets: Vec<(usize, usize)>,
}

fn layout(sizes: &[usize]) -> (Vec<(usize, usize)>, usize) {
    let mut offsets = Vec::with_capacity(sizes.len() - 1);
    let mut cursor = 0;
    for l in 0..sizes.len() - 1 {
        let w = cursor;
        cursor += sizes[l] * sizes[l + 1];
        let b = cursor;
        cursor += sizes[l + 1];
        offsets.push((w, b));
    }
    (offsets, cursor)
}

impl QNetwork {
    /// Kaiming-style uniform init: weights ~ U(±√(6/fan_in)), zero biases.
    pub fn new(sizes: &[usize], rng: &mut impl Rng) -> Self {
        assert!(sizes.len() >= 2, "network needs at least input and output sizes");
        let (offsets, total) = layout(sizes);
        let mut params = vec![0.0; total];
        for (l, &(w_off, _)) in offsets.iter().enumerate() {
            let fan_in = sizes[l];
            let bound = (6.0 / fan_in as f64).sqrt();
            for w in &mut params[w_off..w_off + fan_in * sizes[l + 1]] {
                *w = rng.gen_range(-bound..bound);
            }
        }
        Self { sizes: sizes.to_vec(), params, offsets }
    }

    pub fn zeroed(sizes: &[usize]) -> Self {
        let (offsets, total) = layout(sizes);
        Self { sizes: sizes.to_vec(), params: vec![0.0; total], offsets }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn layer_count(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn weights(&self, layer: usize) -> &[f64] {
        let (w, _) = self.offsets[layer];
        &self.params[w..w + self.sizes[layer] * self.sizes[layer + 1]]
    }

    fn biases(&self, layer: usize) -> &[f64] {
        let (_, b) = self.offsets[layer];
        &self.params[b..b + self.sizes[layer + 1]]
    }

    /// Exact parameter copy (target-network sync).
    pub fn copy_from(&mut self, other: &QNetwork) {
        assert_eq!(self.sizes, other.sizes, "copy_from: mismatched architectures");
        self.params.copy_from_slice(&other.params);
    }

    /// Q-values for a single observation.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_dim() {
            return Err(Error::dim("forward", format!("input {} vs network {}", input.len(), self.input_dim())));
        }
        let mut current = input.to_vec();
        for layer in 0..self.layer_count() {
            let (n_in, n_out) = (self.sizes[layer], self.sizes[layer + 1]);
            let w = self.weights(layer);
            let b = self.biases(layer);
            let mut next = vec![0.0; n_out];
            for (o, out) in next.iter_mut().enumerate() {
                let row = &w[o * n_in..(o + 1) * n_in];
                let mut acc = b[o];
                for (wi, xi) in row.iter().zip(&current) {
                    acc += wi * xi;
                }
                *out = acc;
            }
            if layer + 1 < self.layer_count() {
                for v in &mut next {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            current = next;
        }
        Ok(current)
    }

    pub fn finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    /// Write the checkpoint: u64 LE layer-size count, the sizes, then the
    /// raw little-endian f64 parameters in layer order.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::with_capacity(8 * (1 + self.sizes.len() + self.params.len()));
        buf.extend_from_slice(&(self.sizes.len() as u64).to_le_bytes());
        for &s in &self.sizes {
            buf.extend_from_slice(&(s as u64).to_le_bytes());
        }
        for &p in &self.params {
            buf.extend_from_slice(&p.to_le_bytes());
        }
        let mut file = fs::File::create(path)
            .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        file.write_all(&buf).map_err(|source| Error::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        let mut cursor = 0usize;
        let mut read_u64 = |bytes: &[u8]| -> Result<u64> {
            let end = cursor + 8;
            let chunk = bytes.get(cursor..end).ok_or_else(|| Error::Parse {
                path: path.display().to_string(),
                detail: "truncated checkpoint".into(),
            })?;
            cursor = end;
            Ok(u64::from_le_bytes(chunk.try_into().unwrap()))
        };
        let n_sizes = read_u64(&bytes)? as usize;
        if n_sizes < 2 || n_sizes > 64 {
            return Err(Error::Parse { path: path.display().to_string(), detail: "bad layer header".into() });
        }
        let mut sizes = Vec::with_capacity(n_sizes);
        for _ in 0..n_sizes {
            sizes.push(read_u64(&bytes)? as usize);
        }
        let (offsets, total) = layout(&sizes);
        let expected = cursor + 8 * total;
        if bytes.len() != expected {
            return Err(Error::Parse {
                path: path.display().to_string(),
                detail: format!("expected {expected} bytes, found {}", bytes.len()),
            });
        }
        let params = bytes[cursor..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self { sizes, params, offsets })
    }
}

// ---------------------------------------------------------------------------
// GEMM helpers over row-major buffers.
// ---------------------------------------------------------------------------

/// c(m×n) = a(m×k)·b(k×n) + beta·c
fn gemm_nn(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], beta: f64, c: &mut [f64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    unsafe {
        matrixmultiply::dgemm(
            m, k, n, 1.0, a.as_ptr(), k as isize, 1, b.as_ptr(), n as isize, 1, beta,
            c.as_mut_ptr(), n as isize, 1,
        );
    }
}

/// c(m×n) = a(m×k)·bᵀ + beta·c, with b stored (n×k) row-major
fn gemm_nt(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], beta: f64, c: &mut [f64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), n * k);
    debug_assert_eq!(c.len(), m * n);
    unsafe {
        matrixmultiply::dgemm(
            m, k, n, 1.0, a.as_ptr(), k as isize, 1, b.as_ptr(), 1, k as isize, beta,
            c.as_mut_ptr(), n as isize, 1,
        );
    }
}

/// c(m×n) = aᵀ·b + beta·c, with a stored (k×m) row-major
fn gemm_tn(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], beta: f64, c: &mut [f64]) {
    debug_assert_eq!(a.len(), k * m);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    unsafe {
        matrixmultiply::dgemm(
            m, k, n, 1.0, a.as_ptr(), 1, m as isize, b.as_ptr(), n as isize, 1, beta,
            c.as_mut_ptr(), n as isize, 1,
        );
    }
}

// ---------------------------------------------------------------------------
// Trainer: batched TD update with Adam.
// ---------------------------------------------------------------------------

/// One TD batch. `weights` are importance-sampling weights (all 1.0 when
/// prioritized replay is off).
pub struct Batch<'a> {
    pub states: Vec<&'a [f64]>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub next_states: Vec<&'a [f64]>,
    pub terminals: Vec<bool>,
    pub weights: Vec<f64>,
}

impl Batch<'_> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Result of one TD update.
#[derive(Debug)]
pub struct TdOutcome {
    pub loss: f64,
    /// |TD error| per batch entry, for priority refresh.
    pub td_abs: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct AdamParams {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamParams {
    pub fn with_learning_rate(alpha: f64) -> Self {
        Self { alpha, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Debug, Clone, Default)]
struct Scratch {
    batch: usize,
    // Per layer l: activations[l] has shape B×sizes[l] (activations[0] = inputs).
    activations: Vec<Vec<f64>>,
    preacts: Vec<Vec<f64>>,
    target_buf: Vec<Vec<f64>>,
    delta_a: Vec<f64>,
    delta_b: Vec<f64>,
    targets: Vec<f64>,
}

/// Owns the optimizer state and workspaces for training one network.
pub struct Trainer {
    gamma: f64,
    adam: AdamParams,
    moment1: Vec<f64>,
    moment2: Vec<f64>,
    step: u64,
    grads: Vec<f64>,
    scratch: Scratch,
}

impl Trainer {
    pub fn new(gamma: f64, adam: AdamParams, param_count: usize) -> Self {
        Self {
            gamma,
            adam,
            moment1: vec![0.0; param_count],
            moment2: vec![0.0; param_count],
            step: 0,
            grads: vec![0.0; param_count],
            scratch: Scratch::default(),
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn updates(&self) -> u64 {
        self.step
    }

    fn ensure_scratch(&mut self, sizes: &[usize], batch: usize) {
        let want: Vec<usize> = sizes.iter().map(|&s| batch * s).collect();
        let ok = self.scratch.batch == batch
            && self.scratch.activations.len() == sizes.len()
            && self.scratch.activations.iter().zip(&want).all(|(a, &w)| a.len() == w);
        if !ok {
            self.scratch.batch = batch;
            self.scratch.activations = want.iter().map(|&w| vec![0.0; w]).collect();
            self.scratch.preacts = want.iter().map(|&w| vec![0.0; w]).collect();
            self.scratch.target_buf = want.iter().map(|&w| vec![0.0; w]).collect();
            let widest = sizes.iter().copied().max().unwrap_or(0);
            self.scratch.delta_a = vec![0.0; batch * widest];
            self.scratch.delta_b = vec![0.0; batch * widest];
            self.scratch.targets = vec![0.0; batch];
        }
    }

    /// Batched forward producing activations in `bufs`; returns nothing,
    /// the final activations live in `bufs[last]`.
    fn forward_into(net: &QNetwork, bufs: &mut [Vec<f64>], batch: usize) {
        for layer in 0..net.layer_count() {
            let (n_in, n_out) = (net.sizes[layer], net.sizes[layer + 1]);
            let (input, rest) = bufs.split_at_mut(layer + 1);
            let x = &input[layer];
            let z = &mut rest[0];
            gemm_nt(batch, n_in, n_out, &x[..batch * n_in], net.weights(layer), 0.0, &mut z[..batch * n_out]);
            let b = net.biases(layer);
            for row in z[..batch * n_out].chunks_exact_mut(n_out) {
                for (v, bias) in row.iter_mut().zip(b) {
                    *v += bias;
                }
            }
            if layer + 1 < net.layer_count() {
                for v in &mut z[..batch * n_out] {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
        }
    }

    /// Loss of a batch without updating anything (finite-difference oracle hook).
    pub fn loss_only(&mut self, net: &QNetwork, target: &QNetwork, batch: &Batch) -> Result<f64> {
        let (loss, _) = self.evaluate(net, target, batch)?;
        Ok(loss)
    }

    fn evaluate(&mut self, net: &QNetwork, target: &QNetwork, batch: &Batch) -> Result<(f64, Vec<f64>)> {
        let b = batch.len();
        if b == 0 {
            return Err(Error::dim("td_update", "empty batch".to_string()));
        }
        self.ensure_scratch(&net.sizes, b);
        let n_in = net.input_dim();
        let n_out = net.output_dim();

        // Target-network pass over next states.
        for (i, s) in batch.next_states.iter().enumerate() {
            self.scratch.target_buf[0][i * n_in..(i + 1) * n_in].copy_from_slice(s);
        }
        Self::forward_into(target, &mut self.scratch.target_buf, b);
        let q_next = &self.scratch.target_buf[net.layer_count()];
        for i in 0..b {
            let y = if batch.terminals[i] {
                batch.rewards[i]
            } else {
                let row = &q_next[i * n_out..(i + 1) * n_out];
                let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                batch.rewards[i] + self.gamma * best
            };
            self.scratch.targets[i] = y;
        }

        // Online pass over current states.
        for (i, s) in batch.states.iter().enumerate() {
            self.scratch.activations[0][i * n_in..(i + 1) * n_in].copy_from_slice(s);
        }
        Self::forward_into(net, &mut self.scratch.activations, b);
        let q = &self.scratch.activations[net.layer_count()];

        let mut loss = 0.0;
        let mut td = Vec::with_capacity(b);
        for i in 0..b {
            let delta = self.scratch.targets[i] - q[i * n_out + batch.actions[i]];
            if !delta.is_finite() {
                return Err(Error::TrainingFault { batch_index: i });
            }
            loss += batch.weights[i] * delta * delta;
            td.push(delta);
        }
        Ok((loss / b as f64, td))
    }

    /// One TD step: targets from the frozen network (y = r for terminal
    /// transitions), weighted mean-squared TD error, one Adam update.
    pub fn td_update(&mut self, net: &mut QNetwork, target: &QNetwork, batch: &Batch) -> Result<TdOutcome> {
        let (loss, td) = self.evaluate(net, target, batch)?;
        let b = batch.len();
        let n_out = net.output_dim();

        // dL/dQ[i, a_i] = −2 w_i δ_i / B, zero elsewhere.
        let g_out = &mut self.scratch.delta_a;
        g_out[..b * n_out].fill(0.0);
        for i in 0..b {
            g_out[i * n_out + batch.actions[i]] = -2.0 * batch.weights[i] * td[i] / b as f64;
        }

        // Backward pass, writing gradients in parameter layout.
        self.grads.fill(0.0);
        for layer in (0..net.layer_count()).rev() {
            let (n_in, n_out_l) = (net.sizes[layer], net.sizes[layer + 1]);
            let (w_off, b_off) = net.offsets[layer];
            {
                let g = &self.scratch.delta_a[..b * n_out_l];
                let a_prev = &self.scratch.activations[layer][..b * n_in];
                gemm_tn(n_out_l, b, n_in, g, a_prev, 0.0, &mut self.grads[w_off..w_off + n_out_l * n_in]);
                let db = &mut self.grads[b_off..b_off + n_out_l];
                for row in g.chunks_exact(n_out_l) {
                    for (acc, v) in db.iter_mut().zip(row) {
                        *acc += v;
                    }
                }
            }
            if layer > 0 {
                {
                    let g = &self.scratch.delta_a[..b * n_out_l];
                    gemm_nn(b, n_out_l, n_in, g, net.weights(layer), 0.0, &mut self.scratch.delta_b[..b * n_in]);
                }
                // ReLU mask from the previous layer's (post-activation) buffer.
                let act = &self.scratch.activations[layer][..b * n_in];
                for (gv, &av) in self.scratch.delta_b[..b * n_in].iter_mut().zip(act) {
                    if av <= 0.0 {
                        *gv = 0.0;
                    }
                }
                std::mem::swap(&mut self.scratch.delta_a, &mut self.scratch.delta_b);
            }
        }

        self.adam_step(net.params_mut());
        Ok(TdOutcome { loss, td_abs: td.into_iter().map(f64::abs).collect() })
    }

    fn adam_step(&mut self, params: &mut [f64]) {
        self.step += 1;
        let AdamParams { alpha, beta1, beta2, eps } = self.adam;
        let c1 = 1.0 - beta1.powi(self.step as i32);
        let c2 = 1.0 - beta2.powi(self.step as i32);
        for (((p, g), m), v) in
            params.iter_mut().zip(&self.grads).zip(&mut self.moment1).zip(&mut self.moment2)
        {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= alpha * m_hat / (v_hat.sqrt() + eps);
        }
    }
}
