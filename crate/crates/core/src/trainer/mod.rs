//! Learning word vectors `x(u)` and pattern matrices `G(l)` by minimising
//!
//! ```text
//! E = 1/2 * sum over edges (u, v, l, w) of (x(u)^T G(l) x(v) - w)^2
//! ```
//!
//! with per-edge stochastic gradient steps and per-coordinate AdaGrad
//! learning rates. After every update of `G(l)` the matrix is shifted by
//! `delta * I`.
//!
//! Per edge, with residual `r = x(u)^T G(l) x(v) - w`:
//!
//! ```text
//! dE/dx(u) = r G(l) x(v)
//! dE/dx(v) = r G(l)^T x(u)
//! dE/dG(l) = r x(u) x(v)^T        (entry (i, j) = r x(u)_i x(v)_j)
//! ```

mod export;
mod parallel;
mod psd;

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{Edge, PatternId, RelationalGraph, WordId};

pub use self::export::{
    read_checkpoint, read_pattern_matrices, write_checkpoint, write_embeddings,
    write_pattern_matrices, CHECKPOINT_HEADER, MATRICES_HEADER,
};
pub use self::parallel::train_parallel;
pub use self::psd::{is_psd, symmetric_eigenvalues};

#[derive(Clone, Debug, PartialEq)]
pub struct HyperParams {
    /// Embedding dimensionality `d`.
    pub dim: usize,
    /// Number of passes over the edge list.
    pub epochs: usize,
    /// Base AdaGrad learning rate.
    pub eta0: f64,
    /// Diagonal shift added to `G(l)` after each of its updates.
    pub delta: f64,
    pub seed: u64,
    /// Visit edges in a fresh random order every epoch.
    pub shuffle: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            dim: 200,
            epochs: 100,
            eta0: 1e-4,
            delta: 1e-3,
            seed: 0,
            shuffle: true,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParam("dimensionality must be at least 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidParam("epochs must be at least 1".into()));
        }
        if !(self.eta0 > 0.0 && self.eta0.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "eta0 must be positive, got {}",
                self.eta0
            )));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "delta must be non-negative, got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Word vectors, pattern matrices (row-major) and their AdaGrad
/// accumulators.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    dim: usize,
    num_words: usize,
    num_patterns: usize,
    x: Vec<f64>,
    g: Vec<f64>,
    acc_x: Vec<f64>,
    acc_g: Vec<f64>,
    /// Completed epochs.
    pub epoch: usize,
}

impl Model {
    pub fn zeros(num_words: usize, num_patterns: usize, dim: usize) -> Self {
        Model {
            dim,
            num_words,
            num_patterns,
            x: vec![0.0; num_words * dim],
            g: vec![0.0; num_patterns * dim * dim],
            acc_x: vec![0.0; num_words * dim],
            acc_g: vec![0.0; num_patterns * dim * dim],
            epoch: 0,
        }
    }

    /// Standard normal entries from a ChaCha8 stream seeded with `seed`:
    /// all word vectors first (in id order), then all matrices.
    pub fn random(num_words: usize, num_patterns: usize, dim: usize, seed: u64) -> Self {
        let mut model = Model::zeros(num_words, num_patterns, dim);
        let mut rng = epoch_rng(seed, 0);
        for v in model.x.iter_mut().chain(model.g.iter_mut()) {
            *v = rng.sample(StandardNormal);
        }
        model
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_words(&self) -> usize {
        self.num_words
    }

    pub fn num_patterns(&self) -> usize {
        self.num_patterns
    }

    pub fn word(&self, u: WordId) -> &[f64] {
        &self.x[u.0 * self.dim..(u.0 + 1) * self.dim]
    }

    pub fn word_mut(&mut self, u: WordId) -> &mut [f64] {
        &mut self.x[u.0 * self.dim..(u.0 + 1) * self.dim]
    }

    /// `G(l)` in row-major order.
    pub fn matrix(&self, l: PatternId) -> &[f64] {
        let dd = self.dim * self.dim;
        &self.g[l.0 * dd..(l.0 + 1) * dd]
    }

    pub fn matrix_mut(&mut self, l: PatternId) -> &mut [f64] {
        let dd = self.dim * self.dim;
        &mut self.g[l.0 * dd..(l.0 + 1) * dd]
    }

    pub fn word_accumulator(&self, u: WordId) -> &[f64] {
        &self.acc_x[u.0 * self.dim..(u.0 + 1) * self.dim]
    }

    pub fn matrix_accumulator(&self, l: PatternId) -> &[f64] {
        let dd = self.dim * self.dim;
        &self.acc_g[l.0 * dd..(l.0 + 1) * dd]
    }

    /// All parameters and accumulators as flat slices:
    /// `(x, G, acc_x, acc_G)`.
    pub fn buffers(&self) -> (&[f64], &[f64], &[f64], &[f64]) {
        (&self.x, &self.g, &self.acc_x, &self.acc_g)
    }

    pub(crate) fn buffers_mut(&mut self) -> (&mut [f64], &mut [f64], &mut [f64], &mut [f64]) {
        (&mut self.x, &mut self.g, &mut self.acc_x, &mut self.acc_g)
    }

    fn check_ids(&self, u: WordId, l: PatternId, v: WordId) -> Result<()> {
        for w in [u, v] {
            if w.0 >= self.num_words {
                return Err(Error::UnknownWord(w.0));
            }
        }
        if l.0 >= self.num_patterns {
            return Err(Error::UnknownPattern(l.0));
        }
        Ok(())
    }

    /// `x(u)^T G(l) x(v)`.
    pub fn predict(&self, u: WordId, l: PatternId, v: WordId) -> Result<f64> {
        self.check_ids(u, l, v)?;
        Ok(bilinear(self.word(u), self.matrix(l), self.word(v)))
    }

    /// `1/2 (x(u)^T G(l) x(v) - w)^2`.
    pub fn edge_loss(&self, e: &Edge) -> Result<f64> {
        let r = self.predict(e.source, e.label, e.target)? - e.weight;
        Ok(0.5 * r * r)
    }

    /// Sum of edge losses, accumulated in edge order.
    pub fn total_loss(&self, graph: &RelationalGraph) -> Result<f64> {
        self.check_shape(graph)?;
        let mut total = 0.0;
        for e in graph.edges() {
            total += self.edge_loss(e)?;
        }
        Ok(total)
    }

    pub fn edge_gradients(&self, e: &Edge) -> Result<Gradients> {
        self.check_ids(e.source, e.label, e.target)?;
        let mut grads = Gradients::zeros(self.dim);
        self.edge_gradients_into(e, &mut grads);
        Ok(grads)
    }

    fn edge_gradients_into(&self, e: &Edge, out: &mut Gradients) {
        gradients(
            self.word(e.source),
            self.matrix(e.label),
            self.word(e.target),
            e.weight,
            out,
        );
    }

    pub fn check_shape(&self, graph: &RelationalGraph) -> Result<()> {
        if self.num_words != graph.num_words() || self.num_patterns != graph.num_patterns() {
            return Err(Error::ShapeMismatch(format!(
                "model has {} words and {} patterns, graph has {} and {}",
                self.num_words,
                self.num_patterns,
                graph.num_words(),
                graph.num_patterns()
            )));
        }
        Ok(())
    }
}

pub(crate) fn bilinear(xu: &[f64], g: &[f64], xv: &[f64]) -> f64 {
    let d = xu.len();
    let mut s = 0.0;
    for i in 0..d {
        let row = &g[i * d..(i + 1) * d];
        let gx: f64 = row.iter().zip(xv).map(|(a, b)| a * b).sum();
        s += xu[i] * gx;
    }
    s
}

/// Gradient blocks of one edge's loss.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub xu: Vec<f64>,
    pub xv: Vec<f64>,
    /// Row-major `d x d`.
    pub g: Vec<f64>,
}

impl Gradients {
    fn zeros(d: usize) -> Self {
        Gradients {
            xu: vec![0.0; d],
            xv: vec![0.0; d],
            g: vec![0.0; d * d],
        }
    }
}

pub(crate) fn gradients(xu: &[f64], g: &[f64], xv: &[f64], w: f64, out: &mut Gradients) {
    let d = xu.len();
    // G x(v) and G^T x(u)
    out.xv.iter_mut().for_each(|v| *v = 0.0);
    let mut pred = 0.0;
    for i in 0..d {
        let row = &g[i * d..(i + 1) * d];
        let gxv: f64 = row.iter().zip(xv).map(|(a, b)| a * b).sum();
        out.xu[i] = gxv;
        pred += xu[i] * gxv;
        for (acc, a) in out.xv.iter_mut().zip(row) {
            *acc += a * xu[i];
        }
    }
    let r = pred - w;
    out.xu.iter_mut().for_each(|v| *v *= r);
    out.xv.iter_mut().for_each(|v| *v *= r);
    for (row, xui) in out.g.chunks_exact_mut(d).zip(xu) {
        let ri = r * xui;
        for (gij, xvj) in row.iter_mut().zip(xv) {
            *gij = ri * xvj;
        }
    }
}

/// One AdaGrad coordinate update. The accumulator includes the current
/// gradient before the step is taken. A zero gradient is a no-op.
#[inline]
pub fn adagrad_step(value: f64, grad: f64, acc: f64, eta0: f64) -> (f64, f64) {
    if grad == 0.0 {
        return (value, acc);
    }
    let acc = acc + grad * grad;
    (value - eta0 * grad / acc.sqrt(), acc)
}

/// Adds `delta` to the diagonal of a row-major `d x d` matrix.
pub fn perturb_psd(matrix: &mut [f64], dim: usize, delta: f64) {
    for i in 0..dim {
        matrix[i * dim + i] += delta;
    }
}

fn apply_adagrad(values: &mut [f64], acc: &mut [f64], grads: &[f64], eta0: f64) {
    for ((v, a), &g) in values.iter_mut().zip(acc.iter_mut()).zip(grads) {
        (*v, *a) = adagrad_step(*v, g, *a, eta0);
    }
}

/// Per-epoch generator. Stream 0 initialises the model; stream `t` orders
/// the edges of epoch `t`, so a resumed run reproduces the same orders.
pub(crate) fn epoch_rng(seed: u64, epoch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch as u64);
    rng
}

pub(crate) fn epoch_order(n: usize, params: &HyperParams, epoch: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    if params.shuffle {
        order.shuffle(&mut epoch_rng(params.seed, epoch));
    }
    order
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Total loss over all edges after the epoch.
    pub loss: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    /// Loss of the model before the first epoch of this run.
    pub initial_loss: f64,
    pub epochs: Vec<EpochStats>,
    pub final_loss: f64,
}

/// Draws a fresh model shaped for `graph`.
pub fn init_model(graph: &RelationalGraph, params: &HyperParams) -> Result<Model> {
    if params.dim == 0 {
        return Err(Error::InvalidParam("dimensionality must be at least 1".into()));
    }
    if graph.num_words() == 0 {
        return Err(Error::InvalidParam("graph has no words".into()));
    }
    Ok(Model::random(
        graph.num_words(),
        graph.num_patterns(),
        params.dim,
        params.seed,
    ))
}

/// Applies the updates for one edge: gradients are taken at the parameter
/// values on entry, then `x(u)`, `x(v)` and `G(l)` are stepped in that order
/// and `G(l)` is shifted by `delta * I`.
pub fn sgd_edge(model: &mut Model, e: &Edge, eta0: f64, delta: f64, scratch: &mut Gradients) {
    model.edge_gradients_into(e, scratch);
    let d = model.dim;
    let (x, g, acc_x, acc_g) = model.buffers_mut();
    let (u, v, l) = (e.source.0, e.target.0, e.label.0);
    apply_adagrad(
        &mut x[u * d..(u + 1) * d],
        &mut acc_x[u * d..(u + 1) * d],
        &scratch.xu,
        eta0,
    );
    apply_adagrad(
        &mut x[v * d..(v + 1) * d],
        &mut acc_x[v * d..(v + 1) * d],
        &scratch.xv,
        eta0,
    );
    let dd = d * d;
    let gl = &mut g[l * dd..(l + 1) * dd];
    apply_adagrad(gl, &mut acc_g[l * dd..(l + 1) * dd], &scratch.g, eta0);
    perturb_psd(gl, d, delta);
}

/// Trains a fresh model for `params.epochs` epochs.
pub fn train<F>(
    graph: &RelationalGraph,
    params: &HyperParams,
    progress: F,
) -> Result<(Model, TrainReport)>
where
    F: FnMut(&EpochStats),
{
    params.validate()?;
    if graph.is_empty() {
        return Err(Error::InvalidParam("cannot train on a graph without edges".into()));
    }
    let mut model = init_model(graph, params)?;
    let report = resume(graph, &mut model, params, progress)?;
    Ok((model, report))
}

/// Continues training `model` from epoch `model.epoch + 1` up to
/// `params.epochs`. Reproduces an uninterrupted run bit for bit.
pub fn resume<F>(
    graph: &RelationalGraph,
    model: &mut Model,
    params: &HyperParams,
    mut progress: F,
) -> Result<TrainReport>
where
    F: FnMut(&EpochStats),
{
    params.validate()?;
    model.check_shape(graph)?;
    if model.dim != params.dim {
        return Err(Error::ShapeMismatch(format!(
            "model dimensionality {} differs from requested {}",
            model.dim, params.dim
        )));
    }
    let initial_loss = model.total_loss(graph)?;
    let mut report = TrainReport {
        initial_loss,
        epochs: Vec::new(),
        final_loss: initial_loss,
    };
    let edges = graph.edges();
    let mut scratch = Gradients::zeros(model.dim);
    for epoch in model.epoch + 1..=params.epochs {
        let start = Instant::now();
        for i in epoch_order(edges.len(), params, epoch) {
            sgd_edge(model, &edges[i], params.eta0, params.delta, &mut scratch);
        }
        model.epoch = epoch;
        let loss = model.total_loss(graph)?;
        if !loss.is_finite() {
            return Err(Error::Diverged(epoch));
        }
        let stats = EpochStats {
            epoch,
            loss,
            seconds: start.elapsed().as_secs_f64(),
        };
        progress(&stats);
        report.epochs.push(stats);
        report.final_loss = loss;
    }
    Ok(report)
}
