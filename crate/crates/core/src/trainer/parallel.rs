//! Lock-free multi-threaded training.
//!
//! Each epoch's edge order is split into contiguous chunks, one per worker.
//! Workers read and write shared parameters without synchronisation (last
//! write wins per coordinate). Accumulator additions are compare-and-swap
//! loops, so every accumulator stays non-decreasing. Results depend on thread
//! scheduling and are not reproducible.

use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;
use std::time::Instant;

use super::{
    epoch_order, gradients, init_model, EpochStats, Gradients, HyperParams, Model, TrainReport,
};
use crate::error::{Error, Result};
use crate::graph::{Edge, RelationalGraph};

struct Shared {
    x: Vec<AtomicU64>,
    g: Vec<AtomicU64>,
    acc_x: Vec<AtomicU64>,
    acc_g: Vec<AtomicU64>,
}

fn to_atomic(v: &[f64]) -> Vec<AtomicU64> {
    v.iter().map(|f| AtomicU64::new(f.to_bits())).collect()
}

fn load(v: &[AtomicU64], out: &mut [f64]) {
    for (o, a) in out.iter_mut().zip(v) {
        *o = f64::from_bits(a.load(Ordering::Relaxed));
    }
}

fn add_square(acc: &AtomicU64, grad: f64) -> f64 {
    let prev = acc
        .fetch_update(Ordering::Relaxed, Ordering::Relaxed, |bits| {
            Some((f64::from_bits(bits) + grad * grad).to_bits())
        })
        .expect("closure always returns Some");
    f64::from_bits(prev) + grad * grad
}

fn step(values: &[AtomicU64], acc: &[AtomicU64], grads: &[f64], eta0: f64) {
    for ((v, a), &g) in values.iter().zip(acc).zip(grads) {
        if g == 0.0 {
            continue;
        }
        let total = add_square(a, g);
        let cur = f64::from_bits(v.load(Ordering::Relaxed));
        v.store((cur - eta0 * g / total.sqrt()).to_bits(), Ordering::Relaxed);
    }
}

impl Shared {
    fn edge(&self, e: &Edge, d: usize, params: &HyperParams, buf: &mut Buffers) {
        let (u, v, l) = (e.source.0, e.target.0, e.label.0);
        let dd = d * d;
        load(&self.x[u * d..(u + 1) * d], &mut buf.xu);
        load(&self.x[v * d..(v + 1) * d], &mut buf.xv);
        load(&self.g[l * dd..(l + 1) * dd], &mut buf.g);
        gradients(&buf.xu, &buf.g, &buf.xv, e.weight, &mut buf.grads);
        let eta0 = params.eta0;
        step(&self.x[u * d..(u + 1) * d], &self.acc_x[u * d..(u + 1) * d], &buf.grads.xu, eta0);
        step(&self.x[v * d..(v + 1) * d], &self.acc_x[v * d..(v + 1) * d], &buf.grads.xv, eta0);
        let gl = &self.g[l * dd..(l + 1) * dd];
        step(gl, &self.acc_g[l * dd..(l + 1) * dd], &buf.grads.g, eta0);
        if params.delta != 0.0 {
            for i in 0..d {
                let cell = &gl[i * d + i];
                let _ = cell.fetch_update(Ordering::Relaxed, Ordering::Relaxed, |bits| {
                    Some((f64::from_bits(bits) + params.delta).to_bits())
                });
            }
        }
    }

    fn snapshot(&self, model: &mut Model) {
        let (x, g, acc_x, acc_g) = model.buffers_mut();
        load(&self.x, x);
        load(&self.g, g);
        load(&self.acc_x, acc_x);
        load(&self.acc_g, acc_g);
    }
}

struct Buffers {
    xu: Vec<f64>,
    xv: Vec<f64>,
    g: Vec<f64>,
    grads: Gradients,
}

impl Buffers {
    fn new(d: usize) -> Self {
        Buffers {
            xu: vec![0.0; d],
            xv: vec![0.0; d],
            g: vec![0.0; d * d],
            grads: Gradients::zeros(d),
        }
    }
}

/// Trains with `threads` workers. With one thread this is the sequential
/// reference algorithm.
pub fn train_parallel<F>(
    graph: &RelationalGraph,
    params: &HyperParams,
    threads: usize,
    mut progress: F,
) -> Result<(Model, TrainReport)>
where
    F: FnMut(&EpochStats),
{
    if threads <= 1 {
        return super::train(graph, params, progress);
    }
    params.validate()?;
    if graph.is_empty() {
        return Err(Error::InvalidParam("cannot train on a graph without edges".into()));
    }
    let mut model = init_model(graph, params)?;
    let (x, g, acc_x, acc_g) = model.buffers();
    let shared = Shared {
        x: to_atomic(x),
        g: to_atomic(g),
        acc_x: to_atomic(acc_x),
        acc_g: to_atomic(acc_g),
    };
    let d = params.dim;
    let edges = graph.edges();
    let initial_loss = model.total_loss(graph)?;
    let mut report = TrainReport {
        initial_loss,
        epochs: Vec::new(),
        final_loss: initial_loss,
    };

    for epoch in 1..=params.epochs {
        let start = Instant::now();
        let order = epoch_order(edges.len(), params, epoch);
        let chunk = order.len().div_ceil(threads);
        thread::scope(|s| {
            for part in order.chunks(chunk.max(1)) {
                let shared = &shared;
                s.spawn(move || {
                    let mut buf = Buffers::new(d);
                    for &i in part {
                        shared.edge(&edges[i], d, params, &mut buf);
                    }
                });
            }
        });
        shared.snapshot(&mut model);
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
    Ok((model, report))
}
