use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relgraph::trainer::{
    read_checkpoint, resume, train, write_checkpoint, HyperParams, Model,
};
use relgraph::{Edge, Pattern, PatternId, PatternKind, RelationalGraph, WordId};

/// Every ordered pair of distinct words under every pattern, weighted by a
/// hidden model with non-negative entries (so every score is positive).
fn planted(words: usize, patterns: usize, dim: usize, seed: u64) -> RelationalGraph {
    let mut hidden = Model::random(words, patterns, dim, seed.wrapping_add(10_000));
    for u in 0..words {
        hidden.word_mut(WordId(u)).iter_mut().for_each(|x| *x = x.abs());
    }
    for l in 0..patterns {
        hidden.matrix_mut(PatternId(l)).iter_mut().for_each(|x| *x = x.abs());
    }
    let mut g = RelationalGraph::new();
    for i in 0..words {
        g.intern_word(&format!("w{i}")).unwrap();
    }
    for i in 0..patterns {
        g.intern_pattern(Pattern::new(PatternKind::Lex, format!("X r{i} Y")).unwrap());
    }
    for l in 0..patterns {
        for u in 0..words {
            for v in 0..words {
                if u == v {
                    continue;
                }
                let (u, v, l) = (WordId(u), WordId(v), PatternId(l));
                g.add_edge(u, v, l, hidden.predict(u, l, v).unwrap()).unwrap();
            }
        }
    }
    g
}

fn params(dim: usize, epochs: usize, eta0: f64, delta: f64, seed: u64) -> HyperParams {
    HyperParams {
        dim,
        epochs,
        eta0,
        delta,
        seed,
        shuffle: true,
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

#[derive(Clone, Copy)]
enum Block {
    Source,
    Target,
    Matrix,
}

fn nudge(model: &mut Model, e: &Edge, block: Block, k: usize, by: f64) {
    match block {
        Block::Source => model.word_mut(e.source)[k] += by,
        Block::Target => model.word_mut(e.target)[k] += by,
        Block::Matrix => model.matrix_mut(e.label)[k] += by,
    }
}

fn finite_difference_check(dim: usize, seed: u64, step: f64, tol: f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = Model::random(3, 2, dim, seed);
    let e = Edge {
        source: WordId(0),
        target: WordId(2),
        label: PatternId(1),
        weight: rng.random_range(0.0..5.0),
    };
    let grads = model.edge_gradients(&e).unwrap();

    let probe = |model: &mut Model, block: Block, k: usize| -> f64 {
        nudge(model, &e, block, k, step);
        let plus = model.edge_loss(&e).unwrap();
        nudge(model, &e, block, k, -2.0 * step);
        let minus = model.edge_loss(&e).unwrap();
        nudge(model, &e, block, k, step);
        (plus - minus) / (2.0 * step)
    };

    for k in 0..dim {
        let fd = probe(&mut model, Block::Source, k);
        assert!(rel_err(fd, grads.xu[k]) < tol, "xu[{k}] {fd} vs {}", grads.xu[k]);
        let fd = probe(&mut model, Block::Target, k);
        assert!(rel_err(fd, grads.xv[k]) < tol, "xv[{k}] {fd} vs {}", grads.xv[k]);
    }
    for k in 0..dim * dim {
        let fd = probe(&mut model, Block::Matrix, k);
        assert!(rel_err(fd, grads.g[k]) < tol, "g[{k}] {fd} vs {}", grads.g[k]);
    }
}

#[test]
fn gradients_match_finite_differences() {
    for seed in 0..20 {
        finite_difference_check(3, seed, 1e-6, 1e-6);
        finite_difference_check(2, seed, 1e-5, 1e-4);
        finite_difference_check(5, seed, 1e-5, 1e-4);
    }
}

#[test]
fn training_is_deterministic() {
    let g = planted(10, 2, 3, 5);
    let p = params(3, 20, 0.05, 1e-3, 11);
    let (a, ra) = train(&g, &p, |_| {}).unwrap();
    let (b, rb) = train(&g, &p, |_| {}).unwrap();
    assert_eq!(a, b);
    assert_eq!(ra.final_loss.to_bits(), rb.final_loss.to_bits());
    let (c, _) = train(&g, &params(3, 20, 0.05, 1e-3, 12), |_| {}).unwrap();
    assert_ne!(a, c);
}

#[test]
fn checkpoint_resume_matches_uninterrupted_run() {
    let g = planted(8, 2, 3, 1);
    let full = params(3, 12, 0.05, 1e-3, 3);
    let (reference, _) = train(&g, &full, |_| {}).unwrap();

    let (half, _) = train(&g, &params(3, 5, 0.05, 1e-3, 3), |_| {}).unwrap();
    let mut file = Vec::new();
    write_checkpoint(&half, g.vocab(), &mut file).unwrap();
    let mut restored = read_checkpoint(&file[..], g.vocab()).unwrap();
    assert_eq!(restored.epoch, 5);
    let report = resume(&g, &mut restored, &full, |_| {}).unwrap();
    assert_eq!(report.epochs.len(), 7);
    assert_eq!(restored, reference);
}

#[test]
fn perfect_fit_without_shift_is_a_fixed_point() {
    let hidden = Model::random(5, 2, 3, 8);
    let mut g = RelationalGraph::new();
    for i in 0..5 {
        g.intern_word(&format!("w{i}")).unwrap();
    }
    for i in 0..2 {
        g.intern_pattern(Pattern::new(PatternKind::Pos, format!("X T{i} Y")).unwrap());
    }
    // keep only edges whose target equals the prediction of the initial
    // model drawn for the same seed
    for (u, v, l) in [(0, 1, 0), (2, 3, 1), (4, 0, 0), (1, 1, 1)] {
        let (u, v, l) = (WordId(u), WordId(v), PatternId(l));
        let w = hidden.predict(u, l, v).unwrap();
        if w >= 0.0 {
            g.add_edge(u, v, l, w).unwrap();
        }
    }
    assert!(!g.is_empty());
    let p = params(3, 3, 0.1, 0.0, 8);
    let (m, report) = train(&g, &p, |_| {}).unwrap();
    let mut start = hidden.clone();
    start.epoch = 3;
    assert_eq!(m, start);
    assert_eq!(report.final_loss, 0.0);
}

#[test]
fn planted_model_is_recovered() {
    let g = planted(20, 3, 4, 0);
    let (_, r) = train(&g, &params(4, 500, 0.1, 0.0, 0), |_| {}).unwrap();
    assert!(r.final_loss <= 1e-2 * r.initial_loss, "{} vs {}", r.final_loss, r.initial_loss);
}

#[test]
fn first_epoch_lowers_planted_loss() {
    let wins = (0..20)
        .filter(|&seed| {
            let g = planted(20, 3, 4, seed);
            let (_, r) = train(&g, &params(4, 1, 0.05, 0.0, seed), |_| {}).unwrap();
            r.epochs[0].loss < r.initial_loss
        })
        .count();
    assert!(wins >= 19, "{wins} of 20");
}

#[test]
fn accumulators_never_decrease() {
    let g = planted(6, 2, 2, 4);
    let mut model = Model::random(6, 2, 2, 4);
    let mut prev: Vec<f64> = {
        let (_, _, ax, ag) = model.buffers();
        ax.iter().chain(ag).copied().collect()
    };
    for t in 1..=10 {
        let p = params(2, t, 0.05, 1e-3, 4);
        resume(&g, &mut model, &p, |_| {}).unwrap();
        let (_, _, ax, ag) = model.buffers();
        let now: Vec<f64> = ax.iter().chain(ag).copied().collect();
        assert!(now.iter().zip(&prev).all(|(n, p)| n >= p));
        prev = now;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn loss_is_nonnegative_and_additive(seed in 0u64..1000) {
        let g = planted(6, 2, 2, seed);
        let m = Model::random(6, 2, 2, seed + 1);
        let sum: f64 = g.edges().iter().map(|e| m.edge_loss(e).unwrap()).sum();
        let total = m.total_loss(&g).unwrap();
        prop_assert!(total >= 0.0);
        prop_assert!((total - sum).abs() <= 1e-12 * sum.max(1.0));
    }
}
