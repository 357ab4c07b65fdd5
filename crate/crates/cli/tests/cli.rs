#![allow(clippy::field_reassign_with_default)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use relgraph::graph::PatternTable;
use relgraph::counts::{read_counts, write_counts, TripleCounts};
use relgraph::trainer::{write_embeddings, Model};
use relgraph::{Pattern, PatternId, PatternKind, Vocab, WordId};
use relgraph_cli::{
    cmd_eval, cmd_extract, cmd_run_all, cmd_train, cmd_weight, load_graph, PipelineConfig,
};
use tempfile::TempDir;

fn toy(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy").join(name)
}

fn toy_config(out: &Path) -> PipelineConfig {
    let mut c = PipelineConfig::default();
    c.apply_file(&toy("toy.conf")).unwrap();
    c.corpus = Some(toy("toy.vert"));
    c.conll = Some(toy("toy.conll"));
    c.questions = Some(toy("questions.txt"));
    c.out = out.to_path_buf();
    c.epochs = 5;
    c
}

fn write_count_files(out: &Path, cells: &[(&str, &str, &str, u64)]) {
    let mut vocab = Vocab::new();
    let mut pats = PatternTable::new();
    let mut map = std::collections::BTreeMap::new();
    for &(u, v, p, h) in cells {
        let u = vocab.intern(u).unwrap();
        let v = vocab.intern(v).unwrap();
        let l = pats.intern(Pattern::new(PatternKind::Lex, p).unwrap());
        map.insert((u, v, l), h);
    }
    let counts = TripleCounts::from_parts(vocab, pats, map).unwrap();
    fs::create_dir_all(out).unwrap();
    let paths = relgraph_cli::OutputPaths::new(out);
    write_counts(
        &counts,
        fs::File::create(&paths.counts).unwrap(),
        fs::File::create(&paths.counts_patterns).unwrap(),
    )
    .unwrap();
}

#[test]
fn extract_finds_the_bird_patterns() {
    let dir = TempDir::new().unwrap();
    let mut c = toy_config(dir.path());
    c.min_pattern_pairs = 2;
    let summary = cmd_extract(&c).unwrap();
    assert!(summary.patterns_after > 0 && summary.patterns_after <= summary.patterns_before);
    let dict = fs::read_to_string(c.paths().counts_patterns).unwrap();
    for p in [
        "X is a large Y",
        "X is a large Y that",
        "X is a large Y that lives",
        "X is a large Y that lives in",
    ] {
        assert!(dict.lines().any(|l| l.ends_with(&format!("\tLEX\t{p}"))), "{p}");
    }
}

#[test]
fn dependency_kind_needs_conll() {
    let dir = TempDir::new().unwrap();
    let mut c = toy_config(dir.path());
    c.kind = PatternKind::Dep;
    c.conll = None;
    let e = cmd_extract(&c).unwrap_err();
    assert!(format!("{e:#}").contains("dependency input required"), "{e:#}");

    c.conll = Some(toy("toy.conll"));
    let summary = cmd_extract(&c).unwrap();
    assert!(summary.triples > 0);
    let dict = fs::read_to_string(c.paths().counts_patterns).unwrap();
    assert!(dict.contains("\tDEP\tX nsubj-of Y"), "{dict}");
}

#[test]
fn empty_corpus_gives_empty_counts() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("empty.vert");
    fs::write(&corpus, "").unwrap();
    let mut c = toy_config(&dir.path().join("out"));
    c.corpus = Some(corpus);
    let summary = cmd_extract(&c).unwrap();
    assert_eq!(summary.triples, 0);
    assert_eq!(fs::read_to_string(c.paths().counts).unwrap(), "#relgraph-counts v1\n");
}

#[test]
fn corpus_errors_name_the_line() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("bad.vert");
    fs::write(&corpus, "a\ta\tDT\nb\tb\n").unwrap();
    let mut c = toy_config(&dir.path().join("out"));
    c.corpus = Some(corpus);
    let e = cmd_extract(&c).unwrap_err();
    assert!(format!("{e:#}").contains("line 2"), "{e:#}");
}

#[test]
fn raw_weights_equal_counts() {
    let dir = TempDir::new().unwrap();
    let mut c = toy_config(dir.path());
    cmd_extract(&c).unwrap();
    c.measure = relgraph::WeightMeasure::Raw;
    let stats = cmd_weight(&c).unwrap();
    assert_eq!(stats.dropped, 0);
    let paths = c.paths();
    let counts = read_counts(
        fs::File::open(&paths.counts).map(std::io::BufReader::new).unwrap(),
        fs::File::open(&paths.counts_patterns).map(std::io::BufReader::new).unwrap(),
    )
    .unwrap();
    let g = load_graph(&paths).unwrap();
    assert_eq!(g.num_edges(), counts.len());
    for e in g.edges() {
        let u = g.vocab().word(e.source).unwrap();
        let v = g.vocab().word(e.target).unwrap();
        let p = g.patterns().pattern(e.label).unwrap();
        let t = counts.lookup(u, v, p.kind(), p.text()).unwrap();
        assert_eq!(e.weight, counts.count(t.0, t.1, t.2) as f64);
    }
}

#[test]
fn ppmi_at_independence_gives_empty_graph() {
    let dir = TempDir::new().unwrap();
    write_count_files(dir.path(), &[("a", "b", "X p Y", 3)]);
    let mut c = PipelineConfig::default();
    c.out = dir.path().to_path_buf();
    c.measure = relgraph::WeightMeasure::Ppmi;
    let stats = cmd_weight(&c).unwrap();
    assert_eq!((stats.kept, stats.dropped), (0, 1));
    assert!(load_graph(&c.paths()).unwrap().is_empty());
}

#[test]
fn ent_matches_raw_for_single_pair_patterns() {
    let dir = TempDir::new().unwrap();
    write_count_files(dir.path(), &[("a", "b", "X p Y", 3), ("b", "c", "X q Y", 5)]);
    let mut c = PipelineConfig::default();
    c.out = dir.path().to_path_buf();
    c.measure = relgraph::WeightMeasure::Raw;
    cmd_weight(&c).unwrap();
    let raw = fs::read(c.paths().edges).unwrap();
    c.measure = relgraph::WeightMeasure::Ent;
    cmd_weight(&c).unwrap();
    assert_eq!(fs::read(c.paths().edges).unwrap(), raw);
}

fn planted_graph_files(out: &Path) {
    let mut hidden = Model::random(12, 2, 3, 77);
    for u in 0..12 {
        hidden.word_mut(WordId(u)).iter_mut().for_each(|x| *x = x.abs());
    }
    for l in 0..2 {
        hidden.matrix_mut(PatternId(l)).iter_mut().for_each(|x| *x = x.abs());
    }
    let mut g = relgraph::RelationalGraph::new();
    for i in 0..12 {
        g.intern_word(&format!("w{i}")).unwrap();
    }
    for i in 0..2 {
        g.intern_pattern(Pattern::new(PatternKind::Lex, format!("X r{i} Y")).unwrap());
    }
    for l in 0..2 {
        for u in 0..12 {
            for v in 0..12 {
                if u != v {
                    let (u, v, l) = (WordId(u), WordId(v), PatternId(l));
                    g.add_edge(u, v, l, hidden.predict(u, l, v).unwrap()).unwrap();
                }
            }
        }
    }
    fs::create_dir_all(out).unwrap();
    let p = relgraph_cli::OutputPaths::new(out);
    relgraph::graph::write_edges(&g, fs::File::create(p.edges).unwrap()).unwrap();
    relgraph::graph::write_pattern_dictionary(g.patterns(), fs::File::create(p.patterns).unwrap())
        .unwrap();
    relgraph::graph::write_vocab(g.vocab(), fs::File::create(p.vocab).unwrap()).unwrap();
}

#[test]
fn train_recovers_planted_graph_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    planted_graph_files(dir.path());
    let mut c = PipelineConfig::default();
    c.out = dir.path().to_path_buf();
    c.dim = 3;
    c.epochs = 500;
    c.eta0 = 0.1;
    c.delta = 0.0;
    c.seed = 5;
    let report = cmd_train(&c).unwrap();
    assert!(report.final_loss <= 1e-2 * report.initial_loss);
    let first = fs::read(c.paths().embeddings).unwrap();
    cmd_train(&c).unwrap();
    assert_eq!(fs::read(c.paths().embeddings).unwrap(), first);

    let log = fs::read_to_string(c.paths().loss).unwrap();
    let lines: Vec<&str> = log.lines().collect();
    assert_eq!(lines[0], "epoch\tloss\tseconds");
    // appended, not overwritten
    assert_eq!(lines.len(), 1 + 2 * 500);
    assert!(lines[1].starts_with("1\t"));
}

#[test]
fn resume_continues_from_checkpoint() {
    let dir = TempDir::new().unwrap();
    planted_graph_files(dir.path());
    let mut c = PipelineConfig::default();
    c.out = dir.path().to_path_buf();
    c.dim = 3;
    c.eta0 = 0.1;
    c.epochs = 20;
    cmd_train(&c).unwrap();
    let straight = fs::read(c.paths().checkpoint).unwrap();

    c.epochs = 8;
    cmd_train(&c).unwrap();
    c.epochs = 20;
    c.resume = true;
    let report = cmd_train(&c).unwrap();
    assert_eq!(report.epochs.len(), 12);
    assert_eq!(fs::read(c.paths().checkpoint).unwrap(), straight);
}

fn additive_embeddings(path: &Path) {
    let mut vocab = Vocab::new();
    let mut m = Model::zeros(6, 0, 3);
    let rows: [(&str, [f64; 3]); 6] = [
        ("man", [1.0, 0.0, 0.0]),
        ("woman", [1.0, 1.0, 0.0]),
        ("king", [1.0, 0.0, 1.0]),
        ("queen", [1.0, 1.0, 1.0]),
        ("boy", [2.0, 0.0, -1.0]),
        ("girl", [2.0, 1.0, -1.0]),
    ];
    for (w, v) in rows {
        let id = vocab.intern(w).unwrap();
        m.word_mut(id).copy_from_slice(&v);
    }
    write_embeddings(&m, &vocab, fs::File::create(path).unwrap()).unwrap();
}

#[test]
fn eval_reports_per_category_then_overall() {
    let dir = TempDir::new().unwrap();
    let emb = dir.path().join("emb.txt");
    additive_embeddings(&emb);
    let q = dir.path().join("q.txt");
    fs::write(
        &q,
        ": family\nman woman king queen\nking queen boy girl\n: gender\nboy girl man woman\n: other\nman woman cat dog\n",
    )
    .unwrap();
    let mut c = PipelineConfig::default();
    c.out = dir.path().join("out");
    c.questions = Some(q);
    c.embeddings = Some(emb);
    let r = cmd_eval(&c).unwrap();
    assert_eq!(r.overall.attempted, 3);
    assert_eq!(r.overall.accuracy(), 1.0);
    assert_eq!(r.skipped, 1);
    let tsv = fs::read_to_string(c.paths().report_tsv).unwrap();
    let cats: Vec<&str> = tsv.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(cats, ["category", "family", "gender", "other", "overall"]);

    c.category_prefix = Some("gen".into());
    let r = cmd_eval(&c).unwrap();
    assert_eq!(r.overall.attempted, 1);
}

#[test]
fn eval_without_valid_questions_still_succeeds() {
    let dir = TempDir::new().unwrap();
    let emb = dir.path().join("emb.txt");
    additive_embeddings(&emb);
    let q = dir.path().join("q.txt");
    fs::write(&q, ": x\nfoo bar baz qux\n").unwrap();
    let mut c = PipelineConfig::default();
    c.out = dir.path().to_path_buf();
    c.questions = Some(q);
    c.embeddings = Some(emb.clone());
    assert!(cmd_eval(&c).unwrap().no_valid_questions());
    assert!(fs::read_to_string(c.paths().report_txt).unwrap().contains("no valid questions"));

    fs::write(&emb, "2 3\nman 1 0 0\nwoman 1 1\n").unwrap();
    let e = cmd_eval(&c).unwrap_err();
    assert!(format!("{e:#}").contains("expected 3 components"), "{e:#}");
}

#[test]
fn run_all_reuses_fresh_outputs() {
    let dir = TempDir::new().unwrap();
    let mut c = toy_config(dir.path());
    let first = cmd_run_all(&c).unwrap();
    assert_eq!(first.ran, ["extract", "weight", "train", "eval"]);
    let p = c.paths();
    for f in [&p.counts, &p.edges, &p.embeddings, &p.matrices, &p.checkpoint, &p.report_tsv, &p.report_txt] {
        assert!(f.exists(), "{}", f.display());
    }
    let report = fs::read(&p.report_tsv).unwrap();
    let matrices = fs::read(&p.matrices).unwrap();

    let second = cmd_run_all(&c).unwrap();
    assert!(second.ran.is_empty());
    assert_eq!(second.reused.len(), 4);

    c.measure = relgraph::WeightMeasure::Raw;
    let third = cmd_run_all(&c).unwrap();
    assert_eq!(third.reused, ["extract"]);

    c.measure = relgraph::WeightMeasure::Ppmi;
    c.force = true;
    let forced = cmd_run_all(&c).unwrap();
    assert_eq!(forced.ran.len(), 4);
    assert_eq!(fs::read(&p.report_tsv).unwrap(), report);
    assert_eq!(fs::read(&p.matrices).unwrap(), matrices);
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_relgraph"))
}

#[test]
fn binary_exit_codes_and_messages() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let vert = toy("toy.vert");

    let o = binary()
        .args(["extract", "--kind", "dep", "--corpus", vert.to_str().unwrap(), "--out", out])
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("dependency input required"));
    assert!(o.stdout.is_empty());

    let o = binary().args(["weight", "--measure", "tfidf", "--out", out]).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("raw, ppmi, lmi, log, ent"));

    let o = binary().args(["train", "--epochs", "0", "--out", out]).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("epoch"));

    let conf = dir.path().join("run.conf");
    fs::write(&conf, format!("corpus = {}\nmin-pair-sent = 4\nout = {out}\nepochs = 0\n", vert.display()))
        .unwrap();
    // flags override the file
    let o = binary()
        .args(["extract", "--config", conf.to_str().unwrap(), "--epochs", "3"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("epochs = 3") && err.contains("min-pair-sent = 4"), "{err}");
    assert!(dir.path().join("counts.tsv").exists());
}
