mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{quantized_corpus, raw_corpus, CODEBOOK};
use pbsearch::commands::{self, format_hits, EngineArgs, EvaluateOptions, QueryArgs, Region};
use pbsearch::search_hits;
use pbsearch_core::evaluation::PlantedParams;
use pbsearch_core::format::{load_codebook, load_index, save_quantized};
use pbsearch_core::search::{build_index, query_topk_images};
use pbsearch_core::{EngineConfig, SimilarityConfig};

fn pbsearch(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pbsearch"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn small_config() -> EngineConfig {
    EngineConfig {
        n0: 4,
        codebook_size: CODEBOOK as usize,
        ..EngineConfig::default()
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn codebook_is_reproducible_and_reports_its_scatter() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = raw_corpus(dir.path(), 3, 1);
    let a = dir.path().join("a.pcb");
    let b = dir.path().join("b.pcb");
    let args = |out: &Path| vec!["build-codebook", "--manifest", s(&manifest), "--out", s(out), "--codebook-size", "5", "--restarts", "3", "--seed", "9"].into_iter().map(String::from).collect::<Vec<_>>();
    let run = |out: &Path| {
        let a = args(out);
        stdout(&pbsearch(&a.iter().map(String::as_str).collect::<Vec<_>>(), &[]))
    };
    let printed = run(&a);
    run(&b);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let codebook = load_codebook(&a).unwrap();
    assert_eq!(codebook.k(), 5);
    assert!(printed.contains(&format!("scatter {}\n", codebook.scatter())), "{printed}");
}

#[test]
fn raw_corpus_quantizes_and_indexes_with_codebook() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = raw_corpus(dir.path(), 4, 2);
    let cb = dir.path().join("cb.pcb");
    let config = EngineConfig { codebook_size: 5, restarts: 2, n0: 3, ..EngineConfig::default() };
    commands::build_codebook(&manifest, &cb, &config).unwrap();

    let pbow = dir.path().join("raw0.pbow");
    let image = commands::quantize(&cb, &dir.path().join("raw0.praw"), &pbow).unwrap();
    assert_eq!(image.len(), 25);
    assert!(std::fs::read_to_string(&pbow).unwrap().starts_with("PBOW v1 5"));

    let index_path = dir.path().join("raw.pidx");
    let summary = commands::build_index(&manifest, Some(&cb), &index_path, &config).unwrap();
    assert_eq!((summary.images, summary.profiles), (4, 100));
    assert!(commands::build_index(&manifest, None, &index_path, &config).is_err());
}

#[test]
fn index_has_one_block_per_image_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, images) = quantized_corpus(dir.path(), 10, 3);
    let out = dir.path().join("corpus.pidx");
    let text = stdout(&pbsearch(&["build-index", "--manifest", s(&manifest), "--out", s(&out), "--n0", "4"], &[]));
    assert!(text.contains("indexed 10 images"));
    let pidx = std::fs::read_to_string(&out).unwrap();
    assert_eq!(pidx.lines().filter(|l| l.starts_with("image ")).count(), 10);

    let built = build_index(&images, small_config().index_config().unwrap()).unwrap();
    let reloaded = load_index(&out).unwrap();
    let query = images[4].crop(10.0, 10.0, 70.0, 70.0);
    let sim = SimilarityConfig::default();
    assert_eq!(search_hits(&built, &query, &sim, 10).unwrap(), search_hits(&reloaded, &query, &sim, 10).unwrap());
}

#[test]
fn env_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, _) = quantized_corpus(dir.path(), 2, 4);
    let out = dir.path().join("env.pidx");
    stdout(&pbsearch(&["build-index", "--manifest", s(&manifest), "--out", s(&out)], &[("PBSEARCH_N0", "7")]));
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("PIDX v1 7 20\n"));
}

#[test]
fn undersized_images_abort_the_build() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, _) = quantized_corpus(dir.path(), 3, 5);
    std::fs::write(dir.path().join("tiny.pbow"), "PBOW v1 20\n1 1 3\n").unwrap();
    let mut text = std::fs::read_to_string(&manifest).unwrap();
    text.push_str("tiny tiny.pbow\n");
    std::fs::write(&manifest, text).unwrap();
    let out = pbsearch(&["build-index", "--manifest", s(&manifest), "--out", s(&dir.path().join("x.pidx"))], &[]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("tiny (1 keypoints)"));
}

#[test]
fn query_output_follows_the_engine() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, images) = quantized_corpus(dir.path(), 10, 6);
    let index_path = dir.path().join("corpus.pidx");
    commands::build_index(&manifest, None, &index_path, &small_config()).unwrap();
    let query_path = dir.path().join("query.pbow");
    save_quantized(&query_path, &images[7]).unwrap();

    let text = stdout(&pbsearch(&["query", "--index", s(&index_path), "--query", s(&query_path), "-k", "5"], &[]));
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines.len() <= 5);
    let index = load_index(&index_path).unwrap();
    let expected = query_topk_images(&images[7], &index, 5).unwrap();
    for (line, m) in lines.iter().zip(&expected) {
        let fields: Vec<&str> = line.split('\t').collect();
        assert_eq!(fields[1], m.image_id);
        assert_eq!(fields[2], format!("{:.6}", m.score));
    }
    assert!(lines[0].starts_with("1\timg07\t"));

    let base = QueryArgs {
        index: &index_path,
        query: &query_path,
        k: 5,
        region: None,
        codebook: None,
        n0: None,
        similarity: SimilarityConfig::default(),
    };
    let whole = QueryArgs { region: Some("-1,-1,101,101".parse().unwrap()), ..base.clone() };
    assert_eq!(commands::query(&whole).unwrap(), commands::query(&base).unwrap());
    assert_eq!(format_hits(&commands::query(&base).unwrap()), text);

    let empty = QueryArgs { region: Some(Region { x0: 200.0, y0: 200.0, x1: 201.0, y1: 201.0 }), ..base.clone() };
    assert!(commands::query(&empty).unwrap_err().to_string().contains("need at least 2"));
    let wrong_n0 = QueryArgs { n0: Some(50), ..base.clone() };
    assert!(commands::query(&wrong_n0).unwrap_err().to_string().contains("incompatible n0"));

    std::fs::write(&query_path, "PBOW v1 30\n1 1 3\n2 2 4\n").unwrap();
    assert!(commands::query(&base).unwrap_err().to_string().contains("codebook size"));
}

#[test]
fn corrupt_index_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, images) = quantized_corpus(dir.path(), 2, 7);
    let index_path = dir.path().join("corpus.pidx");
    commands::build_index(&manifest, None, &index_path, &small_config()).unwrap();
    let text = std::fs::read_to_string(&index_path).unwrap();
    std::fs::write(&index_path, text.replacen("ring 4 ", "ring x ", 1)).unwrap();
    let query_path = dir.path().join("q.pbow");
    save_quantized(&query_path, &images[0]).unwrap();
    let out = pbsearch(&["query", "--index", s(&index_path), "--query", s(&query_path)], &[]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("corpus.pidx") && err.contains("line ") && err.contains("invalid ring size"), "{err}");
}

#[test]
fn evaluate_writes_reproducible_reports() {
    let dir = tempfile::tempdir().unwrap();
    let options = EvaluateOptions {
        params: PlantedParams { queries: 3, images: 80, ..PlantedParams::default() },
        scatter_trials: 2,
        small_query_trials: 2,
        occlusion_trials: 2,
        occlusion_distractors: 10,
        ..EvaluateOptions::default()
    };
    let config = EngineArgs { seed: 5, ..EngineArgs::default() }.config().unwrap();
    let a = commands::evaluate(&config, &options, &dir.path().join("a")).unwrap();
    let b = commands::evaluate(&config, &options, &dir.path().join("b")).unwrap();
    assert_eq!(a, b);
    for name in ["report.txt", "report.csv", "scenarios.txt"] {
        assert_eq!(std::fs::read(dir.path().join("a").join(name)).unwrap(), std::fs::read(dir.path().join("b").join(name)).unwrap());
    }
    let csv = std::fs::read_to_string(dir.path().join("a/report.csv")).unwrap();
    let methods: std::collections::BTreeSet<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(methods.len(), 9);
    assert_eq!(csv.lines().count(), 1 + 9 * 10);
}

#[test]
fn evaluate_binary_runs_small() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eval");
    let text = stdout(&pbsearch(&["evaluate", "--out", s(&out), "--queries", "2", "--images", "40", "--trials", "1"], &[]));
    assert!(text.contains("precision@10: profile"));
    assert!(out.join("report.txt").exists() && out.join("report.csv").exists());
}
