//! Implementations of the CLI subcommands. Each returns a summary so that
//! callers other than `main` can inspect the outcome.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, ensure, Context, Result};
use clap::Args;
use pbsearch_core::codebook::{build_codebook as train_codebook, quantize_image, Codebook};
use pbsearch_core::evaluation::{
    make_planted_corpus, scatter_scenario, small_query_scenario, Evaluator, PlantedParams, PrecisionReport, TransformMix,
    PROFILE_METHOD,
};
use pbsearch_core::format::{
    load_codebook, load_index, load_keypoints, load_manifest, save_codebook, save_index, save_quantized, KeypointFile,
    KeypointMode,
};
use pbsearch_core::search::{build_index as index_images, query_topk_images, BowIndex, BowMeasure, ProfileIndex, Weighting};
use pbsearch_core::{Descriptor, EngineConfig, ImageBoW, RingMeasure, SimilarityConfig};

use crate::{format_score, search_hits, Hit};

/// Engine settings shared by the subcommands.
#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Keypoints in the innermost ring.
    #[arg(long, env = "PBSEARCH_N0", default_value_t = 50)]
    pub n0: usize,
    /// Ring weight decay.
    #[arg(long, env = "PBSEARCH_LAMBDA", default_value_t = 1.0 / 3.0)]
    pub lambda: f64,
    /// Ring similarity: jaccard or cosine.
    #[arg(long, env = "PBSEARCH_MEASURE", default_value = "jaccard")]
    pub measure: RingMeasure,
    #[arg(long, env = "PBSEARCH_CODEBOOK_SIZE", default_value_t = 500)]
    pub codebook_size: usize,
    /// k-means restarts.
    #[arg(long, env = "PBSEARCH_RESTARTS", default_value_t = 10)]
    pub restarts: usize,
    /// k-means iteration cap per restart.
    #[arg(long, env = "PBSEARCH_MAX_ITER", default_value_t = 100)]
    pub max_iter: usize,
    #[arg(long, env = "PBSEARCH_SEED", default_value_t = 0)]
    pub seed: u64,
}

impl Default for EngineArgs {
    fn default() -> Self {
        let c = EngineConfig::default();
        EngineArgs {
            n0: c.n0,
            lambda: c.lambda,
            measure: c.measure,
            codebook_size: c.codebook_size,
            restarts: c.restarts,
            max_iter: c.max_iter,
            seed: c.seed,
        }
    }
}

impl EngineArgs {
    pub fn config(&self) -> Result<EngineConfig> {
        let config = EngineConfig {
            n0: self.n0,
            lambda: self.lambda,
            measure: self.measure,
            codebook_size: self.codebook_size,
            restarts: self.restarts,
            max_iter: self.max_iter,
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodebookSummary {
    pub k: usize,
    pub dim: usize,
    pub scatter: f64,
    pub restart: usize,
    pub seed: u64,
}

/// Trains a codebook on every descriptor of the raw images in `manifest`.
pub fn build_codebook(manifest: &Path, out: &Path, config: &EngineConfig) -> Result<CodebookSummary> {
    let entries = load_manifest(manifest)?;
    ensure!(!entries.is_empty(), "{}: manifest lists no images", manifest.display());
    let mut descriptors: Vec<Descriptor> = Vec::new();
    for entry in &entries {
        match load_keypoints(&entry.path, Some(KeypointMode::Raw))? {
            KeypointFile::Raw { keypoints, .. } => descriptors.extend(keypoints.into_iter().map(|k| k.payload)),
            KeypointFile::Quantized(_) => unreachable!("raw mode requested"),
        }
    }
    let build = train_codebook(&descriptors, config.codebook_size, config.restarts, config.max_iter, config.seed)?;
    save_codebook(out, &build.codebook)?;
    Ok(CodebookSummary {
        k: build.codebook.k(),
        dim: build.codebook.dim(),
        scatter: build.codebook.scatter(),
        restart: build.best_restart,
        seed: build.best_seed,
    })
}

fn load_query_image(path: &Path, codebook: Option<&Codebook>) -> Result<ImageBoW> {
    match load_keypoints(path, None)? {
        KeypointFile::Quantized(image) => Ok(image),
        KeypointFile::Raw { keypoints, .. } => {
            let codebook = codebook.ok_or_else(|| anyhow!("{}: raw keypoints need --codebook", path.display()))?;
            let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(quantize_image(id, &keypoints, codebook).with_context(|| path.display().to_string())?)
        }
    }
}

/// Quantizes one raw keypoint file and writes it as a PBOW file.
pub fn quantize(codebook: &Path, input: &Path, out: &Path) -> Result<ImageBoW> {
    let codebook = load_codebook(codebook)?;
    let image = match load_keypoints(input, Some(KeypointMode::Raw))? {
        KeypointFile::Raw { keypoints, .. } => {
            let id = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            quantize_image(id, &keypoints, &codebook).with_context(|| input.display().to_string())?
        }
        KeypointFile::Quantized(_) => unreachable!("raw mode requested"),
    };
    save_quantized(out, &image)?;
    Ok(image)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexSummary {
    pub images: usize,
    pub profiles: usize,
    pub codebook_size: u32,
}

/// Builds and saves the profile index of every image in `manifest`.
/// Raw images are quantized with `codebook`.
pub fn build_index(manifest: &Path, codebook: Option<&Path>, out: &Path, config: &EngineConfig) -> Result<IndexSummary> {
    let entries = load_manifest(manifest)?;
    let codebook = codebook.map(load_codebook).transpose()?;
    let mut images = Vec::with_capacity(entries.len());
    for entry in &entries {
        let mut image = load_query_image(&entry.path, codebook.as_ref())?;
        image.image_id = entry.image_id.clone();
        images.push(image);
    }
    let undersized: Vec<String> = images
        .iter()
        .filter(|i| i.len() < 2)
        .map(|i| format!("{} ({} keypoints)", i.image_id, i.len()))
        .collect();
    if !undersized.is_empty() {
        bail!("images with fewer than 2 keypoints: {}", undersized.join(", "));
    }
    let codebook_size = match (&codebook, images.first()) {
        (Some(cb), _) => cb.k() as u32,
        (None, Some(first)) => first.codebook_size,
        (None, None) => config.codebook_size as u32,
    };
    let index_config = EngineConfig {
        codebook_size: codebook_size as usize,
        ..*config
    }
    .index_config()?;
    let index = index_images(&images, index_config)?;
    save_index(out, &index)?;
    Ok(IndexSummary {
        images: index.images().len(),
        profiles: index.len(),
        codebook_size,
    })
}

/// Axis-aligned query box `x0,y0,x1,y1` (closed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let v: Vec<f64> = s
            .split(',')
            .map(|f| f.trim().parse::<f64>().map_err(|_| format!("invalid number {f:?}")))
            .collect::<std::result::Result<_, _>>()?;
        match v[..] {
            [x0, y0, x1, y1] if x0 <= x1 && y0 <= y1 && v.iter().all(|c| c.is_finite()) => Ok(Region { x0, y0, x1, y1 }),
            [_, _, _, _] => Err("region needs x0 <= x1 and y0 <= y1".into()),
            _ => Err(format!("expected x0,y0,x1,y1, found {s:?}")),
        }
    }
}

/// Loads an index with the similarity settings of `config`, checking its n0
/// against `n0` when given.
pub fn open_index(path: &Path, n0: Option<usize>) -> Result<ProfileIndex> {
    let index = load_index(path)?;
    if let Some(n0) = n0 {
        ensure!(
            n0 == index.config().n0,
            "incompatible n0: index {} was built with n0 = {}, {} requested",
            path.display(),
            index.config().n0,
            n0
        );
    }
    Ok(index)
}

#[derive(Debug, Clone)]
pub struct QueryArgs<'a> {
    pub index: &'a Path,
    pub query: &'a Path,
    pub k: usize,
    pub region: Option<Region>,
    pub codebook: Option<&'a Path>,
    pub n0: Option<usize>,
    pub similarity: SimilarityConfig,
}

/// Runs a query against a saved index.
pub fn query(args: &QueryArgs<'_>) -> Result<Vec<Hit>> {
    ensure!(args.k >= 1, "k must be at least 1");
    let index = open_index(args.index, args.n0)?;
    let codebook = args.codebook.map(load_codebook).transpose()?;
    let mut image = load_query_image(args.query, codebook.as_ref())?;
    if let Some(r) = args.region {
        image = image.crop(r.x0, r.y0, r.x1, r.y1);
        ensure!(image.len() >= 2, "region keeps {} keypoint(s), need at least 2", image.len());
    }
    Ok(search_hits(&index, &image, &args.similarity, args.k)?)
}

/// Tab-separated result lines: rank, image id, score, query center x/y,
/// matched center x/y.
pub fn format_hits(hits: &[Hit]) -> String {
    let mut out = String::new();
    for h in hits {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            h.rank,
            h.image_id,
            format_score(h.score),
            h.query_center.0,
            h.query_center.1,
            h.match_center.0,
            h.match_center.1
        );
    }
    out
}

/// Size of an evaluation run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateOptions {
    pub params: PlantedParams,
    pub scatter_trials: usize,
    pub small_query_trials: usize,
    pub occlusion_trials: usize,
    pub occlusion: f64,
    pub occlusion_distractors: usize,
}

impl Default for EvaluateOptions {
    fn default() -> Self {
        EvaluateOptions {
            params: PlantedParams::default(),
            scatter_trials: 50,
            small_query_trials: 25,
            occlusion_trials: 50,
            occlusion: 0.3,
            occlusion_distractors: 100,
        }
    }
}

/// Scenario outcome: cases meeting the expectation out of `trials`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tally {
    pub passed: usize,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationSummary {
    pub report: PrecisionReport,
    /// Coherent image scored strictly above its scattered copy.
    pub scatter_profile: Tally,
    /// Every orderless baseline scored the two images equally.
    pub scatter_orderless: Tally,
    /// True host at rank 1 for a small query.
    pub small_query: Tally,
    /// Occluded host at rank 1.
    pub occlusion: Tally,
}

impl EvaluationSummary {
    pub fn scenario_text(&self) -> String {
        let line = |name: &str, t: Tally| format!("{name}: {}/{}\n", t.passed, t.trials);
        [
            line("scatter: coherent above scattered (profile)", self.scatter_profile),
            line("scatter: coherent equal to scattered (all orderless baselines)", self.scatter_orderless),
            line("small query: true host at rank 1 (profile)", self.small_query),
            line("occlusion: occluded host at rank 1 (profile)", self.occlusion),
        ]
        .concat()
    }
}

fn index_config(config: &EngineConfig, codebook_size: u32) -> Result<pbsearch_core::search::IndexConfig> {
    Ok(EngineConfig {
        codebook_size: codebook_size as usize,
        ..*config
    }
    .index_config()?)
}

/// Scatter scenarios: profile separation and orderless ties.
pub fn scatter_trials(config: &EngineConfig, seed: u64, trials: usize) -> Result<(Tally, Tally)> {
    let (mut separated, mut tied) = (0, 0);
    let sim = config.similarity()?;
    for t in 0..trials as u64 {
        let s = scatter_scenario(seed.wrapping_add(t))?;
        let corpus = s.corpus();
        let cb = s.query.codebook_size;
        let index = index_images(&corpus, index_config(config, cb)?)?;
        let hits = search_hits(&index, &s.query, &sim, corpus.len())?;
        let score = |id: &str| hits.iter().find(|h| h.image_id == id).map_or(f64::NEG_INFINITY, |h| h.score);
        if score(&s.coherent.image_id) > score(&s.scattered.image_id) {
            separated += 1;
        }
        let mut all_equal = true;
        for weighting in [Weighting::None, Weighting::TfIdf] {
            let bow = BowIndex::new(&corpus, cb, weighting)?;
            for measure in BowMeasure::ALL {
                let r = bow.search(&s.query, measure, corpus.len())?;
                let get = |id: &str| r.entries.iter().find(|e| e.0 == id).map(|e| e.1);
                all_equal &= get(&s.coherent.image_id) == get(&s.scattered.image_id);
            }
        }
        if all_equal {
            tied += 1;
        }
    }
    Ok((
        Tally { passed: separated, trials },
        Tally { passed: tied, trials },
    ))
}

/// Small-query scenarios: true host at rank 1.
pub fn small_query_trials(config: &EngineConfig, seed: u64, trials: usize) -> Result<Tally> {
    let mut passed = 0;
    for t in 0..trials as u64 {
        let s = small_query_scenario(seed.wrapping_add(t))?;
        let index = index_images(&s.corpus(), index_config(config, s.query.codebook_size)?)?;
        let top = search_hits(&index, &s.query, &config.similarity()?, 1)?;
        if top[0].image_id == s.true_host.image_id {
            passed += 1;
        }
    }
    Ok(Tally { passed, trials })
}

/// One query planted into one host, a `fraction` of whose keypoints are
/// then dropped, among `distractors` other images: host at rank 1.
pub fn occlusion_trials(config: &EngineConfig, seed: u64, trials: usize, fraction: f64, distractors: usize) -> Result<Tally> {
    let mut passed = 0;
    for t in 0..trials as u64 {
        let params = PlantedParams {
            queries: 1,
            images: distractors + 1,
            hosts_per_query: 1,
            decoys_per_query: 0,
            codebook_size: config.codebook_size as u32,
            mix: TransformMix {
                host_occlusion: fraction,
                ..TransformMix::identity()
            },
            ..PlantedParams::default()
        };
        let pc = make_planted_corpus(seed.wrapping_add(t), &params)?;
        let index = index_images(&pc.corpus, config.index_config()?)?;
        let query = &pc.queries[0];
        let top = query_topk_images(query, &index, 1)?;
        if pc.ground_truth[&query.image_id].contains(&top[0].image_id) {
            passed += 1;
        }
    }
    Ok(Tally { passed, trials })
}

/// Generates the planted corpus and scenarios, runs every method and writes
/// `report.txt`, `report.csv` and `scenarios.txt` into `out_dir`.
pub fn evaluate(config: &EngineConfig, options: &EvaluateOptions, out_dir: &Path) -> Result<EvaluationSummary> {
    let seed = config.seed;
    let params = PlantedParams {
        codebook_size: config.codebook_size as u32,
        ..options.params.clone()
    };
    let pc = make_planted_corpus(seed, &params)?;
    let evaluator = Evaluator::new(&pc.corpus, config)?;
    let report = evaluator.report(&pc.queries, &pc.ground_truth, &config.similarity()?)?;
    let (scatter_profile, scatter_orderless) = scatter_trials(config, seed, options.scatter_trials)?;
    let summary = EvaluationSummary {
        report,
        scatter_profile,
        scatter_orderless,
        small_query: small_query_trials(config, seed, options.small_query_trials)?,
        occlusion: occlusion_trials(config, seed, options.occlusion_trials, options.occlusion, options.occlusion_distractors)?,
    };
    std::fs::create_dir_all(out_dir).with_context(|| out_dir.display().to_string())?;
    let write = |name: &str, text: String| -> Result<PathBuf> {
        let path = out_dir.join(name);
        std::fs::write(&path, text).with_context(|| path.display().to_string())?;
        Ok(path)
    };
    write("report.txt", summary.report.to_table())?;
    write("report.csv", summary.report.to_csv())?;
    write("scenarios.txt", summary.scenario_text())?;
    Ok(summary)
}

/// Headline comparison line for the report at `k`.
pub fn headline(report: &PrecisionReport, k: usize) -> String {
    let profile = report.precision(PROFILE_METHOD, k).unwrap_or(f64::NAN);
    match report.best_baseline(k) {
        Some((name, p)) => format!("precision@{k}: profile {profile:.3}, best baseline {name} {p:.3}"),
        None => format!("precision@{k}: profile {profile:.3}"),
    }
}
