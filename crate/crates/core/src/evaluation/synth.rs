use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::transform::{apply_transform, scatter_within, TransformSpec};
use crate::error::{Error, Result};
use crate::model::{ImageBoW, Keypoint, VisualWord};
use crate::search::{BowIndex, BowMeasure, Weighting};

/// Query id to the ids of the images that truly contain it.
pub type GroundTruth = BTreeMap<String, BTreeSet<String>>;

/// Keypoints per unit area shared by every generated image.
pub const KEYPOINT_DENSITY: f64 = 0.01;

/// Random variation applied to each planted copy of a query.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformMix {
    /// Uniform random rotation in [0, 2π).
    pub rotate: bool,
    /// Scale factor drawn log-uniformly from this range.
    pub scale: (f64, f64),
    /// Horizontal shear drawn uniformly from `[-shear, shear]`.
    pub shear: f64,
    /// Fraction of the planted keypoints dropped, drawn from `[0, plant_occlusion]`.
    pub plant_occlusion: f64,
    /// Fraction of the finished host's keypoints dropped.
    pub host_occlusion: f64,
}

impl TransformMix {
    /// Plain copies: no rotation, scaling, shear or occlusion.
    pub fn identity() -> Self {
        TransformMix {
            rotate: false,
            scale: (1.0, 1.0),
            shear: 0.0,
            plant_occlusion: 0.0,
            host_occlusion: 0.0,
        }
    }
}

impl Default for TransformMix {
    fn default() -> Self {
        TransformMix {
            rotate: true,
            scale: (0.5, 2.0),
            shear: 0.2,
            plant_occlusion: 0.3,
            host_occlusion: 0.0,
        }
    }
}

/// Shape of a planted corpus. Every query is planted into `hosts_per_query`
/// images (its relevant set); `decoys_per_query` further images receive the
/// query's words at random positions; the rest are plain distractors.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedParams {
    pub queries: usize,
    pub images: usize,
    pub hosts_per_query: usize,
    pub decoys_per_query: usize,
    pub codebook_size: u32,
    pub image_keypoints: RangeInclusive<usize>,
    pub query_keypoints: RangeInclusive<usize>,
    pub mix: TransformMix,
}

impl Default for PlantedParams {
    fn default() -> Self {
        PlantedParams {
            queries: 52,
            images: 1000,
            hosts_per_query: 10,
            decoys_per_query: 8,
            codebook_size: 500,
            image_keypoints: 150..=300,
            query_keypoints: 40..=100,
            mix: TransformMix::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedCorpus {
    pub corpus: Vec<ImageBoW>,
    pub queries: Vec<ImageBoW>,
    pub ground_truth: GroundTruth,
}

/// Uniform random words on a square sized for [`KEYPOINT_DENSITY`].
pub fn random_image(id: impl Into<String>, n: usize, codebook_size: u32, rng: &mut impl Rng) -> ImageBoW {
    let side = (n as f64 / KEYPOINT_DENSITY).sqrt();
    let keypoints = (0..n)
        .map(|_| {
            Keypoint::new(
                rng.random_range(0.0..side),
                rng.random_range(0.0..side),
                VisualWord(rng.random_range(0..codebook_size)),
            )
        })
        .collect();
    ImageBoW::new(id, codebook_size, keypoints)
}

/// Applies a random draw of `mix` to `query` (centered first) and pastes the
/// result at a random position fully inside `host` when it fits.
pub fn plant(query: &ImageBoW, host: &ImageBoW, mix: &TransformMix, rng: &mut impl Rng) -> Result<ImageBoW> {
    let (x0, y0, x1, y1) = query
        .extent()
        .ok_or_else(|| Error::InvalidParameter("cannot plant an empty query".into()))?;
    let mut steps = vec![TransformSpec::Translate {
        dx: -(x0 + x1) / 2.0,
        dy: -(y0 + y1) / 2.0,
    }];
    if mix.rotate {
        steps.push(TransformSpec::Rotate {
            theta: rng.random_range(0.0..std::f64::consts::TAU),
        });
    }
    let (lo, hi) = mix.scale;
    if lo != 1.0 || hi != 1.0 {
        let s = if hi > lo { rng.random_range(lo.ln()..hi.ln()).exp() } else { lo };
        steps.push(TransformSpec::Scale { s });
    }
    if mix.shear > 0.0 {
        steps.push(TransformSpec::Shear {
            kx: rng.random_range(-mix.shear..=mix.shear),
        });
    }
    if mix.plant_occlusion > 0.0 {
        steps.push(TransformSpec::Occlude {
            fraction: rng.random_range(0.0..mix.plant_occlusion),
            seed: rng.random(),
        });
    }
    let mut planted = query.clone();
    for step in &steps {
        planted = apply_transform(&planted, step)?;
    }
    let (px0, py0, px1, py1) = planted.extent().expect("planted copy keeps at least 2 keypoints");
    let (hx0, hy0, hx1, hy1) = host.extent().unwrap_or((0.0, 0.0, 0.0, 0.0));
    let mut place = |lo: f64, hi: f64| if hi > lo { rng.random_range(lo..hi) } else { lo };
    let offset = (place(hx0 - px0, hx1 - px1), place(hy0 - py0, hy1 - py1));
    let mut out = apply_transform(
        &planted,
        &TransformSpec::Embed {
            host: host.clone(),
            offset,
        },
    )?;
    if mix.host_occlusion > 0.0 {
        out = apply_transform(
            &out,
            &TransformSpec::Occlude {
                fraction: mix.host_occlusion,
                seed: rng.random(),
            },
        )?;
    }
    Ok(out)
}

/// `host` plus the query's words at uniformly random positions over the
/// host's extent.
fn decoy(query: &ImageBoW, host: &ImageBoW, rng: &mut impl Rng) -> ImageBoW {
    let extent = host.extent().unwrap_or((0.0, 0.0, 0.0, 0.0));
    let scattered = scatter_within(query, extent, rng);
    let mut keypoints = host.keypoints.clone();
    keypoints.extend(scattered.keypoints);
    ImageBoW::new(host.image_id.clone(), host.codebook_size, keypoints)
}

fn draw(range: &RangeInclusive<usize>, rng: &mut impl Rng) -> usize {
    rng.random_range(range.clone())
}

fn check_params(p: &PlantedParams) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidParameter(m));
    if p.queries == 0 || p.images < 2 || p.hosts_per_query == 0 {
        return bad("need at least 1 query, 2 images and 1 host per query".into());
    }
    let needed = p.queries * (p.hosts_per_query + p.decoys_per_query);
    if needed > p.images {
        return bad(format!(
            "{} queries with {} hosts and {} decoys each need {needed} images, only {} requested",
            p.queries, p.hosts_per_query, p.decoys_per_query, p.images
        ));
    }
    if *p.query_keypoints.start() < 2 || *p.image_keypoints.start() < 2 || p.query_keypoints.is_empty() || p.image_keypoints.is_empty() {
        return bad("keypoint ranges must start at 2 or more".into());
    }
    if p.codebook_size == 0 {
        return bad("codebook size must be positive".into());
    }
    let m = &p.mix;
    if !(m.scale.0 > 0.0 && m.scale.0 <= m.scale.1 && m.scale.1.is_finite()) {
        return bad(format!("scale range {:?}", m.scale));
    }
    if !(m.shear >= 0.0 && m.shear.is_finite()) || !(0.0..1.0).contains(&m.plant_occlusion) || !(0.0..1.0).contains(&m.host_occlusion) {
        return bad("shear must be non-negative and occlusion fractions in [0, 1)".into());
    }
    Ok(())
}

/// Generates a corpus with known relevant images per query. Deterministic in
/// `seed`.
pub fn make_planted_corpus(seed: u64, params: &PlantedParams) -> Result<PlantedCorpus> {
    check_params(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = params.images.to_string().len().max(4);
    let qwidth = params.queries.to_string().len().max(2);

    let queries: Vec<ImageBoW> = (0..params.queries)
        .map(|q| {
            let n = draw(&params.query_keypoints, &mut rng);
            random_image(format!("q{q:0qwidth$}"), n, params.codebook_size, &mut rng)
        })
        .collect();

    // slot -> role; hosts first, then decoys, then distractors, shuffled
    #[derive(Clone, Copy)]
    enum Role {
        Host(usize),
        Decoy(usize),
        Distractor,
    }
    let mut roles = Vec::with_capacity(params.images);
    for q in 0..params.queries {
        roles.extend(std::iter::repeat_n(Role::Host(q), params.hosts_per_query));
    }
    for q in 0..params.queries {
        roles.extend(std::iter::repeat_n(Role::Decoy(q), params.decoys_per_query));
    }
    roles.resize(params.images, Role::Distractor);
    roles.shuffle(&mut rng);

    let mut ground_truth: GroundTruth = queries.iter().map(|q| (q.image_id.clone(), BTreeSet::new())).collect();
    let mut corpus = Vec::with_capacity(params.images);
    for (slot, role) in roles.into_iter().enumerate() {
        let id = format!("img{slot:0width$}");
        let n = draw(&params.image_keypoints, &mut rng);
        let background = random_image(id.clone(), n, params.codebook_size, &mut rng);
        let image = match role {
            Role::Host(q) => {
                ground_truth.get_mut(&queries[q].image_id).expect("query registered").insert(id);
                plant(&queries[q], &background, &params.mix, &mut rng)?
            }
            Role::Decoy(q) => decoy(&queries[q], &background, &mut rng),
            Role::Distractor => background,
        };
        corpus.push(image);
    }
    Ok(PlantedCorpus {
        corpus,
        queries,
        ground_truth,
    })
}

/// A query with one image containing it intact and one containing the same
/// words with the query's keypoints scattered.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterScenario {
    pub query: ImageBoW,
    pub coherent: ImageBoW,
    pub scattered: ImageBoW,
    pub distractors: Vec<ImageBoW>,
}

impl ScatterScenario {
    /// Coherent, scattered and distractor images in one corpus.
    pub fn corpus(&self) -> Vec<ImageBoW> {
        let mut all = vec![self.coherent.clone(), self.scattered.clone()];
        all.extend(self.distractors.iter().cloned());
        all
    }
}

pub const SCENARIO_CODEBOOK_SIZE: u32 = 500;

/// The coherent image pastes the query into a background; the scattered
/// image is the same image with the pasted keypoints moved to random
/// positions, so both have identical word histograms.
pub fn scatter_scenario(seed: u64) -> Result<ScatterScenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cb = SCENARIO_CODEBOOK_SIZE;
    let n_query = rng.random_range(40..=100);
    let query = random_image("query", n_query, cb, &mut rng);
    let n_host = rng.random_range(150..=300);
    let background = random_image("coherent", n_host, cb, &mut rng);
    let coherent = plant(&query, &background, &TransformMix::identity(), &mut rng)?;
    let kept = coherent.len() - query.len();
    let extent = coherent.extent().expect("non-empty image");
    let moved = scatter_within(
        &ImageBoW::new("scattered", cb, coherent.keypoints[kept..].to_vec()),
        extent,
        &mut rng,
    );
    let mut keypoints = coherent.keypoints[..kept].to_vec();
    keypoints.extend(moved.keypoints);
    let scattered = ImageBoW::new("scattered", cb, keypoints);
    let distractors = (0..20)
        .map(|i| {
            let n = rng.random_range(150..=300);
            random_image(format!("distractor{i:02}"), n, cb, &mut rng)
        })
        .collect();
    Ok(ScatterScenario {
        query,
        coherent,
        scattered,
        distractors,
    })
}

/// A small query inside a much larger host, plus outliers that hold the
/// query's words diffusely among little else.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallQueryScenario {
    pub query: ImageBoW,
    pub true_host: ImageBoW,
    pub outliers: Vec<ImageBoW>,
}

impl SmallQueryScenario {
    pub fn corpus(&self) -> Vec<ImageBoW> {
        let mut all = vec![self.true_host.clone()];
        all.extend(self.outliers.iter().cloned());
        all
    }
}

const SMALL_QUERY_ATTEMPTS: usize = 100;

/// Generates the scenario and certifies that whole-image L2 ranks at least
/// one outlier above the true host; retries with fresh draws otherwise.
pub fn small_query_scenario(seed: u64) -> Result<SmallQueryScenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cb = SCENARIO_CODEBOOK_SIZE;
    for _ in 0..SMALL_QUERY_ATTEMPTS {
        let n_query = rng.random_range(30..=45);
        let query = random_image("query", n_query, cb, &mut rng);
        let n_host = rng.random_range(12 * n_query..=16 * n_query);
        let background = random_image("host", n_host, cb, &mut rng);
        let true_host = plant(&query, &background, &TransformMix::identity(), &mut rng)?;
        if query.len() * 10 >= true_host.len() {
            continue;
        }
        let outliers: Vec<ImageBoW> = (0..5)
            .map(|i| {
                let filler = rng.random_range(3 * n_query..=6 * n_query);
                let base = random_image(format!("outlier{i}"), filler, cb, &mut rng);
                decoy(&query, &base, &mut rng)
            })
            .collect();
        let scenario = SmallQueryScenario {
            query,
            true_host,
            outliers,
        };
        let bow = BowIndex::new(&scenario.corpus(), cb, Weighting::None)?;
        let ranking = bow.search(&scenario.query, BowMeasure::L2, 1)?;
        if ranking.entries[0].0 != scenario.true_host.image_id {
            return Ok(scenario);
        }
    }
    Err(Error::Generation {
        seed,
        message: format!("L2 ranked the true host first in all {SMALL_QUERY_ATTEMPTS} attempts"),
    })
}
