use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::model::{validate_corpus, ImageBoW, WordKeypoint};
use crate::profile::{build_all_profiles, Profile, RingHistogram};
use crate::similarity::{
    bounded_distance, cosine_from_parts, jaccard_from_parts, ring_weights, BoundedDistance,
    RingMeasure, SimilarityConfig,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexConfig {
    pub n0: usize,
    pub codebook_size: u32,
    pub similarity: SimilarityConfig,
}

/// An indexed image: its keypoints (for coordinates) and one profile per
/// keypoint.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedImage {
    pub image: ImageBoW,
    pub profiles: Vec<Profile>,
}

impl IndexedImage {
    pub fn ring_count(&self) -> usize {
        self.profiles.first().map_or(0, Profile::ring_count)
    }
}

/// Profiles of every keypoint of every indexed image. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileIndex {
    config: IndexConfig,
    images: Vec<IndexedImage>,
    by_id: HashMap<String, usize>,
    // whole-image word counts, used to bound ring overlaps during search
    histograms: Vec<Vec<u32>>,
}

impl ProfileIndex {
    /// Assembles an index from prebuilt parts, checking that profiles cover
    /// each image's keypoints in order and agree with `config`.
    pub fn from_parts(config: IndexConfig, images: Vec<IndexedImage>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(images.len());
        for (slot, entry) in images.iter().enumerate() {
            let id = &entry.image.image_id;
            if by_id.insert(id.clone(), slot).is_some() {
                return Err(Error::Validation(format!("duplicate image id {id:?}")));
            }
            if entry.image.codebook_size != config.codebook_size {
                return Err(Error::Incompatible(format!(
                    "image {id:?} uses codebook size {}, index uses {}",
                    entry.image.codebook_size, config.codebook_size
                )));
            }
            if let Some(w) = entry.image.words().find(|w| w.0 >= config.codebook_size) {
                return Err(Error::Validation(format!("image {id:?} has word {w} outside the codebook")));
            }
            if entry.profiles.len() != entry.image.len() {
                return Err(Error::Validation(format!(
                    "image {id:?} has {} keypoints but {} profiles",
                    entry.image.len(),
                    entry.profiles.len()
                )));
            }
            let m = entry.ring_count();
            for (i, p) in entry.profiles.iter().enumerate() {
                if p.center_index != i
                    || p.n0 != config.n0
                    || p.codebook_size != config.codebook_size
                    || &*p.image_id != id.as_str()
                    || p.ring_count() != m
                    || p.total_size() + 1 != entry.image.len()
                {
                    return Err(Error::Validation(format!(
                        "profile {i} of image {id:?} is inconsistent with the index"
                    )));
                }
            }
        }
        let histograms = images
            .iter()
            .map(|e| {
                let mut counts = vec![0u32; config.codebook_size as usize];
                for w in e.image.words() {
                    counts[w.index()] += 1;
                }
                counts
            })
            .collect();
        Ok(ProfileIndex {
            config,
            images,
            by_id,
            histograms,
        })
    }

    pub fn config(&self) -> &IndexConfig {
        &self.config
    }

    pub fn images(&self) -> &[IndexedImage] {
        &self.images
    }

    pub fn image(&self, image_id: &str) -> Option<&IndexedImage> {
        self.by_id.get(image_id).map(|&slot| &self.images[slot])
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Total number of indexed profiles.
    pub fn len(&self) -> usize {
        self.images.iter().map(|e| e.profiles.len()).sum()
    }

    /// Flat view of `(image_id, center_index, profile)` in index order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, usize, &Profile)> + '_ {
        self.images.iter().flat_map(|e| {
            e.profiles
                .iter()
                .map(move |p| (e.image.image_id.as_str(), p.center_index, p))
        })
    }

    /// Database keypoint at the matched center of `m`.
    pub fn match_keypoint(&self, m: &MatchResult) -> Option<&WordKeypoint> {
        self.image(&m.image_id)?.image.keypoints.get(m.db_center_index)
    }
}

/// Converts every image into its profiles. Images must have at least two
/// keypoints and share the configured codebook size.
pub fn build_index(images: &[ImageBoW], config: IndexConfig) -> Result<ProfileIndex> {
    let mut report = validate_corpus(images, config.codebook_size);
    report.empty_images.clear();
    report.into_result()?;
    if let Some(small) = images.iter().find(|i| i.len() < 2) {
        return Err(Error::ProfileUndefined {
            image_id: small.image_id.clone(),
            keypoints: small.len(),
        });
    }
    let mut entries = Vec::with_capacity(images.len());
    for image in images {
        if image.codebook_size != config.codebook_size {
            return Err(Error::Incompatible(format!(
                "image {:?} uses codebook size {}, index uses {}",
                image.image_id, image.codebook_size, config.codebook_size
            )));
        }
        entries.push(IndexedImage {
            image: image.clone(),
            profiles: build_all_profiles(image, config.n0)?,
        });
    }
    ProfileIndex::from_parts(config, entries)
}

/// Best-scoring (query profile, database profile) pair for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub image_id: String,
    pub query_center_index: usize,
    pub db_center_index: usize,
    pub score: f64,
}

/// Query ring stored densely so a database ring is scored by one pass over
/// its sparse entries.
struct DenseRing {
    counts: Vec<u32>,
    entries: Vec<(usize, u32)>,
    size: u32,
    sq_norm: u64,
}

impl DenseRing {
    fn new(ring: &RingHistogram, codebook_size: usize) -> Self {
        let mut counts = vec![0u32; codebook_size];
        let mut sq_norm = 0u64;
        for &(w, n) in ring.entries() {
            counts[w.index()] = n;
            sq_norm += u64::from(n) * u64::from(n);
        }
        DenseRing {
            counts,
            entries: ring.entries().iter().map(|&(w, n)| (w.index(), n)).collect(),
            size: ring.size(),
            sq_norm,
        }
    }

    /// Same value as `ring_similarity(measure, query_ring, other)`, bit for
    /// bit: both routes reduce to identical integer parts.
    #[inline]
    fn similarity(&self, other: &RingHistogram, measure: RingMeasure) -> f64 {
        match measure {
            RingMeasure::Jaccard => {
                let mut min_sum = 0u64;
                for &(w, n) in other.entries() {
                    min_sum += u64::from(n.min(self.counts[w.index()]));
                }
                let max_sum = u64::from(self.size) + u64::from(other.size()) - min_sum;
                jaccard_from_parts(min_sum, max_sum)
            }
            RingMeasure::Cosine => {
                let mut dot = 0u64;
                let mut sq = 0u64;
                for &(w, n) in other.entries() {
                    dot += u64::from(n) * u64::from(self.counts[w.index()]);
                    sq += u64::from(n) * u64::from(n);
                }
                cosine_from_parts(dot, self.sq_norm, sq)
            }
        }
    }

    /// Upper bound on the similarity with any ring of `other_size` keypoints
    /// drawn from an image with word counts `image`. Such a ring shares at
    /// most `Σ min(q_w, image_w)` words with this one.
    #[inline]
    fn bound(&self, image: &[u32], other_size: u32, measure: RingMeasure) -> f64 {
        match measure {
            RingMeasure::Jaccard => {
                let mut overlap = 0u64;
                for &(w, n) in &self.entries {
                    overlap += u64::from(n.min(image[w]));
                }
                let overlap = overlap.min(u64::from(self.size.min(other_size)));
                jaccard_from_parts(overlap, u64::from(self.size) + u64::from(other_size) - overlap)
            }
            RingMeasure::Cosine => 1.0,
        }
    }
}

/// Heap entry ordered so the heap's top is the weakest of the current top-k.
struct Ranked {
    score: f64,
}

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.score.total_cmp(&other.score) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        other.score.total_cmp(&self.score)
    }
}

fn query_profiles(query: &ImageBoW, index: &ProfileIndex) -> Result<Vec<Profile>> {
    if index.is_empty() {
        return Err(Error::EmptyIndex);
    }
    let config = index.config();
    if query.codebook_size != config.codebook_size {
        return Err(Error::Incompatible(format!(
            "query uses codebook size {}, index uses {}",
            query.codebook_size, config.codebook_size
        )));
    }
    if let Some(k) = query.keypoints.iter().find(|k| k.payload.0 >= config.codebook_size) {
        return Err(Error::Validation(format!(
            "query word {} outside codebook of size {}",
            k.payload, config.codebook_size
        )));
    }
    build_all_profiles(query, config.n0)
}

/// Ranks images by their best profile-pair similarity with the query using
/// the index's similarity settings.
pub fn query_topk_images(query: &ImageBoW, index: &ProfileIndex, k: usize) -> Result<Vec<MatchResult>> {
    query_topk_images_with(query, index, &index.config().similarity, k)
}

/// Ranks images by `max` over all (query profile, image profile) pairs of
/// the profile similarity. Images are ordered by descending score, then
/// ascending image id; within an image the reported pair is the first
/// maximum in (database center, query center) order. At most `k` images are
/// returned.
///
/// A pair is abandoned once its partial similarity plus an upper bound on
/// the remaining rings can neither beat the image's best pair so far nor
/// reach the current k-th best image score. The bound is exact in floating
/// point, so the output equals an exhaustive scan.
pub fn query_topk_images_with(
    query: &ImageBoW,
    index: &ProfileIndex,
    sim: &SimilarityConfig,
    k: usize,
) -> Result<Vec<MatchResult>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let qprofiles = query_profiles(query, index)?;
    let codebook_size = index.config().codebook_size as usize;
    let dense: Vec<Vec<DenseRing>> = qprofiles
        .iter()
        .map(|p| p.rings().iter().map(|r| DenseRing::new(r, codebook_size)).collect())
        .collect();
    let q_rings = qprofiles[0].ring_count();
    let max_rings = index
        .images()
        .iter()
        .map(IndexedImage::ring_count)
        .max()
        .unwrap_or(0)
        .max(q_rings);
    let weights = ring_weights(sim.lambda, max_rings);

    // Weighted per-ring bounds for every (image, query center), laid out as
    // bounds[slot][j * q_rings + r]. Images with the largest bound are
    // scanned first so the k-th best score rises early.
    let n_query = dense.len();
    let mut bounds: Vec<Vec<f64>> = Vec::with_capacity(index.images().len());
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(index.images().len());
    for (slot, entry) in index.images().iter().enumerate() {
        let common = q_rings.min(entry.ring_count());
        let histogram = &index.histograms[slot];
        let mut b = vec![0.0; n_query * q_rings];
        let mut image_ub = f64::NEG_INFINITY;
        for (j, q) in dense.iter().enumerate() {
            let row = &mut b[j * q_rings..j * q_rings + common];
            for (r, cell) in row.iter_mut().enumerate() {
                let size = entry.profiles[0].rings()[r].size();
                *cell = weights[r] * q[r].bound(histogram, size, sim.measure);
            }
            image_ub = image_ub.max(row.iter().fold(0.0, |a, &x| a + x));
        }
        bounds.push(b);
        order.push((image_ub, slot));
    }
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut top: BinaryHeap<Ranked> = BinaryHeap::with_capacity(k + 1);
    let mut results = Vec::with_capacity(k + 1);
    let mut row_ub = vec![0.0; n_query];

    for &(image_ub, slot) in &order {
        let threshold = if top.len() == k {
            top.peek().map_or(f64::NEG_INFINITY, |r| r.score)
        } else {
            f64::NEG_INFINITY
        };
        if image_ub < threshold {
            // bounds are sorted, so no later image can qualify either
            break;
        }
        let entry = &index.images()[slot];
        let common = q_rings.min(entry.ring_count());
        let b = &bounds[slot];
        for (j, ub) in row_ub.iter_mut().enumerate() {
            *ub = b[j * q_rings..j * q_rings + common].iter().fold(0.0, |a, &x| a + x);
        }

        let mut best = f64::NEG_INFINITY;
        let mut best_pair = (0usize, 0usize);
        for p in &entry.profiles {
            let rings = p.rings();
            'query: for (j, q) in dense.iter().enumerate() {
                if row_ub[j] <= best || row_ub[j] < threshold {
                    continue;
                }
                let tail = &b[j * q_rings..j * q_rings + common];
                let mut acc = 0.0;
                for r in 0..common {
                    if r > 0 {
                        let ub = tail[r..].iter().fold(acc, |a, &x| a + x);
                        if ub <= best || ub < threshold {
                            continue 'query;
                        }
                    }
                    acc += weights[r] * q[r].similarity(&rings[r], sim.measure);
                }
                if acc > best {
                    best = acc;
                    best_pair = (p.center_index, j);
                }
            }
        }

        if best > f64::NEG_INFINITY {
            top.push(Ranked { score: best });
            if top.len() > k {
                top.pop();
            }
            results.push(MatchResult {
                image_id: entry.image.image_id.clone(),
                query_center_index: best_pair.1,
                db_center_index: best_pair.0,
                score: best,
            });
        }
    }

    results.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.image_id.cmp(&b.image_id)));
    results.truncate(k);
    Ok(results)
}

/// The single highest-scoring (query profile, database profile) pair.
pub fn query_best_pair(query: &ImageBoW, index: &ProfileIndex) -> Result<MatchResult> {
    let mut top = query_topk_images(query, index, 1)?;
    Ok(top.pop().expect("non-empty index yields a best pair"))
}

/// A database profile ranked by distance to one query profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileMatch {
    pub image_id: String,
    pub center_index: usize,
    pub distance: f64,
}

/// The `k` database profiles nearest to `query` by profile distance, using
/// [`bounded_distance`] with the current k-th best distance as threshold.
/// Ties keep index order.
pub fn query_nearest_profiles(
    query: &Profile,
    index: &ProfileIndex,
    sim: &SimilarityConfig,
    k: usize,
) -> Result<Vec<ProfileMatch>> {
    if index.is_empty() {
        return Err(Error::EmptyIndex);
    }
    let mut best: Vec<(f64, usize, &str, usize)> = Vec::with_capacity(k + 1);
    for (order, (image_id, center, p)) in index.entries().enumerate() {
        let threshold = if best.len() == k {
            best.last().map_or(f64::INFINITY, |b| b.0)
        } else {
            f64::INFINITY
        };
        if let BoundedDistance::Within(d) = bounded_distance(query, p, sim, threshold)? {
            if best.len() == k && d >= threshold {
                continue;
            }
            let at = best.partition_point(|b| (b.0, b.1) <= (d, order));
            best.insert(at, (d, order, image_id, center));
            best.truncate(k);
        }
    }
    Ok(best
        .into_iter()
        .map(|(distance, _, image_id, center_index)| ProfileMatch {
            image_id: image_id.to_string(),
            center_index,
            distance,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::{profile_distance, profile_similarity, sim_max};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn config(n0: usize, codebook_size: u32) -> IndexConfig {
        IndexConfig {
            n0,
            codebook_size,
            similarity: SimilarityConfig::default(),
        }
    }

    fn random_image(id: &str, n: usize, codebook: u32, rng: &mut ChaCha8Rng) -> ImageBoW {
        ImageBoW::from_triples(
            id,
            codebook,
            (0..n)
                .map(|_| (rng.random_range(0.0..500.0), rng.random_range(0.0..500.0), rng.random_range(0..codebook)))
                .collect::<Vec<_>>(),
        )
    }

    /// Exhaustive double loop over all pairs with `profile_similarity`.
    fn exhaustive(query: &ImageBoW, index: &ProfileIndex, sim: &SimilarityConfig, k: usize) -> Vec<MatchResult> {
        let qp = build_all_profiles(query, index.config().n0).unwrap();
        let mut out = Vec::new();
        for e in index.images() {
            let mut best: Option<MatchResult> = None;
            for p in &e.profiles {
                for (j, q) in qp.iter().enumerate() {
                    let s = profile_similarity(q, p, sim).unwrap();
                    if best.as_ref().is_none_or(|b| s > b.score) {
                        best = Some(MatchResult {
                            image_id: e.image.image_id.clone(),
                            query_center_index: j,
                            db_center_index: p.center_index,
                            score: s,
                        });
                    }
                }
            }
            out.extend(best);
        }
        out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.image_id.cmp(&b.image_id)));
        out.truncate(k);
        out
    }

    #[test]
    fn index_counts_entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let images = vec![random_image("a", 10, 20, &mut rng), random_image("b", 10, 20, &mut rng)];
        let index = build_index(&images, config(3, 20)).unwrap();
        assert_eq!(index.len(), 20);
        assert_eq!(index.entries().count(), 20);
        let again = build_index(&images, config(3, 20)).unwrap();
        assert_eq!(index, again);
    }

    #[test]
    fn undersized_and_mismatched_images_are_rejected() {
        let tiny = ImageBoW::from_triples("tiny", 20, [(0.0, 0.0, 1)]);
        let ok = ImageBoW::from_triples("ok", 20, [(0.0, 0.0, 1), (1.0, 1.0, 2)]);
        let err = build_index(&[ok.clone(), tiny], config(3, 20)).unwrap_err();
        assert!(err.to_string().contains("tiny"), "{err}");
        let other = ImageBoW::from_triples("other", 30, [(0.0, 0.0, 1), (1.0, 1.0, 2)]);
        assert!(build_index(&[ok.clone(), other], config(3, 20)).is_err());
        assert!(build_index(&[ok.clone(), ok], config(3, 20)).is_err());
    }

    #[test]
    fn self_query_scores_sim_max_with_equal_centers() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let images: Vec<ImageBoW> = (0..5).map(|i| random_image(&format!("i{i}"), 30, 15, &mut rng)).collect();
        let index = build_index(&images, config(4, 15)).unwrap();
        for image in &images {
            let best = query_best_pair(image, &index).unwrap();
            assert_eq!(best.image_id, image.image_id);
            let m = index.image(&image.image_id).unwrap().ring_count();
            assert_eq!(best.score, sim_max(m, m, 1.0 / 3.0));
            assert_eq!(best.query_center_index, best.db_center_index);
        }
    }

    #[test]
    fn single_image_index() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let index = build_index(&[random_image("only", 12, 10, &mut rng)], config(2, 10)).unwrap();
        let q = random_image("q", 6, 10, &mut rng);
        assert_eq!(query_best_pair(&q, &index).unwrap().image_id, "only");
    }

    #[test]
    fn query_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let empty = ProfileIndex::from_parts(config(2, 10), vec![]).unwrap();
        let q = random_image("q", 6, 10, &mut rng);
        assert!(matches!(query_best_pair(&q, &empty), Err(Error::EmptyIndex)));
        let index = build_index(&[random_image("a", 8, 10, &mut rng)], config(2, 10)).unwrap();
        let lonely = ImageBoW::from_triples("q", 10, [(0.0, 0.0, 1)]);
        assert!(query_topk_images(&lonely, &index, 3).is_err());
        let wrong = random_image("q", 6, 11, &mut rng);
        assert!(matches!(query_topk_images(&wrong, &index, 3), Err(Error::Incompatible(_))));
        assert!(query_topk_images(&q, &index, 0).is_err());
    }

    #[test]
    fn pruned_topk_equals_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for round in 0..6 {
            let codebook = [8u32, 30, 100][round % 3];
            let images: Vec<ImageBoW> = (0..50)
                .map(|i| {
                    let n = rng.random_range(2..40);
                    random_image(&format!("img{:02}", (i * 7) % 50), n, codebook, &mut rng)
                })
                .collect();
            let index = build_index(&images, config(3, codebook)).unwrap();
            for measure in [RingMeasure::Jaccard, RingMeasure::Cosine] {
                let sim = SimilarityConfig::new(rng.random_range(0.1..1.5), measure).unwrap();
                let q = random_image("q", rng.random_range(2..25), codebook, &mut rng);
                for k in [1, 3, 10, 50, 80] {
                    let fast = query_topk_images_with(&q, &index, &sim, k).unwrap();
                    assert_eq!(fast, exhaustive(&q, &index, &sim, k), "round {round} k {k} {measure}");
                }
                let head = query_topk_images_with(&q, &index, &sim, 1).unwrap();
                assert_eq!(head.len(), 1);
            }
        }
    }

    #[test]
    fn topk_covers_each_image_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let images: Vec<ImageBoW> = (0..7).map(|i| random_image(&format!("x{i}"), 9, 5, &mut rng)).collect();
        let index = build_index(&images, config(2, 5)).unwrap();
        let q = random_image("q", 9, 5, &mut rng);
        let all = query_topk_images(&q, &index, 100).unwrap();
        let mut ids: Vec<&str> = all.iter().map(|m| m.image_id.as_str()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 7);
        assert_eq!(all[0], query_best_pair(&q, &index).unwrap());
    }

    #[test]
    fn translated_query_keeps_ranking() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let images: Vec<ImageBoW> = (0..10).map(|i| random_image(&format!("t{i}"), 25, 12, &mut rng)).collect();
        let index = build_index(&images, config(3, 12)).unwrap();
        let q = random_image("q", 15, 12, &mut rng);
        let shifted = ImageBoW::from_triples("q", 12, q.keypoints.iter().map(|k| (k.x + 250.0, k.y - 75.0, k.payload.0)));
        assert_eq!(query_topk_images(&q, &index, 10).unwrap(), query_topk_images(&shifted, &index, 10).unwrap());
    }

    #[test]
    fn nearest_profiles_with_bounded_distance_match_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let images: Vec<ImageBoW> = (0..20).map(|i| random_image(&format!("n{i:02}"), rng.random_range(2..30), 6, &mut rng)).collect();
        let index = build_index(&images, config(2, 6)).unwrap();
        let sim = SimilarityConfig::default();
        for _ in 0..10 {
            let q = random_image("q", rng.random_range(2..20), 6, &mut rng);
            let qp = build_all_profiles(&q, 2).unwrap();
            for k in [1, 5, 25] {
                let got = query_nearest_profiles(&qp[0], &index, &sim, k).unwrap();
                let mut all: Vec<(f64, usize, String, usize)> = index
                    .entries()
                    .enumerate()
                    .map(|(o, (id, c, p))| {
                        let prefixes = crate::similarity::distance_prefixes(&qp[0], p, &sim).unwrap();
                        (*prefixes.last().unwrap(), o, id.to_string(), c)
                    })
                    .collect();
                all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                all.truncate(k);
                let expected: Vec<(String, usize)> = all.iter().map(|a| (a.2.clone(), a.3)).collect();
                let actual: Vec<(String, usize)> = got.iter().map(|g| (g.image_id.clone(), g.center_index)).collect();
                assert_eq!(actual, expected);
                for (g, a) in got.iter().zip(&all) {
                    assert_eq!(g.distance, a.0);
                    let complement = profile_distance(&qp[0], index.image(&g.image_id).unwrap().profiles.get(g.center_index).unwrap(), &sim).unwrap();
                    assert!((g.distance - complement).abs() < 1e-12);
                }
            }
        }
    }
}
