//! Ring-histogram similarity and the exponentially decayed profile
//! similarity/distance built from it.
//!
//! Ring `k` (0-based) of a profile pair contributes `exp(-λ·k) · S_k`, so the
//! innermost ring has weight 1. Only the rings both profiles have are
//! compared. The distance is the complement `Σ exp(-λ·k) · (1 - S_k)`; since
//! every term is non-negative its prefix sums grow monotonically, which is
//! what makes early abandoning sound.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::profile::{Profile, RingHistogram};

pub const DEFAULT_LAMBDA: f64 = 1.0 / 3.0;

/// Similarity measure applied to corresponding ring histograms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RingMeasure {
    #[default]
    Jaccard,
    Cosine,
}

impl fmt::Display for RingMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RingMeasure::Jaccard => "jaccard",
            RingMeasure::Cosine => "cosine",
        })
    }
}

impl FromStr for RingMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jaccard" => Ok(RingMeasure::Jaccard),
            "cosine" => Ok(RingMeasure::Cosine),
            other => Err(Error::InvalidParameter(format!("unknown ring measure {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityConfig {
    pub lambda: f64,
    pub measure: RingMeasure,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig {
            lambda: DEFAULT_LAMBDA,
            measure: RingMeasure::Jaccard,
        }
    }
}

impl SimilarityConfig {
    pub fn new(lambda: f64, measure: RingMeasure) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(SimilarityConfig { lambda, measure })
    }
}

/// `Σmin / Σmax` from its integer parts; 1 when both histograms are empty.
#[inline]
pub(crate) fn jaccard_from_parts(min_sum: u64, max_sum: u64) -> f64 {
    if max_sum == 0 {
        1.0
    } else {
        min_sum as f64 / max_sum as f64
    }
}

/// Cosine of two count vectors from the dot product and squared norms; 0 when
/// either vector is empty.
#[inline]
pub(crate) fn cosine_from_parts(dot: u64, sq1: u64, sq2: u64) -> f64 {
    if sq1 == 0 || sq2 == 0 {
        0.0
    } else {
        (dot as f64 / (sq1 as f64 * sq2 as f64).sqrt()).min(1.0)
    }
}

/// Generalized (multiset) Jaccard coefficient `Σ_w min / Σ_w max`.
pub fn jaccard_similarity(h1: &RingHistogram, h2: &RingHistogram) -> f64 {
    let (a, b) = (h1.entries(), h2.entries());
    let (mut i, mut j) = (0, 0);
    let mut min_sum = 0u64;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                min_sum += u64::from(a[i].1.min(b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    let max_sum = u64::from(h1.size()) + u64::from(h2.size()) - min_sum;
    jaccard_from_parts(min_sum, max_sum)
}

/// Cosine similarity over raw counts.
pub fn cosine_similarity(h1: &RingHistogram, h2: &RingHistogram) -> f64 {
    let (a, b) = (h1.entries(), h2.entries());
    let (mut i, mut j) = (0, 0);
    let mut dot = 0u64;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                dot += u64::from(a[i].1) * u64::from(b[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    let sq = |h: &[(_, u32)]| h.iter().map(|&(_, n)| u64::from(n) * u64::from(n)).sum();
    cosine_from_parts(dot, sq(a), sq(b))
}

#[inline]
pub fn ring_similarity(measure: RingMeasure, h1: &RingHistogram, h2: &RingHistogram) -> f64 {
    match measure {
        RingMeasure::Jaccard => jaccard_similarity(h1, h2),
        RingMeasure::Cosine => cosine_similarity(h1, h2),
    }
}

/// Weight of ring `k` (0-based): `exp(-λ·k)`.
#[inline]
pub fn ring_weight(lambda: f64, k: usize) -> f64 {
    (-lambda * k as f64).exp()
}

pub fn ring_weights(lambda: f64, m: usize) -> Vec<f64> {
    (0..m).map(|k| ring_weight(lambda, k)).collect()
}

/// Largest attainable profile similarity: the decayed sum over `min(m, n)`
/// rings with every ring similarity equal to 1.
pub fn sim_max(m: usize, n: usize, lambda: f64) -> f64 {
    (0..m.min(n)).fold(0.0, |acc, k| acc + ring_weight(lambda, k))
}

pub(crate) fn check_compatible(h1: &Profile, h2: &Profile) -> Result<()> {
    if h1.n0 != h2.n0 {
        return Err(Error::Incompatible(format!(
            "n0 differs ({} vs {})",
            h1.n0, h2.n0
        )));
    }
    if h1.codebook_size != h2.codebook_size {
        return Err(Error::Incompatible(format!(
            "codebook size differs ({} vs {})",
            h1.codebook_size, h2.codebook_size
        )));
    }
    Ok(())
}

/// Per-ring similarities `S_k` over the common rings.
pub fn ring_similarities(h1: &Profile, h2: &Profile, measure: RingMeasure) -> Vec<f64> {
    h1.rings()
        .iter()
        .zip(h2.rings())
        .map(|(a, b)| ring_similarity(measure, a, b))
        .collect()
}

pub(crate) fn profile_similarity_unchecked(h1: &Profile, h2: &Profile, cfg: &SimilarityConfig) -> f64 {
    h1.rings()
        .iter()
        .zip(h2.rings())
        .enumerate()
        .fold(0.0, |acc, (k, (a, b))| {
            acc + ring_weight(cfg.lambda, k) * ring_similarity(cfg.measure, a, b)
        })
}

/// `Σ_{k < min(m, n)} exp(-λ·k) · S_k`; extra rings of the longer profile
/// are ignored.
pub fn profile_similarity(h1: &Profile, h2: &Profile, cfg: &SimilarityConfig) -> Result<f64> {
    check_compatible(h1, h2)?;
    Ok(profile_similarity_unchecked(h1, h2, cfg))
}

/// Complement of the similarity: `sim_max(m, n, λ) - Sim(H1, H2)`.
pub fn profile_distance(h1: &Profile, h2: &Profile, cfg: &SimilarityConfig) -> Result<f64> {
    let sim = profile_similarity(h1, h2, cfg)?;
    Ok(sim_max(h1.ring_count(), h2.ring_count(), cfg.lambda) - sim)
}

/// Running distances `D_1, ..., D_min(m, n)` where `D_l` sums the first `l`
/// terms `exp(-λ·k) · (1 - S_k)`. The last entry is the full distance.
pub fn distance_prefixes(h1: &Profile, h2: &Profile, cfg: &SimilarityConfig) -> Result<Vec<f64>> {
    check_compatible(h1, h2)?;
    let mut acc = 0.0;
    Ok(h1
        .rings()
        .iter()
        .zip(h2.rings())
        .enumerate()
        .map(|(k, (a, b))| {
            acc += ring_weight(cfg.lambda, k) * (1.0 - ring_similarity(cfg.measure, a, b));
            acc
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundedDistance {
    /// The full distance, computed ring by ring.
    Within(f64),
    /// The running distance passed the threshold after `rings` rings.
    Exceeded { rings: usize, partial: f64 },
}

impl BoundedDistance {
    pub fn value(self) -> Option<f64> {
        match self {
            BoundedDistance::Within(d) => Some(d),
            BoundedDistance::Exceeded { .. } => None,
        }
    }
}

/// Evaluates the distance ring by ring and stops as soon as the running sum
/// exceeds `threshold`. Remaining terms are non-negative, so an abandoned
/// pair is guaranteed to be farther than `threshold`.
pub fn bounded_distance(
    h1: &Profile,
    h2: &Profile,
    cfg: &SimilarityConfig,
    threshold: f64,
) -> Result<BoundedDistance> {
    check_compatible(h1, h2)?;
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "threshold must be non-negative, got {threshold}"
        )));
    }
    let mut acc = 0.0;
    for (k, (a, b)) in h1.rings().iter().zip(h2.rings()).enumerate() {
        acc += ring_weight(cfg.lambda, k) * (1.0 - ring_similarity(cfg.measure, a, b));
        if acc > threshold {
            return Ok(BoundedDistance::Exceeded {
                rings: k + 1,
                partial: acc,
            });
        }
    }
    Ok(BoundedDistance::Within(acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VisualWord;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn hist(pairs: &[(u32, u32)]) -> RingHistogram {
        RingHistogram::from_counts(pairs.iter().map(|&(w, n)| (VisualWord(w), n)).collect()).unwrap()
    }

    /// Profile with ring sizes following n0 = 1; histograms chosen by caller
    /// must have sizes 1, 2, 4, ...
    fn profile(rings: Vec<RingHistogram>) -> Profile {
        Profile::from_rings(Arc::from("p"), 0, 1, 1000, rings).unwrap()
    }

    fn random_ring(size: u32, words: &[u32], pick: &mut impl FnMut() -> usize) -> RingHistogram {
        RingHistogram::from_words((0..size).map(|_| VisualWord(words[pick() % words.len()])))
    }

    #[test]
    fn jaccard_examples() {
        let h = hist(&[(1, 2), (5, 1)]);
        assert_eq!(jaccard_similarity(&h, &h), 1.0);
        assert_eq!(jaccard_similarity(&hist(&[(1, 1)]), &hist(&[(2, 3)])), 0.0);
        // a=0, b=1, c=2: Σmin = 1, Σmax = 2 + 1 + 1
        assert_eq!(jaccard_similarity(&hist(&[(0, 2), (1, 1)]), &hist(&[(0, 1), (2, 1)])), 0.25);
        let empty = RingHistogram::default();
        assert_eq!(jaccard_similarity(&empty, &empty), 1.0);
        assert_eq!(jaccard_similarity(&empty, &h), 0.0);
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_similarity(&hist(&[(0, 1)]), &hist(&[(0, 1)])), 1.0);
        assert_eq!(cosine_similarity(&hist(&[(0, 1)]), &hist(&[(1, 1)])), 0.0);
        let v = cosine_similarity(&hist(&[(0, 1), (1, 1)]), &hist(&[(0, 1)]));
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let empty = RingHistogram::default();
        assert_eq!(cosine_similarity(&empty, &empty), 0.0);
        let h = hist(&[(3, 7), (9, 2), (11, 5)]);
        assert_eq!(cosine_similarity(&h, &h), 1.0);
    }

    fn three_ring_profile() -> Profile {
        profile(vec![hist(&[(1, 1)]), hist(&[(2, 1), (3, 1)]), hist(&[(4, 2), (5, 2)])])
    }

    #[test]
    fn self_similarity_is_closed_form() {
        let p = three_ring_profile();
        let cfg = SimilarityConfig::default();
        let closed = 1.0 + (-1.0f64 / 3.0).exp() + (-2.0f64 / 3.0).exp();
        let s = profile_similarity(&p, &p, &cfg).unwrap();
        assert!((s - closed).abs() < 1e-12);
        assert!((s - 2.229948).abs() < 1e-6);
        assert_eq!(s, sim_max(3, 3, cfg.lambda));
        assert_eq!(profile_distance(&p, &p, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn disjoint_rings_score_zero() {
        let a = three_ring_profile();
        let b = profile(vec![hist(&[(10, 1)]), hist(&[(20, 2)]), hist(&[(30, 4)])]);
        let cfg = SimilarityConfig::default();
        assert_eq!(profile_similarity(&a, &b, &cfg).unwrap(), 0.0);
        assert_eq!(profile_distance(&a, &b, &cfg).unwrap(), sim_max(3, 3, cfg.lambda));
    }

    #[test]
    fn longer_profile_is_truncated() {
        let short = three_ring_profile();
        let mut rings = short.rings().to_vec();
        rings.push(hist(&[(7, 8)]));
        rings.push(hist(&[(8, 16)]));
        let long = profile(rings);
        let cfg = SimilarityConfig::default();
        let s = profile_similarity(&short, &long, &cfg).unwrap();
        assert_eq!(s, profile_similarity(&short, &short, &cfg).unwrap());
        assert_eq!(sim_max(3, 5, cfg.lambda), sim_max(5, 3, cfg.lambda));
    }

    #[test]
    fn sim_max_matches_geometric_closed_form() {
        assert_eq!(sim_max(1, 1, 0.7), 1.0);
        for lambda in [0.1f64, 1.0 / 3.0, 0.5, 1.0, 2.5] {
            for m in 1..12 {
                let q = (-lambda).exp();
                let closed = (1.0 - q.powi(m as i32)) / (1.0 - q);
                assert!((sim_max(m, m + 3, lambda) - closed).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mismatched_profiles_are_rejected() {
        let a = three_ring_profile();
        let b = Profile::from_rings(Arc::from("q"), 0, 1, 999, a.rings().to_vec()).unwrap();
        assert!(matches!(profile_similarity(&a, &b, &SimilarityConfig::default()), Err(Error::Incompatible(_))));
        let c = Profile::from_rings(Arc::from("q"), 0, 2, 1000, vec![hist(&[(1, 2)])]).unwrap();
        assert!(profile_distance(&a, &c, &SimilarityConfig::default()).is_err());
        assert!(SimilarityConfig::new(0.0, RingMeasure::Jaccard).is_err());
        assert!(SimilarityConfig::new(-1.0, RingMeasure::Jaccard).is_err());
    }

    #[test]
    fn bounded_distance_edges() {
        let p = three_ring_profile();
        let cfg = SimilarityConfig::default();
        assert_eq!(bounded_distance(&p, &p, &cfg, 0.0).unwrap(), BoundedDistance::Within(0.0));
        let q = profile(vec![hist(&[(1, 1)]), hist(&[(9, 2)]), hist(&[(4, 2), (5, 2)])]);
        let exact = *distance_prefixes(&p, &q, &cfg).unwrap().last().unwrap();
        assert_eq!(bounded_distance(&p, &q, &cfg, f64::INFINITY).unwrap(), BoundedDistance::Within(exact));
        assert!(matches!(
            bounded_distance(&p, &q, &cfg, 0.1).unwrap(),
            BoundedDistance::Exceeded { rings: 2, .. }
        ));
        assert!(bounded_distance(&p, &q, &cfg, -1.0).is_err());
    }

    #[test]
    fn measure_parses() {
        assert_eq!("Cosine".parse::<RingMeasure>().unwrap(), RingMeasure::Cosine);
        assert!("l2".parse::<RingMeasure>().is_err());
        assert_eq!(RingMeasure::Jaccard.to_string(), "jaccard");
    }

    fn arb_profile() -> impl Strategy<Value = Profile> {
        (1usize..5, any::<u64>()).prop_map(|(m, seed)| {
            let mut state = seed | 1;
            let mut pick = move || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                state as usize
            };
            let words = [0u32, 1, 2, 3, 4, 5];
            let rings = (0..m).map(|k| random_ring(1 << k, &words, &mut pick)).collect();
            profile(rings)
        })
    }

    proptest! {
        #[test]
        fn symmetry_and_bounds(a in arb_profile(), b in arb_profile(), lambda in 0.05f64..3.0, cosine in any::<bool>()) {
            let measure = if cosine { RingMeasure::Cosine } else { RingMeasure::Jaccard };
            let cfg = SimilarityConfig::new(lambda, measure).unwrap();
            let ab = profile_similarity(&a, &b, &cfg).unwrap();
            let ba = profile_similarity(&b, &a, &cfg).unwrap();
            prop_assert_eq!(ab, ba);
            let max = sim_max(a.ring_count(), b.ring_count(), lambda);
            prop_assert!((0.0..=max).contains(&ab));
            let d = profile_distance(&a, &b, &cfg).unwrap();
            prop_assert_eq!(d, profile_distance(&b, &a, &cfg).unwrap());
            prop_assert!(d >= 0.0 && d <= max);
            for s in ring_similarities(&a, &b, measure) {
                prop_assert!((0.0..=1.0).contains(&s));
            }
            prop_assert_eq!(profile_similarity(&a, &a, &cfg).unwrap(), sim_max(a.ring_count(), a.ring_count(), lambda));
        }

        #[test]
        fn recurrence_agrees_with_complement(a in arb_profile(), b in arb_profile(), lambda in 0.05f64..3.0) {
            let cfg = SimilarityConfig::new(lambda, RingMeasure::Jaccard).unwrap();
            let prefixes = distance_prefixes(&a, &b, &cfg).unwrap();
            let direct = *prefixes.last().unwrap();
            prop_assert!((direct - profile_distance(&a, &b, &cfg).unwrap()).abs() < 1e-12);
            for w in prefixes.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
        }

        #[test]
        fn bounded_agrees_with_unbounded(a in arb_profile(), b in arb_profile(), t in 0.0f64..3.0) {
            let cfg = SimilarityConfig::default();
            let exact = *distance_prefixes(&a, &b, &cfg).unwrap().last().unwrap();
            match bounded_distance(&a, &b, &cfg, t).unwrap() {
                BoundedDistance::Within(d) => {
                    prop_assert_eq!(d, exact);
                    prop_assert!(d <= t);
                }
                BoundedDistance::Exceeded { partial, .. } => {
                    prop_assert!(exact > t);
                    prop_assert!(partial <= exact);
                }
            }
        }

        #[test]
        fn decay_dominance(a in arb_profile(), b in arb_profile(), lambda in 0.05f64..3.0) {
            let sims = ring_similarities(&a, &b, RingMeasure::Jaccard);
            for (k, s) in sims.iter().enumerate().skip(1) {
                let contribution = ring_weight(lambda, k) * s;
                let prev_max = ring_weight(lambda, k - 1);
                prop_assert!(contribution <= (-lambda).exp() * prev_max * (1.0 + 1e-15));
            }
        }

        #[test]
        fn jaccard_is_one_iff_equal(a in arb_profile(), b in arb_profile()) {
            for (ha, hb) in a.rings().iter().zip(b.rings()) {
                prop_assert_eq!(jaccard_similarity(ha, hb) == 1.0, ha == hb);
            }
        }
    }
}
