//! Concentric keypoint profiles.
//!
//! The profile of a keypoint orders every other keypoint of the image by
//! distance and cuts that order into rings holding `n0, 2·n0, 4·n0, ...`
//! keypoints (the last ring takes the remainder). Each ring is summarized by
//! the histogram of its visual words. Ring boundaries are defined by counts,
//! not radii, so the profile depends only on the distance order and is
//! unchanged by rotation, uniform scaling and translation of the image.

use std::f64::consts::TAU;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{ImageBoW, VisualWord};

pub const DEFAULT_N0: usize = 50;

/// Word counts of the keypoints in one ring, sorted by word.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RingHistogram {
    entries: Vec<(VisualWord, u32)>,
    size: u32,
}

impl RingHistogram {
    pub fn from_words(words: impl IntoIterator<Item = VisualWord>) -> Self {
        let mut words: Vec<VisualWord> = words.into_iter().collect();
        words.sort_unstable();
        let mut entries: Vec<(VisualWord, u32)> = Vec::new();
        for w in &words {
            match entries.last_mut() {
                Some((last, n)) if last == w => *n += 1,
                _ => entries.push((*w, 1)),
            }
        }
        RingHistogram {
            entries,
            size: words.len() as u32,
        }
    }

    /// Builds a histogram from `(word, count)` pairs that must be strictly
    /// increasing in word with positive counts.
    pub fn from_counts(entries: Vec<(VisualWord, u32)>) -> Result<Self> {
        if entries.iter().any(|&(_, n)| n == 0) {
            return Err(Error::Validation("ring histogram count must be positive".into()));
        }
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Validation(
                "ring histogram words must be strictly increasing".into(),
            ));
        }
        let size = entries.iter().map(|&(_, n)| n).sum();
        Ok(RingHistogram { entries, size })
    }

    #[inline]
    pub fn size(&self) -> u32 {
        self.size
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    #[inline]
    pub fn entries(&self) -> &[(VisualWord, u32)] {
        &self.entries
    }

    pub fn count(&self, word: VisualWord) -> u32 {
        self.entries
            .binary_search_by_key(&word, |&(w, _)| w)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }
}

/// Ring histograms around one keypoint, innermost first.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub image_id: Arc<str>,
    pub center_index: usize,
    pub n0: usize,
    pub codebook_size: u32,
    rings: Vec<RingHistogram>,
}

impl Profile {
    /// Assembles a profile from parts, checking ring sizes against `n0`.
    pub fn from_rings(
        image_id: Arc<str>,
        center_index: usize,
        n0: usize,
        codebook_size: u32,
        rings: Vec<RingHistogram>,
    ) -> Result<Self> {
        let total: usize = rings.iter().map(|r| r.size() as usize).sum();
        let expected = ring_sizes(total, n0)?;
        let actual: Vec<usize> = rings.iter().map(|r| r.size() as usize).collect();
        if expected != actual {
            return Err(Error::Validation(format!(
                "ring sizes {actual:?} do not follow n0 = {n0} (expected {expected:?})"
            )));
        }
        if let Some(&(w, _)) = rings
            .iter()
            .flat_map(|r| r.entries())
            .find(|(w, _)| w.0 >= codebook_size)
        {
            return Err(Error::Validation(format!(
                "word {w} outside codebook of size {codebook_size}"
            )));
        }
        Ok(Profile {
            image_id,
            center_index,
            n0,
            codebook_size,
            rings,
        })
    }

    #[inline]
    pub fn rings(&self) -> &[RingHistogram] {
        &self.rings
    }

    #[inline]
    pub fn ring_count(&self) -> usize {
        self.rings.len()
    }

    /// Number of keypoints summarized, i.e. image keypoint count minus one.
    pub fn total_size(&self) -> usize {
        self.rings.iter().map(|r| r.size() as usize).sum()
    }
}

/// Ring sizes `[n0, 2·n0, 4·n0, ...]` with the last entry truncated so the
/// sizes sum to `n_other`. Empty iff `n_other == 0`.
pub fn ring_sizes(n_other: usize, n0: usize) -> Result<Vec<usize>> {
    if n0 == 0 {
        return Err(Error::InvalidRingSize);
    }
    let mut sizes = Vec::new();
    let mut remaining = n_other;
    let mut next = n0;
    while remaining > 0 {
        let take = next.min(remaining);
        sizes.push(take);
        remaining -= take;
        next = next.saturating_mul(2);
    }
    Ok(sizes)
}

/// Counter-clockwise angle of `(dx, dy)` from the positive x-axis in `[0, 2π)`.
fn polar_angle(dx: f64, dy: f64) -> f64 {
    let a = dy.atan2(dx);
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

/// Indices of all keypoints except `center`, sorted by (distance, angle,
/// index).
pub(crate) fn neighbor_order(image: &ImageBoW, center: usize) -> Vec<usize> {
    let c = &image.keypoints[center];
    let mut order: Vec<(f64, usize)> = image
        .keypoints
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != center)
        .map(|(i, k)| (c.squared_distance_to(k), i))
        .collect();
    order.sort_unstable_by(|a, b| {
        a.0.total_cmp(&b.0).then_with(|| {
            let ka = &image.keypoints[a.1];
            let kb = &image.keypoints[b.1];
            polar_angle(ka.x - c.x, ka.y - c.y)
                .total_cmp(&polar_angle(kb.x - c.x, kb.y - c.y))
                .then(a.1.cmp(&b.1))
        })
    });
    order.into_iter().map(|(_, i)| i).collect()
}

fn check_image(image: &ImageBoW, n0: usize) -> Result<()> {
    if n0 == 0 {
        return Err(Error::InvalidRingSize);
    }
    if image.len() < 2 {
        return Err(Error::ProfileUndefined {
            image_id: image.image_id.clone(),
            keypoints: image.len(),
        });
    }
    Ok(())
}

fn profile_from_order(
    image: &ImageBoW,
    image_id: &Arc<str>,
    center_index: usize,
    order: &[usize],
    sizes: &[usize],
    n0: usize,
) -> Profile {
    let mut rings = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for &size in sizes {
        let slice = &order[start..start + size];
        rings.push(RingHistogram::from_words(
            slice.iter().map(|&i| image.keypoints[i].payload),
        ));
        start += size;
    }
    Profile {
        image_id: Arc::clone(image_id),
        center_index,
        n0,
        codebook_size: image.codebook_size,
        rings,
    }
}

/// Profile of keypoint `center_index`. The center itself is excluded from
/// its rings.
pub fn build_profile(image: &ImageBoW, center_index: usize, n0: usize) -> Result<Profile> {
    check_image(image, n0)?;
    if center_index >= image.len() {
        return Err(Error::InvalidParameter(format!(
            "center index {center_index} out of range for {} keypoints",
            image.len()
        )));
    }
    let sizes = ring_sizes(image.len() - 1, n0)?;
    let order = neighbor_order(image, center_index);
    let id: Arc<str> = Arc::from(image.image_id.as_str());
    Ok(profile_from_order(image, &id, center_index, &order, &sizes, n0))
}

/// One profile per keypoint, in keypoint order. All share the same ring
/// count.
pub fn build_all_profiles(image: &ImageBoW, n0: usize) -> Result<Vec<Profile>> {
    check_image(image, n0)?;
    let sizes = ring_sizes(image.len() - 1, n0)?;
    let id: Arc<str> = Arc::from(image.image_id.as_str());
    Ok((0..image.len())
        .map(|c| {
            let order = neighbor_order(image, c);
            profile_from_order(image, &id, c, &order, &sizes, n0)
        })
        .collect())
}

/// True when, for every center, the distances to the other keypoints are
/// non-zero and pairwise separated by more than `rel_gap` (relative). Under
/// this condition rounding in a rotated or scaled copy cannot reorder rings.
pub fn is_generic_position(image: &ImageBoW, rel_gap: f64) -> bool {
    let n = image.len();
    let mut dists = Vec::with_capacity(n);
    for c in 0..n {
        let center = &image.keypoints[c];
        dists.clear();
        dists.extend(
            image
                .keypoints
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != c)
                .map(|(_, k)| center.squared_distance_to(k).sqrt()),
        );
        dists.sort_unstable_by(f64::total_cmp);
        if dists.first().is_some_and(|&d| d == 0.0) {
            return false;
        }
        if dists
            .windows(2)
            .any(|w| w[1] - w[0] <= rel_gap * w[1])
        {
            return false;
        }
    }
    true
}
