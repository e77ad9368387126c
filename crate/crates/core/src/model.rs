//! Domain types shared by every stage of the pipeline: descriptors, visual
//! words, keypoints and quantized images.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// Descriptor dimension produced by SIFT-style extractors.
pub const DEFAULT_DESCRIPTOR_DIM: usize = 128;

/// Cluster symbol assigned to a descriptor by a codebook.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VisualWord(pub u32);

impl VisualWord {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VisualWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A local feature vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor(Vec<f32>);

impl Descriptor {
    pub fn new(values: Vec<f32>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "descriptor entry {i} is not finite"
            )));
        }
        Ok(Descriptor(values))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f32> {
        self.0
    }
}

/// An interest point in image coordinates carrying either a raw descriptor
/// or the visual word it was quantized to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint<P> {
    pub x: f64,
    pub y: f64,
    pub payload: P,
}

pub type WordKeypoint = Keypoint<VisualWord>;
pub type RawKeypoint = Keypoint<Descriptor>;

impl<P> Keypoint<P> {
    pub fn new(x: f64, y: f64, payload: P) -> Self {
        Keypoint { x, y, payload }
    }

    #[inline]
    pub fn squared_distance_to<Q>(&self, other: &Keypoint<Q>) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

impl WordKeypoint {
    #[inline]
    pub fn word(&self) -> VisualWord {
        self.payload
    }
}

/// An image reduced to its quantized keypoints, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBoW {
    pub image_id: String,
    pub codebook_size: u32,
    pub keypoints: Vec<WordKeypoint>,
}

impl ImageBoW {
    pub fn new(
        image_id: impl Into<String>,
        codebook_size: u32,
        keypoints: Vec<WordKeypoint>,
    ) -> Self {
        ImageBoW {
            image_id: image_id.into(),
            codebook_size,
            keypoints,
        }
    }

    /// Builds an image from `(x, y, word)` triples.
    pub fn from_triples(
        image_id: impl Into<String>,
        codebook_size: u32,
        triples: impl IntoIterator<Item = (f64, f64, u32)>,
    ) -> Self {
        let keypoints = triples
            .into_iter()
            .map(|(x, y, w)| Keypoint::new(x, y, VisualWord(w)))
            .collect();
        ImageBoW::new(image_id, codebook_size, keypoints)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.keypoints.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.keypoints.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = VisualWord> + '_ {
        self.keypoints.iter().map(|k| k.payload)
    }

    /// Axis-aligned bounding box `(x_min, y_min, x_max, y_max)`, or `None`
    /// for an image without keypoints.
    pub fn extent(&self) -> Option<(f64, f64, f64, f64)> {
        let first = self.keypoints.first()?;
        let init = (first.x, first.y, first.x, first.y);
        Some(self.keypoints.iter().fold(init, |(x0, y0, x1, y1), k| {
            (x0.min(k.x), y0.min(k.y), x1.max(k.x), y1.max(k.y))
        }))
    }

    /// Keeps the keypoints inside the closed box, preserving order.
    pub fn crop(&self, x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> ImageBoW {
        let keypoints = self
            .keypoints
            .iter()
            .filter(|k| k.x >= x_min && k.x <= x_max && k.y >= y_min && k.y <= y_max)
            .cloned()
            .collect();
        ImageBoW::new(self.image_id.clone(), self.codebook_size, keypoints)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutOfRangeWord {
    pub image_id: String,
    pub keypoint_index: usize,
    pub word: VisualWord,
}

/// Findings of [`validate_corpus`]; the corpus passes iff every list is empty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub duplicate_ids: Vec<String>,
    pub out_of_range: Vec<OutOfRangeWord>,
    pub empty_images: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.duplicate_ids.is_empty() && self.out_of_range.is_empty() && self.empty_images.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            Err(Error::Validation(self.to_string()))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "ok");
        }
        let mut parts = Vec::new();
        if !self.duplicate_ids.is_empty() {
            parts.push(format!("duplicate image ids: {}", self.duplicate_ids.join(", ")));
        }
        if !self.out_of_range.is_empty() {
            let items: Vec<String> = self
                .out_of_range
                .iter()
                .map(|o| format!("{}[{}]={}", o.image_id, o.keypoint_index, o.word))
                .collect();
            parts.push(format!("out-of-range words: {}", items.join(", ")));
        }
        if !self.empty_images.is_empty() {
            parts.push(format!("images without keypoints: {}", self.empty_images.join(", ")));
        }
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks a corpus for duplicate ids, words outside `[0, codebook_size)` and
/// images without keypoints.
pub fn validate_corpus(images: &[ImageBoW], codebook_size: u32) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut seen = HashSet::new();
    for image in images {
        if !seen.insert(image.image_id.as_str())
            && !report.duplicate_ids.contains(&image.image_id)
        {
            report.duplicate_ids.push(image.image_id.clone());
        }
        if image.is_empty() {
            report.empty_images.push(image.image_id.clone());
        }
        for (i, k) in image.keypoints.iter().enumerate() {
            if k.payload.0 >= codebook_size {
                report.out_of_range.push(OutOfRangeWord {
                    image_id: image.image_id.clone(),
                    keypoint_index: i,
                    word: k.payload,
                });
            }
        }
    }
    report
}
