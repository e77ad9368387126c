//! Sub-image similarity search over images represented as bags of visual
//! words with keypoint coordinates.
//!
//! Every keypoint is summarized by a *profile*: histograms of the visual
//! words of its nearest neighbors, grouped into rings of doubling size.
//! Two images are compared through their best matching pair of profiles,
//! which makes the score invariant to translation, rotation and scale and
//! lets a small query match a region of a much larger image.

pub mod codebook;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod format;
pub mod model;
pub mod profile;
pub mod search;
pub mod similarity;

pub use codebook::{assign_word, build_codebook, kmeans_once, quantize_image, Codebook};
pub use config::EngineConfig;
pub use error::{Error, Result};
pub use model::{Descriptor, ImageBoW, Keypoint, RawKeypoint, VisualWord, WordKeypoint};
pub use profile::{build_all_profiles, build_profile, ring_sizes, Profile, RingHistogram};
pub use search::{build_index, query_best_pair, query_topk_images, MatchResult, ProfileIndex};
pub use similarity::{profile_distance, profile_similarity, RingMeasure, SimilarityConfig};
