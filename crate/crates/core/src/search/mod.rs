//! Single-phase sub-image search over keypoint profiles, and the orderless
//! bag-of-words baselines it is compared against.

mod bow;
mod index;

pub use bow::{
    bow_histogram, bow_search, tfidf_weights, BoWRanking, BowIndex, BowMeasure, Weighting,
};
pub use index::{
    build_index, query_best_pair, query_nearest_profiles, query_topk_images,
    query_topk_images_with, IndexConfig, IndexedImage, MatchResult, ProfileIndex, ProfileMatch,
};
