//! Command-line driver and HTTP service around `pbsearch_core`.

pub mod commands;
pub mod service;

use pbsearch_core::search::{query_topk_images_with, ProfileIndex};
use pbsearch_core::{ImageBoW, Result, SimilarityConfig};

/// One ranked search result with the coordinates of the matched pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    pub rank: usize,
    pub image_id: String,
    pub score: f64,
    pub query_center: (f64, f64),
    pub match_center: (f64, f64),
}

/// Scores rendered with six decimals; ranking uses full precision.
pub fn format_score(score: f64) -> String {
    format!("{score:.6}")
}

/// Top-`k` images for `query`, shared by the `query` command and the
/// `/query` endpoint.
pub fn search_hits(index: &ProfileIndex, query: &ImageBoW, sim: &SimilarityConfig, k: usize) -> Result<Vec<Hit>> {
    let matches = query_topk_images_with(query, index, sim, k)?;
    Ok(matches
        .into_iter()
        .enumerate()
        .map(|(i, m)| {
            let q = query.keypoints[m.query_center_index];
            let db = index
                .match_keypoint(&m)
                .expect("match refers to an indexed keypoint");
            Hit {
                rank: i + 1,
                image_id: m.image_id,
                score: m.score,
                query_center: (q.x, q.y),
                match_center: (db.x, db.y),
            }
        })
        .collect())
}
