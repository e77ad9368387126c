//! Synthetic corpora with known ground truth, and precision@k reporting
//! for profile search against orderless bag-of-words baselines.

mod report;
mod synth;
mod transform;

pub use report::{
    baseline_name, precision_at_k, run_report, Evaluator, MethodPrecision, PrecisionReport, MAX_K,
    PROFILE_METHOD,
};
pub use synth::{
    make_planted_corpus, plant, random_image, scatter_scenario, small_query_scenario, GroundTruth,
    PlantedCorpus, PlantedParams, ScatterScenario, SmallQueryScenario, TransformMix,
    KEYPOINT_DENSITY, SCENARIO_CODEBOOK_SIZE,
};
pub use transform::{apply_transform, TransformSpec};
