use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::synth::GroundTruth;
use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::model::ImageBoW;
use crate::search::{build_index, query_topk_images_with, BowIndex, BowMeasure, ProfileIndex, Weighting};
use crate::similarity::SimilarityConfig;

/// Largest cut-off reported; precision is given for every k in `1..=MAX_K`.
pub const MAX_K: usize = 10;

pub const PROFILE_METHOD: &str = "profile";

/// `|top-k ∩ relevant| / k`; missing results count as misses.
pub fn precision_at_k<S: AsRef<str>>(ranking: &[S], relevant: &BTreeSet<String>, k: usize) -> f64 {
    assert!(k >= 1, "precision@k needs k >= 1");
    let hits = ranking
        .iter()
        .take(k)
        .filter(|id| relevant.contains(id.as_ref()))
        .count();
    hits as f64 / k as f64
}

/// Mean precision over all queries for one retrieval method.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodPrecision {
    pub method: String,
    /// Entry `i` is mean precision@(i + 1).
    pub precision: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionReport {
    pub queries: usize,
    pub methods: Vec<MethodPrecision>,
}

impl PrecisionReport {
    pub fn precision(&self, method: &str, k: usize) -> Option<f64> {
        self.methods
            .iter()
            .find(|m| m.method == method)
            .and_then(|m| m.precision.get(k.checked_sub(1)?).copied())
    }

    /// The orderless baseline with the highest precision@k; earlier methods
    /// win ties.
    pub fn best_baseline(&self, k: usize) -> Option<(&str, f64)> {
        self.methods
            .iter()
            .filter(|m| m.method != PROFILE_METHOD)
            .filter_map(|m| Some((m.method.as_str(), *m.precision.get(k.checked_sub(1)?)?)))
            .fold(None, |best: Option<(&str, f64)>, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            })
    }

    /// Methods as rows, k = 1..10 as columns.
    pub fn to_table(&self) -> String {
        let width = self.methods.iter().map(|m| m.method.len()).max().unwrap_or(6).max(6);
        let mut out = format!("Mean precision over {} queries\n{:width$}", self.queries, "method");
        for k in 1..=MAX_K {
            let _ = write!(out, " {:>6}", format!("k={k}"));
        }
        out.push('\n');
        for m in &self.methods {
            let _ = write!(out, "{:width$}", m.method);
            for p in &m.precision {
                let _ = write!(out, " {p:>6.3}");
            }
            out.push('\n');
        }
        out
    }

    /// One `method,k,precision` line per value, after a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,k,precision\n");
        for m in &self.methods {
            for (i, p) in m.precision.iter().enumerate() {
                let _ = writeln!(out, "{},{},{p}", m.method, i + 1);
            }
        }
        out
    }
}

/// Name of an orderless baseline, e.g. `bow-l2-tfidf`.
pub fn baseline_name(measure: BowMeasure, weighting: Weighting) -> String {
    format!("bow-{measure}-{weighting}")
}

/// Indexes built once and reused across reports on the same corpus.
pub struct Evaluator {
    index: ProfileIndex,
    bow: Vec<(Weighting, BowIndex)>,
}

impl Evaluator {
    pub fn new(corpus: &[ImageBoW], config: &EngineConfig) -> Result<Self> {
        let index = build_index(corpus, config.index_config()?)?;
        let cb = index.config().codebook_size;
        let bow = [Weighting::None, Weighting::TfIdf]
            .into_iter()
            .map(|w| Ok((w, BowIndex::new(corpus, cb, w)?)))
            .collect::<Result<_>>()?;
        Ok(Evaluator { index, bow })
    }

    pub fn index(&self) -> &ProfileIndex {
        &self.index
    }

    fn relevant<'g>(gt: &'g GroundTruth, query: &ImageBoW) -> Result<&'g BTreeSet<String>> {
        match gt.get(&query.image_id) {
            Some(r) if !r.is_empty() => Ok(r),
            Some(_) => Err(Error::Validation(format!("query {:?} has no relevant images", query.image_id))),
            None => Err(Error::Validation(format!("query {:?} missing from ground truth", query.image_id))),
        }
    }

    fn mean_precision(rankings: &[(Vec<String>, &BTreeSet<String>)]) -> Vec<f64> {
        (1..=MAX_K)
            .map(|k| {
                let sum: f64 = rankings.iter().map(|(r, rel)| precision_at_k(r, rel, k)).sum();
                sum / rankings.len() as f64
            })
            .collect()
    }

    /// Mean precision@1..10 of profile search alone.
    pub fn profile_precision(&self, queries: &[ImageBoW], gt: &GroundTruth, sim: &SimilarityConfig) -> Result<Vec<f64>> {
        let mut rankings = Vec::with_capacity(queries.len());
        for q in queries {
            let relevant = Self::relevant(gt, q)?;
            let top = query_topk_images_with(q, &self.index, sim, MAX_K)?;
            rankings.push((top.into_iter().map(|m| m.image_id).collect(), relevant));
        }
        Ok(Self::mean_precision(&rankings))
    }

    /// Profile search plus every orderless baseline.
    pub fn report(&self, queries: &[ImageBoW], gt: &GroundTruth, sim: &SimilarityConfig) -> Result<PrecisionReport> {
        if queries.is_empty() {
            return Err(Error::InvalidParameter("no queries".into()));
        }
        let mut methods = vec![MethodPrecision {
            method: PROFILE_METHOD.into(),
            precision: self.profile_precision(queries, gt, sim)?,
        }];
        for (weighting, bow) in &self.bow {
            for measure in BowMeasure::ALL {
                let mut rankings = Vec::with_capacity(queries.len());
                for q in queries {
                    let relevant = Self::relevant(gt, q)?;
                    let r = bow.search(q, measure, MAX_K)?;
                    rankings.push((r.entries.into_iter().map(|(id, _)| id).collect(), relevant));
                }
                methods.push(MethodPrecision {
                    method: baseline_name(measure, *weighting),
                    precision: Self::mean_precision(&rankings),
                });
            }
        }
        Ok(PrecisionReport {
            queries: queries.len(),
            methods,
        })
    }
}

/// Builds the indexes for `corpus` and reports mean precision@1..10 for
/// profile search and the bag-of-words baselines.
pub fn run_report(corpus: &[ImageBoW], queries: &[ImageBoW], gt: &GroundTruth, config: &EngineConfig) -> Result<PrecisionReport> {
    Evaluator::new(corpus, config)?.report(queries, gt, &config.similarity()?)
}
