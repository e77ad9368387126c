use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::ImageBoW;

/// Distance or similarity applied to whole-image word histograms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BowMeasure {
    L1,
    L2,
    Cosine,
    Jaccard,
}

impl BowMeasure {
    pub const ALL: [BowMeasure; 4] = [BowMeasure::L1, BowMeasure::L2, BowMeasure::Cosine, BowMeasure::Jaccard];

    /// Whether lower scores rank first.
    pub fn is_distance(self) -> bool {
        matches!(self, BowMeasure::L1 | BowMeasure::L2)
    }

    fn score(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            BowMeasure::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            BowMeasure::L2 => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            BowMeasure::Cosine => {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let na: f64 = a.iter().map(|x| x * x).sum();
                let nb: f64 = b.iter().map(|x| x * x).sum();
                if na == 0.0 || nb == 0.0 {
                    0.0
                } else {
                    (dot / (na * nb).sqrt()).min(1.0)
                }
            }
            BowMeasure::Jaccard => {
                let (mut lo, mut hi) = (0.0, 0.0);
                for (x, y) in a.iter().zip(b) {
                    lo += x.min(*y);
                    hi += x.max(*y);
                }
                if hi == 0.0 {
                    1.0
                } else {
                    lo / hi
                }
            }
        }
    }
}

impl fmt::Display for BowMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BowMeasure::L1 => "l1",
            BowMeasure::L2 => "l2",
            BowMeasure::Cosine => "cosine",
            BowMeasure::Jaccard => "jaccard",
        })
    }
}

impl FromStr for BowMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(BowMeasure::L1),
            "l2" => Ok(BowMeasure::L2),
            "cosine" => Ok(BowMeasure::Cosine),
            "jaccard" => Ok(BowMeasure::Jaccard),
            _ => Err(Error::InvalidParameter(format!("unknown bag-of-words measure {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Weighting {
    #[default]
    None,
    TfIdf,
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Weighting::None => "none",
            Weighting::TfIdf => "tfidf",
        })
    }
}

impl FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Weighting::None),
            "tfidf" | "tf-idf" => Ok(Weighting::TfIdf),
            _ => Err(Error::InvalidParameter(format!("unknown weighting {s:?}"))),
        }
    }
}

/// Word counts of a whole image, one slot per codebook word.
///
/// # Panics
/// If a word is not below `codebook_size`.
pub fn bow_histogram(image: &ImageBoW, codebook_size: u32) -> Vec<u32> {
    let mut counts = vec![0u32; codebook_size as usize];
    for w in image.words() {
        counts[w.index()] += 1;
    }
    counts
}

/// Inverse document frequency `ln(N / df_w)` per word; 0 for words that
/// occur in no image.
pub fn tfidf_weights(corpus: &[ImageBoW], codebook_size: u32) -> Vec<f64> {
    let mut df = vec![0usize; codebook_size as usize];
    for image in corpus {
        for (w, &n) in bow_histogram(image, codebook_size).iter().enumerate() {
            if n > 0 {
                df[w] += 1;
            }
        }
    }
    let n = corpus.len() as f64;
    df.iter()
        .map(|&d| if d == 0 { 0.0 } else { (n / d as f64).ln() })
        .collect()
}

/// Images ranked by a bag-of-words measure, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct BoWRanking {
    pub measure: BowMeasure,
    pub weighting: Weighting,
    pub entries: Vec<(String, f64)>,
}

/// Weighted histograms of a corpus, reusable across queries.
#[derive(Debug, Clone)]
pub struct BowIndex {
    codebook_size: u32,
    weighting: Weighting,
    idf: Vec<f64>,
    ids: Vec<String>,
    vectors: Vec<Vec<f64>>,
}

impl BowIndex {
    pub fn new(corpus: &[ImageBoW], codebook_size: u32, weighting: Weighting) -> Result<Self> {
        let report = crate::model::validate_corpus(corpus, codebook_size);
        if !report.out_of_range.is_empty() || !report.duplicate_ids.is_empty() {
            report.into_result()?;
        }
        let idf = match weighting {
            Weighting::None => vec![1.0; codebook_size as usize],
            Weighting::TfIdf => tfidf_weights(corpus, codebook_size),
        };
        let mut index = BowIndex {
            codebook_size,
            weighting,
            idf,
            ids: corpus.iter().map(|i| i.image_id.clone()).collect(),
            vectors: Vec::with_capacity(corpus.len()),
        };
        index.vectors = corpus.iter().map(|i| index.vectorize(i)).collect();
        Ok(index)
    }

    fn vectorize(&self, image: &ImageBoW) -> Vec<f64> {
        bow_histogram(image, self.codebook_size)
            .iter()
            .zip(&self.idf)
            .map(|(&n, &w)| f64::from(n) * w)
            .collect()
    }

    /// Scores every image against `query`; distances ascending, similarities
    /// descending, ties by ascending image id.
    pub fn search(&self, query: &ImageBoW, measure: BowMeasure, k: usize) -> Result<BoWRanking> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if query.codebook_size != self.codebook_size {
            return Err(Error::Incompatible(format!(
                "query uses codebook size {}, corpus uses {}",
                query.codebook_size, self.codebook_size
            )));
        }
        if let Some(w) = query.words().find(|w| w.0 >= self.codebook_size) {
            return Err(Error::Validation(format!("query word {w} outside codebook")));
        }
        let q = self.vectorize(query);
        let mut entries: Vec<(String, f64)> = self
            .ids
            .iter()
            .zip(&self.vectors)
            .map(|(id, v)| (id.clone(), measure.score(&q, v)))
            .collect();
        let ascending = measure.is_distance();
        entries.sort_by(|a, b| {
            let by_score = if ascending { a.1.total_cmp(&b.1) } else { b.1.total_cmp(&a.1) };
            by_score.then_with(|| a.0.cmp(&b.0))
        });
        entries.truncate(k);
        Ok(BoWRanking {
            measure,
            weighting: self.weighting,
            entries,
        })
    }
}

/// One-shot bag-of-words ranking; tf-idf statistics come from `corpus`.
pub fn bow_search(
    query: &ImageBoW,
    corpus: &[ImageBoW],
    codebook_size: u32,
    measure: BowMeasure,
    weighting: Weighting,
    k: usize,
) -> Result<BoWRanking> {
    BowIndex::new(corpus, codebook_size, weighting)?.search(query, measure, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn image(id: &str, words: &[u32]) -> ImageBoW {
        ImageBoW::from_triples(id, 6, words.iter().enumerate().map(|(i, &w)| (i as f64, 0.0, w)))
    }

    #[test]
    fn histogram_and_idf() {
        assert_eq!(bow_histogram(&image("a", &[0, 0, 3]), 6), vec![2, 0, 0, 1, 0, 0]);
        let corpus = [image("a", &[0, 1]), image("b", &[0, 2]), image("c", &[0])];
        let idf = tfidf_weights(&corpus, 6);
        assert_eq!(idf[0], 0.0);
        assert!((idf[1] - 3f64.ln()).abs() < 1e-15);
        assert_eq!(idf[5], 0.0);
    }

    #[test]
    fn measure_values() {
        let a = [1.0, 2.0, 0.0];
        let b = [0.0, 2.0, 2.0];
        assert_eq!(BowMeasure::L1.score(&a, &b), 3.0);
        assert_eq!(BowMeasure::L2.score(&a, &b), 5f64.sqrt());
        assert!((BowMeasure::Cosine.score(&a, &b) - 4.0 / (5f64.sqrt() * 8f64.sqrt())).abs() < 1e-15);
        assert_eq!(BowMeasure::Jaccard.score(&a, &b), 2.0 / 5.0);
        assert_eq!(BowMeasure::Cosine.score(&[0.0; 3], &b), 0.0);
    }

    #[test]
    fn exact_duplicate_ranks_first_with_tie_by_id() {
        let corpus = [image("z", &[1, 2, 3]), image("b", &[4, 4]), image("a", &[1, 2, 3])];
        for measure in BowMeasure::ALL {
            for weighting in [Weighting::None, Weighting::TfIdf] {
                let r = bow_search(&image("q", &[1, 2, 3]), &corpus, 6, measure, weighting, 3).unwrap();
                assert_eq!(r.entries[0].0, "a", "{measure} {weighting}");
                assert_eq!(r.entries[1].0, "z");
            }
        }
    }

    #[test]
    fn parse_names() {
        for m in BowMeasure::ALL {
            assert_eq!(m.to_string().parse::<BowMeasure>().unwrap(), m);
        }
        assert_eq!("tf-idf".parse::<Weighting>().unwrap(), Weighting::TfIdf);
        assert!("l3".parse::<BowMeasure>().is_err());
    }

    proptest! {
        #[test]
        fn ranking_ignores_keypoint_positions_and_order(
            words in prop::collection::vec(0u32..6, 1..20),
            seed in any::<u64>(),
        ) {
            let corpus = [image("a", &[0, 1, 1, 2]), image("b", &[3, 4, 5]), image("c", &[0, 5, 5, 5])];
            let q = image("q", &words);
            let mut shuffled = words.clone();
            let n = shuffled.len();
            shuffled.rotate_left((seed as usize) % n);
            let moved = ImageBoW::from_triples("q", 6, shuffled.iter().enumerate().map(|(i, &w)| (seed as f64 * 0.5, i as f64 * 13.0, w)));
            for m in BowMeasure::ALL {
                for wt in [Weighting::None, Weighting::TfIdf] {
                    prop_assert_eq!(
                        bow_search(&q, &corpus, 6, m, wt, 3).unwrap(),
                        bow_search(&moved, &corpus, 6, m, wt, 3).unwrap()
                    );
                }
            }
        }
    }
}
