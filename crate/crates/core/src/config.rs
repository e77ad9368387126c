use crate::codebook::{DEFAULT_CODEBOOK_SIZE, DEFAULT_MAX_ITER, DEFAULT_RESTARTS};
use crate::error::{Error, Result};
use crate::profile::DEFAULT_N0;
use crate::search::IndexConfig;
use crate::similarity::{RingMeasure, SimilarityConfig, DEFAULT_LAMBDA};

/// Engine-wide settings shared by codebook training, indexing and search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub n0: usize,
    pub lambda: f64,
    pub measure: RingMeasure,
    pub codebook_size: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            n0: DEFAULT_N0,
            lambda: DEFAULT_LAMBDA,
            measure: RingMeasure::Jaccard,
            codebook_size: DEFAULT_CODEBOOK_SIZE,
            restarts: DEFAULT_RESTARTS,
            max_iter: DEFAULT_MAX_ITER,
            seed: 0,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n0 == 0 {
            return Err(Error::InvalidRingSize);
        }
        if self.codebook_size == 0 || self.codebook_size > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!("codebook size {} out of range", self.codebook_size)));
        }
        if self.restarts == 0 || self.max_iter == 0 {
            return Err(Error::InvalidParameter("restarts and max_iter must be positive".into()));
        }
        SimilarityConfig::new(self.lambda, self.measure).map(|_| ())
    }

    pub fn similarity(&self) -> Result<SimilarityConfig> {
        SimilarityConfig::new(self.lambda, self.measure)
    }

    pub fn index_config(&self) -> Result<IndexConfig> {
        self.validate()?;
        Ok(IndexConfig {
            n0: self.n0,
            codebook_size: self.codebook_size as u32,
            similarity: self.similarity()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = EngineConfig::default();
        assert_eq!((c.n0, c.codebook_size, c.restarts), (50, 500, 10));
        assert_eq!(c.lambda, 1.0 / 3.0);
        assert_eq!(c.measure, RingMeasure::Jaccard);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_non_positive_fields() {
        for bad in [
            EngineConfig { n0: 0, ..Default::default() },
            EngineConfig { lambda: 0.0, ..Default::default() },
            EngineConfig { codebook_size: 0, ..Default::default() },
            EngineConfig { restarts: 0, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
