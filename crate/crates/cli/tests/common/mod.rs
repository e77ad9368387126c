#![allow(dead_code)]

use std::path::{Path, PathBuf};

use pbsearch_core::format::{save_quantized, save_raw};
use pbsearch_core::{Descriptor, ImageBoW, Keypoint, VisualWord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CODEBOOK: u32 = 20;

/// Writes `n` quantized images plus a manifest; returns the manifest path
/// and the images.
pub fn quantized_corpus(dir: &Path, n: usize, seed: u64) -> (PathBuf, Vec<ImageBoW>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut manifest = String::from("# test corpus\n");
    let mut images = Vec::new();
    for i in 0..n {
        let id = format!("img{i:02}");
        let count = rng.random_range(15..40);
        let keypoints = (0..count)
            .map(|_| Keypoint::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0), VisualWord(rng.random_range(0..CODEBOOK))))
            .collect();
        let image = ImageBoW::new(id.clone(), CODEBOOK, keypoints);
        let file = format!("{id}.pbow");
        save_quantized(dir.join(&file), &image).unwrap();
        manifest.push_str(&format!("{id} {file}\n"));
        images.push(image);
    }
    let path = dir.join("corpus.manifest");
    std::fs::write(&path, manifest).unwrap();
    (path, images)
}

/// Writes `n` raw images with 8-dimensional descriptors around a few
/// prototypes plus a manifest.
pub fn raw_corpus(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prototypes: Vec<Vec<f32>> = (0..5).map(|_| (0..8).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
    let mut manifest = String::new();
    for i in 0..n {
        let keypoints: Vec<_> = (0..25)
            .map(|_| {
                let p = &prototypes[rng.random_range(0..prototypes.len())];
                let d = p.iter().map(|v| v + rng.random_range(-0.01..0.01)).collect();
                Keypoint::new(rng.random_range(0.0..50.0), rng.random_range(0.0..50.0), Descriptor::new(d).unwrap())
            })
            .collect();
        let file = format!("raw{i}.praw");
        save_raw(dir.join(&file), 8, &keypoints).unwrap();
        manifest.push_str(&format!("raw{i} {file}\n"));
    }
    let path = dir.join("raw.manifest");
    std::fs::write(&path, manifest).unwrap();
    path
}
