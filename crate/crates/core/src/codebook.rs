//! Visual codebook construction by restarted Lloyd k-means, and
//! nearest-center quantization of descriptors into visual words.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Descriptor, ImageBoW, Keypoint, RawKeypoint, VisualWord};

pub const DEFAULT_CODEBOOK_SIZE: usize = 500;
pub const DEFAULT_RESTARTS: usize = 10;
pub const DEFAULT_MAX_ITER: usize = 100;

/// `k` cluster centers plus the sum of squared distances of the training
/// points to their assigned centers.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    centers: Vec<Descriptor>,
    scatter: f64,
}

impl Codebook {
    pub fn new(centers: Vec<Descriptor>, scatter: f64) -> Result<Self> {
        let dim = centers
            .first()
            .map(Descriptor::dim)
            .ok_or(Error::ZeroClusters)?;
        if let Some(c) = centers.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: c.dim(),
            });
        }
        if !(scatter.is_finite() && scatter >= 0.0) {
            return Err(Error::Validation(format!("invalid scatter {scatter}")));
        }
        Ok(Codebook { centers, scatter })
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn dim(&self) -> usize {
        self.centers[0].dim()
    }

    pub fn centers(&self) -> &[Descriptor] {
        &self.centers
    }

    pub fn scatter(&self) -> f64 {
        self.scatter
    }
}

/// Result of a single Lloyd run, with the sum of squared errors recorded
/// after every assignment step.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansRun {
    pub codebook: Codebook,
    pub sse_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Outcome of [`build_codebook`]: the minimum-scatter run and the scatter of
/// every restart, in seed order.
#[derive(Debug, Clone, PartialEq)]
pub struct CodebookBuild {
    pub codebook: Codebook,
    pub best_restart: usize,
    pub best_seed: u64,
    pub restart_scatters: Vec<f64>,
}

#[inline]
fn squared_distance(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum()
}

/// Index and squared distance of the nearest center; ties go to the lowest
/// index.
fn nearest(point: &[f32], centers: &[Vec<f32>]) -> (usize, f64) {
    let mut best = (0, squared_distance(point, &centers[0]));
    for (i, c) in centers.iter().enumerate().skip(1) {
        let d = squared_distance(point, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn assign_all(points: &[Descriptor], centers: &[Vec<f32>], assignment: &mut [usize]) -> f64 {
    let mut sse = 0.0;
    for (slot, p) in assignment.iter_mut().zip(points) {
        let (i, d) = nearest(p.as_slice(), centers);
        *slot = i;
        sse += d;
    }
    sse
}

fn check_points(points: &[Descriptor], k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::ZeroClusters);
    }
    if points.len() < k {
        return Err(Error::InsufficientPoints {
            points: points.len(),
            k,
        });
    }
    let dim = points[0].dim();
    if let Some(p) = points.iter().find(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: p.dim(),
        });
    }
    Ok(dim)
}

/// Recomputes centers as member means. Clusters left without members are
/// re-seeded with the points that lie farthest from their own center.
fn update_centers(
    points: &[Descriptor],
    assignment: &[usize],
    centers: &mut [Vec<f32>],
    dim: usize,
) {
    let k = centers.len();
    let mut sums = vec![vec![0.0f64; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in points.iter().zip(assignment) {
        counts[c] += 1;
        for (s, &v) in sums[c].iter_mut().zip(p.as_slice()) {
            *s += f64::from(v);
        }
    }
    for ((center, sum), &n) in centers.iter_mut().zip(&sums).zip(&counts) {
        if n > 0 {
            for (c, s) in center.iter_mut().zip(sum) {
                *c = (s / n as f64) as f32;
            }
        }
    }

    let empty: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
    if empty.is_empty() {
        return;
    }
    let mut by_misfit: Vec<(usize, f64)> = points
        .iter()
        .zip(assignment)
        .enumerate()
        .map(|(i, (p, &c))| (i, squared_distance(p.as_slice(), &centers[c])))
        .collect();
    // farthest first; ties by lowest point index
    by_misfit.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (&cluster, &(point, _)) in empty.iter().zip(&by_misfit) {
        centers[cluster] = points[point].as_slice().to_vec();
    }
}

/// One Lloyd run from `k` distinct points sampled uniformly with `seed`.
/// Stops when no assignment changes or after `max_iter` update steps.
pub fn kmeans_once_traced(
    points: &[Descriptor],
    k: usize,
    max_iter: usize,
    seed: u64,
) -> Result<KMeansRun> {
    let dim = check_points(points, k)?;
    if max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec<f32>> = rand::seq::index::sample(&mut rng, points.len(), k)
        .into_iter()
        .map(|i| points[i].as_slice().to_vec())
        .collect();

    let mut assignment = vec![0usize; points.len()];
    let mut sse_trace = vec![assign_all(points, &centers, &mut assignment)];
    let mut next = assignment.clone();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        update_centers(points, &assignment, &mut centers, dim);
        sse_trace.push(assign_all(points, &centers, &mut next));
        if next == assignment {
            converged = true;
            break;
        }
        std::mem::swap(&mut assignment, &mut next);
    }

    let scatter = *sse_trace.last().expect("trace is never empty");
    let centers = centers
        .into_iter()
        .map(Descriptor::new)
        .collect::<Result<Vec<_>>>()?;
    Ok(KMeansRun {
        codebook: Codebook::new(centers, scatter)?,
        sse_trace,
        iterations,
        converged,
    })
}

pub fn kmeans_once(points: &[Descriptor], k: usize, max_iter: usize, seed: u64) -> Result<Codebook> {
    kmeans_once_traced(points, k, max_iter, seed).map(|run| run.codebook)
}

/// Runs [`kmeans_once`] with seeds `base_seed..base_seed + restarts` and keeps
/// the run with the smallest scatter (earliest seed on ties).
pub fn build_codebook(
    points: &[Descriptor],
    k: usize,
    restarts: usize,
    max_iter: usize,
    base_seed: u64,
) -> Result<CodebookBuild> {
    if restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be at least 1".into()));
    }
    let mut best: Option<(usize, Codebook)> = None;
    let mut restart_scatters = Vec::with_capacity(restarts);
    for r in 0..restarts {
        let cb = kmeans_once(points, k, max_iter, base_seed.wrapping_add(r as u64))?;
        restart_scatters.push(cb.scatter());
        let better = match &best {
            None => true,
            Some((_, b)) => cb.scatter() < b.scatter(),
        };
        if better {
            best = Some((r, cb));
        }
    }
    let (best_restart, codebook) = best.expect("restarts >= 1");
    Ok(CodebookBuild {
        codebook,
        best_restart,
        best_seed: base_seed.wrapping_add(best_restart as u64),
        restart_scatters,
    })
}

/// Nearest center by Euclidean distance; ties go to the lowest index.
pub fn assign_word(d: &Descriptor, cb: &Codebook) -> Result<VisualWord> {
    if d.dim() != cb.dim() {
        return Err(Error::DimensionMismatch {
            expected: cb.dim(),
            found: d.dim(),
        });
    }
    let mut best = (0usize, f64::INFINITY);
    for (i, c) in cb.centers.iter().enumerate() {
        let dist = squared_distance(d.as_slice(), c.as_slice());
        if dist < best.1 {
            best = (i, dist);
        }
    }
    Ok(VisualWord(best.0 as u32))
}

/// Replaces every descriptor by its visual word, keeping coordinates and
/// order.
pub fn quantize_image(
    image_id: impl Into<String>,
    raw: &[RawKeypoint],
    cb: &Codebook,
) -> Result<ImageBoW> {
    let keypoints = raw
        .iter()
        .map(|k| Ok(Keypoint::new(k.x, k.y, assign_word(&k.payload, cb)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ImageBoW::new(image_id, cb.k() as u32, keypoints))
}
