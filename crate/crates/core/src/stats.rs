//! Sample statistics and the deterministic parallel sample driver.

use rayon::prelude::*;

use crate::{Error, Result, C64};

/// Mean with its standard error over `n` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    /// Unbiased sample variance; stderr = sd / √n. Needs at least two samples.
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < 2 {
            return Err(Error::Domain(format!("need >= 2 samples, got {n}")));
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Ok(Estimate {
            mean,
            stderr: (var / n as f64).sqrt(),
            n,
        })
    }

    /// (estimate − target) / stderr; zero when both the error and the gap vanish.
    pub fn z_score(&self, target: f64) -> f64 {
        z_score(self.mean, target, self.stderr)
    }
}

pub fn z_score(estimate: f64, target: f64, stderr: f64) -> f64 {
    let gap = estimate - target;
    if stderr > 0.0 {
        gap / stderr
    } else if gap == 0.0 {
        0.0
    } else {
        gap.signum() * f64::INFINITY
    }
}

/// Complex mean; stderr is √((var Re + var Im)/n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEstimate {
    pub mean: C64,
    pub stderr: f64,
    pub n: usize,
}

impl ComplexEstimate {
    pub fn from_samples(xs: &[C64]) -> Result<Self> {
        let n = xs.len();
        if n < 2 {
            return Err(Error::Domain(format!("need >= 2 samples, got {n}")));
        }
        let mean = xs.iter().sum::<C64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).norm_sqr()).sum::<f64>() / (n - 1) as f64;
        Ok(ComplexEstimate {
            mean,
            stderr: (var / n as f64).sqrt(),
            n,
        })
    }

    /// |estimate − target| / stderr.
    pub fn z_score(&self, target: C64) -> f64 {
        z_score((self.mean - target).norm(), 0.0, self.stderr)
    }
}

/// Evaluates `f(0..n)` on `workers` threads and returns results in index order.
///
/// Each call of `f` must depend only on its index; the output is then
/// identical for every worker count.
pub fn par_map_ordered<T, F>(n: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let workers = workers.max(1);
    if workers == 1 {
        return (0..n).map(&f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(&f).collect())
}
