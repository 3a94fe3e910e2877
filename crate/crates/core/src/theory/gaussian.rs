use super::{PropertyReport, Tally, MC_TOL};
use crate::error::Result;
use crate::matfun::{symmetric_eigen, Mat};
use crate::oracles::gaussian_grad;
use crate::rng;

/// Running first and second moments of a symmetric matrix statistic.
struct Moments {
    dim: usize,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Moments {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            sum: vec![0.0; dim * dim],
            sum_sq: vec![0.0; dim * dim],
        }
    }

    fn push(&mut self, s: &Mat) {
        for (i, v) in s.as_slice().iter().enumerate() {
            self.sum[i] += v;
            self.sum_sq[i] += v * v;
        }
    }

    fn mean(&self, n: f64) -> Mat {
        Mat::from_raw(self.dim, self.dim, self.sum.iter().map(|s| s / n).collect())
    }

    /// Standard error of each entry of the mean.
    fn std_err(&self, n: f64) -> Vec<f64> {
        self.sum
            .iter()
            .zip(&self.sum_sq)
            .map(|(s, sq)| standard_error(*s, *sq, n))
            .collect()
    }
}

fn standard_error(sum: f64, sum_sq: f64, n: f64) -> f64 {
    let mean = sum / n;
    let var = ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
    (var / n).sqrt()
}

/// Checks, for `G` with i.i.d. `N(μ, ξ²)` entries, the entries of the
/// empirical `E[GGᵀ]` and `E[GᵀG]` against `nμ²𝟙𝟙ᵀ + nξ²I` and
/// `mμ²𝟙𝟙ᵀ + mξ²I`, and the lower bounds
/// `λ_min(E[GGᵀ]) ≥ ξ²/(m(ξ²+μ²)) · E‖G‖_F²` (and the same with `n` for
/// `GᵀG`). Every entry and both bounds are separate checks at 5 standard
/// errors.
pub fn verify_gaussian_covariance(m: usize, n: usize, mu: f64, xi: f64, samples: u64, seed: u64) -> PropertyReport {
    let mut tally = Tally::new("gaussian_covariance", MC_TOL, seed);
    tally
        .config("m", m as f64)
        .config("n", n as f64)
        .config("mu", mu)
        .config("xi", xi)
        .config("samples", samples as f64);
    if let Err(e) = covariance_checks(m, n, mu, xi, samples, seed, &mut tally) {
        tally.record_result(Err(e));
    }
    tally.finish()
}

fn covariance_checks(m: usize, n: usize, mu: f64, xi: f64, samples: u64, seed: u64, tally: &mut Tally) -> Result<()> {
    let mut rng = rng::stream(seed, (m as u64) << 40 | (n as u64) << 32);
    let mut left = Moments::new(m);
    let mut right = Moments::new(n);
    let (mut norm_sum, mut norm_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let g = gaussian_grad(m, n, mu, xi, &mut rng)?;
        left.push(&g.gram_rows());
        right.push(&g.gram_cols());
        let f: f64 = g.as_slice().iter().map(|v| v * v).sum();
        norm_sum += f;
        norm_sq += f * f;
    }
    let count = samples as f64;
    let norm_mean = norm_sum / count;
    let norm_se = standard_error(norm_sum, norm_sq, count);
    for (stats, dim, other) in [(&left, m, n), (&right, n, m)] {
        let mean = stats.mean(count);
        let se = stats.std_err(count);
        let other = other as f64;
        for i in 0..dim {
            for j in i..dim {
                let expected = other * mu * mu + if i == j { other * xi * xi } else { 0.0 };
                let diff = mean.get(i, j) - expected;
                tally.record(&[(-diff.abs(), se[i * dim + j])]);
            }
        }
        let c = xi * xi / (dim as f64 * (xi * xi + mu * mu));
        let lambda_min = symmetric_eigen(&mean)?.min_eigenvalue();
        let combined = se.iter().map(|s| s * s).sum::<f64>().sqrt() + c * norm_se;
        tally.record(&[(lambda_min - c * norm_mean, combined)]);
    }
    Ok(())
}
