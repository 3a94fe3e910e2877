//! Random test matrices.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::matfun::{symmetric_eigen, Mat, SymPsd};
use crate::rng::Rng;

/// Dimensions drawn by the suites.
pub const DIMS: [usize; 5] = [1, 2, 3, 6, 8];

/// Condition number of the ill-conditioned class.
pub const ILL_CONDITION: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixClass {
    /// Gaussian entries.
    WellConditioned,
    /// Singular values spread geometrically over six decades.
    IllConditioned,
    /// Rank strictly below `min(rows, cols)`; only for nonnegative powers.
    RankDeficient,
}

impl MatrixClass {
    /// Cycles through all three classes.
    pub fn any(i: u64) -> Self {
        [Self::WellConditioned, Self::IllConditioned, Self::RankDeficient][(i % 3) as usize]
    }

    /// Cycles through the full-rank classes.
    pub fn full_rank(i: u64) -> Self {
        [Self::WellConditioned, Self::IllConditioned][(i % 2) as usize]
    }
}

/// A dimension from [`DIMS`] not exceeding `max_dim` (at least 1).
pub fn pick_dim(max_dim: usize, rng: &mut Rng) -> usize {
    let allowed: Vec<usize> = DIMS.iter().copied().filter(|&d| d <= max_dim.max(1)).collect();
    allowed[rng.random_range(0..allowed.len())]
}

/// `10^u` with `u` uniform in `[lo, hi)`.
pub fn log_uniform(lo: f64, hi: f64, rng: &mut Rng) -> f64 {
    10f64.powf(rng.random_range(lo..hi))
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut Rng) -> Mat {
    let data = (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect();
    Mat::from_raw(rows, cols, data)
}

/// Haar-ish orthogonal matrix: eigenvectors of a symmetric Gaussian matrix.
pub fn orthogonal(n: usize, rng: &mut Rng) -> Mat {
    let g = gaussian(n, n, rng);
    symmetric_eigen(&g.add(&g.transpose()).expect("square"))
        .expect("Jacobi converges on small symmetric matrices")
        .eigenvectors
}

/// Geometric spectrum from `1` down to `1/ILL_CONDITION`.
fn ill_spectrum(k: usize) -> Vec<f64> {
    (0..k)
        .map(|i| match k {
            1 => 1.0,
            _ => ILL_CONDITION.powf(-(i as f64) / (k - 1) as f64),
        })
        .collect()
}

pub fn random_matrix(rows: usize, cols: usize, class: MatrixClass, rng: &mut Rng) -> Mat {
    let r = rows.min(cols);
    match class {
        MatrixClass::WellConditioned => gaussian(rows, cols, rng),
        MatrixClass::IllConditioned => {
            let scale = log_uniform(-2.0, 2.0, rng);
            let u = orthogonal(rows, rng);
            let v = orthogonal(cols, rng);
            let mut s = Mat::zeros(rows, cols);
            for (i, sv) in ill_spectrum(r).into_iter().enumerate() {
                s.set(i, i, scale * sv);
            }
            u.mul_unchecked(&s).mul_unchecked(&v.transpose())
        }
        MatrixClass::RankDeficient => {
            if r == 1 {
                return Mat::zeros(rows, cols);
            }
            let rank = rng.random_range(1..r);
            gaussian(rows, rank, rng).mul_unchecked(&gaussian(rank, cols, rng))
        }
    }
}

/// Random PSD matrix of the given class. Full-rank classes are positive
/// definite.
pub fn random_psd(dim: usize, class: MatrixClass, rng: &mut Rng) -> SymPsd {
    let spectrum: Vec<f64> = match class {
        MatrixClass::WellConditioned => (0..dim).map(|_| rng.random_range(0.1..10.0)).collect(),
        MatrixClass::IllConditioned => {
            let scale = log_uniform(-2.0, 2.0, rng);
            ill_spectrum(dim).into_iter().map(|l| scale * l).collect()
        }
        MatrixClass::RankDeficient => {
            let rank = match dim {
                1 => 0,
                _ => rng.random_range(1..dim),
            };
            (0..dim)
                .map(|i| if i < rank { rng.random_range(0.1..10.0) } else { 0.0 })
                .collect()
        }
    };
    let q = orthogonal(dim, rng);
    let d = Mat::from_raw(dim, dim, {
        let mut v = vec![0.0; dim * dim];
        for (i, l) in spectrum.iter().enumerate() {
            v[i * dim + i] = *l;
        }
        v
    });
    SymPsd::from_psd_unchecked(q.mul_unchecked(&d).mul_unchecked(&q.transpose()))
}
