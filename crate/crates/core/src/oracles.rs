//! Stochastic gradient oracles and gradient checkers.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matfun::{fro_norm, symmetric_eigen, Mat};
use crate::rng::{self, Rng};

/// Problem constants known in closed form. `None` when not available.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OracleConstants {
    /// Lipschitz constant of the gradient.
    pub smoothness: Option<f64>,
    /// Bound on `E‖G − ∇f(X)‖_F²`.
    pub sigma_sq: Option<f64>,
    /// Lower bound on the objective.
    pub f_star: Option<f64>,
}

/// Source of stochastic gradients for an `m × n` parameter matrix.
///
/// `exact_grad` and `value` are optional capabilities; the defaults report
/// them as missing.
pub trait GradOracle: Send + Sync {
    fn shape(&self) -> (usize, usize);

    fn sample_grad(&self, x: &Mat, rng: &mut Rng) -> Result<Mat>;

    fn exact_grad(&self, _x: &Mat) -> Result<Mat> {
        Err(Error::MissingCapability("exact_grad"))
    }

    fn value(&self, _x: &Mat) -> Result<f64> {
        Err(Error::MissingCapability("value"))
    }

    fn constants(&self) -> OracleConstants {
        OracleConstants::default()
    }

    /// A known minimizer, if unique and available.
    fn optimum(&self) -> Option<&Mat> {
        None
    }
}

fn check_shape(op: &'static str, expected: (usize, usize), x: &Mat) -> Result<()> {
    if x.shape() != expected {
        return Err(Error::Shape {
            op,
            expected,
            got: x.shape(),
        });
    }
    Ok(())
}

fn normal_matrix(rows: usize, cols: usize, rng: &mut Rng) -> Mat {
    let data = (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect();
    Mat::from_raw(rows, cols, data)
}

/// `f(X) = ‖X − X*‖_F² / 200` on 2×2 matrices, with a two-branch gradient
/// sample: `D − A` with probability `branch_prob`, otherwise
/// `−(D − (10/9)A)/10`, where `D = X − X*`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyProblem {
    pub x_star: Mat,
    pub a: Mat,
    pub branch_prob: f64,
}

impl ToyProblem {
    /// `X* = 4·𝟙𝟙ᵀ`, `A = 𝟙𝟙ᵀ`, branch probability 0.1.
    pub fn new() -> Self {
        Self {
            x_star: Mat::from_rows(&[&[4.0, 4.0], &[4.0, 4.0]]).unwrap(),
            a: Mat::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap(),
            branch_prob: 0.1,
        }
    }

    /// `X₁ = X* + [[−1, −2], [2, 1]]`.
    pub fn initial_point(&self) -> Mat {
        let offset = Mat::from_rows(&[&[-1.0, -2.0], &[2.0, 1.0]]).unwrap();
        self.x_star.add(&offset).unwrap()
    }
}

impl Default for ToyProblem {
    fn default() -> Self {
        Self::new()
    }
}

impl GradOracle for ToyProblem {
    fn shape(&self) -> (usize, usize) {
        (2, 2)
    }

    fn sample_grad(&self, x: &Mat, rng: &mut Rng) -> Result<Mat> {
        toy_sample_grad(self, x, rng)
    }

    fn exact_grad(&self, x: &Mat) -> Result<Mat> {
        check_shape("toy exact_grad", (2, 2), x)?;
        Ok(x.sub(&self.x_star)?.map(|v| v / 100.0))
    }

    fn value(&self, x: &Mat) -> Result<f64> {
        check_shape("toy value", (2, 2), x)?;
        let d = fro_norm(&x.sub(&self.x_star)?);
        Ok(d * d / 200.0)
    }

    fn constants(&self) -> OracleConstants {
        OracleConstants {
            smoothness: Some(0.01),
            sigma_sq: None,
            f_star: Some(0.0),
        }
    }

    fn optimum(&self) -> Option<&Mat> {
        Some(&self.x_star)
    }
}

/// One draw of the toy gradient. The branch is picked by a single uniform
/// draw compared against `branch_prob`.
pub fn toy_sample_grad(toy: &ToyProblem, x: &Mat, rng: &mut Rng) -> Result<Mat> {
    check_shape("toy sample_grad", (2, 2), x)?;
    let d = x.sub(&toy.x_star)?;
    let u: f64 = rng.random();
    if u < toy.branch_prob {
        d.sub(&toy.a)
    } else {
        Ok(d.lin_comb(1.0, &toy.a, -10.0 / 9.0)?.scale(-0.1))
    }
}

/// `f(X) = ½⟨X − X₀, H_L (X − X₀) H_R⟩` with additive Gaussian gradient
/// noise of per-entry standard deviation `noise`.
///
/// `H_L`, `H_R` have random eigenvectors and eigenvalues spaced
/// geometrically in `[1, √condition]`, so `H_R ⊗ H_L` has condition number
/// `condition` when both sides have at least two rows.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticOracle {
    h_left: Mat,
    h_right: Mat,
    x0: Mat,
    noise: f64,
    smoothness: f64,
}

impl QuadraticOracle {
    pub fn new(m: usize, n: usize, condition: f64, noise: f64, seed: u64) -> Result<Self> {
        if !(condition.is_finite() && condition >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "condition must be >= 1, got {condition}"
            )));
        }
        if !(noise.is_finite() && noise >= 0.0) {
            return Err(Error::InvalidParameter(format!("noise must be >= 0, got {noise}")));
        }
        if m == 0 || n == 0 {
            return Err(Error::EmptyMatrix { rows: m, cols: n });
        }
        let mut rng = rng::stream(seed, 0);
        let (h_left, l_max) = random_spd(m, condition.sqrt(), &mut rng)?;
        let (h_right, r_max) = random_spd(n, condition.sqrt(), &mut rng)?;
        let x0 = normal_matrix(m, n, &mut rng);
        Ok(Self {
            h_left,
            h_right,
            x0,
            noise,
            smoothness: l_max * r_max,
        })
    }

    pub fn h_left(&self) -> &Mat {
        &self.h_left
    }

    pub fn h_right(&self) -> &Mat {
        &self.h_right
    }
}

/// Random SPD matrix with eigenvalues geometric in `[1, top]`; exactly the
/// identity when `top = 1`. Returns the matrix and its largest eigenvalue.
fn random_spd(dim: usize, top: f64, rng: &mut Rng) -> Result<(Mat, f64)> {
    if top == 1.0 {
        return Ok((Mat::identity(dim), 1.0));
    }
    let spectrum: Vec<f64> = (0..dim)
        .map(|i| match dim {
            1 => top,
            _ => top.powf(i as f64 / (dim - 1) as f64),
        })
        .collect();
    let g = normal_matrix(dim, dim, rng);
    let basis = symmetric_eigen(&g.add(&g.transpose())?)?;
    Ok((basis.reassemble(&spectrum), top))
}

impl GradOracle for QuadraticOracle {
    fn shape(&self) -> (usize, usize) {
        self.x0.shape()
    }

    fn sample_grad(&self, x: &Mat, rng: &mut Rng) -> Result<Mat> {
        let g = self.exact_grad(x)?;
        if self.noise == 0.0 {
            return Ok(g);
        }
        let (m, n) = g.shape();
        g.lin_comb(1.0, &normal_matrix(m, n, rng), self.noise)
    }

    fn exact_grad(&self, x: &Mat) -> Result<Mat> {
        check_shape("quadratic exact_grad", self.shape(), x)?;
        let d = x.sub(&self.x0)?;
        self.h_left.matmul(&d)?.matmul(&self.h_right)
    }

    fn value(&self, x: &Mat) -> Result<f64> {
        check_shape("quadratic value", self.shape(), x)?;
        let d = x.sub(&self.x0)?;
        Ok(0.5 * d.frobenius_dot(&self.h_left.matmul(&d)?.matmul(&self.h_right)?)?)
    }

    fn constants(&self) -> OracleConstants {
        let (m, n) = self.shape();
        OracleConstants {
            smoothness: Some(self.smoothness),
            sigma_sq: Some((m * n) as f64 * self.noise * self.noise),
            f_star: Some(0.0),
        }
    }

    fn optimum(&self) -> Option<&Mat> {
        Some(&self.x0)
    }
}

/// `f(X) = ¼‖XXᵀ − T‖_F²` with `T = BBᵀ` for a random `m × n` factor `B`,
/// plus additive Gaussian gradient noise. Nonconvex; the minimizer is only
/// defined up to rotation, so no optimum is exposed.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFactorization {
    target: Mat,
    start: Mat,
    noise: f64,
}

impl MatrixFactorization {
    pub fn new(m: usize, n: usize, noise: f64, seed: u64) -> Result<Self> {
        if !(noise.is_finite() && noise >= 0.0) {
            return Err(Error::InvalidParameter(format!("noise must be >= 0, got {noise}")));
        }
        if m == 0 || n == 0 {
            return Err(Error::EmptyMatrix { rows: m, cols: n });
        }
        let mut rng = rng::stream(seed, 0);
        let b = normal_matrix(m, n, &mut rng).scale(1.0 / (n as f64).sqrt());
        let start = normal_matrix(m, n, &mut rng).scale(0.1);
        Ok(Self {
            target: b.gram_rows(),
            start,
            noise,
        })
    }

    /// Small random starting point drawn from the same seed.
    pub fn initial_point(&self) -> Mat {
        self.start.clone()
    }

    fn residual(&self, x: &Mat) -> Result<Mat> {
        check_shape("matrix factorization", self.start.shape(), x)?;
        x.gram_rows().sub(&self.target)
    }
}

impl GradOracle for MatrixFactorization {
    fn shape(&self) -> (usize, usize) {
        self.start.shape()
    }

    fn sample_grad(&self, x: &Mat, rng: &mut Rng) -> Result<Mat> {
        let g = self.exact_grad(x)?;
        if self.noise == 0.0 {
            return Ok(g);
        }
        let (m, n) = g.shape();
        g.lin_comb(1.0, &normal_matrix(m, n, rng), self.noise)
    }

    fn exact_grad(&self, x: &Mat) -> Result<Mat> {
        self.residual(x)?.matmul(x)
    }

    fn value(&self, x: &Mat) -> Result<f64> {
        let r = fro_norm(&self.residual(x)?);
        Ok(0.25 * r * r)
    }

    fn constants(&self) -> OracleConstants {
        let (m, n) = self.shape();
        OracleConstants {
            smoothness: None,
            sigma_sq: Some((m * n) as f64 * self.noise * self.noise),
            f_star: Some(0.0),
        }
    }
}

/// `m × n` matrix of independent normal entries with mean `mu` and standard
/// deviation `xi`.
pub fn gaussian_grad(m: usize, n: usize, mu: f64, xi: f64, rng: &mut Rng) -> Result<Mat> {
    if !(xi.is_finite() && xi > 0.0) {
        return Err(Error::InvalidParameter(format!("xi must be finite and > 0, got {xi}")));
    }
    if !mu.is_finite() {
        return Err(Error::InvalidParameter(format!("mu must be finite, got {mu}")));
    }
    if m == 0 || n == 0 {
        return Err(Error::EmptyMatrix { rows: m, cols: n });
    }
    Ok(normal_matrix(m, n, rng).map(|z| mu + xi * z))
}

/// Central differences of `oracle.value` with step `h`, entry by entry.
pub fn finite_diff_grad(oracle: &dyn GradOracle, x: &Mat, h: f64) -> Result<Mat> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be finite and > 0, got {h}")));
    }
    let (m, n) = x.shape();
    let mut out = Mat::zeros(m, n);
    let mut probe = x.clone();
    for i in 0..m {
        for j in 0..n {
            let base = x.get(i, j);
            probe.set(i, j, base + h);
            let up = oracle.value(&probe)?;
            probe.set(i, j, base - h);
            let down = oracle.value(&probe)?;
            probe.set(i, j, base);
            out.set(i, j, (up - down) / (2.0 * h));
        }
    }
    Ok(out)
}
