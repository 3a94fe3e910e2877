//! Symmetric eigendecomposition (cyclic Jacobi) and PSD fractional powers.
//!
//! Jacobi rotations are used because the matrices here are small (a few
//! dozen rows at most) and the method resolves small eigenvalues of positive
//! definite matrices to high relative accuracy, which matters for the
//! negative powers of `L + εI` with tiny `ε`.

use super::Mat;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Eigenvalues at or above `-PSD_TOL * max|λ|` are treated as nonnegative.
pub const PSD_TOL: f64 = 1e-10;

/// Symmetric positive semidefinite matrix.
///
/// Construction symmetrizes the input; eigenvalues below
/// `-PSD_TOL * max|λ|` are rejected.
#[derive(Clone, Debug, PartialEq)]
pub struct SymPsd {
    matrix: Mat,
}

impl SymPsd {
    pub fn new(matrix: Mat) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape {
                op: "SymPsd::new",
                expected: (matrix.rows(), matrix.rows()),
                got: matrix.shape(),
            });
        }
        let matrix = matrix.symmetrized();
        let eig = jacobi(&matrix)?;
        check_psd(&eig.0)?;
        Ok(Self { matrix })
    }

    /// Wraps a matrix that is PSD by construction (sums of Gram matrices,
    /// products `U diag(d≥0) Uᵀ`). Only symmetrizes.
    pub(crate) fn from_psd_unchecked(matrix: Mat) -> Self {
        Self {
            matrix: matrix.symmetrized(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: Mat::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: Mat::identity(dim),
        }
    }

    /// `A Aᵀ`
    pub fn gram_rows(a: &Mat) -> Self {
        Self::from_psd_unchecked(a.gram_rows())
    }

    /// `Aᵀ A`
    pub fn gram_cols(a: &Mat) -> Self {
        Self::from_psd_unchecked(a.gram_cols())
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn into_mat(self) -> Mat {
        self.matrix
    }

    /// `self + s·I` for `s ≥ 0`.
    pub fn shifted(&self, s: f64) -> Result<Self> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "shift must be finite and >= 0, got {s}"
            )));
        }
        Ok(Self {
            matrix: self.matrix.add_diag(s),
        })
    }

    /// `a·self + b·other` with `a, b ≥ 0`.
    pub fn combine(&self, a: f64, other: &SymPsd, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "PSD combination needs nonnegative weights, got {a}, {b}"
            )));
        }
        Ok(Self::from_psd_unchecked(self.matrix.lin_comb(a, &other.matrix, b)?))
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector
/// columns.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecomp {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Mat,
}

impl EigenDecomp {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty decomposition")
    }

    /// Eigenvalues clamped at zero when they sit inside the PSD tolerance.
    fn clamped(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|&l| l.max(0.0)).collect()
    }

    /// Decomposition of `S + sI`: eigenvalues become `max(λ, 0) + s`, so a
    /// positive shift always gives a positive definite spectrum.
    pub fn shifted(&self, s: f64) -> EigenDecomp {
        EigenDecomp {
            eigenvalues: self.clamped().into_iter().map(|l| l + s).collect(),
            eigenvectors: self.eigenvectors.clone(),
        }
    }

    /// `U diag(max(λ,0)^t) Uᵀ`. `t = 0` returns the identity exactly.
    pub fn power(&self, t: f64) -> Result<SymPsd> {
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!("power must be finite, got {t}")));
        }
        if t == 0.0 {
            return Ok(SymPsd::identity(self.dim()));
        }
        let powered = self.powered_eigenvalues(t)?;
        Ok(SymPsd::from_psd_unchecked(self.reassemble(&powered)))
    }

    fn powered_eigenvalues(&self, t: f64) -> Result<Vec<f64>> {
        self.clamped()
            .into_iter()
            .map(|l| {
                if t < 0.0 && l == 0.0 {
                    Err(Error::Singular {
                        power: t,
                        eigenvalue: l,
                    })
                } else if l == 1.0 {
                    Ok(1.0)
                } else {
                    Ok(l.powf(t))
                }
            })
            .collect()
    }

    /// `tr(S^t)` computed from the spectrum.
    pub fn trace_power(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(self.dim() as f64);
        }
        Ok(self.powered_eigenvalues(t)?.iter().sum())
    }

    /// `U diag(d) Uᵀ`
    pub fn reassemble(&self, d: &[f64]) -> Mat {
        let n = self.dim();
        let u = &self.eigenvectors;
        let mut out = vec![0.0; n * n];
        for (k, &dk) in d.iter().enumerate() {
            if dk == 0.0 {
                continue;
            }
            for i in 0..n {
                let uik = u.get(i, k) * dk;
                if uik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += uik * u.get(j, k);
                }
            }
        }
        Mat::from_raw(n, n, out).symmetrized()
    }

    /// `U Λ Uᵀ` from the raw eigenvalues.
    pub fn reconstruct(&self) -> Mat {
        self.reassemble(&self.eigenvalues)
    }
}

/// Eigendecomposition of a PSD matrix.
pub fn sym_eig(s: &SymPsd) -> Result<EigenDecomp> {
    let (eigenvalues, eigenvectors) = jacobi(s.matrix())?;
    Ok(EigenDecomp {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigendecomposition of an arbitrary symmetric matrix (no PSD requirement).
/// The input is symmetrized first.
pub fn symmetric_eigen(a: &Mat) -> Result<EigenDecomp> {
    if !a.is_square() {
        return Err(Error::Shape {
            op: "symmetric_eigen",
            expected: (a.rows(), a.rows()),
            got: a.shape(),
        });
    }
    let (eigenvalues, eigenvectors) = jacobi(&a.symmetrized())?;
    Ok(EigenDecomp {
        eigenvalues,
        eigenvectors,
    })
}

/// `S^t` for a PSD matrix.
pub fn psd_power(s: &SymPsd, t: f64) -> Result<SymPsd> {
    if t == 0.0 {
        return Ok(SymPsd::identity(s.dim()));
    }
    sym_eig(s)?.power(t)
}

fn check_psd(eigenvalues: &[f64]) -> Result<()> {
    let scale = eigenvalues.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let min = eigenvalues[0];
    if min < -PSD_TOL * scale {
        return Err(Error::NotPsd {
            min_eig: min,
            max_eig: *eigenvalues.last().unwrap(),
        });
    }
    Ok(())
}

/// Cyclic Jacobi on a symmetric matrix. Returns ascending eigenvalues and
/// eigenvector columns.
fn jacobi(input: &Mat) -> Result<(Vec<f64>, Mat)> {
    let n = input.rows();
    let mut a = input.as_slice().to_vec();
    let mut v = Mat::identity(n).into_vec();
    let rel_tol = f64::EPSILON * n as f64;
    let fro: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let abs_floor = f64::EPSILON * f64::EPSILON * fro;

    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                if apq.abs() <= abs_floor || apq.abs() <= rel_tol * (app * aqq).abs().sqrt() {
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    let new_rp = c * arp - s * arq;
                    let new_rq = s * arp + c * arq;
                    a[r * n + p] = new_rp;
                    a[p * n + r] = new_rp;
                    a[r * n + q] = new_rq;
                    a[q * n + r] = new_rq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged || !a.iter().all(|x| x.is_finite()) {
        return Err(Error::NoConvergence { rows: n, cols: n });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let eigenvalues = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vecs = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vecs[r * n + new_col] = v[r * n + old_col];
        }
    }
    Ok((eigenvalues, Mat::from_raw(n, n, vecs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn psd(rows: &[&[f64]]) -> SymPsd {
        SymPsd::new(Mat::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn identity_spectrum() {
        let e = sym_eig(&SymPsd::identity(3)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
        let vtv = e.eigenvectors.transpose().matmul(&e.eigenvectors).unwrap();
        assert!(vtv.max_abs_diff(&Mat::identity(3)) < 1e-15);
    }

    #[test]
    fn diagonal_spectrum() {
        let e = sym_eig(&psd(&[&[9.0, 0.0], &[0.0, 4.0]])).unwrap();
        assert_eq!(e.eigenvalues, vec![4.0, 9.0]);
        assert_eq!(e.eigenvectors.get(1, 0).abs(), 1.0);
        assert_eq!(e.eigenvectors.get(0, 1).abs(), 1.0);
    }

    #[test]
    fn two_by_two_analytic() {
        // characteristic polynomial (2-λ)² - 1 → λ ∈ {1, 3}
        let e = sym_eig(&psd(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert_abs_diff_eq!(e.eigenvalues[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.eigenvalues[1], 3.0, epsilon = 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = (e.eigenvectors.get(0, 0), e.eigenvectors.get(1, 0));
        let v1 = (e.eigenvectors.get(0, 1), e.eigenvectors.get(1, 1));
        // eigenvectors up to sign
        assert_abs_diff_eq!((v0.0 * h - v0.1 * h).abs(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!((v1.0 * h + v1.1 * h).abs(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn power_examples() {
        let i3 = SymPsd::identity(3);
        assert_eq!(psd_power(&i3, -0.5).unwrap().matrix(), &Mat::identity(3));

        let d = psd(&[&[4.0, 0.0], &[0.0, 9.0]]);
        let r = psd_power(&d, 0.5).unwrap();
        assert_abs_diff_eq!(r.matrix().get(0, 0), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.matrix().get(1, 1), 3.0, epsilon = 1e-15);
        assert_eq!(r.matrix().get(0, 1), 0.0);

        // analytic: ((√3+1)/2, (√3-1)/2) from eigenvalues 3 and 1
        let s = psd(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let r = psd_power(&s, 0.5).unwrap();
        let diag = (3f64.sqrt() + 1.0) / 2.0;
        let off = (3f64.sqrt() - 1.0) / 2.0;
        assert_abs_diff_eq!(r.matrix().get(0, 0), 1.3660254, epsilon = 1e-7);
        assert_abs_diff_eq!(r.matrix().get(0, 0), diag, epsilon = 1e-9);
        assert_abs_diff_eq!(r.matrix().get(1, 1), diag, epsilon = 1e-9);
        assert_abs_diff_eq!(r.matrix().get(0, 1), off, epsilon = 1e-9);
        assert_abs_diff_eq!(r.matrix().get(0, 1), 0.3660254, epsilon = 1e-7);
    }

    #[test]
    fn zero_power_is_identity_even_when_singular() {
        let z = SymPsd::zeros(2);
        assert_eq!(psd_power(&z, 0.0).unwrap().matrix(), &Mat::identity(2));
    }

    #[test]
    fn negative_power_of_singular_fails() {
        let s = psd(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(psd_power(&s, -0.5), Err(Error::Singular { .. })));
        assert!(matches!(
            psd_power(&SymPsd::zeros(2), -0.25),
            Err(Error::Singular { .. })
        ));
        // nonnegative powers of singular matrices are fine
        let r = psd_power(&s, 0.5).unwrap();
        assert_abs_diff_eq!(r.matrix().get(0, 0), 2f64.sqrt() / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_indefinite() {
        let m = Mat::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        assert!(matches!(SymPsd::new(m), Err(Error::NotPsd { .. })));
        let nonsquare = Mat::zeros(2, 3);
        assert!(matches!(SymPsd::new(nonsquare), Err(Error::Shape { .. })));
    }

    #[test]
    fn tiny_negative_eigenvalue_is_clamped() {
        // eigenvalues 1 and -1e-12: inside tolerance
        let m = Mat::from_rows(&[&[1.0, 0.0], &[0.0, -1e-12]]).unwrap();
        let s = SymPsd::new(m).unwrap();
        let r = psd_power(&s, 0.5).unwrap();
        assert_eq!(r.matrix().get(1, 1), 0.0);
        assert!(matches!(psd_power(&s, -1.0), Err(Error::Singular { .. })));
    }

    #[test]
    fn symmetrizes_on_construction() {
        let m = Mat::from_rows(&[&[2.0, 1.0 + 1e-13], &[1.0, 2.0]]).unwrap();
        let s = SymPsd::new(m).unwrap();
        assert_eq!(s.matrix().get(0, 1), s.matrix().get(1, 0));
    }

    #[test]
    fn general_symmetric_eigen_handles_indefinite() {
        let m = Mat::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        let e = symmetric_eigen(&m).unwrap();
        assert_abs_diff_eq!(e.eigenvalues[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.eigenvalues[1], 3.0, epsilon = 1e-14);
    }
}
