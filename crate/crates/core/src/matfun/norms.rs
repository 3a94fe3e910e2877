use super::Mat;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Singular values in descending order, `min(rows, cols)` of them.
///
/// One-sided (Hestenes) Jacobi on the columns of `A` (or `Aᵀ` when `A` is
/// wide). Working on `A` directly instead of the Gram matrix keeps zero
/// singular values at roundoff level rather than at `√ε_mach`.
pub fn singular_values(a: &Mat) -> Result<Vec<f64>> {
    let b = if a.rows() >= a.cols() { a.clone() } else { a.transpose() };
    let (m, n) = b.shape();
    // column-major copy
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| b.get(i, j)).collect()).collect();
    let tol = f64::EPSILON * m as f64;

    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let (alpha, beta, gamma) = {
                    let (ci, cj) = (&cols[i], &cols[j]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for (x, y) in ci.iter().zip(cj) {
                        alpha += x * x;
                        beta += y * y;
                        gamma += x * y;
                    }
                    (alpha, beta, gamma)
                };
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(j);
                for (x, y) in left[i].iter_mut().zip(right[0].iter_mut()) {
                    let (xi, yj) = (*x, *y);
                    *x = c * xi - s * yj;
                    *y = s * xi + c * yj;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

/// Schatten-p norm: the ℓ_p norm of the singular values. `p` may be
/// `f64::INFINITY`.
pub fn schatten_norm(a: &Mat, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "Schatten exponent must be >= 1, got {p}"
        )));
    }
    let sv = singular_values(a)?;
    Ok(lp_of_nonneg(&sv, p))
}

/// ℓ_p norm of a nonnegative vector sorted in descending order, scaled by
/// the leading entry to avoid overflow.
fn lp_of_nonneg(sv: &[f64], p: f64) -> f64 {
    let top = sv[0];
    if top == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return top;
    }
    if p == 1.0 {
        return sv.iter().sum();
    }
    top * sv.iter().map(|s| (s / top).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Sum of singular values.
pub fn nuclear_norm(a: &Mat) -> Result<f64> {
    schatten_norm(a, 1.0)
}

/// Largest singular value.
pub fn spectral_norm(a: &Mat) -> Result<f64> {
    schatten_norm(a, f64::INFINITY)
}

/// `√Σ a_ij²`, computed from the entries.
pub fn fro_norm(a: &Mat) -> f64 {
    a.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt()
}
