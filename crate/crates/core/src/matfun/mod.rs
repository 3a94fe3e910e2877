//! Dense matrices, symmetric PSD matrix powers, and Schatten norms.

mod eigen;
mod mat;
mod norms;

pub use eigen::{psd_power, sym_eig, symmetric_eigen, EigenDecomp, SymPsd, PSD_TOL};
pub use mat::Mat;
pub use norms::{fro_norm, nuclear_norm, schatten_norm, singular_values, spectral_norm};

use crate::error::{Error, Result};
use crate::exponent::ExponentPair;

/// `L_ε^{-1/(2p)} · M · R_ε^{-1/(2q)}`.
///
/// A side whose exponent is infinite is skipped entirely.
pub fn precondition(l_eps: &SymPsd, m: &Mat, r_eps: &SymPsd, pq: ExponentPair) -> Result<Mat> {
    if l_eps.dim() != m.rows() || r_eps.dim() != m.cols() {
        return Err(Error::Shape {
            op: "precondition",
            expected: (l_eps.dim(), r_eps.dim()),
            got: m.shape(),
        });
    }
    let left = if pq.p().is_infinite() {
        m.clone()
    } else {
        psd_power(l_eps, pq.left_power())?.matrix().mul_unchecked(m)
    };
    if pq.q().is_infinite() {
        Ok(left)
    } else {
        Ok(left.mul_unchecked(psd_power(r_eps, pq.right_power())?.matrix()))
    }
}
