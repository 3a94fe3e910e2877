use serde::Serialize;

use super::Hyperparams;
use crate::error::{Error, Result};
use crate::matfun::{spectral_norm, sym_eig, Mat, SymPsd};

/// Parameters, first moment, both preconditioner accumulators and the step
/// counter.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub x: Mat,
    pub m_mom: Mat,
    pub l: SymPsd,
    pub r: SymPsd,
    pub k: u64,
    roots: Option<Roots>,
}

/// Cached preconditioner powers, reused between refreshes when
/// `root_interval > 1`. `None` factors are identities.
#[derive(Debug, Clone, PartialEq)]
struct Roots {
    left: Option<Mat>,
    right: Option<Mat>,
    trace_l_sqrt: f64,
    trace_r_sqrt: f64,
}

/// Per-step quantities, all computed from `L_ε`, `R_ε` of the same step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiagnostics {
    /// `‖L_ε^{-1/(2p)} M R_ε^{-1/(2q)}‖_op`
    pub update_op_norm: f64,
    /// `‖X_{k+1}‖_op`
    pub x_op_norm: f64,
    /// `tr(L_ε^{1/2})`
    pub trace_l_sqrt: f64,
    /// `tr(R_ε^{1/2})`
    pub trace_r_sqrt: f64,
}

impl OptimizerState {
    /// Starting state: `x1`, zero moment, zero accumulators, `k = 0`.
    pub fn init(x1: Mat, hyper: &Hyperparams) -> Result<Self> {
        hyper.validate()?;
        if !x1.is_finite() {
            return Err(Error::NonFinite("OptimizerState::init"));
        }
        let (m, n) = x1.shape();
        Ok(Self {
            m_mom: Mat::zeros(m, n),
            l: SymPsd::zeros(m),
            r: SymPsd::zeros(n),
            x: x1,
            k: 0,
            roots: None,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.x.shape()
    }

    /// One optimizer step with gradient sample `g`. Returns the next state;
    /// `self` is left untouched.
    pub fn step(&self, g: &Mat, hyper: &Hyperparams) -> Result<(OptimizerState, StepDiagnostics)> {
        hyper.validate()?;
        if g.shape() != self.x.shape() {
            return Err(Error::Shape {
                op: "step",
                expected: self.x.shape(),
                got: g.shape(),
            });
        }
        if !g.is_finite() {
            return Err(Error::NonFinite("step gradient"));
        }
        let Hyperparams {
            eta,
            theta,
            beta,
            lambda,
            eps,
            pq,
            root_interval,
        } = *hyper;

        let m_mom = self.m_mom.lin_comb(theta, g, 1.0 - theta)?;
        let l = self.l.combine(beta, &SymPsd::gram_rows(g), 1.0 - beta)?;
        let r = self.r.combine(beta, &SymPsd::gram_cols(g), 1.0 - beta)?;
        let k = self.k + 1;

        let refresh = root_interval == 1 || self.roots.is_none() || (k - 1).is_multiple_of(root_interval);
        let roots = if refresh {
            let l_eig = sym_eig(&l)?.shifted(eps);
            let r_eig = sym_eig(&r)?.shifted(eps);
            Roots {
                left: match pq.p().is_infinite() {
                    true => None,
                    false => Some(l_eig.power(pq.left_power())?.into_mat()),
                },
                right: match pq.q().is_infinite() {
                    true => None,
                    false => Some(r_eig.power(pq.right_power())?.into_mat()),
                },
                trace_l_sqrt: l_eig.trace_power(0.5)?,
                trace_r_sqrt: r_eig.trace_power(0.5)?,
            }
        } else {
            self.roots.clone().expect("cached roots")
        };

        let mut update = m_mom.clone();
        if let Some(left) = &roots.left {
            update = left.mul_unchecked(&update);
        }
        if let Some(right) = &roots.right {
            update = update.mul_unchecked(right);
        }
        let x = self.x.lin_comb(1.0 - lambda * eta, &update, -eta)?;
        if !x.is_finite() {
            return Err(Error::NonFinite("step parameters"));
        }

        let diag = StepDiagnostics {
            update_op_norm: spectral_norm(&update)?,
            x_op_norm: spectral_norm(&x)?,
            trace_l_sqrt: roots.trace_l_sqrt,
            trace_r_sqrt: roots.trace_r_sqrt,
        };
        let next = OptimizerState {
            x,
            m_mom,
            l,
            r,
            k,
            roots: (root_interval > 1).then_some(roots),
        };
        Ok((next, diag))
    }
}
