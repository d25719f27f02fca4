//! Bessel, weak Bessel and interpolation constants of a Gram matrix.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::CurveBasis;
use crate::kernels::{basis_change, basis_matrix, GramMatrix, KernelError};
use crate::linalg::symmetric_eigen;
use crate::report::BoundReport;

/// Relative slack on the spectral bound `lambda_max <= 2 max G_jj`.
pub const WEAK_STRONG_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RieszError {
    #[error("Gram matrix is empty")]
    Empty,
    #[error("Gram matrix is not positive definite (lambda_min = {0})")]
    NotPositiveDefinite(f64),
    #[error("coefficient vector has length {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Basis(#[from] KernelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszConstants {
    pub c_b: f64,
    pub c_b_weak: f64,
    pub c_i: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl RieszConstants {
    /// `c_b * c_i`, the condition number square root; at least 1.
    pub fn condition(&self) -> f64 {
        self.c_b * self.c_i
    }

    /// `lambda_max <= 2 max G_jj`.
    pub fn weak_strong_bound(&self) -> BoundReport {
        BoundReport::le(
            "lambda_max <= 2 max G_jj",
            self.lambda_max,
            2.0 * self.c_b_weak * self.c_b_weak * (1.0 + WEAK_STRONG_SLACK),
        )
    }
}

pub fn constants(g: &GramMatrix) -> Result<RieszConstants, RieszError> {
    if g.dim() == 0 {
        return Err(RieszError::Empty);
    }
    let e = symmetric_eigen(g.matrix());
    let lambda_min = e.values[0];
    let lambda_max = *e.values.last().unwrap();
    if !(lambda_min > 0.0) {
        return Err(RieszError::NotPositiveDefinite(lambda_min));
    }
    Ok(RieszConstants {
        c_b: lambda_max.sqrt(),
        c_b_weak: g.max_diagonal().sqrt(),
        c_i: 1.0 / lambda_min.sqrt(),
        lambda_min,
        lambda_max,
    })
}

/// `a^T G a`, the squared energy of `sum_j a_j v_j`.
pub fn riesz_quadratic_form(g: &GramMatrix, a: &[f64]) -> Result<f64, RieszError> {
    if a.len() != g.dim() {
        return Err(RieszError::Dimension {
            expected: g.dim(),
            got: a.len(),
        });
    }
    Ok(g.matrix().quadratic_form(a))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisConstants {
    pub hole: RieszConstants,
    pub curve: RieszConstants,
    pub norm_a: f64,
    pub norm_a_inv: f64,
    pub envelopes: Vec<BoundReport>,
}

impl BasisConstants {
    pub fn within_envelopes(&self) -> bool {
        self.envelopes.iter().all(|b| b.holds)
    }
}

/// Constants of the curve-basis Gram, with the operator-norm envelopes
/// `c_b(curve) <= |A^-1| c_b(hole)` and `c_i(curve) <= |A^T| c_i(hole)`.
pub fn constants_under_basis(
    g: &GramMatrix,
    basis: &CurveBasis,
) -> Result<BasisConstants, RieszError> {
    let hole = constants(g)?;
    let curve = constants(&basis_change(g, basis)?)?;
    let a = basis_matrix(basis);
    let norm_a = a.transpose().spectral_norm();
    let norm_a_inv = a
        .inverse()
        .ok_or(KernelError::SingularBasis)?
        .spectral_norm();
    let tol = 1.0 + 1e-9;
    let envelopes = vec![
        BoundReport::le(
            "c_b(curve) <= |A^-1| c_b(hole)",
            curve.c_b,
            norm_a_inv * hole.c_b * tol,
        ),
        BoundReport::le(
            "c_i(curve) <= |A^T| c_i(hole)",
            curve.c_i,
            norm_a * hole.c_i * tol,
        ),
    ];
    Ok(BasisConstants {
        hole,
        curve,
        norm_a,
        norm_a_inv,
        envelopes,
    })
}
