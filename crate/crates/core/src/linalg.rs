//! Least-squares solve through a column-scaled Householder QR.

use nalgebra::{DMatrix, DVector};

/// Relative threshold on the diagonal of R (after column equilibration)
/// below which the design matrix is treated as rank deficient.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LstsqFailure {
    Underdetermined,
    Singular,
}

/// Minimizes `||x * beta - y||` over `beta`.
///
/// Columns are scaled to unit norm before factorization so that regressors
/// of very different magnitudes do not mask rank decisions. Returns
/// [`LstsqFailure::Singular`] instead of a pseudo-solution when the
/// scaled R has a negligible pivot.
pub fn solve_least_squares(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
) -> Result<DVector<f64>, LstsqFailure> {
    let (rows, cols) = x.shape();
    if rows < cols {
        return Err(LstsqFailure::Underdetermined);
    }
    if cols == 0 {
        return Ok(DVector::zeros(0));
    }

    let scales: Vec<f64> = x.column_iter().map(|c| c.norm()).collect();
    if scales.iter().any(|&s| s == 0.0 || !s.is_finite()) {
        return Err(LstsqFailure::Singular);
    }
    let mut scaled = x.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).unscale_mut(*s);
    }

    let qr = scaled.qr();
    let r = qr.r();
    let diag_max = (0..cols).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..cols).any(|i| r[(i, i)].abs() <= RANK_TOLERANCE * diag_max) {
        return Err(LstsqFailure::Singular);
    }

    let mut rhs = y.clone();
    qr.q_tr_mul(&mut rhs);
    let rhs = rhs.rows(0, cols).into_owned();
    let mut beta = r
        .solve_upper_triangular(&rhs)
        .ok_or(LstsqFailure::Singular)?;
    for (j, s) in scales.iter().enumerate() {
        beta[j] /= s;
    }
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(LstsqFailure::Singular);
    }
    Ok(beta)
}
