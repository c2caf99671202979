use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermiticity_deviation, ComplexMatrix};

/// Trace distance `½ Σ |λ_i(ρ₁ − ρ₂)|` between Hermitian operators.
pub fn trace_distance(rho1: &ComplexMatrix, rho2: &ComplexMatrix) -> Result<f64> {
    if rho1.shape() != rho2.shape() || rho1.nrows() != rho1.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "trace distance between {:?} and {:?}",
            rho1.shape(),
            rho2.shape()
        )));
    }
    // Each operand is checked on its own scale: the difference of two nearly
    // equal states is dominated by rounding and says nothing about Hermiticity.
    for rho in [rho1, rho2] {
        let dev = hermiticity_deviation(rho);
        if dev > 1e-8 {
            return Err(Error::NotHermitian {
                deviation: dev,
                tolerance: 1e-8,
            });
        }
    }
    let diff = rho1 - rho2;
    let sym = (&diff + diff.adjoint()).scale(0.5);
    Ok(0.5 * hermitian_eigen(&sym).0.iter().map(|x| x.abs()).sum::<f64>())
}

/// Largest trace distance between paired snapshots.
pub fn max_trace_distance(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "comparing {} snapshots with {}",
            a.len(),
            b.len()
        )));
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| trace_distance(x, y))
        .try_fold(0.0f64, |acc, d| Ok(acc.max(d?)))
}
