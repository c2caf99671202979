//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Operators are `nalgebra::DMatrix<Complex64>`. Tolerances are relative to
//! the matrix max-norm unless a function says otherwise. Tensor products are
//! always ordered system ⊗ bath, with the system as the leading factor.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Hermiticity tolerance for user-supplied operators (relative).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance for density operators (absolute).
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest admissible eigenvalue of a density operator.
pub const MIN_EIGENVALUE_TOL: f64 = -1e-10;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entry modulus, `‖A‖_max`.
pub fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// `‖A − B‖_max`. Panics on shape mismatch.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff: shape mismatch");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()))
}

pub fn is_finite(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_finite(a: &ComplexMatrix, what: &str) -> Result<()> {
    if is_finite(a) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

fn ensure_square(a: &ComplexMatrix, what: &str) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

fn ensure_same_shape(a: &ComplexMatrix, b: &ComplexMatrix, op: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "{op}: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// `[A, B] = AB − BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(a, "commutator operand")?;
    ensure_same_shape(a, b, "commutator")?;
    Ok(a * b - b * a)
}

/// Hilbert–Schmidt inner product `Tr(A†B)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    ensure_same_shape(a, b, "hs_inner")?;
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

pub fn trace(a: &ComplexMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// Result of [`hermitize`]: the Hermitian part and how far the input was from it.
#[derive(Debug, Clone)]
pub struct Hermitized {
    pub matrix: ComplexMatrix,
    /// `‖A − A†‖_max` of the input.
    pub deviation: f64,
}

/// `(A + A†)/2`, reporting `‖A − A†‖_max`.
pub fn hermitize(a: &ComplexMatrix) -> Hermitized {
    let adj = a.adjoint();
    Hermitized {
        deviation: max_abs_diff(a, &adj),
        matrix: (a + &adj).scale(0.5),
    }
}

/// `‖A − A†‖_max / ‖A‖_max` (0 for the zero matrix).
pub fn hermiticity_deviation(a: &ComplexMatrix) -> f64 {
    let scale = max_abs(a);
    if scale == 0.0 {
        return 0.0;
    }
    max_abs_diff(a, &a.adjoint()) / scale
}

fn ensure_hermitian(a: &ComplexMatrix, tol: f64) -> Result<()> {
    let deviation = hermiticity_deviation(a);
    if deviation > tol {
        return Err(Error::NotHermitian {
            deviation,
            tolerance: tol,
        });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted ascending.
///
/// The input is symmetrized first; callers are expected to have validated
/// Hermiticity already.
pub fn hermitian_eigen(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = a.nrows();
    let eig = SymmetricEigen::new(hermitize(a).matrix);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn min_eigenvalue(a: &ComplexMatrix) -> f64 {
    hermitian_eigen(a).0.first().copied().unwrap_or(0.0)
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Reduce a `(d_sys·d_bath)²` operator over the bath factor.
pub fn partial_trace(rho_total: &ComplexMatrix, d_sys: usize, d_bath: usize) -> Result<ComplexMatrix> {
    let n = ensure_square(rho_total, "partial_trace input")?;
    if d_sys * d_bath != n {
        return Err(Error::DimensionMismatch(format!(
            "partial_trace: {d_sys}·{d_bath} != {n}"
        )));
    }
    Ok(ComplexMatrix::from_fn(d_sys, d_sys, |i, j| {
        (0..d_bath)
            .map(|k| rho_total[(i * d_bath + k, j * d_bath + k)])
            .sum()
    }))
}

/// Partial trace over the bath returning a validated density operator.
pub fn partial_trace_bath(
    rho_total: &ComplexMatrix,
    dims: (usize, usize),
) -> Result<DensityOperator> {
    DensityOperator::new(partial_trace(rho_total, dims.0, dims.1)?)
}

/// Single-qubit operators.
pub mod pauli {
    use super::{c, ComplexMatrix, ONE, ZERO};

    pub fn identity(d: usize) -> ComplexMatrix {
        ComplexMatrix::identity(d, d)
    }

    pub fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    pub fn sigma_y() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
    }

    pub fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
    }
}

/// Unit-trace, Hermitian, positive-semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        ensure_square(&matrix, "density operator")?;
        ensure_finite(&matrix, "density operator")?;
        ensure_hermitian(&matrix, HERMITIAN_TOL)?;
        let tr = trace(&matrix);
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidInput(format!(
                "density operator trace {tr} differs from 1"
            )));
        }
        let lowest = min_eigenvalue(&matrix);
        if lowest < MIN_EIGENVALUE_TOL {
            return Err(Error::InvalidInput(format!(
                "density operator has eigenvalue {lowest:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// `|ψ⟩⟨ψ|` for a normalized copy of `psi`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm2 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if psi.is_empty() || norm2 == 0.0 || !norm2.is_finite() {
            return Err(Error::InvalidInput("state vector must be nonzero".into()));
        }
        let d = psi.len();
        let m = ComplexMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / norm2);
        Self::new(m)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(d, d).scale(1.0 / d as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

impl AsRef<ComplexMatrix> for DensityOperator {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Time-independent system Hamiltonian with a cached eigendecomposition.
#[derive(Debug, Clone)]
pub struct SystemHamiltonian {
    matrix: ComplexMatrix,
    energies: Vec<f64>,
    basis: ComplexMatrix,
}

impl SystemHamiltonian {
    /// Validates Hermiticity and the eigen-reconstruction. A diagonal input
    /// keeps the computational basis and its own ordering.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let d = ensure_square(&matrix, "Hamiltonian")?;
        ensure_finite(&matrix, "Hamiltonian")?;
        ensure_hermitian(&matrix, HERMITIAN_TOL)?;
        let is_diagonal = (0..d).all(|i| (0..d).all(|j| i == j || matrix[(i, j)] == ZERO));
        let (energies, basis) = if is_diagonal {
            (
                (0..d).map(|i| matrix[(i, i)].re).collect(),
                ComplexMatrix::identity(d, d),
            )
        } else {
            hermitian_eigen(&matrix)
        };
        let h = Self {
            matrix,
            energies,
            basis,
        };
        let scale = max_abs(&h.matrix).max(f64::MIN_POSITIVE);
        let err = max_abs_diff(&h.reconstruct(), &h.matrix) / scale;
        if err > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "Hamiltonian eigendecomposition reconstruction error {err:.3e}"
            )));
        }
        Ok(h)
    }

    /// `½ε₀σ_z`.
    pub fn qubit_sigma_z(epsilon0: f64) -> Result<Self> {
        Self::new(pauli::sigma_z().scale(0.5 * epsilon0))
    }

    pub fn zero(d: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(d, d),
            energies: vec![0.0; d],
            basis: ComplexMatrix::identity(d, d),
        }
    }

    fn reconstruct(&self) -> ComplexMatrix {
        let d = self.dim();
        let diag = ComplexMatrix::from_fn(d, d, |i, j| {
            if i == j {
                c(self.energies[i], 0.0)
            } else {
                ZERO
            }
        });
        &self.basis * diag * self.basis.adjoint()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Columns are eigenvectors, in the order of [`Self::energies`].
    pub fn eigenbasis(&self) -> &ComplexMatrix {
        &self.basis
    }

    /// Express an operator in the eigenbasis: `W† A W`.
    pub fn to_eigenbasis(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.basis.adjoint() * a * &self.basis
    }

    /// Inverse of [`Self::to_eigenbasis`].
    pub fn from_eigenbasis(&self, a: &ComplexMatrix) -> ComplexMatrix {
        &self.basis * a * self.basis.adjoint()
    }

    /// `e^{−iH t}`.
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        let d = self.dim();
        let phases = ComplexMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, -self.energies[i] * t)
            } else {
                ZERO
            }
        });
        &self.basis * phases * self.basis.adjoint()
    }

    /// `e^{−iHt} ρ e^{+iHt}`.
    pub fn evolve(&self, rho: &ComplexMatrix, t: f64) -> ComplexMatrix {
        let u = self.propagator(t);
        &u * rho * u.adjoint()
    }

    /// Interaction-picture phase factor `e^{i(ε_j − ε_k)t}` for eigenbasis element `(j, k)`.
    #[inline]
    pub fn phase(&self, j: usize, k: usize, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, (self.energies[j] - self.energies[k]) * t)
    }
}

/// `v(t) = e^{+iH_s t} v e^{−iH_s t}`, evaluated in the `H_s` eigenbasis.
pub fn interaction_picture(v: &ComplexMatrix, h: &SystemHamiltonian, t: f64) -> Result<ComplexMatrix> {
    ensure_same_shape(v, h.matrix(), "interaction_picture")?;
    if t == 0.0 {
        return Ok(v.clone());
    }
    let mut ve = h.to_eigenbasis(v);
    for j in 0..h.dim() {
        for k in 0..h.dim() {
            ve[(j, k)] *= h.phase(j, k, t);
        }
    }
    Ok(h.from_eigenbasis(&ve))
}

/// Hermitian system operators `{v_α}` through which the bath couples.
#[derive(Debug, Clone)]
pub struct ErrorGeneratorSet {
    ops: Vec<ComplexMatrix>,
}

impl ErrorGeneratorSet {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidInput("at least one error generator is required".into()))?;
        let d = ensure_square(first, "error generator")?;
        for (alpha, v) in ops.iter().enumerate() {
            if v.shape() != (d, d) {
                return Err(Error::DimensionMismatch(format!(
                    "error generator {alpha} is {:?}, expected {d}x{d}",
                    v.shape()
                )));
            }
            ensure_finite(v, "error generator")?;
            ensure_hermitian(v, HERMITIAN_TOL)?;
        }
        Ok(Self { ops })
    }

    pub fn single(v: ComplexMatrix) -> Result<Self> {
        Self::new(vec![v])
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }
}

/// Matrix units `ê_{ab} = |a⟩⟨b|`, flat index `a·d + b`.
#[derive(Debug, Clone, Copy)]
pub struct OperatorBasis {
    d: usize,
}

impl OperatorBasis {
    pub fn new(d: usize) -> Self {
        Self { d }
    }

    pub fn len(&self) -> usize {
        self.d * self.d
    }

    pub fn is_empty(&self) -> bool {
        self.d == 0
    }

    pub fn flat_index(&self, a: usize, b: usize) -> usize {
        a * self.d + b
    }

    pub fn element(&self, a: usize, b: usize) -> ComplexMatrix {
        let mut e = ComplexMatrix::zeros(self.d, self.d);
        e[(a, b)] = ONE;
        e
    }

    /// All elements in flat-index order.
    pub fn elements(&self) -> Vec<ComplexMatrix> {
        (0..self.len())
            .map(|i| self.element(i / self.d, i % self.d))
            .collect()
    }
}
