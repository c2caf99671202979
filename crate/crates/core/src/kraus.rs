//! Born-order evolution channels and their canonical Kraus decomposition.
//!
//! Expanding the interaction-picture evolution to second order in the coupling
//! gives, for `ρ̃(t) = E(ρ̃(0))` with `ρ'_{ab} = Σ_{nm} E^{ab}_{nm} ρ_{nm}`,
//!
//! ```text
//! E^{ab}_{nm} = δ_{an}δ_{bm} − B_{an}δ_{bm} − δ_{an}B*_{bm} + A_{an,bm}
//! B_{an}      = Σ_{αβ} ∫₀ᵗds∫₀ˢdτ χ_{αβ}(s−τ) ⟨a|v_α(s) v_β(τ)|n⟩
//! X_{an,bm}   = Σ_{αβ} ∫₀ᵗds∫₀ˢdτ χ*_{αβ}(s−τ) ⟨a|v_α(s)|n⟩⟨b|v_β(τ)|m⟩*
//! A_{an,bm}   = X_{an,bm} + X*_{bm,an}
//! ```
//!
//! Arranged as a `d² × d²` matrix `M[(a,n),(b,m)]` this is Hermitian, and its
//! eigenvectors, reshaped row-major, are the canonical Kraus operators.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bath::BathCorrelation;
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, hermitize, kron, max_abs, max_abs_diff, ComplexMatrix, ErrorGeneratorSet,
    SystemHamiltonian, ONE, ZERO,
};
use crate::quadrature::{integrate_triangle, integrate_vec, QuadSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    Interaction,
    Schrodinger,
}

impl Picture {
    pub fn name(self) -> &'static str {
        match self {
            Picture::Interaction => "interaction",
            Picture::Schrodinger => "schrodinger",
        }
    }
}

/// `B_{an}(t)`, in the eigenbasis of `H_s` (columns of `basis`).
#[derive(Debug, Clone)]
pub struct BIntegral {
    pub t: f64,
    pub matrix: ComplexMatrix,
    pub basis: ComplexMatrix,
}

/// `A_{an,bm}(t)` stored as a `d² × d²` matrix with row `(a,n)`, column `(b,m)`.
#[derive(Debug, Clone)]
pub struct AIntegral {
    pub t: f64,
    pub matrix: ComplexMatrix,
    pub basis: ComplexMatrix,
}

fn check_problem(h: &SystemHamiltonian, gens: &ErrorGeneratorSet, bath: &BathCorrelation, t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("channel time must be finite and ≥ 0, got {t}")));
    }
    if gens.dim() != h.dim() {
        return Err(Error::DimensionMismatch(format!(
            "error generators are {0}x{0} but H_s is {1}x{1}",
            gens.dim(),
            h.dim()
        )));
    }
    if bath.n_generators() != gens.len() {
        return Err(Error::DimensionMismatch(format!(
            "bath couples {} generators, {} supplied",
            bath.n_generators(),
            gens.len()
        )));
    }
    Ok(())
}

/// `B` and `A` together; they share every evaluation of `χ` and `v(s)`.
pub fn born_integrals(
    t: f64,
    h: &SystemHamiltonian,
    gens: &ErrorGeneratorSet,
    bath: &BathCorrelation,
    quad: &QuadSettings,
) -> Result<(BIntegral, AIntegral)> {
    check_problem(h, gens, bath, t)?;
    let d = h.dim();
    let d2 = d * d;
    let n = gens.len();
    let e = h.energies().to_vec();
    let v_eig: Vec<ComplexMatrix> = gens.ops().iter().map(|v| h.to_eigenbasis(v)).collect();
    let at = |alpha: usize, x: f64| -> ComplexMatrix {
        ComplexMatrix::from_fn(d, d, |j, k| v_eig[alpha][(j, k)] * h_phase(&e, j, k, x))
    };

    // Layout: B entries first (d²), then X (d⁴), row-major in (a,n),(b,m).
    let dim = d2 + d2 * d2;
    let accumulate = |chi: &ComplexMatrix, vs: &[ComplexMatrix], vt: &[ComplexMatrix], out: &mut [Complex64]| {
        out.iter_mut().for_each(|z| *z = ZERO);
        for a in 0..n {
            for b in 0..n {
                let w = chi[(a, b)];
                if w == ZERO {
                    continue;
                }
                let prod = &vs[a] * &vt[b];
                for (o, p) in out[..d2].iter_mut().zip(prod.transpose().iter()) {
                    *o += w * p;
                }
                let wc = w.conj();
                for i in 0..d2 {
                    let x = vs[a][(i / d, i % d)] * wc;
                    if x == ZERO {
                        continue;
                    }
                    for j in 0..d2 {
                        out[d2 + i * d2 + j] += x * vt[b][(j / d, j % d)].conj();
                    }
                }
            }
        }
    };

    let values: Vec<Complex64> = if t == 0.0 {
        vec![ZERO; dim]
    } else if let Some(gamma) = bath.gamma() {
        // ∫₀ˢ dτ ½γ δ(s−τ) g(τ) = ¼γ g(s): the double integral collapses onto τ = s.
        let quarter = gamma.scale(0.25);
        integrate_vec(
            |s, out| {
                let vs: Vec<ComplexMatrix> = (0..n).map(|a| at(a, s)).collect();
                accumulate(&quarter, &vs, &vs, out);
                Ok(())
            },
            0.0,
            t,
            dim,
            quad,
        )?
        .value
    } else {
        integrate_triangle(
            |s, tau, out| {
                let chi = bath.chi_matrix(s - tau)?;
                let vs: Vec<ComplexMatrix> = (0..n).map(|a| at(a, s)).collect();
                let vt: Vec<ComplexMatrix> = (0..n).map(|b| at(b, tau)).collect();
                accumulate(&chi, &vs, &vt, out);
                Ok(())
            },
            t,
            dim,
            quad,
        )?
        .value
    };

    let b = ComplexMatrix::from_fn(d, d, |a, m| values[a * d + m]);
    let x = ComplexMatrix::from_fn(d2, d2, |i, j| values[d2 + i * d2 + j]);
    let a = &x + x.adjoint();
    Ok((
        BIntegral {
            t,
            matrix: b,
            basis: h.eigenbasis().clone(),
        },
        AIntegral {
            t,
            matrix: a,
            basis: h.eigenbasis().clone(),
        },
    ))
}

#[inline]
fn h_phase(e: &[f64], j: usize, k: usize, x: f64) -> Complex64 {
    Complex64::from_polar(1.0, (e[j] - e[k]) * x)
}

pub fn compute_b(
    t: f64,
    h: &SystemHamiltonian,
    gens: &ErrorGeneratorSet,
    bath: &BathCorrelation,
    quad: &QuadSettings,
) -> Result<BIntegral> {
    Ok(born_integrals(t, h, gens, bath, quad)?.0)
}

pub fn compute_a(
    t: f64,
    h: &SystemHamiltonian,
    gens: &ErrorGeneratorSet,
    bath: &BathCorrelation,
    quad: &QuadSettings,
) -> Result<AIntegral> {
    Ok(born_integrals(t, h, gens, bath, quad)?.1)
}

/// Superoperator matrix `M[(a,n),(b,m)] = E^{ab}_{nm}` in the computational basis.
#[derive(Debug, Clone)]
pub struct ChannelMatrix {
    pub d: usize,
    pub matrix: ComplexMatrix,
    pub picture: Picture,
    pub t: f64,
    /// `‖M − M†‖_max` before symmetrisation.
    pub hermiticity_dev: f64,
    /// `‖B‖_max` of the Born integrals this channel came from (0 otherwise).
    pub b_scale: f64,
}

impl ChannelMatrix {
    pub fn identity(d: usize, t: f64, picture: Picture) -> Self {
        let mut matrix = ComplexMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                matrix[(i * d + i, j * d + j)] = ONE;
            }
        }
        Self {
            d,
            matrix,
            picture,
            t,
            hermiticity_dev: 0.0,
            b_scale: 0.0,
        }
    }

    /// `M = Σ_α κ_α κ_α†` with `κ_α` the row-major vectorisation of `K_α`.
    pub fn from_kraus(ops: &[ComplexMatrix], t: f64, picture: Picture) -> Result<Self> {
        let d = ops
            .first()
            .map(|k| k.nrows())
            .ok_or_else(|| Error::InvalidInput("empty Kraus set".into()))?;
        if ops.iter().any(|k| k.shape() != (d, d)) {
            return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
        }
        let mut matrix = ComplexMatrix::zeros(d * d, d * d);
        for k in ops {
            let kappa = ComplexMatrix::from_iterator(d * d, 1, k.transpose().iter().copied());
            matrix += &kappa * kappa.adjoint();
        }
        Ok(Self {
            d,
            matrix,
            picture,
            t,
            hermiticity_dev: 0.0,
            b_scale: 0.0,
        })
    }

    /// `ρ'_{ab} = Σ_{nm} M[(a,n),(b,m)] ρ_{nm}`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.d;
        if rho.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "state is {:?}, channel acts on {d}x{d}",
                rho.shape()
            )));
        }
        Ok(ComplexMatrix::from_fn(d, d, |a, b| {
            let mut acc = ZERO;
            for n in 0..d {
                for m in 0..d {
                    acc += self.matrix[(a * d + n, b * d + m)] * rho[(n, m)];
                }
            }
            acc
        }))
    }
}

/// Build `M` from `B` and `A` (interaction picture, computational basis).
pub fn assemble_channel(b: &BIntegral, a: &AIntegral) -> Result<ChannelMatrix> {
    let d = b.matrix.nrows();
    if b.matrix.shape() != (d, d) || a.matrix.shape() != (d * d, d * d) || a.basis.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "B is {:?}, A is {:?}",
            b.matrix.shape(),
            a.matrix.shape()
        )));
    }
    if b.t != a.t {
        return Err(Error::InvalidInput(format!("B at t = {} but A at t = {}", b.t, a.t)));
    }
    if max_abs_diff(&b.basis, &a.basis) > 0.0 {
        return Err(Error::InvalidInput("B and A use different bases".into()));
    }
    let mut m = a.matrix.clone();
    for an in 0..d * d {
        let (ai, ni) = (an / d, an % d);
        for bm in 0..d * d {
            let (bi, mi) = (bm / d, bm % d);
            let mut v = ZERO;
            if ai == ni && bi == mi {
                v += ONE;
            }
            if bi == mi {
                v -= b.matrix[(ai, ni)];
            }
            if ai == ni {
                v -= b.matrix[(bi, mi)].conj();
            }
            m[(an, bm)] += v;
        }
    }
    let w = &b.basis;
    let ww = kron(w, &w.map(|z| z.conj()));
    let m = &ww * m * ww.adjoint();
    let hermiticity_dev = max_abs_diff(&m, &m.adjoint());
    Ok(ChannelMatrix {
        d,
        matrix: m,
        picture: Picture::Interaction,
        t: b.t,
        hermiticity_dev,
        b_scale: max_abs(&b.matrix),
    })
}

/// Born channel at time `t` in one call.
pub fn born_channel(
    t: f64,
    h: &SystemHamiltonian,
    gens: &ErrorGeneratorSet,
    bath: &BathCorrelation,
    quad: &QuadSettings,
) -> Result<ChannelMatrix> {
    let (b, a) = born_integrals(t, h, gens, bath, quad)?;
    assemble_channel(&b, &a)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct KrausOptions {
    /// Largest negative eigenvalue magnitude that is clipped rather than
    /// rejected. Defaults to `1e-8 + 10·b_scale²`.
    pub cp_tolerance: Option<f64>,
    /// Rescale `K_α → K_α S^{−1/2}` with `S = Σ K†K`.
    pub normalize: bool,
}

/// Default clipping threshold for a channel with Born scale `b_scale`.
pub fn default_cp_tolerance(b_scale: f64) -> f64 {
    1e-8 + 10.0 * b_scale * b_scale
}

#[derive(Debug, Clone, Serialize)]
pub struct KrausSet {
    pub t: f64,
    pub picture: Picture,
    #[serde(serialize_with = "crate::io::serialize_matrices")]
    pub operators: Vec<ComplexMatrix>,
    pub eigenvalues: Vec<f64>,
    pub completeness_dev: f64,
    /// Negative eigenvalues that were set to zero.
    #[serde(skip)]
    pub clipped: Vec<f64>,
    #[serde(skip)]
    pub cp_tolerance: f64,
}

/// `‖Σ K†K − I‖_max`.
pub fn completeness_deviation(ops: &[ComplexMatrix]) -> f64 {
    let Some(first) = ops.first() else {
        return f64::INFINITY;
    };
    let d = first.nrows();
    let mut s = ComplexMatrix::zeros(d, d);
    for k in ops {
        s += k.adjoint() * k;
    }
    max_abs_diff(&s, &ComplexMatrix::identity(d, d))
}

fn fix_phase(k: &mut ComplexMatrix) {
    let max = max_abs(k);
    if max == 0.0 {
        return;
    }
    // First entry (row-major) within rounding of the maximum, for reproducibility.
    let pivot = (0..k.nrows())
        .flat_map(|i| (0..k.ncols()).map(move |j| (i, j)))
        .find(|&(i, j)| k[(i, j)].norm() >= max * (1.0 - 1e-10))
        .expect("a maximal entry exists");
    let z = k[pivot];
    let phase = z.conj() / z.norm();
    k.iter_mut().for_each(|x| *x *= phase);
}

fn inverse_sqrt(s: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (vals, vecs) = hermitian_eigen(s);
    if vals[0] <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "Σ K†K is singular (eigenvalue {:.3e}); cannot normalise",
            vals[0]
        )));
    }
    let d = s.nrows();
    let diag = ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::new(vals[i].powf(-0.5), 0.0)
        } else {
            ZERO
        }
    });
    Ok(&vecs * diag * vecs.adjoint())
}

/// Canonical Kraus set from the eigendecomposition of `M`, eigenvalues descending.
pub fn canonical_kraus(m: &ChannelMatrix, opts: &KrausOptions) -> Result<KrausSet> {
    let d = m.d;
    let herm = hermitize(&m.matrix);
    let cp_tolerance = opts.cp_tolerance.unwrap_or_else(|| default_cp_tolerance(m.b_scale));
    let (vals, vecs) = hermitian_eigen(&herm.matrix);
    let scale = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let zero_level = 64.0 * f64::EPSILON * scale * (d * d) as f64;

    let mut operators = Vec::new();
    let mut eigenvalues = Vec::new();
    let mut clipped = Vec::new();
    for idx in (0..vals.len()).rev() {
        let lambda = vals[idx];
        if lambda.abs() <= zero_level {
            continue;
        }
        if lambda < 0.0 {
            if lambda < -cp_tolerance {
                return Err(Error::NotCompletelyPositive {
                    eigenvalue: lambda,
                    tolerance: cp_tolerance,
                });
            }
            clipped.push(lambda);
            continue;
        }
        let amp = lambda.sqrt();
        let mut k = ComplexMatrix::from_fn(d, d, |a, n| vecs[(a * d + n, idx)] * amp);
        fix_phase(&mut k);
        operators.push(k);
        eigenvalues.push(lambda);
    }
    if operators.is_empty() {
        return Err(Error::InvalidInput("channel matrix has no positive eigenvalues".into()));
    }
    if opts.normalize {
        let mut s = ComplexMatrix::zeros(d, d);
        for k in &operators {
            s += k.adjoint() * k;
        }
        let inv = inverse_sqrt(&s)?;
        for k in operators.iter_mut() {
            *k = &*k * &inv;
        }
    }
    let completeness_dev = completeness_deviation(&operators);
    Ok(KrausSet {
        t: m.t,
        picture: m.picture,
        operators,
        eigenvalues,
        completeness_dev,
        clipped,
        cp_tolerance,
    })
}

impl KrausSet {
    pub fn from_operators(operators: Vec<ComplexMatrix>, t: f64, picture: Picture) -> Result<Self> {
        let d = operators
            .first()
            .map(|k| k.nrows())
            .ok_or_else(|| Error::InvalidInput("empty Kraus set".into()))?;
        if operators.iter().any(|k| k.shape() != (d, d)) {
            return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
        }
        let eigenvalues = operators.iter().map(|k| k.norm_squared()).collect();
        Ok(Self {
            t,
            picture,
            completeness_dev: completeness_deviation(&operators),
            operators,
            eigenvalues,
            clipped: Vec::new(),
            cp_tolerance: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    pub fn channel_matrix(&self) -> ChannelMatrix {
        ChannelMatrix::from_kraus(&self.operators, self.t, self.picture).expect("Kraus set is non-empty and square")
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        self.write_json(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

/// Move an interaction-picture set to the Schrödinger picture: `K_α = e^{−iH_s t} K̃_α`.
pub fn to_schrodinger(set: &KrausSet, h: &SystemHamiltonian) -> Result<KrausSet> {
    if set.picture != Picture::Interaction {
        return Err(Error::InvalidInput("Kraus set is already in the Schrödinger picture".into()));
    }
    if h.dim() != set.dim() {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian is {0}x{0}, Kraus operators {1}x{1}",
            h.dim(),
            set.dim()
        )));
    }
    let u = h.propagator(set.t);
    let operators: Vec<ComplexMatrix> = set.operators.iter().map(|k| &u * k).collect();
    Ok(KrausSet {
        t: set.t,
        picture: Picture::Schrodinger,
        completeness_dev: completeness_deviation(&operators),
        operators,
        eigenvalues: set.eigenvalues.clone(),
        clipped: set.clipped.clone(),
        cp_tolerance: set.cp_tolerance,
    })
}

/// `Σ_α K_α ρ K_α†`.
pub fn apply_channel(set: &KrausSet, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = set.dim();
    if rho.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "state is {:?}, Kraus operators are {d}x{d}",
            rho.shape()
        )));
    }
    let mut out = ComplexMatrix::zeros(d, d);
    for k in &set.operators {
        out += k * rho * k.adjoint();
    }
    Ok(out)
}

/// Whether two Kraus sets induce the same channel matrix within `tol`.
pub fn kraus_equivalent(k1: &KrausSet, k2: &KrausSet, tol: f64) -> bool {
    if k1.dim() != k2.dim() {
        return false;
    }
    max_abs_diff(&k1.channel_matrix().matrix, &k2.channel_matrix().matrix) <= tol
}
