//! Second-order TCL and Lindblad generators.
//!
//! Both generators act in the Schrödinger picture:
//! `dρ/dt = −i[H_s, ρ] + D(t)ρ`. For TCL2 the dissipator is
//!
//! ```text
//! C(t)ρ = Σ_α ( [Λ_α(t) ρ, v_α] + [v_α, ρ Λ_α(t)†] ),
//! Λ_α(t) = Σ_β ∫₀ᵗ du χ_{αβ}(u) v_β(−u),
//! ```
//!
//! with `v(−u)` in the interaction picture of `H_s`. Hermiticity of `C(t)ρ`
//! follows from `χ_{αβ}(−u) = χ*_{βα}(u)`, trace preservation from the
//! commutator structure.

use num_complex::Complex64;

use crate::bath::BathCorrelation;
use crate::error::{Error, Result};
use crate::linalg::{
    c, ensure_finite, hermitian_eigen, max_abs, max_abs_diff, ComplexMatrix, ErrorGeneratorSet,
    SystemHamiltonian, I, ZERO,
};
use crate::quadrature::{integrate_vec, QuadSettings};

/// Common interface of the generators the integrator can drive.
pub trait MasterEquation: Clone {
    fn hamiltonian(&self) -> &SystemHamiltonian;

    /// Same dissipator, new system Hamiltonian (for piecewise-constant controls).
    fn with_hamiltonian(&self, h: SystemHamiltonian) -> Result<Self>;

    /// The dissipative part at time `t`.
    fn dissipator(&self, t: f64, rho: &ComplexMatrix) -> Result<ComplexMatrix>;

    /// Full right-hand side `−i[H_s, ρ] + D(t)ρ`.
    fn rhs(&self, t: f64, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let h = self.hamiltonian().matrix();
        let mut out = self.dissipator(t, rho)?;
        let comm = h * rho - rho * h;
        out -= comm.map(|z| z * I);
        Ok(out)
    }
}

fn check_dimensions(h: &SystemHamiltonian, gens: &ErrorGeneratorSet, n_bath: usize) -> Result<()> {
    if gens.dim() != h.dim() {
        return Err(Error::DimensionMismatch(format!(
            "error generators are {0}x{0} but H_s is {1}x{1}",
            gens.dim(),
            h.dim()
        )));
    }
    if n_bath != gens.len() {
        return Err(Error::DimensionMismatch(format!(
            "bath couples {n_bath} generators, {} supplied",
            gens.len()
        )));
    }
    Ok(())
}

/// `∫₀ᵗ e^{iΩu} du`, stable as `Ω → 0`.
fn phase_integral(omega: f64, t: f64) -> Complex64 {
    let x = 0.5 * omega * t;
    let sinc = if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    };
    Complex64::from_polar(t * sinc, x)
}

#[derive(Debug, Clone)]
pub struct Tcl2Generator {
    h: SystemHamiltonian,
    generators: ErrorGeneratorSet,
    bath: BathCorrelation,
    quad: QuadSettings,
    /// `v_β` in the eigenbasis of `H_s`.
    v_eig: Vec<ComplexMatrix>,
}

impl Tcl2Generator {
    pub fn new(h: SystemHamiltonian, generators: ErrorGeneratorSet, bath: BathCorrelation) -> Result<Self> {
        check_dimensions(&h, &generators, bath.n_generators())?;
        let v_eig = generators.ops().iter().map(|v| h.to_eigenbasis(v)).collect();
        Ok(Self {
            h,
            generators,
            bath,
            quad: QuadSettings::new(1e-10, 1e-14),
            v_eig,
        })
    }

    pub fn with_quadrature(mut self, quad: QuadSettings) -> Self {
        self.quad = quad;
        self
    }

    pub fn generators(&self) -> &ErrorGeneratorSet {
        &self.generators
    }

    pub fn bath(&self) -> &BathCorrelation {
        &self.bath
    }

    pub fn quadrature(&self) -> &QuadSettings {
        &self.quad
    }

    /// `Λ_α(t)` in the computational basis, one matrix per generator.
    pub fn kernel(&self, t: f64) -> Result<Vec<ComplexMatrix>> {
        if !(t >= 0.0) {
            return Err(Error::InvalidInput(format!("TCL2 kernel requires t ≥ 0, got {t}")));
        }
        let n = self.generators.len();
        let d = self.h.dim();
        if t == 0.0 {
            return Ok(vec![ComplexMatrix::zeros(d, d); n]);
        }
        let eig = match &self.bath {
            BathCorrelation::Markovian { gamma } => {
                // Endpoint delta: ∫₀ᵗ du ½γ δ(u) v(−u) = ¼γ v.
                (0..n)
                    .map(|a| {
                        let mut m = ComplexMatrix::zeros(d, d);
                        for b in 0..n {
                            m += &self.v_eig[b] * (gamma[(a, b)] * 0.25);
                        }
                        m
                    })
                    .collect()
            }
            BathCorrelation::Discrete { .. } => self.kernel_discrete(t),
            BathCorrelation::Ohmic { .. } => self.kernel_quadrature_eig(t)?,
        };
        Ok(eig.iter().map(|m| self.h.from_eigenbasis(m)).collect())
    }

    /// `Λ_α(t)` by adaptive quadrature of `χ_{αβ}(u) v_β(−u)` regardless of the bath model.
    pub fn kernel_quadrature(&self, t: f64) -> Result<Vec<ComplexMatrix>> {
        if self.bath.is_markovian() {
            return self.kernel(t);
        }
        if !(t >= 0.0) {
            return Err(Error::InvalidInput(format!("TCL2 kernel requires t ≥ 0, got {t}")));
        }
        Ok(self
            .kernel_quadrature_eig(t)?
            .iter()
            .map(|m| self.h.from_eigenbasis(m))
            .collect())
    }

    fn kernel_discrete(&self, t: f64) -> Vec<ComplexMatrix> {
        let BathCorrelation::Discrete {
            modes, temperature, ..
        } = &self.bath
        else {
            unreachable!("kernel_discrete on a non-discrete bath")
        };
        let n = self.generators.len();
        let d = self.h.dim();
        let e = self.h.energies();
        let mut out = vec![ComplexMatrix::zeros(d, d); n];
        for j in 0..d {
            for k in 0..d {
                let delta = e[j] - e[k];
                // I_{αβ} = ∫₀ᵗ χ_{αβ}(u) e^{−iΔu} du, mode by mode.
                let mut integral = vec![ZERO; n * n];
                for m in modes {
                    let nbar = crate::bath::bose_occupation(m.omega, *temperature);
                    let up = phase_integral(m.omega - delta, t) * nbar;
                    let down = phase_integral(-m.omega - delta, t) * (nbar + 1.0);
                    for a in 0..n {
                        for b in 0..n {
                            let ga = m.couplings[a];
                            let gb = m.couplings[b];
                            integral[a * n + b] += ga * gb.conj() * up + ga.conj() * gb * down;
                        }
                    }
                }
                for (a, lam) in out.iter_mut().enumerate() {
                    lam[(j, k)] = (0..n).map(|b| self.v_eig[b][(j, k)] * integral[a * n + b]).sum();
                }
            }
        }
        out
    }

    fn kernel_quadrature_eig(&self, t: f64) -> Result<Vec<ComplexMatrix>> {
        let n = self.generators.len();
        let d = self.h.dim();
        let e = self.h.energies().to_vec();
        let out = integrate_vec(
            |u, buf| {
                let chi = self.bath.chi_matrix(u)?;
                for j in 0..d {
                    for k in 0..d {
                        let ph = Complex64::from_polar(1.0, -(e[j] - e[k]) * u);
                        for a in 0..n {
                            let mut acc = ZERO;
                            for b in 0..n {
                                acc += chi[(a, b)] * self.v_eig[b][(j, k)];
                            }
                            buf[(a * d + j) * d + k] = acc * ph;
                        }
                    }
                }
                Ok(())
            },
            0.0,
            t,
            n * d * d,
            &self.quad,
        )?;
        Ok((0..n)
            .map(|a| ComplexMatrix::from_fn(d, d, |j, k| out.value[(a * d + j) * d + k]))
            .collect())
    }

    /// `C(t)ρ` from a precomputed kernel.
    pub fn apply_kernel(&self, kernel: &[ComplexMatrix], rho: &ComplexMatrix) -> ComplexMatrix {
        let d = self.h.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for (lam, v) in kernel.iter().zip(self.generators.ops()) {
            let lr = lam * rho;
            let rl = rho * lam.adjoint();
            out += &lr * v - v * &lr;
            out += v * &rl - &rl * v;
        }
        out
    }
}

impl MasterEquation for Tcl2Generator {
    fn hamiltonian(&self) -> &SystemHamiltonian {
        &self.h
    }

    fn with_hamiltonian(&self, h: SystemHamiltonian) -> Result<Self> {
        Ok(Self::new(h, self.generators.clone(), self.bath.clone())?.with_quadrature(self.quad))
    }

    fn dissipator(&self, t: f64, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let kernel = self.kernel(t)?;
        Ok(self.apply_kernel(&kernel, rho))
    }
}

/// `C⁽²⁾(t)ρ`: the TCL2 dissipator alone, without the Hamiltonian part.
pub fn collision_tcl2(gen: &Tcl2Generator, t: f64, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.shape() != (gen.h.dim(), gen.h.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "state is {:?}, generator acts on {}x{}",
            rho.shape(),
            gen.h.dim(),
            gen.h.dim()
        )));
    }
    ensure_finite(rho, "state")?;
    gen.dissipator(t, rho)
}

/// Lindblad generator `½ Σ Γ_{αβ} ([v_α ρ, v_β] + [v_α, ρ v_β])`.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    h: SystemHamiltonian,
    generators: ErrorGeneratorSet,
    rates: ComplexMatrix,
}

impl LindbladGenerator {
    /// `rates` must be Hermitian positive-semidefinite.
    pub fn new(h: SystemHamiltonian, generators: ErrorGeneratorSet, rates: ComplexMatrix) -> Result<Self> {
        if rates.nrows() != rates.ncols() {
            return Err(Error::DimensionMismatch(format!("rate matrix is {:?}", rates.shape())));
        }
        check_dimensions(&h, &generators, rates.nrows())?;
        ensure_finite(&rates, "rate matrix")?;
        let scale = max_abs(&rates).max(1.0);
        let dev = max_abs_diff(&rates, &rates.adjoint());
        if dev > 1e-12 * scale {
            return Err(Error::NotHermitian {
                deviation: dev,
                tolerance: 1e-12,
            });
        }
        let lowest = hermitian_eigen(&rates).0[0];
        if lowest < -1e-12 * scale {
            return Err(Error::InvalidInput(format!(
                "rate matrix has negative eigenvalue {lowest:.3e}"
            )));
        }
        Ok(Self { h, generators, rates })
    }

    pub fn rates(&self) -> &ComplexMatrix {
        &self.rates
    }

    pub fn generators(&self) -> &ErrorGeneratorSet {
        &self.generators
    }
}

impl MasterEquation for LindbladGenerator {
    fn hamiltonian(&self) -> &SystemHamiltonian {
        &self.h
    }

    fn with_hamiltonian(&self, h: SystemHamiltonian) -> Result<Self> {
        Self::new(h, self.generators.clone(), self.rates.clone())
    }

    fn dissipator(&self, _t: f64, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        Ok(lindblad_apply(self, rho))
    }
}

pub fn lindblad_apply(gen: &LindbladGenerator, rho: &ComplexMatrix) -> ComplexMatrix {
    let d = gen.h.dim();
    let ops = gen.generators.ops();
    let mut out = ComplexMatrix::zeros(d, d);
    for (a, va) in ops.iter().enumerate() {
        let var = va * rho;
        for (b, vb) in ops.iter().enumerate() {
            let g = gen.rates[(a, b)];
            if g == ZERO {
                continue;
            }
            let rvb = rho * vb;
            let term = &var * vb - vb * &var + va * &rvb - &rvb * va;
            out += term * (g * 0.5);
        }
    }
    out
}

/// Markovian limit of a TCL2 generator whose bath is `½γ δ(t)`.
///
/// With the endpoint delta carrying half its weight the Lindblad rate matrix
/// is `Γ = γᵀ/2`, which reproduces `collision_tcl2` exactly for `t > 0`.
pub fn reduce_to_lindblad(gen: &Tcl2Generator) -> Result<LindbladGenerator> {
    let gamma = gen.bath.gamma().ok_or_else(|| {
        Error::InvalidInput(format!(
            "Lindblad reduction needs a markovian bath, got {}",
            gen.bath.model().name()
        ))
    })?;
    LindbladGenerator::new(gen.h.clone(), gen.generators.clone(), gamma.transpose().scale(0.5))
}

/// Convenience: scalar dephasing Lindblad generator `v = σ_z` at rate `Γ`.
pub fn dephasing_lindblad(h: SystemHamiltonian, rate: f64) -> Result<LindbladGenerator> {
    LindbladGenerator::new(
        h,
        ErrorGeneratorSet::single(crate::linalg::pauli::sigma_z())?,
        ComplexMatrix::from_element(1, 1, c(rate, 0.0)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::BathMode;
    use crate::linalg::{pauli, trace};
    use crate::testutil::{random_density, random_hermitian, rng};

    fn dephasing_gen(g: f64, omega: f64, eps: f64) -> Tcl2Generator {
        Tcl2Generator::new(
            SystemHamiltonian::qubit_sigma_z(eps).unwrap(),
            ErrorGeneratorSet::single(pauli::sigma_z()).unwrap(),
            BathCorrelation::discrete_single(&[(c(g, 0.0), omega)], 0.0).unwrap(),
        )
        .unwrap()
    }

    fn plus() -> ComplexMatrix {
        ComplexMatrix::from_element(2, 2, c(0.5, 0.0))
    }

    fn two_generator_gen() -> Tcl2Generator {
        let modes = vec![
            BathMode {
                omega: 0.9,
                couplings: vec![c(0.2, 0.0), c(0.05, 0.1)],
            },
            BathMode {
                omega: 2.2,
                couplings: vec![c(0.0, 0.15), c(0.1, -0.02)],
            },
        ];
        let h = ComplexMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.2, 0.1), c(0.2, -0.1), c(-0.4, 0.0)]);
        Tcl2Generator::new(
            SystemHamiltonian::new(h).unwrap(),
            ErrorGeneratorSet::new(vec![pauli::sigma_x(), pauli::sigma_z()]).unwrap(),
            BathCorrelation::discrete(modes, 0.4).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn phase_integral_small_and_large_frequency() {
        assert!((phase_integral(0.0, 2.0) - c(2.0, 0.0)).norm() < 1e-16);
        for &(w, t) in &[(1e-7, 3.0), (0.7, 2.0), (-5.0, 1.3)] {
            let want = (Complex64::from_polar(1.0, w * t) - 1.0) / (I * w);
            assert!((phase_integral(w, t) - want).norm() < 1e-9);
        }
    }

    #[test]
    fn zero_time_gives_zero() {
        let gen = dephasing_gen(0.1, 1.0, 1.0);
        assert_eq!(max_abs(&collision_tcl2(&gen, 0.0, &plus()).unwrap()), 0.0);
        assert!(collision_tcl2(&gen, -0.1, &plus()).is_err());
    }

    #[test]
    fn diagonal_state_is_stationary_under_dephasing() {
        let gen = dephasing_gen(0.1, 1.0, 1.0);
        let rho = ComplexMatrix::from_row_slice(2, 2, &[c(0.3, 0.0), ZERO, ZERO, c(0.7, 0.0)]);
        for t in [0.5, 3.0] {
            assert!(max_abs(&collision_tcl2(&gen, t, &rho).unwrap()) < 1e-15);
        }
    }

    #[test]
    fn discrete_kernel_matches_quadrature() {
        let gen = two_generator_gen();
        for t in [0.3, 2.7, 9.0] {
            let fast = gen.kernel(t).unwrap();
            let slow = gen.kernel_quadrature(t).unwrap();
            for (a, b) in fast.iter().zip(&slow) {
                assert!(max_abs_diff(a, b) < 1e-11, "t = {t}");
            }
        }
    }

    #[test]
    fn dissipator_matches_termwise_double_sum() {
        // Independent route: interaction-picture operators by matrix exponential and
        // χ evaluated pointwise, integrated by composite Simpson on a fine grid.
        let gen = two_generator_gen();
        let t = 1.4;
        let mut r = rng(5);
        let rho = random_density(&mut r, 2);
        let h = gen.hamiltonian().matrix().clone();
        let n_steps = 4000;
        let dt = t / n_steps as f64;
        let mut want = ComplexMatrix::zeros(2, 2);
        let ops = gen.generators().ops();
        for i in 0..=n_steps {
            let u = i as f64 * dt;
            let w = if i == 0 || i == n_steps {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            } * dt
                / 3.0;
            let prop = (h.map(|z| z * c(0.0, u))).exp();
            for (a, va) in ops.iter().enumerate() {
                for (b, vb) in ops.iter().enumerate() {
                    let vbu = prop.adjoint() * vb * &prop;
                    let chi_ab = gen.bath().chi(a, b, u).unwrap();
                    let chi_ba_neg = gen.bath().chi(b, a, -u).unwrap();
                    let term1 = (&vbu * &rho) * va - va * (&vbu * &rho);
                    let term2 = va * (&rho * &vbu) - (&rho * &vbu) * va;
                    want += term1 * (chi_ab * w) + term2 * (chi_ba_neg * w);
                }
            }
        }
        let got = collision_tcl2(&gen, t, &rho).unwrap();
        assert!(max_abs_diff(&got, &want) < 1e-10);
    }

    #[test]
    fn hermitian_and_trace_free_on_random_states() {
        let gen = two_generator_gen();
        let mut r = rng(17);
        for _ in 0..20 {
            let rho = random_hermitian(&mut r, 2);
            let out = collision_tcl2(&gen, 2.3, &rho).unwrap();
            let scale = max_abs(&rho);
            assert!(trace(&out).norm() <= 1e-10 * scale);
            assert!(max_abs_diff(&out, &out.adjoint()) <= 1e-10 * scale.max(1.0));
        }
    }

    #[test]
    fn generator_is_linear() {
        let gen = two_generator_gen();
        let mut r = rng(23);
        let a = random_hermitian(&mut r, 2);
        let b = random_hermitian(&mut r, 2);
        let (x, y) = (c(0.3, -1.1), c(-2.0, 0.4));
        let lhs = collision_tcl2(&gen, 1.1, &(&a * x + &b * y)).unwrap();
        let rhs = collision_tcl2(&gen, 1.1, &a).unwrap() * x + collision_tcl2(&gen, 1.1, &b).unwrap() * y;
        assert!(max_abs_diff(&lhs, &rhs) < 1e-10);
    }

    #[test]
    fn dephasing_coherence_rate_is_four_re_f_dot() {
        // For v = σ_z, ρ = |+⟩⟨+|: (Cρ)₀₁ = −4 Re[∫₀ᵗ χ(u) du]·ρ₀₁ = −4 Re ḟ(t)·ρ₀₁.
        let (g, w) = (0.05, 1.0);
        let gen = dephasing_gen(g, w, 1.0);
        for t in [0.4, 1.5, 5.0] {
            // ḟ(t) = ∫₀ᵗ g² e^{−iωu} du
            let f_dot = g * g * c((w * t).sin() / w, ((w * t).cos() - 1.0) / w);
            let out = collision_tcl2(&gen, t, &plus()).unwrap();
            let want = -4.0 * f_dot.re * 0.5;
            assert!((out[(0, 1)] - c(want, 0.0)).norm() < 1e-14, "t = {t}");
        }
    }

    #[test]
    fn lindblad_dephasing_rate() {
        let gamma0 = 0.3;
        let gen = dephasing_lindblad(SystemHamiltonian::qubit_sigma_z(1.0).unwrap(), 2.0 * gamma0).unwrap();
        let out = lindblad_apply(&gen, &plus());
        // ½γ([σ_zρ,σ_z] + [σ_z,ρσ_z]) = γ(σ_zρσ_z − ρ): coherences decay at 2γ = 4γ₀.
        assert!((out[(0, 1)] - c(-4.0 * gamma0 * 0.5, 0.0)).norm() < 1e-15);
        assert!(out[(0, 0)].norm() < 1e-15);
        let zero = dephasing_lindblad(SystemHamiltonian::qubit_sigma_z(1.0).unwrap(), 0.0).unwrap();
        assert_eq!(max_abs(&lindblad_apply(&zero, &plus())), 0.0);
    }

    #[test]
    fn lindblad_matches_termwise_expansion() {
        // ½Γ([vρ,v] + [v,ρv]) = Γ(vρv − ½{v², ρ}) for a single Hermitian v.
        let mut r = rng(3);
        let v = random_hermitian(&mut r, 3);
        let rho = random_density(&mut r, 3);
        let gen = LindbladGenerator::new(
            SystemHamiltonian::zero(3),
            ErrorGeneratorSet::single(v.clone()).unwrap(),
            ComplexMatrix::from_element(1, 1, c(0.7, 0.0)),
        )
        .unwrap();
        let v2 = &v * &v;
        let want = (&v * &rho * &v - (&v2 * &rho + &rho * &v2) * c(0.5, 0.0)) * c(0.7, 0.0);
        assert!(max_abs_diff(&lindblad_apply(&gen, &rho), &want) < 1e-14);
    }

    #[test]
    fn markov_reduction_matches_delta_limit() {
        let gamma = ComplexMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]);
        let h = SystemHamiltonian::qubit_sigma_z(1.3).unwrap();
        let gens = ErrorGeneratorSet::new(vec![pauli::sigma_x(), pauli::sigma_z()]).unwrap();
        let tcl = Tcl2Generator::new(h, gens, BathCorrelation::markovian(gamma).unwrap()).unwrap();
        let lind = reduce_to_lindblad(&tcl).unwrap();
        let mut r = rng(99);
        for _ in 0..20 {
            let rho = random_density(&mut r, 2);
            for t in [0.5, 1.0, 2.0] {
                let a = collision_tcl2(&tcl, t, &rho).unwrap();
                let b = lindblad_apply(&lind, &rho);
                assert!(max_abs_diff(&a, &b) <= 1e-10);
            }
        }
        assert!(reduce_to_lindblad(&two_generator_gen()).is_err());
    }

    #[test]
    fn lindblad_rejects_bad_rates() {
        let h = SystemHamiltonian::qubit_sigma_z(1.0).unwrap();
        let gens = ErrorGeneratorSet::single(pauli::sigma_z()).unwrap();
        assert!(LindbladGenerator::new(h.clone(), gens.clone(), ComplexMatrix::from_element(1, 1, c(-0.1, 0.0))).is_err());
        assert!(LindbladGenerator::new(h, gens, ComplexMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn ohmic_kernel_is_hermitian_preserving() {
        let gen = Tcl2Generator::new(
            SystemHamiltonian::qubit_sigma_z(1.0).unwrap(),
            ErrorGeneratorSet::single(pauli::sigma_x()).unwrap(),
            BathCorrelation::ohmic(0.05, 2.0, 0.0, 1).unwrap(),
        )
        .unwrap();
        let mut r = rng(8);
        let rho = random_density(&mut r, 2);
        let out = collision_tcl2(&gen, 1.7, &rho).unwrap();
        assert!(trace(&out).norm() < 1e-12);
        assert!(max_abs_diff(&out, &out.adjoint()) < 1e-12);
    }
}
