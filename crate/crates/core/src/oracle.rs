//! Exact evolution of a small system coupled to a truncated bosonic bath.
//!
//! `H = H_s ⊗ I + I ⊗ Σ_k ω_k a†_k a_k + Σ_α v_α ⊗ b_α`, with
//! `b_α = Σ_k g_{αk} a†_k + g*_{αk} a_k`. The total Hamiltonian is diagonalised
//! once; the product initial state `ρ_s ⊗ ρ_b` is propagated component by
//! component and traced over the bath at every grid time.

use num_complex::Complex64;

use crate::bath::BathMode;
use crate::error::{Error, Result};
use crate::linalg::{
    c, hermitian_eigen, hermiticity_deviation, kron, max_abs_diff, ComplexMatrix, DensityOperator,
    ErrorGeneratorSet, SystemHamiltonian, ZERO,
};
use crate::ode::{SnapshotDiagnostics, StepStats, TimeGrid, Trajectory};

/// Largest total Hilbert-space dimension the oracle accepts.
pub const MAX_TOTAL_DIM: usize = 4096;
/// Largest thermal weight a truncation may discard per mode.
pub const MAX_DISCARDED_WEIGHT: f64 = 1e-8;
/// Change allowed when the Fock cutoff is doubled.
pub const CONVERGENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct TruncatedBath {
    modes: Vec<BathMode>,
    n_max: usize,
    temperature: f64,
    /// Per mode, normalised occupation probabilities `0..=n_max`.
    weights: Vec<Vec<f64>>,
}

impl TruncatedBath {
    pub fn new(modes: Vec<BathMode>, n_max: usize, temperature: f64) -> Result<Self> {
        // Reuse the bath-model validation of frequencies and coupling shapes.
        crate::bath::BathCorrelation::discrete(modes.clone(), temperature)?;
        if modes.is_empty() {
            return Err(Error::InvalidInput("truncated bath needs at least one mode".into()));
        }
        let mut weights = Vec::with_capacity(modes.len());
        for (k, m) in modes.iter().enumerate() {
            let w: Vec<f64> = if temperature == 0.0 {
                (0..=n_max).map(|n| if n == 0 { 1.0 } else { 0.0 }).collect()
            } else {
                let x = m.omega / temperature;
                let discarded = (-(n_max as f64 + 1.0) * x).exp();
                if discarded >= MAX_DISCARDED_WEIGHT {
                    return Err(Error::TruncationInsufficient(format!(
                        "mode {k} (ω = {}) discards thermal weight {discarded:.3e} at n_max = {n_max}",
                        m.omega
                    )));
                }
                let raw: Vec<f64> = (0..=n_max).map(|n| (-(n as f64) * x).exp()).collect();
                let z: f64 = raw.iter().sum();
                raw.into_iter().map(|p| p / z).collect()
            };
            weights.push(w);
        }
        Ok(Self {
            modes,
            n_max,
            temperature,
            weights,
        })
    }

    pub fn single(g: Complex64, omega: f64, n_max: usize, temperature: f64) -> Result<Self> {
        Self::new(vec![BathMode::new(omega, g)], n_max, temperature)
    }

    pub fn modes(&self) -> &[BathMode] {
        &self.modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn n_generators(&self) -> usize {
        self.modes[0].couplings.len()
    }

    pub fn dim(&self) -> usize {
        (self.n_max + 1).pow(self.modes.len() as u32)
    }

    /// Same modes with a different Fock cutoff.
    pub fn with_n_max(&self, n_max: usize) -> Result<Self> {
        Self::new(self.modes.clone(), n_max, self.temperature)
    }

    /// Single-mode annihilation operator on `n_max + 1` levels.
    fn annihilation(n_max: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n_max + 1, n_max + 1, |i, j| {
            if j == i + 1 {
                c((j as f64).sqrt(), 0.0)
            } else {
                ZERO
            }
        })
    }

    /// Embed a single-mode operator as mode `k` of the product space.
    fn embed(&self, op: &ComplexMatrix, k: usize) -> ComplexMatrix {
        let id = ComplexMatrix::identity(self.n_max + 1, self.n_max + 1);
        (0..self.modes.len()).fold(ComplexMatrix::identity(1, 1), |acc, j| {
            kron(&acc, if j == k { op } else { &id })
        })
    }

    pub fn hamiltonian(&self) -> ComplexMatrix {
        let n = ComplexMatrix::from_fn(self.n_max + 1, self.n_max + 1, |i, j| {
            if i == j {
                c(i as f64, 0.0)
            } else {
                ZERO
            }
        });
        let mut h = ComplexMatrix::zeros(self.dim(), self.dim());
        for (k, m) in self.modes.iter().enumerate() {
            h += self.embed(&n, k).scale(m.omega);
        }
        h
    }

    /// `b_α = Σ_k g_{αk} a†_k + g*_{αk} a_k`.
    pub fn coupling_operator(&self, alpha: usize) -> ComplexMatrix {
        let a = Self::annihilation(self.n_max);
        let mut b = ComplexMatrix::zeros(self.dim(), self.dim());
        for (k, m) in self.modes.iter().enumerate() {
            let g = m.couplings[alpha];
            let ak = self.embed(&a, k);
            b += ak.adjoint() * g + ak * g.conj();
        }
        b
    }

    /// Diagonal of the thermal state in the product Fock basis (last mode fastest).
    pub fn thermal_weights(&self) -> Vec<f64> {
        self.weights.iter().fold(vec![1.0], |acc, w| {
            acc.iter().flat_map(|a| w.iter().map(move |b| a * b)).collect()
        })
    }

    pub fn thermal_state(&self) -> ComplexMatrix {
        let w = self.thermal_weights();
        ComplexMatrix::from_fn(w.len(), w.len(), |i, j| if i == j { c(w[i], 0.0) } else { ZERO })
    }
}

#[derive(Debug, Clone)]
pub struct TotalSystem {
    h_s: SystemHamiltonian,
    generators: ErrorGeneratorSet,
    bath: TruncatedBath,
    energies: Vec<f64>,
    vectors: ComplexMatrix,
}

impl TotalSystem {
    pub fn new(h_s: SystemHamiltonian, generators: ErrorGeneratorSet, bath: TruncatedBath) -> Result<Self> {
        if generators.dim() != h_s.dim() {
            return Err(Error::DimensionMismatch(format!(
                "error generators are {0}x{0} but H_s is {1}x{1}",
                generators.dim(),
                h_s.dim()
            )));
        }
        if bath.n_generators() != generators.len() {
            return Err(Error::DimensionMismatch(format!(
                "bath couples {} generators, {} supplied",
                bath.n_generators(),
                generators.len()
            )));
        }
        let dim = h_s.dim().saturating_mul(bath.dim());
        if dim > MAX_TOTAL_DIM {
            return Err(Error::DimensionGuard {
                dim,
                limit: MAX_TOTAL_DIM,
            });
        }
        let h = Self::total_hamiltonian(&h_s, &generators, &bath);
        let dev = hermiticity_deviation(&h);
        if dev > 1e-12 {
            return Err(Error::NotHermitian {
                deviation: dev,
                tolerance: 1e-12,
            });
        }
        let (energies, vectors) = hermitian_eigen(&h);
        Ok(Self {
            h_s,
            generators,
            bath,
            energies,
            vectors,
        })
    }

    fn total_hamiltonian(h_s: &SystemHamiltonian, gens: &ErrorGeneratorSet, bath: &TruncatedBath) -> ComplexMatrix {
        let ds = h_s.dim();
        let db = bath.dim();
        let mut h = kron(h_s.matrix(), &ComplexMatrix::identity(db, db));
        h += kron(&ComplexMatrix::identity(ds, ds), &bath.hamiltonian());
        for (alpha, v) in gens.ops().iter().enumerate() {
            h += kron(v, &bath.coupling_operator(alpha));
        }
        h
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn bath(&self) -> &TruncatedBath {
        &self.bath
    }

    pub fn hamiltonian(&self) -> ComplexMatrix {
        Self::total_hamiltonian(&self.h_s, &self.generators, &self.bath)
    }

    /// Same system with the bath cutoff changed (re-diagonalises).
    pub fn with_n_max(&self, n_max: usize) -> Result<Self> {
        Self::new(self.h_s.clone(), self.generators.clone(), self.bath.with_n_max(n_max)?)
    }

    /// Pure components `(weight, ψ)` of `ρ_s ⊗ ρ_b`, expressed in the eigenbasis of `H`.
    fn initial_components(&self, rho_s0: &ComplexMatrix) -> Vec<(f64, nalgebra::DVector<Complex64>)> {
        let (ps, vs) = hermitian_eigen(rho_s0);
        let wb = self.bath.thermal_weights();
        let db = wb.len();
        let mut out = Vec::new();
        for (i, &p) in ps.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            for (n, &w) in wb.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let mut psi = nalgebra::DVector::zeros(self.dim());
                for a in 0..rho_s0.nrows() {
                    psi[a * db + n] = vs[(a, i)];
                }
                out.push((p * w, self.vectors.adjoint() * psi));
            }
        }
        out
    }

    /// Reduced system state at each time, plus the total purity drift.
    fn reduced_states(&self, rho_s0: &ComplexMatrix, times: &[f64]) -> (Vec<ComplexMatrix>, f64) {
        let ds = self.h_s.dim();
        let db = self.bath.dim();
        let comps = self.initial_components(rho_s0);
        let purity0: f64 = comps.iter().map(|(w, _)| w * w).sum();
        let mut states = Vec::with_capacity(times.len());
        let mut max_purity_drift = 0.0f64;
        for &t in times {
            let mut rho = ComplexMatrix::zeros(ds, ds);
            let mut evolved = Vec::with_capacity(comps.len());
            for (w, coeff) in &comps {
                let phased = nalgebra::DVector::from_fn(self.dim(), |k, _| {
                    coeff[k] * Complex64::from_polar(1.0, -self.energies[k] * t)
                });
                let psi = &self.vectors * phased;
                for a in 0..ds {
                    for b in 0..ds {
                        let mut acc = ZERO;
                        for n in 0..db {
                            acc += psi[a * db + n] * psi[b * db + n].conj();
                        }
                        rho[(a, b)] += acc * *w;
                    }
                }
                evolved.push((*w, psi));
            }
            // Tr ρ_total² = Σ_ij w_i w_j |⟨ψ_i|ψ_j⟩|²; only a handful of components at T = 0.
            if evolved.len() <= 16 {
                let mut purity = 0.0;
                for (wi, pi) in &evolved {
                    for (wj, pj) in &evolved {
                        purity += wi * wj * pi.dotc(pj).norm_sqr();
                    }
                }
                max_purity_drift = max_purity_drift.max((purity - purity0).abs());
            }
            states.push(rho);
        }
        (states, max_purity_drift)
    }
}

/// Outcome of [`evolve_exact`]: the reduced trajectory and convergence evidence.
#[derive(Debug, Clone)]
pub struct ExactRun {
    pub trajectory: Trajectory,
    /// Largest change of any reduced-state entry when the cutoff was doubled.
    pub n_max_sensitivity: Option<f64>,
    /// `|Tr ρ_total(t)² − Tr ρ_total(0)²|`, when cheap enough to evaluate.
    pub purity_drift: f64,
}

/// Exact reduced dynamics on `grid`.
///
/// With `check_convergence` the run is repeated at cutoff `2·n_max + 1`
/// (twice the number of levels) and must agree within [`CONVERGENCE_TOL`];
/// the refined system is subject to the same dimension guard.
pub fn evolve_exact(
    total: &TotalSystem,
    rho_s0: &ComplexMatrix,
    grid: &TimeGrid,
    check_convergence: bool,
) -> Result<ExactRun> {
    DensityOperator::new(rho_s0.clone())?;
    if rho_s0.nrows() != total.h_s.dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial state is {:?}, system is {}-dimensional",
            rho_s0.shape(),
            total.h_s.dim()
        )));
    }
    let (states, purity_drift) = total.reduced_states(rho_s0, grid.times());
    let mut n_max_sensitivity = None;
    if check_convergence {
        let doubled = 2 * total.bath.n_max + 1;
        let refined = total.with_n_max(doubled)?;
        let (fine, _) = refined.reduced_states(rho_s0, grid.times());
        let change = states
            .iter()
            .zip(&fine)
            .map(|(a, b)| max_abs_diff(a, b))
            .fold(0.0, f64::max);
        if change > CONVERGENCE_TOL {
            return Err(Error::TruncationInsufficient(format!(
                "reduced states move by {change:.3e} when n_max goes {} → {doubled}",
                total.bath.n_max
            )));
        }
        n_max_sensitivity = Some(change);
    }
    let diagnostics = states.iter().map(SnapshotDiagnostics::of).collect();
    Ok(ExactRun {
        trajectory: Trajectory {
            times: grid.times().to_vec(),
            states,
            diagnostics,
            stats: StepStats::default(),
        },
        n_max_sensitivity,
        purity_drift,
    })
}

/// `Tr[b(t) b ρ_b]` by Heisenberg evolution in the truncated Fock space,
/// with an `n_max`-doubling convergence check.
///
/// Different modes are uncorrelated in the thermal state (`⟨a_k⟩ = 0`), so
/// the trace splits into one Fock space per mode.
pub fn bath_correlation_exact(bath: &TruncatedBath, t: f64) -> Result<Complex64> {
    if bath.n_generators() != 1 {
        return Err(Error::InvalidInput(format!(
            "bath_correlation_exact needs a single-generator bath, got {}",
            bath.n_generators()
        )));
    }
    let coarse = correlation_at_cutoff(bath, bath.n_max, t)?;
    let fine = correlation_at_cutoff(bath, 2 * bath.n_max + 1, t)?;
    let change = (coarse - fine).norm();
    if change >= CONVERGENCE_TOL {
        return Err(Error::TruncationInsufficient(format!(
            "χ({t}) moves by {change:.3e} when n_max is doubled"
        )));
    }
    Ok(coarse)
}

fn correlation_at_cutoff(bath: &TruncatedBath, n_max: usize, t: f64) -> Result<Complex64> {
    let refined = bath.with_n_max(n_max)?;
    let a = TruncatedBath::annihilation(n_max);
    let mut total = ZERO;
    for (m, w) in refined.modes.iter().zip(&refined.weights) {
        let g = m.couplings[0];
        let b = a.adjoint() * g + &a * g.conj();
        // Heisenberg picture: b(t)_{jk} = e^{i(j−k)ωt} b_{jk}.
        let bt = ComplexMatrix::from_fn(n_max + 1, n_max + 1, |j, k| {
            b[(j, k)] * Complex64::from_polar(1.0, (j as f64 - k as f64) * m.omega * t)
        });
        let prod = bt * &b;
        total += (0..=n_max).map(|n| prod[(n, n)] * w[n]).sum::<Complex64>();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::chi_discrete;
    use crate::linalg::{partial_trace, pauli, trace};
    use crate::testutil::{random_density, random_hermitian, rng};

    fn plus() -> ComplexMatrix {
        ComplexMatrix::from_element(2, 2, c(0.5, 0.0))
    }

    #[test]
    fn truncation_guards() {
        assert!(matches!(
            TruncatedBath::single(c(0.1, 0.0), 1.0, 3, 1.0),
            Err(Error::TruncationInsufficient(_))
        ));
        assert!(TruncatedBath::single(c(0.1, 0.0), 1.0, 3, 0.0).is_ok());
        let bath = TruncatedBath::new(
            vec![BathMode::new(1.0, c(0.1, 0.0)), BathMode::new(1.5, c(0.1, 0.0))],
            63,
            0.0,
        )
        .unwrap();
        let err = TotalSystem::new(
            SystemHamiltonian::qubit_sigma_z(1.0).unwrap(),
            ErrorGeneratorSet::single(pauli::sigma_z()).unwrap(),
            bath,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DimensionGuard { .. }));
    }

    #[test]
    fn thermal_state_is_stationary_and_centred() {
        let bath = TruncatedBath::new(
            vec![BathMode::new(1.0, c(0.2, 0.1)), BathMode::new(2.0, c(0.1, 0.0))],
            20,
            0.8,
        )
        .unwrap();
        let rho_b = bath.thermal_state();
        let h_b = bath.hamiltonian();
        assert!(max_abs_diff(&(&h_b * &rho_b), &(&rho_b * &h_b)) == 0.0);
        assert!((trace(&rho_b) - 1.0).norm() < 1e-14);
        // ⟨b⟩ = 0 in the thermal state.
        assert!(trace(&(bath.coupling_operator(0) * &rho_b)).norm() < 1e-15);
    }

    #[test]
    fn correlation_at_zero_temperature_and_time() {
        let bath = TruncatedBath::single(c(0.3, 0.4), 1.0, 5, 0.0).unwrap();
        assert!((bath_correlation_exact(&bath, 0.0).unwrap() - c(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn thermal_correlation_matches_closed_form() {
        let modes = [(c(0.3, -0.1), 1.0), (c(0.1, 0.2), 2.3)];
        let bath = TruncatedBath::new(modes.iter().map(|&(g, w)| BathMode::new(w, g)).collect(), 30, 1.0).unwrap();
        for i in 0..50 {
            let t = -5.0 + 0.2 * i as f64;
            let exact = bath_correlation_exact(&bath, t).unwrap();
            assert!((exact - chi_discrete(t, &modes, 1.0).unwrap()).norm() < 1e-8, "t = {t}");
            let back = bath_correlation_exact(&bath, -t).unwrap();
            assert!((exact - back.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_coupling_is_unitary() {
        let mut r = rng(6);
        let h = SystemHamiltonian::new(random_hermitian(&mut r, 2)).unwrap();
        let rho0 = random_density(&mut r, 2);
        let bath = TruncatedBath::single(c(0.0, 0.0), 1.0, 40, 0.5).unwrap();
        let total = TotalSystem::new(h.clone(), ErrorGeneratorSet::single(pauli::sigma_x()).unwrap(), bath).unwrap();
        let grid = TimeGrid::uniform(5.0, 11).unwrap();
        let run = evolve_exact(&total, &rho0, &grid, false).unwrap();
        for (t, rho) in run.trajectory.times.iter().zip(&run.trajectory.states) {
            assert!(max_abs_diff(rho, &h.evolve(&rho0, *t)) < 1e-10);
        }
    }

    #[test]
    fn pure_dephasing_matches_displacement_overlap() {
        // Coherence of the σ_z-coupled single mode at T = 0:
        // ρ₀₁(t) = ρ₀₁(0) e^{−iε₀t} exp(−4|g|²(1 − cos ωt)/ω²).
        let (g, w, eps) = (0.05, 1.0, 1.0);
        let bath = TruncatedBath::single(c(g, 0.0), w, 8, 0.0).unwrap();
        let total = TotalSystem::new(
            SystemHamiltonian::qubit_sigma_z(eps).unwrap(),
            ErrorGeneratorSet::single(pauli::sigma_z()).unwrap(),
            bath,
        )
        .unwrap();
        let grid = TimeGrid::uniform(10.0, 41).unwrap();
        let run = evolve_exact(&total, &plus(), &grid, true).unwrap();
        assert!(run.n_max_sensitivity.unwrap() < 1e-9);
        assert!(run.purity_drift < 1e-10);
        for (t, rho) in run.trajectory.times.iter().zip(&run.trajectory.states) {
            let decay = (-4.0 * g * g * (1.0 - (w * t).cos()) / (w * w)).exp();
            let want = Complex64::from_polar(0.5 * decay, -eps * t);
            assert!((rho[(0, 1)] - want).norm() < 1e-10, "t = {t}");
            assert!((rho[(0, 0)] - c(0.5, 0.0)).norm() < 1e-10);
            assert!((trace(rho) - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn component_propagation_matches_dense_conjugation() {
        let bath = TruncatedBath::single(c(0.2, 0.1), 1.3, 12, 0.7).unwrap();
        let h_s = SystemHamiltonian::qubit_sigma_z(0.9).unwrap();
        let total = TotalSystem::new(h_s, ErrorGeneratorSet::single(pauli::sigma_x()).unwrap(), bath.clone()).unwrap();
        let mut r = rng(13);
        let rho_s = random_density(&mut r, 2);
        let t = 2.2;
        let run = evolve_exact(&total, &rho_s, &TimeGrid::new(vec![0.0, t]).unwrap(), false).unwrap();
        let h = total.hamiltonian();
        let u = (h.map(|z| z * c(0.0, -t))).exp();
        let rho_t = &u * kron(&rho_s, &bath.thermal_state()) * u.adjoint();
        let want = partial_trace(&rho_t, 2, bath.dim()).unwrap();
        assert!(max_abs_diff(&run.trajectory.states[1], &want) < 1e-10);
    }

    #[test]
    fn insufficient_cutoff_is_detected() {
        // Strong coupling populates high Fock states, so doubling n_max changes the answer.
        let bath = TruncatedBath::single(c(1.5, 0.0), 1.0, 2, 0.0).unwrap();
        let total = TotalSystem::new(
            SystemHamiltonian::qubit_sigma_z(1.0).unwrap(),
            ErrorGeneratorSet::single(pauli::sigma_x()).unwrap(),
            bath,
        )
        .unwrap();
        let err = evolve_exact(&total, &plus(), &TimeGrid::uniform(3.0, 4).unwrap(), true).unwrap_err();
        assert!(matches!(err, Error::TruncationInsufficient(_)));
    }
}
