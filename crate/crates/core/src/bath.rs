//! Bath correlation functions `χ_{αβ}(t) = Tr_b[b̂_α(t) b̂_β ρ̂_b]` and the
//! double-time integral `f(t) = ∫₀ᵗ ds ∫₀ˢ dτ χ*(τ−s)`.
//!
//! Three reservoir models are supported:
//!
//! * **discrete** — a finite set of thermal bosonic modes, `b̂_α = Σ_k g_{αk} â†_k + g*_{αk} â_k`;
//! * **ohmic** — the continuum limit with `J(ω) = η ω e^{−ω/ω_c}`, one
//!   independent, identical bath per generator;
//! * **markovian** — the distribution `½γ_{αβ} δ(t)`.
//!
//! A delta sitting on the endpoint of an integration range contributes half its
//! weight: `∫₀ᵗ dτ δ(τ−t) g(τ) = ½ g(t)`. This scales every rate derived from the
//! markovian model, so TCL2 with `χ = ½γδ` dephases at `Γ = γ/2`.
//!
//! Temperatures and frequencies share units with ħ = k_B = 1; `T = 0` is the exact
//! vacuum limit.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, max_abs, ComplexMatrix, ZERO};
use crate::quadrature::{integrate, QuadSettings};

/// Upper limit of the ohmic spectral integral, in units of the decay scale.
const SPECTRAL_CUTOFF_DECADES: f64 = 50.0;

/// One bosonic mode with its coupling to each error generator.
#[derive(Debug, Clone, PartialEq)]
pub struct BathMode {
    pub omega: f64,
    /// `g_{αk}` for α = 0..n_gen.
    pub couplings: Vec<Complex64>,
}

impl BathMode {
    pub fn new(omega: f64, g: Complex64) -> Self {
        Self {
            omega,
            couplings: vec![g],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BathModel {
    Discrete,
    Ohmic,
    Markovian,
}

impl BathModel {
    pub fn name(self) -> &'static str {
        match self {
            BathModel::Discrete => "discrete",
            BathModel::Ohmic => "ohmic",
            BathModel::Markovian => "markovian",
        }
    }
}

#[derive(Debug, Clone)]
pub enum BathCorrelation {
    Discrete {
        modes: Vec<BathMode>,
        temperature: f64,
        n_gen: usize,
    },
    Ohmic {
        eta: f64,
        cutoff: f64,
        temperature: f64,
        n_gen: usize,
        quad: QuadSettings,
    },
    Markovian {
        gamma: ComplexMatrix,
    },
}

/// Mean occupation `1/(e^{ω/T} − 1)`, zero at `T = 0`.
pub fn bose_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        0.0
    } else {
        1.0 / (omega / temperature).exp_m1()
    }
}

fn check_temperature(temperature: f64) -> Result<()> {
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "temperature must be finite and non-negative, got {temperature}"
        )));
    }
    Ok(())
}

impl BathCorrelation {
    /// Discrete modes; every mode must carry the same number of couplings.
    pub fn discrete(modes: Vec<BathMode>, temperature: f64) -> Result<Self> {
        check_temperature(temperature)?;
        let n_gen = modes.first().map_or(1, |m| m.couplings.len());
        if n_gen == 0 {
            return Err(Error::InvalidInput("modes need at least one coupling".into()));
        }
        for (k, m) in modes.iter().enumerate() {
            if !(m.omega > 0.0 && m.omega.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "mode {k}: frequency must be positive, got {}",
                    m.omega
                )));
            }
            if m.couplings.len() != n_gen {
                return Err(Error::DimensionMismatch(format!(
                    "mode {k} has {} couplings, expected {n_gen}",
                    m.couplings.len()
                )));
            }
            if m.couplings.iter().any(|g| !(g.re.is_finite() && g.im.is_finite())) {
                return Err(Error::NonFinite(format!("coupling of mode {k}")));
            }
        }
        Ok(Self::Discrete {
            modes,
            temperature,
            n_gen,
        })
    }

    /// Single-generator discrete bath from `(g_k, ω_k)` pairs.
    pub fn discrete_single(modes: &[(Complex64, f64)], temperature: f64) -> Result<Self> {
        Self::discrete(
            modes.iter().map(|&(g, w)| BathMode::new(w, g)).collect(),
            temperature,
        )
    }

    pub fn ohmic(eta: f64, cutoff: f64, temperature: f64, n_gen: usize) -> Result<Self> {
        check_temperature(temperature)?;
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::InvalidInput(format!("eta must be non-negative, got {eta}")));
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::InvalidInput(format!("cutoff must be positive, got {cutoff}")));
        }
        if n_gen == 0 {
            return Err(Error::InvalidInput("n_gen must be positive".into()));
        }
        Ok(Self::Ohmic {
            eta,
            cutoff,
            temperature,
            n_gen,
            quad: QuadSettings {
                max_intervals: 20_000,
                ..QuadSettings::default()
            },
        })
    }

    /// `χ_{αβ}(t) ≈ ½γ_{αβ} δ(t)`; `γ` must be Hermitian positive-semidefinite.
    pub fn markovian(gamma: ComplexMatrix) -> Result<Self> {
        if gamma.nrows() != gamma.ncols() || gamma.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "rate matrix must be square and non-empty, got {:?}",
                gamma.shape()
            )));
        }
        let scale = max_abs(&gamma);
        let dev = crate::linalg::max_abs_diff(&gamma, &gamma.adjoint());
        if dev > 1e-12 * scale.max(1.0) {
            return Err(Error::NotHermitian {
                deviation: dev,
                tolerance: 1e-12,
            });
        }
        let lowest = hermitian_eigen(&gamma).0[0];
        if lowest < -1e-12 * scale.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "rate matrix is not positive-semidefinite (eigenvalue {lowest:.3e})"
            )));
        }
        Ok(Self::Markovian { gamma })
    }

    pub fn model(&self) -> BathModel {
        match self {
            Self::Discrete { .. } => BathModel::Discrete,
            Self::Ohmic { .. } => BathModel::Ohmic,
            Self::Markovian { .. } => BathModel::Markovian,
        }
    }

    pub fn n_generators(&self) -> usize {
        match self {
            Self::Discrete { n_gen, .. } | Self::Ohmic { n_gen, .. } => *n_gen,
            Self::Markovian { gamma } => gamma.nrows(),
        }
    }

    pub fn is_markovian(&self) -> bool {
        matches!(self, Self::Markovian { .. })
    }

    /// Rate matrix of the markovian model.
    pub fn gamma(&self) -> Option<&ComplexMatrix> {
        match self {
            Self::Markovian { gamma } => Some(gamma),
            _ => None,
        }
    }

    /// Multiply every coupling by `lambda` (`η` by `λ²`, `γ` by `λ²`).
    pub fn scaled(&self, lambda: f64) -> Self {
        match self {
            Self::Discrete {
                modes,
                temperature,
                n_gen,
            } => Self::Discrete {
                modes: modes
                    .iter()
                    .map(|m| BathMode {
                        omega: m.omega,
                        couplings: m.couplings.iter().map(|g| g * lambda).collect(),
                    })
                    .collect(),
                temperature: *temperature,
                n_gen: *n_gen,
            },
            Self::Ohmic {
                eta,
                cutoff,
                temperature,
                n_gen,
                quad,
            } => Self::Ohmic {
                eta: eta * lambda * lambda,
                cutoff: *cutoff,
                temperature: *temperature,
                n_gen: *n_gen,
                quad: *quad,
            },
            Self::Markovian { gamma } => Self::Markovian {
                gamma: gamma.scale(lambda * lambda),
            },
        }
    }

    fn check_indices(&self, alpha: usize, beta: usize) -> Result<()> {
        let n = self.n_generators();
        if alpha >= n || beta >= n {
            return Err(Error::DimensionMismatch(format!(
                "generator index ({alpha}, {beta}) out of range for {n} generators"
            )));
        }
        Ok(())
    }

    /// `χ_{αβ}(t)`. Fails for the markovian model, which is a distribution.
    pub fn chi(&self, alpha: usize, beta: usize, t: f64) -> Result<Complex64> {
        self.check_indices(alpha, beta)?;
        match self {
            Self::Discrete {
                modes, temperature, ..
            } => Ok(modes
                .iter()
                .map(|m| {
                    let nbar = bose_occupation(m.omega, *temperature);
                    let ga = m.couplings[alpha];
                    let gb = m.couplings[beta];
                    ga * gb.conj() * nbar * Complex64::from_polar(1.0, m.omega * t)
                        + ga.conj() * gb * (nbar + 1.0) * Complex64::from_polar(1.0, -m.omega * t)
                })
                .sum()),
            Self::Ohmic {
                eta,
                cutoff,
                temperature,
                quad,
                ..
            } => {
                if alpha != beta {
                    Ok(ZERO)
                } else {
                    ohmic_chi(t, *eta, *cutoff, *temperature, quad)
                }
            }
            Self::Markovian { .. } => Err(Error::Distributional("markovian")),
        }
    }

    /// The full `n_gen × n_gen` matrix `χ(t)`.
    pub fn chi_matrix(&self, t: f64) -> Result<ComplexMatrix> {
        let n = self.n_generators();
        match self {
            Self::Ohmic {
                eta,
                cutoff,
                temperature,
                quad,
                ..
            } => {
                let value = ohmic_chi(t, *eta, *cutoff, *temperature, quad)?;
                Ok(ComplexMatrix::from_fn(n, n, |a, b| if a == b { value } else { ZERO }))
            }
            _ => {
                let mut m = ComplexMatrix::zeros(n, n);
                for a in 0..n {
                    for b in 0..n {
                        m[(a, b)] = self.chi(a, b, t)?;
                    }
                }
                Ok(m)
            }
        }
    }

    /// `f_{αβ}(t) = ∫₀ᵗ ds ∫₀ˢ dτ χ*_{βα}(τ−s)` via `∫₀ᵗ du (t−u) χ*_{βα}(−u)`.
    ///
    /// For a single generator this is the `f(t)` of the dephasing channel.
    pub fn f_elem(&self, alpha: usize, beta: usize, t: f64) -> Result<Complex64> {
        self.check_indices(alpha, beta)?;
        if !(t >= 0.0) {
            return Err(Error::InvalidInput(format!("f(t) requires t ≥ 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(ZERO);
        }
        match self {
            Self::Markovian { gamma } => Ok(gamma[(alpha, beta)] * (0.25 * t)),
            _ => {
                let quad = self.reduction_quad();
                integrate(
                    |u| Ok(self.chi(beta, alpha, -u)?.conj() * (t - u)),
                    0.0,
                    t,
                    &quad,
                )
            }
        }
    }

    fn reduction_quad(&self) -> QuadSettings {
        match self {
            Self::Ohmic { quad, .. } => QuadSettings {
                rel_tol: 1e-11,
                abs_tol: 1e-15,
                ..*quad
            },
            _ => QuadSettings::new(1e-12, 1e-16),
        }
    }
}

/// Ohmic correlation function `∫₀^∞ dω J(ω)[coth(ω/2T) cos ωt − i sin ωt]`.
///
/// Split as the vacuum part, `η ω_c²/(1 + iω_c t)²` in closed form, plus the
/// thermal part `2∫ dω J(ω) n̄(ω) cos ωt`, which is integrated numerically.
fn ohmic_chi(t: f64, eta: f64, cutoff: f64, temperature: f64, quad: &QuadSettings) -> Result<Complex64> {
    if eta == 0.0 {
        return Ok(ZERO);
    }
    let denom = Complex64::new(1.0, cutoff * t);
    let vacuum = eta * cutoff * cutoff / (denom * denom);
    if temperature == 0.0 {
        return Ok(vacuum);
    }
    let decay = 1.0 / cutoff + 1.0 / temperature;
    let upper = SPECTRAL_CUTOFF_DECADES / decay;
    let thermal = integrate(
        |w| {
            // ω n̄(ω) = T·x/(e^x − 1), x = ω/T, finite at ω = 0.
            let x = w / temperature;
            let w_nbar = if x < 1e-12 {
                temperature * (1.0 - 0.5 * x)
            } else {
                temperature * x / x.exp_m1()
            };
            Ok(Complex64::new(2.0 * eta * w_nbar * (-w / cutoff).exp() * (w * t).cos(), 0.0))
        },
        0.0,
        upper,
        quad,
    )?;
    Ok(vacuum + thermal)
}

/// `Σ_k |g_k|² [(n̄_k + 1) e^{−iω_k t} + n̄_k e^{+iω_k t}]` for a single generator.
pub fn chi_discrete(t: f64, modes: &[(Complex64, f64)], temperature: f64) -> Result<Complex64> {
    BathCorrelation::discrete_single(modes, temperature)?.chi(0, 0, t)
}

/// Ohmic `χ(t)` with `J(ω) = η ω e^{−ω/ω_c}`.
pub fn chi_ohmic(t: f64, eta: f64, cutoff: f64, temperature: f64) -> Result<Complex64> {
    BathCorrelation::ohmic(eta, cutoff, temperature, 1)?.chi(0, 0, t)
}

/// Markovian correlation `½γ δ(t)`.
pub fn chi_markovian(gamma: ComplexMatrix) -> Result<BathCorrelation> {
    BathCorrelation::markovian(gamma)
}

/// `f(t)` for a single-generator bath.
pub fn correlation_f(chi: &BathCorrelation, t: f64) -> Result<Complex64> {
    if chi.n_generators() != 1 {
        return Err(Error::InvalidInput(format!(
            "correlation_f needs a single-generator bath, got {}",
            chi.n_generators()
        )));
    }
    chi.f_elem(0, 0, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn discrete_at_zero_time_and_temperature() {
        let v = chi_discrete(0.0, &[(c(1.0, 0.0), 1.0)], 0.0).unwrap();
        assert_eq!(v, c(1.0, 0.0));
        // Thermal weight: |g|²(2n̄ + 1) at t = 0.
        let v = chi_discrete(0.0, &[(c(0.3, 0.4), 2.0)], 1.0).unwrap();
        let nbar = 1.0 / (2f64.exp() - 1.0);
        assert!((v - c(0.25 * (2.0 * nbar + 1.0), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn discrete_symmetry_on_random_parameters() {
        let modes = [(c(0.1, -0.3), 0.7), (c(0.05, 0.2), 1.9), (c(-0.4, 0.0), 3.1)];
        for &t in &[0.0, 0.3, 1.7, 12.5] {
            let fwd = chi_discrete(t, &modes, 0.6).unwrap();
            let bwd = chi_discrete(-t, &modes, 0.6).unwrap();
            assert!((fwd - bwd.conj()).norm() <= 1e-14);
        }
    }

    #[test]
    fn discrete_rejects_bad_parameters() {
        assert!(chi_discrete(0.0, &[(c(1.0, 0.0), 0.0)], 0.0).is_err());
        assert!(chi_discrete(0.0, &[(c(1.0, 0.0), 1.0)], -1.0).is_err());
    }

    #[test]
    fn ohmic_zero_temperature_and_zero_coupling() {
        let v = chi_ohmic(0.0, 1.0, 1.0, 0.0).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-15);
        for t in [0.0, 0.5, 3.0] {
            assert_eq!(chi_ohmic(t, 0.0, 2.0, 0.7).unwrap(), ZERO);
        }
    }

    #[test]
    fn ohmic_closed_form_matches_spectral_quadrature() {
        // Independent route: integrate J(ω) e^{−iωt} over ω directly.
        let (eta, wc) = (0.7, 1.3);
        for t in [0.0, 0.4, 1.1, 4.0] {
            let direct = integrate(
                |w| Ok(Complex64::from_polar(eta * w * (-w / wc).exp(), -w * t)),
                0.0,
                80.0 * wc,
                &QuadSettings {
                    max_intervals: 20_000,
                    ..QuadSettings::new(1e-12, 1e-16)
                },
            )
            .unwrap();
            let closed = chi_ohmic(t, eta, wc, 0.0).unwrap();
            assert!((direct - closed).norm() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn ohmic_thermal_matches_full_coth_integrand() {
        let (eta, wc, temp) = (0.5, 1.0, 0.8);
        for t in [0.0, 0.9, 2.5] {
            let direct = integrate(
                |w| {
                    let x = w / (2.0 * temp);
                    let coth_w = if x < 1e-12 { 2.0 * temp } else { w / x.tanh() };
                    let j_over_w = eta * (-w / wc).exp();
                    Ok(Complex64::new(
                        j_over_w * coth_w * (w * t).cos(),
                        -j_over_w * w * (w * t).sin(),
                    ))
                },
                0.0,
                80.0,
                &QuadSettings {
                    max_intervals: 20_000,
                    ..QuadSettings::new(1e-12, 1e-16)
                },
            )
            .unwrap();
            let got = chi_ohmic(t, eta, wc, temp).unwrap();
            assert!((direct - got).norm() < 1e-8, "t = {t}: {direct} vs {got}");
            let back = chi_ohmic(-t, eta, wc, temp).unwrap();
            assert!((got - back.conj()).norm() <= 1e-14);
        }
    }

    #[test]
    fn markovian_validation_and_f() {
        assert!(chi_markovian(ComplexMatrix::from_element(1, 1, c(-1.0, 0.0))).is_err());
        let bad = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)]);
        assert!(chi_markovian(bad).is_err());
        let bath = chi_markovian(ComplexMatrix::from_element(1, 1, c(0.4, 0.0))).unwrap();
        assert!(matches!(bath.chi(0, 0, 0.0), Err(Error::Distributional(_))));
        assert!((correlation_f(&bath, 2.0).unwrap() - c(0.2, 0.0)).norm() < 1e-16);
        let zero = chi_markovian(ComplexMatrix::zeros(1, 1)).unwrap();
        assert_eq!(correlation_f(&zero, 3.0).unwrap(), ZERO);
    }

    #[test]
    fn markovian_f_matches_mollified_delta() {
        // Narrow Gaussian ½γ G_σ(t) stands in for ½γ δ(t); the endpoint picks up half its weight.
        let gamma = 0.4;
        let sigma = 1e-3;
        let t = 1.5;
        let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let chi = |x: f64| 0.5 * gamma * norm * (-0.5 * (x / sigma).powi(2)).exp();
        let quad = QuadSettings::new(1e-12, 1e-15);
        let out = crate::quadrature::integrate_triangle(
            |s, tau, o| {
                o[0] = c(chi(tau - s), 0.0);
                Ok(())
            },
            t,
            1,
            &quad,
        )
        .unwrap();
        let bath = chi_markovian(ComplexMatrix::from_element(1, 1, c(gamma, 0.0))).unwrap();
        let analytic = correlation_f(&bath, t).unwrap();
        // Mollifier correction is O(γ σ).
        assert!((out.value[0] - analytic).norm() < gamma * sigma);
    }

    #[test]
    fn f_single_mode_closed_form() {
        // f(t) = |g|²(1 − iωt − e^{−iωt})/ω², derived by direct integration.
        let (g, w) = (c(0.05, 0.02), 1.3);
        let bath = BathCorrelation::discrete_single(&[(g, w)], 0.0).unwrap();
        for t in [0.0, 0.5, 2.0, 7.0] {
            let want = g.norm_sqr() * (c(1.0, -w * t) - Complex64::from_polar(1.0, -w * t)) / (w * w);
            let got = correlation_f(&bath, t).unwrap();
            assert!((got - want).norm() < 1e-14, "t = {t}");
            assert!(got.re >= 0.0);
        }
        assert!(correlation_f(&bath, -1.0).is_err());
    }

    #[test]
    fn f_scales_quadratically_with_coupling() {
        let disc = BathCorrelation::discrete_single(&[(c(0.1, 0.05), 1.0), (c(0.07, 0.0), 2.3)], 0.5).unwrap();
        let ohm = BathCorrelation::ohmic(0.2, 1.5, 0.3, 1).unwrap();
        for bath in [disc, ohm] {
            for t in [0.3, 2.0] {
                let base = correlation_f(&bath, t).unwrap();
                let scaled = correlation_f(&bath.scaled(3.0), t).unwrap();
                assert!((scaled - base * 9.0).norm() <= 1e-12 * scaled.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn multi_generator_discrete_chi_is_hermitian_paired() {
        let modes = vec![
            BathMode {
                omega: 1.0,
                couplings: vec![c(0.1, 0.0), c(0.0, 0.2)],
            },
            BathMode {
                omega: 2.5,
                couplings: vec![c(0.3, -0.1), c(0.05, 0.05)],
            },
        ];
        let bath = BathCorrelation::discrete(modes, 0.7).unwrap();
        for t in [0.0, 0.8, -1.9] {
            let fwd = bath.chi_matrix(t).unwrap();
            let bwd = bath.chi_matrix(-t).unwrap();
            assert!(crate::linalg::max_abs_diff(&fwd, &bwd.adjoint()) <= 1e-14);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn chi_is_hermitian_in_time(
                g_re in -0.5..0.5f64,
                g_im in -0.5..0.5f64,
                omega in 0.1..3.0f64,
                temperature in 0.0..2.0f64,
                t in 0.0..8.0f64,
            ) {
                let bath = BathCorrelation::discrete_single(&[(c(g_re, g_im), omega)], temperature).unwrap();
                let fwd = bath.chi(0, 0, t).unwrap();
                let bwd = bath.chi(0, 0, -t).unwrap();
                prop_assert!((fwd - bwd.conj()).norm() <= 1e-14);
                // χ(0) is the (real, non-negative) bath variance.
                let zero = bath.chi(0, 0, 0.0).unwrap();
                prop_assert!(zero.im.abs() <= 1e-15 && zero.re >= 0.0);
            }

            #[test]
            fn ohmic_chi_is_hermitian_in_time(
                eta in 0.01..0.3f64,
                cutoff in 0.5..5.0f64,
                temperature in prop_oneof![Just(0.0), 0.1..1.5f64],
                t in 0.0..6.0f64,
            ) {
                let bath = BathCorrelation::ohmic(eta, cutoff, temperature, 1).unwrap();
                let fwd = bath.chi(0, 0, t).unwrap();
                let bwd = bath.chi(0, 0, -t).unwrap();
                prop_assert!((fwd - bwd.conj()).norm() <= 1e-14 * fwd.norm().max(1.0));
            }
        }
    }
}
