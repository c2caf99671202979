//! Closed-form pure-dephasing channel of a qubit coupled through `σ_z`.
//!
//! With `H_s = ½ε₀σ_z` and `v = σ_z` the interaction-picture Kraus pair is
//! `K̃₀ = (1 − f)·I`, `K̃₁ = √p·σ_z` with `p = 2 Re f − |f|²`, and the channel
//! reads `ρ → (1 − p)ρ + p σ_zρσ_z`. Populations are untouched; coherences
//! are multiplied by `1 − 2p`.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::bath::{correlation_f, BathCorrelation};
use crate::error::{Error, Result};
use crate::kraus::{KrausSet, Picture};
use crate::linalg::{pauli, ComplexMatrix};

#[derive(Debug, Clone)]
pub struct DephasingModel {
    pub epsilon0: f64,
    bath: BathCorrelation,
}

/// One row of the coherence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingPoint {
    pub t: f64,
    pub f: Complex64,
    pub p: f64,
    /// `1 − 2p`.
    pub coherence: f64,
}

impl DephasingModel {
    pub fn new(epsilon0: f64, bath: BathCorrelation) -> Result<Self> {
        if !epsilon0.is_finite() {
            return Err(Error::NonFinite("level splitting".into()));
        }
        if bath.n_generators() != 1 {
            return Err(Error::InvalidInput(format!(
                "dephasing needs a single-generator bath, got {}",
                bath.n_generators()
            )));
        }
        Ok(Self { epsilon0, bath })
    }

    pub fn bath(&self) -> &BathCorrelation {
        &self.bath
    }

    pub fn f(&self, t: f64) -> Result<Complex64> {
        correlation_f(&self.bath, t)
    }

    /// `f`, `p` and the coherence factor, refusing `p` outside `[0, 1]`.
    pub fn point(&self, t: f64) -> Result<DephasingPoint> {
        let f = self.f(t)?;
        let p = 2.0 * f.re - f.norm_sqr();
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutsideValidity { t, p });
        }
        Ok(DephasingPoint {
            t,
            f,
            p,
            coherence: 1.0 - 2.0 * p,
        })
    }

    pub fn p(&self, t: f64) -> Result<f64> {
        Ok(self.point(t)?.p)
    }

    /// Free evolution factor of `ρ₀₁` under `½ε₀σ_z`: `e^{−iε₀t}`.
    pub fn free_phase(&self, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, -self.epsilon0 * t)
    }
}

/// Interaction-picture Kraus pair `{(1 − f)·I, √p·σ_z}`.
pub fn dephasing_kraus(model: &DephasingModel, t: f64) -> Result<KrausSet> {
    let pt = model.point(t)?;
    let k0 = pauli::identity(2).map(|z| z * (Complex64::new(1.0, 0.0) - pt.f));
    let k1 = pauli::sigma_z().scale(pt.p.sqrt());
    let mut set = KrausSet::from_operators(vec![k0, k1], t, Picture::Interaction)?;
    set.eigenvalues = vec![2.0 * (1.0 - pt.p), 2.0 * pt.p];
    Ok(set)
}

fn check_qubit(rho: &ComplexMatrix) -> Result<()> {
    if rho.shape() != (2, 2) {
        return Err(Error::DimensionMismatch(format!(
            "dephasing acts on a qubit, state is {:?}",
            rho.shape()
        )));
    }
    Ok(())
}

/// Interaction-picture channel action: off-diagonals scaled by `1 − 2p`.
pub fn dephasing_apply(model: &DephasingModel, t: f64, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_qubit(rho)?;
    let factor = model.point(t)?.coherence;
    let mut out = rho.clone();
    out[(0, 1)] *= factor;
    out[(1, 0)] *= factor;
    Ok(out)
}

/// Same channel followed by free evolution, for comparison with Schrödinger-picture runs.
pub fn dephasing_apply_schrodinger(model: &DephasingModel, t: f64, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let mut out = dephasing_apply(model, t, rho)?;
    let phase = model.free_phase(t);
    out[(0, 1)] *= phase;
    out[(1, 0)] *= phase.conj();
    Ok(out)
}

/// Table over `times`; fails at the first time where `p` leaves `[0, 1]`.
pub fn coherence_table(model: &DephasingModel, times: &[f64]) -> Result<Vec<DephasingPoint>> {
    times.iter().map(|&t| model.point(t)).collect()
}

/// CSV with columns `t, re_f, im_f, p, coherence`.
pub fn write_coherence_csv<W: Write>(points: &[DephasingPoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["t", "re_f", "im_f", "p", "coherence"])?;
    for pt in points {
        w.write_record([
            format!("{:e}", pt.t),
            format!("{:e}", pt.f.re),
            format!("{:e}", pt.f.im),
            format!("{:e}", pt.p),
            format!("{:e}", pt.coherence),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_coherence_csv(points: &[DephasingPoint], path: &Path) -> Result<()> {
    write_coherence_csv(points, std::fs::File::create(path)?)
}
