//! Adaptive Dormand–Prince 5(4) integration of a master equation on a time grid.
//!
//! Steps are shortened to land exactly on every grid point (and on every
//! control-segment boundary), so snapshots need no interpolation.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, hermitian_eigen, max_abs_diff, trace, ComplexMatrix, SystemHamiltonian};
use crate::tcl::MasterEquation;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order solution minus embedded fourth-order solution.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct OdeSettings {
    /// Local error tolerance, used as both absolute and relative tolerance.
    pub tol: f64,
    /// Abort when `|Tr ρ − 1|` exceeds this.
    pub trace_abort: f64,
    pub max_steps: usize,
    /// Smallest step relative to `max(1, |t|)` before giving up.
    pub min_step_rel: f64,
    /// First trial step; `None` picks one from the grid spacing.
    pub initial_step: Option<f64>,
}

impl Default for OdeSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            trace_abort: 1e-8,
            max_steps: 5_000_000,
            min_step_rel: 1e-13,
            initial_step: None,
        }
    }
}

/// Strictly increasing time grid starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid(Vec<f64>);

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        match times.first() {
            None => return Err(Error::InvalidInput("time grid is empty".into())),
            Some(&t0) if t0 != 0.0 => {
                return Err(Error::InvalidInput(format!("time grid must start at 0, got {t0}")))
            }
            _ => {}
        }
        if let Some(t) = times.iter().find(|t| !t.is_finite()) {
            return Err(Error::NonFinite(format!("time grid entry {t}")));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(format!(
                "time grid must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self(times))
    }

    /// `n_points` equally spaced times from 0 to `t_max` inclusive.
    pub fn uniform(t_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 grid points, got {n_points}")));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidInput(format!("t_max must be positive, got {t_max}")));
        }
        let step = t_max / (n_points - 1) as f64;
        let mut times: Vec<f64> = (0..n_points).map(|i| i as f64 * step).collect();
        times[n_points - 1] = t_max;
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.0.last().expect("grid is never empty")
    }
}

/// Piecewise-constant system Hamiltonian: segment `i` is active from
/// `starts[i]` until the next start.
#[derive(Debug, Clone)]
pub struct ControlSchedule {
    segments: Vec<(f64, SystemHamiltonian)>,
}

impl ControlSchedule {
    pub fn new(segments: Vec<(f64, SystemHamiltonian)>) -> Result<Self> {
        match segments.first() {
            None => return Err(Error::InvalidInput("control schedule is empty".into())),
            Some((t0, _)) if *t0 != 0.0 => {
                return Err(Error::InvalidInput(format!("first control segment must start at 0, got {t0}")))
            }
            _ => {}
        }
        if segments.windows(2).any(|w| !(w[1].0 > w[0].0) || !w[1].0.is_finite()) {
            return Err(Error::InvalidInput("control segment starts must increase".into()));
        }
        let d = segments[0].1.dim();
        if segments.iter().any(|(_, h)| h.dim() != d) {
            return Err(Error::DimensionMismatch("control Hamiltonians differ in dimension".into()));
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[(f64, SystemHamiltonian)] {
        &self.segments
    }

    pub fn dim(&self) -> usize {
        self.segments[0].1.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotDiagnostics {
    pub trace_dev: f64,
    pub min_eig: f64,
    pub herm_dev: f64,
}

impl SnapshotDiagnostics {
    pub fn of(rho: &ComplexMatrix) -> Self {
        let herm_dev = max_abs_diff(rho, &rho.adjoint());
        let sym = (rho + rho.adjoint()).scale(0.5);
        Self {
            trace_dev: (trace(rho) - 1.0).norm(),
            min_eig: hermitian_eigen(&sym).0[0],
            herm_dev,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ComplexMatrix>,
    pub diagnostics: Vec<SnapshotDiagnostics>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &ComplexMatrix {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn max_trace_dev(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.trace_dev).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.min_eig).fold(f64::INFINITY, f64::min)
    }

    pub fn max_herm_dev(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.herm_dev).fold(0.0, f64::max)
    }

    /// CSV with columns `t`, `rho_{i}_{j}_re`, `rho_{i}_{j}_im` (row-major), `trace_dev`, `min_eig`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let d = self.states.first().map_or(0, |s| s.nrows());
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        for i in 0..d {
            for j in 0..d {
                header.push(format!("rho_{i}_{j}_re"));
                header.push(format!("rho_{i}_{j}_im"));
            }
        }
        header.push("trace_dev".into());
        header.push("min_eig".into());
        w.write_record(&header)?;
        for ((t, rho), diag) in self.times.iter().zip(&self.states).zip(&self.diagnostics) {
            let mut row = vec![format!("{t:e}")];
            for i in 0..d {
                for j in 0..d {
                    row.push(format!("{:e}", rho[(i, j)].re));
                    row.push(format!("{:e}", rho[(i, j)].im));
                }
            }
            row.push(format!("{:e}", diag.trace_dev));
            row.push(format!("{:e}", diag.min_eig));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

struct Stepper<'a, G: MasterEquation> {
    gen: &'a G,
    settings: &'a OdeSettings,
    stats: StepStats,
    /// RHS at the start of the next step (first-same-as-last).
    k_first: Option<ComplexMatrix>,
}

impl<G: MasterEquation> Stepper<'_, G> {
    fn rhs(&mut self, t: f64, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.stats.rhs_evaluations += 1;
        self.gen.rhs(t, y)
    }

    /// One trial step; returns the new state, its RHS, and the scaled error norm.
    fn try_step(&mut self, t: f64, y: &ComplexMatrix, h: f64) -> Result<(ComplexMatrix, ComplexMatrix, f64)> {
        let k0 = match self.k_first.take() {
            Some(k) => k,
            None => self.rhs(t, y)?,
        };
        let mut ks: Vec<ComplexMatrix> = Vec::with_capacity(7);
        ks.push(k0);
        for stage in 1..7 {
            let mut ys = y.clone();
            for (j, k) in ks.iter().enumerate() {
                let a = A[stage][j];
                if a != 0.0 {
                    ys += k.scale(a * h);
                }
            }
            if stage == 6 {
                // Stage 7 is evaluated at the fifth-order solution itself.
                let k = self.rhs(t + h, &ys)?;
                let mut err = ComplexMatrix::zeros(y.nrows(), y.ncols());
                for (j, kj) in ks.iter().chain(std::iter::once(&k)).enumerate() {
                    if E[j] != 0.0 {
                        err += kj.scale(E[j] * h);
                    }
                }
                let tol = self.settings.tol;
                let norm = err
                    .iter()
                    .zip(y.iter().zip(ys.iter()))
                    .map(|(e, (a, b))| e.norm() / (tol + tol * a.norm().max(b.norm())))
                    .fold(0.0, f64::max);
                self.k_first = Some(ks.swap_remove(0));
                return Ok((ys, k, norm));
            }
            ks.push(self.rhs(t + C[stage] * h, &ys)?);
        }
        unreachable!("Dormand–Prince has seven stages")
    }

    /// Advance from `t0` to exactly `t1`, starting with trial step `h`.
    /// Returns the state at `t1` and the step size to try next.
    fn advance(&mut self, t0: f64, t1: f64, y0: ComplexMatrix, mut h: f64) -> Result<(ComplexMatrix, f64)> {
        let mut t = t0;
        let mut y = y0;
        while t < t1 {
            let remaining = t1 - t;
            let last = h >= remaining * (1.0 - 1e-12);
            let step = if last { remaining } else { h };
            if step < self.settings.min_step_rel * t.abs().max(1.0) {
                return Err(Error::StepCollapse { t, step });
            }
            if self.stats.accepted + self.stats.rejected >= self.settings.max_steps {
                return Err(Error::StepCollapse { t, step });
            }
            let (y_new, k_new, norm) = self.try_step(t, &y, step)?;
            if !norm.is_finite() || !crate::linalg::is_finite(&y_new) {
                return Err(Error::NonFinite(format!("state or error estimate at t = {t}")));
            }
            let factor = if norm == 0.0 {
                5.0
            } else {
                (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
            };
            if norm <= 1.0 {
                self.stats.accepted += 1;
                t = if last { t1 } else { t + step };
                y = y_new;
                self.k_first = Some(k_new);
                let drift = (trace(&y) - 1.0).norm();
                if !(drift <= self.settings.trace_abort) {
                    return Err(Error::TraceDrift {
                        t,
                        drift,
                        limit: self.settings.trace_abort,
                    });
                }
                // A step shortened to hit the target says nothing about the next one.
                h = if last { h.max(step * factor) } else { step * factor };
            } else {
                self.stats.rejected += 1;
                h = step * factor.min(1.0);
            }
        }
        Ok((y, h))
    }
}

/// Integrate `dρ/dt = −i[H_s, ρ] + D(t)ρ` and record `ρ` at every grid time.
///
/// With `controls`, `H_s` is replaced at each segment start; the generator is
/// rebuilt there, so TCL2 interaction-picture operators follow the active
/// Hamiltonian.
pub fn integrate<G: MasterEquation>(
    gen: &G,
    rho0: &ComplexMatrix,
    grid: &TimeGrid,
    controls: Option<&ControlSchedule>,
    settings: &OdeSettings,
) -> Result<Trajectory> {
    let d = gen.hamiltonian().dim();
    if rho0.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "initial state is {:?}, generator acts on {d}x{d}",
            rho0.shape()
        )));
    }
    ensure_finite(rho0, "initial state")?;
    crate::linalg::DensityOperator::new(rho0.clone())?;
    if let Some(ctl) = controls {
        if ctl.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "controls act on {0}x{0}, generator on {d}x{d}",
                ctl.dim()
            )));
        }
    }

    // Segment boundaries strictly inside the grid span.
    let mut pieces: Vec<(f64, G)> = match controls {
        None => vec![(0.0, gen.clone())],
        Some(ctl) => ctl
            .segments()
            .iter()
            .filter(|(t, _)| *t < grid.last())
            .map(|(t, h)| Ok((*t, gen.with_hamiltonian(h.clone())?)))
            .collect::<Result<_>>()?,
    };
    pieces.push((f64::INFINITY, gen.clone()));

    let times = grid.times();
    let mut states = Vec::with_capacity(times.len());
    let mut diagnostics = Vec::with_capacity(times.len());
    states.push(rho0.clone());
    diagnostics.push(SnapshotDiagnostics::of(rho0));

    let first_gap = times.get(1).map_or(1.0, |t| *t);
    let mut h = settings.initial_step.unwrap_or((first_gap * 0.1).min(1e-2));
    let mut stats = StepStats::default();
    let mut y = rho0.clone();
    let mut t = 0.0;
    let mut next_grid = 1;
    for seg in 0..pieces.len() - 1 {
        let seg_end = pieces[seg + 1].0;
        let mut stepper = Stepper {
            gen: &pieces[seg].1,
            settings,
            stats,
            k_first: None,
        };
        while next_grid < times.len() && t < seg_end.min(grid.last()) {
            let target = times[next_grid].min(seg_end);
            let (y_new, h_new) = stepper.advance(t, target, y, h)?;
            y = y_new;
            h = h_new;
            t = target;
            if target == times[next_grid] {
                diagnostics.push(SnapshotDiagnostics::of(&y));
                states.push(y.clone());
                next_grid += 1;
            }
        }
        stats = stepper.stats;
    }

    Ok(Trajectory {
        times: times.to_vec(),
        states,
        diagnostics,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::BathCorrelation;
    use crate::linalg::{c, pauli, ErrorGeneratorSet};
    use crate::tcl::{dephasing_lindblad, LindbladGenerator, Tcl2Generator};
    use crate::testutil::{random_density, random_hermitian, rng};

    fn plus() -> ComplexMatrix {
        ComplexMatrix::from_element(2, 2, c(0.5, 0.0))
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::new(vec![0.1, 0.2]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.2, 0.2]).is_err());
        assert!(TimeGrid::new(vec![0.0, f64::NAN]).is_err());
        assert!(TimeGrid::uniform(1.0, 1).is_err());
        let g = TimeGrid::uniform(2.0, 5).unwrap();
        assert_eq!(g.times(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn zero_coupling_is_unitary() {
        let mut r = rng(41);
        let h = SystemHamiltonian::new(random_hermitian(&mut r, 3)).unwrap();
        let rho0 = random_density(&mut r, 3);
        let gen = Tcl2Generator::new(
            h.clone(),
            ErrorGeneratorSet::single(random_hermitian(&mut r, 3)).unwrap(),
            BathCorrelation::discrete_single(&[(c(0.0, 0.0), 1.0)], 0.0).unwrap(),
        )
        .unwrap();
        let grid = TimeGrid::uniform(6.0, 13).unwrap();
        let traj = integrate(&gen, &rho0, &grid, None, &OdeSettings::default()).unwrap();
        assert_eq!(traj.len(), 13);
        for (t, rho) in traj.times.iter().zip(&traj.states) {
            assert!(max_abs_diff(rho, &h.evolve(&rho0, *t)) < 1e-9, "t = {t}");
        }
        assert!(traj.max_trace_dev() < 1e-12);
    }

    #[test]
    fn lindblad_dephasing_closed_form() {
        // dρ₀₁/dt = −(iε₀ + 2γ)ρ₀₁ for H = ½ε₀σ_z and σ_z Lindblad rate γ.
        let (eps, gamma0) = (1.0, 0.15);
        let gen = dephasing_lindblad(SystemHamiltonian::qubit_sigma_z(eps).unwrap(), gamma0).unwrap();
        let grid = TimeGrid::uniform(10.0, 41).unwrap();
        let traj = integrate(&gen, &plus(), &grid, None, &OdeSettings::default()).unwrap();
        for (t, rho) in traj.times.iter().zip(&traj.states) {
            let want = 0.5 * c(-2.0 * gamma0 * t, -eps * t).exp();
            assert!((rho[(0, 1)] - want).norm() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn snapshots_land_on_irregular_grid() {
        let gen = dephasing_lindblad(SystemHamiltonian::qubit_sigma_z(2.0).unwrap(), 0.1).unwrap();
        let grid = TimeGrid::new(vec![0.0, 1e-3, 0.37, 0.370001, 5.0]).unwrap();
        let traj = integrate(&gen, &plus(), &grid, None, &OdeSettings::default()).unwrap();
        for (t, rho) in traj.times.iter().zip(&traj.states) {
            let want = 0.5 * c(-0.2 * t, -2.0 * t).exp();
            assert!((rho[(0, 1)] - want).norm() < 1e-9);
        }
    }

    #[test]
    fn piecewise_controls_match_segmentwise_unitaries() {
        let gens = ErrorGeneratorSet::single(pauli::sigma_z()).unwrap();
        let h0 = SystemHamiltonian::qubit_sigma_z(1.0).unwrap();
        let h1 = SystemHamiltonian::new(pauli::sigma_x().scale(0.7)).unwrap();
        let gen = LindbladGenerator::new(h0.clone(), gens, ComplexMatrix::zeros(1, 1)).unwrap();
        let ctl = ControlSchedule::new(vec![(0.0, h0.clone()), (1.3, h1.clone())]).unwrap();
        let grid = TimeGrid::uniform(3.0, 7).unwrap();
        let rho0 = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let traj = integrate(&gen, &rho0, &grid, Some(&ctl), &OdeSettings::default()).unwrap();
        for (t, rho) in traj.times.iter().zip(&traj.states) {
            let want = if *t <= 1.3 {
                h0.evolve(&rho0, *t)
            } else {
                h1.evolve(&h0.evolve(&rho0, 1.3), t - 1.3)
            };
            assert!(max_abs_diff(rho, &want) < 1e-9, "t = {t}");
        }
    }

    #[derive(Clone)]
    struct Leaky(SystemHamiltonian);

    impl MasterEquation for Leaky {
        fn hamiltonian(&self) -> &SystemHamiltonian {
            &self.0
        }
        fn with_hamiltonian(&self, h: SystemHamiltonian) -> Result<Self> {
            Ok(Leaky(h))
        }
        fn dissipator(&self, _t: f64, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
            Ok(rho.scale(-0.01))
        }
    }

    #[test]
    fn trace_drift_aborts() {
        let gen = Leaky(SystemHamiltonian::zero(2));
        let grid = TimeGrid::uniform(1.0, 3).unwrap();
        let err = integrate(&gen, &plus(), &grid, None, &OdeSettings::default()).unwrap_err();
        assert!(matches!(err, Error::TraceDrift { .. }), "{err}");
    }

    #[derive(Clone)]
    struct Blowup(SystemHamiltonian);

    impl MasterEquation for Blowup {
        fn hamiltonian(&self) -> &SystemHamiltonian {
            &self.0
        }
        fn with_hamiltonian(&self, h: SystemHamiltonian) -> Result<Self> {
            Ok(Blowup(h))
        }
        fn dissipator(&self, t: f64, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
            // Trace-free, but coherences grow like e^{2/(1−t)} and diverge at t = 1.
            let z = pauli::sigma_z();
            Ok((rho - &z * rho * &z).scale(1.0 / (1.0 - t).powi(2)))
        }
    }

    #[test]
    fn singular_generator_collapses_step() {
        let gen = Blowup(SystemHamiltonian::zero(2));
        let grid = TimeGrid::uniform(2.0, 3).unwrap();
        let err = integrate(&gen, &plus(), &grid, None, &OdeSettings::default()).unwrap_err();
        assert!(matches!(err, Error::StepCollapse { .. } | Error::NonFinite(_)), "{err}");
    }

    #[test]
    fn csv_layout() {
        let gen = dephasing_lindblad(SystemHamiltonian::qubit_sigma_z(1.0).unwrap(), 0.1).unwrap();
        let traj = integrate(&gen, &plus(), &TimeGrid::uniform(1.0, 3).unwrap(), None, &OdeSettings::default()).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,rho_0_0_re,rho_0_0_im,rho_0_1_re,rho_0_1_im,rho_1_0_re,rho_1_0_im,rho_1_1_re,rho_1_1_im,trace_dev,min_eig"
        );
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn rejects_invalid_initial_state() {
        let gen = dephasing_lindblad(SystemHamiltonian::qubit_sigma_z(1.0).unwrap(), 0.1).unwrap();
        let grid = TimeGrid::uniform(1.0, 3).unwrap();
        assert!(integrate(&gen, &pauli::identity(2), &grid, None, &OdeSettings::default()).is_err());
        assert!(integrate(&gen, &pauli::identity(3).scale(1.0 / 3.0), &grid, None, &OdeSettings::default()).is_err());
    }
}
