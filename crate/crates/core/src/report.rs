//! Scenario execution and the comparison report.
//!
//! [`run_scenario`] evaluates every requested pipeline on the scenario grid,
//! [`ComparisonReport`] collects pairwise trace distances, Kraus diagnostics,
//! invariant checks and gate verdicts, and [`RunOutput::write_artifacts`]
//! writes CSV/JSON files plus a human-readable summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::dephasing::{coherence_table, dephasing_apply_schrodinger, save_coherence_csv, DephasingModel, DephasingPoint};
use crate::error::{Error, Result};
use crate::kraus::{apply_channel, born_channel, canonical_kraus, to_schrodinger, KrausSet};
use crate::linalg::{c, max_abs_diff, ComplexMatrix, ZERO};
use crate::metrics::max_trace_distance;
use crate::ode::{integrate, SnapshotDiagnostics, StepStats, Trajectory};
use crate::oracle::{evolve_exact, TotalSystem, TruncatedBath};
use crate::scenario::{RunKind, Scenario};
use crate::tcl::{collision_tcl2, lindblad_apply, LindbladGenerator, MasterEquation, Tcl2Generator};

pub const REPORT_VERSION: u32 = 1;

/// Limits used for the invariant section of the report.
pub const TRACE_INVARIANT: f64 = 1e-9;
pub const HERMITICITY_INVARIANT: f64 = 1e-9;
pub const PURITY_INVARIANT: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct PairDistance {
    pub a: String,
    pub b: String,
    pub max_trace_distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClipEntry {
    pub t: f64,
    pub eigenvalue: f64,
    pub cp_tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KrausSummary {
    pub max_completeness_dev: f64,
    /// `max_t ‖B(t)‖_max`.
    pub max_b_scale: f64,
    /// `10·max_b_scale²`: the largest clipped magnitude expected from the Born truncation.
    pub clip_bound: f64,
    pub max_clip: f64,
    pub clip_log: Vec<ClipEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSummary {
    pub n_max: usize,
    pub total_dim: usize,
    pub n_max_sensitivity: Option<f64>,
    pub purity_drift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GateStatus {
    Pass,
    Fail,
    /// The metric belongs to a run excluded on the command line.
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct GateResult {
    pub metric: String,
    pub value: Option<f64>,
    pub max: f64,
    pub status: GateStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub report_version: u32,
    pub scenario: String,
    pub runs: Vec<String>,
    pub t_max: f64,
    pub n_points: usize,
    pub pairs: Vec<PairDistance>,
    pub tcl2_vs_lindblad_generator: Option<f64>,
    pub kraus: Option<KrausSummary>,
    pub oracle: Option<OracleSummary>,
    pub metrics: Vec<Metric>,
    pub invariants: Vec<InvariantCheck>,
    pub gates: Vec<GateResult>,
    pub gates_passed: bool,
}

impl ComparisonReport {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.name == name).map(|m| m.value)
    }

    pub fn failed_gates(&self) -> impl Iterator<Item = &GateResult> {
        self.gates.iter().filter(|g| g.status == GateStatus::Fail)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Everything one scenario run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: ComparisonReport,
    pub trajectories: BTreeMap<RunKind, Trajectory>,
    pub unitary: Trajectory,
    pub kraus_sets: Vec<KrausSet>,
    pub dephasing_points: Vec<DephasingPoint>,
    pub timings: Vec<(String, Duration)>,
}

enum Product {
    Trajectory(Trajectory),
    Kraus {
        trajectory: Trajectory,
        sets: Vec<KrausSet>,
        summary: KrausSummary,
    },
    Dephasing {
        trajectory: Trajectory,
        points: Vec<DephasingPoint>,
    },
    Oracle {
        trajectory: Trajectory,
        summary: OracleSummary,
    },
}

fn snapshot_trajectory(times: &[f64], states: Vec<ComplexMatrix>) -> Trajectory {
    Trajectory {
        times: times.to_vec(),
        diagnostics: states.iter().map(SnapshotDiagnostics::of).collect(),
        states,
        stats: StepStats::default(),
    }
}

fn tcl2_generator(s: &Scenario) -> Result<Tcl2Generator> {
    Ok(Tcl2Generator::new(s.hamiltonian.clone(), s.generators.clone(), s.bath.clone())?.with_quadrature(s.quad))
}

fn lindblad_generator(s: &Scenario) -> Result<LindbladGenerator> {
    let gamma = s
        .lindblad_gamma
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("scenario has no Lindblad rates".into()))?;
    LindbladGenerator::new(s.hamiltonian.clone(), s.generators.clone(), gamma.transpose().scale(0.5))
}

fn run_kraus(s: &Scenario) -> Result<Product> {
    let times = s.grid.times();
    let mut sets = Vec::with_capacity(times.len());
    let mut states = Vec::with_capacity(times.len());
    let mut clip_log = Vec::new();
    let mut max_b_scale = 0.0f64;
    for &t in times {
        let m = born_channel(t, &s.hamiltonian, &s.generators, &s.bath, &s.quad)?;
        max_b_scale = max_b_scale.max(m.b_scale);
        let set = canonical_kraus(&m, &s.kraus)?;
        clip_log.extend(set.clipped.iter().map(|&eigenvalue| ClipEntry {
            t,
            eigenvalue,
            cp_tolerance: set.cp_tolerance,
        }));
        states.push(apply_channel(&to_schrodinger(&set, &s.hamiltonian)?, &s.initial_state)?);
        sets.push(set);
    }
    let summary = KrausSummary {
        max_completeness_dev: sets.iter().map(|k| k.completeness_dev).fold(0.0, f64::max),
        max_b_scale,
        clip_bound: 10.0 * max_b_scale * max_b_scale,
        max_clip: clip_log.iter().map(|e| e.eigenvalue.abs()).fold(0.0, f64::max),
        clip_log,
    };
    Ok(Product::Kraus {
        trajectory: snapshot_trajectory(times, states),
        sets,
        summary,
    })
}

fn run_dephasing(s: &Scenario) -> Result<Product> {
    let eps = s
        .dephasing_epsilon0
        .ok_or_else(|| Error::InvalidInput("scenario is not a dephasing model".into()))?;
    let model = DephasingModel::new(eps, s.bath.clone())?;
    let times = s.grid.times();
    let points = coherence_table(&model, times)?;
    let states = times
        .iter()
        .map(|&t| dephasing_apply_schrodinger(&model, t, &s.initial_state))
        .collect::<Result<Vec<_>>>()?;
    Ok(Product::Dephasing {
        trajectory: snapshot_trajectory(times, states),
        points,
    })
}

fn run_oracle(s: &Scenario) -> Result<Product> {
    let o = s
        .oracle
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("scenario has no oracle settings".into()))?;
    let bath = TruncatedBath::new(o.modes.clone(), o.n_max, o.temperature)?;
    let total = TotalSystem::new(s.hamiltonian.clone(), s.generators.clone(), bath)?;
    let run = evolve_exact(&total, &s.initial_state, &s.grid, o.check_convergence)?;
    Ok(Product::Oracle {
        trajectory: run.trajectory,
        summary: OracleSummary {
            n_max: o.n_max,
            total_dim: total.dim(),
            n_max_sensitivity: run.n_max_sensitivity,
            purity_drift: run.purity_drift,
        },
    })
}

fn execute(kind: RunKind, s: &Scenario) -> Result<Product> {
    match kind {
        RunKind::Tcl2 => Ok(Product::Trajectory(integrate(
            &tcl2_generator(s)?,
            &s.initial_state,
            &s.grid,
            None,
            &s.ode,
        )?)),
        RunKind::Lindblad => Ok(Product::Trajectory(integrate(
            &lindblad_generator(s)?,
            &s.initial_state,
            &s.grid,
            None,
            &s.ode,
        )?)),
        RunKind::Kraus => run_kraus(s),
        RunKind::Dephasing => run_dephasing(s),
        RunKind::Oracle => run_oracle(s),
    }
}

/// `max_t max_{ij} ‖C_TCL2(t)E_ij − L E_ij‖_max` over the grid times `t > 0`.
///
/// Both generators are linear, so probing the matrix units compares the full
/// superoperators.
pub fn generator_distance(tcl: &Tcl2Generator, lindblad: &LindbladGenerator, times: &[f64]) -> Result<f64> {
    let d = tcl.hamiltonian().dim();
    let mut worst = 0.0f64;
    for &t in times.iter().filter(|&&t| t > 0.0) {
        for i in 0..d {
            for j in 0..d {
                let mut e = ComplexMatrix::from_element(d, d, ZERO);
                e[(i, j)] = c(1.0, 0.0);
                let diff = max_abs_diff(&collision_tcl2(tcl, t, &e)?, &lindblad_apply(lindblad, &e));
                worst = worst.max(diff);
            }
        }
    }
    Ok(worst)
}

/// Run the scenario's pipelines (restricted to `only` when given) and assemble the report.
///
/// Independent runs execute on separate threads; results are joined in the
/// canonical run order, so the report does not depend on scheduling.
pub fn run_scenario(s: &Scenario, only: Option<&[RunKind]>) -> Result<RunOutput> {
    if let Some(only) = only {
        if let Some(r) = only.iter().find(|r| !s.runs.contains(r)) {
            return Err(Error::InvalidInput(format!("run `{r}` is not declared in scenario `{}`", s.name)));
        }
    }
    let selected: Vec<RunKind> = s
        .runs
        .iter()
        .copied()
        .filter(|r| only.is_none_or(|o| o.contains(r)))
        .collect();

    let started = Instant::now();
    let results: Vec<(RunKind, Result<Product>, Duration)> = std::thread::scope(|scope| {
        let handles: Vec<_> = selected
            .iter()
            .map(|&kind| {
                scope.spawn(move || {
                    let t0 = Instant::now();
                    let r = execute(kind, s);
                    (kind, r, t0.elapsed())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("pipeline thread panicked"))
            .collect()
    });

    let mut timings = Vec::new();
    let mut trajectories = BTreeMap::new();
    let mut kraus_sets = Vec::new();
    let mut kraus_summary = None;
    let mut dephasing_points = Vec::new();
    let mut oracle_summary = None;
    for (kind, result, elapsed) in results {
        timings.push((kind.name().to_string(), elapsed));
        let product = result.map_err(|e| Error::RunFailed {
            run: kind.name().into(),
            source: Box::new(e),
        })?;
        let trajectory = match product {
            Product::Trajectory(t) => t,
            Product::Kraus {
                trajectory,
                sets,
                summary,
            } => {
                kraus_sets = sets;
                kraus_summary = Some(summary);
                trajectory
            }
            Product::Dephasing { trajectory, points } => {
                dephasing_points = points;
                trajectory
            }
            Product::Oracle { trajectory, summary } => {
                oracle_summary = Some(summary);
                trajectory
            }
        };
        trajectories.insert(kind, trajectory);
    }

    let times = s.grid.times();
    let unitary = snapshot_trajectory(
        times,
        times.iter().map(|&t| s.hamiltonian.evolve(&s.initial_state, t)).collect(),
    );

    let generator = if selected.contains(&RunKind::Tcl2) && selected.contains(&RunKind::Lindblad) {
        let t0 = Instant::now();
        let g = generator_distance(&tcl2_generator(s)?, &lindblad_generator(s)?, times)?;
        timings.push(("generator_distance".into(), t0.elapsed()));
        Some(g)
    } else {
        None
    };
    timings.push(("total".into(), started.elapsed()));

    let report = assemble_report(
        s,
        &selected,
        &trajectories,
        &unitary,
        generator,
        kraus_summary,
        oracle_summary,
    )?;
    Ok(RunOutput {
        report,
        trajectories,
        unitary,
        kraus_sets,
        dephasing_points,
        timings,
    })
}

fn assemble_report(
    s: &Scenario,
    selected: &[RunKind],
    trajectories: &BTreeMap<RunKind, Trajectory>,
    unitary: &Trajectory,
    generator: Option<f64>,
    kraus: Option<KrausSummary>,
    oracle: Option<OracleSummary>,
) -> Result<ComparisonReport> {
    let mut metrics = Vec::new();
    let mut push = |name: String, value: f64| metrics.push(Metric { name, value });

    let methods: Vec<(&str, &Trajectory)> = selected
        .iter()
        .map(|k| (k.name(), &trajectories[k]))
        .chain([("unitary", unitary)])
        .collect();
    let mut pairs = Vec::new();
    for (i, (a, ta)) in methods.iter().enumerate() {
        for (b, tb) in &methods[i + 1..] {
            let d = max_trace_distance(&ta.states, &tb.states)?;
            push(format!("{a}_vs_{b}"), d);
            pairs.push(PairDistance {
                a: a.to_string(),
                b: b.to_string(),
                max_trace_distance: d,
            });
        }
    }
    if let Some(g) = generator {
        push("tcl2_vs_lindblad_generator".into(), g);
    }

    let mut invariants = Vec::new();
    let mut check = |name: String, value: f64, limit: f64| {
        invariants.push(InvariantCheck {
            pass: value <= limit,
            name,
            value,
            limit,
        })
    };
    for k in selected {
        let t = &trajectories[k];
        let (tr, herm) = (t.max_trace_dev(), t.max_herm_dev());
        push(format!("{k}_trace_dev"), tr);
        push(format!("{k}_herm_dev"), herm);
        check(format!("{k}_trace_preservation"), tr, TRACE_INVARIANT);
        check(format!("{k}_hermiticity"), herm, HERMITICITY_INVARIANT);
    }
    if let Some(k) = &kraus {
        push("kraus_completeness".into(), k.max_completeness_dev);
        push("kraus_max_clip".into(), k.max_clip);
        check("kraus_clip_within_born_bound".into(), k.max_clip, k.clip_bound);
    }
    if let Some(o) = &oracle {
        if let Some(sens) = o.n_max_sensitivity {
            push("oracle_n_max_sensitivity".into(), sens);
            check("oracle_n_max_convergence".into(), sens, crate::oracle::CONVERGENCE_TOL);
        }
        push("oracle_purity_drift".into(), o.purity_drift);
        check("oracle_total_purity".into(), o.purity_drift, PURITY_INVARIANT);
    }
    let lookup = |name: &str| metrics.iter().find(|m| m.name == name).map(|m| m.value);
    if let (Some(tcl), Some(lind)) = (lookup("tcl2_vs_oracle"), lookup("lindblad_vs_oracle")) {
        // Informational: TCL2 should track the exact dynamics at least as well as Lindblad.
        check("weak_coupling_ordering".into(), tcl, lind);
    }

    let gates: Vec<GateResult> = s
        .gates
        .iter()
        .map(|g| {
            let value = lookup(&g.metric);
            let status = match value {
                None => GateStatus::Skipped,
                Some(v) if v <= g.max => GateStatus::Pass,
                Some(_) => GateStatus::Fail,
            };
            GateResult {
                metric: g.metric.clone(),
                value,
                max: g.max,
                status,
            }
        })
        .collect();
    let gates_passed = gates.iter().all(|g| g.status != GateStatus::Fail);

    Ok(ComparisonReport {
        report_version: REPORT_VERSION,
        scenario: s.name.clone(),
        runs: selected.iter().map(|r| r.name().to_string()).collect(),
        t_max: s.grid.last(),
        n_points: s.grid.len(),
        pairs,
        tcl2_vs_lindblad_generator: generator,
        kraus,
        oracle,
        metrics,
        invariants,
        gates,
        gates_passed,
    })
}

impl RunOutput {
    /// Plain-text summary; the only artifact that contains wall-clock timings.
    pub fn summary_text(&self) -> String {
        let r = &self.report;
        let mut out = String::new();
        let _ = writeln!(out, "scenario: {}", r.scenario);
        let _ = writeln!(out, "runs: {}", r.runs.join(", "));
        let _ = writeln!(out, "grid: {} points on [0, {}]", r.n_points, r.t_max);
        let _ = writeln!(out, "\nmax trace distance over grid:");
        for p in &r.pairs {
            let _ = writeln!(out, "  {:<24} {:.3e}", format!("{} vs {}", p.a, p.b), p.max_trace_distance);
        }
        if let Some(g) = r.tcl2_vs_lindblad_generator {
            let _ = writeln!(out, "  {:<24} {:.3e}", "tcl2 vs lindblad (gen)", g);
        }
        if let Some(k) = &r.kraus {
            let _ = writeln!(
                out,
                "\nkraus: completeness {:.3e}, max |B| {:.3e}, {} clipped eigenvalue(s), largest {:.3e} (bound {:.3e})",
                k.max_completeness_dev,
                k.max_b_scale,
                k.clip_log.len(),
                k.max_clip,
                k.clip_bound
            );
        }
        if let Some(o) = &r.oracle {
            let _ = writeln!(
                out,
                "\noracle: n_max {}, dimension {}, n_max sensitivity {}, purity drift {:.3e}",
                o.n_max,
                o.total_dim,
                o.n_max_sensitivity.map_or("not checked".to_string(), |v| format!("{v:.3e}")),
                o.purity_drift
            );
        }
        let _ = writeln!(out, "\ninvariants:");
        for i in &r.invariants {
            let mark = if i.pass { "ok  " } else { "FAIL" };
            let _ = writeln!(out, "  [{mark}] {:<32} {:.3e} (limit {:.1e})", i.name, i.value, i.limit);
        }
        let _ = writeln!(out, "\ngates:");
        if r.gates.is_empty() {
            let _ = writeln!(out, "  (none declared)");
        }
        for g in &r.gates {
            let value = g.value.map_or("-".to_string(), |v| format!("{v:.3e}"));
            let status = match g.status {
                GateStatus::Pass => "pass",
                GateStatus::Fail => "FAIL",
                GateStatus::Skipped => "skipped",
            };
            let _ = writeln!(out, "  [{status}] {} = {value} (max {:.1e})", g.metric, g.max);
        }
        let _ = writeln!(out, "\ntimings:");
        for (name, d) in &self.timings {
            let _ = writeln!(out, "  {name:<20} {:.3} s", d.as_secs_f64());
        }
        out
    }

    /// Write `<run>.csv`, `unitary.csv`, `kraus.json`, `dephasing_coherence.csv`,
    /// `report.json` and `report.txt` into `dir`.
    pub fn write_artifacts(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (kind, traj) in &self.trajectories {
            traj.save_csv(&dir.join(format!("{kind}.csv")))?;
        }
        self.unitary.save_csv(&dir.join("unitary.csv"))?;
        if !self.kraus_sets.is_empty() {
            let file = std::io::BufWriter::new(std::fs::File::create(dir.join("kraus.json"))?);
            let mut w = file;
            serde_json::to_writer_pretty(&mut w, &self.kraus_sets)?;
            std::io::Write::write_all(&mut w, b"\n")?;
        }
        if !self.dephasing_points.is_empty() {
            save_coherence_csv(&self.dephasing_points, &dir.join("dephasing_coherence.csv"))?;
        }
        std::fs::write(dir.join("report.json"), self.report.to_json()? + "\n")?;
        std::fs::write(dir.join("report.txt"), self.summary_text())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli, ErrorGeneratorSet, SystemHamiltonian};

    fn scenario(bath: &str, runs: &str, extra: &str) -> Scenario {
        Scenario::from_json_str(&format!(
            r#"{{
                "name": "t",
                "system": {{"hamiltonian": "qubit_sigmaz(1.0)"}},
                "generators": ["sigma_z"],
                "bath": {bath},
                "time_grid": {{"t_max": 2.0, "n_points": 5}},
                "initial_state": "plus",
                "runs": [{runs}]
                {extra}
            }}"#
        ))
        .unwrap()
    }

    #[test]
    fn markov_scenario_generator_distance() {
        let s = scenario(
            r#"{"model": "markovian", "gamma": 0.4}"#,
            r#""tcl2", "lindblad", "kraus", "dephasing""#,
            r#", "gates": [{"metric": "tcl2_vs_lindblad_generator", "max": 1e-10}]"#,
        );
        let out = run_scenario(&s, None).unwrap();
        let r = &out.report;
        assert!(r.tcl2_vs_lindblad_generator.unwrap() <= 1e-10);
        assert!(r.gates_passed);
        // Every pair among four runs plus the unitary reference.
        assert_eq!(r.pairs.len(), 10);
        assert!(r.metric("tcl2_vs_lindblad").unwrap() < 1e-8);
        assert_eq!(r.report_version, 1);
    }

    #[test]
    fn only_restricts_runs_and_skips_gates() {
        let s = scenario(
            r#"{"model": "markovian", "gamma": 0.4}"#,
            r#""tcl2", "lindblad""#,
            r#", "gates": [{"metric": "tcl2_vs_lindblad_generator", "max": 1e-10}]"#,
        );
        let out = run_scenario(&s, Some(&[RunKind::Tcl2])).unwrap();
        assert_eq!(out.report.runs, vec!["tcl2"]);
        assert_eq!(out.report.gates[0].status, GateStatus::Skipped);
        assert!(out.report.gates_passed);
        assert!(run_scenario(&s, Some(&[RunKind::Oracle])).is_err());
    }

    #[test]
    fn failing_gate_is_reported() {
        let s = scenario(
            r#"{"model": "markovian", "gamma": 0.4}"#,
            r#""lindblad""#,
            r#", "gates": [{"metric": "lindblad_vs_unitary", "max": 1e-6}]"#,
        );
        let r = run_scenario(&s, None).unwrap().report;
        assert!(!r.gates_passed);
        assert_eq!(r.failed_gates().next().unwrap().metric, "lindblad_vs_unitary");
    }

    #[test]
    fn run_errors_name_the_run() {
        // Strong coupling pushes p(t) outside [0, 1] for the dephasing reference.
        let s = scenario(
            r#"{"model": "discrete", "modes": [{"g": [1.0, 0.0], "omega": 1.0}], "T": 0.0}"#,
            r#""dephasing""#,
            "",
        );
        match run_scenario(&s, None) {
            Err(Error::RunFailed { run, .. }) => assert_eq!(run, "dephasing"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn generator_distance_detects_mismatch() {
        let h = SystemHamiltonian::qubit_sigma_z(1.0).unwrap();
        let gens = ErrorGeneratorSet::single(pauli::sigma_z()).unwrap();
        let bath = crate::bath::BathCorrelation::markovian(ComplexMatrix::from_element(1, 1, c(0.4, 0.0))).unwrap();
        let tcl = Tcl2Generator::new(h.clone(), gens.clone(), bath).unwrap();
        let wrong = LindbladGenerator::new(h, gens, ComplexMatrix::from_element(1, 1, c(0.4, 0.0))).unwrap();
        // Γ = γ instead of γ/2 doubles the rate: |ΔL E₀₁| = 2·0.2.
        assert!((generator_distance(&tcl, &wrong, &[0.0, 1.0]).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn artifacts_are_deterministic() {
        let s = scenario(
            r#"{"model": "discrete", "modes": [{"g": [0.05, 0.0], "omega": 1.0}], "T": 0.0}"#,
            r#""tcl2", "kraus", "dephasing""#,
            "",
        );
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        for d in &dirs {
            run_scenario(&s, None).unwrap().write_artifacts(d.path()).unwrap();
        }
        for name in ["tcl2.csv", "kraus.csv", "dephasing.csv", "unitary.csv", "kraus.json", "dephasing_coherence.csv", "report.json"] {
            let a = std::fs::read(dirs[0].path().join(name)).unwrap();
            let b = std::fs::read(dirs[1].path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs");
        }
        assert!(std::fs::read_to_string(dirs[0].path().join("report.txt")).unwrap().contains("timings"));
    }
}
