//! JSON scenario files: strict parsing, presets and validation.
//!
//! A scenario names the system, the bath, a time grid, an initial state and
//! the list of pipelines to run. Unknown fields are rejected everywhere so a
//! typo cannot silently fall back to a default.

use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use crate::bath::{BathCorrelation, BathMode};
use crate::error::{Error, Result};
use crate::io::MatrixJson;
use crate::kraus::KrausOptions;
use crate::linalg::{
    c, max_abs_diff, pauli, ComplexMatrix, DensityOperator, ErrorGeneratorSet, SystemHamiltonian, ZERO,
};
use crate::ode::{OdeSettings, TimeGrid};
use crate::oracle::MAX_TOTAL_DIM;
use crate::quadrature::QuadSettings;

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub system: SystemSpec,
    pub generators: Vec<OperatorSpec>,
    pub bath: BathSpec,
    pub time_grid: GridSpec,
    pub initial_state: OperatorSpec,
    pub runs: Vec<RunKind>,
    #[serde(default)]
    pub oracle: Option<OracleSpec>,
    #[serde(default)]
    pub lindblad: Option<LindbladSpec>,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
    #[serde(default)]
    pub gates: Vec<GateSpec>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    /// Optional cross-check of the Hilbert-space dimension.
    #[serde(default)]
    pub d: Option<usize>,
    pub hamiltonian: OperatorSpec,
}

/// A named preset (`"sigma_z"`, `"qubit_sigmaz(1.0)"`, `"plus"`, ...) or an explicit matrix.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OperatorSpec {
    Preset(String),
    Matrix(MatrixJson),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
pub enum BathSpec {
    Discrete {
        modes: Vec<ModeSpec>,
        #[serde(rename = "T")]
        temperature: f64,
    },
    Ohmic {
        eta: f64,
        cutoff: f64,
        #[serde(rename = "T")]
        temperature: f64,
    },
    Markovian {
        gamma: RateSpec,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    /// `[re, im]` for a single generator, or one pair per generator.
    pub g: CouplingSpec,
    pub omega: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CouplingSpec {
    One([f64; 2]),
    PerGenerator(Vec<[f64; 2]>),
}

/// A scalar rate (single generator) or a full `γ_{αβ}` matrix.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RateSpec {
    Scalar(f64),
    Matrix(MatrixJson),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    Tcl2,
    Lindblad,
    Kraus,
    Dephasing,
    Oracle,
}

impl RunKind {
    pub const ALL: [RunKind; 5] = [
        RunKind::Tcl2,
        RunKind::Lindblad,
        RunKind::Kraus,
        RunKind::Dephasing,
        RunKind::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RunKind::Tcl2 => "tcl2",
            RunKind::Lindblad => "lindblad",
            RunKind::Kraus => "kraus",
            RunKind::Dephasing => "dephasing",
            RunKind::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == s)
    }
}

impl fmt::Display for RunKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    pub n_max: usize,
    #[serde(default = "default_true")]
    pub check_convergence: bool,
}

fn default_true() -> bool {
    true
}

/// Rates for the `lindblad` run when the bath itself is not Markovian.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladSpec {
    pub gamma: RateSpec,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub ode_tol: Option<f64>,
    pub trace_abort: Option<f64>,
    pub quad_rel_tol: Option<f64>,
    pub quad_abs_tol: Option<f64>,
    pub cp_tolerance: Option<f64>,
    pub normalize_kraus: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSpec {
    pub metric: String,
    pub max: f64,
}

// ---------------------------------------------------------------------------
// Validated scenario
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct OracleSettings {
    pub modes: Vec<BathMode>,
    pub temperature: f64,
    pub n_max: usize,
    pub check_convergence: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub metric: String,
    pub max: f64,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub hamiltonian: SystemHamiltonian,
    pub generators: ErrorGeneratorSet,
    pub bath: BathCorrelation,
    pub grid: TimeGrid,
    pub initial_state: ComplexMatrix,
    /// Deduplicated, in canonical order.
    pub runs: Vec<RunKind>,
    pub oracle: Option<OracleSettings>,
    /// `γ` used for the Lindblad run (`Γ = γᵀ/2`).
    pub lindblad_gamma: Option<ComplexMatrix>,
    /// `ε₀` for the dephasing reference, when requested.
    pub dephasing_epsilon0: Option<f64>,
    pub ode: OdeSettings,
    pub quad: QuadSettings,
    pub kraus: KrausOptions,
    pub gates: Vec<Gate>,
    pub output_dir: Option<PathBuf>,
}

fn located(location: impl Into<String>, message: impl fmt::Display) -> Error {
    Error::Scenario {
        location: location.into(),
        message: message.to_string(),
    }
}

fn at<T>(location: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| located(location, e))
}

/// Parse `"name(x)"` into `x`.
fn preset_arg<'a>(s: &'a str, name: &str) -> Option<&'a str> {
    s.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')').map(str::trim)
}

fn operator_preset(name: &str) -> Option<ComplexMatrix> {
    match name {
        "sigma_x" => Some(pauli::sigma_x()),
        "sigma_y" => Some(pauli::sigma_y()),
        "sigma_z" => Some(pauli::sigma_z()),
        "identity" => Some(pauli::identity(2)),
        _ => None,
    }
}

fn hamiltonian_from(spec: &OperatorSpec, loc: &str) -> Result<SystemHamiltonian> {
    match spec {
        OperatorSpec::Matrix(m) => at(loc, m.to_matrix().and_then(SystemHamiltonian::new)),
        OperatorSpec::Preset(p) => {
            if let Some(arg) = preset_arg(p, "qubit_sigmaz") {
                let eps: f64 = arg
                    .parse()
                    .map_err(|_| located(loc, format!("cannot parse ε₀ from `{p}`")))?;
                at(loc, SystemHamiltonian::qubit_sigma_z(eps))
            } else if let Some(arg) = preset_arg(p, "zero") {
                let d: usize = arg
                    .parse()
                    .map_err(|_| located(loc, format!("cannot parse dimension from `{p}`")))?;
                if d == 0 {
                    return Err(located(loc, "dimension must be positive"));
                }
                Ok(SystemHamiltonian::zero(d))
            } else if let Some(m) = operator_preset(p) {
                at(loc, SystemHamiltonian::new(m))
            } else {
                Err(located(
                    loc,
                    format!("unknown Hamiltonian preset `{p}` (expected qubit_sigmaz(ε), zero(d), sigma_x|y|z)"),
                ))
            }
        }
    }
}

fn generator_from(spec: &OperatorSpec, loc: &str) -> Result<ComplexMatrix> {
    match spec {
        OperatorSpec::Matrix(m) => at(loc, m.to_matrix()),
        OperatorSpec::Preset(p) => operator_preset(p).ok_or_else(|| {
            located(loc, format!("unknown operator preset `{p}` (expected sigma_x, sigma_y, sigma_z, identity)"))
        }),
    }
}

fn state_from(spec: &OperatorSpec, d: usize, loc: &str) -> Result<ComplexMatrix> {
    let qubit = |amps: [Complex64; 2]| -> Result<ComplexMatrix> {
        if d != 2 {
            return Err(located(loc, format!("state preset is a qubit state but the system has d = {d}")));
        }
        at(loc, DensityOperator::pure(&amps).map(DensityOperator::into_matrix))
    };
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let m = match spec {
        OperatorSpec::Matrix(m) => at(loc, m.to_matrix())?,
        OperatorSpec::Preset(p) => match p.as_str() {
            "plus" => qubit([c(h, 0.0), c(h, 0.0)])?,
            "minus" => qubit([c(h, 0.0), c(-h, 0.0)])?,
            "one" => qubit([ZERO, c(1.0, 0.0)])?,
            "zero" => {
                let mut psi = vec![ZERO; d];
                psi[0] = c(1.0, 0.0);
                at(loc, DensityOperator::pure(&psi).map(DensityOperator::into_matrix))?
            }
            "maximally_mixed" => DensityOperator::maximally_mixed(d).into_matrix(),
            _ => {
                return Err(located(
                    loc,
                    format!("unknown state preset `{p}` (expected plus, minus, zero, one, maximally_mixed)"),
                ))
            }
        },
    };
    if m.shape() != (d, d) {
        return Err(located(loc, format!("state is {:?}, system has d = {d}", m.shape())));
    }
    at(loc, DensityOperator::new(m).map(DensityOperator::into_matrix))
}

fn rates_from(spec: &RateSpec, n_gen: usize, loc: &str) -> Result<ComplexMatrix> {
    let m = match spec {
        RateSpec::Scalar(g) => {
            if n_gen != 1 {
                return Err(located(loc, format!("scalar rate given for {n_gen} generators")));
            }
            ComplexMatrix::from_element(1, 1, c(*g, 0.0))
        }
        RateSpec::Matrix(m) => at(loc, m.to_matrix())?,
    };
    if m.shape() != (n_gen, n_gen) {
        return Err(located(loc, format!("rate matrix is {:?}, expected {n_gen}x{n_gen}", m.shape())));
    }
    Ok(m)
}

fn bath_from(spec: &BathSpec, n_gen: usize) -> Result<(BathCorrelation, Option<Vec<BathMode>>, Option<f64>)> {
    match spec {
        BathSpec::Discrete { modes, temperature } => {
            let mut out = Vec::with_capacity(modes.len());
            for (k, m) in modes.iter().enumerate() {
                let couplings: Vec<Complex64> = match &m.g {
                    CouplingSpec::One([re, im]) => vec![c(*re, *im)],
                    CouplingSpec::PerGenerator(gs) => gs.iter().map(|[re, im]| c(*re, *im)).collect(),
                };
                if couplings.len() != n_gen {
                    return Err(located(
                        format!("bath.modes[{k}].g"),
                        format!("{} couplings for {n_gen} generators", couplings.len()),
                    ));
                }
                out.push(BathMode {
                    omega: m.omega,
                    couplings,
                });
            }
            let bath = at("bath", BathCorrelation::discrete(out.clone(), *temperature))?;
            Ok((bath, Some(out), Some(*temperature)))
        }
        BathSpec::Ohmic {
            eta,
            cutoff,
            temperature,
        } => Ok((at("bath", BathCorrelation::ohmic(*eta, *cutoff, *temperature, n_gen))?, None, None)),
        BathSpec::Markovian { gamma } => {
            let g = rates_from(gamma, n_gen, "bath.gamma")?;
            Ok((at("bath.gamma", BathCorrelation::markovian(g))?, None, None))
        }
    }
}

/// `ε₀` when `H_s = a·I + ½ε₀σ_z` and the only generator is `±σ_z`.
fn dephasing_split(h: &SystemHamiltonian, gens: &ErrorGeneratorSet) -> Result<f64> {
    if h.dim() != 2 || gens.len() != 1 {
        return Err(located("runs", "dephasing reference needs a qubit with a single generator"));
    }
    let sz = pauli::sigma_z();
    let v = &gens.ops()[0];
    if max_abs_diff(v, &sz) > 1e-12 && max_abs_diff(v, &(-&sz)) > 1e-12 {
        return Err(located("generators[0]", "dephasing reference needs v = σ_z"));
    }
    let m = h.matrix();
    if m[(0, 1)].norm() > 1e-12 {
        return Err(located("system.hamiltonian", "dephasing reference needs a σ_z-diagonal H_s"));
    }
    Ok(m[(0, 0)].re - m[(1, 1)].re)
}

fn pair_name(a: &str, b: &str) -> String {
    format!("{a}_vs_{b}")
}

/// Every metric name a report can contain for the given run list, in report order.
pub fn available_metrics(runs: &[RunKind]) -> Vec<String> {
    let mut names = Vec::new();
    let methods: Vec<&str> = runs.iter().map(|r| r.name()).chain(["unitary"]).collect();
    for (i, a) in methods.iter().enumerate() {
        for b in &methods[i + 1..] {
            names.push(pair_name(a, b));
        }
    }
    if runs.contains(&RunKind::Tcl2) && runs.contains(&RunKind::Lindblad) {
        names.push("tcl2_vs_lindblad_generator".into());
    }
    for r in runs {
        names.push(format!("{r}_trace_dev"));
        names.push(format!("{r}_herm_dev"));
    }
    if runs.contains(&RunKind::Kraus) {
        names.push("kraus_completeness".into());
        names.push("kraus_max_clip".into());
    }
    if runs.contains(&RunKind::Oracle) {
        names.push("oracle_n_max_sensitivity".into());
        names.push("oracle_purity_drift".into());
    }
    names
}

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            let path = e.path().to_string();
            let location = if path == "." || path.is_empty() {
                format!("line {} column {}", inner.line(), inner.column())
            } else {
                format!("{path} (line {} column {})", inner.line(), inner.column())
            };
            located(location, inner)
        })?;
        Self::from_file(file)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| located(path.display().to_string(), format!("cannot read scenario: {e}")))?;
        Self::from_json_str(&text)
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        let hamiltonian = hamiltonian_from(&file.system.hamiltonian, "system.hamiltonian")?;
        let d = hamiltonian.dim();
        if let Some(declared) = file.system.d {
            if declared != d {
                return Err(located("system.d", format!("declared d = {declared}, Hamiltonian is {d}x{d}")));
            }
        }
        if file.generators.is_empty() {
            return Err(located("generators", "at least one error generator is required"));
        }
        let mut ops = Vec::with_capacity(file.generators.len());
        for (i, g) in file.generators.iter().enumerate() {
            let loc = format!("generators[{i}]");
            let m = generator_from(g, &loc)?;
            if m.shape() != (d, d) {
                return Err(located(loc, format!("operator is {:?}, system has d = {d}", m.shape())));
            }
            ops.push(at(&loc, ErrorGeneratorSet::single(m))?.ops()[0].clone());
        }
        let generators = at("generators", ErrorGeneratorSet::new(ops))?;
        let (bath, modes, temperature) = bath_from(&file.bath, generators.len())?;
        let grid = at("time_grid", TimeGrid::uniform(file.time_grid.t_max, file.time_grid.n_points))?;
        let initial_state = state_from(&file.initial_state, d, "initial_state")?;

        if file.runs.is_empty() {
            return Err(located("runs", "run list is empty"));
        }
        let mut runs = file.runs.clone();
        runs.sort();
        runs.dedup();

        let oracle = if runs.contains(&RunKind::Oracle) {
            let spec = file
                .oracle
                .ok_or_else(|| located("oracle", "the oracle run needs an `oracle` block with n_max"))?;
            let (Some(modes), Some(temperature)) = (modes, temperature) else {
                return Err(located("bath.model", "the oracle run needs a discrete bath"));
            };
            let levels = if spec.check_convergence { 2 * spec.n_max + 2 } else { spec.n_max + 1 };
            let dim = (levels as f64).powi(modes.len() as i32) * d as f64;
            if dim > MAX_TOTAL_DIM as f64 {
                return Err(located(
                    "oracle.n_max",
                    format!("total dimension {dim} (including the convergence check) exceeds {MAX_TOTAL_DIM}"),
                ));
            }
            Some(OracleSettings {
                modes,
                temperature,
                n_max: spec.n_max,
                check_convergence: spec.check_convergence,
            })
        } else {
            if file.oracle.is_some() {
                return Err(located("oracle", "oracle settings given but `oracle` is not in the run list"));
            }
            None
        };

        let lindblad_gamma = match (runs.contains(&RunKind::Lindblad), &file.lindblad, bath.gamma()) {
            (false, Some(_), _) => {
                return Err(located("lindblad", "lindblad settings given but `lindblad` is not in the run list"))
            }
            (false, None, _) => None,
            (true, Some(_), Some(_)) => {
                return Err(located("lindblad.gamma", "the bath is already markovian; its γ is used"));
            }
            (true, None, Some(g)) => Some(g.clone()),
            (true, Some(spec), None) => {
                let g = rates_from(&spec.gamma, generators.len(), "lindblad.gamma")?;
                at("lindblad.gamma", BathCorrelation::markovian(g.clone()))?;
                Some(g)
            }
            (true, None, None) => {
                return Err(located(
                    "lindblad",
                    "a non-markovian bath needs explicit `lindblad.gamma` for the lindblad run",
                ))
            }
        };

        let dephasing_epsilon0 = if runs.contains(&RunKind::Dephasing) {
            Some(dephasing_split(&hamiltonian, &generators)?)
        } else {
            None
        };

        let t = file.tolerances;
        let positive = |v: Option<f64>, name: &str| -> Result<Option<f64>> {
            match v {
                Some(x) if !(x.is_finite() && x > 0.0) => {
                    Err(located(format!("tolerances.{name}"), format!("must be positive, got {x}")))
                }
                other => Ok(other),
            }
        };
        let mut ode = OdeSettings::default();
        if let Some(v) = positive(t.ode_tol, "ode_tol")? {
            ode.tol = v;
        }
        if let Some(v) = positive(t.trace_abort, "trace_abort")? {
            ode.trace_abort = v;
        }
        let default_quad = QuadSettings::new(1e-10, 1e-14);
        let quad = QuadSettings::new(
            positive(t.quad_rel_tol, "quad_rel_tol")?.unwrap_or(default_quad.rel_tol),
            positive(t.quad_abs_tol, "quad_abs_tol")?.unwrap_or(default_quad.abs_tol),
        );
        let kraus = KrausOptions {
            cp_tolerance: positive(t.cp_tolerance, "cp_tolerance")?,
            normalize: t.normalize_kraus.unwrap_or(false),
        };

        let known = available_metrics(&runs);
        let mut gates = Vec::with_capacity(file.gates.len());
        for (i, g) in file.gates.iter().enumerate() {
            if !known.contains(&g.metric) {
                return Err(located(
                    format!("gates[{i}].metric"),
                    format!("unknown metric `{}`; this run list provides: {}", g.metric, known.join(", ")),
                ));
            }
            if !(g.max.is_finite() && g.max >= 0.0) {
                return Err(located(format!("gates[{i}].max"), format!("must be a non-negative number, got {}", g.max)));
            }
            gates.push(Gate {
                metric: g.metric.clone(),
                max: g.max,
            });
        }

        Ok(Self {
            name: file.name,
            hamiltonian,
            generators,
            bath,
            grid,
            initial_state,
            runs,
            oracle,
            lindblad_gamma,
            dephasing_epsilon0,
            ode,
            quad,
            kraus,
            gates,
            output_dir: file.output_dir,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEPHASING: &str = r#"{
        "name": "deph",
        "system": {"d": 2, "hamiltonian": "qubit_sigmaz(1.0)"},
        "generators": ["sigma_z"],
        "bath": {"model": "discrete", "modes": [{"g": [0.05, 0.0], "omega": 1.0}], "T": 0.0},
        "time_grid": {"t_max": 5.0, "n_points": 20},
        "initial_state": "plus",
        "runs": ["kraus", "dephasing", "tcl2", "oracle"],
        "oracle": {"n_max": 8},
        "gates": [{"metric": "kraus_vs_dephasing", "max": 1e-9}]
    }"#;

    fn location_of(text: &str) -> String {
        match Scenario::from_json_str(text) {
            Err(Error::Scenario { location, .. }) => location,
            other => panic!("expected a scenario error, got {other:?}"),
        }
    }

    #[test]
    fn parses_presets_and_orders_runs() {
        let s = Scenario::from_json_str(DEPHASING).unwrap();
        assert_eq!(s.runs, vec![RunKind::Tcl2, RunKind::Kraus, RunKind::Dephasing, RunKind::Oracle]);
        assert_eq!(s.dephasing_epsilon0, Some(1.0));
        assert_eq!(s.grid.len(), 20);
        assert_eq!(s.grid.last(), 5.0);
        assert!((s.initial_state[(0, 1)] - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(s.oracle.as_ref().unwrap().n_max, 8);
        assert_eq!(s.gates[0].max, 1e-9);
    }

    #[test]
    fn unknown_field_is_rejected_with_path() {
        let text = DEPHASING.replace("\"omega\": 1.0", "\"omega\": 1.0, \"omgea\": 2.0");
        let loc = location_of(&text);
        assert!(loc.contains("bath"), "{loc}");
        assert!(loc.contains("line"), "{loc}");
        let text = DEPHASING.replace("\"runs\"", "\"extra\": 1, \"runs\"");
        assert!(location_of(&text).contains("extra") || location_of(&text).contains("line"));
    }

    #[test]
    fn syntax_error_reports_line() {
        let loc = location_of("{\n  \"name\": \"x\",\n  oops\n}");
        assert!(loc.contains("line 3"), "{loc}");
    }

    #[test]
    fn validation_errors_are_located() {
        assert_eq!(location_of(&DEPHASING.replace("qubit_sigmaz(1.0)", "qubit_sigmaz(x)")), "system.hamiltonian");
        assert_eq!(location_of(&DEPHASING.replace("\"sigma_z\"]", "\"sigma_q\"]")), "generators[0]");
        assert_eq!(location_of(&DEPHASING.replace("\"plus\"", "\"plsu\"")), "initial_state");
        assert_eq!(location_of(&DEPHASING.replace("kraus_vs_dephasing", "kraus_vs_nothing")), "gates[0].metric");
        assert_eq!(location_of(&DEPHASING.replace("\"n_max\": 8", "\"n_max\": 5000")), "oracle.n_max");
        assert_eq!(location_of(&DEPHASING.replace("\"sigma_z\"]", "\"sigma_x\"]")), "generators[0]");
        let not_hermitian = DEPHASING.replace(
            "\"sigma_z\"]",
            r#"{"dim": [2, 2], "data": [[0,0],[1,0],[0,0],[0,0]]}]"#,
        );
        assert_eq!(location_of(&not_hermitian), "generators[0]");
    }

    #[test]
    fn lindblad_needs_rates_for_non_markovian_bath() {
        let text = DEPHASING.replace("\"runs\": [", "\"runs\": [\"lindblad\", ");
        assert_eq!(location_of(&text), "lindblad");
        let text = text.replace("\"gates\"", "\"lindblad\": {\"gamma\": 0.01}, \"gates\"");
        let s = Scenario::from_json_str(&text).unwrap();
        assert_eq!(s.lindblad_gamma.unwrap()[(0, 0)], c(0.01, 0.0));
    }

    #[test]
    fn markovian_and_ohmic_baths() {
        let text = DEPHASING
            .replace(
                r#"{"model": "discrete", "modes": [{"g": [0.05, 0.0], "omega": 1.0}], "T": 0.0}"#,
                r#"{"model": "markovian", "gamma": 0.4}"#,
            )
            .replace(", \"oracle\"]", ", \"lindblad\"]")
            .replace("\"oracle\": {\"n_max\": 8},", "");
        let s = Scenario::from_json_str(&text).unwrap();
        assert!(s.bath.is_markovian());
        assert!(s.lindblad_gamma.is_some());
        let ohmic = text.replace(
            r#"{"model": "markovian", "gamma": 0.4}"#,
            r#"{"model": "ohmic", "eta": 0.01, "cutoff": 5.0, "T": 0.5}"#,
        );
        assert_eq!(location_of(&ohmic), "lindblad");
        let bad = text.replace("\"gamma\": 0.4", "\"gamma\": -0.4");
        assert_eq!(location_of(&bad), "bath.gamma");
    }

    #[test]
    fn oracle_requires_discrete_bath() {
        let text = DEPHASING.replace(
            r#"{"model": "discrete", "modes": [{"g": [0.05, 0.0], "omega": 1.0}], "T": 0.0}"#,
            r#"{"model": "ohmic", "eta": 0.01, "cutoff": 5.0, "T": 0.0}"#,
        );
        assert_eq!(location_of(&text), "bath.model");
    }

    #[test]
    fn per_generator_couplings() {
        let text = r#"{
            "name": "two",
            "system": {"hamiltonian": "qubit_sigmaz(1.0)"},
            "generators": ["sigma_x", "sigma_z"],
            "bath": {"model": "discrete", "modes": [{"g": [[0.05, 0.0], [0.02, 0.01]], "omega": 1.0}], "T": 0.0},
            "time_grid": {"t_max": 1.0, "n_points": 3},
            "initial_state": "zero",
            "runs": ["tcl2"]
        }"#;
        let s = Scenario::from_json_str(text).unwrap();
        assert_eq!(s.bath.n_generators(), 2);
        let bad = text.replace("[[0.05, 0.0], [0.02, 0.01]]", "[[0.05, 0.0]]");
        assert_eq!(location_of(&bad), "bath.modes[0].g");
    }

    #[test]
    fn metric_catalogue() {
        let m = available_metrics(&[RunKind::Tcl2, RunKind::Lindblad]);
        assert_eq!(&m[..3], ["tcl2_vs_lindblad", "tcl2_vs_unitary", "lindblad_vs_unitary"]);
        assert!(m.contains(&"tcl2_vs_lindblad_generator".to_string()));
        assert!(!m.contains(&"kraus_completeness".to_string()));
    }
}
