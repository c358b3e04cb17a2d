//! Execution of each run mode into a [`ResultTable`].

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use super::config::{ConfigError, Mode, ModelSpec, RunConfig};
use super::table::{Metadata, ResultTable};
use crate::dynamics::{build_liouvillian, steady_state, DissipationParams, ResolventSpectrum};
use crate::model::{
    build_circuit_hamiltonian, build_jt_hamiltonian, build_scaled_hamiltonian, circuit_to_jt,
    coupling_from_hardware, effective_mode_decomposition, jt_to_circuit, lowest_eigenvalues, CircuitParams,
    JTParams,
};
use crate::operators::{HilbertSpace, Operator};
use crate::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{0}")]
    Model(Error),

    #[error("{0}")]
    Numerical(Error),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            RunError::Numerical(e)
        } else {
            RunError::Model(e)
        }
    }
}

impl RunError {
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) | RunError::Model(_) => "config",
            RunError::Numerical(_) => "numerical",
            RunError::Io { .. } => "io",
        }
    }

    /// 2 for bad input, 3 for a failed numerical procedure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Numerical(_) => 3,
            _ => 2,
        }
    }

    /// Single-line JSON diagnostic.
    pub fn diagnostic(&self) -> String {
        serde_json::json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        })
        .to_string()
    }
}

fn conventions(mode: Mode) -> BTreeMap<String, String> {
    let mut c = BTreeMap::new();
    let mut put = |k: &str, v: &str| {
        c.insert(k.to_string(), v.to_string());
    };
    put("float_format", "12 significant digits, lowercase scientific");
    put("sweep_grid", "linspace with inclusive endpoints; rows in sweep order, inner axis fastest");
    match mode {
        Mode::Hardware => {
            put("units", "rad/s; *_rel columns divided by the mean resonator frequency");
        }
        _ => {
            put("basis", "index = ((q*d1 + n1)*d2 + n2); q=0 is the upper qubit level (sigma_z = +1)");
            put("dims", "Fock levels kept per mode, photon numbers 0..d-1");
            put("units", "frequencies in the units of the model parameters (scaled form: resonator frequency = 1)");
        }
    }
    match mode {
        Mode::Spectrum | Mode::Sweep => {
            put(
                "spectrum",
                "P(omega) = 2 Re int_0^inf C(t) exp(-i omega t) dt, C(t) = <a1^dag(t) a1(0)> - |<a1>|^2 in the steady state; no 2pi factor",
            );
            put("spectrum_mode", "a1 of the circuit form; jt input is mapped to the circuit form first");
            put("vectorization", "column stacking");
            put(
                "dissipators",
                "(1+n_th) kappa D[a_j] + n_th kappa D[a_j^dag] + gamma D[sigma_-] + (gamma_phi/2) D[sigma_z]",
            );
        }
        Mode::Eigens => {
            put("eigenvalues", "lowest eigenvalues of the Hamiltonian, ascending");
        }
        Mode::MapParams => {
            put("ratio", "jt_omega1/jt_omega2 with ratio_p:ratio_q its continued-fraction approximation");
            put("residual", "circuit_omega1*circuit_lambda2 - circuit_lambda1*circuit_j");
        }
        Mode::Hardware => {}
    }
    c
}

fn hamiltonian(model: &ModelSpec, space: HilbertSpace) -> crate::Result<Operator> {
    match model {
        ModelSpec::Scaled(p) => build_scaled_hamiltonian(p, space),
        ModelSpec::Circuit(p) => build_circuit_hamiltonian(p, space),
        ModelSpec::Jt(p) => build_jt_hamiltonian(p, space),
    }
}

/// Hamiltonian whose first resonator mode is the emitting (privileged) mode.
fn emission_hamiltonian(model: &ModelSpec, space: HilbertSpace) -> crate::Result<Operator> {
    match model {
        ModelSpec::Jt(p) => build_circuit_hamiltonian(&jt_to_circuit(p)?, space),
        other => hamiltonian(other, space),
    }
}

/// Sweep points as `(values, assignments)` in row order.
fn sweep_points(cfg: &RunConfig) -> Vec<Vec<(String, f64)>> {
    match (&cfg.sweep, &cfg.sweep_inner) {
        (None, _) => vec![vec![]],
        (Some(outer), None) => outer.values().into_iter().map(|v| vec![(outer.parameter.clone(), v)]).collect(),
        (Some(outer), Some(inner)) => {
            let inner_values = inner.values();
            outer
                .values()
                .into_iter()
                .flat_map(|v| {
                    inner_values
                        .iter()
                        .map(move |&w| vec![(outer.parameter.clone(), v), (inner.parameter.clone(), w)])
                })
                .collect()
        }
    }
}

fn sweep_columns(cfg: &RunConfig) -> Vec<String> {
    [&cfg.sweep, &cfg.sweep_inner].into_iter().flatten().map(|a| a.parameter.clone()).collect()
}

fn resolve(cfg: &RunConfig, point: &[(String, f64)]) -> Result<(ModelSpec, DissipationParams), RunError> {
    let assignments: Vec<(&str, f64)> = point.iter().map(|(n, v)| (n.as_str(), *v)).collect();
    Ok(cfg.point(&assignments)?)
}

/// Evaluates every sweep point, concurrently, keeping sweep order.
fn evaluate<T, F>(cfg: &RunConfig, f: F) -> Result<Vec<(Vec<(String, f64)>, T)>, RunError>
where
    T: Send,
    F: Fn(&[(String, f64)]) -> Result<T, RunError> + Sync,
{
    sweep_points(cfg)
        .into_par_iter()
        .map(|p| f(&p).map(|t| (p, t)))
        .collect()
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| RunError::Io { path: "<thread pool>".into(), message: e.to_string() })?;
            Ok(pool.install(f))
        }
    }
}

/// Runs `mode` and returns its table. The embedded config is `cfg` with the
/// mode filled in and the output path and thread count cleared.
pub fn run(mode: Mode, cfg: &RunConfig) -> Result<ResultTable, RunError> {
    if let Some(m) = cfg.mode {
        if m != mode && !(m == Mode::Spectrum && mode == Mode::Sweep) {
            return Err(ConfigError::field("mode", format!("config declares `{m}` but `{mode}` was requested")).into());
        }
    }
    cfg.validate_for(mode)?;
    let mut resolved = cfg.clone();
    resolved.mode = Some(mode);
    resolved.output.path = None;
    resolved.jobs = None;
    let metadata = Metadata::new(mode, resolved.clone(), conventions(mode));
    with_pool(cfg.jobs, || match mode {
        Mode::Eigens => run_eigens(&resolved, metadata),
        Mode::Spectrum | Mode::Sweep => run_spectrum(&resolved, metadata),
        Mode::MapParams => run_map_params(&resolved, metadata),
        Mode::Hardware => run_hardware(&resolved, metadata),
    })?
}

fn run_eigens(cfg: &RunConfig, metadata: Metadata) -> Result<ResultTable, RunError> {
    let space = cfg.hilbert_space()?;
    let m = cfg.output.eigenvalues;
    let mut columns = sweep_columns(cfg);
    columns.extend((0..m).map(|i| format!("e{i}")));
    let results = evaluate(cfg, |point| {
        let (model, _) = resolve(cfg, point)?;
        Ok(lowest_eigenvalues(&hamiltonian(&model, space)?, m)?)
    })?;
    let mut table = ResultTable::new(metadata, columns);
    for (point, values) in results {
        let mut row: Vec<f64> = point.iter().map(|(_, v)| *v).collect();
        row.extend(values);
        table.push(row);
    }
    Ok(table)
}

fn run_spectrum(cfg: &RunConfig, metadata: Metadata) -> Result<ResultTable, RunError> {
    let space = cfg.hilbert_space()?;
    let omegas = cfg.omega.values();
    let mut columns = sweep_columns(cfg);
    columns.push("omega".into());
    columns.push("P".into());
    let results = evaluate(cfg, |point| {
        let (model, diss) = resolve(cfg, point)?;
        let l = build_liouvillian(&emission_hamiltonian(&model, space)?, &diss)?;
        let rho = steady_state(&l)?;
        Ok(ResolventSpectrum::new(&l, &rho)?.spectrum(&omegas)?)
    })?;
    let mut table = ResultTable::new(metadata, columns);
    for (point, spectrum) in results {
        for (w, p) in spectrum.omegas.iter().zip(&spectrum.values) {
            let mut row: Vec<f64> = point.iter().map(|(_, v)| *v).collect();
            row.push(*w);
            row.push(*p);
            table.push(row);
        }
    }
    Ok(table)
}

/// Best rational approximation `p/q` of `x > 0` by continued fractions,
/// stopping at relative error `tol` or before `q` exceeds `max_den`.
pub fn rational_approximation(x: f64, max_den: u64, tol: f64) -> (u64, u64) {
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut r = x;
    loop {
        let a = r.floor();
        if a > u32::MAX as f64 {
            break;
        }
        let a = a as u64;
        let (h2, k2) = (a.saturating_mul(h1).saturating_add(h0), a.saturating_mul(k1).saturating_add(k0));
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a as f64;
        if (h1 as f64 / k1 as f64 - x).abs() <= tol * x || frac <= 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    (h1, k1.max(1))
}

fn map_params_row(model: &ModelSpec) -> Result<Vec<f64>, RunError> {
    let (jt, circuit): (JTParams, CircuitParams) = match model {
        ModelSpec::Scaled(p) => (p.to_jt(), p.to_circuit()),
        ModelSpec::Circuit(p) => (circuit_to_jt(p)?, *p),
        ModelSpec::Jt(p) => (*p, jt_to_circuit(p)?),
    };
    let eff = effective_mode_decomposition(&jt)?;
    let ratio = jt.omega1 / jt.omega2;
    let (p, q) = rational_approximation(ratio, 1_000_000, 1e-9);
    let residual = circuit.omega1 * circuit.lambda2 - circuit.lambda1 * circuit.j;
    Ok(vec![
        jt.omega1,
        jt.omega2,
        jt.k1,
        jt.k2,
        jt.qubit_splitting,
        circuit.omega,
        circuit.omega1,
        circuit.omega2,
        circuit.lambda1,
        circuit.lambda2,
        circuit.j,
        eff.omega_eff,
        eff.k_eff,
        eff.omega_prime,
        eff.c2,
        ratio,
        p as f64,
        q as f64,
        residual,
    ])
}

pub const MAP_PARAMS_COLUMNS: [&str; 19] = [
    "jt_omega1",
    "jt_omega2",
    "jt_k1",
    "jt_k2",
    "jt_qubit_splitting",
    "circuit_omega",
    "circuit_omega1",
    "circuit_omega2",
    "circuit_lambda1",
    "circuit_lambda2",
    "circuit_j",
    "omega_eff",
    "k_eff",
    "omega_prime",
    "c2",
    "ratio",
    "ratio_p",
    "ratio_q",
    "residual",
];

fn run_map_params(cfg: &RunConfig, metadata: Metadata) -> Result<ResultTable, RunError> {
    let mut columns = sweep_columns(cfg);
    columns.extend(MAP_PARAMS_COLUMNS.iter().map(|s| s.to_string()));
    let results = evaluate(cfg, |point| map_params_row(&resolve(cfg, point)?.0))?;
    let mut table = ResultTable::new(metadata, columns);
    for (point, values) in results {
        let mut row: Vec<f64> = point.iter().map(|(_, v)| *v).collect();
        row.extend(values);
        table.push(row);
    }
    Ok(table)
}

fn run_hardware(cfg: &RunConfig, metadata: Metadata) -> Result<ResultTable, RunError> {
    let hw = cfg.hardware.as_ref().ok_or_else(|| ConfigError::field("hardware", "missing [hardware] section"))?;
    let c = coupling_from_hardware(hw)?;
    let mean = (c.omega1 + c.omega2) / 2.0;
    let columns = ["omega1", "omega2", "j", "omega_mean", "omega1_rel", "omega2_rel", "j_rel"];
    let mut table = ResultTable::new(metadata, columns.iter().map(|s| s.to_string()).collect());
    table.push(vec![c.omega1, c.omega2, c.j, mean, c.omega1 / mean, c.omega2 / mean, c.j / mean]);
    Ok(table)
}
