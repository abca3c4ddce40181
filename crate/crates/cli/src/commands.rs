use collective_engine::engine::{self, EngineParams, Model};
use collective_engine::linalg::CMat;
use collective_engine::su3::{self, IrrepLabel, IrrepOperators};
use collective_engine::thermo::{self, ThermoReport};
use collective_engine::{oracle, schur_weyl, spectra, EngineError};
use log::info;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, GridPoint, ModelName};
use crate::error::{CliError, Result};
use crate::table::{Cell, Table};

/// A named CSV (or JSON) document produced by a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

pub fn hash_text(text: &str) -> String {
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

pub const DECOMPOSE_LIMIT: u32 = 40;

/// Irrep table for `n` particles with an exact completeness check.
pub fn decompose(n: u32) -> Result<Artifact> {
    if n == 0 || n > DECOMPOSE_LIMIT {
        return Err(CliError::Config(format!(
            "decompose needs 1 ≤ n ≤ {DECOMPOSE_LIMIT}, got {n}"
        )));
    }
    let mut t = Table::new(["irrep", "p", "q", "dimension", "multiplicity", "block_size"]);
    let mut total = num_bigint::BigUint::default();
    for row in schur_weyl::decomposition(n) {
        let size = row.block_size();
        total += &size;
        t.push(vec![
            row.label.to_string().into(),
            row.label.p.into(),
            row.label.q.into(),
            row.dimension.into(),
            row.multiplicity.to_string().into(),
            size.to_string().into(),
        ]);
    }
    let expected = num_bigint::BigUint::from(3u32).pow(n);
    let blank = || Cell::Text(String::new());
    t.push(vec![
        "total".into(),
        blank(),
        blank(),
        blank(),
        blank(),
        total.to_string().into(),
    ]);
    t.push(vec![
        "3^n".into(),
        blank(),
        blank(),
        blank(),
        blank(),
        expected.to_string().into(),
    ]);
    if total != expected {
        return Err(CliError::Validation(format!("Σ m·d = {total} but 3^{n} = {expected}")));
    }
    let hash = hash_text(&format!("{{\"command\":\"decompose\",\"n\":{n}}}"));
    Ok(Artifact {
        name: format!("decompose_n{n}.csv"),
        contents: t.render("decompose", &hash),
    })
}

/// Weight diagrams of the given irreps, energies at the configured frequencies.
pub fn weights(labels: &[IrrepLabel], omega_c: f64, omega_h: f64) -> Result<Artifact> {
    let mut t = Table::new(["irrep", "p", "q", "index", "W", "w", "y", "energy"]);
    for &label in labels {
        let ops = su3::irrep_matrices(label, omega_c, omega_h)?;
        for (k, (s, e)) in ops.basis.iter().zip(ops.energies()).enumerate() {
            t.push(vec![
                label.to_string().into(),
                label.p.into(),
                label.q.into(),
                k.into(),
                s.big_w().into(),
                s.w().into(),
                s.y().into(),
                e.into(),
            ]);
        }
    }
    let names: Vec<String> = labels.iter().map(ToString::to_string).collect();
    let hash = hash_text(&format!(
        "{{\"command\":\"weights\",\"irreps\":\"{}\",\"omega_c\":{omega_c:e},\"omega_h\":{omega_h:e}}}",
        names.join(";")
    ));
    Ok(Artifact {
        name: "weights.csv".into(),
        contents: t.render("weights", &hash),
    })
}

fn run_pool<T: Send, F: Fn(usize) -> T + Sync + Send>(jobs: usize, count: usize, f: F) -> Result<Vec<T>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    Ok(pool.install(|| (0..count).into_par_iter().map(&f).collect()))
}

/// Steady state of one irrep and everything derived from it.
struct IrrepSolution {
    ops: IrrepOperators,
    rho: CMat,
    report: ThermoReport,
}

fn solve_irrep(label: IrrepLabel, params: &EngineParams) -> collective_engine::Result<IrrepSolution> {
    let ops = su3::irrep_matrices(label, params.omega_c, params.omega_h)?;
    let l = engine::build_liouvillian(&ops, params)?;
    let rho = engine::steady_state(&l, params)?;
    let report = thermo::thermo_report(&rho, &ops.ops, params)?;
    Ok(IrrepSolution { ops, rho, report })
}

#[derive(Debug, Clone, Copy)]
struct Spectral {
    summary: spectra::SpectralSummary,
}

fn spectral_of(
    sol: &IrrepSolution,
    params: &EngineParams,
    cfg: &ExperimentConfig,
) -> collective_engine::Result<Spectral> {
    let l = spectra::regression_liouvillian(&sol.ops, params, cfg.regression_generator.into())?;
    Ok(Spectral {
        summary: spectra::spectral_summary(&l, &sol.rho, &sol.ops.ops, cfg.spectrum.window_linewidths)?,
    })
}

struct Task {
    point: usize,
    label: IrrepLabel,
}

struct TaskResult {
    thermo: std::result::Result<ThermoReport, String>,
    spectral: Option<std::result::Result<Spectral, String>>,
}

fn params_at(cfg: &ExperimentConfig, point: &GridPoint) -> EngineParams {
    point.engine.params(cfg.model)
}

fn evaluate(
    cfg: &ExperimentConfig,
    grid: &[GridPoint],
    tasks: &[Task],
    jobs: usize,
    spectral: bool,
) -> Result<Vec<TaskResult>> {
    run_pool(jobs, tasks.len(), |k| {
        let task = &tasks[k];
        let params = params_at(cfg, &grid[task.point]);
        match solve_irrep(task.label, &params) {
            Ok(sol) => TaskResult {
                thermo: Ok(sol.report),
                spectral: spectral.then(|| spectral_of(&sol, &params, cfg).map_err(|e| e.to_string())),
            },
            Err(e) => TaskResult {
                thermo: Err(e.to_string()),
                spectral: spectral.then(|| Err(e.to_string())),
            },
        }
    })
}

fn tasks_for(cfg: &ExperimentConfig, grid: &[GridPoint]) -> Vec<Task> {
    let labels = cfg.labels();
    (0..grid.len())
        .flat_map(|point| labels.iter().map(move |&label| Task { point, label }))
        .collect()
}

fn weight_lookup(weights: &Option<Vec<(IrrepLabel, f64)>>, label: IrrepLabel) -> f64 {
    weights
        .as_ref()
        .and_then(|w| w.iter().find(|(l, _)| *l == label).map(|(_, p)| *p))
        .unwrap_or(f64::NAN)
}

fn nan_if_none(x: Option<f64>) -> Cell {
    x.unwrap_or(f64::NAN).into()
}

fn thermo_cells(r: &ThermoReport) -> Vec<Cell> {
    vec![
        r.energy.into(),
        r.ergotropy.into(),
        r.lasing_ergotropy.into(),
        r.heat_hot.into(),
        r.heat_cold.into(),
        r.power.into(),
        nan_if_none(r.efficiency),
        r.ground_rate.into(),
    ]
}

const THERMO_COLUMNS: [&str; 8] = [
    "energy",
    "ergotropy",
    "lasing_ergotropy",
    "I_h",
    "I_c",
    "P",
    "eta",
    "Ng_residual",
];

fn header(cfg: &ExperimentConfig, tail: &[&str]) -> Vec<String> {
    let mut h = cfg.axis_names();
    h.extend(["irrep", "p", "q", "p_lambda"].iter().map(|s| s.to_string()));
    h.extend(tail.iter().map(|s| s.to_string()));
    h.push("status".into());
    h
}

fn row_prefix(point: &GridPoint, name: &str, label: Option<IrrepLabel>, weight: f64) -> Vec<Cell> {
    let mut row: Vec<Cell> = point.values.iter().map(|&v| v.into()).collect();
    row.push(name.into());
    match label {
        Some(l) => {
            row.push(l.p.into());
            row.push(l.q.into());
        }
        None => {
            row.push(Cell::Text(String::new()));
            row.push(Cell::Text(String::new()));
        }
    }
    row.push(weight.into());
    row
}

/// Steady-state thermodynamics per irrep over the sweep grid, with block
/// totals and the distinguishable-particle baseline.
pub fn steady(cfg: &ExperimentConfig, jobs: usize) -> Result<Artifact> {
    let grid = cfg.grid()?;
    let tasks = tasks_for(cfg, &grid);
    let results = evaluate(cfg, &grid, &tasks, jobs, false)?;
    let labels = cfg.labels();
    let mut t = Table::new(header(cfg, &THERMO_COLUMNS));
    for (pi, point) in grid.iter().enumerate() {
        let params = params_at(cfg, point);
        let weights = cfg.block_weights(&point.engine)?;
        let mut parts = Vec::new();
        let mut complete = true;
        for (li, &label) in labels.iter().enumerate() {
            let res = &results[pi * labels.len() + li];
            let weight = weight_lookup(&weights, label);
            let mut row = row_prefix(point, &label.to_string(), Some(label), weight);
            match &res.thermo {
                Ok(r) => {
                    row.extend(thermo_cells(r));
                    row.push("ok".into());
                    parts.push((weight, *r));
                }
                Err(e) => {
                    row.extend(std::iter::repeat_n(Cell::Float(f64::NAN), THERMO_COLUMNS.len()));
                    row.push(e.clone().into());
                    complete = false;
                }
            }
            t.push(row);
        }
        if let (Some(n), None, true) = (cfg.n, &cfg.irreps, complete) {
            let total: f64 = parts.iter().map(|(w, _)| w).sum();
            if total.is_finite() {
                let agg = thermo::aggregate(&parts, params.omega_l());
                let mut row = row_prefix(point, "total", None, total);
                row.extend(thermo_cells(&agg));
                row.push("ok".into());
                t.push(row);
            }
            if cfg.independent_baseline {
                let mut row = row_prefix(point, "independent", None, f64::NAN);
                match thermo::independent_baseline(n, &params) {
                    Ok(r) => {
                        row.extend(thermo_cells(&r));
                        row.push("ok".into());
                    }
                    Err(e) => {
                        row.extend(std::iter::repeat_n(Cell::Float(f64::NAN), THERMO_COLUMNS.len()));
                        row.push(e.to_string().into());
                    }
                }
                t.push(row);
            }
        }
    }
    info!("steady: {} grid points × {} irreps", grid.len(), labels.len());
    Ok(Artifact {
        name: format!("{}.csv", cfg.prefix("steady")),
        contents: t.render("steady", &cfg.hash()),
    })
}

const SWEEP_COLUMNS: [&str; 8] = [
    "ergotropy",
    "lasing_ergotropy",
    "I_h",
    "I_c",
    "P",
    "eta",
    "g2_0",
    "S_peak",
];

/// Thermodynamic and spectral scalars on the sweep grid, one row per
/// (point, irrep); the input for contour maps.
pub fn sweep(cfg: &ExperimentConfig, jobs: usize) -> Result<Artifact> {
    let grid = cfg.grid()?;
    let tasks = tasks_for(cfg, &grid);
    let results = evaluate(cfg, &grid, &tasks, jobs, true)?;
    let labels = cfg.labels();
    let mut t = Table::new(header(cfg, &SWEEP_COLUMNS));
    for (pi, point) in grid.iter().enumerate() {
        let params = params_at(cfg, point);
        let weights = cfg.block_weights(&point.engine)?;
        for (li, &label) in labels.iter().enumerate() {
            let res = &results[pi * labels.len() + li];
            let mut row = row_prefix(point, &label.to_string(), Some(label), weight_lookup(&weights, label));
            let mut status = String::from("ok");
            match &res.thermo {
                Ok(r) => row.extend([
                    r.ergotropy.into(),
                    r.lasing_ergotropy.into(),
                    r.heat_hot.into(),
                    r.heat_cold.into(),
                    r.power.into(),
                    nan_if_none(r.efficiency),
                ]),
                Err(e) => {
                    row.extend(std::iter::repeat_n(Cell::Float(f64::NAN), 6));
                    status = e.clone();
                }
            }
            match res.spectral.as_ref().expect("spectral requested") {
                Ok(s) => row.extend([s.summary.g2_zero.into(), s.summary.s_peak.into()]),
                Err(e) => {
                    row.extend([Cell::Float(f64::NAN), Cell::Float(f64::NAN)]);
                    if status == "ok" {
                        status = e.clone();
                    }
                }
            }
            row.push(status.into());
            t.push(row);
        }
        if let (Some(n), true) = (cfg.n, cfg.independent_baseline) {
            let mut row = row_prefix(point, "independent", None, f64::NAN);
            match thermo::independent_baseline(n, &params) {
                Ok(r) => {
                    row.extend([
                        r.ergotropy.into(),
                        r.lasing_ergotropy.into(),
                        r.heat_hot.into(),
                        r.heat_cold.into(),
                        r.power.into(),
                        nan_if_none(r.efficiency),
                        Cell::Float(f64::NAN),
                        Cell::Float(f64::NAN),
                    ]);
                    row.push("ok".into());
                }
                Err(e) => {
                    row.extend(std::iter::repeat_n(Cell::Float(f64::NAN), SWEEP_COLUMNS.len()));
                    row.push(e.to_string().into());
                }
            }
            t.push(row);
        }
    }
    Ok(Artifact {
        name: format!("{}.csv", cfg.prefix("sweep")),
        contents: t.render("sweep", &cfg.hash()),
    })
}

const SPECTRUM_COLUMNS: [&str; 7] = [
    "flux",
    "g2_0",
    "S_peak",
    "window_fraction",
    "coherent_fraction",
    "linewidth",
    "P_tot",
];

/// Spectral scalars on the grid. Without sweep axes, also writes
/// `(ω, S)` and `(τ, Re G1, Im G1)` tables for every irrep.
pub fn spectrum(cfg: &ExperimentConfig, jobs: usize) -> Result<Vec<Artifact>> {
    let grid = cfg.grid()?;
    let tasks = tasks_for(cfg, &grid);
    let results = evaluate(cfg, &grid, &tasks, jobs, true)?;
    let labels = cfg.labels();
    let hash = cfg.hash();
    let mut t = Table::new(header(cfg, &SPECTRUM_COLUMNS));
    for (pi, point) in grid.iter().enumerate() {
        let weights = cfg.block_weights(&point.engine)?;
        for (li, &label) in labels.iter().enumerate() {
            let res = &results[pi * labels.len() + li];
            let mut row = row_prefix(point, &label.to_string(), Some(label), weight_lookup(&weights, label));
            match (res.spectral.as_ref().expect("spectral requested"), &res.thermo) {
                (Ok(s), Ok(r)) => {
                    let s = s.summary;
                    row.extend([
                        s.flux.into(),
                        s.g2_zero.into(),
                        s.s_peak.into(),
                        s.window_fraction.into(),
                        s.coherent_fraction.into(),
                        s.linewidth.into(),
                        r.power.into(),
                    ]);
                    row.push("ok".into());
                }
                (Err(e), _) | (_, Err(e)) => {
                    row.extend(std::iter::repeat_n(Cell::Float(f64::NAN), SPECTRUM_COLUMNS.len()));
                    row.push(e.clone().into());
                }
            }
            t.push(row);
        }
    }
    let mut out = vec![Artifact {
        name: format!("{}.csv", cfg.prefix("spectrum_summary")),
        contents: t.render("spectrum", &hash),
    }];
    if cfg.sweep.is_empty() {
        let params = params_at(cfg, &grid[0]);
        let curves = run_pool(jobs, labels.len(), |k| spectrum_curves(cfg, &params, labels[k]))?;
        for (label, curve) in labels.iter().zip(curves) {
            match curve {
                Ok((s, g1)) => {
                    let stem = format!("p{}q{}", label.p, label.q);
                    out.push(Artifact {
                        name: format!("{}_{stem}.csv", cfg.prefix("spectrum")),
                        contents: s.render("spectrum", &hash),
                    });
                    out.push(Artifact {
                        name: format!("{}_{stem}.csv", cfg.prefix("g1")),
                        contents: g1.render("spectrum", &hash),
                    });
                }
                Err(EngineError::VanishingFlux(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(out)
}

fn spectrum_curves(
    cfg: &ExperimentConfig,
    params: &EngineParams,
    label: IrrepLabel,
) -> collective_engine::Result<(Table, Table)> {
    let sol = solve_irrep(label, params)?;
    let l = spectra::regression_liouvillian(&sol.ops, params, cfg.regression_generator.into())?;
    let tau_max = spectra::default_tau_max(&l)?;
    let series = spectra::g1_correlator(&l, &sol.rho, &sol.ops.ops, tau_max, cfg.spectrum.n_tau)?;
    let s = spectra::spectrum(&series)?;
    let half = cfg.spectrum.window_linewidths * l.spectral_gap()?;
    let window = s.window(half);
    let mut st = Table::new(["omega", "detuning", "S"]);
    for (d, v) in window.detuning.iter().zip(&window.values) {
        st.push(vec![(params.omega_l() + d).into(), (*d).into(), (*v).into()]);
    }
    let mut gt = Table::new(["tau", "re_g1", "im_g1"]);
    for (tau, v) in series.tau().iter().zip(&series.values) {
        gt.push(vec![(*tau).into(), v.re.into(), v.im.into()]);
    }
    Ok((st, gt))
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub model: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub n: u32,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn check(name: &str, model: Model, value: f64, tolerance: f64) -> Check {
    Check {
        name: name.into(),
        model: model.to_string(),
        value,
        tolerance,
        passed: value.is_finite() && value <= tolerance,
    }
}

fn checks_at(n: u32, params: &EngineParams) -> Result<Vec<Check>> {
    let block = oracle::block_observables(n, params)?;
    let full = oracle::full_observables(n, params)?;
    let (state, weight) = oracle::thermal_block_check(n, params)?;
    Ok(vec![
        check("block_trace_distance", params.model, state, 1e-6),
        check("block_weight_difference", params.model, weight, 1e-8),
        check("thermo_observables", params.model, block.thermo_difference(&full), 1e-8),
        check(
            "spectral_observables",
            params.model,
            block.spectral_difference(&full),
            1e-6,
        ),
    ])
}

/// Reference parameters for the default validation run.
pub fn validation_params(model: Model) -> EngineParams {
    EngineParams {
        beta_h: 0.4,
        g_w: if model == Model::DissipativeLoad { 0.1 } else { 0.0 },
        alpha: if model == Model::Driven { 0.05 } else { 0.0 },
        beta_0: 0.8,
        model,
        ..EngineParams::default()
    }
}

/// Oracle comparison. With a config only its base point is checked;
/// otherwise random draws for `n ≤ 3` and the reference point for `n = 4`.
pub fn validate(n: u32, cfg: Option<&ExperimentConfig>, draws: usize, seed: u64) -> Result<ValidationReport> {
    if n == 0 || n > oracle::ORACLE_LIMIT {
        return Err(CliError::Config(format!(
            "validate supports 1 ≤ n ≤ {}",
            oracle::ORACLE_LIMIT
        )));
    }
    let mut checks = Vec::new();
    match cfg {
        Some(cfg) => {
            let params = cfg.engine.params(cfg.model);
            params.check_rates()?;
            checks.extend(checks_at(n, &params)?);
        }
        None if n <= oracle::DENSE_SUPEROP_LIMIT => {
            for case in oracle::equivalence_suite(n, draws, seed)? {
                checks.push(check(
                    "thermo_observables",
                    case.params.model,
                    case.thermo_difference(),
                    1e-8,
                ));
                checks.push(check(
                    "spectral_observables",
                    case.params.model,
                    case.spectral_difference(),
                    1e-6,
                ));
            }
            for model in [Model::TwoBath, Model::DissipativeLoad, Model::Driven] {
                let (state, weight) = oracle::thermal_block_check(n, &validation_params(model))?;
                checks.push(check("block_trace_distance", model, state, 1e-6));
                checks.push(check("block_weight_difference", model, weight, 1e-8));
            }
        }
        None => {
            for model in [Model::TwoBath, Model::DissipativeLoad, Model::Driven] {
                checks.extend(checks_at(n, &validation_params(model))?);
            }
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport { n, checks, passed })
}

/// Apply a `--model` override.
pub fn with_model(mut cfg: ExperimentConfig, model: Option<ModelName>) -> ExperimentConfig {
    if let Some(m) = model {
        cfg.model = m;
    }
    cfg
}
