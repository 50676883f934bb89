use std::path::{Path, PathBuf};

use gnq::circuit::{self, Circuit, CircuitStats};
use gnq::entropy::{self, EntropyReport, RmConfig};
use gnq::ldoa::{self, AnsatzKind, AnsatzTemplate, LdoaReport, PhaseVector};
use gnq::model;
use gnq::statevector::{self, CorrelatorSetup, SparseHamiltonian, Statevector, MAX_SIM_QUBITS};
use gnq::trotter::{self, LdoaMode};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig, StateSource};
use crate::error::CliError;

/// Collects output files under one directory. Tabular files get a
/// `<name>.meta.json` sidecar carrying the resolved config.
pub struct Outputs {
    dir: PathBuf,
    command: &'static str,
    config: RunConfig,
    pub written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path, command: &'static str, config: RunConfig) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            command,
            config,
            written: Vec::new(),
        })
    }

    fn header(&self) -> Value {
        json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": self.config.seed,
            "config": self.config,
        })
    }

    fn write(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, body).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    /// Plain-text output plus its metadata sidecar.
    pub fn table(&mut self, name: &str, body: &str, extra: Value) -> Result<(), CliError> {
        self.write(name, body)?;
        let mut meta = self.header();
        merge(&mut meta, extra);
        self.write(&format!("{name}.meta.json"), &pretty(&meta))
    }

    /// JSON document with the run header merged in at top level.
    pub fn document(&mut self, name: &str, body: Value) -> Result<(), CliError> {
        let mut doc = body;
        merge(&mut doc, self.header());
        self.write(name, &pretty(&doc))
    }
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        for (k, v) in b {
            a.insert(k, v);
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("values serialize")
}

fn mode_slug(m: LdoaMode) -> String {
    m.to_string().to_ascii_lowercase()
}

pub fn stats(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let p = cfg.lattice()?;
    if cfg.r_max == 0 {
        return Err(CliError::config("r_max must be at least 1"));
    }
    let modes: Vec<LdoaMode> = match cfg.ldoa {
        Some(m) => vec![m],
        None => LdoaMode::ALL.to_vec(),
    };
    let mut by_mode = serde_json::Map::new();
    for mode in modes {
        let mut rows: Vec<(usize, CircuitStats)> = Vec::new();
        for r in 1..=cfg.r_max {
            let plan = trotter::TrotterPlan::new(&p, cfg.order, r, cfg.t, mode)?;
            rows.push((r, trotter::build_evolution(&p, &plan)?.stats()));
        }
        match cfg.format {
            Format::Csv => out.table(
                &format!("stats_{}.csv", mode_slug(mode)),
                &circuit::stats_csv(&rows),
                json!({ "ldoa_mode": mode, "qubits": p.width() }),
            )?,
            Format::Json => {
                let list: Vec<Value> = rows
                    .iter()
                    .map(|(r, s)| {
                        let mut v = to_value(s);
                        merge(&mut v, json!({ "r": r }));
                        v
                    })
                    .collect();
                by_mode.insert(mode.to_string(), Value::Array(list));
            }
        }
    }
    if cfg.format == Format::Json {
        out.document("stats.json", json!({ "qubits": p.width(), "modes": by_mode }))?;
    }
    Ok(())
}

fn template_label(t: &AnsatzTemplate) -> String {
    let first = t.gates.first().map(|g| g.kind);
    match first {
        Some(k) if t.gates.iter().all(|g| g.kind == k) => k.label().to_string(),
        Some(_) => "mixed".to_string(),
        None => "empty".to_string(),
    }
}

pub fn ldoa(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let template = match &cfg.template {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read template {path}: {e}")))?;
            let t: AnsatzTemplate = serde_json::from_str(&text).map_err(|e| CliError::config(format!("template {path}: {e}")))?;
            t.validate()?;
            t
        }
        None => {
            if cfg.n == 0 {
                return Err(CliError::config("N must be at least 1"));
            }
            AnsatzTemplate::brickwork(cfg.n, cfg.ansatz)
        }
    };
    if template.n_qubits > ldoa::MAX_PHASE_QUBITS {
        return Err(ldoa::LdoaError::TooWide(template.n_qubits).into());
    }
    let custom_target = cfg.target.is_some();
    let target: PhaseVector = match &cfg.target {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read target {path}: {e}")))?;
            ldoa::diagonal_phase_of_circuit(&Circuit::from_text(&text)?)?
        }
        None => {
            if template.n_qubits % 2 != 0 {
                return Err(CliError::config("the interaction target needs an even number of template qubits"));
            }
            ldoa::interaction_target(template.n_qubits / 2, cfg.theta_g)
        }
    };
    let system = ldoa::assemble_system(&target, &template)?;
    let sol = ldoa::solve(&target, &template)?;
    let report = LdoaReport {
        ansatz: template_label(&template),
        n: template.n_qubits / 2,
        theta_g: cfg.theta_g,
        x: sol.x.clone(),
        residual_phase: sol.residual_phase_norm,
        residual_unitary: sol.residual_unitary_norm,
    };
    let mut doc = to_value(&report);
    if custom_target {
        merge(&mut doc, json!({ "theta_g": Value::Null, "target": cfg.target }));
    }
    let even = template.n_qubits >= 2 && template.n_qubits % 2 == 0;
    let brickwork_kind = [AnsatzKind::Cp, AnsatzKind::Rzz]
        .into_iter()
        .filter(|_| even)
        .find(|&k| template == AnsatzTemplate::brickwork(template.n_qubits / 2, k));
    if let (Some(kind), false) = (brickwork_kind, custom_target) {
        if let Some(unit) = ldoa::analytic_parameters(template.n_qubits / 2, kind) {
            let exact: Vec<f64> = unit.iter().map(|u| u * cfg.theta_g).collect();
            let dev = exact.iter().zip(&sol.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            merge(&mut doc, json!({ "x_analytic": exact, "max_abs_deviation_from_analytic": dev }));
        }
    }
    merge(&mut doc, json!({ "rows": system.a.nrows(), "m": template.m }));
    out.document("ldoa.json", doc)?;

    if cfg.sweep {
        let kind = match (brickwork_kind, custom_target) {
            (Some(k), false) => k,
            _ => return Err(CliError::config("the residual sweep needs the built-in interaction target and brickwork template")),
        };
        if cfg.sweep_points == 0 || !(cfg.sweep_max >= cfg.sweep_min) {
            return Err(CliError::config("sweep needs sweep_points >= 1 and sweep_max >= sweep_min"));
        }
        let rows = ldoa::residual_sweep(template.n_qubits / 2, kind, cfg.sweep_min, cfg.sweep_max, cfg.sweep_points);
        match cfg.format {
            Format::Csv => out.table("ldoa_sweep.csv", &ldoa::sweep_csv(&rows), json!({ "ansatz": kind.label() }))?,
            Format::Json => {
                let pts: Vec<Value> = rows
                    .iter()
                    .map(|(t, r, r2)| json!({ "theta_g": t, "residual_unitary": r, "residual_unitary_sq": r2 }))
                    .collect();
                out.document("ldoa_sweep.json", json!({ "ansatz": kind.label(), "points": pts }))?;
            }
        }
    }
    if cfg.dump_matrices {
        let rows: Vec<String> = system.rows.iter().map(|r| r.to_string()).collect();
        out.table("ldoa_A.csv", &ldoa::matrix_csv(&system.a), json!({ "basis_rows": rows.join(" ") }))?;
        out.table("ldoa_pinv.csv", &ldoa::matrix_csv(&ldoa::pseudoinverse(&system.a)), json!({}))?;
        let b: String = system.b.iter().map(|v| format!("{}\n", circuit::fmt_angle(*v))).collect();
        out.table("ldoa_b.csv", &b, json!({}))?;
    }
    Ok(())
}

fn simulation_width(width: usize) -> Result<(), CliError> {
    if width > MAX_SIM_QUBITS {
        return Err(statevector::SimError::TooWide { width, max: MAX_SIM_QUBITS }.into());
    }
    Ok(())
}

pub fn correlator(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let p = cfg.lattice()?;
    simulation_width(p.width())?;
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) || !(cfg.t >= 0.0 && cfg.t.is_finite()) {
        return Err(CliError::config("need dt > 0 and t >= 0"));
    }
    let steps = (cfg.t / cfg.dt).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * cfg.dt).collect();
    let setup = CorrelatorSetup {
        params: p,
        order: cfg.order,
        dt: cfg.dt,
        ldoa: cfg.ldoa_mode(),
        j: cfg.j,
        jp: cfg.jp,
        initial: cfg.initial_state(p.width())?,
        with_exact: cfg.exact,
    };
    let points = statevector::run_correlator_experiment(&setup, &times)?;
    match cfg.format {
        Format::Csv => out.table("correlator.csv", &statevector::correlator_csv(&points), json!({ "setup": setup }))?,
        Format::Json => out.document("correlator.json", json!({ "setup": setup, "points": points }))?,
    }
    Ok(())
}

pub fn entropy(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let p = cfg.lattice()?;
    simulation_width(p.width())?;
    let initial = cfg.initial_state(p.width())?;
    let psi0 = Statevector::from_bitstring(&initial)?;
    let state = match cfg.state {
        StateSource::Exact => statevector::exact_evolve(&SparseHamiltonian::new(&model::build_hamiltonian(&p))?, &psi0, cfg.t)?,
        StateSource::Trotter => {
            let plan = cfg.plan(&p, cfg.t)?;
            let mut psi = psi0;
            psi.apply_circuit(&trotter::build_evolution(&p, &plan)?);
            psi
        }
    };
    let rm = RmConfig {
        subsystem: cfg.subsystem_qubits(p.width())?,
        n_u: cfg.n_u,
        shot_mode: cfg.shot_mode()?,
        seed: cfg.seed,
    };
    rm.validate(p.width())?;
    let exact_s2 = entropy::exact_renyi2(&state, &rm.subsystem)?;
    let est = entropy::estimate_purity(&state, &rm)?;
    let mut doc = to_value(&EntropyReport::new(&rm, &est));
    merge(
        &mut doc,
        json!({
            "S2_std_error": est.s2_std_error(),
            "exact_S2": exact_s2,
            "subsystem": rm.subsystem,
            "t": cfg.t,
            "state": cfg.state,
            "warning": est.flagged().then_some("X_bar <= 0: S2 undefined; increase N_U or shots"),
        }),
    );
    out.document("entropy.json", doc)?;
    match cfg.format {
        Format::Csv => out.table("entropy_draws.csv", &est.draws_csv(), json!({}))?,
        Format::Json => out.document("entropy_draws.json", json!({ "X": est.x_values }))?,
    }
    Ok(())
}

pub fn dump_hamiltonian(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let p = cfg.lattice()?;
    let h = model::build_hamiltonian(&p);
    match cfg.format {
        Format::Csv => out.table("hamiltonian.csv", &h.to_csv(), json!({ "qubits": p.width() }))?,
        Format::Json => {
            let terms: Vec<Value> = h
                .terms
                .iter()
                .map(|t| json!({ "coefficient": t.coeff, "pauli_string": t.label() }))
                .collect();
            out.document("hamiltonian.json", json!({ "qubits": p.width(), "constant": h.constant, "terms": terms }))?;
        }
    }
    Ok(())
}

pub fn dump_circuit(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let p = cfg.lattice()?;
    let plan = cfg.plan(&p, cfg.t)?;
    let mut c = trotter::build_evolution(&p, &plan)?;
    let stats = c.stats();
    if cfg.lowered {
        c = c.lower_to_cz();
    }
    let extra = json!({ "plan": plan, "stats": stats, "gates": c.len() });
    match cfg.format {
        Format::Csv => out.table("circuit.txt", &c.to_text(), extra)?,
        Format::Json => {
            let mut doc = extra;
            merge(&mut doc, json!({ "text": c.to_text() }));
            out.document("circuit.json", doc)?;
        }
    }
    Ok(())
}
