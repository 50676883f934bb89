//! Browser bindings. Every export takes plain numbers/strings and returns a
//! JSON string, so the page needs no generated TypeScript types; the same
//! functions are called natively by the tests.

use gnq::ldoa::{self, AnsatzKind, LdoaReport};
use gnq::model::{self, LatticeParams};
use gnq::statevector::{self, CorrelatorSetup};
use gnq::trotter::{self, LdoaMode, TrotterOrder, TrotterPlan};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Widest lattice the page may simulate; keeps a click under a second.
pub const MAX_DEMO_QUBITS: usize = 12;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Solved LDOA angles for the `N`-flavor block at `θ_g`, with residuals
/// and the residual curve over `[0, theta_max]`.
pub fn ldoa_json(n: usize, ansatz: &str, theta_g: f64, theta_max: f64, points: usize) -> Result<String, String> {
    let kind: AnsatzKind = ansatz.parse().map_err(err)?;
    if !(1..=6).contains(&n) {
        return Err(format!("N must be between 1 and 6 here, got {n}"));
    }
    if !theta_g.is_finite() || !(theta_max >= 0.0 && theta_max.is_finite()) || points == 0 || points > 2001 {
        return Err("angles must be finite, theta_max >= 0, 1 <= points <= 2001".into());
    }
    let sol = ldoa::solve_block(n, kind, theta_g);
    let curve = ldoa::residual_sweep(n, kind, 0.0, theta_max, points);
    Ok(json!({
        "report": LdoaReport::new(n, kind, theta_g, &sol),
        "analytic": ldoa::analytic_parameters(n, kind).map(|u| u.iter().map(|v| v * theta_g).collect::<Vec<_>>()),
        "curve": {
            "theta": curve.iter().map(|c| c.0).collect::<Vec<_>>(),
            "residual_sq": curve.iter().map(|c| c.2).collect::<Vec<_>>(),
        },
    })
    .to_string())
}

/// Lowered circuit statistics for `r = 1..r_max`, one series per LDOA mode.
pub fn stats_json(l: usize, n: usize, r_max: usize, order: &str) -> Result<String, String> {
    let p = LatticeParams::from_staggered(l, n, 1.0, 0.5).map_err(err)?;
    let order: TrotterOrder = order.parse().map_err(err)?;
    if r_max == 0 || r_max > 16 || p.width() > 400 {
        return Err("need 1 <= r_max <= 16 and at most 400 qubits".into());
    }
    let mut series = serde_json::Map::new();
    for mode in LdoaMode::ALL {
        let mut rows = Vec::new();
        for r in 1..=r_max {
            let plan = TrotterPlan::new(&p, order, r, 1.0, mode).map_err(err)?;
            let st = trotter::build_evolution(&p, &plan).map_err(err)?.stats();
            rows.push(json!({ "r": r, "total_depth": st.total_depth, "cz_depth": st.cz_depth, "cz_count": st.cz_count }));
        }
        series.insert(mode.to_string(), rows.into());
    }
    Ok(json!({ "qubits": p.width(), "modes": series }).to_string())
}

/// Density correlator `C(j, j')` on the `δt` grid up to `t_max`, Trotter
/// and exact, from the default alternating initial state.
#[allow(clippy::too_many_arguments)]
pub fn correlator_json(l: usize, n: usize, g: f64, order: &str, ldoa: &str, dt: f64, t_max: f64, j: usize, jp: usize) -> Result<String, String> {
    let p = LatticeParams::from_staggered(l, n, 1.0, g).map_err(err)?;
    if p.width() > MAX_DEMO_QUBITS {
        return Err(format!("{} qubits is more than the demo simulates ({MAX_DEMO_QUBITS})", p.width()));
    }
    if !(dt > 0.0 && dt.is_finite() && t_max >= 0.0 && t_max <= 50.0 && t_max / dt <= 400.0) {
        return Err("need dt > 0, 0 <= t_max <= 50 and at most 400 steps".into());
    }
    let steps = (t_max / dt).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let setup = CorrelatorSetup {
        params: p,
        order: order.parse().map_err(err)?,
        dt,
        ldoa: ldoa.parse().map_err(err)?,
        j,
        jp,
        initial: model::default_initial_state(p.width()),
        with_exact: true,
    };
    let pts = statevector::run_correlator_experiment(&setup, &times).map_err(err)?;
    Ok(json!({
        "t": times,
        "trotter": pts.iter().map(|x| x.trotter).collect::<Vec<_>>(),
        "exact": pts.iter().map(|x| x.exact).collect::<Vec<_>>(),
        "initial": setup.initial,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn ldoa(n: usize, ansatz: &str, theta_g: f64, theta_max: f64, points: usize) -> Result<String, JsError> {
    ldoa_json(n, ansatz, theta_g, theta_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn circuit_stats(l: usize, n: usize, r_max: usize, order: &str) -> Result<String, JsError> {
    stats_json(l, n, r_max, order).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn correlator(l: usize, n: usize, g: f64, order: &str, ldoa: &str, dt: f64, t_max: f64, j: usize, jp: usize) -> Result<String, JsError> {
    correlator_json(l, n, g, order, ldoa, dt, t_max, j, jp).map_err(|e| JsError::new(&e))
}
