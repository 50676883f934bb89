//! Localized diagonal operator approximation.
//!
//! The interaction block of a Trotter step is a diagonal unitary realised by
//! a long CP + SWAP ladder. Here it is replaced by a short nearest-neighbour
//! diagonal ansatz whose angles solve the real least-squares problem
//! `A x ≈ b`, where `b` holds the target phases and `A` maps angles to the
//! phases the ansatz produces on each basis state.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{fmt_angle, Circuit, Gate};
use crate::trotter;

#[derive(Debug, Error, PartialEq)]
pub enum LdoaError {
    #[error("gate {index} ({name}) is not diagonal or a SWAP")]
    NonDiagonal { index: usize, name: &'static str },
    #[error("SWAP layers leave the qubit order permuted (last SWAP at gate {index})")]
    UnpairedSwaps { index: usize },
    #[error("circuit width {0} too large for a dense phase vector")]
    TooWide(usize),
    #[error("template acts on {template} qubits, target on {target}")]
    WidthMismatch { template: usize, target: usize },
    #[error("invalid template: {0}")]
    BadTemplate(String),
    #[error("unknown ansatz `{0}` (expected CP or RZZ)")]
    UnknownAnsatz(String),
}

/// Widest block for which phase vectors are materialised.
pub const MAX_PHASE_QUBITS: usize = 22;

/// Diagonal phases `φ_k` of a diagonal unitary, `k` little-endian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseVector {
    pub n_qubits: usize,
    pub phases: Vec<f64>,
}

impl PhaseVector {
    pub fn zeros(n_qubits: usize) -> Self {
        PhaseVector {
            n_qubits,
            phases: vec![0.0; 1 << n_qubits],
        }
    }

    /// Phases wrapped into `(−π, π]`.
    pub fn reduced(&self) -> Vec<f64> {
        use std::f64::consts::{PI, TAU};
        self.phases
            .iter()
            .map(|&p| {
                let r = p.rem_euclid(TAU);
                if r > PI {
                    r - TAU
                } else {
                    r
                }
            })
            .collect()
    }
}

/// Accumulates the phase every basis state picks up, without modular
/// reduction. SWAPs are tracked as a wire relabelling, so the result is exact
/// symbolic bookkeeping rather than a matrix product.
pub fn diagonal_phase_of_circuit(circuit: &Circuit) -> Result<PhaseVector, LdoaError> {
    let n = circuit.width();
    if n > MAX_PHASE_QUBITS {
        return Err(LdoaError::TooWide(n));
    }
    // wire[p] = logical qubit currently sitting at position p
    let mut wire: Vec<usize> = (0..n).collect();
    let mut last_swap = None;
    let mut out = PhaseVector::zeros(n);
    let bit = |k: usize, q: usize| (k >> q) & 1 == 1;
    for (index, g) in circuit.gates().iter().enumerate() {
        match *g {
            Gate::Swap(p, q) => {
                wire.swap(p, q);
                last_swap = Some(index);
            }
            Gate::Phase(t, p) => {
                let lp = wire[p];
                for (k, ph) in out.phases.iter_mut().enumerate() {
                    if bit(k, lp) {
                        *ph += t;
                    }
                }
            }
            Gate::Rz(t, p) => {
                let lp = wire[p];
                for (k, ph) in out.phases.iter_mut().enumerate() {
                    *ph += if bit(k, lp) { t / 2.0 } else { -t / 2.0 };
                }
            }
            Gate::ControlledPhase(_, p, q) | Gate::Cz(p, q) => {
                let t = match *g {
                    Gate::ControlledPhase(t, ..) => t,
                    _ => std::f64::consts::PI,
                };
                let (lp, lq) = (wire[p], wire[q]);
                for (k, ph) in out.phases.iter_mut().enumerate() {
                    if bit(k, lp) && bit(k, lq) {
                        *ph += t;
                    }
                }
            }
            Gate::Rzz(t, p, q) => {
                let (lp, lq) = (wire[p], wire[q]);
                for (k, ph) in out.phases.iter_mut().enumerate() {
                    *ph += if bit(k, lp) == bit(k, lq) { -t / 2.0 } else { t / 2.0 };
                }
            }
            Gate::Unitary1Q(m, p) if g.is_diagonal() => {
                let (a0, a1) = (m[0][0].arg(), m[1][1].arg());
                let lp = wire[p];
                for (k, ph) in out.phases.iter_mut().enumerate() {
                    *ph += if bit(k, lp) { a1 } else { a0 };
                }
            }
            _ => {
                return Err(LdoaError::NonDiagonal {
                    index,
                    name: g.name(),
                })
            }
        }
    }
    if wire.iter().enumerate().any(|(p, &w)| p != w) {
        return Err(LdoaError::UnpairedSwaps {
            index: last_swap.unwrap_or(0),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnsatzKind {
    #[serde(rename = "CP")]
    Cp,
    #[serde(rename = "RZZ")]
    Rzz,
}

impl std::str::FromStr for AnsatzKind {
    type Err = LdoaError;
    fn from_str(s: &str) -> Result<Self, LdoaError> {
        match s.to_ascii_lowercase().as_str() {
            "cp" => Ok(AnsatzKind::Cp),
            "rzz" => Ok(AnsatzKind::Rzz),
            _ => Err(LdoaError::UnknownAnsatz(s.to_string())),
        }
    }
}

impl AnsatzKind {
    pub fn label(self) -> &'static str {
        match self {
            AnsatzKind::Cp => "CP",
            AnsatzKind::Rzz => "RZZ",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzGate {
    pub kind: AnsatzKind,
    pub q1: usize,
    pub q2: usize,
    pub param: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzTemplate {
    pub n_qubits: usize,
    pub gates: Vec<AnsatzGate>,
    pub m: usize,
}

impl AnsatzTemplate {
    pub fn new(n_qubits: usize, gates: Vec<AnsatzGate>, m: usize) -> Result<Self, LdoaError> {
        let t = AnsatzTemplate { n_qubits, gates, m };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), LdoaError> {
        let mut used = vec![false; self.m];
        for g in &self.gates {
            if g.q1.max(g.q2) >= self.n_qubits {
                return Err(LdoaError::BadTemplate(format!(
                    "qubit pair ({}, {}) outside {} qubits",
                    g.q1, g.q2, self.n_qubits
                )));
            }
            if g.q1.abs_diff(g.q2) != 1 {
                return Err(LdoaError::BadTemplate(format!(
                    "pair ({}, {}) is not nearest-neighbour",
                    g.q1, g.q2
                )));
            }
            match used.get_mut(g.param) {
                Some(u) => *u = true,
                None => {
                    return Err(LdoaError::BadTemplate(format!(
                        "parameter index {} >= m = {}",
                        g.param, self.m
                    )))
                }
            }
        }
        if let Some(p) = used.iter().position(|u| !u) {
            return Err(LdoaError::BadTemplate(format!("parameter {p} unused")));
        }
        Ok(())
    }

    /// Brickwork on `2N` qubits: one gate per even pair `(2i, 2i+1)` carrying
    /// `x_i`, then one per odd pair `(2i+1, 2i+2)` carrying `x_{N+i}`.
    /// `m = 2N − 1`.
    pub fn brickwork(n_flavors: usize, kind: AnsatzKind) -> Self {
        let n = n_flavors;
        let mut gates = Vec::with_capacity(2 * n - 1);
        for i in 0..n {
            gates.push(AnsatzGate {
                kind,
                q1: 2 * i,
                q2: 2 * i + 1,
                param: i,
            });
        }
        for i in 0..n - 1 {
            gates.push(AnsatzGate {
                kind,
                q1: 2 * i + 1,
                q2: 2 * i + 2,
                param: n + i,
            });
        }
        AnsatzTemplate {
            n_qubits: 2 * n,
            gates,
            m: 2 * n - 1,
        }
    }

    /// Instantiates the template with angles `x`, shifted by `base`.
    pub fn to_gates(&self, x: &[f64], base: usize) -> Vec<Gate> {
        self.gates
            .iter()
            .map(|g| {
                let (a, b, t) = (g.q1 + base, g.q2 + base, x[g.param]);
                match g.kind {
                    AnsatzKind::Cp => Gate::ControlledPhase(t, a, b),
                    AnsatzKind::Rzz => Gate::Rzz(t, a, b),
                }
            })
            .collect()
    }
}

/// The `2^n × m` matrix `M` with `θ(x) = M x`.
pub fn ansatz_phase_map(t: &AnsatzTemplate) -> DMatrix<f64> {
    let dim = 1usize << t.n_qubits;
    let mut m = DMatrix::zeros(dim, t.m);
    for g in &t.gates {
        for k in 0..dim {
            let (b1, b2) = ((k >> g.q1) & 1, (k >> g.q2) & 1);
            m[(k, g.param)] += match g.kind {
                AnsatzKind::Cp => (b1 & b2) as f64,
                AnsatzKind::Rzz => {
                    if b1 == b2 {
                        -0.5
                    } else {
                        0.5
                    }
                }
            };
        }
    }
    m
}

/// Target phases of the interaction ladder (phase layer excluded) on the
/// `2N`-qubit block.
pub fn interaction_target(n_flavors: usize, theta_g: f64) -> PhaseVector {
    let mut c = Circuit::new(2 * n_flavors);
    trotter::push_int_ladder(&mut c, n_flavors, theta_g, 0);
    diagonal_phase_of_circuit(&c).expect("ladder is diagonal by construction")
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Basis-state index behind each row.
    pub rows: Vec<usize>,
}

/// Keeps every basis state where the target phase or the ansatz row is
/// nonzero; the `0 = 0` identities are dropped.
pub fn assemble_system(target: &PhaseVector, template: &AnsatzTemplate) -> Result<LinearSystem, LdoaError> {
    if target.n_qubits != template.n_qubits {
        return Err(LdoaError::WidthMismatch {
            template: template.n_qubits,
            target: target.n_qubits,
        });
    }
    let m = ansatz_phase_map(template);
    let scale = target.phases.iter().fold(1.0f64, |s, p| s.max(p.abs()));
    let rows: Vec<usize> = (0..m.nrows())
        .filter(|&k| target.phases[k].abs() > 1e-13 * scale || m.row(k).iter().any(|&v| v != 0.0))
        .collect();
    let a = DMatrix::from_fn(rows.len(), template.m, |i, j| m[(rows[i], j)]);
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|&k| if target.phases[k].abs() > 1e-13 * scale { target.phases[k] } else { 0.0 }));
    Ok(LinearSystem { a, b, rows })
}

/// Cholesky factor `L` of a symmetric matrix, or `None` if it is not
/// numerically positive definite.
fn cholesky(s: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = s.nrows();
    let max_diag = (0..n).map(|i| s[(i, i)].abs()).fold(0.0, f64::max);
    let tol = 1e-12 * max_diag.max(f64::MIN_POSITIVE);
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = s[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= tol {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut v = s[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / d;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ X = B` column by column.
fn cholesky_solve(l: &DMatrix<f64>, rhs: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let mut x = rhs.clone();
    for c in 0..x.ncols() {
        for i in 0..n {
            let mut v = x[(i, c)];
            for k in 0..i {
                v -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = v / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut v = x[(i, c)];
            for k in i + 1..n {
                v -= l[(k, i)] * x[(k, c)];
            }
            x[(i, c)] = v / l[(i, i)];
        }
    }
    x
}

/// Moore–Penrose pseudoinverse. Full column rank goes through the normal
/// equations `(AᵀA)⁻¹Aᵀ`; anything else falls back to an SVD.
pub fn pseudoinverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return DMatrix::zeros(a.ncols(), a.nrows());
    }
    let at = a.transpose();
    if let Some(l) = cholesky(&(&at * a)) {
        return cholesky_solve(&l, &at);
    }
    let tol = 1e-12 * a.nrows().max(a.ncols()) as f64 * a.abs().max().max(f64::MIN_POSITIVE);
    a.clone()
        .svd(true, true)
        .pseudo_inverse(tol)
        .expect("SVD computed with both factors")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdoaSolution {
    pub x: Vec<f64>,
    pub residual_phase_norm: f64,
    pub residual_unitary_norm: f64,
}

/// Minimum-norm least-squares `x = A⁺ b`.
pub fn pseudoinverse_solve(system: &LinearSystem) -> Vec<f64> {
    if system.a.nrows() == 0 {
        return vec![0.0; system.a.ncols()];
    }
    let at = system.a.transpose();
    let atb = &at * &system.b;
    let x = match cholesky(&(&at * &system.a)) {
        Some(l) => cholesky_solve(&l, &DMatrix::from_column_slice(atb.len(), 1, atb.as_slice())).column(0).into_owned(),
        None => pseudoinverse(&system.a) * &system.b,
    };
    x.iter().copied().collect()
}

/// `‖Aᵀ(b − Ax)‖`, zero at the least-squares optimum.
pub fn normal_equation_residual(system: &LinearSystem, x: &[f64]) -> f64 {
    let r = &system.b - &system.a * DVector::from_column_slice(x);
    (system.a.transpose() * r).norm()
}

pub fn residual_phase_norm(system: &LinearSystem, x: &[f64]) -> f64 {
    (&system.b - &system.a * DVector::from_column_slice(x)).norm()
}

/// `‖U_target − U_ansatz(x)‖` over the whole diagonal.
pub fn residual_unitary_norm(target: &PhaseVector, template: &AnsatzTemplate, x: &[f64]) -> f64 {
    let theta = ansatz_phase_map(template) * DVector::from_column_slice(x);
    target
        .phases
        .iter()
        .zip(theta.iter())
        .map(|(p, t)| 2.0 - 2.0 * (p - t).cos())
        .sum::<f64>()
        .max(0.0)
        .sqrt()
}

pub fn solve(target: &PhaseVector, template: &AnsatzTemplate) -> Result<LdoaSolution, LdoaError> {
    let system = assemble_system(target, template)?;
    let x = pseudoinverse_solve(&system);
    Ok(LdoaSolution {
        residual_phase_norm: residual_phase_norm(&system, &x),
        residual_unitary_norm: residual_unitary_norm(target, template, &x),
        x,
    })
}

/// Solves the brickwork template for the `N`-flavor interaction block.
pub fn solve_block(n_flavors: usize, kind: AnsatzKind, theta_g: f64) -> LdoaSolution {
    let target = interaction_target(n_flavors, theta_g);
    solve(&target, &AnsatzTemplate::brickwork(n_flavors, kind)).expect("widths agree by construction")
}

/// Known exact optima for the brickwork templates, as multiples of `θ_g`.
pub fn analytic_parameters(n_flavors: usize, kind: AnsatzKind) -> Option<Vec<f64>> {
    let v: Vec<f64> = match (n_flavors, kind) {
        (2, AnsatzKind::Cp) => vec![-1.0 / 6.0, -1.0 / 6.0, -13.0 / 12.0],
        (2, AnsatzKind::Rzz) => vec![-0.5, -0.5, 0.5],
        (3, AnsatzKind::Cp) => vec![-11.0 / 19.0, -24.0 / 19.0, -11.0 / 19.0, 1.0 / 19.0, 1.0 / 19.0],
        (3, AnsatzKind::Rzz) => vec![-0.5, 0.5, -0.5, -0.5, -0.5],
        (4, AnsatzKind::Cp) => vec![
            -55.0 / 118.0,
            -3.0 / 59.0,
            -3.0 / 59.0,
            -55.0 / 118.0,
            -26.0 / 59.0,
            -147.0 / 118.0,
            -26.0 / 59.0,
        ],
        (4, AnsatzKind::Rzz) => vec![-0.5, -0.5, -0.5, -0.5, -0.5, 0.5, -0.5],
        _ => return None,
    };
    Some(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdoaReport {
    pub ansatz: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub theta_g: f64,
    pub x: Vec<f64>,
    pub residual_phase: f64,
    pub residual_unitary: f64,
}

impl LdoaReport {
    pub fn new(n: usize, kind: AnsatzKind, theta_g: f64, sol: &LdoaSolution) -> Self {
        LdoaReport {
            ansatz: kind.label().to_string(),
            n,
            theta_g,
            x: sol.x.clone(),
            residual_phase: sol.residual_phase_norm,
            residual_unitary: sol.residual_unitary_norm,
        }
    }
}

/// `(θ_g, ‖·‖, ‖·‖²)` on `points` evenly spaced angles over `[lo, hi]`.
pub fn residual_sweep(n_flavors: usize, kind: AnsatzKind, lo: f64, hi: f64, points: usize) -> Vec<(f64, f64, f64)> {
    // x is linear in θ_g: solve once at θ_g = 1 and rescale.
    let unit = solve_block(n_flavors, kind, 1.0).x;
    let template = AnsatzTemplate::brickwork(n_flavors, kind);
    let unit_target = interaction_target(n_flavors, 1.0);
    (0..points)
        .map(|i| {
            let th = if points == 1 { lo } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 };
            let target = PhaseVector {
                n_qubits: unit_target.n_qubits,
                phases: unit_target.phases.iter().map(|p| p * th).collect(),
            };
            let x: Vec<f64> = unit.iter().map(|v| v * th).collect();
            let r = residual_unitary_norm(&target, &template, &x);
            (th, r, r * r)
        })
        .collect()
}

pub fn sweep_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut s = String::from("theta_g,residual_unitary,residual_unitary_sq\n");
    for (t, r, r2) in rows {
        let _ = writeln!(s, "{},{},{}", fmt_angle(*t), fmt_angle(*r), fmt_angle(*r2));
    }
    s
}

pub fn matrix_csv(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| fmt_angle(*v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_flavor_target_diagonal() {
        let th = 0.37;
        let v = interaction_target(2, th);
        let expected = [0., 0., 0., 1., 0., -1., -1., -1., 0., -1., -1., -1., 1., -1., -1., -2.];
        for (k, e) in expected.iter().enumerate() {
            assert!((v.phases[k] - e * th).abs() < 1e-15, "entry {k}");
        }
    }

    #[test]
    fn empty_and_single_cp() {
        assert_eq!(diagonal_phase_of_circuit(&Circuit::new(3)).unwrap(), PhaseVector::zeros(3));
        let c = Circuit::new(2).append(Gate::ControlledPhase(0.4, 0, 1)).unwrap();
        assert_eq!(diagonal_phase_of_circuit(&c).unwrap().phases, vec![0.0, 0.0, 0.0, 0.4]);
    }

    #[test]
    fn rejects_non_diagonal_and_unpaired() {
        let c = Circuit::new(2)
            .append(Gate::Phase(0.1, 0))
            .unwrap()
            .append(Gate::Rx(0.1, 1))
            .unwrap();
        assert_eq!(
            diagonal_phase_of_circuit(&c),
            Err(LdoaError::NonDiagonal { index: 1, name: "RX" })
        );
        let c = Circuit::new(3).append(Gate::Swap(0, 1)).unwrap().append(Gate::Swap(1, 2)).unwrap();
        assert_eq!(diagonal_phase_of_circuit(&c), Err(LdoaError::UnpairedSwaps { index: 1 }));
    }

    #[test]
    fn reduced_phases_in_range() {
        let v = PhaseVector { n_qubits: 1, phases: vec![-7.0, 4.0] };
        for p in v.reduced() {
            assert!(p > -std::f64::consts::PI && p <= std::f64::consts::PI);
        }
    }

    #[test]
    fn phase_map_rows() {
        let m = ansatz_phase_map(&AnsatzTemplate::brickwork(2, AnsatzKind::Cp));
        assert_eq!(m.row(3).iter().copied().collect::<Vec<_>>(), vec![1., 0., 0.]);
        assert_eq!(m.row(6).iter().copied().collect::<Vec<_>>(), vec![0., 0., 1.]);
        assert_eq!(m.row(15).iter().copied().collect::<Vec<_>>(), vec![1., 1., 1.]);
        let m = ansatz_phase_map(&AnsatzTemplate::brickwork(2, AnsatzKind::Rzz));
        assert_eq!(m.row(0).iter().copied().collect::<Vec<_>>(), vec![-0.5, -0.5, -0.5]);
    }

    #[test]
    fn two_flavor_system_matches_listing() {
        let th = 1.3;
        let s = assemble_system(&interaction_target(2, th), &AnsatzTemplate::brickwork(2, AnsatzKind::Cp)).unwrap();
        let a_rows = [
            [1., 0., 0.],
            [0., 0., 0.],
            [0., 0., 1.],
            [1., 0., 1.],
            [0., 0., 0.],
            [0., 0., 0.],
            [1., 0., 0.],
            [0., 1., 0.],
            [0., 1., 0.],
            [0., 1., 1.],
            [1., 1., 1.],
        ];
        let b = [1., -1., -1., -1., -1., -1., -1., 1., -1., -1., -2.];
        assert_eq!(s.a.nrows(), 11);
        for i in 0..11 {
            for j in 0..3 {
                assert_eq!(s.a[(i, j)], a_rows[i][j]);
            }
            assert!((s.b[i] - b[i] * th).abs() < 1e-15);
        }
    }

    #[test]
    fn template_validation() {
        let bad = AnsatzTemplate::new(
            3,
            vec![AnsatzGate { kind: AnsatzKind::Cp, q1: 0, q2: 2, param: 0 }],
            1,
        );
        assert!(matches!(bad, Err(LdoaError::BadTemplate(_))));
        let unused = AnsatzTemplate::new(
            2,
            vec![AnsatzGate { kind: AnsatzKind::Cp, q1: 0, q2: 1, param: 0 }],
            2,
        );
        assert!(matches!(unused, Err(LdoaError::BadTemplate(_))));
        for n in 1..=5 {
            let t = AnsatzTemplate::brickwork(n, AnsatzKind::Rzz);
            t.validate().unwrap();
            assert_eq!(t.m, 2 * n - 1);
        }
    }

    #[test]
    fn pinv_small_cases() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert!((pseudoinverse(&id) - &id).abs().max() < 1e-15);
        let ones = DMatrix::from_element(2, 2, 1.0);
        let p = pseudoinverse(&ones);
        assert!((p - DMatrix::from_element(2, 2, 0.25)).abs().max() < 1e-14);
    }

    #[test]
    fn zero_target_gives_zero_solution() {
        let sol = solve(&PhaseVector::zeros(4), &AnsatzTemplate::brickwork(2, AnsatzKind::Cp)).unwrap();
        assert_eq!(sol.x, vec![0.0; 3]);
        assert_eq!(sol.residual_unitary_norm, 0.0);
    }

    #[test]
    fn solver_matches_analytic_tables() {
        for n in 2..=4 {
            for kind in [AnsatzKind::Cp, AnsatzKind::Rzz] {
                let x = solve_block(n, kind, 0.5).x;
                let want = analytic_parameters(n, kind).unwrap();
                for (a, b) in x.iter().zip(&want) {
                    assert!((a - 0.5 * b).abs() < 1e-12, "N={n} {kind:?}: {x:?}");
                }
            }
        }
    }

    #[test]
    fn two_flavor_residuals_in_closed_form() {
        for i in 0..=50 {
            let th = i as f64 * std::f64::consts::FRAC_PI_2 / 50.0;
            let cp = 22.0
                - 2.0 * (th / 12.0).cos()
                - 4.0 * (th / 4.0).cos()
                - 2.0 * (7.0 * th / 12.0).cos()
                - 4.0 * (5.0 * th / 6.0).cos()
                - 6.0 * th.cos()
                - 4.0 * (7.0 * th / 6.0).cos();
            // the RZZ optimum leaves residual phases ±θ/4, ±3θ/4, ±5θ/4, 9θ/4
            let rzz = 32.0 - 18.0 * (th / 4.0).cos() - 8.0 * (3.0 * th / 4.0).cos() - 4.0 * (5.0 * th / 4.0).cos() - 2.0 * (9.0 * th / 4.0).cos();
            let got_cp = solve_block(2, AnsatzKind::Cp, th).residual_unitary_norm.powi(2);
            let got_rzz = solve_block(2, AnsatzKind::Rzz, th).residual_unitary_norm.powi(2);
            assert!((got_cp - cp).abs() < 1e-12, "CP at {th}");
            assert!((got_rzz - rzz).abs() < 1e-12, "RZZ at {th}");
        }
    }

    #[test]
    fn sweep_grid() {
        let rows = residual_sweep(2, AnsatzKind::Cp, 0.0, std::f64::consts::FRAC_PI_2, 101);
        assert_eq!(rows.len(), 101);
        assert_eq!(rows[0].1, 0.0);
        assert_eq!(sweep_csv(&rows).lines().count(), 102);
    }
}
