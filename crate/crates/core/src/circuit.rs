//! Gate-level circuit representation.
//!
//! A [`Circuit`] is an ordered gate list over a fixed number of qubits. It is
//! the common currency between the Trotter builders, the CZ lowering pass, the
//! statistics queries and the statevector simulator.
//!
//! Qubit `k` is bit `k` of a basis-state index (little-endian). Gates are
//! stored in time order: the first gate in the list acts first.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Row-major 2x2 complex matrix.
pub type Mat2 = [[Complex64; 2]; 2];

const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("gate {gate} touches qubit {qubit} but the circuit has {width} qubits")]
    QubitOutOfRange {
        gate: String,
        qubit: usize,
        width: usize,
    },
    #[error("gate {0} acts twice on the same qubit")]
    RepeatedQubit(String),
    #[error("single-qubit matrix on qubit {0} is not unitary")]
    NotUnitary(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A single gate. Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    /// `diag(1, e^{iθ})`.
    Phase(f64, usize),
    /// `diag(1, 1, 1, e^{iθ})`.
    ControlledPhase(f64, usize, usize),
    /// `exp(-i θ/2 Z⊗Z)`.
    Rzz(f64, usize, usize),
    Swap(usize, usize),
    /// `exp(-i θ/2 X)`.
    Rx(f64, usize),
    /// `exp(-i θ/2 Z)`.
    Rz(f64, usize),
    PauliX(usize),
    /// Controlled-X: `(control, target)`.
    Cx(usize, usize),
    Cz(usize, usize),
    Unitary1Q(Mat2, usize),
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::Phase(..) => "P",
            Gate::ControlledPhase(..) => "CP",
            Gate::Rzz(..) => "RZZ",
            Gate::Swap(..) => "SWAP",
            Gate::Rx(..) => "RX",
            Gate::Rz(..) => "RZ",
            Gate::PauliX(..) => "X",
            Gate::Cx(..) => "CX",
            Gate::Cz(..) => "CZ",
            Gate::Unitary1Q(..) => "U",
        }
    }

    /// Qubits touched by the gate, in argument order.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Phase(_, q)
            | Gate::Rx(_, q)
            | Gate::Rz(_, q)
            | Gate::PauliX(q)
            | Gate::Unitary1Q(_, q) => vec![q],
            Gate::ControlledPhase(_, a, b)
            | Gate::Rzz(_, a, b)
            | Gate::Swap(a, b)
            | Gate::Cx(a, b)
            | Gate::Cz(a, b) => vec![a, b],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.qubits().len() == 2
    }

    /// True for gates whose matrix is diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        match self {
            Gate::Phase(..) | Gate::ControlledPhase(..) | Gate::Rzz(..) | Gate::Rz(..) => true,
            Gate::Cz(..) => true,
            Gate::Unitary1Q(m, _) => m[0][1].norm() == 0.0 && m[1][0].norm() == 0.0,
            _ => false,
        }
    }

    fn validate(&self, width: usize) -> Result<(), CircuitError> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= width {
                return Err(CircuitError::QubitOutOfRange {
                    gate: self.name().to_string(),
                    qubit: q,
                    width,
                });
            }
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(CircuitError::RepeatedQubit(self.name().to_string()));
        }
        if let Gate::Unitary1Q(m, q) = self {
            if !is_unitary(m) {
                return Err(CircuitError::NotUnitary(*q));
            }
        }
        Ok(())
    }
}

fn is_unitary(m: &Mat2) -> bool {
    for i in 0..2 {
        for j in 0..2 {
            let dot: Complex64 = (0..2).map(|k| m[i][k] * m[j][k].conj()).sum();
            let expected = if i == j { 1.0 } else { 0.0 };
            if (dot - expected).norm() > UNITARY_TOL {
                return false;
            }
        }
    }
    true
}

pub fn hadamard() -> Mat2 {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

pub fn pauli_x() -> Mat2 {
    let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    [[z, o], [o, z]]
}

/// Ordered gate list on `width` qubits.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Circuit {
    width: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(width: usize) -> Self {
        Circuit {
            width,
            gates: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends a gate after checking its qubit indices.
    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        gate.validate(self.width)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Value-returning form of [`Circuit::push`].
    pub fn append(mut self, gate: Gate) -> Result<Self, CircuitError> {
        self.push(gate)?;
        Ok(self)
    }

    /// Appends every gate of `other`, which must not be wider than `self`.
    pub fn extend_from(&mut self, other: &Circuit) -> Result<(), CircuitError> {
        for g in &other.gates {
            self.push(*g)?;
        }
        Ok(())
    }

    pub fn count(&self, pred: impl Fn(&Gate) -> bool) -> usize {
        self.gates.iter().filter(|g| pred(g)).count()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.count(Gate::is_two_qubit)
    }

    /// ASAP layer count: each gate lands one layer after the latest gate that
    /// touched any of its qubits.
    pub fn depth(&self, filter: DepthFilter) -> usize {
        let mut frontier = vec![0usize; self.width];
        let mut depth = 0;
        for g in self.gates.iter().filter(|g| filter.matches(g)) {
            let qs = g.qubits();
            let layer = 1 + qs.iter().map(|&q| frontier[q]).max().unwrap_or(0);
            for q in qs {
                frontier[q] = layer;
            }
            depth = depth.max(layer);
        }
        depth
    }

    /// Rewrites every gate into CZ plus single-qubit gates.
    ///
    /// Budgets: CP and RZZ use 2 CZ, SWAP uses 3, CX uses 1. The output is
    /// equal to the input up to a global phase.
    pub fn lower_to_cz(&self) -> Circuit {
        let mut out = Circuit::new(self.width);
        let h = hadamard();
        let cx = |out: &mut Circuit, c: usize, t: usize| {
            out.gates.push(Gate::Unitary1Q(h, t));
            out.gates.push(Gate::Cz(c, t));
            out.gates.push(Gate::Unitary1Q(h, t));
        };
        for g in &self.gates {
            match *g {
                Gate::ControlledPhase(theta, a, b) => {
                    out.gates.push(Gate::Phase(theta / 2.0, a));
                    out.gates.push(Gate::Phase(theta / 2.0, b));
                    cx(&mut out, a, b);
                    out.gates.push(Gate::Phase(-theta / 2.0, b));
                    cx(&mut out, a, b);
                }
                Gate::Rzz(theta, a, b) => {
                    cx(&mut out, a, b);
                    out.gates.push(Gate::Rz(theta, b));
                    cx(&mut out, a, b);
                }
                Gate::Swap(a, b) => {
                    cx(&mut out, a, b);
                    cx(&mut out, b, a);
                    cx(&mut out, a, b);
                }
                Gate::Cx(c, t) => cx(&mut out, c, t),
                Gate::PauliX(q) => out.gates.push(Gate::Unitary1Q(pauli_x(), q)),
                Gate::Phase(..) | Gate::Rx(..) | Gate::Rz(..) | Gate::Cz(..) | Gate::Unitary1Q(..) => {
                    out.gates.push(*g)
                }
            }
        }
        out
    }

    pub fn stats(&self) -> CircuitStats {
        let lowered = self.lower_to_cz();
        CircuitStats {
            total_depth: lowered.depth(DepthFilter::All),
            two_qubit_depth: self.depth(DepthFilter::TwoQubit),
            cz_depth: lowered.depth(DepthFilter::TwoQubit),
            cz_count: lowered.count(|g| matches!(g, Gate::Cz(..))),
        }
    }

    /// Line-oriented text form: a `QUBITS n` header, then one gate per line as
    /// `KIND [angle] q1 [q2]`. `U` lines carry the eight real components of
    /// the matrix (row-major, re/im interleaved) before the qubit.
    pub fn to_text(&self) -> String {
        let mut s = format!("QUBITS {}\n", self.width);
        for g in &self.gates {
            let _ = match *g {
                Gate::Phase(a, q) | Gate::Rx(a, q) | Gate::Rz(a, q) => {
                    writeln!(s, "{} {} {}", g.name(), fmt_angle(a), q)
                }
                Gate::ControlledPhase(a, p, q) | Gate::Rzz(a, p, q) => {
                    writeln!(s, "{} {} {} {}", g.name(), fmt_angle(a), p, q)
                }
                Gate::Swap(p, q) | Gate::Cx(p, q) | Gate::Cz(p, q) => {
                    writeln!(s, "{} {} {}", g.name(), p, q)
                }
                Gate::PauliX(q) => writeln!(s, "X {}", q),
                Gate::Unitary1Q(m, q) => {
                    let parts: Vec<String> = m
                        .iter()
                        .flatten()
                        .flat_map(|c| [fmt_angle(c.re), fmt_angle(c.im)])
                        .collect();
                    writeln!(s, "U {} {}", parts.join(" "), q)
                }
            };
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Circuit, CircuitError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(CircuitError::Parse {
            line: 0,
            msg: "empty input".into(),
        })?;
        let width = header
            .strip_prefix("QUBITS ")
            .and_then(|w| w.trim().parse().ok())
            .ok_or(CircuitError::Parse {
                line: hline,
                msg: "expected `QUBITS <n>` header".into(),
            })?;
        let mut circuit = Circuit::new(width);
        for (line, l) in lines {
            let err = |msg: &str| CircuitError::Parse {
                line,
                msg: msg.to_string(),
            };
            let tok: Vec<&str> = l.split_whitespace().collect();
            let f = |i: usize| -> Result<f64, CircuitError> {
                tok.get(i)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err("bad number"))
            };
            let u = |i: usize| -> Result<usize, CircuitError> {
                tok.get(i)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err("bad qubit index"))
            };
            let gate = match tok[0] {
                "P" => Gate::Phase(f(1)?, u(2)?),
                "RX" => Gate::Rx(f(1)?, u(2)?),
                "RZ" => Gate::Rz(f(1)?, u(2)?),
                "CP" => Gate::ControlledPhase(f(1)?, u(2)?, u(3)?),
                "RZZ" => Gate::Rzz(f(1)?, u(2)?, u(3)?),
                "SWAP" => Gate::Swap(u(1)?, u(2)?),
                "CX" => Gate::Cx(u(1)?, u(2)?),
                "CZ" => Gate::Cz(u(1)?, u(2)?),
                "X" => Gate::PauliX(u(1)?),
                "U" => {
                    let c = |k: usize| -> Result<Complex64, CircuitError> {
                        Ok(Complex64::new(f(1 + 2 * k)?, f(2 + 2 * k)?))
                    };
                    Gate::Unitary1Q([[c(0)?, c(1)?], [c(2)?, c(3)?]], u(9)?)
                }
                other => return Err(err(&format!("unknown gate kind `{other}`"))),
            };
            circuit.push(gate).map_err(|e| err(&e.to_string()))?;
        }
        Ok(circuit)
    }
}

/// 17 significant digits; round-trips every `f64`.
pub fn fmt_angle(x: f64) -> String {
    format!("{:.16e}", x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthFilter {
    All,
    TwoQubit,
}

impl DepthFilter {
    fn matches(self, g: &Gate) -> bool {
        match self {
            DepthFilter::All => true,
            DepthFilter::TwoQubit => g.is_two_qubit(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CircuitStats {
    /// Layers of the lowered circuit, all gates.
    pub total_depth: usize,
    /// Two-qubit layers before lowering.
    pub two_qubit_depth: usize,
    /// CZ layers after lowering.
    pub cz_depth: usize,
    pub cz_count: usize,
}

/// CSV with header `r,total_depth,cz_depth,cz_count`.
pub fn stats_csv(rows: &[(usize, CircuitStats)]) -> String {
    let mut s = String::from("r,total_depth,cz_depth,cz_count\n");
    for (r, st) in rows {
        let _ = writeln!(s, "{},{},{},{}", r, st.total_depth, st.cz_depth, st.cz_count);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn append_preserves_order() {
        let c = Circuit::new(2).append(Gate::Cz(0, 1)).unwrap();
        assert_eq!(c.len(), 1);
        let c = c.append(Gate::Phase(0.3, 1)).unwrap();
        assert_eq!(c.gates(), &[Gate::Cz(0, 1), Gate::Phase(0.3, 1)]);
        let mut c = Circuit::new(3);
        for k in 0..7 {
            c.push(Gate::Rz(k as f64, k % 3)).unwrap();
        }
        assert_eq!(c.len(), 7);
    }

    #[test]
    fn append_rejects_bad_indices() {
        let err = Circuit::new(2).append(Gate::Cz(0, 2)).unwrap_err();
        assert!(matches!(err, CircuitError::QubitOutOfRange { qubit: 2, .. }));
        let err = Circuit::new(2).append(Gate::Swap(1, 1)).unwrap_err();
        assert!(matches!(err, CircuitError::RepeatedQubit(_)));
        let bad = [[Complex64::new(1.0, 0.0); 2]; 2];
        assert_eq!(
            Circuit::new(1).append(Gate::Unitary1Q(bad, 0)).unwrap_err(),
            CircuitError::NotUnitary(0)
        );
    }

    #[test]
    fn depth_examples() {
        let mut c = Circuit::new(4);
        c.push(Gate::Cz(0, 1)).unwrap();
        c.push(Gate::Cz(2, 3)).unwrap();
        assert_eq!(c.depth(DepthFilter::All), 1);

        let mut c = Circuit::new(3);
        c.push(Gate::Cz(0, 1)).unwrap();
        c.push(Gate::Cz(1, 2)).unwrap();
        assert_eq!(c.depth(DepthFilter::All), 2);
    }

    #[test]
    fn filtered_depth_ignores_single_qubit_gates() {
        let mut c = Circuit::new(2);
        c.push(Gate::Cz(0, 1)).unwrap();
        c.push(Gate::Rx(0.1, 0)).unwrap();
        c.push(Gate::Rx(0.1, 0)).unwrap();
        c.push(Gate::Cz(0, 1)).unwrap();
        assert_eq!(c.depth(DepthFilter::All), 4);
        assert_eq!(c.depth(DepthFilter::TwoQubit), 2);
    }

    #[test]
    fn empty_stats_are_zero() {
        assert_eq!(Circuit::new(5).stats(), CircuitStats::default());
    }

    #[test]
    fn lowering_budgets() {
        let cases = [
            (Gate::ControlledPhase(0.2, 0, 1), 2),
            (Gate::Rzz(0.2, 0, 1), 2),
            (Gate::Swap(0, 1), 3),
            (Gate::Cx(0, 1), 1),
            (Gate::Cz(0, 1), 1),
            (Gate::Rx(0.2, 0), 0),
        ];
        for (g, cz) in cases {
            let c = Circuit::new(2).append(g).unwrap();
            let lowered = c.lower_to_cz();
            assert_eq!(lowered.count(|g| matches!(g, Gate::Cz(..))), cz, "{g:?}");
            assert!(lowered.gates().iter().all(|g| matches!(
                g,
                Gate::Cz(..) | Gate::Rz(..) | Gate::Rx(..) | Gate::Phase(..) | Gate::Unitary1Q(..)
            )));
        }
    }

    #[test]
    fn text_format_parses_back() {
        let mut c = Circuit::new(3);
        c.push(Gate::Phase(0.1, 0)).unwrap();
        c.push(Gate::ControlledPhase(-1.0 / 3.0, 0, 2)).unwrap();
        c.push(Gate::Swap(1, 2)).unwrap();
        c.push(Gate::Unitary1Q(hadamard(), 1)).unwrap();
        c.push(Gate::PauliX(2)).unwrap();
        let text = c.to_text();
        assert!(text.starts_with("QUBITS 3\nP 1.0000000000000001e-1 0\n"));
        assert_eq!(Circuit::from_text(&text).unwrap(), c);
    }

    #[test]
    fn text_format_errors_carry_line_numbers() {
        let err = Circuit::from_text("QUBITS 2\nCZ 0 1\nFOO 1\n").unwrap_err();
        assert!(matches!(err, CircuitError::Parse { line: 3, .. }));
        let err = Circuit::from_text("QUBITS 2\nCZ 0 5\n").unwrap_err();
        assert!(matches!(err, CircuitError::Parse { line: 2, .. }));
    }

    #[test]
    fn stats_csv_header() {
        let csv = stats_csv(&[(1, CircuitStats { total_depth: 3, two_qubit_depth: 1, cz_depth: 1, cz_count: 2 })]);
        assert_eq!(csv, "r,total_depth,cz_depth,cz_count\n1,3,1,2\n");
    }
}
