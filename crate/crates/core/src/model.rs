//! Jordan–Wigner encoded lattice Gross–Neveu Hamiltonian and observables.
//!
//! Staggered site `j` (0..L) carrying flavor `b` (0..N) lives on qubit
//! `j*N + b`. Dirac site `n` owns the staggered pair `(2n, 2n+1)`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::fmt_angle;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("lattice needs at least one Dirac site")]
    NoSites,
    #[error("flavor count must be at least 1")]
    NoFlavors,
    #[error("lattice spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("coupling must be finite, got {0}")]
    BadCoupling(f64),
    #[error("site {site} / flavor {flavor} out of range for L={l}, N={n}")]
    OutOfRange {
        site: usize,
        flavor: usize,
        l: usize,
        n: usize,
    },
    #[error("bad Pauli string: {0}")]
    BadPauli(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    /// Dirac sites; the chain has `2 * l_d` staggered sites.
    pub l_d: usize,
    pub n_flavors: usize,
    pub a: f64,
    pub g: f64,
}

impl LatticeParams {
    pub fn new(l_d: usize, n_flavors: usize, a: f64, g: f64) -> Result<Self, ModelError> {
        let p = LatticeParams { l_d, n_flavors, a, g };
        p.validate()?;
        Ok(p)
    }

    /// Builds from the staggered-site count `L`, which must be even.
    pub fn from_staggered(l: usize, n_flavors: usize, a: f64, g: f64) -> Result<Self, ModelError> {
        if l == 0 || l % 2 != 0 {
            return Err(ModelError::NoSites);
        }
        Self::new(l / 2, n_flavors, a, g)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.l_d == 0 {
            return Err(ModelError::NoSites);
        }
        if self.n_flavors == 0 {
            return Err(ModelError::NoFlavors);
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(ModelError::BadSpacing(self.a));
        }
        if !self.g.is_finite() {
            return Err(ModelError::BadCoupling(self.g));
        }
        Ok(())
    }

    /// Staggered site count.
    pub fn l(&self) -> usize {
        2 * self.l_d
    }

    pub fn width(&self) -> usize {
        self.l() * self.n_flavors
    }

    pub fn qubit(&self, j: usize, b: usize) -> Result<usize, ModelError> {
        qubit_index(j, b, self.n_flavors, self.l())
    }
}

/// Qubit carrying flavor `b` on staggered site `j`.
pub fn qubit_index(j: usize, b: usize, n: usize, l: usize) -> Result<usize, ModelError> {
    if j >= l || b >= n {
        return Err(ModelError::OutOfRange {
            site: j,
            flavor: b,
            l,
            n,
        });
    }
    Ok(j * n + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliString {
    pub coeff: f64,
    /// Strictly increasing qubit indices.
    pub factors: Vec<(usize, Axis)>,
}

impl PauliString {
    pub fn new(coeff: f64, mut factors: Vec<(usize, Axis)>) -> Result<Self, ModelError> {
        factors.sort_by_key(|f| f.0);
        if factors.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(ModelError::BadPauli("repeated qubit".into()));
        }
        if !coeff.is_finite() {
            return Err(ModelError::BadPauli("non-finite coefficient".into()));
        }
        Ok(PauliString { coeff, factors })
    }

    /// Label like `X6 Y8`.
    pub fn label(&self) -> String {
        self.factors
            .iter()
            .map(|(q, a)| format!("{a}{q}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn parse_label(coeff: f64, label: &str) -> Result<Self, ModelError> {
        let mut factors = Vec::new();
        for tok in label.split_whitespace() {
            let (axis, rest) = tok.split_at(1);
            let axis = match axis {
                "X" => Axis::X,
                "Y" => Axis::Y,
                "Z" => Axis::Z,
                _ => return Err(ModelError::BadPauli(tok.to_string())),
            };
            let q = rest
                .parse()
                .map_err(|_| ModelError::BadPauli(tok.to_string()))?;
            factors.push((q, axis));
        }
        PauliString::new(coeff, factors)
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.factors.last().map(|f| f.0)
    }
}

/// Weighted Pauli sum plus a scalar offset. Real coefficients on Hermitian
/// Pauli strings make every instance Hermitian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    pub width: usize,
    pub terms: Vec<PauliString>,
    pub constant: f64,
}

/// Observables share the Hamiltonian representation.
pub type Observable = Hamiltonian;

impl Hamiltonian {
    pub fn zero(width: usize) -> Self {
        Hamiltonian {
            width,
            terms: Vec::new(),
            constant: 0.0,
        }
    }

    pub fn add(&mut self, other: &Hamiltonian) {
        assert_eq!(self.width, other.width, "width mismatch");
        self.terms.extend(other.terms.iter().cloned());
        self.constant += other.constant;
    }

    /// Adds `coeff * Π_k (α_k I + β_k Z_{q_k})`, expanding into Z strings.
    /// Repeated qubits are allowed and use `Z² = I`.
    fn add_z_product(&mut self, coeff: f64, factors: &[(usize, f64, f64)]) {
        let mut acc: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        acc.insert(Vec::new(), coeff);
        for &(q, alpha, beta) in factors {
            let mut next = BTreeMap::new();
            for (key, c) in acc {
                *next.entry(key.clone()).or_insert(0.0) += c * alpha;
                let mut flipped = key;
                match flipped.binary_search(&q) {
                    Ok(i) => {
                        flipped.remove(i);
                    }
                    Err(i) => flipped.insert(i, q),
                }
                *next.entry(flipped).or_insert(0.0) += c * beta;
            }
            acc = next;
        }
        for (key, c) in acc {
            if c == 0.0 {
                continue;
            }
            if key.is_empty() {
                self.constant += c;
            } else {
                self.terms.push(PauliString {
                    coeff: c,
                    factors: key.into_iter().map(|q| (q, Axis::Z)).collect(),
                });
            }
        }
    }

    /// Merges terms with identical labels and drops exact zeros.
    pub fn simplified(&self) -> Hamiltonian {
        let mut map: BTreeMap<Vec<(usize, Axis)>, f64> = BTreeMap::new();
        for t in &self.terms {
            *map.entry(t.factors.clone()).or_insert(0.0) += t.coeff;
        }
        Hamiltonian {
            width: self.width,
            terms: map
                .into_iter()
                .filter(|(_, c)| *c != 0.0)
                .map(|(factors, coeff)| PauliString { coeff, factors })
                .collect(),
            constant: self.constant,
        }
    }

    /// CSV dump: `coefficient,pauli_string` rows and a trailing `CONST,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("coefficient,pauli_string\n");
        for t in &self.terms {
            let _ = writeln!(s, "{},{}", fmt_angle(t.coeff), t.label());
        }
        let _ = writeln!(s, "CONST,{}", fmt_angle(self.constant));
        s
    }

    pub fn from_csv(width: usize, text: &str) -> Result<Hamiltonian, ModelError> {
        let mut h = Hamiltonian::zero(width);
        for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            let (c, label) = line
                .split_once(',')
                .ok_or_else(|| ModelError::BadPauli(line.to_string()))?;
            if c == "CONST" {
                h.constant += label
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| ModelError::BadPauli(line.to_string()))?;
                continue;
            }
            let coeff = c
                .trim()
                .parse()
                .map_err(|_| ModelError::BadPauli(line.to_string()))?;
            let p = PauliString::parse_label(coeff, label)?;
            if p.max_qubit().is_some_and(|q| q >= width) {
                return Err(ModelError::BadPauli(format!("qubit out of range in `{line}`")));
            }
            h.terms.push(p);
        }
        Ok(h)
    }
}

/// Hopping part: `Σ_j Σ_b (1/4a)(X_p Y_q − Y_p X_q)` with `p = jN+b`,
/// `q = (j+1)N+b`, open boundaries.
pub fn build_quadratic(p: &LatticeParams) -> Hamiltonian {
    let n = p.n_flavors;
    let c = 1.0 / (4.0 * p.a);
    let mut h = Hamiltonian::zero(p.width());
    for j in 0..p.l() - 1 {
        for b in 0..n {
            let (lo, hi) = (j * n + b, (j + 1) * n + b);
            h.terms.push(PauliString {
                coeff: c,
                factors: vec![(lo, Axis::X), (hi, Axis::Y)],
            });
            h.terms.push(PauliString {
                coeff: -c,
                factors: vec![(lo, Axis::Y), (hi, Axis::X)],
            });
        }
    }
    h
}

/// Hopping terms restricted to bonds `j → j+1` with `j % 2 == parity`.
pub fn build_quadratic_layer(p: &LatticeParams, parity: usize) -> Hamiltonian {
    let n = p.n_flavors;
    let mut h = build_quadratic(p);
    h.terms.retain(|t| (t.factors[0].0 / n) % 2 == parity);
    h
}

/// Interaction part in ZZ form.
pub fn build_quartic(p: &LatticeParams) -> Hamiltonian {
    let n = p.n_flavors;
    let c = p.g * p.g / (4.0 * p.a);
    let mut h = Hamiltonian::zero(p.width());
    let zz = |coeff: f64, a: usize, b: usize| PauliString {
        coeff,
        factors: vec![(a.min(b), Axis::Z), (a.max(b), Axis::Z)],
    };
    for site in 0..p.l_d {
        let even = |b: usize| 2 * site * n + b;
        let odd = |b: usize| (2 * site + 1) * n + b;
        for b in 0..n {
            h.terms.push(zz(c, even(b), odd(b)));
        }
        for b in 0..n {
            for cc in b + 1..n {
                h.terms.push(zz(-c, even(b), even(cc)));
                h.terms.push(zz(-c, odd(b), odd(cc)));
                h.terms.push(zz(c, even(b), odd(cc)));
                h.terms.push(zz(c, odd(b), even(cc)));
            }
        }
    }
    h.constant = -c * (p.l_d * n) as f64;
    h
}

/// Interaction part written with occupation projectors `P = (I − Z)/2`;
/// equal to [`build_quartic`] as an operator.
pub fn build_quartic_projector_form(p: &LatticeParams) -> Hamiltonian {
    let n = p.n_flavors;
    let g2a = p.g * p.g / p.a;
    let mut h = Hamiltonian::zero(p.width());
    let proj = |q: usize| (q, 0.5, -0.5);
    for site in 0..p.l_d {
        let even = |b: usize| 2 * site * n + b;
        let odd = |b: usize| (2 * site + 1) * n + b;
        for b in 0..n {
            h.add_z_product(-g2a / 2.0, &[proj(even(b))]);
            h.add_z_product(-g2a / 2.0, &[proj(odd(b))]);
            h.add_z_product(g2a, &[proj(even(b)), proj(odd(b))]);
        }
        for b in 0..n {
            for c in b + 1..n {
                h.add_z_product(-g2a, &[proj(even(b)), proj(even(c))]);
                h.add_z_product(-g2a, &[proj(odd(b)), proj(odd(c))]);
                h.add_z_product(g2a, &[proj(even(b)), proj(odd(c))]);
                h.add_z_product(g2a, &[proj(odd(b)), proj(even(c))]);
            }
        }
    }
    h
}

pub fn build_hamiltonian(p: &LatticeParams) -> Hamiltonian {
    let mut h = build_quadratic(p);
    h.add(&build_quartic(p));
    h
}

/// `(1/4a²) Σ_b (−1)^{j+j'} (I−Z)_{jN+b} (I−Z)_{j'N+b}`.
pub fn density_correlator(j: usize, jp: usize, p: &LatticeParams) -> Result<Observable, ModelError> {
    let n = p.n_flavors;
    let sign = if (j + jp) % 2 == 0 { 1.0 } else { -1.0 };
    let mut obs = Hamiltonian::zero(p.width());
    for b in 0..n {
        let q1 = p.qubit(j, b)?;
        let q2 = p.qubit(jp, b)?;
        obs.add_z_product(sign / (4.0 * p.a * p.a), &[(q1, 1.0, -1.0), (q2, 1.0, -1.0)]);
    }
    Ok(obs.simplified())
}

/// `Σ_k (I − Z_k)/2`.
pub fn number_operator(width: usize) -> Observable {
    let mut obs = Hamiltonian::zero(width);
    for q in 0..width {
        obs.add_z_product(1.0, &[(q, 0.5, -0.5)]);
    }
    obs
}

/// Expectation of a Z-only observable on a computational basis state given as
/// a bitstring whose character `k` is qubit `k`. Returns `None` when the
/// observable contains X or Y factors.
pub fn basis_expectation(obs: &Observable, bits: &[bool]) -> Option<f64> {
    let mut v = obs.constant;
    for t in &obs.terms {
        let mut s = t.coeff;
        for &(q, axis) in &t.factors {
            if axis != Axis::Z {
                return None;
            }
            if bits[q] {
                s = -s;
            }
        }
        v += s;
    }
    Some(v)
}

/// Parses a `0`/`1` string (character `k` is qubit `k`).
pub fn parse_bitstring(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

/// Reference initial state: `1001` repeated, closed by `1100`.
pub fn default_initial_state(width: usize) -> String {
    if width < 4 {
        return "10".repeat(width).chars().take(width).collect();
    }
    let mut s = "1001".repeat((width - 4) / 4);
    s.push_str(&"1100"[..4.min(width - s.len())]);
    while s.len() < width {
        s.push('0');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(l: usize, n: usize, g: f64) -> LatticeParams {
        LatticeParams::from_staggered(l, n, 1.0, g).unwrap()
    }

    #[test]
    fn qubit_index_examples() {
        assert_eq!(qubit_index(0, 0, 2, 10).unwrap(), 0);
        assert_eq!(qubit_index(3, 1, 2, 10).unwrap(), 7);
        assert_eq!(qubit_index(5, 2, 3, 10).unwrap(), 17);
        assert!(qubit_index(10, 0, 2, 10).is_err());
        assert!(qubit_index(0, 2, 2, 10).is_err());
    }

    #[test]
    fn params_reject_bad_values() {
        assert_eq!(LatticeParams::new(0, 2, 1.0, 0.5), Err(ModelError::NoSites));
        assert_eq!(LatticeParams::new(1, 0, 1.0, 0.5), Err(ModelError::NoFlavors));
        assert!(LatticeParams::new(1, 1, -1.0, 0.5).is_err());
        assert!(LatticeParams::from_staggered(3, 1, 1.0, 0.5).is_err());
        assert_eq!(params(10, 2, 0.5).width(), 20);
    }

    #[test]
    fn quadratic_smallest() {
        let h = build_quadratic(&params(2, 1, 0.5));
        assert_eq!(h.terms.len(), 2);
        assert_eq!(h.terms[0].coeff, 0.25);
        assert_eq!(h.terms[0].label(), "X0 Y1");
        assert_eq!(h.terms[1].coeff, -0.25);
        assert_eq!(h.terms[1].label(), "Y0 X1");
        for (l, n) in [(4, 2), (10, 2), (6, 3)] {
            assert_eq!(build_quadratic(&params(l, n, 0.5)).terms.len(), 2 * n * (l - 1));
        }
    }

    #[test]
    fn quadratic_layers_partition_terms() {
        let p = params(6, 2, 0.5);
        let even = build_quadratic_layer(&p, 0);
        let odd = build_quadratic_layer(&p, 1);
        assert_eq!(even.terms.len() + odd.terms.len(), build_quadratic(&p).terms.len());
        assert_eq!(even.terms.len(), 3 * 2 * 2);
    }

    #[test]
    fn quartic_smallest() {
        let h = build_quartic(&params(2, 1, 0.5));
        assert_eq!(h.terms.len(), 1);
        assert_eq!(h.terms[0].coeff, 0.0625);
        assert_eq!(h.terms[0].label(), "Z0 Z1");
        assert_eq!(h.constant, -0.0625);
    }

    #[test]
    fn quartic_string_count() {
        for n in 1..=4 {
            let h = build_quartic(&params(6, n, 0.5));
            assert_eq!(h.terms.len(), 3 * n * (2 * n - 1));
        }
    }

    #[test]
    fn projector_form_expands_to_zz_form() {
        for n in 1..=3 {
            let p = params(4, n, 0.7);
            let zz = build_quartic(&p).simplified();
            let proj = build_quartic_projector_form(&p).simplified();
            assert!((zz.constant - proj.constant).abs() < 1e-12);
            assert_eq!(zz.terms.len(), proj.terms.len());
            for (a, b) in zz.terms.iter().zip(&proj.terms) {
                assert_eq!(a.factors, b.factors);
                assert!((a.coeff - b.coeff).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn correlator_on_reference_state() {
        let p = params(10, 2, 0.5);
        let bits = parse_bitstring("10011001100110011100").unwrap();
        let c = density_correlator(3, 5, &p).unwrap();
        assert!((basis_expectation(&c, &bits).unwrap() - 1.0).abs() < 1e-14);
        // odd separation flips the sign
        let c = density_correlator(3, 4, &p).unwrap();
        let v = basis_expectation(&c, &bits).unwrap();
        assert!(v <= 0.0);
    }

    #[test]
    fn correlator_diagonal_is_occupation() {
        let p = params(4, 2, 0.5);
        let c = density_correlator(1, 1, &p).unwrap();
        for code in 0..256u32 {
            let bits: Vec<bool> = (0..8).map(|k| code >> k & 1 == 1).collect();
            let occ = (bits[2] as u32 + bits[3] as u32) as f64;
            assert!((basis_expectation(&c, &bits).unwrap() - occ).abs() < 1e-14);
        }
    }

    #[test]
    fn default_initial_states() {
        assert_eq!(default_initial_state(20), "10011001100110011100");
        let s = default_initial_state(108);
        assert_eq!(s.len(), 108);
        assert_eq!(&s[..104], "1001".repeat(26));
        assert!(s.ends_with("1100"));
    }

    #[test]
    fn csv_round_trip() {
        let p = params(4, 2, 0.5);
        let h = build_hamiltonian(&p);
        let csv = h.to_csv();
        assert!(csv.starts_with("coefficient,pauli_string\n"));
        assert!(csv.lines().last().unwrap().starts_with("CONST,"));
        assert_eq!(Hamiltonian::from_csv(h.width, &csv).unwrap(), h);
    }
}
