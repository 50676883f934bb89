//! Dense statevector simulation and a Krylov exact-evolution oracle.
//!
//! Amplitude index `k` encodes qubit `q` in bit `q`. Bitstrings are read with
//! character `q` giving qubit `q`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{fmt_angle, Circuit, Gate, Mat2};
use crate::model::{self, Axis, Hamiltonian, LatticeParams, Observable};
use crate::trotter::{self, LdoaMode, TrotterOrder, TrotterPlan};

pub const MAX_SIM_QUBITS: usize = 24;
/// Widest operator turned into a dense matrix.
pub const MAX_DENSE_QUBITS: usize = 12;

const KRYLOV_DIM: usize = 30;
const KRYLOV_TOL: f64 = 1e-10;
const MAX_SUBSTEPS: usize = 100_000;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("{width} qubits exceeds the simulation limit of {max}")]
    TooWide { width: usize, max: usize },
    #[error("bitstring has length {got}, circuit width is {want}")]
    BitstringLength { got: usize, want: usize },
    #[error("bitstring may only contain 0 and 1")]
    BadBitstring,
    #[error("Krylov propagation did not converge after {0} substeps")]
    NoConvergence(usize),
    #[error("time must be finite and non-negative, got {0}")]
    BadTime(f64),
    #[error("time grid must be sorted and non-negative")]
    UnsortedTimes,
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Trotter(#[from] trotter::TrotterError),
}

fn check_width(n: usize, max: usize) -> Result<(), SimError> {
    if n > max {
        return Err(SimError::TooWide { width: n, max });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    pub fn basis(n: usize, index: usize) -> Result<Self, SimError> {
        check_width(n, MAX_SIM_QUBITS)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Statevector { n, amps })
    }

    pub fn from_bitstring(bits: &str) -> Result<Self, SimError> {
        let b = model::parse_bitstring(bits).ok_or(SimError::BadBitstring)?;
        let index = b.iter().enumerate().fold(0usize, |k, (q, &v)| k | ((v as usize) << q));
        Self::basis(b.len(), index)
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Self {
        assert!(amps.len().is_power_of_two(), "length must be 2^n");
        let n = amps.len().trailing_zeros() as usize;
        Statevector { n, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Statevector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn apply_1q(&mut self, m: &Mat2, q: usize) {
        let bit = 1usize << q;
        for hi in (0..self.amps.len()).step_by(bit << 1) {
            for k in hi..hi + bit {
                let (a, b) = (self.amps[k], self.amps[k | bit]);
                self.amps[k] = m[0][0] * a + m[0][1] * b;
                self.amps[k | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    fn apply_diag_1q(&mut self, d0: Complex64, d1: Complex64, q: usize) {
        let bit = 1usize << q;
        for (k, a) in self.amps.iter_mut().enumerate() {
            *a *= if k & bit == 0 { d0 } else { d1 };
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        let cis = |t: f64| Complex64::from_polar(1.0, t);
        let one = Complex64::new(1.0, 0.0);
        match *gate {
            Gate::Phase(t, q) => {
                let (bit, ph) = (1usize << q, cis(t));
                for (k, a) in self.amps.iter_mut().enumerate() {
                    if k & bit != 0 {
                        *a *= ph;
                    }
                }
            }
            Gate::Rz(t, q) => self.apply_diag_1q(cis(-t / 2.0), cis(t / 2.0), q),
            Gate::Rx(t, q) => {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                let m = [
                    [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                    [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
                ];
                self.apply_1q(&m, q);
            }
            Gate::PauliX(q) => {
                let bit = 1usize << q;
                for k in 0..self.amps.len() {
                    if k & bit == 0 {
                        self.amps.swap(k, k | bit);
                    }
                }
            }
            Gate::Unitary1Q(m, q) => self.apply_1q(&m, q),
            Gate::ControlledPhase(t, p, q) => self.apply_pair_phase(p, q, one, cis(t)),
            Gate::Cz(p, q) => self.apply_pair_phase(p, q, one, -one),
            Gate::Rzz(t, p, q) => {
                let (same, diff) = (cis(-t / 2.0), cis(t / 2.0));
                let (bp, bq) = (1usize << p, 1usize << q);
                for (k, a) in self.amps.iter_mut().enumerate() {
                    *a *= if (k & bp == 0) == (k & bq == 0) { same } else { diff };
                }
            }
            Gate::Swap(p, q) => {
                let (bp, bq) = (1usize << p, 1usize << q);
                for k in 0..self.amps.len() {
                    if k & bp != 0 && k & bq == 0 {
                        self.amps.swap(k, k ^ bp ^ bq);
                    }
                }
            }
            Gate::Cx(c, t) => {
                let (bc, bt) = (1usize << c, 1usize << t);
                for k in 0..self.amps.len() {
                    if k & bc != 0 && k & bt == 0 {
                        self.amps.swap(k, k | bt);
                    }
                }
            }
        }
    }

    /// Multiplies the `|11⟩` component of qubits `(p, q)` by `d11`
    /// (everything else by `d_other`).
    fn apply_pair_phase(&mut self, p: usize, q: usize, d_other: Complex64, d11: Complex64) {
        let mask = (1usize << p) | (1usize << q);
        for (k, a) in self.amps.iter_mut().enumerate() {
            if k & mask == mask {
                *a *= d11;
            } else if d_other != Complex64::new(1.0, 0.0) {
                *a *= d_other;
            }
        }
    }

    pub fn apply_circuit(&mut self, c: &Circuit) {
        assert!(c.width() <= self.n, "circuit wider than state");
        for g in c.gates() {
            self.apply_gate(g);
        }
    }

    /// `⟨ψ|O|ψ⟩` for a Hermitian Pauli-sum observable.
    pub fn expectation(&self, obs: &Observable) -> f64 {
        let mut v = obs.constant * self.norm_sqr();
        for t in &obs.terms {
            let (flip, sign_mask, phase) = pauli_masks(&t.factors);
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, a) in self.amps.iter().enumerate() {
                let sgn = if (s & sign_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                acc += self.amps[s ^ flip].conj() * a * sgn;
            }
            v += (acc * phase * t.coeff).re;
        }
        v
    }

    /// Probabilities of the qubits in `subset` (bit `i` of the outcome index
    /// is qubit `subset[i]`), summed over the rest.
    pub fn marginal_probabilities(&self, subset: &[usize]) -> Vec<f64> {
        let mut p = vec![0.0; 1 << subset.len()];
        for (k, a) in self.amps.iter().enumerate() {
            let idx = subset
                .iter()
                .enumerate()
                .fold(0usize, |acc, (i, &q)| acc | (((k >> q) & 1) << i));
            p[idx] += a.norm_sqr();
        }
        p
    }
}

/// Flip mask, sign mask and the `i^{#Y}` factor of a Pauli string acting as
/// `P|s⟩ = i^{#Y} (−1)^{|s ∧ sign|} |s ⊕ flip⟩`.
fn pauli_masks(factors: &[(usize, Axis)]) -> (usize, usize, Complex64) {
    let (mut flip, mut sign, mut ny) = (0usize, 0usize, 0u32);
    for &(q, axis) in factors {
        let b = 1usize << q;
        match axis {
            Axis::X => flip |= b,
            Axis::Y => {
                flip |= b;
                sign |= b;
                ny += 1;
            }
            Axis::Z => sign |= b,
        }
    }
    let phase = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ][(ny % 4) as usize];
    (flip, sign, phase)
}

/// Runs `circuit` from the computational basis state `bits`.
pub fn simulate(circuit: &Circuit, bits: &str) -> Result<Statevector, SimError> {
    check_width(circuit.width(), MAX_SIM_QUBITS)?;
    if bits.len() != circuit.width() {
        return Err(SimError::BitstringLength {
            got: bits.len(),
            want: circuit.width(),
        });
    }
    let mut psi = Statevector::from_bitstring(bits)?;
    psi.apply_circuit(circuit);
    Ok(psi)
}

/// Matrix-free Hamiltonian: a precomputed diagonal plus off-diagonal Pauli
/// strings grouped by flip mask.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    n: usize,
    diag: Vec<f64>,
    /// (flip mask, [(sign mask, coefficient)])
    off: Vec<(usize, Vec<(usize, Complex64)>)>,
}

impl SparseHamiltonian {
    pub fn new(h: &Hamiltonian) -> Result<Self, SimError> {
        check_width(h.width, MAX_SIM_QUBITS)?;
        let dim = 1usize << h.width;
        let mut diag = vec![h.constant; dim];
        let mut off: Vec<(usize, Vec<(usize, Complex64)>)> = Vec::new();
        for t in &h.terms {
            let (flip, sign, phase) = pauli_masks(&t.factors);
            if flip == 0 {
                for (s, d) in diag.iter_mut().enumerate() {
                    *d += if (s & sign).count_ones() % 2 == 0 { t.coeff } else { -t.coeff };
                }
                continue;
            }
            let c = phase * t.coeff;
            match off.iter_mut().find(|(f, _)| *f == flip) {
                Some((_, list)) => list.push((sign, c)),
                None => off.push((flip, vec![(sign, c)])),
            }
        }
        Ok(SparseHamiltonian { n: h.width, diag, off })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.diag) {
            *yi = xi * d;
        }
        for (flip, list) in &self.off {
            for (s, xs) in x.iter().enumerate() {
                let mut c = Complex64::new(0.0, 0.0);
                for &(sign, coeff) in list {
                    if (s & sign).count_ones() % 2 == 0 {
                        c += coeff;
                    } else {
                        c -= coeff;
                    }
                }
                y[s ^ flip] += c * xs;
            }
        }
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>, SimError> {
        check_width(self.n, MAX_DENSE_QUBITS)?;
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        let mut e = vec![Complex64::new(0.0, 0.0); dim];
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        for k in 0..dim {
            e[k] = Complex64::new(1.0, 0.0);
            self.matvec(&e, &mut col);
            e[k] = Complex64::new(0.0, 0.0);
            for (i, v) in col.iter().enumerate() {
                m[(i, k)] = *v;
            }
        }
        Ok(m)
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn vnorm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `exp(−iτT) e₁` for the symmetric tridiagonal `T` given by its diagonal
/// `alpha` and off-diagonal `beta`.
fn tridiag_exp_e1(alpha: &[f64], beta: &[f64], tau: f64) -> Vec<Complex64> {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let (vals, vecs) = symmetric_eigen(t);
    (0..m)
        .map(|i| {
            (0..m)
                .map(|k| {
                    let q = vecs[(i, k)] * vecs[(0, k)];
                    Complex64::from_polar(q, -tau * vals[k])
                })
                .sum()
        })
        .collect()
}

/// `exp(−iHt)|ψ⟩` by Lanczos propagation with adaptively chosen substeps.
pub fn exact_evolve(h: &SparseHamiltonian, state: &Statevector, t: f64) -> Result<Statevector, SimError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(SimError::BadTime(t));
    }
    assert_eq!(state.n, h.n, "state and Hamiltonian widths differ");
    let dim = h.dim();
    let mut psi = state.amps.clone();
    let mut remaining = t;
    let mut tau = t;
    let mut substeps = 0;
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    while remaining > 0.0 {
        substeps += 1;
        if substeps > MAX_SUBSTEPS {
            return Err(SimError::NoConvergence(MAX_SUBSTEPS));
        }
        let beta0 = vnorm(&psi);
        if beta0 == 0.0 {
            break;
        }
        let mut basis: Vec<Vec<Complex64>> = vec![psi.iter().map(|x| x / beta0).collect()];
        let (mut alpha, mut beta) = (Vec::new(), Vec::new());
        let mut breakdown = false;
        let kmax = KRYLOV_DIM.min(dim);
        for j in 0..kmax {
            h.matvec(&basis[j], &mut w);
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            for (wi, vi) in w.iter_mut().zip(&basis[j]) {
                *wi -= vi * a;
            }
            if j > 0 {
                let b = beta[j - 1];
                for (wi, vi) in w.iter_mut().zip(&basis[j - 1]) {
                    *wi -= vi * b;
                }
            }
            // one pass of full reorthogonalisation keeps the basis clean
            for v in &basis {
                let c = dot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= vi * c;
                }
            }
            let b = vnorm(&w);
            beta.push(b);
            if b < 1e-12 * (1.0 + a.abs()) {
                breakdown = true;
                break;
            }
            if j + 1 < kmax {
                basis.push(w.iter().map(|x| x / b).collect());
            }
        }
        let m = alpha.len();
        if m == dim {
            breakdown = true;
        }
        let beta_m = beta[m - 1];
        tau = tau.min(remaining);
        let coeffs = loop {
            let c = tridiag_exp_e1(&alpha, &beta[..m - 1], tau);
            let err = if breakdown { 0.0 } else { beta_m * c[m - 1].norm() };
            if err <= KRYLOV_TOL {
                break c;
            }
            tau /= 2.0;
            if tau < 1e-14 * t.max(1.0) {
                return Err(SimError::NoConvergence(substeps));
            }
        };
        for x in psi.iter_mut() {
            *x = Complex64::new(0.0, 0.0);
        }
        for (v, c) in basis.iter().zip(&coeffs) {
            let c = c * beta0;
            for (x, vi) in psi.iter_mut().zip(v) {
                *x += vi * c;
            }
        }
        remaining -= tau;
        if remaining < 1e-15 * t.max(1.0) {
            remaining = 0.0;
        }
        tau *= 1.5;
    }
    Ok(Statevector { n: state.n, amps: psi })
}

/// Dense unitary of a circuit, built column by column.
pub fn circuit_unitary(c: &Circuit) -> Result<DMatrix<Complex64>, SimError> {
    check_width(c.width(), MAX_DENSE_QUBITS)?;
    let dim = 1usize << c.width();
    let mut u = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let mut psi = Statevector::basis(c.width(), k)?;
        psi.apply_circuit(c);
        for (i, a) in psi.amps.iter().enumerate() {
            u[(i, k)] = *a;
        }
    }
    Ok(u)
}

/// Cyclic Jacobi eigensolver for a real symmetric matrix. Returns the
/// eigenvalues and the matrix whose columns are the eigenvectors.
///
/// Slower than a tridiagonal QR but unconditionally accurate on heavily
/// degenerate spectra, which is what the lattice Hamiltonians have.
pub fn symmetric_eigen(mut a: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[(i, j)] * a[(i, j)]).sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    (a.diagonal(), v)
}

/// Eigenvalues of a Hermitian `H = A + iB`, ascending, each listed once.
/// Computed through the real symmetric embedding `[[A, −B], [B, A]]`,
/// which carries every eigenvalue of `H` twice.
pub fn hermitian_eigenvalues(h: &DMatrix<Complex64>) -> Vec<f64> {
    let n = h.nrows();
    let m = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let mut ev: Vec<f64> = symmetric_eigen(m).0.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.into_iter().step_by(2).collect()
}

/// `exp(−i H t)` of a dense matrix by scaling and squaring a truncated
/// Taylor series. Used as an independent oracle for the Krylov propagator.
pub fn dense_propagator(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let n = h.nrows();
    // max column sum bounds the spectral radius
    let norm = (0..n).map(|j| h.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max) * t.abs();
    let squarings = if norm > 0.25 { (norm / 0.25).log2().ceil() as u32 } else { 0 };
    let a = h * Complex64::new(0.0, -t / 2f64.powi(squarings as i32));
    let mut u = DMatrix::<Complex64>::identity(n, n);
    let mut term = u.clone();
    // ‖A‖ ≤ 1/4, so 20 terms leave a remainder far below 1e-16
    for k in 1..=20 {
        term = &term * &a / Complex64::new(k as f64, 0.0);
        u += &term;
    }
    for _ in 0..squarings {
        u = &u * &u;
    }
    u
}

/// Frobenius distance after the optimal global phase:
/// `sqrt(2d − 2|Tr(U†V)|)` for unitaries of dimension `d`.
pub fn unitary_distance(u: &DMatrix<Complex64>, v: &DMatrix<Complex64>) -> f64 {
    let d = u.nrows() as f64;
    let tr: Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    (2.0 * d - 2.0 * tr.norm()).max(0.0).sqrt()
}

/// Largest entry-wise deviation after aligning the global phase of `v`
/// to `u`.
pub fn max_abs_up_to_phase(u: &DMatrix<Complex64>, v: &DMatrix<Complex64>) -> f64 {
    let tr: Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    let ph = if tr.norm() > 0.0 { tr / tr.norm() } else { Complex64::new(1.0, 0.0) };
    u.iter()
        .zip(v.iter())
        .map(|(a, b)| (a * ph - b).norm())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorPoint {
    pub t: f64,
    pub trotter: f64,
    pub exact: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSetup {
    pub params: LatticeParams,
    pub order: TrotterOrder,
    pub dt: f64,
    pub ldoa: LdoaMode,
    pub j: usize,
    pub jp: usize,
    pub initial: String,
    pub with_exact: bool,
}

/// Trotter (and optionally exact) values of the density correlator on a
/// sorted time grid. Each time `t` uses `max(1, round(t/dt))` steps; when
/// every grid point is a whole number of steps the evolution is extended
/// incrementally instead of being rebuilt.
pub fn run_correlator_experiment(setup: &CorrelatorSetup, times: &[f64]) -> Result<Vec<CorrelatorPoint>, SimError> {
    let p = &setup.params;
    check_width(p.width(), MAX_SIM_QUBITS)?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| !(*t >= 0.0)) {
        return Err(SimError::UnsortedTimes);
    }
    let obs = model::density_correlator(setup.j, setup.jp, p)?;
    let psi0 = Statevector::from_bitstring(&setup.initial)?;
    if psi0.n != p.width() {
        return Err(SimError::BitstringLength {
            got: psi0.n,
            want: p.width(),
        });
    }

    let on_grid = |t: f64| {
        let k = (t / setup.dt).round();
        (t - k * setup.dt).abs() <= 1e-9 * setup.dt.max(1.0)
    };
    let incremental = times.iter().all(|&t| on_grid(t));
    let mut trotter_vals = Vec::with_capacity(times.len());
    if incremental {
        let unit = TrotterPlan::new(p, setup.order, 1, setup.dt, setup.ldoa)?;
        let pat = trotter::step_pattern(p, &unit)?;
        // body = evolution before the cap, after `steps` steps
        let mut body = psi0.clone();
        let mut steps = 0usize;
        for &t in times {
            let want = (t / setup.dt).round() as usize;
            if want == 0 {
                trotter_vals.push(psi0.expectation(&obs));
                continue;
            }
            while steps < want {
                body.apply_circuit(if steps == 0 { &pat.first } else { &pat.repeat });
                steps += 1;
            }
            let mut psi = body.clone();
            psi.apply_circuit(&pat.cap);
            trotter_vals.push(psi.expectation(&obs));
        }
    } else {
        for &t in times {
            let plan = TrotterPlan::with_step(p, setup.order, setup.dt, t, setup.ldoa)?;
            let c = trotter::build_evolution(p, &plan)?;
            let mut psi = psi0.clone();
            psi.apply_circuit(&c);
            trotter_vals.push(psi.expectation(&obs));
        }
    }

    let mut exact_vals = vec![None; times.len()];
    if setup.with_exact {
        let h = SparseHamiltonian::new(&model::build_hamiltonian(p))?;
        let mut psi = psi0.clone();
        let mut now = 0.0;
        for (i, &t) in times.iter().enumerate() {
            psi = exact_evolve(&h, &psi, t - now)?;
            now = t;
            exact_vals[i] = Some(psi.expectation(&obs));
        }
    }
    Ok(times
        .iter()
        .zip(trotter_vals)
        .zip(exact_vals)
        .map(|((&t, trotter), exact)| CorrelatorPoint { t, trotter, exact })
        .collect())
}

/// `t,C_trotter[,C_exact]`.
pub fn correlator_csv(points: &[CorrelatorPoint]) -> String {
    let with_exact = points.iter().any(|p| p.exact.is_some());
    let mut s = String::from(if with_exact { "t,C_trotter,C_exact\n" } else { "t,C_trotter\n" });
    for p in points {
        let _ = write!(s, "{},{}", fmt_angle(p.t), fmt_angle(p.trotter));
        if with_exact {
            let _ = write!(s, ",{}", p.exact.map(fmt_angle).unwrap_or_default());
        }
        s.push('\n');
    }
    s
}
