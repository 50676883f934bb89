//! Second Rényi entropy from randomized measurements, plus an exact
//! reduced-density-matrix oracle.
//!
//! Each draw rotates every qubit of the subsystem `A` by an independent Haar
//! unitary, reads off the outcome distribution `P(s)` on `A`, and forms
//! `X = 2^|A| Σ_{s,s'} (−2)^{−D(s,s')} P(s) P(s')`, with `D` the Hamming
//! distance. The ensemble mean of `X` is the purity `Tr ρ_A²`.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{fmt_angle, Mat2};
use crate::statevector::{self, Statevector};

/// Largest side of the bipartition for which `ρ` is built densely.
pub const MAX_RDM_QUBITS: usize = 14;
const PSD_CHECK_MAX_DIM: usize = 256;

#[derive(Debug, Error, PartialEq)]
pub enum EntropyError {
    #[error("probabilities sum to {0}, expected 1")]
    Unnormalized(f64),
    #[error("subsystem must be non-empty with distinct qubits below {width}")]
    BadSubsystem { width: usize },
    #[error("need at least one random unitary draw")]
    NoDraws,
    #[error("need at least two shots per draw, got {0}")]
    TooFewShots(usize),
    #[error("reduced density matrix on {0} qubits is too large")]
    TooLarge(usize),
    #[error("reduced density matrix failed its {0} check")]
    BadRdm(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotMode {
    ExactProbabilities,
    FiniteShots(usize),
}

pub const DEFAULT_SHOTS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmConfig {
    pub subsystem: Vec<usize>,
    pub n_u: usize,
    pub shot_mode: ShotMode,
    pub seed: u64,
}

impl RmConfig {
    pub fn validate(&self, width: usize) -> Result<(), EntropyError> {
        let mut seen = vec![false; width];
        if self.subsystem.is_empty() {
            return Err(EntropyError::BadSubsystem { width });
        }
        for &q in &self.subsystem {
            if q >= width || std::mem::replace(&mut seen[q], true) {
                return Err(EntropyError::BadSubsystem { width });
            }
        }
        if self.n_u == 0 {
            return Err(EntropyError::NoDraws);
        }
        if let ShotMode::FiniteShots(m) = self.shot_mode {
            if m < 2 {
                return Err(EntropyError::TooFewShots(m));
            }
        }
        Ok(())
    }
}

/// Haar-random 2×2 unitary: Gram–Schmidt on a complex Gaussian matrix.
/// Normalising each column against its own projection keeps the implied `R`
/// factor positive, which is what makes the distribution Haar.
pub fn sample_su2<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    let mut g = || {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    };
    let (a0, a1, b0, b1) = (g(), g(), g(), g());
    let na = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
    let (u0, u1) = (a0 / na, a1 / na);
    let proj = u0.conj() * b0 + u1.conj() * b1;
    let (v0, v1) = (b0 - u0 * proj, b1 - u1 * proj);
    let nv = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
    let (v0, v1) = (v0 / nv, v1 / nv);
    // columns (u, v)
    [[u0, v0], [u1, v1]]
}

/// Applies the one-qubit kernel `[[1, −1/2], [−1/2, 1]]` along every axis.
fn apply_kernel(p: &[f64]) -> Vec<f64> {
    let mut q = p.to_vec();
    let mut bit = 1;
    while bit < q.len() {
        for k in 0..q.len() {
            if k & bit == 0 {
                let (a, b) = (q[k], q[k | bit]);
                q[k] = a - 0.5 * b;
                q[k | bit] = b - 0.5 * a;
            }
        }
        bit <<= 1;
    }
    q
}

/// `X` from an outcome distribution over `A`, in `O(|A| 2^|A|)`.
pub fn estimate_x(prob: &[f64]) -> Result<f64, EntropyError> {
    let total: f64 = prob.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(EntropyError::Unnormalized(total));
    }
    let kp = apply_kernel(prob);
    Ok(prob.len() as f64 * prob.iter().zip(&kp).map(|(a, b)| a * b).sum::<f64>())
}

/// Literal double sum over outcome pairs; the reference for [`estimate_x`].
pub fn estimate_x_bruteforce(prob: &[f64]) -> f64 {
    let mut x = 0.0;
    for (s, ps) in prob.iter().enumerate() {
        for (t, pt) in prob.iter().enumerate() {
            let d = (s ^ t).count_ones() as i32;
            x += (-2.0f64).powi(-d) * ps * pt;
        }
    }
    prob.len() as f64 * x
}

/// Unbiased `X` from outcome counts of `M` shots: the diagonal `s = s'`
/// self-pairs are removed and the sum renormalised by `M(M−1)`.
pub fn estimate_x_from_counts(counts: &[u64]) -> f64 {
    let m: u64 = counts.iter().sum();
    let n: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let kn = apply_kernel(&n);
    let pairs: f64 = n.iter().zip(&kn).map(|(a, b)| a * b).sum();
    let m = m as f64;
    counts.len() as f64 * (pairs - m) / (m * (m - 1.0))
}

fn sample_counts<R: Rng + ?Sized>(rng: &mut R, prob: &[f64], shots: usize) -> Vec<u64> {
    let mut cdf = Vec::with_capacity(prob.len());
    let mut acc = 0.0;
    for p in prob {
        acc += p;
        cdf.push(acc);
    }
    let mut counts = vec![0u64; prob.len()];
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * acc;
        let k = cdf.partition_point(|&c| c <= u).min(prob.len() - 1);
        counts[k] += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurityEstimate {
    pub x_values: Vec<f64>,
    pub x_bar: f64,
    /// `−ln X̄`; `None` when `X̄ ≤ 0`.
    pub s2: Option<f64>,
    pub std_error: f64,
}

impl PurityEstimate {
    fn from_values(x_values: Vec<f64>) -> Self {
        let n = x_values.len() as f64;
        let x_bar = x_values.iter().sum::<f64>() / n;
        let var = if x_values.len() > 1 {
            x_values.iter().map(|x| (x - x_bar).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        PurityEstimate {
            s2: (x_bar > 0.0).then(|| -x_bar.ln()),
            std_error: (var / n).sqrt(),
            x_values,
            x_bar,
        }
    }

    /// Error on `S2` by linear propagation, `σ_X / X̄`.
    pub fn s2_std_error(&self) -> Option<f64> {
        (self.x_bar > 0.0).then(|| self.std_error / self.x_bar)
    }

    pub fn flagged(&self) -> bool {
        self.s2.is_none()
    }

    /// `draw,X` rows.
    pub fn draws_csv(&self) -> String {
        let mut s = String::from("draw,X\n");
        for (i, x) in self.x_values.iter().enumerate() {
            let _ = writeln!(s, "{},{}", i, fmt_angle(*x));
        }
        s
    }
}

/// Per-draw generator: one ChaCha stream per draw index, so the ensemble
/// does not depend on evaluation order.
pub fn draw_rng(seed: u64, draw: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(draw as u64);
    rng
}

pub fn estimate_purity(base: &Statevector, cfg: &RmConfig) -> Result<PurityEstimate, EntropyError> {
    cfg.validate(base.n_qubits())?;
    let mut xs = Vec::with_capacity(cfg.n_u);
    for d in 0..cfg.n_u {
        let mut rng = draw_rng(cfg.seed, d);
        let mut psi = base.clone();
        for &q in &cfg.subsystem {
            psi.apply_1q(&sample_su2(&mut rng), q);
        }
        let mut prob = psi.marginal_probabilities(&cfg.subsystem);
        let total: f64 = prob.iter().sum();
        prob.iter_mut().for_each(|p| *p /= total);
        xs.push(match cfg.shot_mode {
            ShotMode::ExactProbabilities => estimate_x(&prob)?,
            ShotMode::FiniteShots(m) => estimate_x_from_counts(&sample_counts(&mut rng, &prob, m)),
        });
    }
    Ok(PurityEstimate::from_values(xs))
}

/// `Tr ρ_A²` from the amplitudes. The smaller side of the cut is the one
/// materialised, since both reduced states share their purity.
pub fn exact_purity(state: &Statevector, subsystem: &[usize]) -> Result<f64, EntropyError> {
    let n = state.n_qubits();
    let mut in_a = vec![false; n];
    for &q in subsystem {
        if q >= n || std::mem::replace(&mut in_a[q], true) {
            return Err(EntropyError::BadSubsystem { width: n });
        }
    }
    if subsystem.is_empty() {
        return Err(EntropyError::BadSubsystem { width: n });
    }
    let a: Vec<usize> = (0..n).filter(|&q| in_a[q]).collect();
    let b: Vec<usize> = (0..n).filter(|&q| !in_a[q]).collect();
    let (keep, rest) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if keep.len() > MAX_RDM_QUBITS {
        return Err(EntropyError::TooLarge(keep.len()));
    }
    let gather = |k: usize, qs: &[usize]| {
        qs.iter()
            .enumerate()
            .fold(0usize, |acc, (i, &q)| acc | (((k >> q) & 1) << i))
    };
    let mut m = DMatrix::<Complex64>::zeros(1 << keep.len(), 1 << rest.len());
    for (k, amp) in state.amplitudes().iter().enumerate() {
        m[(gather(k, &keep), gather(k, &rest))] = *amp;
    }
    let rho = &m * m.adjoint();
    check_rdm(&rho)?;
    Ok(rho.iter().map(|z| z.norm_sqr()).sum())
}

fn check_rdm(rho: &DMatrix<Complex64>) -> Result<(), EntropyError> {
    if (rho - rho.adjoint()).iter().any(|z| z.norm() > 1e-9) {
        return Err(EntropyError::BadRdm("Hermiticity"));
    }
    if (rho.trace() - Complex64::new(1.0, 0.0)).norm() > 1e-9 {
        return Err(EntropyError::BadRdm("trace"));
    }
    if rho.nrows() <= PSD_CHECK_MAX_DIM && statevector::hermitian_eigenvalues(rho).iter().any(|&e| e < -1e-9) {
        return Err(EntropyError::BadRdm("positivity"));
    }
    Ok(())
}

pub fn exact_renyi2(state: &Statevector, subsystem: &[usize]) -> Result<f64, EntropyError> {
    // `0 − ln` rather than `−ln` so a pure state reports +0
    Ok(0.0 - exact_purity(state, subsystem)?.ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    #[serde(rename = "N_U")]
    pub n_u: usize,
    pub shot_mode: ShotMode,
    #[serde(rename = "X_bar")]
    pub x_bar: f64,
    #[serde(rename = "S2")]
    pub s2: Option<f64>,
    pub std_error: f64,
    pub seed: u64,
}

impl EntropyReport {
    pub fn new(cfg: &RmConfig, est: &PurityEstimate) -> Self {
        EntropyReport {
            n_u: cfg.n_u,
            shot_mode: cfg.shot_mode,
            x_bar: est.x_bar,
            s2: est.s2,
            std_error: est.std_error,
            seed: cfg.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_small_cases() {
        assert_eq!(estimate_x(&[1.0, 0.0]).unwrap(), 2.0);
        assert!((estimate_x(&[0.5, 0.5]).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(estimate_x(&[0.5, 0.6]), Err(EntropyError::Unnormalized(_))));
    }

    #[test]
    fn kernel_matches_double_sum() {
        let mut rng = draw_rng(7, 0);
        for n in 1..=4 {
            let mut p: Vec<f64> = (0..1 << n).map(|_| rng.gen::<f64>()).collect();
            let s: f64 = p.iter().sum();
            p.iter_mut().for_each(|x| *x /= s);
            assert!((estimate_x(&p).unwrap() - estimate_x_bruteforce(&p)).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_samples_are_unitary_and_reproducible() {
        let mut a = draw_rng(1, 3);
        let mut b = draw_rng(1, 3);
        for _ in 0..100 {
            let u = sample_su2(&mut a);
            assert_eq!(u, sample_su2(&mut b));
            for i in 0..2 {
                for j in 0..2 {
                    let d: Complex64 = (0..2).map(|k| u[i][k] * u[j][k].conj()).sum();
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((d - e).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn unbiased_counts_on_deterministic_outcome() {
        // a single certain outcome: every pair agrees, X = 2^|A|
        assert!((estimate_x_from_counts(&[10, 0, 0, 0]) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn bell_purity() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        let bell = Statevector::from_amplitudes(vec![Complex64::new(s, 0.0), z, z, Complex64::new(s, 0.0)]);
        assert!((exact_purity(&bell, &[0]).unwrap() - 0.5).abs() < 1e-12);
        let prod = Statevector::from_bitstring("0110").unwrap();
        assert!((exact_purity(&prod, &[0, 1]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(exact_renyi2(&prod, &[3]).unwrap(), 0.0);
        assert!(exact_purity(&prod, &[]).is_err());
        assert!(exact_purity(&prod, &[1, 1]).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = RmConfig {
            subsystem: vec![0, 1],
            n_u: 1,
            shot_mode: ShotMode::ExactProbabilities,
            seed: 0,
        };
        cfg.validate(2).unwrap();
        cfg.subsystem = vec![2];
        assert!(cfg.validate(2).is_err());
        cfg.subsystem = vec![0];
        cfg.n_u = 0;
        assert_eq!(cfg.validate(2), Err(EntropyError::NoDraws));
        cfg.n_u = 1;
        cfg.shot_mode = ShotMode::FiniteShots(1);
        assert_eq!(cfg.validate(2), Err(EntropyError::TooFewShots(1)));
    }
}
