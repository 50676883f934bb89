//! Trotterized time-evolution circuits built from SWAP-network blocks.
//!
//! A step is assembled from three layers over the chain:
//! * `even`: hop blocks on staggered bonds `(2n, 2n+1)`,
//! * `odd`: hop blocks on bonds `(2n+1, 2n+2)`,
//! * `int`: interaction blocks on each Dirac site `(2n, 2n+1)`.
//!
//! Every block covers `2N` consecutive qubits. Circuits are emitted with the
//! rightmost operator factor first.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, Gate};
use crate::ldoa::{self, AnsatzKind, AnsatzTemplate};
use crate::model::LatticeParams;

#[derive(Debug, Error, PartialEq)]
pub enum TrotterError {
    #[error("step count must be at least 1")]
    ZeroSteps,
    #[error("evolution time must be finite and non-negative, got {0}")]
    BadTime(f64),
    #[error("unknown {what} `{value}`")]
    Unknown { what: &'static str, value: String },
    #[error("LDOA block for N={0} exceeds the dense phase-vector limit")]
    LdoaTooWide(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrotterOrder {
    First,
    Second,
    SecondOptimized,
}

impl FromStr for TrotterOrder {
    type Err = TrotterError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "first" | "1" => Ok(TrotterOrder::First),
            "second" | "2" => Ok(TrotterOrder::Second),
            "second_optimized" | "second-optimized" | "optimized" => Ok(TrotterOrder::SecondOptimized),
            _ => Err(TrotterError::Unknown {
                what: "Trotter order",
                value: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for TrotterOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrotterOrder::First => "first",
            TrotterOrder::Second => "second",
            TrotterOrder::SecondOptimized => "second_optimized",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LdoaMode {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "CP")]
    Cp,
    #[serde(rename = "RZZ")]
    Rzz,
}

impl LdoaMode {
    pub fn kind(self) -> Option<AnsatzKind> {
        match self {
            LdoaMode::None => None,
            LdoaMode::Cp => Some(AnsatzKind::Cp),
            LdoaMode::Rzz => Some(AnsatzKind::Rzz),
        }
    }

    pub const ALL: [LdoaMode; 3] = [LdoaMode::None, LdoaMode::Cp, LdoaMode::Rzz];
}

impl FromStr for LdoaMode {
    type Err = TrotterError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "off" => Ok(LdoaMode::None),
            "cp" => Ok(LdoaMode::Cp),
            "rzz" => Ok(LdoaMode::Rzz),
            _ => Err(TrotterError::Unknown {
                what: "LDOA mode",
                value: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for LdoaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LdoaMode::None => "none",
            LdoaMode::Cp => "CP",
            LdoaMode::Rzz => "RZZ",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrotterPlan {
    pub order: TrotterOrder,
    pub r: usize,
    pub t: f64,
    pub dt: f64,
    pub theta_h: f64,
    pub theta_g: f64,
    pub ldoa: LdoaMode,
}

impl TrotterPlan {
    pub fn new(params: &LatticeParams, order: TrotterOrder, r: usize, t: f64, ldoa: LdoaMode) -> Result<Self, TrotterError> {
        if r == 0 {
            return Err(TrotterError::ZeroSteps);
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(TrotterError::BadTime(t));
        }
        let dt = t / r as f64;
        Ok(TrotterPlan {
            order,
            r,
            t,
            dt,
            theta_h: dt / (2.0 * params.a),
            theta_g: params.g * params.g * dt / params.a,
            ldoa,
        })
    }

    /// Plan reaching time `t` with steps as close to `dt` as possible.
    pub fn with_step(params: &LatticeParams, order: TrotterOrder, dt: f64, t: f64, ldoa: LdoaMode) -> Result<Self, TrotterError> {
        Self::new(params, order, steps_for(t, dt), t, ldoa)
    }
}

/// `max(1, round(t / dt))`.
pub fn steps_for(t: f64, dt: f64) -> usize {
    ((t / dt).round() as usize).max(1)
}

/// `exp(−i θ/2 (X_{q1} Y_{q2} − Y_{q1} X_{q2}))` up to global phase.
pub fn push_xyyx(c: &mut Circuit, theta: f64, q1: usize, q2: usize) {
    let seq = [
        Gate::Rx(-FRAC_PI_2, q1),
        Gate::Rz(-FRAC_PI_2, q2),
        Gate::Rx(-FRAC_PI_2, q2),
        Gate::Cx(q1, q2),
        Gate::Rx(theta, q1),
        Gate::Rz(theta, q2),
        Gate::Cx(q1, q2),
        Gate::Rx(FRAC_PI_2, q1),
        Gate::Rx(FRAC_PI_2, q2),
        Gate::Rz(FRAC_PI_2, q2),
    ];
    for g in seq {
        c.push(g).expect("xyyx qubits inside circuit");
    }
}

pub fn build_xyyx(theta: f64, q1: usize, q2: usize) -> Circuit {
    let mut c = Circuit::new(q1.max(q2) + 1);
    push_xyyx(&mut c, theta, q1, q2);
    c
}

/// Swap layers of the triangular network that interleaves two flavor
/// registers of size `N`; layer `k` holds `k` disjoint SWAPs.
fn interleave_layers(n: usize) -> Vec<Vec<(usize, usize)>> {
    (1..n)
        .map(|k| (0..k).map(|i| (n - k + 2 * i, n - k + 2 * i + 1)).collect())
        .collect()
}

/// Hop block on `[base, base+2N)`: interleave the two sites, one XY−YX per
/// flavor, then undo the interleave. `N(N−1)` SWAPs in `2(N−1)` layers.
pub fn push_hop_block(c: &mut Circuit, n: usize, theta_h: f64, base: usize) {
    let layers = interleave_layers(n);
    for layer in &layers {
        for &(p, q) in layer {
            c.push(Gate::Swap(base + p, base + q)).expect("block inside circuit");
        }
    }
    for b in 0..n {
        push_xyyx(c, theta_h, base + 2 * b, base + 2 * b + 1);
    }
    for layer in layers.iter().rev() {
        for &(p, q) in layer {
            c.push(Gate::Swap(base + p, base + q)).expect("block inside circuit");
        }
    }
}

pub fn build_hop_block(n: usize, theta_h: f64, base: usize) -> Circuit {
    let mut c = Circuit::new(base + 2 * n);
    push_hop_block(&mut c, n, theta_h, base);
    c
}

/// CP + SWAP ladder applying a controlled phase to every pair of the `2N`
/// block qubits: `+θ` when both sit on the same staggered site, `−θ`
/// otherwise. The closing SWAPs restore the original order.
pub fn push_int_ladder(c: &mut Circuit, n: usize, theta: f64, base: usize) {
    let w = 2 * n;
    let even: Vec<usize> = (0..w - 1).step_by(2).collect();
    let odd: Vec<usize> = (1..w.saturating_sub(1)).step_by(2).collect();
    // logical[p] = block qubit currently at position p
    let mut logical: Vec<usize> = (0..w).collect();
    let cp = |c: &mut Circuit, logical: &[usize], starts: &[usize]| {
        for &p in starts {
            let same_site = (logical[p] < n) == (logical[p + 1] < n);
            let angle = if same_site { theta } else { -theta };
            c.push(Gate::ControlledPhase(angle, base + p, base + p + 1))
                .expect("block inside circuit");
        }
    };
    let sw = |c: &mut Circuit, logical: &mut Vec<usize>, starts: &[usize]| {
        for &p in starts {
            logical.swap(p, p + 1);
            c.push(Gate::Swap(base + p, base + p + 1)).expect("block inside circuit");
        }
    };
    cp(c, &logical, &even);
    cp(c, &logical, &odd);
    for _ in 1..n {
        sw(c, &mut logical, &odd);
        cp(c, &logical, &even);
        sw(c, &mut logical, &even);
        cp(c, &logical, &odd);
    }
    for _ in 1..n {
        sw(c, &mut logical, &even);
        sw(c, &mut logical, &odd);
    }
    debug_assert!(logical.iter().enumerate().all(|(p, &l)| p == l));
}

/// Interaction block. `ldoa_x` carries the ansatz angles when the ladder is
/// replaced by the brickwork approximation.
fn push_int_block_with(c: &mut Circuit, n: usize, theta_g: f64, base: usize, ansatz: Option<(&AnsatzTemplate, &[f64])>) {
    for q in 0..2 * n {
        c.push(Gate::Phase(theta_g / 2.0, base + q)).expect("block inside circuit");
    }
    match ansatz {
        None => push_int_ladder(c, n, theta_g, base),
        Some((template, x)) => {
            for g in template.to_gates(x, base) {
                c.push(g).expect("block inside circuit");
            }
        }
    }
}

/// Standalone interaction block on `[base, base+2N)`; LDOA angles are solved
/// on the spot.
pub fn build_int_block(n: usize, theta_g: f64, base: usize, mode: LdoaMode) -> Result<Circuit, TrotterError> {
    let mut c = Circuit::new(base + 2 * n);
    let blocks = IntBlocks::new(n, theta_g, mode)?;
    blocks.push(&mut c, base);
    Ok(c)
}

/// Interaction blocks sharing one angle, with the LDOA solved once.
struct IntBlocks {
    n: usize,
    theta_g: f64,
    ansatz: Option<(AnsatzTemplate, Vec<f64>)>,
}

impl IntBlocks {
    fn new(n: usize, theta_g: f64, mode: LdoaMode) -> Result<Self, TrotterError> {
        let ansatz = match mode.kind() {
            None => None,
            Some(kind) => {
                if 2 * n > ldoa::MAX_PHASE_QUBITS {
                    return Err(TrotterError::LdoaTooWide(n));
                }
                let sol = ldoa::solve_block(n, kind, theta_g);
                Some((AnsatzTemplate::brickwork(n, kind), sol.x))
            }
        };
        Ok(IntBlocks { n, theta_g, ansatz })
    }

    fn push(&self, c: &mut Circuit, base: usize) {
        let a = self.ansatz.as_ref().map(|(t, x)| (t, x.as_slice()));
        push_int_block_with(c, self.n, self.theta_g, base, a);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Even,
    Odd,
    Int,
}

/// Base qubits of every block of a layer that fits inside the chain.
pub fn block_bases(params: &LatticeParams, layer: Layer) -> Vec<usize> {
    let n = params.n_flavors;
    let width = params.width();
    let offset = if layer == Layer::Odd { n } else { 0 };
    (offset..)
        .step_by(2 * n)
        .take_while(|k| k + 2 * n <= width)
        .collect()
}

fn push_hop_layer(c: &mut Circuit, params: &LatticeParams, layer: Layer, theta_h: f64) {
    for base in block_bases(params, layer) {
        push_hop_block(c, params.n_flavors, theta_h, base);
    }
}

fn push_int_layer(c: &mut Circuit, params: &LatticeParams, blocks: &IntBlocks) {
    for base in block_bases(params, Layer::Int) {
        blocks.push(c, base);
    }
}

/// An `r`-step evolution decomposes as `first`, then `repeat` applied
/// `r − 1` times, then `cap`. This lets callers extend an evolution by one
/// step without rebuilding it.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPattern {
    pub first: Circuit,
    pub repeat: Circuit,
    pub cap: Circuit,
}

pub fn step_pattern(params: &LatticeParams, plan: &TrotterPlan) -> Result<StepPattern, TrotterError> {
    let w = params.width();
    let blocks = IntBlocks::new(params.n_flavors, plan.theta_g, plan.ldoa)?;
    let (h, h2) = (plan.theta_h, plan.theta_h / 2.0);
    let mut first = Circuit::new(w);
    let mut repeat = Circuit::new(w);
    let mut cap = Circuit::new(w);
    match plan.order {
        TrotterOrder::First => {
            push_int_layer(&mut first, params, &blocks);
            push_hop_layer(&mut first, params, Layer::Odd, h);
            push_hop_layer(&mut first, params, Layer::Even, h);
            repeat = first.clone();
        }
        TrotterOrder::Second => {
            push_hop_layer(&mut first, params, Layer::Even, h2);
            push_hop_layer(&mut first, params, Layer::Odd, h2);
            push_int_layer(&mut first, params, &blocks);
            push_hop_layer(&mut first, params, Layer::Odd, h2);
            push_hop_layer(&mut first, params, Layer::Even, h2);
            repeat = first.clone();
        }
        TrotterOrder::SecondOptimized => {
            push_hop_layer(&mut first, params, Layer::Even, h2);
            push_hop_layer(&mut repeat, params, Layer::Even, h);
            for c in [&mut first, &mut repeat] {
                push_hop_layer(c, params, Layer::Odd, h2);
                push_int_layer(c, params, &blocks);
                push_hop_layer(c, params, Layer::Odd, h2);
            }
            push_hop_layer(&mut cap, params, Layer::Even, h2);
        }
    }
    Ok(StepPattern { first, repeat, cap })
}

/// One first-order step: interaction, then odd hops, then even hops.
pub fn build_step_first(params: &LatticeParams, plan: &TrotterPlan) -> Result<Circuit, TrotterError> {
    let plan = TrotterPlan {
        order: TrotterOrder::First,
        ..*plan
    };
    Ok(step_pattern(params, &plan)?.first)
}

pub fn build_evolution(params: &LatticeParams, plan: &TrotterPlan) -> Result<Circuit, TrotterError> {
    let pat = step_pattern(params, plan)?;
    let mut c = pat.first.clone();
    for _ in 1..plan.r {
        c.extend_from(&pat.repeat).expect("same width");
    }
    c.extend_from(&pat.cap).expect("same width");
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::DepthFilter;

    fn params(l: usize, n: usize) -> LatticeParams {
        LatticeParams::from_staggered(l, n, 1.0, 0.5).unwrap()
    }

    fn swaps(c: &Circuit) -> usize {
        c.count(|g| matches!(g, Gate::Swap(..)))
    }

    #[test]
    fn plan_angles() {
        let p = LatticeParams::new(5, 2, 0.8, 0.5).unwrap();
        let plan = TrotterPlan::new(&p, TrotterOrder::First, 8, 4.0, LdoaMode::None).unwrap();
        assert_eq!(plan.dt, 0.5);
        assert!((plan.theta_h - 0.5 / 1.6).abs() < 1e-15);
        assert!((plan.theta_g - 0.25 * 0.5 / 0.8).abs() < 1e-15);
        assert!(TrotterPlan::new(&p, TrotterOrder::First, 0, 1.0, LdoaMode::None).is_err());
        assert!(TrotterPlan::new(&p, TrotterOrder::First, 1, -1.0, LdoaMode::None).is_err());
    }

    #[test]
    fn parse_names() {
        assert_eq!("second_optimized".parse::<TrotterOrder>().unwrap(), TrotterOrder::SecondOptimized);
        assert_eq!("RZZ".parse::<LdoaMode>().unwrap(), LdoaMode::Rzz);
        assert!("third".parse::<TrotterOrder>().is_err());
    }

    #[test]
    fn hop_block_shapes() {
        let c = build_hop_block(1, 0.3, 0);
        assert_eq!(swaps(&c), 0);
        assert_eq!(c.count(|g| matches!(g, Gate::Cx(..))), 2);

        let c = build_hop_block(2, 0.3, 0);
        assert_eq!(swaps(&c), 2);
        assert!(c.gates().iter().filter(|g| matches!(g, Gate::Swap(..))).all(|g| *g == Gate::Swap(1, 2)));
        assert_eq!(c.count(|g| matches!(g, Gate::Cx(..))), 4);

        let c = build_hop_block(3, 0.3, 0);
        assert_eq!(swaps(&c), 6);
        assert_eq!(c.count(|g| matches!(g, Gate::Cx(..))), 6);
        let mut only_swaps = Circuit::new(6);
        for g in c.gates().iter().filter(|g| matches!(g, Gate::Swap(..))) {
            only_swaps.push(*g).unwrap();
        }
        assert_eq!(only_swaps.depth(DepthFilter::All), 4);
        assert!(c.gates().iter().all(|g| {
            let q = g.qubits();
            q.len() == 1 || q[0].abs_diff(q[1]) == 1
        }));
    }

    #[test]
    fn ladder_covers_every_pair_once() {
        for n in 1..=5 {
            let mut c = Circuit::new(2 * n);
            push_int_ladder(&mut c, n, 1.0, 0);
            let mut logical: Vec<usize> = (0..2 * n).collect();
            let mut seen = std::collections::BTreeMap::new();
            for g in c.gates() {
                match *g {
                    Gate::Swap(p, q) => logical.swap(p, q),
                    Gate::ControlledPhase(t, p, q) => {
                        let key = (logical[p].min(logical[q]), logical[p].max(logical[q]));
                        assert!(seen.insert(key, t).is_none(), "pair {key:?} twice");
                    }
                    _ => unreachable!(),
                }
            }
            assert_eq!(seen.len(), n * (2 * n - 1));
            for ((a, b), t) in seen {
                let same = (a < n) == (b < n);
                assert_eq!(t, if same { 1.0 } else { -1.0 });
            }
            assert!(logical.iter().enumerate().all(|(p, &l)| p == l));
        }
    }

    #[test]
    fn int_block_counts() {
        for n in 2..=4 {
            let c = build_int_block(n, 0.2, 0, LdoaMode::None).unwrap();
            assert_eq!(c.count(|g| matches!(g, Gate::ControlledPhase(..))), n * (2 * n - 1));
            assert_eq!(swaps(&c), 2 * (2 * n - 1) * (n - 1));
            assert_eq!(c.depth(DepthFilter::TwoQubit), 2 * (3 * n - 2));
            assert_eq!(c.count(|g| matches!(g, Gate::Phase(..))), 2 * n);
        }
    }

    #[test]
    fn int_block_ldoa_gates() {
        let th = 0.6;
        let c = build_int_block(2, th, 0, LdoaMode::Cp).unwrap();
        let two: Vec<Gate> = c.gates().iter().filter(|g| g.is_two_qubit()).copied().collect();
        let want = [(-th / 6.0, 0, 1), (-th / 6.0, 2, 3), (-13.0 * th / 12.0, 1, 2)];
        assert_eq!(two.len(), 3);
        for (g, (a, p, q)) in two.iter().zip(want) {
            match *g {
                Gate::ControlledPhase(x, gp, gq) => {
                    assert!((x - a).abs() < 1e-12);
                    assert_eq!((gp, gq), (p, q));
                }
                _ => panic!("unexpected {g:?}"),
            }
        }
        let c = build_int_block(2, th, 0, LdoaMode::Rzz).unwrap();
        let angles: Vec<f64> = c
            .gates()
            .iter()
            .filter_map(|g| if let Gate::Rzz(x, ..) = g { Some(*x) } else { None })
            .collect();
        for (x, w) in angles.iter().zip([-0.5, -0.5, 0.5]) {
            assert!((x - w * th).abs() < 1e-12);
        }
    }

    #[test]
    fn block_grid_counts() {
        for (l, even, odd) in [(2, 1, 0), (10, 5, 4), (54, 27, 26)] {
            let n = if l == 2 { 1 } else { 2 };
            let p = params(l, n);
            assert_eq!(block_bases(&p, Layer::Even).len(), even);
            assert_eq!(block_bases(&p, Layer::Odd).len(), odd);
            assert_eq!(block_bases(&p, Layer::Int).len(), even);
        }
    }

    #[test]
    fn second_orders_agree_at_one_step() {
        let p = params(6, 2);
        let mk = |order| {
            let plan = TrotterPlan::new(&p, order, 1, 0.5, LdoaMode::None).unwrap();
            build_evolution(&p, &plan).unwrap()
        };
        assert_eq!(mk(TrotterOrder::Second), mk(TrotterOrder::SecondOptimized));
    }

    #[test]
    fn optimized_saves_even_layers() {
        let p = params(6, 2);
        let per_even_layer = 3 * build_hop_block(2, 0.1, 0).len();
        for r in 1..=5 {
            let mk = |order| {
                let plan = TrotterPlan::new(&p, order, r, 1.0, LdoaMode::None).unwrap();
                build_evolution(&p, &plan).unwrap().len()
            };
            assert_eq!(mk(TrotterOrder::Second) - mk(TrotterOrder::SecondOptimized), (r - 1) * per_even_layer);
        }
    }

    #[test]
    fn evolution_is_repeated_steps() {
        let p = params(4, 2);
        let plan = TrotterPlan::new(&p, TrotterOrder::First, 3, 1.5, LdoaMode::Rzz).unwrap();
        let step = build_step_first(&p, &plan).unwrap();
        let evo = build_evolution(&p, &plan).unwrap();
        assert_eq!(evo.len(), 3 * step.len());
        assert_eq!(&evo.gates()[..step.len()], step.gates());
    }
}
