use gnq::circuit::{Circuit, DepthFilter, Gate};
use gnq::entropy;
use gnq::ldoa::{self, AnsatzKind, AnsatzTemplate, PhaseVector};
use gnq::model::{self, LatticeParams};
use gnq::statevector::{self, Statevector};
use gnq::trotter::{self, LdoaMode, TrotterOrder, TrotterPlan};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

const WIDTH: usize = 4;

fn angle() -> impl Strategy<Value = f64> {
    -4.0f64..4.0
}

fn pair() -> impl Strategy<Value = (usize, usize)> {
    (0..WIDTH, 1..WIDTH).prop_map(|(a, d)| (a, (a + d) % WIDTH))
}

fn gate() -> impl Strategy<Value = Gate> {
    prop_oneof![
        (angle(), 0..WIDTH).prop_map(|(t, q)| Gate::Phase(t, q)),
        (angle(), 0..WIDTH).prop_map(|(t, q)| Gate::Rx(t, q)),
        (angle(), 0..WIDTH).prop_map(|(t, q)| Gate::Rz(t, q)),
        (0..WIDTH).prop_map(Gate::PauliX),
        (angle(), pair()).prop_map(|(t, (a, b))| Gate::ControlledPhase(t, a, b)),
        (angle(), pair()).prop_map(|(t, (a, b))| Gate::Rzz(t, a, b)),
        pair().prop_map(|(a, b)| Gate::Swap(a, b)),
        pair().prop_map(|(a, b)| Gate::Cx(a, b)),
        pair().prop_map(|(a, b)| Gate::Cz(a, b)),
    ]
}

fn circuit(max: usize) -> impl Strategy<Value = Circuit> {
    prop::collection::vec(gate(), 0..max).prop_map(|gs| {
        let mut c = Circuit::new(WIDTH);
        for g in gs {
            c.push(g).unwrap();
        }
        c
    })
}

fn diagonal_gate() -> impl Strategy<Value = Gate> {
    prop_oneof![
        (angle(), 0..WIDTH).prop_map(|(t, q)| Gate::Phase(t, q)),
        (angle(), pair()).prop_map(|(t, (a, b))| Gate::ControlledPhase(t, a, b)),
        (angle(), pair()).prop_map(|(t, (a, b))| Gate::Rzz(t, a, b)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lowering_is_unitary_equivalent(c in circuit(24)) {
        let u = statevector::circuit_unitary(&c).unwrap();
        let v = statevector::circuit_unitary(&c.lower_to_cz()).unwrap();
        prop_assert!(statevector::max_abs_up_to_phase(&u, &v) <= 1e-9);
        prop_assert!(c.lower_to_cz().gates().iter().all(|g| matches!(g,
            Gate::Cz(..) | Gate::Rz(..) | Gate::Rx(..) | Gate::Phase(..) | Gate::Unitary1Q(..))));
    }

    #[test]
    fn stats_bounds_and_monotone(a in circuit(20), b in circuit(20)) {
        let mut ab = a.clone();
        ab.extend_from(&b).unwrap();
        let (sa, sab) = (a.stats(), ab.stats());
        prop_assert!(sa.cz_count >= a.two_qubit_count());
        prop_assert!(sab.cz_count >= sa.cz_count);
        prop_assert!(sab.total_depth >= sa.total_depth);
        prop_assert!(sab.cz_depth >= sa.cz_depth);
        prop_assert!(sab.two_qubit_depth >= sa.two_qubit_depth);
        prop_assert!(a.depth(DepthFilter::TwoQubit) <= a.depth(DepthFilter::All));
    }

    #[test]
    fn text_format_round_trips(c in circuit(30)) {
        prop_assert_eq!(Circuit::from_text(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn simulation_preserves_norm(c in circuit(40), k in 0usize..16) {
        let mut psi = Statevector::basis(WIDTH, k).unwrap();
        psi.apply_circuit(&c);
        prop_assert!((psi.norm_sqr() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn symbolic_phases_match_simulation(gs in prop::collection::vec(diagonal_gate(), 0..16)) {
        let mut c = Circuit::new(WIDTH);
        for g in gs { c.push(g).unwrap(); }
        // a SWAP pair in the middle must not change the diagonal
        c.push(Gate::Swap(0, 2)).unwrap();
        c.push(Gate::ControlledPhase(0.3, 0, 1)).unwrap();
        c.push(Gate::Swap(0, 2)).unwrap();
        let phases = ldoa::diagonal_phase_of_circuit(&c).unwrap();
        let u = statevector::circuit_unitary(&c).unwrap();
        for k in 0..1 << WIDTH {
            prop_assert!((u[(k, k)] - Complex64::from_polar(1.0, phases.phases[k])).norm() <= 1e-12);
        }
    }

    #[test]
    fn moore_penrose_conditions(rows in 1usize..9, cols in 1usize..5, seed in any::<u64>(), dup in any::<bool>()) {
        let mut rng = entropy::draw_rng(seed, 0);
        use rand::Rng;
        let mut a = DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-2.0..2.0));
        if dup && cols > 1 {
            let c0 = a.column(0).into_owned();
            a.set_column(cols - 1, &c0);
        }
        let p = ldoa::pseudoinverse(&a);
        let tol = 1e-10 * (1.0 + a.abs().max() * p.abs().max()).powi(2);
        prop_assert!((&a * &p * &a - &a).abs().max() <= tol);
        prop_assert!((&p * &a * &p - &p).abs().max() <= tol);
        let ap = &a * &p;
        let pa = &p * &a;
        prop_assert!((&ap - ap.transpose()).abs().max() <= tol);
        prop_assert!((&pa - pa.transpose()).abs().max() <= tol);
    }

    #[test]
    fn ldoa_normal_equations_hold(gs in prop::collection::vec(diagonal_gate(), 1..12), kind in prop_oneof![Just(AnsatzKind::Cp), Just(AnsatzKind::Rzz)]) {
        let mut c = Circuit::new(WIDTH);
        for g in gs { c.push(g).unwrap(); }
        let target = ldoa::diagonal_phase_of_circuit(&c).unwrap();
        let template = AnsatzTemplate::brickwork(WIDTH / 2, kind);
        let system = ldoa::assemble_system(&target, &template).unwrap();
        let x = ldoa::pseudoinverse_solve(&system);
        let scale = system.b.norm().max(1.0);
        prop_assert!(ldoa::normal_equation_residual(&system, &x) <= 1e-10 * scale);
    }

    #[test]
    fn ldoa_is_linear_in_angle(n in 1usize..=4, lambda in -3.0f64..3.0, th in 0.01f64..1.5, kind in prop_oneof![Just(AnsatzKind::Cp), Just(AnsatzKind::Rzz)]) {
        let x1 = ldoa::solve_block(n, kind, th).x;
        let x2 = ldoa::solve_block(n, kind, lambda * th).x;
        for (a, b) in x1.iter().zip(&x2) {
            prop_assert!((lambda * a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn residual_formula_pointwise(th in 0.0f64..2.0, n in 2usize..=3) {
        for kind in [AnsatzKind::Cp, AnsatzKind::Rzz] {
            let target = ldoa::interaction_target(n, th);
            let template = AnsatzTemplate::brickwork(n, kind);
            let sol = ldoa::solve(&target, &template).unwrap();
            let theta = ldoa::ansatz_phase_map(&template) * nalgebra::DVector::from_column_slice(&sol.x);
            let direct: f64 = target.phases.iter().zip(theta.iter())
                .map(|(p, t)| (Complex64::from_polar(1.0, *p) - Complex64::from_polar(1.0, *t)).norm_sqr())
                .sum();
            prop_assert!((sol.residual_unitary_norm.powi(2) - direct).abs() <= 1e-12);
        }
    }

    #[test]
    fn kernel_equals_double_sum(raw in prop::collection::vec(0.0f64..1.0, 16)) {
        for n in 1..=4 {
            let mut p: Vec<f64> = raw[..1 << n].to_vec();
            let s: f64 = p.iter().sum::<f64>() + 1e-3;
            p.iter_mut().for_each(|x| *x = (*x + 1e-3 / (1 << n) as f64) / s);
            let diff = (entropy::estimate_x(&p).unwrap() - entropy::estimate_x_bruteforce(&p)).abs();
            prop_assert!(diff <= 1e-12);
        }
    }

    #[test]
    fn purity_bounds(seed in any::<u64>(), mask in 1u32..63) {
        let mut rng = entropy::draw_rng(seed, 0);
        use rand::Rng;
        let mut amps: Vec<Complex64> = (0..64).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let nrm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= nrm);
        let psi = Statevector::from_amplitudes(amps);
        let a: Vec<usize> = (0..6).filter(|q| mask >> q & 1 == 1).collect();
        let pur = entropy::exact_purity(&psi, &a).unwrap();
        let k = a.len().min(6 - a.len());
        prop_assert!(pur >= 0.5f64.powi(k as i32) - 1e-9 && pur <= 1.0 + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trotter_circuits_conserve_particle_number(
        g in 0.0f64..1.5,
        t in 0.0f64..3.0,
        r in 1usize..4,
        order in prop_oneof![Just(TrotterOrder::First), Just(TrotterOrder::Second), Just(TrotterOrder::SecondOptimized)],
        mode in prop_oneof![Just(LdoaMode::None), Just(LdoaMode::Cp), Just(LdoaMode::Rzz)],
        code in 0usize..256,
    ) {
        let p = LatticeParams::from_staggered(4, 2, 1.0, g).unwrap();
        let plan = TrotterPlan::new(&p, order, r, t, mode).unwrap();
        let c = trotter::build_evolution(&p, &plan).unwrap();
        let mut psi = Statevector::basis(8, code).unwrap();
        let num = model::number_operator(8);
        let before = psi.expectation(&num);
        psi.apply_circuit(&c);
        prop_assert!((psi.expectation(&num) - before).abs() <= 1e-8);
        prop_assert!((psi.norm_sqr() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn depth_does_not_depend_on_lattice_length(r in 1usize..4, mode in prop_oneof![Just(LdoaMode::None), Just(LdoaMode::Cp), Just(LdoaMode::Rzz)], n in 1usize..=3, l_small in 2usize..4) {
        let order = TrotterOrder::SecondOptimized;
        let depth = |l_d: usize| {
            let p = LatticeParams::new(l_d, n, 1.0, 0.5).unwrap();
            let plan = TrotterPlan::new(&p, order, r, 1.0, mode).unwrap();
            trotter::build_evolution(&p, &plan).unwrap().stats()
        };
        let (a, b) = (depth(l_small + 1), depth(l_small + 6));
        prop_assert_eq!((a.total_depth, a.two_qubit_depth, a.cz_depth), (b.total_depth, b.two_qubit_depth, b.cz_depth));
    }
}

#[test]
fn zero_phase_vector_solves_to_zero() {
    let sol = ldoa::solve(&PhaseVector::zeros(6), &AnsatzTemplate::brickwork(3, AnsatzKind::Rzz)).unwrap();
    assert!(sol.x.iter().all(|&v| v == 0.0));
}
