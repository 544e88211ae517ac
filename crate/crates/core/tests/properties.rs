use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qismet::ansatz::{AnsatzKind, AnsatzSpec};
use qismet::controller::{calibrate_tau, decide, predict, Decision};
use qismet::device::{Device, NoiseConfig, TraceSource, TransientTrace};
use qismet::filters::{kalman_step, KalmanConfig, KalmanState};
use qismet::hamiltonian::{tfim_1d, Boundary, PauliSum};
use qismet::optimizer::{precondition, regularize_hessian, SpsaConfig};
use qismet::statevector::{Circuit, Gate, Pauli, PauliString};

fn pauli() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn gate(n: usize) -> impl Strategy<Value = Gate> {
    (0..5usize, 0..n, 1..n.max(2), -6.0..6.0f64).prop_map(move |(kind, q, shift, angle)| match kind {
        0 => Gate::rx(q, angle),
        1 => Gate::ry(q, angle),
        2 => Gate::rz(q, angle),
        3 => Gate::h(q),
        _ => Gate::cx(q, (q + shift) % n),
    })
}

fn circuit() -> impl Strategy<Value = Circuit> {
    (2..6usize).prop_flat_map(|n| {
        prop::collection::vec(gate(n), 0..30).prop_map(move |gates| {
            let mut c = Circuit::new(n).unwrap();
            for g in gates {
                c.push(g).unwrap();
            }
            c
        })
    })
}

fn pauli_sum(n: usize) -> impl Strategy<Value = PauliSum> {
    prop::collection::vec((-3.0..3.0f64, prop::collection::vec(pauli(), n)), 1..6).prop_map(move |terms| {
        PauliSum::from_terms(n, terms.into_iter().map(|(c, ops)| (c, PauliString::from_ops(&ops)))).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn circuits_preserve_norm(c in circuit()) {
        prop_assert!((c.simulate().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_string_text_round_trip(ops in prop::collection::vec(pauli(), 1..10)) {
        let p = PauliString::from_ops(&ops);
        prop_assert_eq!(p.to_string().parse::<PauliString>().unwrap(), p);
    }

    #[test]
    fn pauli_sum_text_round_trip(h in (1..5usize).prop_flat_map(pauli_sum)) {
        let back = PauliSum::parse(&h.to_text(), None).unwrap();
        prop_assert_eq!(back.n(), h.n());
        prop_assert_eq!(back.terms().len(), h.terms().len());
        for ((c1, p1), (c2, p2)) in back.terms().iter().zip(h.terms()) {
            prop_assert_eq!(c1, c2);
            prop_assert_eq!(p1, p2);
        }
    }

    #[test]
    fn trace_text_round_trip(offsets in prop::collection::vec(-5.0..5.0f64, 1..50)) {
        let t = TransientTrace::new(offsets, TraceSource::File).unwrap();
        let back = TransientTrace::parse(&t.to_text(), None).unwrap();
        prop_assert_eq!(back.offsets(), t.offsets());
    }

    #[test]
    fn energies_respect_variational_bound(params in prop::collection::vec(-3.2..3.2f64, 12)) {
        let h = tfim_1d(4, 1.0, 0.7, Boundary::Open).unwrap();
        let e0 = h.exact_ground_energy().unwrap();
        let spec = AnsatzSpec::new(AnsatzKind::Ra, 4, 2).unwrap();
        let e = h.expectation(&spec.prepare(&params).unwrap()).unwrap();
        prop_assert!(e >= e0 - 1e-9);
    }

    #[test]
    fn decide_accepts_matching_directions(g_m in -10.0..10.0f64, g_p in -10.0..10.0f64, tau in 0.0..1.0f64) {
        if g_m * g_p >= 0.0 {
            prop_assert_eq!(decide(g_m, g_p, tau), Decision::Accept);
        }
    }

    #[test]
    fn decide_is_scale_invariant(g_m in -10.0..10.0f64, g_p in -10.0..10.0f64, tau in 0.0..1.0f64, s in 0.01..100.0f64) {
        // powers of two keep the products exact
        let s = s.log2().round().exp2();
        prop_assert_eq!(decide(g_m, g_p, tau), decide(s * g_m, s * g_p, s * tau));
    }

    #[test]
    fn rejection_implies_large_transient(e_cur in -5.0..5.0f64, e_prev in -5.0..5.0f64, t in -2.0..2.0f64, tau in 0.0..1.0f64) {
        let (_, g_m, g_p) = predict(e_cur, t, e_prev);
        if decide(g_m, g_p, tau) == Decision::Reject {
            prop_assert!(t.abs() > tau);
        }
    }

    #[test]
    fn tau_falls_as_target_rises(history in prop::collection::vec(0.0..3.0f64, 1..300), a in 0.0..0.5f64, b in 0.0..0.5f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(calibrate_tau(&history, hi) <= calibrate_tau(&history, lo));
    }

    #[test]
    fn kalman_gain_and_variance_bounds(
        x in -5.0..5.0f64, p in 0.0..3.0f64, z in -5.0..5.0f64,
        t in 0.0..1.0f64, mv in 0.0..2.0f64,
    ) {
        let cfg = KalmanConfig::new(t, mv);
        let (next, k) = kalman_step(KalmanState { x, p }, z, &cfg).unwrap();
        let p_pred = t * t * p + cfg.q();
        prop_assert!((0.0..=1.0).contains(&k));
        prop_assert!(next.p <= p_pred + 1e-15);
        prop_assert!(next.p >= 0.0);
    }

    #[test]
    fn gains_decrease(k in 0..10_000usize, a in 0.01..2.0f64, c in 0.01..1.0f64) {
        let cfg = SpsaConfig { a, c, iterations: 1000, ..SpsaConfig::default() };
        prop_assert!(cfg.learning_rate(k + 1) < cfg.learning_rate(k));
        prop_assert!(cfg.perturbation(k + 1) < cfg.perturbation(k));
        prop_assert!(cfg.learning_rate(k) > 0.0 && cfg.perturbation(k) > 0.0);
    }

    #[test]
    fn regularized_hessian_is_positive_definite(entries in prop::collection::vec(-5.0..5.0f64, 9), g in prop::collection::vec(-1.0..1.0f64, 3)) {
        let m = DMatrix::from_row_slice(3, 3, &entries);
        let h = (&m + m.transpose()) * 0.5;
        let reg = regularize_hessian(&h, 1e-3);
        prop_assert!((&reg - reg.transpose()).amax() < 1e-9);
        prop_assert!(reg.clone().symmetric_eigen().eigenvalues.iter().all(|&l| l > 0.0));
        // the step direction undoes the regularized matrix
        let step = precondition(&h, &g, 1e-3);
        let back = &reg * nalgebra::DVector::from_column_slice(&step);
        for (b, gi) in back.iter().zip(&g) {
            prop_assert!((b - gi).abs() < 1e-6 * (1.0 + gi.abs()));
        }
    }
}

#[test]
fn shot_estimates_are_unbiased() {
    let h = tfim_1d(3, 1.0, 0.8, Boundary::Open).unwrap();
    let spec = AnsatzSpec::new(AnsatzKind::Ra, 3, 1).unwrap();
    let circuit = spec.build(&[0.3, -0.7, 1.1, 0.4, 0.2, -0.5]).unwrap();
    let exact = h.expectation(&circuit.simulate()).unwrap();
    let mut cfg = NoiseConfig::noiseless(4000);
    cfg.shots = Some(256);
    let mut device = Device::new(cfg, 7).unwrap();
    let values: Vec<f64> =
        (0..4000).map(|_| device.execute(&[(&circuit, &h)]).unwrap()[0].value).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    let stderr = (var / values.len() as f64).sqrt();
    assert!((mean - exact).abs() < 5.0 * stderr, "mean {mean} exact {exact} stderr {stderr}");
}

#[test]
fn noiseless_device_is_deterministic_across_seeds() {
    let h = tfim_1d(3, 1.0, 1.0, Boundary::Periodic).unwrap();
    let spec = AnsatzSpec::new(AnsatzKind::Su2, 3, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let params: Vec<f64> = (0..spec.param_count()).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
    let c = spec.build(&params).unwrap();
    let a = Device::new(NoiseConfig::noiseless(1), 1).unwrap().execute(&[(&c, &h)]).unwrap()[0].value;
    let b = Device::new(NoiseConfig::noiseless(1), 2).unwrap().execute(&[(&c, &h)]).unwrap()[0].value;
    assert_eq!(a, b);
}
