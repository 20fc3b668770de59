use qpir::fabric::*;
use qpir::protocols::*;
use qpir::qcore::random::haar_state;
use qpir::qcore::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn basis(xs: &[usize]) -> Vec<MessageInput> {
    xs.iter().copied().map(MessageInput::Basis).collect()
}

fn entangled(dims: &[usize]) -> Vec<MessageInput> {
    dims.iter()
        .map(|&d| MessageInput::Purified(max_entangled(d).unwrap()))
        .collect()
}

fn basis_prob(out: &RunOutcome, x: usize) -> f64 {
    out.output_density().unwrap().matrix()[(x, x)].re
}

fn all_tuples(dims: &[usize]) -> Vec<Vec<usize>> {
    let n: usize = dims.iter().product();
    (0..n).map(|i| kernel::digits_of(i, dims)).collect()
}

fn log2(x: usize) -> f64 {
    (x as f64).log2()
}

#[test]
fn trivial_protocol() {
    let spec = build_trivial(&[2, 2, 2]).unwrap();
    assert_eq!(spec.structural_complexity().unwrap().total, 3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let msgs: Vec<MessageInput> = (0..3)
            .map(|_| MessageInput::Pure(haar_state(&mut rng, &[2]).unwrap()))
            .collect();
        for k in 1..=3 {
            let out = run(&spec, &msgs, k).unwrap();
            let MessageInput::Pure(psi) = &msgs[k - 1] else {
                unreachable!()
            };
            let f = fidelity(&out.output_density().unwrap(), &psi.density()).unwrap();
            assert!(f > 1.0 - 1e-9);
            assert_eq!(final_server_and_reference_view(&out).unwrap().dim(), 1);
        }
    }
}

#[test]
fn complexity_formulas_are_exact() {
    for f in 2..=4 {
        for d in 2..=4 {
            let dims = vec![d; f];
            let pr2 = run(&build_pr2(&dims, true).unwrap(), &basis(&vec![0; f]), 1).unwrap();
            let c = pr2.transcript.complexity;
            assert!((c.upload - log2(f)).abs() < 1e-12);
            assert!((c.download - log2(f) - log2(d)).abs() < 1e-12);
            assert!((c.total - (2.0 * log2(f) + log2(d))).abs() < 1e-12, "pr2 f={f} d={d}");

            let pr2b = run(&build_pr2b(&dims).unwrap(), &basis(&vec![0; f]), 1).unwrap();
            let c = pr2b.transcript.complexity;
            assert!((c.upload - 2.0 * log2(f)).abs() < 1e-12);
            assert!(
                (c.total - (4.0 * log2(f) + 2.0 * log2(d))).abs() < 1e-12,
                "pr2b f={f} d={d}"
            );
        }
    }
}

#[test]
fn protocol1_retrieves_classical_messages() {
    let spec = build_pr2(&[2, 2], true).unwrap();
    let out = run(&spec, &basis(&[0, 1]), 2).unwrap();
    assert!((basis_prob(&out, 1) - 1.0).abs() < 1e-12);
    assert_eq!(out.transcript.complexity.total, 3.0);

    // Unequal sizes: H0 takes the largest dimension.
    let dims = [2, 3, 2];
    let spec = build_pr2(&dims, true).unwrap();
    for xs in all_tuples(&dims) {
        for k in 1..=3 {
            let out = run(&spec, &basis(&xs), k).unwrap();
            assert!((basis_prob(&out, xs[k - 1]) - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn protocol1_final_view_on_superpositions() {
    let plus = attack_superposition_inputs(&[2, 2]).unwrap();
    let views = |with_measurement: bool| -> Vec<DensityOperator> {
        let spec = build_pr2(&[2, 2], with_measurement).unwrap();
        (1..=2)
            .map(|k| final_server_and_reference_view(&run(&spec, &plus, k).unwrap()).unwrap())
            .collect()
    };
    let measured = views(true);
    assert!(trace_distance(&measured[0], &measured[1]).unwrap() < 1e-9);
    let coherent = views(false);
    assert!((trace_distance(&coherent[0], &coherent[1]).unwrap() - 0.5).abs() < 1e-9);

    // ρ(k=1) = (I/2) ⊗ |+⟩⟨+|
    let plus_state = dual_basis_state(2, 0).unwrap().density();
    let expect = DensityOperator::maximally_mixed(vec![2])
        .unwrap()
        .tensor(&plus_state)
        .unwrap();
    assert!(trace_distance(&coherent[0], &expect).unwrap() < 1e-9);
}

#[test]
fn unmeasured_protocol1_is_symmetric_in_the_target() {
    let spec = build_pr2(&[2, 2, 2], false).unwrap();
    let plus = attack_superposition_inputs(&[2, 2, 2]).unwrap();
    let views: Vec<DensityOperator> = (1..=3)
        .map(|k| final_server_and_reference_view(&run(&spec, &plus, k).unwrap()).unwrap())
        .collect();
    let d12 = trace_distance(&views[0], &views[1]).unwrap();
    let d13 = trace_distance(&views[0], &views[2]).unwrap();
    let d23 = trace_distance(&views[1], &views[2]).unwrap();
    assert!(d12 > 0.1);
    assert!((d12 - d13).abs() < 1e-9 && (d12 - d23).abs() < 1e-9);
}

#[test]
fn protocol2_is_exhaustively_correct() {
    for dims in [vec![2, 2], vec![3, 2], vec![2, 2, 2], vec![3, 3, 3]] {
        let spec = build_pr2b(&dims).unwrap();
        for xs in all_tuples(&dims) {
            for k in 1..=dims.len() {
                let out = run(&spec, &basis(&xs), k).unwrap();
                assert!(
                    (basis_prob(&out, xs[k - 1]) - 1.0).abs() < 1e-9,
                    "{dims:?} {xs:?} k={k}"
                );
            }
        }
    }
}

#[test]
fn protocol2_with_one_shared_ancilla_is_not_correct() {
    // Both controlled additions land on H'0, so the A = 1 branches read an
    // untouched register.
    let spec = build_pr2b_with(&[2, 2], AncillaMode::Shared).unwrap();
    let worst = all_tuples(&[2, 2])
        .iter()
        .flat_map(|xs| (1..=2).map(move |k| (xs.clone(), k)))
        .map(|(xs, k)| basis_prob(&run(&spec, &basis(&xs), k).unwrap(), xs[k - 1]))
        .fold(1.0, f64::min);
    assert!(worst < 0.9, "worst success probability {worst}");
}

#[test]
fn protocol2_server_ends_with_the_messages() {
    let spec = build_pr2b(&[2, 2]).unwrap();
    for xs in all_tuples(&[2, 2]) {
        for k in 1..=2 {
            let out = run(&spec, &basis(&xs), k).unwrap();
            let view = final_server_and_reference_view(&out).unwrap();
            let idx = xs[0] * 2 + xs[1];
            assert!((view.matrix()[(idx, idx)].re - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn wrapper_composition_law() {
    for dims in [vec![2, 2], vec![2, 3], vec![3, 3, 2]] {
        for inner_name in ["pr2", "pr2b", "trivial"] {
            let sq: Vec<usize> = dims.iter().map(|d| d * d).collect();
            let inner = build_by_name(inner_name, &sq).unwrap();
            let w = build_teleport_wrapper(&inner, &dims).unwrap();
            let ci = inner.structural_complexity().unwrap();
            let cw = w.structural_complexity().unwrap();
            let pe: f64 = dims.iter().map(|&d| log2(d)).sum();
            assert!((cw.total - ci.total).abs() < 1e-12);
            assert!((cw.prior_ebits - pe - ci.prior_ebits).abs() < 1e-12);
            assert_eq!(w.input_set, InputSet::PureStates);
            assert!(w.validate().is_ok());
        }
    }
    let w = build_by_name("qwrap:pr2", &[2, 2])
        .unwrap()
        .structural_complexity()
        .unwrap();
    assert_eq!((w.total, w.prior_ebits), (4.0, 2.0));
}

#[test]
fn wrapper_rejects_mismatched_alphabets() {
    let inner = build_pr2(&[2, 2], true).unwrap();
    assert!(build_teleport_wrapper(&inner, &[2, 2]).is_err());
}

#[test]
fn wrapper_transmits_quantum_messages() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (dims, trials) in [(vec![2, 2], 50), (vec![3, 2], 10)] {
        let spec = build_by_name("qwrap:pr2", &dims).unwrap();
        for _ in 0..trials {
            let msgs: Vec<MessageInput> = dims
                .iter()
                .map(|&d| MessageInput::Pure(haar_state(&mut rng, &[d]).unwrap()))
                .collect();
            for k in 1..=dims.len() {
                let out = run(&spec, &msgs, k).unwrap();
                let MessageInput::Pure(psi) = &msgs[k - 1] else {
                    unreachable!()
                };
                let f = fidelity(&out.output_density().unwrap(), &psi.density()).unwrap();
                assert!(f > 1.0 - 1e-9, "{dims:?} k={k}: {f}");
            }
        }
        for k in 1..=dims.len() {
            let out = run(&spec, &entangled(&dims), k).unwrap();
            let joint = out.output_with_reference(k).unwrap();
            let f = fidelity(&joint, &max_entangled(dims[k - 1]).unwrap().density()).unwrap();
            assert!(f > 1.0 - 1e-9);
        }
    }
}

/// State of (R_1, Y_1) in each Bell-outcome branch right after the server's
/// Bell measurement, with its outcome (a, b).
fn post_bell_states(d: usize) -> Vec<(usize, usize, DensityOperator)> {
    let spec = build_by_name("qwrap:pr2", &[d, d]).unwrap();
    let out = run(&spec, &entangled(&[d, d]), 1).unwrap();
    let snap = &out.transcript.initial;
    let mut after = snap.clone();
    after.apply_ops(&spec.server_setup, Owner::Server).unwrap();
    let keep = after.layout().indices(&["R1".to_string(), "Y1".to_string()]).unwrap();
    after
        .branches()
        .iter()
        .map(|b| {
            let m = b.record["m1"];
            (m / d, m % d, b.state.reduced(&keep).unwrap())
        })
        .collect()
}

#[test]
fn bell_step_leaves_inverse_weyl_on_the_receiver() {
    // Message register first, reference second: (R ⊗ Y) = (I ⊗ Z^{-b} X^{-a}) |φ⟩.
    for d in [2, 3] {
        let phi = max_entangled(d).unwrap();
        let states = post_bell_states(d);
        assert_eq!(states.len(), d * d * d * d);
        for (a, b, rho) in states {
            let w = weyl(d, 0, -(b as i64)).unwrap().into_matrix() * weyl(d, -(a as i64), 0).unwrap().into_matrix();
            let expect = kron(&identity(d), &w) * phi.to_column();
            let psi = StateVector::new(vec![d, d], expect.iter().copied().collect()).unwrap();
            assert!(
                fidelity(&rho, &psi.density()).unwrap() > 1.0 - 1e-9,
                "d={d} a={a} b={b}"
            );
        }
    }
}

#[test]
fn literal_correction_agrees_only_for_qubits() {
    // X^{-a} Z^{b} undoes the Bell step up to phase at d = 2 but not at d = 3.
    for (d, agrees) in [(2, true), (3, false)] {
        let phi = max_entangled(d).unwrap().density();
        let mut worst: f64 = 1.0;
        for (a, b, rho) in post_bell_states(d) {
            let u = weyl(d, -(a as i64), b as i64).unwrap();
            let corrected = rho.apply_unitary(&u, &[1]).unwrap();
            worst = worst.min(fidelity(&corrected, &phi).unwrap());
        }
        assert_eq!(worst > 1.0 - 1e-9, agrees, "d={d}: worst fidelity {worst}");
    }
}

#[test]
fn kllgr5_exhaustive_correctness_and_cost() {
    let spec = build_kllgr5(&XorScheme::new(3, 1).unwrap()).unwrap();
    assert!(spec.unitary_type && spec.validate().is_ok());
    assert_eq!(spec.round_count(), 2);
    for db in all_tuples(&[2, 2, 2]) {
        for k in 1..=3 {
            let out = run(&spec, &basis(&db), k).unwrap();
            assert!((basis_prob(&out, db[k - 1]) - 1.0).abs() < 1e-9, "db {db:?} k={k}");
        }
    }
    for n in 1..=3 {
        let c = build_kllgr5(&XorScheme::new(n, 1).unwrap())
            .unwrap()
            .structural_complexity()
            .unwrap();
        assert_eq!(c.total, (2 * 2 * (n + 1)) as f64);
    }
}

#[test]
fn kllgr5_server_views_do_not_depend_on_the_index() {
    let spec = build_kllgr5(&XorScheme::new(3, 1).unwrap()).unwrap();
    for db in [[1, 0, 1], [0, 1, 1]] {
        let runs: Vec<RunOutcome> = (1..=3).map(|k| run(&spec, &basis(&db), k).unwrap()).collect();
        for t in 1..=2 {
            let v0 = server_view(&runs[0].transcript, t).unwrap();
            for r in &runs[1..] {
                assert!(trace_distance(&v0, &server_view(&r.transcript, t).unwrap()).unwrap() < 1e-9);
            }
        }
    }
}

#[test]
fn kllgr5_with_wide_entries() {
    let scheme = XorScheme::new(2, 2).unwrap();
    assert_eq!(scheme.entry_dim(), 4);
    let spec = build_kllgr5(&scheme).unwrap();
    for db in all_tuples(&[4, 4]) {
        for k in 1..=2 {
            let out = run(&spec, &basis(&db), k).unwrap();
            assert!((basis_prob(&out, db[k - 1]) - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn wrapped_kllgr5_transmits_qubits() {
    let spec = build_by_name("qwrap:kllgr5", &[2, 2]).unwrap();
    assert_eq!(spec.round_count(), 2);
    for k in 1..=2 {
        let out = run(&spec, &entangled(&[2, 2]), k).unwrap();
        let joint = out.output_with_reference(k).unwrap();
        assert!(fidelity(&joint, &max_entangled(2).unwrap().density()).unwrap() > 1.0 - 1e-9);
    }
}

#[test]
fn registry() {
    for name in [
        "trivial",
        "pr2",
        "pr2-nomeas",
        "pr2b",
        "pr2b-shared",
        "kllgr5",
        "qwrap:pr2",
        "qwrap:trivial",
    ] {
        assert!(is_registered(name), "{name}");
        let spec = build_by_name(name, &[2, 2]).unwrap();
        assert!(spec.validate().is_ok());
        assert_eq!(spec.name, name);
    }
    assert!(!is_registered("pr3"));
    assert!(matches!(build_by_name("pr3", &[2]), Err(FabricError::Definition(_))));
    assert!(build_by_name("qwrap:qwrap:pr2", &[2, 2]).is_err());
    assert!(build_by_name("kllgr5", &[3, 3]).is_err());
    assert!(build_by_name("kllgr5", &[2, 4]).is_err());
    assert!(build_by_name("pr2", &[]).is_err());
}
