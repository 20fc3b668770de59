use proptest::prelude::*;
use qpir::qcore::random::{haar_state, haar_unitary, random_density};
use qpir::qcore::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-9;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn entropy(rho: &DensityOperator) -> f64 {
    von_neumann_entropy(rho).unwrap()
}

fn pure_fidelity(a: &StateVector, b: &StateVector) -> f64 {
    a.inner(b).unwrap().norm_sqr()
}

#[test]
fn pauli_x_examples() {
    let x2 = pauli_x(2).unwrap();
    let expect = Matrix::from_row_slice(2, 2, &[cx(0., 0.), cx(1., 0.), cx(1., 0.), cx(0., 0.)]);
    assert!(max_abs_diff(x2.matrix(), &expect) < 1e-15);
    assert!(max_abs_diff(pauli_x(1).unwrap().matrix(), &identity(1)) < 1e-15);

    let mut s = StateVector::basis(vec![3], &[2]).unwrap();
    s.apply_unitary(&pauli_x(3).unwrap(), &[0]).unwrap();
    assert!((pure_fidelity(&s, &StateVector::basis(vec![3], &[0]).unwrap()) - 1.0).abs() < 1e-15);
    assert_eq!(pauli_x(0).unwrap_err(), QError::InvalidDimension(0));
}

#[test]
fn pauli_z_examples() {
    let z2 = pauli_z(2).unwrap();
    assert!((z2.matrix()[(0, 0)] - cx(1., 0.)).norm() < 1e-15);
    assert!((z2.matrix()[(1, 1)] - cx(-1., 0.)).norm() < 1e-15);

    let mut s = StateVector::basis(vec![4], &[1]).unwrap();
    s.apply_unitary(&pauli_z(4).unwrap(), &[0]).unwrap();
    assert!((s.amplitudes()[1] - cx(0., 1.)).norm() < 1e-12);

    for d in 1..=8 {
        assert!(max_abs_diff(pauli_z(d).unwrap().pow(d).matrix(), &identity(d)) < 1e-12);
    }
    assert!(pauli_z(0).is_err());
}

#[test]
fn commutation_zx_is_omega_xz() {
    for d in 1..=8 {
        let x = pauli_x(d).unwrap().into_matrix();
        let z = pauli_z(d).unwrap().into_matrix();
        let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / d as f64);
        assert!(max_abs_diff(&(&z * &x), &((&x * &z) * omega)) < 1e-12, "d = {d}");
    }
}

#[test]
fn max_entangled_examples() {
    let phi = max_entangled(2).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let expect = [h, 0.0, 0.0, h];
    for (a, e) in phi.amplitudes().iter().zip(expect) {
        assert!((a - cx(e, 0.)).norm() < 1e-15);
    }
    assert_eq!(max_entangled(1).unwrap().amplitudes(), &[cx(1., 0.)]);
    for d in 1..=5 {
        let rho = max_entangled(d).unwrap().density();
        let mixed = DensityOperator::maximally_mixed(vec![d]).unwrap();
        for keep in [0, 1] {
            let red = rho.partial_trace(&[keep]).unwrap();
            assert!(trace_distance(&red, &mixed).unwrap() < 1e-12);
        }
    }
}

#[test]
fn vectorize_examples() {
    for d in 1..=4 {
        let (v, _) = vectorize(&identity(d)).unwrap();
        assert!((pure_fidelity(&v, &max_entangled(d).unwrap()) - 1.0).abs() < 1e-12);
    }
    let mut m = Matrix::zeros(2, 2);
    m[(0, 0)] = cx(1., 0.);
    let (v, _) = vectorize(&m).unwrap();
    assert!((pure_fidelity(&v, &StateVector::basis(vec![2, 2], &[0, 0]).unwrap()) - 1.0).abs() < 1e-15);
    assert_eq!(vectorize(&Matrix::zeros(2, 3)).unwrap_err(), QError::ZeroMatrix);

    let (rect, scale) = vectorize(&Matrix::from_element(2, 3, cx(1., 0.))).unwrap();
    assert_eq!(rect.dims(), &[2, 3]);
    assert!((rect.norm() - 1.0).abs() < 1e-12);
    assert!(scale > 0.0);
}

#[test]
fn vectorize_intertwines_left_and_right_multiplication() {
    // (B ⊗ Cᵀ)|A⟩⟩ = |BAC⟩⟩ up to the common normalization.
    let mut r = rng(11);
    for i in 0..100 {
        let d = 2 + i % 3;
        let a = random::ginibre(&mut r, d, d);
        let b = random::ginibre(&mut r, d, d);
        let c = random::ginibre(&mut r, d, d);
        let (va, na) = vectorize(&a).unwrap();
        let lhs = kron(&b, &c.transpose()) * va.to_column() * cx(na, 0.);
        let (vbac, nbac) = vectorize(&(&b * &a * &c)).unwrap();
        let rhs = vbac.to_column() * cx(nbac, 0.);
        assert!(max_abs_diff(&lhs, &rhs) < 1e-9 * (1.0 + nbac), "instance {i}");
    }
}

#[test]
fn bell_measurement_is_complete_and_uniform_on_double_pairs() {
    for d in 1..=4 {
        let m = bell_measurement(d).unwrap();
        assert_eq!(m.len(), d * d);
        let n = d * d;
        let mut sum = Matrix::zeros(n, n);
        for o in m.outcomes() {
            sum += &o.projector;
        }
        assert!(max_abs_diff(&sum, &identity(n)) < EPS);

        let phi = max_entangled(d).unwrap();
        let pair = phi.tensor(&phi).unwrap();
        let branches = m.measure(&pair, &[1, 2]).unwrap();
        assert_eq!(branches.len(), d * d);
        for (p, s, _) in &branches {
            assert!((p - 1.0 / (d * d) as f64).abs() < EPS);
            assert!((s.norm() - 1.0).abs() < EPS);
        }
    }
}

#[test]
fn bell_measurement_probabilities_sum_to_one() {
    let mut r = rng(12);
    for i in 0..100 {
        let d = 2 + i % 3;
        let s = haar_state(&mut r, &[d, d, 2]).unwrap();
        let branches = bell_measurement(d).unwrap().measure(&s, &[0, 1]).unwrap();
        let total: f64 = branches.iter().map(|b| b.0).sum();
        assert!((total - 1.0).abs() < EPS);
        assert!(branches.iter().all(|b| (b.1.norm() - 1.0).abs() < EPS));
    }
}

#[test]
fn bell_measurement_leaves_product_of_operators() {
    // Measuring A'B' of |A⟩⟩_{AA'} ⊗ |B⟩⟩_{BB'} with outcome (a, b) leaves
    // |A X^a Z^{-b} Bᵀ⟩⟩ on AB.
    let mut r = rng(13);
    for d in [2usize, 3, 4] {
        let m = bell_measurement(d).unwrap();
        for _ in 0..100 {
            let a = haar_unitary(&mut r, d).unwrap().into_matrix();
            let b = haar_unitary(&mut r, d).unwrap().into_matrix();
            let state = vectorize(&a).unwrap().0.tensor(&vectorize(&b).unwrap().0).unwrap();
            let branches = m.measure(&state, &[1, 3]).unwrap();
            assert_eq!(branches.len(), d * d);
            for (p, post, idx) in branches {
                assert!((p - 1.0 / (d * d) as f64).abs() < EPS);
                let label = &m.outcomes()[idx].label;
                let w = weyl(d, label[0] as i64, -(label[1] as i64)).unwrap().into_matrix();
                let expect = vectorize(&(&a * w * b.transpose())).unwrap().0;
                let rho = post.density().partial_trace(&[0, 2]).unwrap();
                let f = fidelity(&rho, &expect.density()).unwrap();
                assert!(f >= 1.0 - EPS, "d = {d}, outcome {label:?}: fidelity {f}");
            }
        }
    }
}

#[test]
fn dual_basis_examples() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let u0 = dual_basis_state(2, 0).unwrap();
    let u1 = dual_basis_state(2, 1).unwrap();
    assert!((u0.amplitudes()[1] - cx(h, 0.)).norm() < 1e-15);
    assert!((u1.amplitudes()[1] - cx(-h, 0.)).norm() < 1e-15);
    for d in 1..=8 {
        for j in 0..d {
            for k in 0..d {
                let ip = dual_basis_state(d, j)
                    .unwrap()
                    .inner(&dual_basis_state(d, k).unwrap())
                    .unwrap();
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((ip - cx(expect, 0.)).norm() < 1e-12);
            }
        }
    }
    assert!(dual_basis_state(3, 3).is_err());
}

#[test]
fn entropy_examples() {
    assert!(entropy(&StateVector::basis(vec![3], &[1]).unwrap().density()).abs() < EPS);
    assert!((entropy(&DensityOperator::maximally_mixed(vec![2]).unwrap()) - 1.0).abs() < EPS);
    let h = entropy(&DensityOperator::diagonal(&[0.75, 0.25]).unwrap());
    assert!((h - 0.811278).abs() < 1e-6);

    let mut m = identity(2) * cx(0.5, 0.);
    m[(0, 1)] = cx(0.3, 0.);
    assert!(DensityOperator::new(vec![2], m).is_err());
}

#[test]
fn distance_and_purification_examples() {
    let rho = DensityOperator::diagonal(&[0.75, 0.25]).unwrap();
    assert!(trace_distance(&rho, &rho).unwrap().abs() < 1e-15);
    let zero = StateVector::basis(vec![2], &[0]).unwrap().density();
    let one = StateVector::basis(vec![2], &[1]).unwrap().density();
    assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);

    let psi = purify(&rho).unwrap();
    let back = psi.density().partial_trace(&[0]).unwrap();
    assert!(max_abs_diff(back.matrix(), rho.matrix()) < 1e-12);
    assert!(trace_distance(&rho, &DensityOperator::maximally_mixed(vec![3]).unwrap()).is_err());
}

#[test]
fn resource_guard_rejects_oversized_states() {
    let err = StateVector::basis(vec![2; 23], &[0; 23]).unwrap_err();
    assert!(matches!(err, QError::ResourceGuard { .. }));
}

#[test]
fn prop1a_pure_bipartite_marginals_have_equal_entropy() {
    let mut r = rng(1);
    for i in 0..100 {
        let (da, db) = (2 + i % 3, 2 + (i / 3) % 3);
        let rho = haar_state(&mut r, &[da, db]).unwrap().density();
        let hx = entropy(&rho.partial_trace(&[0]).unwrap());
        let hy = entropy(&rho.partial_trace(&[1]).unwrap());
        assert!((hx - hy).abs() < EPS, "instance {i}: {hx} vs {hy}");
    }
}

#[test]
fn prop1b_subadditivity_with_equality_on_products() {
    let mut r = rng(2);
    for i in 0..100 {
        let (da, db) = (2 + i % 2, 2 + (i / 2) % 3);
        let rho = random_density(&mut r, &[da, db], 1 + i % (da * db)).unwrap();
        let hxy = entropy(&rho);
        let hx = entropy(&rho.partial_trace(&[0]).unwrap());
        let hy = entropy(&rho.partial_trace(&[1]).unwrap());
        assert!(hxy <= hx + hy + EPS, "instance {i}");

        let a = random_density(&mut r, &[da], da).unwrap();
        let b = random_density(&mut r, &[db], db).unwrap();
        let prod = a.tensor(&b).unwrap();
        assert!((entropy(&prod) - entropy(&a) - entropy(&b)).abs() < EPS);
    }
}

#[test]
fn prop1c_unitary_invariance() {
    let mut r = rng(3);
    for i in 0..100 {
        let d = 2 + i % 5;
        let rho = random_density(&mut r, &[d], 1 + i % d).unwrap();
        let u = haar_unitary(&mut r, d).unwrap();
        let rotated = rho.apply_unitary(&u, &[0]).unwrap();
        assert!((entropy(&rotated) - entropy(&rho)).abs() < EPS, "instance {i}");
    }
}

#[test]
fn prop1d_joint_plus_marginal_dominates_other_marginal() {
    let mut r = rng(4);
    for i in 0..100 {
        let (da, db) = (2 + i % 3, 2 + (i / 3) % 2);
        let rho = random_density(&mut r, &[da, db], 1 + i % 3).unwrap();
        let hxy = entropy(&rho);
        let hx = entropy(&rho.partial_trace(&[0]).unwrap());
        let hy = entropy(&rho.partial_trace(&[1]).unwrap());
        assert!(hxy + hx >= hy - EPS, "instance {i}");
    }
}

#[test]
fn prop1e_orthogonal_mixture_entropy() {
    let mut r = rng(5);
    for i in 0..100 {
        let blocks: Vec<usize> = (0..2 + i % 3).map(|j| 1 + (i + j) % 3).collect();
        let n: usize = blocks.iter().sum();
        let raw: Vec<f64> = blocks
            .iter()
            .map(|_| rand::Rng::random_range(&mut r, 0.05..1.0))
            .collect();
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|x| x / total).collect();

        let mut m = Matrix::zeros(n, n);
        let mut expect = 0.0;
        let mut off = 0;
        for (s, &b) in blocks.iter().enumerate() {
            let rs = random_density(&mut r, &[b], b).unwrap();
            m.view_mut((off, off), (b, b)).copy_from(&(rs.matrix() * cx(p[s], 0.)));
            expect += p[s] * (entropy(&rs) - p[s].log2());
            off += b;
        }
        let mix = DensityOperator::new(vec![n], m).unwrap();
        assert!((entropy(&mix) - expect).abs() < EPS, "instance {i}");
    }
}

#[test]
fn transmission_information_examples() {
    let mut r = rng(6);
    for i in 0..20 {
        let d = 2 + i % 3;
        let rho = random_density(&mut r, &[d], d).unwrap();
        let h = entropy(&rho);
        let id = Channel::identity(vec![d]).unwrap();
        assert!((transmission_information(&rho, &id).unwrap() - 2.0 * h).abs() < 1e-8);
        let dep = Channel::completely_depolarizing(d).unwrap();
        assert!(transmission_information(&rho, &dep).unwrap().abs() < 1e-8);

        let pure = haar_state(&mut r, &[d]).unwrap().density();
        let u = Channel::unitary(&haar_unitary(&mut r, d).unwrap());
        for ch in [&id, &dep, &u] {
            assert!(transmission_information(&pure, ch).unwrap().abs() < 1e-8);
        }
    }
}

#[test]
fn transmission_information_ignores_choice_of_purification() {
    let mut r = rng(7);
    for i in 0..20 {
        let d = 2 + i % 2;
        let rho = random_density(&mut r, &[d], d).unwrap();
        let ch = Channel::completely_depolarizing(d).unwrap();
        let psi = purify(&rho).unwrap();
        let mut other = psi.clone();
        let u = haar_unitary(&mut r, psi.dims()[1]).unwrap();
        other.apply_unitary(&u, &[1]).unwrap();
        for gamma in [ch, Channel::identity(vec![d]).unwrap()] {
            let a = transmission_information_purified(&psi, &gamma).unwrap();
            let b = transmission_information_purified(&other, &gamma).unwrap();
            assert!((a - b).abs() < 1e-8);
            assert!((a - transmission_information(&rho, &gamma).unwrap()).abs() < 1e-8);
        }
    }
}

proptest! {
    #[test]
    fn pauli_x_shifts_every_basis_state(d in 1usize..9, s in 0usize..8) {
        let s = s % d;
        let mut v = StateVector::basis(vec![d], &[s]).unwrap();
        v.apply_unitary(&pauli_x(d).unwrap(), &[0]).unwrap();
        let target = StateVector::basis(vec![d], &[(s + 1) % d]).unwrap();
        prop_assert!((v.inner(&target).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn digits_round_trip(dims in proptest::collection::vec(1usize..5, 1..5), seed in 0usize..10_000) {
        let n: usize = dims.iter().product();
        let i = seed % n;
        prop_assert_eq!(kernel::index_of(&kernel::digits_of(i, &dims), &dims), i);
    }
}
