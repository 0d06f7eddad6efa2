use proptest::prelude::*;

use spinfock::feynman_kac::{fk_lhs_exact, fk_rhs_mc};
use spinfock::fock::{fock_inner, FockVector};
use spinfock::hamiltonian::HamiltonianSpec;
use spinfock::sde::McParams;
use spinfock::so_algebra::{basis, AlgebraElement, Representation};
use spinfock::spin_group::{group_exp, haar_sample, l2_inner_mc, MatrixCoefficient};
use spinfock::parallel::stream_rng;
use spinfock::{Execution, Rep, C64};

fn real_element(n: usize, coeffs: &[f64]) -> AlgebraElement {
    let mut a = AlgebraElement::zero(n);
    for (idx, c) in basis(n).into_iter().zip(coeffs) {
        a.add_term(idx, C64::new(*c, 0.0));
    }
    a
}

#[test]
fn mixed_state_matches_across_estimators() {
    let n = 2;
    let spec = HamiltonianSpec::new(vec![0.5, 1.25]).unwrap();
    let psi = FockVector::new(n, vec![C64::new(0.5, 0.0), C64::new(0.0, 0.5), C64::new(0.5, 0.0), C64::new(0.0, -0.5)]).unwrap();
    let phi = FockVector::wedge(n, &[2]).unwrap().add(&FockVector::vacuum(n).unwrap()).unwrap();
    let params = McParams { n_paths: 8000, dt: 2e-3, seed: 41, exec: Execution::default() };
    let est = fk_rhs_mc(&psi, &phi, &spec, 0.4, &params).unwrap();
    assert!(est.z_score <= 3.0, "{est:?}");
    let at_zero = fk_lhs_exact(&psi, &phi, &spec, 0.0).unwrap();
    assert!((at_zero - fock_inner(&psi, &phi).unwrap() * 0.25).norm() < 1e-15);
    let schur = l2_inner_mc(&psi, &phi, 8000, 42, Execution::default()).unwrap();
    assert!(schur.within(at_zero, 3.0), "{schur:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exponential_is_a_homomorphism_on_coefficients(
        a in prop::collection::vec(-1.0..1.0f64, 10),
        b in prop::collection::vec(-1.0..1.0f64, 10),
    ) {
        // π(e^A)π(e^B) evaluated against a state equals the coefficient of e^A applied to π(e^B)ψ.
        let n = 2;
        let (ea, eb) = (real_element(n, &a), real_element(n, &b));
        let (ua, ub) = (group_exp(&ea, Rep::Spin).unwrap(), group_exp(&eb, Rep::Spin).unwrap());
        prop_assert!(ua.unitarity_defect() < 1e-12);
        let psi = FockVector::top(n).unwrap();
        let lhs = psi.transform(&(&ua * &ub)).unwrap();
        let rhs = psi.transform(&ub).unwrap().transform(&ua).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        let r = Representation::defining(n).unwrap().apply(&ea).unwrap();
        prop_assert!(r.anti_hermiticity_defect() < 1e-15);
    }

    #[test]
    fn coefficient_norm_is_bounded(seed in 0u64..1000) {
        let n = 2;
        let g = haar_sample(&mut stream_rng(seed, 0), n).unwrap();
        for mask in 0..4 {
            let f = MatrixCoefficient::new(FockVector::basis(n, mask).unwrap());
            prop_assert!(f.evaluate(&g).unwrap().norm() <= 1.0 + 1e-12);
        }
        let total: f64 = (0..4).map(|m| MatrixCoefficient::new(FockVector::basis(n, m).unwrap()).evaluate(&g).unwrap().norm_sqr()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}
