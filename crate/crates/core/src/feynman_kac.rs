//! Path-space check of the semigroup `e^{-tH}` on the embedded Fock space.
//!
//! The exact side is `2^{-n}⟨ψ, e^{-tH}φ⟩` with `H = Σ E_k c_k† c_k`. The
//! Monte Carlo side averages `conj(F(ψ)(X(0)))·F(χ_t)(X(t))` over paths of the
//! pure diffusion started from Haar measure, where `χ_t = e^{-tS}φ` and
//! `S = π(iB₀) = Σ E_k (N_k − ½)` carries the first-order part.

use crate::error::{Error, Result};
use crate::estimate::McEstimate;
use crate::fock::{fock_inner, free_hamiltonian, FockVector};
use crate::hamiltonian::{build_parts, exact_semigroup, HamiltonianSpec};
use crate::matrix::{OperatorMatrix, Rep, C64, I};
use crate::sde::{haar_path_samples, Integrator, McParams, Process, SigmaConvention};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FkEstimate {
    pub mean: C64,
    pub std_error: f64,
    pub n_paths: usize,
    pub lhs_exact: C64,
    pub z_score: f64,
}

impl FkEstimate {
    fn new(mc: McEstimate, lhs_exact: C64) -> Self {
        Self { mean: mc.mean, std_error: mc.std_error, n_paths: mc.n_samples, lhs_exact, z_score: mc.z_score(lhs_exact) }
    }
}

fn check_inputs(psi: &FockVector, phi: &FockVector, spec: &HamiltonianSpec, t: f64) -> Result<()> {
    if psi.n() != spec.n() || phi.n() != spec.n() {
        return Err(Error::Size("states and Hamiltonian must share the mode count".into()));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// 2^{-n}⟨ψ, e^{-tH}φ⟩.
pub fn fk_lhs_exact(psi: &FockVector, phi: &FockVector, spec: &HamiltonianSpec, t: f64) -> Result<C64> {
    check_inputs(psi, phi, spec, t)?;
    let evolved = phi.transform(&exact_semigroup(&free_hamiltonian(spec.energies())?, t)?)?;
    Ok(fock_inner(psi, &evolved)? / (1u64 << spec.n()) as f64)
}

/// S = π(iB₀).
pub fn first_order_part(spec: &HamiltonianSpec) -> Result<OperatorMatrix> {
    Ok(build_parts(spec, Rep::Spin)?.b0.scale(I))
}

/// max |e^{-tπ(H̃)} − e^{-t·½ΣE_k}·e^{-tS}|.
pub fn factorization_residual(spec: &HamiltonianSpec, t: f64) -> Result<f64> {
    let parts = build_parts(spec, Rep::Spin)?;
    let whole = exact_semigroup(&parts.h_tilde, t)?;
    let split = exact_semigroup(&parts.b0.scale(I), t)?.scale(C64::new((-0.5 * t * spec.total()).exp(), 0.0));
    Ok(whole.max_abs_diff(&split))
}

pub fn fk_rhs_mc(psi: &FockVector, phi: &FockVector, spec: &HamiltonianSpec, t: f64, params: &McParams) -> Result<FkEstimate> {
    rhs_with_initial(psi, phi, spec, t, params, false)
}

fn rhs_with_initial(
    psi: &FockVector,
    phi: &FockVector,
    spec: &HamiltonianSpec,
    t: f64,
    params: &McParams,
    flip_initial: bool,
) -> Result<FkEstimate> {
    check_inputs(psi, phi, spec, t)?;
    let chi = phi.transform(&exact_semigroup(&first_order_part(spec)?, t)?)?;
    let integ = Integrator::new(spec, Process::P0, SigmaConvention::Corrected)?;
    let samples = haar_path_samples(&integ, psi, &[chi], &[t], params, flip_initial)?;
    let flat: Vec<C64> = samples.into_iter().map(|s| s[0]).collect();
    Ok(FkEstimate::new(McEstimate::from_samples(&flat), fk_lhs_exact(psi, phi, spec, t)?))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FkRow {
    pub t: f64,
    pub lhs: C64,
    pub rhs_mean: C64,
    pub std_error: f64,
    pub z: f64,
}

/// Exact and Monte Carlo sides at each time, each estimated with the same seed.
pub fn fk_report(psi: &FockVector, phi: &FockVector, spec: &HamiltonianSpec, grid: &[f64], params: &McParams) -> Result<Vec<FkRow>> {
    grid.iter()
        .map(|&t| {
            let e = fk_rhs_mc(psi, phi, spec, t, params)?;
            Ok(FkRow { t, lhs: e.lhs_exact, rhs_mean: e.mean, std_error: e.std_error, z: e.z_score })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parallel::Execution;

    fn spec(e: &[f64]) -> HamiltonianSpec {
        HamiltonianSpec::new(e.to_vec()).unwrap()
    }

    fn params(seed: u64) -> McParams {
        McParams { n_paths: 10_000, dt: 1e-3, seed, exec: Execution::default() }
    }

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn exact_side_examples() {
        let s = spec(&[1.0]);
        let vac = FockVector::vacuum(1).unwrap();
        let e1 = FockVector::wedge(1, &[1]).unwrap();
        for t in [0.0, 0.5, 3.0] {
            assert!((fk_lhs_exact(&vac, &vac, &s, t).unwrap() - re(0.5)).norm() < 1e-15);
        }
        assert!((fk_lhs_exact(&e1, &e1, &s, 0.5).unwrap() - re(0.5 * (-0.5f64).exp())).norm() < 1e-15);
        assert_eq!(fk_lhs_exact(&vac, &e1, &s, 0.5).unwrap(), re(0.0));
        assert!(fk_lhs_exact(&vac, &vac, &s, -1.0).is_err());
    }

    #[test]
    fn semigroup_factorizes() {
        for e in [vec![1.0], vec![1.0, 2.0], vec![1.0, 1.5, 2.5]] {
            for t in [0.0, 0.3, 1.0, 2.5] {
                assert!(factorization_residual(&spec(&e), t).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn monte_carlo_examples() {
        let s1 = spec(&[1.0]);
        let vac = FockVector::vacuum(1).unwrap();
        let e1 = FockVector::wedge(1, &[1]).unwrap();
        let a = fk_rhs_mc(&vac, &vac, &s1, 0.5, &params(1)).unwrap();
        assert!(a.z_score <= 3.0, "{a:?}");
        assert!((a.lhs_exact - re(0.5)).norm() < 1e-15);
        let b = fk_rhs_mc(&e1, &e1, &s1, 0.5, &params(2)).unwrap();
        assert!(b.z_score <= 3.0, "{b:?}");
        let top = FockVector::wedge(2, &[1, 2]).unwrap();
        let c = fk_rhs_mc(&top, &top, &spec(&[1.0, 2.0]), 0.3, &params(3)).unwrap();
        assert!((c.lhs_exact - re(0.25 * (-0.9f64).exp())).norm() < 1e-15);
        assert!(c.z_score <= 3.0, "{c:?}");
        assert!(c.std_error > 0.0 && c.n_paths == 10_000);
    }

    #[test]
    fn deck_flip_of_initial_point_cancels() {
        let s = spec(&[1.0, 2.0]);
        let psi = FockVector::wedge(2, &[1]).unwrap();
        let phi = FockVector::new(2, vec![re(0.0), re(0.6), C64::new(0.0, 0.8), re(0.0)]).unwrap();
        let p = McParams { n_paths: 2000, ..params(4) };
        let a = rhs_with_initial(&psi, &phi, &s, 0.4, &p, false).unwrap();
        let b = rhs_with_initial(&psi, &phi, &s, 0.4, &p, true).unwrap();
        assert!((a.mean - b.mean).norm() <= 3.0 * a.std_error);
        assert!(a.z_score <= 3.0 && b.z_score <= 3.0);
    }

    #[test]
    fn report_edge_cases() {
        let s = spec(&[1.0]);
        let e1 = FockVector::wedge(1, &[1]).unwrap();
        assert!(fk_report(&e1, &e1, &s, &[], &params(5)).unwrap().is_empty());
        let p = McParams { n_paths: 2000, ..params(5) };
        let rows = fk_report(&e1, &e1, &s, &[0.0], &p).unwrap();
        assert_eq!(rows[0].lhs, re(0.5));
        assert!(rows[0].z <= 3.0);
        let lhs: Vec<f64> = [0.1, 0.4, 0.9, 2.0].iter().map(|&t| fk_lhs_exact(&e1, &e1, &s, t).unwrap().re).collect();
        assert!(lhs.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn report_is_deterministic_across_execution_modes() {
        let s = spec(&[1.0]);
        let e1 = FockVector::wedge(1, &[1]).unwrap();
        let p = McParams { n_paths: 500, dt: 1e-2, seed: 6, exec: Execution::Sequential };
        let a = fk_report(&e1, &e1, &s, &[0.25, 0.5], &p).unwrap();
        let b = fk_report(&e1, &e1, &s, &[0.25, 0.5], &McParams { exec: Execution::default(), ..p }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_path_count_is_config_error() {
        let s = spec(&[1.0]);
        let vac = FockVector::vacuum(1).unwrap();
        assert!(matches!(fk_rhs_mc(&vac, &vac, &s, 0.5, &McParams { n_paths: 99, ..params(0) }), Err(Error::Config(_))));
    }
}
