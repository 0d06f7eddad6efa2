//! Clifford generators of CCl(2n) in the Fock representation.
//!
//! `γ_{2k-1} = c_k† - c_k` and `γ_{2k} = -i (c_k† + c_k)`, so that
//! `{γ_j, γ_k} = -2 δ_{jk}` and every γ_j is anti-Hermitian.

use crate::error::{Error, Result};
use crate::fock::{annihilation, check_modes, creation};
use crate::matrix::{OperatorMatrix, Rep, C64, I};

pub fn gamma(j: usize, n: usize) -> Result<OperatorMatrix> {
    check_modes(n)?;
    if j == 0 || j > 2 * n {
        return Err(Error::Index(format!("Clifford index {j} outside 1..={}", 2 * n)));
    }
    let k = j.div_ceil(2);
    let cd = creation(k, n)?;
    let a = annihilation(k, n)?;
    Ok(if j % 2 == 1 { &cd - &a } else { (&cd + &a).scale(-I) })
}

/// All 2n generators, built once.
#[derive(Clone, Debug)]
pub struct CliffordGenerators {
    n: usize,
    gammas: Vec<OperatorMatrix>,
}

impl CliffordGenerators {
    pub fn new(n: usize) -> Result<Self> {
        let gammas = (1..=2 * n).map(|j| gamma(j, n)).collect::<Result<_>>()?;
        Ok(Self { n, gammas })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// γ_j, 1-based.
    pub fn get(&self, j: usize) -> &OperatorMatrix {
        &self.gammas[j - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = &OperatorMatrix> {
        self.gammas.iter()
    }
}

/// Symmetric bilinear form ⟨v, w⟩ = Σ v_j w_j (no conjugation).
pub fn bilinear(v: &[C64], w: &[C64]) -> C64 {
    v.iter().zip(w).map(|(a, b)| a * b).sum()
}

/// Hermitian product (v, w) = ⟨v̄, w⟩.
pub fn hermitian(v: &[C64], w: &[C64]) -> C64 {
    v.iter().zip(w).map(|(a, b)| a.conj() * b).sum()
}

/// c†(u) = Σ u_j c_j† (linear in u).
fn creation_of(u: &[C64], n: usize) -> Result<OperatorMatrix> {
    let mut acc = OperatorMatrix::zeros(Rep::Spin, n);
    for (j, uj) in u.iter().enumerate() {
        acc = &acc + &creation(j + 1, n)?.scale(*uj);
    }
    Ok(acc)
}

/// c(u) = Σ ū_j c_j (anti-linear in u).
fn annihilation_of(u: &[C64], n: usize) -> Result<OperatorMatrix> {
    let mut acc = OperatorMatrix::zeros(Rep::Spin, n);
    for (j, uj) in u.iter().enumerate() {
        acc = &acc + &annihilation(j + 1, n)?.scale(uj.conj());
    }
    Ok(acc)
}

/// γ(v) = c†(P₁v) - c(conj(P₁v)) - i (c†(P₂v) + c(conj(P₂v))) with
/// P₁ e_{2j-1} = e_j and P₂ e_{2j} = e_j.
pub fn gamma_of_vector(v: &[C64], n: usize) -> Result<OperatorMatrix> {
    check_modes(n)?;
    if v.len() != 2 * n {
        return Err(Error::Size(format!("vector of length {} for CCl({})", v.len(), 2 * n)));
    }
    let p1: Vec<C64> = v.iter().step_by(2).copied().collect();
    let p2: Vec<C64> = v.iter().skip(1).step_by(2).copied().collect();
    let p1_bar: Vec<C64> = p1.iter().map(|z| z.conj()).collect();
    let p2_bar: Vec<C64> = p2.iter().map(|z| z.conj()).collect();
    let first = &creation_of(&p1, n)? - &annihilation_of(&p1_bar, n)?;
    let second = (&creation_of(&p2, n)? + &annihilation_of(&p2_bar, n)?).scale(-I);
    Ok(&first + &second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::CMatrix;
    use proptest::prelude::*;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn single_mode_gammas() {
        let g1 = gamma(1, 1).unwrap();
        let g2 = gamma(2, 1).unwrap();
        assert_eq!(g1.matrix(), &CMatrix::from_row_slice(2, 2, &[re(0.0), re(-1.0), re(1.0), re(0.0)]));
        assert_eq!(g2.matrix(), &CMatrix::from_row_slice(2, 2, &[re(0.0), -I, -I, re(0.0)]));
    }

    #[test]
    fn clifford_relations_and_reconstruction() {
        for n in 1..=4 {
            let gens = CliffordGenerators::new(n).unwrap();
            let id = OperatorMatrix::identity(Rep::Spin, n);
            for j in 1..=2 * n {
                assert_eq!(gens.get(j).anti_hermiticity_defect(), 0.0);
                assert_eq!(&(gens.get(j) * gens.get(j)) + &id, OperatorMatrix::zeros(Rep::Spin, n));
                for k in 1..=2 * n {
                    let expected = if j == k { id.scale(re(-2.0)) } else { OperatorMatrix::zeros(Rep::Spin, n) };
                    assert!(gens.get(j).anticommutator(gens.get(k)).max_abs_diff(&expected) < 1e-12);
                }
            }
            for k in 1..=n {
                let (odd, even) = (gens.get(2 * k - 1), gens.get(2 * k));
                let cd = (odd + &even.scale(I)).scale(re(0.5));
                let a = (&-odd + &even.scale(I)).scale(re(0.5));
                assert_eq!(cd, creation(k, n).unwrap());
                assert_eq!(a, annihilation(k, n).unwrap());
            }
        }
    }

    #[test]
    fn gamma_of_vector_matches_basis_and_linearity() {
        let n = 2;
        for j in 1..=2 * n {
            let mut e = vec![re(0.0); 2 * n];
            e[j - 1] = re(1.0);
            assert_eq!(gamma_of_vector(&e, n).unwrap(), gamma(j, n).unwrap());
        }
        let sum = gamma_of_vector(&[re(1.0), re(1.0)], 1).unwrap();
        assert!(sum.max_abs_diff(&(&gamma(1, 1).unwrap() + &gamma(2, 1).unwrap())) < 1e-15);
        assert!(matches!(gamma_of_vector(&[re(1.0)], 1), Err(Error::Size(_))));
        assert!(matches!(gamma(5, 2), Err(Error::Index(_))));
    }

    fn complex_vec(len: usize) -> impl Strategy<Value = Vec<C64>> {
        prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| C64::new(a, b)), len)
    }

    proptest! {
        #[test]
        fn anticommutator_is_bilinear_form(v in complex_vec(4), w in complex_vec(4)) {
            let n = 2;
            let gv = gamma_of_vector(&v, n).unwrap();
            let gw = gamma_of_vector(&w, n).unwrap();
            let expected = OperatorMatrix::identity(Rep::Spin, n).scale(re(-2.0) * bilinear(&v, &w));
            prop_assert!(gv.anticommutator(&gw).max_abs_diff(&expected) < 1e-12);
            let sq = OperatorMatrix::identity(Rep::Spin, n).scale(-bilinear(&v, &v));
            prop_assert!((&gv * &gv).max_abs_diff(&sq) < 1e-12);
        }

        #[test]
        fn gamma_of_vector_is_complex_linear(v in complex_vec(6), w in complex_vec(6), a in -3.0..3.0f64, b in -3.0..3.0f64) {
            let n = 3;
            let s = C64::new(a, b);
            let combo: Vec<C64> = v.iter().zip(&w).map(|(x, y)| s * x + y).collect();
            let lhs = gamma_of_vector(&combo, n).unwrap();
            let rhs = &gamma_of_vector(&v, n).unwrap().scale(s) + &gamma_of_vector(&w, n).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn hermitian_is_conjugated_bilinear() {
        let v = [C64::new(1.0, 2.0), C64::new(0.5, -1.0)];
        let w = [C64::new(-0.3, 0.4), C64::new(2.0, 0.0)];
        let vbar: Vec<C64> = v.iter().map(|z| z.conj()).collect();
        assert_eq!(hermitian(&v, &w), bilinear(&vbar, &w));
    }
}
