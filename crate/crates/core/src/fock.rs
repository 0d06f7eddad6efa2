//! Fermionic Fock space over `n` modes in the occupation-number basis.
//!
//! Basis vectors are indexed by a bitmask `S`: bit `j - 1` set means mode `j`
//! is occupied. The vacuum is mask `0`. Creation operators follow the
//! wedge rule `c_j† e_S = (-1)^{#{i in S : i < j}} e_{S ∪ {j}}`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, OperatorMatrix, Rep, C64};

/// Largest supported mode count; 2^n dense matrices must fit in memory.
pub const MAX_MODES: usize = 12;

pub fn check_modes(n: usize) -> Result<()> {
    if n == 0 || n > MAX_MODES {
        return Err(Error::Size(format!("mode count {n} outside 1..={MAX_MODES}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    n: usize,
    amplitudes: DVector<C64>,
}

impl FockVector {
    pub fn new(n: usize, amplitudes: Vec<C64>) -> Result<Self> {
        check_modes(n)?;
        if amplitudes.len() != 1 << n {
            return Err(Error::Size(format!(
                "expected {} amplitudes for {n} modes, got {}",
                1usize << n,
                amplitudes.len()
            )));
        }
        Ok(Self { n, amplitudes: DVector::from_vec(amplitudes) })
    }

    pub fn from_dvector(n: usize, amplitudes: DVector<C64>) -> Result<Self> {
        Self::new(n, amplitudes.iter().copied().collect())
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, vec![C64::new(0.0, 0.0); 1 << n])
    }

    /// Basis vector e_S for an occupation bitmask.
    pub fn basis(n: usize, mask: usize) -> Result<Self> {
        let mut v = Self::zero(n)?;
        if mask >= 1 << n {
            return Err(Error::Index(format!("bitmask {mask:#b} has bits beyond mode {n}")));
        }
        v.amplitudes[mask] = C64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn vacuum(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    /// e_{j1} ∧ … ∧ e_{jk} for the given (1-based, any order) modes,
    /// including the sign of reordering them ascending.
    pub fn wedge(n: usize, modes: &[usize]) -> Result<Self> {
        let mut v = Self::vacuum(n)?;
        for &j in modes.iter().rev() {
            v = ladder(j, LadderKind::Creation, n)?.apply(&v)?;
        }
        Ok(v)
    }

    /// The fully occupied state e_1 ∧ … ∧ e_n.
    pub fn top(n: usize) -> Result<Self> {
        Self::basis(n, (1 << n) - 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, mask: usize) -> C64 {
        self.amplitudes[mask]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { n: self.n, amplitudes: &self.amplitudes * s }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_modes(self, other)?;
        Ok(Self { n: self.n, amplitudes: &self.amplitudes + &other.amplitudes })
    }

    /// Applies a spin-representation operator.
    pub fn transform(&self, op: &OperatorMatrix) -> Result<Self> {
        if op.rep() != Rep::Spin || op.dim() != self.dim() {
            return Err(Error::Size(format!(
                "operator of dimension {} ({}) cannot act on Fock space of dimension {}",
                op.dim(),
                op.rep(),
                self.dim()
            )));
        }
        Ok(Self { n: self.n, amplitudes: op.matrix() * &self.amplitudes })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.amplitudes - &other.amplitudes).iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

fn same_modes(v: &FockVector, w: &FockVector) -> Result<()> {
    if v.n != w.n {
        return Err(Error::Size(format!("Fock vectors over {} and {} modes", v.n, w.n)));
    }
    Ok(())
}

/// Hermitian Fock inner product, conjugate-linear in the first argument.
pub fn fock_inner(v: &FockVector, w: &FockVector) -> Result<C64> {
    same_modes(v, w)?;
    Ok(v.amplitudes.dotc(&w.amplitudes))
}

/// The orthonormal occupation-number basis, indexed by bitmask.
#[derive(Clone, Debug)]
pub struct FockBasis {
    n: usize,
    vectors: Vec<FockVector>,
}

impl FockBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vacuum(&self) -> &FockVector {
        &self.vectors[0]
    }

    pub fn get(&self, mask: usize) -> Option<&FockVector> {
        self.vectors.get(mask)
    }

    pub fn iter(&self) -> impl Iterator<Item = &FockVector> {
        self.vectors.iter()
    }
}

pub fn make_fock_space(n: usize) -> Result<FockBasis> {
    check_modes(n)?;
    let vectors = (0..1usize << n).map(|mask| FockVector::basis(n, mask)).collect::<Result<_>>()?;
    Ok(FockBasis { n, vectors })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LadderKind {
    Creation,
    Annihilation,
}

#[derive(Clone, Debug)]
pub struct LadderOperator {
    mode: usize,
    kind: LadderKind,
    matrix: OperatorMatrix,
}

impl LadderOperator {
    pub fn mode(&self) -> usize {
        self.mode
    }

    pub fn kind(&self) -> LadderKind {
        self.kind
    }

    pub fn matrix(&self) -> &OperatorMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> OperatorMatrix {
        self.matrix
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        v.transform(&self.matrix)
    }
}

/// Sign picked up by `c_j†` acting on `e_S` (mode `j` is 1-based).
pub fn creation_sign(mask: usize, j: usize) -> f64 {
    let below = mask & ((1usize << (j - 1)) - 1);
    if below.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

pub fn ladder(j: usize, kind: LadderKind, n: usize) -> Result<LadderOperator> {
    check_modes(n)?;
    if j == 0 || j > n {
        return Err(Error::Index(format!("mode {j} outside 1..={n}")));
    }
    let d = 1usize << n;
    let bit = 1usize << (j - 1);
    let mut creation = CMatrix::zeros(d, d);
    for mask in (0..d).filter(|m| m & bit == 0) {
        creation[(mask | bit, mask)] = C64::new(creation_sign(mask, j), 0.0);
    }
    let mat = match kind {
        LadderKind::Creation => creation,
        LadderKind::Annihilation => creation.adjoint(),
    };
    Ok(LadderOperator { mode: j, kind, matrix: OperatorMatrix::new(Rep::Spin, mat) })
}

pub fn creation(j: usize, n: usize) -> Result<OperatorMatrix> {
    Ok(ladder(j, LadderKind::Creation, n)?.into_matrix())
}

pub fn annihilation(j: usize, n: usize) -> Result<OperatorMatrix> {
    Ok(ladder(j, LadderKind::Annihilation, n)?.into_matrix())
}

/// N_j = c_j† c_j.
pub fn number_operator(j: usize, n: usize) -> Result<OperatorMatrix> {
    Ok(&creation(j, n)? * &annihilation(j, n)?)
}

/// The free Hamiltonian Σ E_k c_k† c_k, diagonal in the occupation basis.
pub fn free_hamiltonian(energies: &[f64]) -> Result<OperatorMatrix> {
    let n = energies.len();
    check_modes(n)?;
    let d = 1usize << n;
    let diag = (0..d)
        .map(|mask| {
            let e: f64 = (0..n).filter(|k| mask & (1 << k) != 0).map(|k| energies[k]).sum();
            C64::new(e, 0.0)
        })
        .collect::<Vec<_>>();
    Ok(OperatorMatrix::new(Rep::Spin, CMatrix::from_diagonal(&DVector::from_vec(diag))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    /// Brute-force wedge oracle: e_j ∧ e_{s1} ∧ … sorted by adjacent swaps,
    /// each swap contributing a factor -1.
    fn wedge_oracle(mask: usize, j: usize, n: usize) -> Option<(usize, f64)> {
        let mut word: Vec<usize> = std::iter::once(j).chain((1..=n).filter(|i| mask & (1 << (i - 1)) != 0)).collect();
        let mut sign = 1.0;
        for a in 0..word.len() {
            for b in 0..word.len() - 1 - a {
                if word[b] == word[b + 1] {
                    return None;
                }
                if word[b] > word[b + 1] {
                    word.swap(b, b + 1);
                    sign = -sign;
                }
            }
        }
        if word.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some((mask | 1 << (j - 1), sign))
    }

    #[test]
    fn creation_matches_wedge_reordering_oracle() {
        for n in 1..=5 {
            for j in 1..=n {
                let cj = creation(j, n).unwrap();
                for mask in 0..1usize << n {
                    let col: Vec<C64> = (0..1 << n).map(|r| cj.get(r, mask)).collect();
                    match wedge_oracle(mask, j, n) {
                        None => assert!(col.iter().all(|z| *z == re(0.0))),
                        Some((target, sign)) => {
                            for (r, z) in col.iter().enumerate() {
                                let expected = if r == target { re(sign) } else { re(0.0) };
                                assert_eq!(*z, expected, "n={n} j={j} mask={mask:#b}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn single_mode_ladder_matrices() {
        let cd = creation(1, 1).unwrap();
        let a = annihilation(1, 1).unwrap();
        let expected_cd = CMatrix::from_row_slice(2, 2, &[re(0.0), re(0.0), re(1.0), re(0.0)]);
        let expected_a = CMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(0.0), re(0.0)]);
        assert_eq!(cd.matrix(), &expected_cd);
        assert_eq!(a.matrix(), &expected_a);
    }

    #[test]
    fn second_mode_creation_on_first_mode_picks_up_sign() {
        // c_2† e_1 = e_2 ∧ e_1 = -e_1 ∧ e_2
        let e1 = FockVector::basis(2, 0b01).unwrap();
        let out = ladder(2, LadderKind::Creation, 2).unwrap().apply(&e1).unwrap();
        assert_eq!(out.amplitude(0b11), re(-1.0));
        // and the ordered wedge constructor agrees
        let w = FockVector::wedge(2, &[2, 1]).unwrap();
        assert_eq!(w.amplitude(0b11), re(-1.0));
        assert_eq!(FockVector::wedge(2, &[1, 2]).unwrap(), FockVector::top(2).unwrap());
    }

    #[test]
    fn fock_space_dimensions_and_vacuum() {
        assert_eq!(make_fock_space(1).unwrap().dim(), 2);
        assert_eq!(make_fock_space(3).unwrap().dim(), 8);
        let basis = make_fock_space(2).unwrap();
        let vac = basis.vacuum();
        assert_eq!(vac.amplitude(0), re(1.0));
        assert!((1..4).all(|m| vac.amplitude(m) == re(0.0)));
        for v in basis.iter() {
            for w in basis.iter() {
                let expected = if v == w { re(1.0) } else { re(0.0) };
                assert_eq!(fock_inner(v, w).unwrap(), expected);
            }
        }
    }

    #[test]
    fn size_errors() {
        assert!(matches!(make_fock_space(0), Err(Error::Size(_))));
        assert!(matches!(make_fock_space(13), Err(Error::Size(_))));
        assert!(matches!(ladder(3, LadderKind::Creation, 2), Err(Error::Index(_))));
        assert!(matches!(ladder(0, LadderKind::Creation, 2), Err(Error::Index(_))));
        let a = FockVector::vacuum(1).unwrap();
        let b = FockVector::vacuum(2).unwrap();
        assert!(matches!(fock_inner(&a, &b), Err(Error::Size(_))));
        assert!(matches!(FockVector::new(2, vec![re(1.0); 3]), Err(Error::Size(_))));
    }

    #[test]
    fn inner_product_of_top_state_is_determinant_of_identity() {
        let top = FockVector::wedge(2, &[1, 2]).unwrap();
        assert_eq!(fock_inner(&top, &top).unwrap(), re(1.0));
        let e1 = FockVector::basis(2, 0b01).unwrap();
        let e2 = FockVector::basis(2, 0b10).unwrap();
        assert_eq!(fock_inner(&e1, &e2).unwrap(), re(0.0));
    }

    #[test]
    fn inner_product_is_conjugate_linear_in_first_slot() {
        let v = FockVector::new(1, vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.5)]).unwrap();
        let w = FockVector::new(1, vec![C64::new(1.0, -0.4), C64::new(0.7, 0.2)]).unwrap();
        let s = C64::new(0.0, 2.0);
        let lhs = fock_inner(&v.scale(s), &w).unwrap();
        let rhs = s.conj() * fock_inner(&v, &w).unwrap();
        assert!((lhs - rhs).norm() < 1e-15);
        assert!(fock_inner(&v, &v).unwrap().im.abs() < 1e-15);
    }

    #[test]
    fn car_and_nilpotency() {
        for n in 1..=4 {
            let d = 1 << n;
            let id = OperatorMatrix::identity(Rep::Spin, n);
            for j in 1..=n {
                let cj = annihilation(j, n).unwrap();
                let cdj = creation(j, n).unwrap();
                assert_eq!(cdj, cj.adjoint());
                assert_eq!((&cj * &cj).max_abs(), 0.0);
                assert_eq!((&cdj * &cdj).max_abs(), 0.0);
                let nonzero = cdj.matrix().iter().filter(|z| z.norm() != 0.0).count();
                assert_eq!(nonzero, d / 2);
                assert!(cdj.matrix().iter().all(|z| *z == re(0.0) || *z == re(1.0) || *z == re(-1.0)));
                for k in 1..=n {
                    let ck = annihilation(k, n).unwrap();
                    let cdk = creation(k, n).unwrap();
                    let expected = if j == k { id.clone() } else { OperatorMatrix::zeros(Rep::Spin, n) };
                    assert_eq!(cj.anticommutator(&cdk), expected);
                    assert_eq!(cj.anticommutator(&ck).max_abs(), 0.0);
                    assert_eq!(cdj.anticommutator(&cdk).max_abs(), 0.0);
                }
            }
        }
    }

    #[test]
    fn free_hamiltonian_is_sum_of_number_operators() {
        let energies = [1.0, 2.5, 4.0];
        let h = free_hamiltonian(&energies).unwrap();
        let mut acc = OperatorMatrix::zeros(Rep::Spin, 3);
        for (k, e) in energies.iter().enumerate() {
            acc = &acc + &number_operator(k + 1, 3).unwrap().scale(re(*e));
        }
        assert!(h.max_abs_diff(&acc) < 1e-15);
    }
}
