//! The Lie algebra so(2n+1, C) in the standard basis `X_{jk} = e_j ⊗ e_k - e_k ⊗ e_j`
//! (1 ≤ j < k ≤ 2n+1), together with its defining and half-spin
//! representations.
//!
//! The half-spin representation sends `X_{ℓ,2n+1} ↦ ½γ_ℓ` and
//! `X_{jℓ} ↦ -½γ_jγ_ℓ` for `j < ℓ ≤ 2n`. The minus sign on the quadratic
//! generators is what makes the map a homomorphism for the bracket
//! `[X_{ri}, X_{sj}] = δ_{is}X_{rj} + δ_{rj}X_{is} - δ_{ij}X_{rs} - δ_{rs}X_{ij}`;
//! with it `E_j = X_{2j-1,2n+1} + iX_{2j,2n+1}` still maps to `c_j†`.

use std::collections::BTreeMap;
use std::fmt;

use crate::clifford::CliffordGenerators;
use crate::error::{Error, Result};
use crate::fock::{check_modes, fock_inner, FockVector};
use crate::matrix::{CMatrix, OperatorMatrix, Rep, C64, I};

/// Index pair (j, k) of a basis element X_{jk}, always stored with j < k.
/// The derived order is lexicographic on (j, k).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisIndex {
    j: usize,
    k: usize,
}

impl BasisIndex {
    pub fn new(j: usize, k: usize, n: usize) -> Result<Self> {
        let top = 2 * n + 1;
        if j == 0 || k > top || j >= k {
            return Err(Error::Index(format!("X_({j},{k}) requires 1 <= j < k <= {top}")));
        }
        Ok(Self { j, k })
    }

    /// Normalizes a possibly reversed pair: X_{kj} = -X_{jk}, X_{jj} = 0.
    pub fn oriented(p: usize, q: usize) -> Option<(i64, Self)> {
        match p.cmp(&q) {
            std::cmp::Ordering::Less => Some((1, Self { j: p, k: q })),
            std::cmp::Ordering::Greater => Some((-1, Self { j: q, k: p })),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn j(self) -> usize {
        self.j
    }

    pub fn k(self) -> usize {
        self.k
    }
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X_{{{},{}}}", self.j, self.k)
    }
}

/// All basis indices of so(2n+1) in lexicographic order.
pub fn basis(n: usize) -> Vec<BasisIndex> {
    let top = 2 * n + 1;
    (1..=top).flat_map(|j| (j + 1..=top).map(move |k| BasisIndex { j, k })).collect()
}

/// Integer structure constants: [X_a, X_b] as a combination of basis elements.
pub type StructureConstants = fn(BasisIndex, BasisIndex) -> Vec<(i64, BasisIndex)>;

pub fn basis_bracket(a: BasisIndex, b: BasisIndex) -> Vec<(i64, BasisIndex)> {
    let (r, i) = (a.j, a.k);
    let (s, j) = (b.j, b.k);
    let candidates = [(i == s, 1, r, j), (r == j, 1, i, s), (i == j, -1, r, s), (r == s, -1, i, j)];
    let mut acc: BTreeMap<BasisIndex, i64> = BTreeMap::new();
    for (hit, sign, p, q) in candidates {
        if !hit {
            continue;
        }
        if let Some((orient, idx)) = BasisIndex::oriented(p, q) {
            *acc.entry(idx).or_default() += sign * orient;
        }
    }
    acc.into_iter().filter(|(_, c)| *c != 0).map(|(idx, c)| (c, idx)).collect()
}

/// Sparse complex combination of basis elements; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    n: usize,
    coefficients: BTreeMap<BasisIndex, C64>,
}

impl AlgebraElement {
    pub fn zero(n: usize) -> Self {
        Self { n, coefficients: BTreeMap::new() }
    }

    /// X_{jk}; reversed indices normalize to -X_{kj}.
    pub fn basis_element(j: usize, k: usize, n: usize) -> Result<Self> {
        let (sign, idx) = BasisIndex::oriented(j, k).ok_or_else(|| Error::Index(format!("X_({j},{j}) is not a basis element")))?;
        let idx = BasisIndex::new(idx.j, idx.k, n)?;
        let mut out = Self::zero(n);
        out.add_term(idx, C64::new(sign as f64, 0.0));
        Ok(out)
    }

    pub fn from_index(idx: BasisIndex, n: usize) -> Self {
        let mut out = Self::zero(n);
        out.add_term(idx, C64::new(1.0, 0.0));
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficient(&self, idx: BasisIndex) -> C64 {
        self.coefficients.get(&idx).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (BasisIndex, C64)> + '_ {
        self.coefficients.iter().map(|(k, v)| (*k, *v))
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// True when every coefficient is real, i.e. the element lies in so(2n+1).
    pub fn is_real(&self) -> bool {
        self.coefficients.values().all(|c| c.im == 0.0)
    }

    pub fn add_term(&mut self, idx: BasisIndex, c: C64) {
        let entry = self.coefficients.entry(idx).or_default();
        *entry += c;
        if *entry == C64::default() {
            self.coefficients.remove(&idx);
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = Self::zero(self.n);
        for (idx, c) in self.terms() {
            out.add_term(idx, c * s);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_rank(self.n, other.n)?;
        let mut out = self.clone();
        for (idx, c) in other.terms() {
            out.add_term(idx, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let keys: std::collections::BTreeSet<_> = self.coefficients.keys().chain(other.coefficients.keys()).collect();
        keys.into_iter().map(|k| (self.coefficient(*k) - other.coefficient(*k)).norm()).fold(0.0, f64::max)
    }
}

fn same_rank(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Size(format!("elements of so({}) and so({})", 2 * a + 1, 2 * b + 1)));
    }
    Ok(())
}

pub fn bracket(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    bracket_with(a, b, basis_bracket)
}

pub fn bracket_with(a: &AlgebraElement, b: &AlgebraElement, constants: StructureConstants) -> Result<AlgebraElement> {
    same_rank(a.n, b.n)?;
    let mut out = AlgebraElement::zero(a.n);
    for (ia, ca) in a.terms() {
        for (ib, cb) in b.terms() {
            for (s, idx) in constants(ia, ib) {
                out.add_term(idx, ca * cb * s as f64);
            }
        }
    }
    Ok(out)
}

/// Real antisymmetric (2n+1)×(2n+1) matrix of X_{jk}: +1 at (j,k), -1 at (k,j).
pub fn basis_matrix_defining(j: usize, k: usize, n: usize) -> Result<OperatorMatrix> {
    let idx = BasisIndex::new(j, k, n)?;
    Ok(defining_image(idx, n))
}

fn defining_image(idx: BasisIndex, n: usize) -> OperatorMatrix {
    let d = 2 * n + 1;
    let mut m = CMatrix::zeros(d, d);
    m[(idx.j - 1, idx.k - 1)] = C64::new(1.0, 0.0);
    m[(idx.k - 1, idx.j - 1)] = C64::new(-1.0, 0.0);
    OperatorMatrix::new(Rep::Defining, m)
}

/// A linear representation of so(2n+1, C), either defining or half-spin.
#[derive(Clone, Debug)]
pub struct Representation {
    rep: Rep,
    n: usize,
    gammas: Option<CliffordGenerators>,
}

impl Representation {
    pub fn new(rep: Rep, n: usize) -> Result<Self> {
        check_modes(n)?;
        let gammas = match rep {
            Rep::Spin => Some(CliffordGenerators::new(n)?),
            Rep::Defining => None,
        };
        Ok(Self { rep, n, gammas })
    }

    pub fn spin(n: usize) -> Result<Self> {
        Self::new(Rep::Spin, n)
    }

    pub fn defining(n: usize) -> Result<Self> {
        Self::new(Rep::Defining, n)
    }

    pub fn rep(&self) -> Rep {
        self.rep
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis_image(&self, idx: BasisIndex) -> OperatorMatrix {
        match &self.gammas {
            None => defining_image(idx, self.n),
            Some(g) => {
                let half = C64::new(0.5, 0.0);
                if idx.k == 2 * self.n + 1 {
                    g.get(idx.j).scale(half)
                } else {
                    (g.get(idx.j) * g.get(idx.k)).scale(-half)
                }
            }
        }
    }

    pub fn apply(&self, a: &AlgebraElement) -> Result<OperatorMatrix> {
        same_rank(self.n, a.n)?;
        let mut acc = OperatorMatrix::zeros(self.rep, self.n);
        for (idx, c) in a.terms() {
            acc = &acc + &self.basis_image(idx).scale(c);
        }
        Ok(acc)
    }
}

/// Half-spin image of an algebra element.
pub fn spin_rep(a: &AlgebraElement) -> Result<OperatorMatrix> {
    Representation::spin(a.n)?.apply(a)
}

/// E_j for j > 0 and E_{-|j|} for j < 0:
/// `E_j = X_{2j-1,2n+1} + iX_{2j,2n+1}`, `E_{-j} = -X_{2j-1,2n+1} + iX_{2j,2n+1}`.
pub fn ladder_element(j: i64, n: usize) -> Result<AlgebraElement> {
    let m = j.unsigned_abs() as usize;
    if m == 0 || m > n {
        return Err(Error::Index(format!("ladder index {j} requires 1 <= |j| <= {n}")));
    }
    let top = 2 * n + 1;
    let sign = if j > 0 { 1.0 } else { -1.0 };
    let mut e = AlgebraElement::zero(n);
    e.add_term(BasisIndex::new(2 * m - 1, top, n)?, C64::new(sign, 0.0));
    e.add_term(BasisIndex::new(2 * m, top, n)?, I);
    Ok(e)
}

/// H_j = ½[E_j, E_{-j}] = -i X_{2j-1,2j}.
pub fn cartan_element(j: usize, n: usize) -> Result<AlgebraElement> {
    if j == 0 || j > n {
        return Err(Error::Index(format!("Cartan index {j} outside 1..={n}")));
    }
    Ok(AlgebraElement::basis_element(2 * j - 1, 2 * j, n)?.scale(-I))
}

/// Reads off the weight (eigenvalues of every spin_rep(H_j)) of a simultaneous eigenvector.
pub fn weight_of(v: &FockVector) -> Result<Vec<f64>> {
    const TOL: f64 = 1e-10;
    let n = v.n();
    let norm_sqr = v.norm_sqr();
    if norm_sqr == 0.0 {
        return Err(Error::NotWeightVector("zero vector".into()));
    }
    let rep = Representation::spin(n)?;
    (1..=n)
        .map(|j| {
            let hv = v.transform(&rep.apply(&cartan_element(j, n)?)?)?;
            let lambda = fock_inner(v, &hv)? / norm_sqr;
            let residual = hv.max_abs_diff(&v.scale(lambda));
            if residual > TOL || lambda.im.abs() > TOL {
                return Err(Error::NotWeightVector(format!("H_{j} residual {residual:.3e}")));
            }
            Ok(lambda.re)
        })
        .collect()
}

/// Dimension of the span of all products of at most `max_len` spin-rep basis
/// images (the empty product is the identity).
pub fn generated_algebra_dimension(n: usize, max_len: usize) -> Result<usize> {
    let rep = Representation::spin(n)?;
    let gens: Vec<CMatrix> = basis(n).into_iter().map(|b| rep.basis_image(b).into_matrix()).collect();
    let d = 1usize << n;
    let mut span = SpanBuilder::default();
    let mut frontier = vec![CMatrix::identity(d, d)];
    span.insert(&frontier[0]);
    for _ in 0..max_len {
        let mut next = Vec::new();
        for m in &frontier {
            for g in &gens {
                let prod = m * g;
                if span.insert(&prod) {
                    next.push(prod);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(span.rank())
}

#[derive(Default)]
struct SpanBuilder {
    basis: Vec<Vec<C64>>,
}

impl SpanBuilder {
    fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Modified Gram-Schmidt; returns true when `m` enlarges the span.
    fn insert(&mut self, m: &CMatrix) -> bool {
        let mut v: Vec<C64> = m.iter().copied().collect();
        for _ in 0..2 {
            for b in &self.basis {
                let proj: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                v.iter_mut().zip(b).for_each(|(y, x)| *y -= proj * x);
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-9 {
            return false;
        }
        v.iter_mut().for_each(|z| *z /= norm);
        self.basis.push(v);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::gamma;
    use crate::fock::{annihilation, creation};

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn x(j: usize, k: usize, n: usize) -> AlgebraElement {
        AlgebraElement::basis_element(j, k, n).unwrap()
    }

    #[test]
    fn basis_bracket_examples() {
        assert_eq!(bracket(&x(1, 2, 1), &x(2, 3, 1)).unwrap(), x(1, 3, 1));
        assert!(bracket(&x(1, 2, 2), &x(3, 4, 2)).unwrap().is_zero());
        assert_eq!(bracket(&x(1, 3, 1), &x(2, 3, 1)).unwrap(), x(1, 2, 1).scale(re(-1.0)));
    }

    #[test]
    fn reversed_indices_normalize() {
        assert_eq!(x(3, 1, 1), x(1, 3, 1).scale(re(-1.0)));
        assert!(matches!(AlgebraElement::basis_element(2, 2, 1), Err(Error::Index(_))));
        assert!(matches!(AlgebraElement::basis_element(1, 4, 1), Err(Error::Index(_))));
    }

    #[test]
    fn defining_matrices() {
        let m = basis_matrix_defining(1, 2, 1).unwrap();
        assert_eq!(m.get(0, 1), re(1.0));
        assert_eq!(m.get(1, 0), re(-1.0));
        assert_eq!(m.matrix().iter().filter(|z| z.norm() != 0.0).count(), 2);
        assert!(matches!(basis_matrix_defining(2, 1, 1), Err(Error::Index(_))));
        for n in 1..=3 {
            let top = 2 * n + 1;
            for a in 1..=2 * n {
                for b in 1..=2 * n {
                    let xa = basis_matrix_defining(a, top, n).unwrap();
                    let xb = basis_matrix_defining(b, top, n).unwrap();
                    let expected = if a == b { -2.0 } else { 0.0 };
                    assert_eq!((&xa * &xb).trace(), re(expected));
                }
            }
        }
    }

    #[test]
    fn homomorphism_on_all_basis_pairs() {
        for n in 1..=3 {
            for rep in [Rep::Spin, Rep::Defining] {
                let r = Representation::new(rep, n).unwrap();
                for a in basis(n) {
                    for b in basis(n) {
                        let xa = AlgebraElement::from_index(a, n);
                        let xb = AlgebraElement::from_index(b, n);
                        let lhs = r.apply(&bracket(&xa, &xb).unwrap()).unwrap();
                        let rhs = r.basis_image(a).commutator(&r.basis_image(b));
                        assert!(lhs.max_abs_diff(&rhs) < 1e-12, "{rep} n={n} [{a},{b}]");
                    }
                }
            }
        }
    }

    #[test]
    fn spin_images_for_single_mode() {
        let half = re(0.5);
        let s13 = spin_rep(&x(1, 3, 1)).unwrap();
        assert_eq!(s13, gamma(1, 1).unwrap().scale(half));
        let s12 = spin_rep(&x(1, 2, 1)).unwrap();
        assert_eq!(s12.get(0, 0), C64::new(0.0, -0.5));
        assert_eq!(s12.get(1, 1), C64::new(0.0, 0.5));
        let h1 = spin_rep(&cartan_element(1, 1).unwrap()).unwrap();
        assert_eq!(h1.get(0, 0), re(-0.5));
        assert_eq!(h1.get(1, 1), re(0.5));
    }

    #[test]
    fn ladder_elements_map_to_fock_ladders() {
        for n in 1..=3 {
            for j in 1..=n {
                let ej = ladder_element(j as i64, n).unwrap();
                let emj = ladder_element(-(j as i64), n).unwrap();
                assert!(spin_rep(&ej).unwrap().max_abs_diff(&creation(j, n).unwrap()) < 1e-15);
                assert!(spin_rep(&emj).unwrap().max_abs_diff(&annihilation(j, n).unwrap()) < 1e-15);
                let sum = ej.add(&emj).unwrap();
                assert_eq!(sum, x(2 * j, 2 * n + 1, n).scale(C64::new(0.0, 2.0)));
                let half_bracket = bracket(&ej, &emj).unwrap().scale(half());
                assert_eq!(half_bracket, cartan_element(j, n).unwrap());
            }
        }
        assert!(matches!(ladder_element(0, 2), Err(Error::Index(_))));
        assert!(matches!(ladder_element(-3, 2), Err(Error::Index(_))));
    }

    fn half() -> C64 {
        re(0.5)
    }

    #[test]
    fn weights_of_extreme_vectors() {
        for n in 1..=4 {
            let low = weight_of(&FockVector::vacuum(n).unwrap()).unwrap();
            assert!(low.iter().all(|w| (*w + 0.5).abs() < 1e-14));
            let high = weight_of(&FockVector::top(n).unwrap()).unwrap();
            assert!(high.iter().all(|w| (*w - 0.5).abs() < 1e-14));
        }
        let w = weight_of(&FockVector::basis(3, 0b101).unwrap()).unwrap();
        assert_eq!(w, vec![0.5, -0.5, 0.5]);
        let mixed = FockVector::vacuum(2).unwrap().add(&FockVector::top(2).unwrap()).unwrap();
        assert!(matches!(weight_of(&mixed), Err(Error::NotWeightVector(_))));
    }

    #[test]
    fn real_elements_are_anti_hermitian_in_spin_rep() {
        let n = 2;
        let mut a = AlgebraElement::zero(n);
        for (t, idx) in basis(n).into_iter().enumerate() {
            a.add_term(idx, re(0.3 * t as f64 - 1.1));
        }
        assert!(a.is_real());
        assert!(spin_rep(&a).unwrap().anti_hermiticity_defect() < 1e-14);
    }

    #[test]
    fn spin_rep_generates_full_matrix_algebra() {
        for n in 1..=3 {
            assert_eq!(generated_algebra_dimension(n, 2 * n + 1).unwrap(), 1 << (2 * n));
        }
    }

    #[test]
    fn bracket_is_antisymmetric_and_bilinear() {
        let n = 2;
        let a = x(1, 3, n).add(&x(2, 5, n).scale(C64::new(0.5, -1.0))).unwrap();
        let b = x(1, 2, n).add(&x(3, 5, n).scale(re(2.0))).unwrap();
        assert!(bracket(&a, &a).unwrap().is_zero());
        let ab = bracket(&a, &b).unwrap();
        let ba = bracket(&b, &a).unwrap();
        assert!(ab.add(&ba).unwrap().max_abs_diff(&AlgebraElement::zero(n)) < 1e-15);
        assert!(matches!(bracket(&x(1, 2, 1), &x(1, 2, 2)), Err(Error::Size(_))));
    }
}
