//! Exact PBW normal ordering in the universal enveloping algebra U(so(2n+1, C)).
//!
//! Polynomials are sums of words in basis symbols with Gaussian-rational
//! coefficients. Normal form orders every word non-decreasingly by the
//! lexicographic order on (j, k), rewriting descents with
//! `ab = ba + [a, b]` until no descent remains. Zero tests are exact.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{OperatorMatrix, C64};
use crate::so_algebra::{basis_bracket, BasisIndex, Representation, StructureConstants};

/// Exact Gaussian rational a + bi with a, b ∈ Q.
pub type Coefficient = Complex<BigRational>;
pub type Word = Vec<BasisIndex>;

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn gaussian(re: BigRational, im: BigRational) -> Coefficient {
    Complex::new(re, im)
}

pub fn integer(v: i64) -> Coefficient {
    gaussian(rational(v, 1), BigRational::zero())
}

pub fn imaginary_unit() -> Coefficient {
    gaussian(BigRational::zero(), BigRational::one())
}

fn to_c64(c: &Coefficient) -> C64 {
    C64::new(c.re.to_f64().unwrap_or(f64::NAN), c.im.to_f64().unwrap_or(f64::NAN))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UeaPolynomial {
    n: usize,
    terms: BTreeMap<Word, Coefficient>,
}

impl UeaPolynomial {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn one(n: usize) -> Self {
        let mut p = Self::zero(n);
        p.add_term(Vec::new(), integer(1));
        p
    }

    pub fn generator(idx: BasisIndex, n: usize) -> Self {
        Self::monomial(vec![idx], integer(1), n)
    }

    /// X_{jk} as a polynomial; reversed indices give -X_{kj}.
    pub fn basis_element(j: usize, k: usize, n: usize) -> Result<Self> {
        let (sign, idx) = BasisIndex::oriented(j, k).ok_or_else(|| Error::Index(format!("X_({j},{j}) is not a basis element")))?;
        let idx = BasisIndex::new(idx.j(), idx.k(), n)?;
        Ok(Self::monomial(vec![idx], integer(sign), n))
    }

    pub fn monomial(word: Word, c: Coefficient, n: usize) -> Self {
        let mut p = Self::zero(n);
        p.add_term(word, c);
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Coefficient)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, word: &[BasisIndex]) -> Coefficient {
        self.terms.get(word).cloned().unwrap_or_else(Coefficient::zero)
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_normal_form(&self) -> bool {
        self.terms.keys().all(|w| is_sorted(w))
    }

    pub fn add_term(&mut self, word: Word, c: Coefficient) {
        add_into(&mut self.terms, word, c);
    }

    pub fn scale(&self, s: &Coefficient) -> Self {
        let mut out = Self::zero(self.n);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c * s);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_rank(self.n, other.n)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&integer(-1)))
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        uea_multiply(self, other)?.sub(&uea_multiply(other, self)?)
    }
}

impl fmt::Display for UeaPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({} + {}i)", c.re, c.im)?;
            for s in w {
                write!(f, "·{s}")?;
            }
        }
        Ok(())
    }
}

fn add_into(terms: &mut BTreeMap<Word, Coefficient>, word: Word, c: Coefficient) {
    if c.is_zero() {
        return;
    }
    match terms.entry(word) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let sum = e.get() + c;
            if sum.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = sum;
            }
        }
    }
}

fn is_sorted(w: &[BasisIndex]) -> bool {
    w.windows(2).all(|p| p[0] <= p[1])
}

fn same_rank(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Size(format!("polynomials over so({}) and so({})", 2 * a + 1, 2 * b + 1)));
    }
    Ok(())
}

/// Free-algebra product: concatenation of words, bilinear in coefficients.
pub fn uea_multiply(p: &UeaPolynomial, q: &UeaPolynomial) -> Result<UeaPolynomial> {
    same_rank(p.n, q.n)?;
    let mut out = UeaPolynomial::zero(p.n);
    for (wp, cp) in &p.terms {
        for (wq, cq) in &q.terms {
            let mut w = wp.clone();
            w.extend_from_slice(wq);
            out.add_term(w, cp * cq);
        }
    }
    Ok(out)
}

/// Strategy for picking which pending word and which descent to rewrite next.
#[derive(Clone, Copy, Debug)]
pub enum RewriteOrder {
    /// Smallest pending word, leftmost descent.
    Leftmost,
    /// Uniformly random pending word and descent from a seeded stream.
    Random(u64),
}

pub fn pbw_normalize(p: &UeaPolynomial) -> UeaPolynomial {
    pbw_normalize_with(p, RewriteOrder::Leftmost, basis_bracket)
}

pub fn pbw_normalize_with(p: &UeaPolynomial, order: RewriteOrder, constants: StructureConstants) -> UeaPolynomial {
    let mut rng = match order {
        RewriteOrder::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        RewriteOrder::Leftmost => None,
    };
    let mut pending = p.terms.clone();
    let mut done: BTreeMap<Word, Coefficient> = BTreeMap::new();
    while !pending.is_empty() {
        let word = match rng.as_mut() {
            None => pending.keys().next().cloned(),
            Some(r) => {
                let pick = r.random_range(0..pending.len());
                pending.keys().nth(pick).cloned()
            }
        }
        .expect("pending is non-empty");
        let c = pending.remove(&word).expect("picked word is pending");
        let descents: Vec<usize> = (0..word.len().saturating_sub(1)).filter(|&i| word[i] > word[i + 1]).collect();
        if descents.is_empty() {
            add_into(&mut done, word, c);
            continue;
        }
        let at = match rng.as_mut() {
            None => descents[0],
            Some(r) => descents[r.random_range(0..descents.len())],
        };
        let (a, b) = (word[at], word[at + 1]);
        let mut swapped = word.clone();
        swapped.swap(at, at + 1);
        add_into(&mut pending, swapped, c.clone());
        for (s, idx) in constants(a, b) {
            let mut shorter = Vec::with_capacity(word.len() - 1);
            shorter.extend_from_slice(&word[..at]);
            shorter.push(idx);
            shorter.extend_from_slice(&word[at + 2..]);
            add_into(&mut pending, shorter, &c * integer(s));
        }
    }
    UeaPolynomial { n: p.n, terms: done }
}

/// L^U_ℓ = (X_{2ℓ-1,2n+1})² + (X_{2ℓ,2n+1})².
pub fn l_u(l: usize, n: usize) -> Result<UeaPolynomial> {
    check_mode(l, n)?;
    let top = 2 * n + 1;
    let a = UeaPolynomial::basis_element(2 * l - 1, top, n)?;
    let b = UeaPolynomial::basis_element(2 * l, top, n)?;
    uea_multiply(&a, &a)?.add(&uea_multiply(&b, &b)?)
}

/// T^U_k = [X_{2k-1,2n+1}, X_{2k,2n+1}] = -X_{2k-1,2k}.
pub fn t_u(k: usize, n: usize) -> Result<UeaPolynomial> {
    check_mode(k, n)?;
    UeaPolynomial::basis_element(2 * k, 2 * k - 1, n)
}

fn check_mode(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::Index(format!("mode {k} outside 1..={n}")));
    }
    Ok(())
}

/// Normal form of [L^U_ℓ, X_{2k-1,2k}].
pub fn commutator_lu(l: usize, k: usize, n: usize) -> Result<UeaPolynomial> {
    check_mode(k, n)?;
    let x = UeaPolynomial::basis_element(2 * k - 1, 2 * k, n)?;
    Ok(pbw_normalize(&l_u(l, n)?.commutator(&x)?))
}

/// True iff XY - YX normalizes to the zero polynomial.
pub fn uea_commuting_pair_check(x: &UeaPolynomial, y: &UeaPolynomial) -> Result<bool> {
    Ok(pbw_normalize(&x.commutator(y)?).is_zero())
}

/// Enveloping-algebra lifts of the quasi-Hamiltonian and its two parts for
/// rational energies: `H̃ = Σ E_k E_k E_{-k}`, `P₀ = -Σ E_k L_k`, `B₀ = Σ E_k T_k`.
#[derive(Clone, Debug)]
pub struct QuasiHamiltonianU {
    pub h_tilde: UeaPolynomial,
    pub p0: UeaPolynomial,
    pub b0: UeaPolynomial,
}

pub fn quasi_hamiltonian_u(energies: &[BigRational]) -> Result<QuasiHamiltonianU> {
    let n = energies.len();
    if n == 0 {
        return Err(Error::Size("no energies".into()));
    }
    let top = 2 * n + 1;
    let i = imaginary_unit();
    let mut h = UeaPolynomial::zero(n);
    let mut p0 = UeaPolynomial::zero(n);
    let mut b0 = UeaPolynomial::zero(n);
    for (k0, e) in energies.iter().enumerate() {
        let k = k0 + 1;
        let e = gaussian(e.clone(), BigRational::zero());
        let a = UeaPolynomial::basis_element(2 * k - 1, top, n)?;
        let b = UeaPolynomial::basis_element(2 * k, top, n)?;
        let plus = a.add(&b.scale(&i))?;
        let minus = a.scale(&integer(-1)).add(&b.scale(&i))?;
        h = h.add(&uea_multiply(&plus, &minus)?.scale(&e))?;
        p0 = p0.sub(&l_u(k, n)?.scale(&e))?;
        b0 = b0.add(&t_u(k, n)?.scale(&e))?;
    }
    Ok(QuasiHamiltonianU { h_tilde: h, p0, b0 })
}

/// Image of a polynomial under a representation extended multiplicatively to words.
pub fn represent(p: &UeaPolynomial, rep: &Representation) -> Result<OperatorMatrix> {
    same_rank(p.n, rep.n())?;
    let mut acc = OperatorMatrix::zeros(rep.rep(), p.n);
    let id = OperatorMatrix::identity(rep.rep(), p.n);
    for (w, c) in &p.terms {
        let prod = w.iter().fold(id.clone(), |m, s| &m * &rep.basis_image(*s));
        acc = &acc + &prod.scale(to_c64(c));
    }
    Ok(acc)
}

pub fn spin_rep_polynomial(p: &UeaPolynomial) -> Result<OperatorMatrix> {
    represent(p, &Representation::spin(p.n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Rep;
    use crate::so_algebra::basis;
    use proptest::prelude::{prop_assert_eq, proptest};

    fn x(j: usize, k: usize, n: usize) -> UeaPolynomial {
        UeaPolynomial::basis_element(j, k, n).unwrap()
    }

    fn mul(p: &UeaPolynomial, q: &UeaPolynomial) -> UeaPolynomial {
        uea_multiply(p, q).unwrap()
    }

    #[test]
    fn multiplication_unit_and_distributivity() {
        let n = 1;
        assert_eq!(mul(&x(1, 2, n), &UeaPolynomial::one(n)), x(1, 2, n));
        let lhs = mul(&x(1, 2, n).add(&x(1, 3, n)).unwrap(), &x(1, 2, n));
        let rhs = mul(&x(1, 2, n), &x(1, 2, n)).add(&mul(&x(1, 3, n), &x(1, 2, n))).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(lhs.len(), 2);
    }

    #[test]
    fn single_swap_picks_up_bracket() {
        let n = 1;
        let p = mul(&x(2, 3, n), &x(1, 2, n));
        let expected = mul(&x(1, 2, n), &x(2, 3, n)).sub(&x(1, 3, n)).unwrap();
        assert_eq!(pbw_normalize(&p), expected);
    }

    #[test]
    fn sorted_words_are_fixed_points() {
        let n = 1;
        let sq = mul(&x(1, 2, n), &x(1, 2, n));
        assert_eq!(pbw_normalize(&sq), sq);
        let sorted = mul(&x(1, 2, n), &x(2, 3, n));
        assert_eq!(pbw_normalize(&sorted), sorted);
        assert!(pbw_normalize(&UeaPolynomial::zero(n)).is_zero());
    }

    #[test]
    fn cartan_commutes_with_l_u_for_all_modes() {
        for n in 1..=3 {
            for l in 1..=n {
                for k in 1..=n {
                    assert!(commutator_lu(l, k, n).unwrap().is_zero(), "n={n} l={l} k={k}");
                }
            }
        }
    }

    #[test]
    fn commuting_pair_examples() {
        let n = 2;
        assert!(uea_commuting_pair_check(&x(1, 2, n), &x(3, 4, n)).unwrap());
        assert!(!uea_commuting_pair_check(&x(1, 2, n), &x(1, 3, n)).unwrap());
        let parts = quasi_hamiltonian_u(&[rational(1, 1), rational(2, 1)]).unwrap();
        assert!(uea_commuting_pair_check(&parts.p0, &parts.b0).unwrap());
    }

    #[test]
    fn quasi_hamiltonian_decomposes_exactly() {
        for energies in [vec![rational(1, 1)], vec![rational(1, 1), rational(2, 1)], vec![rational(1, 3), rational(3, 2), rational(5, 2)]] {
            let parts = quasi_hamiltonian_u(&energies).unwrap();
            let rhs = parts.p0.add(&parts.b0.scale(&imaginary_unit())).unwrap();
            assert!(pbw_normalize(&parts.h_tilde.sub(&rhs).unwrap()).is_zero());
        }
    }

    #[test]
    fn l_u_is_not_trivially_central() {
        // [L_1, X_{13}] is nonzero, so the vanishing above is not vacuous.
        let n = 1;
        let p = pbw_normalize(&l_u(1, n).unwrap().commutator(&x(1, 3, n)).unwrap());
        assert!(!p.is_zero());
    }

    fn random_polynomial(seed: u64, n: usize) -> UeaPolynomial {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let symbols = basis(n);
        let mut p = UeaPolynomial::zero(n);
        for _ in 0..rng.random_range(1..5) {
            let len = rng.random_range(0..=3);
            let word: Word = (0..len).map(|_| symbols[rng.random_range(0..symbols.len())]).collect();
            let c = gaussian(rational(rng.random_range(-5..=5), rng.random_range(1..4)), rational(rng.random_range(-3..=3), 1));
            p.add_term(word, c);
        }
        p
    }

    #[test]
    fn confluence_under_random_rewrite_orders() {
        for case in 0..100u64 {
            let n = 1 + (case % 3) as usize;
            let p = random_polynomial(case, n);
            let canonical = pbw_normalize(&p);
            assert!(canonical.is_normal_form());
            for order_seed in 0..3 {
                let other = pbw_normalize_with(&p, RewriteOrder::Random(case * 31 + order_seed), basis_bracket);
                assert_eq!(canonical, other, "case {case}");
            }
            assert_eq!(pbw_normalize(&canonical), canonical);
        }
    }

    #[test]
    fn normal_form_preserves_spin_and_defining_images() {
        for case in 0..40u64 {
            let n = 1 + (case % 2) as usize;
            let p = random_polynomial(1000 + case, n);
            let q = pbw_normalize(&p);
            for rep in [Rep::Spin, Rep::Defining] {
                let r = Representation::new(rep, n).unwrap();
                let d = represent(&p, &r).unwrap().max_abs_diff(&represent(&q, &r).unwrap());
                assert!(d < 1e-12, "case {case} {rep}: {d}");
            }
        }
    }

    proptest! {
        #[test]
        fn multiplication_is_associative(a in 0u64..500, b in 500u64..1000, c in 1000u64..1500) {
            let n = 2;
            let (p, q, r) = (random_polynomial(a, n), random_polynomial(b, n), random_polynomial(c, n));
            prop_assert_eq!(mul(&mul(&p, &q), &r), mul(&p, &mul(&q, &r)));
        }
    }
}
