//! The quasi-Hamiltonian `H̃ = Σ_k E_k D_k⁺ D_k⁻` in a finite representation,
//! its split `H̃ = P₀ + iB₀` into a second-order part `P₀ = -Σ E_k L_k` and a
//! first-order part `B₀ = Σ E_k T_k`, and exact matrix semigroups.
//!
//! Here `D_{jk}` is the image of `X_{jk}`, `L_k = D_{2k-1,2n+1}² + D_{2k,2n+1}²`
//! and `T_k = [D_{2k-1,2n+1}, D_{2k,2n+1}] = -D_{2k-1,2k}`.

use crate::error::{Error, Result};
use crate::fock::MAX_MODES;
use crate::matrix::{hermitian_eigen, hermitian_function, OperatorMatrix, Rep, C64, I};
use crate::so_algebra::{ladder_element, AlgebraElement, BasisIndex, Representation};

const HERMITIAN_TOL: f64 = 1e-10;

/// Mode energies `0 < E_1 ≤ … ≤ E_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSpec {
    energies: Vec<f64>,
}

impl HamiltonianSpec {
    pub fn new(energies: Vec<f64>) -> Result<Self> {
        if energies.is_empty() || energies.len() > MAX_MODES {
            return Err(Error::Size(format!("need 1..={MAX_MODES} energies, got {}", energies.len())));
        }
        if energies.iter().any(|e| !e.is_finite() || *e <= 0.0) {
            return Err(Error::Domain("energies must be finite and strictly positive".into()));
        }
        if energies.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Domain("energies must be non-decreasing".into()));
        }
        Ok(Self { energies })
    }

    pub fn n(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn total(&self) -> f64 {
        self.energies.iter().sum()
    }
}

/// T_k as an algebra element: -X_{2k-1,2k}.
pub fn t_element(k: usize, n: usize) -> Result<AlgebraElement> {
    AlgebraElement::basis_element(2 * k, 2 * k - 1, n)
}

#[derive(Clone, Debug)]
pub struct HamiltonianParts {
    pub rep: Rep,
    pub h_tilde: OperatorMatrix,
    pub p0: OperatorMatrix,
    pub b0: OperatorMatrix,
    pub t: Vec<OperatorMatrix>,
    pub l: Vec<OperatorMatrix>,
    pub d_plus: Vec<OperatorMatrix>,
    pub d_minus: Vec<OperatorMatrix>,
}

impl HamiltonianParts {
    pub fn n(&self) -> usize {
        self.t.len()
    }

    /// max |H̃ - (P₀ + iB₀)|.
    pub fn decomposition_residual(&self) -> f64 {
        self.h_tilde.max_abs_diff(&(&self.p0 + &self.b0.scale(I)))
    }

    /// Largest entry among [P₀, B₀], [T_k, L_ℓ] and [T_k, T_ℓ].
    pub fn commutation_residual(&self) -> f64 {
        let mut worst = self.p0.commutator(&self.b0).max_abs();
        for tk in &self.t {
            for (ll, tl) in self.l.iter().zip(&self.t) {
                worst = worst.max(tk.commutator(ll).max_abs()).max(tk.commutator(tl).max_abs());
            }
        }
        worst
    }
}

pub fn build_parts(spec: &HamiltonianSpec, rep: Rep) -> Result<HamiltonianParts> {
    let n = spec.n();
    let top = 2 * n + 1;
    let r = Representation::new(rep, n)?;
    let d = |j: usize| r.basis_image(BasisIndex::new(j, top, n).expect("valid index"));
    let mut parts = HamiltonianParts {
        rep,
        h_tilde: OperatorMatrix::zeros(rep, n),
        p0: OperatorMatrix::zeros(rep, n),
        b0: OperatorMatrix::zeros(rep, n),
        t: Vec::with_capacity(n),
        l: Vec::with_capacity(n),
        d_plus: Vec::with_capacity(n),
        d_minus: Vec::with_capacity(n),
    };
    for (k0, &e) in spec.energies().iter().enumerate() {
        let k = k0 + 1;
        let e = C64::new(e, 0.0);
        let plus = r.apply(&ladder_element(k as i64, n)?)?;
        let minus = r.apply(&ladder_element(-(k as i64), n)?)?;
        let (da, db) = (d(2 * k - 1), d(2 * k));
        let lk = &(&da * &da) + &(&db * &db);
        let tk = r.apply(&t_element(k, n)?)?;
        parts.h_tilde = &parts.h_tilde + &(&plus * &minus).scale(e);
        parts.p0 = &parts.p0 - &lk.scale(e);
        parts.b0 = &parts.b0 + &tk.scale(e);
        parts.t.push(tk);
        parts.l.push(lk);
        parts.d_plus.push(plus);
        parts.d_minus.push(minus);
    }
    Ok(parts)
}

/// -Σ E_k (D_{2k-1,2n+1} + iD_{2k,2n+1})(D_{2k-1,2n+1} - iD_{2k,2n+1}).
pub fn factorized_h_tilde(spec: &HamiltonianSpec, rep: Rep) -> Result<OperatorMatrix> {
    let n = spec.n();
    let top = 2 * n + 1;
    let r = Representation::new(rep, n)?;
    let mut acc = OperatorMatrix::zeros(rep, n);
    for (k0, &e) in spec.energies().iter().enumerate() {
        let k = k0 + 1;
        let da = r.basis_image(BasisIndex::new(2 * k - 1, top, n)?);
        let db = r.basis_image(BasisIndex::new(2 * k, top, n)?);
        let left = &da + &db.scale(I);
        let right = &da - &db.scale(I);
        acc = &acc - &(&left * &right).scale(C64::new(e, 0.0));
    }
    Ok(acc)
}

/// Largest deviation of the D_k^± from the canonical anticommutation relations.
pub fn car_residual(parts: &HamiltonianParts) -> f64 {
    let id = OperatorMatrix::identity(parts.rep, parts.n());
    let zero = OperatorMatrix::zeros(parts.rep, parts.n());
    let mut worst: f64 = 0.0;
    for (j, (mj, pj)) in parts.d_minus.iter().zip(&parts.d_plus).enumerate() {
        for (k, (mk, pk)) in parts.d_minus.iter().zip(&parts.d_plus).enumerate() {
            let expected = if j == k { &id } else { &zero };
            worst = worst
                .max(mj.anticommutator(pk).max_abs_diff(expected))
                .max(mj.anticommutator(mk).max_abs())
                .max(pj.anticommutator(pk).max_abs());
        }
    }
    worst
}

pub fn car_on_subspace_check(parts: &HamiltonianParts) -> bool {
    car_residual(parts) < 1e-12
}

/// e^{-tM} for Hermitian M via its eigendecomposition.
pub fn exact_semigroup(m: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("semigroup time must be finite and >= 0, got {t}")));
    }
    let mat = hermitian_function(m.matrix(), HERMITIAN_TOL, |lambda| C64::new((-t * lambda).exp(), 0.0))?;
    Ok(OperatorMatrix::new(m.rep(), mat))
}

/// Ascending eigenvalues of a Hermitian operator.
pub fn spectrum(m: &OperatorMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m.matrix(), HERMITIAN_TOL)?.0)
}

/// {Σ_{k∈S} E_k : S ⊆ {1..n}}, ascending with multiplicity.
pub fn subset_sums(energies: &[f64]) -> Vec<f64> {
    let n = energies.len();
    let mut sums: Vec<f64> = (0..1usize << n)
        .map(|mask| (0..n).filter(|k| mask & (1 << k) != 0).map(|k| energies[k]).sum())
        .collect();
    sums.sort_by(f64::total_cmp);
    sums
}
