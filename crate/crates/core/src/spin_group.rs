//! Group-level machinery on Spin(2n+1): exponentials, Haar sampling and the
//! matrix-coefficient embedding ψ ↦ (g ↦ ⟨vacuum, π(g) ψ⟩) of Fock space into
//! functions on the group.
//!
//! Haar samples are drawn on SO(2n+1) and lifted to the spin representation
//! through the principal logarithm. The lift is only defined up to the deck
//! transformation `π(g) ↦ -π(g)`; every integrand built here is a product of
//! two half-spin coefficients, which is insensitive to that sign.

use nalgebra::linalg::Schur;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::estimate::McEstimate;
use crate::fock::{check_modes, FockVector};
use crate::matrix::{expm, expm_anti_hermitian, CMatrix, OperatorMatrix, Rep, C64};
use crate::parallel::{map_indexed, stream_rng, Execution};
use crate::so_algebra::{AlgebraElement, BasisIndex, Representation};

const UNITARY_TOL: f64 = 1e-10;
/// Rotation angles this close to π make the principal logarithm ill-conditioned.
pub const LOG_ANGLE_GUARD: f64 = 1e-8;

/// A point g of Spin(2n+1) through its half-spin image π(g), optionally
/// paired with its image in SO(2n+1).
#[derive(Clone, Debug, PartialEq)]
pub struct GroupPoint {
    n: usize,
    spin: OperatorMatrix,
    defining: Option<OperatorMatrix>,
}

impl GroupPoint {
    pub fn new(n: usize, spin: OperatorMatrix, defining: Option<OperatorMatrix>) -> Result<Self> {
        check_modes(n)?;
        if spin.rep() != Rep::Spin || spin.dim() != 1 << n {
            return Err(Error::Size(format!("spin matrix must be {0}x{0}", 1 << n)));
        }
        let defect = spin.unitarity_defect();
        if defect > UNITARY_TOL {
            return Err(Error::Domain(format!("spin matrix not unitary (defect {defect:.3e})")));
        }
        if let Some(r) = &defining {
            if r.rep() != Rep::Defining || r.dim() != 2 * n + 1 {
                return Err(Error::Size(format!("defining matrix must be {0}x{0}", 2 * n + 1)));
            }
            let real = r.matrix().map(|z| z.re);
            let det = real.determinant();
            if r.unitarity_defect() > UNITARY_TOL || (det - 1.0).abs() > UNITARY_TOL || r.matrix().iter().any(|z| z.im != 0.0) {
                return Err(Error::Domain("defining matrix is not in SO(2n+1)".into()));
            }
        }
        Ok(Self { n, spin, defining })
    }

    /// Internal constructor for matrices produced by unitary-preserving updates.
    pub(crate) fn from_parts(n: usize, spin: OperatorMatrix, defining: Option<OperatorMatrix>) -> Self {
        Self { n, spin, defining }
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_modes(n)?;
        Ok(Self {
            n,
            spin: OperatorMatrix::identity(Rep::Spin, n),
            defining: Some(OperatorMatrix::identity(Rep::Defining, n)),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spin_matrix(&self) -> &OperatorMatrix {
        &self.spin
    }

    pub fn defining_matrix(&self) -> Option<&OperatorMatrix> {
        self.defining.as_ref()
    }

    pub fn without_defining(mut self) -> Self {
        self.defining = None;
        self
    }

    /// Group product g·h; the defining image is kept only when both carry one.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Size(format!("points of Spin({}) and Spin({})", 2 * self.n + 1, 2 * other.n + 1)));
        }
        let defining = match (&self.defining, &other.defining) {
            (Some(a), Some(b)) => Some(a * b),
            _ => None,
        };
        Ok(Self { n: self.n, spin: &self.spin * &other.spin, defining })
    }

    /// The other preimage of the same rotation: π(g) ↦ -π(g).
    pub fn deck_flip(&self) -> Self {
        Self { n: self.n, spin: -&self.spin, defining: self.defining.clone() }
    }
}

/// exp(A) in the given representation for A in the real form so(2n+1).
pub fn group_exp(a: &AlgebraElement, rep: Rep) -> Result<OperatorMatrix> {
    if !a.is_real() {
        return Err(Error::Domain("group_exp needs real coefficients; use group_exp_unchecked".into()));
    }
    let image = Representation::new(rep, a.n())?.apply(a)?;
    Ok(OperatorMatrix::new(rep, expm_anti_hermitian(image.matrix(), UNITARY_TOL)?))
}

/// exp(A) in both representations.
pub fn group_exp_point(a: &AlgebraElement) -> Result<GroupPoint> {
    let spin = group_exp(a, Rep::Spin)?;
    let defining = group_exp(a, Rep::Defining)?;
    Ok(GroupPoint::from_parts(a.n(), spin, Some(defining)))
}

/// exp of the image of an arbitrary complex element; no unitarity guarantee.
pub fn group_exp_unchecked(a: &AlgebraElement, rep: Rep) -> Result<OperatorMatrix> {
    let image = Representation::new(rep, a.n())?.apply(a)?;
    Ok(OperatorMatrix::new(rep, expm(image.matrix())))
}

/// Haar-distributed rotation in SO(2n+1): QR of a Gaussian matrix with the
/// signs of R's diagonal folded into Q, then -Q when det Q = -1 (-I is
/// central with determinant -1 in odd dimension).
pub fn haar_rotation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let d = 2 * n + 1;
    let g = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..d {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.neg_mut();
    }
    q
}

/// Principal logarithm of a rotation, as an element of the real form so(2n+1).
/// Fails when some rotation angle is within [`LOG_ANGLE_GUARD`] of π.
pub fn rotation_log(r: &DMatrix<f64>, n: usize) -> Result<AlgebraElement> {
    let d = 2 * n + 1;
    if r.nrows() != d || r.ncols() != d {
        return Err(Error::Size(format!("rotation must be {d}x{d}")));
    }
    let schur = Schur::try_new(r.clone(), 1e-15, 10_000).ok_or_else(|| Error::Numeric("real Schur form did not converge".into()))?;
    let (q, t) = schur.unpack();
    let mut log_t = DMatrix::<f64>::zeros(d, d);
    let mut i = 0;
    while i < d {
        if i + 1 < d && t[(i + 1, i)].abs() > 1e-12 {
            let cos = 0.5 * (t[(i, i)] + t[(i + 1, i + 1)]);
            let sin = 0.5 * (t[(i + 1, i)] - t[(i, i + 1)]);
            let theta = sin.atan2(cos);
            if std::f64::consts::PI - theta.abs() < LOG_ANGLE_GUARD {
                return Err(Error::Numeric("rotation angle near pi".into()));
            }
            log_t[(i + 1, i)] = theta;
            log_t[(i, i + 1)] = -theta;
            i += 2;
        } else {
            if t[(i, i)] < 0.0 {
                return Err(Error::Numeric("rotation angle near pi".into()));
            }
            i += 1;
        }
    }
    let a = &q * log_t * q.transpose();
    let mut out = AlgebraElement::zero(n);
    for j in 0..d {
        for k in j + 1..d {
            let v = 0.5 * (a[(j, k)] - a[(k, j)]);
            if v != 0.0 {
                out.add_term(BasisIndex::new(j + 1, k + 1, n)?, C64::new(v, 0.0));
            }
        }
    }
    Ok(out)
}

/// Haar sample on SO(2n+1) lifted to Spin(2n+1); resamples in the
/// measure-zero event that the logarithm guard trips.
pub fn haar_sample<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<GroupPoint> {
    check_modes(n)?;
    loop {
        let rot = haar_rotation(rng, n);
        let log = match rotation_log(&rot, n) {
            Ok(a) => a,
            Err(Error::Numeric(_)) => continue,
            Err(e) => return Err(e),
        };
        let spin = group_exp(&log, Rep::Spin)?;
        let defining = OperatorMatrix::new(Rep::Defining, rot.map(|x| C64::new(x, 0.0)));
        return Ok(GroupPoint::from_parts(n, spin, Some(defining)));
    }
}

/// The function g ↦ ⟨vacuum, π(g) ψ⟩ on Spin(2n+1).
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixCoefficient {
    state: FockVector,
}

impl MatrixCoefficient {
    pub fn new(state: FockVector) -> Self {
        Self { state }
    }

    pub fn state(&self) -> &FockVector {
        &self.state
    }

    pub fn evaluate(&self, g: &GroupPoint) -> Result<C64> {
        if g.n != self.state.n() {
            return Err(Error::Size(format!("coefficient over {} modes evaluated on Spin({})", self.state.n(), 2 * g.n + 1)));
        }
        Ok(vacuum_row_dot(g.spin.matrix(), &self.state))
    }
}

/// ⟨vacuum, U ψ⟩ = Σ_S U[0, S] ψ_S.
pub(crate) fn vacuum_row_dot(u: &CMatrix, psi: &FockVector) -> C64 {
    u.row(0).iter().zip(psi.amplitudes().iter()).map(|(a, b)| a * b).sum()
}

pub fn evaluate_coefficient(c: &MatrixCoefficient, g: &GroupPoint) -> Result<C64> {
    c.evaluate(g)
}

/// Monte Carlo estimate of ∫ conj(F(ψ)(g)) F(φ)(g) dg over normalized Haar
/// measure, which equals 2^{-n} ⟨ψ, φ⟩.
pub fn l2_inner_mc(psi: &FockVector, phi: &FockVector, n_samples: usize, seed: u64, exec: Execution) -> Result<McEstimate> {
    l2_inner_mc_translated(psi, phi, n_samples, seed, exec, None)
}

/// As [`l2_inner_mc`], with every sample g replaced by h·g for a fixed h.
pub fn l2_inner_mc_translated(
    psi: &FockVector,
    phi: &FockVector,
    n_samples: usize,
    seed: u64,
    exec: Execution,
    left: Option<&GroupPoint>,
) -> Result<McEstimate> {
    if psi.n() != phi.n() {
        return Err(Error::Size("states over different mode counts".into()));
    }
    if n_samples < 100 {
        return Err(Error::Config(format!("need at least 100 samples, got {n_samples}")));
    }
    let n = psi.n();
    let (f, h) = (MatrixCoefficient::new(psi.clone()), MatrixCoefficient::new(phi.clone()));
    let samples = map_indexed(n_samples as u64, exec, |i| -> Result<C64> {
        let mut rng = stream_rng(seed, i);
        let mut g = haar_sample(&mut rng, n)?.without_defining();
        if let Some(l) = left {
            g = l.compose(&g)?;
        }
        Ok(f.evaluate(&g)?.conj() * h.evaluate(&g)?)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(McEstimate::from_samples(&samples))
}

/// Monte Carlo estimate of E[(tr R)²] for Haar-distributed R in SO(2n+1);
/// the defining representation is irreducible, so the exact value is 1.
pub fn haar_trace_moment(n: usize, n_samples: usize, seed: u64, exec: Execution) -> Result<McEstimate> {
    check_modes(n)?;
    if n_samples < 100 {
        return Err(Error::Config(format!("need at least 100 samples, got {n_samples}")));
    }
    let samples = map_indexed(n_samples as u64, exec, |i| {
        let tr = haar_rotation(&mut stream_rng(seed, i), n).trace();
        C64::new(tr * tr, 0.0)
    });
    Ok(McEstimate::from_samples(&samples))
}
