//! Left-invariant diffusions on Spin(2n+1), integrated in the spin representation.
//!
//! Each step applies `U ← U·exp(Σ_j σ_j ΔW_j π(A_j) + drift·h)` with
//! `A_j = X_{j,2n+1}`, `π(A_j) = ½γ_j`, and drift `−π(B₀)` for [`Process::P`].
//! Without drift the step has the closed form
//! `exp(½γ(w)) = cos(|w|/2)·I + sin(|w|/2)·γ(w)/|w|` with `w_j = σ_j ΔW_j`.
//!
//! Monte Carlo estimators only need `⟨vacuum, π(X(t)) χ⟩`, so they propagate
//! the vacuum row of `π(X(t))` instead of the full matrix.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::estimate::McEstimate;
use crate::fock::FockVector;
use crate::hamiltonian::{build_parts, HamiltonianSpec};
use crate::matrix::{expm_anti_hermitian, CMatrix, OperatorMatrix, Rep, C64};
use crate::parallel::{map_indexed, stream_rng, Execution};
use crate::so_algebra::{BasisIndex, Representation};
use crate::spin_group::{haar_sample, vacuum_row_dot, GroupPoint};

const UNITARY_TOL: f64 = 1e-10;
const MAX_STEPS: f64 = 1e12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Process {
    /// Diffusion with the rotational drift −B₀.
    P,
    /// Pure diffusion generated by −P₀.
    #[default]
    P0,
}

/// Noise amplitudes σ_j in terms of the per-direction weights E'_j.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SigmaConvention {
    /// σ_j = √(2E'_j): the generator equals −P₀.
    #[default]
    Corrected,
    /// σ_j = √(E'_j): the generator equals −½P₀.
    PaperLiteral,
}

impl SigmaConvention {
    pub fn sigma(self, weight: f64) -> f64 {
        match self {
            SigmaConvention::Corrected => (2.0 * weight).sqrt(),
            SigmaConvention::PaperLiteral => weight.sqrt(),
        }
    }
}

/// Number of uniform steps of size at most `dt` covering `span`.
pub fn steps_for(span: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("step size must be finite and > 0, got {dt}")));
    }
    if !(span >= 0.0 && span.is_finite()) {
        return Err(Error::Config(format!("time span must be finite and >= 0, got {span}")));
    }
    if span == 0.0 {
        return Ok(0);
    }
    let ratio = span / dt;
    if ratio > MAX_STEPS {
        return Err(Error::Config(format!("{ratio:.3e} steps exceed the supported range")));
    }
    // Absorb rounding in ratios such as 0.5 / 1e-3.
    Ok(((ratio - 1e-9).ceil() as usize).max(1))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdeConfig {
    spec: HamiltonianSpec,
    process: Process,
    dt: f64,
    horizon: f64,
    sigma_convention: SigmaConvention,
    seed: u64,
}

impl SdeConfig {
    pub fn new(
        spec: HamiltonianSpec,
        process: Process,
        dt: f64,
        horizon: f64,
        sigma_convention: SigmaConvention,
        seed: u64,
    ) -> Result<Self> {
        steps_for(horizon, dt)?;
        if horizon > 0.0 && dt > horizon {
            return Err(Error::Config(format!("dt = {dt} exceeds horizon {horizon}")));
        }
        Ok(Self { spec, process, dt, horizon, sigma_convention, seed })
    }

    pub fn spec(&self) -> &HamiltonianSpec {
        &self.spec
    }

    pub fn process(&self) -> Process {
        self.process
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn sigma_convention(&self) -> SigmaConvention {
        self.sigma_convention
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// E'_{2k-1} = E'_{2k} = E_k.
    pub fn diffusion_weights(&self) -> Vec<f64> {
        diffusion_weights(&self.spec)
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.diffusion_weights().into_iter().map(|w| self.sigma_convention.sigma(w)).collect()
    }

    pub fn n_steps(&self) -> usize {
        steps_for(self.horizon, self.dt).expect("validated at construction")
    }

    /// Uniform step horizon / n_steps, or 0 for an empty path.
    pub fn step_size(&self) -> f64 {
        match self.n_steps() {
            0 => 0.0,
            k => self.horizon / k as f64,
        }
    }
}

fn diffusion_weights(spec: &HamiltonianSpec) -> Vec<f64> {
    spec.energies().iter().flat_map(|&e| [e, e]).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathState {
    pub time: f64,
    pub point: GroupPoint,
}

impl PathState {
    pub fn new(point: GroupPoint) -> Self {
        Self { time: 0.0, point }
    }
}

/// A matrix with exactly one nonzero entry per row, stored as `(column, value)`.
#[derive(Clone, Debug)]
struct Monomial {
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl Monomial {
    fn from_matrix(m: &CMatrix) -> Self {
        let mut cols = Vec::with_capacity(m.nrows());
        let mut vals = Vec::with_capacity(m.nrows());
        for r in 0..m.nrows() {
            let c = (0..m.ncols()).find(|&c| m[(r, c)] != C64::new(0.0, 0.0)).expect("Clifford generators have a nonzero per row");
            cols.push(c);
            vals.push(m[(r, c)]);
        }
        Self { cols, vals }
    }
}

/// Precomputed spin-representation data for one SDE.
#[derive(Clone, Debug)]
pub struct Integrator {
    dim: usize,
    sigmas: Vec<f64>,
    noise: Vec<CMatrix>,
    gammas: Vec<Monomial>,
    drift: Option<CMatrix>,
}

impl Integrator {
    pub fn new(spec: &HamiltonianSpec, process: Process, sigma: SigmaConvention) -> Result<Self> {
        let n = spec.n();
        let rep = Representation::spin(n)?;
        let noise: Vec<CMatrix> = (1..=2 * n)
            .map(|j| Ok(rep.basis_image(BasisIndex::new(j, 2 * n + 1, n)?).into_matrix()))
            .collect::<Result<_>>()?;
        let gammas = noise.iter().map(|a| Monomial::from_matrix(&(a * C64::new(2.0, 0.0)))).collect();
        let drift = match process {
            Process::P0 => None,
            Process::P => Some(-build_parts(spec, Rep::Spin)?.b0.into_matrix()),
        };
        let sigmas = diffusion_weights(spec).into_iter().map(|w| sigma.sigma(w)).collect();
        Ok(Self { dim: 1 << n, sigmas, noise, gammas, drift })
    }

    pub fn from_config(config: &SdeConfig) -> Result<Self> {
        Self::new(config.spec(), config.process(), config.sigma_convention())
    }

    pub fn n_directions(&self) -> usize {
        self.sigmas.len()
    }

    /// ½Σσ_j²π(A_j)² + drift, the generator acting on the state side.
    pub fn generator_matrix(&self) -> CMatrix {
        let mut g = CMatrix::zeros(self.dim, self.dim);
        for (s, a) in self.sigmas.iter().zip(&self.noise) {
            g += a * a * C64::new(0.5 * s * s, 0.0);
        }
        if let Some(d) = &self.drift {
            g += d;
        }
        g
    }

    fn check_increments(&self, increments: &[f64]) -> Result<()> {
        if increments.len() != self.sigmas.len() {
            return Err(Error::Size(format!("expected {} increments, got {}", self.sigmas.len(), increments.len())));
        }
        if increments.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("non-finite Brownian increment".into()));
        }
        Ok(())
    }

    /// cos(|w|/2) and sin(|w|/2)/|w| for w_j = σ_j ΔW_j.
    fn clifford_coefficients(&self, increments: &[f64]) -> (f64, f64) {
        let norm = self.sigmas.iter().zip(increments).map(|(s, x)| (s * x) * (s * x)).sum::<f64>().sqrt();
        if norm == 0.0 {
            return (1.0, 0.5);
        }
        let (sin, cos) = (0.5 * norm).sin_cos();
        (cos, sin / norm)
    }

    /// exp(Σ σ_j ΔW_j π(A_j) + drift·h).
    pub fn step_matrix(&self, increments: &[f64], h: f64) -> Result<CMatrix> {
        self.check_increments(increments)?;
        match &self.drift {
            None => {
                let (c, s) = self.clifford_coefficients(increments);
                let mut m = CMatrix::identity(self.dim, self.dim) * C64::new(c, 0.0);
                for ((sig, x), a) in self.sigmas.iter().zip(increments).zip(&self.noise) {
                    m += a * C64::new(2.0 * s * sig * x, 0.0);
                }
                Ok(m)
            }
            Some(d) => expm_anti_hermitian(&self.exponent(increments, h, d), UNITARY_TOL),
        }
    }

    fn exponent(&self, increments: &[f64], h: f64, drift: &CMatrix) -> CMatrix {
        let mut y = drift * C64::new(h, 0.0);
        for ((sig, x), a) in self.sigmas.iter().zip(increments).zip(&self.noise) {
            y += a * C64::new(sig * x, 0.0);
        }
        y
    }

    pub fn step(&self, state: &PathState, increments: &[f64], h: f64) -> Result<PathState> {
        let m = self.step_matrix(increments, h)?;
        let spin = OperatorMatrix::new(Rep::Spin, state.point.spin_matrix().matrix() * m);
        Ok(PathState { time: state.time + h, point: GroupPoint::from_parts(state.point.n(), spin, None) })
    }

    /// row ← row·exp(…) for a single step.
    fn step_row(&self, row: &mut [C64], scratch: &mut [C64], increments: &[f64], h: f64) -> Result<()> {
        self.check_increments(increments)?;
        match &self.drift {
            None => {
                let (c, s) = self.clifford_coefficients(increments);
                scratch.iter_mut().zip(row.iter()).for_each(|(o, r)| *o = r * c);
                for ((sig, x), g) in self.sigmas.iter().zip(increments).zip(&self.gammas) {
                    let coef = s * sig * x;
                    for (k, r) in row.iter().enumerate() {
                        scratch[g.cols[k]] += r * g.vals[k] * coef;
                    }
                }
            }
            Some(d) => {
                let m = expm_anti_hermitian(&self.exponent(increments, h, d), UNITARY_TOL)?;
                for (c, o) in scratch.iter_mut().enumerate() {
                    *o = row.iter().enumerate().map(|(k, r)| r * m[(k, c)]).sum();
                }
            }
        }
        row.copy_from_slice(scratch);
        Ok(())
    }

    /// Advances the vacuum row of π(X) over `span` in uniform steps of size ≤ `dt`.
    pub(crate) fn propagate_row<R: Rng + ?Sized>(&self, row: &mut [C64], rng: &mut R, span: f64, dt: f64) -> Result<()> {
        let steps = steps_for(span, dt)?;
        if steps == 0 {
            return Ok(());
        }
        let h = span / steps as f64;
        let mut inc = vec![0.0; self.sigmas.len()];
        let mut scratch = vec![C64::new(0.0, 0.0); row.len()];
        for _ in 0..steps {
            draw_increments(rng, h, &mut inc);
            self.step_row(row, &mut scratch, &inc, h)?;
        }
        Ok(())
    }
}

/// Independent N(0, h) draws.
pub fn draw_increments<R: Rng + ?Sized>(rng: &mut R, h: f64, out: &mut [f64]) {
    let sd = h.sqrt();
    for x in out.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *x = sd * z;
    }
}

/// One step of size `config.dt()`.
pub fn sde_step(state: &PathState, increments: &[f64], config: &SdeConfig) -> Result<PathState> {
    Integrator::from_config(config)?.step(state, increments, config.dt())
}

/// Full path up to the horizon, driven by the stream `(config.seed, path_index)`.
pub fn simulate_path(config: &SdeConfig, initial: &GroupPoint, path_index: u64) -> Result<PathState> {
    if initial.n() != config.spec().n() {
        return Err(Error::Size("initial point and Hamiltonian have different mode counts".into()));
    }
    let mut state = PathState::new(initial.clone());
    let steps = config.n_steps();
    if steps == 0 {
        return Ok(state);
    }
    let integ = Integrator::from_config(config)?;
    let h = config.step_size();
    let mut rng = stream_rng(config.seed(), path_index);
    let mut inc = vec![0.0; integ.n_directions()];
    for _ in 0..steps {
        draw_increments(&mut rng, h, &mut inc);
        state = integ.step(&state, &inc, h)?;
    }
    state.time = config.horizon();
    Ok(state)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorCheck {
    /// Antithetic estimate of (E[f(x·Δ)] − f(x)) / dt.
    pub empirical: McEstimate,
    /// (ℒf)(x) from the spin-representation generator.
    pub target: C64,
    pub f_x: C64,
}

/// Empirical one-step generator of f = F(ψ) at x against its exact value.
/// Each sample averages the increments ±ΔW, which cancels the odd orders.
pub fn generator_check(psi: &FockVector, x: &GroupPoint, dt: f64, n_samples: usize, config: &SdeConfig) -> Result<GeneratorCheck> {
    let n = config.spec().n();
    if psi.n() != n || x.n() != n {
        return Err(Error::Size("state, point and Hamiltonian must share the mode count".into()));
    }
    if !(dt > 0.0 && dt <= 1e-3) {
        return Err(Error::Config(format!("generator check needs 0 < dt <= 1e-3, got {dt}")));
    }
    if n_samples < 10_000 {
        return Err(Error::Config(format!("generator check needs at least 10^4 samples, got {n_samples}")));
    }
    let integ = Integrator::from_config(config)?;
    let u = x.spin_matrix().matrix();
    let f_x = vacuum_row_dot(u, psi);
    let psi_gen = FockVector::from_dvector(n, integ.generator_matrix() * psi.amplitudes())?;
    let target = vacuum_row_dot(u, &psi_gen);
    let row0: Vec<C64> = u.row(0).iter().copied().collect();
    let samples = map_indexed(n_samples as u64, Execution::Sequential, |i| -> Result<C64> {
        let mut rng = stream_rng(config.seed(), i);
        let mut inc = vec![0.0; integ.n_directions()];
        draw_increments(&mut rng, dt, &mut inc);
        let mut scratch = vec![C64::new(0.0, 0.0); row0.len()];
        let mut plus = row0.clone();
        integ.step_row(&mut plus, &mut scratch, &inc, dt)?;
        inc.iter_mut().for_each(|v| *v = -*v);
        let mut minus = row0.clone();
        integ.step_row(&mut minus, &mut scratch, &inc, dt)?;
        let avg = 0.5 * (row_dot(&plus, psi) + row_dot(&minus, psi));
        Ok((avg - f_x) / dt)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(GeneratorCheck { empirical: McEstimate::from_samples(&samples), target, f_x })
}

pub(crate) fn row_dot(row: &[C64], psi: &FockVector) -> C64 {
    row.iter().zip(psi.amplitudes().iter()).map(|(a, b)| a * b).sum()
}

/// Path count, step size, master seed and execution mode for a Monte Carlo run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McParams {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub exec: Execution,
}

impl McParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 100 {
            return Err(Error::Config(format!("need at least 100 paths, got {}", self.n_paths)));
        }
        steps_for(0.0, self.dt).map(|_| ())
    }
}

/// Per-path samples `conj(F(ψ)(X(0)))·F(χ_i)(X(t_i))` with X(0) Haar distributed,
/// for a non-decreasing time grid. Returns `samples[path][i]`.
pub(crate) fn haar_path_samples(
    integ: &Integrator,
    psi: &FockVector,
    rights: &[FockVector],
    times: &[f64],
    params: &McParams,
    flip_initial: bool,
) -> Result<Vec<Vec<C64>>> {
    params.validate()?;
    if times.windows(2).any(|w| w[0] > w[1]) || times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::Config("time grid must be finite, non-negative and non-decreasing".into()));
    }
    let n = psi.n();
    map_indexed(params.n_paths as u64, params.exec, |i| -> Result<Vec<C64>> {
        let mut rng = stream_rng(params.seed, i);
        let mut x0 = haar_sample(&mut rng, n)?;
        if flip_initial {
            x0 = x0.deck_flip();
        }
        let mut row: Vec<C64> = x0.spin_matrix().matrix().row(0).iter().copied().collect();
        let left = row_dot(&row, psi).conj();
        let mut now = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for (t, chi) in times.iter().zip(rights) {
            integ.propagate_row(&mut row, &mut rng, t - now, params.dt)?;
            now = *t;
            out.push(left * row_dot(&row, chi));
        }
        Ok(out)
    })
    .into_iter()
    .collect()
}

pub(crate) fn column_estimates(samples: &[Vec<C64>], width: usize) -> Vec<McEstimate> {
    (0..width)
        .map(|i| McEstimate::from_samples(&samples.iter().map(|s| s[i]).collect::<Vec<_>>()))
        .collect()
}

/// m(t) = E[conj(F(ψ)(X(0)))·F(ψ)(X(t))] on a grid, all times from the same paths.
pub fn decay_curve(
    psi: &FockVector,
    spec: &HamiltonianSpec,
    process: Process,
    sigma: SigmaConvention,
    times: &[f64],
    params: &McParams,
) -> Result<Vec<McEstimate>> {
    if psi.n() != spec.n() {
        return Err(Error::Size("state and Hamiltonian have different mode counts".into()));
    }
    let integ = Integrator::new(spec, process, sigma)?;
    let rights = vec![psi.clone(); times.len()];
    let samples = haar_path_samples(&integ, psi, &rights, times, params, false)?;
    Ok(column_estimates(&samples, times.len()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
}

/// Least-squares fit of ln|m(t)| = intercept − rate·t.
pub fn fit_decay_rate(times: &[f64], curve: &[McEstimate]) -> Result<DecayFit> {
    if times.len() != curve.len() {
        return Err(Error::Size("time grid and curve lengths differ".into()));
    }
    let ys: Vec<f64> = curve.iter().map(|e| e.mean.norm().ln()).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::Numeric("decay curve has a vanishing or non-finite point".into()));
    }
    let k = times.len() as f64;
    let tbar = times.iter().sum::<f64>() / k;
    let ybar = ys.iter().sum::<f64>() / k;
    let sxx: f64 = times.iter().map(|t| (t - tbar).powi(2)).sum();
    if sxx.is_nan() || sxx <= 0.0 {
        return Err(Error::Config("decay fit needs at least two distinct times".into()));
    }
    let sxy: f64 = times.iter().zip(&ys).map(|(t, y)| (t - tbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    Ok(DecayFit { rate: -slope, intercept: ybar - slope * tbar })
}
