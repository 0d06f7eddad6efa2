use std::fs;
use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{Map, Value};

use spinfock::fock::{FockVector, MAX_MODES};
use spinfock::hamiltonian::HamiltonianSpec;
use spinfock::sde::{McParams, Process, SigmaConvention};
use spinfock::Execution;

use crate::report::num;
use crate::CliError;

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Run the algebraic verification sweep.
    Verify,
    /// Compare the quasi-Hamiltonian spectrum with subset sums of the energies.
    Spectrum,
    /// Exact versus path-space semigroup matrix elements over a time grid.
    Fk,
    /// Fit the decay rate of the pure diffusion under both noise conventions.
    Calibrate,
    /// Monte Carlo checks of Haar sampling and Schur orthogonality.
    HaarTest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Spectrum => "spectrum",
            Command::Fk => "fk",
            Command::Calibrate => "calibrate",
            Command::HaarTest => "haar-test",
        }
    }

    fn is_stochastic(self) -> bool {
        matches!(self, Command::Fk | Command::Calibrate | Command::HaarTest)
    }

    fn default_grid(self) -> Vec<f64> {
        match self {
            Command::Fk => vec![0.25, 0.5, 1.0],
            Command::Calibrate => (0..=10).map(|i| i as f64 / 10.0).collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(ValueEnum, Deserialize, Clone, Copy, Debug, Default, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaArg {
    #[default]
    Corrected,
    PaperLiteral,
}

impl SigmaArg {
    pub fn name(self) -> &'static str {
        match self {
            SigmaArg::Corrected => "corrected",
            SigmaArg::PaperLiteral => "paper-literal",
        }
    }

    pub fn convention(self) -> SigmaConvention {
        match self {
            SigmaArg::Corrected => SigmaConvention::Corrected,
            SigmaArg::PaperLiteral => SigmaConvention::PaperLiteral,
        }
    }
}

#[derive(ValueEnum, Deserialize, Clone, Copy, Debug, Default, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessArg {
    #[default]
    P0,
    P,
}

impl ProcessArg {
    pub fn name(self) -> &'static str {
        match self {
            ProcessArg::P0 => "p0",
            ProcessArg::P => "p",
        }
    }

    pub fn process(self) -> Process {
        match self {
            ProcessArg::P0 => Process::P0,
            ProcessArg::P => Process::P,
        }
    }
}

#[derive(ValueEnum, Deserialize, Clone, Copy, Debug, Default, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct Options {
    /// Number of fermionic modes.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Mode energies, comma separated and non-decreasing.
    #[arg(long, global = true, value_delimiter = ',')]
    pub energies: Option<Vec<f64>>,
    /// Time grid, comma separated.
    #[arg(long = "t-grid", global = true, value_delimiter = ',')]
    pub t_grid: Option<Vec<f64>>,
    /// Integrator step size.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Monte Carlo path or sample count.
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    /// Master seed; required by fk, calibrate and haar-test.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub sigma: Option<SigmaArg>,
    #[arg(long, global = true, value_enum)]
    pub process: Option<ProcessArg>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat JSON file with defaults for any of the other options.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Left state: "vacuum", "top" or occupied modes such as "1,2".
    #[arg(long, global = true)]
    pub psi: Option<String>,
    /// Right state, same syntax as --psi; defaults to the left state.
    #[arg(long, global = true)]
    pub phi: Option<String>,
    #[arg(long, global = true, hide = true)]
    pub corrupt_structure_constant: bool,
}

#[derive(Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n: Option<usize>,
    energies: Option<Vec<f64>>,
    t_grid: Option<Vec<f64>>,
    dt: Option<f64>,
    paths: Option<usize>,
    seed: Option<u64>,
    sigma: Option<SigmaArg>,
    process: Option<ProcessArg>,
    format: Option<Format>,
    out: Option<PathBuf>,
    psi: Option<String>,
    phi: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub spec: HamiltonianSpec,
    pub t_grid: Vec<f64>,
    pub dt: f64,
    pub paths: usize,
    pub seed: Option<u64>,
    pub sigma: SigmaArg,
    pub process: ProcessArg,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub psi: String,
    pub phi: String,
    pub corrupt_structure_constant: bool,
}

impl RunConfig {
    pub fn resolve(command: Command, opts: &Options) -> Result<Self, CliError> {
        let file = match &opts.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str::<FileConfig>(&text).map_err(|e| CliError::Usage(format!("bad config file {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let n = opts.n.or(file.n);
        let energies = opts.energies.clone().or(file.energies);
        let energies = match (n, energies) {
            (Some(n), Some(e)) if e.len() != n => {
                return Err(CliError::Usage(format!("--n {n} disagrees with {} energies", e.len())));
            }
            (_, Some(e)) => e,
            (Some(n), None) => (1..=n).map(|k| k as f64).collect(),
            (None, None) => vec![1.0],
        };
        if energies.is_empty() || energies.len() > MAX_MODES {
            return Err(CliError::Usage(format!("n must be in 1..={MAX_MODES}")));
        }
        let spec = HamiltonianSpec::new(energies).map_err(|e| CliError::Usage(e.to_string()))?;
        let t_grid = opts.t_grid.clone().or(file.t_grid).unwrap_or_else(|| command.default_grid());
        if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(CliError::Usage("t-grid values must be finite and >= 0".into()));
        }
        let dt = opts.dt.or(file.dt).unwrap_or(1e-3);
        if !(dt.is_finite() && dt > 0.0) {
            return Err(CliError::Usage(format!("dt must be finite and > 0, got {dt}")));
        }
        let paths = opts.paths.or(file.paths).unwrap_or(10_000);
        let seed = opts.seed.or(file.seed);
        if command.is_stochastic() && seed.is_none() {
            return Err(CliError::Usage(format!("{} needs --seed", command.name())));
        }
        let psi = opts.psi.clone().or(file.psi).unwrap_or_else(|| "top".into());
        let phi = opts.phi.clone().or(file.phi).unwrap_or_else(|| psi.clone());
        let config = Self {
            command,
            spec,
            t_grid,
            dt,
            paths,
            seed,
            sigma: opts.sigma.or(file.sigma).unwrap_or_default(),
            process: opts.process.or(file.process).unwrap_or_default(),
            format: opts.format.or(file.format).unwrap_or_default(),
            out: opts.out.clone().or(file.out),
            psi: normalize_state(&psi),
            phi: normalize_state(&phi),
            corrupt_structure_constant: opts.corrupt_structure_constant,
        };
        config.psi_state()?;
        config.phi_state()?;
        Ok(config)
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn seed(&self) -> u64 {
        self.seed.expect("stochastic commands are validated to carry a seed")
    }

    pub fn mc_params(&self) -> McParams {
        McParams { n_paths: self.paths, dt: self.dt, seed: self.seed(), exec: Execution::default() }
    }

    pub fn psi_state(&self) -> Result<FockVector, CliError> {
        parse_state(&self.psi, self.n())
    }

    pub fn phi_state(&self) -> Result<FockVector, CliError> {
        parse_state(&self.phi, self.n())
    }

    /// Every parameter that influences the output, defaults included.
    /// The output path is left out so that reports written to different
    /// files compare equal.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), self.command.name().into());
        m.insert("n".into(), self.n().into());
        m.insert("energies".into(), self.spec.energies().iter().map(|&e| num(e)).collect());
        m.insert("t_grid".into(), self.t_grid.iter().map(|&t| num(t)).collect());
        m.insert("dt".into(), num(self.dt));
        m.insert("paths".into(), self.paths.into());
        m.insert("seed".into(), self.seed.map_or(Value::Null, Value::from));
        m.insert("sigma".into(), self.sigma.name().into());
        m.insert("process".into(), self.process.name().into());
        m.insert("format".into(), self.format.name().into());
        m.insert("psi".into(), self.psi.clone().into());
        m.insert("phi".into(), self.phi.clone().into());
        if self.corrupt_structure_constant {
            m.insert("corrupt_structure_constant".into(), true.into());
        }
        Value::Object(m)
    }
}

fn normalize_state(s: &str) -> String {
    s.split(',').map(str::trim).collect::<Vec<_>>().join(",")
}

pub fn parse_state(s: &str, n: usize) -> Result<FockVector, CliError> {
    let bad = |e: String| CliError::Usage(format!("bad state {s:?}: {e}"));
    match s {
        "vacuum" => FockVector::vacuum(n).map_err(|e| bad(e.to_string())),
        "top" => FockVector::top(n).map_err(|e| bad(e.to_string())),
        _ => {
            let modes = s
                .split(',')
                .map(|m| m.trim().parse::<usize>().map_err(|e| bad(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            FockVector::wedge(n, &modes).map_err(|e| bad(e.to_string()))
        }
    }
}
