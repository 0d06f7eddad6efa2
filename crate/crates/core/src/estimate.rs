use crate::matrix::C64;

/// Sample mean of complex observations with its standard error,
/// `sqrt(Σ|z_i - mean|² / (N (N - 1)))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: C64,
    pub std_error: f64,
    pub n_samples: usize,
}

impl McEstimate {
    pub fn from_samples(samples: &[C64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self { mean: C64::new(f64::NAN, f64::NAN), std_error: f64::NAN, n_samples: 0 };
        }
        let mean = samples.iter().sum::<C64>() / n as f64;
        let std_error = if n < 2 {
            f64::NAN
        } else {
            let ss: f64 = samples.iter().map(|z| (z - mean).norm_sqr()).sum();
            (ss / (n as f64 * (n as f64 - 1.0))).sqrt()
        };
        Self { mean, std_error, n_samples: n }
    }

    /// |mean - target| / std_error; zero when both numerator and error vanish.
    pub fn z_score(&self, target: C64) -> f64 {
        let diff = (self.mean - target).norm();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_error
        }
    }

    pub fn within(&self, target: C64, sigmas: f64) -> bool {
        self.z_score(target) <= sigmas
    }
}
