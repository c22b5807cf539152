use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::quantum::NoiseParams;

use super::CostError;

pub const DEFAULT_SHOTS: u64 = 10_000;

/// The three simulation regimes a benchmark cell can use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NoiseLevel {
    Exact,
    Shots,
    Device,
}

impl NoiseLevel {
    pub const ALL: [NoiseLevel; 3] = [NoiseLevel::Exact, NoiseLevel::Shots, NoiseLevel::Device];

    pub fn name(self) -> &'static str {
        match self {
            NoiseLevel::Exact => "exact",
            NoiseLevel::Shots => "shots",
            NoiseLevel::Device => "device",
        }
    }
}

impl fmt::Display for NoiseLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseLevel {
    type Err = CostError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "exact" | "sv" | "statevector" => Ok(NoiseLevel::Exact),
            "shots" | "q" | "qasm" => Ok(NoiseLevel::Shots),
            "device" | "qn" | "noisy" => Ok(NoiseLevel::Device),
            _ => Err(CostError::UnknownNoiseLevel(s.to_string())),
        }
    }
}

/// How expectation values are obtained.
///
/// Sampling backends own their random stream, so two backends built from the
/// same seed draw identical shot outcomes for identical probabilities.
#[derive(Debug, Clone)]
pub enum NoiseBackend {
    Exact,
    ShotSampling {
        shots: u64,
        rng: ChaCha8Rng,
    },
    DeviceNoise {
        noise: NoiseParams,
        shots: u64,
        rng: ChaCha8Rng,
    },
}

impl NoiseBackend {
    pub fn shot_sampling(shots: u64, seed: u64) -> Result<Self, CostError> {
        if shots == 0 {
            return Err(CostError::ZeroShots);
        }
        Ok(NoiseBackend::ShotSampling {
            shots,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn device_noise(noise: NoiseParams, shots: u64, seed: u64) -> Result<Self, CostError> {
        if shots == 0 {
            return Err(CostError::ZeroShots);
        }
        noise.validate()?;
        Ok(NoiseBackend::DeviceNoise {
            noise,
            shots,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Backend for `level`; `shots` and `noise` are ignored where irrelevant.
    pub fn for_level(level: NoiseLevel, shots: u64, noise: NoiseParams, seed: u64) -> Result<Self, CostError> {
        match level {
            NoiseLevel::Exact => Ok(NoiseBackend::Exact),
            NoiseLevel::Shots => Self::shot_sampling(shots, seed),
            NoiseLevel::Device => Self::device_noise(noise, shots, seed),
        }
    }

    pub fn level(&self) -> NoiseLevel {
        match self {
            NoiseBackend::Exact => NoiseLevel::Exact,
            NoiseBackend::ShotSampling { .. } => NoiseLevel::Shots,
            NoiseBackend::DeviceNoise { .. } => NoiseLevel::Device,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, NoiseBackend::Exact)
    }

    /// Estimate of an expectation whose exact value is `true_value`, read
    /// out through a Hadamard-test ancilla.
    ///
    /// The device variant applies only the readout error here; gate noise
    /// needs the circuit and is handled by the cost evaluator.
    pub fn estimate_expectation(&mut self, true_value: f64) -> f64 {
        let p0 = 0.5 * (1.0 + true_value);
        match self {
            NoiseBackend::Exact => true_value,
            NoiseBackend::ShotSampling { .. } => self.sample_p0(p0),
            NoiseBackend::DeviceNoise { noise, .. } => {
                let p = crate::quantum::readout_prob0(p0, noise.p_readout);
                self.sample_p0(p)
            }
        }
    }

    /// Draws `shots` ancilla outcomes with P(0) = `p0` and returns 2k/shots − 1.
    /// The exact backend returns 2·p0 − 1.
    pub fn sample_p0(&mut self, p0: f64) -> f64 {
        let p0 = snap_probability(p0);
        match self {
            NoiseBackend::Exact => 2.0 * p0 - 1.0,
            NoiseBackend::ShotSampling { shots, rng } | NoiseBackend::DeviceNoise { shots, rng, .. } => {
                let k = Binomial::new(*shots, p0)
                    .expect("probability clamped to [0, 1]")
                    .sample(rng);
                2.0 * k as f64 / *shots as f64 - 1.0
            }
        }
    }
}

/// Clamps to [0, 1] and treats probabilities within 1e-12 of an endpoint as
/// certain, so that round-off from different simulation routes cannot change
/// how the sampler consumes its random stream.
fn snap_probability(p: f64) -> f64 {
    if p <= 1e-12 {
        0.0
    } else if p >= 1.0 - 1e-12 {
        1.0
    } else {
        p
    }
}
