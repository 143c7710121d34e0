//! Deterministic scenario samplers.
//!
//! Every replicate owns a ChaCha stream whose 32-byte seed encodes the
//! root seed, the sample size and the replicate index, so distinct
//! `(n, replicate)` pairs can never share a stream and results are
//! bit-identical across thread counts and platforms.

use crate::error::{Error, Result};
use crate::models::{Provenance, Sample};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub(crate) fn replicate_seed(root_seed: u64, n: usize, replicate: u64) -> [u8; 32] {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&root_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&(n as u64).to_le_bytes());
    seed[16..24].copy_from_slice(&replicate.to_le_bytes());
    seed[24..32].copy_from_slice(b"momdens\0");
    seed
}

pub(crate) fn replicate_rng(root_seed: u64, n: usize, replicate: u64) -> ChaCha12Rng {
    ChaCha12Rng::from_seed(replicate_seed(root_seed, n, replicate))
}

/// Variate source over one ChaCha stream. Normals come from the polar
/// rejection method with the spare value cached; gammas with shape > 1 use
/// the Marsaglia-Tsang squeeze, shape 1 falls back to inversion.
pub(crate) struct Draws {
    rng: ChaCha12Rng,
    spare_normal: Option<f64>,
}

impl Draws {
    pub(crate) fn new(rng: ChaCha12Rng) -> Self {
        Self {
            rng,
            spare_normal: None,
        }
    }

    /// Uniform draw in the open interval (0, 1).
    pub(crate) fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub(crate) fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let scale = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v * scale);
                return u * scale;
            }
        }
    }

    pub(crate) fn gamma(&mut self, shape: f64, scale: f64) -> f64 {
        debug_assert!(shape >= 1.0 && scale > 0.0);
        if shape == 1.0 {
            return -scale * self.uniform().ln();
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (3.0 * d.sqrt());
        loop {
            let z = self.normal();
            let t = 1.0 + c * z;
            if t <= 0.0 {
                continue;
            }
            let v = t * t * t;
            let u = self.uniform();
            if u < 1.0 - 0.0331 * z * z * z * z {
                return scale * d * v;
            }
            if u.ln() < 0.5 * z * z + d * (1.0 - v + v.ln()) {
                return scale * d * v;
            }
        }
    }
}

pub(crate) fn draw_scenario(name: &str, n: usize, rng: ChaCha12Rng) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    let mut draws = Draws::new(rng);
    let values = match name {
        // observed law Gamma(2, scale 1/2)
        "lb-exp2" => (0..n).map(|_| draws.gamma(2.0, 0.5)).collect(),
        // equal mixture of Gamma(1, 2) and Gamma(2, 2)
        "excess-gamma22" => (0..n)
            .map(|_| {
                if draws.uniform() < 0.5 {
                    draws.gamma(1.0, 2.0)
                } else {
                    draws.gamma(2.0, 2.0)
                }
            })
            .collect(),
        other => {
            return Err(Error::Config(format!(
                "unknown scenario '{other}' (available: lb-exp2, excess-gamma22)"
            )))
        }
    };
    Ok(values)
}

/// Draw `n` observations from a built-in scenario, deterministically in
/// `(name, n, seed)`.
pub fn sample_scenario(name: &str, n: usize, seed: u64) -> Result<Sample> {
    let values = draw_scenario(name, n, replicate_rng(seed, n, 0))?;
    Ok(Sample::new(values)?.with_provenance(Provenance {
        scenario: name.to_string(),
        seed,
    }))
}

/// Standard normal draws from the same deterministic stream family; used
/// for self-calibrating the normality test.
pub fn standard_normal_sample(n: usize, seed: u64) -> Vec<f64> {
    let mut draws = Draws::new(replicate_rng(seed, n, u64::MAX));
    (0..n).map(|_| draws.normal()).collect()
}
