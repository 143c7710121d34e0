//! Kernel-type comparison estimators.
//!
//! For length-biased samples the baseline is the weighted kernel smoother
//! `f_h(x) = (W / nh) Σ (1/Y_i) K((x - Y_i)/h)`. For excess-life samples
//! the survival baseline is the plain kernel density of the observations
//! rescaled by the total weight, `S_h(x) = W ĝ_h(x)`, mirroring the
//! identity `g = S / W`.

use crate::error::{Error, Result};
use crate::models::{ModelKind, Sample, WeightedModel};
use crate::theory::KernelConstants;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelId {
    StandardNormal,
}

/// Smoothing kernel plus bandwidth for the baseline estimators.
#[derive(Clone, Copy, Debug)]
pub struct KernelSpec {
    pub kernel: KernelId,
    pub bandwidth: f64,
}

impl KernelSpec {
    pub fn standard_normal(bandwidth: f64) -> Result<Self> {
        if !bandwidth.is_finite() || bandwidth <= 0.0 {
            return Err(Error::Domain(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        Ok(Self {
            kernel: KernelId::StandardNormal,
            bandwidth,
        })
    }

    /// Bandwidth from the rate rule `h = n^{-beta}`, `0 < beta < 1/4`.
    pub fn from_rate(n: usize, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("sample size must be at least 1".into()));
        }
        if !(beta > 0.0 && beta < 0.25) {
            return Err(Error::Config(format!(
                "bandwidth exponent must lie in (0, 1/4), got {beta}"
            )));
        }
        Self::standard_normal((n as f64).powf(-beta))
    }

    pub fn constants(&self) -> KernelConstants {
        match self.kernel {
            KernelId::StandardNormal => KernelConstants::default(),
        }
    }
}

fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Weighted kernel density estimator for length-biased samples.
pub fn jones_density(
    sample: &Sample,
    model: &WeightedModel,
    weight: f64,
    spec: &KernelSpec,
    x: f64,
) -> Result<f64> {
    if model.kind() != ModelKind::LengthBiased {
        return Err(Error::Config(
            "the kernel density baseline is defined for length-biased models".into(),
        ));
    }
    common_checks(weight, spec, x)?;
    let h = spec.bandwidth;
    let mut acc = 0.0;
    for &y in sample.values() {
        acc += phi((x - y) / h) / y;
    }
    Ok(weight * acc / (sample.len() as f64 * h))
}

/// Kernel-type survival estimator for excess-life samples.
pub fn jones_survival(
    sample: &Sample,
    model: &WeightedModel,
    weight: f64,
    spec: &KernelSpec,
    x: f64,
) -> Result<f64> {
    if model.kind() != ModelKind::ExcessLife {
        return Err(Error::Config(
            "the kernel survival baseline is defined for excess-life models".into(),
        ));
    }
    common_checks(weight, spec, x)?;
    let h = spec.bandwidth;
    let mut acc = 0.0;
    for &y in sample.values() {
        acc += phi((x - y) / h);
    }
    Ok(weight * acc / (sample.len() as f64 * h))
}

fn common_checks(weight: f64, spec: &KernelSpec, x: f64) -> Result<()> {
    if !weight.is_finite() || weight <= 0.0 {
        return Err(Error::Domain(format!(
            "total weight must be positive, got {weight}"
        )));
    }
    if !spec.bandwidth.is_finite() || spec.bandwidth <= 0.0 {
        return Err(Error::Domain(format!(
            "bandwidth must be positive, got {}",
            spec.bandwidth
        )));
    }
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "evaluation point must be positive, got {x}"
        )));
    }
    Ok(())
}
