//! Exact (quadrature-based) moments of single estimator terms.
//!
//! For a length-biased model the k-th moment of one star-estimator term
//! reduces to a gamma-kernel integral with an explicit prefactor:
//!
//! ```text
//! E M^k = W^{k-1} (alpha/x)^{2(k-1)} Γ(k(alpha-2)+2) / (Γ(alpha)^k k^{k(alpha-2)+2})
//!         · ∫ h_{alpha,x,k}(u) f(u) du
//! ```
//!
//! The survival analog for k = 2 involves a gamma weight with shape
//! `2 alpha - 1` and rate `2 alpha / x` instead. Prefactors are assembled
//! in log space; they stay moderate because the gamma-ratio growth cancels
//! against the `k^{-shape}` factor.

use crate::error::{Error, Result};
use crate::models::{ModelKind, TruthScenario, WeightedModel};
use crate::special::{
    integrate, integrate_gamma_weight, lgamma, DeltaKernel, GammaWeight, QuadratureSpec,
};

/// Exact k-th moment (k = 1 or 2) of one estimator term: the star density
/// term for length-biased models, the survival term for excess-life models.
pub fn exact_estimator_moments(
    scenario: &TruthScenario,
    model: &WeightedModel,
    x: f64,
    alpha: f64,
    k: u32,
) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("x must be positive, got {x}")));
    }
    if !alpha.is_finite() || alpha < 1.0 {
        return Err(Error::Domain(format!("alpha must be >= 1, got {alpha}")));
    }
    if k == 0 || k > 2 {
        return Err(Error::Domain(format!(
            "term moments are implemented for k = 1, 2; got {k}"
        )));
    }
    if k == 2 && alpha < 2.0 {
        return Err(Error::Domain(format!(
            "the second term moment needs alpha >= 2, got {alpha}"
        )));
    }
    let w = model.known_weight()?;
    let spec = QuadratureSpec::default();
    match model.kind() {
        ModelKind::LengthBiased => {
            if k == 1 {
                // prefactor is exactly 1: the term mean is the smoothed density
                let kernel = DeltaKernel::new(alpha, x, 1)?;
                integrate(|u| scenario.density(u), Some(&kernel), &spec)
            } else {
                let kernel = DeltaKernel::new(alpha, x, 2)?;
                let log_pre = w.ln() + 2.0 * (alpha.ln() - x.ln()) + lgamma(2.0 * alpha - 2.0)
                    - 2.0 * lgamma(alpha)
                    - (2.0 * alpha - 2.0) * std::f64::consts::LN_2;
                let smoothed = integrate(|u| scenario.density(u), Some(&kernel), &spec)?;
                Ok(log_pre.exp() * smoothed)
            }
        }
        ModelKind::ExcessLife => {
            if k == 1 {
                let kernel = DeltaKernel::new(alpha, x, 1)?;
                integrate(|u| scenario.survival(u), Some(&kernel), &spec)
            } else {
                let weight = GammaWeight {
                    shape: 2.0 * alpha - 1.0,
                    rate: 2.0 * alpha / x,
                };
                let log_pre = w.ln() + alpha.ln() - x.ln() + lgamma(2.0 * alpha - 1.0)
                    - 2.0 * lgamma(alpha)
                    - (2.0 * alpha - 1.0) * std::f64::consts::LN_2;
                let smoothed = integrate_gamma_weight(&|u| scenario.survival(u), &weight, &spec)?;
                Ok(log_pre.exp() * smoothed)
            }
        }
        _ => Err(Error::Config(
            "exact term moments are defined for length-biased and excess-life models".into(),
        )),
    }
}

/// Exact mean and variance of the n-term estimator at `(x, alpha)`.
pub fn exact_estimator_mean_var(
    scenario: &TruthScenario,
    model: &WeightedModel,
    x: f64,
    alpha: f64,
    n: usize,
) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    let m1 = exact_estimator_moments(scenario, model, x, alpha, 1)?;
    let m2 = exact_estimator_moments(scenario, model, x, alpha, 2)?;
    Ok((m1, (m2 - m1 * m1) / n as f64))
}
