//! Closed-form leading-order asymptotics for the moment-type estimators.
//!
//! All reports drop the remainder terms: they are asymptotic targets that
//! the simulation harness checks with ratio tolerances, never exact values.
//! The formulas for the star density estimator at a point `x` with target
//! density `f`, total weight `W` and sample size `n` are
//!
//! ```text
//! bias     = x^2 f''(x) / (2 alpha)
//! variance = W sqrt(alpha) f(x) / (2 n sqrt(pi) x^2)
//! ```
//!
//! with the normal limit `Normal(0, W f(x) / (2 x^2 sqrt(pi)))` for the
//! `sqrt(n) / alpha^{1/4}`-scaled error. The survival estimator swaps
//! `f'' -> -f'`, `f -> S`, and one power of `x`.

use crate::error::{Error, Result};
use crate::models::TruthScenario;
use std::f64::consts::PI;

/// Leading-order asymptotic predictions at a fixed evaluation point.
#[derive(Clone, Copy, Debug)]
pub struct AsymptoticReport {
    pub bias: f64,
    pub variance: f64,
    /// `variance + bias^2`.
    pub mse: f64,
    /// Mean of the limiting normal law of the scaled error (zero under
    /// undersmoothing).
    pub normal_mean: f64,
    /// Variance of that limiting normal law.
    pub normal_variance: f64,
    /// MSE decay exponent in `n` at the rate-optimal smoothing choice.
    pub rate_exponent: f64,
}

impl AsymptoticReport {
    /// Limit mean of the scaled error when the smoothing parameter follows
    /// the local MSE-balancing rule: `±sqrt(normal_variance)` carrying the
    /// sign of the leading bias.
    pub fn balanced_limit_mean(&self) -> f64 {
        if self.bias == 0.0 {
            0.0
        } else {
            self.bias.signum() * self.normal_variance.sqrt()
        }
    }
}

fn check_common(total_weight: f64, alpha: f64, n: usize) -> Result<()> {
    if !total_weight.is_finite() || total_weight <= 0.0 {
        return Err(Error::Domain(format!(
            "total weight must be positive, got {total_weight}"
        )));
    }
    if !alpha.is_finite() || alpha < 1.0 {
        return Err(Error::Domain(format!("alpha must be >= 1, got {alpha}")));
    }
    if n == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    Ok(())
}

/// Asymptotic report for the star density estimator.
pub fn density_asymptotics(
    scenario: &TruthScenario,
    total_weight: f64,
    x: f64,
    alpha: f64,
    n: usize,
) -> Result<AsymptoticReport> {
    check_common(total_weight, alpha, n)?;
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("x must be positive, got {x}")));
    }
    let f = scenario.density(x);
    if f.is_nan() || f <= 0.0 {
        return Err(Error::Domain(format!(
            "target density must be positive at x = {x}"
        )));
    }
    let curvature = scenario.density_second(x)?;
    let bias = x * x * curvature / (2.0 * alpha);
    let normal_variance = total_weight * f / (2.0 * x * x * PI.sqrt());
    let variance = normal_variance * alpha.sqrt() / n as f64;
    Ok(AsymptoticReport {
        bias,
        variance,
        mse: variance + bias * bias,
        normal_mean: 0.0,
        normal_variance,
        rate_exponent: -0.8,
    })
}

/// Asymptotic report for the survival estimator.
pub fn survival_asymptotics(
    scenario: &TruthScenario,
    total_weight: f64,
    x: f64,
    alpha: f64,
    n: usize,
) -> Result<AsymptoticReport> {
    check_common(total_weight, alpha, n)?;
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("x must be positive, got {x}")));
    }
    let survival = scenario.survival(x);
    if survival.is_nan() || survival <= 0.0 {
        return Err(Error::Domain(format!(
            "survival must be positive at x = {x}"
        )));
    }
    let slope = scenario.density_deriv(x)?;
    let bias = -x * x * slope / (2.0 * alpha);
    let normal_variance = total_weight * survival / (2.0 * x * PI.sqrt());
    let variance = normal_variance * alpha.sqrt() / n as f64;
    Ok(AsymptoticReport {
        bias,
        variance,
        mse: variance + bias * bias,
        normal_mean: 0.0,
        normal_variance,
        rate_exponent: -0.8,
    })
}

/// The two MSE predictions at the optimal rate `alpha ~ n^{2/5}`.
#[derive(Clone, Copy, Debug)]
pub struct MseOptimalPrediction {
    /// `n^{-4/5} [W f / (2 sqrt(pi) x^2) + x^4 f''^2 / 4]`, the value at the
    /// plain global rate.
    pub fixed_rate: f64,
    /// `n^{-4/5} [W^2 |f''| f^2 / (pi x^2 sqrt(2))]^{2/5}`, the value under
    /// the local balancing rule; `None` where the curvature vanishes.
    pub local_rate: Option<f64>,
}

/// Rate-optimal MSE predictions for the star density estimator.
pub fn density_mse_optimal(
    scenario: &TruthScenario,
    total_weight: f64,
    x: f64,
    n: usize,
) -> Result<MseOptimalPrediction> {
    check_common(total_weight, 1.0, n)?;
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("x must be positive, got {x}")));
    }
    let f = scenario.density(x);
    if f.is_nan() || f <= 0.0 {
        return Err(Error::Domain(format!(
            "target density must be positive at x = {x}"
        )));
    }
    let curvature = scenario.density_second(x)?;
    let decay = (n as f64).powf(-0.8);
    let fixed =
        total_weight * f / (2.0 * PI.sqrt() * x * x) + x.powi(4) * curvature * curvature / 4.0;
    let local = if curvature == 0.0 {
        None
    } else {
        let inner = total_weight * total_weight * curvature.abs() * f * f
            / (PI * x * x * std::f64::consts::SQRT_2);
        Some(decay * inner.powf(0.4))
    };
    Ok(MseOptimalPrediction {
        fixed_rate: decay * fixed,
        local_rate: local,
    })
}

/// Large-alpha limit of the second moment of one star-estimator term:
/// `W sqrt(alpha) f(x) / (2 sqrt(pi) x^2)`.
pub fn density_term_second_moment_limit(
    scenario: &TruthScenario,
    total_weight: f64,
    x: f64,
    alpha: f64,
) -> f64 {
    total_weight * alpha.sqrt() * scenario.density(x) / (2.0 * PI.sqrt() * x * x)
}

/// Survival analog: `W sqrt(alpha) S(x) / (2 sqrt(pi) x)`.
pub fn survival_term_second_moment_limit(
    scenario: &TruthScenario,
    total_weight: f64,
    x: f64,
    alpha: f64,
) -> f64 {
    total_weight * alpha.sqrt() * scenario.survival(x) / (2.0 * PI.sqrt() * x)
}

/// Roughness `∫ K^2` and second moment `∫ u^2 K` of the smoothing kernel
/// used by the kernel-type baseline. Defaults describe the standard normal
/// kernel over the whole real line.
#[derive(Clone, Copy, Debug)]
pub struct KernelConstants {
    pub roughness: f64,
    pub second_moment: f64,
}

impl Default for KernelConstants {
    fn default() -> Self {
        Self {
            roughness: 1.0 / (2.0 * PI.sqrt()),
            second_moment: 1.0,
        }
    }
}

/// Leading-order MSE of the kernel-type density estimator:
/// `W f(x) R(K) / (n h x) + h^4 f''(x)^2 mu_2^2 / 4`.
pub fn jones_mse(
    scenario: &TruthScenario,
    total_weight: f64,
    x: f64,
    bandwidth: f64,
    n: usize,
    constants: KernelConstants,
) -> Result<f64> {
    check_common(total_weight, 1.0, n)?;
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("x must be positive, got {x}")));
    }
    if !bandwidth.is_finite() || bandwidth <= 0.0 {
        return Err(Error::Domain(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    let f = scenario.density(x);
    let curvature = scenario.density_second(x)?;
    let variance = total_weight * f * constants.roughness / (n as f64 * bandwidth * x);
    let mu2 = constants.second_moment;
    let bias_sq = 0.25 * bandwidth.powi(4) * curvature * curvature * mu2 * mu2;
    Ok(variance + bias_sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::builtin_scenario;
    use approx::assert_relative_eq;

    #[test]
    fn density_report_reference_values() {
        let (scenario, model) = builtin_scenario("lb-exp2").unwrap();
        let w = model.known_weight().unwrap();
        let r = density_asymptotics(&scenario, w, 1.0, 10.0, 300).unwrap();
        assert_relative_eq!(r.bias, 0.054134113294645077, max_relative = 1e-14);
        assert_relative_eq!(r.variance, 4.0242490431467760e-4, max_relative = 1e-14);
        assert_relative_eq!(
            r.normal_variance,
            0.038177378544291079,
            max_relative = 1e-14
        );
        assert_eq!(r.normal_mean, 0.0);
        assert_eq!(r.rate_exponent, -0.8);
        assert_relative_eq!(r.mse, r.variance + r.bias * r.bias, max_relative = 1e-15);
        assert!(r.mse >= r.bias * r.bias - 1e-15);
    }

    #[test]
    fn density_bias_vanishes_with_curvature() {
        // the excess target has f''(4) = 0
        let (scenario, _) = builtin_scenario("excess-gamma22").unwrap();
        let r = density_asymptotics(&scenario, 4.0, 4.0, 16.0, 100).unwrap();
        assert_eq!(r.bias, 0.0);
        assert_eq!(r.balanced_limit_mean(), 0.0);
    }

    #[test]
    fn mse_optimal_reference_values() {
        let (scenario, model) = builtin_scenario("lb-exp2").unwrap();
        let w = model.known_weight().unwrap();
        let p = density_mse_optimal(&scenario, w, 1.0, 300).unwrap();
        let decay = 300f64.powf(-0.8);
        assert_relative_eq!(
            p.fixed_rate,
            decay * 0.33122760076403796,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            p.local_rate.unwrap(),
            decay * 0.11477922552710017,
            max_relative = 1e-13
        );
    }

    #[test]
    fn mse_optimal_decreases_in_n() {
        let (scenario, model) = builtin_scenario("lb-exp2").unwrap();
        let w = model.known_weight().unwrap();
        let mut prev = f64::INFINITY;
        for n in [100, 1000, 10_000, 100_000] {
            let p = density_mse_optimal(&scenario, w, 1.0, n).unwrap();
            assert!(p.fixed_rate < prev);
            prev = p.fixed_rate;
        }
    }

    #[test]
    fn mse_optimal_matches_pointwise_report_at_the_global_rate() {
        // same closed forms, so agreement is to rounding only
        let (scenario, model) = builtin_scenario("lb-exp2").unwrap();
        let w = model.known_weight().unwrap();
        let n = 4096;
        let alpha = (n as f64).powf(0.4);
        let report = density_asymptotics(&scenario, w, 1.0, alpha, n).unwrap();
        let p = density_mse_optimal(&scenario, w, 1.0, n).unwrap();
        assert_relative_eq!(report.mse, p.fixed_rate, max_relative = 1e-12);
    }

    #[test]
    fn local_mse_constant_agrees_with_the_balance_route() {
        // plugging the local rule into the pointwise report must reproduce
        // the printed closed form (they are algebraically equal)
        let (scenario, model) = builtin_scenario("lb-exp2").unwrap();
        let w = model.known_weight().unwrap();
        let n = 300;
        let alpha = crate::smoothing::alpha_local_density(&scenario, w, 1.0, n, 0.4).unwrap();
        let report = density_asymptotics(&scenario, w, 1.0, alpha, n).unwrap();
        let p = density_mse_optimal(&scenario, w, 1.0, n).unwrap();
        assert_relative_eq!(report.mse, p.local_rate.unwrap(), max_relative = 1e-10);
    }

    #[test]
    fn local_branch_degenerate_when_curvature_vanishes() {
        let (scenario, _) = builtin_scenario("excess-gamma22").unwrap();
        let p = density_mse_optimal(&scenario, 4.0, 4.0, 100).unwrap();
        assert!(p.local_rate.is_none());
        assert!(p.fixed_rate > 0.0);
    }

    #[test]
    fn survival_report_reference_values() {
        let (scenario, model) = builtin_scenario("excess-gamma22").unwrap();
        let w = model.known_weight().unwrap();
        // f'(2) = 0 at the gamma mode
        let r = survival_asymptotics(&scenario, w, 2.0, 12.0, 400).unwrap();
        assert_eq!(r.bias, 0.0);
        assert_relative_eq!(r.normal_variance, 0.41510749742059470, max_relative = 1e-14);

        let r = survival_asymptotics(&scenario, w, 4.0, 10.0, 400).unwrap();
        assert_relative_eq!(r.bias, 0.027067056647322538, max_relative = 1e-14);
        // balanced limit mean carries the bias sign
        assert!(r.balanced_limit_mean() > 0.0);
        // normal variance decays with the survival tail
        let far = survival_asymptotics(&scenario, w, 20.0, 10.0, 400).unwrap();
        assert!(far.normal_variance < r.normal_variance);
    }

    #[test]
    fn jones_mse_reference_value() {
        let (scenario, model) = builtin_scenario("lb-exp2").unwrap();
        let w = model.known_weight().unwrap();
        let h = 300f64.powf(-0.2);
        let v = jones_mse(&scenario, w, 1.0, h, 300, KernelConstants::default()).unwrap();
        assert_relative_eq!(v, 0.0034548525359197712, max_relative = 1e-13);
    }

    #[test]
    fn jones_mse_limits() {
        let (scenario, model) = builtin_scenario("lb-exp2").unwrap();
        let w = model.known_weight().unwrap();
        // variance term blows up as the bandwidth collapses
        let tiny = jones_mse(&scenario, w, 1.0, 1e-9, 300, KernelConstants::default()).unwrap();
        assert!(tiny > 1e5);
        // zero curvature leaves the pure variance term
        let (excess, _) = builtin_scenario("excess-gamma22").unwrap();
        let v = jones_mse(&excess, 4.0, 4.0, 0.25, 300, KernelConstants::default()).unwrap();
        let f = excess.density(4.0);
        assert_relative_eq!(
            v,
            4.0 * f / (2.0 * PI.sqrt()) / (300.0 * 0.25 * 4.0),
            max_relative = 1e-12
        );
        assert!(jones_mse(&scenario, w, 1.0, 0.0, 300, KernelConstants::default()).is_err());
    }
}
