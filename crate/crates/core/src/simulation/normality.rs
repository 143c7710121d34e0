//! Kolmogorov-Smirnov normality checks for standardized replicate values.

use super::{replicate_estimates, EstimatorId, WeightMode};
use crate::error::{Error, Result};
use crate::models::builtin_scenario;
use crate::simulation::moments::exact_estimator_mean_var;
use crate::smoothing::{AlphaContext, AlphaRule};
use crate::theory::{density_asymptotics, survival_asymptotics};

/// What the replicate values are centered at before standardization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Centering {
    /// The exact estimator mean (quadrature oracle): isolates the pure
    /// central-limit behaviour at any smoothing rate.
    ExactMean,
    /// The true target value: exposes the bias term, which only vanishes
    /// in the limit under undersmoothing.
    TrueValue,
}

/// What the centered values are divided by.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scaling {
    /// Exact standard deviation of the estimator (quadrature oracle).
    ExactVariance,
    /// The leading-order theory standard deviation
    /// `sqrt(normal_variance · sqrt(alpha) / n)`.
    TheoryVariance,
}

#[derive(Clone, Debug)]
pub struct NormalityConfig {
    pub scenario: String,
    pub estimator: EstimatorId,
    pub n: usize,
    pub x: f64,
    pub alpha_rule: AlphaRule,
    pub replicates: usize,
    pub root_seed: u64,
    pub centering: Centering,
    pub scaling: Scaling,
}

#[derive(Clone, Copy, Debug)]
pub struct NormalityResult {
    /// One-sample KS distance of the standardized values (after removing
    /// the predicted limit mean) against the standard normal cdf.
    pub ks_distance: f64,
    pub replicates: usize,
    /// Mean of the standardized values before removing the limit mean.
    pub standardized_mean: f64,
    /// Predicted limit mean: 0 under exact-mean centering, the leading
    /// bias over the scale under true-value centering.
    pub limit_mean: f64,
    /// The smoothing parameter that was used.
    pub alpha: f64,
}

pub fn normality_experiment(config: &NormalityConfig) -> Result<NormalityResult> {
    if config.replicates < 100 {
        return Err(Error::Config(format!(
            "a KS check needs at least 100 replicates, got {}",
            config.replicates
        )));
    }
    if !matches!(
        config.estimator,
        EstimatorId::DensityStar | EstimatorId::Survival
    ) {
        return Err(Error::Config(
            "the normality experiment covers the star density and survival estimators".into(),
        ));
    }
    let (scenario, model) = builtin_scenario(&config.scenario)?;
    super::check_compatibility(config.estimator, &model)?;
    let w = model.known_weight()?;
    let alpha = config
        .alpha_rule
        .resolve(&AlphaContext::new(config.n, config.x).with_truth(&scenario, w))?;

    let rows = replicate_estimates(
        &model,
        &config.scenario,
        config.estimator,
        config.n,
        &[(config.x, alpha)],
        WeightMode::Known,
        config.root_seed,
        config.replicates,
    )?;
    let values: Vec<f64> = rows.iter().map(|r| r[0]).collect();

    let report = match config.estimator {
        EstimatorId::DensityStar => density_asymptotics(&scenario, w, config.x, alpha, config.n)?,
        EstimatorId::Survival => survival_asymptotics(&scenario, w, config.x, alpha, config.n)?,
        _ => unreachable!(),
    };
    let truth = if config.estimator.targets_survival() {
        scenario.survival(config.x)
    } else {
        scenario.density(config.x)
    };

    let center = match config.centering {
        Centering::ExactMean => {
            exact_estimator_mean_var(&scenario, &model, config.x, alpha, config.n)?.0
        }
        Centering::TrueValue => truth,
    };
    let scale = match config.scaling {
        Scaling::ExactVariance => {
            exact_estimator_mean_var(&scenario, &model, config.x, alpha, config.n)?
                .1
                .sqrt()
        }
        Scaling::TheoryVariance => report.variance.sqrt(),
    };
    if scale.is_nan() || scale <= 0.0 {
        return Err(Error::Numeric(format!(
            "standardization scale is not positive: {scale}"
        )));
    }
    let limit_mean = match config.centering {
        Centering::ExactMean => 0.0,
        Centering::TrueValue => report.bias / scale,
    };

    let standardized: Vec<f64> = values.iter().map(|v| (v - center) / scale).collect();
    let standardized_mean = standardized.iter().sum::<f64>() / standardized.len() as f64;
    let shifted: Vec<f64> = standardized.iter().map(|z| z - limit_mean).collect();
    Ok(NormalityResult {
        ks_distance: ks_distance_standard_normal(&shifted),
        replicates: config.replicates,
        standardized_mean,
        limit_mean,
        alpha,
    })
}

/// One-sample Kolmogorov-Smirnov distance against the standard normal cdf.
pub fn ks_distance_standard_normal(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        let c = standard_normal_cdf(v);
        d = d.max(c - i as f64 / n).max((i as f64 + 1.0) / n - c);
    }
    d
}

/// Standard normal cdf, accurate to roughly 1e-15 (West's double-precision
/// rational scheme with a continued-fraction tail).
pub(crate) fn standard_normal_cdf(x: f64) -> f64 {
    let z = x.abs();
    let cum = if z > 37.0 {
        0.0
    } else {
        let e = (-z * z / 2.0).exp();
        if z < 7.071_067_811_865_475 {
            let num = (((((3.52624965998911e-2 * z + 0.700383064443688) * z + 6.37396220353165)
                * z
                + 33.912866078383)
                * z
                + 112.079291497871)
                * z
                + 221.213596169931)
                * z
                + 220.206867912376;
            let den = ((((((8.83883476483184e-2 * z + 1.75566716318264) * z + 16.064177579207)
                * z
                + 86.7807322029461)
                * z
                + 296.564248779674)
                * z
                + 637.333633378831)
                * z
                + 793.826512519948)
                * z
                + 440.413735824752;
            e * num / den
        } else {
            let b = z + 0.65;
            let b = z + 4.0 / b;
            let b = z + 3.0 / b;
            let b = z + 2.0 / b;
            let b = z + 1.0 / b;
            e / (b * 2.506_628_274_631_000_5)
        }
    };
    if x <= 0.0 {
        cum
    } else {
        1.0 - cum
    }
}
