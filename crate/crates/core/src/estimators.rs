//! Moment-type estimators.
//!
//! Every estimator here is an average of per-observation gamma-kernel terms
//! computed in log space, summed in sample order (which makes results
//! bit-exact regardless of where the call happens). Two density estimators
//! are exposed for length-biased data: the basic one carries an
//! `(alpha - 1)` factor and needs `alpha >= 2`; the modified ("star") one
//! carries an `alpha` factor, works from `alpha >= 1`, and is the variant
//! the asymptotic theory in [`crate::theory`] describes.

use crate::error::{Error, Result};
use crate::models::{ModelKind, Sample, WeightedModel};
use crate::special::lgamma;

/// A weighted empirical moment estimate.
#[derive(Clone, Copy, Debug)]
pub struct MomentEstimate {
    pub order: u32,
    pub value: f64,
    /// The total weight that was plugged in (known `W` or its estimate).
    pub weight_used: f64,
}

/// A pointwise estimate over an evaluation grid.
#[derive(Clone, Debug)]
pub struct EstimateCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub alphas: Vec<f64>,
    pub estimator: String,
}

impl EstimateCurve {
    /// Evaluate `eval(x, alpha)` over `(x, alpha)` pairs whose x components
    /// must be strictly increasing and positive.
    pub fn build<F>(estimator: impl Into<String>, points: &[(f64, f64)], eval: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<f64>,
    {
        if points.is_empty() {
            return Err(Error::Config("estimate grid must be nonempty".into()));
        }
        let mut prev = 0.0;
        for &(x, _) in points {
            if !x.is_finite() || x <= prev {
                return Err(Error::Config(format!(
                    "estimate grid must be strictly increasing and positive, got {x} after {prev}"
                )));
            }
            prev = x;
        }
        let mut values = Vec::with_capacity(points.len());
        for &(x, alpha) in points {
            values.push(eval(x, alpha)?);
        }
        Ok(Self {
            grid: points.iter().map(|p| p.0).collect(),
            values,
            alphas: points.iter().map(|p| p.1).collect(),
            estimator: estimator.into(),
        })
    }
}

fn check_point(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "evaluation point {name} must be positive, got {x}"
        )));
    }
    Ok(())
}

fn check_weight(weight: f64) -> Result<()> {
    if !weight.is_finite() || weight <= 0.0 {
        return Err(Error::Domain(format!(
            "total weight must be positive, got {weight}"
        )));
    }
    Ok(())
}

fn observation_weight(model: &WeightedModel, y: f64) -> Result<f64> {
    let w = model.weight(y);
    if !w.is_finite() || w <= 0.0 {
        return Err(Error::Domain(format!(
            "weight function must be positive and finite, got w({y}) = {w}"
        )));
    }
    Ok(w)
}

/// Harmonic-type total weight estimate `((1/n) Σ 1/w(Y_i))^{-1}`.
pub fn estimate_total_weight(sample: &Sample, model: &WeightedModel) -> Result<f64> {
    let mut acc = 0.0;
    for &y in sample.values() {
        acc += 1.0 / observation_weight(model, y)?;
    }
    Ok(sample.len() as f64 / acc)
}

/// The total weight to plug in: the model's known `W` when present,
/// otherwise the harmonic estimate from the sample.
pub fn resolve_weight(sample: &Sample, model: &WeightedModel) -> Result<f64> {
    match model.total_weight() {
        Some(w) => Ok(w),
        None => estimate_total_weight(sample, model),
    }
}

/// Weighted empirical moment `(weight / n) Σ Y_i^k / w(Y_i)`.
pub fn empirical_moment(
    sample: &Sample,
    model: &WeightedModel,
    k: u32,
    weight: f64,
) -> Result<MomentEstimate> {
    check_weight(weight)?;
    let mut acc = 0.0;
    for &y in sample.values() {
        acc += y.powi(k as i32) / observation_weight(model, y)?;
    }
    Ok(MomentEstimate {
        order: k,
        value: weight * acc / sample.len() as f64,
        weight_used: weight,
    })
}

/// Basic moment-type density estimator
/// `(weight/n) Σ (1/w(Y_i)) (alpha-1)/(x Γ(alpha)) (alpha Y_i/x)^{alpha-1} e^{-alpha Y_i/x}`.
pub fn moment_density_basic(
    sample: &Sample,
    model: &WeightedModel,
    weight: f64,
    alpha: f64,
    x: f64,
) -> Result<f64> {
    if !alpha.is_finite() || alpha < 2.0 {
        return Err(Error::Domain(format!(
            "basic density estimator requires alpha >= 2 (the alpha - 1 factor vanishes below), got {alpha}"
        )));
    }
    check_point("x", x)?;
    check_weight(weight)?;
    let log_coeff = (alpha - 1.0).ln() - x.ln() - lgamma(alpha);
    let log_ax = alpha.ln() - x.ln();
    let rate = alpha / x;
    let mut acc = 0.0;
    for &y in sample.values() {
        let w = observation_weight(model, y)?;
        acc += (log_coeff + (alpha - 1.0) * (log_ax + y.ln()) - rate * y).exp() / w;
    }
    Ok(weight * acc / sample.len() as f64)
}

/// Modified ("star") density estimator for length-biased samples:
/// `(1/n) Σ (weight/Y_i^2) (alpha Y_i/x)^alpha e^{-alpha Y_i/x} / Γ(alpha)`,
/// equivalently `(1/n) Σ (weight/Y_i) h_{alpha,x,1}(Y_i)`.
pub fn moment_density_star(
    sample: &Sample,
    model: &WeightedModel,
    weight: f64,
    alpha: f64,
    x: f64,
) -> Result<f64> {
    if model.kind() != ModelKind::LengthBiased {
        return Err(Error::Config(
            "the star density estimator is defined for length-biased models".into(),
        ));
    }
    if !alpha.is_finite() || alpha < 1.0 {
        return Err(Error::Domain(format!(
            "star density estimator requires alpha >= 1, got {alpha}"
        )));
    }
    check_point("x", x)?;
    check_weight(weight)?;
    let log_coeff = weight.ln() - lgamma(alpha) + alpha * (alpha.ln() - x.ln());
    let rate = alpha / x;
    let mut acc = 0.0;
    for &y in sample.values() {
        acc += (log_coeff + (alpha - 2.0) * y.ln() - rate * y).exp();
    }
    Ok(acc / sample.len() as f64)
}

/// Survival estimator
/// `(1/n) Σ (weight/Y_i) (alpha Y_i/x)^alpha e^{-alpha Y_i/x} / Γ(alpha)`.
///
/// The value is a sum of nonnegative terms and is reported raw: it may
/// exceed 1 and is not clamped here.
pub fn survival_estimate(
    sample: &Sample,
    _model: &WeightedModel,
    weight: f64,
    alpha: f64,
    x: f64,
) -> Result<f64> {
    if !alpha.is_finite() || alpha < 1.0 {
        return Err(Error::Domain(format!(
            "survival estimator requires alpha >= 1, got {alpha}"
        )));
    }
    check_point("x", x)?;
    check_weight(weight)?;
    let log_coeff = weight.ln() - lgamma(alpha) + alpha * (alpha.ln() - x.ln());
    let rate = alpha / x;
    let mut acc = 0.0;
    for &y in sample.values() {
        acc += (log_coeff + (alpha - 1.0) * y.ln() - rate * y).exp();
    }
    Ok(acc / sample.len() as f64)
}

/// Direct-problem density estimator: the basic estimator with `w = 1` and
/// `W = 1`, used to recover the observed density itself.
pub fn direct_density(sample: &Sample, alpha: f64, y: f64) -> Result<f64> {
    moment_density_basic(sample, &WeightedModel::direct(), 1.0, alpha, y)
}

/// Analytic derivative of [`direct_density`] in the evaluation point: each
/// term `T_i(y)` contributes `T_i(y) (alpha/y)(Y_i/y - 1)`, so the estimate
/// is stationary wherever an isolated term peaks (`y = Y_i`).
pub fn direct_density_derivative(sample: &Sample, alpha: f64, y: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha < 2.0 {
        return Err(Error::Domain(format!(
            "direct density derivative requires alpha >= 2, got {alpha}"
        )));
    }
    check_point("y", y)?;
    let log_coeff = (alpha - 1.0).ln() - y.ln() - lgamma(alpha);
    let log_ay = alpha.ln() - y.ln();
    let rate = alpha / y;
    let mut acc = 0.0;
    for &obs in sample.values() {
        let term = (log_coeff + (alpha - 1.0) * (log_ay + obs.ln()) - rate * obs).exp();
        acc += term * rate * (obs / y - 1.0);
    }
    Ok(acc / sample.len() as f64)
}

/// Plug-in estimates for the excess-life model, all built from the direct
/// density estimate of the observed density and its derivative.
#[derive(Clone, Copy, Debug)]
pub struct ExcessPlugins {
    /// Target density: `-g'(y) / g(g0)`.
    pub density: f64,
    /// Hazard rate: `-g'(y) / g(y)`.
    pub hazard: f64,
    /// Weight function value `1/hazard`; `None` where `g'(y) = 0`.
    pub weight_fn: Option<f64>,
    /// Total weight: `1 / g(g0)`.
    pub total_weight: f64,
}

/// Compute the excess-life plug-ins at `y`, reading off the total weight
/// from the direct density at `g0_eval_point` (the observed density cannot
/// be evaluated at zero itself; see [`default_g0_eval_point`]).
pub fn excess_plugins(
    sample: &Sample,
    alpha: f64,
    y: f64,
    g0_eval_point: f64,
) -> Result<ExcessPlugins> {
    check_point("g0_eval_point", g0_eval_point)?;
    let g0 = direct_density(sample, alpha, g0_eval_point)?;
    if g0.is_nan() || g0 <= 0.0 {
        return Err(Error::Domain(format!(
            "direct density vanishes at the total-weight evaluation point {g0_eval_point}"
        )));
    }
    let g = direct_density(sample, alpha, y)?;
    if g.is_nan() || g <= 0.0 {
        return Err(Error::Domain(format!(
            "direct density vanishes at y = {y}; plug-ins are undefined there"
        )));
    }
    let g_prime = direct_density_derivative(sample, alpha, y)?;
    let total_weight = 1.0 / g0;
    Ok(ExcessPlugins {
        density: -g_prime * total_weight,
        hazard: -g_prime / g,
        weight_fn: if g_prime == 0.0 {
            None
        } else {
            Some(-g / g_prime)
        },
        total_weight,
    })
}

/// Default evaluation point standing in for zero in the plug-in total
/// weight: five percent of the sample median.
pub fn default_g0_eval_point(sample: &Sample) -> f64 {
    0.05 * sample.median()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::builtin_scenario;
    use crate::special::{integrate, DeltaKernel, QuadratureSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn lb(values: &[f64]) -> (Sample, WeightedModel) {
        (
            Sample::new(values.to_vec()).unwrap(),
            WeightedModel::length_biased(None),
        )
    }

    #[test]
    fn total_weight_examples() {
        let (s, _) = lb(&[1.0, 2.0]);
        assert_eq!(
            estimate_total_weight(&s, &WeightedModel::direct()).unwrap(),
            1.0
        );
        let (s, m) = lb(&[1.0, 2.0]);
        assert_relative_eq!(
            estimate_total_weight(&s, &m).unwrap(),
            4.0 / 3.0,
            max_relative = 1e-15
        );
        let (s, m) = lb(&[2.5, 2.5, 2.5]);
        assert_relative_eq!(
            estimate_total_weight(&s, &m).unwrap(),
            2.5,
            max_relative = 1e-15
        );
    }

    #[test]
    fn empirical_moment_examples() {
        let (s, m) = lb(&[1.0, 2.0, 0.7, 3.1]);
        let w_hat = estimate_total_weight(&s, &m).unwrap();
        // k = 0 with the harmonic weight normalizes to 1 by construction
        let m0 = empirical_moment(&s, &m, 0, w_hat).unwrap();
        assert_relative_eq!(m0.value, 1.0, max_relative = 1e-15);
        // length-biased k = 1: Y/w(Y) = 1, so the estimate is the weight itself
        let m1 = empirical_moment(&s, &m, 1, w_hat).unwrap();
        assert_relative_eq!(m1.value, w_hat, max_relative = 1e-15);

        let (s, m) = lb(&[1.0, 2.0]);
        let m2 = empirical_moment(&s, &m, 2, 4.0 / 3.0).unwrap();
        assert_relative_eq!(m2.value, 2.0, max_relative = 1e-14);
        assert_eq!(m2.order, 2);
    }

    #[test]
    fn basic_density_single_observation() {
        let s = Sample::new(vec![1.0]).unwrap();
        let v = moment_density_basic(&s, &WeightedModel::direct(), 1.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(v, 0.27067056647322538, max_relative = 1e-13);
    }

    #[test]
    fn basic_density_decays_and_averages() {
        let (s, m) = lb(&[1e6]);
        let v = moment_density_basic(&s, &m, 1.0, 2.0, 1.0).unwrap();
        assert_eq!(v, 0.0); // exponential decay underflows cleanly, no NaN
        let (s1, m) = lb(&[1.3]);
        let (s2, _) = lb(&[1.3, 1.3]);
        let a = moment_density_basic(&s1, &m, 0.5, 7.0, 2.0).unwrap();
        let b = moment_density_basic(&s2, &m, 0.5, 7.0, 2.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn basic_density_domain_errors() {
        let (s, m) = lb(&[1.0]);
        assert!(moment_density_basic(&s, &m, 1.0, 1.5, 1.0).is_err());
        assert!(moment_density_basic(&s, &m, 1.0, 2.0, 0.0).is_err());
        assert!(moment_density_basic(&s, &m, 1.0, 2.0, -1.0).is_err());
    }

    #[test]
    fn star_density_examples() {
        let (s, m) = lb(&[1.0]);
        let v = moment_density_star(&s, &m, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(v, 0.36787944117144232, max_relative = 1e-13);
        let (s2, _) = lb(&[1.0, 1.0]);
        let v2 = moment_density_star(&s2, &m, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(v, v2);
    }

    #[test]
    fn star_density_requires_length_biased_model() {
        let s = Sample::new(vec![1.0]).unwrap();
        let err = moment_density_star(&s, &WeightedModel::direct(), 1.0, 2.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn star_density_expectation_identity() {
        // E of one summand against g equals the kernel-smoothed density:
        // two independent quadrature routes must agree
        let (scenario, model) = builtin_scenario("lb-exp2").unwrap();
        let w = model.known_weight().unwrap();
        let spec = QuadratureSpec::default();
        for alpha in [4.0, 16.0] {
            let x = 1.0;
            let kernel = DeltaKernel::new(alpha, x, 1).unwrap();
            let smoothed = integrate(|u| scenario.density(u), Some(&kernel), &spec).unwrap();
            let summand_mean = integrate(
                |y| {
                    let s = Sample::new(vec![y]).unwrap();
                    let term = moment_density_star(&s, &model, w, alpha, x).unwrap();
                    term * crate::models::observed_density(&scenario, &model, y).unwrap()
                },
                None,
                &spec,
            )
            .unwrap();
            assert_relative_eq!(summand_mean, smoothed, max_relative = 1e-8);
        }
    }

    #[test]
    fn survival_estimator_examples() {
        let (s, m) = lb(&[1.0]);
        let v = survival_estimate(&s, &m, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(v, 0.36787944117144232, max_relative = 1e-13);
        // kernel mass escapes the sample as x grows
        let far = survival_estimate(&s, &m, 1.0, 4.0, 1e9).unwrap();
        assert!((0.0..1e-20).contains(&far), "far = {far}");
    }

    #[test]
    fn survival_expectation_identity() {
        let (scenario, model) = builtin_scenario("excess-gamma22").unwrap();
        let w = model.known_weight().unwrap();
        let spec = QuadratureSpec::default();
        let (alpha, x) = (8.0, 2.0);
        let kernel = DeltaKernel::new(alpha, x, 1).unwrap();
        let smoothed = integrate(|u| scenario.survival(u), Some(&kernel), &spec).unwrap();
        let summand_mean = integrate(
            |y| {
                let s = Sample::new(vec![y]).unwrap();
                let term = survival_estimate(&s, &model, w, alpha, x).unwrap();
                term * crate::models::observed_density(&scenario, &model, y).unwrap()
            },
            None,
            &spec,
        )
        .unwrap();
        assert_relative_eq!(summand_mean, smoothed, max_relative = 1e-8);
    }

    #[test]
    fn direct_density_matches_basic_with_unit_weights() {
        let s = Sample::new(vec![0.8, 1.4, 2.0]).unwrap();
        let v = direct_density(&s, 5.0, 1.1).unwrap();
        let b = moment_density_basic(&s, &WeightedModel::direct(), 1.0, 5.0, 1.1).unwrap();
        assert_eq!(v, b);
        assert_relative_eq!(
            direct_density(&Sample::new(vec![1.0]).unwrap(), 2.0, 1.0).unwrap(),
            0.27067056647322538,
            max_relative = 1e-13
        );
    }

    #[test]
    fn direct_derivative_stationary_at_single_observation() {
        let s = Sample::new(vec![2.0]).unwrap();
        assert_eq!(direct_density_derivative(&s, 5.0, 2.0).unwrap(), 0.0);
        assert!(direct_density_derivative(&s, 5.0, 1.0).unwrap() > 0.0);
        assert!(direct_density_derivative(&s, 5.0, 3.0).unwrap() < 0.0);
    }

    #[test]
    fn direct_derivative_matches_finite_differences() {
        let s = Sample::new(vec![0.9, 1.7, 2.4, 3.3]).unwrap();
        for &y in &[0.8, 1.2, 2.9] {
            let h = 1e-6 * y;
            let fd = (direct_density(&s, 6.0, y + h).unwrap()
                - direct_density(&s, 6.0, y - h).unwrap())
                / (2.0 * h);
            let an = direct_density_derivative(&s, 6.0, y).unwrap();
            assert_relative_eq!(an, fd, max_relative = 1e-5);
        }
    }

    #[test]
    fn excess_plugins_identities() {
        let s = Sample::new(vec![2.0]).unwrap();
        let p = excess_plugins(&s, 5.0, 2.0, 0.1).unwrap();
        assert_eq!(p.hazard, 0.0);
        assert!(p.weight_fn.is_none());

        let s = Sample::new(vec![1.0, 2.0, 3.5, 0.4]).unwrap();
        let p = excess_plugins(&s, 6.0, 1.5, default_g0_eval_point(&s)).unwrap();
        let w = p.weight_fn.expect("derivative is nonzero here");
        assert_relative_eq!(p.hazard * w, 1.0, max_relative = 1e-12);
        // density plug-in is hazard rescaled by g(y) W
        let g = direct_density(&s, 6.0, 1.5).unwrap();
        assert_relative_eq!(
            p.density,
            p.hazard * g * p.total_weight,
            max_relative = 1e-12
        );
    }

    #[test]
    fn excess_plugin_density_is_consistent() {
        // on large excess-life samples the plug-in density recovers the
        // target f(2) = e^{-1}/2 of the gamma(2, 2) truth; the derivative
        // estimator wants somewhat stronger smoothing than the density one,
        // hence alpha ~ 2 n^{2/5}
        let n = 100_000;
        let alpha = (2.0 * (n as f64).powf(0.4)).ceil();
        let truth = 0.18393972058572116;
        let mut estimates = Vec::new();
        for seed in [77, 78, 79] {
            let sample = crate::simulation::sample_scenario("excess-gamma22", n, seed).unwrap();
            let p = excess_plugins(&sample, alpha, 2.0, default_g0_eval_point(&sample)).unwrap();
            assert!(
                (p.density - truth).abs() < 0.03,
                "seed {seed}: plug-in density {} vs truth {truth}",
                p.density
            );
            assert!(
                (p.total_weight - 4.0).abs() < 0.4,
                "W-hat = {}",
                p.total_weight
            );
            estimates.push(p.density);
        }
        let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
        assert!((mean - truth).abs() < 0.015, "mean {mean} vs truth {truth}");
    }

    #[test]
    fn zero_weight_observations_are_domain_errors() {
        let s = Sample::new(vec![1.0, 2.0]).unwrap();
        let m = WeightedModel::custom(std::sync::Arc::new(|y: f64| y - 1.0), None);
        assert!(matches!(
            estimate_total_weight(&s, &m),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            empirical_moment(&s, &m, 1, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            moment_density_basic(&s, &m, 1.0, 4.0, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn resolve_weight_prefers_known_weight() {
        let s = Sample::new(vec![1.0, 2.0]).unwrap();
        let known = WeightedModel::length_biased(Some(0.5));
        assert_eq!(resolve_weight(&s, &known).unwrap(), 0.5);
        let unknown = WeightedModel::length_biased(None);
        assert_relative_eq!(
            resolve_weight(&s, &unknown).unwrap(),
            4.0 / 3.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn moment_unbiasedness_under_the_observed_law() {
        // E[W Y^k / w(Y)] over g equals the k-th moment of the target
        let (scenario, model) = builtin_scenario("lb-exp2").unwrap();
        let w = model.known_weight().unwrap();
        let spec = QuadratureSpec::default();
        // moments of 2 e^{-2x}
        for (k, want) in [(0i32, 1.0), (1, 0.5), (2, 0.5)] {
            let lhs = integrate(
                |y| {
                    w * y.powi(k) / model.weight(y)
                        * crate::models::observed_density(&scenario, &model, y).unwrap()
                },
                None,
                &spec,
            )
            .unwrap();
            assert_relative_eq!(lhs, want, max_relative = 1e-8);
        }
    }

    #[test]
    fn curve_builder_validates_grid() {
        let eval = |_x: f64, _a: f64| Ok(0.0);
        assert!(EstimateCurve::build("star", &[], eval).is_err());
        assert!(EstimateCurve::build("star", &[(1.0, 2.0), (1.0, 2.0)], eval).is_err());
        assert!(EstimateCurve::build("star", &[(-1.0, 2.0)], eval).is_err());
        let c = EstimateCurve::build("star", &[(0.5, 2.0), (1.0, 3.0)], eval).unwrap();
        assert_eq!(c.grid, vec![0.5, 1.0]);
        assert_eq!(c.alphas, vec![2.0, 3.0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn estimates_are_nonnegative(
            values in proptest::collection::vec(0.05f64..20.0, 1..8),
            alpha in 2.0f64..40.0,
            x in 0.1f64..8.0,
        ) {
            let s = Sample::new(values).unwrap();
            let m = WeightedModel::length_biased(Some(0.5));
            prop_assert!(moment_density_basic(&s, &m, 0.5, alpha, x).unwrap() >= 0.0);
            prop_assert!(moment_density_star(&s, &m, 0.5, alpha, x).unwrap() >= 0.0);
            prop_assert!(survival_estimate(&s, &m, 0.5, alpha, x).unwrap() >= 0.0);
            prop_assert!(direct_density(&s, alpha, x).unwrap() >= 0.0);
        }
    }
}
