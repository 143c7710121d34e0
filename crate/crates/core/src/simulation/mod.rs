//! Monte Carlo verification engine.
//!
//! Replicates are addressed by `(root_seed, n, replicate)` and may run in
//! parallel; results land in an index-addressed table and are reduced in a
//! fixed order, so a run is bit-identical no matter how many threads
//! execute it.

mod moments;
mod normality;
mod sampling;

pub use moments::{exact_estimator_mean_var, exact_estimator_moments};
pub use normality::{
    ks_distance_standard_normal, normality_experiment, Centering, NormalityConfig, NormalityResult,
    Scaling,
};
pub use sampling::{sample_scenario, standard_normal_sample};

use crate::baseline::{jones_density, jones_survival, KernelSpec};
use crate::error::{Error, Result};
use crate::estimators::{
    estimate_total_weight, moment_density_basic, moment_density_star, survival_estimate,
};
use crate::models::{builtin_scenario, ModelKind, Sample, WeightedModel};
use crate::smoothing::{AlphaContext, AlphaRule};
use rayon::prelude::*;

/// Which estimator a Monte Carlo run exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorId {
    DensityStar,
    DensityBasic,
    Survival,
    JonesDensity,
    JonesSurvival,
}

impl EstimatorId {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::DensityStar => "star",
            Self::DensityBasic => "basic",
            Self::Survival => "survival",
            Self::JonesDensity => "jones-density",
            Self::JonesSurvival => "jones-survival",
        }
    }

    /// Whether the estimand is the survival function (else the density).
    pub fn targets_survival(&self) -> bool {
        matches!(self, Self::Survival | Self::JonesSurvival)
    }

    fn is_kernel_type(&self) -> bool {
        matches!(self, Self::JonesDensity | Self::JonesSurvival)
    }
}

impl std::fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EstimatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "star" => Ok(Self::DensityStar),
            "basic" => Ok(Self::DensityBasic),
            "survival" => Ok(Self::Survival),
            "jones-density" => Ok(Self::JonesDensity),
            "jones-survival" => Ok(Self::JonesSurvival),
            other => Err(Error::Config(format!(
                "unknown estimator '{other}' (star, basic, survival, jones-density, jones-survival)"
            ))),
        }
    }
}

/// Whether plug-in estimators use the model's known total weight or the
/// per-sample harmonic estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightMode {
    Known,
    Estimated,
}

impl std::str::FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "known" => Ok(Self::Known),
            "estimated" => Ok(Self::Estimated),
            other => Err(Error::Config(format!(
                "unknown weight mode '{other}' (known, estimated)"
            ))),
        }
    }
}

/// Configuration of a Monte Carlo MSE experiment.
#[derive(Clone, Debug)]
pub struct McConfig {
    pub scenario: String,
    pub estimator: EstimatorId,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub x_points: Vec<f64>,
    pub alpha_rule: AlphaRule,
    /// Bandwidth exponent for the kernel-type estimators, `h = n^{-beta}`.
    pub bandwidth_exp: f64,
    pub weight_mode: WeightMode,
    pub root_seed: u64,
    /// Retain the per-replicate values in each cell (needed for normality
    /// work; off by default to keep results small).
    pub keep_replicates: bool,
}

impl McConfig {
    pub fn new(
        scenario: impl Into<String>,
        estimator: EstimatorId,
        n_grid: Vec<usize>,
        replicates: usize,
        x_points: Vec<f64>,
        alpha_rule: AlphaRule,
        root_seed: u64,
    ) -> Self {
        // the moment estimators' theory assumes a known total weight; the
        // kernel baseline and the basic estimator are usually run plug-in
        let weight_mode = match estimator {
            EstimatorId::DensityStar | EstimatorId::Survival => WeightMode::Known,
            _ => WeightMode::Estimated,
        };
        Self {
            scenario: scenario.into(),
            estimator,
            n_grid,
            replicates,
            x_points,
            alpha_rule,
            bandwidth_exp: 0.2,
            weight_mode,
            root_seed,
            keep_replicates: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::Config("need at least 2 replicates".into()));
        }
        if self.n_grid.is_empty() {
            return Err(Error::Config("the sample-size grid is empty".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "the sample-size grid must be strictly ascending".into(),
            ));
        }
        if self.n_grid[0] == 0 {
            return Err(Error::Config("sample sizes must be positive".into()));
        }
        if self.x_points.is_empty() {
            return Err(Error::Config("no evaluation points given".into()));
        }
        if self.x_points.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::Config("evaluation points must be positive".into()));
        }
        Ok(())
    }
}

/// Aggregated Monte Carlo statistics at one `(n, x)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct McCell {
    pub n: usize,
    pub x: f64,
    /// `alpha` for the moment estimators, the bandwidth for kernel ones.
    pub smoothing: f64,
    pub truth: f64,
    pub mean: f64,
    pub bias: f64,
    pub variance: f64,
    pub mse: f64,
    pub se_mean: f64,
    pub se_mse: f64,
    /// Per-replicate values; empty unless `keep_replicates`.
    pub replicate_values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McResult {
    pub cells: Vec<McCell>,
    pub replicates: usize,
}

pub(crate) fn check_compatibility(estimator: EstimatorId, model: &WeightedModel) -> Result<()> {
    let ok = match estimator {
        EstimatorId::DensityStar | EstimatorId::JonesDensity => {
            model.kind() == ModelKind::LengthBiased
        }
        EstimatorId::Survival | EstimatorId::JonesSurvival => model.kind() == ModelKind::ExcessLife,
        EstimatorId::DensityBasic => true,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "estimator '{estimator}' does not apply to this sampling model"
        )))
    }
}

/// Replicate table: row r holds the estimator values at every requested
/// `(x, smoothing)` point for replicate r.
#[allow(clippy::too_many_arguments)]
pub(crate) fn replicate_estimates(
    model: &WeightedModel,
    scenario_name: &str,
    estimator: EstimatorId,
    n: usize,
    points: &[(f64, f64)],
    weight_mode: WeightMode,
    root_seed: u64,
    replicates: usize,
) -> Result<Vec<Vec<f64>>> {
    (0..replicates)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>> {
            let rng = sampling::replicate_rng(root_seed, n, r as u64);
            let sample = Sample::new(sampling::draw_scenario(scenario_name, n, rng)?)?;
            let weight = match weight_mode {
                WeightMode::Known => model.known_weight()?,
                WeightMode::Estimated => estimate_total_weight(&sample, model)?,
            };
            points
                .iter()
                .map(|&(x, smoothing)| evaluate(estimator, &sample, model, weight, smoothing, x))
                .collect()
        })
        .collect()
}

fn evaluate(
    estimator: EstimatorId,
    sample: &Sample,
    model: &WeightedModel,
    weight: f64,
    smoothing: f64,
    x: f64,
) -> Result<f64> {
    match estimator {
        EstimatorId::DensityStar => moment_density_star(sample, model, weight, smoothing, x),
        EstimatorId::DensityBasic => moment_density_basic(sample, model, weight, smoothing, x),
        EstimatorId::Survival => survival_estimate(sample, model, weight, smoothing, x),
        EstimatorId::JonesDensity => {
            let spec = KernelSpec::standard_normal(smoothing)?;
            jones_density(sample, model, weight, &spec, x)
        }
        EstimatorId::JonesSurvival => {
            let spec = KernelSpec::standard_normal(smoothing)?;
            jones_survival(sample, model, weight, &spec, x)
        }
    }
}

/// Run the Monte Carlo experiment described by `config`.
pub fn run_mc(config: &McConfig) -> Result<McResult> {
    config.validate()?;
    let (scenario, model) = builtin_scenario(&config.scenario)?;
    check_compatibility(config.estimator, &model)?;
    let w_truth = model.known_weight()?;

    let mut cells = Vec::with_capacity(config.n_grid.len() * config.x_points.len());
    for &n in &config.n_grid {
        let mut points = Vec::with_capacity(config.x_points.len());
        for &x in &config.x_points {
            let smoothing = if config.estimator.is_kernel_type() {
                KernelSpec::from_rate(n, config.bandwidth_exp)?.bandwidth
            } else {
                config
                    .alpha_rule
                    .resolve(&AlphaContext::new(n, x).with_truth(&scenario, w_truth))?
            };
            let truth = if config.estimator.targets_survival() {
                scenario.survival(x)
            } else {
                scenario.density(x)
            };
            points.push((x, smoothing, truth));
        }
        let eval_points: Vec<(f64, f64)> = points.iter().map(|p| (p.0, p.1)).collect();
        let rows = replicate_estimates(
            &model,
            &config.scenario,
            config.estimator,
            n,
            &eval_points,
            config.weight_mode,
            config.root_seed,
            config.replicates,
        )?;
        for (j, &(x, smoothing, truth)) in points.iter().enumerate() {
            let values: Vec<f64> = rows.iter().map(|row| row[j]).collect();
            let agg = aggregate(&values, truth);
            cells.push(McCell {
                n,
                x,
                smoothing,
                truth,
                mean: agg.mean,
                bias: agg.bias,
                variance: agg.variance,
                mse: agg.mse,
                se_mean: agg.se_mean,
                se_mse: agg.se_mse,
                replicate_values: if config.keep_replicates {
                    values
                } else {
                    Vec::new()
                },
            });
        }
    }
    Ok(McResult {
        cells,
        replicates: config.replicates,
    })
}

/// Two-pass replicate aggregation. `mse` is computed directly from the
/// errors, so `mse = bias^2 + variance` holds to accumulation precision
/// rather than by construction.
#[derive(Clone, Copy, Debug)]
pub struct Aggregate {
    pub mean: f64,
    pub bias: f64,
    pub variance: f64,
    pub mse: f64,
    pub se_mean: f64,
    pub se_mse: f64,
}

pub fn aggregate(values: &[f64], truth: f64) -> Aggregate {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let bias = mean - truth;
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / r;
    let mse = values
        .iter()
        .map(|v| (v - truth) * (v - truth))
        .sum::<f64>()
        / r;
    let mse_spread = values
        .iter()
        .map(|v| {
            let sq = (v - truth) * (v - truth);
            (sq - mse) * (sq - mse)
        })
        .sum::<f64>()
        / r;
    Aggregate {
        mean,
        bias,
        variance,
        mse,
        se_mean: (variance / r).sqrt(),
        se_mse: (mse_spread / r).sqrt(),
    }
}

/// Least-squares fit of `log mse` against `log n`.
#[derive(Clone, Copy, Debug)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn rate_fit(ns: &[f64], mses: &[f64]) -> Result<RateFit> {
    if ns.len() != mses.len() || ns.len() < 3 {
        return Err(Error::Domain(
            "rate fit needs equal-length inputs with at least 3 points".into(),
        ));
    }
    if ns.iter().chain(mses).any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::Domain(
            "rate fit inputs must be finite and positive".into(),
        ));
    }
    let xs: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let ys: Vec<f64> = mses.iter().map(|m| m.ln()).collect();
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_tot: f64 = ys.iter().map(|y| (y - y_mean) * (y - y_mean)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let fit = intercept + slope * x;
            (y - fit) * (y - fit)
        })
        .sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(RateFit {
        slope,
        intercept,
        r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tiny_config() -> McConfig {
        McConfig::new(
            "lb-exp2",
            EstimatorId::DensityStar,
            vec![8, 16],
            4,
            vec![1.0],
            AlphaRule::fixed(4.0),
            99,
        )
    }

    #[test]
    fn run_is_bit_reproducible() {
        let mut config = tiny_config();
        config.keep_replicates = true;
        let a = run_mc(&config).unwrap();
        let b = run_mc(&config).unwrap();
        assert_eq!(a, b);
        for (ca, cb) in a.cells.iter().zip(&b.cells) {
            assert_eq!(ca.mse.to_bits(), cb.mse.to_bits());
            for (va, vb) in ca.replicate_values.iter().zip(&cb.replicate_values) {
                assert_eq!(va.to_bits(), vb.to_bits());
            }
        }
    }

    #[test]
    fn mse_decomposition_holds_in_every_cell() {
        let result = run_mc(&tiny_config()).unwrap();
        for cell in &result.cells {
            assert_relative_eq!(
                cell.mse,
                cell.bias * cell.bias + cell.variance,
                max_relative = 1e-10
            );
            assert!(cell.mse >= cell.bias * cell.bias - 1e-12 * cell.mse.abs());
        }
    }

    #[test]
    fn estimator_scenario_mismatch_is_a_config_error() {
        let mut config = tiny_config();
        config.scenario = "excess-gamma22".into();
        assert!(matches!(run_mc(&config), Err(Error::Config(_))));
        let mut config = tiny_config();
        config.estimator = EstimatorId::Survival;
        assert!(matches!(run_mc(&config), Err(Error::Config(_))));
    }

    #[test]
    fn config_validation() {
        let mut config = tiny_config();
        config.replicates = 1;
        assert!(run_mc(&config).is_err());
        let mut config = tiny_config();
        config.n_grid = vec![16, 8];
        assert!(run_mc(&config).is_err());
        let mut config = tiny_config();
        config.x_points = vec![-1.0];
        assert!(run_mc(&config).is_err());
    }

    #[test]
    fn aggregate_degenerate_and_exact_cases() {
        // two identical replicates (degenerate seeds): zero variance and
        // mse = bias^2 exactly, since the two-way mean is exact
        let agg = aggregate(&[0.7, 0.7], 0.5);
        assert_eq!(agg.variance, 0.0);
        assert_eq!(agg.se_mean, 0.0);
        assert_relative_eq!(agg.mse, agg.bias * agg.bias, max_relative = 1e-15);

        let agg = aggregate(&[1.0, 2.0, 3.0, 4.0], 2.0);
        assert_relative_eq!(agg.mean, 2.5, max_relative = 1e-15);
        assert_relative_eq!(agg.variance, 1.25, max_relative = 1e-15);
        assert_relative_eq!(agg.mse, 1.5, max_relative = 1e-15);
        assert_relative_eq!(
            agg.mse,
            agg.bias * agg.bias + agg.variance,
            max_relative = 1e-12
        );
    }

    #[test]
    fn mc_mse_agrees_with_the_exact_moment_pipeline() {
        // at n = 1e4 with the rate-optimal alpha, the Monte Carlo MSE must
        // sit within three standard errors of bias^2 + var computed from
        // the exact term moments
        let n = 10_000usize;
        let alpha = (n as f64).powf(0.4).ceil();
        let config = McConfig::new(
            "lb-exp2",
            EstimatorId::DensityStar,
            vec![n],
            2000,
            vec![1.0],
            AlphaRule::global(0.4),
            4_909,
        );
        let result = run_mc(&config).unwrap();
        let cell = &result.cells[0];
        assert_eq!(cell.smoothing, alpha);

        let (scenario, model) = builtin_scenario("lb-exp2").unwrap();
        let (m1, var) = exact_estimator_mean_var(&scenario, &model, 1.0, alpha, n).unwrap();
        let exact_bias = m1 - scenario.density(1.0);
        let exact_mse = exact_bias * exact_bias + var;
        let dev = (cell.mse - exact_mse).abs();
        assert!(
            dev <= 3.0 * cell.se_mse,
            "mc mse {} vs exact {exact_mse}, {} se",
            cell.mse,
            dev / cell.se_mse
        );
    }

    #[test]
    fn mc_mean_agrees_with_the_exact_moment_oracle() {
        // single-observation estimator averaged over many replicates must
        // sit within four standard errors of the exact term mean
        let (scenario, model) = builtin_scenario("lb-exp2").unwrap();
        let alpha = 8.0;
        let mut config = McConfig::new(
            "lb-exp2",
            EstimatorId::DensityStar,
            vec![1],
            10_000,
            vec![1.0],
            AlphaRule::fixed(alpha),
            2024,
        );
        config.keep_replicates = true;
        let result = run_mc(&config).unwrap();
        let cell = &result.cells[0];
        let (m1, _) = exact_estimator_mean_var(&scenario, &model, 1.0, alpha, 1).unwrap();
        let dev = (cell.mean - m1).abs();
        assert!(
            dev <= 4.0 * cell.se_mean,
            "mean {} vs exact {m1}, {} se",
            cell.mean,
            dev / cell.se_mean
        );
    }

    #[test]
    fn rate_fit_recovers_exact_power_laws() {
        let ns = [100.0f64, 200.0, 400.0, 800.0];
        let mses: Vec<f64> = ns.iter().map(|n| 3.0 * n.powf(-0.8)).collect();
        let fit = rate_fit(&ns, &mses).unwrap();
        assert_relative_eq!(fit.slope, -0.8, max_relative = 1e-12);
        assert_relative_eq!(fit.r2, 1.0, epsilon = 1e-12);

        let flat = rate_fit(&ns, &[2.0, 2.0, 2.0, 2.0]).unwrap();
        assert_relative_eq!(flat.slope, 0.0, epsilon = 1e-15);
        assert_eq!(flat.r2, 1.0);

        assert!(rate_fit(&ns, &[1.0, 2.0, 3.0]).is_err());
        assert!(rate_fit(&[1.0, 2.0, 3.0], &[1.0, -2.0, 3.0]).is_err());
    }

    #[test]
    fn kernel_estimator_cells_report_the_bandwidth() {
        let config = McConfig::new(
            "lb-exp2",
            EstimatorId::JonesDensity,
            vec![32],
            4,
            vec![1.0],
            AlphaRule::global(0.4),
            5,
        );
        let result = run_mc(&config).unwrap();
        assert_relative_eq!(
            result.cells[0].smoothing,
            32f64.powf(-0.2),
            max_relative = 1e-15
        );
    }
}
