//! Weighted sampling models, observed samples, and known-truth scenarios.
//!
//! A [`WeightedModel`] describes how observations are biased:
//! `g(y) = w(y) f(y) / W`. A [`TruthScenario`] carries a fully known target
//! distribution (density, derivatives, cdf, survival, total weight) and is
//! what the theory formulas and the Monte Carlo oracles evaluate against.

use crate::error::{Error, Result};
use std::sync::Arc;

/// A shared real-valued function of one real argument.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Grid on which scenario self-consistency is checked at construction.
const CONSISTENCY_GRID: [f64; 9] = [0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    LengthBiased,
    ExcessLife,
    Direct,
    Custom,
}

/// The sampling model `g(y) = w(y) f(y) / W`.
#[derive(Clone)]
pub struct WeightedModel {
    kind: ModelKind,
    weight_fn: RealFn,
    total_weight: Option<f64>,
}

impl WeightedModel {
    /// Length-biased sampling: `w(y) = y`.
    pub fn length_biased(total_weight: Option<f64>) -> Self {
        Self {
            kind: ModelKind::LengthBiased,
            weight_fn: Arc::new(|y| y),
            total_weight,
        }
    }

    /// Direct (unbiased) sampling: `w = 1`, `W = 1` exactly.
    pub fn direct() -> Self {
        Self {
            kind: ModelKind::Direct,
            weight_fn: Arc::new(|_| 1.0),
            total_weight: Some(1.0),
        }
    }

    /// Excess-life sampling tied to a known scenario: `w = S / f`, so the
    /// observed density is `S(y) / W` with `W` the scenario's total weight.
    pub fn excess_life(scenario: &TruthScenario) -> Self {
        let survival = Arc::clone(&scenario.survival);
        let density = Arc::clone(&scenario.density);
        Self {
            kind: ModelKind::ExcessLife,
            weight_fn: Arc::new(move |y| survival(y) / density(y)),
            total_weight: Some(scenario.total_weight),
        }
    }

    /// A user-supplied weight function; when the total weight is absent the
    /// estimators require the plug-in weight path.
    pub fn custom(weight_fn: RealFn, total_weight: Option<f64>) -> Self {
        Self {
            kind: ModelKind::Custom,
            weight_fn,
            total_weight,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Weight function value `w(y)`.
    pub fn weight(&self, y: f64) -> f64 {
        (self.weight_fn)(y)
    }

    pub fn total_weight(&self) -> Option<f64> {
        self.total_weight
    }

    /// The total weight, failing when it has not been supplied.
    pub fn known_weight(&self) -> Result<f64> {
        self.total_weight.ok_or_else(|| {
            Error::State("total weight W is not known for this model; estimate it first".into())
        })
    }
}

/// Supremum bounds on the second derivatives of the target density and cdf.
#[derive(Clone, Copy, Debug)]
pub struct SmoothnessBounds {
    /// `sup |f''|`.
    pub density_second: f64,
    /// `sup |F''|`.
    pub cdf_second: f64,
}

/// A fully known target distribution used by theory formulas and oracles.
#[derive(Clone)]
pub struct TruthScenario {
    name: String,
    density: RealFn,
    density_d1: Option<RealFn>,
    density_d2: Option<RealFn>,
    cdf: RealFn,
    survival: RealFn,
    total_weight: f64,
    smoothness: Option<SmoothnessBounds>,
}

impl TruthScenario {
    /// Build a scenario and verify basic consistency on a fixed grid:
    /// `S = 1 - F` to 1e-12, `F(0) = 0`, `F` nondecreasing, `f >= 0`.
    pub fn new(
        name: impl Into<String>,
        density: RealFn,
        cdf: RealFn,
        survival: RealFn,
        total_weight: f64,
    ) -> Result<Self> {
        if !total_weight.is_finite() || total_weight <= 0.0 {
            return Err(Error::Config(format!(
                "total weight must be positive, got {total_weight}"
            )));
        }
        if cdf(0.0).abs() > 1e-12 {
            return Err(Error::Config("scenario cdf must start at F(0) = 0".into()));
        }
        let mut prev = 0.0;
        for &x in &CONSISTENCY_GRID {
            let f = cdf(x);
            let s = survival(x);
            if (s - (1.0 - f)).abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "scenario survival disagrees with 1 - cdf at x = {x}: {s} vs {}",
                    1.0 - f
                )));
            }
            if f + 1e-12 < prev {
                return Err(Error::Config(format!("scenario cdf decreases at x = {x}")));
            }
            if density(x) < 0.0 {
                return Err(Error::Config(format!(
                    "scenario density is negative at x = {x}"
                )));
            }
            prev = f;
        }
        Ok(Self {
            name: name.into(),
            density,
            density_d1: None,
            density_d2: None,
            cdf,
            survival,
            total_weight,
            smoothness: None,
        })
    }

    pub fn with_derivatives(mut self, first: RealFn, second: RealFn) -> Self {
        self.density_d1 = Some(first);
        self.density_d2 = Some(second);
        self
    }

    pub fn with_smoothness(mut self, bounds: SmoothnessBounds) -> Self {
        self.smoothness = Some(bounds);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Target density `f(x)`.
    pub fn density(&self, x: f64) -> f64 {
        (self.density)(x)
    }

    /// `f'(x)`; fails fast when the scenario was built without derivatives.
    pub fn density_deriv(&self, x: f64) -> Result<f64> {
        match &self.density_d1 {
            Some(d) => Ok(d(x)),
            None => Err(Error::State(format!(
                "scenario '{}' does not supply a density derivative",
                self.name
            ))),
        }
    }

    /// `f''(x)`; fails fast when the scenario was built without derivatives.
    pub fn density_second(&self, x: f64) -> Result<f64> {
        match &self.density_d2 {
            Some(d) => Ok(d(x)),
            None => Err(Error::State(format!(
                "scenario '{}' does not supply a second density derivative",
                self.name
            ))),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        (self.cdf)(x)
    }

    /// Survival function `S(x) = 1 - F(x)`.
    pub fn survival(&self, x: f64) -> f64 {
        (self.survival)(x)
    }

    /// Total weight `W = ∫ w f`.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn smoothness(&self) -> Option<SmoothnessBounds> {
        self.smoothness
    }
}

/// Where a sample came from, for reproducibility records.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub scenario: String,
    pub seed: u64,
}

/// An observed sample of strictly positive values, kept in draw order
/// (estimator sums run in this order, which pins down bit-exact results).
#[derive(Clone, Debug)]
pub struct Sample {
    values: Vec<f64>,
    provenance: Option<Provenance>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain(
                "sample must contain at least one value".into(),
            ));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain(format!(
                    "sample values must be strictly positive, got {v} at index {i}"
                )));
            }
        }
        Ok(Self {
            values,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    /// Sample median (average of the middle pair for even sizes).
    pub fn median(&self) -> f64 {
        let mut sorted = self.values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = sorted.len();
        if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        }
    }
}

/// Names accepted by [`builtin_scenario`].
pub const BUILTIN_SCENARIOS: [&str; 2] = ["lb-exp2", "excess-gamma22"];

/// Construct one of the built-in (scenario, model) pairs.
///
/// - `lb-exp2`: length-biased sampling whose observed density is
///   Gamma(2, scale 1/2); the target is `f(x) = 2 e^{-2x}` with `W = 1/2`.
/// - `excess-gamma22`: excess-life sampling for a Gamma(2, scale 2) target,
///   so `S(x) = (1 + x/2) e^{-x/2}`, `W = 4`, and the observations follow
///   an equal mixture of Gamma(1, 2) and Gamma(2, 2).
pub fn builtin_scenario(name: &str) -> Result<(TruthScenario, WeightedModel)> {
    match name {
        "lb-exp2" => {
            let density: RealFn =
                Arc::new(|x: f64| if x < 0.0 { 0.0 } else { 2.0 * (-2.0 * x).exp() });
            let d1: RealFn = Arc::new(|x: f64| -4.0 * (-2.0 * x).exp());
            let d2: RealFn = Arc::new(|x: f64| 8.0 * (-2.0 * x).exp());
            let cdf: RealFn = Arc::new(|x: f64| if x <= 0.0 { 0.0 } else { -(-2.0 * x).exp_m1() });
            let survival: RealFn = Arc::new(|x: f64| if x <= 0.0 { 1.0 } else { (-2.0 * x).exp() });
            let scenario = TruthScenario::new("lb-exp2", density, cdf, survival, 0.5)?
                .with_derivatives(d1, d2)
                .with_smoothness(SmoothnessBounds {
                    density_second: 8.0,
                    cdf_second: 4.0,
                });
            let model = WeightedModel::length_biased(Some(0.5));
            Ok((scenario, model))
        }
        "excess-gamma22" => {
            let density: RealFn = Arc::new(|x: f64| {
                if x <= 0.0 {
                    0.0
                } else {
                    0.25 * x * (-0.5 * x).exp()
                }
            });
            let d1: RealFn = Arc::new(|x: f64| 0.125 * (2.0 - x) * (-0.5 * x).exp());
            let d2: RealFn = Arc::new(|x: f64| 0.0625 * (x - 4.0) * (-0.5 * x).exp());
            let cdf: RealFn = Arc::new(|x: f64| {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - (1.0 + 0.5 * x) * (-0.5 * x).exp()
                }
            });
            let survival: RealFn = Arc::new(|x: f64| {
                if x <= 0.0 {
                    1.0
                } else {
                    (1.0 + 0.5 * x) * (-0.5 * x).exp()
                }
            });
            let scenario = TruthScenario::new("excess-gamma22", density, cdf, survival, 4.0)?
                .with_derivatives(d1, d2)
                .with_smoothness(SmoothnessBounds {
                    density_second: 0.25,
                    cdf_second: 0.25,
                });
            let model = WeightedModel::excess_life(&scenario);
            Ok((scenario, model))
        }
        other => Err(Error::Config(format!(
            "unknown scenario '{other}' (available: {})",
            BUILTIN_SCENARIOS.join(", ")
        ))),
    }
}

/// Observed density `g(y) = w(y) f(y) / W`; for excess-life models this is
/// `S(y) / W`, which is also valid at `y = 0` where `g(0) = 1 / W`.
pub fn observed_density(scenario: &TruthScenario, model: &WeightedModel, y: f64) -> Result<f64> {
    if !y.is_finite() || y < 0.0 {
        return Err(Error::Domain(format!(
            "observation point must be nonnegative, got {y}"
        )));
    }
    let w_total = model.known_weight()?;
    let g = match model.kind() {
        ModelKind::ExcessLife => scenario.survival(y) / w_total,
        _ => model.weight(y) * scenario.density(y) / w_total,
    };
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{integrate, QuadratureSpec};
    use approx::assert_relative_eq;

    #[test]
    fn lb_exp2_scenario_values() {
        let (scenario, model) = builtin_scenario("lb-exp2").unwrap();
        assert_relative_eq!(
            scenario.density(1.0),
            0.27067056647322538,
            max_relative = 1e-15
        );
        assert_eq!(scenario.total_weight(), 0.5);
        assert_eq!(model.kind(), ModelKind::LengthBiased);
        assert_eq!(model.total_weight(), Some(0.5));
        // observed density at y = 1 is the Gamma(2, 1/2) density 4 e^{-2}
        assert_relative_eq!(
            observed_density(&scenario, &model, 1.0).unwrap(),
            0.54134113294645077,
            max_relative = 1e-14
        );
    }

    #[test]
    fn excess_gamma22_scenario_values() {
        let (scenario, model) = builtin_scenario("excess-gamma22").unwrap();
        assert_relative_eq!(
            scenario.survival(2.0),
            0.73575888234288464,
            max_relative = 1e-15
        );
        assert_eq!(scenario.total_weight(), 4.0);
        // g(0) = 1/W
        assert_relative_eq!(
            observed_density(&scenario, &model, 0.0).unwrap(),
            0.25,
            max_relative = 1e-15
        );
        // the gamma mode: f'(2) = 0
        assert_eq!(scenario.density_deriv(2.0).unwrap(), 0.0);
        assert_relative_eq!(
            scenario.density_deriv(4.0).unwrap(),
            -(-2.0f64).exp() / 4.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn unknown_scenario_is_a_config_error() {
        assert!(matches!(builtin_scenario("no-such"), Err(Error::Config(_))));
    }

    #[test]
    fn total_weight_matches_weighted_density_integral() {
        let spec = QuadratureSpec::default();
        for name in BUILTIN_SCENARIOS {
            let (scenario, model) = builtin_scenario(name).unwrap();
            let w = integrate(
                |y| {
                    // far tail: w = S/f is 0/0 in doubles while the true
                    // product S(y) is below 1e-300; treat it as zero
                    let v = model.weight(y) * scenario.density(y);
                    if v.is_finite() {
                        v
                    } else {
                        0.0
                    }
                },
                None,
                &spec,
            )
            .unwrap();
            // the length-biased integrand is exact in doubles, so it holds
            // to the quadrature tolerance; the excess one carries the
            // underflow guard above
            let tol = if name == "lb-exp2" { 1e-10 } else { 1e-8 };
            assert_relative_eq!(w, scenario.total_weight(), max_relative = tol);
        }
    }

    #[test]
    fn observed_density_integrates_to_one() {
        let spec = QuadratureSpec::default();
        for name in BUILTIN_SCENARIOS {
            let (scenario, model) = builtin_scenario(name).unwrap();
            let mass = integrate(
                |y| observed_density(&scenario, &model, y).unwrap(),
                None,
                &spec,
            )
            .unwrap();
            assert_relative_eq!(mass, 1.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn moment_relation_between_target_and_observed() {
        // W ∫ y^k g(y)/w(y) dy = ∫ x^k f(x) dx for k = 0, 1, 2
        let spec = QuadratureSpec::default();
        let (scenario, model) = builtin_scenario("lb-exp2").unwrap();
        let w_total = model.known_weight().unwrap();
        for k in 0..=2i32 {
            let lhs = w_total
                * integrate(
                    |y| {
                        y.powi(k) * observed_density(&scenario, &model, y).unwrap()
                            / model.weight(y)
                    },
                    None,
                    &spec,
                )
                .unwrap();
            let rhs = integrate(|x| x.powi(k) * scenario.density(x), None, &spec).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-7);
        }
    }

    #[test]
    fn excess_life_identities_via_finite_differences() {
        // f = -W g' and h_F = -g'/g, with g' taken numerically
        let (scenario, model) = builtin_scenario("excess-gamma22").unwrap();
        let w_total = model.known_weight().unwrap();
        for &y in &[0.5, 1.0, 2.0, 4.0, 6.0] {
            let h = 1e-6 * y;
            let g_plus = observed_density(&scenario, &model, y + h).unwrap();
            let g_minus = observed_density(&scenario, &model, y - h).unwrap();
            let g_prime = (g_plus - g_minus) / (2.0 * h);
            let g = observed_density(&scenario, &model, y).unwrap();
            assert_relative_eq!(-w_total * g_prime, scenario.density(y), max_relative = 1e-7);
            let hazard = scenario.density(y) / scenario.survival(y);
            assert_relative_eq!(-g_prime / g, hazard, max_relative = 1e-7);
        }
    }

    #[test]
    fn sample_validation() {
        assert!(Sample::new(vec![]).is_err());
        assert!(Sample::new(vec![1.0, 0.0]).is_err());
        assert!(Sample::new(vec![1.0, -2.0]).is_err());
        assert!(Sample::new(vec![1.0, f64::NAN]).is_err());
        let s = Sample::new(vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.median(), 2.0);
        assert_eq!(Sample::new(vec![4.0, 1.0, 3.0, 2.0]).unwrap().median(), 2.5);
    }

    #[test]
    fn direct_model_has_unit_weight() {
        let m = WeightedModel::direct();
        assert_eq!(m.total_weight(), Some(1.0));
        assert_eq!(m.weight(17.0), 1.0);
    }

    #[test]
    fn known_weight_is_a_state_error_when_absent() {
        let m = WeightedModel::length_biased(None);
        assert!(matches!(m.known_weight(), Err(Error::State(_))));
    }

    #[test]
    fn scenario_consistency_check_catches_bad_survival() {
        let density: RealFn = Arc::new(|x: f64| (-x).exp());
        let cdf: RealFn = Arc::new(|x: f64| 1.0 - (-x).exp());
        let survival: RealFn = Arc::new(|x: f64| (-0.9 * x).exp());
        assert!(TruthScenario::new("bad", density, cdf, survival, 1.0).is_err());
    }
}
